//! Exact and interval arithmetic laboratory for Markoff extremal numbers.
//!
//! The number `xi` is defined through a sequence of symmetric unimodular
//! matrices `x_k` obeying `x_{k+2} = x_k M_k x_{k+1}`. The crate generates the
//! sequence exactly ([`matseq`]), encloses `xi` and derived reals
//! ([`realfield`]), measures the normalized error of each asymptotic estimate
//! ([`auditors`]), runs the numerical experiments ([`experiments`]) and wires
//! all of it to a command line ([`cli`]).

pub mod auditors;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod matseq;
pub mod realfield;

pub use error::{Error, Result};

/// `(1 + sqrt 5) / 2`
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// `(-1)^k`
#[inline]
pub fn parity_sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Serializes big integers as decimal strings.
pub(crate) mod serde_int {
    use rug::Integer;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(n: &Integer, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub mod vec {
        use rug::Integer;
        use serde::ser::{SerializeSeq, Serializer};

        pub fn serialize<S: Serializer>(v: &[Integer], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for n in v {
                seq.serialize_element(&n.to_string())?;
            }
            seq.end()
        }
    }
}
