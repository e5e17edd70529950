//! Arbitrary-precision real enclosures: `xi` and everything derived from it.

pub mod cf;
pub mod enclosure;
pub mod frac;
pub mod policy;
pub mod roots;

pub use cf::{continued_fraction, continued_fraction_rational, convergents};
pub use enclosure::Enclosure;
pub use frac::{frac_nearest, frac_rational, FracResult};
pub use policy::{xi_enclosure, GrowthFit, PrecisionPolicy, XiSource, DEFAULT_GUARD_BITS};
pub use roots::{eval_int_poly, refine_root, NEWTON_BUDGET};
