//! Exact integer engine: the matrix sequence, its identities, derived scalars
//! and the quadratic polynomials `Q_k`.

pub mod identities;
pub mod matrix;
pub mod poly;
pub mod scalars;
pub mod sequence;

pub use identities::{family, verify_exact_identity, IdentityFamily, Residual, ResidualKind, FAMILIES};
pub use matrix::{CompanionMatrix, Mat2, SymMat2};
pub use poly::{q_lead_residual, q_polynomial, three_term_combination, three_term_residual, IntPoly};
pub use scalars::{
    a_k, b_k, c_k, d_k, derived_scalars, e_k, f_k, gcd_content_check, DerivedScalars, GcdReport,
};
pub use sequence::{
    extend_sequence, log2_abs, seed_search, symmetric_unimodular, MarkoffSequence, SeedPair,
    TermsView, DEFAULT_CAP,
};
