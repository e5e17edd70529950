//! End-to-end numerical experiments: accumulation points of fractional
//! parts, their convergent structure, the `m_j` search, the degree-6
//! construction, brute-force lower-bound scans and the Lagrange scan.

pub(crate) mod common;
pub mod deg6;
pub mod delta;
pub mod lagrange;
pub mod mj;
pub mod scan;

pub use common::EXTRA_BITS;
pub use deg6::{deg6_pipeline, has_deg6_shape, p_polynomial, Deg6Record, Deg6Report, FracScanRow};
pub use delta::{
    approach_constant, approach_profile, delta_convergent_table, delta_points, delta_points_with,
    ApproachRow, ConvergentRow, ConvergentTable, DeltaSet, DenominatorClass,
};
pub use lagrange::{lagrange_scan, LagrangeReport, LagrangeRow};
pub use mj::{default_threshold, mixed_product, mj_search, MjOptions, MjResult, MjRow};
pub use scan::{brute_scan, default_exponent, eval_at_xi, small_q_polynomials, ScanMode, ScanOptions, ScanReport};
