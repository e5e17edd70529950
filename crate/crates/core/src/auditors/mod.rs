//! Normalized-error audits of the asymptotic estimates.
//!
//! Each estimate `LHS = RHS + O(N^-1)` becomes the sequence
//! `N |LHS - RHS|` (or `N {LHS - RHS}` modulo the integers), evaluated with
//! exact integer coefficients and a `xi` enclosure sized per row.

pub mod form;
pub mod registry;
pub mod report;

pub use form::{enclosure_min, Evaluation, Recipe, ResidualExpr, XiForm};
pub use registry::{default_r3, default_r5, lookup, q_from_view, recipe, registry, EstimateSpec, Kind, M_J};
pub use report::{
    audit_estimate, audit_estimate_with, audit_policy, default_poly, planned_bits, AuditReport,
    AuditRow, AuditSummary, OneSided,
};
