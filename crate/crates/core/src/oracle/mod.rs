//! Independent numerical machinery used to validate the closed forms:
//! adaptive quadrature, numeric marginalization of the scale mixtures,
//! Monte Carlo moments, Kolmogorov–Smirnov gates and the validation suite.

pub mod check;
mod ks;
mod marginal;
mod mc;
mod quad;

pub use ks::{
    cdf_at_sorted, kolmogorov_survival, ks_critical_1pct, ks_one_sample, ks_statistic_sorted,
    ks_two_sample, KsOutcome,
};
pub use marginal::{marginalize_prop2, marginalize_prop3, marginalize_prop4, marginalize_prop5};
pub use mc::mc_moment;
pub use quad::{integrate, integrate_with_breaks, OracleResult, DEFAULT_TOL, EVALUATION_BUDGET};
