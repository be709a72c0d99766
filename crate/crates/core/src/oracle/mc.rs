use rand::Rng;

use super::quad::OracleResult;
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::sampling::sample;

/// Monte Carlo estimate of `E(Y^r)`; `abs_error_estimate` is one standard
/// error.
pub fn mc_moment<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    r: u32,
    n: usize,
    rng: &mut R,
) -> Result<OracleResult> {
    if !spec.moment_report(r).exists {
        return Err(Error::MomentNotFinite {
            order: r,
            base: spec.base().name(),
        });
    }
    if n < 2 {
        return Err(Error::Config(format!("mc_moment needs n >= 2, got {n}")));
    }
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let v = sample(spec, rng).powi(r as i32);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok(OracleResult {
        value: mean,
        abs_error_estimate: (var / n as f64).sqrt(),
        evaluations: n,
        converged: true,
    })
}
