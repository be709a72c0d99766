//! Likelihood and complete conditionals of the augmented posterior.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::config::PriorConfig;
use crate::dist::b_gamma_unchecked;
use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::special::{ln_gamma, ln_gamma_density};

const HALF_LN_2_OVER_PI: f64 = -0.225_791_352_644_727_4;
const HALF_LN_TAU: f64 = 0.918_938_533_204_672_8;

/// `b` written in terms of `φ = γ²`: `(1 + φ³) / (φ (1 + φ))`.
pub fn b_phi(phi: f64) -> f64 {
    b_gamma_unchecked(phi.sqrt())
}

/// `Σ λᵢ xᵢ²` split by the sign of `xᵢ` (zero counts as positive).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PhiStats {
    pub n: f64,
    pub pos: f64,
    pub neg: f64,
}

impl PhiStats {
    pub fn new(data: &[f64], lambda: Option<&[f64]>) -> Self {
        let mut s = PhiStats {
            n: data.len() as f64,
            ..Self::default()
        };
        for (i, &x) in data.iter().enumerate() {
            let w = lambda.map_or(1.0, |l| l[i]) * x * x;
            if x >= 0.0 {
                s.pos += w;
            } else {
                s.neg += w;
            }
        }
        s
    }

    /// `−½ Σ λᵢ xᵢ² φ^{−sign(xᵢ)}`.
    fn quadratic(&self, phi: f64) -> f64 {
        -0.5 * (self.pos / phi + self.neg * phi)
    }

    /// Everything in the two-piece normal kernel that depends on `φ`.
    pub fn skew_terms(&self, alpha: f64, phi: f64) -> f64 {
        -self.n * (alpha * b_phi(phi)).ln_1p() + 0.5 * self.n * phi.ln()
            - self.n * phi.ln_1p()
            + self.quadratic(phi)
    }

    pub fn log_cond_phi(&self, alpha: f64, phi: f64, prior: &PriorConfig) -> f64 {
        self.skew_terms(alpha, phi) + prior.ln_phi(phi)
    }
}

pub(crate) fn sum_ln_tilt(data: &[f64], alpha: f64) -> f64 {
    data.iter().map(|&x| (alpha * x * x).ln_1p()).sum()
}

pub(crate) fn log_cond_alpha_unchecked(
    data: &[f64],
    alpha: f64,
    phi: f64,
    prior: &PriorConfig,
) -> f64 {
    let n = data.len() as f64;
    -n * (alpha * b_phi(phi)).ln_1p() + sum_ln_tilt(data, alpha) + prior.ln_alpha(alpha)
}

/// `n` and `½ Σ (λᵢ − ln λᵢ)`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LambdaStats {
    pub n: f64,
    pub half_sum: f64,
}

impl LambdaStats {
    pub fn new(lambda: &[f64]) -> Self {
        Self {
            n: lambda.len() as f64,
            half_sum: 0.5 * lambda.iter().map(|&l| l - l.ln()).sum::<f64>(),
        }
    }

    pub fn log_cond_nu(&self, nu: f64, beta: f64) -> f64 {
        let half = 0.5 * nu;
        self.n * half * (0.5 * (nu - 2.0)).ln() - self.n * ln_gamma(half)
            - nu * (beta + self.half_sum)
    }
}

fn check_data(data: &[f64]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Ingestion(format!(
            "observation {i} is not finite ({})",
            data[i]
        ))),
        None => Ok(()),
    }
}

fn check_lambda(lambda: &[f64], n: usize) -> Result<()> {
    if lambda.len() != n {
        return Err(Error::Config(format!(
            "lambda has {} entries for {n} observations",
            lambda.len()
        )));
    }
    for &l in lambda {
        check_positive("lambda", l)?;
    }
    Ok(())
}

/// Log-likelihood of standardized BSN data in the `(α, φ)` parametrization.
/// Includes the constant `n ½ ln(2/π)`, so it equals `Σ ln s(xᵢ | α, γ)`.
pub fn log_likelihood_bsn(data: &[f64], alpha: f64, phi: f64) -> Result<f64> {
    check_nonnegative("alpha", alpha)?;
    check_positive("phi", phi)?;
    check_data(data)?;
    let stats = PhiStats::new(data, None);
    Ok(stats.n * HALF_LN_2_OVER_PI + stats.skew_terms(alpha, phi) + sum_ln_tilt(data, alpha))
}

/// Unnormalized log conditional of `φ`; `lambda = None` stands for
/// `λᵢ ≡ 1`, the BSN case.
pub fn log_cond_phi(
    data: &[f64],
    lambda: Option<&[f64]>,
    alpha: f64,
    phi: f64,
    prior: &PriorConfig,
) -> Result<f64> {
    check_nonnegative("alpha", alpha)?;
    check_positive("phi", phi)?;
    check_data(data)?;
    if let Some(l) = lambda {
        check_lambda(l, data.len())?;
    }
    Ok(PhiStats::new(data, lambda).log_cond_phi(alpha, phi, prior))
}

/// Unnormalized log conditional of `α` (same kernel for both models).
pub fn log_cond_alpha(data: &[f64], alpha: f64, phi: f64, prior: &PriorConfig) -> Result<f64> {
    check_nonnegative("alpha", alpha)?;
    check_positive("phi", phi)?;
    check_data(data)?;
    Ok(log_cond_alpha_unchecked(data, alpha, phi, prior))
}

/// Unnormalized log conditional of `ν` given the latent precisions.
pub fn log_cond_nu(lambda: &[f64], nu: f64, beta_nu: f64) -> Result<f64> {
    if !(nu > 2.0 && nu.is_finite()) {
        return Err(Error::Domain {
            name: "nu",
            value: nu,
            reason: "must be finite and > 2",
        });
    }
    check_positive("beta_nu", beta_nu)?;
    check_lambda(lambda, lambda.len())?;
    Ok(LambdaStats::new(lambda).log_cond_nu(nu, beta_nu))
}

/// Rate of the `λᵢ` conditional: `(ν − 2 + xᵢ² γ^{−2 sign(xᵢ)}) / 2`.
pub fn lambda_rate(x: f64, phi: f64, nu: f64) -> f64 {
    let scaled = if x >= 0.0 { x * x / phi } else { x * x * phi };
    0.5 * (nu - 2.0 + scaled)
}

pub(crate) fn fill_lambda<R: Rng + ?Sized>(
    data: &[f64],
    phi: f64,
    nu: f64,
    out: &mut [f64],
    rng: &mut R,
) {
    let unit = Gamma::new(0.5 * (nu + 1.0), 1.0).expect("shape > 1.5");
    for (l, &x) in out.iter_mut().zip(data) {
        *l = unit.sample(rng) / lambda_rate(x, phi, nu);
    }
}

/// Exact Gibbs draw of every latent precision:
/// `λᵢ ~ Gamma((ν + 1)/2, rate = (ν − 2 + xᵢ² γ^{−2 sign(xᵢ)})/2)`.
pub fn gibbs_update_lambda<R: Rng + ?Sized>(
    data: &[f64],
    phi: f64,
    nu: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_positive("phi", phi)?;
    if !(nu > 2.0 && nu.is_finite()) {
        return Err(Error::Domain {
            name: "nu",
            value: nu,
            reason: "must be finite and > 2",
        });
    }
    check_data(data)?;
    let mut out = vec![0.0; data.len()];
    fill_lambda(data, phi, nu, &mut out, rng);
    Ok(out)
}

/// Complete-data log density of `(x, λ)` under BSSTD:
/// `Σ ln[tilt(xᵢ) N₂(xᵢ | γ, 1/λᵢ) Gamma(λᵢ | ν/2, (ν−2)/2)]`.
pub(crate) fn log_complete_bsstd(
    data: &[f64],
    lambda: &[f64],
    alpha: f64,
    phi: f64,
    nu: f64,
) -> f64 {
    let stats = PhiStats::new(data, Some(lambda));
    let n = stats.n;
    let precision: f64 = lambda
        .iter()
        .map(|&l| 0.5 * l.ln() + ln_gamma_density(l, 0.5 * nu, 0.5 * (nu - 2.0)))
        .sum();
    n * (std::f64::consts::LN_2 - HALF_LN_TAU)
        + stats.skew_terms(alpha, phi)
        + sum_ln_tilt(data, alpha)
        + precision
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;
    use crate::sampling::RngStream;

    #[test]
    fn likelihood_matches_density_sum() {
        let data = [-1.3, -0.2, 0.0, 0.4, 2.5];
        for &(a, phi) in &[(0.0, 1.0), (1.0, 2.25), (3.0, 0.64)] {
            let spec = DistributionSpec::bsn(a, f64::sqrt(phi)).unwrap();
            let direct: f64 = data.iter().map(|&x| spec.log_pdf(x)).sum();
            let ll = log_likelihood_bsn(&data, a, phi).unwrap();
            assert!((ll - direct).abs() < 1e-12, "{ll} vs {direct}");
        }
    }

    #[test]
    fn standard_normal_case() {
        let data = [-1.0, 0.5, 2.0];
        let expected: f64 = data.iter().map(|&x| -HALF_LN_TAU - 0.5 * x * x).sum();
        assert!((log_likelihood_bsn(&data, 0.0, 1.0).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn b_phi_at_four() {
        assert!((b_phi(4.0) - 3.25).abs() < 1e-14);
    }

    #[test]
    fn single_zero_datum() {
        for &(a, phi) in &[(0.5, 0.7), (2.0, 3.0)] {
            let ll = log_likelihood_bsn(&[0.0], a, phi).unwrap();
            let kernel = 0.5 * f64::ln(phi) - phi.ln_1p() - (a * b_phi(phi)).ln_1p();
            assert!((ll - HALF_LN_2_OVER_PI - kernel).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(log_likelihood_bsn(&[1.0], 1.0, 0.0).is_err());
        assert!(log_likelihood_bsn(&[f64::NAN], 1.0, 1.0).is_err());
        assert!(log_cond_alpha(&[1.0], -0.1, 1.0, &PriorConfig::default()).is_err());
        assert!(log_cond_nu(&[1.0], 2.0, 0.1).is_err());
        assert!(log_cond_phi(&[1.0, 2.0], Some(&[1.0]), 1.0, 1.0, &PriorConfig::default()).is_err());
    }

    #[test]
    fn alpha_conditional_without_data_is_prior() {
        let prior = PriorConfig::default();
        for &a in &[0.0, 0.7, 5.0] {
            let c = log_cond_alpha(&[], a, 2.0, &prior).unwrap();
            assert!((c - prior.ln_alpha(a)).abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_data_terms_cancel_at_b() {
        let prior = PriorConfig::default();
        let phi = 1.7;
        let x = b_phi(phi).sqrt();
        let data = [x, -x, x];
        for &a in &[0.3, 4.0] {
            let c = log_cond_alpha(&data, a, phi, &prior).unwrap();
            assert!((c - prior.ln_alpha(a)).abs() < 1e-12);
        }
    }

    #[test]
    fn nu_conditional_with_unit_lambda() {
        let c = log_cond_nu(&[1.0; 4], 5.0, 0.1).unwrap();
        let expected = 4.0 * 2.5 * 1.5f64.ln() - 4.0 * ln_gamma(2.5) - 5.0 * (0.1 + 2.0);
        assert!((c - expected).abs() < 1e-12);
    }

    #[test]
    fn lambda_rates() {
        assert_eq!(lambda_rate(0.0, 2.0, 4.0), 1.0);
        assert_eq!(lambda_rate(2.0, 1.0, 4.0), 3.0);
        assert!((lambda_rate(-1.0, 4.0, 4.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn complete_data_density_factorizes() {
        let data = [-0.7, 1.1];
        let lambda = [0.8, 1.6];
        let (a, phi, nu): (f64, f64, f64) = (1.2, 1.44, 5.0);
        let mut expected = 0.0;
        for (&x, &l) in data.iter().zip(&lambda) {
            let two_piece = DistributionSpec::bsn(0.0, phi.sqrt())
                .unwrap()
                .with_location_scale(0.0, 1.0 / f64::sqrt(l))
                .unwrap();
            expected += (a * x * x).ln_1p() - (a * b_phi(phi)).ln_1p()
                + two_piece.log_pdf(x)
                + ln_gamma_density(l, 0.5 * nu, 0.5 * (nu - 2.0));
        }
        let got = log_complete_bsstd(&data, &lambda, a, phi, nu);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn lambda_draws_are_positive() {
        let mut rng = RngStream::new(3, 0);
        let l = gibbs_update_lambda(&[-3.0, 0.0, 8.0], 2.0, 4.0, &mut rng).unwrap();
        assert!(l.iter().all(|&v| v > 0.0));
    }
}
