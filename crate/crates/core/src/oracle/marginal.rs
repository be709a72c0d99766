//! Numeric marginalization of the scale-mixture hierarchies.
//!
//! Everything here is evaluated from the hierarchy's conditional and mixing
//! densities as written, with its own constants, and never calls the
//! closed-form densities in [`crate::dist`].

use std::cell::Cell;
use std::f64::consts::PI;

use super::quad::{integrate_with_breaks, OracleResult};
use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::special::{ln_gamma, ln_gamma_density, ln_gg_density};

const OUTER_TOL: f64 = 1e-11;
const INNER_TOL: f64 = 1e-12;

/// `(1 + αx²) / (1 + α b_γ)` with `b_γ = (γ³ + γ⁻³)/(γ + γ⁻¹)`.
fn tilt(x: f64, alpha: f64, gamma: f64) -> f64 {
    let b = (gamma.powi(3) + gamma.powi(-3)) / (gamma + 1.0 / gamma);
    (1.0 + alpha * x * x) / (1.0 + alpha * b)
}

/// Base coordinate on the right (`x / γ`) or left (`xγ`) piece.
fn piece(x: f64, gamma: f64) -> f64 {
    if x >= 0.0 {
        x / gamma
    } else {
        x * gamma
    }
}

fn validate_skew(alpha: f64, gamma: f64) -> Result<()> {
    check_nonnegative("alpha", alpha)?;
    check_positive("gamma", gamma)?;
    Ok(())
}

/// Standardizing scale of the generalized t, evaluated independently.
fn gt_delta(p: f64, q: f64) -> Result<f64> {
    check_positive("p", p)?;
    check_positive("q", q)?;
    if p * q <= 2.0 {
        return Err(Error::VarianceUndefined { p, q });
    }
    let var = (2.0 / p * q.ln() + ln_gamma(3.0 / p) + ln_gamma(q - 2.0 / p)
        - ln_gamma(1.0 / p)
        - ln_gamma(q))
    .exp();
    Ok(1.0 / var.sqrt())
}

/// Breakpoints around the bulk of a `Gamma(shape, rate)` mixing density.
fn gamma_breaks(shape: f64, rate: f64) -> Vec<f64> {
    let mean = shape / rate;
    let sd = shape.sqrt() / rate;
    [-8.0, -3.0, 0.0, 3.0, 8.0]
        .iter()
        .map(|k| mean + k * sd)
        .filter(|&v| v > 0.0)
        .collect()
}

fn scale_result(r: OracleResult, factor: f64) -> OracleResult {
    OracleResult {
        value: r.value * factor,
        abs_error_estimate: r.abs_error_estimate * factor.abs(),
        ..r
    }
}

/// Bimodal skewed Student density at `x` as
/// `tilt(x) ∫ N₂(x | γ, λ) Gamma(λ | ν/2, (ν−2)/2) dλ`, where `N₂` is the
/// two-piece normal with precision `λ`.
pub fn marginalize_prop2(x: f64, alpha: f64, gamma: f64, nu: f64) -> Result<OracleResult> {
    validate_skew(alpha, gamma)?;
    if !(nu > 2.0 && nu.is_finite()) {
        return Err(Error::Domain {
            name: "nu",
            value: nu,
            reason: "must be finite and > 2",
        });
    }
    let z2 = piece(x, gamma).powi(2);
    let shape = 0.5 * nu;
    let rate = 0.5 * (nu - 2.0);
    let ln_c = 0.5 * (2.0 / PI).ln() - (gamma + 1.0 / gamma).ln();
    let integrand = |lambda: f64| {
        if lambda <= 0.0 {
            return 0.0;
        }
        (ln_c + 0.5 * lambda.ln() - 0.5 * lambda * z2 + ln_gamma_density(lambda, shape, rate)).exp()
    };
    let r = integrate_with_breaks(integrand, 0.0, f64::INFINITY, &gamma_breaks(shape, rate), OUTER_TOL);
    Ok(scale_result(r, tilt(x, alpha, gamma)))
}

/// Two-piece normal with scale `λ^{-1/2}` at `x`, integrating the skewed
/// uniform on `(−(u/λ)^{1/2}/γ, (u/λ)^{1/2} γ)` against `Gamma(u | 3/2, 1/2)`.
pub fn marginalize_prop3(x: f64, gamma: f64, lambda: f64) -> Result<OracleResult> {
    check_positive("gamma", gamma)?;
    check_positive("lambda", lambda)?;
    let lower = lambda * piece(x, gamma).powi(2);
    let norm = 1.0 / (gamma + 1.0 / gamma);
    let integrand = |u: f64| {
        if u <= lower || u <= 0.0 {
            return 0.0;
        }
        norm * (lambda / u).sqrt() * ln_gamma_density(u, 1.5, 0.5).exp()
    };
    let mut breaks = gamma_breaks(1.5, 0.5);
    breaks.push(lower);
    Ok(integrate_with_breaks(integrand, 0.0, f64::INFINITY, &breaks, OUTER_TOL))
}

/// Two-piece exponential power kernel `exp(−|z/c|^p) / (2cΓ(1 + 1/p))`
/// with generalized Gamma mixing of the scale, `c = s^{-1/2} q^{1/p} δ`.
pub fn marginalize_prop4(x: f64, alpha: f64, gamma: f64, p: f64, q: f64) -> Result<OracleResult> {
    validate_skew(alpha, gamma)?;
    let delta = gt_delta(p, q)?;
    let z = piece(x, gamma).abs();
    let ln_two_piece = (2.0 / (gamma + 1.0 / gamma)).ln();
    let ln_kernel_norm = -(2.0f64.ln()) - ln_gamma(1.0 + 1.0 / p);
    let q_root = q.powf(1.0 / p);
    let integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let c = s.powf(-0.5) * q_root * delta;
        let ln_k = ln_kernel_norm - c.ln() - (z / c).powf(p);
        (ln_two_piece + ln_k + ln_gg_density(s, p, q)).exp()
    };
    let bulk = q.powf(2.0 / p);
    let r = integrate_with_breaks(integrand, 0.0, f64::INFINITY, &[0.25 * bulk, bulk, 4.0 * bulk], OUTER_TOL);
    Ok(scale_result(r, tilt(x, alpha, gamma)))
}

/// Double marginalization of the skewed uniform kernel of half-width
/// `a = c(s) u^{1/p}` over `u ~ Gamma(1 + 1/p, 1)` and generalized Gamma `s`.
pub fn marginalize_prop5(x: f64, alpha: f64, gamma: f64, p: f64, q: f64) -> Result<OracleResult> {
    validate_skew(alpha, gamma)?;
    let delta = gt_delta(p, q)?;
    let z = piece(x, gamma).abs();
    let norm = 1.0 / (gamma + 1.0 / gamma);
    let q_root = q.powf(1.0 / p);
    let u_shape = 1.0 + 1.0 / p;
    let inner_evals = Cell::new(0usize);
    let inner_err = Cell::new(0.0f64);
    let inner_ok = Cell::new(true);

    let outer = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let c = s.powf(-0.5) * q_root * delta;
        let u_min = (z / c).powf(p);
        // SU density 1/(a(γ+1/γ)) on the support, a = c u^{1/p}
        let inner = |u: f64| {
            if u <= u_min || u <= 0.0 {
                return 0.0;
            }
            let ln_a = c.ln() + u.ln() / p;
            (ln_gamma_density(u, u_shape, 1.0) - ln_a).exp()
        };
        let r = integrate_with_breaks(inner, 0.0, f64::INFINITY, &[u_min, u_shape], INNER_TOL);
        inner_evals.set(inner_evals.get() + r.evaluations);
        inner_err.set(inner_err.get().max(r.abs_error_estimate));
        inner_ok.set(inner_ok.get() && r.converged);
        norm * r.value * ln_gg_density(s, p, q).exp()
    };
    let bulk = q.powf(2.0 / p);
    let r = integrate_with_breaks(outer, 0.0, f64::INFINITY, &[0.25 * bulk, bulk, 4.0 * bulk], OUTER_TOL);
    let r = OracleResult {
        evaluations: r.evaluations + inner_evals.get(),
        // each inner error is weighted by a mixing density integrating to one
        abs_error_estimate: r.abs_error_estimate + norm * inner_err.get(),
        converged: r.converged && inner_ok.get(),
        ..r
    };
    Ok(scale_result(r, tilt(x, alpha, gamma)))
}
