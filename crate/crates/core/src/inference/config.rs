use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Gamma(shape, rate)` prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    /// Log density up to the normalizing constant; `-inf` below zero.
    pub fn ln_kernel(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        let power = if self.shape == 1.0 {
            0.0
        } else {
            (self.shape - 1.0) * x.ln()
        };
        power - self.rate * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    /// Gamma shape for `φ = γ²`.
    pub a_phi: f64,
    /// Gamma rate for `φ`.
    pub b_phi: f64,
    pub alpha_prior: GammaPrior,
    /// Rate of the translated exponential prior on `ν − 2`.
    pub beta_nu: f64,
    /// Extension only: prior on the generalized t shape `p`.
    pub gt_p_prior: GammaPrior,
    /// Extension only: exponential rate for `q − 2/p`.
    pub gt_q_excess_rate: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            a_phi: 2.0,
            b_phi: 0.5,
            alpha_prior: GammaPrior {
                shape: 1.0,
                rate: 0.1,
            },
            beta_nu: 0.1,
            gt_p_prior: GammaPrior {
                shape: 2.0,
                rate: 1.0,
            },
            gt_q_excess_rate: 0.1,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("a_phi", self.a_phi),
            ("b_phi", self.b_phi),
            ("alpha prior shape", self.alpha_prior.shape),
            ("alpha prior rate", self.alpha_prior.rate),
            ("beta_nu", self.beta_nu),
            ("gt p prior shape", self.gt_p_prior.shape),
            ("gt p prior rate", self.gt_p_prior.rate),
            ("gt q excess rate", self.gt_q_excess_rate),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "prior hyperparameter {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn ln_phi(&self, phi: f64) -> f64 {
        GammaPrior {
            shape: self.a_phi,
            rate: self.b_phi,
        }
        .ln_kernel(phi)
    }

    pub(crate) fn ln_alpha(&self, alpha: f64) -> f64 {
        self.alpha_prior.ln_kernel(alpha)
    }

    pub(crate) fn ln_nu(&self, nu: f64) -> f64 {
        if nu > 2.0 {
            -self.beta_nu * (nu - 2.0)
        } else {
            f64::NEG_INFINITY
        }
    }

    pub(crate) fn ln_gt_shape(&self, p: f64, q: f64) -> f64 {
        let excess = q - 2.0 / p;
        if !(p > 0.0 && excess > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.gt_p_prior.ln_kernel(p) - self.gt_q_excess_rate * excess
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Bsn,
    Bsstd,
    /// Random-walk inference on the generalized t shape as well; an
    /// extension that must be switched on through `McmcConfig`.
    Bsgt,
}

/// Explicit starting values; `None` fields fall back to the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialValues {
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub nu: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// Moment-based `α`, mass-ratio `φ`, `ν = 6`, `λ = 1`.
    #[default]
    Default,
    Explicit(InitialValues),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub target_accept: f64,
    /// Robbins–Monro adaptation runs for iterations `1..=adapt_until`.
    pub adapt_until: usize,
    /// Adaptation gain `c` in `log σ += c t^{-0.6} (a − target)`.
    pub adapt_gain: f64,
    /// Initial random-walk standard deviation on every log scale.
    pub initial_scale: f64,
    pub chains: usize,
    pub seed: u64,
    pub init: Init,
    /// Keep the full `λ` vector in every retained draw.
    pub store_lambda: bool,
    pub enable_extensions: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burn_in: 5_000,
            thin: 1,
            target_accept: 0.44,
            adapt_until: 5_000,
            adapt_gain: 1.0,
            initial_scale: 0.5,
            chains: 1,
            seed: 1,
            init: Init::Default,
            store_lambda: false,
            enable_extensions: false,
        }
    }
}

impl McmcConfig {
    /// Iterations, burn-in and adaptation horizon set together
    /// (`adapt_until = burn_in`).
    pub fn new(iterations: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            iterations,
            burn_in,
            adapt_until: burn_in,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.iterations == 0 || self.thin == 0 || self.chains == 0 {
            return fail("iterations, thin and chains must be positive".into());
        }
        if self.burn_in >= self.iterations {
            return fail(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            ));
        }
        if self.adapt_until > self.burn_in {
            return fail(format!(
                "adaptation must stop by the end of burn-in ({} > {})",
                self.adapt_until, self.burn_in
            ));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return fail(format!("target acceptance {} not in (0, 1)", self.target_accept));
        }
        if !(self.initial_scale.is_finite() && self.initial_scale > 0.0) {
            return fail(format!(
                "proposal scale {} must be finite and > 0",
                self.initial_scale
            ));
        }
        if !(self.adapt_gain.is_finite() && self.adapt_gain >= 0.0) {
            return fail(format!("adaptation gain {} must be >= 0", self.adapt_gain));
        }
        Ok(())
    }

    pub fn retained_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}
