//! Thin wrappers over `libm` special functions.

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Log density of `Gamma(shape, rate)` at `x > 0`.
pub fn ln_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Log density of the generalized Gamma mixing law
/// `f(s) = p / (2 Γ(q)) s^{pq/2 - 1} exp(-s^{p/2})`.
pub fn ln_gg_density(s: f64, p: f64, q: f64) -> f64 {
    if s <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (0.5 * p).ln() - ln_gamma(q) + (0.5 * p * q - 1.0) * s.ln() - s.powf(0.5 * p)
}
