use serde::Serialize;

use super::quad::integrate;
use crate::error::Result;

const INCREMENT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub n: usize,
    pub critical: f64,
    pub passed: bool,
}

/// Asymptotic 1% critical value of the one-sample KS distance, `1.63/√n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Distribution function at each point of `sorted` (ascending), integrating
/// `density` from −∞ to the first point and then between neighbours.
pub fn cdf_at_sorted<F: Fn(f64) -> f64>(density: F, sorted: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sorted.len());
    let Some(&first) = sorted.first() else {
        return Ok(out);
    };
    let mut acc = integrate(&density, f64::NEG_INFINITY, first, 1e-12).into_result()?;
    out.push(acc.clamp(0.0, 1.0));
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            acc += integrate(&density, w[0], w[1], INCREMENT_TOL).into_result()?;
        }
        out.push(acc.clamp(0.0, 1.0));
    }
    Ok(out)
}

/// `sup |F_n − F|` given ascending samples and `F` at each.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let below = i as f64 / n;
        let above = (j + 1) as f64 / n;
        d = d.max((cdf[i] - below).abs()).max((above - cdf[i]).abs());
        i = j + 1;
    }
    d
}

/// One-sample KS gate of `samples` against the law with `density`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], density: F) -> Result<KsOutcome> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cdf = cdf_at_sorted(density, &sorted)?;
    let statistic = ks_statistic_sorted(&sorted, &cdf);
    let critical = ks_critical_1pct(sorted.len());
    Ok(KsOutcome {
        statistic,
        n: sorted.len(),
        critical,
        passed: statistic < critical,
    })
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS distance and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let root = ne.sqrt();
    (d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d))
}
