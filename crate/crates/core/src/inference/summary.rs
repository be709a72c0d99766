use serde::Serialize;

use super::config::Model;
use super::mcmc::{Block, Chain, Param};
use crate::error::{Error, Result};

pub const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSummary {
    pub param: Param,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub interval_50: [f64; 2],
    pub interval_95: [f64; 2],
    /// Effective sample size summed over chains.
    pub ess: f64,
}

impl ParamSummary {
    pub fn covers_95(&self, value: f64) -> bool {
        self.interval_95[0] <= value && value <= self.interval_95[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceSummary {
    pub block: Block,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub model: Model,
    pub chains: usize,
    pub draws: usize,
    pub params: Vec<ParamSummary>,
    /// Pooled post-burn-in acceptance rate per block.
    pub acceptance: Vec<AcceptanceSummary>,
    /// Posterior mean of each `λᵢ`; small values flag likely outliers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outlier_scores: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl PosteriorSummary {
    pub fn param(&self, param: Param) -> Option<&ParamSummary> {
        self.params.iter().find(|s| s.param == param)
    }

    pub fn acceptance_rate(&self, block: Block) -> Option<f64> {
        self.acceptance.iter().find(|a| a.block == block).map(|a| a.rate)
    }

    /// Index of the observation with the smallest posterior mean `λᵢ`.
    pub fn strongest_outlier(&self) -> Option<usize> {
        let scores = self.outlier_scores.as_ref()?;
        scores
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Geyer's initial positive sequence estimate of the effective sample size.
/// `None` for a constant series.
pub fn effective_sample_size(series: &[f64]) -> Option<f64> {
    let n = series.len();
    if n < 2 || series.iter().all(|&v| v == series[0]) {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let autocov = |k: usize| -> f64 {
        centred[..n - k]
            .iter()
            .zip(&centred[k..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = autocov(0);
    if c0.is_nan() || c0 <= 0.0 {
        return None;
    }
    let mut sum = 0.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        m += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    Some(n as f64 / tau)
}

pub fn posterior_summary(chains: &[Chain]) -> Result<PosteriorSummary> {
    let fewest = chains.iter().map(|c| c.draws.len()).min().unwrap_or(0);
    if fewest < MIN_DRAWS {
        return Err(Error::InsufficientDraws {
            needed: MIN_DRAWS,
            found: fewest,
        });
    }
    let model = chains[0].model;
    if chains.iter().any(|c| c.model != model) {
        return Err(Error::Config("chains come from different models".into()));
    }
    let mut warnings = Vec::new();
    let mut params = Vec::new();
    for &param in Param::for_model(model) {
        let per_chain: Vec<Vec<f64>> = chains.iter().map(|c| c.series(param)).collect();
        let mut pooled: Vec<f64> = per_chain.iter().flatten().copied().collect();
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let var = pooled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        pooled.sort_by(f64::total_cmp);
        let mut ess = 0.0;
        for (k, s) in per_chain.iter().enumerate() {
            ess += match effective_sample_size(s) {
                Some(e) => e,
                None => {
                    warnings.push(format!(
                        "{} is constant in chain {k}; its ESS is reported as the draw count",
                        param.name()
                    ));
                    s.len() as f64
                }
            };
        }
        params.push(ParamSummary {
            param,
            mean,
            sd: var.sqrt(),
            median: quantile(&pooled, 0.5),
            interval_50: [quantile(&pooled, 0.25), quantile(&pooled, 0.75)],
            interval_95: [quantile(&pooled, 0.025), quantile(&pooled, 0.975)],
            ess,
        });
    }

    let acceptance = chains[0]
        .acceptance
        .iter()
        .map(|a| {
            let (proposed, accepted) = chains
                .iter()
                .flat_map(|c| c.acceptance.iter().filter(|x| x.block == a.block))
                .fold((0u64, 0u64), |(p, q), x| (p + x.proposed, q + x.accepted));
            AcceptanceSummary {
                block: a.block,
                rate: if proposed == 0 {
                    0.0
                } else {
                    accepted as f64 / proposed as f64
                },
            }
        })
        .collect();

    let outlier_scores = chains[0].lambda_mean.as_ref().map(|first| {
        let total: f64 = chains.iter().map(|c| c.draws.len() as f64).sum();
        let mut acc = vec![0.0; first.len()];
        for c in chains {
            let w = c.draws.len() as f64 / total;
            for (a, v) in acc.iter_mut().zip(c.lambda_mean.iter().flatten()) {
                *a += w * v;
            }
        }
        acc
    });

    Ok(PosteriorSummary {
        model,
        chains: chains.len(),
        draws: chains.iter().map(|c| c.draws.len()).sum(),
        params,
        acceptance,
        outlier_scores,
        warnings,
    })
}
