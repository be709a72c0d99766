//! Metropolis-within-Gibbs over `(φ, α[, ν, λ])`.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conditionals::{
    b_phi, fill_lambda, log_complete_bsstd, log_cond_alpha_unchecked, sum_ln_tilt, LambdaStats,
    PhiStats,
};
use super::config::{Init, McmcConfig, Model, PriorConfig};
use crate::dist::{skew_moment, Base, BimodalSkewParams, DistributionSpec, GtShape, StudentTail};
use crate::error::{Error, Result};
use crate::sampling::{RngStream, StreamId};

/// Offset keeping `log(α + ε)` finite at `α = 0`.
pub const ALPHA_FLOOR: f64 = 1e-12;
const ADAPT_EXPONENT: f64 = 0.6;
const SCALE_TRACE_EVERY: usize = 100;
const DEFAULT_NU: f64 = 6.0;
const DEFAULT_GT_SHAPE: (f64, f64) = (2.0, 5.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedState {
    pub alpha: f64,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub log_posterior: f64,
}

impl AugmentedState {
    pub fn gamma(&self) -> f64 {
        self.phi.sqrt()
    }

    fn describe(&self) -> String {
        format!(
            "alpha={}, phi={}, nu={:?}, p={:?}, q={:?}, log_posterior={}",
            self.alpha, self.phi, self.nu, self.p, self.q, self.log_posterior
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Phi,
    Alpha,
    Nu,
    /// Joint `(log p, log(q − 2/p))` move of the generalized t shape.
    Shape,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Phi => "phi",
            Block::Alpha => "alpha",
            Block::Nu => "nu",
            Block::Shape => "shape",
        })
    }
}

/// Random-walk scale and acceptance bookkeeping for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTuner {
    pub block: Block,
    pub log_scale: f64,
    pub target: f64,
    pub gain: f64,
    pub proposed: u64,
    pub accepted: u64,
}

impl BlockTuner {
    pub fn new(block: Block, scale: f64, target: f64, gain: f64) -> Self {
        Self {
            block,
            log_scale: scale.ln(),
            target,
            gain,
            proposed: 0,
            accepted: 0,
        }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    fn adapt(&mut self, iteration: usize, accept_prob: f64) {
        let step = self.gain * (iteration as f64).powf(-ADAPT_EXPONENT);
        self.log_scale += step * (accept_prob - self.target);
    }
}

/// Accepts with probability `min(1, e^{log_ratio})`. Always consumes one
/// uniform so every block uses the stream identically.
pub fn metropolis_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u.ln() < log_ratio
}

/// Parameters held fixed by a sweep, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepBlocks {
    pub nu: bool,
    pub lambda: bool,
}

impl SweepBlocks {
    pub const ALL: Self = Self {
        nu: true,
        lambda: true,
    };
}

/// Per-sweep sufficient statistics, refreshed after each `λ` draw.
pub(crate) struct SweepCache {
    phi: PhiStats,
    lambda: LambdaStats,
}

/// The target of one model on one data set.
#[derive(Debug, Clone)]
pub struct Posterior<'a> {
    data: &'a [f64],
    model: Model,
    prior: PriorConfig,
}

impl<'a> Posterior<'a> {
    pub fn new(data: &'a [f64], model: Model, prior: PriorConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Ingestion("no observations".into()));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Ingestion(format!(
                "observation {i} is not finite ({})",
                data[i]
            )));
        }
        prior.validate()?;
        Ok(Self { data, model, prior })
    }

    pub fn data(&self) -> &[f64] {
        self.data
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn prior(&self) -> &PriorConfig {
        &self.prior
    }

    /// Sweep order of the random-walk blocks.
    pub fn blocks(&self) -> &'static [Block] {
        match self.model {
            Model::Bsn => &[Block::Phi, Block::Alpha],
            Model::Bsstd => &[Block::Phi, Block::Alpha, Block::Nu],
            Model::Bsgt => &[Block::Phi, Block::Alpha, Block::Shape],
        }
    }

    fn gt_spec(&self, state: &AugmentedState) -> Result<DistributionSpec> {
        let (p, q) = (state.p.unwrap_or(f64::NAN), state.q.unwrap_or(f64::NAN));
        Ok(DistributionSpec::new(
            BimodalSkewParams::from_phi(state.alpha, state.phi)?,
            Base::GenT(GtShape::new(p, q)?),
        ))
    }

    /// Joint log density of data, latents and parameters, up to a constant.
    pub fn log_posterior(&self, state: &AugmentedState) -> f64 {
        let priors = self.prior.ln_alpha(state.alpha) + self.prior.ln_phi(state.phi);
        match self.model {
            Model::Bsn => {
                PhiStats::new(self.data, None).skew_terms(state.alpha, state.phi)
                    + sum_ln_tilt(self.data, state.alpha)
                    + priors
            }
            Model::Bsstd => {
                let (Some(nu), Some(lambda)) = (state.nu, state.lambda.as_deref()) else {
                    return f64::NAN;
                };
                log_complete_bsstd(self.data, lambda, state.alpha, state.phi, nu)
                    + priors
                    + self.prior.ln_nu(nu)
            }
            Model::Bsgt => match self.gt_spec(state) {
                Ok(spec) => {
                    let ll: f64 = self.data.iter().map(|&x| spec.log_pdf(x)).sum();
                    ll + priors
                        + self
                            .prior
                            .ln_gt_shape(state.p.unwrap_or(f64::NAN), state.q.unwrap_or(f64::NAN))
                }
                Err(_) => f64::NEG_INFINITY,
            },
        }
    }

    pub fn initial_state(&self, init: &Init) -> Result<AugmentedState> {
        let explicit = match init {
            Init::Default => Default::default(),
            Init::Explicit(v) => *v,
        };
        let phi = match explicit.phi {
            Some(phi) => phi,
            None => self.mass_ratio_phi(),
        };
        let nu = match self.model {
            Model::Bsstd => Some(explicit.nu.unwrap_or(DEFAULT_NU)),
            _ => None,
        };
        let (p, q) = match self.model {
            Model::Bsgt => (
                Some(explicit.p.unwrap_or(DEFAULT_GT_SHAPE.0)),
                Some(explicit.q.unwrap_or(DEFAULT_GT_SHAPE.1)),
            ),
            _ => (None, None),
        };
        let base = match self.model {
            Model::Bsn => Base::Normal,
            Model::Bsstd => Base::Student(StudentTail::new(nu.unwrap_or(DEFAULT_NU))?),
            Model::Bsgt => Base::GenT(GtShape::new(p.unwrap_or(f64::NAN), q.unwrap_or(f64::NAN))?),
        };
        // Validates φ before the moment-based α uses it.
        BimodalSkewParams::from_phi(0.0, phi)?;
        let alpha = match explicit.alpha {
            Some(a) => a,
            None => self.moment_alpha(phi, &base),
        };
        BimodalSkewParams::from_phi(alpha, phi)?;
        let lambda = (self.model == Model::Bsstd).then(|| vec![1.0; self.data.len()]);
        let mut state = AugmentedState {
            alpha,
            phi,
            nu,
            p,
            q,
            lambda,
            log_posterior: 0.0,
        };
        state.log_posterior = self.log_posterior(&state);
        if !state.log_posterior.is_finite() {
            return Err(Error::Config(format!(
                "initial state has log-posterior {}: {}",
                state.log_posterior,
                state.describe()
            )));
        }
        Ok(state)
    }

    /// `#{xᵢ ≥ 0} / #{xᵢ < 0}` clamped to `[0.1, 10]`.
    fn mass_ratio_phi(&self) -> f64 {
        let pos = self.data.iter().filter(|&&x| x >= 0.0).count() as f64;
        let neg = self.data.len() as f64 - pos;
        if neg == 0.0 {
            10.0
        } else {
            (pos / neg).clamp(0.1, 10.0)
        }
    }

    /// Solves `mean(x²) = (b + α m₄)/(1 + α b)` for `α`; falls back to 1.
    fn moment_alpha(&self, phi: f64, base: &Base) -> f64 {
        let gamma = phi.sqrt();
        let m2 = self.data.iter().map(|x| x * x).sum::<f64>() / self.data.len() as f64;
        let b = b_phi(phi);
        let alpha = skew_moment(4, gamma, base).map(|m4| (m2 - b) / (m4 - m2 * b));
        match alpha {
            Ok(a) if a > 0.0 && a < 100.0 => a,
            _ => 1.0,
        }
    }

    pub(crate) fn cache(&self, state: &AugmentedState) -> SweepCache {
        let lambda = state.lambda.as_deref();
        SweepCache {
            phi: PhiStats::new(self.data, lambda),
            lambda: lambda.map(LambdaStats::new).unwrap_or_default(),
        }
    }

    /// Block conditional (up to a constant) plus the log-scale Jacobian,
    /// evaluated at the block's coordinates in `state`.
    fn block_target(&self, cache: &SweepCache, state: &AugmentedState, block: Block) -> f64 {
        let conditional = match (self.model, block) {
            (Model::Bsgt, _) => self.log_posterior(state),
            (_, Block::Phi) => cache.phi.log_cond_phi(state.alpha, state.phi, &self.prior),
            (_, Block::Alpha) => {
                log_cond_alpha_unchecked(self.data, state.alpha, state.phi, &self.prior)
            }
            (_, Block::Nu) => {
                let nu = state.nu.unwrap_or(f64::NAN);
                cache.lambda.log_cond_nu(nu, self.prior.beta_nu)
            }
            (_, Block::Shape) => f64::NAN,
        };
        conditional + log_jacobian(state, block)
    }

    fn propose<R: Rng + ?Sized>(
        &self,
        state: &AugmentedState,
        block: Block,
        scale: f64,
        rng: &mut R,
    ) -> Option<AugmentedState> {
        let z: f64 = rng.sample(StandardNormal);
        // Block targets read λ through the sweep cache, so candidates skip it.
        let mut next = AugmentedState {
            lambda: None,
            ..*state
        };
        match block {
            Block::Phi => next.phi = (state.phi.ln() + scale * z).exp(),
            Block::Alpha => {
                next.alpha = ((state.alpha + ALPHA_FLOOR).ln() + scale * z).exp() - ALPHA_FLOOR
            }
            Block::Nu => next.nu = Some(2.0 + ((state.nu? - 2.0).ln() + scale * z).exp()),
            Block::Shape => {
                let z2: f64 = rng.sample(StandardNormal);
                let (p, q) = (state.p?, state.q?);
                let p2 = (p.ln() + scale * z).exp();
                let excess = ((q - 2.0 / p).ln() + scale * z2).exp();
                next.p = Some(p2);
                next.q = Some(2.0 / p2 + excess);
            }
        }
        let finite = next.phi.is_finite()
            && next.phi > 0.0
            && next.alpha.is_finite()
            && next.alpha >= 0.0
            && next.nu.is_none_or(|v| v.is_finite() && v > 2.0)
            && next.p.is_none_or(|v| v.is_finite() && v > 0.0)
            && next.q.is_none_or(f64::is_finite);
        finite.then_some(next)
    }

    pub(crate) fn mh_step<R: Rng + ?Sized>(
        &self,
        cache: &SweepCache,
        state: &mut AugmentedState,
        tuner: &mut BlockTuner,
        adapt_at: Option<usize>,
        rng: &mut R,
    ) -> Result<bool> {
        let proposal = self.propose(state, tuner.block, tuner.scale(), rng);
        let current = self.block_target(cache, state, tuner.block);
        let log_ratio = match &proposal {
            Some(next) => {
                let t = self.block_target(cache, next, tuner.block);
                if t.is_nan() {
                    let mut dump = next.clone();
                    dump.log_posterior = t;
                    return Err(Error::Divergent {
                        iteration: adapt_at.unwrap_or(0),
                        state: dump.describe(),
                    });
                }
                t - current
            }
            None => f64::NEG_INFINITY,
        };
        let accepted = metropolis_accept(log_ratio, rng);
        tuner.proposed += 1;
        if let Some(t) = adapt_at {
            tuner.adapt(t, log_ratio.min(0.0).exp());
        }
        if accepted {
            let mut next = proposal.expect("only proposals can be accepted");
            next.lambda = state.lambda.take();
            *state = next;
            state.log_posterior = self.log_posterior(state);
            tuner.accepted += 1;
        }
        Ok(accepted)
    }

    /// One Gibbs sweep in the order φ, α, [ν, λ] (BSGT: φ, α, shape).
    /// `adapt_at` carries the iteration index while adaptation is on.
    pub fn sweep<R: Rng + ?Sized>(
        &self,
        state: &mut AugmentedState,
        tuners: &mut [BlockTuner],
        adapt_at: Option<usize>,
        blocks: SweepBlocks,
        rng: &mut R,
    ) -> Result<Vec<bool>> {
        let cache = self.cache(state);
        let mut decisions = Vec::with_capacity(tuners.len());
        for tuner in tuners.iter_mut() {
            if tuner.block == Block::Nu && !blocks.nu {
                continue;
            }
            decisions.push(self.mh_step(&cache, state, tuner, adapt_at, rng)?);
        }
        if self.model == Model::Bsstd && blocks.lambda {
            let nu = state.nu.unwrap_or(f64::NAN);
            let phi = state.phi;
            if let Some(lambda) = state.lambda.as_mut() {
                fill_lambda(self.data, phi, nu, lambda, rng);
            }
            state.log_posterior = self.log_posterior(state);
        }
        if state.log_posterior.is_nan() {
            return Err(Error::Divergent {
                iteration: adapt_at.unwrap_or(0),
                state: state.describe(),
            });
        }
        Ok(decisions)
    }

    pub fn tuners(&self, config: &McmcConfig) -> Vec<BlockTuner> {
        self.blocks()
            .iter()
            .map(|&b| BlockTuner::new(b, config.initial_scale, config.target_accept, config.adapt_gain))
            .collect()
    }
}

fn log_jacobian(state: &AugmentedState, block: Block) -> f64 {
    match block {
        Block::Phi => state.phi.ln(),
        Block::Alpha => (state.alpha + ALPHA_FLOOR).ln(),
        Block::Nu => (state.nu.unwrap_or(f64::NAN) - 2.0).ln(),
        Block::Shape => {
            let (p, q) = (state.p.unwrap_or(f64::NAN), state.q.unwrap_or(f64::NAN));
            p.ln() + (q - 2.0 / p).ln()
        }
    }
}

/// One random-walk Metropolis update of `block`, adapting its scale when
/// `adapt_at` is `Some(iteration)`.
pub fn mh_block_update<R: Rng + ?Sized>(
    posterior: &Posterior<'_>,
    state: &mut AugmentedState,
    tuner: &mut BlockTuner,
    adapt_at: Option<usize>,
    rng: &mut R,
) -> Result<bool> {
    let cache = posterior.cache(state);
    posterior.mh_step(&cache, state, tuner, adapt_at, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAcceptance {
    pub block: Block,
    /// Post-burn-in proposals.
    pub proposed: u64,
    pub accepted: u64,
    pub final_scale: f64,
}

impl BlockAcceptance {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSnapshot {
    pub iteration: usize,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub chain_id: usize,
    pub stream: StreamId,
    pub model: Model,
    /// Retained states; `lambda` is kept only with `store_lambda`.
    pub draws: Vec<AugmentedState>,
    pub acceptance: Vec<BlockAcceptance>,
    pub adaptation: Vec<ScaleSnapshot>,
    /// Posterior mean of each `λᵢ` over the retained draws (BSSTD).
    pub lambda_mean: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Alpha,
    Phi,
    Gamma,
    Nu,
    P,
    Q,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Phi => "phi",
            Param::Gamma => "gamma",
            Param::Nu => "nu",
            Param::P => "p",
            Param::Q => "q",
        }
    }

    pub fn of(&self, s: &AugmentedState) -> Option<f64> {
        match self {
            Param::Alpha => Some(s.alpha),
            Param::Phi => Some(s.phi),
            Param::Gamma => Some(s.gamma()),
            Param::Nu => s.nu,
            Param::P => s.p,
            Param::Q => s.q,
        }
    }

    pub fn for_model(model: Model) -> &'static [Param] {
        match model {
            Model::Bsn => &[Param::Alpha, Param::Phi, Param::Gamma],
            Model::Bsstd => &[Param::Alpha, Param::Phi, Param::Gamma, Param::Nu],
            Model::Bsgt => &[Param::Alpha, Param::Phi, Param::Gamma, Param::P, Param::Q],
        }
    }
}

impl Chain {
    pub fn series(&self, param: Param) -> Vec<f64> {
        self.draws.iter().filter_map(|s| param.of(s)).collect()
    }

    pub fn acceptance_rate(&self, block: Block) -> Option<f64> {
        self.acceptance.iter().find(|a| a.block == block).map(BlockAcceptance::rate)
    }
}

fn run_chain(posterior: &Posterior<'_>, config: &McmcConfig, chain_id: usize) -> Result<Chain> {
    let mut rng = RngStream::new(config.seed, chain_id as u64);
    let mut state = posterior.initial_state(&config.init)?;
    let mut tuners = posterior.tuners(config);
    let n = posterior.data.len();
    let mut lambda_sum = state.lambda.as_ref().map(|_| vec![0.0; n]);
    let mut draws = Vec::with_capacity(config.retained_draws());
    let mut adaptation = vec![ScaleSnapshot {
        iteration: 0,
        scales: tuners.iter().map(BlockTuner::scale).collect(),
    }];
    let mut post_counts = vec![(0u64, 0u64); tuners.len()];

    for t in 1..=config.iterations {
        let adapt_at = (t <= config.adapt_until).then_some(t);
        let before: Vec<_> = tuners.iter().map(|u| (u.proposed, u.accepted)).collect();
        posterior
            .sweep(&mut state, &mut tuners, adapt_at, SweepBlocks::ALL, &mut rng)
            .map_err(|e| match e {
                Error::Divergent { state, .. } => Error::Divergent {
                    iteration: t,
                    state: format!("chain {chain_id}: {state}"),
                },
                other => other,
            })?;
        if adapt_at.is_some() && (t % SCALE_TRACE_EVERY == 0 || t == config.adapt_until) {
            adaptation.push(ScaleSnapshot {
                iteration: t,
                scales: tuners.iter().map(BlockTuner::scale).collect(),
            });
        }
        if t <= config.burn_in {
            continue;
        }
        for ((u, b), c) in tuners.iter().zip(&before).zip(post_counts.iter_mut()) {
            c.0 += u.proposed - b.0;
            c.1 += u.accepted - b.1;
        }
        if (t - config.burn_in).is_multiple_of(config.thin) {
            if let (Some(sum), Some(l)) = (lambda_sum.as_mut(), state.lambda.as_ref()) {
                for (s, v) in sum.iter_mut().zip(l) {
                    *s += v;
                }
            }
            let mut snapshot = state.clone();
            if !config.store_lambda {
                snapshot.lambda = None;
            }
            draws.push(snapshot);
        }
    }

    let kept = draws.len() as f64;
    Ok(Chain {
        chain_id,
        stream: rng.id(),
        model: posterior.model,
        acceptance: tuners
            .iter()
            .zip(&post_counts)
            .map(|(u, &(proposed, accepted))| BlockAcceptance {
                block: u.block,
                proposed,
                accepted,
                final_scale: u.scale(),
            })
            .collect(),
        draws,
        adaptation,
        lambda_mean: lambda_sum.map(|s| s.into_iter().map(|v| v / kept).collect()),
    })
}

/// Runs `config.chains` independent chains in parallel; chain `k` uses
/// stream `k` of `config.seed`, so results do not depend on scheduling.
pub fn run_mcmc(
    data: &[f64],
    model: Model,
    prior: &PriorConfig,
    config: &McmcConfig,
) -> Result<Vec<Chain>> {
    config.validate()?;
    if model == Model::Bsgt && !config.enable_extensions {
        return Err(Error::Config(
            "BSGT fitting is an extension outside the published model; enable extensions to use it"
                .into(),
        ));
    }
    let posterior = Posterior::new(data, model, *prior)?;
    (0..config.chains)
        .into_par_iter()
        .map(|k| run_chain(&posterior, config, k))
        .collect()
}
