//! Bayesian estimation of `(α, φ = γ²)` and, for the Student family, `ν`.
//!
//! Random-walk Metropolis on log scales for the scalar blocks; for BSSTD
//! the latent precisions `λᵢ` are drawn exactly from their Gamma
//! conditionals each sweep.

mod conditionals;
mod config;
mod mcmc;
mod summary;

pub use conditionals::{
    b_phi, gibbs_update_lambda, lambda_rate, log_cond_alpha, log_cond_nu, log_cond_phi,
    log_likelihood_bsn,
};
pub use config::{GammaPrior, Init, InitialValues, McmcConfig, Model, PriorConfig};
pub use mcmc::{
    metropolis_accept, mh_block_update, run_mcmc, AugmentedState, Block, BlockAcceptance,
    BlockTuner, Chain, Param, Posterior, ScaleSnapshot, SweepBlocks, ALPHA_FLOOR,
};
pub use summary::{
    effective_sample_size, posterior_summary, AcceptanceSummary, ParamSummary, PosteriorSummary,
    MIN_DRAWS,
};
