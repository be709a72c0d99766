//! Exact random variate generation.
//!
//! All three families are two-component mixtures:
//!
//! ```text
//! s(x | α, γ) = 1/(1 + α b_γ) · s(x | γ) + α b_γ/(1 + α b_γ) · x² s(x | γ) / b_γ
//! ```
//!
//! so a draw picks the plain two-piece component or the x²-weighted one and
//! samples it exactly. The heavy-tailed bases are drawn through their scale
//! mixtures: Gamma precision mixing for the Student base, generalized Gamma
//! mixing of an exponential power (or, alternatively, of a uniform) kernel
//! for the generalized t base. Within the x²-weighted component the mixing
//! law is re-weighted by the kernel's second moment, which keeps it in the
//! same conjugate family. No sampler here uses rejection.

mod rng;
mod samplers;

pub use rng::{RngStream, StreamId};
pub use samplers::{
    sample, sample_bsgt, sample_bsn, sample_bsstd, sample_gg, sample_n, sample_quadratic_tilt,
    sample_skewed_uniform_normal, sample_standard, sample_two_piece, AugmentedDraw, GtPath,
    HalfLineSampler,
};
