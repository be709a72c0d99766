use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist::{b_gamma_unchecked, Base, BimodalSkewParams, DistributionSpec, GtShape, StudentTail};
use crate::error::{check_positive, Error, Result};

/// A variate together with the latent mixing values that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedDraw {
    pub x: f64,
    /// Gamma precision of the Student scale mixture.
    pub lambda: Option<f64>,
    /// Uniform-mixture radius variable.
    pub u: Option<f64>,
    /// Generalized Gamma mixing value of the generalized t.
    pub s: Option<f64>,
}

impl AugmentedDraw {
    fn plain(x: f64) -> Self {
        Self {
            x,
            ..Self::default()
        }
    }
}

/// Which scale-mixture hierarchy draws the generalized t base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GtPath {
    /// Exponential power kernel under generalized Gamma mixing.
    #[default]
    ExpPowerMixture,
    /// Uniform kernel under Gamma and generalized Gamma mixing.
    UniformMixture,
}

/// Magnitude samplers for a symmetric base.
pub trait HalfLineSampler {
    /// `|Z|` for `Z` drawn from the base.
    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;

    /// A draw from the half-line density proportional to `z² f(z)`.
    fn sample_abs_squared_weighted<R: Rng + ?Sized>(&self, _rng: &mut R) -> Result<f64> {
        Err(Error::Capability("x²-weighted half-line sampling"))
    }
}

/// `Gamma(shape, rate)`; shape and rate are validated by the callers.
fn gamma_rate<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("validated gamma parameters")
        .sample(rng)
}

fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Maxwell magnitude: `sqrt(χ²₃)`.
fn chi3<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    gamma_rate(1.5, 0.5, rng).sqrt()
}

/// Draw from the generalized Gamma density
/// `p / (2 Γ(q)) s^{pq/2 - 1} exp(-s^{p/2})` as `Y^{2/p}`, `Y ~ Gamma(q, 1)`.
pub fn sample_gg<R: Rng + ?Sized>(p: f64, q: f64, rng: &mut R) -> Result<f64> {
    check_positive("p", p)?;
    check_positive("q", q)?;
    Ok(gg_unchecked(p, q, rng))
}

fn gg_unchecked<R: Rng + ?Sized>(p: f64, q: f64, rng: &mut R) -> f64 {
    gamma_rate(q, 1.0, rng).powf(2.0 / p)
}

/// Scale of the `exp(-|x/c|^p)` kernel given generalized Gamma mixing
/// value `s`.
fn gt_kernel_scale(shape: &GtShape, s: f64) -> f64 {
    s.powf(-0.5) * shape.q().powf(1.0 / shape.p()) * shape.delta()
}

struct Student<'a>(&'a StudentTail);
struct GenT<'a>(&'a GtShape);

impl Student<'_> {
    fn rate(&self) -> f64 {
        0.5 * (self.0.nu() - 2.0)
    }

    /// (|Z|, λ) with λ ~ Gamma(ν/2, (ν−2)/2).
    fn abs_with_lambda<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let lambda = gamma_rate(0.5 * self.0.nu(), self.rate(), rng);
        (std_normal(rng).abs() / lambda.sqrt(), lambda)
    }

    /// x²-weighted magnitude. Re-weighting the Gamma mixing law by the
    /// kernel variance 1/λ lowers its shape by one.
    fn tilted_with_lambda<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let lambda = gamma_rate(0.5 * self.0.nu() - 1.0, self.rate(), rng);
        (chi3(rng) / lambda.sqrt(), lambda)
    }
}

impl GenT<'_> {
    fn abs_exp_power<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let p = self.0.p();
        let s = gg_unchecked(p, self.0.q(), rng);
        let c = gt_kernel_scale(self.0, s);
        (c * gamma_rate(1.0 / p, 1.0, rng).powf(1.0 / p), s)
    }

    /// x²-weighted magnitude; the mixing law moves to `GG(p, q − 2/p)`.
    fn tilted_exp_power<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let p = self.0.p();
        let s = gg_unchecked(p, self.0.q() - 2.0 / p, rng);
        let c = gt_kernel_scale(self.0, s);
        (c * gamma_rate(3.0 / p, 1.0, rng).powf(1.0 / p), s)
    }

    /// Uniform kernel of half-width `c(s) u^{1/p}`, `u ~ Gamma(1 + 1/p, 1)`.
    fn abs_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let p = self.0.p();
        let s = gg_unchecked(p, self.0.q(), rng);
        let u = gamma_rate(1.0 + 1.0 / p, 1.0, rng);
        let a = gt_kernel_scale(self.0, s) * u.powf(1.0 / p);
        (a * rng.random::<f64>(), u, s)
    }

    /// x²-weighted uniform kernel: `|X| = a V^{1/3}`, with the mixing laws
    /// re-weighted by `a²` to `Gamma(1 + 3/p, 1)` and `GG(p, q − 2/p)`.
    fn tilted_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let p = self.0.p();
        let s = gg_unchecked(p, self.0.q() - 2.0 / p, rng);
        let u = gamma_rate(1.0 + 3.0 / p, 1.0, rng);
        let a = gt_kernel_scale(self.0, s) * u.powf(1.0 / p);
        (a * rng.random::<f64>().cbrt(), u, s)
    }
}

impl HalfLineSampler for Base {
    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Base::Normal => std_normal(rng).abs(),
            Base::Student(t) => Student(t).abs_with_lambda(rng).0,
            Base::GenT(g) => GenT(g).abs_exp_power(rng).0,
        }
    }

    fn sample_abs_squared_weighted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(match self {
            Base::Normal => chi3(rng),
            Base::Student(t) => Student(t).tilted_with_lambda(rng).0,
            Base::GenT(g) => GenT(g).tilted_exp_power(rng).0,
        })
    }
}

fn positive_side<R: Rng + ?Sized>(prob: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < prob
}

/// `P(X ≥ 0)` of the two-piece density, `γ²/(1 + γ²)`.
fn two_piece_right_mass(gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    g2 / (1.0 + g2)
}

/// `P(X ≥ 0)` of the x²-weighted two-piece density, `γ⁶/(1 + γ⁶)`.
fn tilt_right_mass(gamma: f64) -> f64 {
    let g6 = gamma.powi(6);
    if g6.is_finite() {
        g6 / (1.0 + g6)
    } else {
        1.0
    }
}

fn place(magnitude: f64, right: bool, gamma: f64) -> f64 {
    if right {
        gamma * magnitude
    } else {
        -magnitude / gamma
    }
}

/// Two-piece skewed draw: `γ|Z|` with probability `γ²/(1+γ²)`, else `−|Z|/γ`.
pub fn sample_two_piece<B: HalfLineSampler, R: Rng + ?Sized>(
    gamma: f64,
    base: &B,
    rng: &mut R,
) -> f64 {
    let right = positive_side(two_piece_right_mass(gamma), rng);
    place(base.sample_abs(rng), right, gamma)
}

/// Draw from the density proportional to `x² s(x | γ)`.
pub fn sample_quadratic_tilt<B: HalfLineSampler, R: Rng + ?Sized>(
    gamma: f64,
    base: &B,
    rng: &mut R,
) -> Result<f64> {
    let right = positive_side(tilt_right_mass(gamma), rng);
    Ok(place(base.sample_abs_squared_weighted(rng)?, right, gamma))
}

/// True when the composition should draw the plain two-piece component.
fn choose_plain<R: Rng + ?Sized>(params: &BimodalSkewParams, rng: &mut R) -> bool {
    let w = 1.0 / (1.0 + params.alpha() * b_gamma_unchecked(params.gamma()));
    rng.random::<f64>() < w
}

pub fn sample_bsn<R: Rng + ?Sized>(params: &BimodalSkewParams, rng: &mut R) -> f64 {
    let gamma = params.gamma();
    if choose_plain(params, rng) {
        sample_two_piece(gamma, &Base::Normal, rng)
    } else {
        let right = positive_side(tilt_right_mass(gamma), rng);
        place(chi3(rng), right, gamma)
    }
}

/// BSSTD draw through its Gamma precision mixture; `lambda` is the latent
/// precision under the joint `tilt(x) · N₂(x | γ, 1/λ) · Gamma(λ | ν/2, (ν−2)/2)`.
pub fn sample_bsstd<R: Rng + ?Sized>(
    params: &BimodalSkewParams,
    tail: &StudentTail,
    rng: &mut R,
) -> AugmentedDraw {
    let gamma = params.gamma();
    let student = Student(tail);
    let (right, (mag, lambda)) = if choose_plain(params, rng) {
        let right = positive_side(two_piece_right_mass(gamma), rng);
        (right, student.abs_with_lambda(rng))
    } else {
        let right = positive_side(tilt_right_mass(gamma), rng);
        (right, student.tilted_with_lambda(rng))
    };
    AugmentedDraw {
        x: place(mag, right, gamma),
        lambda: Some(lambda),
        ..AugmentedDraw::default()
    }
}

/// Two-piece normal with scale `λ^{-1/2}` drawn as a skewed uniform on
/// `(−(u/λ)^{1/2}/γ, (u/λ)^{1/2} γ)` with `u ~ Gamma(3/2, 1/2)`.
pub fn sample_skewed_uniform_normal<R: Rng + ?Sized>(
    gamma: f64,
    lambda: f64,
    rng: &mut R,
) -> Result<AugmentedDraw> {
    check_positive("gamma", gamma)?;
    check_positive("lambda", lambda)?;
    let u = gamma_rate(1.5, 0.5, rng);
    let half_width = (u / lambda).sqrt();
    let right = positive_side(two_piece_right_mass(gamma), rng);
    let x = place(half_width * rng.random::<f64>(), right, gamma);
    Ok(AugmentedDraw {
        x,
        lambda: Some(lambda),
        u: Some(u),
        s: None,
    })
}

/// BSGT draw through either generalized-Gamma scale mixture.
pub fn sample_bsgt<R: Rng + ?Sized>(
    params: &BimodalSkewParams,
    shape: &GtShape,
    path: GtPath,
    rng: &mut R,
) -> AugmentedDraw {
    let gamma = params.gamma();
    let gt = GenT(shape);
    let plain = choose_plain(params, rng);
    let right = if plain {
        positive_side(two_piece_right_mass(gamma), rng)
    } else {
        positive_side(tilt_right_mass(gamma), rng)
    };
    let (mag, u, s) = match (path, plain) {
        (GtPath::ExpPowerMixture, true) => {
            let (m, s) = gt.abs_exp_power(rng);
            (m, None, s)
        }
        (GtPath::ExpPowerMixture, false) => {
            let (m, s) = gt.tilted_exp_power(rng);
            (m, None, s)
        }
        (GtPath::UniformMixture, true) => {
            let (m, u, s) = gt.abs_uniform(rng);
            (m, Some(u), s)
        }
        (GtPath::UniformMixture, false) => {
            let (m, u, s) = gt.tilted_uniform(rng);
            (m, Some(u), s)
        }
    };
    AugmentedDraw {
        x: place(mag, right, gamma),
        lambda: None,
        u,
        s: Some(s),
    }
}

/// Standardized draw (location-scale ignored) with latent values.
pub fn sample_standard<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R) -> AugmentedDraw {
    match spec.base() {
        Base::Normal => AugmentedDraw::plain(sample_bsn(spec.skew(), rng)),
        Base::Student(t) => sample_bsstd(spec.skew(), t, rng),
        Base::GenT(g) => sample_bsgt(spec.skew(), g, GtPath::default(), rng),
    }
}

pub fn sample<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R) -> f64 {
    spec.loc() + spec.scale() * sample_standard(spec, rng).x
}

pub fn sample_n<R: Rng + ?Sized>(spec: &DistributionSpec, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| sample(spec, rng)).collect()
}
