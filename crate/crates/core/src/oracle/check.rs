//! The validation suite: every closed-form identity checked against the
//! independent numerics in this module, one pass/fail row per identity.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::ks::{ks_one_sample, ks_two_sample};
use super::marginal::{marginalize_prop2, marginalize_prop3, marginalize_prop4, marginalize_prop5};
use super::quad::integrate;
use crate::dist::{
    find_modes, full_moment, Base, BimodalSkewParams, DistributionSpec, GtShape, StudentTail,
};
use crate::error::Result;
use crate::sampling::{
    sample_bsgt, sample_bsn, sample_bsstd, sample_quadratic_tilt, sample_skewed_uniform_normal,
    sample_two_piece, GtPath, RngStream,
};
use crate::special::ln_gamma;

pub const ALPHA_GRID: [f64; 5] = [0.0, 0.5, 1.0, 3.0, 10.0];
pub const GAMMA_GRID: [f64; 5] = [0.5, 0.9, 1.0, 1.1, 1.5];
pub const NU_GRID: [f64; 3] = [3.0, 4.0, 8.0];
pub const PQ_GRID: [(f64, f64); 4] = [(1.7, 2.0), (2.0, 2.0), (2.3, 2.0), (2.0, 5.0)];
pub const MIXTURE_X: [f64; 5] = [-2.0, -0.5, 0.0, 0.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckGroup {
    Normalization,
    Moments,
    Reductions,
    Reflection,
    MassRatio,
    Prop2,
    Prop3,
    Prop4,
    Prop5,
    Modes,
    Samplers,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 11] = [
        CheckGroup::Normalization,
        CheckGroup::Moments,
        CheckGroup::Reductions,
        CheckGroup::Reflection,
        CheckGroup::MassRatio,
        CheckGroup::Prop2,
        CheckGroup::Prop3,
        CheckGroup::Prop4,
        CheckGroup::Prop5,
        CheckGroup::Modes,
        CheckGroup::Samplers,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckGroup::Normalization => "normalization",
            CheckGroup::Moments => "moments",
            CheckGroup::Reductions => "reductions",
            CheckGroup::Reflection => "reflection",
            CheckGroup::MassRatio => "mass-ratio",
            CheckGroup::Prop2 => "prop2",
            CheckGroup::Prop3 => "prop3",
            CheckGroup::Prop4 => "prop4",
            CheckGroup::Prop5 => "prop5",
            CheckGroup::Modes => "modes",
            CheckGroup::Samplers => "samplers",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CheckGroup::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = CheckGroup::ALL.iter().map(|g| g.name()).collect();
                format!("unknown check group '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Groups to run; empty runs everything.
    pub groups: Vec<CheckGroup>,
    /// Multiplies the generalized t standardizing scale (negative control).
    pub delta_corruption: Option<f64>,
    pub seed: u64,
    pub sampler_n: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            groups: Vec::new(),
            delta_corruption: None,
            seed: 20_240_601,
            sampler_n: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub identity: String,
    pub group: CheckGroup,
    pub status: Status,
    /// Discrepancy measured for this identity (`null` when it could not be
    /// computed).
    pub value: Option<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub results: Vec<IdentityResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }
}

struct Recorder {
    group: CheckGroup,
    results: Vec<IdentityResult>,
}

impl Recorder {
    /// Records `|discrepancy| <= tolerance`; `pass_below` flips to
    /// `>` for lower-bound identities such as p-values.
    fn record(&mut self, identity: String, value: Result<f64>, tolerance: f64) {
        self.record_with(identity, value, tolerance, |v, t| v.abs() <= t)
    }

    fn record_with(
        &mut self,
        identity: String,
        value: Result<f64>,
        tolerance: f64,
        ok: impl Fn(f64, f64) -> bool,
    ) {
        let (value, status) = match value {
            Ok(v) if v.is_finite() && ok(v, tolerance) => (Some(v), Status::Pass),
            Ok(v) if v.is_finite() => (Some(v), Status::Fail),
            _ => (None, Status::Fail),
        };
        self.results.push(IdentityResult {
            identity,
            group: self.group,
            status,
            value,
            tolerance,
        });
    }
}

pub fn run_check(config: &CheckConfig) -> CheckReport {
    let groups: Vec<CheckGroup> = if config.groups.is_empty() {
        CheckGroup::ALL.to_vec()
    } else {
        config.groups.clone()
    };
    let mut results = Vec::new();
    for group in groups {
        let mut rec = Recorder {
            group,
            results: Vec::new(),
        };
        match group {
            CheckGroup::Normalization => normalization(&mut rec, config.delta_corruption),
            CheckGroup::Moments => moments(&mut rec),
            CheckGroup::Reductions => reductions(&mut rec),
            CheckGroup::Reflection => reflection(&mut rec),
            CheckGroup::MassRatio => mass_ratio(&mut rec),
            CheckGroup::Prop2 => prop2(&mut rec),
            CheckGroup::Prop3 => prop3(&mut rec),
            CheckGroup::Prop4 => prop4(&mut rec),
            CheckGroup::Prop5 => prop5(&mut rec),
            CheckGroup::Modes => modes(&mut rec),
            CheckGroup::Samplers => samplers(&mut rec, config.seed, config.sampler_n),
        }
        results.extend(rec.results);
    }
    CheckReport { results }
}

fn bsgt(alpha: f64, gamma: f64, p: f64, q: f64, corruption: Option<f64>) -> Result<DistributionSpec> {
    let good = GtShape::new(p, q)?;
    let shape = match corruption {
        Some(f) => GtShape::with_delta_override(p, q, good.delta() * f)?,
        None => good,
    };
    Ok(DistributionSpec::new(
        BimodalSkewParams::new(alpha, gamma)?,
        Base::GenT(shape),
    ))
}

/// Every (family, parameter) tuple of the normalization grid.
fn family_grid(corruption: Option<f64>) -> Vec<(String, Result<DistributionSpec>)> {
    let mut out = Vec::new();
    for &a in &ALPHA_GRID {
        for &g in &GAMMA_GRID {
            out.push((format!("bsn(alpha={a}, gamma={g})"), DistributionSpec::bsn(a, g)));
            for &nu in &NU_GRID {
                out.push((
                    format!("bsstd(alpha={a}, gamma={g}, nu={nu})"),
                    DistributionSpec::bsstd(a, g, nu),
                ));
            }
            for &(p, q) in &PQ_GRID {
                out.push((
                    format!("bsgt(alpha={a}, gamma={g}, p={p}, q={q})"),
                    bsgt(a, g, p, q, corruption),
                ));
            }
        }
    }
    out
}

fn total_mass(spec: &DistributionSpec) -> Result<f64> {
    integrate(|x| spec.pdf(x), f64::NEG_INFINITY, f64::INFINITY, 1e-10).into_result()
}

fn normalization(rec: &mut Recorder, corruption: Option<f64>) {
    for (label, spec) in family_grid(corruption) {
        let dev = spec.and_then(|s| total_mass(&s)).map(|m| m - 1.0);
        rec.record(format!("integral of {label} = 1"), dev, 1e-8);
    }
}

fn moment_specs() -> Vec<(String, DistributionSpec)> {
    let mut out = Vec::new();
    for &a in &[0.0, 1.0, 3.0] {
        for &g in &[0.8, 1.5] {
            out.push((format!("bsn(alpha={a}, gamma={g})"), DistributionSpec::bsn(a, g).unwrap()));
            for &nu in &NU_GRID {
                out.push((
                    format!("bsstd(alpha={a}, gamma={g}, nu={nu})"),
                    DistributionSpec::bsstd(a, g, nu).unwrap(),
                ));
            }
            for &(p, q) in &PQ_GRID {
                out.push((
                    format!("bsgt(alpha={a}, gamma={g}, p={p}, q={q})"),
                    DistributionSpec::bsgt(a, g, p, q).unwrap(),
                ));
            }
        }
    }
    out
}

/// Highest base moment order the tilted moment of order `r` touches must
/// stay below the tail index (`ν` or `pq`).
fn expected_existence(spec: &DistributionSpec, r: u32) -> bool {
    let needed = if spec.skew().alpha() > 0.0 { r + 2 } else { r };
    let needed = f64::from(needed);
    match spec.base() {
        Base::Normal => true,
        Base::Student(t) => needed < t.nu(),
        Base::GenT(g) => needed < g.p() * g.q(),
    }
}

/// `∫ x^r f(x) dx` with `x = ±e^u` beyond `|x| = 1`, so that algebraic
/// tails become exponential ones.
fn moment_quadrature(spec: &DistributionSpec, r: u32) -> Result<f64> {
    let r = r as i32;
    let centre = integrate(|x| x.powi(r) * spec.pdf(x), -1.0, 1.0, 1e-10).into_result()?;
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    let tails = integrate(
        |u| {
            let lx = u * f64::from(r + 1);
            let x = u.exp();
            (lx + spec.log_pdf(x)).exp() + sign * (lx + spec.log_pdf(-x)).exp()
        },
        0.0,
        f64::INFINITY,
        1e-9,
    )
    .into_result()?;
    Ok(centre + tails)
}

fn moments(rec: &mut Recorder) {
    for (label, spec) in moment_specs() {
        for r in 1..=4u32 {
            let report = spec.moment_report(r);
            let expected = expected_existence(&spec, r);
            rec.record(
                format!("existence flag of E(X^{r}) for {label}"),
                Ok(if report.exists == expected { 0.0 } else { 1.0 }),
                0.0,
            );
            if !expected {
                continue;
            }
            let closed = full_moment(r, spec.skew(), spec.base());
            let numeric = moment_quadrature(&spec, r);
            let dev = closed.and_then(|c| numeric.map(|n| c - n));
            rec.record(format!("E(X^{r}) closed form vs quadrature for {label}"), dev, 1e-6);
        }
    }
}

fn grid_401() -> impl Iterator<Item = f64> {
    (0..401).map(|i| -10.0 + 0.05 * i as f64)
}

fn sup_diff(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> f64 {
    grid_401().map(|x| (a(x) - b(x)).abs()).fold(0.0, f64::max)
}

pub(crate) fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / std::f64::consts::TAU.sqrt()
}

/// Unit-variance Student t density.
pub(crate) fn student_density(x: f64, nu: f64) -> f64 {
    let c = (ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu)).exp()
        / (std::f64::consts::PI * (nu - 2.0)).sqrt();
    c * (1.0 + x * x / (nu - 2.0)).powf(-0.5 * (nu + 1.0))
}

/// Unit-variance generalized t density.
pub(crate) fn gt_density(x: f64, p: f64, q: f64) -> f64 {
    let var = (2.0 / p * q.ln() + ln_gamma(3.0 / p) + ln_gamma(q - 2.0 / p)
        - ln_gamma(1.0 / p)
        - ln_gamma(q))
    .exp();
    let delta = var.powf(-0.5);
    let c = p * (ln_gamma(q + 1.0 / p) - ln_gamma(1.0 / p) - ln_gamma(q)).exp()
        / (2.0 * delta * q.powf(1.0 / p));
    c * (1.0 + (x / delta).abs().powf(p) / q).powf(-(q + 1.0 / p))
}

fn reductions(rec: &mut Recorder) {
    for &(a, g) in &[(0.0, 1.0), (1.0, 1.5), (3.0, 0.8), (10.0, 1.1)] {
        for &q in &[1.5, 2.0, 2.5, 5.0] {
            let dev = DistributionSpec::bsgt(a, g, 2.0, q).and_then(|gt| {
                let st = DistributionSpec::bsstd(a, g, 2.0 * q)?;
                Ok(sup_diff(|x| gt.pdf(x), |x| st.pdf(x)))
            });
            rec.record(
                format!("bsgt(alpha={a}, gamma={g}, p=2, q={q}) = bsstd(nu={})", 2.0 * q),
                dev,
                1e-10,
            );
        }
        let dev = DistributionSpec::bsstd(a, g, 1e4).and_then(|st| {
            let n = DistributionSpec::bsn(a, g)?;
            Ok(sup_diff(|x| st.pdf(x), |x| n.pdf(x)))
        });
        rec.record(format!("bsstd(alpha={a}, gamma={g}, nu=1e4) ~ bsn"), dev, 1e-3);
    }
    let dev = DistributionSpec::bsn(0.0, 1.0).map(|s| sup_diff(|x| s.pdf(x), normal_density));
    rec.record("bsn(0, 1) = standard normal".into(), dev, 1e-12);
    for &nu in &NU_GRID {
        let dev = DistributionSpec::bsstd(0.0, 1.0, nu)
            .map(|s| sup_diff(|x| s.pdf(x), |x| student_density(x, nu)));
        rec.record(format!("bsstd(0, 1, nu={nu}) = standardized t"), dev, 1e-12);
    }
    for &(p, q) in &PQ_GRID {
        let dev = DistributionSpec::bsgt(0.0, 1.0, p, q)
            .map(|s| sup_diff(|x| s.pdf(x), |x| gt_density(x, p, q)));
        rec.record(format!("bsgt(0, 1, p={p}, q={q}) = standardized gt"), dev, 1e-12);
    }
}

fn reflection(rec: &mut Recorder) {
    for &a in &[0.0, 1.0, 10.0] {
        for &g in &[0.5, 0.9, 1.5] {
            let pairs = [
                (DistributionSpec::bsn(a, g), DistributionSpec::bsn(a, 1.0 / g), "bsn"),
                (
                    DistributionSpec::bsstd(a, g, 4.0),
                    DistributionSpec::bsstd(a, 1.0 / g, 4.0),
                    "bsstd(nu=4)",
                ),
                (
                    DistributionSpec::bsgt(a, g, 1.7, 2.0),
                    DistributionSpec::bsgt(a, 1.0 / g, 1.7, 2.0),
                    "bsgt(p=1.7, q=2)",
                ),
            ];
            for (s, r, name) in pairs {
                let dev = s.and_then(|s| r.map(|r| sup_diff(|x| s.pdf(x), |x| r.pdf(-x))));
                rec.record(format!("{name} reflection alpha={a}, gamma={g}"), dev, 1e-13);
            }
        }
    }
}

fn mass_ratio(rec: &mut Recorder) {
    for &g in &GAMMA_GRID {
        let specs = [
            ("bsn", DistributionSpec::bsn(0.0, g)),
            ("bsstd(nu=3)", DistributionSpec::bsstd(0.0, g, 3.0)),
            ("bsgt(p=1.7, q=2)", DistributionSpec::bsgt(0.0, g, 1.7, 2.0)),
        ];
        for (name, spec) in specs {
            let dev = spec.and_then(|s| {
                let right = integrate(|x| s.pdf(x), 0.0, f64::INFINITY, 1e-12).into_result()?;
                let left = integrate(|x| s.pdf(x), f64::NEG_INFINITY, 0.0, 1e-12).into_result()?;
                Ok(right / left / (g * g) - 1.0)
            });
            rec.record(format!("{name} P(X>=0)/P(X<0) = gamma^2 at gamma={g}"), dev, 1e-8);
        }
    }
}

fn prop2(rec: &mut Recorder) {
    for &g in &[0.8, 1.5] {
        for &x in &MIXTURE_X {
            let dev = DistributionSpec::bsstd(1.0, g, 4.0).and_then(|s| {
                let m = marginalize_prop2(x, 1.0, g, 4.0)?.into_result()?;
                Ok(m - s.pdf(x))
            });
            rec.record(format!("gamma-mixed bsn = bsstd(1, {g}, 4) at x={x}"), dev, 1e-6);
        }
    }
}

fn prop3(rec: &mut Recorder) {
    for &g in &[0.8, 1.5] {
        for &lambda in &[0.5f64, 1.0, 4.0] {
            for &x in &MIXTURE_X {
                let dev = DistributionSpec::bsn(0.0, g)
                    .and_then(|s| s.with_location_scale(0.0, lambda.powf(-0.5)))
                    .and_then(|s| {
                        let m = marginalize_prop3(x, g, lambda)?.into_result()?;
                        Ok(m - s.pdf(x))
                    });
                rec.record(
                    format!("uniform-mixed skew normal gamma={g}, lambda={lambda} at x={x}"),
                    dev,
                    1e-6,
                );
            }
        }
    }
}

fn gt_mixture(rec: &mut Recorder, double: bool, tol: f64) {
    for &g in &[0.8, 1.5] {
        for &p in &[1.7, 2.0, 2.3] {
            for &x in &MIXTURE_X {
                let dev = DistributionSpec::bsgt(1.0, g, p, 2.0).and_then(|s| {
                    let m = if double {
                        marginalize_prop5(x, 1.0, g, p, 2.0)?
                    } else {
                        marginalize_prop4(x, 1.0, g, p, 2.0)?
                    };
                    Ok(m.into_result()? - s.pdf(x))
                });
                let kind = if double { "uniform/gamma/gg" } else { "exp-power/gg" };
                rec.record(
                    format!("{kind} mixture = bsgt(1, {g}, {p}, 2) at x={x}"),
                    dev,
                    tol,
                );
            }
        }
    }
}

fn prop4(rec: &mut Recorder) {
    gt_mixture(rec, false, 1e-5);
}

fn prop5(rec: &mut Recorder) {
    gt_mixture(rec, true, 1e-4);
}

fn modes(rec: &mut Recorder) {
    for i in 0..=10 {
        if i == 5 {
            continue;
        }
        let a = f64::from(i) / 10.0;
        let expected = if i < 5 { 1.0 } else { 2.0 };
        let dev = DistributionSpec::bsn(a, 1.0).map(|s| find_modes(&s).len() as f64 - expected);
        rec.record(format!("bsn(alpha={a}, gamma=1) has {expected} mode(s)"), dev, 0.0);
    }
    let root = (2.0f64 - 1.0 / 0.6).sqrt();
    let dev = DistributionSpec::bsn(0.6, 1.0).map(|s| {
        let m = find_modes(&s);
        if m.len() != 2 {
            return f64::INFINITY;
        }
        (m[0].location + root).abs().max((m[1].location - root).abs())
    });
    rec.record("bsn(0.6, 1) modes at ±sqrt(1/3)".into(), dev, 1e-6);
    let dev = DistributionSpec::bsn(3.0, 1.5).map(|s| {
        let m = find_modes(&s);
        if m.len() != 2 {
            return f64::NAN;
        }
        m[1].density - m[0].density
    });
    rec.record_with(
        "bsn(3, 1.5) right mode above left".into(),
        dev,
        0.0,
        |v, t| v > t,
    );
}

fn samplers(rec: &mut Recorder, seed: u64, n: usize) {
    let params = BimodalSkewParams::new(1.0, 1.5).unwrap();
    let gamma = params.gamma();
    let two_piece = DistributionSpec::bsn(0.0, gamma).unwrap();
    let b = params.b_gamma();
    let crit = super::ks::ks_critical_1pct(n);

    let mut gate = |name: &str, stream: u64, draw: &mut dyn FnMut(&mut RngStream) -> f64, density: &dyn Fn(f64) -> f64| {
        let mut rng = RngStream::new(seed, stream);
        let xs: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let d = ks_one_sample(&xs, density).map(|k| k.statistic);
        rec.record_with(format!("KS {name} (n={n})"), d, crit, |v, t| v < t);
    };

    gate(
        "two-piece normal gamma=1.5",
        0,
        &mut |r| sample_two_piece(gamma, &Base::Normal, r),
        &|x| two_piece.pdf(x),
    );
    gate(
        "quadratic tilt normal gamma=1.5",
        1,
        &mut |r| sample_quadratic_tilt(gamma, &Base::Normal, r).unwrap_or(f64::NAN),
        &|x| x * x * two_piece.pdf(x) / b,
    );
    let bsn = DistributionSpec::bsn(1.0, gamma).unwrap();
    gate("bsn(1, 1.5)", 2, &mut |r| sample_bsn(&params, r), &|x| bsn.pdf(x));
    let tail = StudentTail::new(4.0).unwrap();
    let bsstd = DistributionSpec::bsstd(1.0, gamma, 4.0).unwrap();
    gate(
        "bsstd(1, 1.5, 4) via gamma precision mixture",
        3,
        &mut |r| sample_bsstd(&params, &tail, r).x,
        &|x| bsstd.pdf(x),
    );
    let scaled = two_piece.with_location_scale(0.0, 0.5).unwrap();
    gate(
        "skew normal lambda=4 via skewed uniform mixture",
        4,
        &mut |r| sample_skewed_uniform_normal(gamma, 4.0, r).map(|d| d.x).unwrap_or(f64::NAN),
        &|x| scaled.pdf(x),
    );
    let shape = GtShape::new(2.3, 2.0).unwrap();
    let bsgt = DistributionSpec::bsgt(1.0, gamma, 2.3, 2.0).unwrap();
    gate(
        "bsgt(1, 1.5, 2.3, 2) via exp-power mixture",
        5,
        &mut |r| sample_bsgt(&params, &shape, GtPath::ExpPowerMixture, r).x,
        &|x| bsgt.pdf(x),
    );
    gate(
        "bsgt(1, 1.5, 2.3, 2) via uniform mixture",
        6,
        &mut |r| sample_bsgt(&params, &shape, GtPath::UniformMixture, r).x,
        &|x| bsgt.pdf(x),
    );

    let mut r4 = RngStream::new(seed, 7);
    let mut r5 = RngStream::new(seed, 8);
    let a: Vec<f64> = (0..n)
        .map(|_| sample_bsgt(&params, &shape, GtPath::ExpPowerMixture, &mut r4).x)
        .collect();
    let c: Vec<f64> = (0..n)
        .map(|_| sample_bsgt(&params, &shape, GtPath::UniformMixture, &mut r5).x)
        .collect();
    let (_, p) = ks_two_sample(&a, &c);
    rec.record_with(
        format!("two-sample KS p-value exp-power vs uniform mixture (n={n})"),
        Ok(p),
        0.01,
        |v, t| v > t,
    );
}
