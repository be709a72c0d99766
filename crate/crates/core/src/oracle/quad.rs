//! Globally adaptive Gauss–Kronrod (10/21) quadrature on finite or infinite
//! intervals.
//!
//! The domain is always split at 0 (every density here has a kink there)
//! and at any caller-supplied breakpoints. Semi-infinite pieces go through
//! `x = a ± t / (1 − t²)`, `t ∈ [0, 1)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const EVALUATION_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl OracleResult {
    pub(crate) fn into_result(self) -> crate::Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(crate::Error::NonConvergence {
                estimate: self.value,
                abs_error: self.abs_error_estimate,
            })
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod pass; returns (estimate, error estimate).
fn gk21<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Clone, Copy)]
enum Map {
    Finite,
    /// `[a, ∞)` as `a + t/(1 − t²)`.
    Right(f64),
    /// `(−∞, b]` as `b − t/(1 − t²)`.
    Left(f64),
}

fn mapped<F: Fn(f64) -> f64>(f: &F, map: Map, t: f64) -> f64 {
    let (x, jac) = match map {
        Map::Finite => return f(t),
        Map::Right(a) | Map::Left(a) => {
            let d = 1.0 - t * t;
            let u = t / d;
            let jac = (1.0 + t * t) / (d * d);
            let x = if let Map::Right(_) = map { a + u } else { a - u };
            (x, jac)
        }
    };
    if !x.is_finite() || !jac.is_finite() {
        return 0.0;
    }
    let v = f(x);
    if v == 0.0 {
        0.0
    } else {
        v * jac
    }
}

struct Piece {
    a: f64,
    b: f64,
    map: Map,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[lower, upper]` (either end may be infinite) to an
/// absolute error target `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, tol: f64) -> OracleResult {
    integrate_with_breaks(f, lower, upper, &[], tol)
}

/// As [`integrate`], additionally splitting the domain at `breaks`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    breaks: &[f64],
    tol: f64,
) -> OracleResult {
    if lower == upper {
        return OracleResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    if lower > upper {
        let r = integrate_with_breaks(f, upper, lower, breaks, tol);
        return OracleResult {
            value: -r.value,
            ..r
        };
    }

    let mut points = vec![lower];
    let mut interior: Vec<f64> = breaks
        .iter()
        .copied()
        .chain(std::iter::once(0.0))
        .filter(|&b| b.is_finite() && b > lower && b < upper)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    points.extend(interior);
    points.push(upper);

    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (map, a, b) = match (u.is_finite(), v.is_finite()) {
            (true, true) => (Map::Finite, u, v),
            (true, false) => (Map::Right(u), 0.0, 1.0),
            (false, true) => (Map::Left(v), 0.0, 1.0),
            (false, false) => unreachable!("0 always splits a doubly infinite domain"),
        };
        let g = |t: f64| mapped(&f, map, t);
        let (value, error) = gk21(&g, a, b);
        evaluations += 21;
        heap.push(Piece {
            a,
            b,
            map,
            value,
            error,
        });
    }

    let sums = |heap: &BinaryHeap<Piece>, fv: f64, fe: f64| {
        heap.iter()
            .fold((fv, fe), |(v, e), p| (v + p.value, e + p.error))
    };
    let mut error = sums(&heap, frozen_value, frozen_error).1;

    while error > tol && evaluations + 42 <= EVALUATION_BUDGET && !error.is_nan() {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let g = |t: f64| mapped(&f, worst.map, t);
        let (v1, e1) = gk21(&g, worst.a, mid);
        let (v2, e2) = gk21(&g, mid, worst.b);
        evaluations += 42;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            map: worst.map,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            map: worst.map,
            value: v2,
            error: e2,
        });
        // resync the running error against drift
        if heap.len() % 256 == 0 {
            error = sums(&heap, frozen_value, frozen_error).1;
        }
    }
    let (value, error) = sums(&heap, frozen_value, frozen_error);

    OracleResult {
        value,
        abs_error_estimate: error,
        evaluations,
        converged: error <= tol && value.is_finite(),
    }
}
