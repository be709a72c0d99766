use bimodal_skew::dist::{full_moment, Base, BimodalSkewParams, DistributionSpec, GtShape, StudentTail};
use bimodal_skew::oracle::{integrate, ks_critical_1pct, ks_one_sample, ks_two_sample, mc_moment};
use bimodal_skew::sampling::{
    sample_bsgt, sample_bsn, sample_bsstd, sample_gg, sample_n, sample_quadratic_tilt,
    sample_skewed_uniform_normal, sample_two_piece, GtPath, RngStream,
};
use bimodal_skew::special::ln_gamma;
use rand::RngCore;

const N: usize = 100_000;

fn draws(stream: u64, mut f: impl FnMut(&mut RngStream) -> f64) -> Vec<f64> {
    let mut rng = RngStream::new(77, stream);
    (0..N).map(|_| f(&mut rng)).collect()
}

fn ks(xs: &[f64], density: impl Fn(f64) -> f64) -> f64 {
    ks_one_sample(xs, density).unwrap().statistic
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn within_se(xs: &[f64], target: f64, k: f64) {
    let (m, se) = mean_se(xs);
    assert!((m - target).abs() <= k * se, "mean {m} vs {target} (se {se})");
}

fn positive_fraction(xs: &[f64], p: f64) {
    let ind: Vec<f64> = xs.iter().map(|&x| f64::from(u8::from(x >= 0.0))).collect();
    within_se(&ind, p, 3.0);
}

fn normal(x: f64) -> f64 {
    (-0.5 * x * x).exp() / std::f64::consts::TAU.sqrt()
}

#[test]
fn streams_are_reproducible() {
    let mut a = RngStream::new(5, 2);
    let mut b = RngStream::new(5, 2);
    let mut c = RngStream::new(5, 3);
    let va: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
    let vb: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
    let vc: Vec<u64> = (0..64).map(|_| c.next_u64()).collect();
    assert_eq!(va, vb);
    assert_ne!(va, vc);
    let spec = DistributionSpec::bsgt(1.0, 1.5, 2.3, 2.0).unwrap();
    let s1 = sample_n(&spec, 50, &mut RngStream::new(9, 0));
    let s2 = sample_n(&spec, 50, &mut RngStream::new(9, 0));
    assert_eq!(
        s1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        s2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn two_piece_sampler() {
    let sym = draws(0, |r| sample_two_piece(1.0, &Base::Normal, r));
    assert!(ks(&sym, normal) < 0.01);
    let skewed = draws(1, |r| sample_two_piece(2.0, &Base::Normal, r));
    positive_fraction(&skewed, 0.8);
    within_se(&skewed, 1.196_826_8, 4.0);
}

#[test]
fn quadratic_tilt_sampler() {
    let sym = draws(2, |r| sample_quadratic_tilt(1.0, &Base::Normal, r).unwrap());
    let abs: Vec<f64> = sym.iter().map(|x| x.abs()).collect();
    let maxwell = |x: f64| if x < 0.0 { 0.0 } else { 2.0 * x * x * normal(x) };
    assert!(ks(&abs, maxwell) < 0.01);
    let sq: Vec<f64> = sym.iter().map(|x| x * x).collect();
    within_se(&sq, 3.0, 4.0);
    let skewed = draws(3, |r| sample_quadratic_tilt(2.0, &Base::Normal, r).unwrap());
    positive_fraction(&skewed, 64.0 / 65.0);
}

#[test]
fn bsn_sampler() {
    let p = BimodalSkewParams::new(0.0, 1.3).unwrap();
    let plain = DistributionSpec::bsn(0.0, 1.3).unwrap();
    let xs = draws(4, |r| sample_bsn(&p, r));
    assert!(ks(&xs, |x| plain.pdf(x)) < ks_critical_1pct(N));
    let p = BimodalSkewParams::new(1.0, 1.0).unwrap();
    let spec = DistributionSpec::bsn(1.0, 1.0).unwrap();
    let xs = draws(5, |r| sample_bsn(&p, r));
    assert!(ks(&xs, |x| spec.pdf(x)) < 0.01);

    // Histogram peaks near ±sqrt(2 − 1/α) for α = 10.
    let p = BimodalSkewParams::new(10.0, 1.0).unwrap();
    let xs = draws(6, |r| sample_bsn(&p, r));
    let width = 0.1;
    let mut bins = vec![0usize; 80];
    for &x in &xs {
        let k = ((x + 4.0) / width).floor();
        if (0.0..80.0).contains(&k) {
            bins[k as usize] += 1;
        }
    }
    let centre = |k: usize| -4.0 + (k as f64 + 0.5) * width;
    let left = (0..40).max_by_key(|&k| bins[k]).unwrap();
    let right = (40..80).max_by_key(|&k| bins[k]).unwrap();
    let peak = (1.9f64).sqrt();
    assert!((centre(left) + peak).abs() < 0.25, "{}", centre(left));
    assert!((centre(right) - peak).abs() < 0.25, "{}", centre(right));
}

#[test]
fn bsstd_sampler() {
    let p = BimodalSkewParams::new(1.0, 1.5).unwrap();
    let tail = StudentTail::new(4.0).unwrap();
    let spec = DistributionSpec::bsstd(1.0, 1.5, 4.0).unwrap();
    let xs = draws(7, |r| sample_bsstd(&p, &tail, r).x);
    assert!(ks(&xs, |x| spec.pdf(x)) < 0.01);

    let near_normal = StudentTail::new(1e4).unwrap();
    let bsn = DistributionSpec::bsn(1.0, 1.5).unwrap();
    let xs = draws(8, |r| sample_bsstd(&p, &near_normal, r).x);
    assert!(ks(&xs, |x| bsn.pdf(x)) < 0.015);

    // Untilted: the latent precision keeps its Gamma(ν/2, (ν−2)/2) law.
    let plain = BimodalSkewParams::new(0.0, 1.5).unwrap();
    let lambdas = draws(9, |r| sample_bsstd(&plain, &tail, r).lambda.unwrap());
    within_se(&lambdas, 2.0, 3.0);
}

#[test]
fn skewed_uniform_mixture_sampler() {
    let xs = draws(10, |r| sample_skewed_uniform_normal(1.0, 1.0, r).unwrap().x);
    assert!(ks(&xs, normal) < 0.01);
    let skewed = draws(11, |r| sample_skewed_uniform_normal(2.0, 1.0, r).unwrap().x);
    positive_fraction(&skewed, 0.8);
    let wide = draws(12, |r| sample_skewed_uniform_normal(1.3, 1.0, r).unwrap().x);
    let narrow = draws(13, |r| sample_skewed_uniform_normal(1.3, 4.0, r).unwrap().x);
    let sd = |v: &[f64]| {
        let (m, _) = mean_se(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
    };
    let ratio = sd(&narrow) / sd(&wide);
    // Delta method: Var(s/σ) ≈ (κ − 1)/(4n), with kurtosis κ ≤ 4 here.
    let se = 0.5 * (2.0 * 3.0 / (4.0 * N as f64)).sqrt();
    assert!((ratio - 0.5).abs() < 3.0 * se, "{ratio}");
    assert!(sample_skewed_uniform_normal(1.0, 0.0, &mut RngStream::new(0, 0)).is_err());
}

#[test]
fn generalized_gamma_sampler() {
    let s = draws(14, |r| sample_gg(2.0, 3.0, r).unwrap());
    within_se(&s, 3.0, 3.0);

    let (p, q) = (1.0, 2.0);
    let dens = |s: f64| if s <= 0.0 { 0.0 } else { 0.5 * p / ln_gamma(q).exp() * s.powf(0.5 * p * q - 1.0) * (-s.powf(0.5 * p)).exp() };
    let mean = integrate(|s| s * dens(s), 0.0, f64::INFINITY, 1e-11).value;
    let s = draws(15, |r| sample_gg(p, q, r).unwrap());
    within_se(&s, mean, 3.0);

    let (p, q) = (2.3, 1.4);
    let y: Vec<f64> = draws(16, |r| sample_gg(p, q, r).unwrap().powf(0.5 * p));
    let gamma_q = |x: f64| if x <= 0.0 { 0.0 } else { ((q - 1.0) * x.ln() - x - ln_gamma(q)).exp() };
    assert!(ks(&y, gamma_q) < 0.01);
    assert!(sample_gg(0.0, 1.0, &mut RngStream::new(0, 0)).is_err());
}

#[test]
fn bsgt_sampler_paths() {
    let p = BimodalSkewParams::new(1.0, 1.5).unwrap();
    let shape = GtShape::new(2.0, 2.0).unwrap();
    let spec = DistributionSpec::bsgt(1.0, 1.5, 2.0, 2.0).unwrap();
    let gt = draws(17, |r| sample_bsgt(&p, &shape, GtPath::ExpPowerMixture, r).x);
    assert!(ks(&gt, |x| spec.pdf(x)) < 0.01);
    let tail = StudentTail::new(4.0).unwrap();
    let st = draws(18, |r| sample_bsstd(&p, &tail, r).x);
    assert!(ks_two_sample(&gt, &st).1 > 0.01);

    let shape = GtShape::new(1.7, 2.0).unwrap();
    let a = draws(19, |r| sample_bsgt(&p, &shape, GtPath::ExpPowerMixture, r).x);
    let b = draws(20, |r| sample_bsgt(&p, &shape, GtPath::UniformMixture, r).x);
    assert!(ks_two_sample(&a, &b).1 > 0.01);

    let sym = BimodalSkewParams::new(0.0, 1.0).unwrap();
    let base = DistributionSpec::bsgt(0.0, 1.0, 1.7, 2.0).unwrap();
    let xs = draws(21, |r| sample_bsgt(&sym, &shape, GtPath::UniformMixture, r).x);
    assert!(ks(&xs, |x| base.pdf(x)) < 0.01);

    let d = sample_bsgt(&p, &shape, GtPath::UniformMixture, &mut RngStream::new(1, 1));
    assert!(d.s.is_some() && d.u.is_some() && d.lambda.is_none());
    let d = sample_bsgt(&p, &shape, GtPath::ExpPowerMixture, &mut RngStream::new(1, 1));
    assert!(d.s.is_some() && d.u.is_none());
}

#[test]
fn first_two_moments_match_closed_forms() {
    let specs = [
        DistributionSpec::bsn(3.0, 1.5).unwrap(),
        DistributionSpec::bsstd(1.0, 0.8, 8.0).unwrap(),
        DistributionSpec::bsgt(1.0, 1.5, 2.0, 5.0).unwrap(),
    ];
    for (k, spec) in specs.iter().enumerate() {
        for r in 1..=2 {
            let mut rng = RngStream::new(31, (10 * k + r) as u64);
            let est = mc_moment(spec, r as u32, 200_000, &mut rng).unwrap();
            let exact = full_moment(r as u32, spec.skew(), spec.base()).unwrap();
            assert!(
                (est.value - exact).abs() <= 4.0 * est.abs_error_estimate,
                "{spec:?} r={r}: {} vs {exact}",
                est.value
            );
        }
    }
}
