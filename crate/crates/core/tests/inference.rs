use bimodal_skew::dist::{full_moment, DistributionSpec};
use bimodal_skew::inference::{
    b_phi, effective_sample_size, gibbs_update_lambda, lambda_rate, log_cond_alpha, log_cond_nu,
    log_cond_phi, log_likelihood_bsn, metropolis_accept, posterior_summary, run_mcmc,
    AugmentedState, Block, BlockAcceptance, Chain, McmcConfig, Model, Param, Posterior,
    PriorConfig, SweepBlocks,
};
use bimodal_skew::oracle::integrate;
use bimodal_skew::sampling::{sample_n, RngStream, StreamId};
use bimodal_skew::Error;
use rand::Rng;

fn synthetic(spec: &DistributionSpec, n: usize, seed: u64) -> Vec<f64> {
    sample_n(spec, n, &mut RngStream::new(seed, 1_000))
}

fn bsn_data(n: usize, seed: u64) -> Vec<f64> {
    synthetic(&DistributionSpec::bsn(3.0, 1.5).unwrap(), n, seed)
}

#[test]
fn unit_precisions_collapse_student_sweeps_to_normal_sweeps() {
    let data = bsn_data(150, 3);
    let prior = PriorConfig::default();
    let config = McmcConfig::default();
    let normal = Posterior::new(&data, Model::Bsn, prior).unwrap();
    let student = Posterior::new(&data, Model::Bsstd, prior).unwrap();
    let mut s_normal = normal.initial_state(&Default::default()).unwrap();
    let mut s_student = student.initial_state(&Default::default()).unwrap();
    assert_eq!(s_student.lambda.as_deref(), Some(&vec![1.0; data.len()][..]));
    s_student.alpha = s_normal.alpha;
    let mut t_normal = normal.tuners(&config);
    let mut t_student = student.tuners(&config);
    let mut r_normal = RngStream::new(8, 0);
    let mut r_student = RngStream::new(8, 0);
    let fixed = SweepBlocks {
        nu: false,
        lambda: false,
    };
    for t in 1..=500 {
        let adapt = Some(t);
        let a = normal
            .sweep(&mut s_normal, &mut t_normal, adapt, SweepBlocks::ALL, &mut r_normal)
            .unwrap();
        let b = student
            .sweep(&mut s_student, &mut t_student, adapt, fixed, &mut r_student)
            .unwrap();
        assert_eq!(a, b, "sweep {t}");
        assert_eq!(s_normal.alpha, s_student.alpha);
        assert_eq!(s_normal.phi, s_student.phi);
    }
    assert_eq!(s_student.nu, Some(6.0));
}

fn ln_gamma_prior(x: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * x.ln() - b * x
}

#[test]
fn phi_and_alpha_conditionals_match_joint_differences() {
    let data = bsn_data(40, 5);
    let prior = PriorConfig::default();
    let mut rng = RngStream::new(17, 0);
    let lambda = gibbs_update_lambda(&data, 2.0, 5.0, &mut rng).unwrap();
    let student = Posterior::new(&data, Model::Bsstd, prior).unwrap();
    let student_joint = |alpha: f64, phi: f64| {
        student.log_posterior(&AugmentedState {
            alpha,
            phi,
            nu: Some(5.0),
            p: None,
            q: None,
            lambda: Some(lambda.clone()),
            log_posterior: 0.0,
        })
    };
    for _ in 0..100 {
        let alpha = rng.random_range(0.0..10.0);
        let (phi1, phi2) = (rng.random_range(0.05..8.0), rng.random_range(0.05..8.0));
        let joint = |phi: f64| {
            log_likelihood_bsn(&data, alpha, phi).unwrap()
                + ln_gamma_prior(phi, prior.a_phi, prior.b_phi)
        };
        let cond = |phi: f64| log_cond_phi(&data, None, alpha, phi, &prior).unwrap();
        let lhs = cond(phi1) - cond(phi2);
        assert!((lhs - (joint(phi1) - joint(phi2))).abs() < 1e-9 * (1.0 + lhs.abs()));

        let cond_l = |phi: f64| log_cond_phi(&data, Some(&lambda), alpha, phi, &prior).unwrap();
        let lhs = cond_l(phi1) - cond_l(phi2);
        let rhs = student_joint(alpha, phi1) - student_joint(alpha, phi2);
        assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));

        let phi = phi1;
        let (a1, a2) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        let joint = |a: f64| {
            log_likelihood_bsn(&data, a, phi).unwrap()
                + ln_gamma_prior(a, prior.alpha_prior.shape, prior.alpha_prior.rate)
        };
        let cond = |a: f64| log_cond_alpha(&data, a, phi, &prior).unwrap();
        let lhs = cond(a1) - cond(a2);
        assert!((lhs - (joint(a1) - joint(a2))).abs() < 1e-9 * (1.0 + lhs.abs()));
        let rhs = student_joint(a1, phi) - student_joint(a2, phi);
        assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
}

#[test]
fn nu_conditional_matches_joint_differences() {
    let data = bsn_data(30, 6);
    let prior = PriorConfig::default();
    let student = Posterior::new(&data, Model::Bsstd, prior).unwrap();
    let lambda = gibbs_update_lambda(&data, 2.0, 5.0, &mut RngStream::new(2, 2)).unwrap();
    let joint = |nu: f64| {
        student.log_posterior(&AugmentedState {
            alpha: 1.0,
            phi: 2.0,
            nu: Some(nu),
            p: None,
            q: None,
            lambda: Some(lambda.clone()),
            log_posterior: 0.0,
        })
    };
    let cond = |nu: f64| log_cond_nu(&lambda, nu, prior.beta_nu).unwrap();
    for (a, b) in [(2.5, 9.0), (3.1, 4.2), (30.0, 5.5)] {
        assert!(((cond(a) - cond(b)) - (joint(a) - joint(b))).abs() < 1e-9);
    }
}

#[test]
fn zero_data_phi_conditional_is_gamma_like() {
    let prior = PriorConfig::default();
    let data = [0.0; 6];
    let n = 6.0;
    for (a1, p1, p2) in [(0.5, 0.3, 2.0), (4.0, 1.0, 7.0)] {
        let kernel = |phi: f64| {
            (prior.a_phi + n / 2.0 - 1.0) * f64::ln(phi) - prior.b_phi * phi - n * phi.ln_1p()
                - n * (a1 * b_phi(phi)).ln_1p()
        };
        let c = |phi: f64| log_cond_phi(&data, None, a1, phi, &prior).unwrap();
        assert!(((c(p1) - c(p2)) - (kernel(p1) - kernel(p2))).abs() < 1e-12);
    }
    let ones = [1.0; 4];
    let c = log_cond_nu(&ones, 7.0, 0.1).unwrap();
    let again = log_cond_nu(&ones, 7.0, 0.1).unwrap();
    assert_eq!(c, again);
}

#[test]
fn conditionals_integrate_to_finite_values() {
    let data = bsn_data(10, 9);
    let prior = PriorConfig::default();
    let peak = log_cond_phi(&data, None, 1.0, 2.0, &prior).unwrap();
    let r = integrate(
        |phi| {
            if phi <= 0.0 {
                0.0
            } else {
                (log_cond_phi(&data, None, 1.0, phi, &prior).unwrap() - peak).exp()
            }
        },
        0.0,
        f64::INFINITY,
        1e-10,
    );
    assert!(r.converged && r.value.is_finite() && r.value > 0.0);

    let lambda = gibbs_update_lambda(&data, 2.0, 5.0, &mut RngStream::new(3, 0)).unwrap();
    let peak = log_cond_nu(&lambda, 5.0, 0.1).unwrap();
    let nu_density = |nu: f64| {
        if nu <= 2.0 {
            0.0
        } else {
            (log_cond_nu(&lambda, nu, 0.1).unwrap() - peak).exp()
        }
    };
    let r = integrate(nu_density, 2.0, f64::INFINITY, 1e-10);
    assert!(r.converged && r.value.is_finite() && r.value > 0.0);
    assert!(log_cond_nu(&lambda, 2.0 + 1e-12, 0.1).unwrap() < peak - 100.0);
    assert!(log_cond_nu(&lambda, 1e6, 0.1).unwrap() < peak - 100.0);
}

#[test]
fn larger_nu_rate_moves_conditional_mode_left() {
    let data = bsn_data(10, 10);
    let lambda = gibbs_update_lambda(&data, 2.0, 8.0, &mut RngStream::new(4, 0)).unwrap();
    let mode = |beta: f64| {
        (1..=20_000)
            .map(|i| 2.0 + i as f64 * 0.005)
            .max_by(|a, b| {
                let fa = log_cond_nu(&lambda, *a, beta).unwrap();
                let fb = log_cond_nu(&lambda, *b, beta).unwrap();
                fa.total_cmp(&fb)
            })
            .unwrap()
    };
    assert!(mode(2.0) < mode(0.1));
}

#[test]
fn alpha_conditional_mode_near_truth() {
    let data = synthetic(&DistributionSpec::bsn(3.0, 1.0).unwrap(), 50, 12);
    let prior = PriorConfig::default();
    let mode = (0..=3000)
        .map(|i| i as f64 * 0.01)
        .max_by(|a, b| {
            let fa = log_cond_alpha(&data, *a, 1.0, &prior).unwrap();
            let fb = log_cond_alpha(&data, *b, 1.0, &prior).unwrap();
            fa.total_cmp(&fb)
        })
        .unwrap();
    assert!((1.0..=8.0).contains(&mode), "{mode}");
}

#[test]
fn lambda_conditional_rates_and_downweighting() {
    assert_eq!(lambda_rate(0.0, 1.7, 4.0), 1.0);
    assert_eq!(lambda_rate(2.0, 1.0, 4.0), 3.0);
    let mut rng = RngStream::new(21, 0);
    let mean_at = |x: f64, rng: &mut RngStream| {
        let data = vec![x; 10_000];
        gibbs_update_lambda(&data, 1.0, 4.0, rng).unwrap().iter().sum::<f64>() / 10_000.0
    };
    let at_zero = mean_at(0.0, &mut rng);
    let at_five = mean_at(5.0, &mut rng);
    assert!(at_five < at_zero);
    assert!((at_zero - 2.5).abs() < 0.05);
    assert!(gibbs_update_lambda(&[1.0], 1.0, 2.0, &mut rng).is_err());
}

#[test]
fn metropolis_kernel_keeps_a_discrete_target() {
    let target = [0.2, 0.3, 0.5];
    let mut rng = RngStream::new(33, 0);
    let mut state = 0usize;
    let mut counts = [0usize; 3];
    let steps = 1_000_000;
    for _ in 0..steps {
        let next = (state + 1 + rng.random_range(0..2)) % 3;
        if metropolis_accept(f64::ln(target[next]) - f64::ln(target[state]), &mut rng) {
            state = next;
        }
        counts[state] += 1;
    }
    for (c, p) in counts.iter().zip(target) {
        let freq = *c as f64 / steps as f64;
        assert!((freq / p - 1.0).abs() < 0.02, "{freq} vs {p}");
    }
}

#[test]
fn adaptation_reaches_target_band() {
    let data = bsn_data(200, 14);
    let chains = run_mcmc(
        &data,
        Model::Bsn,
        &PriorConfig::default(),
        &McmcConfig::new(6_000, 2_000, 14),
    )
    .unwrap();
    for a in &chains[0].acceptance {
        assert!((0.3..=0.6).contains(&a.rate()), "{:?}", a);
    }
    let trace = &chains[0].adaptation;
    assert_eq!(trace.first().unwrap().iteration, 0);
    assert_eq!(trace.last().unwrap().iteration, 2_000);
    let last = trace.last().unwrap();
    for (a, s) in chains[0].acceptance.iter().zip(&last.scales) {
        assert_eq!(a.final_scale, *s);
    }
}

#[test]
fn configuration_is_validated() {
    let data = [0.1, -0.4, 1.2];
    let prior = PriorConfig::default();
    let zero = McmcConfig {
        initial_scale: 0.0,
        ..McmcConfig::new(200, 100, 0)
    };
    assert!(matches!(run_mcmc(&data, Model::Bsn, &prior, &zero), Err(Error::Config(_))));
    let bad_data = [0.1, f64::NAN];
    assert!(matches!(
        run_mcmc(&bad_data, Model::Bsn, &prior, &McmcConfig::new(200, 100, 0)),
        Err(Error::Ingestion(_))
    ));
    assert!(matches!(
        run_mcmc(&[], Model::Bsn, &prior, &McmcConfig::new(200, 100, 0)),
        Err(Error::Ingestion(_))
    ));
    assert!(matches!(
        run_mcmc(&data, Model::Bsgt, &prior, &McmcConfig::new(200, 100, 0)),
        Err(Error::Config(_))
    ));
}

#[test]
fn chains_are_deterministic_and_counted() {
    let data = synthetic(&DistributionSpec::bsstd(1.0, 1.2, 5.0).unwrap(), 120, 15);
    let config = McmcConfig {
        thin: 3,
        chains: 3,
        ..McmcConfig::new(1_300, 400, 15)
    };
    let a = run_mcmc(&data, Model::Bsstd, &PriorConfig::default(), &config).unwrap();
    let b = run_mcmc(&data, Model::Bsstd, &PriorConfig::default(), &config).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.len(), 3);
    for (k, c) in a.iter().enumerate() {
        assert_eq!(c.draws.len(), 300);
        assert_eq!(c.chain_id, k);
        assert_eq!(c.stream.stream, k as u64);
        assert!(c.acceptance.iter().all(|x| (0.0..=1.0).contains(&x.rate())));
        assert_eq!(c.lambda_mean.as_ref().unwrap().len(), data.len());
        assert!(c.draws.iter().all(|d| d.lambda.is_none() && d.nu.is_some()));
    }
    assert_ne!(a[0].draws, a[1].draws);

    let stored = McmcConfig {
        store_lambda: true,
        chains: 1,
        ..config
    };
    let c = run_mcmc(&data, Model::Bsstd, &PriorConfig::default(), &stored).unwrap();
    let mean0: f64 = c[0].draws.iter().map(|d| d.lambda.as_ref().unwrap()[0]).sum::<f64>()
        / c[0].draws.len() as f64;
    assert!((mean0 - c[0].lambda_mean.as_ref().unwrap()[0]).abs() < 1e-12);
}

#[test]
fn posterior_contracts_with_sample_size() {
    // Nested data: the small set is a prefix of the large one.
    let data = bsn_data(1_000, 40);
    let sd_phi = |d: &[f64]| {
        let chains = run_mcmc(
            d,
            Model::Bsn,
            &PriorConfig::default(),
            &McmcConfig::new(12_000, 2_000, 40),
        )
        .unwrap();
        posterior_summary(&chains).unwrap().param(Param::Phi).unwrap().sd
    };
    let ratio = sd_phi(&data[..100]) / sd_phi(&data);
    assert!((2.2..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn posterior_second_moment_matches_sample_moment() {
    let spec = DistributionSpec::bsn(3.0, 1.5).unwrap();
    let data = synthetic(&spec, 3_000, 50);
    let sample_m2 = data.iter().map(|x| x * x).sum::<f64>() / data.len() as f64;
    let chains = run_mcmc(
        &data,
        Model::Bsn,
        &PriorConfig::default(),
        &McmcConfig::new(6_000, 2_000, 50),
    )
    .unwrap();
    let draws = &chains[0].draws;
    let posterior_m2 = draws
        .iter()
        .map(|d| {
            let params =
                bimodal_skew::BimodalSkewParams::from_phi(d.alpha, d.phi).unwrap();
            full_moment(2, &params, spec.base()).unwrap()
        })
        .sum::<f64>()
        / draws.len() as f64;
    assert!((posterior_m2 / sample_m2 - 1.0).abs() < 0.1, "{posterior_m2} vs {sample_m2}");
}

#[test]
fn gt_extension_runs_when_enabled() {
    let data = synthetic(&DistributionSpec::bsgt(2.0, 1.3, 2.0, 4.0).unwrap(), 200, 60);
    let config = McmcConfig {
        enable_extensions: true,
        ..McmcConfig::new(3_000, 1_000, 60)
    };
    let chains = run_mcmc(&data, Model::Bsgt, &PriorConfig::default(), &config).unwrap();
    let summary = posterior_summary(&chains).unwrap();
    let p = summary.param(Param::P).unwrap();
    let q = summary.param(Param::Q).unwrap();
    assert!(p.mean > 0.0 && q.mean > 0.0);
    assert!(chains[0].draws.iter().all(|d| d.p.unwrap() * d.q.unwrap() > 2.0));
    assert!(summary.acceptance_rate(Block::Shape).unwrap() > 0.1);
}

fn fixed_chain(values: &[f64]) -> Chain {
    Chain {
        chain_id: 0,
        stream: StreamId { seed: 0, stream: 0 },
        model: Model::Bsn,
        draws: values
            .iter()
            .map(|&v| AugmentedState {
                alpha: v,
                phi: 1.5,
                nu: None,
                p: None,
                q: None,
                lambda: None,
                log_posterior: 0.0,
            })
            .collect(),
        acceptance: vec![BlockAcceptance {
            block: Block::Phi,
            proposed: 10,
            accepted: 4,
            final_scale: 1.0,
        }],
        adaptation: Vec::new(),
        lambda_mean: None,
    }
}

#[test]
fn summary_edge_cases() {
    let constant = fixed_chain(&[2.0; 150]);
    let s = posterior_summary(&[constant]).unwrap();
    let alpha = s.param(Param::Alpha).unwrap();
    assert_eq!(alpha.sd, 0.0);
    assert_eq!(alpha.ess, 150.0);
    assert!(!s.warnings.is_empty());
    assert_eq!(s.acceptance_rate(Block::Phi), Some(0.4));

    assert!(matches!(
        posterior_summary(&[]),
        Err(Error::InsufficientDraws { .. })
    ));
    assert!(matches!(
        posterior_summary(&[fixed_chain(&[1.0; 20])]),
        Err(Error::InsufficientDraws { .. })
    ));
}

#[test]
fn independent_draws_have_full_ess() {
    let spec = DistributionSpec::bsn(1.0, 1.5).unwrap();
    let xs = synthetic(&spec, 20_000, 70);
    let ess = effective_sample_size(&xs).unwrap();
    assert!((ess / 20_000.0 - 1.0).abs() < 0.1, "{ess}");
    let s = posterior_summary(&[fixed_chain(&xs)]).unwrap();
    let alpha = s.param(Param::Alpha).unwrap();
    assert!(alpha.interval_95[0] < alpha.interval_50[0] && alpha.interval_50[1] < alpha.interval_95[1]);
}
