use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use bimodal_skew::dist::find_modes;
use bimodal_skew::inference::{
    posterior_summary, run_mcmc, AugmentedState, McmcConfig, Model, PriorConfig,
};
use bimodal_skew::oracle::check::{run_check, CheckConfig};
use bimodal_skew::sampling::{sample_n, RngStream};
use serde::Serialize;
use serde_json::json;

use crate::{
    ingest, CheckArgs, CliError, FitArgs, Format, ModelArg, ModesArgs, MomentsArgs, Outcome,
    OutputArgs, PdfArgs, SampleArgs, SCHEMA,
};

type CmdResult = Result<Outcome, CliError>;

/// Outlier rows listed in the fit report.
const OUTLIER_ROWS: usize = 10;

fn emit(output: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(value: &serde_json::Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn to_csv<I, R>(header: &[String], rows: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Failure(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn pdf(args: &PdfArgs) -> CmdResult {
    if args.points < 2 {
        return Err(CliError::Usage(format!("--points must be >= 2, got {}", args.points)));
    }
    if !(args.from.is_finite() && args.to.is_finite() && args.from < args.to) {
        return Err(CliError::Usage(format!(
            "grid needs finite --from < --to, got [{}, {}]",
            args.from, args.to
        )));
    }
    let alphas = args.compare.clone().unwrap_or_else(|| vec![args.spec.alpha]);
    if alphas.is_empty() {
        return Err(CliError::Usage("--compare needs at least one value".into()));
    }
    let specs = alphas
        .iter()
        .map(|&a| args.spec.spec_with_alpha(a))
        .collect::<Result<Vec<_>, _>>()?;

    let step = (args.to - args.from) / (args.points - 1) as f64;
    let xs: Vec<f64> = (0..args.points)
        .map(|i| if i + 1 == args.points { args.to } else { args.from + i as f64 * step })
        .collect();
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| std::iter::once(x).chain(specs.iter().map(|s| s.pdf(x))).collect())
        .collect();

    let mut columns = vec!["x".to_string()];
    if args.compare.is_some() {
        columns.extend(alphas.iter().map(|a| format!("alpha={a}")));
    } else {
        columns.push("pdf".into());
    }

    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "pdf",
            "specs": specs,
            "columns": columns,
            "rows": rows,
        }))?,
        Format::Csv => to_csv(&columns, rows.iter().map(|r| r.iter().map(|&v| num(v))))?,
    };
    emit(&args.output, &text)?;
    Ok(Outcome::Success)
}

pub fn moments(args: &MomentsArgs) -> CmdResult {
    let spec = args.spec.spec()?;
    let reports: Vec<_> = (1..=args.max_order)
        .map(|r| {
            let report = spec.moment_report(r);
            let raw = spec.raw_moment(r).ok();
            (report, raw)
        })
        .collect();

    let text = match args.output.format {
        Format::Json => {
            let entries: Vec<_> = reports
                .iter()
                .map(|(rep, raw)| json!({"standardized": rep, "raw_moment": raw}))
                .collect();
            to_json(&json!({
                "schema": SCHEMA,
                "command": "moments",
                "spec": spec,
                "moments": entries,
            }))?
        }
        Format::Csv => {
            let header: Vec<String> =
                ["order", "exists", "standardized", "raw"].iter().map(|s| s.to_string()).collect();
            to_csv(
                &header,
                reports.iter().map(|(rep, raw)| {
                    vec![
                        rep.order.to_string(),
                        rep.exists.to_string(),
                        opt_num(rep.full_moment),
                        opt_num(*raw),
                    ]
                }),
            )?
        }
    };
    emit(&args.output, &text)?;
    Ok(Outcome::Success)
}

pub fn modes(args: &ModesArgs) -> CmdResult {
    let spec = args.spec.spec()?;
    let modes = find_modes(&spec);
    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "modes",
            "spec": spec,
            "count": modes.len(),
            "modes": modes,
        }))?,
        Format::Csv => to_csv(
            &["location".to_string(), "density".to_string()],
            modes.iter().map(|m| vec![num(m.location), num(m.density)]),
        )?,
    };
    emit(&args.output, &text)?;
    Ok(Outcome::Success)
}

pub fn sample(args: &SampleArgs) -> CmdResult {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be >= 1".into()));
    }
    let spec = args.spec.spec()?;
    let seed = args.seed.unwrap_or_else(clock_seed);
    let mut rng = RngStream::new(seed, 0);
    let draws = sample_n(&spec, args.n, &mut rng);

    let mut body = String::with_capacity(24 * draws.len());
    for x in &draws {
        body.push_str(&num(*x));
        body.push('\n');
    }
    let sidecar = to_json(&json!({
        "schema": SCHEMA,
        "command": "sample",
        "seed": seed,
        "stream": 0,
        "n": args.n,
        "spec": spec,
    }))?;

    match &args.out {
        Some(path) => {
            std::fs::write(path, body)?;
            let mut side = path.as_os_str().to_owned();
            side.push(".json");
            std::fs::write(side, sidecar)?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprint!("{sidecar}");
        }
    }
    Ok(Outcome::Success)
}

fn clock_seed() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

#[derive(Serialize)]
struct DrawRecord<'a> {
    chain: usize,
    draw: usize,
    #[serde(flatten)]
    state: &'a AugmentedState,
}

pub fn fit(args: &FitArgs) -> CmdResult {
    let model = match args.model {
        ModelArg::Bsn => Model::Bsn,
        ModelArg::Bsstd => Model::Bsstd,
        ModelArg::Bsgt if !args.enable_extensions => {
            return Err(CliError::Usage(
                "posterior updates for the generalized t shape (p, q) are an extension \
                 outside the published scheme; pass --enable-extensions to use them"
                    .into(),
            ))
        }
        ModelArg::Bsgt => Model::Bsgt,
    };
    let data = ingest::read_column(&args.input)?;

    let mut prior = PriorConfig::default();
    if let Some(a) = args.prior_a_phi {
        prior.a_phi = a;
    }
    if let Some(b) = args.prior_b_phi {
        prior.b_phi = b;
    }
    if let Some(b) = args.prior_beta_nu {
        prior.beta_nu = b;
    }
    prior.validate()?;

    let mut config = McmcConfig::new(args.iters, args.burnin, args.seed);
    config.thin = args.thin;
    config.chains = args.chains;
    config.enable_extensions = args.enable_extensions;
    config.validate()?;

    let chains = run_mcmc(&data, model, &prior, &config)?;
    let summary = posterior_summary(&chains)?;

    if let Some(path) = &args.save_chains {
        let mut w = BufWriter::new(File::create(path)?);
        for chain in &chains {
            for (i, state) in chain.draws.iter().enumerate() {
                serde_json::to_writer(&mut w, &DrawRecord { chain: chain.chain_id, draw: i, state })?;
                w.write_all(b"\n")?;
            }
        }
        w.flush()?;
    }

    let outliers = summary.outlier_scores.as_ref().map(|scores| {
        let mut idx: Vec<usize> = (0..scores.len()).collect();
        idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        idx.into_iter()
            .take(OUTLIER_ROWS)
            .map(|i| json!({"index": i, "x": data[i], "lambda_mean": scores[i]}))
            .collect::<Vec<_>>()
    });

    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "fit",
            "input": {"path": args.input.display().to_string(), "n": data.len()},
            "settings": {
                "iterations": config.iterations,
                "burn_in": config.burn_in,
                "thin": config.thin,
                "chains": config.chains,
                "seed": config.seed,
            },
            "prior": prior,
            "summary": summary,
            "outliers": outliers,
        }))?,
        Format::Csv => {
            let header: Vec<String> = ["param", "mean", "sd", "median", "q2.5", "q97.5", "ess"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            to_csv(
                &header,
                summary.params.iter().map(|p| {
                    vec![
                        p.param.name().to_string(),
                        num(p.mean),
                        num(p.sd),
                        num(p.median),
                        num(p.interval_95[0]),
                        num(p.interval_95[1]),
                        num(p.ess),
                    ]
                }),
            )?
        }
    };
    emit(&args.output, &text)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(Outcome::Success)
}

pub fn check(args: &CheckArgs) -> CmdResult {
    let mut config = CheckConfig {
        groups: args.only.clone(),
        delta_corruption: args.corrupt_delta,
        ..CheckConfig::default()
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = run_check(&config);
    let failed = report.failures().count();

    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "command": "check",
            "passed": report.passed(),
            "total": report.results.len(),
            "failed": failed,
            "results": report.results,
        }))?,
        Format::Csv => {
            let header: Vec<String> = ["identity", "group", "status", "value", "tolerance"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            to_csv(
                &header,
                report.results.iter().map(|r| {
                    vec![
                        r.identity.clone(),
                        r.group.name().to_string(),
                        if r.status == bimodal_skew::oracle::check::Status::Pass {
                            "pass".to_string()
                        } else {
                            "fail".to_string()
                        },
                        opt_num(r.value),
                        num(r.tolerance),
                    ]
                }),
            )?
        }
    };
    emit(&args.output, &text)?;
    eprintln!(
        "{} of {} identities passed",
        report.results.len() - failed,
        report.results.len()
    );
    Ok(if report.passed() { Outcome::Success } else { Outcome::Failure })
}
