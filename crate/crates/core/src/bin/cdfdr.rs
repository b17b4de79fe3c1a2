use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use cdfdr::error::{Error, Result};
use cdfdr::inference::{ecdf_at_points, local_fdr_reject};
use cdfdr::ingest::{ingest, Sample, SampleKind};
use cdfdr::null_model::{clamp_epsilon, NullModel};
use cdfdr::pipeline::{fit_sample, load_model, save_model, FitOptions, NullChoice};
use cdfdr::sim::{
    run_study, threads_from_env, uniform_grid, MixtureNormalConfig, MixtureUniformConfig, Scenario,
    StudyOptions,
};
use cdfdr::{
    cd_bh, efron_density_reject, hc_threshold, local_fdr, local_fdr_from_pvalues, mdc_pi0,
    uniformity_diagnostic, CDModel, MdcOptions, Method, Sided,
};

#[derive(Parser)]
#[command(name = "cdfdr", version, about = "Comparison-density signal detection")]
struct Cli {
    /// Omit timestamps so repeated runs produce identical files.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit null, comparison density and π̂₀; write the model JSON.
    Fit(FitArgs),
    /// Apply a rejection rule.
    Reject(RejectArgs),
    /// Minimum-deviance π̂₀ and its deviance path.
    Pi0(Pi0Args),
    /// Run a seeded simulation study.
    Simulate(SimulateArgs),
    /// Beta-fit uniformity diagnostic.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Numbers one per line, or a CSV file with --column.
    input: PathBuf,
    /// z, p or t.
    #[arg(long, default_value = "z")]
    kind: SampleKind,
    /// Degrees of freedom for t statistics.
    #[arg(long)]
    df: Option<f64>,
    /// Named CSV column to read.
    #[arg(long)]
    column: Option<String>,
}

impl InputArgs {
    fn load(&self) -> Result<Sample> {
        let sample = ingest(&self.input, self.kind, self.df, self.column.as_deref())
            .map_err(|e| e.at_stage("ingest"))?;
        eprintln!("{}", sample.summary());
        if sample.clamped > 0 {
            eprintln!(
                "note: {} t statistics clamped before conversion",
                sample.clamped
            );
        }
        Ok(sample)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "empirical")]
    null: NullChoice,
    #[arg(long, default_value = "two-sided")]
    sided: Sided,
    /// Largest Legendre degree.
    #[arg(long = "max-degree", short = 'M', default_value_t = 10)]
    max_degree: usize,
    /// Model JSON output.
    #[arg(long, short, default_value = "model.json")]
    out: PathBuf,
    /// Fit report JSON (stdout when omitted).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Plot-ready `u,density` CSV on a 1000-point grid.
    #[arg(long)]
    density_csv: Option<PathBuf>,
}

#[derive(Args)]
struct RejectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "bh")]
    method: Method,
    /// Fitted model (required for locfdr and efron).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha0: f64,
    #[arg(long = "fdr-cutoff", default_value_t = 0.2)]
    fdr_cutoff: f64,
    /// Null proportion; defaults to the model's π̂₀, else 1.
    #[arg(long)]
    pi0: Option<f64>,
    /// Sidedness for z input when no model is given.
    #[arg(long, default_value = "two-sided")]
    sided: Sided,
    /// Per-hypothesis CSV.
    #[arg(long, short, default_value = "decisions.csv")]
    out: PathBuf,
    /// Summary JSON (stdout when omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct Pi0Args {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 3.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long = "max-degree", short = 'M', default_value_t = 10)]
    max_degree: usize,
    /// Deviance path CSV.
    #[arg(long, default_value = "pi0_path.csv")]
    path_out: PathBuf,
    /// Summary JSON (stdout when omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    Normal,
    Uniform,
    /// All six {π₀} × {a} uniform cells.
    UniformGrid,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "normal")]
    scenario: ScenarioKind,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    pi0: f64,
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.02)]
    a: f64,
    #[arg(long, default_value_t = 150)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Null for the z-score design.
    #[arg(long, default_value = "theoretical")]
    null: NullChoice,
    /// Full JSON report (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Per-replication CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Mean/sd fdr curves CSV (normal scenario).
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// How z input is turned into p-values (theoretical null).
    #[arg(long, default_value = "two-sided")]
    sided: Sided,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let stamp = !cli.deterministic;
    match cli.command {
        Command::Fit(args) => cmd_fit(args, stamp),
        Command::Reject(args) => cmd_reject(args, stamp),
        Command::Pi0(args) => cmd_pi0(args, stamp),
        Command::Simulate(args) => cmd_simulate(args, stamp),
        Command::Diagnose(args) => cmd_diagnose(args, stamp),
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Serializes `value`, adding `generated_at` unless deterministic.
fn json_with_stamp<T: Serialize>(value: &T, stamp: bool) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    if stamp {
        if let Value::Object(map) = &mut v {
            map.insert("generated_at".into(), Value::from(timestamp()));
        }
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_fit(args: FitArgs, stamp: bool) -> Result<()> {
    let sample = args.input.load()?;
    let options = FitOptions {
        null: args.null,
        sided: args.sided,
        max_degree: args.max_degree,
        mdc: MdcOptions {
            max_degree: args.max_degree,
            ..MdcOptions::default()
        },
        ..FitOptions::default()
    };
    let outcome = fit_sample(&sample, &options)?;
    // nothing is written until every stage has succeeded
    save_model(&outcome.model, &args.out).map_err(|e| e.at_stage("write"))?;
    if let Some(path) = &args.density_csv {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["u", "density"])?;
        for i in 0..1000 {
            let u = (i as f64 + 0.5) / 1000.0;
            w.write_record([u.to_string(), outcome.model.eval(u)?.to_string()])?;
        }
        w.flush()?;
    }
    emit(
        &json_with_stamp(&outcome.report(), stamp)?,
        args.report.as_deref(),
    )
}

/// p-values for the rejection rules: p input as is, z input through the
/// model's null or the theoretical null. Exact zeros become the smallest
/// positive double so they stay the most significant value.
fn sample_pvalues(sample: &Sample, model: Option<&CDModel>, sided: Sided) -> Result<Vec<f64>> {
    match sample.kind {
        SampleKind::P => Ok(sample
            .values
            .iter()
            .map(|&p| if p > 0.0 { p } else { f64::MIN_POSITIVE })
            .collect()),
        SampleKind::Z | SampleKind::T => {
            let eps = clamp_epsilon(sample.len());
            match model.filter(|m| m.null.is_some()) {
                Some(m) => sample
                    .values
                    .iter()
                    .map(|&z| Ok(m.z_to_u(z)?.clamp(eps, 1.0 - eps)))
                    .collect(),
                None => Ok(cdfdr::pvalues_from_z(
                    &sample.values,
                    &NullModel::theoretical(),
                    sided,
                )),
            }
        }
    }
}

fn cmd_reject(args: RejectArgs, stamp: bool) -> Result<()> {
    let sample = args.input.load()?;
    let model = args
        .model
        .as_ref()
        .map(load_model)
        .transpose()
        .map_err(|e| e.at_stage("model"))?;
    let pi0 = args
        .pi0
        .or(model.as_ref().and_then(|m| m.pi0))
        .unwrap_or(1.0);
    let p = sample_pvalues(&sample, model.as_ref(), args.sided)?;
    let need_model = || {
        model.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("method {} needs --model", args.method))
                .at_stage("reject")
        })
    };
    let result = match args.method {
        Method::CdBh => cd_bh(&p, args.alpha, pi0),
        Method::Hc => hc_threshold(&p, args.alpha0),
        Method::LocalFdr => {
            let m = need_model()?.clone();
            let m = m.with_pi0(pi0)?;
            let fdr = match sample.kind {
                SampleKind::P => local_fdr_from_pvalues(&p, &m)?,
                _ if m.null.is_some() => local_fdr(&sample.values, &m)?,
                _ => local_fdr_from_pvalues(&p, &m)?,
            };
            Ok(local_fdr_reject(fdr, &p, pi0, args.fdr_cutoff))
        }
        Method::EfronDensity => efron_density_reject(&p, need_model()?, args.alpha, pi0),
    }
    .map_err(|e| e.at_stage("reject"))?;
    result.write_csv(create(&args.out)?)?;
    emit(
        &json_with_stamp(&result.summary(), stamp)?,
        args.summary.as_deref(),
    )
}

#[derive(Serialize)]
struct Pi0Summary {
    pi0: f64,
    lambda_star: f64,
    max_degree: usize,
    n: usize,
    grid_points: usize,
}

fn cmd_pi0(args: Pi0Args, stamp: bool) -> Result<()> {
    let sample = args.input.load()?;
    let model = load_model(&args.model).map_err(|e| e.at_stage("model"))?;
    let p = sample_pvalues(&sample, Some(&model), Sided::TwoSided)?;
    let options = MdcOptions {
        gamma: args.gamma,
        grid_step: args.step,
        max_degree: args.max_degree,
    };
    let est = mdc_pi0(&p, &model, options).map_err(|e| e.at_stage("pi0"))?;
    est.write_path_csv(create(&args.path_out)?)?;
    let summary = Pi0Summary {
        pi0: est.pi0,
        lambda_star: est.lambda_star,
        max_degree: est.max_degree,
        n: est.n,
        grid_points: est.path.len(),
    };
    emit(&json_with_stamp(&summary, stamp)?, args.summary.as_deref())
}

fn cmd_simulate(args: SimulateArgs, stamp: bool) -> Result<()> {
    let mut options = StudyOptions {
        threads: threads_from_env(),
        ..StudyOptions::default()
    };
    options.fit.null = args.null;
    let scenarios: Vec<Scenario> = match args.scenario {
        ScenarioKind::Normal => vec![Scenario::MixtureNormal(MixtureNormalConfig {
            n: args.n,
            pi0: args.pi0,
            mu: args.mu,
            reps: args.reps,
            seed: args.seed,
        })],
        ScenarioKind::Uniform => vec![Scenario::MixtureUniform(MixtureUniformConfig {
            n: args.n,
            pi0: args.pi0,
            a: args.a,
            reps: args.reps,
            seed: args.seed,
        })],
        ScenarioKind::UniformGrid => uniform_grid(args.n, args.reps, args.seed)
            .into_iter()
            .map(Scenario::MixtureUniform)
            .collect(),
    };
    let reports = scenarios
        .iter()
        .map(|s| run_study(s, &options))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("simulate"))?;
    for r in &reports {
        if r.failures > 0 {
            eprintln!(
                "note: {} of {} replications failed",
                r.failures,
                r.records.len()
            );
        }
    }

    if let Some(path) = &args.records {
        let mut out = create(path)?;
        for (i, r) in reports.iter().enumerate() {
            let mut buf = Vec::new();
            r.write_records_csv(&mut buf)?;
            // one header for the whole file; cells follow in grid order
            let text = String::from_utf8_lossy(&buf);
            let body = if i == 0 {
                &text[..]
            } else {
                text.split_once('\n').map_or("", |x| x.1)
            };
            out.write_all(body.as_bytes())?;
        }
        out.flush()?;
    }
    if let Some(path) = &args.curves {
        match reports.first().and_then(|r| r.curves.as_ref()) {
            Some(c) => c.write_csv(create(path)?)?,
            None => eprintln!("note: fdr curves are only produced by the normal scenario"),
        }
    }
    let text = if reports.len() == 1 {
        json_with_stamp(&reports[0], stamp)?
    } else {
        json_with_stamp(&serde_json::json!({ "reports": reports }), stamp)?
    };
    emit(&text, args.out.as_deref())
}

#[derive(Serialize)]
struct DiagnoseSummary {
    n: usize,
    statistic: f64,
    p_value: f64,
    alpha: f64,
    beta: f64,
    /// Kolmogorov–Smirnov distance of the p-values from uniform.
    ks_distance: f64,
}

fn cmd_diagnose(args: DiagnoseArgs, stamp: bool) -> Result<()> {
    let sample = args.input.load()?;
    let p = sample_pvalues(&sample, None, args.sided)?;
    let diag = uniformity_diagnostic(&p).map_err(|e| e.at_stage("diagnostic"))?;
    let ecdf = ecdf_at_points(&p);
    let n = p.len() as f64;
    let ks = p
        .iter()
        .zip(&ecdf)
        .map(|(&u, &d)| (d - u).abs().max((d - 1.0 / n - u).abs()))
        .fold(0.0, f64::max);
    let summary = DiagnoseSummary {
        n: p.len(),
        statistic: diag.statistic,
        p_value: diag.p_value,
        alpha: diag.alpha,
        beta: diag.beta,
        ks_distance: ks,
    };
    emit(&json_with_stamp(&summary, stamp)?, args.out.as_deref())
}
