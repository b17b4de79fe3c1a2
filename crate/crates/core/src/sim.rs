//! Seeded simulation studies: mixture-normal z-scores and mixture-uniform
//! p-values, analytic fdr oracles, MISE summaries and a replication driver.
//!
//! Every replication draws from its own ChaCha8 stream of the master seed
//! (stream `r + 1` for replication `r`); stream 0 holds the non-null means of
//! the mixture-normal design, drawn once and shared by all replications.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    cd_bh, efron_density_reject, hc_threshold, local_fdr, local_fdr_from_pvalues, local_fdr_reject,
    RejectionResult,
};
use crate::null_model::{clamp_epsilon, Sided};
use crate::pi0::mdc_pi0;
use crate::pipeline::{fit_pvalues, fit_zscores, FitOptions, FitOutcome, NullChoice};
use crate::skewbeta::{CDModel, DEFAULT_DENSITY_FLOOR};
use crate::specfun::normal_pdf;

/// Environment variable bounding the number of worker threads.
pub const THREADS_ENV: &str = "CDFDR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureNormalConfig {
    pub n: usize,
    pub pi0: f64,
    /// Mean of the distribution the non-null means are drawn from.
    pub mu: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for MixtureNormalConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            pi0: 0.9,
            mu: 2.0,
            reps: 150,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureUniformConfig {
    pub n: usize,
    pub pi0: f64,
    /// Upper end of the signal component `Uniform[0, a]`.
    pub a: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for MixtureUniformConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            pi0: 0.9,
            a: 0.02,
            reps: 150,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    MixtureNormal(MixtureNormalConfig),
    MixtureUniform(MixtureUniformConfig),
}

impl Scenario {
    pub fn reps(&self) -> usize {
        match self {
            Scenario::MixtureNormal(c) => c.reps,
            Scenario::MixtureUniform(c) => c.reps,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Scenario::MixtureNormal(c) => c.seed,
            Scenario::MixtureUniform(c) => c.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, pi0, reps) = match self {
            Scenario::MixtureNormal(c) => {
                if !c.mu.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "mu must be finite, got {}",
                        c.mu
                    )));
                }
                (c.n, c.pi0, c.reps)
            }
            Scenario::MixtureUniform(c) => {
                if !(c.a > 0.0 && c.a < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "a must lie in (0, 1), got {}",
                        c.a
                    )));
                }
                (c.n, c.pi0, c.reps)
            }
        };
        if n == 0 || reps == 0 {
            return Err(Error::InvalidArgument("n and reps must be positive".into()));
        }
        if !(pi0 > 0.0 && pi0 <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "pi0 must lie in (0, 1], got {pi0}"
            )));
        }
        Ok(())
    }
}

/// Number of non-null cases, `round(n(1 − π₀))`.
pub fn non_null_count(n: usize, pi0: f64) -> usize {
    ((n as f64 * (1.0 - pi0)).round() as usize).min(n)
}

/// Generator for replication `rep` of a study seeded with `seed`.
pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64 + 1);
    rng
}

/// Non-null means `μᵢ ~ N(μ, 1)`, drawn from stream 0 of the seed.
pub fn non_null_means(config: &MixtureNormalConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(0);
    let m = non_null_count(config.n, config.pi0);
    (0..m)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            config.mu + e
        })
        .collect()
}

/// Replication `rep` of the mixture-normal design. The first
/// `round(n(1 − π₀))` entries are the non-null cases.
pub fn gen_mixture_normal_rep(
    config: &MixtureNormalConfig,
    means: &[f64],
    rep: usize,
) -> (Vec<f64>, Vec<bool>) {
    let mut rng = replication_rng(config.seed, rep);
    let m = means.len();
    let z = (0..config.n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            if i < m {
                means[i] + e
            } else {
                e
            }
        })
        .collect();
    let labels = (0..config.n).map(|i| i < m).collect();
    (z, labels)
}

/// First replication of the mixture-normal design.
pub fn gen_mixture_normal(config: &MixtureNormalConfig) -> (Vec<f64>, Vec<bool>) {
    gen_mixture_normal_rep(config, &non_null_means(config), 0)
}

/// Replication `rep` of `π₀ Uniform[0,1] + (1 − π₀) Uniform[0,a]`.
pub fn gen_mixture_uniform_rep(config: &MixtureUniformConfig, rep: usize) -> (Vec<f64>, Vec<bool>) {
    let mut rng = replication_rng(config.seed, rep);
    let m = non_null_count(config.n, config.pi0);
    let p = (0..config.n)
        .map(|i| {
            let u: f64 = rng.random();
            if i < m {
                config.a * u
            } else {
                u
            }
        })
        .collect();
    let labels = (0..config.n).map(|i| i < m).collect();
    (p, labels)
}

pub fn gen_mixture_uniform(config: &MixtureUniformConfig) -> (Vec<f64>, Vec<bool>) {
    gen_mixture_uniform_rep(config, 0)
}

/// `π₀φ(z) / (π₀φ(z) + (1 − π₀)φ(z − μ))`.
pub fn true_fdr_normal(z: f64, pi0: f64, mu: f64) -> f64 {
    // ratio form stays finite far in the tails
    let lr = (mu * z - 0.5 * mu * mu).exp();
    let alt = (1.0 - pi0) * lr;
    if alt.is_infinite() {
        return 0.0;
    }
    pi0 / (pi0 + alt)
}

/// Exact fdr of the realized design, whose marginal for non-null cases is
/// the mixture of `φ(z − μᵢ)` over the fixed means.
pub fn true_fdr_normal_realized(z: f64, pi0: f64, means: &[f64]) -> f64 {
    if means.is_empty() {
        return 1.0;
    }
    let null = pi0 * normal_pdf(z);
    let alt =
        (1.0 - pi0) * means.iter().map(|m| normal_pdf(z - m)).sum::<f64>() / means.len() as f64;
    if null + alt == 0.0 {
        return 0.0;
    }
    null / (null + alt)
}

/// `π₀ / (π₀ + (1 − π₀)/a)` for `u ≤ a`, 1 above.
pub fn true_fdr_uniform(u: f64, pi0: f64, a: f64) -> f64 {
    if u > a {
        1.0
    } else {
        pi0 / (pi0 + (1.0 - pi0) / a)
    }
}

/// Mean of `(f̂dr − fdr)²` over the cases labelled non-null.
pub fn tail_mise(estimated: &[f64], truth: &[f64], labels: &[bool]) -> Result<f64> {
    if estimated.len() != truth.len() || truth.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "tail_mise: length mismatch ({}, {}, {})",
            estimated.len(),
            truth.len(),
            labels.len()
        )));
    }
    let (sum, count) = estimated
        .iter()
        .zip(truth)
        .zip(labels)
        .filter(|(_, &l)| l)
        .fold((0.0, 0usize), |(s, c), ((e, t), _)| {
            (s + (e - t) * (e - t), c + 1)
        });
    if count == 0 {
        return Err(Error::InvalidArgument(
            "tail_mise: no alternative cases".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// Mean of `(f̂dr − fdr)²` over every case.
pub fn mise(estimated: &[f64], truth: &[f64]) -> Result<f64> {
    tail_mise(estimated, truth, &vec![true; truth.len()])
}

/// Settings shared by every replication of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub fit: FitOptions,
    /// Level for the BH-type and Efron rules.
    pub alpha: f64,
    /// Search fraction for Higher Criticism.
    pub alpha0: f64,
    pub fdr_cutoff: f64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            fit: FitOptions {
                null: NullChoice::Theoretical,
                sided: Sided::Right,
                ..FitOptions::default()
            },
            alpha: 0.05,
            alpha0: 0.1,
            fdr_cutoff: 0.2,
            threads: None,
        }
    }
}

/// Reads [`THREADS_ENV`]; unset, empty, zero or unparseable means no bound.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Rejection counts of the four rules, and how many of them were nulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub bh: usize,
    pub hc: usize,
    pub locfdr: usize,
    pub efron: usize,
    pub bh_false: usize,
    pub hc_false: usize,
    pub locfdr_false: usize,
    pub efron_false: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub pi0_hat: Option<f64>,
    pub mise: Option<f64>,
    pub tail_mise: Option<f64>,
    /// Same criteria for the beta-only fit without LP correction.
    pub baseline_mise: Option<f64>,
    pub baseline_tail_mise: Option<f64>,
    /// Mean absolute deviation of f̂dr from the analytic fdr over z ∈ [−3, 5]
    /// (mixture-normal only).
    pub fdr_mad: Option<f64>,
    pub n_coefficients: Option<usize>,
    pub rejections: Option<RejectionCounts>,
    pub error: Option<String>,
}

impl ReplicationRecord {
    fn failed(rep: usize, err: &Error) -> Self {
        Self {
            rep,
            pi0_hat: None,
            mise: None,
            tail_mise: None,
            baseline_mise: None,
            baseline_tail_mise: None,
            fdr_mad: None,
            n_coefficients: None,
            rejections: None,
            error: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Five-number style summary over the finite values of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Aggregate {
    /// `None` when no finite value is present. Quartiles interpolate linearly
    /// between order statistics; `sd` uses the `n − 1` denominator.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_unstable_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            count: n,
            mean,
            sd,
            median: quantile_sorted(&v, 0.5),
            q1: quantile_sorted(&v, 0.25),
            q3: quantile_sorted(&v, 0.75),
        })
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Mean and sd across replications of fdr curves on a fixed z grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrCurves {
    pub z: Vec<f64>,
    pub truth: Vec<f64>,
    pub cdfdr_mean: Vec<f64>,
    pub cdfdr_sd: Vec<f64>,
    pub baseline_mean: Vec<f64>,
    pub baseline_sd: Vec<f64>,
}

impl FdrCurves {
    /// Writes `z,truth,cdfdr_mean,cdfdr_sd,baseline_mean,baseline_sd`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "z",
            "truth",
            "cdfdr_mean",
            "cdfdr_sd",
            "baseline_mean",
            "baseline_sd",
        ])?;
        for i in 0..self.z.len() {
            w.write_record(
                [
                    self.z[i],
                    self.truth[i],
                    self.cdfdr_mean[i],
                    self.cdfdr_sd[i],
                    self.baseline_mean[i],
                    self.baseline_sd[i],
                ]
                .map(|x| x.to_string()),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub alpha: f64,
    pub alpha0: f64,
    pub fdr_cutoff: f64,
    pub null: NullChoice,
    pub sided: Sided,
    pub records: Vec<ReplicationRecord>,
    pub failures: usize,
    pub aggregates: BTreeMap<String, Aggregate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub curves: Option<FdrCurves>,
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per replication.
    pub fn write_records_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "rep",
            "pi0_hat",
            "mise",
            "tail_mise",
            "baseline_mise",
            "baseline_tail_mise",
            "fdr_mad",
            "n_coefficients",
            "bh",
            "hc",
            "locfdr",
            "efron",
            "bh_false",
            "hc_false",
            "locfdr_false",
            "efron_false",
            "error",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.records {
            let c = r.rejections;
            let count = |f: fn(&RejectionCounts) -> usize| {
                c.as_ref().map(|c| f(c).to_string()).unwrap_or_default()
            };
            w.write_record([
                r.rep.to_string(),
                opt(r.pi0_hat),
                opt(r.mise),
                opt(r.tail_mise),
                opt(r.baseline_mise),
                opt(r.baseline_tail_mise),
                opt(r.fdr_mad),
                r.n_coefficients.map(|k| k.to_string()).unwrap_or_default(),
                count(|c| c.bh),
                count(|c| c.hc),
                count(|c| c.locfdr),
                count(|c| c.efron),
                count(|c| c.bh_false),
                count(|c| c.hc_false),
                count(|c| c.locfdr_false),
                count(|c| c.efron_false),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn aggregate(&self, metric: &str) -> Option<&Aggregate> {
        self.aggregates.get(metric)
    }
}

/// z grid `[−4, 6]` step 0.05 for the fdr curves.
pub fn curve_grid() -> Vec<f64> {
    z_grid(-4.0, 6.0, 0.05)
}

fn z_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| lo + k as f64 * step).collect()
}

/// Beta-only fit with no LP terms and its own MDC π̂₀.
fn baseline_model(outcome: &FitOutcome, options: &FitOptions) -> Result<CDModel> {
    let mut base = outcome.model.clone();
    base.coefficients.clear();
    base.pi0 = None;
    let pi0 = mdc_pi0(&outcome.pvalues, &base, options.mdc)?;
    base.with_pi0(pi0.pi0)
}

/// fdr on the p-value scale of a model fitted on `n` points.
fn fdr_curve_u(model: &CDModel, u: &[f64]) -> Result<Vec<f64>> {
    let pi0 = model.pi0.unwrap_or(1.0);
    let eps = clamp_epsilon(model.n);
    u.iter()
        .map(|&x| {
            let d = model.eval_clipped(x.clamp(eps, 1.0 - eps), DEFAULT_DENSITY_FLOOR)?;
            Ok((pi0 / d).min(1.0))
        })
        .collect()
}

fn count_rejections(results: [&RejectionResult; 4], labels: &[bool]) -> RejectionCounts {
    let false_count = |r: &RejectionResult| r.rejected.iter().filter(|&&i| !labels[i]).count();
    let [bh, hc, lf, ef] = results;
    RejectionCounts {
        bh: bh.n_rejected(),
        hc: hc.n_rejected(),
        locfdr: lf.n_rejected(),
        efron: ef.n_rejected(),
        bh_false: false_count(bh),
        hc_false: false_count(hc),
        locfdr_false: false_count(lf),
        efron_false: false_count(ef),
    }
}

struct RepOutput {
    record: ReplicationRecord,
    curves: Option<CurvePair>,
}

fn rejections(
    outcome: &FitOutcome,
    fdr: Vec<f64>,
    labels: &[bool],
    options: &StudyOptions,
) -> Result<RejectionCounts> {
    let pi0 = outcome.pi0.pi0;
    let u = &outcome.pvalues;
    let bh = cd_bh(u, options.alpha, pi0)?;
    let hc = hc_threshold(u, options.alpha0)?;
    let lf = local_fdr_reject(fdr, u, pi0, options.fdr_cutoff);
    let ef = efron_density_reject(u, &outcome.model, options.alpha, pi0)?;
    Ok(count_rejections([&bh, &hc, &lf, &ef], labels))
}

fn normal_rep(
    config: &MixtureNormalConfig,
    means: &[f64],
    rep: usize,
    options: &StudyOptions,
    grid: &[f64],
    mad_grid: &[f64],
) -> Result<RepOutput> {
    let (z, labels) = gen_mixture_normal_rep(config, means, rep);
    let outcome = fit_zscores(&z, &options.fit)?;
    let base = baseline_model(&outcome, &options.fit).map_err(|e| e.at_stage("baseline"))?;

    let fdr = local_fdr(&z, &outcome.model)?;
    let base_fdr = local_fdr(&z, &base)?;
    let truth: Vec<f64> = z
        .iter()
        .map(|&x| true_fdr_normal(x, config.pi0, config.mu))
        .collect();

    let mad_est = local_fdr(mad_grid, &outcome.model)?;
    let fdr_mad = mad_grid
        .iter()
        .zip(&mad_est)
        .map(|(&x, e)| (e - true_fdr_normal(x, config.pi0, config.mu)).abs())
        .sum::<f64>()
        / mad_grid.len() as f64;

    let curve = local_fdr(grid, &outcome.model)?;
    let base_curve = local_fdr(grid, &base)?;

    let has_alt = labels.iter().any(|&l| l);
    let record = ReplicationRecord {
        rep,
        pi0_hat: Some(outcome.pi0.pi0),
        mise: Some(mise(&fdr, &truth)?),
        tail_mise: has_alt
            .then(|| tail_mise(&fdr, &truth, &labels))
            .transpose()?,
        baseline_mise: Some(mise(&base_fdr, &truth)?),
        baseline_tail_mise: has_alt
            .then(|| tail_mise(&base_fdr, &truth, &labels))
            .transpose()?,
        fdr_mad: Some(fdr_mad),
        n_coefficients: Some(outcome.model.coefficients.len()),
        rejections: Some(rejections(&outcome, fdr, &labels, options)?),
        error: None,
    };
    Ok(RepOutput {
        record,
        curves: Some((curve, base_curve)),
    })
}

fn uniform_rep(
    config: &MixtureUniformConfig,
    rep: usize,
    options: &StudyOptions,
) -> Result<RepOutput> {
    let (p, labels) = gen_mixture_uniform_rep(config, rep);
    let outcome = fit_pvalues(&p, &options.fit)?;
    let base = baseline_model(&outcome, &options.fit).map_err(|e| e.at_stage("baseline"))?;

    let fdr = local_fdr_from_pvalues(&p, &outcome.model)?;
    let base_fdr = fdr_curve_u(&base, &p)?;
    let truth: Vec<f64> = p
        .iter()
        .map(|&u| true_fdr_uniform(u, config.pi0, config.a))
        .collect();

    let has_alt = labels.iter().any(|&l| l);
    let record = ReplicationRecord {
        rep,
        pi0_hat: Some(outcome.pi0.pi0),
        mise: Some(mise(&fdr, &truth)?),
        tail_mise: has_alt
            .then(|| tail_mise(&fdr, &truth, &labels))
            .transpose()?,
        baseline_mise: Some(mise(&base_fdr, &truth)?),
        baseline_tail_mise: has_alt
            .then(|| tail_mise(&base_fdr, &truth, &labels))
            .transpose()?,
        fdr_mad: None,
        n_coefficients: Some(outcome.model.coefficients.len()),
        rejections: Some(rejections(&outcome, fdr, &labels, options)?),
        error: None,
    };
    Ok(RepOutput {
        record,
        curves: None,
    })
}

/// Runs replication `rep` alone. Identical to record `rep` of [`run_study`].
pub fn run_replication(
    scenario: &Scenario,
    rep: usize,
    options: &StudyOptions,
) -> ReplicationRecord {
    match scenario {
        Scenario::MixtureNormal(c) => {
            let means = non_null_means(c);
            let grid = curve_grid();
            let mad_grid = z_grid(-3.0, 5.0, 0.05);
            normal_rep(c, &means, rep, options, &grid, &mad_grid)
        }
        Scenario::MixtureUniform(c) => uniform_rep(c, rep, options),
    }
    .map(|o| o.record)
    .unwrap_or_else(|e| ReplicationRecord::failed(rep, &e))
}

/// Runs every replication (in parallel) and merges them in replication order.
pub fn run_study(scenario: &Scenario, options: &StudyOptions) -> Result<SimulationReport> {
    scenario.validate()?;
    let reps = scenario.reps();
    let grid = curve_grid();
    let mad_grid = z_grid(-3.0, 5.0, 0.05);
    let means = match scenario {
        Scenario::MixtureNormal(c) => non_null_means(c),
        Scenario::MixtureUniform(_) => Vec::new(),
    };
    let one = |rep: usize| -> RepOutput {
        let out = match scenario {
            Scenario::MixtureNormal(c) => normal_rep(c, &means, rep, options, &grid, &mad_grid),
            Scenario::MixtureUniform(c) => uniform_rep(c, rep, options),
        };
        out.unwrap_or_else(|e| RepOutput {
            record: ReplicationRecord::failed(rep, &e),
            curves: None,
        })
    };
    let outputs: Vec<RepOutput> = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| (0..reps).into_par_iter().map(one).collect()),
        None => (0..reps).into_par_iter().map(one).collect(),
    };

    let curves = match scenario {
        Scenario::MixtureNormal(c) => Some(merge_curves(&outputs, &grid, c)),
        Scenario::MixtureUniform(_) => None,
    };
    let records: Vec<ReplicationRecord> = outputs.into_iter().map(|o| o.record).collect();
    let failures = records.iter().filter(|r| !r.is_ok()).count();
    Ok(SimulationReport {
        scenario: *scenario,
        seed: scenario.seed(),
        alpha: options.alpha,
        alpha0: options.alpha0,
        fdr_cutoff: options.fdr_cutoff,
        null: options.fit.null,
        sided: options.fit.sided,
        aggregates: aggregate_records(&records),
        records,
        failures,
        curves,
    })
}

type CurvePair = (Vec<f64>, Vec<f64>);

fn merge_curves(outputs: &[RepOutput], grid: &[f64], config: &MixtureNormalConfig) -> FdrCurves {
    let successful: Vec<&CurvePair> = outputs.iter().filter_map(|o| o.curves.as_ref()).collect();
    let column = |pick: fn(&CurvePair) -> &Vec<f64>, i: usize| -> Aggregate {
        let values: Vec<f64> = successful.iter().map(|c| pick(c)[i]).collect();
        Aggregate::from_values(&values).unwrap_or(Aggregate {
            count: 0,
            mean: f64::NAN,
            sd: f64::NAN,
            median: f64::NAN,
            q1: f64::NAN,
            q3: f64::NAN,
        })
    };
    let mut curves = FdrCurves {
        z: grid.to_vec(),
        truth: grid
            .iter()
            .map(|&z| true_fdr_normal(z, config.pi0, config.mu))
            .collect(),
        cdfdr_mean: Vec::with_capacity(grid.len()),
        cdfdr_sd: Vec::with_capacity(grid.len()),
        baseline_mean: Vec::with_capacity(grid.len()),
        baseline_sd: Vec::with_capacity(grid.len()),
    };
    for i in 0..grid.len() {
        let a = column(|c| &c.0, i);
        let b = column(|c| &c.1, i);
        curves.cdfdr_mean.push(a.mean);
        curves.cdfdr_sd.push(a.sd);
        curves.baseline_mean.push(b.mean);
        curves.baseline_sd.push(b.sd);
    }
    curves
}

fn aggregate_records(records: &[ReplicationRecord]) -> BTreeMap<String, Aggregate> {
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let mut out = BTreeMap::new();
    let mut add = |name: &str, values: Vec<f64>| {
        if let Some(a) = Aggregate::from_values(&values) {
            out.insert(name.to_string(), a);
        }
    };
    let metric = |f: fn(&ReplicationRecord) -> Option<f64>| -> Vec<f64> {
        ok.iter().filter_map(|r| f(r)).collect()
    };
    add("pi0_hat", metric(|r| r.pi0_hat));
    add("mise", metric(|r| r.mise));
    add("tail_mise", metric(|r| r.tail_mise));
    add("baseline_mise", metric(|r| r.baseline_mise));
    add("baseline_tail_mise", metric(|r| r.baseline_tail_mise));
    add("fdr_mad", metric(|r| r.fdr_mad));
    add(
        "n_coefficients",
        metric(|r| r.n_coefficients.map(|k| k as f64)),
    );
    let counts = |f: fn(&RejectionCounts) -> usize| -> Vec<f64> {
        ok.iter()
            .filter_map(|r| r.rejections.as_ref().map(|c| f(c) as f64))
            .collect()
    };
    add("rejections_bh", counts(|c| c.bh));
    add("rejections_hc", counts(|c| c.hc));
    add("rejections_locfdr", counts(|c| c.locfdr));
    add("rejections_efron", counts(|c| c.efron));
    out
}

/// The six mixture-uniform cells `{0.9, 0.95, 0.99} × {0.02, 0.002}`,
/// ordered by `a` then `π₀`.
pub fn uniform_grid(n: usize, reps: usize, seed: u64) -> Vec<MixtureUniformConfig> {
    let mut cells = Vec::with_capacity(6);
    for a in [0.02, 0.002] {
        for pi0 in [0.9, 0.95, 0.99] {
            cells.push(MixtureUniformConfig {
                n,
                pi0,
                a,
                reps,
                seed,
            });
        }
    }
    cells
}
