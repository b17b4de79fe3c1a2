//! Rejection rules expressed through the comparison distribution and density:
//! the BH-type rule `D̃(u)/u > π₀/α`, Higher Criticism, CD local fdr and
//! Efron's density threshold `π₀/(2α)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::null_model::clamp_epsilon;
use crate::skewbeta::{CDModel, DEFAULT_DENSITY_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CdBh,
    Hc,
    LocalFdr,
    EfronDensity,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::CdBh => "cd_bh",
            Method::Hc => "hc",
            Method::LocalFdr => "local_fdr",
            Method::EfronDensity => "efron_density",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bh" | "cd_bh" | "cd-bh" => Ok(Method::CdBh),
            "hc" => Ok(Method::Hc),
            "locfdr" | "local_fdr" | "local-fdr" => Ok(Method::LocalFdr),
            "efron" | "efron_density" => Ok(Method::EfronDensity),
            other => Err(Error::InvalidArgument(format!(
                "unknown method {other:?} (expected bh, hc, locfdr or efron)"
            ))),
        }
    }
}

/// Per-hypothesis outcome of a rejection rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionResult {
    pub method: Method,
    /// α for BH and Efron, α₀ for HC, the fdr cutoff for local fdr.
    pub level: f64,
    pub pi0_used: f64,
    /// Original indices, ascending.
    pub rejected: Vec<usize>,
    /// Rejection count; for HC, the argmax index.
    pub k: usize,
    /// `D̃(uᵢ)/uᵢ`, HC statistic, f̂dr or d̂(uᵢ) depending on the method.
    pub scores: Vec<f64>,
    /// The inputs the rule was applied to (p-values or z-scores).
    pub values: Vec<f64>,
}

/// Summary written next to the per-hypothesis CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub method: Method,
    pub level: f64,
    pub pi0_used: f64,
    pub k: usize,
    pub n: usize,
    pub n_rejected: usize,
}

#[derive(Serialize)]
struct RejectionRow {
    index: usize,
    value: f64,
    score: f64,
    rejected: u8,
}

impl RejectionResult {
    pub fn n_rejected(&self) -> usize {
        self.rejected.len()
    }

    pub fn rejected_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.values.len()];
        for &i in &self.rejected {
            mask[i] = true;
        }
        mask
    }

    pub fn summary(&self) -> RejectionSummary {
        RejectionSummary {
            method: self.method,
            level: self.level,
            pi0_used: self.pi0_used,
            k: self.k,
            n: self.values.len(),
            n_rejected: self.rejected.len(),
        }
    }

    /// HC scores multiplied by `√N`, the scaling of the limiting process.
    /// The argmax is unchanged.
    pub fn scaled_scores(&self) -> Vec<f64> {
        let s = (self.values.len() as f64).sqrt();
        self.scores.iter().map(|v| v * s).collect()
    }

    /// Writes `index,value,score,rejected` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mask = self.rejected_mask();
        let mut w = csv::Writer::from_writer(out);
        for (index, ((&value, &score), &rej)) in
            self.values.iter().zip(&self.scores).zip(&mask).enumerate()
        {
            w.serialize(RejectionRow {
                index,
                value,
                score,
                rejected: rej as u8,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_pvalues(routine: &'static str, pvalues: &[f64]) -> Result<()> {
    for &p in pvalues {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(routine, p, "0 < p <= 1"));
        }
    }
    Ok(())
}

fn check_open_unit(routine: &'static str, x: f64, expected: &'static str) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(routine, x, expected))
    }
}

fn check_pi0(routine: &'static str, pi0: f64) -> Result<()> {
    if pi0 > 0.0 && pi0 <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(routine, pi0, "0 < pi0 <= 1"))
    }
}

/// Indices sorted by p-value, ties by index.
fn sorted_order(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    order
}

/// Empirical CDF at each observation, `#{k : u_k ≤ uᵢ}/N` (max rank on ties).
pub fn ecdf_at_points(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let order = sorted_order(values);
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let d = (j + 1) as f64 / n as f64;
        for &idx in &order[i..=j] {
            out[idx] = d;
        }
        i = j + 1;
    }
    out
}

/// Set form of the comparison-distribution FDR rule. The threshold is the
/// largest `uᵢ` with `D̃(uᵢ)/uᵢ ≥ π₀/α`; every p-value at or below it is
/// rejected.
pub fn cd_bh_set_form(pvalues: &[f64], alpha: f64, pi0: f64) -> Vec<usize> {
    let ecdf = ecdf_at_points(pvalues);
    // `D̃(u)/u ≥ π₀/α` rearranged as `u ≤ D̃(u)·α/π₀`, evaluated exactly as the
    // step-up bound so the two forms also agree on the boundary
    let scale = alpha / pi0;
    let threshold = pvalues
        .iter()
        .zip(&ecdf)
        .filter(|(&u, &d)| u <= d * scale)
        .map(|(&u, _)| u)
        .fold(f64::NEG_INFINITY, f64::max);
    (0..pvalues.len())
        .filter(|&i| pvalues[i] <= threshold)
        .collect()
}

/// Step-up form: `k = max{i : u₍ᵢ₎ ≤ (i/N)(α/π₀)}`. Returns `k` and the
/// indices of the `k` smallest p-values.
pub fn cd_bh_step_up(pvalues: &[f64], alpha: f64, pi0: f64) -> (usize, Vec<usize>) {
    let n = pvalues.len() as f64;
    let order = sorted_order(pvalues);
    let scale = alpha / pi0;
    let k = order
        .iter()
        .enumerate()
        .rev()
        .find(|(i, &idx)| pvalues[idx] <= (*i + 1) as f64 / n * scale)
        .map(|(i, _)| i + 1)
        .unwrap_or(0);
    let mut rejected: Vec<usize> = order[..k].to_vec();
    rejected.sort_unstable();
    (k, rejected)
}

/// Comparison-distribution BH rule at level `alpha` with null proportion
/// `pi0`, in step-up form. [`cd_bh_set_form`] selects the same set.
pub fn cd_bh(pvalues: &[f64], alpha: f64, pi0: f64) -> Result<RejectionResult> {
    check_pvalues("cd_bh", pvalues)?;
    check_open_unit("cd_bh", alpha, "0 < alpha < 1")?;
    check_pi0("cd_bh", pi0)?;
    let (k, rejected) = cd_bh_step_up(pvalues, alpha, pi0);
    let ecdf = ecdf_at_points(pvalues);
    let scores = pvalues.iter().zip(&ecdf).map(|(u, d)| d / u).collect();
    Ok(RejectionResult {
        method: Method::CdBh,
        level: alpha,
        pi0_used: pi0,
        rejected,
        k,
        scores,
        values: pvalues.to_vec(),
    })
}

/// Higher Criticism thresholding.
///
/// `k` maximises `(i/N − u₍ᵢ₎)/√(u₍ᵢ₎(1 − u₍ᵢ₎))` over `1 ≤ i ≤ ⌊α₀N⌋`
/// (at least `i = 1`) among order statistics with `u₍ᵢ₎ ≥ 1/N`; the `k`
/// smallest p-values are rejected. If no position in range is eligible, every
/// position in range lies below `1/N` and all of them are rejected.
pub fn hc_threshold(pvalues: &[f64], alpha0: f64) -> Result<RejectionResult> {
    let n = pvalues.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Higher Criticism needs at least 2 p-values, got {n}"
        )));
    }
    check_pvalues("hc_threshold", pvalues)?;
    check_open_unit("hc_threshold", alpha0, "0 < alpha0 < 1")?;
    let nf = n as f64;
    let eps = clamp_epsilon(n);
    let order = sorted_order(pvalues);
    let mut scores = vec![0.0; n];
    for (i, &idx) in order.iter().enumerate() {
        // raw p-values; only the endpoints are pulled in to keep scores finite
        let u = pvalues[idx];
        let u = if u <= 0.0 || u >= 1.0 {
            u.clamp(eps, 1.0 - eps)
        } else {
            u
        };
        scores[idx] = ((i + 1) as f64 / nf - u) / (u * (1.0 - u)).sqrt();
    }
    let upper = ((alpha0 * nf).floor() as usize).clamp(1, n);
    let floor = 1.0 / nf;
    let mut best: Option<(usize, f64)> = None;
    for (i, &idx) in order.iter().take(upper).enumerate() {
        let u = pvalues[idx];
        if u < floor || u >= 1.0 {
            continue;
        }
        let s = scores[idx];
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i + 1, s));
        }
    }
    let k = best.map(|(k, _)| k).unwrap_or(upper);
    let mut rejected = order[..k].to_vec();
    rejected.sort_unstable();
    Ok(RejectionResult {
        method: Method::Hc,
        level: alpha0,
        pi0_used: 1.0,
        rejected,
        k,
        scores,
        values: pvalues.to_vec(),
    })
}

fn model_pi0(model: &CDModel) -> Result<f64> {
    let pi0 = model
        .pi0
        .ok_or_else(|| Error::InvalidArgument("model has no pi0 estimate".into()))?;
    check_pi0("local_fdr", pi0)?;
    Ok(pi0)
}

/// Clamp bound for query points: the fitted sample's `1/(10N)` when known.
fn model_epsilon(model: &CDModel, fallback: usize) -> f64 {
    clamp_epsilon(if model.n > 0 { model.n } else { fallback })
}

fn fdr_at_u(model: &CDModel, u: f64, pi0: f64) -> Result<f64> {
    Ok((pi0 / model.eval_clipped(u, DEFAULT_DENSITY_FLOOR)?).min(1.0))
}

/// CD local fdr at z-scores: `min(1, π̂₀ / max(d̂(F̂₀(z)), 10⁻³))`.
///
/// The model must carry a null and π̂₀. `F̂₀(z)` is clamped to
/// `[1/(10N), 1 − 1/(10N)]` with `N` the fitted sample size, matching how
/// fitted p-values are clamped.
pub fn local_fdr(zscores: &[f64], model: &CDModel) -> Result<Vec<f64>> {
    let pi0 = model_pi0(model)?;
    if model.null.is_none() {
        return Err(Error::InvalidArgument(
            "local fdr on z-scores needs a model with a null distribution".into(),
        ));
    }
    let eps = model_epsilon(model, zscores.len());
    zscores
        .iter()
        .map(|&z| {
            let u = model.z_to_u(z)?.clamp(eps, 1.0 - eps);
            fdr_at_u(model, u, pi0)
        })
        .collect()
}

/// CD local fdr on the p-value scale, `min(1, π̂₀ / max(d̂(u), 10⁻³))`.
pub fn local_fdr_from_pvalues(pvalues: &[f64], model: &CDModel) -> Result<Vec<f64>> {
    let pi0 = model_pi0(model)?;
    let eps = model_epsilon(model, pvalues.len());
    pvalues
        .iter()
        .map(|&u| {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::domain("local_fdr", u, "0 <= p <= 1"));
            }
            fdr_at_u(model, u.clamp(eps, 1.0 - eps), pi0)
        })
        .collect()
}

/// Rejects hypotheses whose local fdr is at most `cutoff`.
pub fn local_fdr_reject(fdr: Vec<f64>, values: &[f64], pi0: f64, cutoff: f64) -> RejectionResult {
    let rejected: Vec<usize> = (0..fdr.len()).filter(|&i| fdr[i] <= cutoff).collect();
    RejectionResult {
        method: Method::LocalFdr,
        level: cutoff,
        pi0_used: pi0,
        k: rejected.len(),
        rejected,
        scores: fdr,
        values: values.to_vec(),
    }
}

/// Efron's density threshold: reject `uᵢ` with `d̂(uᵢ) > π₀/(2α)`.
pub fn efron_density_reject(
    pvalues: &[f64],
    model: &CDModel,
    alpha: f64,
    pi0: f64,
) -> Result<RejectionResult> {
    check_open_unit("efron_density_reject", alpha, "0 < alpha < 1")?;
    check_pi0("efron_density_reject", pi0)?;
    let threshold = pi0 / (2.0 * alpha);
    let eps = clamp_epsilon(pvalues.len());
    let scores = pvalues
        .iter()
        .map(|&u| {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::domain("efron_density_reject", u, "0 <= p <= 1"));
            }
            model.eval(u.clamp(eps, 1.0 - eps))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rejected: Vec<usize> = (0..scores.len())
        .filter(|&i| scores[i] > threshold)
        .collect();
    Ok(RejectionResult {
        method: Method::EfronDensity,
        level: alpha,
        pi0_used: pi0,
        k: rejected.len(),
        rejected,
        scores,
        values: pvalues.to_vec(),
    })
}
