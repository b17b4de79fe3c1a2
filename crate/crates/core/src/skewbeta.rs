//! Skew-beta comparison density: a beta "pre-flattening" fit to the p-values
//! followed by a sparse shifted-Legendre correction on the smooth p-values
//! `v = F_B(u; α, β)`.
//!
//! The fitted density is
//!
//! ```text
//! d̂(u) = f_B(u; α, β) · (1 + Σ_j LP[j] · Leg_j(F_B(u; α, β)))
//! ```
//!
//! and integrates to one exactly, since every `Leg_j` (j ≥ 1) integrates to
//! zero on the smooth scale.

use serde::{Deserialize, Serialize};

use crate::basis::{fill_leg, leg_unchecked, DEFAULT_MAX_DEGREE};
use crate::error::{Error, Result};
use crate::null_model::{clamp_epsilon, NullModel, Sided};
use crate::specfun::{beta_pdf, chi2_2df_sf, digamma, log_beta, reg_inc_beta, trigamma};

/// Floor applied by [`CDModel::eval_clipped`] by default.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-3;

/// Fitted pre-flattening beta model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    /// Total log-likelihood at `(alpha, beta)`.
    pub loglik: f64,
}

impl BetaParams {
    /// `Beta(1, 1)`, the uniform null.
    pub fn uniform() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            loglik: 0.0,
        }
    }

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_shape(alpha, beta)?;
        Ok(Self {
            alpha,
            beta,
            loglik: f64::NAN,
        })
    }

    pub fn cdf(&self, u: f64) -> Result<f64> {
        reg_inc_beta(u, self.alpha, self.beta)
    }

    pub fn pdf(&self, u: f64) -> Result<f64> {
        beta_pdf(u, self.alpha, self.beta)
    }
}

fn check_shape(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain("beta parameters", alpha, "alpha > 0"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::domain("beta parameters", beta, "beta > 0"));
    }
    Ok(())
}

/// One selected LP coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpTerm {
    pub degree: usize,
    pub value: f64,
}

/// Clamps p-values into `[ε, 1 − ε]` with `ε = 1/(10N)`.
pub fn clamp_pvalues(pvalues: &[f64]) -> Result<Vec<f64>> {
    let eps = clamp_epsilon(pvalues.len());
    pvalues
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok(p.clamp(eps, 1.0 - eps))
            } else {
                Err(Error::domain("clamp_pvalues", p, "0 <= p <= 1"))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFitOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BetaFitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

struct BetaSuffStats {
    n: f64,
    mean_log: f64,
    mean_log1m: f64,
}

impl BetaSuffStats {
    /// Per-observation log-likelihood.
    fn loglik(&self, a: f64, b: f64) -> Result<f64> {
        Ok((a - 1.0) * self.mean_log + (b - 1.0) * self.mean_log1m - log_beta(a, b)?)
    }

    fn score(&self, a: f64, b: f64) -> Result<[f64; 2]> {
        let dab = digamma(a + b)?;
        Ok([
            self.mean_log - digamma(a)? + dab,
            self.mean_log1m - digamma(b)? + dab,
        ])
    }
}

/// Maximum-likelihood beta fit: Newton–Raphson on the digamma score from a
/// method-of-moments start, with a coordinate-wise golden-section fallback.
pub fn fit_beta_mle(pvalues: &[f64], options: BetaFitOptions) -> Result<BetaParams> {
    if pvalues.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "beta fit needs at least 10 p-values, got {}",
            pvalues.len()
        )));
    }
    let mut sum_log = 0.0;
    let mut sum_log1m = 0.0;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &u in pvalues {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain("fit_beta_mle", u, "0 < p < 1 (clamp first)"));
        }
        sum_log += u.ln();
        sum_log1m += (-u).ln_1p();
        sum += u;
        sum_sq += u * u;
    }
    let n = pvalues.len() as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    if var <= 1e-300 || pvalues.iter().all(|&u| u == pvalues[0]) {
        return Err(Error::Degenerate("all p-values are equal".into()));
    }
    let stats = BetaSuffStats {
        n,
        mean_log: sum_log / n,
        mean_log1m: sum_log1m / n,
    };

    let (a0, b0) = moment_start(mean, var);
    match newton(&stats, a0, b0, options) {
        Ok((a, b)) => finish(&stats, a, b),
        Err(_) => {
            let (a, b) = golden_coordinate_search(&stats, a0, b0, 200)?;
            match newton(&stats, a, b, options) {
                Ok((a, b)) => finish(&stats, a, b),
                Err(_) => {
                    let g = stats.score(a, b)?;
                    if g[0].hypot(g[1]) <= options.tol {
                        finish(&stats, a, b)
                    } else {
                        Err(Error::BetaFit { alpha: a, beta: b })
                    }
                }
            }
        }
    }
}

/// Method-of-moments start, `(1, 1)` when the moments are inadmissible.
fn moment_start(mean: f64, var: f64) -> (f64, f64) {
    let common = mean * (1.0 - mean) / var - 1.0;
    if common.is_finite() && common > 0.0 {
        (mean * common, (1.0 - mean) * common)
    } else {
        (1.0, 1.0)
    }
}

fn finish(stats: &BetaSuffStats, a: f64, b: f64) -> Result<BetaParams> {
    Ok(BetaParams {
        alpha: a,
        beta: b,
        loglik: stats.n * stats.loglik(a, b)?,
    })
}

fn newton(
    stats: &BetaSuffStats,
    mut a: f64,
    mut b: f64,
    options: BetaFitOptions,
) -> Result<(f64, f64)> {
    let mut ll = stats.loglik(a, b)?;
    for _ in 0..options.max_iter {
        let g = stats.score(a, b)?;
        if g[0].hypot(g[1]) <= options.tol {
            return Ok((a, b));
        }
        let tab = trigamma(a + b)?;
        let h11 = tab - trigamma(a)?;
        let h22 = tab - trigamma(b)?;
        let h12 = tab;
        let det = h11 * h22 - h12 * h12;
        if !(det.is_finite() && det > 0.0) {
            break;
        }
        // Δ = −H⁻¹ g
        let da = -(h22 * g[0] - h12 * g[1]) / det;
        let db = -(-h12 * g[0] + h11 * g[1]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let na = a + t * da;
            let nb = b + t * db;
            if na > 0.0 && nb > 0.0 && na.is_finite() && nb.is_finite() {
                let nll = stats.loglik(na, nb)?;
                if nll >= ll - 1e-12 * ll.abs().max(1.0) {
                    a = na;
                    b = nb;
                    ll = nll;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let g = stats.score(a, b)?;
    if g[0].hypot(g[1]) <= options.tol {
        Ok((a, b))
    } else {
        Err(Error::BetaFit { alpha: a, beta: b })
    }
}

/// Alternating golden-section maximisation over `ln α` and `ln β`.
fn golden_coordinate_search(
    stats: &BetaSuffStats,
    a0: f64,
    b0: f64,
    steps: usize,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut params = [a0.ln(), b0.ln()];
    let mut width = 4.0;
    let mut done = 0;
    while done < steps {
        for coord in 0..2 {
            let objective = |x: f64, params: &[f64; 2]| -> Result<f64> {
                let mut p = *params;
                p[coord] = x;
                stats.loglik(p[0].exp(), p[1].exp())
            };
            let (mut lo, mut hi) = (params[coord] - width, params[coord] + width);
            let mut x1 = hi - INV_PHI * (hi - lo);
            let mut x2 = lo + INV_PHI * (hi - lo);
            let mut f1 = objective(x1, &params)?;
            let mut f2 = objective(x2, &params)?;
            for _ in 0..40 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + INV_PHI * (hi - lo);
                    f2 = objective(x2, &params)?;
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - INV_PHI * (hi - lo);
                    f1 = objective(x1, &params)?;
                }
            }
            params[coord] = 0.5 * (lo + hi);
            done += 1;
        }
        width = (width * 0.7).max(0.05);
    }
    Ok((params[0].exp(), params[1].exp()))
}

/// Smooth p-values `vᵢ = F_B(uᵢ; α, β)`.
pub fn smooth_pvalues(pvalues: &[f64], params: &BetaParams) -> Result<Vec<f64>> {
    check_shape(params.alpha, params.beta)?;
    pvalues.iter().map(|&u| params.cdf(u)).collect()
}

/// `LP[j] = N⁻¹ Σᵢ Leg_j(vᵢ)` for `j = 1..=max_degree`.
pub fn lp_coefficients(smooth_values: &[f64], max_degree: usize) -> Result<Vec<f64>> {
    if smooth_values.is_empty() {
        return Err(Error::InvalidArgument(
            "LP coefficients need at least one value".into(),
        ));
    }
    let mut sums = vec![0.0; max_degree];
    let mut row = vec![0.0; max_degree];
    for &v in smooth_values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain("lp_coefficients", v, "0 <= v <= 1"));
        }
        fill_leg(v, &mut row);
        for (s, r) in sums.iter_mut().zip(&row) {
            *s += r;
        }
    }
    let n = smooth_values.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Schwarz/Ledwina selection over raw coefficients indexed by degree
/// (`raw[0]` is degree 1). Only the first `max_degree` entries are considered.
pub fn select_coefficients(raw: &[f64], n: usize, max_degree: usize) -> Vec<LpTerm> {
    let pairs: Vec<LpTerm> = raw
        .iter()
        .take(max_degree)
        .enumerate()
        .map(|(i, &value)| LpTerm {
            degree: i + 1,
            value,
        })
        .collect();
    select_terms(&pairs, n)
}

/// Ranks terms by descending `LP[j]²` (ties: lower degree first) and keeps the
/// top-k maximising `Σ_{top-k} LP[j]² − k·ln(n)/n`, `k = 0` included.
/// The result is ordered by degree.
pub fn select_terms(terms: &[LpTerm], n: usize) -> Vec<LpTerm> {
    let mut ranked = terms.to_vec();
    ranked.sort_by(|x, y| {
        (y.value * y.value)
            .total_cmp(&(x.value * x.value))
            .then(x.degree.cmp(&y.degree))
    });
    let nf = n.max(2) as f64;
    let penalty = nf.ln() / nf;
    let mut best_k = 0;
    let mut best = 0.0;
    let mut cum = 0.0;
    for (i, term) in ranked.iter().enumerate() {
        cum += term.value * term.value;
        let crit = cum - (i + 1) as f64 * penalty;
        if crit > best {
            best = crit;
            best_k = i + 1;
        }
    }
    let mut chosen: Vec<LpTerm> = ranked.into_iter().take(best_k).collect();
    chosen.sort_by_key(|t| t.degree);
    chosen
}

/// Parseval deviance `Σ LP[j]²`.
pub fn deviance(terms: &[LpTerm]) -> f64 {
    terms.iter().map(|t| t.value * t.value).sum()
}

/// `∫₀ʷ Leg_j(v) dv`, from `∫P_j = (P_{j+1} − P_{j−1})/(2j+1)`.
pub(crate) fn leg_integral(j: usize, w: f64) -> f64 {
    if j == 0 {
        return w;
    }
    let p_next = leg_unchecked(j + 1, w) / ((2 * j + 3) as f64).sqrt();
    let p_prev = leg_unchecked(j - 1, w) / ((2 * j - 1) as f64).sqrt();
    (p_next - p_prev) / (2.0 * ((2 * j + 1) as f64).sqrt())
}

/// Fitted comparison density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CDModel {
    pub beta_params: BetaParams,
    pub coefficients: Vec<LpTerm>,
    pub max_degree: usize,
    #[serde(default)]
    pub null: Option<NullModel>,
    /// How z-scores were mapped to p-values when `null` is present.
    #[serde(default)]
    pub sided: Option<Sided>,
    #[serde(default)]
    pub pi0: Option<f64>,
    pub n: usize,
    /// Unselected LP coefficients, degree 1 first.
    #[serde(default)]
    pub raw_coefficients: Vec<f64>,
}

impl CDModel {
    pub fn new(
        beta_params: BetaParams,
        coefficients: Vec<LpTerm>,
        max_degree: usize,
        n: usize,
    ) -> Result<Self> {
        let model = Self {
            beta_params,
            coefficients,
            max_degree,
            null: None,
            sided: None,
            pi0: None,
            n,
            raw_coefficients: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    /// `d̂ ≡ 1`.
    pub fn uniform(n: usize) -> Self {
        Self {
            beta_params: BetaParams::uniform(),
            coefficients: Vec::new(),
            max_degree: DEFAULT_MAX_DEGREE,
            null: None,
            sided: None,
            pi0: None,
            n,
            raw_coefficients: Vec::new(),
        }
    }

    pub fn with_null(mut self, null: NullModel, sided: Sided) -> Self {
        self.null = Some(null);
        self.sided = Some(sided);
        self
    }

    pub fn with_pi0(mut self, pi0: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi0 <= 1.0) {
            return Err(Error::domain("CDModel::with_pi0", pi0, "0 < pi0 <= 1"));
        }
        self.pi0 = Some(pi0);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_shape(self.beta_params.alpha, self.beta_params.beta)?;
        if self.max_degree == 0 {
            return Err(Error::InvalidArgument("max_degree must be positive".into()));
        }
        let mut seen = vec![false; self.max_degree + 1];
        for t in &self.coefficients {
            if t.degree == 0 || t.degree > self.max_degree {
                return Err(Error::InvalidArgument(format!(
                    "coefficient degree {} outside 1..={}",
                    t.degree, self.max_degree
                )));
            }
            if std::mem::replace(&mut seen[t.degree], true) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate coefficient degree {}",
                    t.degree
                )));
            }
            if !t.value.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient at degree {}",
                    t.degree
                )));
            }
        }
        if let Some(pi0) = self.pi0 {
            if !(pi0 > 0.0 && pi0 <= 1.0) {
                return Err(Error::domain("CDModel", pi0, "0 < pi0 <= 1"));
            }
        }
        if let Some(null) = &self.null {
            if !(null.sigma0 > 0.0) {
                return Err(Error::domain("CDModel", null.sigma0, "sigma0 > 0"));
            }
        }
        Ok(())
    }

    fn correction(&self, v: f64) -> f64 {
        1.0 + self
            .coefficients
            .iter()
            .map(|t| t.value * leg_unchecked(t.degree, v))
            .sum::<f64>()
    }

    /// Density of the smooth p-values, `1 + Σ LP[j] Leg_j(v)`.
    pub fn smooth_density(&self, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain("smooth_density", v, "0 <= v <= 1"));
        }
        Ok(self.correction(v))
    }

    /// Raw truncated-series value of `d̂(u)`; may be negative.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain("cd_eval", u, "0 < u < 1"));
        }
        let v = self.beta_params.cdf(u)?;
        Ok(self.beta_params.pdf(u)? * self.correction(v))
    }

    /// `max(d̂(u), floor)`.
    pub fn eval_clipped(&self, u: f64, floor: f64) -> Result<f64> {
        Ok(self.eval(u)?.max(floor))
    }

    /// Comparison distribution `D̂(u) = ∫₀ᵘ d̂`, exact via `v = F_B(u)`.
    pub fn cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain("CDModel::cdf", u, "0 <= u <= 1"));
        }
        let w = self.beta_params.cdf(u)?;
        Ok(w + self
            .coefficients
            .iter()
            .map(|t| t.value * leg_integral(t.degree, w))
            .sum::<f64>())
    }

    /// Maps a z-score to the p-value scale the model was fitted on.
    pub fn z_to_u(&self, z: f64) -> Result<f64> {
        let null = self
            .null
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("model has no null distribution".into()))?;
        Ok(self.sided.unwrap_or(Sided::Left).pvalue(null, z))
    }

    /// Null-adjusted comparison density at a z-score, `d̂(F̂₀(z))`.
    pub fn null_adjusted_density(&self, z: f64) -> Result<f64> {
        self.eval(self.z_to_u(z)?)
    }

    pub fn deviance(&self) -> f64 {
        deviance(&self.coefficients)
    }
}

/// Evaluates `d̂(u)`; see [`CDModel::eval`].
pub fn cd_eval(model: &CDModel, u: f64) -> Result<f64> {
    model.eval(u)
}

/// See [`CDModel::eval_clipped`].
pub fn cd_eval_clipped(model: &CDModel, u: f64, floor: f64) -> Result<f64> {
    model.eval_clipped(u, floor)
}

/// See [`CDModel::null_adjusted_density`].
pub fn null_adjusted_density(model: &CDModel, z: f64) -> Result<f64> {
    model.null_adjusted_density(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityFitOptions {
    pub max_degree: usize,
    pub beta: BetaFitOptions,
}

impl Default for DensityFitOptions {
    fn default() -> Self {
        Self {
            max_degree: DEFAULT_MAX_DEGREE,
            beta: BetaFitOptions::default(),
        }
    }
}

/// Beta fit, smooth p-values, LP coefficients and Schwarz selection.
/// P-values are clamped to `[1/(10N), 1 − 1/(10N)]` first.
pub fn fit_comparison_density(pvalues: &[f64], options: DensityFitOptions) -> Result<CDModel> {
    let clamped = clamp_pvalues(pvalues)?;
    let beta = fit_beta_mle(&clamped, options.beta)?;
    let smooth = smooth_pvalues(&clamped, &beta)?;
    let raw = lp_coefficients(&smooth, options.max_degree)?;
    let selected = select_coefficients(&raw, clamped.len(), options.max_degree);
    let mut model = CDModel::new(beta, selected, options.max_degree, clamped.len())?;
    model.raw_coefficients = raw;
    Ok(model)
}

/// Likelihood-ratio check of `Beta(1, 1)` against the fitted beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformityDiagnostic {
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// `2[ℓ(α̂, β̂) − ℓ(1, 1)]` referred to χ²₂. Input is clamped like the fit.
pub fn uniformity_diagnostic(pvalues: &[f64]) -> Result<UniformityDiagnostic> {
    let clamped = clamp_pvalues(pvalues)?;
    let params = fit_beta_mle(&clamped, BetaFitOptions::default())?;
    let statistic = (2.0 * params.loglik).max(0.0);
    Ok(UniformityDiagnostic {
        statistic,
        p_value: chi2_2df_sf(statistic),
        alpha: params.alpha,
        beta: params.beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()
    }

    #[test]
    fn smooth_pvalue_examples() {
        let u = [0.1, 0.25, 0.5, 0.9];
        let v = smooth_pvalues(&u, &BetaParams::uniform()).unwrap();
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b).abs() < 1e-15);
        }
        let p = BetaParams::new(2.0, 2.0).unwrap();
        assert!((smooth_pvalues(&[0.5], &p).unwrap()[0] - 0.5).abs() < 1e-14);
        assert!((smooth_pvalues(&[0.25], &p).unwrap()[0] - 0.15625).abs() < 1e-12);
    }

    #[test]
    fn lp_examples() {
        assert_eq!(lp_coefficients(&[0.5], 1).unwrap()[0], 0.0);
        assert!(lp_coefficients(&[0.25, 0.75], 1).unwrap()[0].abs() < 1e-15);
        let leg2 = |v: f64| 5f64.sqrt() * (6.0 * v * v - 6.0 * v + 1.0);
        let oracle = (leg2(0.1) + leg2(0.2) + leg2(0.9)) / 3.0;
        let lp = lp_coefficients(&[0.1, 0.2, 0.9], 2).unwrap();
        assert!((lp[1] - oracle).abs() < 1e-14);
        assert!(lp_coefficients(&[], 3).is_err());
    }

    #[test]
    fn selection_examples() {
        let chosen = select_coefficients(&[0.5, 0.01], 100, 10);
        assert_eq!(
            chosen,
            vec![LpTerm {
                degree: 1,
                value: 0.5
            }]
        );
        assert!(select_coefficients(&[0.001, 0.002], 1_000_000, 10).is_empty());
    }

    #[test]
    fn selection_breaks_ties_by_degree() {
        let chosen = select_coefficients(&[0.3, -0.3, 0.0], 1_000, 3);
        assert_eq!(chosen.len(), 2);
        let chosen = select_terms(
            &[
                LpTerm {
                    degree: 4,
                    value: 0.2,
                },
                LpTerm {
                    degree: 2,
                    value: -0.2,
                },
            ],
            10_000,
        );
        assert_eq!(chosen[0].degree, 2);
    }

    #[test]
    fn deviance_examples() {
        assert_eq!(deviance(&[]), 0.0);
        assert_eq!(
            deviance(&[LpTerm {
                degree: 1,
                value: 0.3
            }]),
            0.09
        );
        let d = deviance(&[LpTerm {
            degree: 3,
            value: -0.16,
        }]);
        assert!((d - 0.0256).abs() < 1e-15);
    }

    #[test]
    fn uniform_model_is_flat() {
        let m = CDModel::uniform(100);
        for &u in &[1e-9, 0.2, 0.5, 0.999] {
            assert!((m.eval(u).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(m.eval(0.0).is_err());
        assert!(m.eval(1.0).is_err());
        assert_eq!(m.eval_clipped(0.5, DEFAULT_DENSITY_FLOOR).unwrap(), 1.0);
        assert_eq!(m.eval_clipped(0.5, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn clipped_floor_applies() {
        // 1 + c·Leg_1(v) with c = -0.6 dips to 1 − 0.6√3 < 0 near v = 1
        let m = CDModel::new(
            BetaParams::uniform(),
            vec![LpTerm {
                degree: 1,
                value: -0.6,
            }],
            10,
            100,
        )
        .unwrap();
        let u = 0.999;
        assert!(m.eval(u).unwrap() < 0.0);
        assert_eq!(m.eval_clipped(u, DEFAULT_DENSITY_FLOOR).unwrap(), 1e-3);
    }

    #[test]
    fn model_validation() {
        let dup = vec![
            LpTerm {
                degree: 2,
                value: 0.1,
            },
            LpTerm {
                degree: 2,
                value: 0.2,
            },
        ];
        assert!(CDModel::new(BetaParams::uniform(), dup, 10, 5).is_err());
        let out_of_range = vec![LpTerm {
            degree: 11,
            value: 0.1,
        }];
        assert!(CDModel::new(BetaParams::uniform(), out_of_range, 10, 5).is_err());
        assert!(CDModel::uniform(3).with_pi0(0.0).is_err());
        assert!(BetaParams::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn leg_integral_matches_quadrature() {
        let rule = crate::basis::GaussLegendre::new(64).unwrap();
        for j in 1..=10 {
            for &w in &[0.0, 0.13, 0.5, 0.77, 1.0] {
                let q = rule.integrate(0.0, w, |v| leg_unchecked(j, v));
                assert!((leg_integral(j, w) - q).abs() < 1e-13, "j={j} w={w}");
            }
        }
    }

    #[test]
    fn beta_fit_on_grid_is_uniform() {
        let u = uniform_grid(2000);
        let p = fit_beta_mle(&u, BetaFitOptions::default()).unwrap();
        assert!(
            (p.alpha - 1.0).abs() < 0.01 && (p.beta - 1.0).abs() < 0.01,
            "{p:?}"
        );
        assert!(fit_beta_mle(&[0.3; 50], BetaFitOptions::default()).is_err());
        assert!(fit_beta_mle(&[0.3, 0.0, 0.5], BetaFitOptions::default()).is_err());
    }

    #[test]
    fn diagnostic_on_grid() {
        let d = uniformity_diagnostic(&uniform_grid(1000)).unwrap();
        assert!(d.statistic < 1e-2, "{d:?}");
        assert!(d.p_value > 0.99);
    }

    #[test]
    fn null_adjusted_density_uses_null() {
        let null = NullModel {
            mu0: 0.4,
            sigma0: 1.3,
            ..NullModel::theoretical()
        };
        let m = CDModel::new(
            BetaParams::new(0.8, 0.9).unwrap(),
            vec![LpTerm {
                degree: 2,
                value: 0.1,
            }],
            10,
            100,
        )
        .unwrap()
        .with_null(null, Sided::Left);
        let a = m.null_adjusted_density(0.4).unwrap();
        let b = m.eval(0.5).unwrap();
        assert!((a - b).abs() < 1e-14);
        let identity = CDModel::uniform(10).with_null(null, Sided::Left);
        assert!((identity.null_adjusted_density(-1.7).unwrap() - 1.0).abs() < 1e-12);
        assert!(CDModel::uniform(10).null_adjusted_density(0.0).is_err());
    }
}
