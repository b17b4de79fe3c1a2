//! Empirical null estimation by biweight M-regression on the normal QQ plot,
//! plus conversions between t statistics, z-scores and p-values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{normal_cdf, normal_quantile, normal_sf, t_to_z};

/// Tukey biweight constant giving 95% efficiency at the normal.
pub const BIWEIGHT_K: f64 = 4.685;

/// MAD-to-σ consistency factor.
const MAD_SCALE: f64 = 0.6745;

/// Location-scale normal null `F₀(z) = Φ((z − μ₀)/σ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullModel {
    pub mu0: f64,
    pub sigma0: f64,
    pub tuning_k: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NullModel {
    /// The theoretical `N(0, 1)` null.
    pub fn theoretical() -> Self {
        Self {
            mu0: 0.0,
            sigma0: 1.0,
            tuning_k: BIWEIGHT_K,
            iterations: 0,
            converged: true,
        }
    }

    pub fn standardize(&self, z: f64) -> f64 {
        (z - self.mu0) / self.sigma0
    }

    /// `F̂₀(z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        normal_cdf(self.standardize(z))
    }

    /// `1 − F̂₀(z)`.
    pub fn sf(&self, z: f64) -> f64 {
        normal_sf(self.standardize(z))
    }
}

/// How z-scores are turned into p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sided {
    #[default]
    TwoSided,
    /// `u = F₀(z)`: small for large negative z.
    Left,
    /// `u = 1 − F₀(z)`: small for large positive z.
    Right,
}

impl Sided {
    pub fn as_str(self) -> &'static str {
        match self {
            Sided::TwoSided => "two_sided",
            Sided::Left => "left",
            Sided::Right => "right",
        }
    }

    /// Unclamped p-value of a single z-score.
    pub fn pvalue(self, null: &NullModel, z: f64) -> f64 {
        match self {
            Sided::Left => null.cdf(z),
            Sided::Right => null.sf(z),
            Sided::TwoSided => (2.0 * normal_sf(null.standardize(z).abs())).min(1.0),
        }
    }
}

impl fmt::Display for Sided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sided {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_sided" | "two-sided" | "two" => Ok(Sided::TwoSided),
            "left" | "lower" => Ok(Sided::Left),
            "right" | "upper" => Ok(Sided::Right),
            other => Err(Error::InvalidArgument(format!(
                "unknown sidedness {other:?} (expected two_sided, left or right)"
            ))),
        }
    }
}

/// Tukey's biweight influence function `Ψ_T`.
pub fn biweight_psi(z: f64, k: f64) -> f64 {
    if z.abs() > k {
        return 0.0;
    }
    let t = z / k;
    let one_minus = 1.0 - t * t;
    z * one_minus * one_minus
}

/// Biweight loss `ρ` whose derivative is [`biweight_psi`].
pub fn biweight_rho(z: f64, k: f64) -> f64 {
    let c = k * k / 6.0;
    if z.abs() >= k {
        return c;
    }
    let t = z / k;
    let one_minus = 1.0 - t * t;
    c * (1.0 - one_minus * one_minus * one_minus)
}

fn biweight_weight(r: f64, k: f64) -> f64 {
    if r.abs() >= k {
        return 0.0;
    }
    let t = r / k;
    let one_minus = 1.0 - t * t;
    one_minus * one_minus
}

/// Clamping bound `1/(10N)` used for p-values.
pub fn clamp_epsilon(n: usize) -> f64 {
    1.0 / (10.0 * n.max(1) as f64)
}

/// Converts z-scores to p-values under `null`, clamped to `[ε, 1 − ε]` with
/// `ε = 1/(10N)`.
pub fn pvalues_from_z(zscores: &[f64], null: &NullModel, sided: Sided) -> Vec<f64> {
    let eps = clamp_epsilon(zscores.len());
    zscores
        .iter()
        .map(|&z| sided.pvalue(null, z).clamp(eps, 1.0 - eps))
        .collect()
}

/// `Φ⁻¹(T_df(t))`. Extreme statistics are clamped, see [`z_from_t_flagged`].
pub fn z_from_t(t: f64, df: f64) -> Result<f64> {
    z_from_t_flagged(t, df).map(|(z, _)| z)
}

/// Like [`z_from_t`]; the flag is set when the t tail probability had to be
/// clamped to `1e-15` before inversion.
pub fn z_from_t_flagged(t: f64, df: f64) -> Result<(f64, bool)> {
    if !t.is_finite() {
        return Err(Error::domain("z_from_t", t, "finite t"));
    }
    t_to_z(t, df)
}

/// One reweighting pass of the biweight fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsStep {
    /// Residual scale `MAD/0.6745` used for this pass.
    pub scale: f64,
    /// `Σ ρ(rᵢ/s)` at the parameters entering the pass.
    pub objective_before: f64,
    /// `Σ ρ(rᵢ/s)` at the updated parameters, same `s`.
    pub objective_after: f64,
    pub mu0: f64,
    pub sigma0: f64,
}

/// Options for [`fit_empirical_null`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullFitOptions {
    pub tuning_k: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NullFitOptions {
    fn default() -> Self {
        Self {
            tuning_k: BIWEIGHT_K,
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

/// Normal plotting positions `Φ⁻¹((i − 0.5)/N)`.
pub fn normal_scores(n: usize) -> Result<Vec<f64>> {
    let nf = n as f64;
    (1..=n)
        .map(|i| normal_quantile((i as f64 - 0.5) / nf))
        .collect()
}

fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    values.sort_unstable_by(f64::total_cmp);
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn validate_scores(zscores: &[f64]) -> Result<Vec<f64>> {
    if zscores.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "empirical null needs at least 10 z-scores, got {}",
            zscores.len()
        )));
    }
    if let Some(bad) = zscores.iter().find(|z| !z.is_finite()) {
        return Err(Error::domain("fit_empirical_null", *bad, "finite z-scores"));
    }
    let mut sorted = zscores.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::Degenerate("all z-scores are equal".into()));
    }
    Ok(sorted)
}

/// Ordinary least-squares fit of the QQ line, for comparison with the robust
/// estimator. Returns `(μ₀, σ₀)`.
pub fn qq_least_squares(zscores: &[f64]) -> Result<(f64, f64)> {
    let y = validate_scores(zscores)?;
    let x = normal_scores(y.len())?;
    let w = vec![1.0; y.len()];
    weighted_line(&x, &y, &w)
        .ok_or_else(|| Error::Estimation("least-squares QQ fit is singular".into()))
}

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return None;
    }
    let xbar = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ybar = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - xbar) * (xi - xbar);
        sxy += wi * (xi - xbar) * (yi - ybar);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((ybar - slope * xbar, slope))
}

/// Robust empirical null: biweight M-regression of the order statistics on
/// normal scores, solved by IRLS.
pub fn fit_empirical_null(zscores: &[f64], options: NullFitOptions) -> Result<NullModel> {
    fit_empirical_null_traced(zscores, options).map(|(model, _)| model)
}

/// [`fit_empirical_null`] that also returns per-iteration diagnostics.
pub fn fit_empirical_null_traced(
    zscores: &[f64],
    options: NullFitOptions,
) -> Result<(NullModel, Vec<IrlsStep>)> {
    let NullFitOptions {
        tuning_k: k,
        tol,
        max_iter,
    } = options;
    if !(k > 0.0) || !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "tuning_k, tol and max_iter must be positive".into(),
        ));
    }
    let y = validate_scores(zscores)?;
    let n = y.len();
    let x = normal_scores(n)?;

    let mut scratch = y.clone();
    let mut mu = median_in_place(&mut scratch);
    scratch.iter_mut().for_each(|v| *v = (*v - mu).abs());
    let mut sigma = median_in_place(&mut scratch) / MAD_SCALE;
    if !(sigma > 0.0) {
        return Err(Error::Degenerate(
            "median absolute deviation of z-scores is zero".into(),
        ));
    }

    let mut residuals = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        for i in 0..n {
            residuals[i] = y[i] - mu - sigma * x[i];
        }
        scratch.copy_from_slice(&residuals);
        scratch.iter_mut().for_each(|v| *v = v.abs());
        let s = median_in_place(&mut scratch) / MAD_SCALE;
        if s <= 1e-13 * sigma {
            // exact fit
            converged = true;
            break;
        }
        iterations += 1;
        let mut active = 0;
        for i in 0..n {
            weights[i] = biweight_weight(residuals[i] / s, k);
            if weights[i] > 0.0 {
                active += 1;
            }
        }
        if active < 4 {
            return Err(Error::Estimation(format!(
                "only {active} points retain positive biweight weight"
            )));
        }
        let (new_mu, new_sigma) = weighted_line(&x, &y, &weights)
            .ok_or_else(|| Error::Estimation("weighted QQ regression is singular".into()))?;
        if !(new_sigma > 0.0) {
            return Err(Error::Estimation(format!(
                "non-positive null scale {new_sigma}"
            )));
        }
        let objective = |m: f64, sd: f64| -> f64 {
            y.iter()
                .zip(&x)
                .map(|(&yi, &xi)| biweight_rho((yi - m - sd * xi) / s, k))
                .sum()
        };
        trace.push(IrlsStep {
            scale: s,
            objective_before: objective(mu, sigma),
            objective_after: objective(new_mu, new_sigma),
            mu0: new_mu,
            sigma0: new_sigma,
        });
        let step = ((new_mu - mu).abs() + (new_sigma - sigma).abs()) / new_sigma;
        mu = new_mu;
        sigma = new_sigma;
        if step < tol {
            converged = true;
            break;
        }
    }

    Ok((
        NullModel {
            mu0: mu,
            sigma0: sigma,
            tuning_k: k,
            iterations,
            converged,
        },
        trace,
    ))
}
