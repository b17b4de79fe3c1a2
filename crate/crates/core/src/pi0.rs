//! Null-proportion estimation: the minimum deviance criterion (MDC) and the
//! Storey `π̂₀(λ)` baseline.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::basis::{fill_leg, DEFAULT_MAX_DEGREE};
use crate::error::{Error, Result};
use crate::skewbeta::{clamp_pvalues, CDModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdcOptions {
    /// Upper end of the threshold grid `[1, γ]`.
    pub gamma: f64,
    pub grid_step: f64,
    /// Number of Legendre terms in the deviance.
    pub max_degree: usize,
}

impl Default for MdcOptions {
    fn default() -> Self {
        Self {
            gamma: 3.5,
            grid_step: 0.01,
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

/// One point of the deviance path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviancePoint {
    pub lambda: f64,
    pub deviance: f64,
    pub subset_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pi0Estimate {
    pub pi0: f64,
    pub lambda_star: f64,
    pub path: Vec<DeviancePoint>,
    pub max_degree: usize,
    pub n: usize,
}

impl Pi0Estimate {
    /// Writes `lambda,deviance,subset_size` rows.
    pub fn write_path_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for point in &self.path {
            w.serialize(point)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Threshold grid `1, 1 + step, …` up to `γ` inclusive.
pub fn lambda_grid(gamma: f64, step: f64) -> Result<Vec<f64>> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::domain("mdc_pi0", gamma, "gamma >= 1"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain("mdc_pi0", step, "grid_step > 0"));
    }
    let count = ((gamma - 1.0) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| 1.0 + k as f64 * step).collect())
}

/// Minimum deviance estimate of π₀.
///
/// For each λ on the grid the subset `{uᵢ : d̂(uᵢ) < λ}` is scored by
/// `I_λ = Σ_{j≤M} (mean Leg_j(uᵢ))²`; the smallest λ attaining the minimum
/// gives `π̂₀ = N_λ*/N`.
pub fn mdc_pi0(pvalues: &[f64], model: &CDModel, options: MdcOptions) -> Result<Pi0Estimate> {
    if pvalues.is_empty() {
        return Err(Error::InvalidArgument("mdc_pi0 needs p-values".into()));
    }
    if options.max_degree == 0 {
        return Err(Error::InvalidArgument("max_degree must be positive".into()));
    }
    let grid = lambda_grid(options.gamma, options.grid_step)?;
    let u = clamp_pvalues(pvalues)?;
    let n = u.len();
    let m = options.max_degree;

    let density: Vec<f64> = u.iter().map(|&x| model.eval(x)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| density[a].total_cmp(&density[b]).then(a.cmp(&b)));

    // prefix[k*m + j] = Σ over the k lowest-density points of Leg_{j+1}
    let mut prefix = vec![0.0; (n + 1) * m];
    let mut row = vec![0.0; m];
    for (k, &i) in order.iter().enumerate() {
        fill_leg(u[i], &mut row);
        let (done, rest) = prefix.split_at_mut((k + 1) * m);
        let prev = &done[k * m..];
        for j in 0..m {
            rest[j] = prev[j] + row[j];
        }
    }
    let sorted_density: Vec<f64> = order.iter().map(|&i| density[i]).collect();

    let mut path = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        let size = sorted_density.partition_point(|&d| d < lambda);
        if size == 0 {
            continue;
        }
        let sums = &prefix[size * m..(size + 1) * m];
        let inv = 1.0 / size as f64;
        let deviance = sums.iter().map(|s| (s * inv) * (s * inv)).sum();
        path.push(DeviancePoint {
            lambda,
            deviance,
            subset_size: size,
        });
    }
    let best = path
        .iter()
        .fold(None::<&DeviancePoint>, |best, p| match best {
            Some(b) if b.deviance <= p.deviance => Some(b),
            _ => Some(p),
        })
        .ok_or_else(|| {
            Error::Estimation("every threshold on the grid selects an empty subset".into())
        })?;
    let (pi0, lambda_star) = (best.subset_size as f64 / n as f64, best.lambda);
    Ok(Pi0Estimate {
        pi0,
        lambda_star,
        path,
        max_degree: m,
        n,
    })
}

/// Storey's `(1 − D̃(λ))/(1 − λ)`, truncated at 1.
pub fn storey_pi0(pvalues: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain("storey_pi0", lambda, "0 < lambda < 1"));
    }
    if pvalues.is_empty() {
        return Ok(1.0);
    }
    let above = pvalues.iter().filter(|&&p| p > lambda).count() as f64;
    Ok((above / pvalues.len() as f64 / (1.0 - lambda)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storey_examples() {
        assert_eq!(storey_pi0(&[0.2, 0.4, 0.6, 0.8], 0.5).unwrap(), 1.0);
        assert_eq!(storey_pi0(&[0.7, 0.8, 0.9], 0.5).unwrap(), 1.0);
        assert_eq!(storey_pi0(&[0.01; 5], 0.5).unwrap(), 0.0);
        assert!((storey_pi0(&[0.1, 0.2, 0.3, 0.9], 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(storey_pi0(&[0.5], 1.0).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = lambda_grid(3.5, 0.01).unwrap();
        assert_eq!(g.len(), 251);
        assert_eq!(g[0], 1.0);
        assert!((g[250] - 3.5).abs() < 1e-12);
        assert!(lambda_grid(0.5, 0.01).is_err());
        assert!(lambda_grid(2.0, 0.0).is_err());
    }

    #[test]
    fn pure_null_model_gives_one() {
        let u: Vec<f64> = (1..=500).map(|i| (i as f64 - 0.5) / 500.0).collect();
        let est = mdc_pi0(&u, &CDModel::uniform(500), MdcOptions::default()).unwrap();
        assert_eq!(est.pi0, 1.0);
        // λ = 1 selects nothing since d̂ ≡ 1 is not < 1
        assert!(est.path[0].lambda > 1.0);
        assert!(est.path.iter().all(|p| p.subset_size == 500));
        assert!((est.lambda_star - 1.01).abs() < 1e-12);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let u = [0.2, 0.4, 0.6];
        let opts = MdcOptions {
            gamma: 1.0,
            ..MdcOptions::default()
        };
        assert!(matches!(
            mdc_pi0(&u, &CDModel::uniform(3), opts),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn path_csv_has_header() {
        let u: Vec<f64> = (1..=50).map(|i| i as f64 / 51.0).collect();
        let opts = MdcOptions {
            gamma: 1.05,
            ..MdcOptions::default()
        };
        let est = mdc_pi0(&u, &CDModel::uniform(50), opts).unwrap();
        let mut buf = Vec::new();
        est.write_path_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("lambda,deviance,subset_size\n"));
        assert_eq!(text.lines().count(), 1 + est.path.len());
    }
}
