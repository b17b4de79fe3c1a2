//! End-to-end fitting: null, p-values, skew-beta LP density, π̂₀, diagnostic,
//! and the versioned model document used for persistence.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::ingest::{Sample, SampleKind};
use crate::null_model::{fit_empirical_null, pvalues_from_z, NullFitOptions, NullModel, Sided};
use crate::pi0::{mdc_pi0, MdcOptions, Pi0Estimate};
use crate::skewbeta::{
    clamp_pvalues, fit_comparison_density, uniformity_diagnostic, BetaFitOptions, CDModel,
    DensityFitOptions, LpTerm, UniformityDiagnostic,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullChoice {
    Theoretical,
    #[default]
    Empirical,
}

impl fmt::Display for NullChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NullChoice::Theoretical => "theoretical",
            NullChoice::Empirical => "empirical",
        })
    }
}

impl FromStr for NullChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theoretical" => Ok(NullChoice::Theoretical),
            "empirical" => Ok(NullChoice::Empirical),
            other => Err(Error::InvalidArgument(format!(
                "unknown null {other:?} (expected theoretical or empirical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub null: NullChoice,
    pub sided: Sided,
    pub max_degree: usize,
    pub null_fit: NullFitOptions,
    pub beta_fit: BetaFitOptions,
    pub mdc: MdcOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            null: NullChoice::Empirical,
            sided: Sided::TwoSided,
            max_degree: crate::basis::DEFAULT_MAX_DEGREE,
            null_fit: NullFitOptions::default(),
            beta_fit: BetaFitOptions::default(),
            mdc: MdcOptions::default(),
        }
    }
}

/// Everything produced by [`fit_pvalues`] / [`fit_zscores`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    /// Fitted model with null (for z input) and π̂₀ attached.
    pub model: CDModel,
    /// The clamped p-values the density was fitted on.
    pub pvalues: Vec<f64>,
    pub pi0: Pi0Estimate,
    pub diagnostic: UniformityDiagnostic,
}

impl FitOutcome {
    pub fn report(&self) -> FitReport {
        FitReport {
            n: self.model.n,
            alpha: self.model.beta_params.alpha,
            beta: self.model.beta_params.beta,
            loglik: self.model.beta_params.loglik,
            coefficients: self.model.coefficients.clone(),
            raw_coefficients: self.model.raw_coefficients.clone(),
            mu0: self.model.null.map(|n| n.mu0),
            sigma0: self.model.null.map(|n| n.sigma0),
            null_converged: self.model.null.map(|n| n.converged),
            sided: self.model.sided,
            pi0: self.pi0.pi0,
            lambda_star: self.pi0.lambda_star,
            diagnostic_statistic: self.diagnostic.statistic,
            diagnostic_p_value: self.diagnostic.p_value,
        }
    }
}

/// Human- and machine-readable summary of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub loglik: f64,
    pub coefficients: Vec<LpTerm>,
    pub raw_coefficients: Vec<f64>,
    pub mu0: Option<f64>,
    pub sigma0: Option<f64>,
    pub null_converged: Option<bool>,
    pub sided: Option<Sided>,
    pub pi0: f64,
    pub lambda_star: f64,
    pub diagnostic_statistic: f64,
    pub diagnostic_p_value: f64,
}

/// Fits the comparison density, π̂₀ and diagnostic to p-values.
pub fn fit_pvalues(pvalues: &[f64], options: &FitOptions) -> Result<FitOutcome> {
    let clamped = clamp_pvalues(pvalues).stage("ingest")?;
    finish_fit(clamped, None, options)
}

/// Fits the null (empirical or theoretical), maps z-scores to p-values and
/// continues as [`fit_pvalues`].
pub fn fit_zscores(zscores: &[f64], options: &FitOptions) -> Result<FitOutcome> {
    let null = match options.null {
        NullChoice::Theoretical => NullModel::theoretical(),
        NullChoice::Empirical => {
            fit_empirical_null(zscores, options.null_fit).stage("empirical null")?
        }
    };
    let pvalues = pvalues_from_z(zscores, &null, options.sided);
    finish_fit(pvalues, Some(null), options)
}

/// Dispatches on the sample kind.
pub fn fit_sample(sample: &Sample, options: &FitOptions) -> Result<FitOutcome> {
    match sample.kind {
        SampleKind::P => fit_pvalues(&sample.values, options),
        SampleKind::Z | SampleKind::T => fit_zscores(&sample.values, options),
    }
}

fn finish_fit(
    pvalues: Vec<f64>,
    null: Option<NullModel>,
    options: &FitOptions,
) -> Result<FitOutcome> {
    let density_opts = DensityFitOptions {
        max_degree: options.max_degree,
        beta: options.beta_fit,
    };
    let mut model = fit_comparison_density(&pvalues, density_opts).stage("density")?;
    if let Some(null) = null {
        model = model.with_null(null, options.sided);
    }
    let pi0 = mdc_pi0(&pvalues, &model, options.mdc).stage("pi0")?;
    let model = model.with_pi0(pi0.pi0).stage("pi0")?;
    let diagnostic = uniformity_diagnostic(&pvalues).stage("diagnostic")?;
    Ok(FitOutcome {
        model,
        pvalues,
        pi0,
        diagnostic,
    })
}

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub model: CDModel,
}

impl ModelDocument {
    pub fn new(model: CDModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        doc.model.validate()?;
        Ok(doc)
    }
}

/// Writes the model JSON to `path`.
pub fn save_model(model: &CDModel, path: impl AsRef<Path>) -> Result<()> {
    let text = ModelDocument::new(model.clone()).to_json()?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CDModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(ModelDocument::from_json(&text)?.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_pipeline_is_null() {
        let n = 2000;
        let p: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let out = fit_pvalues(&p, &FitOptions::default()).unwrap();
        assert!((out.model.beta_params.alpha - 1.0).abs() < 0.01);
        assert!((out.model.beta_params.beta - 1.0).abs() < 0.01);
        assert!(out.model.coefficients.is_empty());
        assert!(out.pi0.pi0 > 0.99);
        assert!(out.model.null.is_none());
    }

    #[test]
    fn stage_names_errors() {
        let err = fit_zscores(&[1.0; 30], &FitOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("empirical null:"), "{err}");
    }

    #[test]
    fn document_round_trip() {
        let model = CDModel::uniform(12).with_pi0(0.9).unwrap();
        let doc = ModelDocument::new(model.clone());
        let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back.model, model);
        let bad = doc
            .to_json()
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(ModelDocument::from_json(&bad).is_err());
    }
}
