//! Comparison-density tools for large-scale signal detection.
//!
//! The crate models a collection of p-values (or z-scores) through the
//! comparison density `d(u; F₀, F)`: a beta pre-flattening fit plus a sparse
//! shifted-Legendre correction. From that one object it derives
//!
//! * the empirical null `(μ₀, σ₀)` by biweight M-regression on the QQ plot,
//! * the null proportion π₀ by the minimum-deviance criterion,
//! * BH-type, Higher Criticism and local-fdr rejection sets,
//!
//! and a seeded simulation harness that checks them against analytic oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN along with non-positive values

pub mod basis;
pub mod error;
pub mod inference;
pub mod ingest;
pub mod null_model;
pub mod pi0;
pub mod pipeline;
pub mod sim;
pub mod skewbeta;
pub mod specfun;

pub use basis::{bb_kernel, legendre_eval, legendre_vector, rkhs_reproduce_check, LegendreBasis};
pub use error::{Error, Result};
pub use inference::{
    cd_bh, efron_density_reject, hc_threshold, local_fdr, local_fdr_from_pvalues, Method,
    RejectionResult,
};
pub use null_model::{
    biweight_psi, fit_empirical_null, pvalues_from_z, z_from_t, NullFitOptions, NullModel, Sided,
};
pub use pi0::{mdc_pi0, storey_pi0, MdcOptions, Pi0Estimate};
pub use skewbeta::{
    cd_eval, cd_eval_clipped, deviance, fit_beta_mle, fit_comparison_density, lp_coefficients,
    null_adjusted_density, select_coefficients, smooth_pvalues, uniformity_diagnostic,
    BetaFitOptions, BetaParams, CDModel, LpTerm,
};
