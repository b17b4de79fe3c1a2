//! Skew-beta + Legendre fit of a p-value sample, with the uniformity diagnostic.

use cdfdr::skewbeta::DensityFitOptions;
use cdfdr::{fit_comparison_density, uniformity_diagnostic, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // 85% uniform, 15% squeezed toward zero
    let p: Vec<f64> = (0..4000)
        .map(|i| {
            let u: f64 = rng.random();
            if i < 600 {
                u.powi(4)
            } else {
                u
            }
        })
        .collect();

    let model = fit_comparison_density(&p, DensityFitOptions::default())?;
    println!(
        "beta backbone: alpha = {:.4}, beta = {:.4}",
        model.beta_params.alpha, model.beta_params.beta
    );
    for t in &model.coefficients {
        println!("  LP[{}] = {:+.4}", t.degree, t.value);
    }
    println!("deviance = {:.5}", model.deviance());
    for u in [0.001, 0.01, 0.1, 0.5, 0.9] {
        println!("  d({u}) = {:.4}", model.eval(u)?);
    }

    let diag = uniformity_diagnostic(&p)?;
    println!(
        "uniformity LRT = {:.2} (p = {:.3e})",
        diag.statistic, diag.p_value
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
