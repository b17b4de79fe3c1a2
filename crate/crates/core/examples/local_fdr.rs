//! Local fdr from the fitted comparison density against the two-group oracle.

use cdfdr::pipeline::{fit_zscores, FitOptions, NullChoice};
use cdfdr::sim::{gen_mixture_normal, true_fdr_normal, MixtureNormalConfig};
use cdfdr::{local_fdr, Result, Sided};

pub fn run() -> Result<()> {
    let config = MixtureNormalConfig {
        mu: 2.0,
        pi0: 0.9,
        ..Default::default()
    };
    let (z, _) = gen_mixture_normal(&config);
    let options = FitOptions {
        null: NullChoice::Theoretical,
        sided: Sided::Right,
        ..FitOptions::default()
    };
    let fit = fit_zscores(&z, &options)?;

    let grid: Vec<f64> = (-6..=10).map(|i| i as f64 * 0.5).collect();
    let est = local_fdr(&grid, &fit.model)?;
    println!("    z   fdr_hat   oracle");
    for (z, f) in grid.iter().zip(&est) {
        println!(
            "{z:5.1}   {f:.4}   {:.4}",
            true_fdr_normal(*z, config.pi0, config.mu)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
