//! Minimum deviance π₀ on a simulated mixture, next to Storey's estimate.

use cdfdr::pipeline::{fit_zscores, FitOptions, NullChoice};
use cdfdr::sim::{gen_mixture_normal, MixtureNormalConfig};
use cdfdr::{storey_pi0, Result, Sided};

pub fn run() -> Result<()> {
    let config = MixtureNormalConfig {
        pi0: 0.9,
        mu: 2.0,
        ..Default::default()
    };
    let (z, _) = gen_mixture_normal(&config);
    let options = FitOptions {
        null: NullChoice::Theoretical,
        sided: Sided::Right,
        ..FitOptions::default()
    };
    let fit = fit_zscores(&z, &options)?;

    let est = &fit.pi0;
    println!(
        "MDC: pi0 = {:.4} at lambda* = {:.2} (true 0.9)",
        est.pi0, est.lambda_star
    );
    for p in est.path.iter().step_by(25) {
        println!(
            "  lambda {:.2}: deviance {:.6}, subset {}",
            p.lambda, p.deviance, p.subset_size
        );
    }
    println!("Storey(0.5): pi0 = {:.4}", storey_pi0(&fit.pvalues, 0.5)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
