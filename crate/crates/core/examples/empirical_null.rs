//! Biweight QQ regression for the empirical null, with the IRLS trace.

use cdfdr::null_model::{fit_empirical_null_traced, qq_least_squares};
use cdfdr::{NullFitOptions, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn run() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let null = Normal::new(0.1, 1.2).unwrap();
    let signal = Normal::new(4.0, 1.0).unwrap();
    let z: Vec<f64> = (0..5000)
        .map(|i| {
            if i < 250 {
                signal.sample(&mut rng)
            } else {
                null.sample(&mut rng)
            }
        })
        .collect();

    let (fit, trace) = fit_empirical_null_traced(&z, NullFitOptions::default())?;
    for (i, step) in trace.iter().enumerate().take(6) {
        println!(
            "iter {i}: mu0 = {:.4}  sigma0 = {:.4}  objective {:.3} -> {:.3}",
            step.mu0, step.sigma0, step.objective_before, step.objective_after
        );
    }
    println!(
        "biweight: mu0 = {:.4}, sigma0 = {:.4} ({} iterations, converged = {})",
        fit.mu0, fit.sigma0, fit.iterations, fit.converged
    );
    let (a, b) = qq_least_squares(&z)?;
    println!("least squares QQ: mu0 = {a:.4}, sigma0 = {b:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
