//! BH-type, Higher Criticism and Efron density rules on one sample.

use cdfdr::pipeline::{fit_pvalues, FitOptions};
use cdfdr::sim::{gen_mixture_uniform, MixtureUniformConfig};
use cdfdr::{cd_bh, efron_density_reject, hc_threshold, Result};

pub fn run() -> Result<()> {
    let config = MixtureUniformConfig {
        pi0: 0.95,
        a: 0.002,
        ..Default::default()
    };
    let (p, labels) = gen_mixture_uniform(&config);
    let fit = fit_pvalues(&p, &FitOptions::default())?;
    let pi0 = fit.pi0.pi0;

    let results = [
        cd_bh(&p, 0.05, 1.0)?,
        cd_bh(&p, 0.05, pi0)?,
        hc_threshold(&p, 0.1)?,
        efron_density_reject(&p, &fit.model, 0.05, pi0)?,
    ];
    let signals = labels.iter().filter(|&&l| l).count();
    println!(
        "{signals} signals among {} p-values, pi0_hat = {pi0:.4}",
        p.len()
    );
    for r in &results {
        let false_hits = r.rejected.iter().filter(|&&i| !labels[i]).count();
        println!(
            "{:<14} pi0 {:.3}: {:>4} rejected, {:>3} false",
            r.method.as_str(),
            r.pi0_used,
            r.n_rejected(),
            false_hits
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
