//! A small seeded study of both designs.

use cdfdr::sim::{run_study, MixtureNormalConfig, MixtureUniformConfig, Scenario, StudyOptions};
use cdfdr::Result;

pub fn run() -> Result<()> {
    let options = StudyOptions::default();
    let scenarios = [
        Scenario::MixtureNormal(MixtureNormalConfig {
            reps: 8,
            seed: 5,
            ..Default::default()
        }),
        Scenario::MixtureUniform(MixtureUniformConfig {
            reps: 8,
            seed: 5,
            a: 0.002,
            ..Default::default()
        }),
    ];
    for s in &scenarios {
        let report = run_study(s, &options)?;
        println!("{:?}", s);
        println!("  failures: {}", report.failures);
        for name in [
            "pi0_hat",
            "tail_mise",
            "baseline_tail_mise",
            "rejections_bh",
        ] {
            if let Some(a) = report.aggregate(name) {
                println!(
                    "  {name:<20} median {:.5}  [{:.5}, {:.5}]",
                    a.median, a.q1, a.q3
                );
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
