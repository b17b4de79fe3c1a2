//! Read a score file, fit, save the model JSON and load it back.

use std::io::Write;

use cdfdr::ingest::{ingest, SampleKind};
use cdfdr::pipeline::{fit_sample, load_model, save_model, FitOptions};
use cdfdr::Result;

pub fn run() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("cdfdr-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("t.txt");
    let mut f = std::fs::File::create(&input)?;
    writeln!(f, "# two-sample t statistics, df = 100")?;
    for i in 0..2000 {
        let x = (i as f64 + 0.5) / 2000.0;
        let t = 3.0 * (x - 0.5) + if i % 20 == 0 { 3.5 } else { 0.0 };
        writeln!(f, "{t}")?;
    }
    drop(f);

    let sample = ingest(&input, SampleKind::T, Some(100.0), None)?;
    println!("{}", sample.summary());
    let fit = fit_sample(&sample, &FitOptions::default())?;
    let path = dir.join("model.json");
    save_model(&fit.model, &path)?;
    let back = load_model(&path)?;
    assert_eq!(back, fit.model);
    println!("{}", serde_json::to_string_pretty(&fit.report())?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
