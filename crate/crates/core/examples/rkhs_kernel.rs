//! Brownian bridge kernel, its reproducing property, and the Legendre Gram matrix.

use cdfdr::{bb_kernel, rkhs_reproduce_check, LegendreBasis, Result};

pub fn run() -> Result<()> {
    println!("K(0.3, 0.7) = {:.4}", bb_kernel(0.3, 0.7)?);

    // φ(t) = sin(πt) vanishes at both ends
    let pi = std::f64::consts::PI;
    for u in [0.1, 0.5, 0.9] {
        let got = rkhs_reproduce_check(u, |t| (pi * t).sin(), |t| pi * (pi * t).cos(), 128)?;
        println!(
            "<K(u,.), phi> at u = {u}: {got:.10} vs phi(u) = {:.10}",
            (pi * u).sin()
        );
    }

    let gram = LegendreBasis::new(6)?.gram_matrix();
    let off = gram
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, g)| (g - (i == j) as u8 as f64).abs())
        })
        .fold(0.0, f64::max);
    println!("Legendre Gram matrix, degrees 0..=6: max |G - I| = {off:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
