//! Runs every example's `run()` so the examples stay compiling and working.

#[path = "../examples/comparison_density.rs"]
mod comparison_density;

#[path = "../examples/empirical_null.rs"]
mod empirical_null;

#[path = "../examples/local_fdr.rs"]
mod local_fdr;

#[path = "../examples/persist_model.rs"]
mod persist_model;

#[path = "../examples/pi0_mdc.rs"]
mod pi0_mdc;

#[path = "../examples/rejection_rules.rs"]
mod rejection_rules;

#[path = "../examples/rkhs_kernel.rs"]
mod rkhs_kernel;

#[path = "../examples/simulation.rs"]
mod simulation;

#[test]
fn example_comparison_density() {
    comparison_density::run().unwrap();
}

#[test]
fn example_empirical_null() {
    empirical_null::run().unwrap();
}

#[test]
fn example_local_fdr() {
    local_fdr::run().unwrap();
}

#[test]
fn example_persist_model() {
    persist_model::run().unwrap();
}

#[test]
fn example_pi0_mdc() {
    pi0_mdc::run().unwrap();
}

#[test]
fn example_rejection_rules() {
    rejection_rules::run().unwrap();
}

#[test]
fn example_rkhs_kernel() {
    rkhs_kernel::run().unwrap();
}

#[test]
fn example_simulation() {
    simulation::run().unwrap();
}
