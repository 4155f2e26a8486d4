//! Randomized verification of the closed-form identities: the dual blow-up
//! scale formulas, the Kelvin involution, moving-sphere weight monotonicity
//! and the sphere-weight comparison inequality.
//!
//! Run with: cargo run --release --example identity_checks

use hslab::cli::scenarios::run_identities_suite;
use std::path::Path;

fn main() -> hslab::Result<()> {
    let out = Path::new("runs/identities-example");
    std::fs::create_dir_all(out)?;
    let output = run_identities_suite(out, 2024, false)?;
    for check in &output.checks {
        let tag = if check.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", check.name, check.detail);
    }
    println!("details in {}", out.join("identities.csv").display());
    Ok(())
}
