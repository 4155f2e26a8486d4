//! Entire least-energy profile on the truncated half-space: subcritical
//! continuation down to a small offset, critical rescaling, curvature
//! constants, decay fit and Kelvin-symmetry deviation.
//!
//! Run with: cargo run --release --example halfspace_least_energy

use hslab::halfspace::{geometric_schedule, solve_entire, EntireOptions};
use hslab::solver::SolveOptions;

fn main() -> hslab::Result<()> {
    let opts = EntireOptions {
        r_max: 12.0,
        grid_n: 96,
        gamma: 3.0,
        eps_schedule: geometric_schedule(0.4, 0.06, 5),
        solve: SolveOptions { tol_grad: 3e-7, max_iter: 4000, ..Default::default() },
    };
    let (n, s1, s2, lambda) = (3, 1.5, 0.5, -1.0);
    println!("solving the half-space problem: N={n}, s1={s1}, s2={s2}, lambda={lambda}");
    let sol = solve_entire(n, s1, s2, lambda, &opts)?;
    for (eps, c) in &sol.levels {
        println!("  eps = {eps:.4}  level = {c:.8}");
    }
    println!("critical-ray energy c1      = {:.8}", sol.c1);
    println!("K1 = {:.6}, K2 = {:.6}, K3 = {:.6}", sol.constants.k1, sol.constants.k2, sol.constants.k3);
    println!("decay exponent (rays)       = {:.3}", sol.decay.exponent);
    println!("kelvin symmetry deviation   = {:.4}", sol.kelvin_deviation);
    println!("tail coefficient d          = {:.6}", sol.tail.d);
    println!("truncation tail bound       = {:.3e}", sol.tail_bound(opts.r_max));
    Ok(())
}
