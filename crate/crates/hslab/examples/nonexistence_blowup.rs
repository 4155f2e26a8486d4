//! Nonexistence witness: with a pure Sobolev term (s2 = 0) and a
//! nonpositive Hardy coefficient on a star-shaped domain, the continuation
//! blows up and its level climbs to the Sobolev threshold, while the
//! Pohozaev residual collapses onto the boundary term.
//!
//! Run with: cargo run --release --example nonexistence_blowup

use hslab::grid::{AxisymmetricDomain, Grid2D};
use hslab::halfspace::geometric_schedule;
use hslab::model::ProblemSpec;
use hslab::oracle;
use hslab::solver::{continuation, SolveOptions, Solver};

fn main() -> hslab::Result<()> {
    let (n, s1, s2, lambda) = (3u32, 1.0, 0.0, -1.0);
    let dom = AxisymmetricDomain::half_ball(n, 1.0)?;
    let grid = Grid2D::build(dom, 128, 128, 3.0)?;
    let spec = ProblemSpec::two_pole(n, s1, s2, lambda, 0.5, dom)?;
    let mut solver = Solver::new(spec, grid)?;
    let schedule = geometric_schedule(0.5, 0.03, 7);
    let opts = SolveOptions { tol_grad: 3e-7, max_iter: 5000, ..Default::default() };
    let trace = continuation(&mut solver, &schedule, &opts)?;
    let threshold = oracle::sobolev_threshold(n)?;
    println!("threshold (1/N) S_N^(N/2) = {threshold:.8}");
    for s in &trace.steps {
        println!(
            "  eps = {:.4}  c = {:.8}  m = {:9.3}  |x|/k = {:.3}",
            s.epsilon,
            s.c_level,
            s.m,
            s.abs_x / s.k
        );
    }
    println!("verdict: {}", trace.verdict.as_str());
    let (u, _) = trace.last.as_ref().unwrap();
    let (vol_spec, vol_crit, boundary) = solver.asm.pohozaev_components(u);
    println!("Pohozaev volume (spec exponents)      = {vol_spec:+.6e}");
    println!("Pohozaev volume (critical algebra)    = {vol_crit:+.6e}");
    println!("Pohozaev boundary term                = {boundary:+.6e}");
    Ok(())
}
