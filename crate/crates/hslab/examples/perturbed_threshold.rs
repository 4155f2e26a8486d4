//! Perturbed problem: interior bubbles push the mountain-pass level below
//! the Sobolev threshold once the concentration scale is large, and the
//! vanishing-weak-limit bookkeeping closes (C = A + B).
//!
//! Run with: cargo run --release --example perturbed_threshold

use hslab::oracle;
use hslab::testfn::{bubble_threshold_sweep, concentration_bookkeeping, BubbleSpec};

fn main() -> hslab::Result<()> {
    let (n, s, p) = (4u32, 1.0, 2.5);
    let threshold = oracle::sobolev_threshold(n)?;
    println!("N = {n}, s = {s}, p = {p}; threshold = {threshold:.8}");
    let bubble = BubbleSpec::new(0.4, 4.0, 0.3)?;
    let records = bubble_threshold_sweep(n, s, p, bubble, &[4.0, 8.0, 16.0, 32.0], threshold, 192)?;
    for r in &records {
        println!(
            "  mu = {:5.1}  sup_t Phi(t v_mu) = {:.8}  margin = {:+.6e}",
            r.mu, r.sup_phi, r.margin
        );
    }
    let bk = concentration_bookkeeping(n, s, p, BubbleSpec::new(0.4, 4096.0, 0.3)?)?;
    println!("bookkeeping at mu = {}:", bk.mu);
    println!("  A = {:.6}, B = {:.6}, C = {:.6}, P-term = {:.6}", bk.a, bk.b, bk.c, bk.p_term);
    println!("  |C - (A+B)|/C = {:.4e}", (bk.c - bk.a - bk.b).abs() / bk.c);
    println!("  c* = {:.8} vs A/2 + B/2*(s) - (N-2)C/(2N) = {:.8}", bk.c_star, bk.combination);
    Ok(())
}
