//! Recompute and cross-check every reference constant: the bubble
//! normalization, the radial Hardy-Sobolev extremal, and the Sobolev best
//! constant by three independent routes, plus residual certification of
//! both profiles at two grid resolutions.
//!
//! Run with: cargo run --release --example oracle_certification

use hslab::oracle;

fn main() -> hslab::Result<()> {
    for (n, s) in [(3u32, 1.0f64), (4, 1.0)] {
        let summary = oracle::certify(n, s)?;
        println!("N = {n}");
        println!("  S_N (gamma formula)   = {:.12}", summary.s_n_gamma);
        println!("  S_N (quadrature)      = {:.12}", summary.s_n_quadrature);
        println!("  bubble constant C_N   = {:.12}", summary.c_n);
        println!("  threshold S_N^(N/2)/N = {:.12}", summary.threshold);
        println!("  bubble residual order   {:.3}", summary.bubble_order);
        println!("  extremal residual order {:.3} (s = {s})", summary.extremal_order);
    }
    println!("all oracle certifications passed");
    Ok(())
}
