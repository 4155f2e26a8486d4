use hslab::grid::{AxisymmetricDomain, Grid2D, GridFunction};
use hslab::model::{kelvin_transform, KelvinTail};
use std::sync::Arc;

fn main() {
    let dom = AxisymmetricDomain::truncated_half_space(3, 2.5).unwrap();
    let m = 160usize;
    let rho: Vec<f64> = (0..=m).map(|i| 1e-9 + (2.5 - 1e-9) * i as f64 / m as f64).collect();
    let z: Vec<f64> = (0..=m).map(|i| 2.5 * i as f64 / m as f64).collect();
    let grid = Arc::new(Grid2D::from_axes(dom, rho, z));
    let u = GridFunction::sample(Arc::clone(&grid), |r, z| {
        let d2 = (r - 0.8f64).powi(2) + (z - 0.9f64).powi(2);
        (-d2 / 0.64).exp()
    });
    let k1 = kelvin_transform(&u, 0.0, 1.0, &grid, KelvinTail::Zero).unwrap();
    let k2 = kelvin_transform(&k1, 0.0, 1.0, &grid, KelvinTail::Zero).unwrap();
    // worst error location in the annulus
    let mut worst = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for (i, (r, zz)) in grid.nodes().enumerate() {
        let rad = (r * r + zz * zz).sqrt();
        if (0.7..=1.0 / 0.7).contains(&rad) {
            let e = (k2.values[i] - u.values[i]).abs();
            if e > worst.0 { worst = (e, r, zz, u.values[i], k2.values[i]); }
        }
    }
    println!("worst err {:.3e} at rho={:.3} z={:.3}: u={:.5} kk={:.5}", worst.0, worst.1, worst.2, worst.3, worst.4);
    // check K(u) pointwise against the closed form at a few places
    for &(r, zz) in &[(0.9f64, 0.9f64), (1.2, 0.4), (0.75, 0.05), (0.8, 0.001)] {
        let d2 = r * r + zz * zz;
        let (pr, pz) = (r / d2, zz / d2);
        let direct = (1.0 / d2.sqrt()) * u.interpolate(pr, pz);
        let got = k1.interpolate(r, zz);
        println!("K(u)({r},{zz}): direct {direct:.6} got {got:.6}");
    }
}
