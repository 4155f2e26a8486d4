//! Property-based invariants of the closed-form layer.

use hslab::grid::BoundaryGraph;
use hslab::model::{
    blowup_scale, critical_exponent, intermediate_scale, subcritical_exponents,
    sphere_weight_comparison, MovingSphereProbe,
};
use proptest::prelude::*;

fn admissible_exponents() -> impl Strategy<Value = (u32, f64, f64, f64)> {
    (3u32..=7, 0.05f64..1.95, 0.0f64..1.0, 0.0f64..0.9).prop_map(|(n, s1, frac, efrac)| {
        let s2 = s1 * frac * 0.95;
        let cap = 2.0 * (2.0 - s1) / (f64::from(n) - 2.0);
        (n, s1, s2, efrac * cap)
    })
}

proptest! {
    /// p2(eps) > p1(eps) > 1 across the admissible parameter range.
    #[test]
    fn exponent_ordering((n, s1, s2, eps) in admissible_exponents()) {
        let (p1, p2) = subcritical_exponents(n, s1, s2, eps).unwrap();
        prop_assert!(p2 > p1);
        prop_assert!(p1 > 1.0);
    }

    /// The two closed forms of the blow-up scale agree to 1e-12 relative
    /// (blowup_scale verifies internally and errors otherwise).
    #[test]
    fn scale_law_identity((n, s1, s2, eps) in admissible_exponents(),
                          logm in -4.0f64..5.0) {
        let m = 10f64.powf(logm);
        prop_assert!(blowup_scale(m, n, s1, s2, eps).is_ok());
    }

    /// Critical exponent interpolates between 2 and 2N/(N-2).
    #[test]
    fn critical_exponent_range(n in 3u32..=9, s in 0.0f64..=2.0) {
        let t = critical_exponent(n, s).unwrap();
        let nf = f64::from(n);
        prop_assert!(t >= 2.0 - 1e-12);
        prop_assert!(t <= 2.0 * nf / (nf - 2.0) + 1e-12);
    }

    /// Intermediate scale equals k at equal arguments and interpolates
    /// multiplicatively.
    #[test]
    fn intermediate_scale_properties(absx in 1e-3f64..1e3, k in 1e-6f64..1.0,
                                     s2 in 0.0f64..=2.0) {
        let r = intermediate_scale(absx, k, s2).unwrap();
        let lo = absx.min(k);
        let hi = absx.max(k);
        prop_assert!(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12));
        let same = intermediate_scale(k, k, s2).unwrap();
        prop_assert!((same - k).abs() <= 1e-12 * k);
    }

    /// The sphere weight decreases along the probe segment.
    #[test]
    fn sphere_weight_monotone(r_depth in 0.1f64..3.0,
                              ratio in 1.05f64..5.0,
                              theta_n in 0.02f64..1.0,
                              fa in 0.001f64..0.999,
                              fb in 0.001f64..0.999) {
        let probe = MovingSphereProbe::new(r_depth, r_depth * ratio, theta_n).unwrap();
        let lo = probe.mu1();
        let hi = probe.mu_upper();
        prop_assume!(hi > lo);
        let a = lo + (hi - lo) * fa;
        let b = a + (hi - a) * fb;
        let (ea, eb) = (probe.weight(a).unwrap(), probe.weight(b).unwrap());
        prop_assert!(ea >= eb - 1e-12 * ea.abs());
        prop_assert!(probe.weight_derivative(a).unwrap() <= 1e-15);
    }

    /// Sphere-weight comparison inequality inside the inversion ball.
    #[test]
    fn weight_comparison(r_depth in 0.2f64..2.0,
                         ratio in 1.05f64..4.0,
                         s in 0.05f64..2.0,
                         dir in prop::array::uniform3(-1.0f64..1.0),
                         frac in 0.01f64..0.999) {
        let radius = r_depth * ratio;
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        prop_assume!(norm > 1e-3);
        let mut y = [0.0f64; 3];
        for i in 0..3 {
            y[i] = dir[i] / norm * radius * frac;
        }
        y[2] -= r_depth;
        prop_assume!(y[2] > 1e-9);
        let (lhs, rhs) = sphere_weight_comparison(&y, r_depth, radius, s).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "lhs {lhs} rhs {rhs}");
    }

    /// Chart round-trip is the identity to 1e-14.
    #[test]
    fn chart_roundtrip(alpha in -0.55f64..0.55, rho in 0.0f64..0.89,
                       z in -1.0f64..1.0) {
        let graph = BoundaryGraph::new(alpha, 0.9).unwrap();
        let (r1, y) = graph.flatten(rho, z).unwrap();
        let (r2, z2) = graph.unflatten(r1, y).unwrap();
        prop_assert!((r2 - rho).abs() <= 1e-14);
        prop_assert!((z2 - z).abs() <= 1e-14);
    }
}
