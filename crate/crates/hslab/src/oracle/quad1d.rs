//! Adaptive 1D reference quadrature. Independent of the 2D grid machinery;
//! used to ground every closed-form integral.

/// Adaptive Simpson on [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 32)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // floor the tolerance near roundoff so noisy integrands terminate
    let tol_eff = tol.max(1e-16 * (left.abs() + right.abs()));
    if depth == 0 || delta.abs() <= 15.0 * tol_eff {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol_eff, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol_eff, depth - 1)
    }
}

/// Integral over [a, infinity) via the substitution r = a/u, u in (0, 1].
/// Requires a > 0 and an integrand decaying fast enough at infinity.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> f64 {
    assert!(a > 0.0, "tail integration needs a positive split point");
    let g = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            let r = a / u;
            f(r) * a / (u * u)
        }
    };
    integrate(&g, 0.0, 1.0, tol)
}

/// Composite Simpson with m panels (m even); a deliberately different
/// second route for cross-checking the adaptive result.
pub fn simpson_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, m: usize) -> f64 {
    let m = if m % 2 == 0 { m } else { m + 1 };
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| 3.0 * x * x;
        let v = integrate(&f, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let f = |x: f64| (-x * x).exp();
        let v = integrate(&f, 0.0, 1.0, 1e-13) + integrate_to_inf(&f, 1.0, 1e-13);
        let exact = std::f64::consts::PI.sqrt() / 2.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn fixed_matches_adaptive() {
        let f = |x: f64| (1.0 + x * x).recip();
        let a = integrate(&f, 0.0, 1.0, 1e-12);
        let b = simpson_fixed(&f, 0.0, 1.0, 512);
        assert!((a - b).abs() < 1e-9);
    }
}
