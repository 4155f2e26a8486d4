//! Concentrated test functions on curved-boundary domains, the
//! curvature-driven energy-gap ladder, and bubble test functions for the
//! perturbed problem with its Sobolev-threshold check.
//!
//! The gap machinery measures, fully on the curved domain, how the ray
//! maximum of the energy of
//!
//! ```text
//! u_eps(x) = eta(x) eps^(-(N-2)/2) v(phi(x)/eps)
//! ```
//!
//! falls below the half-space level c1 as the concentration scale shrinks;
//! the fitted slope is compared against the boundary-curvature prediction
//! computed independently from the K constants.

use crate::error::{HsError, Result};
use crate::functional::{nehari_scale_scalar, ray_energy, Assembler};
use crate::grid::{AxisymmetricDomain, BoundaryGraph, Grid2D, GridFunction};
use crate::halfspace::{affine_fit, EntireSolution, TailModel};
use crate::model::{critical_exponent, Pole, ProblemSpec};
use crate::oracle::quad1d;
use serde::Serialize;
use std::sync::Arc;

/// Quintic cutoff: 1 on r <= r0/2, 0 beyond r0, C2 in between.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub r0: f64,
}

impl Cutoff {
    pub fn value(&self, r: f64) -> f64 {
        let half = self.r0 / 2.0;
        if r <= half {
            1.0
        } else if r >= self.r0 {
            0.0
        } else {
            let t = (r - half) / half;
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let half = self.r0 / 2.0;
        if r <= half || r >= self.r0 {
            0.0
        } else {
            let t = (r - half) / half;
            -30.0 * t * t * (1.0 - t) * (1.0 - t) / half
        }
    }
}

/// Interpolating evaluator for an entire profile and its gradient, with
/// the fitted far-field model beyond the resolved radius. The gradient is
/// a smoothed field (nodal finite differences, bilinearly interpolated):
/// continuous across cells, which keeps quadratures of the composed field
/// free of kink-misintegration noise.
pub struct ProfileEval {
    values: GridFunction,
    grad_rho: GridFunction,
    grad_z: GridFunction,
    tail: TailModel,
    r_switch: f64,
    n: u32,
}

impl ProfileEval {
    pub fn new(entire: &EntireSolution) -> Self {
        let v = &entire.profile;
        let g = &v.grid;
        let (nr, nz) = (g.n_rho(), g.n_z());
        let mut gr = vec![0.0; g.node_count()];
        let mut gz = vec![0.0; g.node_count()];
        for k in 0..nz {
            for j in 0..nr {
                let idx = g.idx(j, k);
                gr[idx] = axis_derivative(&g.rho, j, |jj| v.values[g.idx(jj, k)]);
                gz[idx] = axis_derivative(&g.z, k, |kk| v.values[g.idx(j, kk)]);
            }
        }
        ProfileEval {
            values: v.clone(),
            grad_rho: GridFunction::from_values(Arc::clone(g), gr),
            grad_z: GridFunction::from_values(Arc::clone(g), gz),
            tail: entire.tail,
            r_switch: 0.93 * entire.r_max,
            n: entire.n,
        }
    }

    pub fn value(&self, yr: f64, yz: f64) -> f64 {
        if yz <= 0.0 {
            return 0.0;
        }
        let r = (yr * yr + yz * yz).sqrt();
        if r <= self.r_switch {
            self.values.interpolate(yr, yz).max(0.0)
        } else {
            self.tail.value(yr, yz)
        }
    }

    pub fn grad(&self, yr: f64, yz: f64) -> (f64, f64) {
        if yz <= 0.0 {
            return (0.0, 0.0);
        }
        let r = (yr * yr + yz * yz).sqrt();
        if r <= self.r_switch {
            (self.grad_rho.interpolate(yr, yz), self.grad_z.interpolate(yr, yz))
        } else {
            let nf = f64::from(self.n);
            let r2 = yr * yr + yz * yz;
            let rp = r2.powf(-nf / 2.0 - 1.0);
            (
                -nf * self.tail.d * yz * yr * rp,
                self.tail.d * (r2 * rp - nf * yz * yz * rp),
            )
        }
    }
}

fn axis_derivative<F: Fn(usize) -> f64>(axis: &[f64], i: usize, f: F) -> f64 {
    let n = axis.len();
    if i == 0 {
        (f(1) - f(0)) / (axis[1] - axis[0])
    } else if i == n - 1 {
        (f(n - 1) - f(n - 2)) / (axis[n - 1] - axis[n - 2])
    } else {
        let hm = axis[i] - axis[i - 1];
        let hp = axis[i + 1] - axis[i];
        -hp / (hm * (hm + hp)) * f(i - 1) + (hp - hm) / (hm * hp) * f(i)
            + hm / (hp * (hm + hp)) * f(i + 1)
    }
}

/// Concentrated test function specification.
pub struct TestFunctionSpec<'a> {
    pub entire: &'a EntireSolution,
    pub graph: BoundaryGraph,
    pub eps: f64,
    pub cutoff: Cutoff,
}

impl<'a> TestFunctionSpec<'a> {
    /// The scale cap `eps <= r0 / (10 Rmax)` keeps the image of the resolved
    /// profile inside the cutoff plateau, so only the fitted tail enters the
    /// ramp region.
    pub fn new(entire: &'a EntireSolution, graph: BoundaryGraph, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(HsError::Parameter(format!("concentration scale {eps} must be > 0")));
        }
        let cap = graph.cutoff_radius / (10.0 * entire.r_max);
        if eps > cap {
            return Err(HsError::Parameter(format!(
                "concentration scale {eps} exceeds r0/(10 Rmax) = {cap}"
            )));
        }
        Ok(TestFunctionSpec { entire, graph, eps, cutoff: Cutoff { r0: graph.cutoff_radius } })
    }

    /// Pointwise value of `eta(x) eps^(-(N-2)/2) v(phi(x)/eps)`.
    pub fn eval(&self, profile: &ProfileEval, rho: f64, z: f64) -> f64 {
        let r = (rho * rho + z * z).sqrt();
        let eta = self.cutoff.value(r);
        if eta == 0.0 {
            return 0.0;
        }
        let yz = (z - self.graph.height(rho)) / self.eps;
        let yr = rho / self.eps;
        let scale = self.eps.powf(-(f64::from(self.entire.n) - 2.0) / 2.0);
        eta * scale * profile.value(yr, yz)
    }

    /// Pointwise value and gradient.
    pub fn eval_grad(&self, profile: &ProfileEval, rho: f64, z: f64) -> (f64, (f64, f64)) {
        let r = (rho * rho + z * z).sqrt().max(1e-300);
        let eta = self.cutoff.value(r);
        if eta == 0.0 {
            return (0.0, (0.0, 0.0));
        }
        let deta = self.cutoff.derivative(r);
        let yr = rho / self.eps;
        let yz = (z - self.graph.height(rho)) / self.eps;
        let scale = self.eps.powf(-(f64::from(self.entire.n) - 2.0) / 2.0);
        let v = profile.value(yr, yz);
        let (vr, vz) = profile.grad(yr, yz);
        let val = eta * scale * v;
        let slope = 2.0 * self.graph.alpha * rho;
        let du_rho = deta * (rho / r) * scale * v + eta * scale * (vr - slope * vz) / self.eps;
        let du_z = deta * (z / r) * scale * v + eta * scale * vz / self.eps;
        (val, (du_rho, du_z))
    }
}

/// Sample the test function on a target grid (Dirichlet nodes zeroed).
pub fn build_test_function(
    tspec: &TestFunctionSpec,
    profile: &ProfileEval,
    target: &Arc<Grid2D>,
) -> Result<GridFunction> {
    if tspec.graph.cutoff_radius >= target.domain.r_max {
        return Err(HsError::Chart(
            "cutoff support must sit inside the target domain".into(),
        ));
    }
    let values = target.nodes().map(|(r, z)| tspec.eval(profile, r, z)).collect();
    Ok(GridFunction::from_values(Arc::clone(target), values).masked())
}

/// Energies of a closure-valued field over a curved domain. The region
/// within `core_delta` of the origin — where concentrated test profiles
/// live — is integrated on a dedicated polar grid sliced exactly against
/// the boundary graph; the rest uses the sliced-cell Gauss rule of the
/// tensor grid. The closure returns (value, gradient); the weighted powers
/// use exponents `t1`, `t2` against `|x|^(-s1)`, `|x|^(-s2)`.
pub fn closure_energies<F: Fn(f64, f64) -> (f64, (f64, f64))>(
    grid: &Grid2D,
    f: &F,
    s1: f64,
    s2: f64,
    t1: f64,
    t2: f64,
    core_delta: f64,
) -> (f64, f64, f64) {
    let mut a = 0.0;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    let d2 = core_delta * core_delta;
    let mut absorb = |rho: f64, z: f64, w: f64| {
        let (v, (dr, dz)) = f(rho, z);
        a += w * (dr * dr + dz * dz);
        if v > 0.0 {
            let rr = (rho * rho + z * z).sqrt().max(1e-300);
            b1 += w * v.powf(t1) * rr.powf(-s1);
            b2 += w * v.powf(t2) * rr.powf(-s2);
        }
    };
    grid.for_each_gauss(|_, _, rho, z, w| {
        if rho * rho + z * z > d2 {
            absorb(rho, z, w);
        }
    });
    if core_delta > 0.0 {
        let alpha = grid.domain.graph().map(|g| g.alpha).unwrap_or(0.0);
        let nm2 = i32::try_from(grid.domain.n - 2).unwrap();
        let sphere = grid.sphere_factor;
        let (m_r, m_phi) = (576usize, 144usize);
        let gq = 0.5 / 3f64.sqrt();
        let hr = core_delta / m_r as f64;
        for i in 0..m_r {
            let rm = (i as f64 + 0.5) * hr;
            for gr in [-1.0f64, 1.0] {
                let r = rm + gr * gq * hr;
                // polar angle of the boundary graph z = alpha rho^2 at radius r
                let phi_max = if alpha == 0.0 {
                    std::f64::consts::FRAC_PI_2
                } else {
                    let c = ((1.0 + 4.0 * alpha * alpha * r * r).sqrt() - 1.0) / (2.0 * alpha * r);
                    c.clamp(-1.0, 1.0).acos()
                };
                let hp = phi_max / m_phi as f64;
                for jj in 0..m_phi {
                    let pm = (jj as f64 + 0.5) * hp;
                    for gp in [-1.0f64, 1.0] {
                        let phi = pm + gp * gq * hp;
                        let rho = r * phi.sin();
                        let z = r * phi.cos();
                        let w = sphere * rho.powi(nm2) * r * (0.5 * hr) * (0.5 * hp);
                        absorb(rho, z, w);
                    }
                }
            }
        }
    }
    (a, b1, b2)
}

/// Ray maximum over an explicit t-grid with golden-section refinement.
/// The grid must bracket the maximum; a maximum at the edge is an error.
pub fn energy_sweep(u: &GridFunction, asm: &Assembler, t_grid: &[f64]) -> Result<(f64, f64)> {
    if t_grid.len() < 8 {
        return Err(HsError::Parameter("t grid needs at least 8 points".into()));
    }
    let a = u.dirichlet_energy();
    let terms = asm.ray_terms(u);
    ray_sweep(a, &terms, t_grid)
}

/// Same sweep on precomputed ray data.
pub fn ray_sweep(a: f64, terms: &[(f64, f64, f64)], t_grid: &[f64]) -> Result<(f64, f64)> {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &t) in t_grid.iter().enumerate() {
        let v = ray_energy(a, terms, t);
        if v > best.0 {
            best = (v, i);
        }
    }
    if best.1 == 0 || best.1 == t_grid.len() - 1 {
        return Err(HsError::OutOfRange(format!(
            "ray maximum at the sweep edge (t = {})",
            t_grid[best.1]
        )));
    }
    // golden-section refinement between the neighbors
    let (mut lo, mut hi) = (t_grid[best.1 - 1], t_grid[best.1 + 1]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = ray_energy(a, terms, x1);
    let mut f2 = ray_energy(a, terms, x2);
    for _ in 0..80 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = ray_energy(a, terms, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = ray_energy(a, terms, x2);
        }
    }
    let t = if f1 >= f2 { x1 } else { x2 };
    Ok((ray_energy(a, terms, t), t))
}

/// Default log-spaced sweep grid over [0.2, 5].
pub fn default_t_grid() -> Vec<f64> {
    (0..240)
        .map(|i| 0.2 * (25f64).powf(i as f64 / 239.0))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRecord {
    pub eps: f64,
    pub a: f64,
    /// lambda-weighted first power integral.
    pub b1_weighted: f64,
    pub b2: f64,
    pub max_phi: f64,
    pub t_at_max: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapLadder {
    pub alpha: f64,
    pub c1: f64,
    pub records: Vec<GapRecord>,
    /// Fitted d(gap)/d(eps) (affine fit, intercept absorbs offsets).
    pub slope: f64,
    pub intercept: f64,
    /// Fitted slopes of (A, lambda B1, B2) against eps.
    pub shift_slopes: [f64; 3],
    /// Curvature predictions: gap slope `-H K1 / 2` and the three shifts
    /// `H (K1-K2-K3)`, `-H (2*(s1)/2) K2`, `-H (2*(s2)/2) K3`.
    pub predicted_slope: f64,
    pub predicted_shifts: [f64; 3],
    /// Indices of ladder points with nonpositive gap (counterexamples for
    /// alpha < 0; never dropped).
    pub counterexamples: Vec<usize>,
}

/// Test-function energy ladder over a dyadic list of concentration scales
/// on the curved-cap domain of curvature `alpha`, evaluated by closure
/// quadrature on a fine graded grid.
pub fn gap_ladder(
    entire: &EntireSolution,
    alpha: f64,
    r0: f64,
    eps_list: &[f64],
    cap_radius: f64,
    quad_n: usize,
) -> Result<GapLadder> {
    if eps_list.len() < 4 {
        return Err(HsError::Parameter("scale ladder needs at least 4 values".into()));
    }
    let graph = BoundaryGraph::new(alpha, r0)?;
    let dom = AxisymmetricDomain::curved_cap(entire.n, cap_radius, graph)?;
    let grid = Grid2D::build(dom, quad_n, quad_n, 3.5)?;
    let profile = ProfileEval::new(entire);
    let t1 = critical_exponent(entire.n, entire.s1)?;
    let t2 = critical_exponent(entire.n, entire.s2)?;
    let t_grid = default_t_grid();
    let mut records = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let tspec = TestFunctionSpec::new(entire, graph, eps)?;
        let f = |rho: f64, z: f64| tspec.eval_grad(&profile, rho, z);
        // the polar core covers the image of the resolved profile
        let delta = 1.5 * eps * entire.r_max;
        let (a, b1, b2) = closure_energies(&grid, &f, entire.s1, entire.s2, t1, t2, delta);
        let terms = [(entire.lambda, b1, t1 - 1.0), (1.0, b2, t2 - 1.0)];
        let (max_phi, t_at_max) = ray_sweep(a, &terms, &t_grid)?;
        records.push(GapRecord {
            eps,
            a,
            b1_weighted: entire.lambda * b1,
            b2,
            max_phi,
            t_at_max,
            gap: entire.c1 - max_phi,
        });
    }
    let xs: Vec<f64> = records.iter().map(|r| r.eps).collect();
    let (intercept, slope) = affine_fit(&xs, &records.iter().map(|r| r.gap).collect::<Vec<_>>());
    let (_, sa) = affine_fit(&xs, &records.iter().map(|r| r.a).collect::<Vec<_>>());
    let (_, sb1) = affine_fit(&xs, &records.iter().map(|r| r.b1_weighted).collect::<Vec<_>>());
    let (_, sb2) = affine_fit(&xs, &records.iter().map(|r| r.b2).collect::<Vec<_>>());
    let h = alpha;
    let k = &entire.constants;
    let counterexamples = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.gap <= 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(GapLadder {
        alpha,
        c1: entire.c1,
        records,
        slope,
        intercept,
        shift_slopes: [sa, sb1, sb2],
        predicted_slope: -h * k.k1 / 2.0,
        predicted_shifts: [
            h * (k.k1 - k.k2 - k.k3),
            -h * t1 / 2.0 * k.k2,
            -h * t2 / 2.0 * k.k3,
        ],
        counterexamples,
    })
}

// --- perturbed problem: bubble test functions -----------------------------

/// Interior bubble test function `phi(x) (mu/(1+mu^2 |x-x0|^2))^((N-2)/2)`
/// with a radial cutoff avoiding the boundary pole.
#[derive(Debug, Clone, Copy)]
pub struct BubbleSpec {
    pub center_z: f64,
    pub mu: f64,
    pub cutoff_radius: f64,
}

impl BubbleSpec {
    pub fn new(center_z: f64, mu: f64, cutoff_radius: f64) -> Result<Self> {
        if center_z <= cutoff_radius {
            return Err(HsError::Parameter(
                "cutoff support must avoid the boundary pole at the origin".into(),
            ));
        }
        if mu <= 0.0 {
            return Err(HsError::Parameter(format!("bubble scale mu={mu} must be > 0")));
        }
        Ok(BubbleSpec { center_z, mu, cutoff_radius })
    }

    pub fn profile(&self, n: u32) -> impl Fn(f64, f64) -> f64 + Copy {
        let (z0, mu, rc) = (self.center_z, self.mu, self.cutoff_radius);
        let power = (f64::from(n) - 2.0) / 2.0;
        let cut = Cutoff { r0: rc };
        move |rho: f64, z: f64| {
            let dz = z - z0;
            let r = (rho * rho + dz * dz).sqrt();
            cut.value(r) * (mu / (1.0 + mu * mu * r * r)).powf(power)
        }
    }

    pub fn radial(&self, n: u32) -> impl Fn(f64) -> f64 + Copy {
        let (mu, rc) = (self.mu, self.cutoff_radius);
        let power = (f64::from(n) - 2.0) / 2.0;
        let cut = Cutoff { r0: rc };
        move |r: f64| cut.value(r) * (mu / (1.0 + mu * mu * r * r)).powf(power)
    }
}

/// The perturbed-problem specification on a bounded domain:
/// `Δu - u^(2*(s)-1)/|x|^s + u^p + u^((N+2)/(N-2)) = 0`, expressed through
/// signed poles with a fixed subcritical power.
pub fn perturbed_spec(n: u32, s: f64, p: f64, domain: AxisymmetricDomain) -> Result<ProblemSpec> {
    let crit = critical_exponent(n, s)? - 1.0;
    let sob = (f64::from(n) + 2.0) / (f64::from(n) - 2.0);
    if n < 4 {
        return Err(HsError::Parameter(format!("perturbed regime needs N >= 4, got {n}")));
    }
    if !(p > crit && p < sob) {
        return Err(HsError::Parameter(format!(
            "perturbed power p={p} must lie in (2*(s)-1, (N+2)/(N-2)) = ({crit}, {sob})"
        )));
    }
    let spec = ProblemSpec {
        n,
        poles: vec![
            Pole::critical(-1.0, s),
            Pole::fixed(1.0, 0.0, p),
            Pole::critical(1.0, 0.0),
        ],
        epsilon: 0.0,
        domain,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRecord {
    pub mu: f64,
    pub sup_phi: f64,
    pub t_at_max: f64,
    /// threshold - sup_phi; positive means the bubble pushes the level
    /// strictly below the concentration threshold.
    pub margin: f64,
    /// mu >= 1; smaller bubbles are outside the asymptotic regime.
    pub conclusive: bool,
}

/// Sweep of `sup_t Phi(t v_mu)` against the threshold `(1/N) S_N^(N/2)` for
/// a list of bubble scales, on a grid refined around the bubble center.
pub fn bubble_threshold_sweep(
    n: u32,
    s: f64,
    p: f64,
    bubble: BubbleSpec,
    mu_list: &[f64],
    threshold: f64,
    grid_n: usize,
) -> Result<Vec<ThresholdRecord>> {
    let dom = AxisymmetricDomain::half_ball(n, 1.0)?;
    let spec = perturbed_spec(n, s, p, dom)?;
    let grid = Grid2D::build_with_z_center(dom, grid_n, grid_n, 2.5, bubble.center_z)?;
    let asm = Assembler::new(spec, Arc::clone(&grid))?;
    let t_grid = default_t_grid();
    let mut out = Vec::with_capacity(mu_list.len());
    for &mu in mu_list {
        let b = BubbleSpec { mu, ..bubble };
        let f = b.profile(n);
        let u = GridFunction::sample(Arc::clone(&grid), f).masked();
        let (sup_phi, t_at_max) = energy_sweep(&u, &asm, &t_grid)?;
        out.push(ThresholdRecord {
            mu,
            sup_phi,
            t_at_max,
            margin: threshold - sup_phi,
            conclusive: mu >= 1.0,
        });
    }
    Ok(out)
}

/// Concentration bookkeeping along a manufactured vanishing-weak-limit
/// family: the bubble at a large scale, put on its stationary ray scale.
/// All integrals are 1D reference quadratures about the bubble center
/// (the weight integral adds one nested angular quadrature).
#[derive(Debug, Clone, Serialize)]
pub struct Bookkeeping {
    pub mu: f64,
    pub t0: f64,
    /// Dirichlet, weighted-power, subcritical and Sobolev-power integrals
    /// of the rescaled bubble t0 v_mu.
    pub a: f64,
    pub b: f64,
    pub p_term: f64,
    pub c: f64,
    /// sup_t Phi(t v_mu) (the measured level).
    pub c_star: f64,
    /// A/2 + B/2*(s) - (N-2)/(2N) C.
    pub combination: f64,
}

pub fn concentration_bookkeeping(
    n: u32,
    s: f64,
    p: f64,
    bubble: BubbleSpec,
) -> Result<Bookkeeping> {
    let nf = f64::from(n);
    let two_star = critical_exponent(n, s)?;
    let sob_power = 2.0 * nf / (nf - 2.0);
    let area = crate::grid::unit_sphere_area(n);
    let ring = crate::grid::unit_sphere_area(n - 1);
    let u = bubble.radial(n);
    let rc = bubble.cutoff_radius;
    let tol = 1e-11;
    let du = move |r: f64| {
        let h = 1e-6 * rc;
        (u(r + h) - u((r - h).max(0.0))) / (2.0 * h)
    };
    let a_raw = area * quad1d::integrate(&|r| du(r).powi(2) * r.powf(nf - 1.0), 0.0, rc, tol);
    let p_raw = area * quad1d::integrate(&|r| u(r).powf(p + 1.0) * r.powf(nf - 1.0), 0.0, rc, tol);
    let c_raw =
        area * quad1d::integrate(&|r| u(r).powf(sob_power) * r.powf(nf - 1.0), 0.0, rc, tol);
    // weighted term: nested angular quadrature of |x0 + r w|^(-s)
    let x0 = bubble.center_z;
    let angular = move |r: f64| {
        ring * quad1d::integrate(
            &|th: f64| {
                let d2 = x0 * x0 + r * r + 2.0 * x0 * r * th.cos();
                d2.powf(-s / 2.0) * th.sin().powf(nf - 2.0)
            },
            0.0,
            std::f64::consts::PI,
            1e-9,
        )
    };
    let b_raw = quad1d::integrate(
        &|r| u(r).powf(two_star) * r.powf(nf - 1.0) * angular(r),
        0.0,
        rc,
        1e-9,
    );
    // stationary ray scale of the perturbed functional
    let terms = [
        (-1.0, b_raw, two_star - 1.0),
        (1.0, p_raw, p),
        (1.0, c_raw, sob_power - 1.0),
    ];
    let t0 = nehari_scale_scalar(a_raw, &terms)?;
    let c_star = ray_energy(a_raw, &terms, t0);
    let a = t0 * t0 * a_raw;
    let b = t0.powf(two_star) * b_raw;
    let p_term = t0.powf(p + 1.0) * p_raw;
    let c = t0.powf(sob_power) * c_raw;
    let combination = a / 2.0 + b / two_star - (nf - 2.0) / (2.0 * nf) * c;
    Ok(Bookkeeping { mu: bubble.mu, t0, a, b, p_term, c, c_star, combination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfspace::{geometric_schedule, solve_entire, EntireOptions};
    use crate::solver::SolveOptions;

    #[test]
    fn cutoff_shape() {
        let c = Cutoff { r0: 1.0 };
        assert_eq!(c.value(0.2), 1.0);
        assert_eq!(c.value(1.1), 0.0);
        assert!((c.value(0.75) - 0.5).abs() < 1e-12);
        // C1 at the junctions
        assert!(c.derivative(0.5 + 1e-9).abs() < 1e-6);
        assert!(c.derivative(1.0 - 1e-9).abs() < 1e-6);
        let h = 1e-6;
        let fd = (c.value(0.8 + h) - c.value(0.8 - h)) / (2.0 * h);
        assert!((fd - c.derivative(0.8)).abs() < 1e-6);
    }

    #[test]
    fn ray_sweep_quadratic_quartic() {
        // A=1, B2=1, q2=3, no first term: Phi(t) = t^2/2 - t^4/4, max 1/4 at t=1
        let terms = [(1.0, 1.0, 3.0)];
        let grid = default_t_grid();
        let (max_phi, t) = ray_sweep(1.0, &terms, &grid).unwrap();
        assert!((max_phi - 0.25).abs() < 1e-10);
        assert!((t - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sweep_edge_is_error() {
        let terms = [(1.0, 1e-12, 3.0)]; // maximum far beyond 5
        let grid = default_t_grid();
        assert!(matches!(ray_sweep(1.0, &terms, &grid), Err(HsError::OutOfRange(_))));
    }

    fn small_entire() -> EntireSolution {
        let opts = EntireOptions {
            r_max: 10.0,
            grid_n: 72,
            gamma: 3.0,
            eps_schedule: geometric_schedule(0.4, 0.12, 4),
            solve: SolveOptions { max_iter: 2500, tol_grad: 5e-7, ..Default::default() },
        };
        solve_entire(3, 1.5, 0.5, -1.0, &opts).unwrap()
    }

    #[test]
    fn test_function_flat_restriction_and_trace() {
        let entire = small_entire();
        let profile = ProfileEval::new(&entire);
        // alpha = 0, eps = 1/(10 Rmax) exactly at the cap
        let graph = BoundaryGraph::new(0.0, 0.45).unwrap();
        let eps = 0.45 / (10.0 * entire.r_max);
        let tspec = TestFunctionSpec::new(&entire, graph, eps).unwrap();
        let dom = AxisymmetricDomain::curved_cap(3, 1.0, graph).unwrap();
        let target = Grid2D::build(dom, 64, 64, 3.0).unwrap();
        let u = build_test_function(&tspec, &profile, &target).unwrap();
        // Dirichlet trace: zero on all boundary nodes
        for (i, _) in target.nodes().enumerate() {
            if !target.is_interior(i) {
                assert_eq!(u.values[i], 0.0);
            }
        }
        // inside the plateau the field is the rescaled profile restriction
        let scale = eps.powf(-0.5);
        let (rho, z) = (0.01, 0.02);
        let expect = scale * profile.value(rho / eps, z / eps);
        let got = tspec.eval(&profile, rho, z);
        assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        // oversized scale is rejected
        assert!(TestFunctionSpec::new(&entire, graph, 10.0 * eps).is_err());
    }

    #[test]
    fn eval_grad_matches_finite_difference() {
        let entire = small_entire();
        let profile = ProfileEval::new(&entire);
        let graph = BoundaryGraph::new(-0.5, 0.45).unwrap();
        let eps = 0.004;
        let tspec = TestFunctionSpec::new(&entire, graph, eps).unwrap();
        for &(rho, z) in &[(0.01, 0.02), (0.15, 0.1), (0.3, 0.05)] {
            let (_, (gr, gz)) = tspec.eval_grad(&profile, rho, z);
            let h = 1e-6;
            let fr = (tspec.eval(&profile, rho + h, z) - tspec.eval(&profile, rho - h, z))
                / (2.0 * h);
            let fz = (tspec.eval(&profile, rho, z + h) - tspec.eval(&profile, rho, z - h))
                / (2.0 * h);
            // the gradient field and the value interpolant are independent
            // discretizations, so they agree only to interpolation accuracy
            let scale = gr.abs().max(gz.abs()).max(1.0);
            assert!(
                (gr - fr).abs() < 6e-2 * scale && (gz - fz).abs() < 6e-2 * scale,
                "gradient mismatch at ({rho},{z}): ({gr},{gz}) vs ({fr},{fz})"
            );
        }
    }

    #[test]
    fn perturbed_spec_guards() {
        let dom = AxisymmetricDomain::half_ball(4, 1.0).unwrap();
        assert!(perturbed_spec(4, 1.0, 2.5, dom).is_ok());
        assert!(perturbed_spec(3, 1.0, 2.5, dom).is_err());
        assert!(perturbed_spec(4, 1.0, 6.0, dom).is_err());
        assert!(perturbed_spec(4, 1.0, 1.5, dom).is_err());
    }

    #[test]
    fn bookkeeping_closes_algebraically() {
        let bubble = BubbleSpec::new(0.45, 64.0, 0.3).unwrap();
        let bk = concentration_bookkeeping(4, 1.0, 2.5, bubble).unwrap();
        // the stationary scale enforces C = A + B - P exactly
        let gap = (bk.c - (bk.a + bk.b - bk.p_term)).abs();
        assert!(gap <= 1e-8 * bk.c, "stationary identity violated: {gap}");
        // c_star = combination - P/(p+1)
        let expect = bk.combination - bk.p_term / 3.5;
        assert!((bk.c_star - expect).abs() <= 1e-10 * bk.c_star.abs().max(1.0));
        assert!(bk.c_star > 0.0);
    }

    #[test]
    fn bubble_spec_guards() {
        assert!(BubbleSpec::new(0.2, 4.0, 0.3).is_err());
        assert!(BubbleSpec::new(0.5, -1.0, 0.3).is_err());
        assert!(BubbleSpec::new(0.5, 4.0, 0.3).is_ok());
    }
}
