//! Least-energy solver: preconditioned descent on the ray-reduced energy
//! `E(u) = Phi(t*(u) u)` over nonnegative fields, subcritical continuation
//! in the offset, and blow-up detection with the concentration rescaling.
//!
//! The minimax level reduces to an infimum over rays, so descent on the
//! Nehari-rescaled energy computes the least-energy level exactly. Each
//! accepted step projects onto the nonnegative cone and rescales back onto
//! the Nehari set; the H1 preconditioner is one banded Cholesky solve with
//! the fixed stiffness matrix, shared across a whole continuation.

use crate::error::{HsError, Result};
use crate::functional::{Assembler, EnergyBreakdown};
use crate::grid::{dot, stiffness, AxisymmetricDomain, BandCholesky, Grid2D, GridFunction};
use crate::model::{blowup_scale, ProblemSpec};
use crate::oracle;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative H^(-1) gradient tolerance.
    pub tol_grad: f64,
    pub max_iter: usize,
    /// Blow-up threshold: m must exceed this multiple of its value at the
    /// largest offset, sustained over `blowup_sustained` steps.
    pub blowup_factor: f64,
    pub blowup_sustained: usize,
    /// Relative level-convergence tolerance for the Compact verdict.
    pub level_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_grad: 1e-7,
            max_iter: 4000,
            blowup_factor: 50.0,
            blowup_sustained: 3,
            level_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Converged minimax level (energy at the solution).
    pub c_level: f64,
    pub iterations: usize,
    /// Relative H^(-1) norm of the gradient at exit.
    pub grad_norm: f64,
    /// Peak value of the solution.
    pub m: f64,
    /// Location (rho, z) of the peak.
    pub argmax: (f64, f64),
    /// Blow-up length of the peak (two-pole problems; NaN otherwise).
    pub k: f64,
    pub converged: bool,
    pub energy: EnergyBreakdown,
}

/// Reusable solve machinery: assembler plus the factorized stiffness.
/// Changing the subcritical offset keeps both.
pub struct Solver {
    pub asm: Assembler,
    chol: BandCholesky,
}

impl Solver {
    pub fn new(spec: ProblemSpec, grid: Arc<Grid2D>) -> Result<Self> {
        let asm = Assembler::new(spec, Arc::clone(&grid))?;
        let chol = stiffness(&grid)?.cholesky()?;
        Ok(Solver { asm, chol })
    }

    pub fn set_epsilon(&mut self, eps: f64) -> Result<()> {
        let spec = self.asm.spec.with_epsilon(eps)?;
        // masses and stiffness are offset-independent; rebuild only powers
        self.asm = Assembler::new(spec, Arc::clone(&self.asm.grid))?;
        Ok(())
    }

    /// Default initial guess: truncated bubble at depth r_max/4 on the axis.
    pub fn default_init(&self) -> Result<GridFunction> {
        let grid = &self.asm.grid;
        let depth = grid.domain.r_max / 4.0;
        let mu = 4.0 / depth;
        Ok(oracle::bubble(self.asm.spec.n, mu, depth, grid)?.masked())
    }

    /// Descent on the ray-reduced energy. Requires a subcritical offset
    /// (the critical problem has no minimizer on bounded domains).
    pub fn minimize(
        &self,
        init: &GridFunction,
        opts: &SolveOptions,
    ) -> Result<(GridFunction, SolveReport)> {
        if self.asm.spec.epsilon <= 0.0 {
            return Err(HsError::Parameter(
                "minimize requires a positive subcritical offset".into(),
            ));
        }
        let mut u = positive_part(init).masked();
        if u.dirichlet_energy() <= 0.0 {
            return Err(HsError::Parameter("initial guess must be nonnegative and nonzero".into()));
        }
        u = self.asm.to_nehari(&u)?;
        let mut e = self.asm.phi(&u);
        let mut tau = 1.0f64;
        let mut iterations = 0usize;
        let mut grad_rel = f64::INFINITY;
        let mut converged = false;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (u, g)
        for iter in 0..opts.max_iter {
            let g = self.asm.gradient(&u);
            let d = self.chol.solve(&g.values);
            let gnorm2 = dot(&g.values, &d).max(0.0);
            let a = u.dirichlet_energy();
            grad_rel = (gnorm2 / a.max(1e-300)).sqrt();
            iterations = iter;
            if grad_rel <= opts.tol_grad {
                converged = true;
                break;
            }
            // Barzilai-Borwein step in the preconditioned metric:
            // tau = <s, y> / <y, K^{-1} y> with s = du, y = dg
            if let Some((pu, pg)) = &prev {
                let s: Vec<f64> = u.values.iter().zip(pu.iter()).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.values.iter().zip(pg.iter()).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                let ymy = dot(&y, &self.chol.solve(&y));
                if sy > 0.0 && ymy > 0.0 {
                    tau = (sy / ymy).clamp(1e-3, 1e3);
                }
            }
            prev = Some((u.values.clone(), g.values.clone()));
            // monotone backtracking line search on the rescaled projected step
            let mut accepted = false;
            while tau > 1e-13 {
                let cand: Vec<f64> = u
                    .values
                    .iter()
                    .zip(d.iter())
                    .map(|(v, dv)| (v - tau * dv).max(0.0))
                    .collect();
                let cand = GridFunction::from_values(Arc::clone(&self.asm.grid), cand).masked();
                if cand.dirichlet_energy() <= 0.0 {
                    tau *= 0.5;
                    continue;
                }
                let cand = match self.asm.to_nehari(&cand) {
                    Ok(c) => c,
                    Err(HsError::NonUniqueNehari(m)) => return Err(HsError::NonUniqueNehari(m)),
                    Err(_) => {
                        tau *= 0.5;
                        continue;
                    }
                };
                let e_new = self.asm.phi(&cand);
                if e_new <= e - 1e-4 * tau * gnorm2 {
                    u = cand;
                    e = e_new;
                    accepted = true;
                    break;
                }
                tau *= 0.5;
            }
            if e <= 0.0 {
                return Err(HsError::Diagnostics(format!(
                    "ray-maximum energy turned nonpositive ({e:e}); the discretization is corrupt"
                )));
            }
            if !accepted {
                break; // line-search stall; report non-converged state
            }
        }
        let report = self.report(&u, iterations, grad_rel, converged)?;
        Ok((u, report))
    }

    fn report(
        &self,
        u: &GridFunction,
        iterations: usize,
        grad_norm: f64,
        converged: bool,
    ) -> Result<SolveReport> {
        let energy = self.asm.energy(u);
        let m = u.max_value().max(0.0);
        let argmax = u.argmax();
        let k = match (self.asm.spec.poles.len(), m > 0.0) {
            (2, true) => {
                let s1 = self.asm.spec.poles[0].s;
                let s2 = self.asm.spec.poles[1].s;
                blowup_scale(m, self.asm.spec.n, s1, s2, self.asm.spec.epsilon).unwrap_or(f64::NAN)
            }
            _ => f64::NAN,
        };
        Ok(SolveReport {
            c_level: energy.phi,
            iterations,
            grad_norm,
            m,
            argmax,
            k,
            converged,
            energy,
        })
    }
}

fn positive_part(u: &GridFunction) -> GridFunction {
    GridFunction::from_values(
        Arc::clone(&u.grid),
        u.values.iter().map(|v| v.max(0.0)).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Compact,
    BlowUp,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Compact => "Compact",
            Verdict::BlowUp => "BlowUp",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuationStep {
    pub epsilon: f64,
    pub c_level: f64,
    pub m: f64,
    pub abs_x: f64,
    pub k: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// sup-difference of successive rescaled peak profiles (concentration
    /// Cauchy diagnostic); NaN on the first step.
    pub rescale_diff: f64,
}

#[derive(Debug)]
pub struct ContinuationTrace {
    pub steps: Vec<ContinuationStep>,
    pub verdict: Verdict,
    /// Final solution at the smallest offset.
    pub last: Option<(GridFunction, SolveReport)>,
}

/// Warm-started solves along a decreasing offset schedule.
///
/// Verdicts: `BlowUp` needs the peak rising monotonically over the final
/// `blowup_sustained` steps and past `blowup_factor` times its first value;
/// `Compact` needs bounded peaks and a converged level; anything else
/// (including a single-step schedule or a failed solve) is `Inconclusive`.
/// The peak location is logged through `abs_x` but does not gate the
/// verdict: interior concentration is a legitimate blow-up mode.
pub fn continuation(
    solver: &mut Solver,
    schedule: &[f64],
    opts: &SolveOptions,
) -> Result<ContinuationTrace> {
    if schedule.is_empty() {
        return Err(HsError::Parameter("empty continuation schedule".into()));
    }
    for w in schedule.windows(2) {
        if w[1] >= w[0] {
            return Err(HsError::Parameter("schedule must be strictly decreasing".into()));
        }
    }
    if *schedule.last().unwrap() <= 0.0 {
        return Err(HsError::Parameter("schedule floor must stay positive".into()));
    }
    let mut steps = Vec::with_capacity(schedule.len());
    let mut warm: Option<GridFunction> = None;
    let mut last: Option<(GridFunction, SolveReport)> = None;
    let mut prev_rescale: Option<GridFunction> = None;
    let mut all_converged = true;
    for &eps in schedule {
        solver.set_epsilon(eps)?;
        let init = match &warm {
            Some(u) => u.clone(),
            None => solver.default_init()?,
        };
        let (u, report) = solver.minimize(&init, opts)?;
        all_converged &= report.converged;
        let abs_x = (report.argmax.0.powi(2) + report.argmax.1.powi(2)).sqrt();
        let rescale_diff = if report.converged && report.m > 0.0 {
            let resc = blowup_rescale(&u, &report, &solver.asm.spec)?;
            let diff = match &prev_rescale {
                Some(prev) => prev
                    .values
                    .iter()
                    .zip(resc.values.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max),
                None => f64::NAN,
            };
            prev_rescale = Some(resc);
            diff
        } else {
            f64::NAN
        };
        steps.push(ContinuationStep {
            epsilon: eps,
            c_level: report.c_level,
            m: report.m,
            abs_x,
            k: report.k,
            grad_norm: report.grad_norm,
            converged: report.converged,
            rescale_diff,
        });
        warm = Some(u.clone());
        last = Some((u, report));
    }
    let verdict = classify(&steps, all_converged, opts);
    Ok(ContinuationTrace { steps, verdict, last })
}

fn classify(steps: &[ContinuationStep], all_converged: bool, opts: &SolveOptions) -> Verdict {
    if !all_converged || steps.len() < 2 {
        return Verdict::Inconclusive;
    }
    let m_first = steps[0].m;
    let m_last = steps.last().unwrap().m;
    let window = opts.blowup_sustained.max(2);
    let grew = steps.len() > window
        && steps[steps.len() - window - 1..]
            .windows(2)
            .all(|w| w[1].m > w[0].m)
        && m_last > opts.blowup_factor * m_first;
    if grew {
        return Verdict::BlowUp;
    }
    let bounded = steps.iter().all(|s| s.m <= opts.blowup_factor * m_first);
    let c_last = steps[steps.len() - 1].c_level;
    let c_prev = steps[steps.len() - 2].c_level;
    let level_settled = (c_last - c_prev).abs() <= opts.level_tol * c_last.abs().max(1e-12);
    if bounded && level_settled {
        Verdict::Compact
    } else {
        Verdict::Inconclusive
    }
}

/// Rescaled peak profile `v(y) = u(x_peak + k y) / m` on a fixed reference
/// window, peak value 1 at the window center `(0, Y/2)`.
pub fn blowup_rescale(
    u: &GridFunction,
    report: &SolveReport,
    spec: &ProblemSpec,
) -> Result<GridFunction> {
    if report.m <= 0.0 {
        return Err(HsError::Scale("peak value must be positive to rescale".into()));
    }
    let k = if report.k.is_finite() { report.k } else { 1.0 };
    if k <= 0.0 || !k.is_finite() {
        return Err(HsError::Scale(format!("blow-up scale {k} under/overflowed")));
    }
    let extent = 8.0;
    let dom = AxisymmetricDomain::truncated_half_space(spec.n, extent)?;
    let grid = Grid2D::build(dom, 32, 32, 1.0)?;
    let (pr, pz) = report.argmax;
    let m = report.m;
    let values = grid
        .nodes()
        .map(|(yr, yz)| u.interpolate(pr + k * yr, pz + k * (yz - extent / 2.0)) / m)
        .collect();
    Ok(GridFunction::from_values(grid, values))
}

/// Lower bound on the Dirichlet norm of critical points from the
/// whole-space Hardy-Sobolev embedding chain: solves `x = sum_i k_i x^(a_i)`
/// over the positive-coefficient poles. Returns the level lower bound
/// `(1/2 - 1/(q1+1)) x` alongside the norm bound `x`.
pub fn norm_lower_bound(asm: &Assembler) -> Result<(f64, f64)> {
    let spec = &asm.spec;
    let mut terms: Vec<(f64, f64)> = Vec::new(); // (k_i, a_i)
    for (i, pole) in spec.poles.iter().enumerate() {
        if pole.coeff == 0.0 {
            continue;
        }
        let c = pole.coeff.abs();
        let two_star = crate::model::critical_exponent(spec.n, pole.s)?;
        let q = asm.powers()[i];
        let theta = (q + 1.0) / two_star;
        if !(0.0..=1.0).contains(&theta) {
            continue;
        }
        let s_const = hardy_sobolev_embedding_constant(spec.n, pole.s)?;
        let m_s: f64 = asm.grid.weighted_mass(pole.s, pole.center_z)?.iter().sum();
        let k_i = c * s_const.powf(-theta * two_star / 2.0) * m_s.powf(1.0 - theta);
        let a_i = theta * two_star / 2.0;
        if a_i <= 1.0 {
            return Err(HsError::Parameter(
                "embedding chain needs superquadratic powers".into(),
            ));
        }
        terms.push((k_i, a_i));
    }
    if terms.is_empty() {
        return Err(HsError::Parameter("no active poles for the norm bound".into()));
    }
    let f = |x: f64| -> f64 { terms.iter().map(|(k, a)| k * x.powf(*a)).sum::<f64>() - x };
    // smallest positive root of f: below it the Nehari identity cannot hold
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while f(hi) < 0.0 && hi < 1e12 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let q1 = asm.powers()[0];
    Ok(((0.5 - 1.0 / (q1 + 1.0)) * x, x))
}

/// Whole-space Hardy-Sobolev constant (interior pole, no linear term) via
/// the Rayleigh quotient of the certified radial extremal.
pub fn hardy_sobolev_embedding_constant(n: u32, s: f64) -> Result<f64> {
    let nf = f64::from(n);
    if s == 0.0 {
        return Ok(oracle::sobolev_constant(n)?.best());
    }
    let a = oracle::hardy_sobolev_norm(n, s)?;
    let k = (nf - 2.0) / (2.0 - s);
    let u = move |r: f64| a * (1.0 + r.powf(2.0 - s)).powf(-k);
    let up = move |r: f64| {
        -a * k * (2.0 - s) * r.powf(1.0 - s) * (1.0 + r.powf(2.0 - s)).powf(-k - 1.0)
    };
    let two_star = crate::model::critical_exponent(n, s)?;
    let area = crate::grid::unit_sphere_area(n);
    let tol = 1e-11;
    let num_int = |r: f64| up(r) * up(r) * r.powf(nf - 1.0);
    let den_int = |r: f64| u(r).powf(two_star) * r.powf(nf - 1.0 - s);
    let num = oracle::quad1d::integrate(&num_int, 0.0, 1.0, tol)
        + oracle::quad1d::integrate_to_inf(&num_int, 1.0, tol);
    let den = oracle::quad1d::integrate(&den_int, 0.0, 1.0, tol)
        + oracle::quad1d::integrate_to_inf(&den_int, 1.0, tol);
    Ok(area * num / (area * den).powf(2.0 / two_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainKind;

    fn small_solver(lambda: f64, s1: f64, s2: f64, eps: f64) -> Solver {
        let dom = AxisymmetricDomain::new(DomainKind::HalfBallFlat, 3, 1.0).unwrap();
        let grid = Grid2D::build(dom, 48, 48, 2.0).unwrap();
        let spec = ProblemSpec::two_pole(3, s1, s2, lambda, eps, dom).unwrap();
        Solver::new(spec, grid).unwrap()
    }

    #[test]
    fn minimize_converges_on_small_grid() {
        let solver = small_solver(-1.0, 1.5, 0.5, 0.25);
        let init = solver.default_init().unwrap();
        let opts = SolveOptions { max_iter: 2000, tol_grad: 1e-7, ..Default::default() };
        let (u, report) = solver.minimize(&init, &opts).unwrap();
        assert!(report.converged, "no convergence: grad {}", report.grad_norm);
        assert!(report.c_level > 0.0);
        // Nehari residual is tiny after the final rescale
        assert!(
            report.energy.nehari.abs() <= 1e-9 * report.energy.a.max(report.energy.b[1]),
            "nehari {}",
            report.energy.nehari
        );
        assert!(u.values.iter().all(|&v| v >= 0.0));
        // fixed point: restarting from the solution takes no further steps
        let (_, report2) = solver.minimize(&u, &opts).unwrap();
        assert_eq!(report2.iterations, 0);
        assert!((report2.c_level - report.c_level).abs() <= 1e-9 * report.c_level);
    }

    #[test]
    fn minimize_rejects_critical_offset() {
        let solver = small_solver(-1.0, 1.5, 0.5, 0.0);
        let init = solver.default_init().unwrap();
        assert!(solver.minimize(&init, &SolveOptions::default()).is_err());
    }

    #[test]
    fn init_independence() {
        let solver = small_solver(0.5, 1.5, 0.5, 0.3);
        let opts = SolveOptions { max_iter: 3000, tol_grad: 1e-7, ..Default::default() };
        let (_, r1) = solver.minimize(&solver.default_init().unwrap(), &opts).unwrap();
        // a deliberately different admissible start
        let other = GridFunction::sample(Arc::clone(&solver.asm.grid), |rho, z| {
            z * (1.0 - rho * rho - z * z).max(0.0) * (1.0 + rho)
        })
        .masked();
        let (_, r2) = solver.minimize(&other, &opts).unwrap();
        assert!(r1.converged && r2.converged);
        assert!(
            (r1.c_level - r2.c_level).abs() <= 1e-5 * r1.c_level,
            "levels {} vs {}",
            r1.c_level,
            r2.c_level
        );
    }

    #[test]
    fn continuation_trace_and_rescale() {
        let mut solver = small_solver(-1.0, 1.5, 0.5, 0.3);
        let schedule = [0.3, 0.22, 0.16];
        let opts = SolveOptions { max_iter: 2500, tol_grad: 3e-7, ..Default::default() };
        let trace = continuation(&mut solver, &schedule, &opts).unwrap();
        assert_eq!(trace.steps.len(), 3);
        assert!(trace.steps.iter().all(|s| s.converged));
        // rescaled peak is 1 at the window center
        let (u, report) = trace.last.as_ref().unwrap();
        let resc = blowup_rescale(u, report, &solver.asm.spec).unwrap();
        let peak = resc.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - 1.0).abs() <= 1e-3, "rescaled peak {peak}");
        assert!(resc.values.iter().all(|&v| v <= 1.0 + 1e-9));
    }

    #[test]
    fn single_step_schedule_inconclusive() {
        let mut solver = small_solver(-1.0, 1.5, 0.5, 0.3);
        let trace = continuation(&mut solver, &[0.3], &SolveOptions::default()).unwrap();
        assert_eq!(trace.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn rescale_identity_case() {
        // profile already on the reference window with m=1, k=1 at center
        let dom = AxisymmetricDomain::truncated_half_space(3, 8.0).unwrap();
        let grid = Grid2D::build(dom, 32, 32, 1.0).unwrap();
        let u = GridFunction::sample(Arc::clone(&grid), |r, z| {
            let d2 = r * r + (z - 4.0) * (z - 4.0);
            1.0 / (1.0 + d2)
        });
        let spec = ProblemSpec::two_pole(3, 1.5, 0.5, 0.0, 0.0, dom).unwrap();
        let report = SolveReport {
            c_level: 0.0,
            iterations: 0,
            grad_norm: 0.0,
            m: 1.0,
            argmax: (0.0, 4.0),
            k: 1.0,
            converged: true,
            energy: EnergyBreakdown {
                a: 1.0,
                b: vec![0.0, 0.0],
                phi: 0.0,
                nehari: 0.0,
                pohozaev: 0.0,
                boundary_term: 0.0,
                star_shaped: true,
            },
        };
        let resc = blowup_rescale(&u, &report, &spec).unwrap();
        for (a, b) in u.values.iter().zip(resc.values.iter()) {
            assert!((a - b).abs() <= 1e-12, "identity rescale mismatch");
        }
    }

    #[test]
    fn norm_bound_positive_and_respected() {
        let solver = small_solver(-1.0, 1.5, 0.5, 0.25);
        let (c_bound, a_bound) = norm_lower_bound(&solver.asm).unwrap();
        assert!(c_bound > 0.0 && a_bound > 0.0);
        let (_, report) = solver
            .minimize(&solver.default_init().unwrap(), &SolveOptions::default())
            .unwrap();
        assert!(report.energy.a >= a_bound * (1.0 - 1e-9), "A={} bound={a_bound}", report.energy.a);
        assert!(report.c_level >= c_bound * (1.0 - 1e-9));
    }

    #[test]
    fn embedding_constant_matches_sobolev_at_s_zero() {
        let s0 = hardy_sobolev_embedding_constant(3, 0.0).unwrap();
        let s_n = oracle::sobolev_constant(3).unwrap().best();
        assert!((s0 - s_n).abs() < 1e-10 * s_n);
        // s > 0 constant is positive and finite
        let s1 = hardy_sobolev_embedding_constant(3, 1.0).unwrap();
        assert!(s1 > 0.0 && s1.is_finite());
    }
}
