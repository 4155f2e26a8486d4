//! Exponent algebra, problem specification, and closed-form transforms:
//! critical exponents, subcritical offsets, blow-up scales, the
//! Caffarelli-Kohn-Nirenberg parameter map, Kelvin transforms and
//! moving-sphere weights.

use crate::error::{HsError, Result};
use crate::grid::{Grid2D, GridFunction};
use std::sync::Arc;

/// Hardy-Sobolev critical exponent `2*(s) = 2(N-s)/(N-2)`.
///
/// `2*(0)` is the Sobolev exponent `2N/(N-2)` and `2*(2) = 2` for every N.
pub fn critical_exponent(n: u32, s: f64) -> Result<f64> {
    if n < 3 {
        return Err(HsError::Parameter(format!("dimension N={n} must be >= 3")));
    }
    if !(0.0..=2.0).contains(&s) {
        return Err(HsError::Parameter(format!("exponent s={s} must lie in [0,2]")));
    }
    Ok(2.0 * (f64::from(n) - s) / (f64::from(n) - 2.0))
}

/// Subcritical pair `p1(eps) = 2*(s1)-1-eps`,
/// `p2(eps) = 2*(s2)-1-((2-s2)/(2-s1)) eps`.
///
/// The coupled offsets keep the two scaling laws of the blow-up length
/// compatible; both exponents stay > 1 exactly when `eps < 2*(s1)-2`.
pub fn subcritical_exponents(n: u32, s1: f64, s2: f64, eps: f64) -> Result<(f64, f64)> {
    if s1 <= s2 {
        return Err(HsError::Parameter(format!("need s1 > s2, got s1={s1}, s2={s2}")));
    }
    if eps < 0.0 {
        return Err(HsError::Parameter(format!("eps={eps} must be >= 0")));
    }
    let p1 = critical_exponent(n, s1)? - 1.0 - eps;
    let p2 = critical_exponent(n, s2)? - 1.0 - (2.0 - s2) / (2.0 - s1) * eps;
    if p1 <= 1.0 || p2 <= 1.0 {
        return Err(HsError::Parameter(format!(
            "effective exponents must stay > 1: p1(eps)={p1}, p2(eps)={p2}; require eps < 2*(s1)-2"
        )));
    }
    Ok((p1, p2))
}

/// Blow-up length `k = m^(-(p2(eps)-1)/(2-s2))` for a solution of height m.
///
/// Algebraically identical to `m^(-2/(N-2)+eps/(2-s1))`; both forms are
/// evaluated and must agree to 1e-12 relative.
pub fn blowup_scale(m: f64, n: u32, s1: f64, s2: f64, eps: f64) -> Result<f64> {
    if m <= 0.0 {
        return Err(HsError::Parameter(format!("peak height m={m} must be > 0")));
    }
    let (_, p2e) = subcritical_exponents(n, s1, s2, eps)?;
    let k_defining = m.powf(-(p2e - 1.0) / (2.0 - s2));
    let k_reduced = m.powf(-2.0 / (f64::from(n) - 2.0) + eps / (2.0 - s1));
    let denom = k_defining.abs().max(f64::MIN_POSITIVE);
    if (k_defining - k_reduced).abs() / denom > 1e-12 {
        return Err(HsError::InvariantViolation(format!(
            "blow-up scale identity failed: {k_defining:e} vs {k_reduced:e}"
        )));
    }
    Ok(k_defining)
}

/// Intermediate length `r = |x|^(s2/2) k^((2-s2)/2)` separating the
/// concentration core from the singular pole. Equals k when s2 = 0 or |x| = k.
pub fn intermediate_scale(abs_x: f64, k: f64, s2: f64) -> Result<f64> {
    if abs_x <= 0.0 || k <= 0.0 {
        return Err(HsError::Parameter(format!("need |x|>0 and k>0, got {abs_x}, {k}")));
    }
    Ok(abs_x.powf(s2 / 2.0) * k.powf((2.0 - s2) / 2.0))
}

/// Caffarelli-Kohn-Nirenberg weight parameters (a, b) with
/// `q = 2N/(N-2+2(b-a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CknParams {
    pub a: f64,
    pub b: f64,
    pub q: f64,
}

impl CknParams {
    pub fn new(a: f64, b: f64, n: u32) -> Result<Self> {
        if n < 3 {
            return Err(HsError::Parameter(format!("dimension N={n} must be >= 3")));
        }
        let nf = f64::from(n);
        // strict inequality in the inequality theory; the borderline
        // a = (N-2)/2 still has a well-defined parameter map and is kept
        if a > (nf - 2.0) / 2.0 {
            return Err(HsError::Parameter(format!("need a <= (N-2)/2, got a={a}")));
        }
        if b < a || b > a + 1.0 {
            return Err(HsError::Parameter(format!("need a <= b <= a+1, got a={a}, b={b}")));
        }
        let q = 2.0 * nf / (nf - 2.0 + 2.0 * (b - a));
        Ok(CknParams { a, b, q })
    }

    /// Map to the Hardy coefficient and weight exponent of the reduced
    /// problem: `lambda = a(N-2-a)`, `s = (b-a) q`.
    ///
    /// The case b = a+1 gives s = 2, a linear problem, and is excluded.
    pub fn hardy_params(&self, n: u32) -> Result<(f64, f64)> {
        if (self.b - self.a - 1.0).abs() < 1e-14 {
            return Err(HsError::ExcludedCase(
                "b = a+1 (s = 2) reduces to a linear problem and is excluded".into(),
            ));
        }
        let nf = f64::from(n);
        let lambda = self.a * (nf - 2.0 - self.a);
        let s = (self.b - self.a) * self.q;
        Ok((lambda, s))
    }
}

/// Moving-sphere probe: center `x_R = (0,...,0,-R)` below the half-space,
/// an inversion sphere of radius `sphere_radius > R`, and a direction with
/// vertical component `theta_n > 0`. The segment from `x_R` enters the
/// half-space at parameter `mu1 = R/theta_n`.
///
/// The inversion radius is called `sphere_radius` here; reusing the name of
/// the Hardy coefficient for it invites confusion.
#[derive(Debug, Clone, Copy)]
pub struct MovingSphereProbe {
    pub r_depth: f64,
    pub sphere_radius: f64,
    pub theta_n: f64,
}

impl MovingSphereProbe {
    pub fn new(r_depth: f64, sphere_radius: f64, theta_n: f64) -> Result<Self> {
        if r_depth <= 0.0 {
            return Err(HsError::Parameter(format!("center depth R={r_depth} must be > 0")));
        }
        if sphere_radius <= r_depth {
            return Err(HsError::Parameter(format!(
                "sphere radius {sphere_radius} must exceed the center depth {r_depth}"
            )));
        }
        if !(theta_n > 0.0 && theta_n <= 1.0) {
            return Err(HsError::Parameter(format!("theta_n={theta_n} must lie in (0,1]")));
        }
        Ok(MovingSphereProbe { r_depth, sphere_radius, theta_n })
    }

    /// Entry parameter `mu1 = R/theta_n` of the ray into the half-space.
    pub fn mu1(&self) -> f64 {
        self.r_depth / self.theta_n
    }

    /// Squared distance `|x_R + mu theta|^2 = mu^2 - 2 mu R theta_n + R^2`.
    fn segment_norm_sq(&self, mu: f64) -> f64 {
        mu * mu - 2.0 * mu * self.r_depth * self.theta_n + self.r_depth * self.r_depth
    }

    /// The sphere weight `eta(mu) = mu^2 / |x_R + mu theta|^2`,
    /// strictly decreasing on `(mu1, sphere_radius^2/R)`.
    pub fn weight(&self, mu: f64) -> Result<f64> {
        if mu <= self.mu1() {
            return Err(HsError::OutOfRange(format!(
                "mu={mu} must exceed mu1={}",
                self.mu1()
            )));
        }
        Ok(mu * mu / self.segment_norm_sq(mu))
    }

    /// Closed form of `eta'(mu)`: `|x_R + mu theta|^4 eta'(mu) = 2 mu R theta_n (mu1 - mu)`,
    /// manifestly <= 0 for mu > mu1. Exposed so tests can compare it with a
    /// finite-difference derivative.
    pub fn weight_derivative(&self, mu: f64) -> Result<f64> {
        if mu <= self.mu1() {
            return Err(HsError::OutOfRange(format!(
                "mu={mu} must exceed mu1={}",
                self.mu1()
            )));
        }
        let d2 = self.segment_norm_sq(mu);
        Ok(2.0 * mu * self.r_depth * self.theta_n * (self.mu1() - mu) / (d2 * d2))
    }

    /// Upper end of the admissible range, `sphere_radius^2 / R`.
    pub fn mu_upper(&self) -> f64 {
        self.sphere_radius * self.sphere_radius / self.r_depth
    }
}

/// Both sides of the sphere-weight comparison at a point `y` of the upper
/// half-space: returns (lhs, rhs) with
/// `lhs = (radius/|y-x_R|)^(2s) |x_R + radius^2 (y-x_R)/|y-x_R|^2|^(-s)` and
/// `rhs = |y|^(-s)`. For `y` inside the inversion ball and `radius > R` the
/// inequality `lhs <= rhs` holds.
pub fn sphere_weight_comparison(y: &[f64], r_depth: f64, radius: f64, s: f64) -> Result<(f64, f64)> {
    let n = y.len();
    if n < 2 {
        return Err(HsError::Parameter("point dimension must be >= 2".into()));
    }
    // x_R = (0,...,0,-R)
    let mut diff: Vec<f64> = y.to_vec();
    diff[n - 1] += r_depth;
    let dist = norm(&diff);
    if dist == 0.0 {
        return Err(HsError::SingularPoint("y coincides with the inversion center".into()));
    }
    let scale = radius * radius / (dist * dist);
    let mut image = vec![0.0; n];
    for i in 0..n {
        image[i] = diff[i] * scale;
    }
    image[n - 1] -= r_depth;
    let lhs = (radius / dist).powf(2.0 * s) * norm(&image).powf(-s);
    let rhs = norm(y).powf(-s);
    Ok((lhs, rhs))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// How the exponent of a nonlinear term is determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleExponent {
    /// `2*(s) - 1 - offset(eps)` with the coupled offset
    /// `offset = (2-s)/(2-s_ref) eps`, `s_ref = max_i s_i`.
    Critical,
    /// A fixed power, e.g. the subcritical perturbation `u^p`.
    Fixed(f64),
}

/// One nonlinear term `coeff * u^q / |x - P|^s` with the pole P on the
/// symmetry axis at height `center_z` (0 = the boundary origin).
#[derive(Debug, Clone, Copy)]
pub struct Pole {
    pub coeff: f64,
    pub s: f64,
    pub center_z: f64,
    pub exponent: PoleExponent,
}

impl Pole {
    pub fn critical(coeff: f64, s: f64) -> Self {
        Pole { coeff, s, center_z: 0.0, exponent: PoleExponent::Critical }
    }

    pub fn fixed(coeff: f64, s: f64, p: f64) -> Self {
        Pole { coeff, s, center_z: 0.0, exponent: PoleExponent::Fixed(p) }
    }
}

/// Critical exponent pairs of the two-pole problem, with and without the
/// subcritical offset.
#[derive(Debug, Clone, Copy)]
pub struct ExponentSet {
    pub two_star_1: f64,
    pub two_star_2: f64,
    pub p1: f64,
    pub p2: f64,
    pub p1_eps: f64,
    pub p2_eps: f64,
}

/// Full problem description: dimension, nonlinear terms, subcritical offset
/// and domain. Values are immutable after construction and safe to share.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub n: u32,
    pub poles: Vec<Pole>,
    pub epsilon: f64,
    pub domain: crate::grid::AxisymmetricDomain,
}

impl ProblemSpec {
    /// The standard two-pole problem
    /// `Δu + λ u^(p1(eps))/|x|^s1 + u^(p2(eps))/|x|^s2 = 0`.
    pub fn two_pole(
        n: u32,
        s1: f64,
        s2: f64,
        lambda: f64,
        epsilon: f64,
        domain: crate::grid::AxisymmetricDomain,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            n,
            poles: vec![Pole::critical(lambda, s1), Pole::critical(1.0, s2)],
            epsilon,
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(HsError::Parameter(format!("dimension N={} must be >= 3", self.n)));
        }
        if self.poles.is_empty() {
            return Err(HsError::Parameter("at least one nonlinear term is required".into()));
        }
        if self.epsilon < 0.0 {
            return Err(HsError::Parameter(format!("eps={} must be >= 0", self.epsilon)));
        }
        for pole in &self.poles {
            if !(0.0..=2.0).contains(&pole.s) {
                return Err(HsError::Parameter(format!("pole exponent s={} not in [0,2]", pole.s)));
            }
            if pole.center_z < 0.0 {
                return Err(HsError::Parameter(format!(
                    "pole height {} must be >= 0 (on the axis, in the closed half-space)",
                    pole.center_z
                )));
            }
            if pole.s >= 2.0 && pole.center_z == 0.0 && pole.coeff != 0.0 {
                return Err(HsError::Integrability(
                    "s = 2 with the pole on the boundary is not integrable here".into(),
                ));
            }
        }
        for i in 0..self.poles.len() {
            let q = self.pole_power(i)?;
            if q <= 1.0 {
                return Err(HsError::Parameter(format!(
                    "effective exponent {q} of pole {i} must stay > 1 (eps too large?)"
                )));
            }
        }
        Ok(())
    }

    /// Largest weight exponent among critical poles; reference for the
    /// coupled subcritical offsets.
    pub fn s_ref(&self) -> f64 {
        self.poles
            .iter()
            .filter(|p| p.exponent == PoleExponent::Critical)
            .map(|p| p.s)
            .fold(0.0, f64::max)
    }

    /// Effective power of pole `i` at the spec's offset.
    pub fn pole_power(&self, i: usize) -> Result<f64> {
        let pole = &self.poles[i];
        match pole.exponent {
            PoleExponent::Fixed(p) => Ok(p),
            PoleExponent::Critical => {
                let crit = critical_exponent(self.n, pole.s)? - 1.0;
                let offset = if self.epsilon == 0.0 {
                    0.0
                } else {
                    (2.0 - pole.s) / (2.0 - self.s_ref()) * self.epsilon
                };
                Ok(crit - offset)
            }
        }
    }

    /// All effective powers.
    pub fn pole_powers(&self) -> Result<Vec<f64>> {
        (0..self.poles.len()).map(|i| self.pole_power(i)).collect()
    }

    /// Same spec with a different offset (domain and poles shared).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut spec = self.clone();
        spec.epsilon = epsilon;
        spec.validate()?;
        Ok(spec)
    }

    /// Exponent bookkeeping for the two-pole problem.
    pub fn exponent_set(&self) -> Result<ExponentSet> {
        if self.poles.len() != 2 {
            return Err(HsError::Parameter(format!(
                "exponent set requires the two-pole form, got {} poles",
                self.poles.len()
            )));
        }
        let (s1, s2) = (self.poles[0].s, self.poles[1].s);
        let t1 = critical_exponent(self.n, s1)?;
        let t2 = critical_exponent(self.n, s2)?;
        let (p1e, p2e) = subcritical_exponents(self.n, s1, s2, self.epsilon)?;
        Ok(ExponentSet {
            two_star_1: t1,
            two_star_2: t2,
            p1: t1 - 1.0,
            p2: t2 - 1.0,
            p1_eps: p1e,
            p2_eps: p2e,
        })
    }
}

/// How the Kelvin transform treats preimages outside the source grid.
#[derive(Debug, Clone, Copy)]
pub enum KelvinTail {
    /// Use zero (fields of compact support).
    Zero,
    /// Extrapolate with the fitted far-field model `d * z * |y|^(-N)`.
    Model { d: f64 },
    /// Fail if any preimage leaves the grid.
    Strict,
}

/// Kelvin transform of an axisymmetric field with respect to the sphere of
/// the given radius centered at `(rho=0, z=center_z)`:
///
/// `K[u](y) = (radius/|y-c|)^(N-2) u(c + radius^2 (y-c)/|y-c|^2)`.
///
/// The result is sampled on `target`; preimages that leave the source grid
/// are handled per `tail`. Evaluation at the center is singular.
pub fn kelvin_transform(
    u: &GridFunction,
    center_z: f64,
    radius: f64,
    target: &Arc<Grid2D>,
    tail: KelvinTail,
) -> Result<GridFunction> {
    if radius <= 0.0 {
        return Err(HsError::Parameter(format!("inversion radius {radius} must be > 0")));
    }
    let n = u.grid.domain.n;
    let power = f64::from(n) - 2.0;
    let src = &u.grid;
    let margin = 1e-7 * src.domain.r_max;
    let mut out = vec![0.0; target.node_count()];
    let mut escaped = 0usize;
    for (idx, (rho, z)) in target.nodes().enumerate() {
        let dz = z - center_z;
        let dist2 = rho * rho + dz * dz;
        if dist2 == 0.0 {
            return Err(HsError::SingularPoint(
                "Kelvin transform evaluated at the inversion center".into(),
            ));
        }
        let scale = radius * radius / dist2;
        let (pr, pz) = (rho * scale, center_z + dz * scale);
        let factor = (radius / dist2.sqrt()).powf(power);
        let val = if src.in_box_margin(pr, pz, margin) {
            u.interpolate(pr, pz)
        } else {
            match tail {
                KelvinTail::Zero => 0.0,
                KelvinTail::Model { d } => {
                    let r = (pr * pr + pz * pz).sqrt();
                    d * pz.max(0.0) * r.powi(-(n as i32))
                }
                KelvinTail::Strict => {
                    escaped += 1;
                    0.0
                }
            }
        };
        out[idx] = factor * val;
    }
    if escaped > 0 {
        return Err(HsError::OutOfRange(format!(
            "{escaped} Kelvin preimages left the source grid (strict tail policy)"
        )));
    }
    Ok(GridFunction::from_values(Arc::clone(target), out))
}
