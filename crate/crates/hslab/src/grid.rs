//! Axisymmetric domains with the singular point at the boundary origin,
//! graded tensor grids, weighted quadrature and discrete operators.
//!
//! Fields depend only on (rho, z) = (|x'|, x_N); the measure carries the
//! factor |S^(N-2)| rho^(N-2). Grids are immutable after construction and
//! all quadrature loops run in a fixed order, so results are deterministic.

use crate::error::{HsError, Result};
use std::fmt::Write as _;
use std::sync::Arc;

/// Quadratic boundary graph `z = alpha rho^2` with flattening chart of
/// radius `cutoff_radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryGraph {
    pub alpha: f64,
    pub cutoff_radius: f64,
}

impl BoundaryGraph {
    pub fn new(alpha: f64, cutoff_radius: f64) -> Result<Self> {
        if cutoff_radius <= 0.0 {
            return Err(HsError::Parameter(format!(
                "chart radius {cutoff_radius} must be > 0"
            )));
        }
        if alpha.abs() * cutoff_radius >= 0.5 {
            return Err(HsError::Parameter(format!(
                "|alpha| * r0 = {} must stay below 1/2 for the chart to be a diffeomorphism",
                alpha.abs() * cutoff_radius
            )));
        }
        Ok(BoundaryGraph { alpha, cutoff_radius })
    }

    pub fn height(&self, rho: f64) -> f64 {
        self.alpha * rho * rho
    }

    /// Boundary-flattening map `(rho, z) -> (rho, z - alpha rho^2)`.
    pub fn flatten(&self, rho: f64, z: f64) -> Result<(f64, f64)> {
        if rho.abs() >= self.cutoff_radius {
            return Err(HsError::Chart(format!(
                "rho={rho} outside the chart radius {}",
                self.cutoff_radius
            )));
        }
        Ok((rho, z - self.height(rho)))
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(&self, rho: f64, y_z: f64) -> Result<(f64, f64)> {
        if rho.abs() >= self.cutoff_radius {
            return Err(HsError::Chart(format!(
                "rho={rho} outside the chart radius {}",
                self.cutoff_radius
            )));
        }
        Ok((rho, y_z + self.height(rho)))
    }
}

/// Mean curvature of the graph at the origin under the equal-coefficient
/// restriction, normalized so that a graph `sum alpha_i y_i^2` has
/// `H(0) = (sum alpha_i)/(N-1)`, i.e. `H(0) = alpha` here.
///
/// Convention note: the outer normal at the origin is `-e_N` and the
/// normalization is the one that makes the Dirichlet-energy expansion of a
/// concentrated test profile carry the factor `H(0) K1` at first order in
/// the concentration scale (K1 the boundary-derivative moment). It differs
/// from the classical mean curvature of the graph by a factor 2; the tests
/// pin the convention numerically through that expansion rather than by
/// prose.
pub fn mean_curvature(graph: &BoundaryGraph, _n: u32) -> f64 {
    graph.alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// Quarter-disc truncation of the upper half-space; the arc is an
    /// artificial Dirichlet cut.
    TruncatedHalfSpace,
    /// Half-ball with flat boundary piece through the origin; a genuine
    /// bounded domain, star-shaped about the origin.
    HalfBallFlat,
    /// Bounded cap above the graph `z = alpha rho^2`, truncated by the
    /// sphere of radius `r_max`.
    CurvedCap(BoundaryGraph),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymmetricDomain {
    pub kind: DomainKind,
    pub n: u32,
    pub r_max: f64,
}

impl AxisymmetricDomain {
    pub fn new(kind: DomainKind, n: u32, r_max: f64) -> Result<Self> {
        if n < 3 {
            return Err(HsError::Parameter(format!("dimension N={n} must be >= 3")));
        }
        if r_max <= 0.0 {
            return Err(HsError::Parameter(format!("r_max={r_max} must be > 0")));
        }
        Ok(AxisymmetricDomain { kind, n, r_max })
    }

    pub fn half_ball(n: u32, r_max: f64) -> Result<Self> {
        Self::new(DomainKind::HalfBallFlat, n, r_max)
    }

    pub fn truncated_half_space(n: u32, r_max: f64) -> Result<Self> {
        Self::new(DomainKind::TruncatedHalfSpace, n, r_max)
    }

    pub fn curved_cap(n: u32, r_max: f64, graph: BoundaryGraph) -> Result<Self> {
        Self::new(DomainKind::CurvedCap(graph), n, r_max)
    }

    pub fn graph(&self) -> Option<&BoundaryGraph> {
        match &self.kind {
            DomainKind::CurvedCap(g) => Some(g),
            _ => None,
        }
    }

    /// Vertical slice of the domain at the given rho, as (z_low, z_high),
    /// or None when the column misses the domain.
    pub fn slice(&self, rho: f64) -> Option<(f64, f64)> {
        let disc = self.r_max * self.r_max - rho * rho;
        if disc <= 0.0 {
            return None;
        }
        let arc = disc.sqrt();
        let lo = match &self.kind {
            DomainKind::TruncatedHalfSpace | DomainKind::HalfBallFlat => 0.0,
            DomainKind::CurvedCap(g) => g.height(rho).max(-arc),
        };
        if arc - lo <= 0.0 {
            None
        } else {
            Some((lo, arc))
        }
    }

    pub fn contains(&self, rho: f64, z: f64) -> bool {
        match self.slice(rho) {
            Some((lo, hi)) => z > lo && z < hi,
            None => false,
        }
    }

    /// Lowest z reached by the domain (negative for caps with alpha < 0).
    pub fn z_lower_bound(&self) -> f64 {
        match &self.kind {
            DomainKind::TruncatedHalfSpace | DomainKind::HalfBallFlat => 0.0,
            DomainKind::CurvedCap(g) => {
                if g.alpha >= 0.0 {
                    0.0
                } else {
                    let a2 = g.alpha * g.alpha;
                    let r2 = self.r_max * self.r_max;
                    let rho_star_sq = ((1.0 + 4.0 * a2 * r2).sqrt() - 1.0) / (2.0 * a2);
                    g.alpha * rho_star_sq
                }
            }
        }
    }

    /// x . nu >= 0 on the whole boundary (Pohozaev multiplier sign).
    pub fn star_shaped(&self) -> bool {
        match &self.kind {
            DomainKind::TruncatedHalfSpace | DomainKind::HalfBallFlat => true,
            DomainKind::CurvedCap(g) => g.alpha == 0.0,
        }
    }

    fn kind_tag(&self) -> &'static str {
        match self.kind {
            DomainKind::TruncatedHalfSpace => "halfspace",
            DomainKind::HalfBallFlat => "halfball",
            DomainKind::CurvedCap(_) => "curvedcap",
        }
    }
}

/// Surface area of the unit sphere S^(d-1).
pub fn unit_sphere_area(d: u32) -> f64 {
    let df = f64::from(d);
    2.0 * std::f64::consts::PI.powf(df / 2.0) / gamma_half_int(d)
}

/// Gamma(k/2) for integer k >= 1, exact up to rounding.
pub fn gamma_half_int(k: u32) -> f64 {
    // Walk up from Gamma(1/2) = sqrt(pi) or Gamma(1) = 1.
    let mut x = if k % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut arg = if k % 2 == 0 { 2 } else { 1 };
    while arg + 2 <= k {
        x *= f64::from(arg) / 2.0;
        arg += 2;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// Dirichlet node: on the boundary or outside the domain.
    Dirichlet,
}

/// Graded monotone axis from `a` to `b` with nodes clustered at `center`.
pub fn graded_axis(a: f64, b: f64, n: usize, gamma: f64, center: f64) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(HsError::Parameter(format!("axis needs >= 8 intervals, got {n}")));
    }
    if gamma < 1.0 {
        return Err(HsError::Parameter(format!("grading exponent {gamma} must be >= 1")));
    }
    if !(a < b) || center < a || center > b {
        return Err(HsError::Parameter(format!(
            "invalid axis range [{a}, {b}] with center {center}"
        )));
    }
    let mut nodes = Vec::with_capacity(n + 1);
    if center <= a {
        for i in 0..=n {
            nodes.push(a + (b - a) * (i as f64 / n as f64).powf(gamma));
        }
    } else if center >= b {
        for i in 0..=n {
            nodes.push(b - (b - a) * ((n - i) as f64 / n as f64).powf(gamma));
        }
    } else {
        let frac = (center - a) / (b - a);
        let n_left = ((n as f64) * frac).round().clamp(2.0, n as f64 - 2.0) as usize;
        let n_right = n - n_left;
        for i in 0..n_left {
            nodes.push(center - (center - a) * ((n_left - i) as f64 / n_left as f64).powf(gamma));
        }
        for i in 0..=n_right {
            nodes.push(center + (b - center) * (i as f64 / n_right as f64).powf(gamma));
        }
    }
    for w in nodes.windows(2) {
        if w[1] <= w[0] {
            return Err(HsError::Parameter("axis coordinates must be strictly increasing".into()));
        }
    }
    Ok(nodes)
}

/// Tensor grid over the bounding box of an axisymmetric domain.
#[derive(Debug)]
pub struct Grid2D {
    pub domain: AxisymmetricDomain,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub kind: Vec<NodeKind>,
    /// |S^(N-2)|, the angular factor of the axisymmetric measure.
    pub sphere_factor: f64,
}

impl Grid2D {
    /// Graded grid with nodes clustered at the origin in both directions.
    pub fn build(domain: AxisymmetricDomain, n_r: usize, n_z: usize, gamma: f64) -> Result<Arc<Self>> {
        Self::build_with_z_center(domain, n_r, n_z, gamma, 0.0)
    }

    /// Graded grid with the z-axis clustered around `z_center` instead of
    /// the origin (used to resolve interior concentration profiles).
    pub fn build_with_z_center(
        domain: AxisymmetricDomain,
        n_r: usize,
        n_z: usize,
        gamma: f64,
        z_center: f64,
    ) -> Result<Arc<Self>> {
        let z_lo = domain.z_lower_bound();
        let z_hi = domain.r_max;
        let rho = graded_axis(0.0, domain.r_max, n_r, gamma, 0.0)?;
        let z = graded_axis(z_lo, z_hi, n_z, gamma, z_center.clamp(z_lo, z_hi))?;
        Ok(Arc::new(Self::from_axes(domain, rho, z)))
    }

    /// Assemble a grid from explicit axes (used by the text reader).
    pub fn from_axes(domain: AxisymmetricDomain, rho: Vec<f64>, z: Vec<f64>) -> Self {
        let tol = 1e-12 * domain.r_max;
        let mut kind = Vec::with_capacity(rho.len() * z.len());
        for &zv in &z {
            for &rv in &rho {
                let k = match domain.slice(rv) {
                    Some((lo, hi)) if zv > lo + tol && zv < hi - tol => NodeKind::Interior,
                    _ => NodeKind::Dirichlet,
                };
                kind.push(k);
            }
        }
        let sphere_factor = unit_sphere_area(domain.n - 1);
        Grid2D { domain, rho, z, kind, sphere_factor }
    }

    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn n_z(&self) -> usize {
        self.z.len()
    }

    pub fn node_count(&self) -> usize {
        self.rho.len() * self.z.len()
    }

    #[inline]
    pub fn idx(&self, j: usize, k: usize) -> usize {
        k * self.rho.len() + j
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.kind[idx] == NodeKind::Interior
    }

    /// Nodes in storage order (rho fastest).
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let nr = self.rho.len();
        (0..self.node_count()).map(move |i| (self.rho[i % nr], self.z[i / nr]))
    }

    pub fn in_box(&self, rho: f64, z: f64) -> bool {
        rho >= self.rho[0]
            && rho <= *self.rho.last().unwrap()
            && z >= self.z[0]
            && z <= *self.z.last().unwrap()
    }

    /// In-box test with a small tolerance for points that fall marginally
    /// outside through roundoff of an inverse map; interpolation clamps
    /// such points to the border.
    pub fn in_box_margin(&self, rho: f64, z: f64, margin: f64) -> bool {
        rho >= self.rho[0] - margin
            && rho <= *self.rho.last().unwrap() + margin
            && z >= self.z[0] - margin
            && z <= *self.z.last().unwrap() + margin
    }

    /// Quadrature loop: calls `f(j, k, rho_g, z_g, w)` for every admissible
    /// Gauss point; `w` contains the full axisymmetric measure. Cells cut by
    /// the boundary are integrated over the exact vertical slice, two Gauss
    /// points per direction. The radial direction is parametrized by the
    /// polar angle (rho = R sin phi), which keeps the integrand smooth where
    /// a cell meets the outer arc.
    pub fn for_each_gauss<F: FnMut(usize, usize, f64, f64, f64)>(&self, mut f: F) {
        let g = 0.5 / 3f64.sqrt();
        let nm2 = i32::try_from(self.domain.n - 2).unwrap();
        let r = self.domain.r_max;
        for k in 0..self.z.len() - 1 {
            let (za, zb) = (self.z[k], self.z[k + 1]);
            for j in 0..self.rho.len() - 1 {
                let (ra, rb) = (self.rho[j], self.rho[j + 1]);
                let phi_a = (ra / r).min(1.0).asin();
                let phi_b = (rb / r).min(1.0).asin();
                if phi_b <= phi_a {
                    continue;
                }
                let (pm, ph) = (0.5 * (phi_a + phi_b), phi_b - phi_a);
                for gr in [-1.0f64, 1.0] {
                    let phi_g = pm + gr * g * ph;
                    let rho_g = r * phi_g.sin();
                    let w_rho = 0.5 * ph * r * phi_g.cos();
                    let Some((lo, hi)) = self.domain.slice(rho_g) else { continue };
                    let (zlo, zhi) = (za.max(lo), zb.min(hi));
                    if zhi <= zlo {
                        continue;
                    }
                    let (zm, zh) = (0.5 * (zlo + zhi), zhi - zlo);
                    let base = w_rho * 0.5 * zh * self.sphere_factor * rho_g.powi(nm2);
                    for gz in [-1.0f64, 1.0] {
                        let z_g = zm + gz * g * zh;
                        f(j, k, rho_g, z_g, base);
                    }
                }
            }
        }
    }

    /// Domain measure by the cell quadrature.
    pub fn measure(&self) -> f64 {
        let mut total = 0.0;
        self.for_each_gauss(|_, _, _, _, w| total += w);
        total
    }

    /// Lumped nodal weights of the measure `|x - P|^(-s) dx` with the pole
    /// on the axis at height `pole_z`. Integrating a field against these
    /// weights equals integrating its bilinear interpolant.
    pub fn weighted_mass(&self, s: f64, pole_z: f64) -> Result<Vec<f64>> {
        if s >= 2.0 && pole_z == 0.0 {
            return Err(HsError::Integrability(
                "s >= 2 with the pole at the boundary origin is not integrable".into(),
            ));
        }
        if s > 2.0 {
            return Err(HsError::Integrability(format!("s={s} > 2 is outside scope")));
        }
        let mut mass = vec![0.0; self.node_count()];
        let nr = self.rho.len();
        self.for_each_gauss(|j, k, rho_g, z_g, w| {
            let wt = if s == 0.0 {
                w
            } else {
                let dz = z_g - pole_z;
                let dist = (rho_g * rho_g + dz * dz).sqrt().max(1e-300);
                w * dist.powf(-s)
            };
            let (ra, rb) = (self.rho[j], self.rho[j + 1]);
            let (za, zb) = (self.z[k], self.z[k + 1]);
            let xi = (rho_g - ra) / (rb - ra);
            let ze = (z_g - za) / (zb - za);
            let base = k * nr + j;
            mass[base] += wt * (1.0 - xi) * (1.0 - ze);
            mass[base + 1] += wt * xi * (1.0 - ze);
            mass[base + nr] += wt * (1.0 - xi) * ze;
            mass[base + nr + 1] += wt * xi * ze;
        });
        Ok(mass)
    }
}

/// Scalar field on a grid. Samplers fill every node (including Dirichlet
/// ones); solver iterates keep Dirichlet nodes at zero via
/// [`GridFunction::apply_mask`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid2D>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Arc<Grid2D>) -> Self {
        let n = grid.node_count();
        GridFunction { grid, values: vec![0.0; n] }
    }

    pub fn from_values(grid: Arc<Grid2D>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.node_count(), "value count must match the grid");
        GridFunction { grid, values }
    }

    /// Sample a closure of (rho, z) at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(grid: Arc<Grid2D>, f: F) -> Self {
        let values = grid.nodes().map(|(r, z)| f(r, z)).collect();
        GridFunction { grid, values }
    }

    /// Zero out Dirichlet nodes.
    pub fn apply_mask(&mut self) {
        for (v, k) in self.values.iter_mut().zip(self.grid.kind.iter()) {
            if *k == NodeKind::Dirichlet {
                *v = 0.0;
            }
        }
    }

    pub fn masked(mut self) -> Self {
        self.apply_mask();
        self
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Location (rho, z) of the nodal maximum.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        let nr = self.grid.rho.len();
        (self.grid.rho[best.0 % nr], self.grid.z[best.0 / nr])
    }

    /// Bilinear interpolation; clamps to the bounding box edge values
    /// outside the box by projection of the query point.
    pub fn interpolate(&self, rho: f64, z: f64) -> f64 {
        let g = &self.grid;
        let r = rho.clamp(g.rho[0], *g.rho.last().unwrap());
        let zz = z.clamp(g.z[0], *g.z.last().unwrap());
        let j = locate(&g.rho, r);
        let k = locate(&g.z, zz);
        let xi = (r - g.rho[j]) / (g.rho[j + 1] - g.rho[j]);
        let ze = (zz - g.z[k]) / (g.z[k + 1] - g.z[k]);
        let nr = g.rho.len();
        let base = k * nr + j;
        let v = &self.values;
        v[base] * (1.0 - xi) * (1.0 - ze)
            + v[base + 1] * xi * (1.0 - ze)
            + v[base + nr] * (1.0 - xi) * ze
            + v[base + nr + 1] * xi * ze
    }

    /// Gradient of the bilinear interpolant at a point (constant per cell
    /// in each direction's complement; discontinuous across cell edges).
    pub fn interpolant_gradient(&self, rho: f64, z: f64) -> (f64, f64) {
        let g = &self.grid;
        let r = rho.clamp(g.rho[0], *g.rho.last().unwrap());
        let zz = z.clamp(g.z[0], *g.z.last().unwrap());
        let j = locate(&g.rho, r);
        let k = locate(&g.z, zz);
        let xi = (r - g.rho[j]) / (g.rho[j + 1] - g.rho[j]);
        let ze = (zz - g.z[k]) / (g.z[k + 1] - g.z[k]);
        let nr = g.rho.len();
        let base = k * nr + j;
        let v = &self.values;
        let dr = ((v[base + 1] - v[base]) * (1.0 - ze) + (v[base + nr + 1] - v[base + nr]) * ze)
            / (g.rho[j + 1] - g.rho[j]);
        let dz = ((v[base + nr] - v[base]) * (1.0 - xi) + (v[base + nr + 1] - v[base + 1]) * xi)
            / (g.z[k + 1] - g.z[k]);
        (dr, dz)
    }

    /// Integral of the field against the measure |x-P|^(-s) dx.
    pub fn weighted_integral(&self, s: f64, pole_z: f64) -> Result<f64> {
        let mass = self.grid.weighted_mass(s, pole_z)?;
        Ok(dot(&self.values, &mass))
    }

    /// Dirichlet integral of the bilinear interpolant over the sliced
    /// domain (no 1/2 factor).
    pub fn dirichlet_energy(&self) -> f64 {
        let g = &self.grid;
        let nr = g.rho.len();
        let mut total = 0.0;
        g.for_each_gauss(|j, k, rho_g, z_g, w| {
            let (ra, rb) = (g.rho[j], g.rho[j + 1]);
            let (za, zb) = (g.z[k], g.z[k + 1]);
            let xi = (rho_g - ra) / (rb - ra);
            let ze = (z_g - za) / (zb - za);
            let base = k * nr + j;
            let v = &self.values;
            let dr = ((v[base + 1] - v[base]) * (1.0 - ze) + (v[base + nr + 1] - v[base + nr]) * ze)
                / (rb - ra);
            let dz = ((v[base + nr] - v[base]) * (1.0 - xi) + (v[base + nr + 1] - v[base + 1]) * xi)
                / (zb - za);
            total += w * (dr * dr + dz * dz);
        });
        total
    }

    /// Strong-form residual of `Δu + sum_i c_i (u+)^(q_i) / |x-P_i|^(s_i)`
    /// at interior nodes, using the axisymmetric Laplacian
    /// `u_rr + (N-2) u_r / rho + u_zz` with even symmetry across the axis.
    /// Nodes whose stencil leaves the box, Dirichlet nodes and pole nodes
    /// are set to zero.
    pub fn pde_residual(&self, spec: &crate::model::ProblemSpec) -> Result<GridFunction> {
        let g = &self.grid;
        let nr = g.rho.len();
        let nz = g.z.len();
        let nm2 = f64::from(g.domain.n) - 2.0;
        let powers = spec.pole_powers()?;
        let mut out = vec![0.0; g.node_count()];
        for k in 1..nz - 1 {
            for j in 0..nr - 1 {
                let idx = g.idx(j, k);
                if !g.is_interior(idx) {
                    continue;
                }
                let v = &self.values;
                let u0 = v[idx];
                // z part
                let hm = g.z[k] - g.z[k - 1];
                let hp = g.z[k + 1] - g.z[k];
                let uzz = 2.0
                    * (v[idx - nr] / (hm * (hm + hp)) - u0 / (hm * hp)
                        + v[idx + nr] / (hp * (hm + hp)));
                // rho part
                let lap_rho = if j == 0 {
                    // even symmetry: u_r(0)=0, (N-2)u_r/rho -> (N-2)u_rr
                    let h1 = g.rho[1] - g.rho[0];
                    (nm2 + 1.0) * 2.0 * (v[idx + 1] - u0) / (h1 * h1)
                } else {
                    let hm = g.rho[j] - g.rho[j - 1];
                    let hp = g.rho[j + 1] - g.rho[j];
                    let urr = 2.0
                        * (v[idx - 1] / (hm * (hm + hp)) - u0 / (hm * hp)
                            + v[idx + 1] / (hp * (hm + hp)));
                    let ur = -hp / (hm * (hm + hp)) * v[idx - 1]
                        + (hp - hm) / (hm * hp) * u0
                        + hm / (hp * (hm + hp)) * v[idx + 1];
                    urr + nm2 * ur / g.rho[j]
                };
                let mut res = lap_rho + uzz;
                let mut at_pole = false;
                for (pole, &q) in spec.poles.iter().zip(powers.iter()) {
                    let dz = g.z[k] - pole.center_z;
                    let dist = (g.rho[j] * g.rho[j] + dz * dz).sqrt();
                    if pole.s > 0.0 && dist == 0.0 {
                        at_pole = true;
                        break;
                    }
                    let weight = if pole.s == 0.0 { 1.0 } else { dist.powf(-pole.s) };
                    res += pole.coeff * u0.max(0.0).powf(q) * weight;
                }
                out[idx] = if at_pole { 0.0 } else { res };
            }
        }
        Ok(GridFunction::from_values(Arc::clone(&self.grid), out))
    }

    /// Weighted L2 norm over interior nodes, using the lumped measure.
    pub fn weighted_l2(&self) -> f64 {
        let mass = self.grid.weighted_mass(0.0, 0.0).expect("s=0 mass always exists");
        let mut total = 0.0;
        for (i, (&v, &m)) in self.values.iter().zip(mass.iter()).enumerate() {
            if self.grid.is_interior(i) {
                total += v * v * m;
            }
        }
        total.sqrt()
    }

    /// Pohozaev boundary integral `(1/2) ∮ (x.nu) (d_nu u)^2 dσ` with the
    /// normal derivative from a one-sided second-order stencil. Returns the
    /// integral and whether the domain is star-shaped about the origin.
    pub fn boundary_flux(&self) -> (f64, bool) {
        let g = &self.grid;
        let dom = &g.domain;
        let nm2 = i32::try_from(dom.n - 2).unwrap();
        let r = dom.r_max;
        let samples = 2 * g.rho.len().max(g.z.len());
        // offset for the one-sided stencil: a couple of coarse spacings
        let h_rho = g.rho[g.rho.len() - 1] - g.rho[g.rho.len() - 2];
        let h_z = g.z[g.z.len() - 1] - g.z[g.z.len() - 2];
        let d = 1.5 * h_rho.max(h_z);
        let mut flux = 0.0;

        // Arc part: x.nu = r_max. The arc spans polar angles (0, phi_max).
        let phi_max = match dom.graph() {
            Some(graph) if graph.alpha != 0.0 => {
                // angle where the sphere meets the graph: z = alpha rho^2
                let f = |phi: f64| r * phi.cos() - graph.alpha * (r * phi.sin()).powi(2);
                bisect(f, 1e-9, std::f64::consts::PI - 1e-9)
            }
            _ => 0.5 * std::f64::consts::PI,
        };
        let dphi = phi_max / samples as f64;
        for i in 0..samples {
            let phi = (i as f64 + 0.5) * dphi;
            let (srho, sz) = (phi.sin(), phi.cos());
            let u1 = self.interpolate((r - d) * srho, (r - d) * sz);
            let u2 = self.interpolate((r - 2.0 * d) * srho, (r - 2.0 * d) * sz);
            let dn = (4.0 * u1 - u2) / (2.0 * d);
            let rho_b = r * srho;
            flux += r * dn * dn * g.sphere_factor * rho_b.powi(nm2) * r * dphi;
        }

        // Graph part (x.nu = alpha rho^2 / sqrt(1+phi'^2); zero when flat).
        let mut star = true;
        if let Some(graph) = dom.graph() {
            if graph.alpha != 0.0 {
                star = false;
                let rho_star = r * phi_max.sin();
                let m = samples;
                let drho = rho_star / m as f64;
                for i in 0..m {
                    let rho_b = (i as f64 + 0.5) * drho;
                    let zb = graph.height(rho_b);
                    let slope = 2.0 * graph.alpha * rho_b;
                    let norm = (1.0 + slope * slope).sqrt();
                    // outward normal (slope, -1)/norm; sample inward
                    let (nx, nz) = (slope / norm, -1.0 / norm);
                    let u1 = self.interpolate(rho_b - d * nx, zb - d * nz);
                    let u2 = self.interpolate(rho_b - 2.0 * d * nx, zb - 2.0 * d * nz);
                    let dn = (4.0 * u1 - u2) / (2.0 * d);
                    let xdotnu = graph.alpha * rho_b * rho_b / norm;
                    flux += xdotnu * dn * dn * g.sphere_factor * rho_b.powi(nm2) * norm * drho;
                }
            }
        }
        (0.5 * flux, star)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    if fa * fb > 0.0 {
        // no crossing: the graph never meets the sphere in range
        return if fa > 0.0 { b } else { a };
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) * f(a) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn locate(axis: &[f64], x: f64) -> usize {
    // index of the cell containing x (clamped)
    match axis.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(axis.len() - 2),
        Err(i) => i.saturating_sub(1).min(axis.len() - 2),
    }
}

/// Symmetric banded matrix, lower bands stored row-wise:
/// `data[i*(bw+1)+d] = A[i][i-d]`.
pub struct BandMatrix {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.bw);
        self.data[hi * (self.bw + 1) + (hi - lo)] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bw {
            0.0
        } else {
            self.data[hi * (self.bw + 1) + (hi - lo)]
        }
    }

    pub fn set_diag(&mut self, i: usize, v: f64) {
        self.data[i * (self.bw + 1)] = v;
    }

    /// y = A x (symmetric).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let bw = self.bw;
        for i in 0..self.n {
            let row = &self.data[i * (bw + 1)..(i + 1) * (bw + 1)];
            y[i] += row[0] * x[i];
            let dmax = bw.min(i);
            for d in 1..=dmax {
                let a = row[d];
                if a != 0.0 {
                    y[i] += a * x[i - d];
                    y[i - d] += a * x[i];
                }
            }
        }
    }

    /// In-place banded Cholesky A = L L^T.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let bw = self.bw;
        let n = self.n;
        for i in 0..n {
            let start = i.saturating_sub(bw);
            for j in start..i {
                // L[i][j] = (A[i][j] - sum_k L[i][k] L[j][k]) / L[j][j]
                let mut sum = self.data[i * (bw + 1) + (i - j)];
                let kmin = start.max(j.saturating_sub(bw));
                for k in kmin..j {
                    sum -= self.data[i * (bw + 1) + (i - k)] * self.data[j * (bw + 1) + (j - k)];
                }
                self.data[i * (bw + 1) + (i - j)] = sum / self.data[j * (bw + 1)];
            }
            let mut diag = self.data[i * (bw + 1)];
            for k in start..i {
                let l = self.data[i * (bw + 1) + (i - k)];
                diag -= l * l;
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(HsError::InvariantViolation(format!(
                    "stiffness matrix not positive definite at row {i} (pivot {diag:e})"
                )));
            }
            self.data[i * (bw + 1)] = diag.sqrt();
        }
        Ok(BandCholesky { n, bw, data: self.data })
    }
}

pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let mut x = b.to_vec();
        // forward: L y = b
        for i in 0..n {
            let start = i.saturating_sub(bw);
            let mut sum = x[i];
            for k in start..i {
                sum -= self.data[i * (bw + 1) + (i - k)] * x[k];
            }
            x[i] = sum / self.data[i * (bw + 1)];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut sum = x[i];
            let dmax = bw.min(n - 1 - i);
            for d in 1..=dmax {
                sum -= self.data[(i + d) * (bw + 1) + d] * x[i + d];
            }
            x[i] = sum / self.data[i * (bw + 1)];
        }
        x
    }
}

/// Q1 stiffness matrix of the Dirichlet form over the sliced domain.
/// Dirichlet rows/columns are replaced by the identity, so the factorized
/// matrix solves the homogeneous-boundary problem.
pub fn stiffness(grid: &Grid2D) -> Result<BandMatrix> {
    let nr = grid.rho.len();
    let bw = nr + 1;
    let mut mat = BandMatrix::zeros(grid.node_count(), bw);
    grid.for_each_gauss(|j, k, rho_g, z_g, w| {
        let (ra, rb) = (grid.rho[j], grid.rho[j + 1]);
        let (za, zb) = (grid.z[k], grid.z[k + 1]);
        let xi = (rho_g - ra) / (rb - ra);
        let ze = (z_g - za) / (zb - za);
        let inv_dr = 1.0 / (rb - ra);
        let inv_dz = 1.0 / (zb - za);
        let base = k * nr + j;
        let nodes = [base, base + 1, base + nr, base + nr + 1];
        let grads = [
            [-(1.0 - ze) * inv_dr, -(1.0 - xi) * inv_dz],
            [(1.0 - ze) * inv_dr, -xi * inv_dz],
            [-ze * inv_dr, (1.0 - xi) * inv_dz],
            [ze * inv_dr, xi * inv_dz],
        ];
        for a in 0..4 {
            if !grid.is_interior(nodes[a]) {
                continue;
            }
            for b in 0..=a {
                if !grid.is_interior(nodes[b]) {
                    continue;
                }
                let v = w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                mat.add(nodes[a], nodes[b], v);
            }
        }
    });
    for i in 0..grid.node_count() {
        if !grid.is_interior(i) {
            mat.set_diag(i, 1.0);
        } else if mat.get(i, i) <= 0.0 {
            return Err(HsError::InvariantViolation(format!(
                "interior node {i} received no stiffness (degenerate slice)"
            )));
        }
    }
    Ok(mat)
}

// --- text serialization -------------------------------------------------

/// Write a field in the column text format: one row per node, rho fastest,
/// 17 significant digits (exact f64 round-trip).
pub fn write_field_text(u: &GridFunction) -> String {
    let g = &u.grid;
    let mut out = String::new();
    out.push_str("# hslab grid field v1\n");
    let (alpha, r0) = match g.domain.graph() {
        Some(gr) => (gr.alpha, gr.cutoff_radius),
        None => (0.0, 0.0),
    };
    let _ = writeln!(
        out,
        "# n {} kind {} rmax {:.16e} alpha {:.16e} r0 {:.16e}",
        g.domain.n,
        g.domain.kind_tag(),
        g.domain.r_max,
        alpha,
        r0
    );
    let _ = writeln!(out, "# nrho {} nz {}", g.rho.len(), g.z.len());
    out.push_str("# columns: rho z value\n");
    for (i, (r, z)) in g.nodes().enumerate() {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", r, z, u.values[i]);
    }
    out
}

/// Read a field written by [`write_field_text`].
pub fn read_field_text(text: &str) -> Result<GridFunction> {
    let mut n = 0u32;
    let mut kind_tag = String::new();
    let mut r_max = 0.0f64;
    let mut alpha = 0.0f64;
    let mut r0 = 0.0f64;
    let mut nrho = 0usize;
    let mut nz = 0usize;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# n ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 9 {
                return Err(HsError::Config("malformed domain header".into()));
            }
            n = toks[0].parse().map_err(|_| HsError::Config("bad dimension".into()))?;
            kind_tag = toks[2].to_string();
            r_max = parse_f64(toks[4])?;
            alpha = parse_f64(toks[6])?;
            r0 = parse_f64(toks[8])?;
        } else if let Some(rest) = line.strip_prefix("# nrho ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            nrho = toks[0].parse().map_err(|_| HsError::Config("bad nrho".into()))?;
            nz = toks[2].parse().map_err(|_| HsError::Config("bad nz".into()))?;
        } else if line.starts_with('#') {
            continue;
        } else {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(HsError::Config(format!("malformed data row: {line}")));
            }
            rows.push((parse_f64(toks[0])?, parse_f64(toks[1])?, parse_f64(toks[2])?));
        }
    }
    if rows.len() != nrho * nz || nrho == 0 {
        return Err(HsError::Config(format!(
            "row count {} does not match {} x {}",
            rows.len(),
            nrho,
            nz
        )));
    }
    let kind = match kind_tag.as_str() {
        "halfspace" => DomainKind::TruncatedHalfSpace,
        "halfball" => DomainKind::HalfBallFlat,
        "curvedcap" => DomainKind::CurvedCap(BoundaryGraph::new(alpha, r0)?),
        other => return Err(HsError::Config(format!("unknown domain kind {other}"))),
    };
    let domain = AxisymmetricDomain::new(kind, n, r_max)?;
    let rho: Vec<f64> = rows[..nrho].iter().map(|r| r.0).collect();
    let z: Vec<f64> = (0..nz).map(|k| rows[k * nrho].1).collect();
    let grid = Arc::new(Grid2D::from_axes(domain, rho, z));
    let values = rows.iter().map(|r| r.2).collect();
    Ok(GridFunction::from_values(grid, values))
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| HsError::Config(format!("bad float: {tok}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_ball_grid(n: usize) -> Arc<Grid2D> {
        let dom = AxisymmetricDomain::half_ball(3, 1.0).unwrap();
        Grid2D::build(dom, n, n, 2.0).unwrap()
    }

    #[test]
    fn flattening_examples() {
        let graph = BoundaryGraph::new(1.0, 0.4).unwrap();
        let (r, y) = graph.flatten(0.1, 0.05).unwrap();
        assert_eq!(r, 0.1);
        assert!((y - 0.04).abs() < 1e-16);
        let flat = BoundaryGraph::new(0.0, 0.4).unwrap();
        assert_eq!(flat.flatten(0.2, 0.3).unwrap(), (0.2, 0.3));
        assert!(graph.flatten(0.5, 0.0).is_err());
    }

    #[test]
    fn chart_roundtrip_random() {
        let graph = BoundaryGraph::new(-0.5, 0.9).unwrap();
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let rho = 0.89 * rng();
            let z = 2.0 * rng() - 1.0;
            let (r1, y) = graph.flatten(rho, z).unwrap();
            let (r2, z2) = graph.unflatten(r1, y).unwrap();
            assert!((r2 - rho).abs() <= 1e-14 && (z2 - z).abs() <= 1e-14);
        }
    }

    #[test]
    fn mean_curvature_examples() {
        let flat = BoundaryGraph::new(0.0, 0.5).unwrap();
        assert_eq!(mean_curvature(&flat, 3), 0.0);
        let g = BoundaryGraph::new(-0.3, 0.5).unwrap();
        assert_eq!(mean_curvature(&g, 3), -0.3);
        assert_eq!(mean_curvature(&g, 7), -0.3);
        assert!(mean_curvature(&g, 4) < 0.0);
    }

    #[test]
    fn half_ball_measure() {
        // |B_1^+| in R^3 = 2 pi / 3
        let grid = half_ball_grid(48);
        let exact = 2.0 * std::f64::consts::PI / 3.0;
        let got = grid.measure();
        assert!((got - exact).abs() / exact < 1e-2, "measure {got} vs {exact}");
        // refinement improves at order >= 1.5
        let e1 = (half_ball_grid(32).measure() - exact).abs();
        let e2 = (half_ball_grid(64).measure() - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 1.5, "measure convergence order {order}");
    }

    #[test]
    fn uniform_axis_when_gamma_one() {
        let ax = graded_axis(0.0, 1.0, 10, 1.0, 0.0).unwrap();
        for (i, v) in ax.iter().enumerate() {
            assert!((v - i as f64 / 10.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_integral_singular() {
        // f = 1, s = 1 on the half ball, N=3: integral = pi
        let grid = half_ball_grid(64);
        let one = GridFunction::sample(Arc::clone(&grid), |_, _| 1.0);
        let got = one.weighted_integral(1.0, 0.0).unwrap();
        let exact = std::f64::consts::PI;
        assert!((got - exact).abs() / exact < 1e-2, "got {got} vs {exact}");
        let zero = GridFunction::zeros(grid);
        assert_eq!(zero.weighted_integral(0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn integrability_guard() {
        let grid = half_ball_grid(16);
        let one = GridFunction::sample(Arc::clone(&grid), |_, _| 1.0);
        assert!(one.weighted_integral(2.0, 0.0).is_err());
        assert!(one.weighted_integral(2.0, 0.5).is_ok());
    }

    #[test]
    fn dirichlet_energy_affine_field() {
        // u = z on the half ball: |grad u|^2 = 1, energy = measure
        let grid = half_ball_grid(48);
        let u = GridFunction::sample(Arc::clone(&grid), |_, z| z);
        let a = u.dirichlet_energy();
        let m = grid.measure();
        assert!((a - m).abs() / m < 1e-12, "affine energy {a} vs measure {m}");
        let zero = GridFunction::zeros(grid);
        assert_eq!(zero.dirichlet_energy(), 0.0);
    }

    #[test]
    fn dirichlet_energy_convergence() {
        // manufactured smooth field u = z exp(-(rho^2+z^2)) on half ball R=1, N=3
        let exact = {
            // reference by fine quadrature
            let dom = AxisymmetricDomain::half_ball(3, 1.0).unwrap();
            let g = Grid2D::build(dom, 256, 256, 1.0).unwrap();
            GridFunction::sample(g, |r, z| z * (-(r * r + z * z)).exp()).dirichlet_energy()
        };
        let e = |n: usize| {
            let dom = AxisymmetricDomain::half_ball(3, 1.0).unwrap();
            let g = Grid2D::build(dom, n, n, 1.0).unwrap();
            (GridFunction::sample(g, |r, z| z * (-(r * r + z * z)).exp()).dirichlet_energy()
                - exact)
                .abs()
        };
        let order = (e(32) / e(64)).log2();
        assert!(order > 1.6, "energy convergence order {order}");
    }

    #[test]
    fn stiffness_matches_direct_energy() {
        let grid = half_ball_grid(24);
        let mat = stiffness(&grid).unwrap();
        let mut u = GridFunction::sample(Arc::clone(&grid), |r, z| (1.3 * r).sin() * z + z * z);
        u.apply_mask();
        let mut ku = vec![0.0; u.values.len()];
        mat.apply(&u.values, &mut ku);
        let quad_form: f64 = dot(&u.values, &ku)
            - u
                .values
                .iter()
                .enumerate()
                .filter(|(i, _)| !grid.is_interior(*i))
                .map(|(_, v)| v * v)
                .sum::<f64>();
        let direct = u.dirichlet_energy();
        assert!(
            (quad_form - direct).abs() <= 1e-10 * direct.abs().max(1.0),
            "u K u = {quad_form} vs direct {direct}"
        );
    }

    #[test]
    fn banded_cholesky_solves() {
        let grid = half_ball_grid(16);
        let mat = stiffness(&grid).unwrap();
        let n = grid.node_count();
        let mut b = vec![0.0; n];
        for (i, v) in b.iter_mut().enumerate() {
            if grid.is_interior(i) {
                *v = (i as f64 * 0.37).sin();
            }
        }
        let mat2 = stiffness(&grid).unwrap();
        let chol = mat.cholesky().unwrap();
        let x = chol.solve(&b);
        let mut ax = vec![0.0; n];
        mat2.apply(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-9, "residual at {i}");
        }
    }

    #[test]
    fn residual_zero_for_harmonic_linear_field() {
        let dom = AxisymmetricDomain::half_ball(3, 1.0).unwrap();
        let grid = Grid2D::build(dom, 24, 24, 1.5).unwrap();
        let spec = crate::model::ProblemSpec::two_pole(
            3,
            1.0,
            0.5,
            0.0,
            0.0,
            grid.domain,
        )
        .unwrap();
        // u = z is harmonic; with lambda=0 the first pole vanishes but the
        // second still acts, so drop both via zero coefficients.
        let mut spec = spec;
        spec.poles[1].coeff = 0.0;
        let u = GridFunction::sample(Arc::clone(&grid), |_, z| z);
        let res = u.pde_residual(&spec).unwrap();
        let norm = res.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(norm < 1e-9, "harmonic residual {norm}");
        let zero = GridFunction::zeros(grid);
        let res0 = zero.pde_residual(&spec).unwrap();
        assert!(res0.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_convergence_manufactured() {
        // Delta u for u = z exp(-|x|^2) in R^3 is z e^{-r^2} (4 r^2 - 10);
        // feed the residual op a spec with no poles active and check order 2
        // against the known Laplacian by adding it as the "pole" term? No:
        // measure the raw Laplacian error via a zero-coefficient spec.
        let err = |n: usize| {
            let dom = AxisymmetricDomain::half_ball(3, 1.0).unwrap();
            let grid = Grid2D::build(dom, n, n, 1.0).unwrap();
            let mut spec =
                crate::model::ProblemSpec::two_pole(3, 1.0, 0.5, 0.0, 0.0, grid.domain).unwrap();
            spec.poles[1].coeff = 0.0;
            let u = GridFunction::sample(Arc::clone(&grid), |r, z| z * (-(r * r + z * z)).exp());
            let res = u.pde_residual(&spec).unwrap();
            let mut worst = 0.0f64;
            for (i, (r, z)) in grid.nodes().enumerate() {
                if !grid.is_interior(i) {
                    continue;
                }
                let rr = r * r + z * z;
                let exact = z * (-rr).exp() * (4.0 * rr - 10.0);
                worst = worst.max((res.values[i] - exact).abs());
            }
            worst
        };
        let order = (err(24) / err(48)).log2();
        assert!(order > 1.6, "laplacian order {order}");
    }

    #[test]
    fn axis_regularity_under_refinement() {
        // Laplacian of the smooth even field exp(-rho^2) stays bounded at rho=0.
        let lap_at_axis = |n: usize| {
            let dom = AxisymmetricDomain::half_ball(3, 1.0).unwrap();
            let grid = Grid2D::build(dom, n, n, 2.0).unwrap();
            let mut spec =
                crate::model::ProblemSpec::two_pole(3, 1.0, 0.5, 0.0, 0.0, grid.domain).unwrap();
            spec.poles[1].coeff = 0.0;
            let u = GridFunction::sample(Arc::clone(&grid), |r, z| (-(r * r)).exp() * z * (1.0 - z));
            let res = u.pde_residual(&spec).unwrap();
            let k_mid = n / 2;
            res.values[grid.idx(0, k_mid)].abs()
        };
        let a = lap_at_axis(24);
        let b = lap_at_axis(48);
        let c = lap_at_axis(96);
        assert!(b < 2.0 * a.max(10.0) && c < 2.0 * b.max(10.0), "axis values {a} {b} {c}");
    }

    #[test]
    fn bilinear_form_symmetric_nonnegative() {
        let grid = half_ball_grid(16);
        let mat = stiffness(&grid).unwrap();
        let n = grid.node_count();
        let mut state = 99u64;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..10 {
            let mut u = vec![0.0; n];
            let mut v = vec![0.0; n];
            for i in 0..n {
                if grid.is_interior(i) {
                    u[i] = rng();
                    v[i] = rng();
                }
            }
            let mut ku = vec![0.0; n];
            let mut kv = vec![0.0; n];
            mat.apply(&u, &mut ku);
            mat.apply(&v, &mut kv);
            let uv = dot(&u, &kv);
            let vu = dot(&v, &ku);
            assert!((uv - vu).abs() <= 1e-10 * uv.abs().max(1.0));
            assert!(dot(&u, &ku) >= 0.0);
        }
    }

    #[test]
    fn field_text_roundtrip() {
        let grid = half_ball_grid(12);
        let u = GridFunction::sample(grid, |r, z| (r * 3.7).sin() * (z * 1.1).cos() / 3.0);
        let text = write_field_text(&u);
        let back = read_field_text(&text).unwrap();
        assert_eq!(u.values.len(), back.values.len());
        for (a, b) in u.values.iter().zip(back.values.iter()) {
            assert_eq!(a, b, "17 significant digits must round-trip exactly");
        }
        for (a, b) in u.grid.rho.iter().zip(back.grid.rho.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn curved_cap_geometry() {
        let graph = BoundaryGraph::new(-0.5, 0.9).unwrap();
        let dom = AxisymmetricDomain::curved_cap(3, 1.0, graph).unwrap();
        assert!(dom.z_lower_bound() < 0.0);
        assert!(!dom.star_shaped());
        // point just below z=0 at rho=0.5 lies inside (above the graph)
        assert!(dom.contains(0.5, -0.1));
        assert!(!dom.contains(0.5, -0.2));
        let grid = Grid2D::build(dom, 32, 32, 2.0).unwrap();
        assert!(grid.measure() > 2.0 * std::f64::consts::PI / 3.0);
    }
}
