//! Box domains, grid functions and measures, modulars, Luxemburg norms and
//! the Sobolev-constant search.
//!
//! Functions live on nodes; integrals use cell values obtained by averaging
//! the cell's corner nodes. Gradients are per cell, from forward differences
//! at the cell's lower-left node.

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::matuszewska::MatuszewskaProfile;
use crate::numerics::{illinois, KahanSum};
use crate::sobolev::SobolevConjugate;
use crate::young::YoungFunction;

pub const MIN_CELLS_PER_AXIS: usize = 8;

/// Relative tolerance of the post-check Φ(u/‖u‖) = 1.
pub const UNIT_MODULAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    cells: [usize; 2],
}

impl Domain {
    pub fn new(dim: usize, lo: &[f64], hi: &[f64], cells: &[usize]) -> Result<Domain> {
        if dim != 1 && dim != 2 {
            return Err(OrliczError::Config(format!("dimension {dim} not supported (use 1 or 2)")));
        }
        if lo.len() != dim || hi.len() != dim || cells.len() != dim {
            return Err(OrliczError::Config(format!("domain extents and cells need {dim} entries")));
        }
        let mut d = Domain { dim, lo: [0.0; 2], hi: [1.0; 2], cells: [1, 1] };
        for k in 0..dim {
            if !(hi[k] > lo[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return Err(OrliczError::Config(format!("axis {k}: need lo < hi, got [{}, {}]", lo[k], hi[k])));
            }
            if cells[k] < MIN_CELLS_PER_AXIS {
                return Err(OrliczError::Config(format!(
                    "axis {k}: {} cells, at least {MIN_CELLS_PER_AXIS} required",
                    cells[k]
                )));
            }
            d.lo[k] = lo[k];
            d.hi[k] = hi[k];
            d.cells[k] = cells[k];
        }
        Ok(d)
    }

    pub fn unit_interval(cells: usize) -> Result<Domain> {
        Domain::new(1, &[0.0], &[1.0], &[cells])
    }

    pub fn unit_square(cells: usize) -> Result<Domain> {
        Domain::new(2, &[0.0, 0.0], &[1.0, 1.0], &[cells, cells])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn h(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    /// Largest spacing over the axes.
    pub fn h_max(&self) -> f64 {
        (0..self.dim).map(|k| self.h(k)).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.h(k)).product()
    }

    /// Nodes along x and y (1 along y in one dimension).
    pub fn node_shape(&self) -> (usize, usize) {
        (self.cells[0] + 1, if self.dim == 2 { self.cells[1] + 1 } else { 1 })
    }

    pub fn cell_shape(&self) -> (usize, usize) {
        (self.cells[0], if self.dim == 2 { self.cells[1] } else { 1 })
    }

    pub fn n_nodes(&self) -> usize {
        let (a, b) = self.node_shape();
        a * b
    }

    pub fn n_cells(&self) -> usize {
        let (a, b) = self.cell_shape();
        a * b
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.cells[0] + 1) + i
    }

    pub fn node_ij(&self, k: usize) -> (usize, usize) {
        let nx = self.cells[0] + 1;
        (k % nx, k / nx)
    }

    pub fn node_coords(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.node_ij(k);
        let x = self.lo[0] + i as f64 * self.h(0);
        let y = if self.dim == 2 { self.lo[1] + j as f64 * self.h(1) } else { 0.0 };
        [x, y]
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        (c % self.cells[0], c / self.cells[0])
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(c);
        let x = self.lo[0] + (i as f64 + 0.5) * self.h(0);
        let y = if self.dim == 2 { self.lo[1] + (j as f64 + 0.5) * self.h(1) } else { 0.0 };
        [x, y]
    }

    /// Corner node indices of a cell (2 in 1D, 4 in 2D).
    pub fn cell_corners(&self, c: usize) -> ([usize; 4], usize) {
        let (i, j) = self.cell_ij(c);
        if self.dim == 1 {
            ([i, i + 1, 0, 0], 2)
        } else {
            (
                [self.node_index(i, j), self.node_index(i + 1, j), self.node_index(i, j + 1), self.node_index(i + 1, j + 1)],
                4,
            )
        }
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = self.node_ij(k);
        let bx = i == 0 || i == self.cells[0];
        if self.dim == 1 {
            bx
        } else {
            bx || j == 0 || j == self.cells[1]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n_nodes() {
            return Err(OrliczError::Config(format!(
                "grid function has {} values, domain has {} nodes",
                values.len(),
                domain.n_nodes()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(OrliczError::Domain { what: "grid function value", value: *v });
        }
        Ok(GridFunction { domain, values })
    }

    pub fn zeros(domain: &Domain) -> Self {
        GridFunction { values: vec![0.0; domain.n_nodes()], domain: domain.clone() }
    }

    pub fn from_fn(domain: &Domain, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..domain.n_nodes())
            .map(|k| {
                let [x, y] = domain.node_coords(k);
                f(x, y)
            })
            .collect();
        GridFunction::new(domain.clone(), values)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Copy with boundary nodes set to zero.
    pub fn with_zero_boundary(mut self) -> Self {
        for k in 0..self.values.len() {
            if self.domain.is_boundary(k) {
                self.values[k] = 0.0;
            }
        }
        self
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        (0..self.values.len()).all(|k| !self.domain.is_boundary(k) || self.values[k] == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction { domain: self.domain.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        GridFunction { domain: self.domain.clone(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell averages of the corner nodes.
    pub fn cell_values(&self) -> Vec<f64> {
        let d = &self.domain;
        (0..d.n_cells())
            .map(|c| {
                let (k, m) = d.cell_corners(c);
                k[..m].iter().map(|&i| self.values[i]).sum::<f64>() / m as f64
            })
            .collect()
    }

    /// Forward-difference gradient of each cell at its lower-left node.
    pub fn cell_gradients(&self) -> Vec<[f64; 2]> {
        let d = &self.domain;
        let (hx, hy) = (d.h(0), if d.dim == 2 { d.h(1) } else { 1.0 });
        (0..d.n_cells())
            .map(|c| {
                let (k, _) = d.cell_corners(c);
                let gx = (self.values[k[1]] - self.values[k[0]]) / hx;
                let gy = if d.dim == 2 { (self.values[k[2]] - self.values[k[0]]) / hy } else { 0.0 };
                [gx, gy]
            })
            .collect()
    }

    pub fn cell_gradient_norms(&self) -> Vec<f64> {
        self.cell_gradients().iter().map(|g| g[0].hypot(g[1])).collect()
    }
}

/// Nodal gradient: forward differences with zero extension outside Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub domain: Domain,
    pub components: Vec<[f64; 2]>,
}

impl GradientField {
    pub fn magnitude(&self) -> Vec<f64> {
        self.components.iter().map(|g| g[0].hypot(g[1])).collect()
    }
}

pub fn discrete_gradient(u: &GridFunction) -> GradientField {
    let d = &u.domain;
    let (nx, ny) = d.node_shape();
    let (hx, hy) = (d.h(0), if d.dim == 2 { d.h(1) } else { 1.0 });
    let at = |i: usize, j: usize| -> f64 {
        if i >= nx || j >= ny {
            0.0
        } else {
            u.values[d.node_index(i, j)]
        }
    };
    let components = (0..d.n_nodes())
        .map(|k| {
            let (i, j) = d.node_ij(k);
            let gx = (at(i + 1, j) - at(i, j)) / hx;
            let gy = if d.dim == 2 { (at(i, j + 1) - at(i, j)) / hy } else { 0.0 };
            [gx, gy]
        })
        .collect();
    GradientField { domain: d.clone(), components }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    domain: Domain,
    cell_mass: Vec<f64>,
}

impl GridMeasure {
    pub fn new(domain: Domain, cell_mass: Vec<f64>) -> Result<Self> {
        if cell_mass.len() != domain.n_cells() {
            return Err(OrliczError::Config(format!(
                "measure has {} cells, domain has {}",
                cell_mass.len(),
                domain.n_cells()
            )));
        }
        if let Some(m) = cell_mass.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(OrliczError::Domain { what: "cell mass", value: *m });
        }
        Ok(GridMeasure { domain, cell_mass })
    }

    /// Lebesgue measure: each cell carries its volume.
    pub fn lebesgue(domain: &Domain) -> Self {
        GridMeasure { cell_mass: vec![domain.cell_volume(); domain.n_cells()], domain: domain.clone() }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    /// Correctly rounded total mass.
    pub fn total(&self) -> f64 {
        crate::numerics::fsum(self.cell_mass.iter().copied())
    }
}

/// A convex increasing function usable in a modular.
pub trait YoungLike {
    fn phi(&self, t: f64) -> Result<f64>;
    fn phi_inverse(&self, y: f64) -> Result<f64>;
    /// Largest admissible argument.
    fn phi_t_max(&self) -> f64;
}

impl YoungLike for YoungFunction {
    fn phi(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }
    fn phi_inverse(&self, y: f64) -> Result<f64> {
        self.inverse(y)
    }
    fn phi_t_max(&self) -> f64 {
        self.t_max()
    }
}

impl YoungLike for MatuszewskaProfile {
    fn phi(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }
    fn phi_inverse(&self, y: f64) -> Result<f64> {
        self.inverse(y)
    }
    fn phi_t_max(&self) -> f64 {
        f64::INFINITY
    }
}

/// Σ φ(|v_i|) w_i.
pub fn weighted_modular(y: &impl YoungLike, values: &[f64], weights: &[f64]) -> Result<f64> {
    let mut s = KahanSum::default();
    for (v, w) in values.iter().zip(weights) {
        if *w > 0.0 && *v != 0.0 {
            s.add(y.phi(v.abs())? * w);
        }
    }
    Ok(s.value())
}

/// Φ_A(u) = Σ_cells A(|u|_cell) h^d.
pub fn modular(y: &impl YoungLike, u: &GridFunction) -> Result<f64> {
    let vol = u.domain.cell_volume();
    let cv = u.cell_values();
    let mut s = KahanSum::default();
    for v in cv {
        if v != 0.0 {
            s.add(y.phi(v.abs())? * vol);
        }
    }
    Ok(s.value())
}

/// Modular of the gradient, ∫ A(|∇u|).
pub fn gradient_modular(y: &impl YoungLike, u: &GridFunction) -> Result<f64> {
    let vol = u.domain.cell_volume();
    let mut s = KahanSum::default();
    for g in u.cell_gradient_norms() {
        if g != 0.0 {
            s.add(y.phi(g)? * vol);
        }
    }
    Ok(s.value())
}

/// inf{λ > 0 : Σ φ(|v_i|/λ) w_i ≤ 1}.
pub fn luxemburg_norm_weighted(y: &impl YoungLike, values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(OrliczError::Config("values and weights differ in length".into()));
    }
    if let Some(v) = values.iter().chain(weights).find(|v| !v.is_finite()) {
        return Err(OrliczError::Domain { what: "Luxemburg norm input", value: *v });
    }
    let pairs: Vec<(f64, f64)> =
        values.iter().zip(weights).filter(|(v, w)| **v != 0.0 && **w > 0.0).map(|(v, w)| (v.abs(), *w)).collect();
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let vmax = pairs.iter().fold(0.0f64, |m, p| m.max(p.0));
    let wsum: f64 = pairs.iter().map(|p| p.1).sum();
    let t_max = y.phi_t_max();
    // ln Φ(u/λ); +∞ when some argument leaves the range with φ(t_max)w ≥ 1
    let ln_mod = |ln_lam: f64| -> Result<f64> {
        let lam = ln_lam.exp();
        let mut s = KahanSum::default();
        for &(v, w) in &pairs {
            let t = v / lam;
            if t > t_max {
                if y.phi(t_max)? * w >= 1.0 {
                    return Ok(f64::INFINITY);
                }
                return Err(OrliczError::Range { what: "Luxemburg modular", value: t, max: t_max });
            }
            s.add(y.phi(t)? * w);
        }
        Ok(s.value().ln())
    };
    let inv = if 1.0 / wsum <= y.phi(t_max.min(f64::MAX))? { y.phi_inverse(1.0 / wsum)? } else { t_max };
    // vmax/inv is the norm of the constant vmax and bounds ‖u‖; double it so
    // the bracket stays strict under rounding
    let mut hi = 2.0 * vmax / inv;
    let mut guard = 0;
    while ln_mod(hi.ln())? >= 0.0 {
        hi *= 1e3;
        guard += 1;
        if guard > 100 {
            return Err(OrliczError::Degenerate("Luxemburg bracket search failed".into()));
        }
    }
    let mut lo = hi * 1e-3;
    while ln_mod(lo.ln())? <= 0.0 {
        lo *= 1e-3;
        guard += 1;
        if guard > 100 {
            return Err(OrliczError::Degenerate("Luxemburg bracket search failed".into()));
        }
    }
    let mut err = None;
    let f = |m: f64| match ln_mod(m) {
        Ok(v) => -v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    let m = illinois(lo.ln(), hi.ln(), f, 1e-16, 200);
    if let Some(e) = err {
        return Err(e);
    }
    // the modular is continuous, so the root is where it equals one; keep the
    // side with Φ ≤ 1 when rounding leaves it just above
    let mut lam = m.exp();
    let mut guard = 0;
    while ln_mod(lam.ln())? > 0.0 && guard < 64 {
        lam *= 1.0 + 4.0 * f64::EPSILON;
        guard += 1;
    }
    Ok(lam)
}

/// ‖u‖ with Lebesgue cell volumes, or with `weight` cell masses.
pub fn luxemburg_norm(y: &impl YoungLike, u: &GridFunction, weight: Option<&GridMeasure>) -> Result<f64> {
    let cv = u.cell_values();
    match weight {
        Some(m) => luxemburg_norm_weighted(y, &cv, &m.cell_mass),
        None => luxemburg_norm_weighted(y, &cv, &vec![u.domain.cell_volume(); cv.len()]),
    }
}

/// ‖∇u‖_A over cell gradients.
pub fn gradient_norm(y: &impl YoungLike, u: &GridFunction) -> Result<f64> {
    let g = u.cell_gradient_norms();
    luxemburg_norm_weighted(y, &g, &vec![u.domain.cell_volume(); g.len()])
}

/// min{‖u‖^{p⁻}, ‖u‖^{p⁺}} ≤ Φ(u) ≤ max{‖u‖^{p⁻}, ‖u‖^{p⁺}} within `rel_tol`.
pub fn check_norm_modular_bounds(y: &YoungFunction, u: &GridFunction, rel_tol: f64) -> Result<bool> {
    let idx = y.growth_indices()?;
    let n = luxemburg_norm(y, u, None)?;
    let phi = modular(y, u)?;
    let (a, b) = (n.powf(idx.p_minus), n.powf(idx.p_plus));
    Ok(phi >= a.min(b) * (1.0 - rel_tol) && phi <= a.max(b) * (1.0 + rel_tol))
}

/// Bump (1 − |x−c|²/w²)_+^m on the nodes, zero on ∂Ω.
pub fn bump(domain: &Domain, center: [f64; 2], width: f64, exponent: f64) -> Result<GridFunction> {
    Ok(GridFunction::from_fn(domain, |x, y| {
        let dx = x - center[0];
        let dy = if domain.dim() == 2 { y - center[1] } else { 0.0 };
        let r2 = (dx * dx + dy * dy) / (width * width);
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - r2).powf(exponent)
        }
    })?
    .with_zero_boundary())
}

pub(crate) fn bump_fits(domain: &Domain, center: [f64; 2], width: f64) -> bool {
    (0..domain.dim()).all(|k| center[k] - width >= domain.lo()[k] - 1e-12 && center[k] + width <= domain.hi()[k] + 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub centers: Vec<[f64; 2]>,
    pub widths: Vec<f64>,
    pub exponents: Vec<f64>,
    pub local_descent: bool,
}

impl TestFamily {
    /// Bumps at the domain centre and two off-centre points, widths
    /// 2⁻¹ … 2⁻⁶ times the shortest side, profile exponents 2, 3, 4.
    pub fn standard(domain: &Domain) -> TestFamily {
        let side = (0..domain.dim()).map(|k| domain.hi()[k] - domain.lo()[k]).fold(f64::INFINITY, f64::min);
        let mid = |f: [f64; 2]| {
            let mut c = [0.0; 2];
            for k in 0..domain.dim() {
                c[k] = domain.lo()[k] + f[k] * (domain.hi()[k] - domain.lo()[k]);
            }
            c
        };
        TestFamily {
            centers: vec![mid([0.5, 0.5]), mid([0.4, 0.55]), mid([0.6, 0.4])],
            widths: (1..=6).map(|k| side * 0.5f64.powi(k)).collect(),
            exponents: vec![2.0, 3.0, 4.0],
            local_descent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevConstantEstimate {
    pub value: f64,
    pub family: String,
    /// The minimum over a finite family bounds the infimum from above.
    pub is_upper_bound_of_inf: bool,
    pub best_center: [f64; 2],
    pub best_width: f64,
    pub best_exponent: f64,
    pub evaluations: usize,
}

/// ‖∇φ‖_A / ‖φ‖_B for one test function.
pub fn rayleigh_ratio(y: &YoungFunction, target: &impl YoungLike, phi: &GridFunction) -> Result<f64> {
    let num = gradient_norm(y, phi)?;
    let den = luxemburg_norm(target, phi, None)?;
    if den == 0.0 {
        return Err(OrliczError::Degenerate("test function vanishes".into()));
    }
    Ok(num / den)
}

/// Minimum of ‖∇φ‖_A / ‖φ‖_{A_n} over the bump family.
pub fn estimate_sobolev_constant(
    y: &YoungFunction,
    s: &SobolevConjugate,
    domain: &Domain,
    family: &TestFamily,
) -> Result<SobolevConstantEstimate> {
    estimate_sobolev_constant_for(y, s.an(), domain, family)
}

/// As `estimate_sobolev_constant` with an arbitrary target function.
pub fn estimate_sobolev_constant_for(
    y: &YoungFunction,
    target: &impl YoungLike,
    domain: &Domain,
    family: &TestFamily,
) -> Result<SobolevConstantEstimate> {
    let min_w = 4.0 * domain.h_max();
    let mut best: Option<(f64, [f64; 2], f64, f64)> = None;
    let mut evals = 0;
    for &c in &family.centers {
        for &w in &family.widths {
            if w < min_w || !bump_fits(domain, c, w) {
                continue;
            }
            for &m in &family.exponents {
                if !(m >= 1.0) {
                    continue;
                }
                let r = rayleigh_ratio(y, target, &bump(domain, c, w, m)?)?;
                evals += 1;
                if best.is_none_or(|b| r < b.0) {
                    best = Some((r, c, w, m));
                }
            }
        }
    }
    let (mut r, c, mut w, mut m) = best.ok_or_else(|| {
        OrliczError::Config("Sobolev-constant family is empty (no bump fits the domain at ≥ 4h)".into())
    })?;
    if family.local_descent {
        let mut step = 1.25f64;
        while step > 1.01 && evals < 400 {
            let mut improved = false;
            for (dw, dm) in [(step, 1.0), (1.0 / step, 1.0), (1.0, step), (1.0, 1.0 / step)] {
                let (w2, m2) = (w * dw, m * dm);
                if w2 < min_w || !bump_fits(domain, c, w2) || m2 < 1.0 {
                    continue;
                }
                let r2 = rayleigh_ratio(y, target, &bump(domain, c, w2, m2)?)?;
                evals += 1;
                if r2 < r {
                    r = r2;
                    w = w2;
                    m = m2;
                    improved = true;
                }
            }
            if !improved {
                step = step.sqrt();
            }
        }
    }
    Ok(SobolevConstantEstimate {
        value: r,
        family: format!(
            "bumps (1-|x-c|^2/w^2)^m: {} centers, widths {:?}, exponents {:?}, local descent {}",
            family.centers.len(),
            family.widths,
            family.exponents,
            family.local_descent
        ),
        is_upper_bound_of_inf: true,
        best_center: c,
        best_width: w,
        best_exponent: m,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_shapes() {
        let d = Domain::unit_square(8).unwrap();
        assert_eq!(d.n_nodes(), 81);
        assert_eq!(d.n_cells(), 64);
        assert!(d.is_boundary(0) && !d.is_boundary(d.node_index(3, 4)));
        assert!(Domain::unit_interval(4).is_err());
        assert!(Domain::new(3, &[0.0; 3], &[1.0; 3], &[8; 3]).is_err());
    }

    #[test]
    fn constant_modular() {
        let d = Domain::unit_interval(16).unwrap();
        let u = GridFunction::from_fn(&d, |_, _| 2.0).unwrap();
        let y = YoungFunction::power(2.0).unwrap();
        assert!((modular(&y, &u).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(modular(&y, &GridFunction::zeros(&d)).unwrap(), 0.0);
        assert!((luxemburg_norm(&y, &u, None).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_values_rejected() {
        let d = Domain::unit_interval(8).unwrap();
        let mut v = vec![0.0; 9];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(d, v), Err(OrliczError::Domain { .. })));
    }
}
