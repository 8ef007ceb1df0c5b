//! Discrete mountain-pass solver for
//! −div(a(|∇u|)∇u/|∇u|) = a_n(|u|)u/|u| + λ f(u) in Ω, u = 0 on ∂Ω,
//! with f(t) = |t|^{r−2}t.
//!
//! The energy is F_λ(u) = Σ_cells [A(|∇u|) − A_n(|ū|) − λ|ū|^r/r] h^d with
//! forward-difference cell gradients and corner averages ū. The gradient is
//! its exact derivative (with |g|_ε in the quotient) divided by h^d.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::grid::{bump, gradient_norm, luxemburg_norm, luxemburg_norm_weighted, Domain, GridFunction};
use crate::linalg::BandMatrix;
use crate::numerics::KahanSum;
use crate::sobolev::{build_an, SobolevConjugate};
use crate::young::{compare, GrowthIndices, Probe, Relation, YoungFunction};

/// Model problem on a grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    a: YoungFunction,
    a_idx: GrowthIndices,
    a_conj: YoungFunction,
    critical: Option<SobolevConjugate>,
    r: f64,
    gamma: f64,
    lambda: f64,
    domain: Domain,
    eps_reg: f64,
}

impl ProblemSpec {
    /// Builds and validates the problem. With `critical` the A_n term is
    /// built for n = dim Ω and the index windows p⁺ < γ < p_n⁻,
    /// p⁺ < r < p_n⁻ and B ≪ A_n (B = t^r/r) are enforced; without it only
    /// p⁺ < γ and p⁺ < r are.
    pub fn new(a: YoungFunction, critical: bool, r: f64, gamma: f64, lambda: f64, domain: Domain) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return Err(OrliczError::Config(format!("r = {r} must exceed 1")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(OrliczError::Config(format!("λ = {lambda} must be finite and ≥ 0")));
        }
        let a_idx = a.growth_indices()?;
        let p_plus = a_idx.p_plus;
        if !(gamma > p_plus) {
            return Err(OrliczError::Config(format!("γ = {gamma} must exceed p⁺ = {p_plus}")));
        }
        if !(r > p_plus) {
            return Err(OrliczError::Config(format!("r = {r} must exceed p⁺ = {p_plus}")));
        }
        let critical = if critical {
            let s = build_an(&a, domain.dim())?;
            let pn_minus = s.pn_indices().p_minus;
            if !(gamma < pn_minus) {
                return Err(OrliczError::Config(format!("γ = {gamma} must lie below p_n⁻ = {pn_minus}")));
            }
            if !(r < pn_minus) {
                return Err(OrliczError::Config(format!("r = {r} must lie below p_n⁻ = {pn_minus}")));
            }
            let b = YoungFunction::power_coef(r, 1.0 / r)?;
            let verdict = compare(&b, s.an(), &Probe::default())?;
            if verdict.relation != Relation::EssentiallySmaller {
                return Err(OrliczError::Config(format!("B = t^{r}/{r} is not essentially smaller than A_n")));
            }
            Some(s)
        } else {
            None
        };
        let a_conj = a.conjugate()?;
        let eps_reg = 1e-8 * domain.h_max();
        Ok(ProblemSpec { a, a_idx, a_conj, critical, r, gamma, lambda, domain, eps_reg })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(OrliczError::Config(format!("λ = {lambda} must be finite and ≥ 0")));
        }
        Ok(ProblemSpec { lambda, ..self.clone() })
    }

    pub fn with_eps_reg(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(OrliczError::Config(format!("ε_reg = {eps} must be positive")));
        }
        self.eps_reg = eps;
        Ok(self)
    }

    pub fn a(&self) -> &YoungFunction {
        &self.a
    }

    pub fn a_indices(&self) -> &GrowthIndices {
        &self.a_idx
    }

    pub fn critical(&self) -> Option<&SobolevConjugate> {
        self.critical.as_ref()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    /// f(t) = |t|^{r−2} t.
    pub fn f(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            t.abs().powf(self.r - 2.0) * t
        }
    }

    /// F(t) = |t|^r / r.
    pub fn big_f(&self, t: f64) -> f64 {
        t.abs().powf(self.r) / self.r
    }

    fn f_prime(&self, t: f64) -> f64 {
        if t == 0.0 {
            if self.r > 2.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.r - 1.0) * t.abs().powf(self.r - 2.0)
        }
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        let d = u.domain();
        if d.dim() != self.domain.dim() || d.cells() != self.domain.cells() {
            return Err(OrliczError::Config("grid function lives on another grid".into()));
        }
        if !u.vanishes_on_boundary() {
            return Err(OrliczError::Config("u must vanish on the boundary".into()));
        }
        if let Some(v) = u.values().iter().find(|v| !v.is_finite()) {
            return Err(OrliczError::Domain { what: "functional argument", value: *v });
        }
        Ok(())
    }
}

/// f(t)t ≤ γF(t) on every sample (relative slack 1e-12).
pub fn check_ar(p: &ProblemSpec, samples: &[f64]) -> bool {
    samples.iter().all(|&t| {
        let lhs = p.f(t) * t;
        let rhs = p.gamma * p.big_f(t);
        lhs <= rhs + 1e-12 * rhs.abs()
    })
}

/// The three integrals making up F_λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub gradient: f64,
    pub critical: f64,
    pub source: f64,
    pub total: f64,
}

fn energy_parts_raw(p: &ProblemSpec, v: &[f64]) -> Result<EnergyParts> {
    let d = &p.domain;
    let vol = d.cell_volume();
    let (hx, hy) = (d.h(0), if d.dim() == 2 { d.h(1) } else { 1.0 });
    let mut ga = KahanSum::default();
    let mut gn = KahanSum::default();
    let mut gf = KahanSum::default();
    for c in 0..d.n_cells() {
        let (k, m) = d.cell_corners(c);
        let gx = (v[k[1]] - v[k[0]]) / hx;
        let gy = if m == 4 { (v[k[2]] - v[k[0]]) / hy } else { 0.0 };
        let g = gx.hypot(gy);
        if g != 0.0 {
            ga.add(p.a.eval(g)?);
        }
        let ub = k[..m].iter().map(|&i| v[i]).sum::<f64>() / m as f64;
        if ub != 0.0 {
            if let Some(s) = &p.critical {
                gn.add(s.an_eval(ub.abs())?);
            }
            gf.add(p.big_f(ub));
        }
    }
    let gradient = ga.value() * vol;
    let critical = gn.value() * vol;
    let source = gf.value() * vol;
    let total = gradient - critical - p.lambda * source;
    if !total.is_finite() {
        return Err(OrliczError::Range { what: "F_λ", value: total, max: f64::MAX });
    }
    Ok(EnergyParts { gradient, critical, source, total })
}

pub fn energy_parts(p: &ProblemSpec, u: &GridFunction) -> Result<EnergyParts> {
    p.check(u)?;
    energy_parts_raw(p, u.values())
}

/// F_λ(u).
pub fn functional_eval(p: &ProblemSpec, u: &GridFunction) -> Result<f64> {
    Ok(energy_parts(p, u)?.total)
}

/// (F_λ(tu), t^{p⁺}∫A(|∇u|) − t^{p_n⁻}∫A_n(|u|) − λt^r∫F(u)); for t ≥ 1 the
/// first never exceeds the second.
pub fn scaling_record(p: &ProblemSpec, u: &GridFunction, t: f64) -> Result<(f64, f64)> {
    let e = energy_parts(p, u)?;
    let et = functional_eval(p, &u.scaled(t))?;
    let pn = p.critical.as_ref().map_or(0.0, |s| s.pn_indices().p_minus);
    let bound = t.powf(p.a_idx.p_plus) * e.gradient - t.powf(pn) * e.critical - p.lambda * t.powf(p.r) * e.source;
    Ok((et, bound))
}

/// Which parts of the gradient to assemble.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Parts {
    diffusion: bool,
    potential: bool,
}

const ALL: Parts = Parts { diffusion: true, potential: true };

/// Raw derivative ∂F_λ/∂u_k at every node (zero on the boundary).
fn raw_gradient(p: &ProblemSpec, v: &[f64], parts: Parts) -> Result<Vec<f64>> {
    let d = &p.domain;
    let vol = d.cell_volume();
    let (hx, hy) = (d.h(0), if d.dim() == 2 { d.h(1) } else { 1.0 });
    let eps2 = p.eps_reg * p.eps_reg;
    let mut out = vec![0.0; v.len()];
    for c in 0..d.n_cells() {
        let (k, m) = d.cell_corners(c);
        if parts.diffusion {
            let gx = (v[k[1]] - v[k[0]]) / hx;
            let gy = if m == 4 { (v[k[2]] - v[k[0]]) / hy } else { 0.0 };
            let r = (gx * gx + gy * gy + eps2).sqrt();
            let q = p.a.density(r)? / r * vol;
            out[k[0]] -= q * gx / hx;
            out[k[1]] += q * gx / hx;
            if m == 4 {
                out[k[0]] -= q * gy / hy;
                out[k[2]] += q * gy / hy;
            }
        }
        if parts.potential {
            let ub = k[..m].iter().map(|&i| v[i]).sum::<f64>() / m as f64;
            if ub != 0.0 {
                let mut s = p.lambda * p.f(ub);
                if let Some(sc) = &p.critical {
                    s += sc.an_density(ub.abs())? * ub.signum();
                }
                let w = s * vol / m as f64;
                for &i in &k[..m] {
                    out[i] -= w;
                }
            }
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        if d.is_boundary(i) {
            *o = 0.0;
        }
    }
    Ok(out)
}

fn density_of(p: &ProblemSpec, raw: Vec<f64>) -> GridFunction {
    let vol = p.domain.cell_volume();
    let vals = raw.into_iter().map(|g| g / vol).collect();
    GridFunction::new(p.domain.clone(), vals).expect("finite gradient")
}

/// Nodal residual of the discrete equation (∂F_λ/∂u_k / h^d).
pub fn functional_gradient(p: &ProblemSpec, u: &GridFunction) -> Result<GridFunction> {
    p.check(u)?;
    Ok(density_of(p, raw_gradient(p, u.values(), ALL)?))
}

/// The diffusion part −div(a(|∇u|_ε)∇u/|∇u|_ε) of the gradient alone.
pub fn diffusion_gradient(p: &ProblemSpec, u: &GridFunction) -> Result<GridFunction> {
    p.check(u)?;
    Ok(density_of(p, raw_gradient(p, u.values(), Parts { diffusion: true, potential: false })?))
}

/// ⟨g, v⟩ = Σ_k g_k v_k h^d, the pairing matching `functional_gradient`.
pub fn pairing(g: &GridFunction, v: &GridFunction) -> f64 {
    let vol = g.domain().cell_volume();
    crate::numerics::fsum(g.values().iter().zip(v.values()).map(|(a, b)| a * b * vol))
}

/// Luxemburg norm of a nodal residual in L^Ã over the interior nodes.
pub fn residual_norm(p: &ProblemSpec, g: &GridFunction) -> Result<f64> {
    let d = &p.domain;
    let vol = d.cell_volume();
    let (vals, w): (Vec<f64>, Vec<f64>) =
        (0..d.n_nodes()).filter(|&k| !d.is_boundary(k)).map(|k| (g.values()[k], vol)).unzip();
    luxemburg_norm_weighted(&p.a_conj, &vals, &w)
}

/// Interior-node numbering used by the banded systems.
struct Unknowns {
    of_node: Vec<Option<usize>>,
    nodes: Vec<usize>,
    band: usize,
}

impl Unknowns {
    fn new(d: &Domain) -> Unknowns {
        let mut of_node = vec![None; d.n_nodes()];
        let mut nodes = Vec::new();
        for k in 0..d.n_nodes() {
            if !d.is_boundary(k) {
                of_node[k] = Some(nodes.len());
                nodes.push(k);
            }
        }
        let band = if d.dim() == 2 { d.cells()[0] } else { 1 };
        Unknowns { of_node, nodes, band }
    }

    fn gather(&self, v: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&k| v[k]).collect()
    }

    fn scatter(&self, x: &[f64], n_nodes: usize) -> Vec<f64> {
        let mut v = vec![0.0; n_nodes];
        for (i, &k) in self.nodes.iter().enumerate() {
            v[k] = x[i];
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Hess {
    /// ½Σ|∇u|²h^d
    Dirichlet,
    /// Σ A(|∇u|)h^d alone
    Diffusion,
    Full,
}

/// Hessian on the interior unknowns.
fn assemble_hessian(p: &ProblemSpec, v: &[f64], unk: &Unknowns, mode: Hess) -> Result<BandMatrix> {
    let d = &p.domain;
    let vol = d.cell_volume();
    let (hx, hy) = (d.h(0), if d.dim() == 2 { d.h(1) } else { 1.0 });
    let eps2 = p.eps_reg * p.eps_reg;
    let mut h = BandMatrix::zeros(unk.nodes.len(), unk.band, unk.band);
    for c in 0..d.n_cells() {
        let (k, m) = d.cell_corners(c);
        // ∂g/∂u at the corners
        let dg: [[f64; 2]; 4] = if m == 4 {
            [[-1.0 / hx, -1.0 / hy], [1.0 / hx, 0.0], [0.0, 1.0 / hy], [0.0, 0.0]]
        } else {
            [[-1.0 / hx, 0.0], [1.0 / hx, 0.0], [0.0; 2], [0.0; 2]]
        };
        let mat = if mode == Hess::Dirichlet {
            [[vol, 0.0], [0.0, vol]]
        } else {
            let gx = (v[k[1]] - v[k[0]]) / hx;
            let gy = if m == 4 { (v[k[2]] - v[k[0]]) / hy } else { 0.0 };
            let r = (gx * gx + gy * gy + eps2).sqrt();
            let a = p.a.density(r)?;
            let phi = a / r;
            let dphi = (p.a.density_derivative(r)? * r - a) / (r * r);
            let s = dphi / r;
            [[vol * (phi + s * gx * gx), vol * s * gx * gy], [vol * s * gx * gy, vol * (phi + s * gy * gy)]]
        };
        let pot = if mode != Hess::Full {
            0.0
        } else {
            let ub = k[..m].iter().map(|&i| v[i]).sum::<f64>() / m as f64;
            let mut s = p.lambda * p.f_prime(ub);
            if let Some(sc) = &p.critical {
                if ub != 0.0 {
                    s += sc.an().density_derivative(ub.abs())?;
                }
            }
            if !s.is_finite() {
                return Err(OrliczError::Solver("source term not differentiable at 0".into()));
            }
            -s * vol / (m * m) as f64
        };
        for a in 0..m {
            let Some(ia) = unk.of_node[k[a]] else { continue };
            for b in 0..m {
                let Some(ib) = unk.of_node[k[b]] else { continue };
                let da = dg[a];
                let db = dg[b];
                let val = da[0] * (mat[0][0] * db[0] + mat[0][1] * db[1])
                    + da[1] * (mat[1][0] * db[0] + mat[1][1] * db[1])
                    + pot;
                if val != 0.0 {
                    h.add(ia, ib, val);
                }
            }
        }
    }
    Ok(h)
}

/// Geometry of the functional around 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Geometry {
    pub rho: f64,
    pub alpha: f64,
    /// (ρ, sampled min of F_λ on ‖∇u‖_A = ρ) over the grid.
    pub profile: Vec<(f64, f64)>,
    #[serde(skip)]
    pub u0: Option<GridFunction>,
    pub u0_grad_norm: f64,
    pub u0_energy: f64,
    pub certified: bool,
}

/// Sphere directions with ‖∇d‖_A = 1: low sine modes and bumps.
fn sphere_directions(p: &ProblemSpec) -> Result<Vec<GridFunction>> {
    let d = &p.domain;
    let (lo, hi) = (d.lo().to_vec(), d.hi().to_vec());
    let two_d = d.dim() == 2;
    let mut raw = Vec::new();
    let modes: &[(f64, f64)] = if two_d { &[(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (2.0, 2.0)] } else { &[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)] };
    for &(mx, my) in modes {
        let (lo, hi) = (lo.clone(), hi.clone());
        raw.push(
            GridFunction::from_fn(d, move |x, y| {
                let sx = (mx * std::f64::consts::PI * (x - lo[0]) / (hi[0] - lo[0])).sin();
                let sy = if two_d { (my * std::f64::consts::PI * (y - lo[1]) / (hi[1] - lo[1])).sin() } else { 1.0 };
                sx * sy
            })?
            .with_zero_boundary(),
        );
    }
    let mid: Vec<f64> = (0..2).map(|k| if k < d.dim() { 0.5 * (lo[k] + hi[k]) } else { 0.0 }).collect();
    let half = (0..d.dim()).map(|k| 0.5 * (hi[k] - lo[k])).fold(f64::INFINITY, f64::min);
    // concentrated directions down to four cells across; the critical term
    // is cheapest along them
    let mut w = 0.9 * half;
    while w >= 4.0 * d.h_max() {
        for m in [2.0, 4.0] {
            raw.push(bump(d, [mid[0], mid[1]], w, m)?);
        }
        w *= 0.5;
    }
    raw.into_iter()
        .filter(|u| u.max_abs() > 0.0)
        .map(|u| {
            let n = gradient_norm(&p.a, &u)?;
            Ok(u.scaled(1.0 / n))
        })
        .collect()
}

fn sphere_min(p: &ProblemSpec, dirs: &[GridFunction], rho: f64) -> Result<(f64, usize)> {
    let vals: Vec<Result<f64>> = dirs.par_iter().map(|u| energy_parts_raw(p, u.scaled(rho).values()).map(|e| e.total)).collect();
    let mut best = (f64::INFINITY, 0);
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if v < best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

/// Default ρ grid: 2^k, k = −30..10.
pub fn default_rho_grid() -> Vec<f64> {
    (-30..=10).map(|k| 2f64.powi(k)).collect()
}

/// Samples min F_λ over sphere directions on each ‖∇u‖_A = ρ. Sampling only
/// overestimates the sphere minimum, so ρ is taken at half the grid point
/// where the sampled minimum peaks. u₀ comes from doubling t along the
/// minimizing direction until F_λ(t·d) < 0.
pub fn verify_geometry(p: &ProblemSpec, rho_grid: &[f64]) -> Result<Geometry> {
    if rho_grid.is_empty() || rho_grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(OrliczError::Config("ρ grid must be nonempty and positive".into()));
    }
    let dirs = sphere_directions(p)?;
    let mut profile = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        // ranges can be exceeded for large ρ; those points simply do not count
        match sphere_min(p, &dirs, rho) {
            Ok((a, _)) => profile.push((rho, a)),
            Err(OrliczError::Range { .. }) => profile.push((rho, f64::NEG_INFINITY)),
            Err(e) => return Err(e),
        }
    }
    let failed = |profile| Geometry {
        rho: f64::NAN,
        alpha: f64::NAN,
        profile,
        u0: None,
        u0_grad_norm: f64::NAN,
        u0_energy: f64::NAN,
        certified: false,
    };
    let peak = profile.iter().filter(|(_, a)| *a > 0.0).max_by(|x, y| x.1.total_cmp(&y.1)).copied();
    let Some((rho_peak, _)) = peak else { return Ok(failed(profile)) };
    let rho = 0.5 * rho_peak;
    let (alpha, which) = sphere_min(p, &dirs, rho)?;
    if !(alpha > 0.0) {
        return Ok(failed(profile));
    }
    let dir = &dirs[which];
    let mut t = 2.0 * rho;
    for _ in 0..200 {
        let e = energy_parts_raw(p, dir.scaled(t).values())?.total;
        if e < 0.0 {
            let u0 = dir.scaled(t);
            return Ok(Geometry {
                rho,
                alpha,
                profile,
                u0: Some(u0),
                u0_grad_norm: t,
                u0_energy: e,
                certified: true,
            });
        }
        t *= 2.0;
    }
    Ok(failed(profile))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Path,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub phase: Phase,
    pub energy: f64,
    pub residual: f64,
    pub grad_norm: f64,
    /// Max-node energy before and after the accepted line-search step.
    pub descent: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpOptions {
    pub path_nodes: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub rho_grid: Vec<f64>,
    /// Path phase hands over to Newton once the max node's residual is below
    /// this, or when the path level stalls.
    pub newton_switch: f64,
    pub stall_window: usize,
    pub stall_rel: f64,
    pub newton_iters: usize,
    /// Cap on a descent step, as a fraction of the adjacent segment length.
    pub step_fraction: f64,
}

impl Default for MpOptions {
    fn default() -> Self {
        MpOptions {
            path_nodes: 24,
            max_iters: 3000,
            tol: 1e-6,
            rho_grid: default_rho_grid(),
            newton_switch: 1e-2,
            stall_window: 25,
            stall_rel: 1e-5,
            newton_iters: 60,
            step_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MountainPassResult {
    #[serde(skip)]
    pub u_star: Option<GridFunction>,
    pub c_level: f64,
    /// Highest path energy when the path phase stopped.
    pub path_level: f64,
    pub ps_trace: Vec<TraceEntry>,
    pub geometry: Geometry,
    pub nontrivial: bool,
    pub converged: bool,
    pub final_residual: f64,
    pub grad_norm_sup: f64,
    pub u_star_norm: f64,
    /// Re-equidistributions that raised the discrete path maximum, and the
    /// largest relative rise.
    pub reparam_rises: usize,
    pub max_reparam_rise: f64,
}

impl MountainPassResult {
    pub fn u_star(&self) -> &GridFunction {
        self.u_star.as_ref().expect("solution present")
    }
}

struct Solver<'a> {
    p: &'a ProblemSpec,
    unk: Unknowns,
    stiff: BandMatrix,
}

impl<'a> Solver<'a> {
    fn new(p: &'a ProblemSpec) -> Result<Self> {
        let unk = Unknowns::new(&p.domain);
        if unk.nodes.is_empty() {
            return Err(OrliczError::Config("grid has no interior nodes".into()));
        }
        let stiff = assemble_hessian(p, &vec![0.0; p.domain.n_nodes()], &unk, Hess::Dirichlet)?;
        Ok(Solver { p, unk, stiff })
    }

    fn energy(&self, v: &[f64]) -> Result<f64> {
        Ok(energy_parts_raw(self.p, v)?.total)
    }

    fn residual(&self, raw: &[f64]) -> Result<f64> {
        let vol = self.p.domain.cell_volume();
        let vals: Vec<f64> = self.unk.nodes.iter().map(|&k| raw[k] / vol).collect();
        let w = vec![vol; vals.len()];
        luxemburg_norm_weighted(&self.p.a_conj, &vals, &w)
    }

    fn grad_norm(&self, v: &[f64]) -> Result<f64> {
        gradient_norm(&self.p.a, &GridFunction::new(self.p.domain.clone(), v.to_vec())?)
    }

    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = self.unk.nodes.iter().map(|&k| a[k] - b[k]).collect();
        let kd = self.stiff.mul(&diff);
        diff.iter().zip(&kd).map(|(x, y)| x * y).sum::<f64>().max(0.0).sqrt()
    }

    fn energies(&self, path: &[Vec<f64>]) -> Result<Vec<f64>> {
        path.par_iter().map(|v| self.energy(v)).collect()
    }

    /// Nodes at equal Dirichlet arclength along the polygon.
    fn equidistribute(&self, path: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = path.len();
        let mut s = vec![0.0; n];
        for j in 1..n {
            s[j] = s[j - 1] + self.dist(&path[j], &path[j - 1]);
        }
        let total = s[n - 1];
        let mut out = Vec::with_capacity(n);
        out.push(path[0].clone());
        let mut seg = 0;
        for j in 1..n - 1 {
            let target = total * j as f64 / (n - 1) as f64;
            while seg + 1 < n - 1 && s[seg + 1] < target {
                seg += 1;
            }
            let len = s[seg + 1] - s[seg];
            let th = if len > 0.0 { ((target - s[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            out.push(path[seg].iter().zip(&path[seg + 1]).map(|(a, b)| a + th * (b - a)).collect());
        }
        out.push(path[n - 1].clone());
        out
    }
}

/// Discrete mountain-pass search from 0 to the u₀ of `verify_geometry`,
/// finished by Newton on ∇F_λ = 0 from the highest path node.
pub fn run_mountain_pass(p: &ProblemSpec, opts: &MpOptions) -> Result<MountainPassResult> {
    if opts.path_nodes < 3 {
        return Err(OrliczError::Config("the path needs at least 3 nodes".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(OrliczError::Config("tolerance must be positive".into()));
    }
    let geometry = verify_geometry(p, &opts.rho_grid)?;
    if !geometry.certified {
        return Err(OrliczError::Solver("mountain-pass geometry not certified on the ρ grid".into()));
    }
    let solver = Solver::new(p)?;
    let n_nodes = p.domain.n_nodes();
    let u0 = geometry.u0.as_ref().expect("certified geometry has u₀").values().to_vec();
    let np = opts.path_nodes;
    let mut path: Vec<Vec<f64>> = (0..np)
        .map(|j| {
            let s = 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / (np - 1) as f64).cos());
            u0.iter().map(|x| s * x).collect()
        })
        .collect();
    let mut energy = solver.energies(&path)?;
    let mut trace = Vec::new();
    let mut tau = 1.0f64;
    let mut iter = 0;
    let mut reparam_rises = 0;
    let mut max_reparam_rise = 0.0f64;
    let argmax = |e: &[f64]| -> usize {
        let mut m = 1;
        for j in 1..e.len() - 1 {
            if e[j] > e[m] {
                m = j;
            }
        }
        m
    };

    // path phase
    while iter < opts.max_iters {
        let m = argmax(&energy);
        let g = raw_gradient(p, &path[m], ALL)?;
        let res = solver.residual(&g)?;
        trace.push(TraceEntry { iter, phase: Phase::Path, energy: energy[m], residual: res, grad_norm: solver.grad_norm(&path[m])?, descent: None });
        iter += 1;
        if res < opts.newton_switch {
            break;
        }
        let w = opts.stall_window;
        if trace.len() > w {
            let old = trace[trace.len() - 1 - w].energy;
            if old - energy[m] <= opts.stall_rel * energy[m].abs() {
                break;
            }
        }
        let gi = solver.unk.gather(&g);
        // descend in the metric of the diffusion Hessian at the node; for
        // p < 2 it differs wildly from the Laplacian where ∇u is small
        let metric = assemble_hessian(p, &path[m], &solver.unk, Hess::Diffusion)?;
        let mut dir = metric.clone().factor()?.solve(&gi);
        // drop the component along the path so the node leaves the ridge
        // sideways instead of sliding along the path
        let tan: Vec<f64> = solver.unk.nodes.iter().map(|&k| path[m + 1][k] - path[m - 1][k]).collect();
        let ktan = metric.mul(&tan);
        let tt: f64 = tan.iter().zip(&ktan).map(|(a, b)| a * b).sum();
        if tt > 0.0 {
            let c: f64 = dir.iter().zip(&ktan).map(|(a, b)| a * b).sum::<f64>() / tt;
            for (d, t) in dir.iter_mut().zip(&tan) {
                *d -= c * t;
            }
        }
        let slope: f64 = gi.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if !(slope > 0.0) {
            break;
        }
        let dfull = solver.unk.scatter(&dir, n_nodes);
        // a step longer than the neighboring segments can hop over the ridge
        let dnorm = solver.dist(&dfull, &vec![0.0; n_nodes]);
        let seg = 0.5 * (solver.dist(&path[m], &path[m - 1]) + solver.dist(&path[m], &path[m + 1]));
        let cap = opts.step_fraction * seg / dnorm;
        tau = tau.min(cap);
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = path[m].iter().zip(&dfull).map(|(u, d)| u - tau * d).collect();
            match solver.energy(&trial) {
                Ok(e) if e <= energy[m] - 1e-4 * tau * slope && e < energy[m] => {
                    accepted = Some((trial, e));
                    break;
                }
                Ok(_) | Err(OrliczError::Range { .. }) => tau *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((trial, e)) = accepted else { break };
        if let Some(t) = trace.last_mut() {
            t.descent = Some([energy[m], e]);
        }
        path[m] = trial;
        energy[m] = e;
        tau *= 2.0;
        let max_before = energy[argmax(&energy)];
        let moved = solver.equidistribute(&path);
        let e_new = solver.energies(&moved)?;
        let max_after = e_new[argmax(&e_new)];
        if max_after > max_before {
            reparam_rises += 1;
            max_reparam_rise = max_reparam_rise.max((max_after - max_before) / max_before.abs());
        }
        path = moved;
        energy = e_new;
    }
    let m = argmax(&energy);
    let path_level = energy[m];

    // Newton polish
    let mut u = path[m].clone();
    let mut g = raw_gradient(p, &u, ALL)?;
    let mut res = solver.residual(&g)?;
    let mut converged = res < opts.tol;
    let mut k = 0;
    while !converged && k < opts.newton_iters && iter < opts.max_iters {
        let h = assemble_hessian(p, &u, &solver.unk, Hess::Full)?;
        let Ok(lu) = h.factor() else { break };
        let step = lu.solve(&solver.unk.gather(&g));
        let sfull = solver.unk.scatter(&step, n_nodes);
        let mut theta = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&sfull).map(|(a, b)| a - theta * b).collect();
            if let Ok(gt) = raw_gradient(p, &trial, ALL) {
                let rt = solver.residual(&gt)?;
                if rt < (1.0 - 1e-4 * theta) * res {
                    next = Some((trial, gt, rt));
                    break;
                }
            }
            theta *= 0.5;
        }
        let Some((nu, ng, nr)) = next else { break };
        u = nu;
        g = ng;
        res = nr;
        k += 1;
        trace.push(TraceEntry { iter, phase: Phase::Newton, energy: solver.energy(&u)?, residual: res, grad_norm: solver.grad_norm(&u)?, descent: None });
        iter += 1;
        converged = res < opts.tol;
    }
    let u_star = GridFunction::new(p.domain.clone(), u)?;
    let c_level = functional_eval(p, &u_star)?;
    let u_star_norm = luxemburg_norm(&p.a, &u_star, None)?;
    let grad_norm_sup = trace.iter().map(|t| t.grad_norm).fold(0.0, f64::max);
    Ok(MountainPassResult {
        u_star: Some(u_star),
        c_level,
        path_level,
        ps_trace: trace,
        geometry,
        nontrivial: u_star_norm > 1e3 * opts.tol,
        converged,
        final_residual: res,
        grad_norm_sup,
        u_star_norm,
        reparam_rises,
        max_reparam_rise,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub c_lambda: Option<f64>,
    pub nontrivial: bool,
    pub converged: bool,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

/// One mountain-pass run per λ; failures are recorded and the sweep goes on.
pub fn lambda_sweep(template: &ProblemSpec, lambdas: &[f64], opts: &MpOptions) -> Result<Vec<SweepRow>> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(OrliczError::Config("λ list must be nonempty and increasing".into()));
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let row = match template.with_lambda(lambda).and_then(|p| run_mountain_pass(&p, opts)) {
            Ok(r) => SweepRow {
                lambda,
                c_lambda: Some(r.c_level),
                nontrivial: r.nontrivial,
                converged: r.converged,
                residual: Some(r.final_residual),
                error: None,
            },
            Err(e) => SweepRow { lambda, c_lambda: None, nontrivial: false, converged: false, residual: None, error: Some(e.to_string()) },
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Smallest λ of a sweep with a converged nontrivial solution.
pub fn empirical_lambda0(rows: &[SweepRow]) -> Option<f64> {
    rows.iter().find(|r| r.nontrivial && r.converged).map(|r| r.lambda)
}
