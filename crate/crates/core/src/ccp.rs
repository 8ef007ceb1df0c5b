//! Concentration-compactness diagnostics on grids: bubble sequences, the
//! measure pair ν = A_n(|u|)dx and μ = A(|∇u|)dx, atom detection, the
//! reverse-Hölder inequality, the atom relation and the Brezis-Lieb residual.
//!
//! A weak-* limit has no grid counterpart; the last member of a sequence at
//! the finest resolvable scale stands in for it.

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::grid::{bump, bump_fits, gradient_norm, luxemburg_norm, modular, GridFunction, GridMeasure, YoungLike};
use crate::grid::Domain;
use crate::matuszewska::MatuszewskaProfile;
use crate::numerics::{bisect, fsum};
use crate::sobolev::SobolevConjugate;
use crate::young::{a_infinity, GrowthIndices, YoungFunction};

/// Neighbourhood radius of an atom, in cells.
pub const ATOM_RADIUS: usize = 3;

/// Default factor applied to the Sobolev-constant estimate, which is an
/// upper bound of the infimum.
pub const DEFAULT_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// ‖∇u_k‖_A equals the bound.
    GradientBounded,
    /// ∫ A_n(|u_k|) = 1.
    AnMassOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleSpec {
    pub centers: Vec<[f64; 2]>,
    /// Decreasing scales ε_k.
    pub scales: Vec<f64>,
    /// Profile exponent m of (1 − |x|²)₊^m.
    pub exponent: f64,
    pub normalization: Normalization,
    /// Target of ‖∇u_k‖_A under `GradientBounded`.
    pub bound: f64,
}

impl BubbleSpec {
    pub fn single(center: [f64; 2], scales: Vec<f64>, normalization: Normalization) -> BubbleSpec {
        BubbleSpec { centers: vec![center], scales, exponent: 3.0, normalization, bound: 1.0 }
    }

    /// ε_k = 2^{−k}, k = 1..=k_max.
    pub fn dyadic_scales(k_max: u32) -> Vec<f64> {
        (1..=k_max).map(|k| 0.5f64.powi(k as i32)).collect()
    }
}

/// u_k = s_k Σ_i P((x − x_i)/ε_k), scaled per the normalization.
pub fn make_bubbles(
    y: &YoungFunction,
    s: &SobolevConjugate,
    domain: &Domain,
    spec: &BubbleSpec,
) -> Result<Vec<GridFunction>> {
    if spec.centers.is_empty() || spec.scales.is_empty() {
        return Err(OrliczError::Config("bubble spec needs at least one center and one scale".into()));
    }
    if !(spec.exponent >= 1.0) || !(spec.bound > 0.0) {
        return Err(OrliczError::Config("bubble exponent must be ≥ 1 and bound > 0".into()));
    }
    if spec.scales.windows(2).any(|w| !(w[1] <= w[0])) {
        return Err(OrliczError::Config("bubble scales must be nonincreasing".into()));
    }
    let floor = 4.0 * domain.h_max();
    let mut out = Vec::with_capacity(spec.scales.len());
    for &eps in &spec.scales {
        if !(eps >= floor * (1.0 - 1e-12)) {
            return Err(OrliczError::UnderResolved(format!("ε = {eps} is below 4h = {floor}")));
        }
        let mut base = GridFunction::zeros(domain);
        for &c in &spec.centers {
            if !bump_fits(domain, c, eps) {
                return Err(OrliczError::Config(format!("bubble at {c:?} with ε = {eps} leaves the domain")));
            }
            base = base.combine(1.0, &bump(domain, c, eps, spec.exponent)?, 1.0);
        }
        let scale = match spec.normalization {
            Normalization::GradientBounded => spec.bound / gradient_norm(y, &base)?,
            Normalization::AnMassOne => an_unit_mass_scale(s, &base)?,
        };
        out.push(base.scaled(scale));
    }
    Ok(out)
}

fn an_unit_mass_scale(s: &SobolevConjugate, base: &GridFunction) -> Result<f64> {
    let mass = |c: f64| modular(s.an(), &base.scaled(c));
    let mut hi = 1.0;
    while mass(hi)? < 1.0 {
        hi *= 2.0;
        if hi > 1e150 {
            return Err(OrliczError::Degenerate("A_n mass normalization diverged".into()));
        }
    }
    let mut lo = hi;
    while mass(lo)? >= 1.0 {
        lo *= 0.5;
        if lo < 1e-150 {
            return Err(OrliczError::Degenerate("A_n mass normalization diverged".into()));
        }
    }
    let mut err = None;
    let c = bisect(lo, hi, |c| match mass(c) {
        Ok(m) => m - 1.0,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(c),
    }
}

/// (ν, μ) with ν = A_n(|u|)·h^d and μ = A(|∇u|)·h^d per cell.
pub fn measure_pair(y: &YoungFunction, s: &SobolevConjugate, u: &GridFunction) -> Result<(GridMeasure, GridMeasure)> {
    let d = u.domain();
    let vol = d.cell_volume();
    let nu = u
        .cell_values()
        .iter()
        .map(|v| if *v == 0.0 { Ok(0.0) } else { Ok(s.an_eval(v.abs())? * vol) })
        .collect::<Result<Vec<_>>>()?;
    let mu = u
        .cell_gradient_norms()
        .iter()
        .map(|g| if *g == 0.0 { Ok(0.0) } else { Ok(y.eval(*g)? * vol) })
        .collect::<Result<Vec<_>>>()?;
    Ok((GridMeasure::new(d.clone(), nu)?, GridMeasure::new(d.clone(), mu)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// ν-weighted centroid of the atom's cells.
    pub x: [f64; 2],
    pub nu: f64,
    pub mu: f64,
    /// Cell of largest ν mass, where the neighbourhood was grown from.
    pub seed_cell: usize,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub atoms: Vec<Atom>,
    pub delta_threshold: f64,
    /// ν mass of the cells outside every atom.
    pub residual_mass: f64,
    pub total_mass: f64,
}

impl AtomReport {
    /// Σ ν_i + residual, summed exactly and rounded once. Each term is itself
    /// rounded, so this can sit one ulp off `total_mass`; the exact statement
    /// is `bookkeeping_exact`.
    pub fn bookkeeping_sum(&self) -> f64 {
        fsum(self.atoms.iter().map(|a| a.nu).chain(std::iter::once(self.residual_mass)))
    }

    /// Atoms and the residual partition the cells of ν, and every reported
    /// mass is the correctly rounded sum of its own cells.
    pub fn bookkeeping_exact(&self, nu: &GridMeasure) -> bool {
        let m = nu.cell_mass();
        let mut owned = vec![false; m.len()];
        for a in &self.atoms {
            for &c in &a.cells {
                if c >= m.len() || owned[c] {
                    return false;
                }
                owned[c] = true;
            }
            if fsum(a.cells.iter().map(|&c| m[c])) != a.nu {
                return false;
            }
        }
        let rest = (0..m.len()).filter(|&c| !owned[c]);
        if fsum(rest.clone().map(|c| m[c])) != self.residual_mass {
            return false;
        }
        let parts = self.atoms.iter().flat_map(|a| a.cells.iter().map(|&c| m[c])).chain(rest.map(|c| m[c]));
        fsum(parts) == self.total_mass && self.total_mass == nu.total()
    }
}

/// Greedy atom search: cells in decreasing ν order seed a
/// (2·ATOM_RADIUS+1)^d block of unassigned cells, kept as an atom when its
/// ν mass reaches δ.
pub fn detect_atoms(nu: &GridMeasure, mu: &GridMeasure, delta: f64) -> Result<AtomReport> {
    if !(delta > 0.0) {
        return Err(OrliczError::Config(format!("atom threshold δ = {delta} must be positive")));
    }
    if nu.domain() != mu.domain() {
        return Err(OrliczError::Config("ν and μ live on different domains".into()));
    }
    let d = nu.domain();
    let (cx, cy) = d.cell_shape();
    let nm = nu.cell_mass();
    let mm = mu.cell_mass();
    let mut order: Vec<usize> = (0..nm.len()).filter(|&c| nm[c] > 0.0).collect();
    order.sort_by(|&a, &b| nm[b].total_cmp(&nm[a]).then(a.cmp(&b)));
    let mut assigned = vec![false; nm.len()];
    let mut atoms = Vec::new();
    let r = ATOM_RADIUS;
    for &seed in &order {
        if assigned[seed] {
            continue;
        }
        let (i, j) = d.cell_ij(seed);
        let (i0, i1) = (i.saturating_sub(r), (i + r).min(cx - 1));
        let (j0, j1) = if d.dim() == 2 { (j.saturating_sub(r), (j + r).min(cy - 1)) } else { (0, 0) };
        let mut block = Vec::new();
        for jj in j0..=j1 {
            for ii in i0..=i1 {
                let c = d.cell_index(ii, jj);
                if !assigned[c] {
                    block.push(c);
                }
            }
        }
        let mass = fsum(block.iter().map(|&c| nm[c]));
        if mass < delta {
            continue;
        }
        let mut x = [0.0; 2];
        for k in 0..d.dim() {
            x[k] = fsum(block.iter().map(|&c| nm[c] * d.cell_center(c)[k])) / mass;
        }
        for &c in &block {
            assigned[c] = true;
        }
        atoms.push(Atom { x, nu: mass, mu: fsum(block.iter().map(|&c| mm[c])), seed_cell: seed, cells: block });
    }
    let total = nu.total();
    let residual = fsum((0..nm.len()).filter(|&c| !assigned[c]).map(|c| nm[c]));
    Ok(AtomReport { atoms, delta_threshold: delta, residual_mass: residual, total_mass: total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhCheck {
    pub holds: bool,
    /// safety·S·‖φ‖_{M_n,ν}
    pub lhs: f64,
    /// ‖φ‖_{A_∞,μ}
    pub rhs: f64,
    /// Set when ν or μ has zero mass and the check holds vacuously.
    pub vacuous: bool,
}

/// safety·S·‖φ‖_{M_n,ν} ≤ ‖φ‖_{A_∞,μ}.
pub fn verify_reverse_holder(
    s_est: f64,
    mn: &MatuszewskaProfile,
    idx: &GrowthIndices,
    phi: &GridFunction,
    nu: &GridMeasure,
    mu: &GridMeasure,
    safety: f64,
) -> Result<RhCheck> {
    check_safety(safety)?;
    if nu.total() == 0.0 || mu.total() == 0.0 {
        return Ok(RhCheck { holds: true, lhs: 0.0, rhs: 0.0, vacuous: true });
    }
    let a_inf = a_infinity(idx)?;
    let lhs = safety * s_est * luxemburg_norm(mn, phi, Some(nu))?;
    let rhs = luxemburg_norm(&a_inf, phi, Some(mu))?;
    Ok(RhCheck { holds: lhs <= rhs, lhs, rhs, vacuous: false })
}

fn check_safety(safety: f64) -> Result<()> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(OrliczError::Config(format!("safety factor {safety} must lie in (0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRelation {
    pub holds: bool,
    /// safety·S / M_n⁻¹(1/ν_i)
    pub lhs: f64,
    /// 1 / A_∞⁻¹(1/μ_i)
    pub rhs: f64,
    /// ν_i or μ_i vanished; the atom is left out.
    pub excluded: bool,
}

/// safety·S / M_n⁻¹(1/ν_i) ≤ 1 / A_∞⁻¹(1/μ_i) for each atom.
pub fn verify_atom_relation(
    s_est: f64,
    mn: &MatuszewskaProfile,
    idx: &GrowthIndices,
    report: &AtomReport,
    safety: f64,
) -> Result<Vec<AtomRelation>> {
    check_safety(safety)?;
    if report.atoms.is_empty() {
        return Err(OrliczError::Config("atom relation needs at least one atom".into()));
    }
    let a_inf = a_infinity(idx)?;
    report
        .atoms
        .iter()
        .map(|a| {
            if a.nu == 0.0 || a.mu == 0.0 {
                return Ok(AtomRelation { holds: false, lhs: 0.0, rhs: 0.0, excluded: true });
            }
            let lhs = safety * s_est / mn.phi_inverse(1.0 / a.nu)?;
            let rhs = 1.0 / a_inf.inverse(1.0 / a.mu)?;
            Ok(AtomRelation { holds: lhs <= rhs, lhs, rhs, excluded: false })
        })
        .collect()
}

/// r_k = |∫(B(|f_k|) − B(|f − f_k|))φ − ∫B(|f|)φ| with cell-averaged values.
pub fn brezis_lieb_residual(
    b: &YoungFunction,
    f_k: &[GridFunction],
    f: &GridFunction,
    phi: &GridFunction,
) -> Result<Vec<f64>> {
    let d = f.domain();
    if phi.domain() != d || f_k.iter().any(|g| g.domain() != d) {
        return Err(OrliczError::Config("Brezis-Lieb inputs live on different domains".into()));
    }
    let vol = d.cell_volume();
    let fc = f.cell_values();
    let pc = phi.cell_values();
    let bf: Vec<f64> = fc.iter().map(|v| b.eval(v.abs())).collect::<Result<_>>()?;
    f_k.iter()
        .map(|g| {
            let gc = g.cell_values();
            let mut terms = Vec::with_capacity(3 * gc.len());
            for c in 0..gc.len() {
                if pc[c] == 0.0 {
                    continue;
                }
                let w = pc[c] * vol;
                terms.push(b.eval(gc[c].abs())? * w);
                terms.push(-b.eval((fc[c] - gc[c]).abs())? * w);
                terms.push(-bf[c] * w);
            }
            Ok(fsum(terms).abs())
        })
        .collect()
}

/// ∫ B(|f|)|φ|, the scale the Brezis-Lieb residual is measured against.
pub fn brezis_lieb_scale(b: &YoungFunction, f: &GridFunction, phi: &GridFunction) -> Result<f64> {
    let vol = f.domain().cell_volume();
    let terms = f
        .cell_values()
        .iter()
        .zip(phi.cell_values())
        .map(|(v, p)| Ok(b.eval(v.abs())? * p.abs() * vol))
        .collect::<Result<Vec<_>>>()?;
    Ok(fsum(terms))
}

/// Diagnostics for one member of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub k: usize,
    pub scale: f64,
    pub total_nu: f64,
    pub total_mu: f64,
    pub atoms: AtomReport,
    pub rh: RhCheck,
    pub relations: Vec<AtomRelation>,
}

/// Inputs shared by every member of a sequence analysis.
#[derive(Debug, Clone)]
pub struct CcpContext<'a> {
    pub y: &'a YoungFunction,
    pub s: &'a SobolevConjugate,
    pub mn: &'a MatuszewskaProfile,
    pub idx: &'a GrowthIndices,
    pub s_est: f64,
    pub safety: f64,
    /// δ as a fraction of each member's total ν mass.
    pub delta_fraction: f64,
}

/// Measures, atoms, RH with test function φ and the atom relation for each
/// member v_k = u_k − u (pass `limit = None` for u = 0).
pub fn analyze_sequence(
    ctx: &CcpContext,
    members: &[GridFunction],
    scales: &[f64],
    limit: Option<&GridFunction>,
    phi: &GridFunction,
) -> Result<Vec<MemberReport>> {
    if !(ctx.delta_fraction > 0.0 && ctx.delta_fraction <= 1.0) {
        return Err(OrliczError::Config(format!("δ fraction {} must lie in (0, 1]", ctx.delta_fraction)));
    }
    members
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let v = match limit {
                Some(l) => u.combine(1.0, l, -1.0),
                None => u.clone(),
            };
            let (nu, mu) = measure_pair(ctx.y, ctx.s, &v)?;
            let total_nu = nu.total();
            let delta = (ctx.delta_fraction * total_nu).max(f64::MIN_POSITIVE);
            let atoms = detect_atoms(&nu, &mu, delta)?;
            let rh = verify_reverse_holder(ctx.s_est, ctx.mn, ctx.idx, phi, &nu, &mu, ctx.safety)?;
            let relations = if atoms.atoms.is_empty() {
                Vec::new()
            } else {
                verify_atom_relation(ctx.s_est, ctx.mn, ctx.idx, &atoms, ctx.safety)?
            };
            Ok(MemberReport {
                k: k + 1,
                scale: scales.get(k).copied().unwrap_or(f64::NAN),
                total_nu,
                total_mu: mu.total(),
                atoms,
                rh,
                relations,
            })
        })
        .collect()
}
