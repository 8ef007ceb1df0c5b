//! Orlicz-Sobolev conjugate A_n = A∘H⁻¹ with
//! H(t) = (∫₀ᵗ (τ/A(τ))^{1/(n−1)} dτ)^{(n−1)/n}.
//!
//! The integral is tabulated on a uniform grid in x = ln t with
//! Gauss-Legendre cells and log-sum-exp accumulation. The first cell [0, t₀]
//! uses τ = t₀u^m, m = (n−1)/(n−p₀), which removes the power singularity of
//! the integrand at 0.

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::numerics::{bisect, gl16, gl8, log_add_exp, log_space};
use crate::young::{estimate_indices, GrowthIndices, LogHermite, YoungFunction, OVERFLOW_CAP};

/// Grid of the H table in x = ln t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HGrid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub dx: f64,
}

impl HGrid {
    pub fn default_for(y: &YoungFunction) -> HGrid {
        let x_hi = if y.is_closed_form() { 1500.0 } else { y.ln_t_max() };
        HGrid { x_lo: (1e-12f64).ln(), x_hi, dx: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrability {
    pub at_infinity: bool,
    pub at_zero: bool,
    /// Verdicts come from finite partial integrals, not proofs.
    pub numeric_evidence: bool,
}

fn ln_integrand(y: &YoungFunction, n: usize, x: f64) -> Result<f64> {
    // ln(t·g(t)) with g = (t/A)^{1/(n−1)}, the integrand in x = ln t
    Ok(x + (x - y.ln_eval(x)?) / (n as f64 - 1.0))
}

fn ln_cell_integral(y: &YoungFunction, n: usize, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(f64::NEG_INFINITY);
    }
    let rule = gl8();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut vals = [0.0; 8];
    let mut m = f64::NEG_INFINITY;
    for (k, x) in rule.0.iter().enumerate() {
        vals[k] = ln_integrand(y, n, c + r * x)?;
        m = m.max(vals[k]);
    }
    let s: f64 = vals.iter().zip(&rule.1).map(|(v, w)| w * (v - m).exp()).sum();
    Ok(m + (s * r).ln())
}

/// ln ∫₀^{e^x} g with the power substitution anchored at the local index.
fn ln_head_integral(y: &YoungFunction, n: usize, x: f64) -> Result<f64> {
    let nf = n as f64;
    let p0 = y.ln_ratio(x)?;
    if p0 >= nf {
        return Err(OrliczError::Unsupported(format!(
            "(τ/A)^(1/(n−1)) is not integrable at 0: local index {p0:.4} ≥ n = {n}"
        )));
    }
    let m = (nf - 1.0) / (nf - p0);
    let rule = gl16();
    let mut vals = Vec::with_capacity(16);
    let mut mx = f64::NEG_INFINITY;
    for &u in &rule.0 {
        let u = 0.5 * (u + 1.0);
        let xu = x + m * u.ln();
        // g(τ) dτ = t g(t) · m u^{−1} du in x-units after τ = t₀u^m
        let v = ln_integrand(y, n, xu)? + m.ln() - u.ln();
        vals.push(v);
        mx = mx.max(v);
    }
    let s: f64 = vals.iter().zip(&rule.1).map(|(v, w)| 0.5 * w * (v - mx).exp()).sum();
    Ok(mx + s.ln())
}

/// Divergence at ∞ and convergence at 0 of ∫ (τ/A)^{1/(n−1)}, judged from
/// successive decade increments over [1e-10, 1e10].
pub fn check_integrability(y: &YoungFunction, n: usize) -> Result<Integrability> {
    if n < 2 {
        return Err(OrliczError::Config(format!("dimension n = {n} must be ≥ 2")));
    }
    let ln10 = std::f64::consts::LN_10;
    let decade = |k: i32| -> Result<f64> {
        let (a, b) = (k as f64 * ln10, (k + 1) as f64 * ln10);
        let mut s = f64::NEG_INFINITY;
        let steps = 64;
        for j in 0..steps {
            let lo = a + (b - a) * j as f64 / steps as f64;
            let hi = a + (b - a) * (j + 1) as f64 / steps as f64;
            s = log_add_exp(s, ln_cell_integral(y, n, lo, hi)?);
        }
        Ok(s)
    };
    const RATIO: f64 = 0.9;
    let top = ((y.ln_t_max() / ln10).floor() as i32).min(10);
    let at_infinity = if top < 5 {
        false
    } else {
        let mut ok = true;
        for k in (top - 5)..(top - 1) {
            if decade(k + 1)? - decade(k)? < RATIO.ln() {
                ok = false;
            }
        }
        ok
    };
    let mut at_zero = true;
    for k in -10..-6 {
        // increment of the decade nearer to 0 must be geometrically smaller
        if decade(k)? - decade(k + 1)? > RATIO.ln() {
            at_zero = false;
        }
    }
    Ok(Integrability { at_infinity, at_zero, numeric_evidence: true })
}

/// Cumulative table of ln I(t), I(t) = ∫₀ᵗ (τ/A)^{1/(n−1)} dτ, on a uniform
/// grid in ln t.
#[derive(Debug, Clone)]
pub struct HTable {
    base: YoungFunction,
    n: usize,
    x: Vec<f64>,
    ln_i: Vec<f64>,
    ln_g: Vec<f64>,
    grid: HGrid,
}

pub fn build_h(y: &YoungFunction, n: usize, grid: &HGrid) -> Result<HTable> {
    if n < 2 {
        return Err(OrliczError::Config(format!("dimension n = {n} must be ≥ 2")));
    }
    if !(grid.dx > 0.0) || !(grid.x_hi > grid.x_lo) {
        return Err(OrliczError::Config("H grid needs dx > 0 and x_lo < x_hi".into()));
    }
    let idx = y.growth_indices()?;
    if idx.p_plus >= n as f64 {
        return Err(OrliczError::Unsupported(format!(
            "p⁺ = {} ≥ n = {n}: the Sobolev conjugate is not of power type",
            idx.p_plus
        )));
    }
    let x_hi = grid.x_hi.min(y.ln_t_max());
    let cells = ((x_hi - grid.x_lo) / grid.dx).ceil() as usize;
    let mut x = Vec::with_capacity(cells + 1);
    for j in 0..cells {
        x.push(grid.x_lo + j as f64 * grid.dx);
    }
    x.push(x_hi);
    let mut ln_i = Vec::with_capacity(x.len());
    let mut ln_g = Vec::with_capacity(x.len());
    ln_i.push(ln_head_integral(y, n, x[0])?);
    ln_g.push(ln_integrand(y, n, x[0])?);
    for j in 1..x.len() {
        let c = ln_cell_integral(y, n, x[j - 1], x[j])?;
        ln_i.push(log_add_exp(ln_i[j - 1], c));
        ln_g.push(ln_integrand(y, n, x[j])?);
    }
    Ok(HTable { base: y.clone(), n, x, ln_i, ln_g, grid: HGrid { x_hi, ..*grid } })
}

impl HTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &HGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    fn exponent(&self) -> f64 {
        (self.n as f64 - 1.0) / self.n as f64
    }

    /// ln I(e^x).
    pub fn ln_i_at(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(OrliczError::Domain { what: "H", value: x });
        }
        if x == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let last = self.x.len() - 1;
        if x > self.x[last] {
            return Err(OrliczError::Range { what: "H", value: x.exp(), max: self.x[last].exp() });
        }
        if x <= self.x[0] {
            return ln_head_integral(&self.base, self.n, x);
        }
        let j = ((x - self.x[0]) / self.grid.dx).floor() as usize;
        let j = j.min(last - 1);
        let j = if self.x[j] > x { j - 1 } else { j };
        Ok(log_add_exp(self.ln_i[j], ln_cell_integral(&self.base, self.n, self.x[j], x)?))
    }

    /// ln H(e^x).
    pub fn ln_h(&self, x: f64) -> Result<f64> {
        Ok(self.exponent() * self.ln_i_at(x)?)
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(OrliczError::Domain { what: "H", value: t });
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_h(t.ln())?.exp())
    }

    /// H'(t)/H(t) · t at t = e^x.
    fn log_slope(&self, x: f64) -> Result<f64> {
        Ok(self.exponent() * (ln_integrand(&self.base, self.n, x)? - self.ln_i_at(x)?).exp())
    }

    /// x with ln H(e^x) = ls.
    pub fn ln_h_inverse(&self, ls: f64) -> Result<f64> {
        if ls == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let target = ls / self.exponent();
        let last = self.ln_i.len() - 1;
        if target > self.ln_i[last] + 1e-12 * self.ln_i[last].abs().max(1.0) {
            return Err(OrliczError::Range {
                what: "H⁻¹",
                value: ls.exp(),
                max: (self.exponent() * self.ln_i[last]).exp(),
            });
        }
        let (lo, hi) = if target <= self.ln_i[0] {
            let mut lo = self.x[0] - 10.0;
            while self.ln_i_at(lo)? > target {
                lo -= 10.0 + (self.x[0] - lo);
            }
            (lo, self.x[0])
        } else {
            let j = self.ln_i.partition_point(|&v| v <= target).min(last);
            (self.x[j - 1], self.x[j])
        };
        let f = |x: f64| self.ln_i_at(x).map(|v| v - target).unwrap_or(f64::INFINITY);
        let mut x = bisect(lo, hi, f);
        // one Newton polish step on the smooth in-cell integral
        let r = f(x);
        let d = self.log_slope(x)? / self.exponent();
        if d > 0.0 && r.is_finite() {
            let xn = x - r / d;
            if xn >= lo && xn <= hi && f(xn).abs() <= r.abs() {
                x = xn;
            }
        }
        Ok(x)
    }

    pub fn h_inverse(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(OrliczError::Domain { what: "H⁻¹", value: s });
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_h_inverse(s.ln())?.exp())
    }
}

/// H_inverse on a built table.
pub fn h_inverse(table: &HTable, s: f64) -> Result<f64> {
    table.h_inverse(s)
}

#[derive(Debug, Clone)]
pub struct SobolevConjugate {
    base: YoungFunction,
    base_indices: GrowthIndices,
    n: usize,
    table: HTable,
    an: YoungFunction,
    pn_indices: GrowthIndices,
}

pub fn build_an(y: &YoungFunction, n: usize) -> Result<SobolevConjugate> {
    build_an_with(y, n, &HGrid::default_for(y))
}

pub fn build_an_with(y: &YoungFunction, n: usize, grid: &HGrid) -> Result<SobolevConjugate> {
    let base_indices = y.growth_indices()?;
    if base_indices.p_plus >= n as f64 {
        return Err(OrliczError::Unsupported(format!(
            "p⁺ = {} ≥ n = {n}: the Sobolev conjugate is not of power type",
            base_indices.p_plus
        )));
    }
    let integ = check_integrability(y, n)?;
    if !integ.at_zero {
        return Err(OrliczError::Unsupported("(τ/A)^(1/(n−1)) is not integrable at 0".into()));
    }
    if !integ.at_infinity {
        return Err(OrliczError::Unsupported(
            "(τ/A)^(1/(n−1)) appears integrable at ∞; A_n would be bounded-type".into(),
        ));
    }
    let table = build_h(y, n, grid)?;
    let e = table.exponent();
    let mut xs = Vec::with_capacity(table.x.len());
    let mut ys = Vec::with_capacity(table.x.len());
    let mut ds = Vec::with_capacity(table.x.len());
    for j in 0..table.x.len() {
        let x = table.x[j];
        xs.push(e * table.ln_i[j]);
        ys.push(y.ln_eval(x)?);
        // d ln A_n / d ln s = (d ln A/dx) / (d ln H/dx)
        ds.push(y.ln_ratio(x)? / (e * (table.ln_g[j] - table.ln_i[j]).exp()));
    }
    let an = YoungFunction::from_log_table(LogHermite::new(xs, ys, ds)?);
    let (s_lo, s_hi) = an.default_range();
    let pn_indices = estimate_indices(&an, s_lo, s_hi, 20_000)?;
    Ok(SobolevConjugate { base: y.clone(), base_indices, n, table, an, pn_indices })
}

impl SobolevConjugate {
    pub fn base(&self) -> &YoungFunction {
        &self.base
    }

    pub fn base_indices(&self) -> &GrowthIndices {
        &self.base_indices
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &HTable {
        &self.table
    }

    pub fn an(&self) -> &YoungFunction {
        &self.an
    }

    pub fn pn_indices(&self) -> &GrowthIndices {
        &self.pn_indices
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        self.table.h(t)
    }

    pub fn h_inverse(&self, s: f64) -> Result<f64> {
        self.table.h_inverse(s)
    }

    /// A_n(s).
    pub fn an_eval(&self, s: f64) -> Result<f64> {
        self.an.eval(s)
    }

    /// a_n(s) = A_n'(s), from the chain rule a(t)/H'(t) at t = H⁻¹(s).
    pub fn an_density(&self, s: f64) -> Result<f64> {
        self.an.density(s)
    }

    /// (p⁻)_* and (p⁺)_*.
    pub fn critical_exponents(&self) -> (f64, f64) {
        (
            GrowthIndices::sobolev_exponent(self.base_indices.p_minus, self.n),
            GrowthIndices::sobolev_exponent(self.base_indices.p_plus, self.n),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub holds: bool,
    pub c1: f64,
    pub c2: f64,
}

fn anchored_bounds(
    range: (f64, f64),
    e_lo: f64,
    e_hi: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<BoundsCheck> {
    const REL: f64 = 1e-9;
    let (lo, hi) = range;
    if !(lo > 1.0) || !(hi > lo) {
        return Err(OrliczError::Config(format!("bound range must lie in (1, ∞), got [{lo}, {hi}]")));
    }
    let v0 = f(lo)?;
    let c1 = v0 / lo.powf(e_lo);
    let c2 = v0 / lo.powf(e_hi);
    let mut holds = true;
    for t in log_space(lo, hi, 400) {
        let v = f(t)?;
        if v < c1 * t.powf(e_lo) * (1.0 - REL) || v > c2 * t.powf(e_hi) * (1.0 + REL) {
            holds = false;
        }
    }
    Ok(BoundsCheck { holds, c1, c2 })
}

/// C₁ t^{n/(n−p⁻)} ≤ H⁻¹(t) ≤ C₂ t^{n/(n−p⁺)} with constants fitted at the
/// start of the range.
pub fn check_h_bounds(s: &SobolevConjugate, range: (f64, f64)) -> Result<BoundsCheck> {
    let nf = s.n as f64;
    let e1 = nf / (nf - s.base_indices.p_minus);
    let e2 = nf / (nf - s.base_indices.p_plus);
    anchored_bounds(range, e1, e2, |t| s.h_inverse(t))
}

/// C₁ t^{(p⁻)_*} ≤ A_n(t) ≤ C₂ t^{(p⁺)_*}, constants fitted at range start.
pub fn check_an_power_bounds(s: &SobolevConjugate, range: (f64, f64)) -> Result<BoundsCheck> {
    let (e1, e2) = s.critical_exponents();
    anchored_bounds(range, e1, e2, |t| s.an_eval(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta2Inheritance {
    pub holds: bool,
    pub c0: f64,
    pub delta0: f64,
    pub cota_h_holds: bool,
}

/// H(2t) ≥ 2^{1−p⁺/n} H(t) on the table, then A_n((1+δ₀)s) ≤ C₀ A_n(s).
pub fn check_an_delta2(s: &SobolevConjugate) -> Result<Delta2Inheritance> {
    const REL: f64 = 1e-10;
    let nf = s.n as f64;
    let k = 1.0 - s.base_indices.p_plus / nf;
    let delta0 = 2f64.powf(k) - 1.0;
    let ln2 = std::f64::consts::LN_2;
    let x = &s.table.x;
    let stride = (x.len() / 4000).max(1);
    let mut cota = true;
    for j in (0..x.len()).step_by(stride) {
        if x[j] + ln2 > x[x.len() - 1] {
            break;
        }
        let d = s.table.ln_h(x[j] + ln2)? - s.table.ln_h(x[j])?;
        if d < k * ln2 - REL * (1.0 + s.table.ln_h(x[j])?.abs()) {
            cota = false;
        }
    }
    let l = delta0.ln_1p();
    let an = &s.an;
    let (s_lo, s_hi) = an.default_range();
    let (a, b) = (s_lo.ln(), an.ln_t_max().min(s_hi.ln()) - l);
    let mut c0 = 0.0f64;
    let m = 4000;
    for i in 0..m {
        let xs = a + (b - a) * i as f64 / (m - 1) as f64;
        c0 = c0.max(an.ln_shift(xs, l)?.exp());
    }
    Ok(Delta2Inheritance { holds: cota && c0.is_finite() && c0 <= OVERFLOW_CAP, c0, delta0, cota_h_holds: cota })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_h_matches_closed_form() {
        let y = YoungFunction::power(2.0).unwrap();
        let s = build_an(&y, 4).unwrap();
        let h1 = 1.5f64.powf(0.75);
        assert!((s.h(1.0).unwrap() / h1 - 1.0).abs() < 1e-12);
        assert_eq!(s.h(0.0).unwrap(), 0.0);
        let hi = (2.0f64 / 3.0).powf(1.5);
        assert!((s.h_inverse(1.0).unwrap() / hi - 1.0).abs() < 1e-12);
        assert!((s.h_inverse(s.h(2.0).unwrap()).unwrap() - 2.0).abs() < 1e-12);
        assert!((s.an_eval(1.0).unwrap() * 27.0 / 8.0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unsupported_regime_is_rejected() {
        let y = YoungFunction::power(4.5).unwrap();
        assert!(matches!(build_an(&y, 4), Err(OrliczError::Unsupported(_))));
    }

    #[test]
    fn integrability_verdicts() {
        let v = check_integrability(&YoungFunction::power(2.0).unwrap(), 4).unwrap();
        assert!(v.at_infinity && v.at_zero);
        let v = check_integrability(&YoungFunction::power(3.0).unwrap(), 3).unwrap();
        assert!(v.at_infinity);
        let v = check_integrability(&YoungFunction::power(5.0).unwrap(), 4).unwrap();
        assert!(!v.at_infinity);
    }
}
