//! Matuszewska-Orlicz function M(t) = limsup_{s→∞} A(st)/A(s) and its index.

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::numerics::decade_space;
use crate::young::{GrowthIndices, YoungFunction};

/// Geometric s-grid in log10 units. The limsup is proxied by the maximum
/// over the top `window_decades` of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SGrid {
    pub log10_lo: f64,
    pub log10_hi: f64,
    pub per_decade: usize,
    pub window_decades: f64,
}

impl SGrid {
    /// Closed forms are evaluated in log space, so the window can sit far
    /// out; tables are limited by their validated range.
    pub fn default_for(y: &YoungFunction, t_hi: f64) -> Result<SGrid> {
        if y.is_closed_form() {
            return Ok(SGrid { log10_lo: 0.0, log10_hi: 1000.0, per_decade: 64, window_decades: 3.0 });
        }
        let hi = (y.ln_t_max() - t_hi.ln()) / std::f64::consts::LN_10;
        if hi < 6.0 {
            return Err(OrliczError::Range {
                what: "Matuszewska s-grid",
                value: hi,
                max: 6.0,
            });
        }
        Ok(SGrid { log10_lo: 0.0, log10_hi: hi, per_decade: 64, window_decades: 3.0 })
    }

    fn window(&self) -> Vec<f64> {
        let lo = (self.log10_hi - self.window_decades).max(self.log10_lo);
        let n = ((self.log10_hi - lo) * self.per_decade as f64).round() as usize + 1;
        (0..n.max(2))
            .map(|i| (lo + (self.log10_hi - lo) * i as f64 / (n.max(2) - 1) as f64) * std::f64::consts::LN_10)
            .collect()
    }
}

/// max over the s-window of A(st)/A(s).
pub fn mo_function(y: &YoungFunction, t: f64, s_grid: &SGrid) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(OrliczError::Domain { what: "M(t)", value: t });
    }
    if s_grid.log10_hi < 6.0 {
        return Err(OrliczError::Config("s-grid must reach at least 1e6".into()));
    }
    let lt = t.ln();
    let mut best = f64::NEG_INFINITY;
    for xs in s_grid.window() {
        if !y.is_closed_form() && xs + lt > y.ln_t_max() {
            return Err(OrliczError::Range {
                what: "A(st) in M(t); use a smaller t or a closed-form family",
                value: ((xs + lt) / std::f64::consts::LN_10).exp(),
                max: y.t_max(),
            });
        }
        best = best.max(y.ln_shift(xs, lt)?);
    }
    Ok(best.exp())
}

#[derive(Debug, Clone)]
pub struct MatuszewskaProfile {
    base: YoungFunction,
    t_grid: Vec<f64>,
    m_values: Vec<f64>,
    p_infinity: f64,
    p_infinity_uncertainty: f64,
    s_grid: SGrid,
}

/// Default t-grid: 10^-6 … 10^6 with 100 points per decade, including 1.
pub fn default_t_grid() -> Vec<f64> {
    decade_space(-6.0, 6.0, 1201)
}

pub fn build_profile(y: &YoungFunction, t_grid: &[f64], s_grid: &SGrid) -> Result<MatuszewskaProfile> {
    if t_grid.len() < 4 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(OrliczError::Config("t-grid must be positive and strictly increasing".into()));
    }
    let mut m_values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        m_values.push(mo_function(y, t, s_grid)?);
    }
    // the sup of increasing functions is increasing; remove window noise
    for i in 1..m_values.len() {
        if m_values[i] < m_values[i - 1] {
            m_values[i] = m_values[i - 1];
        }
    }
    let mut p = MatuszewskaProfile {
        base: y.clone(),
        t_grid: t_grid.to_vec(),
        m_values,
        p_infinity: f64::NAN,
        p_infinity_uncertainty: f64::NAN,
        s_grid: *s_grid,
    };
    p.p_infinity = mo_index(&p)?;
    let last = *p.t_grid.last().unwrap();
    p.p_infinity_uncertainty = (p.m_values.last().unwrap().ln() / last.ln() - p.p_infinity).abs();
    Ok(p)
}

/// Profile on the default grids.
pub fn profile(y: &YoungFunction) -> Result<MatuszewskaProfile> {
    let t = default_t_grid();
    let s = SGrid::default_for(y, *t.last().unwrap())?;
    build_profile(y, &t, &s)
}

/// inf over sampled t > 1 of ln M(t) / ln t.
pub fn mo_index(p: &MatuszewskaProfile) -> Result<f64> {
    if p.m_values.iter().any(|&m| !(m > 0.0)) {
        return Err(OrliczError::InvalidProfile("M(t) must be positive on the grid".into()));
    }
    let mut best = f64::INFINITY;
    for (&t, &m) in p.t_grid.iter().zip(&p.m_values) {
        if t > 1.0 + 1e-9 {
            best = best.min(m.ln() / t.ln());
        }
    }
    if !best.is_finite() {
        return Err(OrliczError::InvalidProfile("t-grid has no points above 1".into()));
    }
    Ok(best)
}

/// Smallest grid t₀ ≥ 1 with t^{p∞} ≤ M(t) ≤ t^{p∞+ε} on every sampled
/// t ≥ t₀; the tail must contain at least three points.
pub fn check_sandwich(p: &MatuszewskaProfile, eps: f64) -> (bool, f64) {
    const REL: f64 = 1e-12;
    let n = p.t_grid.len();
    let mut start = n;
    for i in (0..n).rev() {
        let t = p.t_grid[i];
        if t < 1.0 {
            break;
        }
        let m = p.m_values[i];
        let lo = t.powf(p.p_infinity);
        let hi = t.powf(p.p_infinity + eps);
        if m < lo * (1.0 - REL) || m > hi * (1.0 + REL) {
            break;
        }
        start = i;
    }
    if n - start >= 3 {
        (true, p.t_grid[start])
    } else {
        (false, f64::NAN)
    }
}

/// Grid evidence that M is a Young function: midpoint convexity,
/// M(t) ≤ t^{p⁻} for t < 1, M(t) ≥ t^{p⁻} for t ≥ 1 and M(t)/t
/// nondecreasing over the upper half of the grid.
pub fn check_m_young(p: &MatuszewskaProfile, idx: &GrowthIndices) -> Result<bool> {
    const REL: f64 = 1e-9;
    for w in p.t_grid.windows(3) {
        let mid = 0.5 * (w[0] + w[2]);
        let m_mid = mo_function(&p.base, mid, &p.s_grid)?;
        let m0 = mo_function(&p.base, w[0], &p.s_grid)?;
        let m2 = mo_function(&p.base, w[2], &p.s_grid)?;
        if m_mid > 0.5 * (m0 + m2) * (1.0 + REL) {
            return Ok(false);
        }
    }
    for (&t, &m) in p.t_grid.iter().zip(&p.m_values) {
        let bound = t.powf(idx.p_minus);
        if t < 1.0 && m > bound * (1.0 + REL) {
            return Ok(false);
        }
        if t >= 1.0 && m < bound * (1.0 - REL) {
            return Ok(false);
        }
    }
    let half = p.t_grid.len() / 2;
    let mut prev = 0.0;
    for (&t, &m) in p.t_grid[half..].iter().zip(&p.m_values[half..]) {
        let q = m / t;
        if q < prev * (1.0 - REL) {
            return Ok(false);
        }
        prev = q;
    }
    Ok(true)
}

impl MatuszewskaProfile {
    pub fn base(&self) -> &YoungFunction {
        &self.base
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn m_values(&self) -> &[f64] {
        &self.m_values
    }

    pub fn p_infinity(&self) -> f64 {
        self.p_infinity
    }

    pub fn p_infinity_uncertainty(&self) -> f64 {
        self.p_infinity_uncertainty
    }

    pub fn s_grid(&self) -> &SGrid {
        &self.s_grid
    }

    /// M(t) by log-log interpolation of the profile, extended by the end
    /// slopes outside the grid.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(OrliczError::Domain { what: "M", value: t });
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_eval(t.ln()).exp())
    }

    fn ln_eval(&self, x: f64) -> f64 {
        let n = self.t_grid.len();
        let xs = |i: usize| self.t_grid[i].ln();
        let ys = |i: usize| self.m_values[i].ln();
        let i = if x <= xs(0) {
            0
        } else if x >= xs(n - 1) {
            n - 2
        } else {
            self.t_grid.partition_point(|&t| t.ln() <= x).saturating_sub(1).min(n - 2)
        };
        let (x0, x1, y0, y1) = (xs(i), xs(i + 1), ys(i), ys(i + 1));
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// M⁻¹(y) by bisection on the interpolated profile.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(OrliczError::Domain { what: "M⁻¹", value: y });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let ly = y.ln();
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.ln_eval(lo) > ly {
            lo *= 2.0;
            if lo < -1e4 {
                return Err(OrliczError::Range { what: "M⁻¹", value: y, max: f64::INFINITY });
            }
        }
        while self.ln_eval(hi) < ly {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(OrliczError::Range { what: "M⁻¹", value: y, max: f64::INFINITY });
            }
        }
        Ok(crate::numerics::bisect(lo, hi, |x| self.ln_eval(x) - ly).exp())
    }
}
