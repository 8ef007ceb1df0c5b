//! Young functions A(t) = ∫₀ᵗ a, their complementary functions, growth
//! indices, Δ₂ diagnostics and the elementary inequalities built on them.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::numerics::{bisect, locate, log_space, softplus};

/// ln A is capped here when deriving `t_max` for closed forms, leaving
/// headroom below f64 overflow (ln f64::MAX ≈ 709.78).
const LN_EVAL_CAP: f64 = 700.0;

/// Searched constants above this value are reported as failures.
pub const OVERFLOW_CAP: f64 = 1e12;

/// Default lower end of every "for all t" grid.
pub const DEFAULT_T_LO: f64 = 1e-8;
/// Default upper end of every "for all t" grid (clipped to `t_max`).
pub const DEFAULT_T_HI: f64 = 1e8;
/// Default grid density for index and Δ₂ scans.
pub const POINTS_PER_DECADE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    /// a(t) = a_i on [t_i, t_{i+1})
    Step,
    /// a linear between nodes
    Linear,
}

/// Tabulated density with exact cumulative values of its interpolant.
#[derive(Debug, Clone)]
pub struct DensityTable {
    t: Vec<f64>,
    a: Vec<f64>,
    cum: Vec<f64>,
    err: Vec<f64>,
    interp: Interp,
}

impl DensityTable {
    fn build(t: Vec<f64>, a: Vec<f64>, interp: Interp) -> Self {
        let n = t.len();
        let mut cum = vec![0.0; n];
        let mut err = vec![0.0; n];
        for i in 0..n - 1 {
            let h = t[i + 1] - t[i];
            let (inc, e) = match interp {
                Interp::Linear => (0.5 * (a[i] + a[i + 1]) * h, 0.5 * (a[i + 1] - a[i]).abs() * h),
                Interp::Step => (a[i] * h, (a[i + 1] - a[i]).abs() * h),
            };
            cum[i + 1] = cum[i] + inc;
            err[i + 1] = err[i] + e;
        }
        DensityTable { t, a, cum, err, interp }
    }

    /// Table from exact cumulative values of a piecewise-linear A; the
    /// density is the chord slope on each cell.
    fn from_cumulative(t: Vec<f64>, cum: Vec<f64>) -> Self {
        let n = t.len();
        let mut a = vec![0.0; n];
        for i in 0..n - 1 {
            a[i] = (cum[i + 1] - cum[i]) / (t[i + 1] - t[i]);
            if i > 0 && a[i] < a[i - 1] {
                a[i] = a[i - 1];
            }
        }
        a[n - 1] = a[n - 2];
        let err = vec![0.0; n];
        DensityTable { t, a, cum, err, interp: Interp::Step }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn samples(&self) -> &[f64] {
        &self.a
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    /// Bound on |A_table − A_true| at `t` for a monotone density sampled at
    /// the nodes.
    pub fn error_bound(&self, t: f64) -> f64 {
        let i = locate(&self.t, t);
        let w = ((t - self.t[i]) / (self.t[i + 1] - self.t[i])).clamp(0.0, 1.0);
        self.err[i] + w * (self.err[i + 1] - self.err[i])
    }

    fn eval(&self, t: f64) -> f64 {
        let i = locate(&self.t, t);
        let dt = t - self.t[i];
        match self.interp {
            Interp::Step => self.cum[i] + self.a[i] * dt,
            Interp::Linear => {
                let h = self.t[i + 1] - self.t[i];
                let m = if h > 0.0 { (self.a[i + 1] - self.a[i]) / h } else { 0.0 };
                self.cum[i] + self.a[i] * dt + 0.5 * m * dt * dt
            }
        }
    }

    fn density(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let n = self.t.len();
        if t >= self.t[n - 1] {
            return self.a[n - 1];
        }
        let i = locate(&self.t, t);
        match self.interp {
            Interp::Step => self.a[i],
            Interp::Linear => {
                let h = self.t[i + 1] - self.t[i];
                self.a[i] + (self.a[i + 1] - self.a[i]) * (t - self.t[i]) / h
            }
        }
    }

    fn density_left(&self, t: f64) -> f64 {
        match self.interp {
            Interp::Linear => self.density(t),
            Interp::Step => {
                let i = self.t.partition_point(|&v| v < t);
                if i == 0 {
                    0.0
                } else {
                    self.a[i - 1]
                }
            }
        }
    }

    fn density_derivative(&self, t: f64) -> f64 {
        match self.interp {
            Interp::Step => 0.0,
            Interp::Linear => {
                let i = locate(&self.t, t);
                let h = self.t[i + 1] - self.t[i];
                if h > 0.0 {
                    (self.a[i + 1] - self.a[i]) / h
                } else {
                    0.0
                }
            }
        }
    }

    fn inverse(&self, y: f64) -> f64 {
        let n = self.t.len();
        let j = self.cum.partition_point(|&c| c <= y);
        if j >= n {
            return self.t[n - 1];
        }
        let i = j - 1;
        let d = y - self.cum[i];
        let dt = match self.interp {
            Interp::Step => d / self.a[i],
            Interp::Linear => {
                let h = self.t[i + 1] - self.t[i];
                let m = (self.a[i + 1] - self.a[i]) / h;
                2.0 * d / (self.a[i] + (self.a[i] * self.a[i] + 2.0 * m * d).sqrt())
            }
        };
        (self.t[i] + dt).min(self.t[i + 1])
    }
}

/// ln A as a cubic Hermite interpolant in (ln t, ln A) with exact slopes
/// t a(t)/A(t) at the nodes; power-law extension below the first node.
#[derive(Debug, Clone)]
pub struct LogHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl LogHermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() || x.len() != d.len() {
            return Err(OrliczError::Degenerate("log-Hermite table needs ≥ 2 matching nodes".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) || y.windows(2).any(|w| w[1] < w[0]) {
            return Err(OrliczError::Degenerate("log-Hermite nodes must increase".into()));
        }
        if d.iter().any(|&v| !(v > 1.0) || !v.is_finite()) {
            return Err(OrliczError::Degenerate("log-Hermite slopes must exceed 1".into()));
        }
        Ok(LogHermite { x, y, d })
    }

    pub fn nodes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.x, &self.y, &self.d)
    }

    fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// (y, y', y'') at x.
    fn eval3(&self, x: f64) -> (f64, f64, f64) {
        if x <= self.x[0] {
            return (self.y[0] + self.d[0] * (x - self.x[0]), self.d[0], 0.0);
        }
        let i = locate(&self.x, x);
        let h = self.x[i + 1] - self.x[i];
        let u = (x - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let y = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        let dy = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * m1)
            / h;
        let ddy = ((12.0 * u - 6.0) * y0
            + (6.0 * u - 4.0) * m0
            + (-12.0 * u + 6.0) * y1
            + (6.0 * u - 2.0) * m1)
            / (h * h);
        (y, dy, ddy)
    }
}

#[derive(Debug, Clone)]
pub enum Density {
    /// A = coef·t^p
    Power { p: f64, coef: f64 },
    /// A = coef·t^p·ln(1+t)^q
    PowerLog { p: f64, q: f64, coef: f64 },
    /// A = max{t^p_lo, t^p_hi}, breakpoint at 1
    PiecewisePower { p_lo: f64, p_hi: f64 },
    Table(Arc<DensityTable>),
    LogTable(Arc<LogHermite>),
}

#[derive(Debug, Clone)]
pub struct YoungFunction {
    density: Density,
    ln_t_max: f64,
}

fn check_arg(what: &'static str, t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(OrliczError::Domain { what, value: t });
    }
    Ok(())
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        Self::power_coef(p, 1.0)
    }

    pub fn power_coef(p: f64, coef: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(OrliczError::Config(format!("power exponent p = {p} must satisfy 1 < p < ∞")));
        }
        if !(coef > 0.0) || !coef.is_finite() {
            return Err(OrliczError::Config(format!("power coefficient {coef} must be positive")));
        }
        let ln_t_max = (LN_EVAL_CAP - coef.ln()) / p;
        Ok(YoungFunction { density: Density::Power { p, coef }, ln_t_max })
    }

    pub fn power_log(p: f64, q: f64) -> Result<Self> {
        Self::power_log_coef(p, q, 1.0)
    }

    pub fn power_log_coef(p: f64, q: f64, coef: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() || !(q >= 0.0) || !q.is_finite() {
            return Err(OrliczError::Config(format!(
                "power_log needs p > 1 and q ≥ 0 (got p = {p}, q = {q})"
            )));
        }
        if !(coef > 0.0) || !coef.is_finite() {
            return Err(OrliczError::Config(format!("power_log coefficient {coef} must be positive")));
        }
        let mut y = YoungFunction { density: Density::PowerLog { p, q, coef }, ln_t_max: f64::INFINITY };
        let f = |x: f64| y.ln_eval_closed(x) - LN_EVAL_CAP;
        y.ln_t_max = bisect(-1.0, LN_EVAL_CAP / p + 1.0, f);
        // density must be nondecreasing for A to be a Young function
        let grid = log_space(1e-12, 1e12, 2400);
        let mut prev = 0.0;
        for &t in &grid {
            let a = y.density(t)?;
            if a < prev * (1.0 - 1e-12) {
                return Err(OrliczError::Config(format!(
                    "power_log(p = {p}, q = {q}) has a decreasing density near t = {t:e}"
                )));
            }
            prev = a;
        }
        Ok(y)
    }

    pub fn piecewise_power(p_lo: f64, p_hi: f64) -> Result<Self> {
        if !(p_lo > 1.0) || !(p_hi >= p_lo) || !p_hi.is_finite() {
            return Err(OrliczError::Config(format!(
                "piecewise power needs 1 < p_lo ≤ p_hi < ∞ (got {p_lo}, {p_hi})"
            )));
        }
        Ok(YoungFunction {
            density: Density::PiecewisePower { p_lo, p_hi },
            ln_t_max: LN_EVAL_CAP / p_hi,
        })
    }

    /// Young function from density samples. A leading (0, 0) node is added
    /// for linear tables that start at t > 0.
    pub fn from_samples(t: &[f64], a: &[f64], interp: Interp) -> Result<Self> {
        if t.len() != a.len() || t.len() < 2 {
            return Err(OrliczError::Config("density table needs ≥ 2 (t, a) rows of equal length".into()));
        }
        if t.iter().chain(a).any(|v| !v.is_finite()) {
            return Err(OrliczError::Config("density table has non-finite entries".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OrliczError::Config("density table t must be strictly increasing".into()));
        }
        if t[0] < 0.0 {
            return Err(OrliczError::Config("density table t must be nonnegative".into()));
        }
        if a.windows(2).any(|w| w[1] < w[0]) {
            return Err(OrliczError::Config("density samples must be nondecreasing".into()));
        }
        let (mut tv, mut av) = (t.to_vec(), a.to_vec());
        match interp {
            Interp::Linear => {
                if tv[0] > 0.0 {
                    tv.insert(0, 0.0);
                    av.insert(0, 0.0);
                }
                if av[0] != 0.0 {
                    return Err(OrliczError::Config("density must vanish at t = 0".into()));
                }
                if av[1] <= 0.0 {
                    return Err(OrliczError::Config("density must be positive for t > 0".into()));
                }
            }
            Interp::Step => {
                if tv[0] != 0.0 {
                    return Err(OrliczError::Config("step density tables must start at t = 0".into()));
                }
                if av[0] <= 0.0 {
                    return Err(OrliczError::Config("step density must be positive on (0, t_1)".into()));
                }
            }
        }
        let ln_t_max = tv[tv.len() - 1].ln();
        Ok(YoungFunction { density: Density::Table(Arc::new(DensityTable::build(tv, av, interp))), ln_t_max })
    }

    /// Reads a two-column CSV `t,a_of_t` (header optional).
    pub fn from_csv(path: &Path, interp: Interp) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let (mut t, mut a) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(OrliczError::Config(format!(
                    "{}: line {}: expected 2 columns",
                    path.display(),
                    line + 1
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    t.push(x);
                    a.push(y);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(OrliczError::Config(format!(
                        "{}: line {}: non-numeric entry",
                        path.display(),
                        line + 1
                    )))
                }
            }
        }
        Self::from_samples(&t, &a, interp)
    }

    pub fn from_log_table(table: LogHermite) -> Self {
        let ln_t_max = table.x_max();
        YoungFunction { density: Density::LogTable(Arc::new(table)), ln_t_max }
    }

    pub fn kind(&self) -> &Density {
        &self.density
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(
            self.density,
            Density::Power { .. } | Density::PowerLog { .. } | Density::PiecewisePower { .. }
        )
    }

    pub fn describe(&self) -> String {
        match &self.density {
            Density::Power { p, coef } if *coef == 1.0 => format!("t^{p}"),
            Density::Power { p, coef } => format!("{coef}*t^{p}"),
            Density::PowerLog { p, q, coef } if *coef == 1.0 => format!("t^{p}*log(1+t)^{q}"),
            Density::PowerLog { p, q, coef } => format!("{coef}*t^{p}*log(1+t)^{q}"),
            Density::PiecewisePower { p_lo, p_hi } => format!("max(t^{p_lo},t^{p_hi})"),
            Density::Table(tb) => format!("table({} nodes, {:?})", tb.t.len(), tb.interp),
            Density::LogTable(tb) => format!("log-table({} nodes)", tb.x.len()),
        }
    }

    /// Upper end of the validated range (may be +∞ in f64 for log tables).
    pub fn t_max(&self) -> f64 {
        self.ln_t_max.exp()
    }

    pub fn ln_t_max(&self) -> f64 {
        self.ln_t_max
    }

    fn ln_eval_closed(&self, x: f64) -> f64 {
        match self.density {
            Density::Power { p, coef } => coef.ln() + p * x,
            Density::PowerLog { p, q, coef } => {
                let ln_l = if x < -30.0 { x - 0.5 * x.exp() } else { softplus(x).ln() };
                coef.ln() + p * x + if q == 0.0 { 0.0 } else { q * ln_l }
            }
            Density::PiecewisePower { p_lo, p_hi } => {
                if x < 0.0 {
                    p_lo * x
                } else {
                    p_hi * x
                }
            }
            _ => unreachable!(),
        }
    }

    fn range_check(&self, what: &'static str, t: f64) -> Result<()> {
        check_arg(what, t)?;
        if t > 0.0 && t.ln() > self.ln_t_max {
            return Err(OrliczError::Range { what, value: t, max: self.t_max() });
        }
        Ok(())
    }

    /// A(t).
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.range_check("A", t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.density {
            Density::Power { p, coef } => coef * t.powf(*p),
            Density::PowerLog { p, q, coef } => coef * t.powf(*p) * t.ln_1p().powf(*q),
            Density::PiecewisePower { p_lo, p_hi } => {
                if t < 1.0 {
                    t.powf(*p_lo)
                } else {
                    t.powf(*p_hi)
                }
            }
            Density::Table(tb) => tb.eval(t),
            Density::LogTable(tb) => tb.eval3(t.ln()).0.exp(),
        })
    }

    /// ln A(e^x). Closed forms accept any x; tables are limited to ln t_max.
    pub fn ln_eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(OrliczError::Domain { what: "ln A", value: x });
        }
        if x == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        match &self.density {
            Density::Table(tb) => {
                let x = self.clamp_ln(x, "ln A")?;
                Ok(tb.eval(x.exp()).ln())
            }
            Density::LogTable(tb) => {
                let x = self.clamp_ln(x, "ln A")?;
                Ok(tb.eval3(x).0)
            }
            _ => Ok(self.ln_eval_closed(x)),
        }
    }

    /// Accepts x up to a few ulps past ln t_max (round trips through exp/ln).
    fn clamp_ln(&self, x: f64, what: &'static str) -> Result<f64> {
        if x > self.ln_t_max + 1e-12 * self.ln_t_max.abs().max(1.0) {
            return Err(OrliczError::Range { what, value: x, max: self.ln_t_max });
        }
        Ok(x.min(self.ln_t_max))
    }

    /// ln A(e^{x+dx}) − ln A(e^x), without the cancellation of subtracting
    /// two large logarithms for closed forms.
    pub fn ln_shift(&self, x: f64, dx: f64) -> Result<f64> {
        match self.density {
            Density::Power { p, .. } => Ok(p * dx),
            Density::PowerLog { p, q, .. } => {
                let ln_l = |x: f64| if x < -30.0 { x - 0.5 * x.exp() } else { softplus(x).ln() };
                let lq = if q == 0.0 {
                    0.0
                } else if x > 30.0 && x + dx > 30.0 {
                    // ln L ≈ ln x + e^{-x}/x for large x
                    let l1 = softplus(x + dx);
                    let l0 = softplus(x);
                    q * ((l1 - l0) / l0).ln_1p()
                } else {
                    q * (ln_l(x + dx) - ln_l(x))
                };
                Ok(p * dx + lq)
            }
            Density::PiecewisePower { .. } => Ok(self.ln_eval_closed(x + dx) - self.ln_eval_closed(x)),
            _ => Ok(self.ln_eval(x + dx)? - self.ln_eval(x)?),
        }
    }

    /// (ρ, dρ/dx) where ρ = t a(t)/A(t) at t = e^x.
    fn index_fn(&self, x: f64) -> Result<(f64, f64)> {
        match &self.density {
            Density::Power { p, .. } => Ok((*p, 0.0)),
            Density::PowerLog { p, q, .. } => {
                if *q == 0.0 {
                    return Ok((*p, 0.0));
                }
                if x < -30.0 {
                    let e = x.exp();
                    return Ok((p + q * (1.0 - 0.5 * e), -0.5 * q * e));
                }
                let sig = 1.0 / (1.0 + (-x).exp());
                let sp = softplus(x);
                let r = sig / sp;
                let dr = (sig * (1.0 - sig) * sp - sig * sig) / (sp * sp);
                Ok((p + q * r, q * dr))
            }
            Density::PiecewisePower { p_lo, p_hi } => Ok((if x < 0.0 { *p_lo } else { *p_hi }, 0.0)),
            Density::Table(tb) => {
                let x = self.clamp_ln(x, "t a/A")?;
                let t = x.exp();
                let a = tb.density(t);
                let big_a = tb.eval(t);
                let r = t * a / big_a;
                let dr = if big_a > 0.0 {
                    t / big_a * (a + t * tb.density_derivative(t)) - r * r
                } else {
                    0.0
                };
                Ok((r, dr))
            }
            Density::LogTable(tb) => {
                let x = self.clamp_ln(x, "t a/A")?;
                let (_, d, dd) = tb.eval3(x);
                Ok((d, dd))
            }
        }
    }

    /// Index function t a(t)/A(t) at t = e^x.
    pub fn ln_ratio(&self, x: f64) -> Result<f64> {
        Ok(self.index_fn(x)?.0)
    }

    /// t a(t)/A(t) for t > 0.
    pub fn ratio(&self, t: f64) -> Result<f64> {
        self.range_check("t a/A", t)?;
        if t == 0.0 {
            return Err(OrliczError::Domain { what: "t a/A at 0", value: t });
        }
        self.ln_ratio(t.ln())
    }

    /// a(t), right-continuous.
    pub fn density(&self, t: f64) -> Result<f64> {
        self.range_check("a", t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.density {
            Density::Power { p, coef } => coef * p * t.powf(p - 1.0),
            Density::PiecewisePower { p_lo, p_hi } => {
                if t < 1.0 {
                    p_lo * t.powf(p_lo - 1.0)
                } else {
                    p_hi * t.powf(p_hi - 1.0)
                }
            }
            Density::Table(tb) => tb.density(t),
            _ => {
                let x = t.ln();
                (self.ln_eval(x)? - x).exp() * self.ln_ratio(x)?
            }
        })
    }

    /// Left limit a(t⁻); differs from `density` only at jumps.
    pub fn density_left(&self, t: f64) -> Result<f64> {
        self.range_check("a", t)?;
        match (&self.density, t) {
            (Density::PiecewisePower { p_lo, .. }, 1.0) => Ok(*p_lo),
            (Density::Table(tb), t) => Ok(tb.density_left(t)),
            _ => self.density(t),
        }
    }

    /// a'(t) for t > 0 (zero on flat cells of step tables).
    pub fn density_derivative(&self, t: f64) -> Result<f64> {
        self.range_check("a'", t)?;
        if t == 0.0 {
            return Err(OrliczError::Domain { what: "a' at 0", value: t });
        }
        match &self.density {
            Density::Power { p, coef } => Ok(coef * p * (p - 1.0) * t.powf(p - 2.0)),
            Density::Table(tb) => Ok(tb.density_derivative(t)),
            _ => {
                let x = t.ln();
                let (r, dr) = self.index_fn(x)?;
                Ok((self.ln_eval(x)? - 2.0 * x).exp() * (r * r - r + dr))
            }
        }
    }

    /// A⁻¹(y).
    pub fn inverse(&self, y: f64) -> Result<f64> {
        check_arg("A⁻¹", y)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        let ly = y.ln();
        let cap = self.ln_eval(self.ln_t_max)?;
        if ly > cap + 1e-12 * cap.abs().max(1.0) {
            return Err(OrliczError::Range { what: "A⁻¹", value: y, max: cap.exp() });
        }
        match &self.density {
            Density::Power { p, coef } => Ok((y / coef).powf(1.0 / p)),
            Density::PiecewisePower { p_lo, p_hi } => {
                Ok(if y < 1.0 { y.powf(1.0 / p_lo) } else { y.powf(1.0 / p_hi) })
            }
            Density::Table(tb) => Ok(tb.inverse(y)),
            _ => self.ln_inverse(ly).map(f64::exp),
        }
    }

    /// x with ln A(e^x) = ly, by bisection in log space.
    pub fn ln_inverse(&self, ly: f64) -> Result<f64> {
        if ly == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let hi = self.ln_t_max;
        if self.ln_eval(hi)? < ly {
            return Err(OrliczError::Range { what: "A⁻¹", value: ly.exp(), max: self.ln_eval(hi)?.exp() });
        }
        let mut lo = hi.min(0.0) - 1.0;
        let mut guard = 0;
        while self.ln_eval(lo)? >= ly {
            lo = 2.0 * lo - 1.0;
            guard += 1;
            if guard > 60 {
                return Err(OrliczError::Degenerate("A⁻¹ bracket search failed".into()));
            }
        }
        Ok(bisect(lo, hi, |x| self.ln_eval(x).map(|v| v - ly).unwrap_or(f64::INFINITY)))
    }

    /// Growth indices computed analytically for closed forms.
    pub fn analytic_indices(&self) -> Option<GrowthIndices> {
        let full = (0.0, f64::INFINITY);
        match self.density {
            Density::Power { p, .. } => Some(GrowthIndices {
                p_minus: p,
                p_plus: p,
                delta2_constant: 2f64.powf(p),
                sample_range: full,
            }),
            Density::PowerLog { p, q, .. } => Some(GrowthIndices {
                p_minus: p,
                p_plus: p + q,
                delta2_constant: 2f64.powf(p + q),
                sample_range: full,
            }),
            Density::PiecewisePower { p_lo, p_hi } => Some(GrowthIndices {
                p_minus: p_lo,
                p_plus: p_hi,
                delta2_constant: 2f64.powf(p_hi),
                sample_range: full,
            }),
            _ => None,
        }
    }

    /// Default sampling range for grid-based checks.
    pub fn default_range(&self) -> (f64, f64) {
        match &self.density {
            Density::Table(tb) => {
                let t1 = tb.t[1];
                let hi = self.t_max();
                ((t1 * 100.0).min(hi * 1e-2), hi)
            }
            Density::LogTable(tb) => (tb.x[0].exp(), self.ln_t_max.min(700.0).exp()),
            _ => (DEFAULT_T_LO, DEFAULT_T_HI.min(0.5 * self.t_max())),
        }
    }

    /// Analytic indices when available, otherwise a grid estimate over the
    /// default range.
    pub fn growth_indices(&self) -> Result<GrowthIndices> {
        if let Some(g) = self.analytic_indices() {
            return Ok(g);
        }
        let (lo, hi) = self.default_range();
        let decades = (hi / lo).log10().max(1.0);
        let n = ((decades * POINTS_PER_DECADE as f64) as usize).clamp(64, 200_000);
        estimate_indices(self, lo, hi, n)
    }

    /// Complementary function Ã(s) = sup_t (st − A(t)).
    ///
    /// Powers map to powers exactly; linear tables with strictly increasing
    /// samples swap columns; everything else goes through exact Legendre
    /// values Ã(a(t_j)) = t_j a(t_j) − A(t_j) at nodes t_j, joined by chords.
    pub fn conjugate(&self) -> Result<YoungFunction> {
        match &self.density {
            Density::Power { p, coef } => {
                let pp = p / (p - 1.0);
                let c = (coef * p).powf(-1.0 / (p - 1.0)) / pp;
                YoungFunction::power_coef(pp, c)
            }
            Density::Table(tb) if tb.interp == Interp::Linear && tb.a.windows(2).all(|w| w[1] > w[0]) => {
                YoungFunction::from_samples(&tb.a, &tb.t, Interp::Linear)
            }
            Density::Table(tb) => {
                let mut nodes = Vec::with_capacity(2 * tb.t.len());
                for i in 1..tb.t.len() {
                    let t = tb.t[i];
                    let left = tb.density_left(t);
                    let right = if i + 1 < tb.t.len() { tb.a[i] } else { left };
                    nodes.push((left, t * left - tb.cum[i]));
                    if right > left {
                        nodes.push((right, t * right - tb.cum[i]));
                    }
                }
                legendre_table(nodes)
            }
            _ => {
                let (lo, hi) = match &self.density {
                    Density::LogTable(tb) => (tb.x[0].exp(), self.ln_t_max.min(700.0).exp() * 0.999),
                    _ => (DEFAULT_T_LO, DEFAULT_T_HI.min(0.5 * self.t_max())),
                };
                let decades = (hi / lo).log10();
                let n = (decades * POINTS_PER_DECADE as f64).ceil() as usize + 1;
                let mut grid = log_space(lo, hi, n);
                if let Density::PiecewisePower { .. } = self.density {
                    grid.retain(|&t| t != 1.0);
                    let k = grid.partition_point(|&t| t < 1.0);
                    grid.insert(k, 1.0);
                }
                let mut nodes = Vec::with_capacity(grid.len() + 1);
                for &t in &grid {
                    let x = t.ln();
                    let big_a = self.ln_eval(x)?.exp();
                    let left = self.density_left(t)?;
                    let right = self.density(t)?;
                    if left < right {
                        nodes.push((left, t * left - big_a));
                        nodes.push((right, t * right - big_a));
                    } else {
                        let r = self.ln_ratio(x)?;
                        nodes.push((right, big_a * (r - 1.0)));
                    }
                }
                legendre_table(nodes)
            }
        }
    }
}

fn legendre_table(nodes: Vec<(f64, f64)>) -> Result<YoungFunction> {
    let mut s = vec![0.0];
    let mut c = vec![0.0];
    for (sv, cv) in nodes {
        if !(sv > 0.0) || !sv.is_finite() || !cv.is_finite() {
            continue;
        }
        if sv <= s[s.len() - 1] {
            continue;
        }
        let cv = cv.max(c[c.len() - 1]);
        s.push(sv);
        c.push(cv);
    }
    if s.len() < 3 || c[c.len() - 1] <= 0.0 {
        return Err(OrliczError::Degenerate("density has zero dynamic range; conjugate is trivial".into()));
    }
    let ln_t_max = s[s.len() - 1].ln();
    Ok(YoungFunction {
        density: Density::Table(Arc::new(DensityTable::from_cumulative(s, c))),
        ln_t_max,
    })
}

/// Lower and upper growth indices with the Δ₂ constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthIndices {
    pub p_minus: f64,
    pub p_plus: f64,
    pub delta2_constant: f64,
    pub sample_range: (f64, f64),
}

impl GrowthIndices {
    /// p_* = n p / (n − p), +∞ for p ≥ n.
    pub fn sobolev_exponent(p: f64, n: usize) -> f64 {
        let nf = n as f64;
        if p >= nf {
            f64::INFINITY
        } else {
            nf * p / (nf - p)
        }
    }
}

/// Extremes of t a(t)/A(t) and of A(2t)/A(t) on a log grid of [t_lo, t_hi].
pub fn estimate_indices(y: &YoungFunction, t_lo: f64, t_hi: f64, n_samples: usize) -> Result<GrowthIndices> {
    if !(t_lo > 0.0) || !(t_hi > t_lo) || n_samples < 16 {
        return Err(OrliczError::Config(format!(
            "index estimation needs 0 < t_lo < t_hi and ≥ 16 samples (got [{t_lo}, {t_hi}], {n_samples})"
        )));
    }
    let (x_lo, x_hi) = (t_lo.ln(), t_hi.ln());
    if x_hi > y.ln_t_max() * (1.0 + 1e-12) + 1e-12 {
        return Err(OrliczError::Range { what: "estimate_indices", value: t_hi, max: y.t_max() });
    }
    let x_hi = x_hi.min(y.ln_t_max());
    let xs: Vec<f64> = (0..n_samples)
        .map(|i| x_lo + (x_hi - x_lo) * i as f64 / (n_samples - 1) as f64)
        .collect();
    let mut ratios = Vec::with_capacity(n_samples);
    for &x in &xs {
        ratios.push(y.ln_ratio(x.min(y.ln_t_max()))?);
    }
    let p_minus = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let p_plus = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // an index function still climbing steeply at the grid edge means no finite p⁺
    let per_decade = (n_samples as f64 / ((x_hi - x_lo) / std::f64::consts::LN_10)).max(1.0);
    let back = (per_decade as usize).min(n_samples - 1);
    let tail = &ratios[n_samples - 1 - back..];
    let climbing = tail.windows(2).all(|w| w[1] >= w[0]) && tail[tail.len() - 1] > 1.5 * tail[0];
    if !p_plus.is_finite() || p_plus > 1e3 || climbing {
        return Err(OrliczError::NotDelta2(format!(
            "t a/A reaches {p_plus:.4e} and is still increasing at t = {t_hi:e}"
        )));
    }
    if !(p_minus > 1.0) {
        return Err(OrliczError::Degenerate(format!("estimated p⁻ = {p_minus} is not above 1")));
    }
    let ln2 = std::f64::consts::LN_2;
    let mut c = 1.0f64;
    for &x in &xs {
        if x + ln2 > y.ln_t_max() {
            break;
        }
        c = c.max((y.ln_eval(x + ln2)? - y.ln_eval(x)?).exp());
    }
    Ok(GrowthIndices { p_minus, p_plus, delta2_constant: c, sample_range: (t_lo, t_hi) })
}

fn default_grid(y: &YoungFunction) -> Vec<f64> {
    let (lo, hi) = y.default_range();
    let decades = (hi / lo).log10().max(1.0);
    let n = ((decades * POINTS_PER_DECADE as f64) as usize).clamp(64, 200_000);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Smallest sampled C_δ with A((1+δ)t) ≤ C_δ A(t) over the validated range,
/// and whether it stays below the overflow cap.
pub fn check_delta2_refined(y: &YoungFunction, delta: f64) -> Result<(bool, f64)> {
    if !(delta > 0.0) {
        return Err(OrliczError::Config(format!("δ = {delta} must be positive")));
    }
    let l = delta.ln_1p();
    let mut c = 0.0f64;
    for x in default_grid(y) {
        if x + l > y.ln_t_max() {
            break;
        }
        c = c.max((y.ln_eval(x + l)? - y.ln_eval(x)?).exp());
    }
    Ok((c.is_finite() && c <= OVERFLOW_CAP, c))
}

/// Minimal C_η with A(s+t) ≤ C_η A(s) + (1+η)^{p⁺} A(t) on the samples.
pub fn verify_sum_inequality(y: &YoungFunction, eta: f64, samples: &[(f64, f64)]) -> Result<(bool, f64)> {
    if !(eta > 0.0) {
        return Err(OrliczError::Config(format!("η = {eta} must be positive")));
    }
    let p_plus = y.growth_indices()?.p_plus;
    let k = (1.0 + eta).powf(p_plus);
    let mut c = 0.0f64;
    for &(s, t) in samples {
        let lhs = y.eval(s + t)?;
        let rest = lhs - k * y.eval(t)?;
        if rest <= 0.0 {
            continue;
        }
        let a_s = y.eval(s)?;
        if a_s == 0.0 {
            return Ok((false, f64::INFINITY));
        }
        c = c.max(rest / a_s);
    }
    Ok((c <= OVERFLOW_CAP, c))
}

/// min{s^{p⁻}, s^{p⁺}} A(t) ≤ A(st) ≤ max{s^{p⁻}, s^{p⁺}} A(t) within
/// relative tolerance `rel_tol`.
pub fn verify_scaling_inequality(
    y: &YoungFunction,
    idx: &GrowthIndices,
    samples: &[(f64, f64)],
    rel_tol: f64,
) -> Result<bool> {
    for &(s, t) in samples {
        let a_t = y.eval(t)?;
        let a_st = y.eval(s * t)?;
        let (u, v) = (s.powf(idx.p_minus), s.powf(idx.p_plus));
        let (lo, hi) = (u.min(v) * a_t, u.max(v) * a_t);
        if a_st < lo * (1.0 - rel_tol) || a_st > hi * (1.0 + rel_tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Count of pairs with st > A(t) + Ã(s) beyond relative slack `rel_tol`.
pub fn young_inequality_violations(
    y: &YoungFunction,
    conj: &YoungFunction,
    pairs: &[(f64, f64)],
    rel_tol: f64,
) -> Result<usize> {
    let mut bad = 0;
    for &(s, t) in pairs {
        let rhs = y.eval(t)? + conj.eval(s)?;
        if s * t > rhs * (1.0 + rel_tol) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Midpoint convexity on consecutive triples of the grid; returns the worst
/// excess A((a+b)/2) − (A(a)+A(b))/2 relative to the right-hand side.
pub fn midpoint_convexity_defect(y: &YoungFunction, grid: &[f64]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for w in grid.windows(3) {
        let (a, b) = (w[0], w[2]);
        let mid = y.eval(0.5 * (a + b))?;
        let rhs = 0.5 * (y.eval(a)? + y.eval(b)?);
        if rhs > 0.0 {
            worst = worst.max((mid - rhs) / rhs);
        }
    }
    Ok(worst)
}

/// A_∞(t) = max{t^{p⁺}, t^{p⁻}}.
pub fn a_infinity(idx: &GrowthIndices) -> Result<YoungFunction> {
    YoungFunction::piecewise_power(idx.p_minus, idx.p_plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Le,
    Equiv,
    EssentiallySmaller,
    Undecided,
}

/// Probe grid, uniform in log10 t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub log10_lo: f64,
    pub log10_hi: f64,
    pub n: usize,
}

impl Default for Probe {
    fn default() -> Self {
        Probe { log10_lo: -8.0, log10_hi: 12.0, n: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub relation: Relation,
    pub witness_constant: f64,
    pub witness_threshold: f64,
    /// (log10 t, A1(t)/A2(t)) at a thinned subset of the probe.
    pub limit_samples: Vec<(f64, f64)>,
}

/// Candidate constants c ∈ {2⁻⁴, …, 2⁸}.
pub fn comparison_constants() -> Vec<f64> {
    (-4..=8).map(|k| 2f64.powi(k)).collect()
}

/// Numeric evidence for A1 ≪ A2, A1 ≤ A2 or A1 ∼ A2 on the probe.
pub fn compare(y1: &YoungFunction, y2: &YoungFunction, probe: &Probe) -> Result<ComparisonVerdict> {
    if probe.n < 16 || !(probe.log10_hi > probe.log10_lo) {
        return Err(OrliczError::Config("probe needs ≥ 16 points and a nonempty range".into()));
    }
    let xs: Vec<f64> = (0..probe.n)
        .map(|i| {
            let e = probe.log10_lo + (probe.log10_hi - probe.log10_lo) * i as f64 / (probe.n - 1) as f64;
            e * std::f64::consts::LN_10
        })
        .collect();
    let cs = comparison_constants();
    let ln_ratio = |c: f64, x: f64, a: &YoungFunction, b: &YoungFunction| -> Result<f64> {
        Ok(a.ln_eval(c.ln() + x)? - b.ln_eval(x)?)
    };

    let stride = (probe.n / 20).max(1);
    let mut limit_samples = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        if i % stride == 0 || i == probe.n - 1 {
            limit_samples.push((x / std::f64::consts::LN_10, ln_ratio(1.0, x, y1, y2)?.exp()));
        }
    }

    // essentially smaller: every c has a decreasing tail ending below 1e-6
    let tail_start = probe.n - (probe.n / 10).max(4);
    let mut smaller = true;
    for &c in &cs {
        let mut prev = f64::INFINITY;
        for &x in &xs[tail_start..] {
            let r = ln_ratio(c, x, y1, y2)?;
            let slack = 1e-12 * (y2.ln_eval(x)?.abs() + 1.0);
            if r > prev + slack {
                smaller = false;
                break;
            }
            prev = r;
        }
        if !smaller || prev > (1e-6f64).ln() {
            smaller = false;
            break;
        }
    }
    if smaller {
        return Ok(ComparisonVerdict {
            relation: Relation::EssentiallySmaller,
            witness_constant: cs[cs.len() - 1],
            witness_threshold: 0.0,
            limit_samples,
        });
    }

    let witness = |a: &YoungFunction, b: &YoungFunction| -> Result<Option<(f64, f64)>> {
        for &c in &cs {
            // first index of the tail on which A(t) ≤ B(ct) holds
            let mut start = probe.n;
            for i in (0..probe.n).rev() {
                let x = xs[i];
                let d = a.ln_eval(x)? - b.ln_eval(c.ln() + x)?;
                let slack = 1e-12 * (a.ln_eval(x)?.abs() + 1.0);
                if d > slack {
                    break;
                }
                start = i;
            }
            if start <= probe.n / 2 {
                let t0 = if start == 0 { 0.0 } else { 10f64.powf(xs[start] / std::f64::consts::LN_10) };
                return Ok(Some((c, t0)));
            }
        }
        Ok(None)
    };
    match (witness(y1, y2)?, witness(y2, y1)?) {
        (Some((c1, t1)), Some((c2, t2))) => Ok(ComparisonVerdict {
            relation: Relation::Equiv,
            witness_constant: c1.max(c2),
            witness_threshold: t1.max(t2),
            limit_samples,
        }),
        (Some((c, t0)), None) => Ok(ComparisonVerdict {
            relation: Relation::Le,
            witness_constant: c,
            witness_threshold: t0,
            limit_samples,
        }),
        _ => Ok(ComparisonVerdict {
            relation: Relation::Undecided,
            witness_constant: f64::NAN,
            witness_threshold: f64::NAN,
            limit_samples,
        }),
    }
}
