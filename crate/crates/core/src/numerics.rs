//! Small numerical kernels shared by the modules: Gauss-Legendre rules,
//! compensated and exact summation, root finding and log-space helpers.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub(crate) fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(8))
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

/// Integral of `f` over [a, b] with the given rule.
pub fn integrate(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        s += w * f(c + r * x);
    }
    s * r
}

/// Correctly rounded sum of the inputs (Shewchuk's partials).
pub fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // round-half-even correction as in Python's math.fsum
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Neumaier-compensated running sum; deterministic for a fixed input order.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn ksum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut k = KahanSum::default();
    for v in values {
        k.add(v);
    }
    k.value()
}

/// `n` points geometrically spaced from `lo` to `hi`, both included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Points 10^e for e uniform in [e_lo, e_hi], both included.
pub fn decade_space(e_lo: f64, e_hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && e_hi >= e_lo);
    (0..n)
        .map(|i| {
            let e = e_lo + (e_hi - e_lo) * i as f64 / (n - 1) as f64;
            10f64.powf(e)
        })
        .collect()
}

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 36.0 {
        x + (-x).exp()
    } else if x < -36.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// ln(e^a + e^b).
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Bisection for the root of a nondecreasing `f` on [lo, hi] given
/// f(lo) ≤ 0 ≤ f(hi). Stops when the bracket stalls in floating point.
pub fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Illinois (modified regula falsi) root finder on a sign-changing bracket.
/// Returns the final bracket end closest to the root.
pub fn illinois(
    mut a: f64,
    mut b: f64,
    mut f: impl FnMut(f64) -> f64,
    xtol: f64,
    max_iter: usize,
) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i32;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= xtol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Index of the cell [xs[i], xs[i+1]) that contains x (clamped to valid cells).
pub fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    let i = xs.partition_point(|&v| v <= x);
    i.saturating_sub(1).min(n - 2)
}
