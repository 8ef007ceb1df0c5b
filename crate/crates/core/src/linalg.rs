//! Banded matrices and LU factorization with partial pivoting.

use crate::error::{OrliczError, Result};

/// Square matrix with `kl` sub- and `ku` superdiagonals. Storage keeps `kl`
/// extra superdiagonals for the fill-in of pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// y = A x.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU with row pivoting; consumes the matrix.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let reach = self.ku + self.kl;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(OrliczError::Solver(format!("singular banded matrix at column {k}")));
            }
            piv[k] = p;
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, b);
                }
            }
            let d = self.get(k, k);
            for i in k + 1..=last {
                let s = self.slot(i, k);
                let l = self.data[s] / d;
                self.data[s] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let (si, sk) = (self.slot(i, j), self.slot(k, j));
                        self.data[si] -= l * self.data[sk];
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.m;
        let n = m.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let t = x[k];
            if t != 0.0 {
                for i in k + 1..=(k + m.kl).min(n - 1) {
                    x[i] -= m.get(i, k) * t;
                }
            }
        }
        let reach = m.ku + m.kl;
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= m.get(i, j) * x[j];
            }
            x[i] = s / m.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pivoting_system() {
        // tridiagonal with a zero leading diagonal entry forces a row swap
        let n = 7;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, if i == 0 { 0.0 } else { 2.0 + i as f64 });
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, 1.5);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.3).collect();
        let b = a.mul(&x);
        let sol = a.factor().unwrap().solve(&b);
        for (u, v) in sol.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = BandMatrix::zeros(3, 1, 1);
        assert!(matches!(a.factor(), Err(OrliczError::Solver(_))));
    }
}
