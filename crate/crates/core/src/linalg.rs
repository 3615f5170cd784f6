//! Dense complex matrices and an LU factorization with partial pivoting.
//!
//! Every kernel charges its multiplication count to a [`MultCounter`] using
//! a fixed accounting convention (see [`crate::metrics`]).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metrics::{MultCounter, Phase};

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.data[r * n + c] = f(r, c);
            }
        }
        m
    }

    /// Builds from row-major data; `data.len()` must be `n * n`.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| (0..r).all(|c| self[(r, c)] == self[(c, r)]))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.n + c]
    }
}

/// Plain (non-conjugating) bilinear product `xᵀy`.
pub fn dot(x: &[Complex64], y: &[Complex64], counter: &mut MultCounter, phase: Phase) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    counter.add(phase, x.len() as u64);
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `PA = LU` with unit-lower `L`; both factors packed into one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    packed: Vec<Complex64>,
    perm: Vec<usize>,
    condition_estimate: f64,
}

impl Lu {
    /// Factorizes `a`, taking ownership of its storage.
    ///
    /// Fails only on an exactly zero pivot. The condition estimate is the
    /// ratio of the largest to the smallest pivot magnitude, a cheap lower
    /// bound on the 2-norm condition number.
    pub fn factor(a: CMatrix, counter: &mut MultCounter) -> Result<Self> {
        let n = a.n;
        let mut m = a.data;
        let mut perm: Vec<usize> = (0..n).collect();
        counter.add(Phase::Factorization, (n as u64).pow(3) / 3);

        for k in 0..n {
            let mut piv = k;
            let mut best = m[k * n + k].norm_sqr();
            for r in k + 1..n {
                let v = m[r * n + k].norm_sqr();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { column: k });
            }
            if piv != k {
                perm.swap(k, piv);
                for c in 0..n {
                    m.swap(k * n + c, piv * n + c);
                }
            }
            let (top, bottom) = m.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..(k + 1) * n];
            let inv = pivot_row[k].inv();
            for row in bottom.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= l * u;
                }
            }
        }

        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = m[i * n + i].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let condition_estimate = if n == 0 { 1.0 } else { hi / lo };
        Ok(Self {
            n,
            packed: m,
            perm,
            condition_estimate,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Solves `A y = b`.
    pub fn solve(&self, b: &[Complex64], counter: &mut MultCounter) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length");
        counter.add(Phase::Solves, 2 * triangular_cost(n));
        let m = &self.packed;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &m[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &m[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&y[i + 1..]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - s) / m[i * n + i];
        }
        y
    }

    /// Solves `Aᵀ y = b`, i.e. returns the row vector `bᵀ A⁻¹` as a column.
    pub fn solve_transpose(&self, b: &[Complex64], counter: &mut MultCounter) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length");
        counter.add(Phase::Solves, 2 * triangular_cost(n));
        let m = &self.packed;
        // Aᵀ = Uᵀ Lᵀ P: forward with Uᵀ, backward with Lᵀ, then undo P.
        let mut w = b.to_vec();
        for i in 0..n {
            let wi = w[i] / m[i * n + i];
            w[i] = wi;
            let row = &m[i * n + i + 1..(i + 1) * n];
            for (x, u) in w[i + 1..].iter_mut().zip(row) {
                *x -= u * wi;
            }
        }
        for i in (0..n).rev() {
            let wi = w[i];
            let row = &m[i * n..i * n + i];
            for (x, l) in w[..i].iter_mut().zip(row) {
                *x -= l * wi;
            }
        }
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        y
    }
}

/// Accounting charge for one triangular solve of order `n`.
pub fn triangular_cost(n: usize) -> u64 {
    (n as u64).pow(2) / 2
}
