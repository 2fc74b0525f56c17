//! Symmetric tridiagonal matrices: products, LDLᵀ solves and Sturm counts.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Ldl {
    pivots: Vec<f64>,
    multipliers: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n - 1");
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.len();
        let mut s: f64 = (0..n).map(|i| self.diag[i] * x[i] * y[i]).sum();
        for i in 0..n - 1 {
            s += self.off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
        }
        s
    }

    pub fn quad(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `self + s * diag(d)`.
    pub fn shifted(&self, s: f64, d: &[f64]) -> Self {
        SymTridiag { diag: self.diag.iter().zip(d).map(|(a, m)| a + s * m).collect(), off: self.off.clone() }
    }

    /// Leading `m x m` block.
    pub fn leading(&self, m: usize) -> Self {
        SymTridiag { diag: self.diag[..m].to_vec(), off: self.off[..m - 1].to_vec() }
    }

    /// LDLᵀ factorization, refusing anything that is not positive definite.
    pub fn factor(&self) -> Result<Ldl> {
        let n = self.len();
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        let mut d = self.diag[0];
        for i in 0..n {
            if i > 0 {
                let l = self.off[i - 1] / pivots[i - 1];
                multipliers.push(l);
                d = self.diag[i] - l * self.off[i - 1];
            }
            if !(d > 0.0) {
                return Err(Error::Assembly(format!("matrix is not positive definite: pivot {d:e} at row {i}")));
            }
            pivots.push(d);
        }
        Ok(Ldl { pivots, multipliers })
    }

    /// Number of eigenvalues of the pencil `(self, diag(m))` below `sigma`.
    pub fn count_below(&self, sigma: f64, m: &[f64]) -> usize {
        let mut count = 0;
        let mut d = 0.0;
        for (i, (&di, &mi)) in self.diag.iter().zip(m).enumerate() {
            let a = di - sigma * mi;
            d = if i == 0 { a } else { a - self.off[i - 1] * self.off[i - 1] / d };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + self.off.get(i).map_or(0.0, |o| o.abs()) + 1e-300);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

impl Ldl {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.multipliers[i - 1] * x[i - 1];
        }
        for (xi, p) in x.iter_mut().zip(&self.pivots) {
            *xi /= p;
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.multipliers[i] * x[i + 1];
        }
        x
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }
}
