//! Dense LU factorization with partial pivoting for small square systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
pub struct SingularMatrix {
    pub column: usize,
    pub pivot: f64,
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `P A = L U`, with the unit-diagonal `L` and `U` packed into one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: Matrix) -> Result<Self, SingularMatrix> {
        let n = a.n;
        let tol = a.max_abs() * n as f64 * f64::EPSILON;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, a.get(r, k)))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty range");
            if pivot.abs() <= tol || !pivot.is_finite() {
                return Err(SingularMatrix { column: k, pivot });
            }
            if p != k {
                for c in 0..n {
                    a.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            for r in k + 1..n {
                let m = a.get(r, k) / pivot;
                a.set(r, k, m);
                if m != 0.0 {
                    for c in k + 1..n {
                        let v = a.get(r, c) - m * a.get(k, c);
                        a.set(r, c, v);
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu.get(r, c) * x[c]).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| self.lu.get(r, c) * x[c]).sum();
            x[r] = (x[r] - s) / self.lu.get(r, r);
        }
        x
    }
}
