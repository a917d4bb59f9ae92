//! Dense complex matrices, characteristic and minimal polynomials, moment
//! sequences `v^* A^k u`, and the eigenvalue oracle used for validation.

use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, Root};

/// Largest dimension accepted by [`eig_oracle`].
pub const ORACLE_NMAX: usize = 32;
/// Imaginary parts below this are treated as zero when setting `is_real`.
pub const REAL_TOL: f64 = 1e-14;
/// Relative singular-value drop that signals a dependency among matrix powers.
pub const MINPOLY_RANK_TOL: f64 = 1e-10;
const ORACLE_CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
    is_real: bool,
}

impl CMatrix {
    /// Row-major `n x n` matrix.
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::NotSquare {
                rows: n,
                cols: data.len().checked_div(n).unwrap_or(0),
            });
        }
        let is_real = data.iter().all(|c| c.im.abs() < REAL_TOL);
        Ok(CMatrix { n, data, is_real })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    /// Convenience constructor from real row-major entries.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(n, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(1.0, 0.0);
        }
        CMatrix {
            n,
            data,
            is_real: true,
        }
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
            is_real: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    fn from_data(n: usize, data: Vec<C64>) -> Self {
        let is_real = data.iter().all(|c| c.im.abs() < REAL_TOL);
        CMatrix { n, data, is_real }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Self::from_data(n, out)
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self::from_data(self.n, data)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self::from_data(self.n, data)
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        Self::from_data(self.n, self.data.iter().map(|x| x * c).collect())
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self::from_data(n, out)
    }

    pub fn transpose(&self) -> CMatrix {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j];
            }
        }
        Self::from_data(n, out)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Frobenius norm; the matrix norm used throughout the crate.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A + tau * u v^*`.
    pub fn rank_one_update(&self, tau: C64, u: &[C64], v: &[C64]) -> CMatrix {
        let n = self.n;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += tau * u[i] * v[j].conj();
            }
        }
        Self::from_data(n, data)
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn determinant(&self) -> C64 {
        self.to_nalgebra().lu().determinant()
    }

    /// Solves `self * x = b` by LU; `None` when singular.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        let rhs = DVector::from_column_slice(b);
        self.to_nalgebra()
            .lu()
            .solve(&rhs)
            .map(|x| x.iter().copied().collect())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

/// `v^* u`.
pub fn dot_conj(v: &[C64], u: &[C64]) -> C64 {
    v.iter().zip(u).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Evaluates `p(A)` by Horner's scheme.
pub fn eval_matrix_poly(p: &Poly, a: &CMatrix) -> CMatrix {
    let n = a.n();
    let mut acc = CMatrix::zeros(n);
    for &c in p.coeffs().iter().rev() {
        acc = acc.matmul(a).add(&CMatrix::identity(n).scale(c));
    }
    acc
}

/// `det(lambda I - A)` via the Faddeev-LeVerrier recursion on `A / ||A||`.
pub fn char_poly(a: &CMatrix) -> Poly {
    let n = a.n();
    let s = a.frobenius();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    if s == 0.0 {
        return Poly::new_exact(coeffs);
    }
    let b = a.scale(C64::new(1.0 / s, 0.0));
    let eye = CMatrix::identity(n);
    let mut m = CMatrix::zeros(n);
    for k in 1..=n {
        m = b.matmul(&m).add(&eye.scale(coeffs[n - k + 1]));
        coeffs[n - k] = -b.matmul(&m).trace() / k as f64;
    }
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c *= s.powi((n - j) as i32);
    }
    Poly::new_exact(coeffs)
}

/// Minimal polynomial from the first linear dependency among
/// `vec(I), vec(A), vec(A^2), ...`, detected by a relative singular-value drop.
pub fn minimal_poly(a: &CMatrix) -> Poly {
    let n = a.n();
    let s = a.frobenius() / (n as f64).sqrt();
    if s == 0.0 {
        return Poly::from_real(&[0.0, 1.0]);
    }
    let b = a.scale(C64::new(1.0 / s, 0.0));
    let mut columns: Vec<Vec<C64>> = vec![CMatrix::identity(n).data];
    let mut norms: Vec<f64> = vec![(n as f64).sqrt()];
    let mut power = CMatrix::identity(n);
    for k in 1..=n {
        power = power.matmul(&b);
        let norm = power.frobenius();
        if norm == 0.0 {
            // nilpotent: B^k = 0 with lower powers independent
            let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
            coeffs[k] = C64::new(1.0, 0.0);
            return Poly::new_exact(coeffs);
        }
        let rows = n * n;
        let w = DMatrix::from_fn(rows, k + 1, |r, c| {
            if c < k {
                columns[c][r] / norms[c]
            } else {
                power.data[r] / norm
            }
        });
        let sv = w.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smin <= MINPOLY_RANK_TOL * smax {
            let lhs = w.columns(0, k).into_owned();
            let rhs = -w.column(k).into_owned();
            let y = lhs
                .svd(true, true)
                .solve(&rhs, 0.0)
                .expect("SVD solve with computed U and V");
            let mut coeffs: Vec<C64> = (0..k)
                .map(|j| y[j] * (norm / norms[j]) * s.powi((k - j) as i32))
                .collect();
            coeffs.push(C64::new(1.0, 0.0));
            return Poly::new_exact(coeffs);
        }
        columns.push(power.data.clone());
        norms.push(norm);
    }
    // Cayley-Hamilton guarantees a dependency by k = n; only reachable when the
    // rank test is defeated by severe ill-conditioning.
    char_poly(a)
}

/// `(v^* A^0 u, ..., v^* A^kmax u)`.
pub fn moments(a: &CMatrix, u: &[C64], v: &[C64], kmax: usize) -> Result<Vec<C64>> {
    let n = a.n();
    if u.len() != n || v.len() != n {
        return Err(Error::Dimension(format!(
            "A is {n}x{n} but |u| = {}, |v| = {}",
            u.len(),
            v.len()
        )));
    }
    let mut w = u.to_vec();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        out.push(dot_conj(v, &w));
        if k < kmax {
            w = a.matvec(&w);
        }
    }
    Ok(out)
}

/// Ground-truth eigenvalues with multiplicities, from a complex Schur form.
///
/// Only used for validation. Nearby Schur eigenvalues are grouped greedily with
/// tolerance `1e-6 * max(1, |lambda|)`; multiplicity of defective eigenvalues is
/// therefore approximate.
pub fn eig_oracle(a: &CMatrix) -> Result<Vec<Root>> {
    let values = eig_oracle_values(a)?;
    let mut out: Vec<Root> = Vec::new();
    for v in values {
        let tol = ORACLE_CLUSTER_TOL * v.norm().max(1.0);
        if let Some(r) = out.iter_mut().find(|r| (r.value - v).norm() <= tol) {
            let m = r.multiplicity as f64;
            r.value = (r.value * m + v) / (m + 1.0);
            r.multiplicity += 1;
        } else {
            out.push(Root {
                value: v,
                multiplicity: 1,
            });
        }
    }
    Ok(out)
}

/// Raw oracle eigenvalues, one per diagonal entry of the Schur form.
pub fn eig_oracle_values(a: &CMatrix) -> Result<Vec<C64>> {
    if a.n() > ORACLE_NMAX {
        return Err(Error::OracleTooLarge {
            n: a.n(),
            max: ORACLE_NMAX,
        });
    }
    // scaling to unit norm helps the QR iteration converge on badly scaled
    // input such as a huge rank-one term
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    let m = a.to_nalgebra().unscale(scale);
    // QR can stall when all eigenvalues share a modulus (cyclic shifts);
    // a complex diagonal shift breaks the tie
    for shift in [0.0, 0.37, 0.61, 1.3] {
        let sigma = C64::from_polar(shift, 0.9);
        let shifted = &m + nalgebra::DMatrix::<C64>::identity(a.n(), a.n()) * sigma;
        if let Some(schur) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 10_000) {
            let t = schur.unpack().1;
            return Ok((0..a.n()).map(|i| (t[(i, i)] - sigma) * scale).collect());
        }
    }
    Err(Error::OracleFailed)
}
