//! Dense univariate polynomials with complex coefficients.
//!
//! Coefficients are stored in ascending degree order. Root finding uses the
//! Aberth-Ehrlich simultaneous iteration started from a Newton-polygon
//! initialization, followed by cluster detection and Newton polishing.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which trailing coefficients are dropped.
pub const TRIM_TOL: f64 = 1e-12;
/// Base clustering radius for multiplicity estimation, scaled by `max(1, |r|)`.
pub const CLUSTER_TOL: f64 = 1e-6;

const MAX_ABERTH_ITERS: usize = 800;
const POLISH_ITERS: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<C64>,
}

/// A distinct root together with its estimated multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

impl Poly {
    /// Builds a polynomial, dropping trailing coefficients that are negligible
    /// relative to the largest one.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(last) = coeffs.last() {
            if last.norm() <= TRIM_TOL * max || *last == C64::new(0.0, 0.0) {
                coeffs.pop();
            } else {
                break;
            }
        }
        Poly { coeffs }
    }

    /// Builds a polynomial, dropping only exactly-zero trailing coefficients.
    ///
    /// Used where the leading coefficient is known to be exact (monic families
    /// such as `m_A - tau * p_uv` at very large `|tau|`).
    pub fn new_exact(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial with the given roots (repeated entries give multiplicity).
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Poly::new_exact(vec![C64::new(1.0, 0.0)]);
        for &r in roots {
            p = &p * &Poly::new_exact(vec![-r, C64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Taylor coefficients `p^(j)(z) / j!` for `j = 0..=order`.
    pub fn taylor(&self, z: C64, order: usize) -> Vec<C64> {
        // repeated synthetic division by (x - z)
        let mut work: Vec<C64> = self.coeffs.clone();
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            if work.is_empty() {
                out.push(C64::new(0.0, 0.0));
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            let mut quotient = vec![C64::new(0.0, 0.0); work.len().saturating_sub(1)];
            for k in (0..work.len()).rev() {
                acc = acc * z + work[k];
                if k > 0 {
                    quotient[k - 1] = acc;
                }
            }
            out.push(acc);
            work = quotient;
        }
        out
    }

    /// Exact coefficient-wise derivative of the given order.
    pub fn derivative(&self, order: usize) -> Poly {
        let mut coeffs = self.coeffs.clone();
        for _ in 0..order {
            if coeffs.len() <= 1 {
                return Poly::zero();
            }
            coeffs = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect();
        }
        Poly::new_exact(coeffs)
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn conj(&self) -> Poly {
        Poly::new_exact(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Polynomial long division `self = q * d + r`.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dn = d.coeffs.len() - 1;
        if self.coeffs.len() <= dn {
            return (Poly::zero(), self.clone());
        }
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![C64::new(0.0, 0.0); rem.len() - dn];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dn] / lead;
            quot[k] = q;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
        }
        rem.truncate(dn);
        (Poly::new_exact(quot), Poly::new_exact(rem))
    }

    /// Divides out `(x - r)`, discarding the remainder.
    pub fn deflate(&self, r: C64) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let n = self.coeffs.len() - 1;
        let mut quot = vec![C64::new(0.0, 0.0); n];
        let mut acc = C64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            acc = acc * r + self.coeffs[k];
            quot[k - 1] = acc;
        }
        Poly::new_exact(quot)
    }

    /// Linear combination `sum_i alpha_i * p_i`, flushing coefficients that are
    /// pure cancellation noise to exact zero.
    pub fn lin_comb(terms: &[(C64, &Poly)]) -> Poly {
        let len = terms.iter().map(|(_, p)| p.coeffs.len()).max().unwrap_or(0);
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut sum = C64::new(0.0, 0.0);
            let mut mag = 0.0;
            for (alpha, p) in terms {
                if let Some(&c) = p.coeffs.get(k) {
                    let t = *alpha * c;
                    sum += t;
                    mag += t.norm();
                }
            }
            *slot = flush_cancellation(sum, mag, terms.len());
        }
        Poly::new_exact(out)
    }

    /// `sum_i sign_i * a_i * b_i` with the same cancellation flushing as
    /// [`Poly::lin_comb`].
    pub fn sum_of_products(terms: &[(f64, &Poly, &Poly)]) -> Poly {
        let len = terms
            .iter()
            .map(|(_, a, b)| {
                if a.is_zero() || b.is_zero() {
                    0
                } else {
                    a.coeffs.len() + b.coeffs.len() - 1
                }
            })
            .max()
            .unwrap_or(0);
        let mut sum = vec![C64::new(0.0, 0.0); len];
        let mut mag = vec![0.0; len];
        let mut count = 0;
        for (sign, a, b) in terms {
            for (i, &x) in a.coeffs.iter().enumerate() {
                for (j, &y) in b.coeffs.iter().enumerate() {
                    let t = x * y * *sign;
                    sum[i + j] += t;
                    mag[i + j] += t.norm();
                }
            }
            count += a.coeffs.len().min(b.coeffs.len());
        }
        let out = sum
            .into_iter()
            .zip(mag)
            .map(|(s, m)| flush_cancellation(s, m, count.max(1)))
            .collect();
        Poly::new_exact(out)
    }

    /// All roots with multiplicity estimates. The multiplicities sum to the degree.
    pub fn roots(&self) -> Result<Vec<Root>> {
        let deg = self.degree();
        if deg < 1 {
            return Err(Error::DegreeTooLow(deg));
        }
        let zeros_at_origin = self
            .coeffs
            .iter()
            .take_while(|c| **c == C64::new(0.0, 0.0))
            .count();
        let rest = &self.coeffs[zeros_at_origin..];
        let mut out = if rest.len() >= 2 {
            let approx = aberth(rest);
            cluster_roots(rest, &approx)
        } else {
            Vec::new()
        };
        if zeros_at_origin > 0 {
            out.push(Root {
                value: C64::new(0.0, 0.0),
                multiplicity: zeros_at_origin,
            });
        }
        Ok(out)
    }

    /// Roots expanded by multiplicity.
    pub fn root_values(&self) -> Result<Vec<C64>> {
        Ok(expand_roots(&self.roots()?))
    }
}

/// Expands `(root, multiplicity)` pairs into a flat list.
pub fn expand_roots(roots: &[Root]) -> Vec<C64> {
    roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
        .collect()
}

fn flush_cancellation(sum: C64, mag: f64, terms: usize) -> C64 {
    if sum.norm() <= 4.0 * f64::EPSILON * mag * terms as f64 {
        C64::new(0.0, 0.0)
    } else {
        sum
    }
}

/// Roots of `p` that lie within `tol` of some root of `q`.
pub fn common_roots(p: &Poly, q: &Poly, tol: f64) -> Vec<C64> {
    if p.degree() < 1 {
        return Vec::new();
    }
    let Ok(p_roots) = p.roots() else {
        return Vec::new();
    };
    if q.is_zero() {
        return p_roots.iter().map(|r| r.value).collect();
    }
    let Ok(q_roots) = q.roots() else {
        return Vec::new();
    };
    p_roots
        .iter()
        .map(|r| r.value)
        .filter(|r| q_roots.iter().any(|s| (r - s.value).norm() <= tol))
        .collect()
}

fn horner_abs(coeffs: &[C64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn eval_pd(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Initial approximations on circles whose radii come from the upper convex
/// hull of `(k, log|c_k|)`.
fn newton_polygon_start(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ab37);
    let offset: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut out = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (k1, y1) = w[0];
        let (k2, y2) = w[1];
        let m = k2 - k1;
        let radius = ((y1 - y2) / m as f64).exp();
        for j in 0..m {
            let angle = std::f64::consts::TAU * (j as f64 / m as f64 + out.len() as f64 / n as f64)
                + offset
                + rng.random_range(0.0..0.1);
            out.push(C64::from_polar(radius, angle));
        }
    }
    out
}

fn aberth(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    if n == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let mut z = newton_polygon_start(coeffs);
    let mut done = vec![false; n];
    let tol = 2.0 * n as f64 * f64::EPSILON;
    for _ in 0..MAX_ABERTH_ITERS {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_pd(coeffs, z[i]);
            if p.norm() <= tol * horner_abs(coeffs, z[i].norm()) {
                done[i] = true;
                continue;
            }
            all = false;
            let ratio = if dp.norm() == 0.0 {
                C64::new(1e-8 * (1.0 + z[i].norm()), 0.0)
            } else {
                p / dp
            };
            let s: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = C64::new(1.0, 0.0) - ratio * s;
            let w = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[i] -= w;
            if w.norm() <= f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if all {
            break;
        }
    }
    z
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Groups approximations whose inclusion discs overlap. The disc radius is the
/// larger of the clustering tolerance and `n |W_i|`, where `W_i` is the
/// Weierstrass correction.
fn cluster_roots(coeffs: &[C64], z: &[C64]) -> Vec<Root> {
    let n = z.len();
    let lead = coeffs[n];
    let radius: Vec<f64> = (0..n)
        .map(|i| {
            let p = eval_pd(coeffs, z[i]).0;
            let prod: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).norm())
                .product();
            let w = if prod == 0.0 {
                f64::INFINITY
            } else {
                n as f64 * p.norm() / (lead.norm() * prod)
            };
            w.max(CLUSTER_TOL * z[i].norm().max(1.0))
        })
        .collect();
    let mut dsu = Dsu((0..n).collect());
    for i in 0..n {
        for j in (i + 1)..n {
            if (z[i] - z[j]).norm() <= radius[i] + radius[j] {
                dsu.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = dsu.find(i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let poly = Poly::new_exact(coeffs.to_vec());
    groups
        .into_iter()
        .map(|g| {
            let m = g.len();
            let mean = g.iter().map(|&i| z[i]).sum::<C64>() / m as f64;
            let spread = g.iter().map(|&i| (z[i] - mean).norm()).fold(0.0, f64::max);
            let value = if m == 1 {
                polish(&poly, z[g[0]])
            } else {
                polish_multiple(&poly, mean, m, spread + CLUSTER_TOL * mean.norm().max(1.0))
            };
            Root {
                value,
                multiplicity: m,
            }
        })
        .collect()
}

fn polish(p: &Poly, z0: C64) -> C64 {
    let mut z = z0;
    let mut best = p.eval(z).norm();
    for _ in 0..POLISH_ITERS {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let cand = z - v / dv;
        let cv = p.eval(cand).norm();
        if cv < best {
            best = cv;
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// A root of multiplicity `m` is a simple root of `p^(m-1)`; polish there and
/// keep the result only if it stays inside the cluster.
fn polish_multiple(p: &Poly, mean: C64, m: usize, radius: f64) -> C64 {
    let d = p.derivative(m - 1);
    let z = polish(&d, mean);
    if (z - mean).norm() <= radius {
        z
    } else {
        mean
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::lin_comb(&[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), rhs)])
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly::lin_comb(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), rhs)])
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new_exact(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new_exact(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<Root>) -> Vec<Root> {
        v.sort_by(|a, b| {
            (a.value.re, a.value.im)
                .partial_cmp(&(b.value.re, b.value.im))
                .unwrap()
        });
        v
    }

    #[test]
    fn eval_examples() {
        let p = Poly::from_real(&[1.0, 1.0, 1.0]);
        assert_eq!(p.eval(c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(Poly::zero().eval(c(3.0, -2.0)), c(0.0, 0.0));
        let q = Poly::from_real(&[1.0, -1.0, 1.0]);
        assert_eq!(q.eval(c(0.0, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn zero_poly_has_degree_minus_one() {
        assert_eq!(Poly::zero().degree(), -1);
        assert_eq!(Poly::from_real(&[0.0, 0.0]).degree(), -1);
        assert!(Poly::from_real(&[1.0, 1e-14]).degree() == 0);
    }

    #[test]
    fn derivative_examples() {
        let p = Poly::from_real(&[1.0, 1.0, 1.0]);
        assert_eq!(p.derivative(1), Poly::from_real(&[1.0, 2.0]));
        // (x-1)^2 (x-2) = x^3 - 4x^2 + 5x - 2
        let m = Poly::from_real(&[-2.0, 5.0, -4.0, 1.0]);
        assert_eq!(m.derivative(1), Poly::from_real(&[5.0, -8.0, 3.0]));
        assert!(Poly::from_real(&[7.0]).derivative(1).is_zero());
    }

    #[test]
    fn roots_of_quadratic() {
        let p = Poly::from_real(&[1.0, 1.0, 1.0]);
        let r = sorted(p.roots().unwrap());
        let s3 = 3f64.sqrt() / 2.0;
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c(-0.5, -s3)).norm() < 1e-14);
        assert!((r[1].value - c(-0.5, s3)).norm() < 1e-14);
        assert!(r.iter().all(|x| x.multiplicity == 1));
    }

    #[test]
    fn roots_of_q0_examples() {
        // -x(x+2)
        let p = Poly::from_real(&[0.0, -2.0, -1.0]);
        let r = sorted(p.roots().unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0].value - c(-2.0, 0.0)).norm() < 1e-14);
        assert!(r[1].value.norm() < 1e-14);

        // -x^2 (x^2 - 2x + 3)
        let q = Poly::from_real(&[0.0, 0.0, -3.0, 2.0, -1.0]);
        let r = q.roots().unwrap();
        let zero = r.iter().find(|x| x.value.norm() < 1e-12).unwrap();
        assert_eq!(zero.multiplicity, 2);
        let s2 = 2f64.sqrt();
        for target in [c(1.0, s2), c(1.0, -s2)] {
            let hit = r.iter().find(|x| (x.value - target).norm() < 1e-12).unwrap();
            assert_eq!(hit.multiplicity, 1);
        }
    }

    #[test]
    fn clustered_multiple_roots() {
        // (x-1)^3 (x+2) with inexact coefficients from expansion
        let p = Poly::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]);
        let r = p.roots().unwrap();
        let one = r.iter().find(|x| (x.value - c(1.0, 0.0)).norm() < 1e-8).unwrap();
        assert_eq!(one.multiplicity, 3);
        assert_eq!(r.iter().map(|x| x.multiplicity).sum::<usize>(), 4);
    }

    #[test]
    fn roots_reject_constants() {
        assert!(matches!(Poly::from_real(&[3.0]).roots(), Err(Error::DegreeTooLow(0))));
        assert!(Poly::zero().roots().is_err());
    }

    #[test]
    fn common_root_examples() {
        let m = Poly::from_real(&[-2.0, 5.0, -4.0, 1.0]);
        let p = Poly::from_real(&[2.0, -3.0, 1.0]);
        let mut cr = common_roots(&m, &p, 1e-8);
        cr.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_eq!(cr.len(), 2);
        assert!((cr[0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!((cr[1] - c(2.0, 0.0)).norm() < 1e-8);

        let a = Poly::from_real(&[1.0, 1.0, 1.0]);
        let b = Poly::from_real(&[1.0, 1.0]);
        assert!(common_roots(&a, &b, 1e-8).is_empty());
        assert_eq!(common_roots(&a, &a, 1e-8).len(), 2);
    }

    #[test]
    fn division_and_deflation() {
        let p = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 1.0), c(-3.0, 0.5)]);
        let d = Poly::from_roots(&[c(2.0, 1.0)]);
        let (q, r) = p.div_rem(&d);
        assert!(r.max_abs_coeff() < 1e-13);
        let q2 = p.deflate(c(2.0, 1.0));
        let diff = &q - &q2;
        assert!(diff.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn taylor_matches_derivatives() {
        let p = Poly::from_real(&[1.0, -2.0, 0.5, 3.0, 1.0]);
        let z = c(0.3, -0.7);
        let t = p.taylor(z, 4);
        let mut fact = 1.0;
        for (j, tj) in t.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            let d = p.derivative(j).eval(z) / fact;
            assert!((tj - d).norm() < 1e-12);
        }
    }

    #[test]
    fn cancellation_is_flushed() {
        let a = Poly::from_real(&[0.1 + 0.2, 1.0]);
        let b = Poly::from_real(&[0.3, 0.0]);
        let d = &a - &b;
        assert_eq!(d.coeffs()[0], c(0.0, 0.0));
    }

    fn arb_c(radius: f64) -> impl Strategy<Value = C64> {
        (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recovers_separated_roots(roots in prop::collection::vec(arb_c(2.0), 1..=12)) {
            let sep = roots.iter().enumerate().flat_map(|(i, a)| {
                roots.iter().skip(i + 1).map(move |b| (a - b).norm())
            }).fold(f64::INFINITY, f64::min);
            prop_assume!(sep >= 1e-2);
            let p = Poly::from_roots(&roots);
            let found = p.roots().unwrap();
            prop_assert_eq!(found.iter().map(|r| r.multiplicity).sum::<usize>(), roots.len());
            for r in &roots {
                let d = found.iter().map(|f| (f.value - r).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-8, "root {} missed by {}", r, d);
            }
        }

        #[test]
        fn derivative_matches_finite_differences(
            coeffs in prop::collection::vec(arb_c(1.0), 2..8),
            z in arb_c(2.0),
        ) {
            let p = Poly::new(coeffs);
            let h = 1e-6;
            let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
            let d = p.derivative(1).eval(z);
            prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
        }

        #[test]
        fn roots_of_product_are_union(
            a in prop::collection::vec(arb_c(1.5), 1..=5),
            b in prop::collection::vec(arb_c(1.5), 1..=5),
        ) {
            let all: Vec<C64> = a.iter().chain(b.iter()).copied().collect();
            let sep = all.iter().enumerate().flat_map(|(i, x)| {
                all.iter().skip(i + 1).map(move |y| (x - y).norm())
            }).fold(f64::INFINITY, f64::min);
            prop_assume!(sep >= 1e-2);
            let pa = Poly::from_roots(&a);
            let pb = Poly::from_roots(&b);
            let prod = &pa * &pb;
            let mut expect = pa.root_values().unwrap();
            expect.extend(pb.root_values().unwrap());
            let got = prod.root_values().unwrap();
            prop_assert_eq!(got.len(), expect.len());
            for e in &expect {
                let d = got.iter().map(|g| (g - e).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-6);
            }
        }
    }
}
