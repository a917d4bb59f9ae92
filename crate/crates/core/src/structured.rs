//! H-selfadjoint and J-Hamiltonian rank-one families.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::detect_kappa;
use crate::error::{Error, Result};
use crate::flow::hausdorff;
use crate::linalg::{self, CMatrix};
use crate::perturbation::{RankOneSystem, SpectralPortrait};
use crate::poly::expand_roots;

const STRUCT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureKind {
    /// `HA = A^*H` with `H` Hermitian and nonsingular.
    #[serde(rename = "H")]
    HSelfadjoint,
    /// `JA = -A^T J` with `J` real, skew-symmetric and nonsingular.
    #[serde(rename = "J")]
    JHamiltonian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureContext {
    pub kind: StructureKind,
    pub g: CMatrix,
}

impl StructureContext {
    pub fn new(kind: StructureKind, g: CMatrix) -> Result<Self> {
        let scale = STRUCT_TOL * (1.0 + g.frobenius());
        match kind {
            StructureKind::HSelfadjoint => {
                if g.sub(&g.adjoint()).frobenius() > scale {
                    return Err(Error::Structure("H is not Hermitian".into()));
                }
            }
            StructureKind::JHamiltonian => {
                if !g.is_real() {
                    return Err(Error::Structure("J is not real".into()));
                }
                if g.add(&g.transpose()).frobenius() > scale {
                    return Err(Error::Structure("J is not skew-symmetric".into()));
                }
            }
        }
        if g.determinant().norm() <= STRUCT_TOL {
            return Err(Error::Structure("structure matrix is singular".into()));
        }
        Ok(StructureContext { kind, g })
    }

    pub fn h_selfadjoint(h: CMatrix) -> Result<Self> {
        Self::new(StructureKind::HSelfadjoint, h)
    }

    pub fn j_hamiltonian(j: CMatrix) -> Result<Self> {
        Self::new(StructureKind::JHamiltonian, j)
    }

    /// `||HA - A^*H||` or `||JA + A^T J||`.
    pub fn defect(&self, a: &CMatrix) -> f64 {
        let g = &self.g;
        match self.kind {
            StructureKind::HSelfadjoint => g.matmul(a).sub(&a.adjoint().matmul(g)).frobenius(),
            StructureKind::JHamiltonian => g.matmul(a).add(&a.transpose().matmul(g)).frobenius(),
        }
    }

    /// The `v` for which `uv^*` is `uu^*H` or `uu^T J`.
    pub fn derive_v(&self, u: &[C64]) -> Vec<C64> {
        match self.kind {
            StructureKind::HSelfadjoint => self.g.matvec(u),
            StructureKind::JHamiltonian => self.g.matvec(u).into_iter().map(|x| -x).collect(),
        }
    }
}

/// Builds the structure-preserving rank-one family `A + tau uu^*H` or
/// `A + tau uu^T J`.
pub fn make_structured_system(a: CMatrix, u: Vec<C64>, ctx: StructureContext) -> Result<RankOneSystem> {
    if a.n() != ctx.g.n() {
        return Err(Error::Dimension(format!(
            "A is {0}x{0} but the structure matrix is {1}x{1}",
            a.n(),
            ctx.g.n()
        )));
    }
    if ctx.kind == StructureKind::JHamiltonian {
        if !a.is_real() {
            return Err(Error::Structure("J-Hamiltonian A must be real".into()));
        }
        if u.iter().any(|x| x.im.abs() >= linalg::REAL_TOL) {
            return Err(Error::Structure("u must be real in the J case".into()));
        }
    }
    let defect = ctx.defect(&a);
    let bound = STRUCT_TOL * a.frobenius().max(1.0) * ctx.g.frobenius();
    if defect > bound {
        return Err(Error::Structure(format!(
            "structure relation violated by {defect:.3e}"
        )));
    }
    let v = ctx.derive_v(&u);
    Ok(RankOneSystem::new(a, u, v)?.with_structure(ctx))
}

/// Placement of a diverging pair relative to the coordinate axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axes {
    RealPair,
    ImaginaryPair,
    /// At least one real and one imaginary pair.
    Mixed,
    /// No diverging eigenvalue lies on either axis.
    OffAxis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianForecast {
    pub kappa: usize,
    /// Number of eigenvalues diverging as `|tau| -> infinity` (`kappa + 1`).
    pub count: usize,
    /// `u^T J A^kappa u`.
    pub lead: f64,
    pub sign: i8,
    /// Axis pattern as `tau -> +infinity`.
    pub plus: Axes,
    /// Axis pattern as `tau -> -infinity`.
    pub minus: Axes,
}

/// Leading-order diverging eigenvalues solve `lambda^{2m} = tau * lead`. With
/// `tau * lead > 0` the roots `r e^{i pi j/m}` always contain a real pair and
/// contain an imaginary pair iff `m` is even; with `tau * lead < 0` the roots
/// `r e^{i pi (2j+1)/(2m)}` are never real and contain an imaginary pair iff
/// `m` is odd.
fn axes_for(count: usize, positive: bool) -> Axes {
    let m = count / 2;
    match (positive, m.is_multiple_of(2)) {
        (true, true) => Axes::Mixed,
        (true, false) => Axes::RealPair,
        (false, false) => Axes::ImaginaryPair,
        (false, true) => Axes::OffAxis,
    }
}

pub fn hamiltonian_forecast(sys: &RankOneSystem) -> Result<HamiltonianForecast> {
    sys.structure()
        .filter(|c| c.kind == StructureKind::JHamiltonian)
        .ok_or_else(|| Error::Structure("system has no J context".into()))?;
    let model = detect_kappa(sys)?;
    let kappa = model.kappa.ok_or(Error::Degenerate)?;
    if kappa % 2 == 0 {
        return Err(Error::Structure(format!(
            "even kappa = {kappa} contradicts the J-Hamiltonian moment pattern"
        )));
    }
    let lead = model.lead.re;
    let count = kappa + 1;
    let positive = lead > 0.0;
    Ok(HamiltonianForecast {
        kappa,
        count,
        lead,
        sign: if positive { 1 } else { -1 },
        plus: axes_for(count, positive),
        minus: axes_for(count, !positive),
    })
}

/// Classifies the `count` largest eigenvalues of `B(tau)` by the axes they
/// sit on, with relative tolerance `tol`.
pub fn observed_axes(values: &[C64], count: usize, tol: f64) -> Axes {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    let top = &v[..count.min(v.len())];
    let real = top.iter().filter(|z| z.im.abs() <= tol * z.re.abs()).count();
    let imag = top.iter().filter(|z| z.re.abs() <= tol * z.im.abs()).count();
    match (real >= 2, imag >= 2) {
        (true, true) => Axes::Mixed,
        (true, false) => Axes::RealPair,
        (false, true) => Axes::ImaginaryPair,
        (false, false) => Axes::OffAxis,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySample {
    pub tau: f64,
    /// Hausdorff distance between the spectrum and its conjugate.
    pub conjugation_gap: Option<f64>,
    /// Hausdorff distance between the spectrum and its negative.
    pub negation_gap: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub samples: Vec<SymmetrySample>,
    pub pass: bool,
}

pub const CONJUGATION_TOL: f64 = 1e-8;
pub const NEGATION_TOL: f64 = 1e-6;

/// Checks the spectral symmetries the structure implies: closure under
/// conjugation for real families and under `lambda -> -lambda` for
/// J-Hamiltonian ones.
pub fn verify_symmetry(sys: &RankOneSystem, tau_samples: &[f64]) -> Result<SymmetryReport> {
    let portrait = SpectralPortrait::new(sys)?;
    let real = sys.is_real();
    let hamiltonian = sys
        .structure()
        .is_some_and(|c| c.kind == StructureKind::JHamiltonian);
    let mut samples = Vec::new();
    for &tau in tau_samples {
        let s = expand_roots(&portrait.spectrum(C64::new(tau, 0.0)));
        let scale = 1.0 + s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let conj: Vec<C64> = s.iter().map(|z| z.conj()).collect();
        let neg: Vec<C64> = s.iter().map(|z| -z).collect();
        let conjugation_gap = real.then(|| hausdorff(&s, &conj)).transpose()?;
        let negation_gap = hamiltonian.then(|| hausdorff(&s, &neg)).transpose()?;
        let pass = conjugation_gap.is_none_or(|g| g <= CONJUGATION_TOL * scale)
            && negation_gap.is_none_or(|g| g <= NEGATION_TOL * scale);
        samples.push(SymmetrySample {
            tau,
            conjugation_gap,
            negation_gap,
            pass,
        });
    }
    let pass = samples.iter().all(|s| s.pass);
    Ok(SymmetryReport { samples, pass })
}

/// Random J-Hamiltonian matrix `J^{-1} S` with `S` symmetric.
pub fn random_hamiltonian(j: &CMatrix, seed: u64) -> Result<CMatrix> {
    let n = j.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![C64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in r..n {
            let x = C64::new(rng.random_range(-1.0..1.0), 0.0);
            s[r * n + c] = x;
            s[c * n + r] = x;
        }
    }
    let s = CMatrix::new(n, s)?;
    let cols: Vec<Vec<C64>> = (0..n)
        .map(|c| {
            let col: Vec<C64> = (0..n).map(|r| s[(r, c)]).collect();
            j.solve(&col).ok_or_else(|| Error::Structure("J is singular".into()))
        })
        .collect::<Result<_>>()?;
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for (c, col) in cols.iter().enumerate() {
        for r in 0..n {
            data[r * n + c] = C64::new(col[r].re, 0.0);
        }
    }
    CMatrix::new(n, data)
}

/// Standard symplectic form `[[0, I], [-I, 0]]` of size `2m`.
pub fn standard_j(m: usize) -> CMatrix {
    let n = 2 * m;
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..m {
        data[i * n + m + i] = C64::new(1.0, 0.0);
        data[(m + i) * n + i] = C64::new(-1.0, 0.0);
    }
    CMatrix::new(n, data).expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::eig_oracle_values;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hamiltonian_example_structure() {
        let sys = fixtures::hamiltonian_example();
        let expect_v = [c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(sys.v(), expect_v);
        let p = SpectralPortrait::new(&sys).unwrap();
        assert!((&p.puv - &crate::poly::Poly::from_real(&[-4.0])).max_abs_coeff() < 1e-12);
        let m = linalg::moments(sys.a(), sys.u(), sys.v(), 3).unwrap();
        let expect = [0.0, 0.0, 0.0, -4.0];
        for (x, e) in m.iter().zip(expect) {
            assert!((x - c(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn h_identity_gives_v_equal_u() {
        let a = CMatrix::from_rows(&[vec![c(2.0, 0.0), c(1.0, -1.0)], vec![c(1.0, 1.0), c(-1.0, 0.0)]]).unwrap();
        let ctx = StructureContext::h_selfadjoint(CMatrix::identity(2)).unwrap();
        let u = vec![c(0.3, 0.4), c(-1.0, 0.2)];
        let sys = make_structured_system(a, u.clone(), ctx).unwrap();
        assert_eq!(sys.v(), &u[..]);
        let p = SpectralPortrait::new(&sys).unwrap();
        assert!(p.poles.iter().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn violations_rejected() {
        let mut a = fixtures::hamiltonian_example().a().clone();
        let mut rows = a.rows();
        rows[0][0] += 1.0;
        a = CMatrix::from_rows(&rows).unwrap();
        let ctx = StructureContext::j_hamiltonian(fixtures::hamiltonian_j()).unwrap();
        let u = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(make_structured_system(a, u, ctx), Err(Error::Structure(_))));
        assert!(StructureContext::j_hamiltonian(CMatrix::identity(2)).is_err());
        let h = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(1.0, 0.0)]]).unwrap();
        assert!(StructureContext::h_selfadjoint(h).is_err());
        assert!(StructureContext::h_selfadjoint(CMatrix::zeros(2)).is_err());
    }

    #[test]
    fn forecast_example() {
        let f = hamiltonian_forecast(&fixtures::hamiltonian_example()).unwrap();
        assert_eq!(f.count, 4);
        assert_eq!(f.kappa, 3);
        assert_eq!(f.sign, -1);
        assert_eq!(f.minus, Axes::Mixed);
        assert_eq!(f.plus, Axes::OffAxis);
        let sys = fixtures::hamiltonian_example();
        for (tau, expect) in [(-1e6, f.minus), (1e6, f.plus)] {
            let vals = eig_oracle_values(&sys.matrix_at(c(tau, 0.0))).unwrap();
            assert_eq!(observed_axes(&vals, f.count, 1e-3), expect);
        }
        assert!(hamiltonian_forecast(&fixtures::ray_example()).is_err());
    }

    fn kappa_one_system(seed: u64) -> Option<RankOneSystem> {
        let j = standard_j(2);
        let a = random_hamiltonian(&j, seed).unwrap();
        let ctx = StructureContext::j_hamiltonian(j).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let u: Vec<C64> = (0..4).map(|_| c(rng.random_range(-1.0..1.0), 0.0)).collect();
        let sys = make_structured_system(a, u, ctx).unwrap();
        let f = hamiltonian_forecast(&sys).ok()?;
        (f.kappa == 1).then_some(sys)
    }

    #[test]
    fn kappa_one_axes_and_counts() {
        let mut tested = 0;
        for seed in 0..40 {
            let Some(sys) = kappa_one_system(seed) else { continue };
            let f = hamiltonian_forecast(&sys).unwrap();
            assert_eq!(f.count % 2, 0);
            // even moments vanish
            let m = linalg::moments(sys.a(), sys.u(), sys.v(), 3).unwrap();
            assert!(m[0].norm() < 1e-10 && m[2].norm() < 1e-10);
            for tau in [1e6, -1e6] {
                let vals = eig_oracle_values(&sys.matrix_at(c(tau, 0.0))).unwrap();
                let bound = f64::abs(tau).powf(1.0 / (f.kappa as f64 + 2.0));
                assert_eq!(vals.iter().filter(|z| z.norm() > bound).count(), f.count);
                let expect = if tau > 0.0 { f.plus } else { f.minus };
                assert_eq!(observed_axes(&vals, 2, 1e-3), expect);
                if (tau > 0.0) == (f.sign > 0) {
                    assert_eq!(expect, Axes::RealPair);
                } else {
                    assert_eq!(expect, Axes::ImaginaryPair);
                }
            }
            tested += 1;
        }
        assert!(tested >= 10);
    }

    #[test]
    fn kappa_five_breaks_the_mixed_pattern() {
        // J_6(0) is J-Hamiltonian for the alternating antidiagonal J
        let n = 6;
        let mut jd = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            jd[i * n + (n - 1 - i)] = c(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        }
        let j = CMatrix::new(n, jd).unwrap();
        let a = fixtures::jordan_example(n).a().clone();
        let ctx = StructureContext::j_hamiltonian(j).unwrap();
        let mut u = vec![c(0.0, 0.0); n];
        u[n - 1] = c(1.0, 0.0);
        let sys = make_structured_system(a, u, ctx).unwrap();
        let f = hamiltonian_forecast(&sys).unwrap();
        assert_eq!(f.kappa, 5);
        for tau in [1e6, -1e6] {
            let vals = eig_oracle_values(&sys.matrix_at(c(tau, 0.0))).unwrap();
            let expect = if tau > 0.0 { f.plus } else { f.minus };
            assert_eq!(observed_axes(&vals, 6, 1e-3), expect);
        }
        // the sign that gives real diverging eigenvalues gives no imaginary ones
        let same_sign = if f.sign > 0 { f.plus } else { f.minus };
        assert_eq!(same_sign, Axes::RealPair);
    }

    #[test]
    fn symmetry_examples() {
        let sys = fixtures::hamiltonian_example();
        let r = verify_symmetry(&sys, &[0.0, 10.0, -3.0]).unwrap();
        assert!(r.pass, "{r:?}");
        let p = SpectralPortrait::new(&sys).unwrap();
        let mut s = expand_roots(&p.spectrum(c(0.0, 0.0)));
        s.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (z, e) in s.iter().zip(expect) {
            assert!((z - c(e, 0.0)).norm() < 1e-6);
        }

        let a = CMatrix::from_real(3, &[0.2, -1.0, 0.5, 0.3, 0.7, -0.4, 1.0, 0.1, -0.6]).unwrap();
        let re = |x: &[f64]| x.iter().map(|&t| c(t, 0.0)).collect::<Vec<_>>();
        let sys = RankOneSystem::new(a, re(&[1.0, 0.5, -0.3]), re(&[0.2, -1.0, 0.8])).unwrap();
        let r = verify_symmetry(&sys, &[2.0]).unwrap();
        assert!(r.pass);
        assert!(r.samples[0].negation_gap.is_none());
    }
}
