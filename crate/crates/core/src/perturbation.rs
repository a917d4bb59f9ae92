//! Rank-one families `B(tau) = A + tau u v^*` and their spectral portrait:
//! minimal polynomial `m_A`, perturbation polynomial `p_uv`, the rational
//! function `Q = p_uv / m_A`, frozen eigenvalues and critical points.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::critical;
use crate::error::{Error, Result};
use crate::linalg::{self, dot_conj, vec_norm, CMatrix};
use crate::poly::{Poly, Root};
use crate::structured::StructureContext;

/// Agreement required between the two routes to `p_uv`.
pub const PUV_CROSSCHECK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneSystem {
    a: CMatrix,
    u: Vec<C64>,
    v: Vec<C64>,
    structure: Option<StructureContext>,
}

impl RankOneSystem {
    pub fn new(a: CMatrix, u: Vec<C64>, v: Vec<C64>) -> Result<Self> {
        let n = a.n();
        if u.len() != n || v.len() != n {
            return Err(Error::Dimension(format!(
                "A is {n}x{n} but |u| = {}, |v| = {}",
                u.len(),
                v.len()
            )));
        }
        if vec_norm(&u) == 0.0 {
            return Err(Error::ZeroVector("u"));
        }
        if vec_norm(&v) == 0.0 {
            return Err(Error::ZeroVector("v"));
        }
        Ok(RankOneSystem {
            a,
            u,
            v,
            structure: None,
        })
    }

    pub(crate) fn with_structure(mut self, ctx: StructureContext) -> Self {
        self.structure = Some(ctx);
        self
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn u(&self) -> &[C64] {
        &self.u
    }

    pub fn v(&self) -> &[C64] {
        &self.v
    }

    pub fn structure(&self) -> Option<&StructureContext> {
        self.structure.as_ref()
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// True when `A`, `u` and `v` are all real.
    pub fn is_real(&self) -> bool {
        self.a.is_real() && self.u.iter().chain(&self.v).all(|c| c.im.abs() < linalg::REAL_TOL)
    }

    /// `B(tau)`.
    pub fn matrix_at(&self, tau: C64) -> CMatrix {
        self.a.rank_one_update(tau, &self.u, &self.v)
    }

    /// The same family with `v` replaced by `e^{i theta} v`.
    pub fn rotate_v(&self, theta: f64) -> Self {
        let w = C64::from_polar(1.0, theta);
        RankOneSystem {
            a: self.a.clone(),
            u: self.u.clone(),
            v: self.v.iter().map(|x| x * w).collect(),
            structure: None,
        }
    }
}

/// Scale-aware tolerance `1e-8 (1 + ||A||)` for freezing and pole tests.
pub fn freeze_tol(a: &CMatrix) -> f64 {
    1e-8 * (1.0 + a.frobenius())
}

/// `p_uv` through the moment formula `sum_{k-j=i+1} m_k v^*A^j u`.
pub fn puv_from_moments(m_a: &Poly, moments: &[C64]) -> Poly {
    let m = m_a.coeffs();
    let l = m.len() - 1;
    let coeffs = (0..l)
        .map(|i| {
            let mut sum = C64::new(0.0, 0.0);
            let mut mag = 0.0;
            for k in (i + 1)..=l {
                let t = m[k] * moments[k - i - 1];
                sum += t;
                mag += t.norm();
            }
            if sum.norm() <= 4.0 * f64::EPSILON * mag * l as f64 {
                C64::new(0.0, 0.0)
            } else {
                sum
            }
        })
        .collect();
    Poly::new(coeffs)
}

/// `p_uv` by sampling `m_A(z) v^*(zI - A)^{-1} u` on a circle enclosing the
/// spectrum and interpolating with a discrete Fourier transform. Returns the
/// interpolated coefficients and the circle radius.
fn puv_from_samples(sys: &RankOneSystem, m_a: &Poly) -> (Vec<C64>, f64) {
    let n = sys.n();
    let l = m_a.degree() as usize;
    let radius = 1.0 + sys.a.frobenius();
    let samples: Vec<C64> = (0..l)
        .map(|k| {
            let w = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / l as f64);
            let z = w * radius;
            let shifted = CMatrix::identity(n).scale(z).sub(&sys.a);
            let x = shifted
                .solve(&sys.u)
                .expect("resolvent is regular outside the spectral disc");
            m_a.eval(z) * dot_conj(&sys.v, &x)
        })
        .collect();
    let coeffs = (0..l)
        .map(|i| {
            let s: C64 = samples
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    f * C64::from_polar(1.0, -std::f64::consts::TAU * (i * k) as f64 / l as f64)
                })
                .sum();
            s / (l as f64 * radius.powi(i as i32))
        })
        .collect();
    (coeffs, radius)
}

/// `p_uv(lambda) = v^* m_A(lambda) (lambda I - A)^{-1} u`, computed from the
/// moment formula and confirmed against resolvent sampling.
pub fn compute_puv(sys: &RankOneSystem) -> Result<Poly> {
    let m_a = linalg::minimal_poly(&sys.a);
    compute_puv_with(sys, &m_a)
}

pub(crate) fn compute_puv_with(sys: &RankOneSystem, m_a: &Poly) -> Result<Poly> {
    let l = m_a.degree() as usize;
    let moments = linalg::moments(&sys.a, &sys.u, &sys.v, l)?;
    let primary = puv_from_moments(m_a, &moments);
    let (sampled, radius) = puv_from_samples(sys, m_a);
    let scaled = |c: C64, i: usize| c.norm() * radius.powi(i as i32);
    let mut gap: f64 = 0.0;
    let mut size: f64 = 0.0;
    for (i, s) in sampled.iter().enumerate() {
        let p = primary.coeffs().get(i).copied().unwrap_or_default();
        gap = gap.max(scaled(p - s, i));
        size = size.max(scaled(p, i));
    }
    let floor = vec_norm(&sys.u) * vec_norm(&sys.v) * f64::EPSILON.sqrt();
    let rel = gap / size.max(floor);
    if rel > PUV_CROSSCHECK_TOL {
        return Err(Error::PuvCrossCheck {
            gap: rel,
            tol: PUV_CROSSCHECK_TOL,
        });
    }
    Ok(primary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrozenKind {
    Structural,
    Accidental,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenEigenvalue {
    pub value: C64,
    pub kind: FrozenKind,
    /// Set when `Q` has no pole here (full pole-zero cancellation); such
    /// points make `Q = 1/tau` an unreliable eigenvalue equation.
    pub warning: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueOfA {
    pub value: C64,
    pub char_multiplicity: usize,
    pub minpoly_multiplicity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Zero of `Q'`.
    pub z: C64,
    /// `1 / |Q(z)|`, infinite when `Q(z) = 0`.
    pub t: f64,
    /// `1 / Q(z)`; `None` when `Q(z) = 0`.
    pub tau: Option<C64>,
    pub q_value: C64,
    /// Order of the first nonvanishing derivative of `Q` beyond the first,
    /// i.e. the multiplicity of `z` as an eigenvalue of `B(tau)`.
    pub kappa_local: usize,
    /// `z` coincides with an accidentally frozen eigenvalue of `A`.
    pub at_frozen: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralPortrait {
    pub system: RankOneSystem,
    pub char_poly: Poly,
    pub min_poly: Poly,
    pub puv: Poly,
    pub q0: Poly,
    /// `Q` with common factors of `p_uv` and `m_A` divided out.
    pub q_num: Poly,
    pub q_den: Poly,
    pub poles: Vec<C64>,
    pub eigs: Vec<EigenvalueOfA>,
    pub frozen: Vec<FrozenEigenvalue>,
    pub critical: Vec<CriticalPoint>,
    pub norm_a: f64,
    pub freeze_tol: f64,
}

impl SpectralPortrait {
    pub fn new(sys: &RankOneSystem) -> Result<Self> {
        let a = sys.a();
        let norm_a = a.frobenius();
        let tol = freeze_tol(a);
        let char_poly = linalg::char_poly(a);
        let min_poly = linalg::minimal_poly(a);
        let puv = compute_puv_with(sys, &min_poly)?;
        let q0 = critical::q0_from(&puv, &min_poly);

        let char_roots = char_poly.roots()?;
        let min_roots = min_poly.roots()?;
        let mut eigs: Vec<EigenvalueOfA> = char_roots
            .iter()
            .map(|r| EigenvalueOfA {
                value: r.value,
                char_multiplicity: r.multiplicity,
                minpoly_multiplicity: 0,
            })
            .collect();
        for r in &min_roots {
            let nearest = eigs
                .iter_mut()
                .min_by(|x, y| {
                    (x.value - r.value)
                        .norm()
                        .partial_cmp(&(y.value - r.value).norm())
                        .unwrap()
                })
                .expect("char_poly has at least one root");
            nearest.minpoly_multiplicity += r.multiplicity;
        }
        eigs.retain(|e| e.char_multiplicity > 0);

        let puv_roots: Vec<Root> = if puv.degree() >= 1 { puv.roots()? } else { Vec::new() };
        let mult_in_puv = |z: C64| -> usize {
            if puv.is_zero() {
                return usize::MAX;
            }
            puv_roots
                .iter()
                .filter(|r| (r.value - z).norm() <= tol)
                .map(|r| r.multiplicity)
                .sum()
        };

        let mut frozen = Vec::new();
        let mut q_num = puv.clone();
        let mut q_den = min_poly.clone();
        for r in &min_roots {
            let in_p = mult_in_puv(r.value);
            let structural = eigs
                .iter()
                .any(|e| (e.value - r.value).norm() <= tol && e.char_multiplicity > e.minpoly_multiplicity);
            let cancel = in_p.min(r.multiplicity);
            if !puv.is_zero() {
                for _ in 0..cancel {
                    q_num = q_num.deflate(r.value);
                    q_den = q_den.deflate(r.value);
                }
            }
            if structural {
                frozen.push(FrozenEigenvalue {
                    value: r.value,
                    kind: FrozenKind::Structural,
                    warning: false,
                });
            } else if in_p > 0 {
                frozen.push(FrozenEigenvalue {
                    value: r.value,
                    kind: FrozenKind::Accidental,
                    warning: in_p >= r.multiplicity,
                });
            }
        }
        // structural eigenvalues are frozen regardless of u, v and may also be
        // roots of p_uv; mark their cancellation state too
        for f in frozen.iter_mut().filter(|f| f.kind == FrozenKind::Structural) {
            let m = min_roots
                .iter()
                .find(|r| (r.value - f.value).norm() <= tol)
                .map_or(0, |r| r.multiplicity);
            f.warning = m > 0 && mult_in_puv(f.value) >= m;
        }
        let poles = if q_den.degree() >= 1 {
            q_den.root_values()?
        } else {
            Vec::new()
        };

        let mut portrait = SpectralPortrait {
            system: sys.clone(),
            char_poly,
            min_poly,
            puv,
            q0,
            q_num,
            q_den,
            poles,
            eigs,
            frozen,
            critical: Vec::new(),
            norm_a,
            freeze_tol: tol,
        };
        portrait.critical = critical::find_critical_points(&portrait)?;
        Ok(portrait)
    }

    /// Degree of the minimal polynomial.
    pub fn l(&self) -> usize {
        self.min_poly.degree() as usize
    }

    pub fn pole_tol(&self) -> f64 {
        self.freeze_tol
    }

    pub fn distance_to_spectrum(&self, z: C64) -> f64 {
        self.eigs
            .iter()
            .map(|e| (e.value - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `(Q(z), Q'(z), ..., Q^(order)(z))` from the reduced rational form.
    pub fn q_eval(&self, z: C64, order: usize) -> Result<Vec<C64>> {
        if self.poles.iter().any(|p| (p - z).norm() <= self.pole_tol()) {
            return Err(Error::AtPole(format!("{z}")));
        }
        Ok(rational_derivatives(&self.q_num, &self.q_den, z, order))
    }

    /// `Q(z)` without the pole guard.
    pub fn q(&self, z: C64) -> C64 {
        self.q_num.eval(z) / self.q_den.eval(z)
    }

    /// `p_B(tau)(lambda) = m_A(lambda) - tau p_uv(lambda)`.
    pub fn perturbed_poly(&self, tau: C64) -> Poly {
        let neg_tau = -tau;
        Poly::new_exact(
            Poly::lin_comb(&[(C64::new(1.0, 0.0), &self.min_poly), (neg_tau, &self.puv)])
                .coeffs()
                .to_vec(),
        )
    }

    /// Spectrum of `B(tau)`: roots of `p_B(tau)` joined with the structurally
    /// frozen part of `det(lambda I - A) / m_A`. Multiplicities sum to `n`.
    pub fn spectrum(&self, tau: C64) -> Vec<Root> {
        let p = self.perturbed_poly(tau);
        let mut out = p.roots().expect("p_B(tau) is monic of degree l >= 1");
        for e in &self.eigs {
            let extra = e.char_multiplicity.saturating_sub(e.minpoly_multiplicity);
            if extra == 0 {
                continue;
            }
            let tol = crate::poly::CLUSTER_TOL * e.value.norm().max(1.0);
            if let Some(r) = out.iter_mut().find(|r| (r.value - e.value).norm() <= tol) {
                r.multiplicity += extra;
            } else {
                out.push(Root {
                    value: e.value,
                    multiplicity: extra,
                });
            }
        }
        out
    }

    pub fn classify_frozen(&self) -> &[FrozenEigenvalue] {
        &self.frozen
    }

    /// Algebraic multiplicity of `lambda0` as an eigenvalue of `B(tau0)`,
    /// read off from the vanishing pattern of `Q - 1/tau0` and its derivatives.
    pub fn multiplicity_at(&self, tau0: C64, lambda0: C64) -> Result<usize> {
        if self.distance_to_spectrum(lambda0) <= self.pole_tol() {
            return Err(Error::NearSpectrum(format!("{lambda0}")));
        }
        let l = self.l();
        let d = self.q_eval(lambda0, l + 1)?;
        let tol = 1e-6 * d[0].norm().max(1.0);
        if tau0.norm() == 0.0 || (d[0] - tau0.inv()).norm() > tol {
            return Ok(0);
        }
        Ok((1..=l + 1).find(|&j| d[j].norm() > tol).unwrap_or(l + 1))
    }
}

/// Derivatives of `num / den` at `z` up to `order`, via the Taylor recurrence
/// of `Q * den = num`.
pub fn rational_derivatives(num: &Poly, den: &Poly, z: C64, order: usize) -> Vec<C64> {
    let nt = num.taylor(z, order);
    let dt = den.taylor(z, order);
    let mut q: Vec<C64> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = nt[k];
        for j in 0..k {
            acc -= q[j] * dt[k - j];
        }
        q.push(acc / dt[0]);
    }
    let mut fact = 1.0;
    for (k, v) in q.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *v *= fact;
    }
    q
}

/// Companion-form family whose member at `tau = -1` is the nilpotent Jordan
/// block `J_n(0)`: `A` has ones on the superdiagonal and last row `a`,
/// `u = e_n`, `v = conj(a)`.
pub fn companion_collapse_system(a: &[C64]) -> Result<RankOneSystem> {
    let n = a.len();
    if n == 0 {
        return Err(Error::Invalid("companion needs at least one coefficient".into()));
    }
    if let Some(i) = a.iter().position(|c| c.norm() == 0.0) {
        return Err(Error::ZeroCoefficient(i));
    }
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n - 1 {
        data[i * n + i + 1] = C64::new(1.0, 0.0);
    }
    data[(n - 1) * n..].copy_from_slice(a);
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[n - 1] = C64::new(1.0, 0.0);
    let v = a.iter().map(|c| c.conj()).collect();
    RankOneSystem::new(CMatrix::new(n, data)?, u, v)
}

/// `tau` at which [`companion_collapse_system`] collapses to `J_n(0)`.
pub const COMPANION_COLLAPSE_TAU: f64 = -1.0;
