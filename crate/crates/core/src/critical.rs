//! Critical points of `Q`, critical radii and the global definability tests.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::perturbation::{CriticalPoint, FrozenKind, RankOneSystem, SpectralPortrait};
use crate::poly::Poly;

/// A root of `q0` within this distance (scaled by `1 + ||A||`) of an
/// eigenvalue of `A` is tested for cancellation.
pub const CANCEL_TOL: f64 = 1e-6;
/// Bound on `|Q'|` accepted at a critical point.
pub const CRITICAL_RESIDUAL: f64 = 1e-6;
/// Relative tolerance for `Q(z_j)` being real or unimodular.
pub const DEF_TOL: f64 = 1e-8;
/// Imaginary-part filter for real critical points.
pub const REAL_ROOT_TOL: f64 = 1e-8;

/// `p_uv' m_A - p_uv m_A'`.
pub fn q0_from(puv: &Poly, m_a: &Poly) -> Poly {
    Poly::sum_of_products(&[
        (1.0, &puv.derivative(1), m_a),
        (-1.0, puv, &m_a.derivative(1)),
    ])
}

/// Numerator of `Q'` before any cancellation.
pub fn q0_poly(portrait: &SpectralPortrait) -> Poly {
    portrait.q0.clone()
}

pub fn critical_points(portrait: &SpectralPortrait) -> &[CriticalPoint] {
    &portrait.critical
}

/// Genuine zeros of `Q'` among the roots of `q0`, sorted by critical radius.
pub(crate) fn find_critical_points(portrait: &SpectralPortrait) -> Result<Vec<CriticalPoint>> {
    let q0 = &portrait.q0;
    if q0.degree() < 1 {
        return Ok(Vec::new());
    }
    let near = CANCEL_TOL * (1.0 + portrait.norm_a);
    let max_order = 2 * portrait.l() + 2;
    let mut out = Vec::new();
    for r in q0.roots()? {
        let z = r.value;
        let near_eig = portrait.distance_to_spectrum(z) <= near;
        if near_eig && portrait.poles.iter().any(|p| (p - z).norm() <= near) {
            continue;
        }
        let d = match portrait.q_eval(z, max_order) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if d[1].norm() > CRITICAL_RESIDUAL * d[0].norm().max(1.0) {
            continue;
        }
        let q = d[0];
        let scale = 1e-6 * q.norm().max(1.0);
        let kappa_local = (2..=max_order).find(|&j| d[j].norm() > scale).unwrap_or(max_order);
        let zero_q = q.norm() <= 1e-14 * (1.0 + portrait.norm_a);
        let at_frozen = near_eig
            && portrait
                .frozen
                .iter()
                .any(|f| f.kind == FrozenKind::Accidental && (f.value - z).norm() <= near);
        out.push(CriticalPoint {
            z,
            t: if zero_q { f64::INFINITY } else { 1.0 / q.norm() },
            tau: if zero_q { None } else { Some(q.inv()) },
            q_value: q,
            kappa_local,
            at_frozen,
        });
    }
    out.sort_by(|a, b| {
        a.t.partial_cmp(&b.t)
            .unwrap()
            .then(a.z.re.partial_cmp(&b.z.re).unwrap())
            .then(a.z.im.partial_cmp(&b.z.im).unwrap())
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefinabilityMode {
    /// `tau` ranging over the real axis.
    RealRay,
    /// `tau = e^{i theta}`.
    UnitCircle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionCause {
    AccidentalFrozen,
    RealCriticalValue,
    UnimodularCriticalValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: C64,
    pub t: Option<f64>,
    pub tau: Option<C64>,
    pub cause: ObstructionCause,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Definability {
    Definable,
    Obstructed(Witness),
}

impl Definability {
    pub fn is_definable(&self) -> bool {
        matches!(self, Definability::Definable)
    }
}

/// Whether eigenvalues can be chosen as global analytic functions of `tau`
/// along the given path family. The witness is the violating critical point
/// of smallest radius, or an accidentally frozen eigenvalue.
pub fn definability(portrait: &SpectralPortrait, mode: DefinabilityMode) -> Definability {
    for cp in &portrait.critical {
        let q = cp.q_value;
        let tol = DEF_TOL * (1.0 + q.norm());
        let (violates, cause) = match mode {
            DefinabilityMode::RealRay => (q.im.abs() <= tol, ObstructionCause::RealCriticalValue),
            DefinabilityMode::UnitCircle => (
                (q.norm() - 1.0).abs() <= tol,
                ObstructionCause::UnimodularCriticalValue,
            ),
        };
        if violates {
            return Definability::Obstructed(Witness {
                z: cp.z,
                t: Some(cp.t),
                tau: cp.tau,
                cause,
            });
        }
    }
    if let Some(f) = portrait.frozen.iter().find(|f| f.kind == FrozenKind::Accidental) {
        return Definability::Obstructed(Witness {
            z: f.value,
            t: None,
            tau: None,
            cause: ObstructionCause::AccidentalFrozen,
        });
    }
    Definability::Definable
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPoint {
    pub x: f64,
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealWitness {
    pub x: f64,
    pub tau: f64,
    /// A witness within distance 0.1 survived a random relative `1e-3`
    /// real perturbation of `(A, u, v)`.
    pub persists: bool,
    pub perturbed: Option<RealPoint>,
}

/// Seed of the perturbation used by the persistence probe.
pub const PROBE_SEED: u64 = 0x5eed;

fn real_critical(sys: &RankOneSystem) -> Result<Vec<RealPoint>> {
    let portrait = SpectralPortrait::new(sys)?;
    let mut pts: Vec<RealPoint> = portrait
        .critical
        .iter()
        .filter(|cp| {
            cp.z.im.abs() <= REAL_ROOT_TOL * (1.0 + cp.z.norm())
                && cp.kappa_local == 2
                && !cp.at_frozen
                && cp.tau.is_some()
        })
        .map(|cp| RealPoint {
            x: cp.z.re,
            tau: cp.tau.unwrap().re,
        })
        .collect();
    pts.sort_by(|a, b| {
        (b.tau > 0.0)
            .cmp(&(a.tau > 0.0))
            .then(a.tau.abs().partial_cmp(&b.tau.abs()).unwrap())
    });
    Ok(pts)
}

fn perturb_real(sys: &RankOneSystem, rel: f64, seed: u64) -> Result<RankOneSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |xs: &[C64]| -> Vec<C64> {
        let scale = rel * xs.iter().map(|x| x.norm()).fold(0.0, f64::max);
        xs.iter()
            .map(|x| C64::new(x.re + scale * rng.random_range(-1.0..1.0), 0.0))
            .collect()
    };
    let a = CMatrix::new(sys.n(), jitter(sys.a().data()))?;
    let u = jitter(sys.u());
    let v = jitter(sys.v());
    RankOneSystem::new(a, u, v)
}

/// A real critical point `x` of `Q` with `Q''(x) != 0` off `sigma(A)`, and the
/// real parameter `1/Q(x)` at which two real eigenvalues meet and leave the
/// real line. Such a point rules out global real-analytic eigenvalue formulas.
pub fn real_obstruction_witness(sys: &RankOneSystem) -> Result<Option<RealWitness>> {
    if !sys.is_real() {
        return Err(Error::NotReal("A, u and v"));
    }
    let pts = real_critical(sys)?;
    let Some(best) = pts.first().copied() else {
        return Ok(None);
    };
    let nearby = perturb_real(sys, 1e-3, PROBE_SEED)
        .and_then(|p| real_critical(&p))
        .unwrap_or_default()
        .into_iter()
        .map(|p| (p, (p.x - best.x).hypot(p.tau - best.tau)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    Ok(Some(RealWitness {
        x: best.x,
        tau: best.tau,
        persists: nearby.is_some_and(|(_, d)| d <= 0.1),
        perturbed: nearby.map(|(p, _)| p),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn q0_examples() {
        let q = |sys| q0_poly(&SpectralPortrait::new(&sys).unwrap());
        let d = |p: Poly, e: &[f64]| (&p - &Poly::from_real(e)).max_abs_coeff();
        assert!(d(q(fixtures::ray_example()), &[0.0, -2.0, -1.0]) < 1e-12);
        assert!(d(q(fixtures::angular_example()), &[0.0, 0.0, -3.0, 2.0, -1.0]) < 1e-12);
        assert!(d(q(fixtures::frozen_example()), &[-4.0, 12.0, -13.0, 6.0, -1.0]) < 1e-12);
    }

    #[test]
    fn critical_examples() {
        let p = SpectralPortrait::new(&fixtures::ray_example()).unwrap();
        let cps = critical_points(&p);
        assert_eq!(cps.len(), 2);
        assert!(cps[0].z.norm() < 1e-12 && (cps[0].t - 1.0).abs() < 1e-12);
        assert!((cps[1].z - c(-2.0, 0.0)).norm() < 1e-12 && (cps[1].t - 3.0).abs() < 1e-12);
        assert!(cps.iter().all(|cp| cp.kappa_local == 2));

        let p = SpectralPortrait::new(&fixtures::angular_example()).unwrap();
        let cps = critical_points(&p);
        assert_eq!(cps.len(), 3);
        let s = 2f64.sqrt();
        assert!(cps[0].z.norm() < 1e-8 && (cps[0].t - 1.0).abs() < 1e-8);
        assert_eq!(cps[0].kappa_local, 3);
        for cp in &cps[1..] {
            assert!((cp.z.re - 1.0).abs() < 1e-8 && (cp.z.im.abs() - s).abs() < 1e-8);
            assert!((cp.t - 4.0 / 3f64.sqrt()).abs() < 1e-8);
        }

        let p = SpectralPortrait::new(&fixtures::frozen_example()).unwrap();
        assert!(critical_points(&p).is_empty());
    }

    #[test]
    fn critical_points_are_genuine() {
        let p = SpectralPortrait::new(&fixtures::figure1_example()).unwrap();
        assert!(!p.critical.is_empty());
        for cp in &p.critical {
            let d = p.q_eval(cp.z, 1).unwrap();
            assert!(d[1].norm() <= 1e-6);
            assert!((cp.t - cp.tau.unwrap().norm()).abs() <= 1e-12 * cp.t);
        }
    }

    #[test]
    fn double_eigenvalue_at_simple_critical_points() {
        for sys in [fixtures::ray_example(), fixtures::figure1_example()] {
            let p = SpectralPortrait::new(&sys).unwrap();
            for cp in p.critical.iter().filter(|cp| cp.kappa_local == 2) {
                let roots = p.perturbed_poly(cp.tau.unwrap()).roots().unwrap();
                assert!(roots
                    .iter()
                    .any(|r| r.multiplicity == 2 && (r.value - cp.z).norm() < 1e-5));
            }
        }
    }

    #[test]
    fn definability_examples() {
        let p = SpectralPortrait::new(&fixtures::ray_example()).unwrap();
        match definability(&p, DefinabilityMode::RealRay) {
            Definability::Obstructed(w) => {
                assert!(w.z.norm() < 1e-12);
                assert!((w.tau.unwrap() - c(1.0, 0.0)).norm() < 1e-12);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
        let rotated = SpectralPortrait::new(&fixtures::ray_example().rotate_v(0.05)).unwrap();
        assert!(definability(&rotated, DefinabilityMode::RealRay).is_definable());

        let p = SpectralPortrait::new(&fixtures::angular_example()).unwrap();
        match definability(&p, DefinabilityMode::UnitCircle) {
            Definability::Obstructed(w) => {
                assert!(w.z.norm() < 1e-8);
                assert!((w.t.unwrap() - 1.0).abs() < 1e-8);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }

        let p = SpectralPortrait::new(&fixtures::frozen_example()).unwrap();
        let v = definability(&p, DefinabilityMode::RealRay);
        assert!(matches!(
            v,
            Definability::Obstructed(Witness {
                cause: ObstructionCause::AccidentalFrozen,
                ..
            })
        ));
    }

    #[test]
    fn real_witness_examples() {
        let w = real_obstruction_witness(&fixtures::ray_example()).unwrap().unwrap();
        assert!(w.x.abs() < 1e-10 && (w.tau - 1.0).abs() < 1e-10);
        assert!(w.persists);

        let rot = CMatrix::from_real(2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        for (u, v) in [([1.0, 0.0], [1.0, 0.0]), ([1.0, 2.0], [-0.5, 1.0]), ([0.3, -1.0], [2.0, 0.7])] {
            let re = |x: [f64; 2]| x.iter().map(|&t| c(t, 0.0)).collect::<Vec<_>>();
            let sys = RankOneSystem::new(rot.clone(), re(u), re(v)).unwrap();
            assert!(real_obstruction_witness(&sys).unwrap().is_some());
        }

        // Q = 1/(x-1) on a diagonal matrix has no critical points at all
        let d = CMatrix::from_real(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let sys = RankOneSystem::new(d, e1.clone(), e1).unwrap();
        assert!(real_obstruction_witness(&sys).unwrap().is_none());

        assert!(matches!(
            real_obstruction_witness(&fixtures::figure1_example()),
            Err(Error::NotReal(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn definable_rays_avoid_collisions(theta in 0.01f64..0.1) {
            let sys = fixtures::ray_example().rotate_v(theta);
            let p = SpectralPortrait::new(&sys).unwrap();
            prop_assert!(definability(&p, DefinabilityMode::RealRay).is_definable());
            let mut min_sep = f64::INFINITY;
            for k in 0..400 {
                let tau = 0.1 + 9.9 * k as f64 / 399.0;
                let r = p.perturbed_poly(c(tau, 0.0)).root_values().unwrap();
                min_sep = min_sep.min((r[0] - r[1]).norm());
            }
            prop_assert!(min_sep > 1e-4);
        }
    }
}
