//! Large-`|tau|` behaviour: the `kappa + 1` unbounded branches with their
//! Puiseux coefficients and the bounded branches converging to roots of `p_uv`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot_conj, vec_norm, CMatrix};
use crate::matching::match_points;
use crate::perturbation::{RankOneSystem, SpectralPortrait};
use crate::poly::expand_roots;

/// Relative threshold below which a moment `v^*A^k u` counts as zero.
pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticModel {
    /// First `k` with `v^*A^k u != 0`; `None` when `p_uv` vanishes identically.
    pub kappa: Option<usize>,
    pub l: usize,
    /// `v^*A^k u` for `k = 0..=l+1`.
    pub moments: Vec<C64>,
    pub lead: C64,
    pub c_minus1: C64,
    pub c0: C64,
    /// Next Puiseux coefficient of the unbounded branches,
    /// `(m_{k+2}/m_k - K(K+1) c0^2 / 2) / (K c_{-1})` with `K = kappa + 1`.
    pub c1: C64,
    pub tau_min: f64,
}

impl AsymptoticModel {
    pub fn is_degenerate(&self) -> bool {
        self.kappa.is_none()
    }

    /// Number of unbounded branches.
    pub fn branches(&self) -> usize {
        self.kappa.map_or(0, |k| k + 1)
    }

    /// Leading-order rate `d lambda / d tau = lead / ((kappa+1) lambda^kappa)`
    /// on an unbounded branch.
    pub fn derivative_law(&self, lambda: C64) -> Option<C64> {
        let k = self.kappa?;
        Some(self.lead / (lambda.powu(k as u32) * (k + 1) as f64))
    }
}

pub fn detect_kappa(sys: &RankOneSystem) -> Result<AsymptoticModel> {
    let l = linalg::minimal_poly(sys.a()).degree() as usize;
    detect_kappa_with(sys, l)
}

fn detect_kappa_with(sys: &RankOneSystem, l: usize) -> Result<AsymptoticModel> {
    let moments = linalg::moments(sys.a(), sys.u(), sys.v(), l + 1)?;
    let norm_a = sys.a().frobenius();
    let uv = vec_norm(sys.u()) * vec_norm(sys.v());
    let kappa =
        (0..l).find(|&k| moments[k].norm() > MOMENT_TOL * norm_a.powi(k as i32) * uv);
    let zero = C64::new(0.0, 0.0);
    let Some(k) = kappa else {
        return Ok(AsymptoticModel {
            kappa: None,
            l,
            moments,
            lead: zero,
            c_minus1: zero,
            c0: zero,
            c1: zero,
            tau_min: f64::INFINITY,
        });
    };
    let big_k = (k + 1) as f64;
    let lead = moments[k];
    let c_minus1 = lead.powf(1.0 / big_k);
    let c0 = moments[k + 1] / (lead * big_k);
    let c1 = (moments[k + 2] / lead - c0 * c0 * (big_k * (big_k + 1.0) / 2.0)) / (c_minus1 * big_k);
    Ok(AsymptoticModel {
        kappa,
        l,
        moments,
        lead,
        c_minus1,
        c0,
        c1,
        tau_min: 10.0 * (1.0 + norm_a).powi(k as i32 + 1),
    })
}

/// The `kappa + 1` predicted positions `c_{-1} tau^{1/(kappa+1)} omega^j + c0`.
pub fn unbounded_branches(model: &AsymptoticModel, tau: C64) -> Result<Vec<C64>> {
    let k = model.kappa.ok_or(Error::Degenerate)?;
    if tau.norm() < model.tau_min {
        return Err(Error::TauTooSmall {
            got: tau.norm(),
            min: model.tau_min,
        });
    }
    Ok(unbounded_unchecked(model, k, tau, false))
}

/// Predictions including the `c1 tau^{-1/(kappa+1)}` correction.
pub fn unbounded_branches_refined(model: &AsymptoticModel, tau: C64) -> Result<Vec<C64>> {
    let k = model.kappa.ok_or(Error::Degenerate)?;
    if tau.norm() < model.tau_min {
        return Err(Error::TauTooSmall {
            got: tau.norm(),
            min: model.tau_min,
        });
    }
    Ok(unbounded_unchecked(model, k, tau, true))
}

fn unbounded_unchecked(model: &AsymptoticModel, k: usize, tau: C64, refined: bool) -> Vec<C64> {
    let big_k = k + 1;
    let root = tau.powf(1.0 / big_k as f64);
    (0..big_k)
        .map(|j| {
            let w = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / big_k as f64);
            let s = model.c_minus1 * root * w;
            let mut z = s + model.c0;
            if refined {
                z += model.c1 * model.c_minus1 / s;
            }
            z
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedBranch {
    pub zeta: C64,
    pub k: usize,
    /// `Q^(k)(zeta) / k!`; `None` for a frozen root.
    pub beta: Option<C64>,
    /// `Q^(k+1)(zeta) / (k+1)!`, used for the second-order term.
    pub gamma: Option<C64>,
    pub frozen: bool,
    /// `v^*(zeta I - A)^{-(k+1)} u`, the resolvent-power form of the leading
    /// coefficient. It equals `(-1)^k beta`.
    pub resolvent_moment: Option<C64>,
}

impl BoundedBranch {
    /// `|tau beta|^{-1/k}`: distance of the branch cluster from `zeta`.
    pub fn radius(&self, tau: C64) -> Option<f64> {
        self.beta.map(|b| (tau * b).norm().powf(-1.0 / self.k as f64))
    }

    /// `zeta + (1/(tau beta))^{1/k} omega^m`, `m = 0..k`. Frozen roots are
    /// predicted to stay at `zeta`.
    pub fn predict(&self, tau: C64) -> Vec<C64> {
        let Some(beta) = self.beta else {
            return vec![self.zeta; self.k];
        };
        let c = (tau * beta).inv().powf(1.0 / self.k as f64);
        (0..self.k)
            .map(|m| {
                self.zeta + c * C64::from_polar(1.0, std::f64::consts::TAU * m as f64 / self.k as f64)
            })
            .collect()
    }

    /// The leading coefficient the resolvent-power moment would give,
    /// `(1/a_{k+1})^{1/k}`. Differs from the true one by `(-1)^k`.
    pub fn resolvent_prediction(&self, tau: C64) -> Option<C64> {
        self.resolvent_moment
            .map(|a| self.zeta + (tau * a).inv().powf(1.0 / self.k as f64))
    }

    /// Whether the resolvent-power moment agrees with `beta` (it does only
    /// for even `k`).
    pub fn resolvent_sign_agrees(&self) -> Option<bool> {
        let (a, b) = (self.resolvent_moment?, self.beta?);
        Some((a - b).norm() <= 1e-8 * (1.0 + b.norm()))
    }
}

/// `v^*(z I - A)^{-p} u` by repeated solves.
fn resolvent_power(sys: &RankOneSystem, z: C64, p: usize) -> Option<C64> {
    let shifted = CMatrix::identity(sys.n()).scale(z).sub(sys.a());
    let mut x = sys.u().to_vec();
    for _ in 0..p {
        x = shifted.solve(&x)?;
    }
    Some(dot_conj(sys.v(), &x))
}

pub fn bounded_branches(portrait: &SpectralPortrait) -> Result<Vec<BoundedBranch>> {
    let puv = &portrait.puv;
    if puv.is_zero() {
        return Err(Error::Degenerate);
    }
    if puv.degree() < 1 {
        return Ok(Vec::new());
    }
    let sys = &portrait.system;
    let mut out = Vec::new();
    for r in puv.roots()? {
        let frozen = portrait.distance_to_spectrum(r.value) <= portrait.pole_tol();
        let k = r.multiplicity;
        let (beta, gamma, resolvent_moment) = if frozen {
            (None, None, None)
        } else {
            let d = portrait.q_eval(r.value, k + 1)?;
            let kf: f64 = (1..=k).map(|i| i as f64).product();
            (
                Some(d[k] / kf),
                Some(d[k + 1] / (kf * (k + 1) as f64)),
                resolvent_power(sys, r.value, k + 1),
            )
        };
        out.push(BoundedBranch {
            zeta: r.value,
            k,
            beta,
            gamma,
            frozen,
            resolvent_moment,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchErrors {
    pub label: String,
    /// Max matched error per grid point.
    pub errors: Vec<f64>,
    /// Log-log slope of error against `|tau|`; `None` when the prediction
    /// is exact on the grid.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub kappa: Option<usize>,
    pub l: usize,
    pub lead: C64,
    pub c_minus1: C64,
    pub c0: C64,
    pub c1: C64,
    /// `c1` estimated from oracle eigenvalues at the largest `|tau|`.
    pub c1_fitted: Option<C64>,
    pub tau_grid: Vec<C64>,
    pub max_error: f64,
    pub unbounded: Option<BranchErrors>,
    pub bounded: Vec<BranchErrors>,
    pub bounded_branches: Vec<BoundedBranch>,
    pub frozen_error: f64,
    /// Slope threshold `-1/max(kappa+1, max k_j) + 0.1`.
    pub slope_bound: f64,
    /// Degenerate case: largest Hausdorff distance between `sigma(B(tau))`
    /// and `sigma(A)`.
    pub constant_spectrum_gap: Option<f64>,
    pub pass: bool,
}

/// Tolerance below which a matched error counts as exact.
const EXACT_TOL: f64 = 1e-9;

fn slope(taus: &[C64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(errors)
        .filter(|(t, &e)| e > EXACT_TOL * (1.0 + t.norm()))
        .map(|(t, &e)| (t.norm().ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Matches oracle eigenvalues of `B(tau)` to the asymptotic predictions on
/// every grid point and measures convergence orders.
pub fn validate_asymptotics(
    sys: &RankOneSystem,
    model: &AsymptoticModel,
    tau_grid: &[C64],
) -> Result<AsymptoticReport> {
    if sys.n() > linalg::ORACLE_NMAX {
        return Err(Error::OracleTooLarge {
            n: sys.n(),
            max: linalg::ORACLE_NMAX,
        });
    }
    if tau_grid.is_empty() {
        return Err(Error::Invalid("empty tau grid".into()));
    }
    let portrait = SpectralPortrait::new(sys)?;
    let mut report = AsymptoticReport {
        kappa: model.kappa,
        l: model.l,
        lead: model.lead,
        c_minus1: model.c_minus1,
        c0: model.c0,
        c1: model.c1,
        c1_fitted: None,
        tau_grid: tau_grid.to_vec(),
        max_error: 0.0,
        unbounded: None,
        bounded: Vec::new(),
        bounded_branches: Vec::new(),
        frozen_error: 0.0,
        slope_bound: 0.0,
        constant_spectrum_gap: None,
        pass: true,
    };

    if model.is_degenerate() {
        let base = linalg::eig_oracle_values(sys.a())?;
        let mut gap: f64 = 0.0;
        for &tau in tau_grid {
            let s = linalg::eig_oracle_values(&sys.matrix_at(tau))?;
            gap = gap.max(crate::flow::hausdorff(&s, &base)?);
        }
        report.constant_spectrum_gap = Some(gap);
        report.max_error = gap;
        report.pass = gap <= 1e-8 * (1.0 + portrait.norm_a);
        return Ok(report);
    }

    let branches = bounded_branches(&portrait)?;
    let big_k = model.branches();
    let max_k = branches.iter().map(|b| b.k).max().unwrap_or(0).max(big_k);
    report.slope_bound = -1.0 / max_k as f64 + 0.1;

    // each prediction carries a group label: 0 = unbounded, 1+j = bounded j,
    // usize::MAX = frozen (structural extras or frozen roots)
    let structural: Vec<C64> = portrait
        .eigs
        .iter()
        .flat_map(|e| {
            std::iter::repeat_n(e.value, e.char_multiplicity.saturating_sub(e.minpoly_multiplicity))
        })
        .collect();
    let frozen_group = usize::MAX;

    let mut unbounded_err = Vec::new();
    let mut bounded_err = vec![Vec::new(); branches.len()];
    let mut frozen_err: f64 = 0.0;
    let mut c1_fit = None;
    let largest = tau_grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .map(|p| p.0)
        .unwrap();

    for (gi, &tau) in tau_grid.iter().enumerate() {
        let mut preds: Vec<(usize, C64)> = unbounded_branches(model, tau)?
            .into_iter()
            .map(|z| (0, z))
            .collect();
        for (j, b) in branches.iter().enumerate() {
            let g = if b.frozen { frozen_group } else { j + 1 };
            preds.extend(b.predict(tau).into_iter().map(|z| (g, z)));
        }
        preds.extend(structural.iter().map(|&z| (frozen_group, z)));
        let oracle = expand_roots(&linalg::eig_oracle(&sys.matrix_at(tau))?);
        if oracle.len() != preds.len() {
            return Err(Error::Matching(format!(
                "{} oracle eigenvalues against {} predictions",
                oracle.len(),
                preds.len()
            )));
        }
        let pz: Vec<C64> = preds.iter().map(|p| p.1).collect();
        let col = match_points(&pz, &oracle);
        let mut ub: f64 = 0.0;
        let mut bd = vec![0.0f64; branches.len()];
        let mut fit = C64::new(0.0, 0.0);
        for (i, &(g, z)) in preds.iter().enumerate() {
            let e = (oracle[col[i]] - z).norm();
            report.max_error = report.max_error.max(e);
            match g {
                0 => {
                    ub = ub.max(e);
                    // lambda - pred = c1 c_{-1} / s with s = c_{-1} tau^{1/K} omega^j
                    let s = z - model.c0;
                    fit += (oracle[col[i]] - z) * s / model.c_minus1;
                }
                g if g == frozen_group => frozen_err = frozen_err.max(e),
                g => bd[g - 1] = bd[g - 1].max(e),
            }
        }
        if gi == largest {
            c1_fit = Some(fit / big_k as f64);
        }
        unbounded_err.push(ub);
        for (j, e) in bd.into_iter().enumerate() {
            bounded_err[j].push(e);
        }
    }

    let check = |s: Option<f64>| s.is_none_or(|s| s <= report.slope_bound);
    let ub_slope = slope(tau_grid, &unbounded_err);
    let mut pass = check(ub_slope);
    report.unbounded = Some(BranchErrors {
        label: "unbounded".into(),
        errors: unbounded_err,
        slope: ub_slope,
    });
    for (b, errs) in branches.iter().zip(bounded_err) {
        if b.frozen {
            continue;
        }
        let s = slope(tau_grid, &errs);
        pass &= check(s);
        report.bounded.push(BranchErrors {
            label: format!("zeta={:.6}{:+.6}i k={}", b.zeta.re, b.zeta.im, b.k),
            errors: errs,
            slope: s,
        });
    }
    let frozen_tol = 1e-6 * (1.0 + portrait.norm_a);
    pass &= frozen_err <= frozen_tol;
    report.frozen_error = frozen_err;
    report.c1_fitted = c1_fit;
    report.bounded_branches = branches;
    report.pass = pass;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::flow::hausdorff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize) -> RankOneSystem {
        let mut z = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let a = CMatrix::new(n, (0..n * n).map(|_| z()).collect()).unwrap();
        let u = (0..n).map(|_| z()).collect();
        let v = (0..n).map(|_| z()).collect();
        RankOneSystem::new(a, u, v).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let m = detect_kappa(&fixtures::nonneg_example()).unwrap();
        assert_eq!(m.kappa, Some(1));
        assert!((m.lead - c(1.0, 0.0)).norm() < 1e-14);
        assert!((m.c0 - c(1.0, 0.0)).norm() < 1e-14);
        assert!((m.c1 - c(0.5, 0.0)).norm() < 1e-14);

        let m = detect_kappa(&fixtures::jordan_example(3)).unwrap();
        assert_eq!(m.kappa, Some(2));
        assert!((m.lead - c(1.0, 0.0)).norm() < 1e-14);

        let e = |i: usize| {
            let mut x = vec![c(0.0, 0.0); 2];
            x[i] = c(1.0, 0.0);
            x
        };
        let sys = RankOneSystem::new(CMatrix::identity(2), e(1), e(0)).unwrap();
        let m = detect_kappa(&sys).unwrap();
        assert!(m.is_degenerate());
        assert!(matches!(unbounded_branches(&m, c(1e6, 0.0)), Err(Error::Degenerate)));

        let m = detect_kappa(&fixtures::hamiltonian_example()).unwrap();
        assert_eq!(m.kappa, Some(3));
        assert!((m.lead - c(-4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn unbounded_examples() {
        let m = detect_kappa(&fixtures::nonneg_example()).unwrap();
        let mut p = unbounded_branches(&m, c(1e4, 0.0)).unwrap();
        p.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let exact = [1.0 - 10001f64.sqrt(), 1.0 + 10001f64.sqrt()];
        for (z, e) in p.iter().zip(exact) {
            assert!((z - c(e, 0.0)).norm() < 0.01);
        }
        assert!(matches!(
            unbounded_branches(&m, c(10.0, 0.0)),
            Err(Error::TauTooSmall { .. })
        ));

        let m = detect_kappa(&fixtures::jordan_example(3)).unwrap();
        let p = unbounded_branches(&m, c(1000.0, 0.0)).unwrap();
        let oracle = linalg::eig_oracle_values(&fixtures::jordan_example(3).matrix_at(c(1000.0, 0.0))).unwrap();
        assert!(hausdorff(&p, &oracle).unwrap() < 1e-9);
        assert!(p.iter().all(|z| (z.norm() - 10.0).abs() < 1e-12));

        let sys = fixtures::hamiltonian_example();
        let m = detect_kappa(&sys).unwrap();
        for tau in [c(125000.0, 0.0), c(-125000.0, 0.0)] {
            let r = (4.0f64 * 125000.0).powf(0.25);
            assert!(unbounded_branches(&m, tau)
                .unwrap()
                .iter()
                .all(|z| (z.norm() / r - 1.0).abs() < 0.2));
            let oracle = linalg::eig_oracle_values(&sys.matrix_at(tau)).unwrap();
            assert!(oracle.iter().all(|z| (z.norm() / r - 1.0).abs() < 0.2));
        }
    }

    #[test]
    fn bounded_examples() {
        let p = SpectralPortrait::new(&fixtures::ray_example()).unwrap();
        let b = bounded_branches(&p).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].zeta - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(b[0].k, 1);
        assert!((b[0].beta.unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert!((b[0].resolvent_moment.unwrap() - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(b[0].resolvent_sign_agrees(), Some(false));
        for tau in [1e3, 1e4, 1e5] {
            let pred = b[0].predict(c(tau, 0.0))[0];
            let exact = c(-1.0 + 1.0 / (tau + 1.0), 0.0);
            assert!((pred - exact).norm() <= 2.0 / (tau * tau));
            let wrong = b[0].resolvent_prediction(c(tau, 0.0)).unwrap();
            assert!((wrong - exact).norm() > 1.0 / tau);
        }

        let p = SpectralPortrait::new(&fixtures::angular_example()).unwrap();
        let mut z: Vec<C64> = bounded_branches(&p).unwrap().iter().map(|b| b.zeta).collect();
        z.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let h = 3f64.sqrt() / 2.0;
        assert!((z[0] - c(0.5, -h)).norm() < 1e-12 && (z[1] - c(0.5, h)).norm() < 1e-12);

        let p = SpectralPortrait::new(&fixtures::hamiltonian_example()).unwrap();
        assert!(bounded_branches(&p).unwrap().is_empty());

        let p = SpectralPortrait::new(&fixtures::frozen_example()).unwrap();
        let b = bounded_branches(&p).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|x| x.frozen && x.beta.is_none()));
    }

    #[test]
    fn double_root_of_puv_has_matching_resolvent_sign() {
        // A = J_3(0), u = (9, -6, 1), v = e_1 gives Q = (3x - 1)^2 / x^3
        let a = fixtures::jordan_example(3).a().clone();
        let u = vec![c(9.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)];
        let v = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let sys = RankOneSystem::new(a, u, v).unwrap();
        let p = SpectralPortrait::new(&sys).unwrap();
        let b = bounded_branches(&p).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].k, 2);
        assert_eq!(b[0].resolvent_sign_agrees(), Some(true));
        let tau = c(1e6, 0.0);
        let oracle = linalg::eig_oracle_values(&sys.matrix_at(tau)).unwrap();
        let r = b[0].radius(tau).unwrap();
        let near: Vec<f64> = oracle
            .iter()
            .map(|z| (z - b[0].zeta).norm())
            .filter(|&d| d < 1.0)
            .collect();
        assert_eq!(near.len(), 2);
        assert!(near.iter().all(|d| (d / r - 1.0).abs() < 0.1));
    }

    #[test]
    fn validation_examples() {
        let sys = fixtures::nonneg_example();
        let m = detect_kappa(&sys).unwrap();
        let grid = [c(1e2, 0.0), c(1e3, 0.0), c(1e4, 0.0)];
        let r = validate_asymptotics(&sys, &m, &grid).unwrap();
        let s = r.unbounded.as_ref().unwrap().slope.unwrap();
        assert!((s + 0.5).abs() < 0.05, "slope {s}");
        assert!(r.pass);
        assert!((r.c1_fitted.unwrap() - c(0.5, 0.0)).norm() < 0.01);

        let sys = fixtures::frozen_example();
        let m = detect_kappa(&sys).unwrap();
        let r = validate_asymptotics(&sys, &m, &grid).unwrap();
        assert!(r.unbounded.unwrap().slope.is_none());
        assert!(r.frozen_error < 1e-8);
        assert!(r.max_error < 1e-8);
        assert!(r.pass);

        let e = |i: usize| {
            let mut x = vec![c(0.0, 0.0); 2];
            x[i] = c(1.0, 0.0);
            x
        };
        let sys = RankOneSystem::new(CMatrix::identity(2), e(1), e(0)).unwrap();
        let m = detect_kappa(&sys).unwrap();
        let r = validate_asymptotics(&sys, &m, &grid).unwrap();
        assert_eq!(r.constant_spectrum_gap, Some(0.0));
        assert!(r.pass);

        let sys = fixtures::ray_example();
        let m = detect_kappa(&sys).unwrap();
        let r = validate_asymptotics(&sys, &m, &grid).unwrap();
        assert!(r.pass);
        assert!(serde_json::to_string(&r).unwrap().contains("slope_bound"));
    }

    #[test]
    fn degree_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(2..=6);
            let sys = random_system(&mut rng, n);
            let p = SpectralPortrait::new(&sys).unwrap();
            let m = detect_kappa(&sys).unwrap();
            assert_eq!(p.puv.degree() as usize + m.kappa.unwrap() + 1, p.l());
        }
        // forced kappa > 0 by a Jordan block with u at the bottom
        for n in 2..=5 {
            let sys = fixtures::jordan_example(n);
            let p = SpectralPortrait::new(&sys).unwrap();
            let m = detect_kappa(&sys).unwrap();
            assert_eq!(m.kappa, Some(n - 1));
            assert_eq!(p.puv.degree() as usize + n, p.l());
        }
    }

    #[test]
    fn count_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.random_range(2..=6);
            let sys = random_system(&mut rng, n);
            let m = detect_kappa(&sys).unwrap();
            let k = m.kappa.unwrap();
            let tau = c(1e6, 0.0) * C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let bound = tau.norm().powf(1.0 / (k as f64 + 2.0));
            let big = linalg::eig_oracle_values(&sys.matrix_at(tau))
                .unwrap()
                .iter()
                .filter(|z| z.norm() > bound)
                .count();
            assert_eq!(big, k + 1);
        }
    }

    #[test]
    fn radius_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let tau = c(1e6, 0.0);
        for _ in 0..20 {
            let n = rng.random_range(2..=5);
            let sys = random_system(&mut rng, n);
            let p = SpectralPortrait::new(&sys).unwrap();
            let oracle = linalg::eig_oracle_values(&sys.matrix_at(tau)).unwrap();
            for b in bounded_branches(&p).unwrap() {
                let r = b.radius(tau).unwrap();
                let mut d: Vec<f64> = oracle.iter().map(|z| (z - b.zeta).norm()).collect();
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for di in &d[..b.k] {
                    assert!((di / r - 1.0).abs() < 0.1, "{di} vs {r}");
                }
            }
        }
    }
}
