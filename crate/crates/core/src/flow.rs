//! Eigenvalue trajectories along rays and circles in the `tau` plane, level
//! curves `{z : |Q(z)| = 1/t}`, and a few set-distance helpers.
//!
//! Moving branches are the roots of `den - tau * num` where `num / den` is the
//! reduced form of `Q`; accidentally frozen eigenvalues are carried along as
//! fixed branches. Branch identity is kept by a predictor-corrector
//! continuation and, where that breaks down, by optimal assignment against a
//! local model.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::match_points;
use crate::perturbation::{CriticalPoint, SpectralPortrait};
use crate::poly::{expand_roots, Poly};

/// Half-width of the parameter band around a critical radius that is crossed
/// with the local Puiseux model rather than by continuation.
pub const CRIT_BAND: f64 = 1e-4;
/// Maximum number of step halvings per sample interval.
pub const MAX_HALVINGS: u32 = 14;
/// Relative accuracy of points on extracted level curves.
pub const LEVELSET_TOL: f64 = 1e-9;
/// Relative distance at which two branches count as colliding.
pub const COLLISION_TOL: f64 = 1e-7;

const NEWTON_ITERS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathKind {
    /// `tau = t e^{i theta}`, `t` from `t0` to `t1`.
    Ray { theta: f64, t0: f64, t1: f64 },
    /// `tau = t e^{i theta}`, `theta` from 0 to `2 pi`.
    Circle { t: f64 },
}

impl PathKind {
    pub fn tau(&self, s: f64) -> C64 {
        match *self {
            PathKind::Ray { theta, .. } => C64::from_polar(s, theta),
            PathKind::Circle { t } => C64::from_polar(t, s),
        }
    }

    fn dtau(&self, s: f64) -> C64 {
        match *self {
            PathKind::Ray { theta, .. } => C64::from_polar(1.0, theta),
            PathKind::Circle { t } => C64::new(0.0, t) * C64::from_polar(1.0, s),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match *self {
            PathKind::Ray { t0, t1, .. } => (t0, t1),
            PathKind::Circle { .. } => (0.0, TAU),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub param: f64,
    pub tau: C64,
    /// Position of branch `i` at index `i`.
    pub positions: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// The path passes a critical point `tau_j = 1/Q(z_j)`.
    Collision,
    /// Continuation failed at the step floor away from any listed critical
    /// point; branches were re-assigned from a direct root solve.
    UnlistedCollision,
    /// A moving branch passed through an accidentally frozen eigenvalue.
    FrozenPathology,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub param: f64,
    pub tau: C64,
    pub z: C64,
    pub kind: EventKind,
    pub critical_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub path: PathKind,
    pub samples: Vec<Sample>,
    pub branch_ids: Vec<usize>,
    /// Ids of branches pinned at accidentally frozen eigenvalues.
    pub frozen_ids: Vec<usize>,
    pub events: Vec<Event>,
    /// Circle sweeps: branch `i` ends where branch `monodromy[i]` started.
    pub monodromy: Option<Vec<usize>>,
    pub cycle_lengths: Vec<usize>,
    /// Largest `|p_B(tau)(lambda)| / (1 + |lambda|)^l` over all samples.
    pub max_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub parameter: f64,
    pub branch_id: usize,
    pub re: f64,
    pub im: f64,
    pub event_flag: u8,
}

impl Trajectory {
    /// Smallest distance between two moving branches over all samples.
    pub fn min_separation(&self) -> f64 {
        let moving: Vec<usize> = self
            .branch_ids
            .iter()
            .copied()
            .filter(|i| !self.frozen_ids.contains(i))
            .collect();
        let mut best = f64::INFINITY;
        for s in &self.samples {
            for (a, &i) in moving.iter().enumerate() {
                for &j in &moving[a + 1..] {
                    best = best.min((s.positions[i] - s.positions[j]).norm());
                }
            }
        }
        best
    }

    /// Positions of one branch over the whole path.
    pub fn branch(&self, id: usize) -> Vec<C64> {
        self.samples.iter().map(|s| s.positions[id]).collect()
    }

    /// One row per sample and branch. `event_flag` is set on the samples
    /// nearest to each recorded event.
    pub fn rows(&self) -> Vec<CsvRow> {
        let mut flagged = vec![false; self.samples.len()];
        for e in &self.events {
            if let Some((k, _)) = self.samples.iter().enumerate().min_by(|a, b| {
                (a.1.param - e.param)
                    .abs()
                    .partial_cmp(&(b.1.param - e.param).abs())
                    .unwrap()
            }) {
                flagged[k] = true;
            }
        }
        self.samples
            .iter()
            .zip(flagged)
            .flat_map(|(s, f)| {
                s.positions.iter().enumerate().map(move |(b, z)| CsvRow {
                    parameter: s.param,
                    branch_id: b,
                    re: z.re,
                    im: z.im,
                    event_flag: f as u8,
                })
            })
            .collect()
    }
}

/// A stretch of the path crossed with the local model.
#[derive(Clone, Debug)]
struct Band {
    lo: f64,
    hi: f64,
    /// Critical points passed inside the band.
    points: Vec<CriticalPoint>,
    center: f64,
}

struct Tracker<'a> {
    portrait: &'a SpectralPortrait,
    path: PathKind,
    num: Poly,
    den: Poly,
    dnum: Poly,
    dden: Poly,
    frozen: Vec<C64>,
    bands: Vec<Band>,
    events: Vec<Event>,
    h_min: f64,
}

impl<'a> Tracker<'a> {
    fn new(portrait: &'a SpectralPortrait, path: PathKind, steps: usize) -> Result<Self> {
        let num = portrait.q_num.clone();
        let den = portrait.q_den.clone();
        let (g, _) = portrait.min_poly.div_rem(&den);
        let frozen = if g.degree() >= 1 {
            expand_roots(&g.roots()?)
        } else {
            Vec::new()
        };
        let (s0, s1) = path.range();
        let mut tracker = Tracker {
            portrait,
            path,
            dnum: num.derivative(1),
            dden: den.derivative(1),
            num,
            den,
            frozen,
            bands: Vec::new(),
            events: Vec::new(),
            h_min: (s1 - s0) / (steps as f64 * 2f64.powi(MAX_HALVINGS as i32)),
        };
        tracker.bands = tracker.find_bands();
        Ok(tracker)
    }

    fn find_bands(&self) -> Vec<Band> {
        let (s0, s1) = self.path.range();
        let mut raw: Vec<(f64, f64, CriticalPoint)> = Vec::new();
        for cp in &self.portrait.critical {
            let Some(tau_j) = cp.tau else { continue };
            if cp.at_frozen {
                continue;
            }
            match self.path {
                PathKind::Ray { theta, .. } => {
                    let on_ray = (tau_j - C64::from_polar(cp.t, theta)).norm() <= 1e-6 * cp.t;
                    if on_ray && cp.t >= s0 - CRIT_BAND && cp.t <= s1 + CRIT_BAND {
                        raw.push((cp.t, CRIT_BAND, *cp));
                    }
                }
                PathKind::Circle { t } => {
                    if (t - cp.t).abs() <= CRIT_BAND {
                        let c = tau_j.arg().rem_euclid(TAU);
                        let hw = CRIT_BAND / t;
                        for shift in [-TAU, 0.0, TAU] {
                            let cc = c + shift;
                            if cc + hw >= s0 && cc - hw <= s1 {
                                raw.push((cc, hw, *cp));
                            }
                        }
                    }
                }
            }
        }
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut bands: Vec<Band> = Vec::new();
        for (c, hw, cp) in raw {
            let (lo, hi) = ((c - hw).max(s0), (c + hw).min(s1));
            if let Some(last) = bands.last_mut() {
                if lo <= last.hi {
                    last.hi = last.hi.max(hi);
                    last.points.push(cp);
                    continue;
                }
            }
            bands.push(Band {
                lo,
                hi,
                points: vec![cp],
                center: c,
            });
        }
        bands
    }

    fn p(&self, z: C64, tau: C64) -> C64 {
        self.den.eval(z) - tau * self.num.eval(z)
    }

    fn dp(&self, z: C64, tau: C64) -> C64 {
        self.dden.eval(z) - tau * self.dnum.eval(z)
    }

    fn velocity(&self, pos: &[C64], s: f64) -> Option<Vec<C64>> {
        let tau = self.path.tau(s);
        let dt = self.path.dtau(s);
        pos.iter()
            .map(|&z| {
                let v = dt * self.num.eval(z) / self.dp(z, tau);
                (v.re.is_finite() && v.im.is_finite()).then_some(v)
            })
            .collect()
    }

    fn rk4(&self, pos: &[C64], s: f64, h: f64) -> Option<Vec<C64>> {
        let add = |x: &[C64], k: &[C64], c: f64| -> Vec<C64> {
            x.iter().zip(k).map(|(a, b)| a + b * c).collect()
        };
        let k1 = self.velocity(pos, s)?;
        let k2 = self.velocity(&add(pos, &k1, h / 2.0), s + h / 2.0)?;
        let k3 = self.velocity(&add(pos, &k2, h / 2.0), s + h / 2.0)?;
        let k4 = self.velocity(&add(pos, &k3, h), s + h)?;
        Some(
            (0..pos.len())
                .map(|i| pos[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
                .collect(),
        )
    }

    fn newton(&self, mut z: C64, tau: C64) -> Option<C64> {
        for _ in 0..NEWTON_ITERS {
            let d = self.dp(z, tau);
            if d.norm() == 0.0 {
                return None;
            }
            let step = self.p(z, tau) / d;
            z -= step;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return None;
            }
            if step.norm() <= 1e-14 * (1.0 + z.norm()) {
                return Some(z);
            }
        }
        None
    }

    fn collision_scale(&self, z: C64) -> f64 {
        COLLISION_TOL * (1.0 + z.norm())
    }

    fn try_step(&self, pos: &[C64], s: f64, h: f64) -> Option<Vec<C64>> {
        let pred = self.rk4(pos, s, h)?;
        let tau = self.path.tau(s + h);
        let corr: Vec<C64> = pred.iter().map(|&z| self.newton(z, tau)).collect::<Option<_>>()?;
        for i in 0..corr.len() {
            let sep = (0..pred.len())
                .filter(|&j| j != i)
                .map(|j| (pred[i] - pred[j]).norm())
                .fold(f64::INFINITY, f64::min);
            if (corr[i] - pred[i]).norm() > 0.25 * sep {
                return None;
            }
            for j in 0..i {
                if (corr[i] - corr[j]).norm() <= self.collision_scale(corr[i]) {
                    return None;
                }
            }
        }
        Some(corr)
    }

    /// Direct roots of the moving-branch polynomial at `s`, ordered to match
    /// `pred` by optimal assignment.
    fn assign(&self, pred: &[C64], s: f64) -> Result<Vec<C64>> {
        let tau = self.path.tau(s);
        let poly = Poly::new_exact(
            Poly::lin_comb(&[(C64::new(1.0, 0.0), &self.den), (-tau, &self.num)])
                .coeffs()
                .to_vec(),
        );
        let roots = expand_roots(&poly.roots()?);
        let col = match_points(pred, &roots);
        Ok(col.iter().map(|&j| roots[j]).collect())
    }

    fn check_frozen(&mut self, before: &[C64], after: &[C64], s: f64) {
        for &f in &self.frozen {
            for (a, b) in before.iter().zip(after) {
                if segment_distance(f, *a, *b) <= 1e-6 * (1.0 + f.norm()) {
                    self.events.push(Event {
                        param: s,
                        tau: self.path.tau(s),
                        z: f,
                        kind: EventKind::FrozenPathology,
                        critical_t: None,
                    });
                }
            }
        }
    }

    /// Adaptive continuation from `s0` to `s1` away from bands.
    fn integrate(&mut self, mut pos: Vec<C64>, s0: f64, s1: f64) -> Result<Vec<C64>> {
        let mut s = s0;
        let span = s1 - s0;
        let mut h = span;
        while s1 - s > 1e-15 * (1.0 + s1.abs()) {
            h = h.min(s1 - s);
            if let Some(next) = self.try_step(&pos, s, h) {
                self.check_frozen(&pos, &next, s + h);
                pos = next;
                s += h;
                h = (h * 2.0).min(span);
            } else if h / 2.0 >= self.h_min {
                h /= 2.0;
            } else {
                let pred = self.rk4(&pos, s, h).unwrap_or_else(|| pos.clone());
                let next = self.assign(&pred, s + h)?;
                let (z, _) = closest_pair(&next);
                self.events.push(Event {
                    param: s + h,
                    tau: self.path.tau(s + h),
                    z,
                    kind: EventKind::UnlistedCollision,
                    critical_t: None,
                });
                self.check_frozen(&pos, &next, s + h);
                pos = next;
                s += h;
            }
        }
        Ok(pos)
    }

    /// Positions at `target` inside or at the end of `band`, predicted from
    /// the state `anchor` at `band.lo` with the local Puiseux model
    /// `w ~ (tau - tau_j)^{1/kappa}` and assigned to direct roots.
    fn jump(&self, band: &Band, anchor: &[C64], target: f64) -> Result<Vec<C64>> {
        let mut pred = anchor.to_vec();
        let mut taken = vec![false; anchor.len()];
        let tau_a = self.path.tau(band.lo);
        let tau_b = self.path.tau(target);
        for cp in &band.points {
            let tau_j = cp.tau.expect("bands only hold finite critical points");
            let da = tau_a - tau_j;
            let db = tau_b - tau_j;
            let k = cp.kappa_local.max(2);
            let mut order: Vec<usize> = (0..anchor.len()).filter(|&i| !taken[i]).collect();
            order.sort_by(|&a, &b| {
                (anchor[a] - cp.z)
                    .norm()
                    .partial_cmp(&(anchor[b] - cp.z).norm())
                    .unwrap()
            });
            let scale = match (da.norm() > 1e-14, db.norm() > 1e-14) {
                (true, true) => {
                    let ratio = db / da;
                    // a path straight through tau_j is continued as if it
                    // detoured around tau_j on its left
                    let mut turn = ratio.arg();
                    if turn > PI - 1e-9 {
                        turn = -PI;
                    }
                    C64::from_polar(ratio.norm().powf(1.0 / k as f64), turn / k as f64)
                }
                (true, false) => C64::new(0.0, 0.0),
                _ => C64::new(1.0, 0.0),
            };
            for &i in order.iter().take(k) {
                taken[i] = true;
                pred[i] = cp.z + (anchor[i] - cp.z) * scale;
            }
        }
        self.assign(&pred, target)
    }

    fn run(&mut self, seeds: Vec<C64>, steps: usize) -> Result<(Vec<Sample>, Vec<C64>)> {
        let (s0, s1) = self.path.range();
        let grid: Vec<f64> = (0..=steps)
            .map(|k| s0 + (s1 - s0) * k as f64 / steps as f64)
            .collect();
        let mut samples = Vec::with_capacity(grid.len());
        let mut pos = seeds;
        let mut s = s0;
        let mut anchor: Option<(usize, Vec<C64>)> = None;
        let bands = self.bands.clone();
        for (bi, b) in bands.iter().enumerate() {
            if b.lo <= s0 {
                anchor = Some((bi, pos.clone()));
                self.record_band(b);
            }
        }
        let mut next_band = bands.iter().position(|b| b.lo > s0).unwrap_or(bands.len());

        for &g in &grid {
            while s < g || anchor.as_ref().is_some_and(|(bi, _)| bands[*bi].hi <= g && s < bands[*bi].hi) {
                if let Some((bi, anch)) = &anchor {
                    let band = &bands[*bi];
                    let end = band.hi.min(g);
                    pos = self.jump(band, anch, end)?;
                    s = end;
                    if end >= band.hi {
                        anchor = None;
                    }
                    if end >= g {
                        break;
                    }
                } else if next_band < bands.len() && bands[next_band].lo < g {
                    let band = &bands[next_band];
                    pos = self.integrate(pos, s, band.lo)?;
                    s = band.lo;
                    anchor = Some((next_band, pos.clone()));
                    self.record_band(band);
                    next_band += 1;
                } else {
                    pos = self.integrate(pos, s, g)?;
                    s = g;
                }
            }
            let mut positions = pos.clone();
            positions.extend(&self.frozen);
            samples.push(Sample {
                param: g,
                tau: self.path.tau(g),
                positions,
            });
        }
        Ok((samples, pos))
    }

    fn record_band(&mut self, band: &Band) {
        for cp in &band.points {
            self.events.push(Event {
                param: band.center,
                tau: cp.tau.unwrap(),
                z: cp.z,
                kind: EventKind::Collision,
                critical_t: Some(cp.t),
            });
        }
    }

    fn seeds(&self, s: f64) -> Result<Vec<C64>> {
        let tau = self.path.tau(s);
        let poly = Poly::new_exact(
            Poly::lin_comb(&[(C64::new(1.0, 0.0), &self.den), (-tau, &self.num)])
                .coeffs()
                .to_vec(),
        );
        Ok(expand_roots(&poly.roots()?))
    }
}

fn closest_pair(pos: &[C64]) -> (C64, f64) {
    let mut best = (pos.first().copied().unwrap_or_default(), f64::INFINITY);
    for i in 0..pos.len() {
        for j in 0..i {
            let d = (pos[i] - pos[j]).norm();
            if d < best.1 {
                best = ((pos[i] + pos[j]) / 2.0, d);
            }
        }
    }
    best
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn residual(portrait: &SpectralPortrait, samples: &[Sample]) -> f64 {
    let l = portrait.l() as i32;
    samples
        .iter()
        .map(|s| {
            let p = portrait.perturbed_poly(s.tau);
            s.positions
                .iter()
                .map(|&z| p.eval(z).norm() / (1.0 + z.norm()).powi(l))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn cycles(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn track(portrait: &SpectralPortrait, path: PathKind, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::Invalid("steps must be positive".into()));
    }
    let mut tracker = Tracker::new(portrait, path, steps)?;
    let (s0, _) = path.range();
    let seeds = tracker.seeds(s0)?;
    let moving = seeds.len();
    let (samples, _) = tracker.run(seeds, steps)?;
    let total = moving + tracker.frozen.len();
    let (monodromy, cycle_lengths) = match path {
        PathKind::Circle { .. } => {
            let first = &samples.first().unwrap().positions;
            let last = &samples.last().unwrap().positions;
            let perm = match_points(last, first);
            let c = cycles(&perm);
            (Some(perm), c)
        }
        PathKind::Ray { .. } => (None, Vec::new()),
    };
    let max_residual = residual(portrait, &samples);
    let mut events = tracker.events;
    events.sort_by(|a, b| a.param.partial_cmp(&b.param).unwrap());
    events.dedup_by(|a, b| a.kind == b.kind && (a.z - b.z).norm() < 1e-6 && (a.param - b.param).abs() < 1e-3);
    // a circle through a critical point at theta = 0 meets it at both ends
    let mut seen: Vec<(C64, f64)> = Vec::new();
    events.retain(|e| match (e.kind, e.critical_t) {
        (EventKind::Collision, Some(t)) => {
            let dup = seen.iter().any(|&(z, s)| (z - e.z).norm() < 1e-9 && s == t);
            seen.push((e.z, t));
            !dup
        }
        _ => true,
    });
    Ok(Trajectory {
        path,
        samples,
        branch_ids: (0..total).collect(),
        frozen_ids: (moving..total).collect(),
        events,
        monodromy,
        cycle_lengths,
        max_residual,
    })
}

/// Tracks all branches along `tau = t e^{i theta}`, `t in [t0, t1]`, sampled
/// at `steps + 1` evenly spaced radii.
pub fn trace_ray(
    portrait: &SpectralPortrait,
    theta: f64,
    t_range: (f64, f64),
    steps: usize,
) -> Result<Trajectory> {
    let (t0, t1) = t_range;
    if !(t0 > 0.0 && t1 > t0) {
        return Err(Error::Invalid(format!("need 0 < t0 < t1, got [{t0}, {t1}]")));
    }
    track(portrait, PathKind::Ray { theta, t0, t1 }, steps)
}

/// Tracks all branches once around `|tau| = t`, reporting the induced
/// permutation of branches.
pub fn sweep_circle(portrait: &SpectralPortrait, t: f64, steps: usize) -> Result<Trajectory> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Invalid(format!("need t > 0, got {t}")));
    }
    track(portrait, PathKind::Circle { t }, steps)
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Invalid("Hausdorff distance of an empty set".into()));
    }
    let directed = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Invalid(format!("degenerate window [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    /// Square of half-width `2 + 2 max |z|` over the spectrum of `A` and the
    /// roots of `p_uv`, centred at their centroid.
    pub fn default_for(portrait: &SpectralPortrait) -> Self {
        let mut pts: Vec<C64> = portrait.eigs.iter().map(|e| e.value).collect();
        if portrait.puv.degree() >= 1 {
            pts.extend(portrait.puv.root_values().unwrap_or_default());
        }
        let centroid = pts.iter().sum::<C64>() / pts.len().max(1) as f64;
        let half = 2.0 + 2.0 * pts.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Window {
            x0: centroid.re - half,
            x1: centroid.re + half,
            y0: centroid.im - half,
            y1: centroid.im + half,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<C64>,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub t: f64,
    pub window: Window,
    pub resolution: usize,
    pub polylines: Vec<Polyline>,
    /// Critical points with `|t - t_j| <= CRIT_BAND` inside the window.
    pub singular_points: Vec<CriticalPoint>,
    /// Grid cells `(ix, iy)` containing a singular point.
    pub singular_cells: Vec<(usize, usize)>,
}

impl LevelSet {
    pub fn points(&self) -> impl Iterator<Item = &C64> {
        self.polylines.iter().flat_map(|p| p.points.iter())
    }

    /// Distance from `z` to the nearest extracted segment.
    pub fn distance_to(&self, z: C64) -> f64 {
        let mut best = f64::INFINITY;
        for pl in &self.polylines {
            if pl.points.len() == 1 {
                best = best.min((pl.points[0] - z).norm());
            }
            for w in pl.points.windows(2) {
                best = best.min(segment_distance(z, w[0], w[1]));
            }
        }
        best
    }
}

/// The level function `|den(z)| - t |num(z)|` on the reduced form of `Q`.
struct Level<'a> {
    num: &'a Poly,
    den: &'a Poly,
    t: f64,
}

impl Level<'_> {
    fn f(&self, z: C64) -> f64 {
        self.den.eval(z).norm() - self.t * self.num.eval(z).norm()
    }

    fn bisect(&self, mut a: C64, mut fa: f64, mut b: C64) -> C64 {
        for _ in 0..80 {
            let m = (a + b) / 2.0;
            let fm = self.f(m);
            let scale = self.den.eval(m).norm() + self.t * self.num.eval(m).norm();
            if fm.abs() <= 0.25 * LEVELSET_TOL * scale || (b - a).norm() <= 1e-15 * (1.0 + m.norm()) {
                return m;
            }
            if (fm >= 0.0) == (fa >= 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        (a + b) / 2.0
    }
}

/// Edge identifiers: horizontal edge from vertex (i, j) to (i+1, j) and
/// vertical edge from (i, j) to (i, j+1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum EdgeId {
    H(usize, usize),
    V(usize, usize),
}

/// Marching-squares extraction of `{z : |Q(z)| = 1/t}` on a `resolution`
/// square grid over `window`, with crossings refined by bisection.
pub fn level_set(
    portrait: &SpectralPortrait,
    t: f64,
    window: Option<Window>,
    resolution: usize,
) -> Result<LevelSet> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Invalid(format!("need t > 0, got {t}")));
    }
    if resolution == 0 {
        return Err(Error::Invalid("resolution must be positive".into()));
    }
    let window = window.unwrap_or_else(|| Window::default_for(portrait));
    let level = Level {
        num: &portrait.q_num,
        den: &portrait.q_den,
        t,
    };
    let n = resolution;
    let dx = (window.x1 - window.x0) / n as f64;
    let dy = (window.y1 - window.y0) / n as f64;
    let vertex = |i: usize, j: usize| C64::new(window.x0 + i as f64 * dx, window.y0 + j as f64 * dy);
    // values[j][i] at vertex (i, j)
    let values: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|j| (0..=n).map(|i| level.f(vertex(i, j))).collect())
        .collect();
    let pos = |i: usize, j: usize| values[j][i] >= 0.0;

    let crossing = |e: EdgeId| -> C64 {
        let (a, b) = match e {
            EdgeId::H(i, j) => ((i, j), (i + 1, j)),
            EdgeId::V(i, j) => ((i, j), (i, j + 1)),
        };
        level.bisect(vertex(a.0, a.1), values[a.1][a.0], vertex(b.0, b.1))
    };

    let segments: Vec<(EdgeId, EdgeId)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut segs = Vec::new();
            for i in 0..n {
                let (bl, br, tr, tl) = (pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1));
                let bottom = EdgeId::H(i, j);
                let right = EdgeId::V(i + 1, j);
                let top = EdgeId::H(i, j + 1);
                let left = EdgeId::V(i, j);
                let code = (bl as u8) | (br as u8) << 1 | (tr as u8) << 2 | (tl as u8) << 3;
                match code {
                    0 | 15 => {}
                    1 | 14 => segs.push((left, bottom)),
                    2 | 13 => segs.push((bottom, right)),
                    3 | 12 => segs.push((left, right)),
                    4 | 11 => segs.push((right, top)),
                    6 | 9 => segs.push((bottom, top)),
                    7 | 8 => segs.push((left, top)),
                    5 | 10 => {
                        let c = C64::new(window.x0 + (i as f64 + 0.5) * dx, window.y0 + (j as f64 + 0.5) * dy);
                        let center = level.f(c) >= 0.0;
                        // the centre joins the two corners that share its sign
                        if center == bl {
                            segs.push((left, top));
                            segs.push((bottom, right));
                        } else {
                            segs.push((left, bottom));
                            segs.push((right, top));
                        }
                    }
                    _ => unreachable!(),
                }
            }
            segs
        })
        .collect();

    let mut points: HashMap<EdgeId, C64> = HashMap::new();
    for &(a, b) in &segments {
        for e in [a, b] {
            points.entry(e).or_insert_with(|| crossing(e));
        }
    }
    let polylines = chain(&segments, &points);

    let singular_points: Vec<CriticalPoint> = portrait
        .critical
        .iter()
        .filter(|cp| (cp.t - t).abs() <= CRIT_BAND && window.contains(cp.z))
        .copied()
        .collect();
    let singular_cells = singular_points
        .iter()
        .map(|cp| {
            let i = (((cp.z.re - window.x0) / dx) as usize).min(n - 1);
            let j = (((cp.z.im - window.y0) / dy) as usize).min(n - 1);
            (i, j)
        })
        .collect();
    Ok(LevelSet {
        t,
        window,
        resolution,
        polylines,
        singular_points,
        singular_cells,
    })
}

/// Joins segments sharing an edge crossing into polylines.
fn chain(segments: &[(EdgeId, EdgeId)], points: &HashMap<EdgeId, C64>) -> Vec<Polyline> {
    let mut adj: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(k);
        adj.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start_seg: usize, from: EdgeId, used: &mut Vec<bool>| -> (Vec<EdgeId>, bool) {
        let mut nodes = vec![from];
        let mut seg = start_seg;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            nodes.push(next);
            if next == from {
                return (nodes, true);
            }
            match adj[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => {
                    seg = s;
                    at = next;
                }
                None => return (nodes, false),
            }
        }
    };
    // open chains start at crossings with a single incident segment
    let mut starts: Vec<EdgeId> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    starts.sort_by_key(edge_key);
    for e in starts {
        let s = adj[&e][0];
        if used[s] {
            continue;
        }
        let (nodes, _) = walk(s, e, &mut used);
        out.push(Polyline {
            points: nodes.iter().map(|e| points[e]).collect(),
            closed: false,
        });
    }
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (nodes, closed) = walk(k, segments[k].0, &mut used);
        let mut pts: Vec<C64> = nodes.iter().map(|e| points[e]).collect();
        if closed {
            pts.pop();
        }
        out.push(Polyline { points: pts, closed });
    }
    out
}

fn edge_key(e: &EdgeId) -> (u8, usize, usize) {
    match *e {
        EdgeId::H(i, j) => (0, j, i),
        EdgeId::V(i, j) => (1, j, i),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Coverage {
    InSigmaA,
    InQZero,
    OnLevel {
        t: f64,
        /// Distance from `z` to the extracted level curve.
        distance: f64,
        /// `distance` is within one grid cell.
        located: bool,
    },
}

/// Classifies `z` by the covering `C = sigma(A) u Q^{-1}(0) u union_t
/// sigma(A,u,v;t)` and, for level points, checks that the extractor finds the
/// curve through `z` on the lattice of the default window at `resolution`.
pub fn coverage_probe(portrait: &SpectralPortrait, z: C64, resolution: usize) -> Result<Coverage> {
    let tol = portrait.freeze_tol;
    if portrait.distance_to_spectrum(z) <= tol {
        return Ok(Coverage::InSigmaA);
    }
    let q = portrait.q(z);
    let zero_root = portrait.q_num.degree() >= 1
        && portrait
            .q_num
            .root_values()?
            .iter()
            .any(|r| (r - z).norm() <= tol);
    if portrait.q_num.is_zero() || zero_root || q.norm() == 0.0 {
        return Ok(Coverage::InQZero);
    }
    let t = 1.0 / q.norm();
    let w = Window::default_for(portrait);
    let n = resolution.max(1);
    let dx = (w.x1 - w.x0) / n as f64;
    let dy = (w.y1 - w.y0) / n as f64;
    // a patch of the global lattice around the cell containing z
    let ci = ((z.re - w.x0) / dx).floor();
    let cj = ((z.im - w.y0) / dy).floor();
    let patch = Window {
        x0: w.x0 + (ci - 2.0) * dx,
        x1: w.x0 + (ci + 3.0) * dx,
        y0: w.y0 + (cj - 2.0) * dy,
        y1: w.y0 + (cj + 3.0) * dy,
    };
    let ls = level_set(portrait, t, Some(patch), 5)?;
    let distance = ls.distance_to(z);
    Ok(Coverage::OnLevel {
        t,
        distance,
        located: distance <= dx.hypot(dy),
    })
}

/// Directions (radians, sorted) in which the level curve through a critical
/// point leaves it, sampled on a circle of radius `r`.
pub fn branch_directions(portrait: &SpectralPortrait, cp: &CriticalPoint, r: f64) -> Vec<f64> {
    let level = Level {
        num: &portrait.q_num,
        den: &portrait.q_den,
        t: cp.t,
    };
    let m = 7200;
    let at = |k: usize| cp.z + C64::from_polar(r, TAU * k as f64 / m as f64);
    let vals: Vec<f64> = (0..m).map(|k| level.f(at(k))).collect();
    let mut out = Vec::new();
    for k in 0..m {
        let (a, b) = (vals[k], vals[(k + 1) % m]);
        if (a >= 0.0) != (b >= 0.0) {
            // bisect in angle so the point stays on the circle
            let (mut lo, mut hi) = (TAU * k as f64 / m as f64, TAU * (k + 1) as f64 / m as f64);
            let flo = a;
            for _ in 0..60 {
                let mid = (lo + hi) / 2.0;
                let fm = level.f(cp.z + C64::from_polar(r, mid));
                if (fm >= 0.0) == (flo >= 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(((lo + hi) / 2.0).rem_euclid(TAU));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Consecutive angular gaps between the branch directions, in degrees.
pub fn corner_angles(directions: &[f64]) -> Vec<f64> {
    let n = directions.len();
    (0..n)
        .map(|k| {
            let next = if k + 1 == n { directions[0] + TAU } else { directions[k + 1] };
            (next - directions[k]).to_degrees()
        })
        .collect()
}
