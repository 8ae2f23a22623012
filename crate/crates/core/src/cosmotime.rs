//! Cosmological time of a finite regular domain.
//!
//! For `x = (t, y)` the cosmological time is the Lorentz distance to the
//! horizon, `τ(x)² = max_q [(t − h(q))² − ‖y − q‖²]` over `{h(q) < t}`. The
//! objective is a minimum of concave quadratics (one per plane), hence
//! concave. Writing `d_i = t − h_i(y)` and `x − r(x) = Σ μ_i (1, û_i)`, the
//! optimality conditions become the complementarity problem
//!
//! ```text
//!   μ ≥ 0,   w = d − M μ ≥ 0,   μ·w = 0,   M_ij = 1 − û_i·û_j,
//! ```
//!
//! and then `τ² = μ·d`. The solver warm-starts with Polyak-step
//! supergradient ascent from the vertical drop `q = y`, pivots on the
//! active set (each face solve is the exact Newton step of the quadratic
//! cell objective), and falls back to enumerating supports of size ≤ n.
//! Every answer carries a weak-duality certificate.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{NullPlane, RegularDomain};
use crate::error::{Error, Result};
use crate::grid::{GraphSurface, Grid};
use crate::hull::subsets;
use crate::minkowski::{dot, MinkVector};

/// Certificate threshold on the relative duality gap.
pub const GAP_TOL: f64 = 1e-9;
/// Absolute accuracy of level heights, measured on τ.
pub const LEVEL_TOL: f64 = 1e-9;

const WARM_START_ITERS: usize = 30;

/// Cosmological time at a point together with its realizing geodesic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosmoSample {
    pub tau: f64,
    /// Retraction: past endpoint of the realizing geodesic, on the horizon.
    pub r: MinkVector,
    /// Unit future timelike direction with `x = r + τ·v`.
    pub v: MinkVector,
    /// Spatial projection of `r`.
    pub q_star: Vec<f64>,
    /// Every plane through `r` (largest active set).
    pub active: Vec<usize>,
    /// Planes carrying positive weight in `v`.
    pub support: Vec<usize>,
    /// Convex weights of `(v.y / v.t)` over `support`.
    pub weights: Vec<f64>,
    /// Weak-duality gap of the returned maximizer, relative to the squared
    /// time extent `(x.t − r.t)²`.
    pub objective_gap: f64,
}

impl CosmoSample {
    /// The spatial subgradient `g* = v.y / v.t ∈ ∂h(q*)`.
    pub fn gradient_direction(&self) -> Vec<f64> {
        self.v.y.iter().map(|c| c / self.v.t).collect()
    }

    /// Partial derivatives `(∂τ/∂t, ∂τ/∂y)`; the Lorentz gradient is `−v`.
    pub fn tau_gradient(&self) -> (f64, Vec<f64>) {
        (self.v.t, self.v.y.iter().map(|c| -c).collect())
    }
}

fn solve_dense(a: &mut [f64], b: &mut [f64], k: usize) -> bool {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return false;
    }
    for col in 0..k {
        let mut piv = col;
        for row in col + 1..k {
            if a[row * k + col].abs() > a[piv * k + col].abs() {
                piv = row;
            }
        }
        if a[piv * k + col].abs() <= 1e-12 * scale {
            return false;
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            b.swap(col, piv);
        }
        let p = a[col * k + col];
        for row in col + 1..k {
            let f = a[row * k + col] / p;
            if f != 0.0 {
                for c in col..k {
                    a[row * k + c] -= f * a[col * k + c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    for row in (0..k).rev() {
        let mut s = b[row];
        for c in row + 1..k {
            s -= a[row * k + c] * b[c];
        }
        b[row] = s / a[row * k + row];
    }
    true
}

struct Problem<'a> {
    planes: &'a [NullPlane],
    t: f64,
    y: &'a [f64],
    d: Vec<f64>,
    scale: f64,
    max_support: usize,
}

struct FaceSolution {
    support: Vec<usize>,
    mu: Vec<f64>,
    slack: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn gram(&self, i: usize, j: usize) -> f64 {
        1.0 - dot(&self.planes[i].u_hat, &self.planes[j].u_hat)
    }

    /// Solves `M_S μ = d_S` and evaluates the slacks of every plane.
    fn face(&self, support: &[usize]) -> Option<FaceSolution> {
        let k = support.len();
        if k < 2 || k > self.max_support {
            return None;
        }
        let mut a = vec![0.0; k * k];
        let mut mu: Vec<f64> = support.iter().map(|&i| self.d[i]).collect();
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                a[r * k + c] = self.gram(i, j);
            }
        }
        if !solve_dense(&mut a, &mut mu, k) {
            return None;
        }
        let slack = (0..self.planes.len())
            .map(|j| {
                let used: f64 = support.iter().zip(&mu).map(|(&i, &m)| m * self.gram(j, i)).sum();
                self.d[j] - used
            })
            .collect();
        Some(FaceSolution {
            support: support.to_vec(),
            mu,
            slack,
        })
    }

    fn feasible(&self, f: &FaceSolution) -> bool {
        let eps = 1e-12 * self.scale;
        f.mu.iter().all(|&m| m >= -eps) && f.slack.iter().all(|&w| w >= -eps)
    }

    fn heights_at(&self, q: &[f64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, p) in self.planes.iter().enumerate() {
            let h = p.height(q);
            if h > best.0 {
                best = (h, i);
            }
        }
        best
    }

    fn objective(&self, q: &[f64]) -> f64 {
        let (h, _) = self.heights_at(q);
        let gap = self.t - h;
        let dist = self.y.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        (gap - dist) * (gap + dist)
    }

    /// Cheapest two-plane upper bound on τ²: removing planes enlarges the
    /// domain and can only increase τ.
    fn pair_bound(&self) -> (f64, [usize; 2]) {
        let n = self.planes.len();
        let mut best = (f64::INFINITY, [0, 1]);
        for i in 0..n {
            for j in (i + 1)..n {
                let m = self.gram(i, j);
                if m <= 1e-15 {
                    continue;
                }
                let bound = 2.0 * self.d[i] * self.d[j] / m;
                if bound < best.0 {
                    best = (bound, [i, j]);
                }
            }
        }
        best
    }

    /// Polyak-step supergradient ascent from `q = y`; returns the best
    /// iterate.
    fn warm_start(&self, target: f64) -> Vec<f64> {
        let mut q = self.y.to_vec();
        let mut best_q = q.clone();
        let mut best_f = self.objective(&q);
        for _ in 0..WARM_START_ITERS {
            let (h, i) = self.heights_at(&q);
            let gap = self.t - h;
            let xi: Vec<f64> = q
                .iter()
                .zip(self.y)
                .zip(&self.planes[i].u_hat)
                .map(|((qc, yc), uc)| 2.0 * (yc - qc) - 2.0 * gap * uc)
                .collect();
            let norm2 = dot(&xi, &xi);
            let f = self.objective(&q);
            if norm2 <= 1e-30 || target - f <= 1e-14 * self.scale * self.scale {
                break;
            }
            let step = (target - f) / norm2;
            for (qc, x) in q.iter_mut().zip(&xi) {
                *qc += step * x;
            }
            let f_new = self.objective(&q);
            if f_new > best_f {
                best_f = f_new;
                best_q = q.clone();
            }
        }
        best_q
    }

    /// Active-set pivoting starting from `start`.
    fn pivot(&self, start: Vec<usize>) -> Option<FaceSolution> {
        let mut support = start;
        let eps = 1e-12 * self.scale;
        for _ in 0..(4 * self.planes.len() + 8) {
            support.sort_unstable();
            support.dedup();
            let face = self.face(&support)?;
            let (imin, mmin) =
                face.mu
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, &m)| if m < acc.1 { (i, m) } else { acc });
            if mmin < -eps {
                support.remove(imin);
                continue;
            }
            let (jmin, wmin) =
                face.slack
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (j, &w)| if w < acc.1 { (j, w) } else { acc });
            if wmin < -eps {
                if support.len() >= self.max_support {
                    return None;
                }
                support.push(jmin);
                continue;
            }
            return Some(face);
        }
        None
    }

    fn enumerate(&self) -> Option<FaceSolution> {
        let n = self.planes.len();
        for size in 2..=self.max_support.min(n) {
            for s in subsets(n, size) {
                if let Some(face) = self.face(&s) {
                    if self.feasible(&face) {
                        return Some(face);
                    }
                }
            }
        }
        None
    }
}

fn assemble(p: &Problem, face: FaceSolution) -> CosmoSample {
    let m = p.y.len();
    let mu: Vec<f64> = face.mu.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = mu.iter().sum();
    let mut g_vec = vec![0.0; m];
    for (&i, &mi) in face.support.iter().zip(&mu) {
        for (g, u) in g_vec.iter_mut().zip(&p.planes[i].u_hat) {
            *g += mi * u;
        }
    }
    let tau2: f64 = face.support.iter().zip(&mu).map(|(&i, &mi)| mi * p.d[i]).sum();
    let tau = tau2.max(0.0).sqrt();
    let q: Vec<f64> = p.y.iter().zip(&g_vec).map(|(a, b)| a - b).collect();
    let r = MinkVector::new(p.t - s, q.clone());
    let v = MinkVector::new(s / tau, g_vec.iter().map(|c| c / tau).collect());

    let tol_active = 1e-9 * (1.0 + r.t.abs()) + 1e-11 * p.scale;
    let active: Vec<usize> = (0..p.planes.len()).filter(|&j| face.slack[j] <= tol_active).collect();
    let pos_tol = 1e-9 * s;
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (&i, &mi) in face.support.iter().zip(&mu) {
        if mi > pos_tol {
            support.push(i);
            weights.push(mi);
        }
    }
    let wsum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= wsum;
    }

    // weak duality: primal value at q ≤ τ² ≤ dual value at λ = μ/s
    let primal = p.objective(&q);
    let lam_d: f64 = face.support.iter().zip(&mu).map(|(&i, &mi)| mi / s * p.d[i]).sum();
    let g_norm2: f64 = g_vec.iter().map(|c| (c / s).powi(2)).sum();
    let dual = lam_d * lam_d / (1.0 - g_norm2);
    // normalized by the squared time extent of the geodesic, the scale of
    // both terms of the objective
    let objective_gap = ((dual - primal) / (s * s).max(f64::MIN_POSITIVE)).abs();

    CosmoSample {
        tau,
        r,
        v,
        q_star: q,
        active,
        support,
        weights,
        objective_gap,
    }
}

fn solve_normal_form(d: &RegularDomain, x: &MinkVector, hint: Option<&[usize]>) -> Result<CosmoSample> {
    let planes = d.planes();
    let dvals: Vec<f64> = planes.iter().map(|p| x.t - p.height(&x.y)).collect();
    let dmin = dvals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > 0.0) {
        return Err(Error::OutsideDomain(format!(
            "point {:?} is not in the domain (t − h(y) = {dmin})",
            x.coords()
        )));
    }
    let scale = dvals.iter().cloned().fold(0.0, f64::max);
    let problem = Problem {
        planes,
        t: x.t,
        y: &x.y,
        d: dvals,
        scale,
        max_support: d.dimension(),
    };

    let mut face = hint.and_then(|h| problem.face(h)).filter(|f| problem.feasible(f));
    if face.is_none() {
        let (bound, pair) = problem.pair_bound();
        let q = problem.warm_start(bound);
        let (h, _) = problem.heights_at(&q);
        let gap = (x.t - h).max(0.0);
        let mut start: Vec<(f64, usize)> = planes
            .iter()
            .enumerate()
            .map(|(i, p)| (h - p.height(&q), i))
            .filter(|(lag, _)| *lag <= 1e-3 * gap + 1e-12)
            .collect();
        start.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut start: Vec<usize> = start.into_iter().map(|(_, i)| i).take(d.dimension()).collect();
        if start.len() < 2 {
            start = pair.to_vec();
        }
        face = problem
            .pivot(start)
            .filter(|f| problem.feasible(f))
            .or_else(|| problem.pivot(pair.to_vec()).filter(|f| problem.feasible(f)))
            .or_else(|| problem.enumerate());
    }
    let face = face.ok_or_else(|| {
        Error::numeric_with(
            "cosmological time: no feasible support found",
            vec![format!("x = {:?}", x.coords()), format!("d = {:?}", problem.d)],
        )
    })?;
    let sample = assemble(&problem, face);
    if !(sample.objective_gap <= GAP_TOL) || !sample.tau.is_finite() || sample.tau <= 0.0 {
        return Err(Error::numeric_with(
            "cosmological time: optimality certificate failed",
            vec![
                format!("x = {:?}", x.coords()),
                format!("gap = {}", sample.objective_gap),
                format!("tau = {}", sample.tau),
                format!("support = {:?}", sample.support),
            ],
        ));
    }
    Ok(sample)
}

/// Cosmological time at `x` with its realizing geodesic. Past-complete
/// domains return the reverse cosmological time; `r` and `v` are then given
/// in the original coordinates (`v` past-directed).
pub fn cosmological_time(d: &RegularDomain, x: &MinkVector) -> Result<CosmoSample> {
    cosmological_time_hinted(d, x, None)
}

/// As [`cosmological_time`], first trying the support `hint` (typically
/// taken from a neighboring query).
pub fn cosmological_time_hinted(d: &RegularDomain, x: &MinkVector, hint: Option<&[usize]>) -> Result<CosmoSample> {
    d.check_point(x)?;
    let xn = d.to_normal_form(x);
    let mut s = solve_normal_form(d, &xn, hint)?;
    if !d.is_future_complete() {
        s.r = s.r.time_mirror();
        s.v = s.v.time_mirror();
    }
    Ok(s)
}

/// Point of the level set `τ = a` on the vertical line over `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPoint {
    pub t: f64,
    pub sample: CosmoSample,
}

/// Height of the level set `S_a` over `y`.
pub fn level_height(d: &RegularDomain, a: f64, y: &[f64]) -> Result<f64> {
    level_point(d, a, y, None).map(|p| p.t)
}

/// Solves `τ(t, y) = a` for `t`. τ is concave and increasing along the
/// vertical line, so Newton iterates from above the root converge
/// monotonically; every step is safeguarded by bisection on a bracket
/// `[h(y), hi]` that is doubled until it encloses the root.
pub fn level_point(d: &RegularDomain, a: f64, y: &[f64], hint: Option<&[usize]>) -> Result<LevelPoint> {
    d.check_spatial(y)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Usage(format!("level value must be positive, got {a}")));
    }
    let sign = if d.is_future_complete() { 1.0 } else { -1.0 };
    let fut = if d.is_future_complete() {
        d.clone()
    } else {
        d.reflect_time()
    };
    let h = fut.horizon_height(y);
    let eval = |t: f64, hint: Option<&[usize]>| -> Result<CosmoSample> {
        solve_normal_form(&fut, &MinkVector::new(t, y.to_vec()), hint)
    };

    let mut lo = h;
    let mut hi = h + a * d.dimension() as f64;
    let mut hint_owned: Option<Vec<usize>> = hint.map(|h| h.to_vec());
    let mut at_hi = eval(hi, hint_owned.as_deref())?;
    let mut doublings = 0;
    while at_hi.tau < a {
        lo = hi;
        hi = h + 2.0 * (hi - h);
        doublings += 1;
        if doublings > 60 || !hi.is_finite() {
            return Err(Error::numeric(format!(
                "level {a}: could not bracket the root over {y:?}"
            )));
        }
        at_hi = eval(hi, Some(&at_hi.support))?;
    }
    hint_owned = Some(at_hi.support.clone());

    let mut t = hi;
    let mut cur = at_hi;
    let mut history = Vec::new();
    for _ in 0..200 {
        let resid = cur.tau - a;
        history.push(format!("t = {t:.17e}, tau - a = {resid:.3e}"));
        if resid.abs() <= 1e-14 * a.max(1.0) {
            break;
        }
        if resid > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
        let slope = cur.v.t;
        let mut next = t - resid / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
        t = next;
        cur = eval(t, hint_owned.as_deref())?;
        hint_owned = Some(cur.support.clone());
    }
    if !((cur.tau - a).abs() <= LEVEL_TOL) {
        return Err(Error::numeric_with(
            format!("level {a}: root refinement failed over {y:?}"),
            history,
        ));
    }
    if sign < 0.0 {
        cur.r = cur.r.time_mirror();
        cur.v = cur.v.time_mirror();
    }
    Ok(LevelPoint {
        t: sign * t,
        sample: cur,
    })
}

/// Level set `S_a` sampled on a grid, with the per-node cosmological data.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSurface {
    pub surface: GraphSurface,
    pub samples: Vec<CosmoSample>,
}

impl LevelSurface {
    /// Per-node stratum label: the support set of the realizing direction.
    pub fn labels(&self) -> Vec<u64> {
        self.samples
            .iter()
            .map(|s| s.support.iter().fold(0u64, |acc, &i| acc | (1u64 << (i % 64))))
            .collect()
    }
}

pub fn sample_level(d: &RegularDomain, a: f64, grid: &Grid) -> Result<GraphSurface> {
    sample_level_detailed(d, a, grid).map(|l| l.surface)
}

/// Samples `S_a` node by node. Rows along the last axis are solved
/// sequentially with support hints; rows are independent, so the result does
/// not depend on the number of worker threads.
pub fn sample_level_detailed(d: &RegularDomain, a: f64, grid: &Grid) -> Result<LevelSurface> {
    if !d.is_future_complete() {
        return Err(Error::Unsupported(
            "level sampling works on the future-complete normal form; reflect the domain first".into(),
        ));
    }
    if grid.dim() != d.spatial_dim() {
        return Err(Error::Usage(format!(
            "grid dimension {} does not match domain spatial dimension {}",
            grid.dim(),
            d.spatial_dim()
        )));
    }
    if !(a > 0.0) {
        return Err(Error::Usage(format!("level value must be positive, got {a}")));
    }
    let row_len = grid.nodes_per_axis();
    let rows = grid.len() / row_len;
    let solved: Vec<Result<Vec<LevelPoint>>> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut out = Vec::with_capacity(row_len);
            let mut hint: Option<Vec<usize>> = None;
            for j in 0..row_len {
                let y = grid.coords_flat(row * row_len + j);
                let p = level_point(d, a, &y, hint.as_deref())?;
                hint = Some(p.sample.support.clone());
                out.push(p);
            }
            Ok(out)
        })
        .collect();
    let mut heights = Vec::with_capacity(grid.len());
    let mut samples = Vec::with_capacity(grid.len());
    for row in solved {
        for p in row? {
            heights.push(p.t);
            samples.push(p.sample);
        }
    }
    let surface = GraphSurface::new(grid.clone(), heights, format!("S_{a}"), d.fingerprint())?;
    Ok(LevelSurface { surface, samples })
}

/// Time-reflected description of a domain (past-complete ↔ future-complete).
pub fn reflect_time(d: &RegularDomain) -> RegularDomain {
    d.reflect_time()
}
