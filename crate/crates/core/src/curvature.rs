//! Discrete mean curvature of graph surfaces and the smooth one-sided
//! supports of cosmological level sets.
//!
//! Sign convention: for a spacelike graph `t = w(y)` over `m = n − 1` spatial
//! axes,
//!
//! ```text
//!   H[w] = −(1/m) · div( ∇w / √(1 − |∇w|²) ),
//! ```
//!
//! so future hyperboloids of radius `a` have `H = −1/a`. The principal
//! curvatures are `−eig(g⁻¹ D²w) / W` with `g⁻¹ = I + p pᵀ / W²`,
//! `W = √(1 − |p|²)` and `p = ∇w`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::cosmotime::{cosmological_time, sample_level_detailed, LevelSurface};
use crate::domain::RegularDomain;
use crate::error::{Error, Result};
use crate::grid::{GraphSurface, Grid};
use crate::hull::{affine_coordinates, subsets};
use crate::minkowski::{dot, inner_unchecked, MinkVector};

/// Smallest barycentric weight accepted for the relative interior.
pub const RELINT_TOL: f64 = 1e-9;
const AFFINE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSample {
    #[serde(rename = "H")]
    pub h: f64,
    /// Principal curvatures, ascending.
    pub eigenvalues: Vec<f64>,
    pub grad_norm: f64,
}

/// Curvature data from the first and second derivatives at a point.
pub fn shape_from_derivatives(grad: &[f64], hess: &DMatrix<f64>) -> Result<CurvatureSample> {
    let m = grad.len();
    let p2 = dot(grad, grad);
    let grad_norm = p2.sqrt();
    if !(grad_norm < 1.0) {
        return Err(Error::NotSpacelike(format!("gradient norm {grad_norm} ≥ 1")));
    }
    let w2 = 1.0 - p2;
    let w = w2.sqrt();
    let p = DVector::from_column_slice(grad);
    let ginv = DMatrix::identity(m, m) + &p * p.transpose() / w2;
    let l = ginv
        .cholesky()
        .ok_or_else(|| Error::numeric("inverse metric is not positive definite"))?
        .unpack();
    let sym = l.transpose() * hess * &l;
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = sym.symmetric_eigenvalues().iter().map(|e| -e / w).collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    let h = eigenvalues.iter().sum::<f64>() / m as f64;
    Ok(CurvatureSample {
        h,
        eigenvalues,
        grad_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StencilKind {
    Central,
    Forward,
    Backward,
}

impl StencilKind {
    const ALL: [StencilKind; 3] = [StencilKind::Central, StencilKind::Forward, StencilKind::Backward];

    fn first(self) -> &'static [(isize, f64)] {
        match self {
            StencilKind::Central => &[(-1, -0.5), (1, 0.5)],
            StencilKind::Forward => &[(0, -1.5), (1, 2.0), (2, -0.5)],
            StencilKind::Backward => &[(0, 1.5), (-1, -2.0), (-2, 0.5)],
        }
    }

    fn second(self) -> &'static [(isize, f64)] {
        match self {
            StencilKind::Central => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
            StencilKind::Forward => &[(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)],
            StencilKind::Backward => &[(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)],
        }
    }
}

fn shifted(grid: &Grid, idx: &[usize], moves: &[(usize, isize)]) -> Option<usize> {
    let n = grid.nodes_per_axis() as isize;
    let mut flat = grid.index(idx) as isize;
    for &(k, o) in moves {
        let i = idx[k] as isize + o;
        if i < 0 || i >= n {
            return None;
        }
        flat += o * grid.stride(k) as isize;
    }
    Some(flat as usize)
}

/// Every node touched by the stencil combination, or `None` if it leaves the grid.
fn footprint(grid: &Grid, idx: &[usize], kinds: &[StencilKind]) -> Option<Vec<usize>> {
    let m = grid.dim();
    let mut nodes = Vec::new();
    for k in 0..m {
        for &(o, _) in kinds[k].first().iter().chain(kinds[k].second()) {
            nodes.push(shifted(grid, idx, &[(k, o)])?);
        }
        for j in k + 1..m {
            for &(oi, _) in kinds[k].first() {
                for &(oj, _) in kinds[j].first() {
                    nodes.push(shifted(grid, idx, &[(k, oi), (j, oj)])?);
                }
            }
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    Some(nodes)
}

fn derivatives(s: &GraphSurface, idx: &[usize], kinds: &[StencilKind]) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let g = &s.grid;
    let m = g.dim();
    let h = g.delta();
    let w = &s.heights;
    let mut grad = vec![0.0; m];
    let mut hess = DMatrix::zeros(m, m);
    for k in 0..m {
        for &(o, c) in kinds[k].first() {
            grad[k] += c * w[shifted(g, idx, &[(k, o)])?];
        }
        grad[k] /= h;
        let mut d2 = 0.0;
        for &(o, c) in kinds[k].second() {
            d2 += c * w[shifted(g, idx, &[(k, o)])?];
        }
        hess[(k, k)] = d2 / (h * h);
        for j in k + 1..m {
            let mut mixed = 0.0;
            for &(oi, ci) in kinds[k].first() {
                for &(oj, cj) in kinds[j].first() {
                    mixed += ci * cj * w[shifted(g, idx, &[(k, oi), (j, oj)])?];
                }
            }
            hess[(k, j)] = mixed / (h * h);
            hess[(j, k)] = hess[(k, j)];
        }
    }
    Some((grad, hess))
}

/// Central-difference curvature at an interior node.
pub fn mean_curvature_of_graph(s: &GraphSurface, flat: usize) -> Result<CurvatureSample> {
    let g = &s.grid;
    if flat >= g.len() {
        return Err(Error::Usage(format!("node {flat} outside the grid")));
    }
    let idx = g.multi_index(flat);
    if !g.is_interior(&idx, 1) {
        return Err(Error::Usage(format!("node {idx:?} is on the boundary")));
    }
    let kinds = vec![StencilKind::Central; g.dim()];
    let (grad, hess) = derivatives(s, &idx, &kinds).expect("interior stencil");
    shape_from_derivatives(&grad, &hess)
}

/// Stencil combinations ordered by the number of one-sided axes, then
/// lexicographically.
fn stencil_combinations(m: usize) -> Vec<Vec<StencilKind>> {
    let mut combos: Vec<Vec<StencilKind>> = (0..3usize.pow(m as u32))
        .map(|mut c| {
            let mut v = vec![StencilKind::Central; m];
            for slot in v.iter_mut().rev() {
                *slot = StencilKind::ALL[c % 3];
                c /= 3;
            }
            v
        })
        .collect();
    combos.sort_by_key(|v| v.iter().filter(|k| **k != StencilKind::Central).count());
    combos
}

/// Curvature at a node using the first stencil whose footprint lies in a
/// single stratum (same label as the node). `None` if no such stencil fits.
pub fn curvature_in_stratum(
    s: &GraphSurface,
    labels: &[u64],
    flat: usize,
) -> Option<Result<(CurvatureSample, Vec<StencilKind>)>> {
    let g = &s.grid;
    let idx = g.multi_index(flat);
    let own = labels[flat];
    for kinds in stencil_combinations(g.dim()) {
        let Some(nodes) = footprint(g, &idx, &kinds) else {
            continue;
        };
        if nodes.iter().any(|&f| labels[f] != own) {
            continue;
        }
        let (grad, hess) = derivatives(s, &idx, &kinds)?;
        return Some(shape_from_derivatives(&grad, &hess).map(|c| (c, kinds)));
    }
    None
}

/// Hyperboloid `{⟨z − p, z − p⟩ = −a²}` (future sheet) through `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperSupport {
    pub center: MinkVector,
    pub radius: f64,
}

impl UpperSupport {
    pub fn height(&self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().zip(&self.center.y).map(|(a, b)| (a - b).powi(2)).sum();
        self.center.t + (self.radius * self.radius + r2).sqrt()
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let r2: f64 = y.iter().zip(&self.center.y).map(|(a, b)| (a - b).powi(2)).sum();
        let root = (self.radius * self.radius + r2).sqrt();
        y.iter().zip(&self.center.y).map(|(a, b)| (a - b) / root).collect()
    }

    pub fn normal(&self, y: &[f64]) -> MinkVector {
        graph_normal(&self.gradient(y))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        vec![-1.0 / self.radius; self.center.y.len()]
    }

    pub fn mean_curvature(&self) -> f64 {
        -1.0 / self.radius
    }
}

/// Unit future normal `(1, p) / √(1 − |p|²)` of a graph with gradient `p`.
pub fn graph_normal(p: &[f64]) -> MinkVector {
    let w = (1.0 - dot(p, p)).sqrt();
    MinkVector::new(1.0 / w, p.iter().map(|c| c / w).collect())
}

pub fn upper_support(d: &RegularDomain, x: &MinkVector) -> Result<UpperSupport> {
    let s = cosmological_time(d, x)?;
    Ok(UpperSupport {
        center: s.r,
        radius: s.tau,
    })
}

/// `ℍ_F(a) ⊕ F^⊥` through `x`, with `F = span{(1, û_i) : i ∈ B}`.
///
/// A point `z` lies on the surface when `bᵀ K b = −a²` with
/// `b_i = ⟨z − p, u_i⟩` and `K` the inverse Gram matrix of the `u_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerSupport {
    pub center: MinkVector,
    pub radius: f64,
    /// Minimal plane subset `B`, ascending plane indices.
    pub planes: Vec<usize>,
    /// `d = dim F − 1`.
    pub rank: usize,
    /// Null generators `u_i = (1, û_i)`.
    pub generators: Vec<MinkVector>,
    gram_inv: DMatrix<f64>,
}

impl LowerSupport {
    fn coefficients(&self, y: &[f64]) -> (f64, f64, f64) {
        // Φ(T) = A T² − 2 B T + C' with C' = eᵀKe
        let eta: Vec<f64> = y.iter().zip(&self.center.y).map(|(a, b)| a - b).collect();
        let e = DVector::from_iterator(self.generators.len(), self.generators.iter().map(|u| dot(&u.y, &eta)));
        let one = DVector::from_element(self.generators.len(), 1.0);
        let a = one.dot(&(&self.gram_inv * &one));
        let b = one.dot(&(&self.gram_inv * &e));
        let c = e.dot(&(&self.gram_inv * &e));
        (a, b, c)
    }

    pub fn height(&self, y: &[f64]) -> f64 {
        let (a, b, c) = self.coefficients(y);
        let c = c + self.radius * self.radius;
        let disc = (b * b - a * c).max(0.0);
        let q = b + b.signum() * disc.sqrt();
        let roots = if q == 0.0 { [0.0, 0.0] } else { [q / a, c / q] };
        self.center.t + roots[0].max(roots[1])
    }

    /// `b_i = ⟨z − p, u_i⟩` at the surface point over `y`.
    fn inner_products(&self, y: &[f64]) -> DVector<f64> {
        let z = MinkVector::new(self.height(y), y.to_vec());
        let zeta = z.sub(&self.center);
        DVector::from_iterator(
            self.generators.len(),
            self.generators.iter().map(|u| inner_unchecked(&zeta, u)),
        )
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let kb = &self.gram_inv * self.inner_products(y);
        // Φ = bᵀKb, ∂b_i/∂T = −1, ∂b_i/∂η = û_i
        let d_t = -2.0 * kb.sum();
        let m = y.len();
        (0..m)
            .map(|c| {
                let d_eta: f64 = 2.0
                    * self
                        .generators
                        .iter()
                        .zip(kb.iter())
                        .map(|(u, k)| k * u.y[c])
                        .sum::<f64>();
                -d_eta / d_t
            })
            .collect()
    }

    pub fn normal(&self, y: &[f64]) -> MinkVector {
        graph_normal(&self.gradient(y))
    }

    /// Coefficients of `P_F(z − p)` on the generators; the surface is a level
    /// of the cosmological time of `E(Λ_B)` where all are nonnegative.
    pub fn chart_weights(&self, y: &[f64]) -> Vec<f64> {
        (&self.gram_inv * self.inner_products(y)).iter().copied().collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.center.y.len();
        let mut e = vec![-1.0 / self.radius; self.rank];
        e.resize(m, 0.0);
        e
    }

    pub fn mean_curvature(&self) -> f64 {
        -(self.rank as f64) / (self.center.y.len() as f64 * self.radius)
    }
}

pub fn lower_support(d: &RegularDomain, x: &MinkVector) -> Result<LowerSupport> {
    let s = cosmological_time(d, x)?;
    let g_star = s.gradient_direction();
    let planes = d.planes();
    let k_max = s.active.len().min(d.dimension());
    let mut chosen = None;
    'search: for size in 2..=k_max {
        for sub in subsets(s.active.len(), size) {
            let idx: Vec<usize> = sub.iter().map(|&i| s.active[i]).collect();
            let pts: Vec<&[f64]> = idx.iter().map(|&i| planes[i].u_hat.as_slice()).collect();
            if let Some((w, dist)) = affine_coordinates(&pts, &g_star) {
                if dist <= AFFINE_TOL && w.iter().all(|&c| c >= RELINT_TOL) {
                    chosen = Some(idx);
                    break 'search;
                }
            }
        }
    }
    let Some(b) = chosen else {
        return Err(Error::numeric_with(
            "no active subset has the realizing direction in its relative interior",
            vec![
                format!("x = {:?}", x.coords()),
                format!("active = {:?}", s.active),
                format!("support = {:?}, weights = {:?}", s.support, s.weights),
                format!("g* = {g_star:?}"),
            ],
        ));
    };
    let generators: Vec<MinkVector> = b.iter().map(|&i| planes[i].conormal()).collect();
    let k = generators.len();
    let gram = DMatrix::from_fn(k, k, |i, j| inner_unchecked(&generators[i], &generators[j]));
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::numeric(format!("degenerate generator Gram matrix for planes {b:?}")))?;
    Ok(LowerSupport {
        center: s.r,
        radius: s.tau,
        rank: k - 1,
        planes: b,
        generators,
        gram_inv,
    })
}

/// Euclidean distance between the unit normals of the two supports at `x`.
pub fn tangency_mismatch(upper: &UpperSupport, lower: &LowerSupport, x: &MinkVector) -> f64 {
    let a = upper.normal(&x.y);
    let b = lower.normal(&x.y);
    a.sub(&b).euclid_norm_sq().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub a: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub checked_nodes: usize,
    pub in_bounds_nodes: usize,
    pub excluded_nodes: usize,
    pub fraction_in_bounds: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
}

/// Per-node curvature of a sampled level; `None` for excluded nodes.
pub fn level_curvatures(level: &LevelSurface) -> Result<Vec<Option<CurvatureSample>>> {
    let s = &level.surface;
    let labels = level.labels();
    let g = &s.grid;
    (0..g.len())
        .into_par_iter()
        .map(|f| {
            if !g.is_interior(&g.multi_index(f), 1) {
                return Ok(None);
            }
            match curvature_in_stratum(s, &labels, f) {
                None => Ok(None),
                Some(r) => r.map(|(c, _)| Some(c)),
            }
        })
        .collect()
}

/// Samples `S_a` and checks `−1/a − ε ≤ H ≤ −1/((n−1)a) + ε` at interior
/// nodes, with `ε = 0.05/a`.
pub fn verify_theorem1(d: &RegularDomain, a: f64, grid: &Grid) -> Result<Theorem1Report> {
    if !(a > 0.0) {
        return Err(Error::Usage(format!("level value must be positive, got {a}")));
    }
    let level = sample_level_detailed(d, a, grid)?;
    let curv = level_curvatures(&level)?;
    let m = grid.dim() as f64;
    let epsilon = 0.05 / a;
    let lower_bound = -1.0 / a;
    let upper_bound = -1.0 / (m * a);
    let mut checked = 0;
    let mut inside = 0;
    let mut excluded = 0;
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    for (f, c) in curv.iter().enumerate() {
        if !grid.is_interior(&grid.multi_index(f), 1) {
            continue;
        }
        let Some(c) = c else {
            excluded += 1;
            continue;
        };
        checked += 1;
        h_min = h_min.min(c.h);
        h_max = h_max.max(c.h);
        if c.h >= lower_bound - epsilon && c.h <= upper_bound + epsilon {
            inside += 1;
        }
    }
    let fraction_in_bounds = if checked == 0 {
        0.0
    } else {
        inside as f64 / checked as f64
    };
    Ok(Theorem1Report {
        a,
        delta: grid.delta(),
        epsilon,
        lower_bound,
        upper_bound,
        checked_nodes: checked,
        in_bounds_nodes: inside,
        excluded_nodes: excluded,
        fraction_in_bounds,
        h_min,
        h_max,
    })
}
