//! Normal (Gauss) flow of spacelike graphs in flat space and the Riccati
//! evolution of principal curvatures along it.
//!
//! In Minkowski space the flow is `F_t(x) = x + t·ν(x)`; principal curvatures
//! (with the sign convention of [`crate::curvature`]) obey `λ' = λ² − k`,
//! which integrates in closed form.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{mean_curvature_of_graph, CurvatureSample};
use crate::error::{Error, Result};
use crate::grid::{fmt17, GraphSurface, Grid};
use crate::minkowski::dot;

fn evolve_eigenvalue(l0: f64, t: f64, k: f64) -> Option<f64> {
    if k == 0.0 {
        let den = 1.0 - t * l0;
        return (den > 0.0).then(|| l0 / den);
    }
    let s = k.abs().sqrt();
    if k > 0.0 {
        let th = (s * t).tanh();
        let den = 1.0 - (l0 / s) * th;
        (den > 0.0).then(|| (l0 - s * th) / den)
    } else {
        let phase = s * t + (l0 / s).atan();
        (phase.abs() < std::f64::consts::FRAC_PI_2).then(|| s * phase.tan())
    }
}

/// Evolves principal curvatures by the Gauss flow for time `t` in a space of
/// constant curvature `k`; returns `(H(t), eigenvalues(t))`.
pub fn riccati_mean_curvature(eigs0: &[f64], t: f64, k: f64) -> Result<(f64, Vec<f64>)> {
    if eigs0.is_empty() {
        return Err(Error::Usage("no eigenvalues".into()));
    }
    let mut eigs = Vec::with_capacity(eigs0.len());
    for &l0 in eigs0 {
        match evolve_eigenvalue(l0, t, k) {
            Some(l) if l.is_finite() => eigs.push(l),
            _ => {
                return Err(Error::Focal {
                    t,
                    detail: format!("principal curvature {l0} blows up before t"),
                })
            }
        }
    }
    let h = eigs.iter().sum::<f64>() / eigs.len() as f64;
    Ok((h, eigs))
}

/// `dH/dt = mean(λ²) − k` for the current spectrum.
pub fn riccati_rate(eigs: &[f64], k: f64) -> f64 {
    eigs.iter().map(|l| l * l).sum::<f64>() / eigs.len() as f64 - k
}

/// Largest forward flow time before a principal curvature blows up (flat case).
pub fn focal_bound(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&l| l > 0.0)
        .map(|l| 1.0 / l)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub surface: GraphSurface,
    /// Nodes whose value was extrapolated from the pushed point cloud.
    pub extrapolated: Vec<bool>,
}

fn total_degree_exponents(m: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|e: Vec<usize>| {
                let used: usize = e.iter().sum();
                (0..=degree - used).map(move |p| {
                    let mut e = e.clone();
                    e.push(p);
                    e
                })
            })
            .collect();
    }
    out
}

/// Displaced spatial positions and heights of `x + t·ν(x)` at every node.
fn push(s: &GraphSurface, t: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let g = &s.grid;
    let mut pos = Vec::with_capacity(g.len());
    let mut heights = Vec::with_capacity(g.len());
    for f in 0..g.len() {
        let p = s.gradient(f);
        let p2 = dot(&p, &p);
        if !(p2 < 1.0) {
            return Err(Error::NotSpacelike(format!(
                "surface '{}' has slope {} at node {f}",
                s.label,
                p2.sqrt()
            )));
        }
        let w = (1.0 - p2).sqrt();
        let y = g.coords_flat(f);
        pos.push(y.iter().zip(&p).map(|(a, b)| a + t * b / w).collect());
        heights.push(s.heights[f] + t / w);
    }
    Ok((pos, heights))
}

/// `∂Y/∂ξ` of the pushed positions at a node, second order.
fn jacobian(g: &Grid, pos: &[Vec<f64>], f: usize) -> DMatrix<f64> {
    let idx = g.multi_index(f);
    let n = g.nodes_per_axis();
    let m = g.dim();
    let h = g.delta();
    let mut j = DMatrix::zeros(m, m);
    for k in 0..m {
        let s = g.stride(k);
        for c in 0..m {
            let v = |o: isize| pos[(f as isize + o * s as isize) as usize][c];
            j[(c, k)] = if idx[k] > 0 && idx[k] + 1 < n {
                (v(1) - v(-1)) / (2.0 * h)
            } else if idx[k] == 0 {
                (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
            } else {
                (3.0 * v(0) - 4.0 * v(-1) + v(-2)) / (2.0 * h)
            };
        }
    }
    j
}

/// Pushes the surface along its unit normals for time `t` and resamples the
/// result onto the original grid.
pub fn gauss_flow(s: &GraphSurface, t: f64) -> Result<GraphSurface> {
    gauss_flow_detailed(s, t).map(|r| r.surface)
}

pub fn gauss_flow_detailed(s: &GraphSurface, t: f64) -> Result<FlowResult> {
    let g = &s.grid;
    let m = g.dim();
    if g.nodes_per_axis() < 5 {
        return Err(Error::Usage("gauss flow needs at least 5 nodes per axis".into()));
    }
    let (pos, vals) = push(s, t)?;
    let jacs: Vec<DMatrix<f64>> = (0..g.len()).map(|f| jacobian(g, &pos, f)).collect();
    // The Jacobian moves linearly from I; it degenerates on the way iff it
    // has a real eigenvalue ≤ 0 at the end.
    for (f, jf) in jacs.iter().enumerate() {
        let eig = jf.complex_eigenvalues();
        if let Some(e) = eig
            .iter()
            .find(|e| e.im.abs() <= 1e-12 * (1.0 + e.re.abs()) && e.re <= 0.0)
        {
            return Err(Error::Focal {
                t,
                detail: format!("normal map Jacobian eigenvalue {} at {:?}", e.re, g.coords_flat(f)),
            });
        }
    }
    let exps = total_degree_exponents(m, 3);
    let n = g.nodes_per_axis();
    let h = g.delta();
    let origin: Vec<f64> = (0..m).map(|k| g.axis_coord(k, 0)).collect();
    let resampled: Vec<(f64, bool)> = (0..g.len())
        .into_par_iter()
        .map(|target| {
            let y0 = g.coords_flat(target);
            // Newton on the discrete map, snapping to the nearest source node
            let mut j = target;
            let mut xi = y0.clone();
            for _ in 0..30 {
                let r = DVector::from_iterator(m, y0.iter().zip(&pos[j]).map(|(a, b)| a - b));
                let step = jacs[j].clone().lu().solve(&r).unwrap_or_else(|| DVector::zeros(m));
                let base = g.coords_flat(j);
                xi = (0..m).map(|k| base[k] + step[k]).collect();
                let idx: Vec<usize> = (0..m)
                    .map(|k| (((xi[k] - origin[k]) / h).round().max(0.0) as usize).min(n - 1))
                    .collect();
                let next = g.index(&idx);
                if next == j {
                    break;
                }
                j = next;
            }
            let outside = (0..m).any(|k| {
                let u = (xi[k] - origin[k]) / h;
                u < -0.5 || u > (n - 1) as f64 + 0.5
            });
            let idx = g.multi_index(j);
            let lo: Vec<usize> = idx.iter().map(|&i| i.saturating_sub(2).min(n - 5)).collect();
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for c in 0..5usize.pow(m as u32) {
                let mut rem = c;
                let mut node = vec![0usize; m];
                for k in (0..m).rev() {
                    node[k] = lo[k] + rem % 5;
                    rem /= 5;
                }
                let f = g.index(&node);
                let d: Vec<f64> = (0..m).map(|k| (pos[f][k] - y0[k]) / h).collect();
                rows.push(
                    exps.iter()
                        .map(|e| e.iter().zip(&d).map(|(&p, x)| x.powi(p as i32)).product::<f64>())
                        .collect::<Vec<f64>>(),
                );
                rhs.push(vals[f]);
            }
            let a = DMatrix::from_fn(rows.len(), exps.len(), |i, k| rows[i][k]);
            let b = DVector::from_vec(rhs);
            let coef = a.svd(true, true).solve(&b, 1e-14).expect("svd with vectors");
            (coef[0], outside)
        })
        .collect();
    let heights = resampled.iter().map(|r| r.0).collect();
    let extrapolated = resampled.iter().map(|r| r.1).collect();
    let label = format!("{}+flow({t})", s.label);
    let surface = GraphSurface::new(g.clone(), heights, label, s.domain_hash)?;
    surface.check_spacelike()?;
    Ok(FlowResult { surface, extrapolated })
}

/// One row of a flow trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub node: usize,
    #[serde(rename = "H")]
    pub h: f64,
    pub eigenvalues: Vec<f64>,
}

/// Tracked nodes of a Gauss flow: the initial spectrum from the estimator,
/// evolved in closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub tracked: Vec<TraceRow>,
}

pub fn track_flow(s: &GraphSurface, nodes: &[usize], times: &[f64]) -> Result<Vec<FlowState>> {
    let initial: Vec<CurvatureSample> = nodes
        .iter()
        .map(|&f| mean_curvature_of_graph(s, f))
        .collect::<Result<_>>()?;
    times
        .iter()
        .map(|&t| {
            let tracked = nodes
                .iter()
                .zip(&initial)
                .map(|(&node, c)| {
                    let (h, eigenvalues) = riccati_mean_curvature(&c.eigenvalues, t, 0.0)?;
                    Ok(TraceRow {
                        t,
                        node,
                        h,
                        eigenvalues,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(FlowState { t, tracked })
        })
        .collect()
}

/// CSV with header `t,node_id,H,lambda_1,…`.
pub fn write_trace_csv<W: Write>(states: &[FlowState], mut out: W) -> io::Result<()> {
    let m = states
        .first()
        .and_then(|s| s.tracked.first())
        .map_or(0, |r| r.eigenvalues.len());
    let mut header = vec!["t".to_string(), "node_id".into(), "H".into()];
    header.extend((1..=m).map(|i| format!("lambda_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for s in states {
        for r in &s.tracked {
            let mut row = vec![fmt17(r.t), r.node.to_string(), fmt17(r.h)];
            row.extend(r.eigenvalues.iter().map(|&e| fmt17(e)));
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencyReport {
    pub node: usize,
    pub h_lower: f64,
    pub h_upper: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Maximum-principle check: a surface touching another from the past at a
/// node has mean curvature at least that of the other one there.
pub fn tangency_compare(lower: &GraphSurface, upper: &GraphSurface, node: usize) -> Result<TangencyReport> {
    if lower.grid != upper.grid {
        return Err(Error::Usage("surfaces live on different grids".into()));
    }
    if let Some(f) = (0..lower.grid.len()).find(|&f| lower.heights[f] > upper.heights[f] + 1e-12) {
        return Err(Error::Usage(format!(
            "lower surface is above the upper one at {:?}",
            lower.grid.coords_flat(f)
        )));
    }
    let gap = upper.heights[node] - lower.heights[node];
    if gap > 1e-9 {
        return Err(Error::Usage(format!(
            "surfaces are not tangent at node {node} (gap {gap})"
        )));
    }
    let h_lower = mean_curvature_of_graph(lower, node)?.h;
    let h_upper = mean_curvature_of_graph(upper, node)?.h;
    let tolerance = 10.0 * lower.grid.delta().powi(2);
    Ok(TangencyReport {
        node,
        h_lower,
        h_upper,
        tolerance,
        pass: h_lower >= h_upper - tolerance,
    })
}
