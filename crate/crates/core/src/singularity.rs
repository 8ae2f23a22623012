//! The initial singularity of a planar (n = 3) domain: the locus where the
//! horizon has at least two support planes, i.e. the non-differentiability
//! set of `h`. Each pairwise tie line is clipped against the dominance
//! inequalities of the remaining planes.

use serde::Serialize;

use crate::domain::RegularDomain;
use crate::error::{Error, Result};

const CLIP_TOL: f64 = 1e-12;
const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EdgeShape {
    Segment { start: [f64; 2], end: [f64; 2] },
    Ray { start: [f64; 2], direction: [f64; 2] },
    Line { point: [f64; 2], direction: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularEdge {
    pub planes: (usize, usize),
    pub shape: EdgeShape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularVertex {
    pub point: [f64; 2],
    /// Horizon lift `h(point)`.
    pub height: f64,
    pub planes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityComplex {
    pub vertices: Vec<SingularVertex>,
    pub edges: Vec<SingularEdge>,
}

fn dist_to_segment(p: [f64; 2], a: [f64; 2], dir: [f64; 2], s_lo: f64, s_hi: f64) -> f64 {
    let rel = [p[0] - a[0], p[1] - a[1]];
    let s = (rel[0] * dir[0] + rel[1] * dir[1]).clamp(s_lo, s_hi);
    let q = [a[0] + s * dir[0], a[1] + s * dir[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl SingularEdge {
    /// Euclidean distance from a spatial point to the edge.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match self.shape {
            EdgeShape::Segment { start, end } => {
                let len = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
                let dir = [(end[0] - start[0]) / len, (end[1] - start[1]) / len];
                dist_to_segment(p, start, dir, 0.0, len)
            }
            EdgeShape::Ray { start, direction } => dist_to_segment(p, start, direction, 0.0, f64::INFINITY),
            EdgeShape::Line { point, direction } => {
                dist_to_segment(p, point, direction, f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    }

    /// A point of the edge at parameter `s ≥ 0` from its anchor (clamped to
    /// segment length).
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        match self.shape {
            EdgeShape::Segment { start, end } => {
                let len = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
                let f = (s / len).clamp(0.0, 1.0);
                [start[0] + f * (end[0] - start[0]), start[1] + f * (end[1] - start[1])]
            }
            EdgeShape::Ray { start, direction } => [start[0] + s * direction[0], start[1] + s * direction[1]],
            EdgeShape::Line { point, direction } => [point[0] + s * direction[0], point[1] + s * direction[1]],
        }
    }
}

impl SingularityComplex {
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let e = self.edges.iter().map(|e| e.distance(p)).fold(f64::INFINITY, f64::min);
        let v = self
            .vertices
            .iter()
            .map(|v| ((p[0] - v.point[0]).powi(2) + (p[1] - v.point[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        e.min(v)
    }
}

impl RegularDomain {
    /// Planar complex of pairwise tie loci restricted to where the tying pair
    /// attains the maximum. Only defined for `n = 3`.
    pub fn initial_singularity(&self) -> Result<SingularityComplex> {
        if self.dimension() != 3 {
            return Err(Error::Unsupported(format!(
                "initial singularity is computed for n = 3 only (n = {})",
                self.dimension()
            )));
        }
        let planes = self.planes();
        let n = planes.len();
        let mut edges = Vec::new();
        let mut vertex_points: Vec<[f64; 2]> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let ui = &planes[i].u_hat;
                let uj = &planes[j].u_hat;
                // tie line: (ui − uj)·y = ai − aj
                let nrm = [ui[0] - uj[0], ui[1] - uj[1]];
                let nn = nrm[0] * nrm[0] + nrm[1] * nrm[1];
                if nn < 1e-24 {
                    // parallel translates never tie
                    continue;
                }
                let rhs = planes[i].a - planes[j].a;
                let anchor = [nrm[0] * rhs / nn, nrm[1] * rhs / nn];
                let len = nn.sqrt();
                let mut dir = [-nrm[1] / len, nrm[0] / len];
                // canonical orientation for reproducible output
                if dir[0] < 0.0 || (dir[0] == 0.0 && dir[1] < 0.0) {
                    dir = [-dir[0], -dir[1]];
                }
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                let mut empty = false;
                for (k, pk) in planes.iter().enumerate() {
                    if k == i || k == j {
                        continue;
                    }
                    // h_i(anchor + s·dir) − h_k(anchor + s·dir) = alpha + beta·s ≥ 0
                    let alpha = planes[i].height(&anchor) - pk.height(&anchor);
                    let beta = (ui[0] - pk.u_hat[0]) * dir[0] + (ui[1] - pk.u_hat[1]) * dir[1];
                    if beta.abs() < 1e-15 {
                        if alpha < -CLIP_TOL {
                            empty = true;
                            break;
                        }
                    } else if beta > 0.0 {
                        lo = lo.max(-alpha / beta);
                    } else {
                        hi = hi.min(-alpha / beta);
                    }
                }
                if empty || hi - lo <= CLIP_TOL {
                    continue;
                }
                let at = |s: f64| [anchor[0] + s * dir[0], anchor[1] + s * dir[1]];
                let shape = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => EdgeShape::Segment {
                        start: at(lo),
                        end: at(hi),
                    },
                    (true, false) => EdgeShape::Ray {
                        start: at(lo),
                        direction: dir,
                    },
                    (false, true) => EdgeShape::Ray {
                        start: at(hi),
                        direction: [-dir[0], -dir[1]],
                    },
                    (false, false) => EdgeShape::Line {
                        point: anchor,
                        direction: dir,
                    },
                };
                if lo.is_finite() {
                    vertex_points.push(at(lo));
                }
                if hi.is_finite() {
                    vertex_points.push(at(hi));
                }
                edges.push(SingularEdge { planes: (i, j), shape });
            }
        }
        let mut vertices: Vec<SingularVertex> = Vec::new();
        for p in vertex_points {
            if vertices
                .iter()
                .any(|v| ((v.point[0] - p[0]).powi(2) + (v.point[1] - p[1]).powi(2)).sqrt() <= MERGE_TOL)
            {
                continue;
            }
            let (height, planes) = self.active_set(&p, 1e-9 * (1.0 + p[0].abs() + p[1].abs()));
            vertices.push(SingularVertex {
                point: p,
                height,
                planes,
            });
        }
        Ok(SingularityComplex { vertices, edges })
    }
}
