//! Small convex-hull utilities: nearest point of a polytope given by a few
//! vertices, and barycentric coordinates on affinely independent subsets.
//!
//! Vertex counts here are tiny (active plane sets), so the nearest point is
//! found exactly by enumerating affinely independent vertex subsets.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct HullProjection {
    /// Euclidean distance from the target to the hull.
    pub distance: f64,
    /// Convex weights, one per input vertex, of the nearest point.
    pub weights: Vec<f64>,
}

/// Barycentric coordinates of the orthogonal projection of `target` onto the
/// affine hull of `points` together with the distance to that affine hull.
/// `None` when the points are affinely dependent.
pub fn affine_coordinates(points: &[&[f64]], target: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = points.len();
    if k == 0 {
        return None;
    }
    let base = points[0];
    if k == 1 {
        let dist = base
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        return Some((vec![1.0], dist));
    }
    let dim = base.len();
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let rhs_vec: Vec<f64> = target.iter().zip(base).map(|(a, b)| a - b).collect();
    let gram = DMatrix::from_fn(k - 1, k - 1, |i, j| crate::minkowski::dot(&diffs[i], &diffs[j]));
    let rhs = DVector::from_fn(k - 1, |i, _| crate::minkowski::dot(&diffs[i], &rhs_vec));
    let scale = gram.diagonal().iter().cloned().fold(0.0, f64::max);
    let lu = gram.clone().lu();
    // reject near-degenerate simplices
    let det = lu.determinant();
    if !(det.abs() > 1e-12 * scale.powi((k - 1) as i32)) {
        return None;
    }
    let sol = lu.solve(&rhs)?;
    let mut weights = Vec::with_capacity(k);
    weights.push(1.0 - sol.iter().sum::<f64>());
    weights.extend(sol.iter());
    let mut proj = base.to_vec();
    for (i, d) in diffs.iter().enumerate() {
        for c in 0..dim {
            proj[c] += sol[i] * d[c];
        }
    }
    let dist = proj
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Some((weights, dist))
}

/// Nearest point of `Conv(points)` to `target`.
pub fn project_onto_hull(points: &[&[f64]], target: &[f64]) -> HullProjection {
    assert!(!points.is_empty(), "hull of an empty set");
    let k = points.len();
    let dim = target.len();
    let mut best = HullProjection {
        distance: f64::INFINITY,
        weights: vec![0.0; k],
    };
    let max_size = (dim + 1).min(k);
    for mask in 1u64..(1u64 << k) {
        let size = mask.count_ones() as usize;
        if size > max_size {
            continue;
        }
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let pts: Vec<&[f64]> = idx.iter().map(|&i| points[i]).collect();
        if let Some((w, dist)) = affine_coordinates(&pts, target) {
            if w.iter().all(|&x| x >= -1e-14) && dist < best.distance {
                let mut weights = vec![0.0; k];
                for (j, &i) in idx.iter().enumerate() {
                    weights[i] = w[j].max(0.0);
                }
                best = HullProjection {
                    distance: dist,
                    weights,
                };
            }
        }
    }
    best
}

/// Iterates over all `size`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size == 0 || size > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.clone());
        let mut i = size;
        while i > 0 && idx[i - 1] == n - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
