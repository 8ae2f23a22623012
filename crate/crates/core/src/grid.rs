//! Uniform spatial grids and graph surfaces `t = w(y)` sampled on them.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::domain::RegularDomain;
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // fold −0 into 0
        return format!("{:.16e}", 0.0f64);
    }
    format!("{:.16e}", x)
}

/// The cube `center + [−half_width, half_width]^m` sampled with spacing
/// `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    center: Vec<f64>,
    half_width: f64,
    delta: f64,
    nodes_per_axis: usize,
}

impl Grid {
    pub fn new(center: Vec<f64>, half_width: f64, delta: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage("grid center must be finite and nonempty".into()));
        }
        if !(half_width > 0.0 && half_width.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Usage(format!(
                "grid needs half_width > 0 and delta > 0 (got {half_width}, {delta})"
            )));
        }
        let cells = 2.0 * half_width / delta;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-7 * cells.max(1.0) || rounded < 2.0 {
            return Err(Error::Usage(format!(
                "delta = {delta} must divide the box width {} into at least 2 cells",
                2.0 * half_width
            )));
        }
        Ok(Grid {
            center,
            half_width,
            delta,
            nodes_per_axis: rounded as usize + 1,
        })
    }

    pub fn centered(dim: usize, half_width: f64, delta: f64) -> Result<Self> {
        Grid::new(vec![0.0; dim], half_width, delta)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat-index stride of axis `k` (last axis fastest).
    pub fn stride(&self, k: usize) -> usize {
        self.nodes_per_axis.pow((self.dim() - 1 - k) as u32)
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.nodes_per_axis + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.nodes_per_axis;
            flat /= self.nodes_per_axis;
        }
        idx
    }

    pub fn axis_coord(&self, k: usize, i: usize) -> f64 {
        self.center[k] - self.half_width + i as f64 * self.delta
    }

    pub fn coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(k, &i)| self.axis_coord(k, i)).collect()
    }

    pub fn coords_flat(&self, flat: usize) -> Vec<f64> {
        self.coords(&self.multi_index(flat))
    }

    /// True if the node is at least `layers` nodes away from every face.
    pub fn is_interior(&self, idx: &[usize], layers: usize) -> bool {
        idx.iter().all(|&i| i >= layers && i + layers < self.nodes_per_axis)
    }

    /// True if the node lies in the centered sub-cube scaled by `fraction`.
    pub fn in_window(&self, idx: &[usize], fraction: f64) -> bool {
        let lim = fraction * self.half_width + 1e-9 * self.delta;
        idx.iter()
            .enumerate()
            .all(|(k, &i)| (self.axis_coord(k, i) - self.center[k]).abs() <= lim)
    }

    pub fn contains_point(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() <= self.half_width * (1.0 + 1e-12))
    }

    /// Same box, spacing halved.
    pub fn refined(&self) -> Grid {
        Grid {
            center: self.center.clone(),
            half_width: self.half_width,
            delta: self.delta / 2.0,
            nodes_per_axis: 2 * self.nodes_per_axis - 1,
        }
    }
}

/// Spacelike hypersurface given as a height field over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSurface {
    pub grid: Grid,
    pub heights: Vec<f64>,
    pub label: String,
    pub domain_hash: u64,
}

fn lagrange4(s: f64) -> [f64; 4] {
    // nodes at -1, 0, 1, 2
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

impl GraphSurface {
    pub fn new(grid: Grid, heights: Vec<f64>, label: impl Into<String>, domain_hash: u64) -> Result<Self> {
        if heights.len() != grid.len() {
            return Err(Error::Usage(format!(
                "{} heights for a grid of {} nodes",
                heights.len(),
                grid.len()
            )));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Usage("non-finite height".into()));
        }
        Ok(GraphSurface {
            grid,
            heights,
            label: label.into(),
            domain_hash,
        })
    }

    /// Samples an explicit height function on the grid.
    pub fn from_fn(grid: Grid, label: &str, f: impl Fn(&[f64]) -> f64) -> Self {
        let heights = (0..grid.len()).map(|i| f(&grid.coords_flat(i))).collect();
        GraphSurface {
            grid,
            heights,
            label: label.to_string(),
            domain_hash: 0,
        }
    }

    pub fn height_at(&self, idx: &[usize]) -> f64 {
        self.heights[self.grid.index(idx)]
    }

    /// Second-order gradient at a node: central differences inside,
    /// one-sided at the faces.
    pub fn gradient(&self, flat: usize) -> Vec<f64> {
        let idx = self.grid.multi_index(flat);
        let n = self.grid.nodes_per_axis();
        let h = self.grid.delta();
        (0..self.grid.dim())
            .map(|k| {
                let s = self.grid.stride(k);
                let i = idx[k];
                let w = &self.heights;
                if i > 0 && i + 1 < n {
                    (w[flat + s] - w[flat - s]) / (2.0 * h)
                } else if i == 0 {
                    (-3.0 * w[flat] + 4.0 * w[flat + s] - w[flat + 2 * s]) / (2.0 * h)
                } else {
                    (3.0 * w[flat] - 4.0 * w[flat - s] + w[flat - 2 * s]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Largest gradient norm over interior nodes (central differences).
    pub fn max_interior_slope(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&f| self.grid.is_interior(&self.grid.multi_index(f), 1))
            .map(|f| crate::minkowski::dot(&self.gradient(f), &self.gradient(f)).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn check_spacelike(&self) -> Result<()> {
        let slope = self.max_interior_slope();
        if slope >= 1.0 {
            return Err(Error::NotSpacelike(format!(
                "surface '{}' has interior slope {slope}",
                self.label
            )));
        }
        Ok(())
    }

    pub fn check_above_horizon(&self, d: &RegularDomain) -> Result<()> {
        for (f, &w) in self.heights.iter().enumerate() {
            let y = self.grid.coords_flat(f);
            let h = d.horizon_height(&y);
            if !(w > h) {
                return Err(Error::Assertion(format!(
                    "surface '{}' touches the horizon at {y:?} (w = {w}, h = {h})",
                    self.label
                )));
            }
        }
        Ok(())
    }

    /// Tensor-product cubic interpolation at a spatial point inside the box.
    pub fn interpolate(&self, y: &[f64]) -> Result<f64> {
        let g = &self.grid;
        if y.len() != g.dim() || !g.contains_point(y) {
            return Err(Error::Usage(format!("point {y:?} outside the grid box")));
        }
        let n = g.nodes_per_axis();
        let m = g.dim();
        let mut base = vec![0usize; m];
        let mut weights = vec![[0.0; 4]; m];
        for k in 0..m {
            let u = (y[k] - g.axis_coord(k, 0)) / g.delta();
            let cell = (u.floor() as isize).clamp(0, n as isize - 2);
            let b = (cell - 1).clamp(0, n as isize - 4) as usize;
            base[k] = b;
            weights[k] = lagrange4(u - (b as f64 + 1.0));
        }
        let mut total = 0.0;
        let corners = 4usize.pow(m as u32);
        let mut idx = vec![0usize; m];
        for c in 0..corners {
            let mut rem = c;
            let mut wprod = 1.0;
            for k in (0..m).rev() {
                let o = rem % 4;
                rem /= 4;
                idx[k] = base[k] + o;
                wprod *= weights[k][o];
            }
            total += wprod * self.heights[g.index(&idx)];
        }
        Ok(total)
    }

    /// CSV export with header `y1,…,y_m,value` and 17-digit floats.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let m = self.grid.dim();
        let header: Vec<String> = (1..=m).map(|k| format!("y{k}")).chain(["value".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for (f, &w) in self.heights.iter().enumerate() {
            let mut row: Vec<String> = self.grid.coords_flat(f).into_iter().map(fmt17).collect();
            row.push(fmt17(w));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_indexing_round_trips() {
        let g = Grid::new(vec![1.0, -2.0], 1.0, 0.25).unwrap();
        assert_eq!(g.nodes_per_axis(), 9);
        assert_eq!(g.len(), 81);
        let idx = g.multi_index(40);
        assert_eq!(idx, vec![4, 4]);
        assert_eq!(g.coords(&idx), vec![1.0, -2.0]);
        assert_eq!(g.index(&[2, 7]), 2 * 9 + 7);
        assert_eq!(g.stride(0), 9);
        assert!(g.in_window(&[4, 6], 0.5));
        assert!(!g.in_window(&[4, 7], 0.5));
    }

    #[test]
    fn grid_rejects_non_dividing_spacing() {
        assert!(Grid::centered(2, 1.0, 0.3).is_err());
        assert!(Grid::centered(2, 1.0, 0.0).is_err());
        assert!(Grid::centered(2, 1.0, 1.5).is_err());
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = Grid::centered(2, 1.0, 0.1).unwrap();
        let f = |y: &[f64]| 1.0 + y[0] - 2.0 * y[1] * y[1] + y[0].powi(3) * 0.5 + y[0] * y[1];
        let s = GraphSurface::from_fn(g, "cubic", f);
        for y in [[0.123, -0.456], [-0.99, 0.97], [1.0, 1.0], [-1.0, 0.05]] {
            assert!((s.interpolate(&y).unwrap() - f(&y)).abs() < 1e-12);
        }
        assert!(s.interpolate(&[1.5, 0.0]).is_err());
    }

    #[test]
    fn csv_has_fixed_header_and_precision() {
        let g = Grid::centered(2, 1.0, 1.0).unwrap();
        let s = GraphSurface::from_fn(g, "c", |_| 1.0 / 3.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("y1,y2,value"));
        assert_eq!(
            lines.next(),
            Some("-1.0000000000000000e0,-1.0000000000000000e0,3.3333333333333331e-1")
        );
        assert_eq!(text.lines().count(), 10);
    }

    #[test]
    fn spacelike_check() {
        let g = Grid::centered(2, 1.0, 0.1).unwrap();
        assert!(GraphSurface::from_fn(g.clone(), "p", |y| 0.5 * y[0])
            .check_spacelike()
            .is_ok());
        assert!(GraphSurface::from_fn(g, "q", |y| 1.2 * y[0]).check_spacelike().is_err());
    }
}
