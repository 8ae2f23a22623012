//! Minkowski space ℝ^{1,n-1} with signature (−,+,…,+).
//!
//! A [`MinkVector`] stores the time coordinate `t` and the spatial part `y`
//! separately. The Lorentz form is `⟨x,y⟩ = −x.t·y.t + x.y·y.y`, so that with
//! `u = (1, û)`, `‖û‖ = 1`, the half-space `⟨x,u⟩ < a` is `{t > û·y − a}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to snap nearly-null vectors onto the light cone.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkVector {
    pub t: f64,
    pub y: Vec<f64>,
}

impl MinkVector {
    pub fn new(t: f64, y: Vec<f64>) -> Self {
        MinkVector { t, y }
    }

    /// Builds a vector from `[t, y1, …, y_{n-1}]`.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::Usage(format!(
                "a Minkowski vector needs at least 3 coordinates, got {}",
                coords.len()
            )));
        }
        let v = MinkVector::new(coords[0], coords[1..].to_vec());
        if !v.is_finite() {
            return Err(Error::Usage("non-finite coordinate".into()));
        }
        Ok(v)
    }

    pub fn e0(dimension: usize) -> Self {
        MinkVector::new(1.0, vec![0.0; dimension - 1])
    }

    pub fn dimension(&self) -> usize {
        self.y.len() + 1
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.dimension());
        c.push(self.t);
        c.extend_from_slice(&self.y);
        c
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.y.iter().all(|c| c.is_finite())
    }

    pub fn euclid_norm_sq(&self) -> f64 {
        self.t * self.t + dot(&self.y, &self.y)
    }

    pub fn add(&self, other: &MinkVector) -> MinkVector {
        MinkVector::new(
            self.t + other.t,
            self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &MinkVector) -> MinkVector {
        MinkVector::new(
            self.t - other.t,
            self.y.iter().zip(&other.y).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn scale(&self, s: f64) -> MinkVector {
        MinkVector::new(self.t * s, self.y.iter().map(|c| c * s).collect())
    }

    /// Time reflection `t ↦ −t`.
    pub fn time_mirror(&self) -> MinkVector {
        MinkVector::new(-self.t, self.y.clone())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(x: &MinkVector, y: &MinkVector) -> Result<()> {
    if x.y.len() != y.y.len() {
        return Err(Error::Usage(format!(
            "dimension mismatch: {} vs {}",
            x.dimension(),
            y.dimension()
        )));
    }
    Ok(())
}

/// Lorentz inner product. Symmetric bit-for-bit: both argument orders
/// evaluate the same products in the same order.
pub fn inner(x: &MinkVector, y: &MinkVector) -> Result<f64> {
    check_dims(x, y)?;
    Ok(inner_unchecked(x, y))
}

pub(crate) fn inner_unchecked(x: &MinkVector, y: &MinkVector) -> f64 {
    -(x.t * y.t) + dot(&x.y, &y.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalKind {
    Timelike,
    Null,
    Spacelike,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Future,
    Past,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalClass {
    pub kind: CausalKind,
    pub orientation: Orientation,
}

/// Causal character of `v`. A vector whose square is within
/// `tol·(1 + ‖v‖²_euclid)` of zero is snapped to null.
pub fn classify(v: &MinkVector, tol: f64) -> CausalClass {
    let norm_sq = v.euclid_norm_sq();
    if norm_sq == 0.0 {
        return CausalClass {
            kind: CausalKind::Zero,
            orientation: Orientation::None,
        };
    }
    let q = inner_unchecked(v, v);
    let kind = if q.abs() <= tol * (1.0 + norm_sq) {
        CausalKind::Null
    } else if q < 0.0 {
        CausalKind::Timelike
    } else {
        CausalKind::Spacelike
    };
    let orientation = match kind {
        CausalKind::Timelike | CausalKind::Null => {
            if v.t > 0.0 {
                Orientation::Future
            } else {
                Orientation::Past
            }
        }
        _ => Orientation::None,
    };
    CausalClass { kind, orientation }
}
