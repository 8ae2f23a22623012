//! Finite regular domains: intersections of the futures of null hyperplanes.
//!
//! A null hyperplane `H(u, a) = {⟨x, u⟩ = a}` with `u = (1, û)`, `‖û‖ = 1`,
//! bounds the half-space `{t > û·y − a}`. For a finite set Λ of at least two
//! such planes the domain is `{t > h(y)}` with the convex, 1-Lipschitz
//! horizon `h(y) = max_i (û_i·y − a_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{self, HullProjection};
use crate::minkowski::{dot, MinkVector};

/// Tolerance on `‖û‖` for a plane to count as normalized.
pub const UNIT_TOL: f64 = 1e-12;
/// Two planes closer than this (componentwise) are the same element of Λ.
pub const DUPLICATE_TOL: f64 = 1e-12;
/// Relative tolerance for active-set ties: `1e-9·(1 + |h(y)|)`.
pub const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullPlane {
    pub u_hat: Vec<f64>,
    pub a: f64,
}

impl NullPlane {
    /// Normalizes `u` to unit length.
    pub fn normalized(u: Vec<f64>, a: f64) -> Result<Self> {
        let norm = dot(&u, &u).sqrt();
        if !norm.is_finite() || norm == 0.0 || !a.is_finite() {
            return Err(Error::Usage(format!(
                "plane direction must be finite and nonzero (|u| = {norm}, a = {a})"
            )));
        }
        Ok(NullPlane {
            u_hat: u.iter().map(|c| c / norm).collect(),
            a,
        })
    }

    /// The future null conormal `(1, û)`.
    pub fn conormal(&self) -> MinkVector {
        MinkVector::new(1.0, self.u_hat.clone())
    }

    /// Height `û·y − a` of the plane over the spatial point `y`.
    #[inline]
    pub fn height(&self, y: &[f64]) -> f64 {
        dot(&self.u_hat, y) - self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeOrientation {
    FutureComplete,
    /// Time-reflected description; queries are mirrored through `t ↦ −t`.
    PastComplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularDomain {
    planes: Vec<NullPlane>,
    dimension: usize,
    orientation: TimeOrientation,
}

/// Validates a plane set: consistent dimension `n ≥ 3`, unit directions,
/// duplicates collapsed, at least two distinct planes.
pub fn validate(planes: &[NullPlane]) -> Result<RegularDomain> {
    let first = planes
        .first()
        .ok_or_else(|| Error::NotRegular("Λ must contain at least two elements".into()))?;
    let m = first.u_hat.len();
    if m < 2 {
        return Err(Error::Usage(format!("dimension must be at least 3, got {}", m + 1)));
    }
    let mut kept: Vec<NullPlane> = Vec::with_capacity(planes.len());
    for (i, p) in planes.iter().enumerate() {
        if p.u_hat.len() != m {
            return Err(Error::Usage(format!(
                "plane {i} has {} spatial components, expected {m}",
                p.u_hat.len()
            )));
        }
        if !p.a.is_finite() || p.u_hat.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage(format!("plane {i} has non-finite data")));
        }
        let norm = dot(&p.u_hat, &p.u_hat).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Usage(format!("plane {i} direction is not unit (|u| = {norm})")));
        }
        let dup = kept.iter().any(|q| {
            (q.a - p.a).abs() <= DUPLICATE_TOL
                && q.u_hat
                    .iter()
                    .zip(&p.u_hat)
                    .all(|(a, b)| (a - b).abs() <= DUPLICATE_TOL)
        });
        if !dup {
            kept.push(p.clone());
        }
    }
    if kept.len() < 2 {
        return Err(Error::NotRegular("Λ must contain at least two elements".into()));
    }
    Ok(RegularDomain {
        planes: kept,
        dimension: m + 1,
        orientation: TimeOrientation::FutureComplete,
    })
}

/// Subdifferential of the horizon at a spatial point: the active planes and
/// the hull `Conv{û_i}` of their directions. The normal cone of the horizon
/// at `(h(y), y)` is `{s·(1, g) : s > 0, g ∈ hull}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subdifferential {
    pub base_point: Vec<f64>,
    pub height: f64,
    pub active: Vec<usize>,
    pub hull_vertices: Vec<Vec<f64>>,
}

impl Subdifferential {
    /// Nearest point of the hull to `g`.
    pub fn project(&self, g: &[f64]) -> HullProjection {
        let refs: Vec<&[f64]> = self.hull_vertices.iter().map(|v| v.as_slice()).collect();
        hull::project_onto_hull(&refs, g)
    }

    pub fn contains(&self, g: &[f64], tol: f64) -> bool {
        self.project(g).distance <= tol
    }
}

impl RegularDomain {
    pub fn planes(&self) -> &[NullPlane] {
        &self.planes
    }

    /// Spacetime dimension `n`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of spatial coordinates, `n − 1`.
    pub fn spatial_dim(&self) -> usize {
        self.dimension - 1
    }

    pub fn orientation(&self) -> TimeOrientation {
        self.orientation
    }

    pub fn is_future_complete(&self) -> bool {
        self.orientation == TimeOrientation::FutureComplete
    }

    /// Same plane data with the opposite time orientation.
    pub fn reflect_time(&self) -> RegularDomain {
        let orientation = match self.orientation {
            TimeOrientation::FutureComplete => TimeOrientation::PastComplete,
            TimeOrientation::PastComplete => TimeOrientation::FutureComplete,
        };
        RegularDomain {
            planes: self.planes.clone(),
            dimension: self.dimension,
            orientation,
        }
    }

    /// Maps a point into the future-complete normal form.
    pub fn to_normal_form(&self, x: &MinkVector) -> MinkVector {
        match self.orientation {
            TimeOrientation::FutureComplete => x.clone(),
            TimeOrientation::PastComplete => x.time_mirror(),
        }
    }

    pub(crate) fn check_point(&self, x: &MinkVector) -> Result<()> {
        if x.dimension() != self.dimension {
            return Err(Error::Usage(format!(
                "point has dimension {}, domain has {}",
                x.dimension(),
                self.dimension
            )));
        }
        if !x.is_finite() {
            return Err(Error::Usage("non-finite point".into()));
        }
        Ok(())
    }

    pub(crate) fn check_spatial(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.spatial_dim() {
            return Err(Error::Usage(format!(
                "spatial point has {} components, expected {}",
                y.len(),
                self.spatial_dim()
            )));
        }
        Ok(())
    }

    /// Horizon height `h(y) = max_i (û_i·y − a_i)` of the future-complete
    /// normal form.
    pub fn horizon_height(&self, y: &[f64]) -> f64 {
        self.planes
            .iter()
            .map(|p| p.height(y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Strict membership in the open domain.
    pub fn contains(&self, x: &MinkVector) -> bool {
        if self.check_point(x).is_err() {
            return false;
        }
        let x = self.to_normal_form(x);
        x.t > self.horizon_height(&x.y)
    }

    pub fn default_active_tol(height: f64) -> f64 {
        ACTIVE_TOL * (1.0 + height.abs())
    }

    /// Planes attaining the horizon maximum at `y` within `tol`.
    pub fn active_set(&self, y: &[f64], tol: f64) -> (f64, Vec<usize>) {
        let h = self.horizon_height(y);
        let active = self
            .planes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.height(y) >= h - tol)
            .map(|(i, _)| i)
            .collect();
        (h, active)
    }

    pub fn subdifferential(&self, y: &[f64], tol: f64) -> Result<Subdifferential> {
        self.check_spatial(y)?;
        if !(tol > 0.0) {
            return Err(Error::Usage(format!("tolerance must be positive, got {tol}")));
        }
        let (h, active) = self.active_set(y, tol);
        let hull_vertices = active.iter().map(|&i| self.planes[i].u_hat.clone()).collect();
        Ok(Subdifferential {
            base_point: y.to_vec(),
            height: h,
            active,
            hull_vertices,
        })
    }

    /// Stable 64-bit fingerprint of the normalized plane data (FNV-1a).
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut feed = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x100000001b3);
            }
        };
        feed(self.dimension as f64);
        for p in &self.planes {
            for &c in &p.u_hat {
                feed(c);
            }
            feed(p.a);
        }
        hash
    }
}

/// Planes with directions at the given angles (radians) in ℝ^{1,2}.
pub fn planar_planes(angles_and_offsets: &[(f64, f64)]) -> Vec<NullPlane> {
    angles_and_offsets
        .iter()
        .map(|&(th, a)| NullPlane {
            u_hat: vec![th.cos(), th.sin()],
            a,
        })
        .collect()
}

/// The wedge `{t > |y₁|}` in ℝ^{1,n-1}.
pub fn wedge(dimension: usize) -> RegularDomain {
    let mut e = vec![0.0; dimension - 1];
    e[0] = 1.0;
    let mut f = e.clone();
    f[0] = -1.0;
    validate(&[NullPlane { u_hat: e, a: 0.0 }, NullPlane { u_hat: f, a: 0.0 }]).expect("wedge is regular")
}

/// Three planes with directions at 0°, 120°, 240° and the given offsets.
pub fn tripod(offsets: [f64; 3]) -> RegularDomain {
    let tau = 2.0 * std::f64::consts::PI;
    let planes: Vec<NullPlane> = (0..3)
        .map(|k| {
            let th = tau * k as f64 / 3.0;
            NullPlane {
                u_hat: vec![th.cos(), th.sin()],
                a: offsets[k],
            }
        })
        .collect();
    validate(&planes).expect("tripod is regular")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(u: &[f64], a: f64) -> NullPlane {
        NullPlane { u_hat: u.to_vec(), a }
    }

    #[test]
    fn validate_examples() {
        let d = validate(&[plane(&[1., 0.], 0.), plane(&[-1., 0.], 0.)]).unwrap();
        assert_eq!(d.planes().len(), 2);
        assert_eq!(d.dimension(), 3);

        let err = validate(&[plane(&[1., 0.], 0.)]).unwrap_err();
        assert!(matches!(err, Error::NotRegular(_)));
        assert!(err.to_string().contains("at least two elements"));

        let err = validate(&[plane(&[1., 0.], 0.), plane(&[1., 0.], 0.)]).unwrap_err();
        assert!(matches!(err, Error::NotRegular(_)));
    }

    #[test]
    fn validate_rejects_bad_input() {
        let err = validate(&[plane(&[2., 0.], 0.), plane(&[-1., 0.], 0.)]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        let err = validate(&[plane(&[1., 0.], 0.), plane(&[-1., 0., 0.], 0.)]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        let err = validate(&[plane(&[1.], 0.), plane(&[-1.], 0.)]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn parallel_planes_with_distinct_offsets_are_distinct() {
        let d = validate(&[plane(&[1., 0.], 0.), plane(&[1., 0.], 1.)]).unwrap();
        assert_eq!(d.planes().len(), 2);
    }

    #[test]
    fn normalization_on_construction() {
        let p = NullPlane::normalized(vec![3.0, 4.0], 1.0).unwrap();
        assert!((p.u_hat[0] - 0.6).abs() < 1e-15 && (p.u_hat[1] - 0.8).abs() < 1e-15);
        assert!(NullPlane::normalized(vec![0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn horizon_examples() {
        let w = wedge(3);
        assert_eq!(w.horizon_height(&[0.5, 7.0]), 0.5);
        assert_eq!(w.horizon_height(&[-2.0, 0.0]), 2.0);
        let t = tripod([0.0; 3]);
        // oracle: evaluate the three affine functions directly
        let direct = (0..3)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                th.cos() * 1.0 + th.sin() * 0.0
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(t.horizon_height(&[1.0, 0.0]), direct);
        assert!((direct - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contains_examples() {
        let w = wedge(3);
        assert!(w.contains(&MinkVector::new(1.0, vec![0.5, 7.0])));
        assert!(!w.contains(&MinkVector::new(0.4, vec![0.5, 0.0])));
        assert!(!w.contains(&MinkVector::new(0.5, vec![0.5, 0.0])));
        assert!(!w.contains(&MinkVector::new(1.0, vec![0.5, 0.0, 1.0])));
    }

    #[test]
    fn subdifferential_examples() {
        let w = wedge(3);
        let s = w.subdifferential(&[0.0, 3.0], 1e-9).unwrap();
        assert_eq!(s.active, vec![0, 1]);
        // oracle: one-sided slopes of |y₁| at the kink are ±1
        let step = 1e-6;
        let right = (w.horizon_height(&[step, 3.0]) - w.horizon_height(&[0.0, 3.0])) / step;
        let left = (w.horizon_height(&[0.0, 3.0]) - w.horizon_height(&[-step, 3.0])) / step;
        assert!((right - 1.0).abs() < 1e-9 && (left + 1.0).abs() < 1e-9);
        assert!(s.contains(&[right, 0.0], 1e-9) && s.contains(&[left, 0.0], 1e-9));
        assert!(s.contains(&[0.3, 0.0], 1e-12));
        assert!(!s.contains(&[0.0, 0.3], 1e-3));

        let s = w.subdifferential(&[2.0, 0.0], 1e-9).unwrap();
        assert_eq!(s.active, vec![0]);
        assert_eq!(s.hull_vertices, vec![vec![1.0, 0.0]]);

        let t = tripod([0.0; 3]);
        let s = t.subdifferential(&[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(s.active, vec![0, 1, 2]);
        let p = s.project(&[0.0, 0.0]);
        assert!(p.distance < 1e-14);
        assert!(p.weights.iter().all(|&w| w > 0.3));
    }

    #[test]
    fn subdifferential_rejects_nonpositive_tolerance() {
        assert!(wedge(3).subdifferential(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn reflect_twice_is_identity() {
        let t = tripod([1.0, 0.0, -0.5]);
        let r = t.reflect_time();
        assert_eq!(r.planes(), t.planes());
        assert_eq!(r.orientation(), TimeOrientation::PastComplete);
        assert_eq!(r.reflect_time(), t);
        let x = MinkVector::new(-2.0, vec![1.0, 5.0]);
        assert_eq!(r.contains(&x), t.contains(&x.time_mirror()));
    }

    fn random_domain() -> impl Strategy<Value = RegularDomain> {
        prop::collection::vec((0.0f64..std::f64::consts::TAU, -1.0f64..1.0), 2..7)
            .prop_filter_map("regular", |v| validate(&planar_planes(&v)).ok())
    }

    proptest! {
        #[test]
        fn horizon_is_convex(d in random_domain(),
                             a in prop::array::uniform2(-5.0f64..5.0),
                             b in prop::array::uniform2(-5.0f64..5.0),
                             lam in 0.0f64..1.0) {
            let mid = [lam * a[0] + (1.0 - lam) * b[0], lam * a[1] + (1.0 - lam) * b[1]];
            let lhs = d.horizon_height(&mid);
            let rhs = lam * d.horizon_height(&a) + (1.0 - lam) * d.horizon_height(&b);
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn horizon_is_one_lipschitz(d in random_domain(),
                                   a in prop::array::uniform2(-5.0f64..5.0),
                                   b in prop::array::uniform2(-5.0f64..5.0)) {
            let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            prop_assert!((d.horizon_height(&a) - d.horizon_height(&b)).abs() <= dist + 1e-12);
        }

        #[test]
        fn support_conormals_are_causal(d in random_domain(),
                                        y in prop::array::uniform2(-3.0f64..3.0),
                                        w in prop::collection::vec(0.0f64..1.0, 6)) {
            let s = d.subdifferential(&y, RegularDomain::default_active_tol(d.horizon_height(&y))).unwrap();
            let total: f64 = w.iter().take(s.active.len()).sum::<f64>().max(1e-12);
            let mut g = [0.0; 2];
            for (k, v) in s.hull_vertices.iter().enumerate() {
                let lam = w[k] / total;
                g[0] += lam * v[0];
                g[1] += lam * v[1];
            }
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            prop_assert!(norm <= 1.0 + 1e-9);
            // null exactly at the vertices
            for v in &s.hull_vertices {
                prop_assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() < 1e-12);
            }
        }
    }
}
