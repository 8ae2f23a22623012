//! Cosmological time, curvature barriers and constant mean curvature
//! hypersurfaces for flat regular domains defined by finitely many null
//! hyperplanes of Minkowski space.

pub mod cmc;
pub mod cosmotime;
pub mod curvature;
pub mod domain;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod hull;
pub mod minkowski;
pub mod singularity;

pub use error::{Error, Result};
