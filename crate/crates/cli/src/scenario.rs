//! Scenario files: one JSON document describing a domain, a sampling grid and
//! the parameters of the tasks to run on it.

use std::path::Path;

use cmctime_core::domain::{validate, NullPlane, RegularDomain};
use cmctime_core::grid::Grid;
use cmctime_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneEntry {
    pub u: Vec<f64>,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub box_half_width: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

/// Parameters of one command block. Unused fields are ignored by commands
/// that do not need them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_queries: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    dimension: usize,
    planes: Vec<PlaneEntry>,
    grid: GridConfig,
    #[serde(default)]
    tasks: Vec<Task>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub dimension: usize,
    pub domain: RegularDomain,
    pub grid: GridConfig,
    pub tasks: Vec<Task>,
    pub seed: u64,
    pub output_dir: Option<String>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Usage(format!("malformed scenario: {e}")))?;
        if raw.dimension < 3 {
            return Err(Error::Usage(format!(
                "dimension must be at least 3, got {}",
                raw.dimension
            )));
        }
        let planes = raw
            .planes
            .into_iter()
            .map(|p| {
                if p.u.len() != raw.dimension - 1 {
                    return Err(Error::Usage(format!(
                        "plane direction has {} components, expected {}",
                        p.u.len(),
                        raw.dimension - 1
                    )));
                }
                NullPlane::normalized(p.u, p.a)
            })
            .collect::<Result<Vec<_>>>()?;
        let domain = validate(&planes)?;
        let g = &raw.grid;
        if !(g.box_half_width > 0.0) || !g.box_half_width.is_finite() {
            return Err(Error::Usage(format!(
                "box half-width must be positive, got {}",
                g.box_half_width
            )));
        }
        if !(g.delta > 0.0) {
            return Err(Error::Usage(format!("grid spacing must be positive, got {}", g.delta)));
        }
        if g.delta > g.box_half_width / 8.0 {
            return Err(Error::Usage(format!(
                "grid spacing {} exceeds box half-width / 8 = {}",
                g.delta,
                g.box_half_width / 8.0
            )));
        }
        if let Some(c) = &g.center {
            if c.len() != raw.dimension - 1 {
                return Err(Error::Usage("grid center has the wrong dimension".into()));
            }
        }
        let scenario = Scenario {
            dimension: raw.dimension,
            domain,
            grid: raw.grid,
            tasks: raw.tasks,
            seed: raw.seed,
            output_dir: raw.output_dir,
        };
        scenario.make_grid(None, None)?;
        Ok(scenario)
    }

    /// Sampling grid, optionally with a different spacing or box size.
    pub fn make_grid(&self, delta: Option<f64>, half_width: Option<f64>) -> Result<Grid> {
        let m = self.dimension - 1;
        let center = self.grid.center.clone().unwrap_or_else(|| vec![0.0; m]);
        Grid::new(
            center,
            half_width.unwrap_or(self.grid.box_half_width),
            delta.unwrap_or(self.grid.delta),
        )
    }

    /// The first task block for a command, or an empty one.
    pub fn task(&self, command: &str) -> Task {
        self.tasks
            .iter()
            .find(|t| t.command == command)
            .cloned()
            .unwrap_or_else(|| Task {
                command: command.to_string(),
                ..Task::default()
            })
    }
}
