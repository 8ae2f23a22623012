//! The commands. Each one reads its parameters from the scenario's task block
//! of the same name, with command-line overrides taking precedence.

use cmctime_core::cmc::{cmc_time, solve_cmc, verify_sandwich, BoundaryData, CmcOptions, CmcSummary, CmcTimeConfig};
use cmctime_core::cosmotime::{cosmological_time, level_height, sample_level_detailed, GAP_TOL};
use cmctime_core::curvature::verify_theorem1;
use cmctime_core::evolution::{gauss_flow_detailed, track_flow, write_trace_csv};
use cmctime_core::grid::{fmt17, GraphSurface, Grid};
use cmctime_core::minkowski::{inner, MinkVector};
use cmctime_core::singularity::EdgeShape;
use cmctime_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{to_value, TaskResult};
use crate::scenario::{Scenario, Task};

pub const COMMANDS: [&str; 9] = [
    "validate",
    "tau",
    "level",
    "singularity",
    "curvature-verify",
    "gauss-flow",
    "cmc-solve",
    "cmc-time",
    "verify-all",
];

/// Window of the box (fraction of the half-width) used for assertions.
const WINDOW: f64 = 0.6;

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub t: Option<f64>,
    pub delta: Option<f64>,
    pub box_half_width: Option<f64>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: TaskResult,
    pub artifacts: Vec<Artifact>,
    /// Human-readable lines for the terminal.
    pub lines: Vec<String>,
}

struct Done {
    pass: bool,
    summary: Value,
    artifacts: Vec<Artifact>,
    lines: Vec<String>,
}

impl Done {
    fn new(pass: bool, summary: Value) -> Self {
        Done {
            pass,
            summary,
            artifacts: Vec::new(),
            lines: Vec::new(),
        }
    }
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    task: Task,
    ov: &'a Overrides,
}

impl Ctx<'_> {
    fn a(&self) -> f64 {
        self.ov.a.or(self.task.a).unwrap_or(1.0)
    }

    fn c(&self) -> f64 {
        self.ov.c.or(self.task.c).unwrap_or(-1.0 / self.a())
    }

    fn grid(&self) -> Result<Grid> {
        self.scenario.make_grid(self.ov.delta, self.ov.box_half_width)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.scenario.seed);
        rng.set_stream(stream);
        rng
    }

    /// Uniform spatial point in the assertion window of the grid.
    fn random_spatial(&self, grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let r = WINDOW * grid.half_width();
        grid.center().iter().map(|c| c + rng.gen_range(-r..=r)).collect()
    }
}

pub fn run(command: &str, scenario: &Scenario, ov: &Overrides) -> Outcome {
    let ctx = Ctx {
        scenario,
        task: scenario.task(command),
        ov,
    };
    let done = match command {
        "validate" => validate(&ctx),
        "tau" => tau(&ctx),
        "level" => level(&ctx),
        "singularity" => singularity(&ctx),
        "curvature-verify" => curvature_verify(&ctx),
        "gauss-flow" => gauss_flow(&ctx),
        "cmc-solve" => cmc_solve(&ctx),
        "cmc-time" => cmc_time_task(&ctx),
        other => Err(Error::Usage(format!("unknown command '{other}'"))),
    };
    match done {
        Ok(d) => {
            let mut lines = d.lines;
            lines.push(format!("{command}: {}", if d.pass { "PASS" } else { "FAIL" }));
            Outcome {
                result: TaskResult {
                    name: command.to_string(),
                    exit_code: if d.pass { 0 } else { 4 },
                    summary: d.summary,
                },
                artifacts: d.artifacts,
                lines,
            }
        }
        Err(e) => {
            let mut summary = json!({ "error": e.to_string() });
            if let Error::Numeric { diagnostics, .. } = &e {
                summary["diagnostics"] = json!(diagnostics);
            }
            Outcome {
                result: TaskResult {
                    name: command.to_string(),
                    exit_code: e.exit_code(),
                    summary,
                },
                artifacts: Vec::new(),
                lines: vec![format!("{command}: ERROR (exit {})", e.exit_code())],
            }
        }
    }
}

/// Steps of `verify-all`, in order.
pub fn suite(scenario: &Scenario) -> Vec<&'static str> {
    let mut steps = vec!["validate", "tau"];
    if scenario.dimension == 3 {
        steps.push("singularity");
    }
    steps.extend(["curvature-verify", "gauss-flow", "cmc-solve", "cmc-time"]);
    steps
}

fn csv_artifact(name: &str, s: &GraphSurface) -> Artifact {
    let mut bytes = Vec::new();
    s.write_csv(&mut bytes).expect("in-memory write");
    Artifact {
        name: name.to_string(),
        bytes,
    }
}

fn validate(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let grid = ctx.grid()?;
    let mut done = Done::new(
        true,
        json!({
            "planes": d.planes().len(),
            "dimension": d.dimension(),
            "grid_nodes": grid.len(),
            "fingerprint": format!("{:016x}", d.fingerprint()),
        }),
    );
    for p in d.planes() {
        let u: Vec<String> = p.u_hat.iter().map(|&x| fmt17(x)).collect();
        done.lines.push(format!("plane u=({}) a={}", u.join(","), fmt17(p.a)));
    }
    Ok(done)
}

/// Shortest round-trip decimal, with `−0` and round-off dust shown as `0`.
fn display_num(x: f64, scale: f64) -> String {
    if x.abs() <= 1e-13 * scale {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn tau(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let mut points: Vec<MinkVector> = Vec::new();
    let given = if !ctx.ov.points.is_empty() {
        ctx.ov.points.clone()
    } else {
        ctx.task.points.clone().unwrap_or_default()
    };
    for p in &given {
        points.push(MinkVector::from_coords(p)?);
    }
    if points.is_empty() {
        let grid = ctx.grid()?;
        let mut rng = ctx.rng(1);
        for _ in 0..20 {
            let y = ctx.random_spatial(&grid, &mut rng);
            let t = d.horizon_height(&y) + rng.gen_range(0.05..3.0);
            points.push(MinkVector::new(t, y));
        }
    }
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    let mut pass = true;
    for x in &points {
        let s = cosmological_time(d, x)?;
        let scale = 1.0 + x.coords().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let recon = s.r.add(&s.v.scale(s.tau)).sub(x).euclid_norm_sq().sqrt();
        let unit = (inner(&s.v, &s.v)? + 1.0).abs();
        let on_horizon = (s.r.t - d.horizon_height(&s.r.y)).abs();
        let ok = s.objective_gap <= GAP_TOL && recon <= 1e-9 * scale && unit <= 1e-9 && on_horizon <= 1e-9 * scale;
        pass &= ok;
        let r: Vec<String> = s.r.coords().iter().map(|&c| display_num(c, scale)).collect();
        lines.push(format!("tau={} r=({})", display_num(s.tau, scale), r.join(",")));
        entries.push(json!({
            "point": x.coords(),
            "tau": s.tau,
            "r": s.r.coords(),
            "v": s.v.coords(),
            "active": s.active,
            "support": s.support,
            "objective_gap": s.objective_gap,
            "checks_pass": ok,
        }));
    }
    let mut done = Done::new(pass, json!({ "points": entries }));
    done.lines = lines;
    Ok(done)
}

fn level(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let a = ctx.a();
    let grid = ctx.grid()?;
    let lvl = sample_level_detailed(d, a, &grid)?;
    let s = &lvl.surface;
    let mut labels = lvl.labels();
    labels.sort_unstable();
    labels.dedup();
    let slope = s.max_interior_slope();
    let above = s.check_above_horizon(d).is_ok();
    let hmin = s.heights.iter().cloned().fold(f64::INFINITY, f64::min);
    let hmax = s.heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut done = Done::new(
        slope < 1.0 && above,
        json!({
            "a": a,
            "nodes": grid.len(),
            "height_min": hmin,
            "height_max": hmax,
            "max_slope": slope,
            "strata": labels.len(),
            "csv": "level.csv",
        }),
    );
    done.artifacts.push(csv_artifact("level.csv", s));
    Ok(done)
}

fn singularity(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let complex = d.initial_singularity()?;
    let grid = ctx.grid()?;
    let mut rng = ctx.rng(2);
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..2000 {
        let y = ctx.random_spatial(&grid, &mut rng);
        let (h, active) = d.active_set(&y, 1e-9 * (1.0 + d.horizon_height(&y).abs()));
        let _ = h;
        let near = complex.distance([y[0], y[1]]) <= 1e-6;
        checked += 1;
        if (active.len() >= 2) != near {
            mismatches += 1;
        }
    }
    for e in &complex.edges {
        for s in [0.0, 0.37, 1.3] {
            let p = e.point_at(s);
            let y = [p[0], p[1]];
            let (_, active) = d.active_set(&y, 1e-9 * (1.0 + d.horizon_height(&y).abs()));
            checked += 1;
            if active.len() < 2 {
                mismatches += 1;
            }
        }
    }
    let mut csv = String::from("kind,planes,y1,y2,height,p1,p2\n");
    for v in &complex.vertices {
        let planes: Vec<String> = v.planes.iter().map(|i| i.to_string()).collect();
        csv.push_str(&format!(
            "vertex,{},{},{},{},,\n",
            planes.join(";"),
            fmt17(v.point[0]),
            fmt17(v.point[1]),
            fmt17(v.height)
        ));
    }
    for e in &complex.edges {
        let (kind, anchor, other) = match e.shape {
            EdgeShape::Segment { start, end } => ("segment", start, end),
            EdgeShape::Ray { start, direction } => ("ray", start, direction),
            EdgeShape::Line { point, direction } => ("line", point, direction),
        };
        csv.push_str(&format!(
            "{kind},{};{},{},{},{},{},{}\n",
            e.planes.0,
            e.planes.1,
            fmt17(anchor[0]),
            fmt17(anchor[1]),
            fmt17(d.horizon_height(&anchor)),
            fmt17(other[0]),
            fmt17(other[1])
        ));
    }
    let mut done = Done::new(
        mismatches == 0,
        json!({
            "complex": to_value(&complex),
            "census_points": checked,
            "census_mismatches": mismatches,
            "csv": "singularity.csv",
        }),
    );
    done.artifacts.push(Artifact {
        name: "singularity.csv".into(),
        bytes: csv.into_bytes(),
    });
    Ok(done)
}

fn curvature_verify(ctx: &Ctx) -> Result<Done> {
    let a = ctx.a();
    let grid = ctx.grid()?;
    let r = verify_theorem1(&ctx.scenario.domain, a, &grid)?;
    Ok(Done::new(r.fraction_in_bounds >= 0.99, to_value(&r)))
}

fn gauss_flow(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let a = ctx.a();
    let t = ctx.ov.t.or(ctx.task.t).unwrap_or(0.5 * a);
    let grid = ctx.grid()?;
    let s0 = sample_level_detailed(d, a, &grid)?.surface;
    let flowed = gauss_flow_detailed(&s0, t)?;
    let target = sample_level_detailed(d, a + t, &grid)?.surface;
    let mut max_error = 0.0f64;
    for f in 0..grid.len() {
        if grid.in_window(&grid.multi_index(f), WINDOW) {
            max_error = max_error.max((flowed.surface.heights[f] - target.heights[f]).abs());
        }
    }
    // resampling error scales like δ⁴; 10⁻⁶ is the contract at δ = 0.01
    let tolerance = 1e-6 * (grid.delta() / 0.01).powi(4).max(1.0);
    let center = grid.len() / 2;
    let times: Vec<f64> = (0..=4).map(|k| t * k as f64 / 4.0).collect();
    let trace = track_flow(&s0, &[center], &times)?;
    let mut trace_csv = Vec::new();
    write_trace_csv(&trace, &mut trace_csv).expect("in-memory write");
    let mut done = Done::new(
        max_error <= tolerance,
        json!({
            "a": a,
            "t": t,
            "max_error": max_error,
            "tolerance": tolerance,
            "extrapolated_nodes": flowed.extrapolated.iter().filter(|e| **e).count(),
            "trace": to_value(&trace),
            "csv": ["gauss_flow.csv", "flow_trace.csv"],
        }),
    );
    done.artifacts.push(csv_artifact("gauss_flow.csv", &flowed.surface));
    done.artifacts.push(Artifact {
        name: "flow_trace.csv".into(),
        bytes: trace_csv,
    });
    Ok(done)
}

fn cmc_solve(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let c = ctx.c();
    if !(c < 0.0) {
        return Err(Error::Usage(format!("cmc-solve needs c < 0, got {c}")));
    }
    let m = d.spatial_dim() as f64;
    let bc = ctx.task.bc_level.unwrap_or(-1.0 / (m * c));
    let grid = ctx.grid()?;
    let sol = solve_cmc(d, c, &grid, &BoundaryData::FromLevel(bc), &CmcOptions::default())?;
    let sandwich = verify_sandwich(d, &sol)?;
    let summary = CmcSummary::new(&sol, &sandwich);
    let mut value = to_value(&summary);
    value["bc_level"] = json!(bc);
    value["sandwich"] = to_value(&sandwich);
    value["csv"] = json!("cmc.csv");
    let mut done = Done::new(sandwich.pass && sol.residual <= 1e-6, value);
    done.artifacts.push(csv_artifact("cmc.csv", &sol.surface));
    Ok(done)
}

fn cmc_time_task(ctx: &Ctx) -> Result<Done> {
    let d = &ctx.scenario.domain;
    let grid = ctx.grid()?;
    let m = d.spatial_dim() as f64;
    let c_values = ctx
        .task
        .c_values
        .clone()
        .unwrap_or_else(|| (0..16).map(|k| -1.0 / (0.5 * 1.1f64.powi(k))).collect());
    let mut queries = Vec::new();
    for q in ctx.task.queries.clone().unwrap_or_default() {
        queries.push(MinkVector::from_coords(&q)?);
    }
    if queries.is_empty() {
        // levels whose CMC time is bracketed: a ∈ [τ, (n−1)τ] within the grid
        let a_min = c_values.iter().map(|c| -1.0 / c).fold(f64::INFINITY, f64::min);
        let a_max = c_values.iter().map(|c| -1.0 / c).fold(0.0, f64::max);
        let (lo, hi) = (a_min * 1.05, a_max / m / 1.05);
        if !(lo < hi) {
            return Err(Error::Usage("target range too narrow for random queries".into()));
        }
        let mut rng = ctx.rng(3);
        for _ in 0..ctx.task.random_queries.unwrap_or(10) {
            let y = ctx.random_spatial(&grid, &mut rng);
            let tau = rng.gen_range(lo..hi);
            queries.push(MinkVector::new(level_height(d, tau, &y)?, y));
        }
    }
    let cfg = CmcTimeConfig::new(c_values, queries);
    let r = cmc_time(d, &cfg, &grid)?;
    Ok(Done::new(r.pass, to_value(&r)))
}
