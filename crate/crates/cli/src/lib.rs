//! Command-line front end: scenario files in, JSON reports and CSV artifacts out.

pub mod commands;
pub mod report;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use cmctime_core::Error;

pub use commands::{Artifact, Outcome, Overrides};
use scenario::Scenario;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CMCTIME_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    #[default]
    Human,
    Json,
    Quiet,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub mode: OutputMode,
    pub overrides: Overrides,
}

/// Everything one invocation produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Execution {
    pub exit_code: i32,
    pub report: serde_json::Value,
    pub artifacts: Vec<Artifact>,
    pub lines: Vec<String>,
}

impl Execution {
    pub fn report_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(&self.report).expect("serializable report");
        s.push('\n');
        s.into_bytes()
    }
}

pub fn evaluate(command: &str, scenario: &Scenario, ov: &Overrides) -> Execution {
    let steps: Vec<&str> = if command == "verify-all" {
        commands::suite(scenario)
    } else {
        vec![command]
    };
    let mut results = Vec::new();
    let mut artifacts = Vec::new();
    let mut lines = Vec::new();
    for step in steps {
        let o = commands::run(step, scenario, ov);
        results.push(o.result);
        artifacts.extend(o.artifacts);
        lines.extend(o.lines);
    }
    let (report, exit_code) = report::assemble(command, scenario, &results);
    Execution {
        exit_code,
        report,
        artifacts,
        lines,
    }
}

fn out_dir(opts: &RunOptions, scenario: &Scenario) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| scenario.output_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cmctime-out"))
}

fn write_all(dir: &Path, command: &str, exec: &Execution) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{command}.json")), exec.report_bytes())?;
    for a in &exec.artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
    }
    Ok(())
}

/// Runs one command end to end and returns the process exit code.
pub fn execute(
    scenario_path: &Path,
    command: &str,
    opts: &RunOptions,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if command != "verify-all" && !commands::COMMANDS.contains(&command) {
        let _ = writeln!(err, "error: {}", Error::Usage(format!("unknown command '{command}'")));
        return 2;
    }
    let scenario = match Scenario::load(scenario_path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let exec = evaluate(command, &scenario, &opts.overrides);
    let dir = out_dir(opts, &scenario);
    if let Err(e) = write_all(&dir, command, &exec) {
        let _ = writeln!(err, "error: cannot write to {}: {e}", dir.display());
        return 2;
    }
    for t in exec.report["tasks"].as_array().into_iter().flatten() {
        if let Some(msg) = t["summary"]["error"].as_str() {
            let _ = writeln!(err, "error: {}: {msg}", t["task"].as_str().unwrap_or("?"));
        }
    }
    match opts.mode {
        OutputMode::Json => {
            let _ = out.write_all(&exec.report_bytes());
        }
        OutputMode::Human => {
            for l in &exec.lines {
                let _ = writeln!(out, "{l}");
            }
        }
        OutputMode::Quiet => {}
    }
    exec.exit_code
}
