use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cmctime::{execute, OutputMode, Overrides, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Validate,
    Tau,
    Level,
    Singularity,
    CurvatureVerify,
    GaussFlow,
    CmcSolve,
    CmcTime,
    VerifyAll,
}

/// Cosmological time and CMC foliations of regular domains in Minkowski space.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Output directory (default: scenario output_dir, then $CMCTIME_OUT_DIR, then ./cmctime-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the summary lines.
    #[arg(long, conflicts_with = "quiet")]
    json: bool,
    #[arg(long)]
    quiet: bool,
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Level of the cosmological time.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Mean curvature target (negative).
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Flow time for gauss-flow.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    delta: Option<f64>,
    /// Box half-width.
    #[arg(long = "box")]
    box_half_width: Option<f64>,
    /// Query point `t,y1,...` for tau; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    points: Vec<String>,
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coordinate '{c}': {e}"))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: usage: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("thread pool configured once");
    }
    let points = match cli.points.iter().map(|p| parse_point(p)).collect::<Result<Vec<_>, _>>() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: usage: {e}");
            return ExitCode::from(2);
        }
    };
    let command = cli.command.to_possible_value().expect("no skipped variants");
    let opts = RunOptions {
        out: cli.out,
        mode: if cli.json {
            OutputMode::Json
        } else if cli.quiet {
            OutputMode::Quiet
        } else {
            OutputMode::Human
        },
        overrides: Overrides {
            a: cli.a,
            c: cli.c,
            t: cli.t,
            delta: cli.delta,
            box_half_width: cli.box_half_width,
            points,
        },
    };
    let code = execute(
        &cli.scenario,
        command.get_name(),
        &opts,
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code as u8)
}
