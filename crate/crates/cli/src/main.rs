//! `qwmsr-sim`: run, sample, and check consensus scenarios.
//!
//! Exit codes: 0 success, 1 usage or unreadable/malformed input, 2 invalid
//! scenario or graph, 3 contract violation during simulation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use qwmsr_cli::output;
use qwmsr_cli::scn::{self, ScnError};

#[derive(Parser)]
#[command(name = "qwmsr-sim", version, about = "Resilient quantized consensus simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one run; optionally write the trajectory as CSV
    Run {
        scenario: PathBuf,
        /// Trajectory CSV destination
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a batch of seeds and summarize the outcomes
    Montecarlo {
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// JSON summary destination (the table always prints)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check (r, s)-robustness of a graph file
    #[command(group(ArgGroup::new("mode").required(true).args(["r", "max"])))]
    Robustness {
        graph: PathBuf,
        /// Robustness parameter r, with --s
        #[arg(short, long, requires = "s")]
        r: Option<usize>,
        /// Robustness parameter s, with --r
        #[arg(short, long, requires = "r")]
        s: Option<usize>,
        /// Report the largest r such that the graph is (r, 1)-robust
        #[arg(long, conflicts_with = "s")]
        max: bool,
    },
    /// Parse and validate a scenario file without running it
    Validate { scenario: PathBuf },
}

/// A failure bound for the shell: message plus exit code.
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: 1 }
    }

    fn validation(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: 2 }
    }

    fn contract(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: 3 }
    }
}

impl From<ScnError> for Failure {
    fn from(e: ScnError) -> Self {
        match e {
            ScnError::Parse(msg) => Self::usage(msg),
            ScnError::Invalid(err) => Self::validation(err.to_string()),
        }
    }
}

/// Errors surfacing mid-simulation: anything the engine promises never to
/// emit for a validated scenario is a contract violation.
fn sim_failure(e: qwmsr::Error) -> Failure {
    match e {
        qwmsr::Error::Contract(_)
        | qwmsr::Error::TimeWindow { .. }
        | qwmsr::Error::DelayBound { .. }
        | qwmsr::Error::ScriptExhausted(_) => Failure::contract(e.to_string()),
        other => Failure::validation(other.to_string()),
    }
}

fn write_out(path: &Path, contents: &str, what: &str) -> Result<(), Failure> {
    output::write_atomic(path, contents)
        .map_err(|e| Failure::usage(format!("{what} {}: {e}", path.display())))
}

fn cmd_run(scenario: &PathBuf, out: Option<&PathBuf>) -> Result<(), Failure> {
    let s = scn::parse_scenario(scenario)?;
    let (trajectory, result) = qwmsr::run(&s).map_err(sim_failure)?;
    if let Some(path) = out {
        let csv = qwmsr::engine::trajectory_csv(&trajectory, &s.placement.malicious);
        write_out(path, &csv, "writing trajectory")?;
        println!("trajectory: {}", path.display());
    }
    print!("{}", output::run_report(&result, &trajectory, &s.normals()));
    Ok(())
}

fn cmd_montecarlo(scenario: &PathBuf, runs: usize, out: Option<&PathBuf>) -> Result<(), Failure> {
    let s = scn::parse_scenario(scenario)?;
    let summary = qwmsr::monte_carlo(&s, runs).map_err(sim_failure)?;
    print!("{}", output::summary_table(&summary));
    if let Some(path) = out {
        write_out(path, &output::summary_json(&summary), "writing summary")?;
        println!("summary: {}", path.display());
    }
    Ok(())
}

fn cmd_robustness(
    graph: &PathBuf,
    r: Option<usize>,
    s: Option<usize>,
    max: bool,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(graph)
        .map_err(|e| Failure::usage(format!("{}: {e}", graph.display())))?;
    let g = qwmsr::DirectedGraph::parse(&text).map_err(|e| match e {
        qwmsr::Error::Parse(_) => Failure::usage(e.to_string()),
        other => Failure::validation(other.to_string()),
    })?;
    if max {
        let r = g.max_r_robustness().map_err(|e| Failure::validation(e.to_string()))?;
        println!("maximal r: {r} (graph is ({r}, 1)-robust)");
        return Ok(());
    }
    let (r, s) = (r.expect("clap enforces the pair"), s.expect("clap enforces the pair"));
    let report = g.is_r_s_robust(r, s).map_err(|e| Failure::validation(e.to_string()))?;
    if report.holds {
        println!("({r}, {s})-robust: holds");
    } else {
        println!("({r}, {s})-robust: does not hold");
        if let Some((v1, v2)) = &report.witness {
            println!("witness: V1 = {v1:?}, V2 = {v2:?}");
        }
    }
    Ok(())
}

fn cmd_validate(scenario: &PathBuf) -> Result<(), Failure> {
    let s = scn::parse_scenario(scenario)?;
    println!(
        "ok: n={}, normals={}, malicious={:?}, horizon={}, seed={}",
        s.graph.n(),
        s.normals().len(),
        s.placement.malicious,
        s.effective_horizon(),
        s.seed,
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Run { scenario, out } => cmd_run(scenario, out.as_ref()),
        Cmd::Montecarlo { scenario, runs, out } => cmd_montecarlo(scenario, *runs, out.as_ref()),
        Cmd::Robustness { graph, r, s, max } => cmd_robustness(graph, *r, *s, *max),
        Cmd::Validate { scenario } => cmd_validate(scenario),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
