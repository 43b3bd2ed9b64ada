//! Command-line front end: run a scenario file, run a built-in demo, or
//! reduce expressions in the relation algebra.
//!
//! Exit codes: 0 when every asserted check passes, 1 when at least one
//! asserted check fails, 2 for structural problems (unreadable input, bad
//! shapes, parse errors). Informational results never affect the exit code.

mod scenario;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use qpg_core::magic::{genuineness_certificate, MagicUnitary, GENUINENESS_THRESHOLD};
use qpg_core::ncalg;
use qpg_core::spaces::{SpaceConfig, SpaceKind};
use qpg_core::{CheckReport, Error, Metric};

use crate::scenario::{RunReport, Scenario, TwoProjectionParams, UnitarySpec, ALL_CHECKS};

#[derive(Parser)]
#[command(
    name = "qpg",
    version,
    about = "Verify quantum permutation actions on glued finite spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks described by a scenario file.
    Verify {
        /// Path to a scenario JSON file.
        #[arg(short, long)]
        config: PathBuf,
        /// Also write the full run report to this path as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a built-in demonstration scenario and the full check battery.
    Demo {
        /// Which glued space to act on.
        #[arg(value_enum)]
        kind: DemoKind,
        /// Number of copies of the base space.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Number of base points (default: 5 for wedge, 6 for bouquet).
        #[arg(long)]
        m: Option<usize>,
        /// Angle parameter for the two-projection family.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta: f64,
        /// Also write the full run report to this path as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Reduce an expression in the relation algebra and print the result.
    Reduce {
        /// Expression over generators, e.g. "a(1,1)*a(1,1) + 1/2 a(2,3)'".
        expr: String,
        /// Algebra size (generators range over 1..=n).
        #[arg(long, default_value_t = 4)]
        n: u32,
        /// Also apply full row/column-sum collapses after local rewriting.
        #[arg(long)]
        collapse: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoKind {
    /// Interval base, all copies glued at the first endpoint.
    Wedge,
    /// Circle base, all copies glued at one marked point.
    Bouquet,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Verify { config, json } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("cannot read scenario file {}", config.display()))?;
            let scenario: Scenario = serde_json::from_str(&text)
                .with_context(|| format!("invalid scenario in {}", config.display()))?;
            execute(scenario, Vec::new(), json.as_deref())
        }
        Command::Demo {
            kind,
            n,
            m,
            theta,
            json,
        } => {
            let scenario = demo_scenario(kind, n, m, theta);
            let unitary = scenario.unitary.build()?;
            execute(
                scenario,
                vec![genuineness_report(&unitary)],
                json.as_deref(),
            )
        }
        Command::Reduce { expr, n, collapse } => reduce(&expr, n, collapse),
    }
}

/// Apply the `QPG_SEED` override, run the battery, render, and map the
/// verdict to an exit code.
fn execute(
    mut scenario: Scenario,
    mut extra: Vec<CheckReport>,
    json: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    if let Some(seed) = seed_override()? {
        scenario.seed = seed;
    }
    let start = Instant::now();
    let mut checks = scenario.run()?;
    let timing_ms = start.elapsed().as_millis() as u64;
    extra.append(&mut checks);
    let report = RunReport::assemble(scenario, extra, timing_ms);

    print!("{}", render(&report));
    if let Some(path) = json {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(path, text)
            .with_context(|| format!("cannot write report to {}", path.display()))?;
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn seed_override() -> anyhow::Result<Option<u64>> {
    match std::env::var("QPG_SEED") {
        Ok(text) => {
            let seed = text
                .trim()
                .parse::<u64>()
                .with_context(|| format!("QPG_SEED must be an unsigned integer, got {text:?}"))?;
            Ok(Some(seed))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(err) => Err(err).context("QPG_SEED is not valid unicode"),
    }
}

fn demo_scenario(kind: DemoKind, n: usize, m: Option<usize>, theta: f64) -> Scenario {
    let (space_kind, default_m) = match kind {
        DemoKind::Wedge => (SpaceKind::Interval, 5),
        DemoKind::Bouquet => (SpaceKind::Circle, 6),
    };
    let unitary = if n == 4 {
        UnitarySpec::TwoProjection {
            two_projection: TwoProjectionParams { theta },
        }
    } else {
        // The block model is built for four copies; other sizes fall back to
        // a classical cyclic permutation so the battery still means
        // something.
        eprintln!("note: the two-projection family needs n = 4; using the cyclic permutation on {n} points");
        let mut sigma: Vec<usize> = (2..=n).collect();
        sigma.push(1);
        UnitarySpec::Permutation { permutation: sigma }
    };
    Scenario {
        unitary,
        space: SpaceConfig {
            kind: space_kind,
            m: m.unwrap_or(default_m),
            edges: None,
            glued_indices: vec![1],
            n,
        },
        tolerance: 1e-10,
        checks: ALL_CHECKS.to_vec(),
        seed: 42,
        trials: 100,
    }
}

/// Informational report on noncommutativity of the generator blocks.
fn genuineness_report(u: &MagicUnitary) -> CheckReport {
    let report = CheckReport::new("genuineness", GENUINENESS_THRESHOLD);
    match genuineness_certificate(u, GENUINENESS_THRESHOLD) {
        Some(cert) => {
            let ((i1, j1), (i2, j2)) = cert.witness_pair;
            report
                .with_real("commutator_norm", cert.commutator_norm)
                .with_worst("i1", i1 as i64)
                .with_worst("j1", j1 as i64)
                .with_worst("i2", i2 as i64)
                .with_worst("j2", j2 as i64)
                .with_detail("noncommuting generator pair found")
        }
        None => report.with_detail("all generator pairs commute at this threshold"),
    }
}

fn reduce(expr: &str, n: u32, collapse: bool) -> anyhow::Result<ExitCode> {
    let poly = match ncalg::parse_expression(expr, n) {
        Ok(poly) => poly,
        Err(Error::Parse { pos, msg }) => {
            eprintln!("error: {msg} (byte {pos})");
            eprintln!("  {expr}");
            eprintln!("  {:>width$}", "^", width = pos + 1);
            return Ok(ExitCode::from(2));
        }
        Err(err) => return Err(err.into()),
    };
    let reduced = poly.normal_form();
    let reduced = if collapse {
        ncalg::collapse_to_fixed_point(reduced).0
    } else {
        reduced
    };
    println!("{reduced}");
    Ok(ExitCode::SUCCESS)
}

fn render(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", describe_space(&report.scenario.space));
    let _ = writeln!(
        out,
        "unitary: {}  (tolerance {}, seed {}, trials {})",
        report.scenario.unitary.describe(),
        format_metric(&Metric::Real(report.scenario.tolerance)),
        report.scenario.seed,
        report.scenario.trials
    );
    for check in &report.checks {
        let _ = writeln!(out, "{}", render_check(check));
    }
    let _ = writeln!(out, "overall: {}", report.overall.to_uppercase());
    out
}

fn describe_space(space: &SpaceConfig) -> String {
    let kind = match space.kind {
        SpaceKind::Interval => "interval",
        SpaceKind::Circle => "circle",
        SpaceKind::Custom => "custom",
    };
    format!(
        "{} copies of {kind}({}), glued at {:?}",
        space.n, space.m, space.glued_indices
    )
}

fn render_check(report: &CheckReport) -> String {
    let status = match report.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "INFO",
    };
    let metrics = report
        .metrics
        .iter()
        .map(|(key, value)| format!("{key}={}", format_metric(value)))
        .collect::<Vec<_>>()
        .join("  ");
    let mut line = format!("[{status}] {:<20} {metrics}", report.check);
    if let Some(detail) = &report.detail {
        let _ = write!(line, "  ({detail})");
    }
    line
}

fn format_metric(metric: &Metric) -> String {
    match metric {
        Metric::Int(v) => v.to_string(),
        Metric::Real(v) => {
            if *v == 0.0 {
                "0".to_string()
            } else if v.abs() < 1e-3 || v.abs() >= 1e6 {
                format!("{v:e}")
            } else {
                format!("{v}")
            }
        }
    }
}
