//! `charflow <command> --config <path> [--out <dir>] [--seed <u64>] [--levels <n>]`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use super::output::{write_columns, write_energy_csv, write_json, write_plot_stub, write_snapshots_bin, write_snapshots_csv, write_traces};
use super::runs::{self, time_grid, Resolution};
use super::scenario::Scenario;
use super::HarnessError;
use crate::interior::{EnergyLog, GridField, SpaceGrid};
use crate::mellin::{k_norm_l2, weighted_norm_direct, FieldView};

#[derive(Debug, Parser)]
#[command(name = "charflow", version, about = "Hyperbolic systems with a totally characteristic boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Scenario file (TOML, or JSON by extension) or `builtin:<name>`.
    #[arg(long)]
    pub config: String,
    /// Output directory.
    #[arg(long, default_value = "charflow-out")]
    pub out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interior solve: snapshots, energy log and norms.
    Solve(Common),
    /// Boundary cascade alone.
    Traces(Common),
    /// Interior traces fitted and compared with the cascade.
    VerifyTraces(Common),
    /// Energy constant and its refinement stability.
    VerifyEnergy(Common),
    /// Symbol identities, compatibility, symmetrizer and tangency.
    SymbolCheck(Common),
    /// `verify-traces` over refinement levels with observed orders.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Solve(c)
            | Command::Traces(c)
            | Command::VerifyTraces(c)
            | Command::VerifyEnergy(c)
            | Command::SymbolCheck(c) => c,
            Command::Convergence { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Traces(_) => "traces",
            Command::VerifyTraces(_) => "verify-traces",
            Command::VerifyEnergy(_) => "verify-energy",
            Command::SymbolCheck(_) => "symbol-check",
            Command::Convergence { .. } => "convergence",
        }
    }
}

/// Envelope of every JSON report: the resolved scenario (all defaults filled in) and the result.
#[derive(Debug, Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    scenario: &'a Scenario,
    result: T,
}

#[derive(Debug, Serialize)]
struct NormRecord {
    name: String,
    s: f64,
    gamma: f64,
    value: f64,
    tail_diagnostic: f64,
}

fn norm_records(grid: &SpaceGrid, field: &GridField, delta: f64, label: &str) -> Vec<NormRecord> {
    let start = usize::from(grid.x[0] == 0.0);
    let per_row = grid.ny() * field.ncomp;
    let mut out = vec![NormRecord {
        name: format!("K^(0,delta) {label}"),
        s: 0.0,
        gamma: delta,
        value: k_norm_l2(&field.view(grid), delta),
        tail_diagnostic: 0.0,
    }];
    if let Ok(view) = FieldView::new(&grid.x[start..], &grid.y, field.ncomp, &field.values[start * per_row..]) {
        if let Ok(r) = weighted_norm_direct(&view, delta) {
            out.push(NormRecord {
                name: format!("x^(-delta) L2 {label}"),
                s: r.s,
                gamma: r.gamma,
                value: r.value,
                tail_diagnostic: r.tail_diagnostic,
            });
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct SolveResult<'a> {
    resolution: Resolution,
    energy: &'a EnergyLog,
    norms: Vec<NormRecord>,
    snapshots: usize,
}

#[derive(Debug, Serialize)]
struct TracesResult {
    resolution: Resolution,
    pairs: Vec<String>,
    leibniz_residual: Option<f64>,
}

fn setup_threads(n: Option<usize>) {
    if let Some(n) = n {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run_command(cmd: &Command) -> Result<(), HarnessError> {
    let common = cmd.common();
    let mut scenario = Scenario::load(&common.config)?;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    let prep = scenario.validate()?;
    setup_threads(scenario.threads);
    let out = &common.out;
    fs::create_dir_all(out)?;
    let plot = out.join("plot");
    fs::create_dir_all(&plot)?;
    write_plot_stub(&plot)?;
    let report_path = out.join("report.json");
    let name = cmd.name();
    let fail = |msg: String| Err(HarnessError::AcceptanceFailure(msg));
    match cmd {
        Command::Solve(_) => {
            let run = runs::run_solve(&prep, 0)?;
            let sol = &run.solution;
            write_snapshots_csv(&out.join("snapshots.csv"), &prep.grid, &sol.snapshots)?;
            write_snapshots_bin(&out.join("snapshots.bin"), &prep.grid, &sol.snapshots)?;
            write_energy_csv(&out.join("energy.csv"), &sol.energy)?;
            let e = &sol.energy;
            write_columns(&plot.join("energy.dat"), &["t", "u_norm", "f_norm"], &[e.t.clone(), e.u_norm.clone(), e.f_norm.clone()])?;
            let delta = scenario.operator.delta;
            let mut norms = norm_records(&prep.grid, &run.u0, delta, "u(0)");
            norms.extend(norm_records(&prep.grid, sol.snapshots.last().expect("final state is kept"), delta, "u(T)"));
            let result = SolveResult { resolution: run.resolution.clone(), energy: e, norms, snapshots: sol.snapshots.len() };
            write_json(&report_path, &Report { command: name, scenario: &scenario, result })
        }
        Command::Traces(_) => {
            let (dt, steps) = time_grid(&prep)?;
            let res = runs::run_traces(&prep, dt, steps)?;
            write_traces(&out.join("traces"), &prep.grid.y.nodes(), &res.traces)?;
            let result = TracesResult {
                resolution: Resolution { level: 0, grading: prep.grid.grading, nx: prep.grid.nx(), ny: prep.grid.ny(), dt, steps },
                pairs: res.traces.iter().map(|t| t.pair.label()).collect(),
                leibniz_residual: res.leibniz_residual,
            };
            write_json(&report_path, &Report { command: name, scenario: &scenario, result })
        }
        Command::VerifyTraces(_) => {
            let r = runs::verify_traces(&prep, 0)?;
            let idx: Vec<f64> = (0..r.comparisons.len()).map(|k| k as f64).collect();
            let errs: Vec<f64> = r.comparisons.iter().map(|c| c.rel_err_l2).collect();
            write_columns(&plot.join("trace_errors.dat"), &["pair_index", "rel_err_L2"], &[idx, errs])?;
            write_json(&report_path, &Report { command: name, scenario: &scenario, result: &r })?;
            if r.pass {
                Ok(())
            } else {
                fail(format!("trace comparison: max rel_err_L2 = {:e}", r.max_rel_err))
            }
        }
        Command::VerifyEnergy(_) => {
            let r = runs::verify_energy(&scenario)?;
            write_json(&report_path, &Report { command: name, scenario: &scenario, result: &r })?;
            if r.pass {
                Ok(())
            } else {
                fail(format!("energy: C_fit change {:e}, growth {:e}", r.verdict.rel_change, r.growth))
            }
        }
        Command::SymbolCheck(_) => {
            let r = runs::symbol_check(&prep, scenario.seed)?;
            write_json(&report_path, &Report { command: name, scenario: &scenario, result: &r })?;
            if r.pass {
                Ok(())
            } else {
                fail("symbol residuals above tolerance".into())
            }
        }
        Command::Convergence { levels, .. } => {
            let r = runs::convergence(&scenario, *levels)?;
            let h: Vec<f64> = r.levels.iter().map(|l| l.resolution.level as f64).collect();
            let te: Vec<f64> = r.levels.iter().map(|l| l.trace_error).collect();
            let ie: Vec<f64> = r.levels.iter().map(|l| l.interior_error.unwrap_or(f64::NAN)).collect();
            write_columns(&plot.join("convergence.dat"), &["level", "trace_error", "interior_error"], &[h, te, ie])?;
            write_json(&report_path, &Report { command: name, scenario: &scenario, result: &r })
        }
    }
}

/// Runs the CLI on `args` and returns the process exit code; failures print a JSON record to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let rec = e.record();
            eprintln!("{}", serde_json::to_string(&rec).expect("plain record"));
            rec.exit_code
        }
    }
}

/// Reads the binary snapshots of a `solve` output directory.
pub fn load_snapshots(dir: &Path) -> Result<super::output::SnapshotFile, HarnessError> {
    super::output::read_snapshots_bin(&dir.join("snapshots.bin"))
}
