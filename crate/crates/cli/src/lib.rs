//! Command implementations behind the `ca-alloc` binary: scenario
//! generation, rate-matrix export, single solves, baselines, demand
//! evolution, swap-budget sweeps, and per-user CSV reports.

use anyhow::{anyhow, Context, Result};
use ca_core::{
    allocate_baseline_no_ca, allocate_ca, compute_rate_matrix, evolve, generate_preset, sweep_q,
    validate_scenario, AllocationResult, CaError, Preset, Scenario,
};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

/// Process exit codes with a defined meaning.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    /// Unexpected failure (I/O, numerics); anything without its own code.
    pub const FAILURE: i32 = 1;
    /// The input failed validation or the arguments are unusable.
    pub const VALIDATION: i32 = 2;
    /// The model is infeasible.
    pub const INFEASIBLE: i32 = 3;
    /// The time limit cut the solve short (a best-effort result file is
    /// still written when an incumbent exists).
    pub const TIME_LIMIT: i32 = 4;
}

#[derive(Parser, Debug)]
#[command(
    name = "ca-alloc",
    about = "Max-min demand matching with carrier aggregation for multibeam satellite systems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a seeded scenario file (plus a demand-profile sidecar for
    /// evolution presets).
    Gen {
        /// One of: paper8, evolve2, tiny.
        #[arg(long)]
        preset: Preset,
        /// Seed; fully determines the output.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output scenario path; evolution presets also write
        /// `<stem>.profiles.json` next to it.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Export the achievable-rate matrix as CSV (carrier_id, user_id,
    /// rate_mbps).
    Rates {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve the carrier-aggregation problem and write the result JSON.
    Solve {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute the no-aggregation proportional baseline and write the
    /// result JSON.
    Baseline {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Re-solve across demand profiles under a per-epoch swap budget and
    /// write the trace JSON.
    Evolve {
        scenario: PathBuf,
        /// Swap budget per epoch transition.
        #[arg(long)]
        q: usize,
        /// Demand profile file; defaults to `<scenario stem>.profiles.json`.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run one evolution per swap budget and write a per-q CSV summary
    /// (columns: q, psi, unmet, unused, swaps; rates in Mbit/s). Budgets are
    /// solved in increasing order, each warm-started from the previous one,
    /// so psi never decreases along the sweep. Wall time goes to stderr.
    #[command(name = "sweep-q")]
    SweepQ {
        scenario: PathBuf,
        /// Comma-separated swap budgets, e.g. `--q 0,1,2,3,4`.
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<usize>,
        /// Demand profile file; defaults to `<scenario stem>.profiles.json`.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Flatten a result JSON into per-user CSV rows (columns: id, demand,
    /// supply_ca, supply_baseline, unmet, unused; rates in Mbit/s).
    Report {
        result: PathBuf,
        /// Baseline result JSON filling the supply_baseline column; the
        /// column is left empty when absent.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Run one parsed command and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Gen {
            preset,
            seed,
            output,
        } => cmd_gen(*preset, *seed, output),
        Command::Rates { scenario, output } => cmd_rates(scenario, output),
        Command::Solve { scenario, output } => cmd_solve(scenario, output),
        Command::Baseline { scenario, output } => cmd_baseline(scenario, output),
        Command::Evolve {
            scenario,
            q,
            profiles,
            output,
        } => cmd_evolve(scenario, *q, profiles.as_deref(), output),
        Command::SweepQ {
            scenario,
            q,
            profiles,
            output,
        } => cmd_sweep_q(scenario, q, profiles.as_deref(), output),
        Command::Report {
            result,
            baseline,
            output,
        } => cmd_report(result, baseline.as_deref(), output),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CaError>() {
        Some(CaError::Validation(_)) | Some(CaError::Invalid(_)) => exit_code::VALIDATION,
        Some(CaError::Infeasible) => exit_code::INFEASIBLE,
        Some(CaError::TimeLimitNoIncumbent) => exit_code::TIME_LIMIT,
        _ => {
            if err.downcast_ref::<serde_json::Error>().is_some() {
                exit_code::VALIDATION
            } else {
                exit_code::FAILURE
            }
        }
    }
}

fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let s = Scenario::from_json(&text)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("parsing scenario {}", path.display()))?;
    let violations = validate_scenario(&s);
    if !violations.is_empty() {
        return Err(anyhow::Error::from(CaError::Validation(violations)));
    }
    Ok(s)
}

/// Default sidecar path for demand profiles: `<scenario stem>.profiles.json`.
fn default_profiles_path(scenario: &Path) -> PathBuf {
    scenario.with_extension("profiles.json")
}

fn read_profiles(scenario: &Path, explicit: Option<&Path>) -> Result<Vec<Vec<f64>>> {
    let path = explicit
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_profiles_path(scenario));
    if !path.exists() {
        return Err(anyhow::Error::from(CaError::Invalid(format!(
            "no demand profile file at {}; generate the scenario with an \
             evolution preset or pass --profiles",
            path.display()
        ))));
    }
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading profiles {}", path.display()))?;
    let profiles: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("parsing profiles {}", path.display()))?;
    Ok(profiles)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(preset: Preset, seed: u64, output: &Path) -> Result<i32> {
    let generated = generate_preset(preset, seed);
    write_text(output, &generated.scenario.to_json())?;
    if let Some(profiles) = &generated.demand_profiles {
        let sidecar = default_profiles_path(output);
        let text =
            serde_json::to_string_pretty(profiles).expect("demand profiles serialize");
        write_text(&sidecar, &text)?;
    }
    Ok(exit_code::SUCCESS)
}

fn cmd_rates(scenario: &Path, output: &Path) -> Result<i32> {
    let s = read_scenario(scenario)?;
    let rates = s
        .rate_matrix_override
        .clone()
        .unwrap_or_else(|| compute_rate_matrix(&s));
    let mut w = csv::Writer::from_path(output)
        .with_context(|| format!("writing {}", output.display()))?;
    w.write_record(["carrier_id", "user_id", "rate_mbps"])?;
    let (nc, nu) = rates.shape();
    for c in 0..nc {
        for u in 0..nu {
            w.write_record([
                s.carriers[c].id.to_string(),
                s.users[u].id.to_string(),
                (rates.get(c, u) / 1e6).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(exit_code::SUCCESS)
}

/// Exit code matching a solve result: the time limit is reported even when
/// a best-effort incumbent was written.
fn result_code(r: &AllocationResult) -> i32 {
    if r.status == "time_limit" {
        exit_code::TIME_LIMIT
    } else {
        exit_code::SUCCESS
    }
}

fn cmd_solve(scenario: &Path, output: &Path) -> Result<i32> {
    let s = read_scenario(scenario)?;
    let r = allocate_ca(&s)?;
    write_text(output, &r.to_json())?;
    Ok(result_code(&r))
}

fn cmd_baseline(scenario: &Path, output: &Path) -> Result<i32> {
    let s = read_scenario(scenario)?;
    let r = allocate_baseline_no_ca(&s)?;
    write_text(output, &r.to_json())?;
    Ok(exit_code::SUCCESS)
}

fn cmd_evolve(
    scenario: &Path,
    q: usize,
    profiles: Option<&Path>,
    output: &Path,
) -> Result<i32> {
    let s = read_scenario(scenario)?;
    let profiles = read_profiles(scenario, profiles)?;
    let trace = evolve(&s, &profiles, q)?;
    let truncated = trace.error.clone();
    let text = serde_json::to_string_pretty(&trace).expect("trace serializes");
    write_text(output, &text)?;
    match truncated {
        None => Ok(exit_code::SUCCESS),
        Some(msg) => Err(anyhow!("evolution truncated: {msg}")),
    }
}

fn cmd_sweep_q(
    scenario: &Path,
    qs: &[usize],
    profiles: Option<&Path>,
    output: &Path,
) -> Result<i32> {
    if qs.is_empty() {
        return Err(anyhow::Error::from(CaError::Invalid(
            "sweep-q needs at least one budget".into(),
        )));
    }
    let s = read_scenario(scenario)?;
    let profiles = read_profiles(scenario, profiles)?;
    let started = std::time::Instant::now();
    let mut entries = sweep_q(&s, &profiles, qs)?;
    entries.sort_by_key(|e| e.q); // output rows are ordered by q
    // wall time is not reproducible, so it goes to stderr, never the CSV
    eprintln!(
        "sweep-q: {} budgets in {:.1} s",
        qs.len(),
        started.elapsed().as_secs_f64()
    );

    let mut w = csv::Writer::from_path(output)
        .with_context(|| format!("writing {}", output.display()))?;
    w.write_record(["q", "psi", "unmet", "unused", "swaps"])?;
    for entry in &entries {
        if let Some(msg) = &entry.trace.error {
            return Err(anyhow!("q={} truncated: {msg}", entry.q));
        }
        let last = entry
            .trace
            .epochs
            .last()
            .ok_or_else(|| anyhow!("q={}: empty trace", entry.q))?;
        let swaps: usize = entry.trace.epochs.iter().map(|e| e.swap_count).sum();
        w.write_record([
            entry.q.to_string(),
            last.result.psi.to_string(),
            (last.result.unmet_bps / 1e6).to_string(),
            (last.result.unused_bps / 1e6).to_string(),
            swaps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(exit_code::SUCCESS)
}

fn read_result(path: &Path) -> Result<AllocationResult> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading result {}", path.display()))?;
    AllocationResult::from_json(&text)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("parsing result {}", path.display()))
}

fn cmd_report(result: &Path, baseline: Option<&Path>, output: &Path) -> Result<i32> {
    let r = read_result(result)?;
    let baseline = baseline.map(read_result).transpose()?;
    if let Some(b) = &baseline {
        if b.user_ids != r.user_ids {
            return Err(anyhow::Error::from(CaError::Invalid(
                "baseline result covers different users than the main result".into(),
            )));
        }
    }
    let mut w = csv::Writer::from_path(output)
        .with_context(|| format!("writing {}", output.display()))?;
    w.write_record([
        "id",
        "demand",
        "supply_ca",
        "supply_baseline",
        "unmet",
        "unused",
    ])?;
    for (i, &id) in r.user_ids.iter().enumerate() {
        let d = r.demand_bps[i];
        let s = r.supply_bps[i];
        let sb = baseline
            .as_ref()
            .map(|b| (b.supply_bps[i] / 1e6).to_string())
            .unwrap_or_default();
        w.write_record([
            id.to_string(),
            (d / 1e6).to_string(),
            (s / 1e6).to_string(),
            sb,
            ((d - s).max(0.0) / 1e6).to_string(),
            ((s - d).max(0.0) / 1e6).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(exit_code::SUCCESS)
}
