//! `risbeam` — command-line front end for the downlink beamforming
//! simulator.
//!
//! Subcommands:
//! - `snapshot`: evaluate one seeded scenario draw and write per-scheme
//!   allocations, SINR, a received-power heatmap, and an exceedance map.
//! - `montecarlo`: sweep user counts over seeded samples and write
//!   per-sample and aggregate statistics.
//! - `pattern`: dump an element radiation-pattern cut.
//!
//! Exit codes: 0 success; 2 configuration or input validation failure;
//! 3 algorithmic failure (rank guard, non-convergence). The run manifest is
//! written last, so its presence marks a completed run.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use output::{
    exceedance_csv, heatmap_csv, montecarlo_csv, pattern_csv, samples_csv, sinr_csv,
    to_json_pretty, write_atomic, Manifest,
};
use risbeam_core::antenna::{element_gain_azimuth, element_gain_elevation, PatternConstants};
use risbeam_core::evaluation::{
    aggregate, evaluate_snapshot, exceedance_map, power_heatmap, run_sample, SampleRecord,
    SimConfig,
};
use risbeam_core::CoreError;

/// Name of the environment variable that overrides the Monte Carlo worker
/// count. Unset or invalid values fall back to the machine's parallelism.
const THREADS_ENV: &str = "RISBEAM_THREADS";

#[derive(Parser)]
#[command(name = "risbeam", version, about = "Downlink MU-MIMO beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one seeded snapshot and write grids, SINR, and a report.
    Snapshot {
        /// Scenario/solver configuration file (TOML; empty file = defaults).
        config: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Monte Carlo sweep over user counts with per-sample reseeding.
    Montecarlo {
        /// Scenario/solver configuration file (TOML; empty file = defaults).
        config: PathBuf,
        /// Comma-separated user counts to sweep.
        #[arg(long = "l-list", value_delimiter = ',', default_values_t = vec![3, 4, 5, 6, 7, 8, 9])]
        l_list: Vec<usize>,
        /// Samples per user count.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Base seed; each (user count, sample) pair derives its own seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Write one element radiation-pattern cut as `angle_deg,gain_db` CSV.
    Pattern {
        #[arg(long, value_enum)]
        cut: Cut,
        /// Output file; defaults to pattern_<cut>.csv in the working dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Cut {
    /// Azimuth cut over [-180°, 180°].
    Az,
    /// Elevation cut over [0°, 180°].
    El,
}

/// Failures carry the exit code they map to.
enum Failure {
    /// Bad input: unreadable/invalid config, invalid flag combination.
    Validation(String),
    /// The inputs were valid but an algorithm could not produce a result.
    Algorithm(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Algorithm(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Algorithm(m) => m,
        }
    }
}

fn classify(err: CoreError) -> Failure {
    match err {
        CoreError::InvalidConfig { .. }
        | CoreError::PlacementInfeasible(_)
        | CoreError::Domain(_)
        | CoreError::SingularGeometry(_) => Failure::Validation(err.to_string()),
        CoreError::RankDeficient(_)
        | CoreError::NumericalFailure(_)
        | CoreError::ConvergenceFailure { .. }
        | CoreError::NonFiniteValue(_) => Failure::Algorithm(err.to_string()),
    }
}

fn io_failure(context: &str, err: std::io::Error) -> Failure {
    Failure::Validation(format!("{context}: {err}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Snapshot {
            config,
            seed,
            out_dir,
        } => cmd_snapshot(&config, seed, &out_dir),
        Command::Montecarlo {
            config,
            l_list,
            samples,
            seed,
            out_dir,
        } => cmd_montecarlo(&config, &l_list, samples, seed, &out_dir),
        Command::Pattern { cut, out } => cmd_pattern(cut, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn load_config(path: &Path) -> Result<SimConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_failure(&format!("cannot read config {}", path.display()), e))?;
    toml::from_str(&text)
        .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))
}

fn cmd_snapshot(config_path: &Path, seed: u64, out_dir: &Path) -> Result<ExitCode, Failure> {
    let config = load_config(config_path)?;
    let started = Instant::now();

    let eval = evaluate_snapshot(&config, seed).map_err(classify)?;
    let scenario = &eval.report.scenario;
    let beamformers = eval.beamformers();
    let grid = power_heatmap(scenario, &beamformers, &config.heatmap).map_err(classify)?;
    let exceedance = exceedance_map(&grid, scenario.radio.emf_threshold_w, &scenario.circle);

    std::fs::create_dir_all(out_dir)
        .map_err(|e| io_failure(&format!("cannot create {}", out_dir.display()), e))?;
    let files: [(&str, String); 4] = [
        ("heatmap.csv", heatmap_csv(&grid)),
        ("exceedance.csv", exceedance_csv(&exceedance)),
        ("sinr.csv", sinr_csv(&eval)),
        ("report.json", to_json_pretty(&eval.report)),
    ];
    let mut outputs = Vec::new();
    for (name, contents) in &files {
        write_atomic(out_dir, name, contents)
            .map_err(|e| io_failure(&format!("cannot write {name}"), e))?;
        outputs.push((*name).to_string());
    }

    let mut notes = Vec::new();
    let partial = if let Some(f) = &eval.report.dual_gd_failure {
        notes.push(format!(
            "dual_gd did not converge within {} iterations (worst violation {} W); \
             its scheme results are absent",
            f.iterations, f.max_violation_w
        ));
        true
    } else {
        false
    };
    outputs.push("manifest.json".to_string());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command: "snapshot",
        seed,
        user_counts: None,
        samples_per_user_count: None,
        config,
        outputs,
        duration_ms: started.elapsed().as_millis(),
        partial,
        notes,
    };
    write_atomic(out_dir, "manifest.json", &to_json_pretty(&manifest))
        .map_err(|e| io_failure("cannot write manifest.json", e))?;

    if partial {
        eprintln!("warning: dual GD did not converge; outputs are partial");
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn cmd_montecarlo(
    config_path: &Path,
    l_list: &[usize],
    samples: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<ExitCode, Failure> {
    let config = load_config(config_path)?;
    if samples == 0 {
        return Err(Failure::Validation("--samples must be at least 1".into()));
    }
    if l_list.is_empty() || l_list.contains(&0) {
        return Err(Failure::Validation(
            "--l-list must name at least one nonzero user count".into(),
        ));
    }
    config.scenario.validate().map_err(classify)?;
    let started = Instant::now();

    // One task per (user count, sample index); each derives its own seed from
    // the base seed, so the result is independent of worker count and the
    // ordered collect keeps the record order deterministic.
    let tasks: Vec<(usize, usize)> = l_list
        .iter()
        .flat_map(|&l| (0..samples).map(move |i| (l, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Failure::Validation(format!("cannot build worker pool: {e}")))?;
    let records: Vec<SampleRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(l, i)| {
                let record = run_sample(&config, l, i, seed);
                match &record.failure {
                    None => eprintln!("L={l} sample {i}: ok"),
                    Some(f) => eprintln!("L={l} sample {i}: excluded ({f:?})"),
                }
                record
            })
            .collect()
    });
    let report = aggregate(&records, seed, samples, l_list);

    std::fs::create_dir_all(out_dir)
        .map_err(|e| io_failure(&format!("cannot create {}", out_dir.display()), e))?;
    let files: [(&str, String); 3] = [
        ("montecarlo.csv", montecarlo_csv(&report)),
        ("samples.csv", samples_csv(&report)),
        ("report.json", to_json_pretty(&report)),
    ];
    let mut outputs = Vec::new();
    for (name, contents) in &files {
        write_atomic(out_dir, name, contents)
            .map_err(|e| io_failure(&format!("cannot write {name}"), e))?;
        outputs.push((*name).to_string());
    }

    let excluded: usize = records.iter().filter(|r| r.failed()).count();
    let nothing_evaluable = report.rows.iter().all(|r| r.samples_included == 0);
    let mut notes = Vec::new();
    if excluded > 0 {
        notes.push(format!(
            "{excluded} of {} samples were excluded from the aggregates; \
             see samples.csv for per-sample reasons",
            records.len()
        ));
    }
    outputs.push("manifest.json".to_string());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command: "montecarlo",
        seed,
        user_counts: Some(l_list.to_vec()),
        samples_per_user_count: Some(samples),
        config,
        outputs,
        duration_ms: started.elapsed().as_millis(),
        partial: nothing_evaluable,
        notes,
    };
    write_atomic(out_dir, "manifest.json", &to_json_pretty(&manifest))
        .map_err(|e| io_failure("cannot write manifest.json", e))?;

    if nothing_evaluable {
        eprintln!("error: every sample failed; aggregates are empty");
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_pattern(cut: Cut, out: Option<&Path>) -> Result<ExitCode, Failure> {
    let constants = PatternConstants::default();
    // 0.5° steps, both endpoints included; + 0.0 folds negative zero at the
    // pattern peak into plain zero for the CSV.
    let points: Vec<(f64, f64)> = match cut {
        Cut::Az => (0..=720)
            .map(|i| -180.0 + 0.5 * i as f64)
            .map(|phi| {
                element_gain_azimuth(phi, &constants).map(|gain| (phi, gain + 0.0))
            })
            .collect::<Result<_, _>>(),
        Cut::El => (0..=360)
            .map(|i| 0.5 * i as f64)
            .map(|theta| {
                element_gain_elevation(theta, &constants).map(|gain| (theta, gain + 0.0))
            })
            .collect::<Result<_, _>>(),
    }
    .map_err(classify)?;

    let default_name = match cut {
        Cut::Az => Path::new("pattern_az.csv"),
        Cut::El => Path::new("pattern_el.csv"),
    };
    let path = out.unwrap_or(default_name);
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| io_failure(&format!("cannot create {}", dir.display()), e))?;
    }
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Failure::Validation(format!("invalid output path {}", path.display())))?;
    write_atomic(dir.unwrap_or(Path::new(".")), name, &pattern_csv(&points))
        .map_err(|e| io_failure(&format!("cannot write {}", path.display()), e))?;
    Ok(ExitCode::SUCCESS)
}
