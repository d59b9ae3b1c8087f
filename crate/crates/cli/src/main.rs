//! Command-line front end for the vibronic wave-packet simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use vibronic_core::analysis::{extremes, spectral_peaks};
use vibronic_core::scenario::identities::check_random_states;
use vibronic_core::scenario::output::summary_json;
use vibronic_core::scenario::{read_series_csv, write_outputs};
use vibronic_core::units::{to_ps, to_wavenumber};
use vibronic_core::{load_config, Error, Scenario};

#[derive(Parser)]
#[command(name = "vibronic", version, about = "Coupled-channel wave packets and vibronic entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the vibrational levels of every channel.
    Eigens { config: PathBuf },
    /// Propagate a scenario and write the series and summary.
    Run {
        config: PathBuf,
        /// Overrides the output directory of the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Spectral peaks and extremes of one column of a series CSV.
    Analyze {
        series: PathBuf,
        #[arg(long, default_value = "L")]
        field: String,
        /// Start of the analysis window in ps.
        #[arg(long)]
        from: Option<f64>,
    },
    /// Measure identities on random states and along a short trajectory.
    CheckIdentities {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        states: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Number of time steps in the trajectory check.
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::Io { .. }) | Failure::Usage(_) => 1,
            Failure::Core(e) if e.is_config_error() => 2,
            Failure::Core(_) | Failure::Check(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values always serialize"));
}

fn eigens(path: &Path) -> Result<(), Failure> {
    let scenario = Scenario::build(load_config(path)?)?;
    for (channel, basis) in scenario.hamiltonian.channels().iter().zip(scenario.bases.bases()) {
        println!("# channel {} ({} levels)", basis.label, basis.len());
        println!("# v  E_cm-1  spacing_cm-1");
        let mut previous = None;
        for (v, e) in basis.energies.iter().enumerate() {
            let bare = to_wavenumber(e - channel.dressing);
            let spacing = previous.map(|p| bare - p);
            previous = Some(bare);
            match spacing {
                Some(s) => println!("{v} {bare:.6} {s:.6}"),
                None => println!("{v} {bare:.6} -"),
            }
        }
    }
    Ok(())
}

fn run(path: &Path, output_dir: Option<PathBuf>) -> Result<(), Failure> {
    let config = load_config(path)?;
    let dir = output_dir.unwrap_or_else(|| config.output.dir.clone());
    let scenario = Scenario::build(config)?;
    let result = scenario.run()?;
    let files = write_outputs(&scenario, &result, &dir)?;
    log::info!("wrote {} and {}", files.series.display(), files.summary.display());
    let summary = summary_json(&scenario, &result)?;
    print_json(&json!({
        "series": files.series,
        "summary": files.summary,
        "extra_files": files.extra.len(),
        "final_populations": summary["final_populations"],
        "L": summary["oscillations"]["L"],
    }));
    Ok(())
}

fn analyze(path: &Path, field: &str, from: Option<f64>) -> Result<(), Failure> {
    let csv = read_series_csv(path)?;
    let times = csv.column("t_ps").ok_or_else(|| Failure::Usage("series has no t_ps column".into()))?;
    let values = csv
        .column(field)
        .ok_or_else(|| Failure::Usage(format!("series has no `{field}` column")))?;
    let first = from.map_or(0, |t0| times.partition_point(|&t| t < t0));
    let (times, values) = (&times[first..], &values[first..]);
    let ext = extremes(times, values)?;
    let spectrum = spectral_peaks(times, values)?;
    print_json(&json!({
        "field": field,
        "samples": times.len(),
        "window_ps": [times[0], times[times.len() - 1]],
        "extremes": { "min": ext.min, "max": ext.max, "t_min_ps": ext.t_min, "t_max_ps": ext.t_max },
        "resolution_per_ps": spectrum.resolution,
        "peaks": spectrum.peaks.iter().map(|p| json!({
            "period_ps": p.period,
            "frequency_per_ps": p.frequency,
            "amplitude": p.amplitude,
        })).collect::<Vec<_>>(),
    }));
    Ok(())
}

fn check_identities(path: &Path, states: usize, seed: u64, steps: usize) -> Result<(), Failure> {
    let mut config = load_config(path)?;
    let steps = steps.max(1);
    config.run.t1 = config.run.t0 + steps as f64 * config.run.dt;
    config.run.stride = 1;
    config.run.analysis_start = Some(config.run.t0);
    let scenario = Scenario::build(config)?;
    let potentials = scenario.bare_potentials();
    let report = check_random_states(&scenario.bases, &potentials, states, seed)?;
    let mut failed = Vec::new();
    for (name, value, tol, pass) in report.checks() {
        println!("{} {name}: {value:.3e} (tol {tol:.1e})", if pass { "ok  " } else { "FAIL" });
        if !pass {
            failed.push(name);
        }
    }
    let traj = scenario.run()?;
    let r = traj.identities;
    println!(
        "trajectory: {} snapshots over {:.4} ps, norm error {:.3e}, truncation {:.3e}",
        traj.series.len(),
        to_ps(scenario.config.run.t1 - scenario.config.run.t0),
        r.max_norm_error,
        r.max_truncation
    );
    let mut trajectory_checks = vec![
        ("purity + L = 1", r.purity_plus_l, 1e-14),
        ("L trace vs pairwise", r.l_pairwise, 1e-12),
        ("skew(H_mol) = variance", r.skew_minus_variance, 0.0),
    ];
    if let Some(v) = r.l1_relation {
        trajectory_checks.push(("L = 2PgPe - C^2/2", v, 1e-12));
    }
    for (name, value, tol) in trajectory_checks {
        let pass = value <= tol;
        println!("{} trajectory {name}: {value:.3e} (tol {tol:.1e})", if pass { "ok  " } else { "FAIL" });
        if !pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("identity checks failed: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Eigens { config } => eigens(&config),
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::Analyze { series, field, from } => analyze(&series, &field, from),
        Command::CheckIdentities {
            config,
            states,
            seed,
            steps,
        } => check_identities(&config, states, seed, steps),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
