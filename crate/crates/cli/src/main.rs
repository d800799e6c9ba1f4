use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgn_core::runner::{self, Document, ScenarioOutcome, SweepReport};
use sgn_core::units::ScaleSet;
use sgn_core::{verify, Error};

const EXIT_PARSE: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sgn",
    version,
    about = "Stern-Gerlach dynamics with Schrödinger-Newton self-gravity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write observables.csv, snapshots.csv and summary.json
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a parameter sweep described by a config with a [sweep] section
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the oracle checks and print one line per check
    Verify,
    /// Print the scale set for a length scale in metres
    Units {
        #[arg(long)]
        sigma: f64,
        /// Optional field gradient in T/m to convert to a dimensionless force
        #[arg(long)]
        gradient: Option<f64>,
        /// Optional mass in atomic mass units to convert
        #[arg(long)]
        mass_u: Option<f64>,
    },
}

/// Flags that override keys of the config document.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    mass: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    dz: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long)]
    zmax: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Overrides {
    fn apply(&self, doc: &mut Document) -> Result<(), Error> {
        let pairs = [
            ("mass", &self.mass),
            ("theta", &self.theta),
            ("epsilon", &self.epsilon),
            ("gamma", &self.gamma),
            ("dz", &self.dz),
            ("dt", &self.dt),
            ("t_max", &self.tmax),
            ("z_max", &self.zmax),
            ("delta", &self.delta),
            ("out", &self.out),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                doc.set(key, v)?;
            }
        }
        Ok(())
    }
}

fn load(path: &PathBuf, overrides: &Overrides) -> Result<Document, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut doc = Document::parse(&text)?;
    overrides.apply(&mut doc)?;
    Ok(doc)
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Instability { .. } => ExitCode::from(EXIT_UNSTABLE),
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => ExitCode::FAILURE,
        _ => ExitCode::from(EXIT_PARSE),
    }
}

fn print_outcome(outcome: &ScenarioOutcome) {
    let s = &outcome.summary;
    println!(
        "{}: {} ({} peaks, separation {:.3}), <z> = {:.6}, classical z = {:.6}, max |<z> - z_cl| = {:.3e}, {:.1}s",
        s.params.label,
        s.classification.kind,
        s.classification.n_peaks,
        s.classification.peak_separation,
        s.final_z_expect,
        s.classical_final_z,
        s.max_classical_deviation,
        s.runtime_seconds
    );
}

fn print_sweep(report: &SweepReport) {
    println!(
        "{:>10}  {:>10}  {:>7}  {:>12}  {:>12}  {:>12}",
        report.parameter, "class", "peaks", "final <z>", "classical z", "peak dev"
    );
    for e in &report.entries {
        let kind = e
            .classification
            .map(|c| c.kind.to_string())
            .unwrap_or_else(|| "-".into());
        let n = e.classification.map(|c| c.n_peaks).unwrap_or(0);
        println!(
            "{:>10.4}  {:>10}  {:>7}  {:>12.6}  {:>12.6}  {:>12}{}",
            e.value,
            kind,
            n,
            e.final_z_expect.unwrap_or(f64::NAN),
            e.classical_final_z,
            e.max_peak_deviation
                .map(|d| format!("{d:.4}"))
                .unwrap_or_else(|| "-".into()),
            e.error
                .as_deref()
                .map(|r| format!("  FAILED: {r}"))
                .unwrap_or_default()
        );
    }
    let show = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_else(|| "none".into());
    println!(
        "largest SPLIT: {}, smallest SINGLE: {}",
        show(report.largest_split),
        show(report.smallest_single)
    );
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = match load(&config, &overrides).and_then(|d| d.scenario()) {
                Ok(cfg) => cfg,
                Err(err) => {
                    eprintln!("error: {}: {err}", config.display());
                    return exit_for(&err);
                }
            };
            match runner::run_scenario(&cfg) {
                Ok(outcome) => {
                    print_outcome(&outcome);
                    println!("wrote {}", cfg.run_dir().display());
                    if outcome.record.failed.is_some() {
                        return ExitCode::from(EXIT_UNSTABLE);
                    }
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    exit_for(&err)
                }
            }
        }
        Command::Sweep { config, overrides } => {
            let cfg = match load(&config, &overrides).and_then(|d| d.sweep()) {
                Ok(cfg) => cfg,
                Err(err) => {
                    eprintln!("error: {}: {err}", config.display());
                    return exit_for(&err);
                }
            };
            match runner::sweep(&cfg, true) {
                Ok(outcome) => {
                    print_sweep(&outcome.report);
                    if outcome.report.entries.iter().any(|e| e.error.is_some()) {
                        return ExitCode::from(EXIT_UNSTABLE);
                    }
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    exit_for(&err)
                }
            }
        }
        Command::Verify => match verify::run_all() {
            Ok(reports) => {
                for r in &reports {
                    println!("{r}");
                }
                if reports.iter().all(|r| r.passed) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::FAILURE
                }
            }
            Err(err) => {
                eprintln!("error: {err}");
                exit_for(&err)
            }
        },
        Command::Units {
            sigma,
            gradient,
            mass_u,
        } => {
            let scales = match ScaleSet::from_sigma(sigma) {
                Ok(s) => s,
                Err(err) => {
                    eprintln!("error: {err}");
                    return ExitCode::from(EXIT_PARSE);
                }
            };
            println!("sigma_r     = {:.6e} m", scales.sigma_r);
            println!(
                "m_r         = {:.6e} kg = {:.6e} u",
                scales.m_r,
                scales.m_r_in_u()
            );
            println!("t_r         = {:.6e} s", scales.t_r);
            println!("force_scale = {:.6e} N", scales.force_scale);
            if let Some(b) = gradient {
                println!(
                    "gamma       = {:.6} (for {b} T/m)",
                    scales.gamma_dimensionless(b)
                );
            }
            if let Some(m) = mass_u {
                println!(
                    "m_tilde     = {:.6} (for {m:e} u)",
                    scales.mass_to_dimensionless(m)
                );
            }
            ExitCode::SUCCESS
        }
    }
}
