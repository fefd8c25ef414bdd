//! Command-line front end: model curves, event simulation, analysis and Bragg pulse design.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;
use twinhalo::analysis::{analyze_campaign, AnalysisOptions, AnalysisReport};
use twinhalo::bragg::{
    find_pulse, linspace, scan_pulse_parameters, transfer_spectrum, BraggPulse, RamanNath, SearchBounds,
};
use twinhalo::config::REFERENCE_PHASES;
use twinhalo::continuous::{
    chsh_parameter, correlator_amplitude, correlator_envelope, gravitational_phase, integrated_correlation,
    quantum_correlator, BinSpec, DephasingTime, PortClass, OPTIMAL_CHSH_ANGLES,
};
use twinhalo::events::{load_store, save_store};
use twinhalo::simulate::run_campaign;
use twinhalo::{Error, ExperimentConfig};

const THREADS_ENV: &str = "TWINHALO_THREADS";

mod exit {
    pub const CONFIG: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NUMERICAL: u8 = 4;
    pub const SEARCH: u8 = 5;
}

#[derive(Parser)]
#[command(name = "twinhalo", version, about = "Two-halo matter-wave Bell test: model, simulation and analysis")]
struct Cli {
    /// JSON configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated global phases in rad; overrides the configured list.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    phases: Option<Vec<f64>>,
    /// Shots per phase.
    #[arg(long, global = true, default_value_t = 2900)]
    shots: u32,
    /// Bin size in units of the correlation length: one value for all axes or three.
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the effective configuration in canonical form and print its hash.
    Config,
    /// Tabulate the closed-form correlation model.
    Model,
    /// Simulate a campaign and write the event store.
    Simulate,
    /// Analyze an event store.
    Analyze {
        #[arg(long)]
        events: PathBuf,
    },
    /// Simulate then analyze.
    Run,
    /// Bragg pulse design.
    Bragg {
        #[command(subcommand)]
        op: BraggOp,
        /// Raman-Nath truncation order M.
        #[arg(long, default_value_t = twinhalo::bragg::DEFAULT_ORDER)]
        order: usize,
    },
}

#[derive(Subcommand)]
enum BraggOp {
    /// Equator transfer over a (σ, α) grid.
    Scan {
        /// start:stop:count, μs
        #[arg(long, default_value = "0.5:6:100")]
        sigma: Grid,
        /// start:stop:count, rad/μs
        #[arg(long, default_value = "0.05:3:100")]
        alpha: Grid,
    },
    /// Diffraction-order populations versus quasimomentum for one pulse.
    Spectrum {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        sigma: f64,
        /// start:stop:count in units of k0
        #[arg(long, default_value = "-3:3:241", allow_hyphen_values = true)]
        kappa: Grid,
    },
    /// Search for a pulse with the given equator transfer.
    Find {
        #[arg(long)]
        target: f64,
        /// Starting guess as sigma,alpha.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        guess: Option<Vec<f64>>,
        /// Search box and grid resolution for σ, μs.
        #[arg(long, default_value = "0.5:6:24")]
        sigma: Grid,
        /// Search box and grid resolution for α, rad/μs.
        #[arg(long, default_value = "0.05:3:24")]
        alpha: Grid,
    },
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    start: f64,
    stop: f64,
    count: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
        let count = n.trim().parse::<usize>().map_err(|e| format!("'{n}': {e}"))?;
        if count == 0 {
            return Err("grid count must be positive".into());
        }
        Ok(Self { start: num(a)?, stop: num(b)?, count })
    }
}

impl Grid {
    fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => exit::CONFIG,
        Error::MalformedStore(_) | Error::InsufficientData(_) | Error::Io(_) | Error::Json(_) => exit::DATA,
        Error::Domain(_)
        | Error::DegenerateState(_)
        | Error::Numerical(_)
        | Error::Integration { .. }
        | Error::FitFailed(_) => exit::NUMERICAL,
        Error::SearchFailed { .. } => exit::SEARCH,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: classify(&e), error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = error.downcast_ref::<Error>().map_or(exit::DATA, classify);
        Self { code, error }
    }
}

fn config_failure(error: anyhow::Error) -> Failure {
    Failure { code: exit::CONFIG, error }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match setup_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn setup_threads() -> Outcome {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_failure(anyhow!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_failure(anyhow!("thread pool: {e}")))
}

fn load_config(cli: &Cli) -> Outcome<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)
            .map_err(|e| config_failure(anyhow!(e).context(format!("loading {}", path.display()))))?,
        None => ExperimentConfig::default(),
    };
    if let Some(phases) = &cli.phases {
        cfg.phases = phases.clone();
    }
    if let Some(l) = &cli.lambda {
        cfg.bin_lambda = match l.as_slice() {
            [x] => [*x; 3],
            [x, y, z] => [*x, *y, *z],
            _ => return Err(config_failure(anyhow!("--lambda takes one or three values, got {}", l.len()))),
        };
    }
    cfg.validate().map_err(|e| config_failure(e.into()))?;
    Ok(cfg)
}

fn prepare_out(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn csv_writer(path: &Path, header: &[&str]) -> Outcome<csv::Writer<fs::File>> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header).context("writing CSV header")?;
    Ok(w)
}

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v}")).collect()
}

fn run(cli: Cli) -> Outcome {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Config => {
            prepare_out(&cli.out)?;
            cfg.save(cli.out.join("config.json"))?;
            println!("{}", cfg.hash());
        }
        Command::Model => model(&cfg, &cli)?,
        Command::Simulate => {
            simulate(&cfg, &cli)?;
        }
        Command::Analyze { events } => {
            let campaign = load_store(events).with_context(|| format!("reading {}", events.display()))?;
            analyze(&cfg, &cli, &campaign)?;
        }
        Command::Run => {
            let campaign = simulate(&cfg, &cli)?;
            analyze(&cfg, &cli, &campaign)?;
        }
        Command::Bragg { op, order } => bragg(&cfg, &cli, op, *order)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ModelSummary {
    config_hash: String,
    correlation_height: f64,
    lambda: [f64; 3],
    dephasing: [f64; 3],
    e0: f64,
    envelope: f64,
    s_max: f64,
    chsh_optimal: f64,
    gravity_phase_wrapped: f64,
    separation_time_us: f64,
    recoil_frequency_khz: f64,
}

fn model(cfg: &ExperimentConfig, cli: &Cli) -> Outcome {
    prepare_out(&cli.out)?;
    let h = cfg.source.correlation_height;
    let mut bins = BinSpec::from_config(cfg, DephasingTime::MirrorTime)?;
    bins.lambda = cfg.bin_lambda;
    let e0 = correlator_amplitude(h, &bins)?;

    let phases = cli.phases.clone().unwrap_or_else(|| linspace(0.0, TAU, 73));
    let mut w = csv_writer(&cli.out.join("e_vs_phase.csv"), &["phase", "c_same", "c_between", "e"])?;
    for &phi in &phases {
        let s = integrated_correlation(PortClass::Same, phi, h, &bins)?;
        let b = integrated_correlation(PortClass::Between, phi, h, &bins)?;
        w.write_record(row(&[phi, s, b, quantum_correlator(phi, h, &bins)?])).context("writing e_vs_phase.csv")?;
    }
    w.flush().context("writing e_vs_phase.csv")?;

    let mut w = csv_writer(&cli.out.join("e_vs_lambda.csv"), &["lambda", "e0", "envelope"])?;
    for lambda in linspace(0.02, 2.0, 100) {
        let spec = BinSpec::new([lambda; 3], bins.a)?;
        w.write_record(row(&[lambda, correlator_amplitude(h, &spec)?, correlator_envelope(h)]))
            .context("writing e_vs_lambda.csv")?;
    }
    w.flush().context("writing e_vs_lambda.csv")?;

    let summary = ModelSummary {
        config_hash: cfg.hash(),
        correlation_height: h,
        lambda: bins.lambda,
        dephasing: bins.a,
        e0,
        envelope: correlator_envelope(h),
        s_max: 2.0 * std::f64::consts::SQRT_2 * e0,
        chsh_optimal: chsh_parameter(e0, OPTIMAL_CHSH_ANGLES)?,
        gravity_phase_wrapped: gravitational_phase(cfg).map(|g| g.wrapped).unwrap_or(f64::NAN),
        separation_time_us: cfg.separation_time_us()?,
        recoil_frequency_khz: cfg.recoil_frequency_khz(),
    };
    write_json(&cli.out.join("model.json"), &summary)?;
    println!("E0 = {:.4}, S_max = {:.4}", summary.e0, summary.s_max);
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    config_hash: String,
    seed: u64,
    phases: Vec<f64>,
    shots_per_phase: u32,
    total_events: usize,
    events: String,
}

fn simulate(cfg: &ExperimentConfig, cli: &Cli) -> Outcome<twinhalo::simulate::Campaign> {
    prepare_out(&cli.out)?;
    let phases = if cfg.phases.is_empty() { REFERENCE_PHASES.to_vec() } else { cfg.phases.clone() };
    let campaign = run_campaign(cfg, &phases, cli.shots, cli.seed)?;
    let events = cli.out.join("events.csv");
    save_store(&campaign, &events)?;
    cfg.save(cli.out.join("config.json"))?;
    write_json(
        &cli.out.join("manifest.json"),
        &Manifest {
            config_hash: campaign.config_hash.clone(),
            seed: cli.seed,
            phases,
            shots_per_phase: cli.shots,
            total_events: campaign.total_events(),
            events: "events.csv".into(),
        },
    )?;
    eprintln!("{} events written to {}", campaign.total_events(), events.display());
    Ok(campaign)
}

fn analyze(cfg: &ExperimentConfig, cli: &Cli, campaign: &twinhalo::simulate::Campaign) -> Outcome<AnalysisReport> {
    prepare_out(&cli.out)?;
    let report = analyze_campaign(campaign, cfg, AnalysisOptions::from_config(cfg, cli.seed))?;
    if report.store_config_hash != report.config_hash {
        eprintln!("warning: event store was generated with config {}", report.store_config_hash);
    }
    write_json(&cli.out.join("results.json"), &report)?;
    let mut w = csv_writer(
        &cli.out.join("correlations.csv"),
        &["phase", "c_same", "c_same_err", "c_between", "c_between_err", "e", "e_err", "n_shots", "excluded_bins"],
    )?;
    for c in &report.correlations {
        let mut r =
            row(&[c.phase, c.c_same.value, c.c_same.error, c.c_between.value, c.c_between.error, c.e.value, c.e.error]);
        r.push(c.n_shots.to_string());
        r.push(c.excluded_bins.to_string());
        w.write_record(r).context("writing correlations.csv")?;
    }
    w.flush().context("writing correlations.csv")?;
    let s = &report.summary;
    println!(
        "E0 = {:.3} ± {:.3} (model {:.3}), V = {:.3} ± {:.3}, S = {:.2} ± {:.2}{}",
        s.e0.value,
        s.e0.error,
        report.model_e0,
        s.visibility.value,
        s.visibility.error,
        s.s_max.value,
        s.s_max.error,
        if s.reaches_classical_bound { " (reaches S = 2)" } else { "" }
    );
    Ok(report)
}

fn bragg(cfg: &ExperimentConfig, cli: &Cli, op: &BraggOp, order: usize) -> Outcome {
    prepare_out(&cli.out)?;
    let solver = RamanNath::from_config(cfg, order)?;
    match op {
        BraggOp::Scan { sigma, alpha } => {
            let points = scan_pulse_parameters(&solver, &sigma.values(), &alpha.values())?;
            let path = cli.out.join("scan.csv");
            let mut w = csv_writer(&path, &["sigma_us", "alpha_hbar", "transfer_up", "transfer_down"])?;
            for p in &points {
                w.write_record(row(&[p.sigma_us, p.alpha, p.transfer_up, p.transfer_down]))
                    .context("writing scan.csv")?;
            }
            w.flush().context("writing scan.csv")?;
            let best = points
                .iter()
                .max_by(|a, b| a.transfer_up.min(a.transfer_down).total_cmp(&b.transfer_up.min(b.transfer_down)));
            if let Some(b) = best {
                println!(
                    "best mirror: sigma = {} μs, alpha = {}, transfer {:.4}/{:.4}",
                    b.sigma_us, b.alpha, b.transfer_up, b.transfer_down
                );
            }
        }
        BraggOp::Spectrum { alpha, sigma, kappa } => {
            let rows = transfer_spectrum(&solver, &BraggPulse::new(*alpha, *sigma), &kappa.values())?;
            let mut w = csv_writer(&cli.out.join("spectrum.csv"), &["kappa", "minus_one", "zero", "plus_one", "norm"])?;
            for r in &rows {
                w.write_record(row(&[r.kappa, r.minus_one, r.zero, r.plus_one, r.norm]))
                    .context("writing spectrum.csv")?;
            }
            w.flush().context("writing spectrum.csv")?;
        }
        BraggOp::Find { target, guess, sigma, alpha } => {
            let guess = guess.as_ref().map(|g| (g[0], g[1]));
            let bounds = SearchBounds {
                sigma_us: (sigma.start, sigma.stop),
                alpha: (alpha.start, alpha.stop),
                grid: sigma.count.max(alpha.count),
            };
            let pulse = find_pulse(&solver, *target, guess, bounds)?;
            let (up, down) = solver.equator_transfer(&pulse)?;
            #[derive(Serialize)]
            struct Found {
                target: f64,
                sigma_us: f64,
                alpha: f64,
                transfer_up: f64,
                transfer_down: f64,
                pulse_area_over_pi: f64,
            }
            let found = Found {
                target: *target,
                sigma_us: pulse.sigma_us,
                alpha: pulse.alpha,
                transfer_up: up,
                transfer_down: down,
                pulse_area_over_pi: pulse.area() / PI,
            };
            write_json(&cli.out.join("pulse.json"), &found)?;
            println!("sigma = {:.4} μs, alpha = {:.4}, transfer {:.5}/{:.5}", pulse.sigma_us, pulse.alpha, up, down);
        }
    }
    Ok(())
}
