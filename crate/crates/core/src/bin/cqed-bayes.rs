use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cqed_bayes::cavity::build_rate_grid;
use cqed_bayes::harness::{
    emit_compare, emit_convergence, emit_ensemble, emit_fields, emit_simulate, run_compare,
    run_convergence, run_ensemble_check, ConfigOverrides, ExperimentConfig, HarnessError,
};
use cqed_bayes::noise::{wiener_increments, NoiseSeed};
use cqed_bayes::trajectory::simulate_ito_on;

#[derive(Parser)]
#[command(
    name = "cqed-bayes",
    version,
    about = "Qubit state estimation from homodyne records in circuit QED"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the cavity fields and measurement rates on the time grid.
    Fields(Flags),
    /// Simulate one trajectory and its measurement current.
    Simulate(Flags),
    /// Reconstruct simulated trajectories with each Bayesian rule.
    Compare(Flags),
    /// Rule errors under dyadic refinement of a common noise path.
    Convergence(Flags),
    /// Compare the trajectory ensemble mean with the unconditioned evolution.
    Ensemble(Flags),
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected re,im, got '{s}'"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
    Ok([p(re)?, p(im)?])
}

fn parse_levels(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("dt level '{x}': {e}")))
        })
        .collect()
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// JSON file with any of the options below (command-line flags win).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dispersive coupling.
    #[arg(long)]
    chi: Option<f64>,
    /// Cavity decay rate.
    #[arg(long)]
    kappa: Option<f64>,
    /// Drive amplitude.
    #[arg(long = "eps-m")]
    eps_m: Option<f64>,
    /// Cavity-drive detuning.
    #[arg(long = "delta-r", allow_hyphen_values = true)]
    delta_r: Option<f64>,
    /// Local-oscillator phase in radians.
    #[arg(long)]
    phi: Option<f64>,
    /// Qubit frequency.
    #[arg(long = "omega-q", allow_hyphen_values = true)]
    omega_q: Option<f64>,
    /// Initial cavity field as re,im.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    alpha0: Option<[f64; 2]>,
    /// Initial excited-state population.
    #[arg(long = "rho11-0")]
    rho11_0: Option<f64>,
    /// Initial coherence as re,im.
    #[arg(long = "rho12-0", value_parser = parse_pair, allow_hyphen_values = true)]
    rho12_0: Option<[f64; 2]>,
    /// Measurement duration.
    #[arg(long)]
    tm: Option<f64>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trajectories.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Rules to evaluate, e.g. E,G,K.
    #[arg(long)]
    rules: Option<String>,
    /// Itô integrator: milstein or em.
    #[arg(long)]
    scheme: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Moving-average window (bins) of the displayed current.
    #[arg(long)]
    window: Option<usize>,
    /// Trajectories whose full paths are written.
    #[arg(long = "keep-paths")]
    keep_paths: Option<usize>,
    /// Step sizes for convergence runs, e.g. 1e-3,5e-4,2.5e-4.
    #[arg(long)]
    levels: Option<String>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let cli = ConfigOverrides {
            chi: self.chi,
            kappa: self.kappa,
            eps_m: self.eps_m,
            delta_r: self.delta_r,
            phi: self.phi,
            omega_q: self.omega_q,
            alpha0: self.alpha0,
            rho11_0: self.rho11_0,
            rho12_0: self.rho12_0,
            tm: self.tm,
            dt: self.dt,
            seed: self.seed,
            trajectories: self.trajectories,
            rules: self.rules.clone(),
            scheme: self.scheme.clone(),
            out: self.out.clone(),
            window: self.window,
            keep_paths: self.keep_paths,
            levels: self.levels.as_deref().map(parse_levels).transpose()?,
            threads: self.threads,
        };
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_json_file(path)?,
            None => ConfigOverrides::default(),
        };
        let config = cli.over(file).apply(ExperimentConfig::default())?;
        config.validate()?;
        Ok(config)
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    let start = Instant::now();
    match command {
        Command::Fields(flags) => {
            let config = flags.resolve()?;
            let grid = build_rate_grid(&config.params, config.t_m, config.dt)?;
            emit_fields(&config, &grid, start.elapsed())?;
        }
        Command::Simulate(flags) => {
            let config = flags.resolve()?;
            let grid = build_rate_grid(&config.params, config.t_m, config.dt)?;
            let seed = NoiseSeed::new(config.seed, 0);
            let increments = wiener_increments(seed, grid.steps, grid.dt);
            let traj = simulate_ito_on(&grid, config.rho0, increments, Some(seed), config.scheme)
                .map_err(|e| HarnessError::for_seed(seed, e))?;
            emit_simulate(&config, &traj, start.elapsed())?;
        }
        Command::Compare(flags) => {
            let config = flags.resolve()?;
            let report = run_compare(&config)?;
            emit_compare(&report, start.elapsed())?;
        }
        Command::Convergence(flags) => {
            let config = flags.resolve()?;
            let rows = run_convergence(&config)?;
            emit_convergence(&config, &rows, start.elapsed())?;
        }
        Command::Ensemble(flags) => {
            let config = flags.resolve()?;
            let report = run_ensemble_check(&config)?;
            emit_ensemble(&config, &report, start.elapsed())?;
            println!(
                "ensemble check {}: max |z| rho11 = {:.3}, rho12 = {:.3} (threshold {})",
                if report.pass { "passed" } else { "FAILED" },
                report.max_z_rho11,
                report.max_z_rho12,
                report.threshold
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // bad arguments are configuration errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
