use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lambda_holonomy::ensemble::DecoherenceLayers;
use lambda_holonomy::experiments::{
    cmd_fidelity_sweep, cmd_phase_sweep, cmd_pulse_compare, cmd_rabi_scan, cmd_tomography, EnvelopeChoice,
    RunConfig, SweepAxis, SweepResult,
};
use lambda_holonomy::state::StandardState;
use lambda_holonomy::Error;

/// Simulate single-loop holonomic gates in an optically driven lambda system.
#[derive(Parser)]
#[command(name = "holonomy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometric phase of Z-family loops versus detuning.
    PhaseSweep(Common),
    /// Process fidelity versus detuning or power, per decoherence layer.
    FidelitySweep {
        #[command(flatten)]
        common: Common,
        /// Also report the two-loop composite F(X) F(H).
        #[arg(long)]
        composite: bool,
    },
    /// Populations and projections after one gate versus theta, phi or detuning.
    RabiScan {
        #[command(flatten)]
        common: Common,
        /// Prepared input state: z, -z, x, -x, y, -y.
        #[arg(long, allow_hyphen_values = true)]
        input: Option<StandardState>,
    },
    /// Rectangular versus trapezoidal pulses versus power.
    PulseCompare(Common),
    /// Process matrix of a single gate.
    Tomography(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (CSV, or JSON for tomography); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decoherence layers: none, t1, t1tphi, full.
    #[arg(long)]
    layers: Option<DecoherenceLayers>,
    /// Pulse envelope: rect or trap.
    #[arg(long)]
    envelope: Option<EnvelopeChoice>,
    /// Peak Rabi frequency Omega/2pi in MHz.
    #[arg(long)]
    omega_mhz: Option<f64>,
    /// Gate name, e.g. X, H, Y(pi/2), Z(pi/2).
    #[arg(long, allow_hyphen_values = true)]
    gate: Option<String>,
    /// Sweep axis: detuning, power, theta, phi, none.
    #[arg(long)]
    axis: Option<SweepAxis>,
    /// Number of sweep points.
    #[arg(long)]
    points: Option<usize>,
    /// Sweep start: MHz for detuning and power, radians for theta and phi.
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    /// Sweep end, same units as --min.
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(l) = self.layers {
            cfg.layers = l;
        }
        if let Some(e) = self.envelope {
            cfg.envelope.kind = e;
        }
        if let Some(mhz) = self.omega_mhz {
            cfg.omega_over_2pi = mhz * 1e6;
        }
        if let Some(g) = &self.gate {
            cfg.gate = Some(g.clone());
        }
        if let Some(a) = self.axis {
            cfg.sweep.axis = a;
        }
        if let Some(p) = self.points {
            cfg.sweep.points = p;
        }
        let scale = match cfg.sweep.axis {
            SweepAxis::Detuning | SweepAxis::Power => 1e6,
            _ => 1.0,
        };
        if let Some(v) = self.min {
            cfg.sweep.min = v * scale;
        }
        if let Some(v) = self.max {
            cfg.sweep.max = v * scale;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(result: SweepResult, cfg: &RunConfig) -> Result<(), Error> {
    match &cfg.output {
        Some(path) => result.write(path),
        None => {
            print!("{}", result.to_csv()?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::PhaseSweep(c) => {
            let cfg = c.config()?;
            emit(cmd_phase_sweep(&cfg)?, &cfg)
        }
        Command::FidelitySweep { common, composite } => {
            let mut cfg = common.config()?;
            cfg.composite |= composite;
            emit(cmd_fidelity_sweep(&cfg)?, &cfg)
        }
        Command::RabiScan { common, input } => {
            let mut cfg = common.config()?;
            if let Some(s) = input {
                cfg.input = s;
            }
            emit(cmd_rabi_scan(&cfg)?, &cfg)
        }
        Command::PulseCompare(c) => {
            let cfg = c.config()?;
            emit(cmd_pulse_compare(&cfg)?, &cfg)
        }
        Command::Tomography(c) => {
            let cfg = c.config()?;
            let result = cmd_tomography(&cfg)?;
            match &cfg.output {
                Some(path) => result.write(path),
                None => {
                    print!("{}", result.to_json()?);
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
