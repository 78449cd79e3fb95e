//! Sweeps over gate parameters, written as CSV tables or JSON matrices.
//!
//! Result files are deterministic functions of the configuration. Anything
//! run-specific (timestamps, version) goes to a `<out>.meta.json` sidecar
//! next to the data file, together with the config echo that reproduces it.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{angular, AreaConvention, PulseEnvelope, DEFAULT_RAMP};
use crate::dynamics::{DecoherenceParams, DephasingMode, IntegratorSettings};
use crate::ensemble::{DecoherenceLayers, HopQuadrature, Simulator, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::holonomy::{geometric_phase, ideal_unitary, NamedGate};
use crate::state::{bloch_of, projection_probability, standard_state, QuantumState, StandardState, ZERO};
use crate::tomography::{gate_output, ProcessMatrix};

/// Decoherence rates as frequencies, Hz (the angular rate divided by 2pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub gamma0_over_2pi: f64,
    pub gamma_m1_over_2pi: f64,
    pub gamma_p1_over_2pi: f64,
    pub gamma_phi_over_2pi: f64,
    pub sigma_delta_over_2pi: f64,
    pub dephasing: DephasingMode,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self::from_params(&DecoherenceParams::default())
    }
}

impl RatesConfig {
    pub fn from_params(p: &DecoherenceParams) -> Self {
        Self {
            gamma0_over_2pi: p.gamma0 / TAU,
            gamma_m1_over_2pi: p.gamma_m1 / TAU,
            gamma_p1_over_2pi: p.gamma_p1 / TAU,
            gamma_phi_over_2pi: p.gamma_phi / TAU,
            sigma_delta_over_2pi: p.sigma_delta / TAU,
            dephasing: p.dephasing,
        }
    }

    pub fn params(&self) -> DecoherenceParams {
        DecoherenceParams {
            gamma0: angular(self.gamma0_over_2pi),
            gamma_m1: angular(self.gamma_m1_over_2pi),
            gamma_p1: angular(self.gamma_p1_over_2pi),
            gamma_phi: angular(self.gamma_phi_over_2pi),
            sigma_delta: angular(self.sigma_delta_over_2pi),
            dephasing: self.dephasing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeChoice {
    Rect,
    Trap,
}

impl std::str::FromStr for EnvelopeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" => Ok(Self::Rect),
            "trap" => Ok(Self::Trap),
            _ => Err(Error::Config(format!("unknown envelope '{s}' (rect, trap)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeConfig {
    pub kind: EnvelopeChoice,
    /// Ramp times, s.
    pub rise: f64,
    pub fall: f64,
    /// Shorten the gate below the ramp time instead of failing when the
    /// ramps alone would exceed the target area.
    pub allow_reduced_peak: bool,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { kind: EnvelopeChoice::Rect, rise: DEFAULT_RAMP, fall: DEFAULT_RAMP, allow_reduced_peak: false }
    }
}

impl EnvelopeConfig {
    pub fn envelope(&self, kind: EnvelopeChoice) -> PulseEnvelope {
        match kind {
            EnvelopeChoice::Rect => PulseEnvelope::rectangular(),
            EnvelopeChoice::Trap => {
                PulseEnvelope::trapezoid(self.rise, self.fall).with_reduced_peak(self.allow_reduced_peak)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Delta / 2pi in Hz.
    Detuning,
    /// Omega / 2pi in Hz.
    Power,
    /// theta in radians.
    Theta,
    /// phi in radians.
    Phi,
    None,
}

impl SweepAxis {
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::Detuning => "detuning_over_2pi_hz",
            SweepAxis::Power => "omega_over_2pi_hz",
            SweepAxis::Theta => "theta_rad",
            SweepAxis::Phi => "phi_rad",
            SweepAxis::None => "point",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown axis '{s}' (detuning, power, theta, phi, none)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    #[serde(default)]
    pub min: f64,
    #[serde(default)]
    pub max: f64,
    #[serde(default = "one")]
    pub points: usize,
}

fn one() -> usize {
    1
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { axis: SweepAxis::None, min: 0.0, max: 0.0, points: 1 }
    }
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.max } else { self.min + k as f64 * step })
            .collect()
    }
}

fn default_omega() -> f64 {
    152e6
}

fn default_layers() -> DecoherenceLayers {
    DecoherenceLayers::Full
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn default_input() -> StandardState {
    StandardState::Z
}

/// Everything one run depends on. JSON field names match the struct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Named gate such as "X", "H", "Y(pi/2)", "Z(pi/2)". When absent the
    /// loop is given by `theta`, `phi`, `delta`.
    #[serde(default)]
    pub gate: Option<String>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    /// Delta / Omega.
    #[serde(default)]
    pub delta: f64,
    /// Peak Rabi frequency Omega / 2pi, Hz.
    #[serde(default = "default_omega")]
    pub omega_over_2pi: f64,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    /// Timing convention; commands pick their own default when absent.
    #[serde(default)]
    pub area: Option<AreaConvention>,
    #[serde(default)]
    pub decoherence: RatesConfig,
    #[serde(default = "default_layers")]
    pub layers: DecoherenceLayers,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Prepared state for rabi-scan.
    #[serde(default = "default_input")]
    pub input: StandardState,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// fidelity-sweep: also report the two-loop composite F(X) F(H).
    #[serde(default)]
    pub composite: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Reserved; the simulation is deterministic.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.omega_over_2pi.is_finite() && self.omega_over_2pi > 0.0) {
            return bad(format!("omega_over_2pi must be > 0, got {}", self.omega_over_2pi));
        }
        if ![self.theta, self.phi, self.delta].iter().all(|v| v.is_finite()) {
            return bad("theta, phi, delta must be finite".into());
        }
        if let Some(g) = &self.gate {
            g.parse::<NamedGate>()?.loop_parameters().map_err(|e| Error::Config(e.to_string()))?;
        }
        let s = &self.sweep;
        if s.points == 0 || !(s.min.is_finite() && s.max.is_finite()) || s.min > s.max {
            return bad(format!("sweep range must be non-empty: min {} max {} points {}", s.min, s.max, s.points));
        }
        if s.points > 1 && s.min == s.max {
            return bad("sweep with several points needs min < max".into());
        }
        if s.axis == SweepAxis::Power && s.min <= 0.0 {
            return bad("power sweep needs Omega/2pi > 0".into());
        }
        if self.quadrature_nodes == 0 {
            return bad("quadrature_nodes must be >= 1".into());
        }
        let e = &self.envelope;
        if !(e.rise >= 0.0 && e.fall >= 0.0 && e.rise.is_finite() && e.fall.is_finite()) {
            return bad("ramp times must be finite and >= 0".into());
        }
        self.decoherence.params().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.integrator.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn named_gate(&self) -> Result<Option<NamedGate>> {
        self.gate.as_deref().map(str::parse).transpose()
    }

    /// (theta, phi, delta) of the configured loop.
    pub fn loop_parameters(&self) -> Result<(f64, f64, f64)> {
        match self.named_gate()? {
            Some(g) => g.loop_parameters(),
            None => Ok((self.theta, self.phi, self.delta)),
        }
    }

    pub fn omega(&self) -> f64 {
        angular(self.omega_over_2pi)
    }

    pub fn simulator(&self, kind: EnvelopeChoice, area: AreaConvention) -> Result<Simulator> {
        Ok(Simulator {
            params: self.decoherence.params(),
            envelope: self.envelope.envelope(kind),
            area,
            quadrature: HopQuadrature::gauss_hermite(self.quadrature_nodes)?,
            settings: self.integrator,
        })
    }

    fn default_simulator(&self) -> Result<Simulator> {
        self.simulator(self.envelope.kind, self.area.unwrap_or_default())
    }

    fn require_axis(&self, allowed: &[SweepAxis], command: &str) -> Result<()> {
        if allowed.contains(&self.sweep.axis) {
            Ok(())
        } else {
            Err(Error::Config(format!("{command} supports axes {allowed:?}, got {:?}", self.sweep.axis)))
        }
    }
}

/// One operating point: the configured loop with the sweep value applied.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    theta: f64,
    phi: f64,
    delta: f64,
    omega: f64,
}

impl Point {
    fn at(cfg: &RunConfig, value: f64) -> Result<Self> {
        let (theta, phi, delta) = cfg.loop_parameters()?;
        let omega = cfg.omega();
        let p = Point { theta, phi, delta, omega };
        Ok(match cfg.sweep.axis {
            SweepAxis::Detuning => Point { delta: angular(value) / omega, ..p },
            SweepAxis::Power => {
                let omega = angular(value);
                Point { omega, ..p }
            }
            SweepAxis::Theta => Point { theta: value, ..p },
            SweepAxis::Phi => Point { phi: value, ..p },
            SweepAxis::None => p,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub config: RunConfig,
    pub version: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// A table with one row per axis value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        write_metadata(path, &self.metadata)
    }
}

pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_metadata(out: &Path, meta: &Metadata) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(metadata_path(out), text + "\n")?;
    Ok(())
}

fn run_sweep<F>(command: &str, cfg: &RunConfig, columns: Vec<String>, row: F) -> Result<SweepResult>
where
    F: Fn(f64, Point) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    let started = unix_now();
    let values = cfg.sweep.values();
    // indexed parallel collect keeps rows in axis order
    let rows: Vec<Vec<f64>> = values
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let axis_value = if cfg.sweep.axis == SweepAxis::None { k as f64 } else { v };
            let mut r = vec![axis_value];
            r.extend(row(v, Point::at(cfg, v)?)?);
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let mut all = vec![cfg.sweep.axis.column().to_string()];
    all.extend(columns);
    Ok(SweepResult {
        columns: all,
        rows,
        metadata: Metadata {
            command: command.into(),
            config: cfg.clone(),
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix_s: started,
            finished_unix_s: unix_now(),
        },
    })
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Final qubit state after one gate with the layer's decoherence, relaxed.
fn run_gate(sim: &Simulator, p: Point, input: &QuantumState, layers: DecoherenceLayers) -> Result<QuantumState> {
    let (params, hop) = layers.restrict(&sim.params);
    let pulse = sim.spec(p.theta, p.phi, p.delta, p.omega).pulse()?;
    Ok(gate_output(input, &pulse, &params, hop, &sim.quadrature, &sim.settings)?.0)
}

/// Difference of azimuths wrapped into [0, 2pi).
fn phase_shift(out: f64, input: f64) -> f64 {
    (out - input).rem_euclid(TAU)
}

/// Geometric phase read off the equator: |x> and |y> are rotated about z, and
/// the azimuth shift of each is averaged (as a circular mean).
pub fn cmd_phase_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.require_axis(&[SweepAxis::Detuning, SweepAxis::None], "phase-sweep")?;
    let (theta, _, _) = cfg.loop_parameters()?;
    if theta != 0.0 {
        return Err(Error::Config("phase-sweep needs a theta = 0 (Z-family) loop".into()));
    }
    let sim = cfg.default_simulator()?;
    let columns = strings(&["delta_over_omega", "gamma", "gamma_analytic", "gamma_x", "gamma_y", "bloch_length"]);
    run_sweep("phase-sweep", cfg, columns, |_, p| {
        let shift = |s: StandardState, phi_in: f64| -> Result<(f64, f64)> {
            let b = bloch_of(&run_gate(&sim, p, &standard_state(s), cfg.layers)?);
            Ok((phase_shift(b.azimuth(), phi_in), b.length()))
        };
        let (gx, lx) = shift(StandardState::X, 0.0)?;
        let (gy, ly) = shift(StandardState::Y, FRAC_PI_2)?;
        let mean = ((gx.sin() + gy.sin()).atan2(gx.cos() + gy.cos())).rem_euclid(TAU);
        Ok(vec![p.delta, mean, geometric_phase(p.delta), gx, gy, 0.5 * (lx + ly)])
    })
}

/// Process fidelity per point; with full layers every cumulative layer gets
/// its own column.
pub fn cmd_fidelity_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.require_axis(&[SweepAxis::Detuning, SweepAxis::Power, SweepAxis::None], "fidelity-sweep")?;
    let sim = cfg.default_simulator()?;
    let layers: Vec<DecoherenceLayers> = match cfg.layers {
        DecoherenceLayers::Full => DecoherenceLayers::ALL.to_vec(),
        l => vec![l],
    };
    let mut columns = strings(&["delta_over_omega", "gamma", "chi_trace"]);
    columns.extend(layers.iter().map(|l| format!("fidelity_{}", l.label())));
    if cfg.composite {
        columns.extend(strings(&["fidelity_x", "fidelity_h", "composite_x_h"]));
    }
    run_sweep("fidelity-sweep", cfg, columns, |_, p| {
        let spec = sim.spec(p.theta, p.phi, p.delta, p.omega);
        let ideal = ideal_unitary(p.theta, p.phi, p.delta);
        let evals = layers.iter().map(|&l| sim.evaluate(&spec, &ideal, l)).collect::<Result<Vec<_>>>()?;
        let mut row = vec![p.delta, ideal.gamma, evals.last().expect("at least one layer").simulated.trace()];
        row.extend(evals.iter().map(|e| e.fidelity));
        if cfg.composite {
            let fx = sim.layered_fidelity(NamedGate::X, p.omega, cfg.layers)?;
            let fh = sim.layered_fidelity(NamedGate::H, p.omega, cfg.layers)?;
            row.extend([fx, fh, fx * fh]);
        }
        Ok(row)
    })
}

/// Populations and equatorial projections after one gate, next to the
/// decoherence-free reference.
pub fn cmd_rabi_scan(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.require_axis(&[SweepAxis::Theta, SweepAxis::Phi, SweepAxis::Detuning, SweepAxis::None], "rabi-scan")?;
    let sim = cfg.default_simulator()?;
    let input = standard_state(cfg.input);
    let columns = strings(&[
        "p_z", "p_minus_z", "bloch_x", "bloch_y", "p_leak", "ref_p_z", "ref_p_minus_z", "ref_bloch_x", "ref_bloch_y",
    ]);
    run_sweep("rabi-scan", cfg, columns, |_, p| {
        let observe = |rho: &QuantumState| {
            let b = bloch_of(rho);
            [projection_probability(rho, StandardState::Z), projection_probability(rho, StandardState::MinusZ), b.x, b.y]
        };
        let out = run_gate(&sim, p, &input, cfg.layers)?;
        let reference = run_gate(&sim, p, &input, DecoherenceLayers::None)?;
        let mut row = observe(&out).to_vec();
        row.push(out.population(ZERO));
        row.extend(observe(&reference));
        Ok(row)
    })
}

/// Rectangular versus trapezoidal envelope per power. The trapezoid carries
/// the square pulse's field area unless `area` says otherwise, and may shorten
/// below its ramp time at high power.
pub fn cmd_pulse_compare(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.require_axis(&[SweepAxis::Power, SweepAxis::None], "pulse-compare")?;
    let mut cfg = cfg.clone();
    if cfg.gate.is_none() && (cfg.theta, cfg.phi, cfg.delta) == (0.0, 0.0, 0.0) {
        cfg.gate = Some(NamedGate::YHalf.to_string());
    }
    cfg.envelope.allow_reduced_peak = true;
    let area = cfg.area.unwrap_or(AreaConvention::MatchedSquare);
    let rect = cfg.simulator(EnvelopeChoice::Rect, area)?;
    let trap = cfg.simulator(EnvelopeChoice::Trap, area)?;
    let columns = strings(&["fidelity_rect", "fidelity_trap", "rect_minus_trap", "trap_peak_over_2pi_hz", "trap_duration_s"]);
    run_sweep("pulse-compare", &cfg, columns, |_, p| {
        let ideal = ideal_unitary(p.theta, p.phi, p.delta);
        let tspec = trap.spec(p.theta, p.phi, p.delta, p.omega);
        let fr = rect.evaluate(&rect.spec(p.theta, p.phi, p.delta, p.omega), &ideal, cfg.layers)?.fidelity;
        let ft = trap.evaluate(&tspec, &ideal, cfg.layers)?.fidelity;
        let schedule = tspec.pulse()?.schedule;
        Ok(vec![fr, ft, fr - ft, schedule.peak / TAU, schedule.duration()])
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub gate: String,
    pub theta: f64,
    pub phi: f64,
    pub delta: f64,
    pub omega_over_2pi: f64,
    pub layers: DecoherenceLayers,
    pub fidelity: f64,
    pub chi_trace: f64,
    pub chi_sim: ProcessMatrix,
    pub chi_ideal: ProcessMatrix,
    #[serde(skip)]
    pub metadata: Option<Metadata>,
}

impl TomographyResult {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        match &self.metadata {
            Some(m) => write_metadata(path, m),
            None => Ok(()),
        }
    }
}

pub fn cmd_tomography(cfg: &RunConfig) -> Result<TomographyResult> {
    cfg.validate()?;
    cfg.require_axis(&[SweepAxis::None], "tomography")?;
    let started = unix_now();
    let sim = cfg.default_simulator()?;
    let (theta, phi, delta) = cfg.loop_parameters()?;
    let eval = sim.evaluate(&sim.spec(theta, phi, delta, cfg.omega()), &ideal_unitary(theta, phi, delta), cfg.layers)?;
    let gate = match cfg.named_gate()? {
        Some(g) => g.to_string(),
        None => format!("loop(theta={theta}, phi={phi}, delta={delta})"),
    };
    Ok(TomographyResult {
        gate,
        theta,
        phi,
        delta,
        omega_over_2pi: cfg.omega_over_2pi,
        layers: cfg.layers,
        fidelity: eval.fidelity,
        chi_trace: eval.simulated.trace(),
        chi_sim: eval.simulated,
        chi_ideal: eval.ideal,
        metadata: Some(Metadata {
            command: "tomography".into(),
            config: cfg.clone(),
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix_s: started,
            finished_unix_s: unix_now(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn defaults_and_unknown_keys() {
        let c = RunConfig::default();
        assert_eq!(c.omega_over_2pi, 152e6);
        assert_eq!(c.layers, DecoherenceLayers::Full);
        assert_eq!(c.quadrature_nodes, 15);
        assert_eq!(c.decoherence.params(), DecoherenceParams::default());
        assert!((c.decoherence.gamma_m1_over_2pi - 8.5e6).abs() < 1e-3);
        assert!(matches!(RunConfig::from_json(r#"{"omega": 1}"#), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_json(r#"{"sweep": {"axis": "power", "points": 3, "bogus": 1}}"#), Err(Error::Config(_))));
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        for bad in [
            r#"{"omega_over_2pi": -1}"#,
            r#"{"sweep": {"axis": "detuning", "min": 1, "max": 0, "points": 3}}"#,
            r#"{"sweep": {"axis": "detuning", "min": 0, "max": 1, "points": 0}}"#,
            r#"{"sweep": {"axis": "power", "min": 0, "max": 1e8, "points": 3}}"#,
            r#"{"gate": "Q"}"#,
            r#"{"gate": "Z(0)"}"#,
            r#"{"quadrature_nodes": 0}"#,
            r#"{"decoherence": {"gamma0_over_2pi": -1}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn sweep_values_hit_both_ends() {
        let s = SweepConfig { axis: SweepAxis::Theta, min: 0.0, max: PI, points: 5 };
        let v = s.values();
        assert_eq!(v.len(), 5);
        assert_eq!((v[0], v[4]), (0.0, PI));
        assert_eq!(SweepConfig::default().values(), vec![0.0]);
    }

    #[test]
    fn phase_sweep_examples() {
        let c = cfg(r#"{"gate": "Z", "omega_over_2pi": 168e6, "layers": "none",
            "sweep": {"axis": "detuning", "min": 0, "max": 96994845.0, "points": 2}}"#);
        let r = cmd_phase_sweep(&c).unwrap();
        let g = r.column("gamma").unwrap();
        assert!((g[0] - PI).abs() < 1e-3);
        // 168 MHz / sqrt(3)
        assert!((r.column("delta_over_omega").unwrap()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        assert!((g[1] - FRAC_PI_2).abs() < 1e-3);
        assert!(matches!(cmd_phase_sweep(&cfg(r#"{"gate": "X"}"#)), Err(Error::Config(_))));
    }

    #[test]
    fn rabi_scan_theta_transfer() {
        let c = cfg(r#"{"layers": "none", "sweep": {"axis": "theta", "min": 0, "max": 3.141592653589793, "points": 3}}"#);
        let r = cmd_rabi_scan(&c).unwrap();
        let pm = r.column("p_minus_z").unwrap();
        assert!(pm[0] < 1e-6 && pm[2] < 1e-6);
        assert!((pm[1] - 1.0).abs() < 1e-6);
        assert_eq!(r.column("ref_p_minus_z").unwrap(), pm);
    }

    #[test]
    fn rabi_scan_phi_winds_twice() {
        // X-type loop with azimuth phi maps |x> to azimuth 2 phi
        let c = cfg(r#"{"theta": 1.5707963267948966, "layers": "none", "input": "x",
            "sweep": {"axis": "phi", "min": 0, "max": 0.7, "points": 3}}"#);
        let r = cmd_rabi_scan(&c).unwrap();
        for (phi, (x, y)) in r.column("phi_rad").unwrap().iter().zip(r.column("bloch_x").unwrap().iter().zip(r.column("bloch_y").unwrap())) {
            assert!((x - (2.0 * phi).cos()).abs() < 1e-6 && (y - (2.0 * phi).sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn fidelity_sweep_layer_columns_and_composite() {
        let c = cfg(r#"{"gate": "X", "composite": true, "quadrature_nodes": 5,
            "sweep": {"axis": "power", "min": 152e6, "max": 152e6, "points": 1}}"#);
        let r = cmd_fidelity_sweep(&c).unwrap();
        for l in DecoherenceLayers::ALL {
            assert!(r.column(&format!("fidelity_{}", l.label())).is_some());
        }
        let row = &r.rows[0];
        let f = |n: &str| r.column(n).unwrap()[0];
        assert!((f("fidelity_none") - 1.0).abs() < 1e-6);
        assert!((f("composite_x_h") - f("fidelity_x") * f("fidelity_h")).abs() < 1e-15);
        assert!((f("fidelity_x") - f("fidelity_full")).abs() < 1e-12);
        assert!(row.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn pulse_compare_ideal_rectangular() {
        let c = cfg(r#"{"layers": "none", "sweep": {"axis": "power", "min": 100e6, "max": 1e9, "points": 3}}"#);
        let r = cmd_pulse_compare(&c).unwrap();
        assert!(r.column("fidelity_rect").unwrap().iter().all(|f| *f > 1.0 - 1e-6));
        assert_eq!(r.metadata.config.gate.as_deref(), Some("Y(pi/2)"));
    }

    #[test]
    fn tomography_of_x() {
        let r = cmd_tomography(&cfg(r#"{"gate": "X", "layers": "none"}"#)).unwrap();
        assert!((r.chi_sim.chi[(1, 1)].re - 1.0).abs() < 1e-6);
        assert!(r.fidelity > 1.0 - 1e-6);
        let back: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back["chi_sim"]["basis"][2], "-iY");
    }

    #[test]
    fn csv_is_deterministic_and_metadata_round_trips() {
        let c = cfg(r#"{"gate": "Z", "layers": "full", "quadrature_nodes": 3,
            "sweep": {"axis": "detuning", "min": -5e7, "max": 5e7, "points": 3}}"#);
        let a = cmd_phase_sweep(&c).unwrap();
        let b = cmd_phase_sweep(&c).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert!(a.to_csv().unwrap().starts_with("detuning_over_2pi_hz,delta_over_omega,gamma,"));

        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("z.csv");
        a.write(&out).unwrap();
        let meta: Metadata = serde_json::from_str(&fs::read_to_string(metadata_path(&out)).unwrap()).unwrap();
        assert_eq!(meta, a.metadata);
        let again = cmd_phase_sweep(&meta.config).unwrap();
        assert_eq!(again.to_csv().unwrap(), fs::read_to_string(&out).unwrap());
    }

    #[test]
    fn axis_restrictions() {
        let theta = cfg(r#"{"sweep": {"axis": "theta", "min": 0, "max": 1, "points": 2}}"#);
        assert!(matches!(cmd_fidelity_sweep(&theta), Err(Error::Config(_))));
        assert!(matches!(cmd_pulse_compare(&theta), Err(Error::Config(_))));
        assert!(matches!(cmd_tomography(&theta), Err(Error::Config(_))));
        assert_eq!("power".parse::<SweepAxis>().unwrap(), SweepAxis::Power);
        assert!("mass".parse::<SweepAxis>().is_err());
    }
}
