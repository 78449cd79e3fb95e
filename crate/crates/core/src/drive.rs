//! Two-tone optical drive of the lambda system: rotating-frame Hamiltonian,
//! pulse envelopes and cycle timing.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real, Ket2, Op4, C64};
use crate::state::{EXCITED, MINUS_ONE, PLUS_ONE};

/// Ramp time of the optical pulses used in the reference simulations.
pub const DEFAULT_RAMP: f64 = 1.2e-9;

/// Angular frequency from a value quoted as f = omega / 2pi in Hz.
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

pub fn per_2pi(angular: f64) -> f64 {
    angular / TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    Rectangular,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseEnvelope {
    pub kind: EnvelopeKind,
    /// Seconds. Zero for rectangular pulses.
    #[serde(default)]
    pub rise: f64,
    #[serde(default)]
    pub fall: f64,
    /// When the ramps alone would overshoot the target area, let the
    /// envelope turn over before reaching its nominal peak (a square gate
    /// shorter than the rise time) instead of failing.
    #[serde(default)]
    pub allow_reduced_peak: bool,
}

impl PulseEnvelope {
    pub fn rectangular() -> Self {
        Self { kind: EnvelopeKind::Rectangular, rise: 0.0, fall: 0.0, allow_reduced_peak: false }
    }

    pub fn trapezoid(rise: f64, fall: f64) -> Self {
        Self { kind: EnvelopeKind::Trapezoid, rise, fall, allow_reduced_peak: false }
    }

    /// 1.2 ns linear on/off ramps.
    pub fn default_trapezoid() -> Self {
        Self::trapezoid(DEFAULT_RAMP, DEFAULT_RAMP)
    }

    pub fn with_reduced_peak(mut self, allow: bool) -> Self {
        self.allow_reduced_peak = allow;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.rise) || !ok(self.fall) {
            return Err(Error::InvalidParameter("ramp times must be finite and >= 0".into()));
        }
        if self.kind == EnvelopeKind::Rectangular && (self.rise != 0.0 || self.fall != 0.0) {
            return Err(Error::InvalidParameter("rectangular envelope cannot have ramps".into()));
        }
        Ok(())
    }
}

/// Which integral of the drive fixes the gate timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaConvention {
    /// integral of sqrt(Omega(t)^2 + Delta^2) dt = 2pi.
    #[default]
    GeneralizedRabi,
    /// integral of Omega(t) dt = 2pi, ignoring the detuning.
    FieldOnly,
    /// integral of Omega(t) dt = Omega T_2pi: the field area of the ideal
    /// square pulse, as when a square command of length T_2pi is smoothed
    /// by the modulator's finite rise and fall.
    MatchedSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    /// Mixing angle in [0, pi].
    pub theta: f64,
    /// Relative tone phase in [0, 2pi).
    pub phi: f64,
    /// Delta / Omega.
    pub delta: f64,
    /// Peak drive strength Omega, rad/s.
    pub omega: f64,
    pub envelope: PulseEnvelope,
    #[serde(default)]
    pub area: AreaConvention,
}

impl GateSpec {
    pub fn new(theta: f64, phi: f64, delta: f64, omega: f64, envelope: PulseEnvelope) -> Self {
        Self { theta, phi, delta, omega, envelope, area: AreaConvention::default() }
    }

    pub fn detuning(&self) -> f64 {
        self.delta * self.omega
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {}", self.omega)));
        }
        if !self.detuning().is_finite() || !self.theta.is_finite() || !self.phi.is_finite() {
            return Err(Error::InvalidParameter("non-finite gate parameter".into()));
        }
        self.envelope.validate()
    }

    pub fn cycle_time(&self) -> f64 {
        cycle_time(self.omega, self.detuning())
    }

    pub fn drive(&self) -> DriveTerms {
        DriveTerms::new(self.theta, self.phi, self.detuning())
    }

    /// Validated spec with its timing solved.
    pub fn pulse(&self) -> Result<Pulse> {
        Ok(Pulse { spec: *self, schedule: pulse_duration(self)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkBrightPair {
    pub dark: Ket2,
    pub bright: Ket2,
}

/// |d> = cos(theta/2)|-1> + sin(theta/2) e^{i phi}|+1>,
/// |b> = sin(theta/2)|-1> - cos(theta/2) e^{i phi}|+1>.
pub fn dark_bright(theta: f64, phi: f64) -> DarkBrightPair {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    DarkBrightPair {
        dark: Ket2::new(real(c), e * s),
        bright: Ket2::new(real(s), -e * c),
    }
}

/// 2pi / sqrt(Omega^2 + Delta^2).
pub fn cycle_time(omega: f64, detuning: f64) -> f64 {
    TAU / omega.hypot(detuning)
}

/// The time-independent pieces of the Hamiltonian: H(t) = a(t) C + Delta |A2><A2|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTerms {
    coupling: Op4,
    pub detuning: f64,
}

impl DriveTerms {
    pub fn new(theta: f64, phi: f64, detuning: f64) -> Self {
        let u = real((theta / 2.0).sin());
        let v = -C64::from_polar((theta / 2.0).cos(), -phi);
        let mut coupling = Op4::zeros();
        coupling[(EXCITED, MINUS_ONE)] = u * 0.5;
        coupling[(EXCITED, PLUS_ONE)] = v * 0.5;
        coupling[(MINUS_ONE, EXCITED)] = u.conj() * 0.5;
        coupling[(PLUS_ONE, EXCITED)] = v.conj() * 0.5;
        Self { coupling, detuning }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn hamiltonian(&self, amplitude: f64) -> Op4 {
        let mut h = self.coupling * real(amplitude);
        h[(EXCITED, EXCITED)] += real(self.detuning);
        h
    }
}

/// Piecewise-linear envelope: ramp up, plateau, ramp down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub rise: f64,
    pub plateau: f64,
    pub fall: f64,
    /// Highest amplitude actually reached, rad/s.
    pub peak: f64,
}

impl PulseSchedule {
    pub fn rectangular(omega: f64, duration: f64) -> Self {
        Self { rise: 0.0, plateau: duration, fall: 0.0, peak: omega }
    }

    pub fn duration(&self) -> f64 {
        self.rise + self.plateau + self.fall
    }

    /// Segment boundaries [0, end of rise, end of plateau, end].
    pub fn breakpoints(&self) -> [f64; 4] {
        let a = self.rise;
        let b = a + self.plateau;
        [0.0, a, b, b + self.fall]
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let [_, a, b, end] = self.breakpoints();
        if t < 0.0 || t > end {
            0.0
        } else if t < a {
            self.peak * t / self.rise
        } else if t <= b {
            self.peak
        } else {
            self.peak * (end - t) / self.fall
        }
    }

    /// Closed-form integral of sqrt(Omega(t)^2 + detuning^2) over the pulse.
    pub fn area(&self, detuning: f64) -> f64 {
        (self.rise + self.fall) * mean_ramp_rate(self.peak, detuning)
            + self.plateau * self.peak.hypot(detuning)
    }
}

/// Time-average of sqrt(s^2 + d^2) along a linear ramp s: 0 -> peak.
fn mean_ramp_rate(peak: f64, d: f64) -> f64 {
    let d = d.abs();
    if peak == 0.0 {
        d
    } else if d == 0.0 {
        0.5 * peak
    } else {
        0.5 * (peak.hypot(d) + d * d / peak * (peak / d).asinh())
    }
}

/// Solves the envelope timing so that the pulse area meets the target of the
/// spec's [`AreaConvention`].
pub fn pulse_duration(spec: &GateSpec) -> Result<PulseSchedule> {
    spec.validate()?;
    let omega = spec.omega;
    let (d, target) = match spec.area {
        AreaConvention::GeneralizedRabi => (spec.detuning(), TAU),
        AreaConvention::FieldOnly => (0.0, TAU),
        AreaConvention::MatchedSquare => (0.0, omega * spec.cycle_time()),
    };
    let env = spec.envelope;
    let (rise, fall) = match env.kind {
        EnvelopeKind::Rectangular => (0.0, 0.0),
        EnvelopeKind::Trapezoid => (env.rise, env.fall),
    };

    let ramp_area = (rise + fall) * mean_ramp_rate(omega, d);
    if ramp_area <= target {
        let plateau = (target - ramp_area) / omega.hypot(d);
        return Ok(PulseSchedule { rise, plateau, fall, peak: omega });
    }
    if !env.allow_reduced_peak || rise == 0.0 {
        return Err(Error::InfeasiblePulse { ramp_area });
    }

    // Gate of length g < rise: the envelope climbs at slope omega/rise for g,
    // then falls at slope omega/fall back to zero.
    let truncated = |g: f64| {
        let peak = omega * g / rise;
        PulseSchedule { rise: g, plateau: 0.0, fall: fall * g / rise, peak }
    };
    let (mut lo, mut hi) = (0.0, rise);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if truncated(mid).area(d) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(truncated(0.5 * (lo + hi)))
}

/// A gate with its timing solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub spec: GateSpec,
    pub schedule: PulseSchedule,
}

impl Pulse {
    pub fn duration(&self) -> f64 {
        self.schedule.duration()
    }

    pub fn hamiltonian_at(&self, t: f64) -> Op4 {
        self.spec.drive().hamiltonian(self.schedule.envelope(t))
    }
}

pub fn hamiltonian_at(spec: &GateSpec, t: f64) -> Result<Op4> {
    Ok(spec.pulse()?.hamiltonian_at(t))
}
