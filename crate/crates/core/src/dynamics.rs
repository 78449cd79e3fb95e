//! Lindblad propagation of the driven four-level system.
//!
//! Jump channels, all originating in |A2>:
//! decay to |0>, |-1>, |+1> at Gamma_0, Gamma_-1, Gamma_+1 and pure
//! dephasing of |A2> through O = sqrt(rate) |A2><A2|.
//!
//! Integration is classical fixed-step RK4 over each linear segment of the
//! envelope separately, so the step never straddles a kink.

use serde::{Deserialize, Serialize};

use crate::drive::{angular, cycle_time, DriveTerms, EnvelopeKind, GateSpec, Pulse, PulseSchedule};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_error4, hermitize4, ket_bra4, min_eigenvalue4, real, Op4, C64};
use crate::state::{QuantumState, EXCITED, MINUS_ONE, PLUS_ONE, TRACE_TOL, ZERO};

pub const HERMITICITY_BUDGET: f64 = 1e-10;
pub const POSITIVITY_BUDGET: f64 = 1e-8;
/// Residual |A2> population below which relaxation stops.
pub const RELAX_THRESHOLD: f64 = 1e-9;
/// Upper bound on relaxation time, in excited-state lifetimes.
pub const RELAX_LIFETIMES: f64 = 20.0;

/// How the orbital dephasing parameter maps onto the |A2><A2| channel rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingMode {
    /// Channel rate 2 Gamma_phi: |A2>-ground coherences lose Gamma_phi.
    #[default]
    TwiceOrbital,
    /// Channel rate Gamma_phi.
    Orbital,
}

impl DephasingMode {
    pub const ALL: [DephasingMode; 2] = [DephasingMode::TwiceOrbital, DephasingMode::Orbital];

    pub fn factor(self) -> f64 {
        match self {
            DephasingMode::TwiceOrbital => 2.0,
            DephasingMode::Orbital => 1.0,
        }
    }
}

/// Environment rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams {
    /// |A2> -> |0>
    pub gamma0: f64,
    /// |A2> -> |-1>
    pub gamma_m1: f64,
    /// |A2> -> |+1>
    pub gamma_p1: f64,
    /// Orbital dephasing of |A2>.
    pub gamma_phi: f64,
    /// Standard deviation of the quasi-static detuning offset.
    pub sigma_delta: f64,
    #[serde(default)]
    pub dephasing: DephasingMode,
}

impl Default for DecoherenceParams {
    /// Measured rates: (1.6, 8.5, 4.3, 8.8) MHz and 15 MHz hopping, all /2pi.
    fn default() -> Self {
        Self {
            gamma0: angular(1.6e6),
            gamma_m1: angular(8.5e6),
            gamma_p1: angular(4.3e6),
            gamma_phi: angular(8.8e6),
            sigma_delta: angular(15e6),
            dephasing: DephasingMode::default(),
        }
    }
}

impl DecoherenceParams {
    pub fn coherent() -> Self {
        Self {
            gamma0: 0.0,
            gamma_m1: 0.0,
            gamma_p1: 0.0,
            gamma_phi: 0.0,
            sigma_delta: 0.0,
            dephasing: DephasingMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.gamma0, self.gamma_m1, self.gamma_p1, self.gamma_phi, self.sigma_delta];
        if rates.iter().all(|r| r.is_finite() && *r >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("decoherence rates must be finite and >= 0".into()))
        }
    }

    pub fn decay_total(&self) -> f64 {
        self.gamma0 + self.gamma_m1 + self.gamma_p1
    }

    pub fn dephasing_rate(&self) -> f64 {
        self.dephasing.factor() * self.gamma_phi
    }

    pub fn without_hopping(mut self) -> Self {
        self.sigma_delta = 0.0;
        self
    }

    pub fn jump_operators(&self) -> Vec<Op4> {
        [
            (ZERO, EXCITED, self.gamma0),
            (MINUS_ONE, EXCITED, self.gamma_m1),
            (PLUS_ONE, EXCITED, self.gamma_p1),
            (EXCITED, EXCITED, self.dephasing_rate()),
        ]
        .into_iter()
        .filter(|(_, _, rate)| *rate > 0.0)
        .map(|(to, from, rate)| ket_bra4(to, from) * real(rate.sqrt()))
        .collect()
    }
}

/// Dissipator with the anticommutator term precomputed.
#[derive(Debug, Clone)]
struct Lindbladian {
    jumps: Vec<Op4>,
    half_loss: Op4,
}

impl Lindbladian {
    fn new(params: &DecoherenceParams) -> Self {
        let jumps = params.jump_operators();
        let half_loss = jumps.iter().map(|o| o.adjoint() * o).sum::<Op4>() * real(0.5);
        Self { jumps, half_loss }
    }

    fn rhs(&self, rho: &Op4, h: &Op4) -> Op4 {
        let minus_i = C64::new(0.0, -1.0);
        let mut out = (h * rho - rho * h) * minus_i;
        for o in &self.jumps {
            out += o * rho * o.adjoint();
        }
        out - self.half_loss * rho - rho * self.half_loss
    }
}

/// -i[H, rho] + sum_k (O_k rho O_k^dag - 1/2 {O_k^dag O_k, rho}).
pub fn lindblad_rhs(rho: &QuantumState, h: &Op4, params: &DecoherenceParams) -> Op4 {
    Lindbladian::new(params).rhs(rho.matrix(), h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Upper bound on the step, seconds.
    pub dt_max: f64,
    /// Minimum steps per generalized Rabi cycle (at least 200).
    pub steps_per_cycle: usize,
    /// Minimum steps per envelope ramp (at least 20).
    pub steps_per_ramp: usize,
    /// Positivity is checked every this many steps and at the end.
    pub check_every: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { dt_max: 50e-12, steps_per_cycle: 400, steps_per_ramp: 20, check_every: 25 }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if self.dt_max.is_nan() || self.dt_max <= 0.0 || self.steps_per_cycle < 200 || self.steps_per_ramp < 20 {
            return Err(Error::InvalidParameter(
                "integrator needs dt_max > 0, >= 200 steps per cycle, >= 20 per ramp".into(),
            ));
        }
        Ok(())
    }

    /// Same bounds with every step halved.
    pub fn refined(self) -> Self {
        Self {
            dt_max: self.dt_max / 2.0,
            steps_per_cycle: self.steps_per_cycle * 2,
            steps_per_ramp: self.steps_per_ramp * 2,
            check_every: self.check_every * 2,
        }
    }
}

/// Extremes observed along one propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub max_excited: f64,
    pub min_eigenvalue: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            steps: 0,
            max_excited: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_trace_drift: 0.0,
            max_hermiticity_error: 0.0,
        }
    }
}

impl Diagnostics {
    /// Combined extremes of two runs.
    pub fn merge(self, other: Self) -> Self {
        Self {
            steps: self.steps + other.steps,
            max_excited: self.max_excited.max(other.max_excited),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
            max_trace_drift: self.max_trace_drift.max(other.max_trace_drift),
            max_hermiticity_error: self.max_hermiticity_error.max(other.max_hermiticity_error),
        }
    }

    fn observe_positivity(&mut self, rho: &Op4, t: f64) -> Result<()> {
        let min = min_eigenvalue4(rho);
        self.min_eigenvalue = self.min_eigenvalue.min(min);
        if min < -POSITIVITY_BUDGET {
            return Err(Error::Physicality { what: "min eigenvalue", value: min, time: t });
        }
        Ok(())
    }
}

struct Evolution<'a> {
    drive: DriveTerms,
    schedule: PulseSchedule,
    lindblad: Lindbladian,
    settings: &'a IntegratorSettings,
    h_max: f64,
}

impl<'a> Evolution<'a> {
    fn new(
        drive: DriveTerms,
        schedule: PulseSchedule,
        params: &DecoherenceParams,
        settings: &'a IntegratorSettings,
        nominal_cycle: f64,
    ) -> Result<Self> {
        settings.validate()?;
        params.validate()?;
        let actual_cycle = cycle_time(schedule.peak, drive.detuning);
        let mut h_max = settings
            .dt_max
            .min(nominal_cycle / settings.steps_per_cycle as f64)
            .min(actual_cycle / settings.steps_per_cycle as f64);
        for ramp in [schedule.rise, schedule.fall] {
            if ramp > 0.0 {
                h_max = h_max.min(ramp / settings.steps_per_ramp as f64);
            }
        }
        Ok(Self { drive, schedule, lindblad: Lindbladian::new(params), settings, h_max })
    }

    fn derivative(&self, t: f64, rho: &Op4) -> Op4 {
        let h = self.drive.hamiltonian(self.schedule.envelope(t));
        self.lindblad.rhs(rho, &h)
    }

    /// Integrates over [t0, t1], splitting at envelope breakpoints.
    fn run(&self, rho: &mut Op4, t0: f64, t1: f64, diag: &mut Diagnostics) -> Result<()> {
        let mut cuts = vec![t0];
        cuts.extend(self.schedule.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
        cuts.push(t1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let n = ((b - a) / self.h_max).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for k in 0..n {
                let t = a + k as f64 * h;
                self.step(rho, t, h, b);
                diag.steps += 1;
                let herm = hermiticity_error4(rho);
                diag.max_hermiticity_error = diag.max_hermiticity_error.max(herm);
                if herm > HERMITICITY_BUDGET {
                    return Err(Error::Physicality { what: "hermiticity error", value: herm, time: t + h });
                }
                *rho = hermitize4(rho);
                let drift = (rho.trace().re - 1.0).abs();
                diag.max_trace_drift = diag.max_trace_drift.max(drift);
                if drift > TRACE_TOL {
                    return Err(Error::IntegratorAccuracy { drift });
                }
                diag.max_excited = diag.max_excited.max(rho[(EXCITED, EXCITED)].re);
                if self.settings.check_every > 0 && diag.steps.is_multiple_of(self.settings.check_every) {
                    diag.observe_positivity(rho, t + h)?;
                }
            }
        }
        diag.observe_positivity(rho, t1)
    }

    /// One RK4 step; stage times are clamped to the segment end `b` so that
    /// rounding never samples the envelope past a discontinuity.
    fn step(&self, rho: &mut Op4, t: f64, h: f64, b: f64) {
        let half = real(h / 2.0);
        let k1 = self.derivative(t, rho);
        let k2 = self.derivative((t + h / 2.0).min(b), &(*rho + k1 * half));
        let k3 = self.derivative((t + h / 2.0).min(b), &(*rho + k2 * half));
        let k4 = self.derivative((t + h).min(b), &(*rho + k3 * real(h)));
        *rho += (k1 + (k2 + k3) * real(2.0) + k4) * real(h / 6.0);
    }
}

fn finish(mut rho: Op4) -> Result<QuantumState> {
    rho = hermitize4(&rho);
    let tr = rho.trace().re;
    let drift = (tr - 1.0).abs();
    if drift > TRACE_TOL {
        return Err(Error::IntegratorAccuracy { drift });
    }
    Ok(QuantumState::from_trusted(rho * real(1.0 / tr)))
}

/// Propagates through one pulse whose timing is fixed by `pulse`, with the
/// actual detuning shifted by `offset` (rad/s).
pub fn propagate_detailed(
    rho0: &QuantumState,
    pulse: &Pulse,
    offset: f64,
    params: &DecoherenceParams,
    settings: &IntegratorSettings,
) -> Result<(QuantumState, Diagnostics)> {
    let drive = pulse.spec.drive().with_detuning(pulse.spec.detuning() + offset);
    let evo = Evolution::new(drive, pulse.schedule, params, settings, pulse.spec.cycle_time())?;
    let mut rho = *rho0.matrix();
    let mut diag = Diagnostics { max_excited: rho0.excited_population(), ..Default::default() };
    evo.run(&mut rho, 0.0, pulse.duration(), &mut diag)?;
    Ok((finish(rho)?, diag))
}

pub fn propagate(
    rho0: &QuantumState,
    spec: &GateSpec,
    params: &DecoherenceParams,
    settings: &IntegratorSettings,
) -> Result<QuantumState> {
    Ok(propagate_detailed(rho0, &spec.pulse()?, 0.0, params, settings)?.0)
}

/// Time the free decay runs for: until p_A2 < 1e-9 or 20 lifetimes.
pub fn relaxation_time(excited: f64, params: &DecoherenceParams) -> f64 {
    let rate = params.decay_total();
    if excited < RELAX_THRESHOLD || rate == 0.0 {
        return 0.0;
    }
    ((excited / RELAX_THRESHOLD).ln() / rate).min(RELAX_LIFETIMES / rate)
}

/// Free decay with the drive off, solved in closed form: |A2> empties into
/// the ground levels by branching ratio, |A2> coherences decay at half the
/// total loss rate, ground-state coherences are untouched.
pub fn relax_excited(rho: &QuantumState, params: &DecoherenceParams) -> QuantumState {
    let t = relaxation_time(rho.excited_population(), params);
    if t == 0.0 {
        return *rho;
    }
    let rate = params.decay_total();
    let p = rho.excited_population();
    let survive = (-rate * t).exp();
    let coherence = (-(rate + params.dephasing_rate()) * t / 2.0).exp();

    let mut out = *rho.matrix();
    for k in [MINUS_ONE, PLUS_ONE, ZERO] {
        out[(k, EXCITED)] *= coherence;
        out[(EXCITED, k)] *= coherence;
    }
    out[(EXCITED, EXCITED)] = real(p * survive);
    let gained = p * (1.0 - survive) / rate;
    out[(MINUS_ONE, MINUS_ONE)] += real(gained * params.gamma_m1);
    out[(PLUS_ONE, PLUS_ONE)] += real(gained * params.gamma_p1);
    out[(ZERO, ZERO)] += real(gained * params.gamma0);
    QuantumState::from_trusted(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub p_a2: Vec<f64>,
    /// Populations of (|-1>, |+1>, |A2>, |0>) at each time.
    pub populations: Vec<[f64; 4]>,
}

/// Samples the populations under a continuous drive: the envelope ramps up
/// as configured and then stays on until `t_end`.
pub fn excited_population_trace(
    rho0: &QuantumState,
    spec: &GateSpec,
    params: &DecoherenceParams,
    t_end: f64,
    n_points: usize,
    settings: &IntegratorSettings,
) -> Result<PopulationTrace> {
    spec.validate()?;
    if t_end.is_nan() || t_end <= 0.0 || n_points < 2 {
        return Err(Error::InvalidParameter("need t_end > 0 and at least two points".into()));
    }
    let rise = match spec.envelope.kind {
        EnvelopeKind::Rectangular => 0.0,
        EnvelopeKind::Trapezoid => spec.envelope.rise.min(t_end),
    };
    let schedule = PulseSchedule { rise, plateau: t_end - rise, fall: 0.0, peak: spec.omega };
    let evo = Evolution::new(spec.drive(), schedule, params, settings, spec.cycle_time())?;

    let mut rho = *rho0.matrix();
    let mut diag = Diagnostics::default();
    let mut trace = PopulationTrace { times: vec![], p_a2: vec![], populations: vec![] };
    let mut record = |rho: &Op4, t: f64| {
        let pops = [0, 1, 2, 3].map(|k| rho[(k, k)].re);
        trace.times.push(t);
        trace.p_a2.push(pops[EXCITED]);
        trace.populations.push(pops);
    };
    record(&rho, 0.0);
    let dt = t_end / (n_points - 1) as f64;
    for k in 1..n_points {
        let (a, b) = ((k - 1) as f64 * dt, if k == n_points - 1 { t_end } else { k as f64 * dt });
        evo.run(&mut rho, a, b, &mut diag)?;
        record(&rho, b);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeReport {
    /// 1 / (Gamma_0 + Gamma_-1 + Gamma_+1); `None` when nothing decays.
    pub t1: Option<f64>,
    /// Pure-dephasing time of the |A2>-ground coherence, 2 / channel rate.
    pub t_phi: Option<f64>,
}

pub fn lifetime_consistency(params: &DecoherenceParams) -> LifetimeReport {
    let inv = |r: f64| if r > 0.0 { Some(1.0 / r) } else { None };
    LifetimeReport { t1: inv(params.decay_total()), t_phi: inv(params.dephasing_rate() / 2.0) }
}

/// Picks the dephasing mode whose implied T_phi lies within `rel_tol` of
/// `target_t_phi`, preferring the closest.
pub fn calibrate_dephasing(
    params: &DecoherenceParams,
    target_t_phi: f64,
    rel_tol: f64,
) -> Option<DephasingMode> {
    DephasingMode::ALL
        .into_iter()
        .filter_map(|mode| {
            let t = lifetime_consistency(&DecoherenceParams { dephasing: mode, ..*params }).t_phi?;
            let err = (t - target_t_phi).abs() / target_t_phi;
            (err <= rel_tol).then_some((mode, err))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(mode, _)| mode)
}
