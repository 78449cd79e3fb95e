//! Decoherence-free holonomic gate algebra.
//!
//! A cyclic excitation of the bright state through |A2> returns it with the
//! phase gamma while the dark state is left untouched, so the qubit sees
//! U = |d><d| + e^{i gamma}|b><b|, a rotation by gamma about
//! n = (sin theta cos phi, sin theta sin phi, cos theta).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::drive::{dark_bright, GateSpec, PulseEnvelope};
use crate::error::{Error, Result};
use crate::linalg::{c, pauli_x, pauli_y, pauli_z, real, Op2, C64};

/// gamma = pi (1 - delta / sqrt(1 + delta^2)), delta = Delta / Omega.
pub fn geometric_phase(delta: f64) -> f64 {
    PI * (1.0 - delta / delta.hypot(1.0))
}

/// Inverse of [`geometric_phase`]. The phase is strictly decreasing in
/// delta, so the branch is unique.
pub fn detuning_for_phase(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < TAU) {
        return Err(Error::PhaseOutOfRange { gamma });
    }
    let x = 1.0 - gamma / PI;
    Ok(x / (1.0 - x * x).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGate {
    pub unitary: Op2,
    pub axis: [f64; 3],
    pub gamma: f64,
}

impl IdealGate {
    /// e^{i gamma/2} e^{-i (gamma/2) n.sigma}, built from the axis-angle form.
    pub fn axis_angle_unitary(&self) -> Op2 {
        let [nx, ny, nz] = self.axis;
        let n_sigma = pauli_x() * real(nx) + pauli_y() * real(ny) + pauli_z() * real(nz);
        let half = self.gamma / 2.0;
        let rot = Op2::identity() * real(half.cos()) - n_sigma * c(0.0, half.sin());
        rot * C64::from_polar(1.0, half)
    }
}

pub fn ideal_unitary(theta: f64, phi: f64, delta: f64) -> IdealGate {
    let pair = dark_bright(theta, phi);
    let gamma = geometric_phase(delta);
    let unitary = pair.dark * pair.dark.adjoint()
        + pair.bright * pair.bright.adjoint() * C64::from_polar(1.0, gamma);
    IdealGate {
        unitary,
        axis: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        gamma,
    }
}

/// Loop parameters (theta, phi, delta) whose ideal holonomy equals `u` up to
/// global phase. Fails for the identity, which needs infinite detuning.
pub fn loop_parameters_for(u: &Op2) -> Result<(f64, f64, f64)> {
    let det = u.determinant();
    if det.norm() < 1e-12 {
        return Err(Error::InvalidParameter("operator is singular".into()));
    }
    let mut v = u / det.sqrt();
    if (v.trace() / 2.0).re < 0.0 {
        v = -v;
    }
    let cos_half = (v.trace() / 2.0).re.clamp(-1.0, 1.0);
    // i tr(V sigma_k) / 2 = sin(gamma/2) n_k
    let comps: Vec<f64> =
        [pauli_x(), pauli_y(), pauli_z()].iter().map(|p| (c(0.0, 0.5) * (v * p).trace()).re).collect();
    let sin_half = comps.iter().map(|x| x * x).sum::<f64>().sqrt();
    if sin_half < 1e-12 {
        return Err(Error::InvalidParameter("identity cannot be realized in a finite cycle".into()));
    }
    let gamma = 2.0 * sin_half.atan2(cos_half);
    let theta = (comps[2] / sin_half).clamp(-1.0, 1.0).acos();
    let phi = comps[1].atan2(comps[0]).rem_euclid(TAU);
    Ok((theta, phi, detuning_for_phase(gamma)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NamedGate {
    X,
    Y,
    /// Phase gate diag(1, e^{i gamma}).
    Z(f64),
    H,
    XHalf,
    XMinusHalf,
    YHalf,
    YMinusHalf,
}

impl NamedGate {
    pub const FIXED: [NamedGate; 7] = [
        NamedGate::X,
        NamedGate::Y,
        NamedGate::H,
        NamedGate::XHalf,
        NamedGate::XMinusHalf,
        NamedGate::YHalf,
        NamedGate::YMinusHalf,
    ];

    /// (theta, phi, delta) from the gate table.
    pub fn loop_parameters(self) -> Result<(f64, f64, f64)> {
        let third = 1.0 / 3f64.sqrt();
        Ok(match self {
            NamedGate::X => (FRAC_PI_2, 0.0, 0.0),
            NamedGate::Y => (FRAC_PI_2, FRAC_PI_2, 0.0),
            NamedGate::Z(gamma) => (0.0, 0.0, detuning_for_phase(gamma)?),
            NamedGate::H => (3.0 * PI / 4.0, 0.0, 0.0),
            NamedGate::XHalf => (FRAC_PI_2, 0.0, third),
            NamedGate::XMinusHalf => (FRAC_PI_2, 0.0, -third),
            NamedGate::YHalf => (FRAC_PI_2, FRAC_PI_2, third),
            NamedGate::YMinusHalf => (FRAC_PI_2, FRAC_PI_2, -third),
        })
    }

    /// The matrix as listed in the gate table.
    pub fn table_matrix(self) -> Op2 {
        let s = FRAC_1_SQRT_2;
        let i = c(0.0, 1.0);
        let one = real(1.0);
        let zero = real(0.0);
        let plus = c(0.5, 0.5);
        let minus = c(0.5, -0.5);
        match self {
            NamedGate::X => Op2::new(zero, one, one, zero),
            NamedGate::Y => Op2::new(zero, -i, i, zero),
            NamedGate::Z(gamma) => Op2::new(one, zero, zero, C64::from_polar(1.0, gamma)),
            NamedGate::H => Op2::new(real(-s), real(s), real(s), real(s)),
            NamedGate::XHalf => Op2::new(one, -i, -i, one) * plus,
            NamedGate::XMinusHalf => Op2::new(one, i, i, one) * minus,
            NamedGate::YHalf => Op2::new(one, -one, one, one) * plus,
            NamedGate::YMinusHalf => Op2::new(one, one, -one, one) * minus,
        }
    }

    pub fn ideal(self) -> Result<IdealGate> {
        let (theta, phi, delta) = self.loop_parameters()?;
        Ok(ideal_unitary(theta, phi, delta))
    }
}

impl std::fmt::Display for NamedGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NamedGate::X => write!(f, "X"),
            NamedGate::Y => write!(f, "Y"),
            NamedGate::Z(g) => write!(f, "Z({g})"),
            NamedGate::H => write!(f, "H"),
            NamedGate::XHalf => write!(f, "X(pi/2)"),
            NamedGate::XMinusHalf => write!(f, "X(-pi/2)"),
            NamedGate::YHalf => write!(f, "Y(pi/2)"),
            NamedGate::YMinusHalf => write!(f, "Y(-pi/2)"),
        }
    }
}

/// Accepts the display names plus the short forms `X/2`, `-X/2`, `Y/2`,
/// `-Y/2`, and `Z` for Z(pi). Phases may be written as `pi`, `pi/k`, `k*pi`
/// or plain radians.
impl std::str::FromStr for NamedGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Ok(match t.as_str() {
            "X" => NamedGate::X,
            "Y" => NamedGate::Y,
            "H" => NamedGate::H,
            "Z" => NamedGate::Z(PI),
            "X/2" | "X(pi/2)" => NamedGate::XHalf,
            "-X/2" | "X(-pi/2)" => NamedGate::XMinusHalf,
            "Y/2" | "Y(pi/2)" => NamedGate::YHalf,
            "-Y/2" | "Y(-pi/2)" => NamedGate::YMinusHalf,
            _ => {
                let arg = t
                    .strip_prefix("Z(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Config(format!("unknown gate '{s}'")))?;
                NamedGate::Z(parse_angle(arg).ok_or_else(|| Error::Config(format!("bad phase in '{s}'")))?)
            }
        })
    }
}

fn parse_angle(s: &str) -> Option<f64> {
    if let Some(k) = s.strip_suffix("*pi") {
        return Some(k.parse::<f64>().ok()? * PI);
    }
    if s == "pi" {
        return Some(PI);
    }
    if let Some(k) = s.strip_prefix("pi/") {
        return Some(PI / k.parse::<f64>().ok()?);
    }
    s.parse().ok()
}

pub fn named_gate_spec(g: NamedGate, omega: f64, envelope: PulseEnvelope) -> Result<GateSpec> {
    let (theta, phi, delta) = g.loop_parameters()?;
    let spec = GateSpec::new(theta, phi, delta, omega, envelope);
    spec.validate()?;
    Ok(spec)
}

/// Geometric phase two ways: from the closed form, and as half the solid
/// angle 2pi(1 - cos alpha) swept by the bright state's precession cone,
/// cos alpha = delta / sqrt(1 + delta^2). Magnitudes only; the orientation
/// sign of the loop is not adjudicated.
pub fn solid_angle_check(delta: f64) -> (f64, f64) {
    let cos_alpha = delta / delta.hypot(1.0);
    let solid_angle = TAU * (1.0 - cos_alpha);
    (geometric_phase(delta), solid_angle / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary2, phase_min_distance};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn phase_examples() {
        assert!((geometric_phase(0.0) - PI).abs() < 1e-15);
        let third = 1.0 / 3f64.sqrt();
        assert!((geometric_phase(third) - FRAC_PI_2).abs() < 1e-15);
        assert!((geometric_phase(-third) - 3.0 * FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn gate_names_round_trip() {
        for g in NamedGate::FIXED.into_iter().chain([NamedGate::Z(PI), NamedGate::Z(0.25)]) {
            assert_eq!(g.to_string().parse::<NamedGate>().unwrap(), g);
        }
        assert_eq!("Z".parse::<NamedGate>().unwrap(), NamedGate::Z(PI));
        assert_eq!("Z(pi/2)".parse::<NamedGate>().unwrap(), NamedGate::Z(FRAC_PI_2));
        assert_eq!("Z(1.5*pi)".parse::<NamedGate>().unwrap(), NamedGate::Z(1.5 * PI));
        assert_eq!("-Y/2".parse::<NamedGate>().unwrap(), NamedGate::YMinusHalf);
        assert!(matches!("Q".parse::<NamedGate>(), Err(Error::Config(_))));
        assert!("Z(abc)".parse::<NamedGate>().is_err());
    }

    #[test]
    fn inverse_phase() {
        assert_eq!(detuning_for_phase(PI).unwrap(), 0.0);
        let d = detuning_for_phase(FRAC_PI_2).unwrap();
        assert!((d - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((geometric_phase(d) - FRAC_PI_2).abs() < 1e-15);
        assert!(detuning_for_phase(0.0).is_err());
        assert!(detuning_for_phase(TAU).is_err());
        assert!(named_gate_spec(NamedGate::Z(7.0), 1.0, PulseEnvelope::rectangular()).is_err());
    }

    #[test]
    fn table_gates_match_holonomy() {
        for g in NamedGate::FIXED.into_iter().chain([NamedGate::Z(PI), NamedGate::Z(FRAC_PI_4)]) {
            let ideal = g.ideal().unwrap();
            let d = phase_min_distance(&ideal.unitary, &g.table_matrix());
            assert!(d < 1e-12, "{g}: {d}");
        }
        // the X(pi/2) entry matches exactly, not just up to phase
        let xh = NamedGate::XHalf.ideal().unwrap().unitary;
        assert!(crate::linalg::max_abs_diff2(&xh, &NamedGate::XHalf.table_matrix()) < 1e-15);
    }

    #[test]
    fn y_gate_parameters() {
        let spec = named_gate_spec(NamedGate::Y, 1e9, PulseEnvelope::rectangular()).unwrap();
        assert_eq!((spec.theta, spec.phi, spec.delta), (FRAC_PI_2, FRAC_PI_2, 0.0));
        let spec = named_gate_spec(NamedGate::Z(PI), 1e9, PulseEnvelope::rectangular()).unwrap();
        assert_eq!((spec.theta, spec.delta), (0.0, 0.0));
    }

    #[test]
    fn solid_angle_examples() {
        let (a, b) = solid_angle_check(0.0);
        assert!((a - PI).abs() < 1e-15 && (b - PI).abs() < 1e-15);
        let (a, b) = solid_angle_check(1.0 / 3f64.sqrt());
        assert!((a - FRAC_PI_2).abs() < 1e-15 && (b - FRAC_PI_2).abs() < 1e-15);
        let (a, b) = solid_angle_check(1e9);
        assert!(a < 1e-15 && b < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn ideal_is_unitary_and_matches_axis_angle(theta in 0.0..PI, phi in 0.0..TAU, delta in -5.0..5.0f64) {
            let g = ideal_unitary(theta, phi, delta);
            prop_assert!(is_unitary2(&g.unitary));
            prop_assert!(crate::linalg::max_abs_diff2(&(g.unitary.adjoint() * g.unitary), &Op2::identity()) < 1e-12);
            prop_assert!(phase_min_distance(&g.unitary, &g.axis_angle_unitary()) < 1e-12);
        }

        #[test]
        fn phases_are_complementary(delta in -1e3..1e3f64) {
            prop_assert!((geometric_phase(delta) + geometric_phase(-delta) - TAU).abs() < 1e-12);
            let (a, b) = solid_angle_check(delta);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn resonant_gates_are_involutions_and_swap_invariant(theta in 0.0..PI, phi in 0.0..TAU) {
            let u = ideal_unitary(theta, phi, 0.0).unitary;
            prop_assert!(phase_min_distance(&(u * u), &Op2::identity()) < 1e-12);
            let swapped = ideal_unitary(theta + PI, phi, 0.0).unitary;
            prop_assert!(phase_min_distance(&u, &swapped) < 1e-12);
        }

        #[test]
        fn loop_parameters_round_trip(theta in 0.05..3.1f64, phi in 0.0..TAU, delta in -3.0..3.0f64) {
            let u = ideal_unitary(theta, phi, delta).unitary * C64::from_polar(1.0, 0.37);
            let (t, p, d) = loop_parameters_for(&u).unwrap();
            prop_assert!(phase_min_distance(&ideal_unitary(t, p, d).unitary, &u) < 1e-9);
        }
    }
}
