//! Four-level state space and the qubit subspace geometry.
//!
//! Basis order is fixed as (|-1>, |+1>, |A2>, |0>). The qubit lives in the
//! top-left 2x2 block with Bloch-sphere poles |z> = |-1> and |-z> = |+1>.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_error4, min_eigenvalue4, real, Ket2, Ket4, Op2, Op4};

pub const MINUS_ONE: usize = 0;
pub const PLUS_ONE: usize = 1;
pub const EXCITED: usize = 2;
pub const ZERO: usize = 3;

/// Construction tolerance for Hermiticity and trace.
pub const STATE_TOL: f64 = 1e-12;
/// Trace tolerance accepted on states coming out of integration.
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    rho: Op4,
}

impl QuantumState {
    /// Validates Hermiticity, unit trace and positivity before accepting `rho`.
    pub fn new(rho: Op4) -> Result<Self> {
        let herm = hermiticity_error4(&rho);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = min_eigenvalue4(&rho);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix the caller has already checked (integrator output).
    pub(crate) fn from_trusted(rho: Op4) -> Self {
        Self { rho }
    }

    pub fn pure(psi: &Ket4) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { rho: psi * psi.adjoint() })
    }

    /// Population entirely in `level`.
    pub fn basis(level: usize) -> Self {
        let mut rho = Op4::zeros();
        rho[(level, level)] = real(1.0);
        Self { rho }
    }

    pub fn matrix(&self) -> &Op4 {
        &self.rho
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    pub fn excited_population(&self) -> f64 {
        self.population(EXCITED)
    }

    pub fn qubit_block(&self) -> Op2 {
        self.rho.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn qubit_trace(&self) -> f64 {
        self.population(MINUS_ONE) + self.population(PLUS_ONE)
    }

    /// Overlap <psi|rho|psi> with a qubit vector embedded in the ground block.
    pub fn qubit_overlap(&self, psi: &Ket2) -> f64 {
        (psi.adjoint() * self.qubit_block() * psi)[(0, 0)].re
    }

    /// Convex combination sum_k w_k rho_k, summed in the given order.
    pub fn mixture<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a QuantumState)>,
    {
        let mut acc = Op4::zeros();
        for (w, s) in parts {
            acc += s.rho * real(w);
        }
        Self { rho: acc }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Azimuth atan2(y, x) in (-pi, pi].
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StandardState {
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "-z")]
    MinusZ,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "-y")]
    MinusY,
}

impl StandardState {
    pub const ALL: [StandardState; 6] = [
        StandardState::Z,
        StandardState::MinusZ,
        StandardState::X,
        StandardState::MinusX,
        StandardState::Y,
        StandardState::MinusY,
    ];

    /// The four inputs used for process tomography.
    pub const PROCESS_INPUTS: [StandardState; 4] =
        [StandardState::Z, StandardState::MinusZ, StandardState::X, StandardState::Y];

    pub fn ket(self) -> Ket2 {
        let s = FRAC_1_SQRT_2;
        match self {
            StandardState::Z => Ket2::new(real(1.0), real(0.0)),
            StandardState::MinusZ => Ket2::new(real(0.0), real(1.0)),
            StandardState::X => Ket2::new(real(s), real(s)),
            StandardState::MinusX => Ket2::new(real(s), real(-s)),
            StandardState::Y => Ket2::new(real(s), c(0.0, s)),
            StandardState::MinusY => Ket2::new(real(s), c(0.0, -s)),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            StandardState::Z => StandardState::MinusZ,
            StandardState::MinusZ => StandardState::Z,
            StandardState::X => StandardState::MinusX,
            StandardState::MinusX => StandardState::X,
            StandardState::Y => StandardState::MinusY,
            StandardState::MinusY => StandardState::Y,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StandardState::Z => "z",
            StandardState::MinusZ => "-z",
            StandardState::X => "x",
            StandardState::MinusX => "-x",
            StandardState::Y => "y",
            StandardState::MinusY => "-y",
        }
    }
}

impl std::str::FromStr for StandardState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StandardState::ALL
            .into_iter()
            .find(|st| st.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown standard state '{s}'")))
    }
}

pub fn embed_ket(psi: &Ket2) -> Ket4 {
    Ket4::new(psi[0], psi[1], real(0.0), real(0.0))
}

/// |psi><psi| on the qubit block, nothing in |A2> or |0>.
pub fn embed_qubit_state(psi: &Ket2) -> Result<QuantumState> {
    QuantumState::pure(&embed_ket(psi))
}

pub fn standard_state(s: StandardState) -> QuantumState {
    QuantumState::from_trusted(embed_ket(&s.ket()) * embed_ket(&s.ket()).adjoint())
}

pub fn bloch_of(rho: &QuantumState) -> BlochVector {
    let m = rho.matrix();
    let coh = m[(MINUS_ONE, PLUS_ONE)];
    BlochVector {
        x: 2.0 * coh.re,
        y: -2.0 * coh.im,
        z: m[(MINUS_ONE, MINUS_ONE)].re - m[(PLUS_ONE, PLUS_ONE)].re,
    }
}

pub fn projection_probability(rho: &QuantumState, s: StandardState) -> f64 {
    rho.qubit_overlap(&s.ket())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff4;
    use proptest::prelude::*;

    #[test]
    fn embed_basis_and_superpositions() {
        let z = embed_qubit_state(&StandardState::Z.ket()).unwrap();
        assert_eq!(z.matrix()[(0, 0)], real(1.0));
        assert!(max_abs_diff4(z.matrix(), &QuantumState::basis(MINUS_ONE).rho) < 1e-15);

        let x = embed_qubit_state(&StandardState::X.ket()).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((x.matrix()[(i, j)] - real(0.5)).norm() < 1e-15);
        }

        let y = embed_qubit_state(&StandardState::Y.ket()).unwrap();
        assert!((y.matrix()[(0, 1)] - c(0.0, -0.5)).norm() < 1e-15);
        assert!((y.matrix()[(1, 0)] - c(0.0, 0.5)).norm() < 1e-15);
        assert!((y.matrix()[(1, 1)] - real(0.5)).norm() < 1e-15);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let psi = Ket2::new(real(1.0), real(0.1));
        assert!(matches!(embed_qubit_state(&psi), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn bloch_of_standard_states() {
        let expected = [
            (StandardState::Z, [0.0, 0.0, 1.0]),
            (StandardState::MinusZ, [0.0, 0.0, -1.0]),
            (StandardState::X, [1.0, 0.0, 0.0]),
            (StandardState::MinusX, [-1.0, 0.0, 0.0]),
            (StandardState::Y, [0.0, 1.0, 0.0]),
            (StandardState::MinusY, [0.0, -1.0, 0.0]),
        ];
        for (s, [x, y, z]) in expected {
            let b = bloch_of(&standard_state(s));
            assert!((b.x - x).abs() < 1e-12 && (b.y - y).abs() < 1e-12 && (b.z - z).abs() < 1e-12, "{s:?}");
        }
        let mixed = QuantumState::mixture([
            (0.5, &standard_state(StandardState::Z)),
            (0.5, &standard_state(StandardState::MinusZ)),
        ]);
        assert!(bloch_of(&mixed).length() < 1e-15);
    }

    #[test]
    fn projections() {
        let z = standard_state(StandardState::Z);
        assert!((projection_probability(&z, StandardState::Z) - 1.0).abs() < 1e-15);
        assert!((projection_probability(&z, StandardState::X) - 0.5).abs() < 1e-15);

        // 0.3 of the population leaked into |0>
        let leaked = QuantumState::mixture([(0.7, &z), (0.3, &QuantumState::basis(ZERO))]);
        assert!(QuantumState::new(*leaked.matrix()).is_ok());
        let sum = projection_probability(&leaked, StandardState::Z)
            + projection_probability(&leaked, StandardState::MinusZ);
        assert!((sum - 0.7).abs() < 1e-15);
    }

    #[test]
    fn standard_states_are_orthonormal_pairs() {
        for s in StandardState::ALL {
            assert!((s.ket().norm() - 1.0).abs() < 1e-15);
            assert!(s.ket().dotc(&s.opposite().ket()).norm() < 1e-15);
            assert_eq!(s.label().parse::<StandardState>().unwrap(), s);
        }
    }

    #[test]
    fn invalid_states_rejected() {
        let mut m = Op4::zeros();
        m[(0, 0)] = real(1.2);
        m[(1, 1)] = real(-0.2);
        assert!(QuantumState::new(m).is_err());
        m[(0, 1)] = c(0.0, 0.1);
        assert!(QuantumState::new(m).is_err());
    }

    fn qubit_ket() -> impl Strategy<Value = Ket2> {
        (0.0..std::f64::consts::PI, 0.0..2.0 * std::f64::consts::PI).prop_map(|(t, p)| {
            Ket2::new(real((t / 2.0).cos()), C64::from_polar((t / 2.0).sin(), p))
        })
    }

    use crate::linalg::C64;

    proptest! {
        #[test]
        fn opposite_projections_sum_to_qubit_trace(psi in qubit_ket(), leak in 0.0..0.5f64) {
            let pure = embed_qubit_state(&psi).unwrap();
            prop_assert!(min_eigenvalue4(pure.matrix()) > -1e-14);
            let rho = QuantumState::mixture([(1.0 - leak, &pure), (leak, &QuantumState::basis(ZERO))]);
            for s in [StandardState::Z, StandardState::X, StandardState::Y] {
                let sum = projection_probability(&rho, s) + projection_probability(&rho, s.opposite());
                prop_assert!((sum - rho.qubit_trace()).abs() < 1e-12);
            }
            let b = bloch_of(&rho);
            prop_assert!(b.length() <= rho.qubit_trace() + 1e-9);
        }
    }
}
