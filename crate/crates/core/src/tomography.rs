//! Simulated state and process tomography.
//!
//! A qubit channel is written as rho_out = sum_ij chi_ij E_i rho_in E_j^dagger
//! in the operator basis E = (I, sigma_x, -i sigma_y, sigma_z). Four inputs
//! |z>, |-z>, |x>, |y> fix chi through a 16x16 linear system.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::drive::{GateSpec, Pulse};
use crate::dynamics::{propagate_detailed, relax_excited, DecoherenceParams, Diagnostics, IntegratorSettings};
use crate::ensemble::{hop_average_detailed, HopQuadrature};
use crate::error::{Error, Result};
use crate::holonomy::IdealGate;
use crate::linalg::{c, hermitize4, pauli_x, pauli_y, pauli_z, real, Op2, Op4, C64};
use crate::state::{projection_probability, standard_state, QuantumState, StandardState};

pub const BASIS_LABELS: [&str; 4] = ["I", "X", "-iY", "Z"];

/// The fixed operator basis (I, sigma_x, -i sigma_y, sigma_z).
pub fn operator_basis() -> [Op2; 4] {
    [Op2::identity(), pauli_x(), pauli_y() * c(0.0, -1.0), pauli_z()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    pub chi: Op4,
}

impl ProcessMatrix {
    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    /// Applies the channel to a qubit density matrix.
    pub fn apply(&self, rho: &Op2) -> Op2 {
        let e = operator_basis();
        let mut out = Op2::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out += e[i] * rho * e[j].adjoint() * self.chi[(i, j)];
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ProcessMatrixJson {
    basis: Vec<String>,
    chi: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ProcessMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let chi = (0..4)
            .map(|i| (0..4).map(|j| [self.chi[(i, j)].re, self.chi[(i, j)].im]).collect())
            .collect();
        ProcessMatrixJson { basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(), chi }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProcessMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ProcessMatrixJson::deserialize(d)?;
        if raw.basis != BASIS_LABELS {
            return Err(D::Error::custom(format!("unexpected basis labels {:?}", raw.basis)));
        }
        if raw.chi.len() != 4 || raw.chi.iter().any(|r| r.len() != 4) {
            return Err(D::Error::custom("chi must be 4x4"));
        }
        let mut chi = Op4::zeros();
        for (i, row) in raw.chi.iter().enumerate() {
            for (j, [re, im]) in row.iter().enumerate() {
                chi[(i, j)] = c(*re, *im);
            }
        }
        Ok(ProcessMatrix { chi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub input: StandardState,
    /// Probabilities on (z, -z, x, -x, y, -y).
    pub projections: [f64; 6],
}

impl TomographyRecord {
    pub fn measure(input: StandardState, rho: &QuantumState) -> Self {
        Self { input, projections: StandardState::ALL.map(|s| projection_probability(rho, s)) }
    }

    /// rho_q = (T I + x sigma_x + y sigma_y + z sigma_z) / 2, with T the
    /// per-axis pair sum averaged over the three axes.
    pub fn qubit_density(&self) -> Op2 {
        let [pz, mz, px, mx, py, my] = self.projections;
        let t = (pz + mz + px + mx + py + my) / 3.0;
        (Op2::identity() * real(t)
            + pauli_x() * real(px - mx)
            + pauli_y() * real(py - my)
            + pauli_z() * real(pz - mz))
            * real(0.5)
    }
}

/// Qubit block reconstructed from the six standard projections.
pub fn state_tomography(rho: &QuantumState) -> Op2 {
    TomographyRecord::measure(StandardState::Z, rho).qubit_density()
}

/// Solves rho_out^(k) = sum_ij chi_ij E_i rho_in^(k) E_j^dagger for chi from
/// the four process inputs. `outputs` follow [`StandardState::PROCESS_INPUTS`].
pub fn reconstruct_chi(outputs: &[Op2; 4]) -> Result<Op4> {
    let e = operator_basis();
    let inputs = StandardState::PROCESS_INPUTS.map(|s| s.ket() * s.ket().adjoint());
    let mut a = DMatrix::<C64>::zeros(16, 16);
    let mut b = DVector::<C64>::zeros(16);
    for (k, rho_in) in inputs.iter().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                let term = e[i] * rho_in * e[j].adjoint();
                for r in 0..2 {
                    for s in 0..2 {
                        a[(4 * k + 2 * r + s, 4 * i + j)] = term[(r, s)];
                    }
                }
            }
        }
        for r in 0..2 {
            for s in 0..2 {
                b[4 * k + 2 * r + s] = outputs[k][(r, s)];
            }
        }
    }
    let lu = a.lu();
    if lu.determinant().norm() < 1e-12 {
        return Err(Error::DegenerateInputs);
    }
    let x = lu.solve(&b).ok_or(Error::DegenerateInputs)?;
    Ok(Op4::from_fn(|i, j| x[4 * i + j]))
}

/// Nearest positive semidefinite matrix in Frobenius norm: symmetrize, then
/// clip negative eigenvalues. The trace is left as is.
pub fn psd_project(chi_raw: &Op4) -> ProcessMatrix {
    let eig = SymmetricEigen::new(hermitize4(chi_raw));
    if eig.eigenvalues.iter().all(|&v| v >= 0.0) {
        return ProcessMatrix { chi: hermitize4(chi_raw) };
    }
    let clipped = eig.eigenvalues.map(|v| real(v.max(0.0)));
    let chi = eig.eigenvectors * Op4::from_diagonal(&clipped) * eig.eigenvectors.adjoint();
    ProcessMatrix { chi: hermitize4(&chi) }
}

/// Coefficients of U in the operator basis, U = sum_i c_i E_i.
pub fn basis_coefficients(u: &Op2) -> [C64; 4] {
    // Tr(E_i^dagger E_j) = 2 delta_ij
    operator_basis().map(|e| (e.adjoint() * u).trace() / 2.0)
}

/// Rank-one chi = c c^dagger of a unitary.
pub fn chi_ideal(u: &IdealGate) -> ProcessMatrix {
    chi_of_unitary(&u.unitary)
}

pub fn chi_of_unitary(u: &Op2) -> ProcessMatrix {
    let cv = nalgebra::Vector4::from(basis_coefficients(u));
    ProcessMatrix { chi: cv * cv.adjoint() }
}

/// Re Tr(chi_a chi_b).
pub fn process_fidelity(a: &ProcessMatrix, b: &ProcessMatrix) -> f64 {
    (a.chi * b.chi).trace().re
}

/// Spectral hopping on or off for [`simulate_process`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hopping {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessRun {
    pub process: ProcessMatrix,
    /// Worst-case extremes over all propagations.
    pub diagnostics: Diagnostics,
}

/// Final relaxed state for one input, with or without detuning averaging.
pub fn gate_output(
    input: &QuantumState,
    pulse: &Pulse,
    params: &DecoherenceParams,
    hop: Hopping,
    quad: &HopQuadrature,
    settings: &IntegratorSettings,
) -> Result<(QuantumState, Diagnostics)> {
    match hop {
        Hopping::On => hop_average_detailed(input, pulse, params, quad, settings),
        Hopping::Off => {
            let (rho, diag) = propagate_detailed(input, pulse, 0.0, params, settings)?;
            Ok((relax_excited(&rho, params), diag))
        }
    }
}

pub fn simulate_process_detailed(
    gate: &GateSpec,
    params: &DecoherenceParams,
    hop: Hopping,
    quad: &HopQuadrature,
    settings: &IntegratorSettings,
) -> Result<ProcessRun> {
    use rayon::prelude::*;

    let pulse = gate.pulse()?;
    let runs: Vec<(Op2, Diagnostics)> = StandardState::PROCESS_INPUTS
        .par_iter()
        .map(|&s| {
            let (rho, diag) = gate_output(&standard_state(s), &pulse, params, hop, quad, settings)?;
            Ok((state_tomography(&rho), diag))
        })
        .collect::<Result<_>>()?;
    let outputs = [runs[0].0, runs[1].0, runs[2].0, runs[3].0];
    let chi = reconstruct_chi(&outputs)?;
    Ok(ProcessRun {
        process: psd_project(&chi),
        diagnostics: runs.iter().map(|r| r.1).fold(Diagnostics::default(), Diagnostics::merge),
    })
}

pub fn simulate_process(
    gate: &GateSpec,
    params: &DecoherenceParams,
    hop: Hopping,
    quad: &HopQuadrature,
    settings: &IntegratorSettings,
) -> Result<ProcessMatrix> {
    Ok(simulate_process_detailed(gate, params, hop, quad, settings)?.process)
}
