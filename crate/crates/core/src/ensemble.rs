//! Quasi-static spectral hopping and layered decoherence.
//!
//! The excited-state energy jitters from shot to shot with a Gaussian
//! spread sigma_delta. Within one pulse the offset is frozen, so the
//! averaged output is a Gauss-Hermite weighted mixture of single runs.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{AreaConvention, GateSpec, Pulse, PulseEnvelope};
use crate::dynamics::{propagate_detailed, relax_excited, DecoherenceParams, Diagnostics, IntegratorSettings};
use crate::error::{Error, Result};
use crate::holonomy::{named_gate_spec, IdealGate, NamedGate};
use crate::linalg::{real, Op4};
use crate::state::QuantumState;
use crate::tomography::{chi_ideal, process_fidelity, simulate_process_detailed, Hopping, ProcessMatrix};

pub const DEFAULT_NODES: usize = 15;

/// Gauss-Hermite rule for a standard normal variable. Nodes are in units of
/// sigma; [`HopQuadrature::offsets`] scales them to detuning offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopQuadrature {
    pub n_nodes: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Default for HopQuadrature {
    fn default() -> Self {
        Self::gauss_hermite(DEFAULT_NODES).expect("default node count is valid")
    }
}

impl HopQuadrature {
    /// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
    /// probabilists' Hermite recurrence, weights the squared first
    /// eigenvector components.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
        }
        let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        // enforce the exact mirror symmetry of the rule
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n {
            let m = n - 1 - k;
            nodes[k] = 0.5 * (pairs[k].0 - pairs[m].0);
            weights[k] = 0.5 * (pairs[k].1 + pairs[m].1);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { n_nodes: n, nodes, weights })
    }

    /// Detuning offsets in rad/s for spread `sigma`.
    pub fn offsets(&self, sigma: f64) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(move |x| x * sigma)
    }

    /// Copy with node order reversed (and so every offset negated).
    pub fn reversed(&self) -> Self {
        Self {
            n_nodes: self.n_nodes,
            nodes: self.nodes.iter().rev().copied().collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }
}

/// Propagate-then-relax, averaged over the hop distribution. The pulse timing
/// stays fixed at the intended detuning.
pub fn hop_average_detailed(
    rho0: &QuantumState,
    pulse: &Pulse,
    params: &DecoherenceParams,
    quad: &HopQuadrature,
    settings: &IntegratorSettings,
) -> Result<(QuantumState, Diagnostics)> {
    params.validate()?;
    let single = |offset: f64| -> Result<(QuantumState, Diagnostics)> {
        let (rho, diag) = propagate_detailed(rho0, pulse, offset, params, settings)?;
        Ok((relax_excited(&rho, params), diag))
    };
    if params.sigma_delta == 0.0 {
        return single(0.0);
    }
    let offsets: Vec<f64> = quad.offsets(params.sigma_delta).collect();
    let runs: Vec<(QuantumState, Diagnostics)> = offsets.par_iter().map(|&o| single(o)).collect::<Result<_>>()?;

    // fixed summation order, independent of thread scheduling
    let mut rho = Op4::zeros();
    let mut diag = Diagnostics::default();
    for (w, (state, d)) in quad.weights.iter().zip(&runs) {
        rho += state.matrix() * real(*w);
        diag = diag.merge(*d);
    }
    Ok((QuantumState::from_trusted(rho), diag))
}

pub fn hop_average(
    rho0: &QuantumState,
    spec: &GateSpec,
    params: &DecoherenceParams,
    quad: &HopQuadrature,
    settings: &IntegratorSettings,
) -> Result<QuantumState> {
    Ok(hop_average_detailed(rho0, &spec.pulse()?, params, quad, settings)?.0)
}

/// Decoherence switched on cumulatively: decay, then dephasing, then hopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoherenceLayers {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "t1")]
    T1Only,
    #[serde(rename = "t1tphi")]
    T1AndTphi,
    #[serde(rename = "full")]
    Full,
}

impl DecoherenceLayers {
    pub const ALL: [Self; 4] = [Self::None, Self::T1Only, Self::T1AndTphi, Self::Full];

    pub fn label(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::T1Only => "t1",
            Self::T1AndTphi => "t1tphi",
            Self::Full => "full",
        }
    }

    /// The subset of `base` active in this layer, and whether hopping is on.
    pub fn restrict(self, base: &DecoherenceParams) -> (DecoherenceParams, Hopping) {
        let off = DecoherenceParams { gamma_phi: 0.0, sigma_delta: 0.0, ..*base };
        match self {
            Self::None => (DecoherenceParams { dephasing: base.dephasing, ..DecoherenceParams::coherent() }, Hopping::Off),
            Self::T1Only => (off, Hopping::Off),
            Self::T1AndTphi => (DecoherenceParams { sigma_delta: 0.0, ..*base }, Hopping::Off),
            Self::Full => (*base, Hopping::On),
        }
    }
}

impl std::str::FromStr for DecoherenceLayers {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown layers '{s}' (none, t1, t1tphi, full)")))
    }
}

/// Everything a fidelity evaluation needs besides the gate itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulator {
    pub params: DecoherenceParams,
    pub envelope: PulseEnvelope,
    pub area: AreaConvention,
    pub quadrature: HopQuadrature,
    pub settings: IntegratorSettings,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            params: DecoherenceParams::default(),
            envelope: PulseEnvelope::rectangular(),
            area: AreaConvention::default(),
            quadrature: HopQuadrature::default(),
            settings: IntegratorSettings::default(),
        }
    }
}

/// Simulated process with its ideal target and their overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateEvaluation {
    pub simulated: ProcessMatrix,
    pub ideal: ProcessMatrix,
    pub fidelity: f64,
    pub diagnostics: Diagnostics,
}

impl Simulator {
    pub fn with_envelope(mut self, envelope: PulseEnvelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn spec(&self, theta: f64, phi: f64, delta: f64, omega: f64) -> GateSpec {
        GateSpec { area: self.area, ..GateSpec::new(theta, phi, delta, omega, self.envelope) }
    }

    pub fn named_spec(&self, gate: NamedGate, omega: f64) -> Result<GateSpec> {
        Ok(GateSpec { area: self.area, ..named_gate_spec(gate, omega, self.envelope)? })
    }

    pub fn evaluate(&self, spec: &GateSpec, ideal: &IdealGate, layers: DecoherenceLayers) -> Result<GateEvaluation> {
        let (params, hop) = layers.restrict(&self.params);
        let run = simulate_process_detailed(spec, &params, hop, &self.quadrature, &self.settings)?;
        let ideal = chi_ideal(ideal);
        Ok(GateEvaluation {
            simulated: run.process,
            ideal,
            fidelity: process_fidelity(&run.process, &ideal),
            diagnostics: run.diagnostics,
        })
    }

    pub fn evaluate_named(&self, gate: NamedGate, omega: f64, layers: DecoherenceLayers) -> Result<GateEvaluation> {
        self.evaluate(&self.named_spec(gate, omega)?, &gate.ideal()?, layers)
    }

    pub fn layered_fidelity(&self, gate: NamedGate, omega: f64, layers: DecoherenceLayers) -> Result<f64> {
        Ok(self.evaluate_named(gate, omega, layers)?.fidelity)
    }
}

/// Fidelity of a named gate with default parameters and a rectangular pulse.
pub fn layered_fidelity(gate: NamedGate, omega: f64, layers: DecoherenceLayers) -> Result<f64> {
    Simulator::default().layered_fidelity(gate, omega, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::angular;
    use crate::holonomy::ideal_unitary;
    use crate::linalg::{max_abs_diff4, min_eigenvalue4};
    use crate::state::{standard_state, StandardState};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn quadrature_reproduces_gaussian_moments() {
        for n in [1, 2, 5, 15, 31] {
            let q = HopQuadrature::gauss_hermite(n).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            // exact for polynomials up to degree 2n-1: E[x^2k] = (2k-1)!!
            let mut double_fact = 1.0;
            for k in 0..n.min(8) {
                let moment: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * x.powi(2 * k as i32)).sum();
                assert!((moment - double_fact).abs() < 1e-9 * double_fact, "n={n} k={k}");
                let odd: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * x.powi(2 * k as i32 + 1)).sum();
                assert!(odd.abs() < 1e-9 * double_fact.max(1.0));
                double_fact *= (2 * k + 1) as f64;
            }
            for k in 0..n {
                assert_eq!(q.nodes[k], -q.nodes[n - 1 - k]);
            }
        }
        assert!(HopQuadrature::gauss_hermite(0).is_err());
        let two = HopQuadrature::gauss_hermite(2).unwrap();
        assert!((two.nodes[1] - 1.0).abs() < 1e-14 && (two.weights[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gaussian_expectation_of_cosine() {
        // E[cos(a x)] = exp(-a^2/2) for a standard normal x
        let q = HopQuadrature::default();
        for a in [0.1, 0.5, 1.0] {
            let e: f64 = q.nodes.iter().zip(&q.weights).map(|(x, w)| w * (a * x).cos()).sum();
            assert!((e - (-a * a / 2.0f64).exp()).abs() < 1e-12);
        }
    }

    fn z_spec(omega_mhz: f64) -> GateSpec {
        named_gate_spec(NamedGate::Z(PI), angular(omega_mhz * 1e6), PulseEnvelope::rectangular()).unwrap()
    }

    #[test]
    fn zero_spread_matches_single_run() {
        let spec = z_spec(100.0);
        let params = DecoherenceParams { sigma_delta: 0.0, ..Default::default() };
        let rho0 = standard_state(StandardState::X);
        let settings = IntegratorSettings::default();
        let avg = hop_average(&rho0, &spec, &params, &HopQuadrature::default(), &settings).unwrap();
        let (single, _) = propagate_detailed(&rho0, &spec.pulse().unwrap(), 0.0, &params, &settings).unwrap();
        assert_eq!(avg, relax_excited(&single, &params));
    }

    #[test]
    fn hopping_lowers_coherent_fidelity() {
        let sim = Simulator { params: DecoherenceParams { sigma_delta: angular(15e6), ..DecoherenceParams::coherent() }, ..Default::default() };
        let spec = z_spec(60.0);
        let ideal = NamedGate::Z(PI).ideal().unwrap();
        let none = sim.evaluate(&spec, &ideal, DecoherenceLayers::T1AndTphi).unwrap().fidelity;
        let hop = sim.evaluate(&spec, &ideal, DecoherenceLayers::Full).unwrap().fidelity;
        assert!(none > 1.0 - 1e-6);
        assert!(hop < none - 1e-4);
    }

    #[test]
    fn averaged_state_is_physical_and_order_independent() {
        let spec = z_spec(60.0);
        let params = DecoherenceParams::default();
        let rho0 = standard_state(StandardState::Y);
        let settings = IntegratorSettings::default();
        let q = HopQuadrature::default();
        let a = hop_average(&rho0, &spec, &params, &q, &settings).unwrap();
        let b = hop_average(&rho0, &spec, &params, &q.reversed(), &settings).unwrap();
        assert!(max_abs_diff4(a.matrix(), b.matrix()) < 1e-12);
        assert!((a.matrix().trace().re - 1.0).abs() < 1e-9);
        assert!(min_eigenvalue4(a.matrix()) > -1e-8);
        assert!(QuantumState::new(*a.matrix()).is_ok());
    }

    #[test]
    fn quadrature_converged_at_default_nodes() {
        let mut sim = Simulator::default();
        let f15 = sim.layered_fidelity(NamedGate::Z(PI), angular(60e6), DecoherenceLayers::Full).unwrap();
        sim.quadrature = HopQuadrature::gauss_hermite(31).unwrap();
        let f31 = sim.layered_fidelity(NamedGate::Z(PI), angular(60e6), DecoherenceLayers::Full).unwrap();
        assert!((f15 - f31).abs() <= 1e-6, "{f15} vs {f31}");
    }

    #[test]
    fn ideal_layer_is_exact_for_named_gates() {
        for g in NamedGate::FIXED.into_iter().chain([NamedGate::Z(PI), NamedGate::Z(1.0)]) {
            let f = layered_fidelity(g, angular(150e6), DecoherenceLayers::None).unwrap();
            assert!(f >= 1.0 - 1e-6, "{g}: {f}");
        }
    }

    #[test]
    fn layers_order_and_power_trend() {
        let sim = Simulator::default();
        let z = NamedGate::Z(PI);
        let at = |mhz: f64, l| sim.layered_fidelity(z, angular(mhz * 1e6), l).unwrap();
        for mhz in [50.0, 150.0, 400.0] {
            let f: Vec<f64> = DecoherenceLayers::ALL.iter().map(|&l| at(mhz, l)).collect();
            assert!(f.windows(2).all(|w| w[0] >= w[1]), "{mhz} MHz: {f:?}");
        }
        assert!(at(300.0, DecoherenceLayers::Full) > at(75.0, DecoherenceLayers::Full));
    }

    #[test]
    fn layers_parse_and_restrict() {
        for l in DecoherenceLayers::ALL {
            assert_eq!(l.label().parse::<DecoherenceLayers>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{}\"", l.label()));
        }
        assert!(matches!("T1".parse::<DecoherenceLayers>(), Err(Error::Config(_))));
        let base = DecoherenceParams::default();
        let (t1, hop) = DecoherenceLayers::T1Only.restrict(&base);
        assert_eq!(hop, Hopping::Off);
        assert_eq!((t1.gamma_phi, t1.sigma_delta, t1.gamma0), (0.0, 0.0, base.gamma0));
        assert_eq!(DecoherenceLayers::Full.restrict(&base), (base, Hopping::On));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn coherent_random_gates_match_ideal(theta in 0.0..PI, phi in 0.0..TAU, delta in -1.5..1.5f64) {
            let sim = Simulator::default();
            let spec = sim.spec(theta, phi, delta, angular(150e6));
            let f = sim.evaluate(&spec, &ideal_unitary(theta, phi, delta), DecoherenceLayers::None).unwrap().fidelity;
            prop_assert!(f >= 1.0 - 1e-6);
        }
    }
}
