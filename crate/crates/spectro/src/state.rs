//! Pure states and initial-state preparation.

use crate::error::{Error, Result};
use num_complex::Complex64;

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state over `N` qubits.
///
/// Basis index `b` carries site `i` in bit `i` (kets read `|s₀s₁…⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn all_zero(n_qubits: usize) -> StateVector {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// `|+⟩^{⊗N}`.
    pub fn all_plus(n_qubits: usize) -> StateVector {
        let dim = 1usize << n_qubits;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector {
            n_qubits,
            amplitudes: vec![amp; dim],
        }
    }

    /// Wrap raw amplitudes, checking the L2 norm is 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<StateVector> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let state = StateVector {
            n_qubits,
            amplitudes,
        };
        if (state.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm {} is not 1",
                state.norm()
            )));
        }
        Ok(state)
    }

    /// Wrap and rescale arbitrary nonzero amplitudes to unit norm.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>) -> Result<StateVector> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(Error::InvalidArgument(
                "cannot normalize the zero vector".into(),
            ));
        }
        let scaled = amplitudes.into_iter().map(|a| a / norm).collect();
        StateVector::from_amplitudes(scaled)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Apply a single-qubit gate matrix `[[m00, m01], [m10, m11]]` at `site`.
    pub fn apply_single_qubit(&mut self, site: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        if site >= self.n_qubits {
            return Err(Error::SiteOutOfRange {
                site,
                n: self.n_qubits,
            });
        }
        let bit = 1usize << site;
        for b in 0..self.amplitudes.len() {
            if b & bit == 0 {
                let a0 = self.amplitudes[b];
                let a1 = self.amplitudes[b | bit];
                self.amplitudes[b] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[b | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }
}

/// Single-qubit gate used by state preparation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    Rx(f64),
    Ry(f64),
    Rz(f64),
}

impl Gate {
    /// 2×2 matrix, with `Rα(θ) = exp(−iθ·σα/2)`.
    pub fn matrix(self) -> Result<[[Complex64; 2]; 2]> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let m = match self {
            Gate::X => [[zero, one], [one, zero]],
            Gate::Y => [[zero, -i], [i, zero]],
            Gate::Z => [[one, zero], [zero, -one]],
            Gate::Rx(t) => {
                check_angle(t)?;
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[c * one, -i * s], [-i * s, c * one]]
            }
            Gate::Ry(t) => {
                check_angle(t)?;
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[c * one, -s * one], [s * one, c * one]]
            }
            Gate::Rz(t) => {
                check_angle(t)?;
                let half = t / 2.0;
                [
                    [Complex64::from_polar(1.0, -half), zero],
                    [zero, Complex64::from_polar(1.0, half)],
                ]
            }
        };
        Ok(m)
    }
}

fn check_angle(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "rotation angle {t} is not finite"
        )))
    }
}

/// Product base state the preparation starts from.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseState {
    AllPlus,
    AllZero,
    Custom(Vec<Complex64>),
}

/// Recipe for the initial state: a base state, an ordered list of local
/// gates, and an optional perturbation amplitude.
///
/// With `beta = None` the prepared state is `B|base⟩`, where `B` is the gate
/// sequence. With `beta = Some(β)` it is the normalized superposition
/// `(1 + β·B)|base⟩ / ‖·‖` — the weak-quench form where only a small
/// component of the excitation operator is admixed.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePrepSpec {
    pub base: BaseState,
    pub ops: Vec<(usize, Gate)>,
    pub beta: Option<f64>,
}

impl StatePrepSpec {
    pub fn new(base: BaseState) -> StatePrepSpec {
        StatePrepSpec {
            base,
            ops: Vec::new(),
            beta: None,
        }
    }

    pub fn with_op(mut self, site: usize, gate: Gate) -> StatePrepSpec {
        self.ops.push((site, gate));
        self
    }

    pub fn with_beta(mut self, beta: f64) -> StatePrepSpec {
        self.beta = Some(beta);
        self
    }
}

/// Materialize a [`StatePrepSpec`] on `n` qubits.
pub fn prepare_state(spec: &StatePrepSpec, n: usize) -> Result<StateVector> {
    let base = match &spec.base {
        BaseState::AllPlus => StateVector::all_plus(n),
        BaseState::AllZero => StateVector::all_zero(n),
        BaseState::Custom(amps) => {
            if amps.len() != 1 << n {
                return Err(Error::DimensionMismatch(format!(
                    "custom base has {} amplitudes, expected {}",
                    amps.len(),
                    1 << n
                )));
            }
            StateVector::from_unnormalized(amps.clone())?
        }
    };
    let mut quenched = base.clone();
    for &(site, gate) in &spec.ops {
        quenched.apply_single_qubit(site, gate.matrix()?)?;
    }
    match spec.beta {
        None => Ok(quenched),
        Some(beta) => {
            if !beta.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "perturbation amplitude {beta} is not finite"
                )));
            }
            let amps = base
                .amplitudes()
                .iter()
                .zip(quenched.amplitudes())
                .map(|(b, q)| b + beta * q)
                .collect();
            StateVector::from_unnormalized(amps)
        }
    }
}
