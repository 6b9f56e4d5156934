//! Depolarizing noise: the global analytic model, the per-gate local
//! density-matrix model, decay-constant fitting, and rescaling mitigation.
//!
//! Global depolarizing acting alongside `e^{−iHt}` rescales traceless
//! expectations by `Λ(t)^{−1} = e^{−λt}`, so the ideal value is recovered by
//! multiplying the noisy one by `e^{λt}` — at the cost of amplified
//! variance. The decay constant is calibrated from identity-equivalent
//! `(U(δt)U†(δt))^m` circuits, whose expectation decays as `Λ(2mδt)^{−1}`,
//! making the fit robust to state-preparation and measurement offsets.

use crate::error::{Error, Result};
use crate::estimate::RawSignal;
use crate::evolve::{Engine, TrotterPlan};
use crate::pauli::{PauliString, PauliSum};
use crate::state::StateVector;
use ndarray::Array2;
use num_complex::Complex64;
use std::io::Write;

/// Density-matrix simulation cap (4^N scaling).
pub const DENSITY_CAP: usize = 10;

/// Mixed state over `N` qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    m: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Result<DensityMatrix> {
        if psi.n_qubits() > DENSITY_CAP {
            return Err(Error::ResourceCap {
                n: psi.n_qubits(),
                cap: DENSITY_CAP,
            });
        }
        let dim = psi.dim();
        let amps = psi.amplitudes();
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        for a in 0..dim {
            for b in 0..dim {
                m[[a, b]] = amps[a] * amps[b].conj();
            }
        }
        Ok(DensityMatrix {
            n_qubits: psi.n_qubits(),
            m,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|a| self.m[[a, a]]).sum()
    }

    pub fn max_hermiticity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim() {
            for b in a..self.dim() {
                worst = worst.max((self.m[[a, b]] - self.m[[b, a]].conj()).norm());
            }
        }
        worst
    }

    /// `Tr(ρP)`, real for Hermitian inputs.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let masks = p.masks();
        let x = masks.x_mask as usize;
        let yph = masks.y_phase();
        let mut acc = Complex64::new(0.0, 0.0);
        // Tr(ρP) = Σ_a ρ[a, a⊕x]·ph(a) with ph(a) = i^{n_y}(−1)^{a·z}.
        for a in 0..self.dim() {
            acc += self.m[[a, a ^ x]] * masks.z_sign(a);
        }
        acc *= yph;
        debug_assert!(acc.im.abs() < 1e-9, "density expectation not real: {acc}");
        acc.re
    }

    /// `Tr(ρO) = Σ_l α_l Tr(ρP_l)`.
    pub fn expectation(&self, o: &PauliSum) -> Result<f64> {
        if o.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} qubits vs density matrix on {}",
                o.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(o.terms()
            .iter()
            .map(|(c, s)| {
                if s.is_identity() {
                    *c
                } else {
                    c * self.pauli_expectation(s)
                }
            })
            .sum())
    }

    /// Conjugate by the Pauli rotation `e^{−iφP}`:
    /// `ρ ← c²ρ + s²·PρP + ics·(ρP − Pρ)` with `c = cos φ`, `s = sin φ`.
    pub fn rotate(&mut self, phi: f64, p: &PauliString) {
        let masks = p.masks();
        if masks.x_mask == 0 && masks.z_mask == 0 {
            // Identity generator: a pure global phase, no effect on ρ.
            return;
        }
        let (c, s) = (phi.cos(), phi.sin());
        let dim = self.dim();
        let x = masks.x_mask as usize;
        let ph = |b: usize| masks.y_phase() * masks.z_sign(b);
        // A = Pρ: A[a, b] = ph(a⊕x)·ρ[a⊕x, b].
        let mut left = Array2::<Complex64>::zeros((dim, dim));
        for a in 0..dim {
            let f = ph(a ^ x);
            for b in 0..dim {
                left[[a, b]] = f * self.m[[a ^ x, b]];
            }
        }
        let (c2, s2) = (c * c, s * s);
        let ics = Complex64::new(0.0, c * s);
        for a in 0..dim {
            for b in 0..dim {
                // PρP = (Pρ)P and ρP = (Pρ)† for Hermitian ρ, P.
                let prp = left[[a, b ^ x]] * ph(b);
                let rp = left[[b, a]].conj();
                self.m[[a, b]] = c2 * self.m[[a, b]] + s2 * prp + ics * (rp - left[[a, b]]);
            }
        }
    }

    /// Single-qubit depolarizing channel
    /// `ρ ← (1−p)ρ + (p/3)(XρX + YρY + ZρZ)` on qubit `q`, applied in one
    /// pass: same-bit blocks mix diagonally, cross-bit blocks shrink by
    /// `1 − 4p/3`.
    pub fn depolarize_qubit(&mut self, q: usize, p: f64) {
        let bit = 1usize << q;
        let dim = self.dim();
        let keep = 1.0 - 2.0 * p / 3.0;
        let swap = 2.0 * p / 3.0;
        let off = 1.0 - 4.0 * p / 3.0;
        for a in 0..dim {
            if a & bit != 0 {
                continue;
            }
            for b in 0..dim {
                if b & bit != 0 {
                    continue;
                }
                let (a1, b1) = (a | bit, b | bit);
                let m00 = self.m[[a, b]];
                let m11 = self.m[[a1, b1]];
                self.m[[a, b]] = keep * m00 + swap * m11;
                self.m[[a1, b1]] = keep * m11 + swap * m00;
                self.m[[a, b1]] *= off;
                self.m[[a1, b]] *= off;
            }
        }
    }
}

/// Continuous global depolarizing noise at rate `λ` per unit evolution time.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GlobalDepolarizingModel {
    pub lambda: f64,
}

impl GlobalDepolarizingModel {
    pub fn new(lambda: f64) -> Result<GlobalDepolarizingModel> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise rate must be >= 0, got {lambda}"
            )));
        }
        Ok(GlobalDepolarizingModel { lambda })
    }

    /// Attenuation `Λ(t)^{−1} = e^{−λ|t|}` after evolving for time `t`
    /// (noise accumulates with the duration, regardless of direction).
    pub fn attenuation(&self, t: f64) -> f64 {
        (-self.lambda * t.abs()).exp()
    }
}

/// Per-gate local depolarizing noise applied to every qubit a gate touches.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LocalDepolarizingModel {
    pub p_gate: f64,
}

impl LocalDepolarizingModel {
    pub fn new(p_gate: f64) -> Result<LocalDepolarizingModel> {
        if !(0.0..1.0).contains(&p_gate) {
            return Err(Error::InvalidArgument(format!(
                "per-gate probability must lie in [0, 1), got {p_gate}"
            )));
        }
        Ok(LocalDepolarizingModel { p_gate })
    }
}

/// Either noise model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum NoiseModel {
    Global(GlobalDepolarizingModel),
    Local(LocalDepolarizingModel),
}

/// Noisy expectation of a traceless observable under global depolarizing:
/// `ideal · e^{−λ|t|}`. An identity component is rejected — its maximally
/// mixed contribution would not decay.
pub fn apply_global_noise(
    observable: &PauliSum,
    ideal: f64,
    model: &GlobalDepolarizingModel,
    t: f64,
) -> Result<f64> {
    if !observable.is_traceless() {
        return Err(Error::InvalidArgument(format!(
            "global depolarizing rescaling needs a traceless observable; identity coefficient {}",
            observable.identity_coefficient()
        )));
    }
    Ok(ideal * model.attenuation(t))
}

/// Degrade a raw per-draw record under the global model (kept draws pick up
/// `e^{−λτ|tᵢ|}`).
pub fn apply_global_noise_raw(raw: &RawSignal, model: &GlobalDepolarizingModel) -> RawSignal {
    let mut out = raw.clone();
    for i in 0..out.n_samples() {
        if out.is_kept(i) {
            out.values[i] *= model.attenuation(out.tau * out.times[i]);
        }
    }
    out
}

/// Evolve a density matrix by the Trotterized circuit for time `t`, applying
/// local depolarizing noise to each touched qubit after every gate.
pub fn evolve_density_local_noise(
    plan: &TrotterPlan,
    rho0: &DensityMatrix,
    t: f64,
    model: &LocalDepolarizingModel,
) -> Result<DensityMatrix> {
    if plan.n_qubits() != rho0.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "plan on {} qubits vs density matrix on {}",
            plan.n_qubits(),
            rho0.n_qubits()
        )));
    }
    let mut rho = rho0.clone();
    if t == 0.0 {
        return Ok(rho);
    }
    let steps = plan.steps_for(t);
    let dt = t / steps as f64;
    let rotations = plan.step_rotations(dt);
    for _ in 0..steps {
        apply_noisy_rotations(&mut rho, &rotations, model, false);
    }
    Ok(rho)
}

fn apply_noisy_rotations(
    rho: &mut DensityMatrix,
    rotations: &[(f64, PauliString)],
    model: &LocalDepolarizingModel,
    invert: bool,
) {
    let order: Box<dyn Iterator<Item = &(f64, PauliString)>> = if invert {
        Box::new(rotations.iter().rev())
    } else {
        Box::new(rotations.iter())
    };
    let sign = if invert { -1.0 } else { 1.0 };
    for (phi, s) in order {
        if s.is_identity() {
            continue;
        }
        rho.rotate(sign * phi, s);
        for q in s.support() {
            rho.depolarize_qubit(q, model.p_gate);
        }
    }
}

/// Run the identity-equivalent benchmark `(U(δt)U†(δt))^m` for each depth in
/// `depths` and record the observable expectation. `δt` is the plan's
/// nominal step. Under the global model the sequence is exactly
/// `value(0)·e^{−2λ·m·δt}`; under the local model the circuit is simulated
/// gate by gate.
pub fn benchmark_decay(
    plan: &TrotterPlan,
    psi0: &StateVector,
    model: &NoiseModel,
    observable: &PauliSum,
    depths: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if depths.is_empty() {
        return Err(Error::InvalidArgument("no benchmark depths given".into()));
    }
    let dt = plan.dt();
    match model {
        NoiseModel::Global(g) => {
            if !observable.is_traceless() {
                return Err(Error::InvalidArgument(
                    "the global-model benchmark needs a traceless observable".into(),
                ));
            }
            let base = observable.expectation(psi0.amplitudes())?;
            Ok(depths
                .iter()
                .map(|&m| (m, base * g.attenuation(2.0 * m as f64 * dt)))
                .collect())
        }
        NoiseModel::Local(l) => {
            let mut sorted: Vec<usize> = depths.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            let rotations = plan.step_rotations(dt);
            let mut rho = DensityMatrix::from_pure(psi0)?;
            let mut out = Vec::with_capacity(sorted.len());
            let mut reached = 0usize;
            for &m in &sorted {
                while reached < m {
                    apply_noisy_rotations(&mut rho, &rotations, l, false);
                    apply_noisy_rotations(&mut rho, &rotations, l, true);
                    reached += 1;
                }
                out.push((m, rho.expectation(observable)?));
            }
            Ok(out)
        }
    }
}

/// Exponential-decay fit `A·e^{−λx}` with its goodness of fit.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub lambda_hat: f64,
    pub r_squared: f64,
    /// The samples handed to the fitter (x = time-equivalent, y = value).
    pub samples: Vec<(f64, f64)>,
    /// How many survived the magnitude floor.
    pub n_used: usize,
}

impl DecayFit {
    /// The serialized summary `{lambda_hat, r_squared, n_samples}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda_hat": self.lambda_hat,
            "r_squared": self.r_squared,
            "n_samples": self.samples.len(),
        })
    }
}

pub const DEFAULT_FIT_FLOOR: f64 = 1e-3;

/// Least-squares fit of `ln|y|` against `x`, restricted to `|y|` above the
/// floor (the benchmark observable can cross zero from coherent residuals;
/// flooring keeps the log regression stable).
pub fn fit_lambda(samples: &[(f64, f64)]) -> Result<DecayFit> {
    fit_lambda_with_floor(samples, DEFAULT_FIT_FLOOR)
}

pub fn fit_lambda_with_floor(samples: &[(f64, f64)], floor: f64) -> Result<DecayFit> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, y)| y.abs() > floor)
        .map(|&(x, y)| (x, y.abs().ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} samples above the floor {floor}, need >= 3",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::Fit("degenerate x values".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_res: f64 = usable
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let ss_tot: f64 = usable
        .iter()
        .map(|&(_, y)| (y - mean_y) * (y - mean_y))
        .sum();
    let r_squared = if ss_tot < 1e-24 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DecayFit {
        lambda_hat: (-slope).max(0.0),
        r_squared,
        samples: samples.to_vec(),
        n_used: usable.len(),
    })
}

/// Rescaling mitigation: multiply each kept per-draw value by `e^{λ̂·τ|tᵢ|}`.
/// The amplified spread flows into the stderr of any estimate assembled from
/// the returned record.
pub fn mitigate(raw: &RawSignal, fit: &DecayFit) -> RawSignal {
    let mut out = raw.clone();
    for i in 0..out.n_samples() {
        if out.is_kept(i) {
            out.values[i] *= (fit.lambda_hat * out.tau * out.times[i].abs()).exp();
        }
    }
    out
}

/// Evolution backend with per-gate local depolarizing noise: density-matrix
/// simulation of the Trotter circuit, fresh from `ρ₀` for every sampled time.
pub struct NoisyTrotterEngine {
    plan: TrotterPlan,
    rho0: DensityMatrix,
    model: LocalDepolarizingModel,
}

impl NoisyTrotterEngine {
    pub fn new(
        plan: TrotterPlan,
        psi0: &StateVector,
        model: LocalDepolarizingModel,
    ) -> Result<NoisyTrotterEngine> {
        if plan.n_qubits() != psi0.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "plan on {} qubits vs state on {}",
                plan.n_qubits(),
                psi0.n_qubits()
            )));
        }
        Ok(NoisyTrotterEngine {
            plan,
            rho0: DensityMatrix::from_pure(psi0)?,
            model,
        })
    }
}

impl Engine for NoisyTrotterEngine {
    fn n_qubits(&self) -> usize {
        self.plan.n_qubits()
    }

    fn term_expectations_batch(&self, times: &[f64], terms: &[PauliString]) -> Result<Array2<f64>> {
        let mut out = Array2::<f64>::zeros((times.len(), terms.len()));
        for (i, &t) in times.iter().enumerate() {
            let rho = evolve_density_local_noise(&self.plan, &self.rho0, t, &self.model)?;
            for (k, term) in terms.iter().enumerate() {
                out[[i, k]] = rho.pauli_expectation(term);
            }
        }
        Ok(out)
    }
}

/// CSV writer for benchmark sequences, header `depth,value`.
pub fn write_benchmark_csv<W: Write>(rows: &[(usize, f64)], mut w: W) -> Result<()> {
    writeln!(w, "depth,value")?;
    for (m, v) in rows {
        writeln!(w, "{m},{v}")?;
    }
    Ok(())
}

// Used by tests to cross-check the one-pass depolarizing update.
#[cfg(test)]
fn depolarize_reference(rho: &DensityMatrix, q: usize, p: f64) -> Array2<Complex64> {
    let dim = rho.dim();
    let mut out = Array2::<Complex64>::zeros((dim, dim));
    let paulis = [
        crate::pauli::Pauli::X,
        crate::pauli::Pauli::Y,
        crate::pauli::Pauli::Z,
    ];
    for a in 0..dim {
        for b in 0..dim {
            out[[a, b]] = (1.0 - p) * rho.m[[a, b]];
        }
    }
    for letter in paulis {
        let s = PauliString::single(rho.n_qubits(), q, letter).unwrap();
        let masks = s.masks();
        let x = masks.x_mask as usize;
        let ph = |c: usize| masks.y_phase() * masks.z_sign(c);
        for a in 0..dim {
            for b in 0..dim {
                // (PρP)[a,b] = ph(a⊕x)·ρ[a⊕x, b⊕x]·ph(b)… with the right
                // conjugation: PρP† and P† = P.
                let v = ph(a ^ x) * rho.m[[a ^ x, b ^ x]] * ph(b ^ x).conj();
                out[[a, b]] += p / 3.0 * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{diagonalize, trotter2_evolve};
    use crate::models::build_tfim;
    use crate::pauli::{parse_pauli_sum, Pauli};
    use crate::state::{prepare_state, BaseState, Gate, StatePrepSpec};
    use rand::Rng;

    fn random_density(n: usize, seed: u64) -> DensityMatrix {
        // Mixture of a few random product-ish pure states.
        let mut rng = crate::rng::stream(seed, "noise-test", 0);
        let dim = 1 << n;
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        let weights = [0.5, 0.3, 0.2];
        for &w in &weights {
            let amps: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for a in 0..dim {
                for b in 0..dim {
                    m[[a, b]] += w * amps[a] * amps[b].conj() / (norm * norm);
                }
            }
        }
        DensityMatrix { n_qubits: n, m }
    }

    #[test]
    fn global_noise_examples() {
        let x = parse_pauli_sum("1 X\n").unwrap();
        let calm = GlobalDepolarizingModel::new(0.0).unwrap();
        assert_eq!(apply_global_noise(&x, 0.8, &calm, 5.0).unwrap(), 0.8);
        let model = GlobalDepolarizingModel::new(0.1).unwrap();
        let v = apply_global_noise(&x, 0.8, &model, 2.0).unwrap();
        assert!((v - 0.8 * (-0.2f64).exp()).abs() < 1e-12);
        assert!((v - 0.65498).abs() < 1e-5);
        assert!(apply_global_noise(&x, 0.8, &model, 1e9).unwrap().abs() < 1e-300);
        // Identity component rejected.
        let with_id = parse_pauli_sum("0.5 I\n0.5 X\n").unwrap();
        assert!(apply_global_noise(&with_id, 0.8, &model, 1.0).is_err());
        // Semigroup: split intervals compose exactly.
        let once = apply_global_noise(&x, 0.8, &model, 3.7).unwrap();
        let twice = apply_global_noise(
            &x,
            apply_global_noise(&x, 0.8, &model, 1.2).unwrap(),
            &model,
            2.5,
        )
        .unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn depolarize_matches_three_conjugation_definition() {
        let rho = random_density(3, 14);
        for q in 0..3 {
            let reference = depolarize_reference(&rho, q, 0.13);
            let mut fast = rho.clone();
            fast.depolarize_qubit(q, 0.13);
            for a in 0..rho.dim() {
                for b in 0..rho.dim() {
                    assert!((fast.m[[a, b]] - reference[[a, b]]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn noiseless_density_evolution_matches_statevector() {
        let h = build_tfim(3, 1.0, 2.0, 0.1, true).unwrap();
        let plan = TrotterPlan::new(&h, 4.0).unwrap();
        let spec = StatePrepSpec::new(BaseState::AllPlus).with_op(1, Gate::Ry(0.9));
        let psi0 = prepare_state(&spec, 3).unwrap();
        let silent = LocalDepolarizingModel::new(0.0).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi0).unwrap();
        for t in [0.7, -1.3] {
            let rho = evolve_density_local_noise(&plan, &rho0, t, &silent).unwrap();
            let psi = trotter2_evolve(&plan, &psi0, t).unwrap();
            let amps = psi.amplitudes();
            for a in 0..rho.dim() {
                for b in 0..rho.dim() {
                    assert!((rho.m[[a, b]] - amps[a] * amps[b].conj()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn channel_preserves_trace_hermiticity_positivity() {
        let h = build_tfim(3, 1.0, 2.0, 0.1, false).unwrap();
        let plan = TrotterPlan::new(&h, 2.0).unwrap();
        let model = LocalDepolarizingModel::new(0.02).unwrap();
        let rho0 = random_density(3, 15);
        let rho = evolve_density_local_noise(&plan, &rho0, 1.5, &model).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        assert!(rho.trace().im.abs() < 1e-10);
        assert!(rho.max_hermiticity_violation() < 1e-10);
        let (eigs, _) = crate::linalg::eigh_complex(rho.m.clone()).unwrap();
        assert!(eigs.iter().all(|&e| e >= -1e-9), "eigs {eigs:?}");
    }

    #[test]
    fn heavy_depolarizing_kills_local_expectations() {
        // p = 3/4 makes each touch fully mixing on that qubit.
        let h = build_tfim(2, 1.0, 2.0, 0.0, false).unwrap();
        let plan = TrotterPlan::new(&h, 1.0).unwrap();
        let model = LocalDepolarizingModel::new(0.75).unwrap();
        let psi0 = prepare_state(
            &StatePrepSpec::new(BaseState::AllZero)
                .with_op(0, Gate::Rx(-std::f64::consts::FRAC_PI_2)),
            2,
        )
        .unwrap();
        let rho0 = DensityMatrix::from_pure(&psi0).unwrap();
        let y0 = PauliString::single(2, 0, Pauli::Y).unwrap();
        assert!((rho0.pauli_expectation(&y0) - 1.0).abs() < 1e-12);
        let rho = evolve_density_local_noise(&plan, &rho0, 2.0, &model).unwrap();
        for q in 0..2 {
            for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
                let p = PauliString::single(2, q, letter).unwrap();
                assert!(rho.pauli_expectation(&p).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn fit_recovers_synthetic_decay() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * 0.8).collect();
        let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 0.9 * (-0.05 * x).exp())).collect();
        let fit = fit_lambda(&samples).unwrap();
        assert!(
            (fit.lambda_hat - 0.05).abs() < 1e-6,
            "λ̂ = {}",
            fit.lambda_hat
        );
        assert!((fit.r_squared - 1.0).abs() < 1e-9);

        let constant: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 0.4)).collect();
        let fit = fit_lambda(&constant).unwrap();
        assert_eq!(fit.lambda_hat, 0.0);
        assert_eq!(fit.r_squared, 1.0);

        let floored: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1e-6)).collect();
        assert!(matches!(fit_lambda(&floored), Err(Error::Fit(_))));
    }

    #[test]
    fn benchmark_global_matches_closed_form_and_noiseless_is_constant() {
        let h = build_tfim(3, 1.0, 2.0, 0.1, true).unwrap();
        let plan = TrotterPlan::new(&h, 2.5).unwrap(); // δt = 0.4
        let psi0 = prepare_state(
            &StatePrepSpec::new(BaseState::AllZero)
                .with_op(0, Gate::Rx(-std::f64::consts::FRAC_PI_2)),
            3,
        )
        .unwrap();
        let y = PauliSum::from_string(1.0, PauliString::single(3, 0, Pauli::Y).unwrap());
        let depths = [1, 2, 4, 8];
        let rows = benchmark_decay(
            &plan,
            &psi0,
            &NoiseModel::Global(GlobalDepolarizingModel::new(0.05).unwrap()),
            &y,
            &depths,
        )
        .unwrap();
        for (m, v) in &rows {
            let expect = 1.0 * (-0.05 * 2.0 * (*m as f64) * 0.4).exp();
            assert!((v - expect).abs() < 1e-12);
        }
        // Noiseless local model: the sequence is flat at the t = 0 value.
        let rows = benchmark_decay(
            &plan,
            &psi0,
            &NoiseModel::Local(LocalDepolarizingModel::new(0.0).unwrap()),
            &y,
            &depths,
        )
        .unwrap();
        for (_, v) in &rows {
            assert!((v - 1.0).abs() < 1e-9);
        }
        // Local noise decays monotonically.
        let rows = benchmark_decay(
            &plan,
            &psi0,
            &NoiseModel::Local(LocalDepolarizingModel::new(0.01).unwrap()),
            &y,
            &depths,
        )
        .unwrap();
        for w in rows.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
    }

    #[test]
    fn mitigation_inverts_the_global_model_exactly() {
        use crate::estimate::{sample_raw_multi, SampleMode};
        use crate::evolve::ExactEngine;
        use crate::filter::GaussianFilter;
        let h = parse_pauli_sum("0.5 Z\n").unwrap();
        let psi0 = StateVector::all_plus(1);
        let engine = ExactEngine::new(diagonalize(&h).unwrap(), &psi0).unwrap();
        let x = parse_pauli_sum("1 X\n").unwrap();
        let f = GaussianFilter::new(2.0, 4.0).unwrap();
        let raw = sample_raw_multi(
            &engine,
            std::slice::from_ref(&x),
            &f,
            500,
            SampleMode::Exact,
            6,
        )
        .unwrap()
        .remove(0);
        let model = GlobalDepolarizingModel::new(0.08).unwrap();
        let noisy = apply_global_noise_raw(&raw, &model);
        let fit = DecayFit {
            lambda_hat: 0.08,
            r_squared: 1.0,
            samples: vec![],
            n_used: 0,
        };
        let recovered = mitigate(&noisy, &fit);
        for i in 0..raw.n_samples() {
            assert!((recovered.values[i] - raw.values[i]).abs() < 1e-10);
        }
        // λ̂ = 0 mitigation is the identity.
        let zero_fit = DecayFit {
            lambda_hat: 0.0,
            r_squared: 1.0,
            samples: vec![],
            n_used: 0,
        };
        let same = mitigate(&noisy, &zero_fit);
        for i in 0..raw.n_samples() {
            assert_eq!(same.values[i], noisy.values[i]);
        }
    }
}
