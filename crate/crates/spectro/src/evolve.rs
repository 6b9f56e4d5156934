//! Hamiltonian time evolution: exact (via one-time dense diagonalization)
//! and second-order Trotter, plus observable measurement with optional shot
//! noise.

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{PauliString, PauliSum};
use crate::state::StateVector;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Default dense-diagonalization cap.
pub const DEFAULT_DIAG_CAP: usize = 14;

/// Eigenbasis storage. Row `n` holds the bra `⟨n|`; the real variant halves
/// memory and lets 13-qubit reconstructions run as real GEMMs.
#[derive(Debug, Clone)]
enum Basis {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// Exact-diagonalization result: ascending eigenvalues `E_n` and the unitary
/// eigenvector matrix.
#[derive(Debug, Clone)]
pub struct EDResult {
    n_qubits: usize,
    eigenvalues: Vec<f64>,
    basis: Basis,
}

/// Diagonalize a Hamiltonian with the default qubit cap.
pub fn diagonalize(h: &PauliSum) -> Result<EDResult> {
    diagonalize_capped(h, DEFAULT_DIAG_CAP)
}

/// Diagonalize with an explicit cap on the dense dimension.
pub fn diagonalize_capped(h: &PauliSum, cap: usize) -> Result<EDResult> {
    if h.n_qubits() > cap {
        return Err(Error::ResourceCap {
            n: h.n_qubits(),
            cap,
        });
    }
    let dense = h.to_dense();
    let (eigenvalues, basis) = if h.is_real_matrix() {
        let real = dense.mapv(|z| z.re);
        let (w, b) = linalg::eigh_real(real)?;
        (w, Basis::Real(b))
    } else {
        let (w, b) = linalg::eigh_complex(dense)?;
        (w, Basis::Complex(b))
    };
    Ok(EDResult {
        n_qubits: h.n_qubits(),
        eigenvalues,
        basis,
    })
}

impl EDResult {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// All overlaps `a_n = ⟨n|ψ⟩`.
    pub fn overlaps(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs ED dim {}",
                psi.dim(),
                self.dim()
            )));
        }
        let amps = psi.amplitudes();
        match &self.basis {
            Basis::Real(b) => {
                let re = Array1::from_iter(amps.iter().map(|z| z.re));
                let im = Array1::from_iter(amps.iter().map(|z| z.im));
                let ar = b.dot(&re);
                let ai = b.dot(&im);
                Ok((0..self.dim())
                    .map(|n| Complex64::new(ar[n], ai[n]))
                    .collect())
            }
            Basis::Complex(b) => {
                let v = Array1::from_iter(amps.iter().cloned());
                Ok(b.dot(&v).to_vec())
            }
        }
    }

    /// The ket `|n⟩` as a dense vector.
    pub fn ket(&self, n: usize) -> Vec<Complex64> {
        match &self.basis {
            Basis::Real(b) => b.row(n).iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Basis::Complex(b) => b.row(n).iter().map(|z| z.conj()).collect(),
        }
    }

    /// `Σ_n u_n |n⟩` for a batch of coefficient columns: input is
    /// (dim × n_cols) over the eigenindex, output (dim × n_cols) over the
    /// computational basis.
    pub fn reconstruct_batch(&self, u: &Array2<Complex64>) -> Array2<Complex64> {
        match &self.basis {
            Basis::Real(b) => {
                let ur = u.mapv(|z| z.re);
                let ui = u.mapv(|z| z.im);
                let pr = b.t().dot(&ur);
                let pi = b.t().dot(&ui);
                let mut out = pr.mapv(|x| Complex64::new(x, 0.0));
                out.zip_mut_with(&pi, |o, &i| o.im = i);
                out
            }
            Basis::Complex(b) => {
                let uc = u.mapv(|z| z.conj());
                b.t().dot(&uc).mapv(|z| z.conj())
            }
        }
    }
}

/// `ψ(t) = Σ_n e^{−iE_n t} ⟨n|ψ₀⟩ |n⟩`.
pub fn exact_evolve(ed: &EDResult, psi0: &StateVector, t: f64) -> Result<StateVector> {
    let a = ed.overlaps(psi0)?;
    let dim = ed.dim();
    let mut u = Array2::<Complex64>::zeros((dim, 1));
    for n in 0..dim {
        u[[n, 0]] = Complex64::from_polar(1.0, -ed.eigenvalues[n] * t) * a[n];
    }
    let out = ed.reconstruct_batch(&u);
    StateVector::from_amplitudes(out.column(0).to_vec())
}

/// Second-order Trotter plan: an ordered partition of the Hamiltonian into
/// mutually-commuting groups plus a step density.
///
/// For nearest-neighbour chains the partition comes out as {single-site
/// fields (per letter), even bonds, odd bonds}; a symmetric Strang step
/// applies the groups as `g₁(dt/2)…g_{m−1}(dt/2) g_m(dt) g_{m−1}(dt/2)…g₁(dt/2)`.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    n_qubits: usize,
    groups: Vec<Vec<(f64, PauliString)>>,
    steps_per_unit_time: f64,
}

impl TrotterPlan {
    /// Partition `h` into commuting groups. `steps_per_unit_time` fixes the
    /// default step density (a time span `t` uses `⌈|t|·steps⌉` steps).
    pub fn new(h: &PauliSum, steps_per_unit_time: f64) -> Result<TrotterPlan> {
        if !(steps_per_unit_time > 0.0) || !steps_per_unit_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "steps per unit time must be positive, got {steps_per_unit_time}"
            )));
        }
        let n = h.n_qubits();
        // Seed order: single-site fields, then bonds by (parity, site), then
        // everything else; greedy assignment keeps every group commuting.
        let mut ordered: Vec<(u8, usize, f64, PauliString)> = Vec::new();
        for (c, s) in h.terms() {
            let support = s.support();
            let key = match support.as_slice() {
                [] | [_] => (0u8, 0usize),
                [a, b] if b - a == 1 => (1 + (a % 2) as u8, *a),
                [a, b] if *a == 0 && *b == n - 1 => (1 + ((n - 1) % 2) as u8, n - 1),
                _ => (3, support[0]),
            };
            ordered.push((key.0, key.1, *c, s.clone()));
        }
        ordered.sort_by(|x, y| (x.0, x.1, &x.3).cmp(&(y.0, y.1, &y.3)));
        let mut groups: Vec<Vec<(f64, PauliString)>> = Vec::new();
        for (_, _, c, s) in ordered {
            match groups
                .iter_mut()
                .find(|g| g.iter().all(|(_, m)| m.commutes_with(&s)))
            {
                Some(g) => g.push((c, s)),
                None => groups.push(vec![(c, s)]),
            }
        }
        Ok(TrotterPlan {
            n_qubits: n,
            groups,
            steps_per_unit_time,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn groups(&self) -> &[Vec<(f64, PauliString)>] {
        &self.groups
    }

    pub fn steps_per_unit_time(&self) -> f64 {
        self.steps_per_unit_time
    }

    /// Nominal single-step duration `1 / steps_per_unit_time`.
    pub fn dt(&self) -> f64 {
        1.0 / self.steps_per_unit_time
    }

    /// The gate sequence of one symmetric step of duration `dt`: each entry
    /// is a Pauli rotation angle pair `(phi, string)` meaning `e^{−iφP}`.
    pub fn step_rotations(&self, dt: f64) -> Vec<(f64, PauliString)> {
        let m = self.groups.len();
        let mut seq = Vec::new();
        if m == 0 {
            return seq;
        }
        for g in &self.groups[..m - 1] {
            for (c, s) in g {
                seq.push((c * dt / 2.0, s.clone()));
            }
        }
        for (c, s) in &self.groups[m - 1] {
            seq.push((c * dt, s.clone()));
        }
        for g in self.groups[..m - 1].iter().rev() {
            for (c, s) in g.iter().rev() {
                seq.push((c * dt / 2.0, s.clone()));
            }
        }
        seq
    }

    /// Number of steps used to span a time `t`.
    pub fn steps_for(&self, t: f64) -> usize {
        ((t.abs() * self.steps_per_unit_time).ceil() as usize).max(1)
    }
}

/// Apply `e^{−iφP}` in place: `ψ ← cos φ · ψ − i sin φ · Pψ`.
pub fn apply_pauli_rotation(phi: f64, p: &PauliString, psi: &mut [Complex64]) {
    let masks = p.masks();
    let (c, s) = (phi.cos(), phi.sin());
    let x = masks.x_mask as usize;
    let yph = masks.y_phase();
    if x == 0 {
        // Diagonal string: pure phases.
        let plus = Complex64::new(c, 0.0) - Complex64::new(0.0, s) * yph;
        let minus = Complex64::new(c, 0.0) + Complex64::new(0.0, s) * yph;
        for (b, amp) in psi.iter_mut().enumerate() {
            *amp *= if (b as u64 & masks.z_mask).count_ones() & 1 == 0 {
                plus
            } else {
                minus
            };
        }
        return;
    }
    let is = Complex64::new(0.0, s) * yph;
    for b in 0..psi.len() {
        let partner = b ^ x;
        if partner < b {
            continue;
        }
        let (amp_b, amp_p) = (psi[b], psi[partner]);
        let sign_b = masks.z_sign(b);
        let sign_p = masks.z_sign(partner);
        psi[b] = c * amp_b - is * sign_p * amp_p;
        psi[partner] = c * amp_p - is * sign_b * amp_b;
    }
}

/// Evolve by the symmetric second-order product formula over
/// `⌈|t|·steps_per_unit_time⌉` steps.
pub fn trotter2_evolve(plan: &TrotterPlan, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if psi0.n_qubits() != plan.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "state on {} qubits vs plan on {}",
            psi0.n_qubits(),
            plan.n_qubits
        )));
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let steps = plan.steps_for(t);
    let dt = t / steps as f64;
    let rotations = plan.step_rotations(dt);
    let mut amps = psi0.amplitudes().to_vec();
    for _ in 0..steps {
        for (phi, s) in &rotations {
            apply_pauli_rotation(*phi, s, &mut amps);
        }
    }
    StateVector::from_amplitudes(amps)
}

/// `⟨ψ|O|ψ⟩`, discarding the sub-1e-10 imaginary residue.
pub fn expectation(psi: &StateVector, o: &PauliSum) -> Result<f64> {
    o.expectation(psi.amplitudes())
}

/// Finite-shot estimate of a single ±1-valued Pauli observable: the mean of
/// `shots` draws from {+1, −1} with `p(+1) = (1 + ⟨P⟩)/2`.
pub fn sample_expectation<R: Rng>(
    psi: &StateVector,
    p: &PauliString,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if p.len() != psi.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "observable on {} qubits vs state on {}",
            p.len(),
            psi.n_qubits()
        )));
    }
    if p.is_identity() {
        return Err(Error::InvalidArgument(
            "shot sampling needs a non-identity Pauli (eigenvalues ±1)".into(),
        ));
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let mean = p.expectation(psi.amplitudes());
    Ok(sample_pauli_mean(mean, shots, rng))
}

/// Binomial draw behind [`sample_expectation`], reusable once `⟨P⟩` is known.
pub fn sample_pauli_mean<R: Rng>(mean: f64, shots: u64, rng: &mut R) -> f64 {
    let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
    let k = Binomial::new(shots, p_plus)
        .expect("clamped probability is valid")
        .sample(rng);
    2.0 * k as f64 / shots as f64 - 1.0
}

/// An evolution backend: produces `⟨P⟩` on the state evolved to a physical
/// time, for a set of Pauli strings, reusing one evolution per time point.
pub trait Engine {
    fn n_qubits(&self) -> usize;

    /// Row per time, column per observable string.
    fn term_expectations_batch(&self, times: &[f64], terms: &[PauliString]) -> Result<Array2<f64>>;
}

/// Exact backend: one diagonalization, reused across all sampled times.
pub struct ExactEngine {
    ed: EDResult,
    overlaps: Vec<Complex64>,
}

/// Times per reconstruction GEMM; fixed so results do not depend on batch
/// scheduling.
const EXACT_CHUNK: usize = 128;

impl ExactEngine {
    pub fn new(ed: EDResult, psi0: &StateVector) -> Result<ExactEngine> {
        let overlaps = ed.overlaps(psi0)?;
        Ok(ExactEngine { ed, overlaps })
    }

    pub fn ed(&self) -> &EDResult {
        &self.ed
    }
}

impl Engine for ExactEngine {
    fn n_qubits(&self) -> usize {
        self.ed.n_qubits()
    }

    fn term_expectations_batch(&self, times: &[f64], terms: &[PauliString]) -> Result<Array2<f64>> {
        let dim = self.ed.dim();
        let mut out = Array2::<f64>::zeros((times.len(), terms.len()));
        for (chunk_idx, chunk) in times.chunks(EXACT_CHUNK).enumerate() {
            let mut u = Array2::<Complex64>::zeros((dim, chunk.len()));
            for (j, &t) in chunk.iter().enumerate() {
                for n in 0..dim {
                    u[[n, j]] =
                        Complex64::from_polar(1.0, -self.ed.eigenvalues[n] * t) * self.overlaps[n];
                }
            }
            let psi = self.ed.reconstruct_batch(&u);
            for (j, _) in chunk.iter().enumerate() {
                let col = psi.column(j);
                let col = col.as_slice_memory_order();
                // Column views are strided; fall back to a copy when needed.
                let owned;
                let amps: &[Complex64] = match col {
                    Some(s) => s,
                    None => {
                        owned = psi.column(j).to_vec();
                        &owned
                    }
                };
                for (k, term) in terms.iter().enumerate() {
                    out[[chunk_idx * EXACT_CHUNK + j, k]] = term.expectation(amps);
                }
            }
        }
        Ok(out)
    }
}

/// Trotterized backend over a fixed plan.
pub struct TrotterEngine {
    plan: TrotterPlan,
    psi0: StateVector,
}

impl TrotterEngine {
    pub fn new(plan: TrotterPlan, psi0: StateVector) -> Result<TrotterEngine> {
        if plan.n_qubits() != psi0.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "plan on {} qubits vs state on {}",
                plan.n_qubits(),
                psi0.n_qubits()
            )));
        }
        Ok(TrotterEngine { plan, psi0 })
    }
}

impl Engine for TrotterEngine {
    fn n_qubits(&self) -> usize {
        self.plan.n_qubits()
    }

    fn term_expectations_batch(&self, times: &[f64], terms: &[PauliString]) -> Result<Array2<f64>> {
        let mut out = Array2::<f64>::zeros((times.len(), terms.len()));
        for (i, &t) in times.iter().enumerate() {
            let psi = trotter2_evolve(&self.plan, &self.psi0, t)?;
            for (k, term) in terms.iter().enumerate() {
                out[[i, k]] = term.expectation(psi.amplitudes());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_heisenberg;
    use crate::pauli::{parse_pauli_sum, Pauli};
    use crate::state::{BaseState, StatePrepSpec};
    use rand::Rng;

    fn two_site_heisenberg() -> PauliSum {
        parse_pauli_sum("1 XX\n1 YY\n1 ZZ\n").unwrap()
    }

    #[test]
    fn single_z_eigenvalues() {
        let h = parse_pauli_sum("1 Z\n").unwrap();
        let ed = diagonalize(&h).unwrap();
        assert!((ed.eigenvalues()[0] + 1.0).abs() < 1e-12);
        assert!((ed.eigenvalues()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_bond_spectrum() {
        // XX + YY + ZZ on two sites: singlet at −3, triplet at +1.
        let ed = diagonalize(&two_site_heisenberg()).unwrap();
        let w = ed.eigenvalues();
        assert!((w[0] + 3.0).abs() < 1e-10);
        for &v in &w[1..] {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_ground_state_energy() {
        let h = build_heisenberg(2, 1.0, 0.0, false).unwrap();
        let ed = diagonalize(&h).unwrap();
        assert!((ed.eigenvalues()[0] + 3.0).abs() < 1e-10);
    }

    #[test]
    fn ed_invariants_on_random_hamiltonian() {
        let mut rng = crate::rng::stream(3, "ed-test", 0);
        let n = 3;
        let mut terms = Vec::new();
        for _ in 0..8 {
            let letters: Vec<(usize, Pauli)> = (0..n)
                .map(|i| {
                    (
                        i,
                        match rng.gen_range(0..4) {
                            0 => Pauli::I,
                            1 => Pauli::X,
                            2 => Pauli::Y,
                            _ => Pauli::Z,
                        },
                    )
                })
                .collect();
            terms.push((
                rng.gen_range(-1.0..1.0),
                PauliString::from_sites(n, &letters).unwrap(),
            ));
        }
        let h = PauliSum::from_terms(n, terms).unwrap();
        let ed = diagonalize(&h).unwrap();
        let dense = h.to_dense();
        let dim = ed.dim();
        // H|n⟩ = E_n|n⟩ to 1e-9 relative.
        for n_idx in 0..dim {
            let ket = ed.ket(n_idx);
            let scale = ed.eigenvalues()[n_idx].abs().max(1.0);
            for r in 0..dim {
                let hv: Complex64 = (0..dim).map(|c| dense[[r, c]] * ket[c]).sum();
                assert!(
                    (hv - ed.eigenvalues()[n_idx] * ket[r]).norm() < 1e-9 * scale,
                    "eigenpair {n_idx} violated"
                );
            }
        }
        // Unitarity of the eigenvector matrix to 1e-10.
        for a in 0..dim {
            for b in 0..dim {
                let dot: Complex64 = (0..dim)
                    .map(|c| Complex64::conj(&ed.ket(a)[c]) * ed.ket(b)[c])
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn exact_evolve_time_zero_is_identity() {
        let h = two_site_heisenberg();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_plus(2);
        let psi = exact_evolve(&ed, &psi0, 0.0).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(psi0.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn two_level_precession() {
        // H = Z, ψ0 = |+⟩: ⟨X⟩(t) = cos(2t), so ⟨X⟩(π/2) = −1.
        let h = parse_pauli_sum("1 Z\n").unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_plus(1);
        let x = parse_pauli_sum("1 X\n").unwrap();
        let psi = exact_evolve(&ed, &psi0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((expectation(&psi, &x).unwrap() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_evolution_composes_and_preserves_norm_and_energy() {
        let h = build_heisenberg(3, -1.0, 0.2, true).unwrap();
        let ed = diagonalize(&h).unwrap();
        let spec = StatePrepSpec::new(BaseState::AllPlus).with_op(1, crate::state::Gate::Ry(0.7));
        let psi0 = crate::state::prepare_state(&spec, 3).unwrap();
        let mut rng = crate::rng::stream(5, "evolve-test", 0);
        for _ in 0..10 {
            let t1: f64 = rng.gen_range(-3.0..3.0);
            let t2: f64 = rng.gen_range(-3.0..3.0);
            let once = exact_evolve(&ed, &psi0, t1 + t2).unwrap();
            let twice = exact_evolve(&ed, &exact_evolve(&ed, &psi0, t1).unwrap(), t2).unwrap();
            for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
                assert!((a - b).norm() < 1e-10);
            }
            assert!((once.norm() - 1.0).abs() < 1e-10);
            let e0 = expectation(&psi0, &h).unwrap();
            let et = expectation(&once, &h).unwrap();
            assert!((e0 - et).abs() < 1e-9);
        }
    }

    #[test]
    fn trotter_exact_for_commuting_hamiltonian() {
        let h = parse_pauli_sum("0.8 ZZI\n-0.3 IZZ\n0.5 ZII\n").unwrap();
        let ed = diagonalize(&h).unwrap();
        let plan = TrotterPlan::new(&h, 1.0).unwrap();
        let psi0 = StateVector::all_plus(3);
        for t in [0.3, 1.7, -2.4] {
            let a = exact_evolve(&ed, &psi0, t).unwrap();
            let b = trotter2_evolve(&plan, &psi0, t).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trotter_groups_partition_the_hamiltonian() {
        for h in [
            build_heisenberg(7, -1.0, -0.01, true).unwrap(),
            crate::models::build_tfim(6, 1.0, 2.0, 0.1, true).unwrap(),
        ] {
            let plan = TrotterPlan::new(&h, 2.0).unwrap();
            let mut collected: Vec<(f64, PauliString)> =
                plan.groups().iter().flatten().cloned().collect();
            collected.sort_by(|a, b| a.1.cmp(&b.1));
            let mut original = h.terms().to_vec();
            original.sort_by(|a, b| a.1.cmp(&b.1));
            assert_eq!(collected.len(), original.len());
            for ((ca, sa), (cb, sb)) in collected.iter().zip(&original) {
                assert_eq!(sa, sb);
                assert!((ca - cb).abs() < 1e-15);
            }
            // Every group is internally commuting.
            for g in plan.groups() {
                for (i, (_, a)) in g.iter().enumerate() {
                    for (_, b) in &g[i + 1..] {
                        assert!(a.commutes_with(b));
                    }
                }
            }
        }
    }

    #[test]
    fn trotter_error_scales_second_order() {
        let h = build_heisenberg(4, 1.0, 0.3, true).unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_plus(4);
        let t = 1.0;
        let exact = exact_evolve(&ed, &psi0, t).unwrap();
        let err = |steps: f64| -> f64 {
            let plan = TrotterPlan::new(&h, steps).unwrap();
            let approx = trotter2_evolve(&plan, &psi0, t).unwrap();
            exact
                .amplitudes()
                .iter()
                .zip(approx.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        // Log-log slope of error vs dt over a decade, expected in [1.8, 2.2].
        let steps: Vec<f64> = vec![4.0, 8.0, 16.0, 32.0, 40.0];
        let pts: Vec<(f64, f64)> = steps
            .iter()
            .map(|&s| ((1.0 / s).ln(), err(s).ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((1.8..=2.2).contains(&slope), "slope {slope}");
        // Doubling the step count shrinks the error ~4x.
        let ratio = err(8.0) / err(16.0);
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trotter_converges_to_exact() {
        let h = build_heisenberg(3, -1.0, 0.1, false).unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_plus(3);
        let plan = TrotterPlan::new(&h, 2048.0).unwrap();
        let a = exact_evolve(&ed, &psi0, 0.9).unwrap();
        let b = trotter2_evolve(&plan, &psi0, 0.9).unwrap();
        let dev: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dev < 1e-6, "dev {dev}");
    }

    #[test]
    fn shot_sampling_statistics() {
        let psi = StateVector::all_plus(1);
        let x = PauliString::single(1, 0, Pauli::X).unwrap();
        let z = PauliString::single(1, 0, Pauli::Z).unwrap();
        let mut rng = crate::rng::stream(9, "shots-test", 0);
        // ⟨X⟩ = 1 on |+⟩: every draw is +1.
        for _ in 0..16 {
            assert_eq!(sample_expectation(&psi, &x, 100, &mut rng).unwrap(), 1.0);
        }
        // ⟨Z⟩ = 0 on |+⟩: mean over many calls within 4 standard errors and
        // per-call variance near (1 − ⟨Z⟩²)/shots.
        let shots = 64u64;
        let calls = 4000;
        let draws: Vec<f64> = (0..calls)
            .map(|_| sample_expectation(&psi, &z, shots, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / calls as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (calls - 1) as f64;
        let expected_var = 1.0 / shots as f64;
        let se_of_mean = (expected_var / calls as f64).sqrt();
        assert!(mean.abs() < 4.0 * se_of_mean, "mean {mean}");
        assert!((var / expected_var - 1.0).abs() < 0.15, "var {var}");
        // Error paths.
        assert!(sample_expectation(&psi, &z, 0, &mut rng).is_err());
        let id = PauliString::identity(1);
        assert!(sample_expectation(&psi, &id, 10, &mut rng).is_err());
    }

    #[test]
    fn engines_agree_on_expectations() {
        let h = build_heisenberg(3, -1.0, 0.05, true).unwrap();
        let psi0 = StateVector::all_plus(3);
        let exact = ExactEngine::new(diagonalize(&h).unwrap(), &psi0).unwrap();
        let trotter =
            TrotterEngine::new(TrotterPlan::new(&h, 512.0).unwrap(), psi0.clone()).unwrap();
        let terms = vec![
            PauliString::single(3, 0, Pauli::Y).unwrap(),
            PauliString::single(3, 1, Pauli::X).unwrap(),
        ];
        let times = [0.0, 0.5, -1.3, 2.1];
        let a = exact.term_expectations_batch(&times, &terms).unwrap();
        let b = trotter.term_expectations_batch(&times, &terms).unwrap();
        for i in 0..times.len() {
            for k in 0..terms.len() {
                assert!((a[[i, k]] - b[[i, k]]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn expectations_at_time_zero_are_static() {
        let h = build_heisenberg(3, -1.0, 0.2, true).unwrap();
        let spec = StatePrepSpec::new(BaseState::AllPlus).with_op(0, crate::state::Gate::Ry(0.4));
        let psi0 = crate::state::prepare_state(&spec, 3).unwrap();
        let engine = ExactEngine::new(diagonalize(&h).unwrap(), &psi0).unwrap();
        let terms: Vec<PauliString> = (0..3)
            .map(|q| PauliString::single(3, q, Pauli::Y).unwrap())
            .collect();
        let batch = engine.term_expectations_batch(&[0.0], &terms).unwrap();
        for (q, term) in terms.iter().enumerate() {
            assert!((batch[[0, q]] - term.expectation(psi0.amplitudes())).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_shot_count_converges_to_expectation() {
        let spec = StatePrepSpec::new(BaseState::AllPlus).with_op(0, crate::state::Gate::Ry(0.7));
        let psi = crate::state::prepare_state(&spec, 1).unwrap();
        let z = PauliString::single(1, 0, Pauli::Z).unwrap();
        let exact = z.expectation(psi.amplitudes());
        let mut rng = crate::rng::stream(12, "shots-test", 1);
        let sampled = sample_expectation(&psi, &z, 1_000_000, &mut rng).unwrap();
        assert!((sampled - exact).abs() < 1e-2, "{sampled} vs {exact}");
    }

    #[test]
    fn diagonalize_respects_cap() {
        let h = build_heisenberg(4, 1.0, 0.0, false).unwrap();
        assert!(matches!(
            diagonalize_capped(&h, 3),
            Err(Error::ResourceCap { n: 4, cap: 3 })
        ));
    }
}
