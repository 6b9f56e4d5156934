//! Monte Carlo construction of the spectral detector `Ĝ(ω)`, the
//! exact-diagonalization oracle (coherence table and closed-form `G(ω)`),
//! and peak search.
//!
//! The single-shot estimator contributes `ô(τtᵢ)·e^{iτωtᵢ}` per draw
//! `tᵢ ~ g(t)` (for the Gaussian filter `c/2π = 1` and `θ_t = 0`), and
//! exactly zero when `|tᵢ|` exceeds the cutoff `T`. One physical evolution
//! per draw is reused across the whole frequency grid.

use crate::error::{Error, Result};
use crate::evolve::{sample_pauli_mean, EDResult, Engine};
use crate::filter::GaussianFilter;
use crate::pauli::{PauliString, PauliSum};
use crate::rng::stream;
use crate::state::StateVector;
use ndarray::Array2;
use num_complex::Complex64;
use std::io::Write;

/// How `ô(τt)` is obtained per draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Exact expectation values.
    Exact,
    /// Binomial shot noise with this many shots per Pauli term per draw.
    Shots(u64),
}

impl SampleMode {
    pub fn shots(&self) -> Option<u64> {
        match self {
            SampleMode::Exact => None,
            SampleMode::Shots(s) => Some(*s),
        }
    }
}

/// Per-draw time-domain record: the raw material of the estimator, kept
/// separate so noise mitigation can rescale values draw by draw.
#[derive(Debug, Clone)]
pub struct RawSignal {
    pub tau: f64,
    pub cutoff: f64,
    pub seed: u64,
    pub shots: Option<u64>,
    /// True when the observable 1-norm exceeded 1 (estimates stay unbiased
    /// but the |Ĝ| ≤ 1 bound no longer applies).
    pub one_norm_warning: bool,
    /// Dimensionless sampled times, in draw order (cutoff-exceeding draws
    /// included — they contribute zero, they are not resampled).
    pub times: Vec<f64>,
    /// `ô(τtᵢ)` per draw; zero placeholder where `|tᵢ| > T`.
    pub values: Vec<f64>,
}

impl RawSignal {
    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn is_kept(&self, i: usize) -> bool {
        self.times[i].abs() <= self.cutoff
    }
}

/// Estimator metadata echoed into serialized outputs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimateMeta {
    pub tau: f64,
    pub cutoff: f64,
    pub n_samples: usize,
    pub shots: Option<u64>,
    pub seed: u64,
    pub one_norm_warning: bool,
}

/// `Ĝ(ω)` on a frequency grid with componentwise standard errors.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    omega_grid: Vec<f64>,
    g_hat: Vec<Complex64>,
    stderr: Vec<f64>,
    meta: EstimateMeta,
}

impl SpectralEstimate {
    pub fn from_parts(
        omega_grid: Vec<f64>,
        g_hat: Vec<Complex64>,
        stderr: Vec<f64>,
        meta: EstimateMeta,
    ) -> Result<SpectralEstimate> {
        if omega_grid.is_empty() {
            return Err(Error::InvalidArgument("frequency grid is empty".into()));
        }
        if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "frequency grid must be strictly ascending".into(),
            ));
        }
        if omega_grid.len() != g_hat.len() || omega_grid.len() != stderr.len() {
            return Err(Error::DimensionMismatch(
                "grid, values and stderr lengths differ".into(),
            ));
        }
        if stderr.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidArgument("negative stderr".into()));
        }
        Ok(SpectralEstimate {
            omega_grid,
            g_hat,
            stderr,
            meta,
        })
    }

    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }

    pub fn g_hat(&self) -> &[Complex64] {
        &self.g_hat
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn meta(&self) -> &EstimateMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.omega_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_grid.is_empty()
    }

    /// Serialize as CSV with header `omega,re,im,abs,stderr`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega,re,im,abs,stderr")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.omega_grid[i],
                self.g_hat[i].re,
                self.g_hat[i].im,
                self.g_hat[i].norm(),
                self.stderr[i]
            )?;
        }
        Ok(())
    }
}

fn split_identity(o: &PauliSum) -> (f64, Vec<(f64, PauliString)>) {
    let mut id = 0.0;
    let mut rest = Vec::new();
    for (c, s) in o.terms() {
        if s.is_identity() {
            id += c;
        } else {
            rest.push((*c, s.clone()));
        }
    }
    (id, rest)
}

/// Draw `n_samples` times from `g(t)` and evaluate every observable on each
/// kept draw, reusing one evolution per draw for all observables. Times come
/// from the sub-stream `(seed, "times")`, shot noise from per-draw
/// `(seed, "shots", i)` streams, so toggling shots never perturbs the times.
pub fn sample_raw_multi(
    engine: &dyn Engine,
    observables: &[PauliSum],
    f: &GaussianFilter,
    n_samples: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<Vec<RawSignal>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("N_s must be >= 1".into()));
    }
    if observables.is_empty() {
        return Err(Error::InvalidArgument("no observables given".into()));
    }
    if let SampleMode::Shots(0) = mode {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    for o in observables {
        if o.n_qubits() != engine.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "observable on {} qubits vs engine on {}",
                o.n_qubits(),
                engine.n_qubits()
            )));
        }
    }

    let mut times_rng = stream(seed, "times", 0);
    let times: Vec<f64> = (0..n_samples)
        .map(|_| f.sample_time(&mut times_rng))
        .collect();
    let kept: Vec<usize> = (0..n_samples)
        .filter(|&i| times[i].abs() <= f.cutoff())
        .collect();
    let phys_times: Vec<f64> = kept.iter().map(|&i| f.tau() * times[i]).collect();

    // Flatten the non-identity terms of all observables into one batch.
    let mut split: Vec<(f64, Vec<(f64, usize)>)> = Vec::new(); // (identity coeff, [(coeff, term idx)])
    let mut terms: Vec<PauliString> = Vec::new();
    for o in observables {
        let (id, rest) = split_identity(o);
        let mut idx = Vec::new();
        for (c, s) in rest {
            idx.push((c, terms.len()));
            terms.push(s);
        }
        split.push((id, idx));
    }

    let expectations: Array2<f64> = if terms.is_empty() {
        Array2::zeros((phys_times.len(), 0))
    } else {
        engine.term_expectations_batch(&phys_times, &terms)?
    };

    let mut signals: Vec<RawSignal> = observables
        .iter()
        .map(|o| RawSignal {
            tau: f.tau(),
            cutoff: f.cutoff(),
            seed,
            shots: mode.shots(),
            one_norm_warning: o.one_norm() > 1.0 + 1e-12,
            times: times.clone(),
            values: vec![0.0; n_samples],
        })
        .collect();

    for (row, &i) in kept.iter().enumerate() {
        let mut shot_rng = match mode {
            SampleMode::Exact => None,
            SampleMode::Shots(_) => Some(stream(seed, "shots", i as u64)),
        };
        for (obs_idx, (id_coeff, term_idx)) in split.iter().enumerate() {
            let mut value = *id_coeff;
            for &(c, k) in term_idx {
                let mean = expectations[[row, k]];
                value += c * match (&mode, &mut shot_rng) {
                    (SampleMode::Exact, _) => mean,
                    (SampleMode::Shots(shots), Some(rng)) => sample_pauli_mean(mean, *shots, rng),
                    _ => unreachable!(),
                };
            }
            signals[obs_idx].values[i] = value;
        }
    }
    Ok(signals)
}

/// Assemble `Ĝ(ω)` on a grid from a per-draw record: per draw the
/// contribution is `ô(τtᵢ)e^{iτωtᵢ}` (zero past the cutoff), the estimate is
/// the sample mean, and the standard error is the per-sample spread of the
/// complex contributions divided by `√N_s`.
pub fn assemble_estimate(raw: &RawSignal, omega_grid: &[f64]) -> Result<SpectralEstimate> {
    if omega_grid.is_empty() {
        return Err(Error::InvalidArgument("frequency grid is empty".into()));
    }
    let n = raw.n_samples();
    let kept: Vec<usize> = (0..n).filter(|&i| raw.is_kept(i)).collect();
    // |ô·e^{iτωt}|² is ω-independent, so the second moment is shared by the
    // whole grid; dropped draws contribute exact zeros and are already
    // counted in n.
    let sum_sq: f64 = kept.iter().map(|&i| raw.values[i] * raw.values[i]).sum();
    let mut g_hat = Vec::with_capacity(omega_grid.len());
    let mut stderr = Vec::with_capacity(omega_grid.len());
    for &omega in omega_grid {
        let mut sum = Complex64::new(0.0, 0.0);
        for &i in &kept {
            sum += raw.values[i] * Complex64::from_polar(1.0, raw.tau * omega * raw.times[i]);
        }
        let mean = sum / n as f64;
        let var = if n > 1 {
            ((sum_sq - n as f64 * mean.norm_sqr()) / (n as f64 - 1.0)).max(0.0)
        } else {
            0.0
        };
        g_hat.push(mean);
        stderr.push((var / n as f64).sqrt());
    }
    SpectralEstimate::from_parts(
        omega_grid.to_vec(),
        g_hat,
        stderr,
        EstimateMeta {
            tau: raw.tau,
            cutoff: raw.cutoff,
            n_samples: n,
            shots: raw.shots,
            seed: raw.seed,
            one_norm_warning: raw.one_norm_warning,
        },
    )
}

/// Monte Carlo estimate of the spectral detector for one observable.
pub fn estimate_g(
    engine: &dyn Engine,
    observable: &PauliSum,
    f: &GaussianFilter,
    omega_grid: &[f64],
    n_samples: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<SpectralEstimate> {
    let signals = sample_raw_multi(
        engine,
        std::slice::from_ref(observable),
        f,
        n_samples,
        mode,
        seed,
    )?;
    assemble_estimate(&signals[0], omega_grid)
}

/// One raw coherence entry `Γ_{n′n} = ρ^{n′n} ⟨n|Ô|n′⟩` at transition energy
/// `Δ_{n′n} = E_{n′} − E_n`.
#[derive(Debug, Clone, Copy)]
pub struct CoherenceEntry {
    pub n_upper: usize,
    pub n_lower: usize,
    pub delta: f64,
    pub gamma: Complex64,
}

/// A merged transition: entries within the degeneracy tolerance combined,
/// weights summed, plus the gap `γ_j` to the nearest neighbouring transition.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    pub delta: f64,
    pub gamma: Complex64,
    /// `min(Δ_{j+1} − Δ_j, Δ_j − Δ_{j−1})`; infinite for an isolated line.
    pub gap: f64,
}

impl Transition {
    /// Real spectral weight used by the detector and the resource formulas.
    pub fn weight(&self) -> f64 {
        self.gamma.re
    }
}

/// ED-derived coherence table: raw `(n′, n, Δ, Γ)` entries above the floor
/// plus the merged transition list.
#[derive(Debug, Clone)]
pub struct CoherenceTable {
    entries: Vec<CoherenceEntry>,
    transitions: Vec<Transition>,
    /// Σ Γ over the full table before flooring (= ⟨ψ₀|Ô|ψ₀⟩).
    total: Complex64,
}

pub const DEFAULT_COHERENCE_FLOOR: f64 = 1e-10;
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

impl CoherenceTable {
    pub fn entries(&self) -> &[CoherenceEntry] {
        &self.entries
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn total(&self) -> Complex64 {
        self.total
    }

    /// Transitions with `|Γ|` at or above a visibility threshold.
    pub fn visible_transitions(&self, min_abs_gamma: f64) -> Vec<Transition> {
        self.transitions
            .iter()
            .filter(|t| t.gamma.norm() >= min_abs_gamma)
            .cloned()
            .collect()
    }

    /// Serialize as CSV with header `n_upper,n_lower,delta,gamma_re,gamma_im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n_upper,n_lower,delta,gamma_re,gamma_im")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{}",
                e.n_upper, e.n_lower, e.delta, e.gamma.re, e.gamma.im
            )?;
        }
        Ok(())
    }
}

/// Build the coherence table with default floor and degeneracy tolerance.
pub fn coherence_table(ed: &EDResult, psi0: &StateVector, o: &PauliSum) -> Result<CoherenceTable> {
    coherence_table_with(ed, psi0, o, DEFAULT_COHERENCE_FLOOR, DEFAULT_DEGENERACY_TOL)
}

/// Build the coherence table, dropping entries with `|Γ|` below `floor` and
/// merging transitions closer than `degeneracy_tol`.
pub fn coherence_table_with(
    ed: &EDResult,
    psi0: &StateVector,
    o: &PauliSum,
    floor: f64,
    degeneracy_tol: f64,
) -> Result<CoherenceTable> {
    if psi0.dim() != ed.dim() || o.n_qubits() != ed.n_qubits() {
        return Err(Error::DimensionMismatch(
            "state, operator and ED dimensions must agree".into(),
        ));
    }
    let overlaps = ed.overlaps(psi0)?;
    let dim = ed.dim();
    // |Γ_{n'n}| ≤ |a_{n'}||a_n|·‖α‖₁ and |a| ≤ 1, so eigenstates with
    // |a_n| below floor/‖α‖₁ cannot produce an above-floor entry.
    let one_norm = o.one_norm();
    let threshold = if one_norm > 0.0 {
        floor / one_norm
    } else {
        f64::INFINITY
    };
    let selected: Vec<usize> = (0..dim)
        .filter(|&n| overlaps[n].norm() >= threshold)
        .collect();
    let s = selected.len();

    let mut entries = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    if s > 0 {
        // M[i, j] = ⟨n_i|Ô|n_j⟩ over the selected eigenstates.
        let mut kets = Array2::<Complex64>::zeros((dim, s));
        let mut applied = Array2::<Complex64>::zeros((dim, s));
        for (j, &n) in selected.iter().enumerate() {
            let ket = ed.ket(n);
            let image = o.apply(&ket)?;
            for r in 0..dim {
                kets[[r, j]] = ket[r];
                applied[[r, j]] = image[r];
            }
        }
        let bras = kets.mapv(|z| z.conj());
        let m = bras.t().dot(&applied);
        for (iu, &nu) in selected.iter().enumerate() {
            for (il, &nl) in selected.iter().enumerate() {
                // Γ_{n'n} = a_{n'} ā_n ⟨n|Ô|n'⟩ with n' = nu, n = nl.
                let gamma = overlaps[nu] * overlaps[nl].conj() * m[[il, iu]];
                total += gamma;
                if gamma.norm() >= floor {
                    entries.push(CoherenceEntry {
                        n_upper: nu,
                        n_lower: nl,
                        delta: ed.eigenvalues()[nu] - ed.eigenvalues()[nl],
                        gamma,
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| {
        a.delta
            .partial_cmp(&b.delta)
            .expect("finite energies")
            .then(a.n_upper.cmp(&b.n_upper))
            .then(a.n_lower.cmp(&b.n_lower))
    });

    // Merge near-degenerate transitions.
    let mut merged: Vec<(f64, Complex64)> = Vec::new();
    for e in &entries {
        match merged.last_mut() {
            Some((d, g)) if (e.delta - *d).abs() <= degeneracy_tol => {
                *g += e.gamma;
            }
            _ => merged.push((e.delta, e.gamma)),
        }
    }
    let transitions = (0..merged.len())
        .map(|j| {
            let left = if j > 0 {
                merged[j].0 - merged[j - 1].0
            } else {
                f64::INFINITY
            };
            let right = if j + 1 < merged.len() {
                merged[j + 1].0 - merged[j].0
            } else {
                f64::INFINITY
            };
            Transition {
                delta: merged[j].0,
                gamma: merged[j].1,
                gap: left.min(right),
            }
        })
        .collect();

    Ok(CoherenceTable {
        entries,
        transitions,
        total,
    })
}

/// Closed-form detector `G(ω) = Σ_j Re[Γ_j]·p(τ(Δ_j − ω))` over a merged
/// transition list (G is real; conjugate ±Δ pairs combine).
pub fn detector_value(transitions: &[Transition], f: &GaussianFilter, omega: f64) -> f64 {
    transitions
        .iter()
        .map(|t| t.gamma.re * f.p_value(t.delta - omega))
        .sum()
}

/// Closed-form detector from an ED coherence table.
pub fn exact_g(table: &CoherenceTable, f: &GaussianFilter, omega: f64) -> f64 {
    detector_value(table.transitions(), f, omega)
}

/// Peak located by `Δ̂ = argmax_{ω ∈ [a_L, a_R]} |Ĝ(ω)|`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PeakReport {
    pub delta_hat: f64,
    pub window: (f64, f64),
    /// `|Ĝ|` at the peak.
    pub peak_value: f64,
    /// Sign of `Re Ĝ` at the peak (+1/−1/0).
    pub re_sign: f64,
    /// Width from the half-maximum crossings of `|Ĝ|` around the peak,
    /// linearly interpolated; NaN when no crossing brackets the peak.
    pub fwhm_estimate: f64,
    pub grid_resolution: f64,
}

/// Search `|Ĝ(ω)|` for its maximum inside `[a_L, a_R]`.
pub fn find_peak(est: &SpectralEstimate, window: (f64, f64)) -> Result<PeakReport> {
    let (a_l, a_r) = window;
    if !(a_l < a_r) {
        return Err(Error::InvalidWindow(format!("[{a_l}, {a_r}] is empty")));
    }
    let grid = est.omega_grid();
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| grid[i] >= a_l && grid[i] <= a_r)
        .collect();
    if inside.len() < 3 {
        return Err(Error::InvalidWindow(format!(
            "window [{a_l}, {a_r}] covers {} grid points, need >= 3",
            inside.len()
        )));
    }
    let abs: Vec<f64> = est.g_hat().iter().map(|z| z.norm()).collect();
    let &peak_idx = inside
        .iter()
        .max_by(|&&a, &&b| abs[a].partial_cmp(&abs[b]).expect("finite values"))
        .expect("window is nonempty");
    let peak_value = abs[peak_idx];
    let half = peak_value / 2.0;

    // Half-maximum crossings, searched over the full grid around the peak.
    let crossing_left = (0..peak_idx).rev().find(|&i| abs[i] < half).map(|i| {
        let frac = (half - abs[i]) / (abs[i + 1] - abs[i]);
        grid[i] + frac * (grid[i + 1] - grid[i])
    });
    let crossing_right = (peak_idx + 1..grid.len())
        .find(|&i| abs[i] < half)
        .map(|i| {
            let frac = (abs[i - 1] - half) / (abs[i - 1] - abs[i]);
            grid[i - 1] + frac * (grid[i] - grid[i - 1])
        });
    let fwhm_estimate = match (crossing_left, crossing_right) {
        (Some(l), Some(r)) => r - l,
        _ => f64::NAN,
    };
    let grid_resolution = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let re = est.g_hat()[peak_idx].re;
    Ok(PeakReport {
        delta_hat: grid[peak_idx],
        window,
        peak_value,
        re_sign: if re == 0.0 { 0.0 } else { re.signum() },
        fwhm_estimate,
        grid_resolution,
    })
}

/// Uniform grid helper: `min..=max` at the given resolution.
pub fn uniform_grid(min: f64, max: f64, resolution: f64) -> Result<Vec<f64>> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be > 0, got {resolution}"
        )));
    }
    if !(min < max) {
        return Err(Error::InvalidArgument(format!(
            "grid needs min < max, got [{min}, {max}]"
        )));
    }
    // Last point stays at or below `max` (up to rounding slack) when the
    // span is not an exact multiple of the resolution.
    let n = ((max - min) / resolution + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + i as f64 * resolution).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{diagonalize, ExactEngine};
    use crate::pauli::parse_pauli_sum;
    use crate::state::StateVector;

    fn two_level() -> (ExactEngine, PauliSum) {
        // H = Z/2: E = ±1/2, single transition Δ = 1.
        let h = parse_pauli_sum("0.5 Z\n").unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_plus(1);
        let x = parse_pauli_sum("1 X\n").unwrap();
        (ExactEngine::new(ed, &psi0).unwrap(), x)
    }

    #[test]
    fn identity_observable_reproduces_the_filter() {
        let (engine, _) = two_level();
        let id = parse_pauli_sum("1 I\n").unwrap();
        let f = GaussianFilter::new(2.0, 6.0).unwrap();
        let grid = uniform_grid(-2.0, 2.0, 0.05).unwrap();
        let est = estimate_g(&engine, &id, &f, &grid, 4000, SampleMode::Exact, 17).unwrap();
        // E[Ĝ(ω)] = p(τω): check the peak sits at ω = 0 with value ≈ 1.
        let peak = find_peak(&est, (-1.0, 1.0)).unwrap();
        assert!(peak.delta_hat.abs() < 0.051, "peak at {}", peak.delta_hat);
        assert!((peak.peak_value - 1.0).abs() < 0.02);
        // And a mid-grid point matches p(τω) within 4 stderr + truncation.
        let k = grid.iter().position(|&w| (w - 0.5).abs() < 1e-12).unwrap();
        let expect = f.p_value(0.5);
        let slack = 4.0 * est.stderr()[k] + crate::filter::truncation_bound(6.0).unwrap();
        assert!((est.g_hat()[k].re - expect).abs() < slack);
    }

    #[test]
    fn two_level_coherences_and_exact_g() {
        let h = parse_pauli_sum("0.5 Z\n").unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_plus(1);
        let x = parse_pauli_sum("1 X\n").unwrap();
        let table = coherence_table(&ed, &psi0, &x).unwrap();
        // Γ_{1,0} = 1/2 at Δ = 1 (and the conjugate at −1).
        let ts = table.transitions();
        assert_eq!(ts.len(), 2);
        assert!((ts[0].delta + 1.0).abs() < 1e-12);
        assert!((ts[1].delta - 1.0).abs() < 1e-12);
        assert!((ts[1].gamma.re - 0.5).abs() < 1e-12);
        assert!(ts[1].gamma.im.abs() < 1e-12);
        // Σ Γ = ⟨ψ0|X|ψ0⟩ = 1.
        assert!((table.total().re - 1.0).abs() < 1e-9);
        assert!(table.total().im.abs() < 1e-9);
        let kept_sum: num_complex::Complex64 = table.entries().iter().map(|e| e.gamma).sum();
        assert!((kept_sum.re - 1.0).abs() < 1e-9);

        // exact_g reproduces the closed form to 1e-12.
        let f = GaussianFilter::new(3.0, 6.0).unwrap();
        for omega in [-1.5, -0.4, 0.0, 0.7, 1.0, 1.3] {
            let closed = 0.5 * (-9.0f64 * (1.0 - omega) * (1.0 - omega)).exp()
                + 0.5 * (-9.0f64 * (1.0 + omega) * (1.0 + omega)).exp();
            assert!((exact_g(&table, &f, omega) - closed).abs() < 1e-12);
        }
        // Gaussian tail: far beyond every transition the detector vanishes.
        assert!(exact_g(&table, &f, 1.0 + 10.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn eigenstate_initial_state_gives_diagonal_table() {
        let h = parse_pauli_sum("0.5 Z\n").unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi0 = StateVector::all_zero(1);
        let z = parse_pauli_sum("1 Z\n").unwrap();
        let table = coherence_table(&ed, &psi0, &z).unwrap();
        assert!(table.entries().iter().all(|e| e.delta.abs() < 1e-12));
        assert!(table.entries().iter().all(|e| e.n_upper == e.n_lower));
    }

    #[test]
    fn single_transition_detector_peaks_at_delta() {
        let t = Transition {
            delta: 2.0,
            gamma: Complex64::new(1.0, 0.0),
            gap: f64::INFINITY,
        };
        let f = GaussianFilter::new(2.0, 4.0).unwrap();
        assert!((detector_value(&[t], &f, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn estimator_matches_two_level_peak() {
        let (engine, x) = two_level();
        let f = GaussianFilter::new(3.0, 6.0).unwrap();
        let grid = uniform_grid(0.0, 2.0, 0.01).unwrap();
        let est = estimate_g(&engine, &x, &f, &grid, 50_000, SampleMode::Exact, 4).unwrap();
        let peak = find_peak(&est, (0.5, 1.5)).unwrap();
        assert!(
            (peak.delta_hat - 1.0).abs() <= 0.02,
            "peak {}",
            peak.delta_hat
        );
        // |Ĝ| stays within the 1-norm bound up to noise.
        for (z, s) in est.g_hat().iter().zip(est.stderr()) {
            assert!(z.norm() <= 1.0 + 5.0 * s);
        }
        // FWHM of the isolated peak ≈ 2√(ln2)/τ within 15%.
        let expect = f.fwhm();
        assert!(
            (peak.fwhm_estimate / expect - 1.0).abs() < 0.15,
            "fwhm {} vs {}",
            peak.fwhm_estimate,
            expect
        );
    }

    #[test]
    fn shots_mode_is_unbiased_and_noisier() {
        let (engine, x) = two_level();
        let f = GaussianFilter::new(2.0, 5.0).unwrap();
        let grid = vec![0.8, 0.9, 1.0, 1.1];
        let exact = estimate_g(&engine, &x, &f, &grid, 3000, SampleMode::Exact, 9).unwrap();
        let shots = estimate_g(&engine, &x, &f, &grid, 3000, SampleMode::Shots(16), 9).unwrap();
        for k in 0..grid.len() {
            // Same times sub-stream, so the two estimates differ only by
            // shot noise; 5 combined standard errors covers it amply.
            let tol = 5.0 * (exact.stderr()[k] + shots.stderr()[k]);
            assert!((exact.g_hat()[k] - shots.g_hat()[k]).norm() < tol);
            assert!(shots.stderr()[k] >= exact.stderr()[k] * 0.9);
        }
    }

    #[test]
    fn estimator_argument_errors() {
        let (engine, x) = two_level();
        let f = GaussianFilter::new(3.0, 6.0).unwrap();
        assert!(estimate_g(&engine, &x, &f, &[0.0, 1.0], 0, SampleMode::Exact, 1).is_err());
        assert!(estimate_g(&engine, &x, &f, &[], 10, SampleMode::Exact, 1).is_err());
        assert!(estimate_g(&engine, &x, &f, &[0.0], 10, SampleMode::Shots(0), 1).is_err());
    }

    #[test]
    fn one_norm_warning_is_recorded() {
        let (engine, _) = two_level();
        let big = parse_pauli_sum("2.0 X\n").unwrap();
        let f = GaussianFilter::new(1.0, 4.0).unwrap();
        let est = estimate_g(&engine, &big, &f, &[0.0, 0.5], 100, SampleMode::Exact, 3).unwrap();
        assert!(est.meta().one_norm_warning);
    }

    #[test]
    fn find_peak_on_synthetic_bump() {
        let grid = uniform_grid(0.0, 4.0, 0.02).unwrap();
        let f = GaussianFilter::new(4.0, 4.0).unwrap();
        let g_hat: Vec<Complex64> = grid
            .iter()
            .map(|&w| Complex64::new(f.p_value(w - 2.0), 0.0))
            .collect();
        let n = grid.len();
        let est = SpectralEstimate::from_parts(
            grid,
            g_hat,
            vec![0.0; n],
            EstimateMeta {
                tau: 4.0,
                cutoff: 4.0,
                n_samples: 1,
                shots: None,
                seed: 0,
                one_norm_warning: false,
            },
        )
        .unwrap();
        let peak = find_peak(&est, (1.0, 3.0)).unwrap();
        assert!((peak.delta_hat - 2.0).abs() <= peak.grid_resolution);
        assert!((peak.fwhm_estimate - f.fwhm()).abs() < 0.04);
        assert_eq!(peak.re_sign, 1.0);
        // Window errors.
        assert!(find_peak(&est, (5.0, 6.0)).is_err());
        assert!(find_peak(&est, (2.0, 2.01)).is_err());
        assert!(find_peak(&est, (3.0, 1.0)).is_err());
    }

    #[test]
    fn real_part_is_even_for_real_systems() {
        // Real ψ0, H and O give a real time signal, so the cosine part of
        // every draw is even in ω: Re Ĝ(−ω) = Re Ĝ(ω) exactly.
        let (engine, x) = two_level();
        let f = GaussianFilter::new(3.0, 6.0).unwrap();
        let grid = vec![-1.2, -1.0, -0.3, 0.3, 1.0, 1.2];
        let est = estimate_g(&engine, &x, &f, &grid, 2000, SampleMode::Exact, 13).unwrap();
        for (i, j) in [(0usize, 5usize), (1, 4), (2, 3)] {
            assert_eq!(est.g_hat()[i].re, est.g_hat()[j].re);
            assert_eq!(est.g_hat()[i].im, -est.g_hat()[j].im);
        }
    }

    #[test]
    fn csv_header_and_shape() {
        let (engine, x) = two_level();
        let f = GaussianFilter::new(3.0, 6.0).unwrap();
        let est = estimate_g(&engine, &x, &f, &[0.0, 0.5, 1.0], 50, SampleMode::Exact, 2).unwrap();
        let mut buf = Vec::new();
        est.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "omega,re,im,abs,stderr");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn uniform_grid_stays_inside_the_span() {
        let grid = uniform_grid(0.0, 2.0, 0.3).unwrap();
        assert!((grid.last().unwrap() - 1.8).abs() < 1e-12);
        let exact = uniform_grid(0.0, 2.0, 0.01).unwrap();
        assert_eq!(exact.len(), 201);
        assert!((exact.last().unwrap() - 2.0).abs() < 1e-12);
        assert!(uniform_grid(1.0, 1.0, 0.1).is_err());
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn grid_must_ascend() {
        let meta = EstimateMeta {
            tau: 1.0,
            cutoff: 1.0,
            n_samples: 1,
            shots: None,
            seed: 0,
            one_norm_warning: false,
        };
        let z = Complex64::new(0.0, 0.0);
        assert!(
            SpectralEstimate::from_parts(vec![0.0, 0.0], vec![z, z], vec![0.0, 0.0], meta).is_err()
        );
    }
}
