//! End-to-end validation fixtures binding the exact-diagonalization oracle
//! to the Monte Carlo estimator.
//!
//! Each fixture runs one reference scenario, measures the quantities its
//! acceptance tolerances are written against, and reports pass/fail without
//! throwing. Every fixture is deterministic under its master seed: re-runs
//! serialize to bit-identical JSON regardless of scheduling.

use crate::error::{Error, Result};
use crate::estimate::{
    assemble_estimate, find_peak, sample_raw_multi, uniform_grid, SampleMode, SpectralEstimate,
};
use crate::evolve::{diagonalize, ExactEngine, TrotterEngine, TrotterPlan};
use crate::filter::GaussianFilter;
use crate::models::{build_heisenberg, build_tfim};
use crate::momentum::{
    estimate_site_spectra, extract_dispersion, site_family, spatial_fourier_with,
};
use crate::noise::{
    apply_global_noise_raw, benchmark_decay, fit_lambda, mitigate, GlobalDepolarizingModel,
    LocalDepolarizingModel, NoiseModel, NoisyTrotterEngine,
};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{prepare_state, BaseState, Gate, StatePrepSpec};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

/// Master seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 11;

/// The available fixture names.
pub const FIXTURE_NAMES: &[&str] = &["two_level", "heis7", "ising11", "ferro13", "noise7"];

/// Fixtures that diagonalize 11+ qubit systems; the CLI keeps these behind
/// an explicit request.
pub const HEAVY_FIXTURES: &[&str] = &["ising11", "ferro13"];

/// One measured quantity with its acceptance range.
#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

impl Measurement {
    fn range(
        name: impl Into<String>,
        value: f64,
        min: Option<f64>,
        max: Option<f64>,
    ) -> Measurement {
        let pass =
            value.is_finite() && min.is_none_or(|m| value >= m) && max.is_none_or(|m| value <= m);
        Measurement {
            name: name.into(),
            value,
            min,
            max,
            pass,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, max: f64) -> Measurement {
        Measurement::range(name, value, None, Some(max))
    }

    fn at_least(name: impl Into<String>, value: f64, min: f64) -> Measurement {
        Measurement::range(name, value, Some(min), None)
    }

    fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Measurement {
        Measurement::range(name, value, Some(lo), Some(hi))
    }
}

/// Outcome of one fixture: pass iff every measurement is inside its range.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureResult {
    pub name: String,
    pub seed: u64,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
}

impl FixtureResult {
    fn new(name: &str, seed: u64, measurements: Vec<Measurement>) -> FixtureResult {
        FixtureResult {
            name: name.into(),
            seed,
            pass: measurements.iter().all(|m| m.pass),
            measurements,
        }
    }

    /// One-line JSON form used for the fixture log.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("fixture results are serializable")
    }
}

/// Run a named fixture under a master seed.
pub fn run_fixture(name: &str, seed: u64) -> Result<FixtureResult> {
    match name {
        "two_level" => fixture_two_level(seed),
        "heis7" => fixture_heis7(seed),
        "ising11" => fixture_ising11(seed),
        "ferro13" => fixture_ferro13(seed),
        "noise7" => fixture_noise7(seed),
        other => Err(Error::InvalidArgument(format!(
            "unknown fixture '{other}'; available: {FIXTURE_NAMES:?}"
        ))),
    }
}

/// Local maxima of `|Ĝ(ω)|` at or above `rel_floor` times the global max.
pub fn detect_peaks(est: &SpectralEstimate, rel_floor: f64) -> Vec<f64> {
    let abs: Vec<f64> = est.g_hat().iter().map(|z| z.norm()).collect();
    let max = abs.iter().cloned().fold(0.0f64, f64::max);
    let floor = rel_floor * max;
    let mut peaks = Vec::new();
    for i in 1..abs.len().saturating_sub(1) {
        if abs[i] >= floor && abs[i] > abs[i - 1] && abs[i] >= abs[i + 1] {
            peaks.push(est.omega_grid()[i]);
        }
    }
    peaks
}

/// Reference transitions of the 7-site Heisenberg scenario (those with
/// `|Γ| ≥ 0.02`), frozen from a one-time oracle run so routine test runs do
/// not re-derive them. The opt-in `heis7_reference_regenerates` test checks
/// the frozen values against a fresh diagonalization.
pub fn heis7_reference() -> Vec<(f64, f64)> {
    let text = include_str!("../data/heis7_reference.csv");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut parts = l.split(',');
            let delta: f64 = parts
                .next()
                .expect("delta column")
                .parse()
                .expect("frozen data");
            let gamma: f64 = parts
                .next()
                .expect("gamma column")
                .parse()
                .expect("frozen data");
            (delta, gamma)
        })
        .collect()
}

/// Visibility threshold for the heis7 reference set.
pub const HEIS7_GAMMA_FLOOR: f64 = 0.02;

fn heis7_system() -> Result<(PauliSum, StatePrepSpec, PauliSum)> {
    let h = build_heisenberg(7, -1.0, -0.01, true)?;
    let prep = StatePrepSpec::new(BaseState::AllPlus).with_op(3, Gate::X);
    let o = PauliSum::from_string(1.0, PauliString::single(7, 3, Pauli::Y)?);
    Ok((h, prep, o))
}

fn two_level_estimate(seed: u64) -> Result<SpectralEstimate> {
    let h = PauliSum::from_string(0.5, PauliString::single(1, 0, Pauli::Z)?);
    let psi0 = prepare_state(&StatePrepSpec::new(BaseState::AllPlus), 1)?;
    let o = PauliSum::from_string(1.0, PauliString::single(1, 0, Pauli::X)?);
    let engine = ExactEngine::new(diagonalize(&h)?, &psi0)?;
    let f = GaussianFilter::new(3.0, 6.0)?;
    let grid = uniform_grid(0.0, 2.0, 0.005)?;
    let raw = sample_raw_multi(&engine, &[o], &f, 50_000, SampleMode::Exact, seed)?;
    assemble_estimate(&raw[0], &grid)
}

/// Two-level peak recovery: H = Z/2, ψ₀ = |+⟩, O = X, τ = 3, T = 6,
/// N_s = 5·10⁴, exact expectations; the Δ = 1 transition must be located
/// within 0.02.
fn fixture_two_level(seed: u64) -> Result<FixtureResult> {
    let est = two_level_estimate(seed)?;
    let peak = find_peak(&est, (0.5, 1.5))?;
    let measurements = vec![
        Measurement::at_most("peak_error", (peak.delta_hat - 1.0).abs(), 0.02),
        Measurement::within(
            "fwhm_over_expected",
            peak.fwhm_estimate / (2.0 * (2.0f64).ln().sqrt() / 3.0),
            0.85,
            1.15,
        ),
    ];
    Ok(FixtureResult::new("two_level", seed, measurements))
}

fn heis7_estimate(tau: f64, seed: u64) -> Result<SpectralEstimate> {
    let (h, prep, o) = heis7_system()?;
    let psi0 = prepare_state(&prep, 7)?;
    let engine = ExactEngine::new(diagonalize(&h)?, &psi0)?;
    let f = GaussianFilter::new(tau, 6.0)?;
    let grid = uniform_grid(-1.0, 1.0, 0.004)?;
    let raw = sample_raw_multi(&engine, &[o], &f, 100_000, SampleMode::Exact, seed)?;
    assemble_estimate(&raw[0], &grid)
}

/// 7-site periodic Heisenberg (J = −1, h_z = −0.01), quench X₃ on |+⟩^⊗7,
/// O = Y₃, τ = 8, N_s = 10⁵ exact: every frozen reference transition with
/// |Γ| ≥ 0.02 must have a detected peak within √(ln 2)/τ, and the FWHM must
/// halve between τ = 4 and τ = 8.
fn fixture_heis7(seed: u64) -> Result<FixtureResult> {
    let est8 = heis7_estimate(8.0, seed)?;
    let est4 = heis7_estimate(4.0, seed)?;
    let tolerance = (2.0f64).ln().sqrt() / 8.0;
    let peaks = detect_peaks(&est8, 0.25);
    let mut measurements = Vec::new();
    measurements.push(Measurement::at_least(
        "n_detected_peaks",
        peaks.len() as f64,
        1.0,
    ));
    for (delta, gamma_abs) in heis7_reference() {
        if gamma_abs < HEIS7_GAMMA_FLOOR {
            continue;
        }
        let nearest = peaks
            .iter()
            .map(|p| (p - delta).abs())
            .fold(f64::INFINITY, f64::min);
        measurements.push(Measurement::at_most(
            format!("peak_distance_delta_{delta}"),
            nearest,
            tolerance,
        ));
    }
    let p8 = find_peak(&est8, (0.0, 0.6))?;
    let p4 = find_peak(&est4, (0.0, 0.9))?;
    measurements.push(Measurement::within(
        "fwhm_ratio_tau8_over_tau4",
        p8.fwhm_estimate / p4.fwhm_estimate,
        0.45,
        0.55,
    ));
    Ok(FixtureResult::new("heis7", seed, measurements))
}

/// Transverse-field Ising single-particle dispersion `ε(k) = 2√(5 − 4cos k)`
/// for J = 1, h_x = 2.
pub fn tfim_dispersion(k: f64) -> f64 {
    2.0 * (5.0 - 4.0 * k.cos()).sqrt()
}

/// Ferromagnetic single-magnon dispersion `ω(k) = 4(1 − cos k)` for J = −1.
pub fn magnon_dispersion(k: f64) -> f64 {
    4.0 * (1.0 - k.cos())
}

/// 11-site periodic Ising (J = 1, h_x = 2), quench R_y(π/2) on site 5 of
/// |+⟩^⊗11, per-site O = Y, τ = 4 (FWHM ≤ 0.5): the intensity ridge must
/// track `2√(5 − 4cos k)` within 0.8 for every k ≠ 0.
fn fixture_ising11(seed: u64) -> Result<FixtureResult> {
    let n = 11;
    let h = build_tfim(n, 1.0, 2.0, 0.0, true)?;
    let prep = StatePrepSpec::new(BaseState::AllPlus).with_op(5, Gate::Ry(FRAC_PI_2));
    let psi0 = prepare_state(&prep, n)?;
    let engine = ExactEngine::new(diagonalize(&h)?, &psi0)?;
    let f = GaussianFilter::new(4.0, 4.0)?;
    let grid = uniform_grid(0.5, 7.5, 0.02)?;
    let family = site_family(n, Pauli::Y)?;
    let sites = estimate_site_spectra(&engine, &family, &f, &grid, 4000, SampleMode::Exact, seed)?;
    let momentum = spatial_fourier_with(&sites, true)?;
    let dispersion = extract_dispersion(&momentum, (1.0, 7.5))?;
    let mut measurements = vec![Measurement::within("fwhm_bound", f.fwhm(), 0.0, 0.5)];
    let mut worst: f64 = 0.0;
    let mut present = 0usize;
    for p in &dispersion[1..] {
        if let Some(omega) = p.omega_star {
            present += 1;
            worst = worst.max((omega - tfim_dispersion(p.k)).abs());
        }
    }
    measurements.push(Measurement::within(
        "rows_present",
        present as f64,
        (n - 1) as f64,
        (n - 1) as f64,
    ));
    measurements.push(Measurement::at_most("max_dispersion_deviation", worst, 0.8));
    Ok(FixtureResult::new("ising11", seed, measurements))
}

/// 13-site periodic ferromagnetic Heisenberg (J = −1, h_z = −0.01), quench
/// R_y(π/2) on site 6 of |0⟩^⊗13, per-site O = Y, τ = 5: the magnon ridge
/// must track `4(1 − cos k)` within 0.8 for every above-floor k ≠ 0.
fn fixture_ferro13(seed: u64) -> Result<FixtureResult> {
    let n = 13;
    let h = build_heisenberg(n, -1.0, -0.01, true)?;
    let prep = StatePrepSpec::new(BaseState::AllZero).with_op(6, Gate::Ry(FRAC_PI_2));
    let psi0 = prepare_state(&prep, n)?;
    let engine = ExactEngine::new(diagonalize(&h)?, &psi0)?;
    let f = GaussianFilter::new(5.0, 4.0)?;
    let grid = uniform_grid(0.1, 8.6, 0.025)?;
    let family = site_family(n, Pauli::Y)?;
    let sites = estimate_site_spectra(&engine, &family, &f, &grid, 1200, SampleMode::Exact, seed)?;
    let momentum = spatial_fourier_with(&sites, true)?;
    let dispersion = extract_dispersion(&momentum, (0.1, 8.6))?;
    let mut worst: f64 = 0.0;
    let mut present = 0usize;
    for p in &dispersion[1..] {
        if let Some(omega) = p.omega_star {
            present += 1;
            worst = worst.max((omega - magnon_dispersion(p.k)).abs());
        }
    }
    let measurements = vec![
        Measurement::at_least("rows_present", present as f64, 1.0),
        Measurement::at_most("max_dispersion_deviation", worst, 0.8),
    ];
    Ok(FixtureResult::new("ferro13", seed, measurements))
}

fn y_polarized(n: usize) -> Result<crate::state::StateVector> {
    let mut prep = StatePrepSpec::new(BaseState::AllZero);
    for q in 0..n {
        prep = prep.with_op(q, Gate::Rx(-FRAC_PI_2));
    }
    prepare_state(&prep, n)
}

fn average_y(n: usize) -> Result<PauliSum> {
    let terms = (0..n)
        .map(|q| Ok((1.0 / n as f64, PauliString::single(n, q, Pauli::Y)?)))
        .collect::<Result<Vec<_>>>()?;
    PauliSum::from_terms(n, terms)
}

/// 7-site Ising noise suite (h_x = 2, h_z = 0.1, δt = 0.4):
/// (a) a global λ = 0.05 benchmark fits back within 5% and rescaling then
/// recovers noiseless per-draw values to 1e-10; (b) local depolarizing
/// benchmarks at p ∈ {0.001, 0.005} fit an exponential with R² ≥ 0.99;
/// (c) under local p = 0.005 the mitigated spectrum error stays strictly
/// below the noisy one on average over the grid.
fn fixture_noise7(seed: u64) -> Result<FixtureResult> {
    let n = 7;
    let h = build_tfim(n, 1.0, 2.0, 0.1, true)?;
    let plan = TrotterPlan::new(&h, 2.5)?; // δt = 0.4
    let psi_bench = y_polarized(n)?;
    let avg_y = average_y(n)?;
    let depths: Vec<usize> = (1..=8).collect();
    let time_equivalent = |rows: &[(usize, f64)]| -> Vec<(f64, f64)> {
        rows.iter()
            .map(|&(m, v)| (2.0 * m as f64 * plan.dt(), v))
            .collect()
    };
    let mut measurements = Vec::new();

    // (a) Global model round trip.
    let global = GlobalDepolarizingModel::new(0.05)?;
    let rows = benchmark_decay(
        &plan,
        &psi_bench,
        &NoiseModel::Global(global),
        &avg_y,
        &depths,
    )?;
    let global_fit = fit_lambda(&time_equivalent(&rows))?;
    measurements.push(Measurement::at_most(
        "global_lambda_relative_error",
        (global_fit.lambda_hat - 0.05).abs() / 0.05,
        0.05,
    ));

    // (b) Local benchmarks.
    let mut fit_y1 = None;
    for p_gate in [0.001, 0.005] {
        let model = NoiseModel::Local(LocalDepolarizingModel::new(p_gate)?);
        let rows = benchmark_decay(&plan, &psi_bench, &model, &avg_y, &depths)?;
        let fit = fit_lambda(&time_equivalent(&rows))?;
        measurements.push(Measurement::at_least(
            format!("local_r_squared_p_{p_gate}"),
            fit.r_squared,
            0.99,
        ));
        if p_gate == 0.005 {
            // Per-observable fit used for mitigation in (c).
            let y1 = PauliSum::from_string(1.0, PauliString::single(n, 1, Pauli::Y)?);
            let rows = benchmark_decay(&plan, &psi_bench, &model, &y1, &depths)?;
            fit_y1 = Some(fit_lambda(&time_equivalent(&rows))?);
        }
    }
    let fit_y1 = fit_y1.expect("p = 0.005 branch ran");

    // (c) Mitigated vs noisy spectra against the noiseless Trotter baseline,
    // sharing one set of sampled times.
    let quench = StatePrepSpec::new(BaseState::AllPlus).with_op(3, Gate::Ry(FRAC_PI_2));
    let psi0 = prepare_state(&quench, n)?;
    let y1 = PauliSum::from_string(1.0, PauliString::single(n, 1, Pauli::Y)?);
    let f = GaussianFilter::new(2.0, 2.5)?;
    let model = LocalDepolarizingModel::new(0.005)?;
    let ideal_engine = TrotterEngine::new(plan.clone(), psi0.clone())?;
    let noisy_engine = NoisyTrotterEngine::new(plan.clone(), &psi0, model)?;
    let n_samples = 128;
    let raw_ideal = sample_raw_multi(
        &ideal_engine,
        std::slice::from_ref(&y1),
        &f,
        n_samples,
        SampleMode::Exact,
        seed,
    )?
    .remove(0);
    let raw_noisy = sample_raw_multi(
        &noisy_engine,
        std::slice::from_ref(&y1),
        &f,
        n_samples,
        SampleMode::Exact,
        seed,
    )?
    .remove(0);
    let raw_mitigated = mitigate(&raw_noisy, &fit_y1);
    let grid = uniform_grid(-6.0, 6.0, 0.2)?;
    let g_ideal = assemble_estimate(&raw_ideal, &grid)?;
    let g_noisy = assemble_estimate(&raw_noisy, &grid)?;
    let g_mitigated = assemble_estimate(&raw_mitigated, &grid)?;
    let grid_error = |est: &SpectralEstimate| -> f64 {
        est.g_hat()
            .iter()
            .zip(g_ideal.g_hat())
            .map(|(a, b)| (a - b).norm())
            .sum::<f64>()
            / est.len() as f64
    };
    let err_noisy = grid_error(&g_noisy);
    let err_mitigated = grid_error(&g_mitigated);
    measurements.push(Measurement::at_most(
        "mitigated_over_noisy_grid_error",
        err_mitigated / err_noisy,
        0.999,
    ));
    let time_rmse = |raw: &crate::estimate::RawSignal| -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..raw.n_samples() {
            if raw.is_kept(i) {
                let d = raw.values[i] - raw_ideal.values[i];
                acc += d * d;
                count += 1;
            }
        }
        (acc / count as f64).sqrt()
    };
    measurements.push(Measurement::at_most(
        "mitigated_over_noisy_time_rmse",
        time_rmse(&raw_mitigated) / time_rmse(&raw_noisy),
        0.999,
    ));

    // Exact inversion under the global model with the fitted rate.
    let raw_gnoisy = apply_global_noise_raw(&raw_ideal, &global);
    let recovered = mitigate(&raw_gnoisy, &global_fit);
    let worst = (0..raw_ideal.n_samples())
        .map(|i| (recovered.values[i] - raw_ideal.values[i]).abs())
        .fold(0.0f64, f64::max);
    measurements.push(Measurement::at_most(
        "global_mitigation_residual",
        worst,
        1e-10,
    ));

    Ok(FixtureResult::new("noise7", seed, measurements))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fixture_rejected() {
        assert!(run_fixture("nope", DEFAULT_SEED).is_err());
    }

    #[test]
    fn two_level_fixture_passes_and_is_deterministic() {
        let a = run_fixture("two_level", DEFAULT_SEED).unwrap();
        assert!(a.pass, "{}", a.to_json_line());
        let b = run_fixture("two_level", DEFAULT_SEED).unwrap();
        assert_eq!(a.to_json_line(), b.to_json_line());
        let c = run_fixture("two_level", DEFAULT_SEED + 1).unwrap();
        assert!(c.pass);
        assert_ne!(a.to_json_line(), c.to_json_line());
    }

    #[test]
    fn frozen_heis7_reference_parses() {
        let reference = heis7_reference();
        assert_eq!(reference.len(), 2);
        assert!((reference[0].0 + 0.02).abs() < 1e-15);
        assert!((reference[1].0 - 0.02).abs() < 1e-15);
        assert!(reference.iter().all(|&(_, g)| g >= HEIS7_GAMMA_FLOOR));
    }

    /// Opt-in oracle regeneration: re-derives the heis7 reference from a
    /// fresh diagonalization and checks the frozen file. Run with
    /// `cargo test -- --ignored heis7_reference_regenerates`.
    #[test]
    #[ignore]
    fn heis7_reference_regenerates() {
        let (h, prep, o) = heis7_system().unwrap();
        let psi0 = prepare_state(&prep, 7).unwrap();
        let ed = diagonalize(&h).unwrap();
        let table = crate::estimate::coherence_table(&ed, &psi0, &o).unwrap();
        let fresh: Vec<(f64, f64)> = table
            .visible_transitions(HEIS7_GAMMA_FLOOR)
            .iter()
            .map(|t| (t.delta, t.gamma.norm()))
            .collect();
        let frozen = heis7_reference();
        assert_eq!(fresh.len(), frozen.len());
        for ((fd, fg), (zd, zg)) in fresh.iter().zip(&frozen) {
            assert!((fd - zd).abs() < 1e-9, "delta {fd} vs frozen {zd}");
            assert!((fg - zg).abs() < 1e-9, "gamma {fg} vs frozen {zg}");
        }
    }

    #[test]
    fn detect_peaks_finds_local_maxima() {
        use crate::estimate::EstimateMeta;
        use num_complex::Complex64;
        let grid = uniform_grid(-2.0, 2.0, 0.01).unwrap();
        let g: Vec<Complex64> = grid
            .iter()
            .map(|&w| {
                let bump = |c: f64| (-30.0 * (w - c) * (w - c)).exp();
                Complex64::new(bump(-1.0) + 0.8 * bump(0.7), 0.0)
            })
            .collect();
        let n = grid.len();
        let est = SpectralEstimate::from_parts(
            grid,
            g,
            vec![0.0; n],
            EstimateMeta {
                tau: 1.0,
                cutoff: 1.0,
                n_samples: 1,
                shots: None,
                seed: 0,
                one_norm_warning: false,
            },
        )
        .unwrap();
        let peaks = detect_peaks(&est, 0.25);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] + 1.0).abs() < 0.011);
        assert!((peaks[1] - 0.7).abs() < 0.011);
    }
}
