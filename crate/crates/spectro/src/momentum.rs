//! Site-resolved spectra, their discrete spatial Fourier transform
//! `G_k(ω) = Σ_x e^{−ikx} G_x(ω)`, and dispersion extraction.
//!
//! The forward DFT is unnormalized (no 1/N), matching the convention where
//! only relative intensities and argmax locations matter. Momenta live on
//! `k_m = 2πm/N`, `m = 0..N−1`.

use crate::error::{Error, Result};
use crate::estimate::{assemble_estimate, sample_raw_multi, SampleMode, SpectralEstimate};
use crate::evolve::Engine;
use crate::filter::GaussianFilter;
use crate::pauli::{Pauli, PauliString, PauliSum};
use ndarray::Array2;
use num_complex::Complex64;
use std::io::Write;

/// One spectral estimate per site, sharing the grid, filter and sampling
/// metadata.
#[derive(Debug, Clone)]
pub struct SiteResolvedSpectra {
    per_site: Vec<SpectralEstimate>,
}

impl SiteResolvedSpectra {
    pub fn from_estimates(per_site: Vec<SpectralEstimate>) -> Result<SiteResolvedSpectra> {
        if per_site.is_empty() {
            return Err(Error::InvalidArgument("no site spectra given".into()));
        }
        let first = &per_site[0];
        for est in &per_site[1..] {
            if est.omega_grid() != first.omega_grid() || est.meta() != first.meta() {
                return Err(Error::InvalidArgument(
                    "site spectra must share an identical grid and meta".into(),
                ));
            }
        }
        Ok(SiteResolvedSpectra { per_site })
    }

    pub fn n_sites(&self) -> usize {
        self.per_site.len()
    }

    pub fn omega_grid(&self) -> &[f64] {
        self.per_site[0].omega_grid()
    }

    pub fn site(&self, x: usize) -> &SpectralEstimate {
        &self.per_site[x]
    }

    pub fn sites(&self) -> &[SpectralEstimate] {
        &self.per_site
    }
}

/// The observable family `O(x)` = one fixed Pauli letter at each site.
pub fn site_family(n: usize, letter: Pauli) -> Result<Vec<PauliString>> {
    if letter == Pauli::I {
        return Err(Error::InvalidArgument(
            "site family needs a non-identity letter".into(),
        ));
    }
    (0..n).map(|x| PauliString::single(n, x, letter)).collect()
}

fn validate_family(family: &[PauliString], n: usize) -> Result<()> {
    if family.len() != n {
        return Err(Error::InvalidArgument(format!(
            "family has {} observables for {} sites",
            family.len(),
            n
        )));
    }
    let mut letter = None;
    for (x, s) in family.iter().enumerate() {
        let support = s.support();
        if support != [x] {
            return Err(Error::InvalidArgument(format!(
                "family observable {x} must be a single Pauli letter at site {x}, got {s}"
            )));
        }
        let l = s.letters()[x];
        match letter {
            None => letter = Some(l),
            Some(prev) if prev != l => {
                return Err(Error::InvalidArgument(
                    "mixed-letter site families are not supported".into(),
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Estimate `G_x(ω)` for every site, reusing the same sampled times and
/// evolved states across the whole family (all site observables are read
/// out per draw).
pub fn estimate_site_spectra(
    engine: &dyn Engine,
    family: &[PauliString],
    f: &GaussianFilter,
    omega_grid: &[f64],
    n_samples: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<SiteResolvedSpectra> {
    let n = engine.n_qubits();
    validate_family(family, n)?;
    let observables: Vec<PauliSum> = family
        .iter()
        .map(|s| PauliSum::from_string(1.0, s.clone()))
        .collect();
    let raws = sample_raw_multi(engine, &observables, f, n_samples, mode, seed)?;
    let per_site = raws
        .iter()
        .map(|raw| assemble_estimate(raw, omega_grid))
        .collect::<Result<Vec<_>>>()?;
    SiteResolvedSpectra::from_estimates(per_site)
}

/// `|G_k(ω)|` on the discrete momentum grid, with the underlying complex
/// transform retained.
#[derive(Debug, Clone)]
pub struct MomentumSpectrum {
    k_grid: Vec<f64>,
    omega_grid: Vec<f64>,
    g_k: Array2<Complex64>,
    zero_k_removed: bool,
}

impl MomentumSpectrum {
    pub fn n_sites(&self) -> usize {
        self.k_grid.len()
    }

    /// `k_m = 2πm/N`.
    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }

    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }

    pub fn g_k(&self) -> &Array2<Complex64> {
        &self.g_k
    }

    pub fn intensity(&self, k_index: usize, omega_index: usize) -> f64 {
        if self.zero_k_removed && k_index == 0 {
            0.0
        } else {
            self.g_k[[k_index, omega_index]].norm()
        }
    }

    pub fn zero_k_removed(&self) -> bool {
        self.zero_k_removed
    }

    /// Serialize as CSV with header `k_index,k,omega,intensity`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k_index,k,omega,intensity")?;
        for m in 0..self.k_grid.len() {
            for (j, omega) in self.omega_grid.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    m,
                    self.k_grid[m],
                    omega,
                    self.intensity(m, j)
                )?;
            }
        }
        Ok(())
    }
}

/// Spatial Fourier transform, keeping the `k = 0` row.
pub fn spatial_fourier(spectra: &SiteResolvedSpectra) -> Result<MomentumSpectrum> {
    spatial_fourier_with(spectra, false)
}

/// Spatial Fourier transform; `remove_k_zero` blanks the `k = 0` row
/// (presentation flag, default on for dispersion extraction, off for raw
/// serialization).
pub fn spatial_fourier_with(
    spectra: &SiteResolvedSpectra,
    remove_k_zero: bool,
) -> Result<MomentumSpectrum> {
    let n = spectra.n_sites();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "spatial Fourier transform needs at least 2 sites".into(),
        ));
    }
    let omega_grid = spectra.omega_grid().to_vec();
    let n_omega = omega_grid.len();
    let mut g_k = Array2::<Complex64>::zeros((n, n_omega));
    let k_grid: Vec<f64> = (0..n)
        .map(|m| 2.0 * std::f64::consts::PI * m as f64 / n as f64)
        .collect();
    for (m, &k) in k_grid.iter().enumerate() {
        for x in 0..n {
            let phase = Complex64::from_polar(1.0, -k * x as f64);
            let site = spectra.site(x).g_hat();
            for j in 0..n_omega {
                g_k[[m, j]] += phase * site[j];
            }
        }
    }
    Ok(MomentumSpectrum {
        k_grid,
        omega_grid,
        g_k,
        zero_k_removed: remove_k_zero,
    })
}

/// Per-momentum dispersion sample: the argmax frequency inside the window,
/// or absent when the row's peak intensity falls below the floor.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DispersionPoint {
    pub k_index: usize,
    pub k: f64,
    pub omega_star: Option<f64>,
    pub intensity: f64,
}

/// Default floor: rows whose peak is below this fraction of the global
/// maximum are reported absent.
pub const DEFAULT_INTENSITY_FLOOR_FRACTION: f64 = 1e-3;

/// Track the intensity ridge: per-k argmax of `|G_k(ω)|` within the window.
pub fn extract_dispersion(
    m: &MomentumSpectrum,
    window: (f64, f64),
) -> Result<Vec<DispersionPoint>> {
    extract_dispersion_with(m, window, DEFAULT_INTENSITY_FLOOR_FRACTION)
}

pub fn extract_dispersion_with(
    m: &MomentumSpectrum,
    window: (f64, f64),
    floor_fraction: f64,
) -> Result<Vec<DispersionPoint>> {
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::InvalidWindow(format!("[{a}, {b}] is empty")));
    }
    let in_window: Vec<usize> = (0..m.omega_grid().len())
        .filter(|&j| m.omega_grid()[j] >= a && m.omega_grid()[j] <= b)
        .collect();
    if in_window.is_empty() {
        return Err(Error::InvalidWindow(format!(
            "[{a}, {b}] does not overlap the frequency grid"
        )));
    }
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity(m.n_sites());
    // The floor is relative to the raw spectrum's maximum (k = 0 included
    // even when masked), so a translation-invariant signal cannot promote
    // numerical dust in the k ≠ 0 rows.
    let mut global_max: f64 = 0.0;
    for ki in 0..m.n_sites() {
        let &j_star = in_window
            .iter()
            .max_by(|&&x, &&y| {
                m.intensity(ki, x)
                    .partial_cmp(&m.intensity(ki, y))
                    .expect("finite intensities")
            })
            .expect("window is nonempty");
        let peak = m.intensity(ki, j_star);
        for &j in &in_window {
            global_max = global_max.max(m.g_k()[[ki, j]].norm());
        }
        rows.push((j_star, peak));
    }
    let floor = floor_fraction * global_max;
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(ki, (j_star, peak))| DispersionPoint {
            k_index: ki,
            k: m.k_grid()[ki],
            omega_star: (peak >= floor && peak > 0.0).then(|| m.omega_grid()[j_star]),
            intensity: peak,
        })
        .collect())
}

/// Serialize dispersion points as CSV `k_index,k,omega_star,intensity`;
/// absent rows leave `omega_star` empty.
pub fn write_dispersion_csv<W: Write>(points: &[DispersionPoint], mut w: W) -> Result<()> {
    writeln!(w, "k_index,k,omega_star,intensity")?;
    for p in points {
        match p.omega_star {
            Some(omega) => writeln!(w, "{},{},{},{}", p.k_index, p.k, omega, p.intensity)?,
            None => writeln!(w, "{},{},,{}", p.k_index, p.k, p.intensity)?,
        }
    }
    Ok(())
}
