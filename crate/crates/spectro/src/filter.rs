//! The Gaussian spectral filter and its dual time-sampling distribution.
//!
//! The filter `p(τω) = exp(−τ²ω²)` selects transition energies in the
//! frequency domain. Its Fourier dual `g̃(t) = ∫ p(u) e^{iut} du = √π e^{−t²/4}`
//! is real and nonnegative (phase θ_t = 0) with normalization `c = ∫|g̃| = 2π`,
//! so the normalized sampling density is
//!
//! ```text
//!   g(t) = e^{−t²/4} / (2√π),
//! ```
//!
//! a normal with mean 0 and variance 2, independent of τ. Draws with
//! `|t| > T` contribute exactly zero downstream; they are not resampled,
//! which keeps the truncated estimator unbiased for the truncated detector.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Gaussian filter parameters: the frequency-resolution scale `τ` and the
/// dimensionless time cutoff `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFilter {
    tau: f64,
    cutoff: f64,
}

impl GaussianFilter {
    pub fn new(tau: f64, cutoff: f64) -> Result<GaussianFilter> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tau must be > 0, got {tau}"
            )));
        }
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cutoff T must be > 0, got {cutoff}"
            )));
        }
        Ok(GaussianFilter { tau, cutoff })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `p(τ·delta) = exp(−τ²·delta²)`.
    pub fn p_value(&self, delta: f64) -> f64 {
        (-self.tau * self.tau * delta * delta).exp()
    }

    /// Full width at half maximum of an isolated filtered peak, `2√(ln 2)/τ`.
    pub fn fwhm(&self) -> f64 {
        2.0 * (2.0f64).ln().sqrt() / self.tau
    }

    /// Draw a dimensionless time from `g(t)`; the physical evolution time
    /// used downstream is `τ·t`.
    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_time(rng)
    }
}

/// Draw from `g(t) = e^{−t²/4}/(2√π)`, i.e. normal(0, variance 2). The
/// distribution is τ-independent.
pub fn sample_time<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Normal::new(0.0, std::f64::consts::SQRT_2)
        .expect("fixed parameters are valid")
        .sample(rng)
}

/// Upper bound `exp(−T²/4)` on the truncation error
/// `|G^{(T)}(ω) − G(ω)| ≤ 2∫_T^∞ g(t)dt = erfc(T/2) ≤ exp(−T²/4)`.
pub fn truncation_bound(t_cut: f64) -> Result<f64> {
    if !(t_cut > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff T must be > 0, got {t_cut}"
        )));
    }
    Ok((-t_cut * t_cut / 4.0).exp())
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F₁ − F₂|`.
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at significance `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Outcome of [`scaled_sampler_equivalence_check`].
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceReport {
    pub tau: f64,
    pub n_draws: usize,
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Check the equivalence of the two filter formalisms: scaled draws
/// `τ·sample_time()` must be distributed as `Pr(t, τ) = (1/τ)·g(t/τ)`, i.e.
/// as a normal with variance `2τ²`. A two-sample KS statistic against direct
/// draws from that normal must stay below the 1% critical value.
pub fn scaled_sampler_equivalence_check<R: Rng + ?Sized>(
    f: &GaussianFilter,
    n_draws: usize,
    rng: &mut R,
) -> Result<EquivalenceReport> {
    if n_draws < 10_000 {
        return Err(Error::InvalidArgument(format!(
            "equivalence check needs >= 10^4 draws, got {n_draws}"
        )));
    }
    let mut scaled: Vec<f64> = (0..n_draws).map(|_| f.tau() * sample_time(rng)).collect();
    let direct_dist =
        Normal::new(0.0, std::f64::consts::SQRT_2 * f.tau()).expect("fixed parameters are valid");
    let mut direct: Vec<f64> = (0..n_draws).map(|_| direct_dist.sample(rng)).collect();
    let statistic = ks_statistic(&mut scaled, &mut direct);
    let critical = ks_critical(n_draws, n_draws, 0.01);
    Ok(EquivalenceReport {
        tau: f.tau(),
        n_draws,
        statistic,
        critical,
        pass: statistic < critical,
    })
}
