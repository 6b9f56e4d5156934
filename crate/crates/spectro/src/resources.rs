//! Resource calculators for transition-energy estimation and the scan-based
//! verification of the peak-separation inequalities.
//!
//! For a transition `Δ_j` with real weight `Γ_j > 0` and a chosen lower
//! bound `γ` on its gap difference, the filter scale
//!
//! ```text
//!   τ = (1 / 0.9γ) · √ln(C / (ε²Γ_j))
//! ```
//!
//! guarantees (for `ε ≤ 0.2γ`) that the detector separates `Δ_j` from its
//! neighbours:
//!
//! ```text
//!   Γ_j − G(ω) ≤ 0.3 τ²ε²Γ_j   for |ω − Δ_j| ≤ 0.5ε,
//!   Γ_j − G(ω) ≥ 0.8 τ²ε²Γ_j   for |ω − Δ_j| ∈ (ε, 0.1γ).
//! ```
//!
//! [`required_tau`] uses `C = 20`; the companion bounds
//! `T ≥ 2√(2 ln(√10/τε))` and `N_s ≥ 200·(ε⁴Γ_j²τ⁴)^{-1}·ln(4/δ)` pair with
//! the tighter `C = 10` variant. Both constants are exposed through
//! [`required_tau_with`].

use crate::error::{Error, Result};
use crate::estimate::{detector_value, Transition};
use crate::filter::GaussianFilter;

/// Numerator inside the logarithm of the τ formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogConstant {
    Twenty,
    Ten,
}

impl LogConstant {
    fn value(self) -> f64 {
        match self {
            LogConstant::Twenty => 20.0,
            LogConstant::Ten => 10.0,
        }
    }
}

fn check_tau_preconditions(gamma: f64, eps: f64, weight: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("violated: γ > 0 (γ = {gamma})")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("violated: ε > 0 (ε = {eps})")));
    }
    if eps > 0.2 * gamma {
        return Err(Error::Domain(format!(
            "violated: ε ≤ 0.2γ (ε = {eps}, 0.2γ = {})",
            0.2 * gamma
        )));
    }
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::Domain(format!(
            "violated: 0 < Γ_j ≤ 1 (Γ_j = {weight})"
        )));
    }
    Ok(())
}

/// Filter scale `τ = (1/0.9γ)·√ln(20/(ε²Γ_j))`.
pub fn required_tau(gamma: f64, eps: f64, gamma_j_weight: f64) -> Result<f64> {
    required_tau_with(gamma, eps, gamma_j_weight, LogConstant::Twenty)
}

/// As [`required_tau`] with an explicit log constant (20 or 10).
pub fn required_tau_with(
    gamma: f64,
    eps: f64,
    gamma_j_weight: f64,
    constant: LogConstant,
) -> Result<f64> {
    check_tau_preconditions(gamma, eps, gamma_j_weight)?;
    let arg = constant.value() / (eps * eps * gamma_j_weight);
    if arg <= 1.0 {
        return Err(Error::Domain(format!(
            "violated: {}/(ε²Γ_j) > 1 (got {arg})",
            constant.value()
        )));
    }
    Ok(arg.ln().sqrt() / (0.9 * gamma))
}

/// Cutoff `T = 2√(2·ln(√10/(τε)))`, bounding the truncation error at
/// `0.1·τ²ε²`.
pub fn required_t(tau: f64, eps: f64) -> Result<f64> {
    if !(tau > 0.0) || !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "violated: τ > 0 and ε > 0 (τ = {tau}, ε = {eps})"
        )));
    }
    let arg = 10.0f64.sqrt() / (tau * eps);
    if arg <= 1.0 {
        return Err(Error::Domain(format!(
            "violated: √10/(τ·ε) > 1 (got {arg})"
        )));
    }
    Ok(2.0 * (2.0 * arg.ln()).sqrt())
}

/// Measurement budget `N_s = ⌈200·(ε⁴Γ_j²τ⁴)^{-1}·ln(4/δ)⌉`.
pub fn required_ns(eps: f64, gamma_j_weight: f64, tau: f64, delta_fail: f64) -> Result<u64> {
    if !(eps > 0.0) || !(gamma_j_weight > 0.0) || !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "violated: ε, Γ_j, τ > 0 (ε = {eps}, Γ_j = {gamma_j_weight}, τ = {tau})"
        )));
    }
    if !(delta_fail > 0.0 && delta_fail < 1.0) {
        return Err(Error::Domain(format!(
            "violated: 0 < δ < 1 (δ = {delta_fail})"
        )));
    }
    let n = 200.0 / (eps.powi(4) * gamma_j_weight * gamma_j_weight * tau.powi(4))
        * (4.0 / delta_fail).ln();
    Ok(n.ceil() as u64)
}

/// Outcome of [`separation_check`].
#[derive(Debug, Clone, Copy)]
pub struct SeparationReport {
    pub pass: bool,
    pub tau: f64,
    pub eps: f64,
    /// Gap lower bound used for the scan.
    pub gamma: f64,
    pub gamma_j_weight: f64,
    /// Max over the near region of `(Γ_j − G) − 0.3τ²ε²Γ_j`; ≤ 0 to pass.
    pub near_excess: f64,
    /// Min over the far region of `(Γ_j − G) − 0.8τ²ε²Γ_j`; ≥ 0 to pass.
    pub far_margin: f64,
    pub scan_step: f64,
}

/// Verify both separation inequalities for transition `j` by a dense ω scan
/// with step ≤ ε/20, using `τ` from [`required_tau`].
///
/// `gamma_bound` is the chosen lower bound `γ ≤ γ_j`; when omitted the
/// table's own gap difference is used (an isolated transition then needs an
/// explicit bound). If the target weight is negative the whole spectrum is
/// sign-normalized first.
pub fn separation_check(
    transitions: &[Transition],
    j: usize,
    eps: f64,
    gamma_bound: Option<f64>,
) -> Result<SeparationReport> {
    let target = transitions
        .get(j)
        .ok_or_else(|| Error::InvalidArgument(format!("transition index {j} out of range")))?;
    // Sign normalization: the scan works on a spectrum with Γ_j > 0.
    let sign = if target.weight() > 0.0 {
        1.0
    } else if target.weight() < 0.0 {
        -1.0
    } else {
        return Err(Error::Domain("violated: Γ_j ≠ 0".into()));
    };
    let flipped: Vec<Transition> = transitions
        .iter()
        .map(|t| Transition {
            delta: t.delta,
            gamma: t.gamma * sign,
            gap: t.gap,
        })
        .collect();
    let weight = flipped[j].weight();

    let gamma = gamma_bound.unwrap_or(flipped[j].gap);
    if !gamma.is_finite() {
        return Err(Error::Domain(
            "violated: finite γ (isolated transition needs an explicit gap bound)".into(),
        ));
    }
    if gamma > flipped[j].gap + 1e-12 {
        return Err(Error::Domain(format!(
            "violated: γ ≤ γ_j (γ = {gamma}, table gap = {})",
            flipped[j].gap
        )));
    }
    let tau = required_tau(gamma, eps, weight)?;
    let bound_near = 0.3 * tau * tau * eps * eps * weight;
    let bound_far = 0.8 * tau * tau * eps * eps * weight;
    let filter = GaussianFilter::new(tau, 1.0).expect("tau > 0 by construction");
    let delta_j = flipped[j].delta;
    let step = eps / 20.0;

    // Near region: |ω − Δ_j| ≤ 0.5ε.
    let mut near_excess = f64::NEG_INFINITY;
    let near_steps = (0.5 * eps / step).ceil() as i64;
    for k in -near_steps..=near_steps {
        let omega = delta_j + (k as f64 * step).clamp(-0.5 * eps, 0.5 * eps);
        let d = weight - detector_value(&flipped, &filter, omega);
        near_excess = near_excess.max(d - bound_near);
    }

    // Far region: |ω − Δ_j| ∈ (ε, 0.1γ). Empty when 0.1γ ≤ ε.
    let mut far_margin = f64::INFINITY;
    let mut offset = eps + step;
    while offset < 0.1 * gamma {
        for omega in [delta_j + offset, delta_j - offset] {
            let d = weight - detector_value(&flipped, &filter, omega);
            far_margin = far_margin.min(d - bound_far);
        }
        offset += step;
    }

    Ok(SeparationReport {
        pass: near_excess <= 0.0 && far_margin >= 0.0,
        tau,
        eps,
        gamma,
        gamma_j_weight: weight,
        near_excess,
        far_margin,
        scan_step: step,
    })
}
