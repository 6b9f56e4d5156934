//! Shared oracles for the integration suites. These stay independent of the
//! estimator implementation: the truncated detector is evaluated by direct
//! numerical quadrature of the time integral.

use num_complex::Complex64;
use spectro::estimate::Transition;

/// Composite Simpson rule for complex integrands on a uniform grid.
pub fn simpson_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    assert!(n.is_multiple_of(2) && n >= 2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k.is_multiple_of(2) { 2.0 } else { 4.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * (h / 3.0)
}

/// The sampling density `g(t) = e^{−t²/4}/(2√π)`.
pub fn g_density(t: f64) -> f64 {
    (-t * t / 4.0).exp() / (2.0 * std::f64::consts::PI.sqrt())
}

/// Time signal `G(s) = Σ_j Γ_j e^{−iΔ_j s}` of a transition list.
pub fn time_signal(transitions: &[Transition], s: f64) -> Complex64 {
    transitions
        .iter()
        .map(|t| t.gamma * Complex64::from_polar(1.0, -t.delta * s))
        .sum()
}

/// Quadrature value of the truncated detector
/// `G^{(T)}(ω) = ∫_{−T}^{T} G(τt) g(t) e^{iτωt} dt`.
pub fn quadrature_truncated_detector(
    transitions: &[Transition],
    tau: f64,
    cutoff: f64,
    omega: f64,
    nodes: usize,
) -> Complex64 {
    simpson_complex(
        |t| {
            time_signal(transitions, tau * t)
                * g_density(t)
                * Complex64::from_polar(1.0, tau * omega * t)
        },
        -cutoff,
        cutoff,
        nodes,
    )
}

/// Same quadrature for a sampled real time signal `s ↦ G(s)`.
pub fn quadrature_truncated_detector_of<F: Fn(f64) -> f64>(
    signal: F,
    tau: f64,
    cutoff: f64,
    omega: f64,
    nodes: usize,
) -> Complex64 {
    simpson_complex(
        |t| signal(tau * t) * g_density(t) * Complex64::from_polar(1.0, tau * omega * t),
        -cutoff,
        cutoff,
        nodes,
    )
}
