//! Resource planning for a target precision: the filter scale τ, the time
//! cutoff T, and the measurement budget N_s that guarantee a transition is
//! resolved, plus a direct scan verification of the separation inequalities
//! on a synthetic spectrum.
//!
//!     cargo run --release --example resource_planning

use spectro::filter::scaled_sampler_equivalence_check;
use spectro::resources::{separation_check, required_ns, required_t, required_tau};
use spectro::rng::stream;
use spectro::synth::random_spectrum;
use spectro::*;

fn main() -> Result<()> {
    // Plan: resolve a transition with weight Γ_j ≥ 0.5 and gap γ ≥ 1 to
    // precision ε = 0.1, failing at most 5% of the time.
    let (gamma, eps, weight, delta_fail) = (1.0, 0.1, 0.5, 0.05);
    let tau = required_tau(gamma, eps, weight)?;
    let cutoff = required_t(tau, eps)?;
    let n_samples = required_ns(eps, weight, tau, delta_fail)?;
    println!("γ = {gamma}, ε = {eps}, Γ_j = {weight}, δ = {delta_fail}:");
    println!("  τ   = {tau:.3}");
    println!(
        "  T   = {cutoff:.3}   (max physical evolution time τ·T = {:.2})",
        tau * cutoff
    );
    println!("  N_s = {n_samples}");

    // Verify the separation inequalities hold on random spectra with that
    // gap bound.
    let mut rng = stream(0, "resource-planning", 0);
    let mut worst_margin = f64::INFINITY;
    for _ in 0..20 {
        let spectrum = random_spectrum(&mut rng, 6, gamma, 0.1)?;
        let report = separation_check(
            spectrum.transitions(),
            spectrum.target,
            0.05 * gamma,
            Some(gamma),
        )?;
        assert!(report.pass);
        worst_margin = worst_margin.min(report.far_margin);
    }
    println!("separation inequalities held on 20 random spectra (worst far-side margin {worst_margin:.2e})");

    // The scaled sampler matches Pr(t, τ) = (1/τ)·g(t/τ): the two filter
    // formalisms are interchangeable.
    let filter = GaussianFilter::new(tau, cutoff)?;
    let report = scaled_sampler_equivalence_check(&filter, 100_000, &mut rng)?;
    println!(
        "sampler equivalence at τ = {:.3}: KS statistic {:.5} < {:.5} critical → {}",
        filter.tau(),
        report.statistic,
        report.critical,
        if report.pass { "pass" } else { "fail" }
    );
    Ok(())
}
