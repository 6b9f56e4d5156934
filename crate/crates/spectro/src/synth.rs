//! Synthetic spectra: fuzz inputs for the separation-inequality and
//! truncation checks.

use crate::error::{Error, Result};
use crate::estimate::Transition;
use num_complex::Complex64;
use rand::Rng;

/// Energy range the generator packs transitions into.
pub const DELTA_RANGE: f64 = 10.0;

/// A hand-built spectrum: sorted transitions with a guaranteed minimum gap
/// and `Σ|Γ| ≤ 1`, plus a designated target line whose weight is at least
/// the requested floor.
#[derive(Debug, Clone)]
pub struct SyntheticSpectrum {
    transitions: Vec<Transition>,
    pub gamma_min: f64,
    pub target: usize,
}

impl SyntheticSpectrum {
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn target_transition(&self) -> &Transition {
        &self.transitions[self.target]
    }

    pub fn total_abs_weight(&self) -> f64 {
        self.transitions.iter().map(|t| t.gamma.norm()).sum()
    }
}

/// Draw a spectrum with `n_transitions` lines in `[0, 10]`, pairwise gaps of
/// at least `gamma_min`, and a target weight of at least `weight_floor`
/// (constructive, no rejection).
pub fn random_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    n_transitions: usize,
    gamma_min: f64,
    weight_floor: f64,
) -> Result<SyntheticSpectrum> {
    if n_transitions == 0 {
        return Err(Error::InvalidArgument(
            "need at least one transition".into(),
        ));
    }
    if !(gamma_min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma_min must be > 0, got {gamma_min}"
        )));
    }
    if !(weight_floor > 0.0 && weight_floor <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "weight_floor must lie in (0, 0.5], got {weight_floor}"
        )));
    }
    let spread = DELTA_RANGE - (n_transitions - 1) as f64 * gamma_min;
    if spread < 0.0 {
        return Err(Error::Infeasible(format!(
            "{n_transitions} transitions with gap {gamma_min} exceed the [0, {DELTA_RANGE}] range"
        )));
    }

    // Spacing transform: sorted uniforms plus mandatory gaps.
    let mut u: Vec<f64> = (0..n_transitions)
        .map(|_| rng.gen_range(0.0..=spread))
        .collect();
    u.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    let deltas: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, &x)| x + i as f64 * gamma_min)
        .collect();

    // Target weight in [floor, 0.5]; the rest share at most 1 − target,
    // with random signs on a fraction of the lines.
    let target = rng.gen_range(0..n_transitions);
    let target_weight = rng.gen_range(weight_floor..=0.5);
    let mut weights = vec![0.0f64; n_transitions];
    weights[target] = target_weight;
    if n_transitions > 1 {
        let raw: Vec<f64> = (0..n_transitions - 1)
            .map(|_| rng.gen_range(0.02..1.0))
            .collect();
        let raw_sum: f64 = raw.iter().sum();
        let budget = (1.0 - target_weight) * rng.gen_range(0.3..0.9);
        let mut k = 0;
        for (i, w) in weights.iter_mut().enumerate() {
            if i == target {
                continue;
            }
            let sign = if rng.gen_bool(0.25) { -1.0 } else { 1.0 };
            *w = sign * budget * raw[k] / raw_sum;
            k += 1;
        }
    }

    let transitions = (0..n_transitions)
        .map(|j| {
            let left = if j > 0 {
                deltas[j] - deltas[j - 1]
            } else {
                f64::INFINITY
            };
            let right = if j + 1 < n_transitions {
                deltas[j + 1] - deltas[j]
            } else {
                f64::INFINITY
            };
            Transition {
                delta: deltas[j],
                gamma: Complex64::new(weights[j], 0.0),
                gap: left.min(right),
            }
        })
        .collect();
    Ok(SyntheticSpectrum {
        transitions,
        gamma_min,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructive_guarantees() {
        let mut rng = crate::rng::stream(41, "synth-test", 0);
        for trial in 0..200 {
            let n = 1 + (trial % 10);
            let s = random_spectrum(&mut rng, n, 0.5, 0.1).unwrap();
            let ts = s.transitions();
            assert_eq!(ts.len(), n);
            for w in ts.windows(2) {
                assert!(w[1].delta - w[0].delta >= 0.5 - 1e-12);
                assert!(w[0].delta >= 0.0 && w[1].delta <= DELTA_RANGE + 1e-12);
            }
            assert!(s.total_abs_weight() <= 1.0 + 1e-12);
            assert!(s.target_transition().gamma.re >= 0.1);
        }
    }

    #[test]
    fn single_transition_has_infinite_gap() {
        let mut rng = crate::rng::stream(42, "synth-test", 0);
        let s = random_spectrum(&mut rng, 1, 0.5, 0.1).unwrap();
        assert!(s.transitions()[0].gap.is_infinite());
    }

    #[test]
    fn infeasible_packing_rejected() {
        let mut rng = crate::rng::stream(43, "synth-test", 0);
        assert!(matches!(
            random_spectrum(&mut rng, 30, 0.5, 0.1),
            Err(Error::Infeasible(_))
        ));
        assert!(random_spectrum(&mut rng, 0, 0.5, 0.1).is_err());
        assert!(random_spectrum(&mut rng, 3, 0.5, 0.9).is_err());
    }
}
