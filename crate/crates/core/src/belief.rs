//! Bayesian belief over the interaction partner's Assert/Yield mode.

use serde::{Deserialize, Serialize};

use crate::actions::SvAction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    /// Probability of each action, indexed by [`SvAction::index`].
    pub probs: [f64; 2],
}

impl Default for Belief {
    fn default() -> Self {
        Self::uniform()
    }
}

impl Belief {
    pub fn uniform() -> Self {
        Self { probs: [0.5, 0.5] }
    }

    pub fn from_assert(p_assert: f64) -> Self {
        let p = p_assert.clamp(0.0, 1.0);
        Self { probs: [p, 1.0 - p] }
    }

    pub fn get(&self, action: SvAction) -> f64 {
        self.probs[action.index()]
    }

    pub fn assert(&self) -> f64 {
        self.probs[0]
    }

    pub fn is_valid(&self) -> bool {
        self.probs.iter().all(|p| (0.0..=1.0).contains(p)) && (self.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }

    /// Posterior from per-mode log-likelihoods. Falls back to the prior when no mode
    /// has a finite likelihood.
    pub fn update_log(&self, log_likelihoods: [f64; 2]) -> Belief {
        let log_post: Vec<f64> = self
            .probs
            .iter()
            .zip(log_likelihoods)
            .map(|(p, l)| if *p > 0.0 { p.ln() + l } else { f64::NEG_INFINITY })
            .collect();
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return *self;
        }
        let w: Vec<f64> = log_post.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = w.iter().sum();
        let p0 = w[0] / z;
        Belief { probs: [p0, 1.0 - p0] }
    }

    /// Bayes' rule with plain likelihoods.
    pub fn update(&self, likelihoods: [f64; 2]) -> Belief {
        self.update_log(likelihoods.map(f64::ln))
    }
}

/// Gaussian log-likelihood of an observed acceleration trace around a predicted one.
pub fn acceleration_log_likelihood(observed: &[f64], predicted: &[f64], sigma: f64) -> f64 {
    let norm = -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
    observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| norm - 0.5 * ((o - p) / sigma).powi(2))
        .sum()
}

/// Posterior after observing the partner's accelerations, given the trace each mode
/// predicted over the same window.
pub fn update_belief(prior: &Belief, observed: &[f64], predicted: [&[f64]; 2], sigma: f64) -> Belief {
    prior.update_log(predicted.map(|p| acceleration_log_likelihood(observed, p, sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Belief, b: [f64; 2]) -> bool {
        (a.probs[0] - b[0]).abs() < 1e-12 && (a.probs[1] - b[1]).abs() < 1e-12
    }

    #[test]
    fn identical_predictions_keep_prior() {
        let prior = Belief::from_assert(0.3);
        let p = [0.1, -0.5, 0.2];
        let post = update_belief(&prior, &[1.0, 2.0, -1.0], [&p, &p], 0.8);
        assert!(close(post, [0.3, 0.7]));
    }

    #[test]
    fn bayes_rule() {
        assert!(close(Belief::uniform().update([0.8, 0.2]), [0.8, 0.2]));
        assert!(close(Belief::from_assert(0.9).update([0.5, 0.5]), [0.9, 0.1]));
    }

    #[test]
    fn zero_likelihoods_fall_back() {
        let prior = Belief::from_assert(0.6);
        assert_eq!(prior.update([0.0, 0.0]), prior);
    }

    #[test]
    fn observation_moves_toward_matching_mode() {
        let post = update_belief(&Belief::uniform(), &[-1.0, -1.2], [&[0.0, 0.0], &[-1.0, -1.1]], 0.8);
        assert!(post.get(SvAction::Yield) > 0.5);
    }

    #[test]
    fn entropy_max_at_uniform() {
        assert!((Belief::uniform().entropy() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(Belief::from_assert(1.0).entropy(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn stays_on_simplex_and_relabels(
                p in 0.0..=1.0f64,
                obs in proptest::collection::vec(-8.0..8.0f64, 1..10),
                shift_a in -3.0..3.0f64, shift_y in -3.0..3.0f64,
            ) {
                let pa: Vec<f64> = obs.iter().map(|o| o + shift_a).collect();
                let py: Vec<f64> = obs.iter().map(|o| o + shift_y).collect();
                let prior = Belief::from_assert(p);
                let post = update_belief(&prior, &obs, [&pa, &py], 0.8);
                prop_assert!(post.is_valid());

                let swapped = Belief { probs: [prior.probs[1], prior.probs[0]] };
                let post_sw = update_belief(&swapped, &obs, [&py, &pa], 0.8);
                prop_assert!((post_sw.probs[0] - post.probs[1]).abs() < 1e-9);
            }
        }
    }
}
