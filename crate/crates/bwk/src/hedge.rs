//! Multiplicative weights over a fixed set of coordinates.
//!
//! Weights start at one. Each step plays the normalized weight vector
//! `y_t`, receives a payoff vector `pi_t` in [0,1]^d, and multiplies each
//! weight by `(1 + eps) ^ pi_t[i]`. Against any comparator distribution
//! `y` the cumulative payoff satisfies
//!
//! ```text
//! sum_t <y_t, pi_t>  >=  (1 - eps) * sum_t <y, pi_t> - ln(d) / eps
//! ```
//!
//! The policies use this over resources: the comparator bound is what turns
//! "some resource ran out" into a lower bound on how cost-effective the
//! chosen arms were.

use crate::error::{Error, Result};

/// Weights are renormalized once the largest exceeds this, keeping long
/// runs away from overflow without changing the played distribution.
const RENORM_THRESHOLD: f64 = 1e100;

/// Multiplicative-weights state over `d` coordinates.
#[derive(Debug, Clone)]
pub struct Hedge {
    eps: f64,
    weights: Vec<f64>,
}

impl Hedge {
    /// `eps` must lie in (0, 1]; `d` must be positive.
    pub fn new(d: usize, eps: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("hedge needs at least one coordinate"));
        }
        if !(eps.is_finite() && eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(format!("hedge eps must be in (0,1], got {eps}")));
        }
        Ok(Hedge { eps, weights: vec![1.0; d] })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The distribution that would be played this round.
    pub fn distribution(&self) -> Vec<f64> {
        let sum: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / sum).collect()
    }

    /// Plays one round: returns the distribution used for this round's
    /// payoff, then applies the multiplicative update for `payoff`.
    pub fn step(&mut self, payoff: &[f64]) -> Result<Vec<f64>> {
        if payoff.len() != self.weights.len() {
            return Err(Error::invalid("payoff dimension mismatch"));
        }
        if !payoff.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!("payoff entries must lie in [0,1]: {payoff:?}")));
        }
        let played = self.distribution();
        let base = 1.0 + self.eps;
        for (w, p) in self.weights.iter_mut().zip(payoff) {
            *w *= base.powf(*p);
        }
        let max = self.weights.iter().cloned().fold(0.0, f64::max);
        if max > RENORM_THRESHOLD {
            for w in &mut self.weights {
                *w /= max;
            }
        }
        Ok(played)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    #[test]
    fn first_step_matches_hand_computation() {
        let mut h = Hedge::new(2, 0.5).unwrap();
        let played = h.step(&[1.0, 0.0]).unwrap();
        assert_eq!(played, vec![0.5, 0.5]);
        let next = h.distribution();
        assert!((next[0] - 0.6).abs() < 1e-15);
        assert!((next[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Hedge::new(0, 0.5).is_err());
        assert!(Hedge::new(2, 0.0).is_err());
        assert!(Hedge::new(2, 1.5).is_err());
        let mut h = Hedge::new(2, 0.5).unwrap();
        assert!(h.step(&[1.0]).is_err());
        assert!(h.step(&[1.0, 1.5]).is_err());
    }

    #[test]
    fn renormalization_keeps_distribution() {
        let mut a = Hedge::new(3, 1.0).unwrap();
        let mut b = Hedge::new(3, 1.0).unwrap();
        // Force `a` through the renormalization path.
        a.weights = vec![6e99, 3e99, 1e99];
        b.weights = vec![6.0, 3.0, 1.0];
        let payoff = [1.0, 0.5, 0.0];
        let ya = a.step(&payoff).unwrap();
        let yb = b.step(&payoff).unwrap();
        for (x, y) in ya.iter().zip(&yb) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in a.distribution().iter().zip(&b.distribution()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a.weights.iter().cloned().fold(0.0, f64::max) <= 1.0);
    }

    /// Comparator guarantee on random payoff sequences, including the
    /// point-mass comparators that dominate all others.
    #[test]
    fn comparator_bound_on_random_sequences() {
        let mut rng = RngState::new(99);
        for _ in 0..50 {
            let d = 1 + rng.below(8);
            let rounds = 10 + rng.below(400);
            let eps = 0.05 + 0.9 * rng.uniform();
            let mut h = Hedge::new(d, eps).unwrap();
            let mut own = 0.0;
            let mut comparator_sums = vec![0.0; d];
            for _ in 0..rounds {
                let payoff: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
                let played = h.step(&payoff).unwrap();
                own += played.iter().zip(&payoff).map(|(y, p)| y * p).sum::<f64>();
                for i in 0..d {
                    comparator_sums[i] += payoff[i];
                }
            }
            let best = comparator_sums.iter().cloned().fold(0.0, f64::max);
            let bound = (1.0 - eps) * best - (d as f64).ln() / eps;
            assert!(own >= bound - 1e-9, "own={own} bound={bound} d={d} eps={eps}");
        }
    }
}
