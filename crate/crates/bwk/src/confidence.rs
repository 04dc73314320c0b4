//! Estimate-dependent confidence radii and per-arm running estimates.
//!
//! For a mean estimate `nu` built from `n` samples the radius is
//!
//! ```text
//! rad(nu, n) = sqrt(c_rad * nu / n) + c_rad / n
//! ```
//!
//! With `c_rad` logarithmic in (resources x horizon x arms), the true mean
//! lands within `rad(nu_hat, n)` of the empirical mean `nu_hat` with
//! probability `1 - exp(-Omega(c_rad))`, and on that event the empirical
//! radius is at most three times the radius at the true mean. The radius
//! scales with the estimate itself, so small means get proportionally small
//! intervals; that asymmetry is what the policies in this crate rely on.

use crate::error::{Error, Result};
use crate::model::Outcome;

/// Radius scale parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusParams {
    c_rad: f64,
}

impl RadiusParams {
    pub fn new(c_rad: f64) -> Result<Self> {
        if !(c_rad.is_finite() && c_rad > 0.0) {
            return Err(Error::invalid("c_rad must be positive and finite"));
        }
        Ok(RadiusParams { c_rad })
    }

    /// Default scale for an instance shape: `ceil(ln(d*T*m) + 10*ln 2)`.
    /// Large enough that per-estimate failure probability is negligible
    /// against a union bound over arms, resources, and rounds.
    pub fn default_for(resources: usize, horizon: usize, arms: usize) -> Self {
        let product = (resources.max(1) * horizon.max(1) * arms.max(1)) as f64;
        RadiusParams { c_rad: (product.ln() + 10.0 * std::f64::consts::LN_2).ceil() }
    }

    pub fn c_rad(&self) -> f64 {
        self.c_rad
    }

    /// The radius at estimate `nu` with sample weight `n`. `n` is a positive
    /// real so the scaling identity `rad(nu, a*n) = rad(a*nu, n) / a` can be
    /// evaluated at fractional weights.
    pub fn rad(&self, nu: f64, n: f64) -> f64 {
        debug_assert!(nu >= 0.0 && n > 0.0);
        (self.c_rad * nu / n).sqrt() + self.c_rad / n
    }

    /// Confidence interval around an empirical mean, clipped to [0, 1].
    pub fn interval(&self, nu_hat: f64, n: f64) -> (f64, f64) {
        let r = self.rad(nu_hat, n);
        ((nu_hat - r).max(0.0), (nu_hat + r).min(1.0))
    }

    pub fn lcb(&self, nu_hat: f64, n: f64) -> f64 {
        self.interval(nu_hat, n).0
    }

    pub fn ucb(&self, nu_hat: f64, n: f64) -> f64 {
        self.interval(nu_hat, n).1
    }

    /// True on the clean event: the true mean `nu` is within the empirical
    /// radius of `nu_hat`, and that radius is within a factor three of the
    /// radius at the truth.
    pub fn is_strong_estimate(&self, nu: f64, nu_hat: f64, n: f64) -> bool {
        let r_hat = self.rad(nu_hat, n);
        (nu - nu_hat).abs() <= r_hat && r_hat <= 3.0 * self.rad(nu, n)
    }
}

/// Running per-arm sample counts and empirical means for the reward and
/// every consumption coordinate.
#[derive(Debug, Clone)]
pub struct ConfidenceState {
    counts: Vec<u64>,
    reward_sum: Vec<f64>,
    consumption_sum: Vec<Vec<f64>>,
}

impl ConfidenceState {
    pub fn new(arms: usize, resources: usize) -> Self {
        ConfidenceState {
            counts: vec![0; arms],
            reward_sum: vec![0.0; arms],
            consumption_sum: vec![vec![0.0; resources]; arms],
        }
    }

    /// Rebuilds a state from explicit counts and means, e.g. to replay a
    /// recorded trace or to pin estimates in tests.
    pub fn from_means(counts: Vec<u64>, mean_reward: Vec<f64>, mean_consumption: Vec<Vec<f64>>) -> Self {
        let reward_sum = counts
            .iter()
            .zip(&mean_reward)
            .map(|(n, m)| *n as f64 * m)
            .collect();
        let consumption_sum = counts
            .iter()
            .zip(&mean_consumption)
            .map(|(n, row)| row.iter().map(|m| *n as f64 * m).collect())
            .collect();
        ConfidenceState { counts, reward_sum, consumption_sum }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn resources(&self) -> usize {
        self.consumption_sum.first().map_or(0, Vec::len)
    }

    pub fn update(&mut self, arm: usize, outcome: &Outcome) {
        self.counts[arm] += 1;
        self.reward_sum[arm] += outcome.reward;
        for (acc, c) in self.consumption_sum[arm].iter_mut().zip(&outcome.consumption) {
            *acc += c;
        }
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    /// Empirical mean reward; 0 for an unpulled arm.
    pub fn mean_reward(&self, arm: usize) -> f64 {
        if self.counts[arm] == 0 {
            0.0
        } else {
            self.reward_sum[arm] / self.counts[arm] as f64
        }
    }

    /// Empirical mean consumption; 0 for an unpulled arm.
    pub fn mean_consumption(&self, arm: usize, resource: usize) -> f64 {
        if self.counts[arm] == 0 {
            0.0
        } else {
            self.consumption_sum[arm][resource] / self.counts[arm] as f64
        }
    }

    /// Reward confidence interval; [0, 1] before the first pull.
    pub fn reward_interval(&self, params: &RadiusParams, arm: usize) -> (f64, f64) {
        if self.counts[arm] == 0 {
            (0.0, 1.0)
        } else {
            params.interval(self.mean_reward(arm), self.counts[arm] as f64)
        }
    }

    /// Consumption confidence interval; [0, 1] before the first pull.
    pub fn consumption_interval(&self, params: &RadiusParams, arm: usize, resource: usize) -> (f64, f64) {
        if self.counts[arm] == 0 {
            (0.0, 1.0)
        } else {
            params.interval(self.mean_consumption(arm, resource), self.counts[arm] as f64)
        }
    }
}
