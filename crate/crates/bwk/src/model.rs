//! Episode model: arms, resources, budgets, outcomes, and the episode loop.
//!
//! An instance has `m` arms and `d` resources. Pulling arm `x` draws an
//! outcome `(reward, consumption_1..consumption_d)` with every entry in
//! [0, 1], i.i.d. from the arm's finite-support distribution. The episode
//! halts at the first round where any resource's cumulative consumption
//! exceeds its budget (that round's reward is forfeited), or once `horizon`
//! rounds complete.
//!
//! Three standard reductions are provided as explicit operations:
//!
//! - [`add_time_resource`]: the horizon becomes an ordinary resource whose
//!   column is the constant `time_budget / horizon`;
//! - [`Instance::normalize_budgets`]: rescales consumption columns so all
//!   budgets equal the smallest one, preserving episode dynamics and the
//!   LP benchmark;
//! - [`Instance::append_null_arm`]: adds an arm with zero reward and zero
//!   consumption outside the time column, so mass can always be parked.

use crate::error::{Error, Result};
use crate::rng::RngState;
use serde::{Deserialize, Serialize};

/// Weights per arm must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Support means must match the declared latent means within this tolerance.
pub const MEAN_TOL: f64 = 1e-9;

/// One pull's result. Reward first, then one consumption entry per resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub reward: f64,
    pub consumption: Vec<f64>,
}

impl Outcome {
    pub fn new(reward: f64, consumption: Vec<f64>) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !ok(reward) || !consumption.iter().all(|c| ok(*c)) {
            return Err(Error::invalid(format!(
                "outcome entries must lie in [0,1]: reward={reward}, consumption={consumption:?}"
            )));
        }
        Ok(Outcome { reward, consumption })
    }
}

/// Expected rewards and expected consumption, one row per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentStructure {
    expected_reward: Vec<f64>,
    /// `expected_consumption[x][i]` is arm `x`'s mean draw on resource `i`.
    expected_consumption: Vec<Vec<f64>>,
}

impl LatentStructure {
    pub fn new(expected_reward: Vec<f64>, expected_consumption: Vec<Vec<f64>>) -> Result<Self> {
        if expected_reward.is_empty() || expected_reward.len() != expected_consumption.len() {
            return Err(Error::invalid(
                "need one reward and one consumption row per arm, at least one arm",
            ));
        }
        let d = expected_consumption[0].len();
        let ok = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        for (x, row) in expected_consumption.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid("ragged consumption rows"));
            }
            if !ok(expected_reward[x]) || !row.iter().all(|c| ok(*c)) {
                return Err(Error::invalid(format!("latent entries for arm {x} outside [0,1]")));
            }
        }
        Ok(LatentStructure { expected_reward, expected_consumption })
    }

    pub fn arms(&self) -> usize {
        self.expected_reward.len()
    }

    pub fn resources(&self) -> usize {
        self.expected_consumption[0].len()
    }

    pub fn reward(&self, arm: usize) -> f64 {
        self.expected_reward[arm]
    }

    pub fn consumption(&self, arm: usize, resource: usize) -> f64 {
        self.expected_consumption[arm][resource]
    }

    pub fn consumption_row(&self, arm: usize) -> &[f64] {
        &self.expected_consumption[arm]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.expected_reward
    }
}

/// A latent structure together with budgets, horizon, and the markers for
/// the two reduction artifacts (time resource and null arm).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub latent: LatentStructure,
    pub budgets: Vec<f64>,
    pub horizon: usize,
    pub time_resource: Option<usize>,
    pub null_arm: Option<usize>,
}

impl Instance {
    pub fn new(
        latent: LatentStructure,
        budgets: Vec<f64>,
        horizon: usize,
        time_resource: Option<usize>,
        null_arm: Option<usize>,
    ) -> Result<Self> {
        let inst = Instance { latent, budgets, horizon, time_resource, null_arm };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let d = self.latent.resources();
        let m = self.latent.arms();
        if self.budgets.len() != d {
            return Err(Error::invalid("one budget per resource required"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if !self.budgets.iter().all(|b| b.is_finite() && *b > 0.0) {
            return Err(Error::invalid("budgets must be positive and finite"));
        }
        if let Some(tr) = self.time_resource {
            if tr >= d {
                return Err(Error::invalid("time resource index out of range"));
            }
            let rate = self.budgets[tr] / self.horizon as f64;
            for x in 0..m {
                if (self.latent.consumption(x, tr) - rate).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "time column must be the constant {rate} (arm {x} differs)"
                    )));
                }
            }
        }
        if let Some(na) = self.null_arm {
            if na >= m {
                return Err(Error::invalid("null arm index out of range"));
            }
            if self.latent.reward(na) != 0.0 {
                return Err(Error::invalid("null arm must have zero reward"));
            }
            for i in 0..d {
                if Some(i) != self.time_resource && self.latent.consumption(na, i) != 0.0 {
                    return Err(Error::invalid("null arm must not consume non-time resources"));
                }
            }
        }
        Ok(())
    }

    pub fn arms(&self) -> usize {
        self.latent.arms()
    }

    pub fn resources(&self) -> usize {
        self.latent.resources()
    }

    /// Per-round deterministic time consumption, when a time resource exists.
    pub fn time_rate(&self) -> Option<f64> {
        self.time_resource.map(|tr| self.budgets[tr] / self.horizon as f64)
    }

    /// The shape visible to policies: everything except the latent means.
    pub fn shape(&self) -> InstanceShape {
        InstanceShape {
            arms: self.arms(),
            resources: self.resources(),
            budgets: self.budgets.clone(),
            horizon: self.horizon,
            time_resource: self.time_resource,
            null_arm: self.null_arm,
        }
    }

    /// Rescales every consumption column so that all budgets equal the
    /// smallest budget `B`: column `i` is multiplied by `B / B_i`. Episode
    /// dynamics are unchanged (a resource exceeds `B_i` iff its scaled copy
    /// exceeds `B`), and so is the benchmark LP value.
    pub fn normalize_budgets(&self) -> Instance {
        let b = self.budgets.iter().cloned().fold(f64::INFINITY, f64::min);
        let scales: Vec<f64> = self.budgets.iter().map(|bi| b / bi).collect();
        let cons = (0..self.arms())
            .map(|x| {
                (0..self.resources())
                    .map(|i| self.latent.consumption(x, i) * scales[i])
                    .collect()
            })
            .collect();
        let latent = LatentStructure::new(self.latent.expected_reward.clone(), cons)
            .expect("scaling by factors in (0,1] preserves validity");
        Instance {
            latent,
            budgets: vec![b; self.resources()],
            horizon: self.horizon,
            time_resource: self.time_resource,
            null_arm: self.null_arm,
        }
    }

    /// Appends the null arm (zero reward, zero consumption outside the time
    /// column). Idempotent: if the instance already declares a null arm it
    /// is returned unchanged.
    pub fn append_null_arm(&self) -> Result<Instance> {
        if self.null_arm.is_some() {
            return Ok(self.clone());
        }
        let tr = self
            .time_resource
            .ok_or_else(|| Error::MissingTimeResource("append_null_arm".into()))?;
        let rate = self.budgets[tr] / self.horizon as f64;
        let mut rewards = self.latent.expected_reward.clone();
        let mut cons = self.latent.expected_consumption.clone();
        rewards.push(0.0);
        let mut row = vec![0.0; self.resources()];
        row[tr] = rate;
        cons.push(row);
        Instance::new(
            LatentStructure::new(rewards, cons)?,
            self.budgets.clone(),
            self.horizon,
            self.time_resource,
            Some(self.arms()),
        )
    }
}

/// Everything a policy may inspect about an instance. No latent means.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceShape {
    pub arms: usize,
    pub resources: usize,
    pub budgets: Vec<f64>,
    pub horizon: usize,
    pub time_resource: Option<usize>,
    pub null_arm: Option<usize>,
}

impl InstanceShape {
    pub fn time_rate(&self) -> Option<f64> {
        self.time_resource.map(|tr| self.budgets[tr] / self.horizon as f64)
    }

    /// Smallest budget.
    pub fn min_budget(&self) -> f64 {
        self.budgets.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Turns the horizon into resource `d` (appended last): budget
/// `time_budget`, deterministic per-round consumption `time_budget / horizon`
/// for every arm. Errors if any budget, including the new one, exceeds the
/// horizon (such budgets can never bind and would break the `B_i <= T`
/// convention the reductions rely on).
pub fn add_time_resource(
    latent: &LatentStructure,
    budgets: &[f64],
    time_budget: f64,
    horizon: usize,
) -> Result<Instance> {
    if budgets.len() != latent.resources() {
        return Err(Error::invalid("one budget per existing resource required"));
    }
    if !(time_budget > 0.0) || horizon == 0 {
        return Err(Error::invalid("time budget and horizon must be positive"));
    }
    let t = horizon as f64;
    for (i, b) in budgets.iter().chain(std::iter::once(&time_budget)).enumerate() {
        if *b > t {
            return Err(Error::invalid(format!(
                "budget {b} of resource {i} exceeds the horizon {horizon}"
            )));
        }
    }
    let rate = time_budget / t;
    let cons = (0..latent.arms())
        .map(|x| {
            let mut row = latent.consumption_row(x).to_vec();
            row.push(rate);
            row
        })
        .collect();
    let mut new_budgets = budgets.to_vec();
    new_budgets.push(time_budget);
    Instance::new(
        LatentStructure::new(latent.expected_reward.clone(), cons)?,
        new_budgets,
        horizon,
        Some(latent.resources()),
        None,
    )
}

/// One atom of an arm's outcome distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub weight: f64,
    pub outcome: Outcome,
}

/// An instance together with each arm's finite-support outcome model.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    instance: Instance,
    support: Vec<Vec<SupportPoint>>,
    /// Per-arm cumulative weights; last entry pinned to 1.0.
    cumulative: Vec<Vec<f64>>,
}

impl Environment {
    pub fn new(instance: Instance, support: Vec<Vec<SupportPoint>>) -> Result<Self> {
        let m = instance.arms();
        let d = instance.resources();
        if support.len() != m {
            return Err(Error::invalid("one support per arm required"));
        }
        for (x, points) in support.iter().enumerate() {
            if points.is_empty() {
                return Err(Error::invalid(format!("arm {x} has empty support")));
            }
            let mut wsum = 0.0;
            let mut mean_r = 0.0;
            let mut mean_c = vec![0.0; d];
            for p in points {
                if !(p.weight.is_finite() && p.weight >= 0.0) {
                    return Err(Error::invalid(format!("arm {x} has a negative weight")));
                }
                if p.outcome.consumption.len() != d {
                    return Err(Error::invalid(format!("arm {x} outcome dimension mismatch")));
                }
                Outcome::new(p.outcome.reward, p.outcome.consumption.clone())?;
                wsum += p.weight;
                mean_r += p.weight * p.outcome.reward;
                for i in 0..d {
                    mean_c[i] += p.weight * p.outcome.consumption[i];
                }
            }
            if (wsum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::invalid(format!(
                    "arm {x} weights sum to {wsum}, expected 1"
                )));
            }
            if (mean_r - instance.latent.reward(x)).abs() > MEAN_TOL {
                return Err(Error::invalid(format!(
                    "arm {x} mean reward {mean_r} does not match latent {}",
                    instance.latent.reward(x)
                )));
            }
            for i in 0..d {
                if (mean_c[i] - instance.latent.consumption(x, i)).abs() > MEAN_TOL {
                    return Err(Error::invalid(format!(
                        "arm {x} mean consumption on resource {i} does not match latent"
                    )));
                }
            }
        }
        let cumulative = support
            .iter()
            .map(|points| {
                let mut acc = 0.0;
                let mut cum: Vec<f64> = points
                    .iter()
                    .map(|p| {
                        acc += p.weight;
                        acc
                    })
                    .collect();
                if let Some(last) = cum.last_mut() {
                    *last = 1.0;
                }
                cum
            })
            .collect();
        Ok(Environment { instance, support, cumulative })
    }

    /// Environment whose outcomes are the latent means with probability one.
    pub fn deterministic(instance: Instance) -> Result<Self> {
        let support = (0..instance.arms())
            .map(|x| {
                vec![SupportPoint {
                    weight: 1.0,
                    outcome: Outcome {
                        reward: instance.latent.reward(x),
                        consumption: instance.latent.consumption_row(x).to_vec(),
                    },
                }]
            })
            .collect();
        Environment::new(instance, support)
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn support(&self, arm: usize) -> &[SupportPoint] {
        &self.support[arm]
    }

    pub fn arms(&self) -> usize {
        self.instance.arms()
    }

    pub fn resources(&self) -> usize {
        self.instance.resources()
    }

    /// Draws one outcome for `arm`. Always consumes exactly one uniform
    /// draw, so streams stay aligned across arms with different supports.
    pub fn sample_outcome(&self, arm: usize, rng: &mut RngState) -> Result<Outcome> {
        if arm >= self.arms() {
            return Err(Error::BadArm { arm, arms: self.arms() });
        }
        let u = rng.uniform();
        let cum = &self.cumulative[arm];
        let idx = cum.partition_point(|c| *c <= u).min(cum.len() - 1);
        Ok(self.support[arm][idx].outcome.clone())
    }

    /// Same budget normalization as [`Instance::normalize_budgets`], with
    /// the outcome supports rescaled consistently.
    pub fn normalize_budgets(&self) -> Environment {
        let inst = self.instance.normalize_budgets();
        let b = inst.budgets[0];
        let scales: Vec<f64> = self.instance.budgets.iter().map(|bi| b / bi).collect();
        let support = self
            .support
            .iter()
            .map(|points| {
                points
                    .iter()
                    .map(|p| SupportPoint {
                        weight: p.weight,
                        outcome: Outcome {
                            reward: p.outcome.reward,
                            consumption: p
                                .outcome
                                .consumption
                                .iter()
                                .zip(&scales)
                                .map(|(c, s)| c * s)
                                .collect(),
                        },
                    })
                    .collect()
            })
            .collect();
        Environment::new(inst, support).expect("normalization preserves validity")
    }

    /// Appends the null arm to both the instance and the outcome model.
    /// Idempotent.
    pub fn append_null_arm(&self) -> Result<Environment> {
        if self.instance.null_arm.is_some() {
            return Ok(self.clone());
        }
        let inst = self.instance.append_null_arm()?;
        let tr = inst.time_resource.expect("append_null_arm requires a time resource");
        let mut row = vec![0.0; inst.resources()];
        row[tr] = inst.budgets[tr] / inst.horizon as f64;
        let mut support = self.support.clone();
        support.push(vec![SupportPoint { weight: 1.0, outcome: Outcome { reward: 0.0, consumption: row } }]);
        Environment::new(inst, support)
    }

    /// Scales all budgets and the horizon by an integer factor, keeping the
    /// per-round time rate (and therefore the outcome supports) unchanged.
    pub fn scale(&self, alpha: u32) -> Result<Environment> {
        if alpha == 0 {
            return Err(Error::invalid("scale factor must be at least 1"));
        }
        let mut inst = self.instance.clone();
        inst.budgets.iter_mut().for_each(|b| *b *= f64::from(alpha));
        inst.horizon *= alpha as usize;
        Environment::new(inst, self.support.clone())
    }
}

/// What happened in one episode. `rounds` records every pull including the
/// one at the stopping time; `total_reward` sums rewards strictly before
/// `stop_time`. A stop time of `horizon + 1` means no budget was exceeded.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub rounds: Vec<(usize, Outcome)>,
    pub stop_time: usize,
    pub total_reward: f64,
}

/// Per-round play interface. Policies see outcomes only; latent means stay
/// with the environment.
pub trait Policy {
    fn choose(&mut self, rng: &mut RngState) -> usize;
    fn observe(&mut self, arm: usize, outcome: &Outcome);
}

fn run_episode_impl(
    env: &Environment,
    policy: &mut dyn Policy,
    rng: &mut RngState,
    record: bool,
) -> Result<EpisodeTrace> {
    let d = env.resources();
    let budgets = &env.instance.budgets;
    // Absorbs float drift in long sums of exact-rate columns; genuine
    // violations overshoot by a full outcome quantum.
    let slack: Vec<f64> = budgets.iter().map(|b| 1e-9 * b.max(1.0)).collect();
    let mut cum = vec![0.0; d];
    let mut rounds = Vec::new();
    let mut total_reward = 0.0;
    for t in 1..=env.instance.horizon {
        let arm = policy.choose(rng);
        let outcome = env.sample_outcome(arm, rng)?;
        if record {
            rounds.push((arm, outcome.clone()));
        }
        let mut exceeded = false;
        for i in 0..d {
            cum[i] += outcome.consumption[i];
            if cum[i] > budgets[i] + slack[i] {
                exceeded = true;
            }
        }
        if exceeded {
            return Ok(EpisodeTrace { rounds, stop_time: t, total_reward });
        }
        total_reward += outcome.reward;
        policy.observe(arm, &outcome);
    }
    Ok(EpisodeTrace { rounds, stop_time: env.instance.horizon + 1, total_reward })
}

/// Runs one episode, recording every round.
pub fn run_episode(env: &Environment, policy: &mut dyn Policy, rng: &mut RngState) -> Result<EpisodeTrace> {
    run_episode_impl(env, policy, rng, true)
}

/// Runs one episode without keeping the per-round trace. Same dynamics and
/// randomness as [`run_episode`].
pub fn run_episode_light(
    env: &Environment,
    policy: &mut dyn Policy,
    rng: &mut RngState,
) -> Result<EpisodeTrace> {
    run_episode_impl(env, policy, rng, false)
}

// --- serialization -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SupportPointJson {
    weight: f64,
    reward: f64,
    consumption: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentJson {
    arms: usize,
    resources: usize,
    budgets: Vec<f64>,
    horizon: usize,
    time_resource: Option<usize>,
    null_arm: Option<usize>,
    support: Vec<Vec<SupportPointJson>>,
}

impl Environment {
    pub fn to_json(&self) -> serde_json::Value {
        let support = self
            .support
            .iter()
            .map(|points| {
                points
                    .iter()
                    .map(|p| SupportPointJson {
                        weight: p.weight,
                        reward: p.outcome.reward,
                        consumption: p.outcome.consumption.clone(),
                    })
                    .collect()
            })
            .collect();
        serde_json::to_value(EnvironmentJson {
            arms: self.arms(),
            resources: self.resources(),
            budgets: self.instance.budgets.clone(),
            horizon: self.instance.horizon,
            time_resource: self.instance.time_resource,
            null_arm: self.instance.null_arm,
            support,
        })
        .expect("environment serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Environment> {
        let raw: EnvironmentJson = serde_json::from_value(value.clone())?;
        if raw.support.len() != raw.arms {
            return Err(Error::invalid("support length does not match arm count"));
        }
        let mut rewards = Vec::with_capacity(raw.arms);
        let mut cons = Vec::with_capacity(raw.arms);
        let support: Vec<Vec<SupportPoint>> = raw
            .support
            .iter()
            .map(|points| {
                points
                    .iter()
                    .map(|p| {
                        Ok(SupportPoint {
                            weight: p.weight,
                            outcome: Outcome::new(p.reward, p.consumption.clone())?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for points in &support {
            let mut mean_r = 0.0;
            let mut mean_c = vec![0.0; raw.resources];
            for p in points {
                if p.outcome.consumption.len() != raw.resources {
                    return Err(Error::invalid("outcome dimension does not match resources"));
                }
                mean_r += p.weight * p.outcome.reward;
                for i in 0..raw.resources {
                    mean_c[i] += p.weight * p.outcome.consumption[i];
                }
            }
            rewards.push(mean_r.clamp(0.0, 1.0));
            cons.push(mean_c.iter().map(|c| c.clamp(0.0, 1.0)).collect());
        }
        let instance = Instance::new(
            LatentStructure::new(rewards, cons)?,
            raw.budgets,
            raw.horizon,
            raw.time_resource,
            raw.null_arm,
        )?;
        Environment::new(instance, support)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_arm_env(b: f64, t: usize) -> Environment {
        let latent = LatentStructure::new(vec![1.0], vec![vec![1.0]]).unwrap();
        let inst = Instance::new(latent, vec![b], t, None, None).unwrap();
        Environment::deterministic(inst).unwrap()
    }

    struct Always(usize);
    impl Policy for Always {
        fn choose(&mut self, _rng: &mut RngState) -> usize {
            self.0
        }
        fn observe(&mut self, _arm: usize, _outcome: &Outcome) {}
    }

    #[test]
    fn episode_stops_after_budget_exceeded() {
        let env = single_arm_env(5.0, 100);
        let trace = run_episode(&env, &mut Always(0), &mut RngState::new(0)).unwrap();
        assert_eq!(trace.stop_time, 6);
        assert_eq!(trace.total_reward, 5.0);
        assert_eq!(trace.rounds.len(), 6);
    }

    #[test]
    fn time_only_episode_runs_the_full_horizon() {
        let latent = LatentStructure::new(vec![1.0], vec![vec![]]).unwrap();
        let inst = add_time_resource(&latent, &[], 30.0, 30).unwrap();
        let env = Environment::deterministic(inst).unwrap();
        let trace = run_episode(&env, &mut Always(0), &mut RngState::new(0)).unwrap();
        assert_eq!(trace.stop_time, 31);
        assert_eq!(trace.total_reward, 30.0);
    }

    #[test]
    fn time_column_is_budget_over_horizon() {
        let latent = LatentStructure::new(vec![0.5, 0.2], vec![vec![0.1], vec![0.9]]).unwrap();
        let inst = add_time_resource(&latent, &[5.0], 5.0, 20).unwrap();
        assert_eq!(inst.resources(), 2);
        assert_eq!(inst.time_resource, Some(1));
        assert_eq!(inst.latent.consumption(0, 1), 0.25);
        assert_eq!(inst.latent.consumption(1, 1), 0.25);
        assert_eq!(inst.budgets, vec![5.0, 5.0]);

        let full = add_time_resource(&latent, &[5.0], 10.0, 10).unwrap();
        assert_eq!(full.latent.consumption(0, 1), 1.0);
    }

    #[test]
    fn add_time_resource_rejects_budgets_above_horizon() {
        let latent = LatentStructure::new(vec![1.0], vec![vec![1.0]]).unwrap();
        assert!(add_time_resource(&latent, &[11.0], 10.0, 10).is_err());
        assert!(add_time_resource(&latent, &[5.0], 12.0, 10).is_err());
    }

    #[test]
    fn normalize_budgets_rescales_columns() {
        let latent =
            LatentStructure::new(vec![1.0], vec![vec![0.5, 0.8]]).unwrap();
        let inst = Instance::new(latent, vec![10.0, 40.0], 100, None, None).unwrap();
        let norm = inst.normalize_budgets();
        assert_eq!(norm.budgets, vec![10.0, 10.0]);
        assert_eq!(norm.latent.consumption(0, 0), 0.5);
        assert_eq!(norm.latent.consumption(0, 1), 0.8 * 0.25);
    }

    #[test]
    fn null_arm_append_is_idempotent() {
        let latent = LatentStructure::new(vec![1.0], vec![vec![0.3]]).unwrap();
        let inst = add_time_resource(&latent, &[4.0], 8.0, 16).unwrap();
        let with_null = inst.append_null_arm().unwrap();
        assert_eq!(with_null.arms(), 2);
        assert_eq!(with_null.null_arm, Some(1));
        assert_eq!(with_null.latent.reward(1), 0.0);
        assert_eq!(with_null.latent.consumption(1, 0), 0.0);
        assert_eq!(with_null.latent.consumption(1, 1), 0.5);
        let again = with_null.append_null_arm().unwrap();
        assert_eq!(again, with_null);
    }

    #[test]
    fn environment_rejects_bad_weights_and_means() {
        let latent = LatentStructure::new(vec![0.5], vec![vec![0.5]]).unwrap();
        let inst = Instance::new(latent, vec![5.0], 10, None, None).unwrap();
        let bad_weights = vec![vec![
            SupportPoint { weight: 0.6, outcome: Outcome::new(1.0, vec![1.0]).unwrap() },
            SupportPoint { weight: 0.6, outcome: Outcome::new(0.0, vec![0.0]).unwrap() },
        ]];
        assert!(Environment::new(inst.clone(), bad_weights).is_err());
        let bad_mean = vec![vec![
            SupportPoint { weight: 0.5, outcome: Outcome::new(1.0, vec![1.0]).unwrap() },
            SupportPoint { weight: 0.5, outcome: Outcome::new(0.5, vec![0.0]).unwrap() },
        ]];
        assert!(Environment::new(inst, bad_mean).is_err());
    }

    #[test]
    fn sampling_matches_weights_and_is_reproducible() {
        let latent = LatentStructure::new(vec![0.25], vec![vec![0.75]]).unwrap();
        let inst = Instance::new(latent, vec![5.0], 10, None, None).unwrap();
        let env = Environment::new(
            inst,
            vec![vec![
                SupportPoint { weight: 0.25, outcome: Outcome::new(1.0, vec![0.0]).unwrap() },
                SupportPoint { weight: 0.75, outcome: Outcome::new(0.0, vec![1.0]).unwrap() },
            ]],
        )
        .unwrap();
        let mut rng = RngState::new(11);
        let mut ones = 0usize;
        let n = 200_000;
        for _ in 0..n {
            if env.sample_outcome(0, &mut rng).unwrap().reward == 1.0 {
                ones += 1;
            }
        }
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.25).abs() < 0.005, "frequency {freq}");

        let a = env.sample_outcome(0, &mut RngState::new(3)).unwrap();
        let b = env.sample_outcome(0, &mut RngState::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_arm_aborts_episode() {
        let env = single_arm_env(5.0, 10);
        let err = run_episode(&env, &mut Always(3), &mut RngState::new(0));
        assert!(matches!(err, Err(Error::BadArm { arm: 3, arms: 1 })));
    }

    #[test]
    fn json_roundtrip_preserves_environment() {
        let latent = LatentStructure::new(vec![0.25, 0.0], vec![vec![0.75, 0.2], vec![0.0, 0.2]]).unwrap();
        let inst = Instance::new(latent, vec![3.0, 2.0], 10, Some(1), Some(1)).unwrap();
        let env = Environment::new(
            inst,
            vec![
                vec![
                    SupportPoint { weight: 0.25, outcome: Outcome::new(1.0, vec![0.0, 0.2]).unwrap() },
                    SupportPoint { weight: 0.75, outcome: Outcome::new(0.0, vec![1.0, 0.2]).unwrap() },
                ],
                vec![SupportPoint { weight: 1.0, outcome: Outcome::new(0.0, vec![0.0, 0.2]).unwrap() }],
            ],
        )
        .unwrap();
        let json = env.to_json();
        let back = Environment::from_json(&json).unwrap();
        assert_eq!(back, env);
        assert_eq!(json["arms"], 2);
        assert_eq!(json["time_resource"], 1);
    }

    #[test]
    fn scale_preserves_time_rate() {
        let latent = LatentStructure::new(vec![1.0], vec![vec![0.4]]).unwrap();
        let inst = add_time_resource(&latent, &[5.0], 10.0, 10).unwrap();
        let env = Environment::deterministic(inst).unwrap();
        let scaled = env.scale(4).unwrap();
        assert_eq!(scaled.instance().budgets, vec![20.0, 40.0]);
        assert_eq!(scaled.instance().horizon, 40);
        assert_eq!(scaled.instance().time_rate(), Some(1.0));
    }
}
