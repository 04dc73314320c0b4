//! Episode policies.
//!
//! The main algorithm treats the episode as a repeated game between a
//! primal player picking arms and a dual player (multiplicative weights)
//! pricing resources. Each round the dual prices make a cost out of every
//! arm's pessimistic consumption estimate; the policy pulls the arm with
//! the best optimistic-reward-per-cost ratio and charges the dual player
//! with the chosen arm's cost column.
//!
//! [`BalanceBwk`] instead maintains a box of confidence intervals, solves
//! the benchmark program on candidate models drawn from the box, and plays
//! the candidate mixture that most favors a designated arm, rotating the
//! designee so every arm gets its advocate.
//!
//! The remaining policies are baselines: a fixed mixture, an optimistic
//! single-arm rule ignoring consumption, and uniform play.

use crate::confidence::{ConfidenceState, RadiusParams};
use crate::error::{Error, Result};
use crate::hedge::Hedge;
use crate::lp::{lp_perfect, solve_instance, ArmDistribution};
use crate::model::{Instance, InstanceShape, LatentStructure, Outcome, Policy};
use crate::rng::RngState;

/// Default number of candidate models per balanced-exploration phase.
pub const DEFAULT_BALANCE_CANDIDATES: usize = 32;

/// Learning rate for the dual player: `sqrt(ln d / B)` kept inside
/// `[1e-6, 1]` so degenerate shapes (one resource, tiny budgets) still get
/// a valid multiplicative-weights step.
pub fn dual_learning_rate(resources: usize, min_budget: f64) -> f64 {
    ((resources as f64).ln() / min_budget).sqrt().clamp(1e-6, 1.0)
}

/// Arm with the smallest priced-cost-to-reward ratio
/// `(prices . cost[j]) / gain[j]`; ties go to the lowest index. `gain`
/// entries must be positive.
pub fn ratio_choice(prices: &[f64], gain: &[f64], cost: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_ratio = f64::INFINITY;
    for (j, g) in gain.iter().enumerate() {
        let priced: f64 = prices.iter().zip(&cost[j]).map(|(y, c)| y * c).sum();
        let ratio = priced / g;
        if ratio < best_ratio {
            best = j;
            best_ratio = ratio;
        }
    }
    best
}

/// Primal-dual policy. Pulls every arm once, then plays the best
/// optimistic-reward per priced pessimistic-cost arm, updating resource
/// prices with the chosen arm's cost column.
///
/// Internally the policy applies the uniform-budget reduction: resource
/// `i`'s observations are rescaled by `min_budget / B_i`, a pure change of
/// measurement units that leaves episode dynamics untouched. The dual
/// learning rate is calibrated for equal budgets, and without the rescale
/// a slack resource (typically time, budgeted at the whole horizon) pays
/// the dual player more than any scarce one, so the prices drift onto a
/// coordinate where the arms barely differ.
pub struct PdBwk {
    shape: InstanceShape,
    /// Per-resource unit change `min_budget / B_i`, each in (0, 1].
    scales: Vec<f64>,
    params: RadiusParams,
    state: ConfidenceState,
    hedge: Hedge,
    rounds_chosen: usize,
    pending_payoff: Option<Vec<f64>>,
}

impl PdBwk {
    pub fn new(shape: &InstanceShape) -> Result<Self> {
        let params = RadiusParams::default_for(shape.resources, shape.horizon, shape.arms);
        Self::with_params(shape, params)
    }

    pub fn with_params(shape: &InstanceShape, params: RadiusParams) -> Result<Self> {
        if shape.arms == 0 || shape.resources == 0 {
            return Err(Error::invalid("policy needs at least one arm and one resource"));
        }
        let b = shape.min_budget();
        let scales = shape.budgets.iter().map(|bi| b / bi).collect();
        let eps = dual_learning_rate(shape.resources, b);
        Ok(PdBwk {
            shape: shape.clone(),
            scales,
            params,
            state: ConfidenceState::new(shape.arms, shape.resources),
            hedge: Hedge::new(shape.resources, eps)?,
            rounds_chosen: 0,
            pending_payoff: None,
        })
    }

    pub fn resource_prices(&self) -> Vec<f64> {
        self.hedge.distribution()
    }

    pub fn confidence(&self) -> &ConfidenceState {
        &self.state
    }

    fn optimistic_gain(&self) -> Vec<f64> {
        (0..self.shape.arms)
            .map(|j| self.state.reward_interval(&self.params, j).1)
            .collect()
    }

    fn pessimistic_cost(&self, arm: usize) -> Vec<f64> {
        // The time resource is declared structure, not a latent quantity:
        // every arm consumes exactly the shape's rate. Pricing it at an
        // estimated lower bound would make the less-pulled arm look
        // cheaper on a coordinate where all arms are identical.
        (0..self.shape.resources)
            .map(|i| {
                if self.shape.time_resource == Some(i) {
                    self.shape.min_budget() / self.shape.horizon as f64
                } else {
                    self.state.consumption_interval(&self.params, arm, i).0
                }
            })
            .collect()
    }
}

impl Policy for PdBwk {
    fn choose(&mut self, _rng: &mut RngState) -> usize {
        let t = self.rounds_chosen;
        self.rounds_chosen += 1;
        if t < self.shape.arms {
            self.pending_payoff = None;
            return t;
        }
        let gain = self.optimistic_gain();
        let cost: Vec<Vec<f64>> =
            (0..self.shape.arms).map(|j| self.pessimistic_cost(j)).collect();
        let prices = self.hedge.distribution();
        let arm = ratio_choice(&prices, &gain, &cost);
        self.pending_payoff = Some(cost[arm].clone());
        arm
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        if let Some(payoff) = self.pending_payoff.take() {
            self.hedge
                .step(&payoff)
                .expect("pessimistic cost estimates stay in [0,1]");
        }
        let scaled: Vec<f64> = outcome
            .consumption
            .iter()
            .zip(&self.scales)
            .map(|(c, s)| c * s)
            .collect();
        let scaled = Outcome::new(outcome.reward, scaled)
            .expect("shrinking consumptions keeps the outcome in range");
        self.state.update(arm, &scaled);
    }
}

/// Trace of the idealized run where every pull consumes and earns exactly
/// its mean. `main_reward` counts the rounds after the one-pull-per-arm
/// warm-up and strictly before `stop_time`.
#[derive(Debug, Clone)]
pub struct DeterministicSchedule {
    pub pulls: Vec<usize>,
    pub stop_time: usize,
    pub total_reward: f64,
    pub main_reward: f64,
}

/// The primal-dual loop run on the true means instead of estimates, with
/// outcomes replaced by their expectations. Budgets are normalized to the
/// smallest one first; episode dynamics and LP value are unchanged by
/// that.
pub fn pdbwk_deterministic(instance: &Instance) -> Result<DeterministicSchedule> {
    let inst = instance.normalize_budgets();
    let m = inst.arms();
    let d = inst.resources();
    let b = inst.budgets[0];
    let eps = dual_learning_rate(d, b);
    let mut hedge = Hedge::new(d, eps)?;
    let slack = 1e-9 * b.max(1.0);
    let mut cum = vec![0.0; d];
    let mut pulls = Vec::new();
    let mut total_reward = 0.0;
    let mut main_reward = 0.0;
    for t in 1..=inst.horizon {
        let arm = if t <= m {
            t - 1
        } else {
            let prices = hedge.distribution();
            let mut best = 0;
            let mut best_ratio = f64::INFINITY;
            for j in 0..m {
                let r = inst.latent.reward(j);
                let ratio = if r > 0.0 {
                    prices
                        .iter()
                        .zip(inst.latent.consumption_row(j))
                        .map(|(y, c)| y * c)
                        .sum::<f64>()
                        / r
                } else {
                    f64::INFINITY
                };
                if ratio < best_ratio {
                    best = j;
                    best_ratio = ratio;
                }
            }
            best
        };
        pulls.push(arm);
        let mut exceeded = false;
        for i in 0..d {
            cum[i] += inst.latent.consumption(arm, i);
            if cum[i] > b + slack {
                exceeded = true;
            }
        }
        if exceeded {
            return Ok(DeterministicSchedule { pulls, stop_time: t, total_reward, main_reward });
        }
        total_reward += inst.latent.reward(arm);
        if t > m {
            main_reward += inst.latent.reward(arm);
        }
        if t > m {
            hedge.step(inst.latent.consumption_row(arm))?;
        }
    }
    Ok(DeterministicSchedule {
        pulls,
        stop_time: inst.horizon + 1,
        total_reward,
        main_reward,
    })
}

/// Guaranteed main-phase reward of [`pdbwk_deterministic`]:
/// `LPOPT * (1 - eps - (m + 1) / B - ln(d) / (eps * B))` with `eps` the
/// dual learning rate actually used. May be vacuous (negative) for small
/// budgets.
pub fn deterministic_main_bound(instance: &Instance) -> Result<f64> {
    let inst = instance.normalize_budgets();
    let m = inst.arms() as f64;
    let d = inst.resources() as f64;
    let b = inst.budgets[0];
    let eps = dual_learning_rate(inst.resources(), b);
    let lpopt = solve_instance(&inst)?.value;
    Ok(lpopt * (1.0 - eps - (m + 1.0) / b - d.ln() / (eps * b)))
}

/// Running intersection of per-coordinate confidence intervals. If new
/// evidence makes an intersection empty (possible only through estimate
/// drift), that coordinate restarts from the fresh interval.
#[derive(Debug, Clone)]
pub struct ConfidenceBox {
    reward: Vec<(f64, f64)>,
    consumption: Vec<Vec<(f64, f64)>>,
}

impl ConfidenceBox {
    pub fn full(arms: usize, resources: usize) -> Self {
        ConfidenceBox {
            reward: vec![(0.0, 1.0); arms],
            consumption: vec![vec![(0.0, 1.0); resources]; arms],
        }
    }

    /// Collapsed box pinned to one model; every draw returns that model.
    pub fn point(latent: &LatentStructure) -> Self {
        ConfidenceBox {
            reward: latent.rewards().iter().map(|r| (*r, *r)).collect(),
            consumption: (0..latent.arms())
                .map(|x| latent.consumption_row(x).iter().map(|c| (*c, *c)).collect())
                .collect(),
        }
    }

    fn meet(cur: (f64, f64), fresh: (f64, f64)) -> (f64, f64) {
        let lo = cur.0.max(fresh.0);
        let hi = cur.1.min(fresh.1);
        if lo > hi {
            fresh
        } else {
            (lo, hi)
        }
    }

    pub fn tighten(&mut self, state: &ConfidenceState, params: &RadiusParams) {
        for x in 0..self.reward.len() {
            self.reward[x] = Self::meet(self.reward[x], state.reward_interval(params, x));
            for i in 0..self.consumption[x].len() {
                self.consumption[x][i] = Self::meet(
                    self.consumption[x][i],
                    state.consumption_interval(params, x, i),
                );
            }
        }
    }

    pub fn reward_bounds(&self, arm: usize) -> (f64, f64) {
        self.reward[arm]
    }

    pub fn consumption_bounds(&self, arm: usize, resource: usize) -> (f64, f64) {
        self.consumption[arm][resource]
    }

    /// Total interval width over all coordinates; never grows under
    /// [`tighten`](Self::tighten) absent a reset.
    pub fn width_sum(&self) -> f64 {
        let r: f64 = self.reward.iter().map(|(lo, hi)| hi - lo).sum();
        let c: f64 = self
            .consumption
            .iter()
            .flat_map(|row| row.iter().map(|(lo, hi)| hi - lo))
            .sum();
        r + c
    }
}

/// Candidate mixtures for one balanced-exploration phase: the optimistic
/// corner (high reward, low consumption), the pessimistic corner, and
/// `k - 2` models drawn uniformly from the box, each pushed through the
/// budget-feasible LP rounding. Candidates whose mixtures agree to within
/// 1e-9 in sup norm are merged.
///
/// Every candidate model is forced back onto the declared structure before
/// solving: the time column is the known constant and the null arm
/// consumes nothing else, whatever the box says. Budgets are normalized to
/// the smallest one so the rounding's uniform-budget contract holds.
pub fn balance_candidates(
    shape: &InstanceShape,
    bx: &ConfidenceBox,
    k: usize,
    rng: &mut RngState,
) -> Result<Vec<ArmDistribution>> {
    if k < 2 {
        return Err(Error::invalid("need at least the two corner candidates"));
    }
    let tr = shape
        .time_resource
        .ok_or_else(|| Error::MissingTimeResource("balanced exploration".into()))?;
    let null = shape
        .null_arm
        .ok_or_else(|| Error::MissingNullArm("balanced exploration".into()))?;
    let m = shape.arms;
    let d = shape.resources;
    let b = shape.min_budget();
    let rate = b / shape.horizon as f64;
    let scales: Vec<f64> = shape.budgets.iter().map(|bi| b / bi).collect();

    let solve = |rewards: Vec<f64>, cons: Vec<Vec<f64>>| -> Result<ArmDistribution> {
        let mut rewards = rewards;
        let mut cons = cons;
        for x in 0..m {
            for i in 0..d {
                cons[x][i] *= scales[i];
            }
            cons[x][tr] = rate;
        }
        rewards[null] = 0.0;
        for i in 0..d {
            if i != tr {
                cons[null][i] = 0.0;
            }
        }
        let inst = Instance::new(
            LatentStructure::new(rewards, cons)?,
            vec![b; d],
            shape.horizon,
            Some(tr),
            Some(null),
        )?;
        lp_perfect(&inst)
    };

    let mut dists: Vec<ArmDistribution> = Vec::with_capacity(k);
    let push = |dist: ArmDistribution, dists: &mut Vec<ArmDistribution>| {
        if dists.iter().all(|seen| seen.linf_distance(&dist) >= 1e-9) {
            dists.push(dist);
        }
    };

    let optimistic = solve(
        (0..m).map(|x| bx.reward_bounds(x).1).collect(),
        (0..m).map(|x| (0..d).map(|i| bx.consumption_bounds(x, i).0).collect()).collect(),
    )?;
    push(optimistic, &mut dists);
    let pessimistic = solve(
        (0..m).map(|x| bx.reward_bounds(x).0).collect(),
        (0..m).map(|x| (0..d).map(|i| bx.consumption_bounds(x, i).1).collect()).collect(),
    )?;
    push(pessimistic, &mut dists);

    for _ in 0..k - 2 {
        let rewards = (0..m)
            .map(|x| {
                let (lo, hi) = bx.reward_bounds(x);
                rng.uniform_in(lo, hi)
            })
            .collect();
        let cons = (0..m)
            .map(|x| {
                (0..d)
                    .map(|i| {
                        let (lo, hi) = bx.consumption_bounds(x, i);
                        rng.uniform_in(lo, hi)
                    })
                    .collect()
            })
            .collect();
        push(solve(rewards, cons)?, &mut dists);
    }
    Ok(dists)
}

/// Balanced exploration. Works in phases of one round per arm: at each
/// phase start the box of plausible models is re-tightened and candidate
/// mixtures computed; within the phase, round `j` plays the candidate
/// giving arm `j` the most mass.
pub struct BalanceBwk {
    shape: InstanceShape,
    params: RadiusParams,
    state: ConfidenceState,
    bx: ConfidenceBox,
    candidates: Vec<ArmDistribution>,
    rounds_chosen: usize,
    k: usize,
}

impl BalanceBwk {
    pub fn new(shape: &InstanceShape) -> Result<Self> {
        let params = RadiusParams::default_for(shape.resources, shape.horizon, shape.arms);
        Self::with_params(shape, params, DEFAULT_BALANCE_CANDIDATES)
    }

    pub fn with_params(shape: &InstanceShape, params: RadiusParams, k: usize) -> Result<Self> {
        if shape.arms == 0 || shape.resources == 0 {
            return Err(Error::invalid("policy needs at least one arm and one resource"));
        }
        if shape.time_resource.is_none() {
            return Err(Error::MissingTimeResource("balanced exploration".into()));
        }
        if shape.null_arm.is_none() {
            return Err(Error::MissingNullArm("balanced exploration".into()));
        }
        if k < 2 {
            return Err(Error::invalid("need at least the two corner candidates"));
        }
        Ok(BalanceBwk {
            shape: shape.clone(),
            params,
            state: ConfidenceState::new(shape.arms, shape.resources),
            bx: ConfidenceBox::full(shape.arms, shape.resources),
            candidates: Vec::new(),
            rounds_chosen: 0,
            k,
        })
    }

    pub fn confidence_box(&self) -> &ConfidenceBox {
        &self.bx
    }
}

impl Policy for BalanceBwk {
    fn choose(&mut self, rng: &mut RngState) -> usize {
        let m = self.shape.arms;
        let designated = self.rounds_chosen % m;
        if designated == 0 {
            self.bx.tighten(&self.state, &self.params);
            self.candidates = balance_candidates(&self.shape, &self.bx, self.k, rng)
                .expect("shape was validated at construction");
        }
        self.rounds_chosen += 1;
        let dist = self
            .candidates
            .iter()
            .max_by(|a, b| {
                a.weight(designated)
                    .partial_cmp(&b.weight(designated))
                    .expect("weights are finite")
            })
            .expect("candidate list is never empty");
        dist.sample(rng).unwrap_or_else(|| self.shape.null_arm.expect("validated"))
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        self.state.update(arm, outcome);
    }
}

/// Plays a fixed mixture every round. Mass deficits fall back on the null
/// arm, so a strict sub-distribution needs a shape that declares one.
pub struct FixedDistribution {
    dist: ArmDistribution,
    fallback: usize,
}

impl FixedDistribution {
    pub fn new(shape: &InstanceShape, dist: ArmDistribution) -> Result<Self> {
        if dist.arms() != shape.arms {
            return Err(Error::invalid("mixture arm count does not match the instance"));
        }
        let fallback = match shape.null_arm {
            Some(null) => null,
            None if dist.deficit() <= 1e-12 => {
                // Full mass: the fallback only absorbs float dust, any
                // supported arm will do.
                dist.support().first().copied().unwrap_or(0)
            }
            None => {
                return Err(Error::MissingNullArm(
                    "fixed sub-distribution with positive deficit".into(),
                ))
            }
        };
        Ok(FixedDistribution { dist, fallback })
    }
}

impl Policy for FixedDistribution {
    fn choose(&mut self, rng: &mut RngState) -> usize {
        self.dist.sample(rng).unwrap_or(self.fallback)
    }

    fn observe(&mut self, _arm: usize, _outcome: &Outcome) {}
}

/// Optimistic single-arm play: pulls the arm with the highest reward upper
/// confidence bound, ignoring consumption entirely. Ties, including the
/// initial all-untried state, go to the lowest index.
pub struct UcbFixedArm {
    params: RadiusParams,
    state: ConfidenceState,
}

impl UcbFixedArm {
    pub fn new(shape: &InstanceShape) -> Self {
        let params = RadiusParams::default_for(shape.resources, shape.horizon, shape.arms);
        Self::with_params(shape, params)
    }

    pub fn with_params(shape: &InstanceShape, params: RadiusParams) -> Self {
        UcbFixedArm { params, state: ConfidenceState::new(shape.arms, shape.resources) }
    }
}

impl Policy for UcbFixedArm {
    fn choose(&mut self, _rng: &mut RngState) -> usize {
        let mut best = 0;
        let mut best_ucb = f64::NEG_INFINITY;
        for j in 0..self.state.arms() {
            let ucb = self.state.reward_interval(&self.params, j).1;
            if ucb > best_ucb {
                best = j;
                best_ucb = ucb;
            }
        }
        best
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        self.state.update(arm, outcome);
    }
}

/// Uniform play over all arms.
pub struct UniformRandom {
    arms: usize,
}

impl UniformRandom {
    pub fn new(shape: &InstanceShape) -> Self {
        UniformRandom { arms: shape.arms }
    }
}

impl Policy for UniformRandom {
    fn choose(&mut self, rng: &mut RngState) -> usize {
        rng.below(self.arms)
    }

    fn observe(&mut self, _arm: usize, _outcome: &Outcome) {}
}
