//! Benchmark environment builders.
//!
//! Dynamic pricing and procurement turn posted-price problems into the
//! episode model: arms are prices, the item (or money) resource carries the
//! budget, and the horizon is the time resource. The synthetic families
//! (single-resource lower-bound family, the two-resource separation
//! example, and the round-robin example) exercise the policies in regimes
//! where the optimal play is known in closed form.

use crate::error::{Error, Result};
use crate::model::{add_time_resource, Environment, Instance, LatentStructure, Outcome, SupportPoint};

/// A buyer/seller value distribution with finite support on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct DemandCurve {
    /// (value, probability), values strictly ascending, probabilities
    /// summing to one.
    points: Vec<(f64, f64)>,
}

impl DemandCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("demand curve needs at least one point"));
        }
        let mut total = 0.0;
        for (idx, (v, q)) in points.iter().enumerate() {
            if !(v.is_finite() && (0.0..=1.0).contains(v)) {
                return Err(Error::invalid(format!("demand value {v} outside [0,1]")));
            }
            if !(q.is_finite() && *q >= 0.0) {
                return Err(Error::invalid("demand probabilities must be non-negative"));
            }
            if idx > 0 && points[idx - 1].0 >= *v {
                return Err(Error::invalid("demand values must be strictly ascending"));
            }
            total += q;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("demand probabilities sum to {total}, expected 1")));
        }
        Ok(DemandCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Probability a buyer with this value distribution accepts price `p`
    /// (buys iff value >= price; a tie is a sale). Clamped to [0,1]: the
    /// stored probabilities sum to 1 only within float tolerance, and a
    /// partial sum one ulp above 1 would leak out of the outcome range.
    pub fn sale_prob_at_least(&self, p: f64) -> f64 {
        let raw: f64 = self.points.iter().filter(|(v, _)| *v >= p).map(|(_, q)| q).sum();
        raw.clamp(0.0, 1.0)
    }

    /// Probability a seller with this value distribution accepts offer `p`
    /// (sells iff value <= offer; a tie is a sale). Clamped like
    /// [`Self::sale_prob_at_least`].
    pub fn sale_prob_at_most(&self, p: f64) -> f64 {
        let raw: f64 = self.points.iter().filter(|(v, _)| *v <= p).map(|(_, q)| q).sum();
        raw.clamp(0.0, 1.0)
    }
}

fn check_price_grid(prices: &[f64]) -> Result<()> {
    if prices.is_empty() {
        return Err(Error::invalid("need at least one price arm"));
    }
    if !prices.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p)) {
        return Err(Error::invalid("prices must lie in [0,1]"));
    }
    Ok(())
}

fn check_budget(budget: f64, horizon: usize) -> Result<()> {
    if !(budget > 0.0 && budget.is_finite()) || horizon == 0 {
        return Err(Error::invalid("budget and horizon must be positive"));
    }
    if budget > horizon as f64 {
        return Err(Error::invalid(format!(
            "budget {budget} exceeds horizon {horizon}; cap it at the horizon first"
        )));
    }
    Ok(())
}

/// Dynamic pricing with `budget` identical items over `horizon` buyers.
/// Arm `k` posts `prices[k]`; a sale earns the price and consumes one item.
/// Resources: items (index 0), time (index 1, budget = horizon).
pub fn make_pricing_env(
    demand: &DemandCurve,
    prices: &[f64],
    budget: f64,
    horizon: usize,
) -> Result<Environment> {
    check_price_grid(prices)?;
    check_budget(budget, horizon)?;
    let mut rewards = Vec::with_capacity(prices.len());
    let mut cons = Vec::with_capacity(prices.len());
    let mut support = Vec::with_capacity(prices.len());
    for &p in prices {
        let f = demand.sale_prob_at_least(p);
        rewards.push(p * f);
        cons.push(vec![f, 1.0]);
        let mut points = Vec::new();
        if f > 0.0 {
            points.push(SupportPoint { weight: f, outcome: Outcome::new(p, vec![1.0, 1.0])? });
        }
        if f < 1.0 {
            points.push(SupportPoint { weight: 1.0 - f, outcome: Outcome::new(0.0, vec![0.0, 1.0])? });
        }
        support.push(points);
    }
    let latent = LatentStructure::new(rewards, cons)?;
    let instance = Instance::new(latent, vec![budget, horizon as f64], horizon, Some(1), None)?;
    Environment::new(instance, support)
}

/// Procurement: buy items from `horizon` sellers with `budget` money. Arm
/// `k` offers `prices[k]`; an accepted offer yields one item (reward 1) and
/// spends the offered price. Resources: money (index 0), time (index 1).
pub fn make_procurement_env(
    demand: &DemandCurve,
    prices: &[f64],
    budget: f64,
    horizon: usize,
) -> Result<Environment> {
    check_price_grid(prices)?;
    check_budget(budget, horizon)?;
    let mut rewards = Vec::with_capacity(prices.len());
    let mut cons = Vec::with_capacity(prices.len());
    let mut support = Vec::with_capacity(prices.len());
    for &p in prices {
        let f = demand.sale_prob_at_most(p);
        rewards.push(f);
        cons.push(vec![p * f, 1.0]);
        let mut points = Vec::new();
        if f > 0.0 {
            points.push(SupportPoint { weight: f, outcome: Outcome::new(1.0, vec![p, 1.0])? });
        }
        if f < 1.0 {
            points.push(SupportPoint { weight: 1.0 - f, outcome: Outcome::new(0.0, vec![0.0, 1.0])? });
        }
        support.push(points);
    }
    let latent = LatentStructure::new(rewards, cons)?;
    let instance = Instance::new(latent, vec![budget, horizon as f64], horizon, Some(1), None)?;
    Environment::new(instance, support)
}

/// Parameters for the single-resource family where every arm pays reward 1
/// and consumes a Bernoulli unit: probability `p` everywhere except one
/// best arm at `p - eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundParams {
    pub arms: usize,
    pub budget: f64,
    pub p: f64,
    pub eps: f64,
    pub best_arm: usize,
    pub horizon: usize,
}

impl LowerBoundParams {
    fn validate(&self) -> Result<()> {
        if self.arms == 0 || self.best_arm >= self.arms {
            return Err(Error::invalid("need at least one arm and a valid best arm index"));
        }
        if !(0.0 < self.eps && self.eps < self.p && self.p < 1.0) {
            return Err(Error::invalid("need 0 < eps < p < 1"));
        }
        check_budget(self.budget, self.horizon)
    }

    /// Consumption probability of arm `x`.
    pub fn q(&self, arm: usize) -> f64 {
        if arm == self.best_arm {
            self.p - self.eps
        } else {
            self.p
        }
    }
}

/// Builds the lower-bound family environment. Resources: the consumed one
/// (index 0, budget `budget`), time (index 1, budget = horizon).
pub fn make_lb_env(params: &LowerBoundParams) -> Result<Environment> {
    params.validate()?;
    let mut rewards = Vec::new();
    let mut cons = Vec::new();
    let mut support = Vec::new();
    for x in 0..params.arms {
        let q = params.q(x);
        rewards.push(1.0);
        cons.push(vec![q, 1.0]);
        support.push(vec![
            SupportPoint { weight: q, outcome: Outcome::new(1.0, vec![1.0, 1.0])? },
            SupportPoint { weight: 1.0 - q, outcome: Outcome::new(1.0, vec![0.0, 1.0])? },
        ]);
    }
    let latent = LatentStructure::new(rewards, cons)?;
    let instance = Instance::new(
        latent,
        vec![params.budget, params.horizon as f64],
        params.horizon,
        Some(1),
        None,
    )?;
    Environment::new(instance, support)
}

/// Expected total reward of playing the best arm forever on the
/// lower-bound family with an unconstrained horizon: the episode stops when
/// cumulative consumption first exceeds the budget, i.e. reaches
/// `floor(budget) + 1` unit draws, so the expected stopping time is
/// `floor(budget + 1) / (p - eps)` and one round's reward is forfeited.
pub fn opt_inf(params: &LowerBoundParams) -> f64 {
    (params.budget + 1.0).floor() / (params.p - params.eps) - 1.0
}

/// Which half of the arms is the expensive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationCase {
    /// First half consumes one unit of resource 1; second half consumes
    /// half a unit of resource 2.
    FirstHeavy,
    /// Mirror image.
    SecondHeavy,
}

/// Two-resource deterministic environment where the optimal play mixes the
/// two halves of the arm set in proportion 1:2 (or 2:1). All rewards are 1.
/// Resources: two budgeted at `budget`, then time. A null arm is appended
/// so mixture-based policies can park mass.
pub fn make_separation_env(
    case: SeparationCase,
    arms: usize,
    budget: f64,
    horizon: usize,
) -> Result<Environment> {
    if arms < 2 || !arms.is_multiple_of(2) {
        return Err(Error::invalid("separation environment needs an even number of arms"));
    }
    check_budget(budget, horizon)?;
    if budget >= horizon as f64 / 2.0 {
        return Err(Error::invalid("separation environment needs budget < horizon / 2"));
    }
    let (c1, c2) = match case {
        SeparationCase::FirstHeavy => (1.0, 0.5),
        SeparationCase::SecondHeavy => (0.5, 1.0),
    };
    let mut rewards = Vec::new();
    let mut cons = Vec::new();
    for x in 0..arms {
        rewards.push(1.0);
        if x < arms / 2 {
            cons.push(vec![c1, 0.0]);
        } else {
            cons.push(vec![0.0, c2]);
        }
    }
    let latent = LatentStructure::new(rewards, cons)?;
    let instance = add_time_resource(&latent, &[budget, budget], horizon as f64, horizon)?
        .append_null_arm()?;
    Environment::deterministic(instance)
}

/// The introductory example: `d` arms and `d` budgeted resources, arm `i`
/// deterministically pays 1 and consumes one unit of resource `i`. Time and
/// a null arm are appended. Requires `horizon >= d * budget + d` so the
/// horizon never competes with the budgets.
pub fn make_roundrobin_env(d: usize, budget: f64, horizon: usize) -> Result<Environment> {
    if d == 0 {
        return Err(Error::invalid("need at least one resource"));
    }
    check_budget(budget, horizon)?;
    if (horizon as f64) < d as f64 * budget + d as f64 {
        return Err(Error::invalid(format!(
            "horizon {horizon} too short; need at least d*budget + d = {}",
            d as f64 * budget + d as f64
        )));
    }
    let cons = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let latent = LatentStructure::new(vec![1.0; d], cons)?;
    let instance = add_time_resource(&latent, &vec![budget; d], horizon as f64, horizon)?
        .append_null_arm()?;
    Environment::deterministic(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{lp_value_instance, solve_instance, ArmDistribution};

    fn uniform_demand(n: usize) -> DemandCurve {
        let q = 1.0 / n as f64;
        DemandCurve::new((0..n).map(|i| ((i + 1) as f64 / n as f64, q)).collect()).unwrap()
    }

    #[test]
    fn demand_curve_tail_probabilities() {
        let d = uniform_demand(4); // values .25 .5 .75 1.0, each 1/4
        assert_eq!(d.sale_prob_at_least(0.0), 1.0);
        assert_eq!(d.sale_prob_at_least(0.25), 1.0);
        assert_eq!(d.sale_prob_at_least(0.26), 0.75);
        assert_eq!(d.sale_prob_at_least(1.0), 0.25);
        assert_eq!(d.sale_prob_at_most(0.25), 0.25);
        assert_eq!(d.sale_prob_at_most(1.0), 1.0);
        assert!(DemandCurve::new(vec![(0.5, 0.5), (0.5, 0.5)]).is_err());
        assert!(DemandCurve::new(vec![(0.5, 0.7)]).is_err());
    }

    #[test]
    fn pricing_means_and_ratio_identity() {
        let demand = uniform_demand(4);
        let prices = [0.25, 0.5, 0.75, 1.0];
        let env = make_pricing_env(&demand, &prices, 10.0, 100).unwrap();
        let latent = &env.instance().latent;
        let mut prev_f = f64::INFINITY;
        for (k, &p) in prices.iter().enumerate() {
            let f = latent.consumption(k, 0);
            assert!(f <= prev_f, "sale probability must be non-increasing in price");
            prev_f = f;
            if f > 0.0 {
                assert!((latent.reward(k) / f - p).abs() < 1e-12);
            }
        }
        assert_eq!(env.instance().time_resource, Some(1));
        assert_eq!(env.instance().budgets, vec![10.0, 100.0]);
    }

    #[test]
    fn two_point_curve_sale_probability() {
        // Two-point demand: value 1 with probability B^(1/2+delta) / T,
        // value eps0 = B^(delta-1/2) otherwise; B = 100, delta = 0.1,
        // T = 1000.
        let b: f64 = 100.0;
        let delta = 0.1;
        let t = 1000.0;
        let q_hi = b.powf(0.5 + delta) / t;
        let eps0 = b.powf(delta - 0.5);
        let demand = DemandCurve::new(vec![(eps0, 1.0 - q_hi), (1.0, q_hi)]).unwrap();
        let env = make_pricing_env(&demand, &[eps0, 1.0], b, 1000).unwrap();
        let latent = &env.instance().latent;
        assert!((latent.consumption(1, 0) - q_hi).abs() < 1e-15);
        assert!((q_hi - 0.015848931924611134).abs() < 1e-15);
        assert!((latent.reward(1) - q_hi).abs() < 1e-15);
        assert_eq!(latent.consumption(0, 0), 1.0);
    }

    #[test]
    fn procurement_means_and_ratio_identity() {
        let demand = uniform_demand(4);
        let prices = [0.25, 0.5, 0.75, 1.0];
        let env = make_procurement_env(&demand, &prices, 10.0, 100).unwrap();
        let latent = &env.instance().latent;
        for (k, &p) in prices.iter().enumerate() {
            let f = latent.reward(k);
            let c = latent.consumption(k, 0);
            assert!((c - p * f).abs() < 1e-12);
            if c > 0.0 {
                assert!((f / c - 1.0 / p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lower_bound_env_means() {
        let params = LowerBoundParams { arms: 3, budget: 10.0, p: 0.5, eps: 0.1, best_arm: 1, horizon: 200 };
        let env = make_lb_env(&params).unwrap();
        let latent = &env.instance().latent;
        assert_eq!(latent.consumption(0, 0), 0.5);
        assert_eq!(latent.consumption(1, 0), 0.4);
        assert_eq!(latent.reward(2), 1.0);
        assert!((opt_inf(&params) - 26.5).abs() < 1e-12);
        // With eps -> 0 all arms coincide.
        let flat = LowerBoundParams { eps: 1e-9, ..params };
        let env2 = make_lb_env(&flat).unwrap();
        for x in 0..3 {
            assert!((env2.instance().latent.consumption(x, 0) - 0.5).abs() < 1e-8);
        }
        assert!(make_lb_env(&LowerBoundParams { eps: 0.6, ..params }).is_err());
    }

    #[test]
    fn separation_env_shape_and_lp() {
        let env = make_separation_env(SeparationCase::FirstHeavy, 4, 10.0, 40).unwrap();
        let inst = env.instance();
        assert_eq!(inst.arms(), 5);
        assert_eq!(inst.null_arm, Some(4));
        assert_eq!(inst.latent.consumption(0, 0), 1.0);
        assert_eq!(inst.latent.consumption(2, 1), 0.5);
        let sol = solve_instance(inst).unwrap();
        assert!((sol.value - 30.0).abs() < 1e-8, "LPOPT {}", sol.value);
        // Best single arm: a second-half arm runs 2B rounds.
        let best_fixed = (0..4)
            .map(|x| lp_value_instance(&ArmDistribution::point_mass(5, x), inst).unwrap())
            .fold(0.0, f64::max);
        assert!((best_fixed - 20.0).abs() < 1e-8);
        assert!(make_separation_env(SeparationCase::FirstHeavy, 3, 10.0, 40).is_err());
        assert!(make_separation_env(SeparationCase::FirstHeavy, 4, 25.0, 40).is_err());
    }

    #[test]
    fn roundrobin_env_lp_value() {
        let env = make_roundrobin_env(3, 5.0, 30).unwrap();
        let sol = solve_instance(env.instance()).unwrap();
        assert!((sol.value - 15.0).abs() < 1e-8);
        assert_eq!(env.instance().arms(), 4);
        assert!(make_roundrobin_env(3, 5.0, 17).is_err());
    }
}
