//! The fractional-relaxation benchmark.
//!
//! For latent means `r`, consumption matrix `C`, and budgets `b`, the
//! benchmark LP is
//!
//! ```text
//! max  r' xi        s.t.  C xi <= b,  xi >= 0
//! ```
//!
//! `xi_x` reads as the expected number of pulls of arm `x`. The dual prices
//! one unit of each resource; its objective is `sum_i b_i eta_i`. Expected
//! reward of any policy that stops inside the budgets is at most the LP
//! value, so `LPOPT - mean reward` is the regret we report.
//!
//! For a distribution `D` over arms, [`lp_value`] evaluates
//! `r(D) * min_i b_i / c_i(D)`: the reward rate times how long the mixture
//! can run before its tightest resource runs out. The supremum over `D`
//! equals the LP value and is attained by `xi / |xi|_1`.
//!
//! [`lp_perfect`] post-processes an optimal vertex into a distribution that
//! keeps per-round consumption of every resource at most `B / T`, has
//! support at most `d`, and when its support is exactly two arms makes some
//! resource's consumption exactly `B / T`. Those are the properties the
//! phased candidate policy needs from its candidates.

use crate::error::{Error, Result};
use crate::model::{Instance, LatentStructure};
use crate::rng::RngState;

/// Entering/pivot tolerance for the simplex.
const PIVOT_TOL: f64 = 1e-9;

/// A sub-probability distribution over arms. Mass may sum to less than one;
/// the deficit implicitly sits on the null arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmDistribution {
    weights: Vec<f64>,
}

impl ArmDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("distribution needs at least one arm"));
        }
        if !weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(Error::invalid("distribution weights must be non-negative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("distribution mass {sum} exceeds 1")));
        }
        Ok(ArmDistribution { weights })
    }

    pub fn point_mass(arms: usize, arm: usize) -> Self {
        let mut weights = vec![0.0; arms];
        weights[arm] = 1.0;
        ArmDistribution { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn arms(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, arm: usize) -> f64 {
        self.weights[arm]
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass not assigned to any explicit arm.
    pub fn deficit(&self) -> f64 {
        (1.0 - self.mass()).max(0.0)
    }

    /// Arms with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|x| self.weights[*x] > 0.0).collect()
    }

    pub fn expected_reward(&self, latent: &LatentStructure) -> f64 {
        (0..self.weights.len()).map(|x| self.weights[x] * latent.reward(x)).sum()
    }

    pub fn expected_consumption(&self, latent: &LatentStructure, resource: usize) -> f64 {
        (0..self.weights.len())
            .map(|x| self.weights[x] * latent.consumption(x, resource))
            .sum()
    }

    /// Draws an arm; `None` means the draw landed in the deficit mass and
    /// the caller should play the null arm.
    pub fn sample(&self, rng: &mut RngState) -> Option<usize> {
        let mut u = rng.uniform();
        for (x, w) in self.weights.iter().enumerate() {
            if u < *w {
                return Some(x);
            }
            u -= w;
        }
        None
    }

    /// Largest absolute weight difference against another distribution.
    pub fn linf_distance(&self, other: &ArmDistribution) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Primal/dual pair returned by [`solve_primal`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal objective value.
    pub value: f64,
    /// Optimal vertex: expected pulls per arm.
    pub xi: Vec<f64>,
    /// Dual prices per resource.
    pub eta: Vec<f64>,
    /// Which budget constraints are tight at the vertex.
    pub tight: Vec<bool>,
}

/// Dense tableau simplex with Bland's rule. Budgets are positive, so the
/// all-slack basis is feasible and no phase-one is needed; Bland's rule
/// makes the pivot sequence (and therefore the returned vertex)
/// deterministic and immune to cycling.
pub fn solve_primal(latent: &LatentStructure, budgets: &[f64]) -> Result<LpSolution> {
    let m = latent.arms();
    let d = latent.resources();
    if budgets.len() != d {
        return Err(Error::invalid("one budget per resource required"));
    }
    if !budgets.iter().all(|b| b.is_finite() && *b > 0.0) {
        return Err(Error::invalid("budgets must be positive"));
    }
    if d == 0 {
        if latent.rewards().iter().any(|r| *r > 0.0) {
            return Err(Error::Unbounded(
                "no resources to bound a positive-reward arm".into(),
            ));
        }
        return Ok(LpSolution { value: 0.0, xi: vec![0.0; m], eta: vec![], tight: vec![] });
    }

    let n = m + d;
    let mut rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row = vec![0.0; n + 1];
            for x in 0..m {
                row[x] = latent.consumption(x, i);
            }
            row[m + i] = 1.0;
            row[n] = budgets[i];
            row
        })
        .collect();
    let mut obj = vec![0.0; n + 1];
    obj[..m].copy_from_slice(latent.rewards());
    let mut basis: Vec<usize> = (m..n).collect();

    loop {
        // Bland: smallest-index variable with positive reduced cost enters.
        let Some(enter) = (0..n).find(|j| obj[*j] > PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..d {
            let a = rows[i][enter];
            if a > PIVOT_TOL {
                let ratio = rows[i][n] / a;
                let better = ratio < best_ratio - PIVOT_TOL
                    || (ratio < best_ratio + PIVOT_TOL
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if leave.is_none() || better {
                    if ratio < best_ratio {
                        best_ratio = ratio;
                    }
                    leave = Some(i);
                }
            }
        }
        let Some(pivot_row) = leave else {
            return Err(Error::Unbounded(format!(
                "arm {enter} has positive reward and no binding consumption"
            )));
        };
        let piv = rows[pivot_row][enter];
        for v in rows[pivot_row].iter_mut() {
            *v /= piv;
        }
        for i in 0..d {
            if i != pivot_row {
                let factor = rows[i][enter];
                if factor != 0.0 {
                    let (src, dst) = if i < pivot_row {
                        let (a, b) = rows.split_at_mut(pivot_row);
                        (&b[0], &mut a[i])
                    } else {
                        let (a, b) = rows.split_at_mut(i);
                        (&a[pivot_row], &mut b[0])
                    };
                    for (x, s) in dst.iter_mut().zip(src) {
                        *x -= factor * s;
                    }
                }
            }
        }
        let factor = obj[enter];
        for (x, s) in obj.iter_mut().zip(&rows[pivot_row]) {
            *x -= factor * s;
        }
        basis[pivot_row] = enter;
    }

    let mut xi = vec![0.0; m];
    for (i, var) in basis.iter().enumerate() {
        if *var < m {
            xi[*var] = rows[i][n].max(0.0);
        }
    }
    // Slacks recomputed from xi so the tightness report is consistent with
    // the returned vertex rather than with tableau roundoff.
    let slack: Vec<f64> = (0..d)
        .map(|i| budgets[i] - (0..m).map(|x| xi[x] * latent.consumption(x, i)).sum::<f64>())
        .collect();
    let value = -obj[n];
    let eta: Vec<f64> = (0..d).map(|i| (-obj[m + i]).max(0.0)).collect();
    let tight: Vec<bool> = (0..d)
        .map(|i| slack[i] <= 1e-8 * budgets[i].max(1.0))
        .collect();

    if cfg!(debug_assertions) {
        let dual_value: f64 = eta.iter().zip(budgets).map(|(e, b)| e * b).sum();
        debug_assert!(
            (value - dual_value).abs() <= 1e-6 * value.abs().max(1.0),
            "duality gap: primal {value}, dual {dual_value}"
        );
    }
    Ok(LpSolution { value, xi, eta, tight })
}

/// Convenience wrapper over the instance's latent and budgets.
pub fn solve_instance(instance: &Instance) -> Result<LpSolution> {
    solve_primal(&instance.latent, &instance.budgets)
}

/// Value of the mixture `dist`: reward rate times the stopping time of its
/// tightest resource. Resources the mixture does not consume are
/// non-binding. When a time resource is declared its per-round consumption
/// is the column constant regardless of deficit mass, because the implicit
/// null arm consumes time at the same rate as everything else.
pub fn lp_value(
    dist: &ArmDistribution,
    latent: &LatentStructure,
    budgets: &[f64],
    time_resource: Option<usize>,
) -> Result<f64> {
    if dist.arms() != latent.arms() {
        return Err(Error::invalid("distribution arm count does not match latent"));
    }
    if budgets.len() != latent.resources() {
        return Err(Error::invalid("one budget per resource required"));
    }
    let reward_rate = dist.expected_reward(latent);
    let mut stop = f64::INFINITY;
    for i in 0..latent.resources() {
        let rate = if Some(i) == time_resource {
            latent.consumption(0, i)
        } else {
            dist.expected_consumption(latent, i)
        };
        if rate > 0.0 {
            stop = stop.min(budgets[i] / rate);
        }
    }
    if stop.is_infinite() {
        if reward_rate > 0.0 {
            return Err(Error::Unbounded(
                "mixture consumes nothing but earns reward; add a time resource".into(),
            ));
        }
        return Ok(0.0);
    }
    Ok(reward_rate * stop)
}

/// Instance-level wrapper for [`lp_value`].
pub fn lp_value_instance(dist: &ArmDistribution, instance: &Instance) -> Result<f64> {
    lp_value(dist, &instance.latent, &instance.budgets, instance.time_resource)
}

/// Builds an LP-optimal distribution that additionally satisfies, for
/// uniform budgets `B` and horizon `T`:
///
/// 1. per-round consumption of every resource at most `B / T`;
/// 2. support of size at most `d`;
/// 3. if the support is exactly two arms, some resource's per-round
///    consumption equals `B / T`.
///
/// Construction: normalize the optimal vertex to a distribution. If some
/// resource consumes more than `B / T`, shrink all arms by the factor that
/// brings the heaviest resource to exactly `B / T` and park the freed mass
/// on the null arm; the reward rate drops by the same factor the stopping
/// time grows, so the LP value is unchanged.
pub fn lp_perfect(instance: &Instance) -> Result<ArmDistribution> {
    let b = instance.budgets[0];
    if !instance.budgets.iter().all(|bi| (bi - b).abs() <= 1e-9 * b.max(1.0)) {
        return Err(Error::invalid(
            "lp_perfect requires uniform budgets; call normalize_budgets first",
        ));
    }
    if instance.time_resource.is_none() {
        return Err(Error::MissingTimeResource("lp_perfect".into()));
    }
    let null = instance
        .null_arm
        .ok_or_else(|| Error::MissingNullArm("lp_perfect".into()))?;
    let sol = solve_instance(instance)?;
    let total: f64 = sol.xi.iter().sum();
    if total <= 1e-15 * b.max(1.0) {
        return Ok(ArmDistribution::point_mass(instance.arms(), null));
    }
    let mut weights: Vec<f64> = sol.xi.iter().map(|x| x / total).collect();
    let rate = b / instance.horizon as f64;
    let dist = ArmDistribution { weights: weights.clone() };
    let cmax = (0..instance.resources())
        .map(|i| dist.expected_consumption(&instance.latent, i))
        .fold(0.0, f64::max);
    if cmax > rate * (1.0 + 1e-12) {
        let alpha = rate / cmax;
        for w in &mut weights {
            *w *= alpha;
        }
        weights[null] += 1.0 - alpha;
    }
    ArmDistribution::new(weights)
}
