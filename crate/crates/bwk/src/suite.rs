//! The acceptance battery: eleven numbered, self-contained checks that
//! exercise the whole crate end to end, from the confidence-radius
//! algebra to full Monte-Carlo experiments. Each check reports one
//! pass/fail line; several also emit the CSV of the experiment that
//! backed them. All randomness derives from one suite seed, so two runs
//! with the same seed produce identical reports and identical CSV bytes.

use std::time::Instant;

use crate::confidence::RadiusParams;
use crate::discretization::{discretization_error, is_discretization, Mesh};
use crate::envs::{make_pricing_env, make_procurement_env, DemandCurve};
use crate::error::Result;
use crate::harness::{regret_curve, run_experiment, EnvSpec, ExperimentConfig};
use crate::hedge::Hedge;
use crate::lp::{lp_value_instance, solve_instance, solve_primal};
use crate::model::{add_time_resource, LatentStructure};
use crate::policies::{deterministic_main_bound, pdbwk_deterministic};
use crate::rng::{combine, hash_label, RngState};

/// Result of one acceptance check.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub number: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} ({:.2}s)",
            self.number,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details,
            self.seconds
        )
    }
}

/// Everything `bwk suite` prints and writes.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub outcomes: Vec<CriterionOutcome>,
    /// (file name, contents) pairs for the experiment CSVs.
    pub csvs: Vec<(String, String)>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

fn crit_rng(seed: u64, label: &str) -> RngState {
    RngState::new(combine(seed, hash_label(label)))
}

fn run_check(
    number: u32,
    name: &'static str,
    limit_seconds: Option<f64>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let start = Instant::now();
    let (mut passed, mut details) = match body() {
        Ok((p, d)) => (p, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = limit_seconds {
        if seconds >= limit {
            passed = false;
            details.push_str(&format!("; over the {limit:.0}s budget"));
        }
    }
    CriterionOutcome { number, name, passed, details, seconds }
}

// --- 1: confidence-radius properties ------------------------------------

/// Radius algebra on 10^4 random inputs per property: monotonicity in the
/// estimate and the sample count, midpoint concavity, lower-bound
/// monotonicity, the quarter and triple bounds around 4c/N, the exact
/// rescaling identity, the running-average bound with constant 4, and the
/// at-most-3x relation between empirical and true radii.
pub fn criterion_1(seed: u64) -> CriterionOutcome {
    run_check(1, "confidence radius properties", Some(5.0), || {
        let mut rng = crit_rng(seed, "radius-properties");
        const SAMPLES: usize = 10_000;
        const NMAX: usize = 1_000_000;
        // Prefix sums of 1/sqrt(l) and 1/l make the property-(g) average
        // O(1) per sample.
        let mut sum_half = vec![0.0f64; NMAX + 1];
        let mut sum_harm = vec![0.0f64; NMAX + 1];
        for l in 1..=NMAX {
            sum_half[l] = sum_half[l - 1] + 1.0 / (l as f64).sqrt();
            sum_harm[l] = sum_harm[l - 1] + 1.0 / l as f64;
        }
        let tol = 1e-12;
        let mut failures: Vec<String> = Vec::new();
        let mut check = |ok: bool, what: &str| {
            if !ok && failures.len() < 3 {
                failures.push(what.to_string());
            }
        };
        for _ in 0..SAMPLES {
            let c = 0.5 + 29.5 * rng.uniform();
            let params = RadiusParams::new(c)?;
            let (a, b) = (rng.uniform(), rng.uniform());
            let (nu, nu2) = (a.min(b), a.max(b));
            let (x, y) = (rng.uniform_in(1.0, 1e6), rng.uniform_in(1.0, 1e6));
            let (n_small, n_big) = (x.min(y), x.max(y));

            check(params.rad(nu, n_small) <= params.rad(nu2, n_small), "(a) nu-monotone");
            check(params.rad(nu, n_small) >= params.rad(nu, n_big), "(a) N-antitone");
            let mid = 0.5 * (nu + nu2);
            check(
                2.0 * params.rad(mid, n_small)
                    >= params.rad(nu, n_small) + params.rad(nu2, n_small) - tol,
                "(b) midpoint concavity",
            );
            check(
                params.lcb(nu, n_small) <= params.lcb(nu2, n_small) + tol,
                "(c) lower bound monotone",
            );
            let knee = 4.0 * c / n_small;
            if knee <= 1.0 {
                let hi = rng.uniform_in(knee, 1.0);
                check(
                    hi - params.rad(hi, n_small) >= hi / 4.0 - tol,
                    "(d) quarter bound above the knee",
                );
            }
            let lo = rng.uniform_in(0.0, knee.min(1.0));
            check(params.rad(lo, n_small) <= 3.0 * c / n_small + tol, "(e) triple bound");
            let alpha = rng.uniform_in(1e-3, 1.0);
            let lhs = params.rad(nu, alpha * n_small);
            let rhs = params.rad(alpha * nu, n_small) / alpha;
            check(
                (lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs()).max(1.0),
                "(f) rescaling identity",
            );
            let n_int = 1 + rng.below(NMAX);
            let avg = ((c * nu).sqrt() * sum_half[n_int] + c * sum_harm[n_int]) / n_int as f64;
            check(
                avg <= 4.0 * ((n_int + 1) as f64).ln() * params.rad(nu, n_int as f64) + tol,
                "(g) running-average bound",
            );
            // Empirical-vs-true radius: any estimate inside its own
            // radius has a radius within 3x of the truth's.
            let r_hat = params.rad(nu, n_small);
            let true_nu = (nu + rng.uniform_in(-r_hat, r_hat)).clamp(0.0, 1.0);
            check(
                r_hat <= 3.0 * params.rad(true_nu, n_small) + tol,
                "3x empirical-radius bound",
            );
        }
        if failures.is_empty() {
            Ok((true, format!("{SAMPLES} samples per property, all inequalities hold")))
        } else {
            Ok((false, format!("violated: {}", failures.join("; "))))
        }
    })
}

// --- 2: multiplicative-weights guarantee ---------------------------------

/// On 1000 random payoff sequences (dimension <= 16, length <= 10^4,
/// random learning rate), the realized payoff is at least
/// `(1 - eps) * best fixed coordinate - ln(d)/eps` up to 1e-9.
pub fn criterion_2(seed: u64) -> CriterionOutcome {
    run_check(2, "multiplicative-weights guarantee", Some(30.0), || {
        let mut rng = crit_rng(seed, "hedge-guarantee");
        let mut worst_slack = f64::INFINITY;
        for _ in 0..1000 {
            let d = 2 + rng.below(15);
            let len = 1 + rng.below(10_000);
            let eps = rng.uniform_in(0.01, 1.0);
            let mut hedge = Hedge::new(d, eps)?;
            let mut played = 0.0;
            let mut coordinate_totals = vec![0.0f64; d];
            let mut payoff = vec![0.0f64; d];
            for _ in 0..len {
                for p in payoff.iter_mut() {
                    *p = rng.uniform();
                }
                let dist = hedge.step(&payoff)?;
                played += dist.iter().zip(&payoff).map(|(y, p)| y * p).sum::<f64>();
                for (t, p) in coordinate_totals.iter_mut().zip(&payoff) {
                    *t += p;
                }
            }
            let best = coordinate_totals.iter().cloned().fold(0.0, f64::max);
            let floor = (1.0 - eps) * best - (d as f64).ln() / eps;
            let slack = played - floor;
            worst_slack = worst_slack.min(slack);
            if slack < -1e-9 {
                return Ok((false, format!("guarantee violated by {:.3e}", -slack)));
            }
        }
        Ok((true, format!("1000 sequences, worst slack {worst_slack:.3}")))
    })
}

// --- 3: LP oracle vs brute force -----------------------------------------

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to the next lexicographic k-combination of 0..n.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solves `A[rows][cols] y = b[rows]` by Gaussian elimination. Returns
/// `None` when the subsystem is singular.
fn solve_square(a: &[Vec<f64>], b: &[f64], rows: &[usize], cols: &[usize]) -> Option<Vec<f64>> {
    let k = rows.len();
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut row: Vec<f64> = cols.iter().map(|c| a[*r][*c]).collect();
            row.push(b[*r]);
            row
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).max_by(|i, j| m[*i][col].abs().partial_cmp(&m[*j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-11 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..k {
            if row != col {
                let f = m[row][col] / m[col][col];
                for entry in col..=k {
                    let sub = f * m[col][entry];
                    m[row][entry] -= sub;
                }
            }
        }
    }
    Some((0..k).map(|i| m[i][k] / m[i][i]).collect())
}

/// Optimal value of `max r.x : Cx <= b, x >= 0` by enumerating every basic
/// feasible point. Independent of the simplex code path.
fn brute_force_lp(latent: &LatentStructure, budgets: &[f64]) -> f64 {
    let m = latent.arms();
    let d = latent.resources();
    let a: Vec<Vec<f64>> =
        (0..d).map(|i| (0..m).map(|x| latent.consumption(x, i)).collect()).collect();
    let feasible = |xi: &[f64]| {
        (0..d).all(|i| {
            let used: f64 = (0..m).map(|x| a[i][x] * xi[x]).sum();
            used <= budgets[i] + 1e-7 * budgets[i].max(1.0)
        })
    };
    let mut best = 0.0f64;
    for k in 1..=m.min(d) {
        for_each_combination(m, k, |cols| {
            for_each_combination(d, k, |rows| {
                if let Some(y) = solve_square(&a, budgets, rows, cols) {
                    if y.iter().all(|v| *v >= -1e-10) {
                        let mut xi = vec![0.0; m];
                        for (slot, value) in cols.iter().zip(&y) {
                            xi[*slot] = value.max(0.0);
                        }
                        if feasible(&xi) {
                            let value: f64 =
                                (0..m).map(|x| latent.reward(x) * xi[x]).sum();
                            if value > best {
                                best = value;
                            }
                        }
                    }
                }
            });
        });
    }
    best
}

/// 500 random dense programs (m, d <= 5): the simplex value matches
/// exhaustive vertex enumeration to 1e-8, the returned prices are feasible
/// with gap <= 1e-8. Then 200 random reduced instances: the rounded
/// optimal mixture keeps the LP value, spends at most B/T per round on
/// every resource, has support at most d, and pins some resource to
/// exactly B/T whenever its support is exactly two.
pub fn criterion_3(seed: u64) -> CriterionOutcome {
    run_check(3, "lp oracle vs brute force", None, || {
        let mut rng = crit_rng(seed, "lp-oracle");
        for case in 0..500 {
            let m = 1 + rng.below(5);
            let d = 1 + rng.below(5);
            let rewards: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
            let cons: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| 0.01 + 0.99 * rng.uniform()).collect())
                .collect();
            let budgets: Vec<f64> = (0..d).map(|_| rng.uniform_in(0.5, 3.0)).collect();
            let latent = LatentStructure::new(rewards, cons)?;
            let sol = solve_primal(&latent, &budgets)?;
            let brute = brute_force_lp(&latent, &budgets);
            let scale = sol.value.abs().max(1.0);
            if (sol.value - brute).abs() > 1e-8 * scale {
                return Ok((
                    false,
                    format!("case {case}: simplex {} vs enumeration {brute}", sol.value),
                ));
            }
            for x in 0..m {
                let priced: f64 =
                    (0..d).map(|i| sol.eta[i] * latent.consumption(x, i)).sum();
                if priced < latent.reward(x) - 1e-8 {
                    return Ok((false, format!("case {case}: dual infeasible at arm {x}")));
                }
            }
            let dual_value: f64 = (0..d).map(|i| sol.eta[i] * budgets[i]).sum();
            if (sol.value - dual_value).abs() > 1e-8 * scale {
                return Ok((false, format!("case {case}: duality gap {}", sol.value - dual_value)));
            }
        }

        for case in 0..200 {
            let m0 = 1 + rng.below(4);
            let d0 = 1 + rng.below(3);
            let rewards: Vec<f64> = (0..m0).map(|_| rng.uniform()).collect();
            let cons: Vec<Vec<f64>> =
                (0..m0).map(|_| (0..d0).map(|_| rng.uniform()).collect()).collect();
            let budgets: Vec<f64> = (0..d0).map(|_| rng.uniform_in(1.0, 10.0)).collect();
            let horizon = 20 + rng.below(80);
            let time_budget = rng.uniform_in(1.0, horizon as f64);
            let latent = LatentStructure::new(rewards, cons)?;
            if budgets.iter().any(|b| *b > horizon as f64) {
                continue;
            }
            let inst = add_time_resource(&latent, &budgets, time_budget, horizon)?
                .append_null_arm()?
                .normalize_budgets();
            let lpopt = solve_instance(&inst)?.value;
            let dist = crate::lp::lp_perfect(&inst)?;
            let value = lp_value_instance(&dist, &inst)?;
            if (value - lpopt).abs() > 1e-8 * lpopt.abs().max(1.0) {
                return Ok((false, format!("rounding case {case}: value {value} vs {lpopt}")));
            }
            let rate = inst.budgets[0] / inst.horizon as f64;
            let per_round: Vec<f64> = (0..inst.resources())
                .map(|i| dist.expected_consumption(&inst.latent, i))
                .collect();
            if per_round.iter().any(|c| *c > rate + 1e-10) {
                return Ok((false, format!("rounding case {case}: consumption above B/T")));
            }
            let support = dist.support();
            if support.len() > inst.resources() {
                return Ok((
                    false,
                    format!("rounding case {case}: support {} > d", support.len()),
                ));
            }
            if support.len() == 2 && !per_round.iter().any(|c| (c - rate).abs() <= 1e-8) {
                return Ok((false, format!("rounding case {case}: no resource pinned to B/T")));
            }
        }
        Ok((true, "500 oracle matches, 200 rounded mixtures conform".into()))
    })
}

// --- 4: round-robin separation -------------------------------------------

/// The d-arm identity instance: LPOPT is exactly d*B while any single arm
/// is worth only B. The adaptive policy recovers at least 90% of d*B at
/// B=2000, T=10^4; the consumption-blind optimistic baseline stays at B.
pub fn criterion_4(seed: u64, csvs: &mut Vec<(String, String)>) -> CriterionOutcome {
    run_check(4, "round-robin separation", Some(120.0), || {
        let base = EnvSpec::Roundrobin { d: 3, budget: 5.0, horizon: 25 };
        let base_env = base.build()?;
        let lpopt_base = solve_instance(base_env.instance())?.value;
        if (lpopt_base - 15.0).abs() > 1e-9 {
            return Ok((false, format!("base LPOPT {lpopt_base} != 15")));
        }
        for arm in 0..3 {
            let single = crate::discretization::restricted_lp_value(
                &[arm],
                &base_env.instance().latent,
                &base_env.instance().budgets,
            )?;
            if (single - 5.0).abs() > 1e-9 {
                return Ok((false, format!("single-arm value {single} != 5 at arm {arm}")));
            }
        }
        let config = ExperimentConfig {
            env: base,
            policies: vec!["pdbwk".into(), "ucb_fixed_arm".into()],
            trials: 200,
            base_seed: combine(seed, hash_label("round-robin")),
            scaling: vec![400],
            out: None,
            c_rad: None,
            balance_k: None,
        };
        let report = run_experiment(&config)?;
        csvs.push(("criterion4_roundrobin.csv".into(), report.to_csv()));
        let pd = report.group("pdbwk", 400).expect("group exists");
        let ucb = report.group("ucb_fixed_arm", 400).expect("group exists");
        let lpopt = pd.lpopt;
        if (lpopt - 6000.0).abs() > 1e-6 {
            return Ok((false, format!("scaled LPOPT {lpopt} != 6000")));
        }
        let pd_ok = pd.mean_reward >= 0.9 * lpopt;
        let ucb_ok = ucb.mean_reward <= 2000.0 + 3.0 * ucb.std_error + 1e-9;
        Ok((
            pd_ok && ucb_ok,
            format!(
                "adaptive mean {:.0} vs 0.9*LPOPT {:.0}; blind mean {:.1} vs budget 2000",
                pd.mean_reward,
                0.9 * lpopt,
                ucb.mean_reward
            ),
        ))
    })
}

// --- 5: deterministic warm-up bound --------------------------------------

/// On 100 random mean-play instances the deterministic primal-dual run
/// earns, after its one-pull-per-arm warm-up, at least
/// `LPOPT * (1 - eps - (m+1)/B - ln d / (eps B))`.
pub fn criterion_5(seed: u64) -> CriterionOutcome {
    run_check(5, "deterministic warm-up bound", None, || {
        let mut rng = crit_rng(seed, "deterministic-bound");
        let mut worst_margin = f64::INFINITY;
        for case in 0..100 {
            let m0 = 1 + rng.below(4);
            let d0 = 1 + rng.below(3);
            let b = (rng.uniform_in((100.0f64).ln(), (10_000.0f64).ln())).exp();
            let horizon = (b * rng.uniform_in(1.2, 4.0)).ceil() as usize;
            let rewards: Vec<f64> = (0..m0).map(|_| rng.uniform()).collect();
            let cons: Vec<Vec<f64>> =
                (0..m0).map(|_| (0..d0).map(|_| rng.uniform()).collect()).collect();
            let latent = LatentStructure::new(rewards, cons)?;
            let inst = add_time_resource(&latent, &vec![b; d0], b, horizon)?
                .append_null_arm()?;
            let sched = pdbwk_deterministic(&inst)?;
            let bound = deterministic_main_bound(&inst)?;
            let margin = sched.main_reward - bound;
            worst_margin = worst_margin.min(margin);
            if margin < -1e-9 * bound.abs().max(1.0) {
                return Ok((
                    false,
                    format!(
                        "case {case}: main reward {:.3} below bound {:.3}",
                        sched.main_reward, bound
                    ),
                ));
            }
        }
        Ok((true, format!("100 instances, smallest slack {worst_margin:.3}")))
    })
}

// --- 6: lower-bound family closed forms -----------------------------------

/// Bernoulli-consumption family at p=0.5, eps=0.1, B=10: playing the best
/// arm forever earns 26.5 in expectation (10^5 trials, 3 standard
/// errors), and the time for any fixed arm to consume B units of budget
/// averages B/q.
pub fn criterion_6(seed: u64, csvs: &mut Vec<(String, String)>) -> CriterionOutcome {
    run_check(6, "lower-bound closed forms", Some(60.0), || {
        let config = ExperimentConfig {
            env: EnvSpec::Lb { m: 2, budget: 10.0, p: 0.5, eps: 0.1, best_arm: 0, horizon: 300 },
            policies: vec!["fixed:[1.0,0.0]".into(), "fixed:[0.0,1.0]".into()],
            trials: 100_000,
            base_seed: combine(seed, hash_label("lower-bound")),
            scaling: vec![1],
            out: None,
            c_rad: None,
            balance_k: None,
        };
        let report = run_experiment(&config)?;
        csvs.push(("criterion6_lowerbound.csv".into(), report.to_csv()));
        let best = report.group("fixed:[1.0,0.0]", 1).expect("group exists");
        let expected = 26.5;
        if (best.mean_reward - expected).abs() > 3.0 * best.std_error {
            return Ok((
                false,
                format!(
                    "best-arm mean {:.3} not within 3se={:.3} of {expected}",
                    best.mean_reward,
                    3.0 * best.std_error
                ),
            ));
        }
        // Time to consume the budget: mean number of Bernoulli(q) draws
        // until B units accumulate is B/q by Wald's identity.
        let mut rng = crit_rng(seed, "budget-hitting-time");
        let b_units = 10u32;
        let mut details = format!("best-arm mean {:.3}~26.5", best.mean_reward);
        for q in [0.4, 0.5] {
            let trials = 100_000;
            let mut sum = 0.0f64;
            let mut sumsq = 0.0f64;
            for _ in 0..trials {
                let mut units = 0u32;
                let mut t = 0u64;
                while units < b_units {
                    t += 1;
                    if rng.uniform() < q {
                        units += 1;
                    }
                }
                let tf = t as f64;
                sum += tf;
                sumsq += tf * tf;
            }
            let n = trials as f64;
            let mean = sum / n;
            let se = (((sumsq - n * mean * mean) / (n - 1.0)) / n).sqrt();
            let target = b_units as f64 / q;
            if (mean - target).abs() > 3.0 * se {
                return Ok((
                    false,
                    format!("hitting time at q={q}: mean {mean:.3} vs {target} (3se={:.3})", 3.0 * se),
                ));
            }
            details.push_str(&format!("; hit(q={q}) {mean:.2}~{target}"));
        }
        Ok((true, details))
    })
}

// --- 7: two-price advantage ------------------------------------------------

/// A two-point value distribution where the two candidate prices have
/// identical single-price LP values but their mixture is worth nearly
/// twice as much. Checked for selling (B=100, T=1000) and buying (B=50,
/// T=500); both factors must reach 1.7.
pub fn criterion_7(_seed: u64) -> CriterionOutcome {
    run_check(7, "two-price advantage", Some(1.0), || {
        // Selling: value 1 with small probability, value B^(delta-1/2)
        // otherwise (B=100, delta=0.1, T=1000).
        let b: f64 = 100.0;
        let t = 1000usize;
        let delta = 0.1;
        let q_hi = b.powf(0.5 + delta) / t as f64;
        let lo = b.powf(delta - 0.5);
        let demand = DemandCurve::new(vec![(lo, 1.0 - q_hi), (1.0, q_hi)])?;
        let env = make_pricing_env(&demand, &[lo, 1.0], b, t)?;
        let latent = &env.instance().latent;
        let budgets = &env.instance().budgets;
        let both = solve_primal(latent, budgets)?.value;
        let single_lo = crate::discretization::restricted_lp_value(&[0], latent, budgets)?;
        let single_hi = crate::discretization::restricted_lp_value(&[1], latent, budgets)?;
        let sell_factor = both / single_lo.max(single_hi);

        // Buying: a tenth of sellers accept a near-zero offer; the rest
        // need the full price (B=50, T=500).
        let demand = DemandCurve::new(vec![(0.01, 0.1), (1.0, 0.9)])?;
        let env = make_procurement_env(&demand, &[0.01, 1.0], 50.0, 500)?;
        let latent = &env.instance().latent;
        let budgets = &env.instance().budgets;
        let both_b = solve_primal(latent, budgets)?.value;
        let single_lo_b = crate::discretization::restricted_lp_value(&[0], latent, budgets)?;
        let single_hi_b = crate::discretization::restricted_lp_value(&[1], latent, budgets)?;
        let buy_factor = both_b / single_lo_b.max(single_hi_b);

        Ok((
            sell_factor >= 1.7 && buy_factor >= 1.7,
            format!("selling factor {sell_factor:.3}, buying factor {buy_factor:.3}"),
        ))
    })
}

// --- 8: mesh discretization error ------------------------------------------

fn random_demand(rng: &mut RngState) -> Result<DemandCurve> {
    let k = 2 + rng.below(5);
    let mut values: Vec<f64> = (0..k).map(|_| rng.uniform_in(0.05, 1.0)).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let raw: Vec<f64> = (0..values.len()).map(|_| 0.1 + rng.uniform()).collect();
    let total: f64 = raw.iter().sum();
    DemandCurve::new(values.into_iter().zip(raw.into_iter().map(|w| w / total)).collect())
}

fn grid_with(extra: &[f64], points: usize, lo: f64) -> Vec<f64> {
    let mut prices: Vec<f64> = (0..=points)
        .map(|i| lo + (1.0 - lo) * i as f64 / points as f64)
        .filter(|p| *p > 0.0)
        .collect();
    prices.extend_from_slice(extra);
    prices.sort_by(|a, b| a.partial_cmp(b).unwrap());
    prices.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    prices
}

/// Selling meshes on 20 random demand curves: the uniform mesh covers
/// every fine-grid price and its LP loss stays under eps*d*B; the
/// reciprocal mesh covers every buying grid restricted to [p0, 1]; and
/// truncating the buying grid at p0 costs at most p0*T^2/B of LP value.
pub fn criterion_8(seed: u64) -> CriterionOutcome {
    run_check(8, "mesh discretization error", Some(60.0), || {
        let mut rng = crit_rng(seed, "mesh-error");
        let epsilons = [0.2, 0.1, 0.05];
        for case in 0..20 {
            let demand = random_demand(&mut rng)?;
            let b = rng.uniform_in(5.0, 20.0);
            let t = 200usize;
            for eps in epsilons {
                let mesh = Mesh::additive(eps)?;
                let prices = grid_with(mesh.points(), 1000, 0.0);
                let env = make_pricing_env(&demand, &prices, b, t)?;
                let latent = &env.instance().latent;
                let subset: Vec<usize> = (0..prices.len())
                    .filter(|k| mesh.points().iter().any(|p| (p - prices[*k]).abs() < 1e-12))
                    .collect();
                let all: Vec<usize> = (0..prices.len()).collect();
                if !is_discretization(&subset, latent, eps + 1e-9, Some(1)) {
                    return Ok((false, format!("case {case}: uniform mesh fails to cover at eps={eps}")));
                }
                let err = discretization_error(&subset, &all, latent, &env.instance().budgets)?;
                let bound = eps * 2.0 * b + 1e-6;
                if err < -1e-8 || err > bound {
                    return Ok((
                        false,
                        format!("case {case}: LP loss {err:.4} outside [0, {bound:.4}] at eps={eps}"),
                    ));
                }
            }
        }
        let p0 = 0.1;
        for case in 0..20 {
            let demand = random_demand(&mut rng)?;
            for eps in epsilons {
                let mesh = Mesh::hyperbolic(eps, p0)?;
                let prices = grid_with(mesh.points(), 400, p0);
                let env = make_procurement_env(&demand, &prices, 10.0, 200)?;
                let subset: Vec<usize> = (0..prices.len())
                    .filter(|k| mesh.points().iter().any(|p| (p - prices[*k]).abs() < 1e-12))
                    .collect();
                if !is_discretization(&subset, &env.instance().latent, eps + 1e-9, Some(1)) {
                    return Ok((
                        false,
                        format!("case {case}: reciprocal mesh fails to cover at eps={eps}"),
                    ));
                }
            }
        }
        // Truncation: dropping offers below p0 loses at most p0*T^2/B.
        for case in 0..20 {
            let demand = random_demand(&mut rng)?;
            let b = 50.0;
            let t = 100usize;
            let p0 = rng.uniform_in(0.02, 0.1);
            let prices = grid_with(&[p0, b / t as f64], 200, 0.0);
            let env = make_procurement_env(&demand, &prices, b, t)?;
            let latent = &env.instance().latent;
            let budgets = &env.instance().budgets;
            let all: Vec<usize> = (0..prices.len()).collect();
            let trunc: Vec<usize> =
                (0..prices.len()).filter(|k| prices[*k] >= p0 - 1e-12).collect();
            let full_value = crate::discretization::restricted_lp_value(&all, latent, budgets)?;
            let trunc_value =
                crate::discretization::restricted_lp_value(&trunc, latent, budgets)?;
            let allowance = p0 * (t as f64).powi(2) / b + 1e-6;
            if trunc_value < full_value - allowance {
                return Ok((
                    false,
                    format!(
                        "case {case}: truncation loses {:.4} > {allowance:.4}",
                        full_value - trunc_value
                    ),
                ));
            }
        }
        Ok((true, "60 mesh covers, 60 LP-loss bounds, 20 truncation bounds".into()))
    })
}

// --- 9: balanced exploration advantage --------------------------------------

/// On the two-resource mixing instance (m=4, B=200, T=1000), balanced
/// exploration's mean regret is at most half the primal-dual policy's.
///
/// This check encodes a provable-bounds comparison as a measured one, and
/// the measurement comes out the other way: balanced exploration samples
/// its mixture open-loop and pays an irreducible ~sqrt(B) stopping
/// shortfall (its own guarantee's sqrt(B) term), while the primal-dual
/// policy tracks realized consumption closed-loop and lands well under
/// that. The configuration below is the most favorable one found for the
/// claim (sharp confidence radius so balanced exploration identifies the
/// structure quickly, a wide candidate set); the gap still measures about
/// 2.3x in the primal-dual policy's favor, so the check reports its
/// failure honestly rather than hiding it.
pub fn criterion_9(seed: u64, csvs: &mut Vec<(String, String)>) -> CriterionOutcome {
    run_check(9, "balanced exploration advantage", None, || {
        let config = ExperimentConfig {
            env: EnvSpec::Separation {
                case: "first_heavy".into(),
                m: 4,
                budget: 200.0,
                horizon: 1000,
            },
            policies: vec!["balance".into(), "pdbwk".into()],
            trials: 200,
            base_seed: combine(seed, hash_label("balance-advantage")),
            scaling: vec![1],
            out: None,
            c_rad: Some(1.0),
            balance_k: Some(64),
        };
        let report = run_experiment(&config)?;
        csvs.push(("criterion9_separation.csv".into(), report.to_csv()));
        let bal = report.group("balance", 1).expect("group exists");
        let pd = report.group("pdbwk", 1).expect("group exists");
        if (bal.lpopt - 600.0).abs() > 1e-6 {
            return Ok((false, format!("LPOPT {} != 600", bal.lpopt)));
        }
        Ok((
            bal.mean_regret <= 0.5 * pd.mean_regret,
            format!(
                "balanced regret {:.1} vs primal-dual {:.1} (need <= half)",
                bal.mean_regret, pd.mean_regret
            ),
        ))
    })
}

// --- 10: budget scaling slope ------------------------------------------------

/// Multiplying budgets and horizon by alpha in {1, 4, 16} should grow
/// regret like sqrt(alpha): the fitted log-log slope stays at or below
/// 0.75 with 500 trials per point.
pub fn criterion_10(seed: u64, csvs: &mut Vec<(String, String)>) -> CriterionOutcome {
    run_check(10, "budget scaling slope", Some(300.0), || {
        // Base B=40 keeps the alpha=1 regret clear of the small-budget
        // regime where the stopping rule's one-round overshoot can push
        // measured regret to zero or below and wreck the log-log fit.
        let config = ExperimentConfig {
            env: EnvSpec::Lb { m: 2, budget: 40.0, p: 0.5, eps: 0.1, best_arm: 0, horizon: 400 },
            policies: vec!["pdbwk".into()],
            trials: 500,
            base_seed: combine(seed, hash_label("scaling-slope")),
            scaling: vec![1, 4, 16],
            out: None,
            c_rad: Some(1.0),
            balance_k: None,
        };
        let report = run_experiment(&config)?;
        csvs.push(("criterion10_scaling.csv".into(), report.to_csv()));
        let curve = regret_curve(&report, "pdbwk")?;
        let detail = curve
            .points
            .iter()
            .map(|p| format!("a={}: {:.2}", p.alpha, p.regret))
            .collect::<Vec<_>>()
            .join(", ");
        Ok((
            curve.slope <= 0.75,
            format!("slope {:.3} (need <= 0.75); regrets {detail}", curve.slope),
        ))
    })
}

// --- 11: suite determinism ----------------------------------------------------

/// Running the same multi-policy experiment twice from the same seed must
/// reproduce the CSV byte for byte; this is the property that makes every
/// other criterion and the CLI reports replayable.
pub fn criterion_11(seed: u64, csvs: &mut Vec<(String, String)>) -> CriterionOutcome {
    run_check(11, "seeded determinism", None, || {
        let config = ExperimentConfig {
            env: EnvSpec::Separation {
                case: "second_heavy".into(),
                m: 4,
                budget: 20.0,
                horizon: 100,
            },
            policies: vec![
                "pdbwk".into(),
                "balance".into(),
                "ucb_fixed_arm".into(),
                "uniform_random".into(),
                "fixed:[0.2,0.2,0.2,0.2,0.0]".into(),
            ],
            trials: 50,
            base_seed: combine(seed, hash_label("determinism")),
            scaling: vec![1, 2],
            out: None,
            c_rad: None,
            balance_k: Some(8),
        };
        let first = run_experiment(&config)?.to_csv();
        let second = run_experiment(&config)?.to_csv();
        csvs.push(("criterion11_determinism.csv".into(), first.clone()));
        Ok((
            first == second,
            format!(
                "two runs, {} rows, byte-identical: {}",
                first.lines().count() - 1,
                first == second
            ),
        ))
    })
}

/// Runs all eleven checks with sub-seeds derived from `seed`.
pub fn run_suite(seed: u64) -> SuiteReport {
    let mut csvs = Vec::new();
    let outcomes = vec![
        criterion_1(seed),
        criterion_2(seed),
        criterion_3(seed),
        criterion_4(seed, &mut csvs),
        criterion_5(seed),
        criterion_6(seed, &mut csvs),
        criterion_7(seed),
        criterion_8(seed),
        criterion_9(seed, &mut csvs),
        criterion_10(seed, &mut csvs),
        criterion_11(seed, &mut csvs),
    ];
    SuiteReport { outcomes, csvs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_lexicographically() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut count = 0;
        for_each_combination(5, 5, |_| count += 1);
        assert_eq!(count, 1);
        let mut none = 0;
        for_each_combination(3, 4, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn brute_force_agrees_with_solver_on_a_known_case() {
        let latent = LatentStructure::new(
            vec![1.0, 1.0, 1.0],
            vec![
                vec![1.0, 0.01, 0.01],
                vec![0.01, 1.0, 0.01],
                vec![0.01, 0.01, 1.0],
            ],
        )
        .unwrap();
        let budgets = [5.0, 5.0, 5.0];
        let brute = brute_force_lp(&latent, &budgets);
        let solved = solve_primal(&latent, &budgets).unwrap().value;
        assert!((brute - solved).abs() < 1e-8 * solved.max(1.0));
    }

    #[test]
    fn outcome_line_format_is_stable() {
        let outcome = CriterionOutcome {
            number: 7,
            name: "two-price advantage",
            passed: true,
            details: "ok".into(),
            seconds: 0.5,
        };
        assert_eq!(format!("{outcome}"), "criterion  7 PASS two-price advantage: ok (0.50s)");
    }
}
