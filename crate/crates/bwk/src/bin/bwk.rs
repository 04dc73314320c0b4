//! Command-line front end: run experiments from config files, solve the
//! benchmark LP for an instance, inspect price meshes, query the
//! single-resource lower-bound family, and run the acceptance suite.
//!
//! Exit codes: 0 on success, 2 when the acceptance suite reports a failing
//! check, 1 for usage or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use bwk::discretization::{covers, discretization_error, Mesh};
use bwk::envs::{make_lb_env, LowerBoundParams, opt_inf};
use bwk::error::{Error, Result};
use bwk::harness::{run_experiment, EnvSpec, ExperimentConfig};
use bwk::lp::{lp_perfect, solve_instance};
use bwk::suite::run_suite;

#[derive(Parser)]
#[command(
    name = "bwk",
    about = "Bandit-with-knapsacks experiments, LP benchmarks, and meshes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file and print the
    /// summary as JSON; per-trial rows go to the CSV path from `--out` or
    /// the config's `out` field, if either is set.
    Run {
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<u32>,
        /// Write per-trial rows to this CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the benchmark LP for an environment file (same JSON schema as
    /// a config's `env` object) and print value, vertex, dual prices, and
    /// the budget-feasible optimal mixture.
    Lp { instance: PathBuf },
    /// Print a price mesh; with `--instance` also verify that the mesh
    /// covers the instance's price grid and print the LP value it loses.
    Mesh {
        #[arg(long, value_enum)]
        kind: MeshKindArg,
        /// Cover tolerance; also sets the mesh step.
        #[arg(long)]
        eps: f64,
        /// Smallest covered price; required for the hyperbolic mesh.
        #[arg(long)]
        floor: Option<f64>,
        /// Pricing or procurement environment file to check against.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Closed forms for the single-resource family (every arm pays 1,
    /// consumption Bernoulli(p), one best arm at p-eps), plus an optional
    /// Monte-Carlo check of the best fixed arm.
    Lb {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long = "B")]
        budget: f64,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        best_arm: usize,
        /// If positive, also run this many best-fixed-arm episodes.
        #[arg(long, default_value_t = 0)]
        trials: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run the acceptance battery: one PASS/FAIL line per check, report
    /// CSVs written next to the binary's working directory or `--out-dir`.
    Suite {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Directory for the battery's CSV reports.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKindArg {
    /// Evenly spaced prices with step eps.
    Additive,
    /// Prices whose reciprocals are evenly spaced with step eps.
    Hyperbolic,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and --version are successful exits; everything else is
            // a usage error and exits 1 per the interface contract.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, seed, trials, out } => cmd_run(&config, seed, trials, out),
        Command::Lp { instance } => cmd_lp(&instance),
        Command::Mesh { kind, eps, floor, instance } => cmd_mesh(kind, eps, floor, instance),
        Command::Lb { p, eps, budget, m, horizon, best_arm, trials, seed } => {
            cmd_lb(p, eps, budget, m, horizon, best_arm, trials, seed)
        }
        Command::Suite { seed, out_dir } => cmd_suite(seed, out_dir),
    }
}

fn cmd_run(
    config_path: &Path,
    seed: Option<u64>,
    trials: Option<u32>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let text = std::fs::read_to_string(config_path)?;
    let mut config = ExperimentConfig::from_json_str(&text)?;
    if let Some(seed) = seed {
        config.base_seed = seed;
    }
    if let Some(trials) = trials {
        config.trials = trials;
    }
    let out = out.or_else(|| config.out.clone().map(PathBuf::from));
    let report = run_experiment(&config)?;
    if let Some(path) = out {
        std::fs::write(&path, report.to_csv())?;
    }
    println!("{}", serde_json::to_string_pretty(&report.summary_json())?);
    Ok(ExitCode::SUCCESS)
}

fn read_env_spec(path: &Path) -> Result<EnvSpec> {
    let text = std::fs::read_to_string(path)?;
    let spec: EnvSpec = serde_json::from_str(&text)?;
    Ok(spec)
}

fn cmd_lp(instance: &Path) -> Result<ExitCode> {
    let env = read_env_spec(instance)?.build()?;
    let inst = env.instance();
    let sol = solve_instance(inst)?;
    // The mixture construction wants the canonical form: uniform budgets
    // with declared time and null columns. Report it when the instance
    // supports it, and say why not otherwise.
    let normalized = inst.normalize_budgets();
    let perfect = match lp_perfect(&normalized) {
        Ok(dist) => json!({ "weights": dist.weights() }),
        Err(err) => json!({ "unavailable": err.to_string() }),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "lpopt": sol.value,
            "expected_pulls": sol.xi,
            "dual_prices": sol.eta,
            "tight_budgets": sol.tight,
            "budgets": inst.budgets,
            "horizon": inst.horizon,
            "mixture": perfect,
        }))?
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_mesh(
    kind: MeshKindArg,
    eps: f64,
    floor: Option<f64>,
    instance: Option<PathBuf>,
) -> Result<ExitCode> {
    let mesh = match kind {
        MeshKindArg::Additive => Mesh::additive(eps)?,
        MeshKindArg::Hyperbolic => {
            let floor =
                floor.ok_or_else(|| Error::invalid("hyperbolic mesh needs --floor"))?;
            Mesh::hyperbolic(eps, floor)?
        }
    };
    let mut output = json!({
        "kind": match kind {
            MeshKindArg::Additive => "additive",
            MeshKindArg::Hyperbolic => "hyperbolic",
        },
        "eps": eps,
        "points": mesh.points(),
    });
    if let Some(path) = instance {
        let spec = read_env_spec(&path)?;
        let report = mesh_report(&spec, &mesh, eps, floor)?;
        output["cover"] = report;
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(ExitCode::SUCCESS)
}

/// Rebuilds the environment on the union of its price grid and the mesh,
/// then reports whether every grid arm (above the floor, if any) is
/// covered by a mesh arm and how much LP value the restriction loses.
fn mesh_report(
    spec: &EnvSpec,
    mesh: &Mesh,
    eps: f64,
    floor: Option<f64>,
) -> Result<serde_json::Value> {
    let (prices, union_spec): (Vec<f64>, EnvSpec) = match spec {
        EnvSpec::Pricing { demand, prices, budget, horizon } => {
            let union = price_union(prices, mesh.points());
            (
                union.clone(),
                EnvSpec::Pricing {
                    demand: demand.clone(),
                    prices: union,
                    budget: *budget,
                    horizon: *horizon,
                },
            )
        }
        EnvSpec::Procurement { demand, prices, budget, horizon } => {
            let union = price_union(prices, mesh.points());
            (
                union.clone(),
                EnvSpec::Procurement {
                    demand: demand.clone(),
                    prices: union,
                    budget: *budget,
                    horizon: *horizon,
                },
            )
        }
        _ => {
            return Err(Error::invalid(
                "mesh coverage needs a pricing or procurement environment",
            ))
        }
    };
    let env = union_spec.build()?;
    let inst = env.instance();
    let latent = &inst.latent;
    let is_mesh_point =
        |p: f64| mesh.points().iter().any(|q| (p - q).abs() <= 1e-12);
    let subset: Vec<usize> =
        (0..prices.len()).filter(|i| is_mesh_point(prices[*i])).collect();
    if subset.is_empty() {
        return Err(Error::Config("no mesh point lies on the price grid".into()));
    }
    let cover_floor = floor.unwrap_or(0.0) - 1e-12;
    let uncovered: Vec<f64> = (0..prices.len())
        .filter(|y| {
            prices[*y] >= cover_floor
                && !subset
                    .iter()
                    .any(|x| covers(latent, *x, *y, eps + 1e-9, inst.time_resource))
        })
        .map(|y| prices[y])
        .collect();
    let full: Vec<usize> = (0..prices.len()).collect();
    let err = discretization_error(&subset, &full, latent, &inst.budgets)?;
    Ok(json!({
        "grid_arms": prices.len(),
        "mesh_arms": subset.len(),
        "covered": uncovered.is_empty(),
        "uncovered_prices": uncovered,
        "lp_value_lost": err,
        "loss_bound": eps * inst.resources() as f64 * inst.budgets[0],
    }))
}

fn price_union(prices: &[f64], mesh_points: &[f64]) -> Vec<f64> {
    let mut union: Vec<f64> = prices.iter().chain(mesh_points).copied().collect();
    union.sort_by(|a, b| a.partial_cmp(b).expect("prices are finite"));
    union.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    union
}

#[allow(clippy::too_many_arguments)]
fn cmd_lb(
    p: f64,
    eps: f64,
    budget: f64,
    m: usize,
    horizon: usize,
    best_arm: usize,
    trials: u32,
    seed: u64,
) -> Result<ExitCode> {
    let params = LowerBoundParams { arms: m, budget, p, eps, best_arm, horizon };
    let env = make_lb_env(&params)?;
    let lpopt = solve_instance(env.instance())?.value;
    let q: Vec<f64> = (0..m).map(|x| params.q(x)).collect();
    let hit_times: Vec<f64> = q.iter().map(|q| budget / q).collect();
    let mut output = json!({
        "lpopt": lpopt,
        "best_arm_unconstrained_mean": opt_inf(&params),
        "consumption_means": q,
        "expected_hit_times": hit_times,
    });
    if trials > 0 {
        let mut weights = vec![0.0; m];
        weights[best_arm] = 1.0;
        let config = ExperimentConfig {
            env: EnvSpec::Lb { m, budget, p, eps, best_arm, horizon },
            policies: vec![format!("fixed:{}", serde_json::to_string(&weights)?)],
            trials,
            base_seed: seed,
            scaling: vec![1],
            out: None,
            c_rad: None,
            balance_k: None,
        };
        let report = run_experiment(&config)?;
        let g = &report.groups[0];
        output["monte_carlo"] = json!({
            "trials": g.trials,
            "mean_reward": g.mean_reward,
            "std_error": g.std_error,
            "mean_stop_time": g.mean_stop_time,
        });
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_suite(seed: u64, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    let report = run_suite(seed);
    let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    for (name, content) in &report.csvs {
        std::fs::write(dir.join(name), content)?;
    }
    for outcome in &report.outcomes {
        println!("{outcome}");
    }
    let passed = report.outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} checks passed", report.outcomes.len());
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}
