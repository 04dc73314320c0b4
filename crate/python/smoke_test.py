#!/usr/bin/env python3
"""Build the bwk_py extension module and drive it end to end.

Run from anywhere: the script locates the workspace from its own path,
builds the cdylib in release mode, stages it under a temp dir with the
import name Python expects, and then exercises environments, the LP
benchmark, episodes, and the batch runner.
"""

import json
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def build_and_import():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "bwk-py"], cwd=ROOT, check=True
    )
    suffix = ".dylib" if sys.platform == "darwin" else ".so"
    built = ROOT / "target" / "release" / f"libbwk_py{suffix}"
    if not built.exists():  # windows, or an unusual target dir layout
        built = ROOT / "target" / "release" / "bwk_py.dll"
    stage = pathlib.Path(tempfile.mkdtemp(prefix="bwk_py_"))
    ext = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy(built, stage / f"bwk_py{ext}")
    sys.path.insert(0, str(stage))
    import bwk_py

    return bwk_py


def close(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    bwk_py = build_and_import()

    # A 3-commodity round-robin shop: each arm sells one unit of its own
    # commodity, every commodity holds 5 units, so the LP moves 15 units.
    env = bwk_py.Env.from_spec(json.dumps({"env": "roundrobin", "d": 3, "B": 5, "T": 40}))
    assert env.arms == 4, "three sellers plus the null arm"
    assert env.resources == 4, "three commodities plus time"
    assert env.horizon == 40
    close(env.lpopt(), 15.0)

    sol = json.loads(env.lp_solution())
    close(sol["value"], 15.0)
    assert len(sol["expected_pulls"]) == env.arms
    assert len(sol["dual_prices"]) == env.resources

    # The optimal per-round mixture plays each seller until its budget is
    # gone: 5 pulls each out of 40 rounds.
    mix = env.optimal_mixture()
    for arm in range(3):
        close(mix[arm], 5.0 / 40.0)

    # Scaling multiplies budgets and horizon, and the LP value with them.
    close(env.scale(4).lpopt(), 60.0)

    # Full-fidelity serialization round-trips.
    env2 = bwk_py.Env.from_json(env.to_json())
    close(env2.lpopt(), env.lpopt())
    assert env2.budgets == env.budgets

    # Episodes are a pure function of the seed.
    a = env.run_episode("pdbwk", seed=7)
    b = env.run_episode("pdbwk", seed=7)
    assert a == b, "same seed, same episode"
    reward, stop = a
    assert 0.0 <= reward <= 15.0 and 0 < stop <= 40

    # The explicit-mixture policy accepts the LP's own solution.
    fixed = "fixed:" + json.dumps(mix)
    reward, _ = env.run_episode(fixed, seed=3)
    assert reward > 0.0

    # Unknown policies raise instead of crashing.
    try:
        env.run_episode("nope", seed=0)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown policy should raise ValueError")

    # The batch runner matches the CLI's formats and is deterministic.
    config = {
        "env": {"env": "lb", "m": 2, "B": 6, "p": 0.5, "eps": 0.1, "T": 60},
        "policies": ["pdbwk", "uniform_random"],
        "trials": 5,
        "base_seed": 3,
        "scaling": [1, 2],
    }
    summary1, csv1 = bwk_py.run_experiment_json(json.dumps(config))
    summary2, csv2 = bwk_py.run_experiment_json(json.dumps(config))
    assert csv1 == csv2 and summary1 == summary2
    header, *rows = csv1.strip().splitlines()
    assert header == "policy,env,alpha,trial,seed,reward,stop_time,lpopt,regret"
    assert len(rows) == 2 * 2 * 5
    groups = json.loads(summary1)["groups"]
    assert {g["policy"] for g in groups} == {"pdbwk", "uniform_random"}

    # Mesh grids and the confidence radius behave as documented.
    assert bwk_py.mesh_points("additive", 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
    hyp = bwk_py.mesh_points("hyperbolic", 0.5, floor=0.25)
    assert hyp[0] >= 0.25 - 1e-12 and hyp[-1] == 1.0
    r_few = bwk_py.confidence_radius(0.5, 10, 2.0)
    r_many = bwk_py.confidence_radius(0.5, 1000, 2.0)
    assert r_few > r_many > 0.0
    assert bwk_py.default_c_rad(4, 40, 4) > 0.0

    print("smoke test passed")


if __name__ == "__main__":
    main()
