"""Experiment orchestration: dispatch, seed handling, CSV and figure output.

Workers share nothing; parallel runs are gathered in submission order, so the
emitted CSV bytes do not depend on the parallelism degree.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, bounds, core, csvio, posg, pursuit, qlearn
from .errors import ConfigError, VerificationFailure

ARTIFACT = f"mailp {__version__}"


def build_learning_fn(spec: dict) -> core.LearningFunction:
    kind = spec.get("kind")
    if kind == "identity":
        return core.LearningFunction.identity()
    if kind == "scaled":
        if "beta" not in spec:
            raise ConfigError("scaled learning function needs 'beta'")
        return core.LearningFunction.scaled(spec["beta"])
    if kind == "saturating":
        if "c" not in spec:
            raise ConfigError("saturating learning function needs 'c'")
        return core.LearningFunction.saturating(spec["c"])
    raise ConfigError(f"unknown learning function kind {kind!r}")


def build_env_config(env: dict) -> pursuit.PursuitConfig:
    return pursuit.PursuitConfig(**env)


def apply_seed_override(kind: str, cfg: dict, seeds: list[int] | None) -> dict:
    if seeds is None:
        return cfg
    cfg = dict(cfg)
    if kind == "pursuit_train":
        cfg["seeds"] = list(seeds)
    elif kind in ("pursuit_random", "pursuit_eval", "posg_props"):
        if len(seeds) != 1:
            raise ConfigError(f"{kind} takes a single seed, got {len(seeds)}")
        cfg["seed"] = seeds[0]
    else:
        raise ConfigError(f"{kind} does not take a seed list")
    return cfg


def _metadata(cfg: dict, extra: dict | None = None) -> dict:
    meta = {
        "artifact": ARTIFACT,
        "kind": cfg["kind"],
        "config": json.dumps(cfg, sort_keys=True),
    }
    if extra:
        meta.update(extra)
    return meta


def run(kind: str, cfg: dict, out_dir, jobs: int = 1, plot: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runners = {
        "bounds_sweep": _run_bounds_sweep,
        "mailp_sim": _run_mailp_sim,
        "mailp_verify": _run_mailp_verify,
        "posg_props": _run_posg_props,
        "pursuit_random": _run_pursuit_random,
        "pursuit_train": _run_pursuit_train,
        "pursuit_eval": _run_pursuit_eval,
    }
    if kind not in runners:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    return runners[kind](cfg, out, jobs, plot)


# ---------------------------------------------------------------------------
# bounds-sweep
# ---------------------------------------------------------------------------

def _run_bounds_sweep(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    points = bounds.sweep_k(cfg["n"], cfg["c_env"], cfg["i0"], cfg["eps"], cfg["k_grid"])
    rows = [(p.k, p.t_star, p.status) for p in points]
    path = csvio.emit_csv(out / "bounds_sweep.csv", ["k", "t_star", "status"], rows, _metadata(cfg))
    written = [path]
    if plot:
        from . import plots

        written.append(plots.plot_bounds_sweep(points, out / "bounds_sweep.png"))
    return written


# ---------------------------------------------------------------------------
# mailp-sim
# ---------------------------------------------------------------------------

def _build_sim(cfg: dict) -> tuple[core.MailpSpec, core.InformationState]:
    lam = build_learning_fn(cfg["learning_fn"])
    setting = cfg["setting"]
    if setting == "homogeneous":
        for key in ("n", "c_env", "k_star", "i0_star"):
            if key not in cfg:
                raise ConfigError(f"homogeneous setting needs '{key}'")
        return core.homogeneous_spec(
            cfg["n"], cfg["c_env"], cfg["k_star"], lam, cfg["i0_star"], cfg["eps"], cfg["k_env"]
        )
    if setting == "single_agent":
        for key in ("k_env", "i0"):
            if key not in cfg:
                raise ConfigError(f"single_agent setting needs '{key}'")
        return core.single_agent_spec(cfg["k_env"], lam, cfg["i0"])
    raise ConfigError(f"unknown setting {setting!r}")


def _run_mailp_sim(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    spec, state = _build_sim(cfg)
    report = core.run_until(state, spec, cfg["eps"], cfg["max_t"])
    rows = [
        (t, agent, value)
        for t, totals in report.trajectory
        for agent, value in enumerate(totals)
    ]
    meta = _metadata(
        cfg,
        {
            "converged": "true" if report.converged else "false",
            "steps": "none" if report.steps is None else str(report.steps),
        },
    )
    path = csvio.emit_csv(out / "mailp_sim.csv", ["t", "agent", "total_information"], rows, meta)
    written = [path]
    if plot:
        from . import plots

        written.append(plots.plot_trajectory(report, out / "mailp_sim.png"))
    return written


# ---------------------------------------------------------------------------
# mailp-verify
# ---------------------------------------------------------------------------

def _run_mailp_verify(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    lams = [(build_learning_fn(d), d) for d in cfg["lambdas"]]
    c_env, i0, eps = cfg["c_env"], cfg["i0_star"], cfg["eps"]
    rows = []
    failures = 0
    for n in cfg["n_list"]:
        c_star = (1.0 - c_env) / (n - 1)
        for k in cfg["k_grid"]:
            if k == 1.0:
                t_star = bounds.k1_limit_bound(n, c_star, i0, eps)
            else:
                t_star = bounds.multi_agent_bound(bounds.BoundInputs(n, c_env, k, i0, eps))
            ceil_t = math.ceil(t_star)
            for lam, lam_spec in lams:
                spec, state = core.homogeneous_spec(n, c_env, k, lam, i0, eps, cfg["k_env"])
                report = core.run_until(state, spec, eps, cfg["max_t"])
                simulated = report.steps if report.converged else -1
                ok = report.converged and simulated >= ceil_t
                failures += 0 if ok else 1
                rows.append((n, k, lam.describe(), t_star, ceil_t, simulated, ok))
    path = csvio.emit_csv(
        out / "mailp_verify.csv",
        ["n", "k", "learning_fn", "t_star", "t_star_ceil", "simulated_steps", "ok"],
        rows,
        _metadata(cfg, {"failures": str(failures)}),
    )
    if failures:
        raise VerificationFailure(f"{failures} grid point(s) violate the convergence bound")
    return [path]


# ---------------------------------------------------------------------------
# posg-props
# ---------------------------------------------------------------------------

def _run_posg_props(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    results = posg.run_property_suite(
        seed=cfg["seed"],
        instances=cfg["instances"],
        max_agents=cfg["max_agents"],
        max_states=cfg["max_states"],
        max_actions=cfg["max_actions"],
        max_obs=cfg["max_obs"],
    )
    rows = [(r.name, r.trials, r.failures, r.failures == 0) for r in results]
    failures = sum(r.failures for r in results)
    path = csvio.emit_csv(
        out / "posg_props.csv",
        ["property", "trials", "failures", "ok"],
        rows,
        _metadata(cfg, {"failures": str(failures)}),
    )
    if failures:
        raise VerificationFailure(f"{failures} property check(s) failed")
    return [path]


# ---------------------------------------------------------------------------
# pursuit-random
# ---------------------------------------------------------------------------

def _run_pursuit_random(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    env = build_env_config(cfg["env"])
    results = pursuit.random_episodes(env, cfg["episodes"], cfg["seed"])
    totals = [r.total_reward for r in results]
    mean = sum(totals) / len(totals)
    var = sum((t - mean) ** 2 for t in totals) / (len(totals) - 1) if len(totals) > 1 else 0.0
    rows = [(r.episode, r.total_reward, r.steps, r.captures) for r in results]
    meta = _metadata(
        cfg,
        {
            "mean_total_reward": format(mean, ".17g"),
            "stderr_total_reward": format(math.sqrt(var / len(totals)), ".17g"),
        },
    )
    path = csvio.emit_csv(
        out / "pursuit_random.csv", ["episode", "total_reward", "steps", "captures"], rows, meta
    )
    written = [path]
    if plot:
        from . import plots

        written.append(plots.plot_reward_histogram(totals, out / "pursuit_random.png"))
    return written


# ---------------------------------------------------------------------------
# pursuit-train
# ---------------------------------------------------------------------------

def _train_run(args: tuple) -> list[tuple]:
    env_dict, train_dict, mode, seed, policy_path = args
    env = build_env_config(env_dict)
    cfg = qlearn.TrainConfig(
        mode=mode,
        episodes=train_dict["episodes"],
        learning_rate=train_dict["learning_rate"],
        discount=train_dict["discount"],
        eps_start=train_dict["eps_start"],
        eps_end=train_dict["eps_end"],
        eps_decay_episodes=train_dict.get("eps_decay_episodes"),
        eval_every=train_dict["eval_every"],
        eval_episodes=train_dict["eval_episodes"],
        indication=train_dict["indication"],
        seed=seed,
    )
    result = qlearn.train(env, cfg)
    if policy_path is not None:
        Path(policy_path).write_text(qlearn.save_policy_text(result.policy), encoding="utf-8")
    return [(mode, seed, p.episode, p.mean_reward, p.stderr) for p in result.curve]


def _run_pursuit_train(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    env_dict = cfg["env"]
    train_dict = cfg["train"]
    build_env_config(env_dict)  # fail on bad env before any work
    policy_dir = cfg.get("policy_dir")
    if policy_dir is not None:
        Path(policy_dir).mkdir(parents=True, exist_ok=True)
    tasks = []
    for mode in train_dict["modes"]:
        if mode not in ("shared", "independent"):
            raise ConfigError(f"unknown training mode {mode!r}")
        for seed in cfg["seeds"]:
            policy_path = (
                None
                if policy_dir is None
                else str(Path(policy_dir) / f"policy_{mode}_seed{seed}.json")
            )
            tasks.append((env_dict, train_dict, mode, seed, policy_path))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_train_run, tasks))
    else:
        chunks = [_train_run(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    path = csvio.emit_csv(
        out / "pursuit_train.csv",
        ["mode", "seed", "episode", "mean_reward", "stderr"],
        rows,
        _metadata(cfg),
    )
    written = [path]
    if plot:
        from . import plots

        written.append(plots.plot_learning_curves(rows, out / "pursuit_train.png"))
    return written


# ---------------------------------------------------------------------------
# pursuit-eval
# ---------------------------------------------------------------------------

def _run_pursuit_eval(cfg: dict, out: Path, jobs: int, plot: bool) -> list[Path]:
    env = build_env_config(cfg["env"])
    if cfg.get("policy_file"):
        policy = qlearn.load_policy_text(Path(cfg["policy_file"]).read_text(encoding="utf-8"))
    else:
        policy = qlearn.UniformRandomPolicy(pursuit.N_ACTIONS)
    totals = qlearn.evaluate_episodes(policy, env, cfg["episodes"], cfg["seed"])
    mean = sum(totals) / len(totals)
    var = sum((t - mean) ** 2 for t in totals) / (len(totals) - 1) if len(totals) > 1 else 0.0
    rows = list(enumerate(totals))
    meta = _metadata(
        cfg,
        {
            "mean_total_reward": format(mean, ".17g"),
            "stderr_total_reward": format(math.sqrt(var / len(totals)), ".17g"),
        },
    )
    path = csvio.emit_csv(out / "pursuit_eval.csv", ["episode", "total_reward"], rows, meta)
    written = [path]
    if cfg.get("dump"):
        rng = random.Random(f"{cfg['seed']}:dump")

        def act(state: pursuit.PursuitState) -> list[int]:
            return [
                policy.select(pursuit.compact_observation(state, env, i), i, rng)
                for i in range(env.n_pursuers)
            ]

        records = pursuit.trajectory_records(env, f"{cfg['seed']}:dump", act)
        pursuit.write_trajectory(cfg["dump"], records)
        written.append(Path(cfg["dump"]))
    if plot:
        from . import plots

        written.append(plots.plot_reward_histogram(totals, out / "pursuit_eval.png"))
    return written
