"""Seeded random-initialization sweeps.

A sweep runs one scenario n times from randomized initial conditions.
Per-run seeds are drawn once from a master generator, so the result set
is a pure function of (config, n, seed) and independent of worker count
and scheduling order.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .engine import integrate
from .metrics import compute_metrics
from .output import write_json
from .scenarios import DEFAULT_PERTURB, from_dict, sample_overrides

__all__ = ["run_sweep", "run_single_draw"]


def run_single_draw(config_dict, run_seed, dt=None, t_end=None):
    """Execute one randomized run; top-level so worker processes can pickle it."""
    config = from_dict(config_dict)
    perturb = config.perturb if config.perturb is not None else DEFAULT_PERTURB
    rng = np.random.default_rng(run_seed)
    overrides = sample_overrides(perturb, rng)
    result = integrate(config, dt=dt, t_end=t_end, init_overrides=overrides)
    metrics = compute_metrics(result)
    metrics["seed"] = int(run_seed)
    metrics["init_overrides"] = {
        k: (v.tolist() if isinstance(v, np.ndarray) else v)
        for k, v in overrides.items()
    }
    return metrics


def run_sweep(config, n, seed=0, out_dir=None, workers=None, dt=None,
              t_end=None):
    """Run `n` seeded draws of `config`; returns the summary dict."""
    if n < 1:
        raise ValueError("sweep needs n >= 1")
    master = np.random.default_rng(seed)
    run_seeds = [int(s) for s in master.integers(0, 2**63 - 1, size=n)]
    config_dict = config.to_dict()

    if workers is None:
        workers = min(n, os.cpu_count() or 1)
    args = [(config_dict, s, dt, t_end) for s in run_seeds]
    if workers <= 1:
        per_run = [run_single_draw(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_run = list(
                pool.map(run_single_draw, *zip(*args), chunksize=1)
            )

    converged = [bool(m["converged"]) for m in per_run]
    failures = [i for i, ok in enumerate(converged) if not ok]
    summary = {
        "scenario": config.name,
        "n": int(n),
        "master_seed": int(seed),
        "n_converged": int(sum(converged)),
        "n_failed": len(failures),
        "failed_runs": failures,
        "run_seeds": run_seeds,
        "converged": converged,
    }

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, metrics in enumerate(per_run):
            write_json(metrics, out / f"run_{i:03d}.json")
        write_json(summary, out / "summary.json")
    summary["runs"] = per_run
    return summary
