"""Empirical integration-order check.

Runs one smooth scenario at a ladder of step sizes against a much finer
reference run, then fits the slope of log error versus log step.  The
scenario must avoid non-smooth events (gain freezes, parameter jumps)
inside the window, otherwise the fitted slope underestimates the
integrator's order.
"""

import math

import numpy as np

from .engine import integrate
from .scenarios import load_scenario

__all__ = ["run_order_check", "DEFAULT_DTS", "REFERENCE_DT"]

# each step divides t_end = 0.1 s exactly so final times align
DEFAULT_DTS = (1e-4, 5e-5, 2.5e-5, 1.25e-5, 6.25e-6)
REFERENCE_DT = 1.25e-6


def _final_state(config, dt):
    n_steps = int(round(config.t_end / dt))
    if abs(n_steps * dt - config.t_end) > 1e-12 * max(1.0, config.t_end):
        raise ValueError(f"dt {dt} does not divide t_end {config.t_end}")
    result = integrate(config, dt=dt, record_stride=n_steps)
    if result.diverged:
        return None
    return result.x_final


def run_order_check(config=None, dts=None, ref_dt=None, threshold=3.8):
    """Measure the observed convergence order of the integrator.

    Returns a dict with the step sizes, self-convergence errors against
    the reference run, pairwise orders, the least-squares slope, and a
    pass flag against `threshold`.
    """
    if config is None:
        config = load_scenario("order_check")
    dts = list(DEFAULT_DTS if dts is None else dts)
    ref_dt = REFERENCE_DT if ref_dt is None else ref_dt
    if any(dt <= ref_dt for dt in dts):
        raise ValueError("reference dt must be finer than every test dt")

    x_ref = _final_state(config, ref_dt)
    if x_ref is None:
        raise RuntimeError("reference run diverged; order check is undefined")
    ref_norm = float(np.linalg.norm(x_ref))

    errors = []
    for dt in dts:
        x = _final_state(config, dt)
        if x is None:
            errors.append(math.inf)
        else:
            errors.append(float(np.linalg.norm(x - x_ref)) / ref_norm)

    pairwise = []
    for (d1, e1), (d2, e2) in zip(zip(dts, errors), zip(dts[1:], errors[1:])):
        if math.isfinite(e1) and math.isfinite(e2) and e1 > 0 and e2 > 0:
            pairwise.append(math.log(e1 / e2) / math.log(d1 / d2))
        else:
            pairwise.append(None)

    finite = [
        (d, e) for d, e in zip(dts, errors) if math.isfinite(e) and e > 0
    ]
    if len(finite) >= 2:
        logs_d = np.log([d for d, _ in finite])
        logs_e = np.log([e for _, e in finite])
        slope = float(np.polyfit(logs_d, logs_e, 1)[0])
    else:
        slope = None

    passed = (
        slope is not None
        and slope >= threshold
        and all(math.isfinite(e) for e in errors)
    )
    return {
        "scenario": config.name,
        "t_end_s": float(config.t_end),
        "ref_dt_s": float(ref_dt),
        "dts_s": [float(d) for d in dts],
        "errors_rel": errors,
        "pairwise_orders": pairwise,
        "observed_order": slope,
        "threshold": float(threshold),
        "passed": bool(passed),
    }
