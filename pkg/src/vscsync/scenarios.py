"""Scenario configuration: declarative run descriptions and named presets.

A scenario bundles the electrical parameters, controller and estimator
gains, the power-reference schedule, grid-side disturbance events, the
integrator settings and the initialization policy.  Scenarios are plain
data; the engine interprets them.

Scenario files are JSON with the same field names as ScenarioConfig;
nested sections (params, gains, estimator, observer) are objects whose
entries override the corresponding dataclass defaults, so a file only
states what differs from the stock testbed.  Events reference plant-truth
parameters by name (r_g, l_g, v_g, omega) and carry either an absolute
"value" or a multiplicative "scale".
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .control import ControlGains
from .estimator import EstimatorGains
from .observer import ObserverParams
from .plant import SystemParams

__all__ = [
    "ScenarioConfig",
    "load_scenario",
    "save_scenario",
    "preset",
    "preset_names",
    "sample_overrides",
    "DEFAULT_PERTURB",
]

_EVENT_PARAMS = ("r_g", "l_g", "v_g", "omega")
_DETECTORS = ("atan", "srf")
_INIT_MODES = ("equilibrium", "equilibrium_truth", "flat")
_INPUT_MODES = ("closed_loop", "hold", "probe")

# Default dispersion for randomized initializations: frame angle over the
# full circle, frequency guess within +-10%, raw-scale guesses for the
# rotating parameter, the observer extension and both control integrators.
DEFAULT_PERTURB = {
    "delta0": math.pi,
    "freq_hz": [45.0, 55.0],
    "e_hat": 1.0e6,
    "z0": 2000.0,
    "pll_xc": [-0.6, 0.0],
    "ctrl_xc": 0.05,
}


@dataclass
class ScenarioConfig:
    """Complete declarative description of one simulation run."""

    name: str = "custom"
    params: SystemParams = field(default_factory=SystemParams)
    gains: ControlGains = field(default_factory=ControlGains)
    estimator: EstimatorGains = field(default_factory=EstimatorGains)
    observer: ObserverParams = None
    detector: str = "atan"
    baseline: bool = False
    power_schedule: list = field(default_factory=list)
    events: list = field(default_factory=list)
    t_end: float = 2.0
    dt: float = 2.0e-5
    init: str = "equilibrium"
    init_overrides: dict = field(default_factory=dict)
    input_mode: str = "closed_loop"
    hold_u1: float = None
    hold_u23: tuple = None
    probe_amp: float = 0.0
    probe_freq_hz: float = 0.0
    x_min: float = None
    record_stride: int = None
    seed: int = None
    perturb: dict = None
    allow_divergence: bool = False

    def validate(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end <= self.dt:
            raise ValueError("t_end must exceed dt")
        if self.detector not in _DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.init not in _INIT_MODES:
            raise ValueError(f"unknown init mode {self.init!r}")
        if self.input_mode not in _INPUT_MODES:
            raise ValueError(f"unknown input mode {self.input_mode!r}")
        last_t = -math.inf
        for entry in self.power_schedule:
            if len(entry) != 2:
                raise ValueError("power_schedule entries must be (time, power)")
            tk = float(entry[0])
            # entries past t_end are legal and ignored so presets survive
            # a shortened --t-end override
            if tk < 0.0:
                raise ValueError("power_schedule times must be nonnegative")
            if tk <= last_t:
                raise ValueError("power_schedule times must be increasing")
            last_t = tk
        if self.power_schedule and float(self.power_schedule[0][0]) != 0.0:
            raise ValueError("power_schedule must start at t = 0")
        for ev in self.events:
            if "param" not in ev or ev["param"] not in _EVENT_PARAMS:
                raise ValueError(f"event references unknown parameter: {ev}")
            if "time" not in ev:
                raise ValueError(f"event missing time: {ev}")
            t_ev = float(ev["time"])
            if t_ev < 0.0:
                raise ValueError("event times must be nonnegative")
            if ("value" in ev) == ("scale" in ev):
                raise ValueError("event needs exactly one of value or scale")
        return self

    def to_dict(self):
        d = {
            "name": self.name,
            "params": asdict(self.params),
            "gains": asdict(self.gains),
            "estimator": asdict(self.estimator),
            "observer": asdict(self.observer) if self.observer is not None else None,
            "detector": self.detector,
            "baseline": self.baseline,
            "power_schedule": [[float(t), float(p)] for t, p in self.power_schedule],
            "events": [dict(ev) for ev in self.events],
            "t_end": self.t_end,
            "dt": self.dt,
            "init": self.init,
            "init_overrides": _jsonable(self.init_overrides),
            "input_mode": self.input_mode,
            "hold_u1": self.hold_u1,
            "hold_u23": list(self.hold_u23) if self.hold_u23 is not None else None,
            "probe_amp": self.probe_amp,
            "probe_freq_hz": self.probe_freq_hz,
            "x_min": self.x_min,
            "record_stride": self.record_stride,
            "seed": self.seed,
            "perturb": self.perturb,
            "allow_divergence": self.allow_divergence,
        }
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _section(cls, data, what):
    if data is None:
        return None
    fields = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - fields
    if unknown:
        raise ValueError(f"unknown {what} fields: {sorted(unknown)}")
    return cls(**data)


def from_dict(data):
    """Build a ScenarioConfig from a decoded JSON object (strict keys)."""
    data = dict(data)
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
    kwargs = {}
    if "params" in data:
        kwargs["params"] = _section(SystemParams, {**data.pop("params")}, "params")
    if "gains" in data:
        kwargs["gains"] = _section(ControlGains, {**data.pop("gains")}, "gains")
    if "estimator" in data:
        kwargs["estimator"] = _section(
            EstimatorGains, {**data.pop("estimator")}, "estimator"
        )
    if "observer" in data:
        obs = data.pop("observer")
        kwargs["observer"] = _section(ObserverParams, obs, "observer")
    if "power_schedule" in data:
        kwargs["power_schedule"] = [
            (float(t), float(p)) for t, p in data.pop("power_schedule")
        ]
    if "hold_u23" in data:
        h = data.pop("hold_u23")
        kwargs["hold_u23"] = tuple(h) if h is not None else None
    kwargs.update(data)
    return ScenarioConfig(**kwargs).validate()


def load_scenario(source):
    """Load a scenario from a preset name or a JSON file path."""
    if isinstance(source, ScenarioConfig):
        return source
    name = str(source)
    if name in _PRESETS:
        return preset(name)
    path = Path(name)
    if path.is_file():
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"invalid scenario JSON in {path}: {exc}") from exc
        return from_dict(data)
    raise ValueError(
        f"unknown scenario {name!r}: not a preset "
        f"({', '.join(preset_names())}) and not a file"
    )


def save_scenario(config: ScenarioConfig, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# presets ---------------------------------------------------------------------

def _nominal():
    return ScenarioConfig(
        name="nominal",
        power_schedule=[(0.0, 0.2e9), (0.5, 0.4e9), (1.0, 0.75e9), (1.5, 0.9e9)],
        t_end=2.0,
    )


def _voltage_drop():
    return ScenarioConfig(
        name="voltage_drop",
        power_schedule=[(0.0, 0.75e9)],
        events=[{"time": 1.0, "param": "v_g", "scale": 0.7}],
        t_end=2.0,
    )


def _frequency_drop():
    return ScenarioConfig(
        name="frequency_drop",
        power_schedule=[(0.0, 0.75e9)],
        events=[{"time": 1.0, "param": "omega", "value": 2.0 * math.pi * 49.0}],
        t_end=2.0,
    )


def _scr_trip():
    return ScenarioConfig(
        name="scr_trip",
        power_schedule=[(0.0, 0.75e9)],
        events=[
            {"time": 1.0, "param": "l_g", "scale": 4.0 / 3.0},
            {"time": 1.0, "param": "r_g", "scale": 4.0 / 3.0},
        ],
        t_end=2.0,
    )


def _baseline_comparison():
    return ScenarioConfig(
        name="baseline_comparison",
        baseline=True,
        power_schedule=[(0.0, 0.4e9), (1.0, 0.9e9)],
        t_end=2.0,
        allow_divergence=True,
    )


def _adaptive_comparison():
    return ScenarioConfig(
        name="adaptive_comparison",
        power_schedule=[(0.0, 0.4e9), (1.0, 0.9e9)],
        t_end=2.0,
    )


def _order_check():
    return ScenarioConfig(
        name="order_check",
        power_schedule=[(0.0, 0.2e9)],
        t_end=0.1,
        init="equilibrium_truth",
        init_overrides={
            "delta0_offset": 0.1,
            "theta0_offset": [math.pi, 1.0e3, -1.0e3],
        },
        estimator=EstimatorGains(beta=0.0),
    )


def _hold_equilibrium():
    # closed loop started exactly at the solved equilibrium with an inert
    # estimator: the whole state must be a fixed point of the integrator
    return ScenarioConfig(
        name="hold_equilibrium",
        power_schedule=[(0.0, 0.2e9)],
        t_end=1.0,
        init="equilibrium_truth",
        init_overrides={"consistent_filters": True},
        estimator=EstimatorGains(alpha=0.0, beta=0.0),
    )


def _zero_grid():
    return ScenarioConfig(
        name="zero_grid",
        params=SystemParams(v_g=0.0),
        power_schedule=[],
        t_end=0.05,
        init="flat",
        input_mode="hold",
        hold_u23=(0.0, 0.0),
    )


_PRESETS = {
    "nominal": _nominal,
    "voltage_drop": _voltage_drop,
    "frequency_drop": _frequency_drop,
    "scr_trip": _scr_trip,
    "baseline_comparison": _baseline_comparison,
    "adaptive_comparison": _adaptive_comparison,
    "order_check": _order_check,
    "hold_equilibrium": _hold_equilibrium,
    "zero_grid": _zero_grid,
}


def preset(name):
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}") from None
    return factory().validate()


def preset_names():
    return sorted(_PRESETS)


# randomized initialization ----------------------------------------------------

def sample_overrides(perturb, rng):
    """Draw init overrides from a dispersion table with a fixed draw order.

    The draw order (delta0, frequency, rotating-parameter guess, z0,
    synchronizing integrator, current integrator) is part of the contract:
    a given seed always produces the same initialization.
    """
    if perturb is None:
        return {}
    out = {}
    if "delta0" in perturb:
        a = float(perturb["delta0"])
        out["delta0"] = float(rng.uniform(-a, a))
    theta = None
    if "freq_hz" in perturb:
        lo, hi = perturb["freq_hz"]
        theta = [2.0 * math.pi * float(rng.uniform(lo, hi)), 0.0, 0.0]
    if "e_hat" in perturb:
        a = float(perturb["e_hat"])
        if theta is None:
            theta = [0.0, 0.0, 0.0]
        theta[1] = float(rng.uniform(-a, a))
        theta[2] = float(rng.uniform(-a, a))
    if theta is not None:
        out["theta0"] = theta
    if "z0" in perturb:
        a = float(perturb["z0"])
        out["z0"] = [float(rng.uniform(-a, a)) for _ in range(4)]
    if "pll_xc" in perturb:
        lo, hi = perturb["pll_xc"]
        out["pll_xc"] = float(rng.uniform(lo, hi))
    if "ctrl_xc" in perturb:
        a = float(perturb["ctrl_xc"])
        out["ctrl_xc"] = [float(rng.uniform(-a, a)) for _ in range(2)]
    return out
