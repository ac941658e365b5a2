"""Adaptive synchronization and control of a grid-connected voltage source converter.

The package simulates a three-phase VSC behind an RL filter and shunt capacitor,
connected to a weak Thevenin grid, in a rotating dq frame driven by the converter's
own synchronization angle.  The grid voltage (amplitude, phase and frequency) is
treated as unmeasurable and is reconstructed online by a generalized
parameter-estimation-based observer feeding a least-squares estimator with
forgetting; a phase-locked loop and a PI current controller close the loop on the
reconstructed signal.
"""

from .plant import SystemParams, default_params
from .control import ControlGains, default_gains
from .estimator import EstimatorGains, default_estimator_gains
from .equilibrium import (
    InfeasibleReferenceError,
    ReferenceSolution,
    assignable_equilibrium,
    build_impedances,
    solve_references,
)
from .scenarios import ScenarioConfig, load_scenario, preset_names, save_scenario
from .engine import SimResult, integrate, run_scenario
from .metrics import compute_metrics
from .ordercheck import run_order_check
from .sweep import run_sweep

__version__ = "0.1.0"

__all__ = [
    "SystemParams",
    "default_params",
    "ControlGains",
    "default_gains",
    "EstimatorGains",
    "default_estimator_gains",
    "InfeasibleReferenceError",
    "ReferenceSolution",
    "assignable_equilibrium",
    "build_impedances",
    "solve_references",
    "ScenarioConfig",
    "load_scenario",
    "preset_names",
    "save_scenario",
    "SimResult",
    "integrate",
    "run_scenario",
    "compute_metrics",
    "run_order_check",
    "run_sweep",
]
