"""Deterministic CSV and JSON writers for simulation runs.

Byte-level determinism is part of the contract: the same configuration and
seed must reproduce the same files bit for bit, so every float is printed
with an explicit 17-significant-digit format and JSON keys are sorted.
"""

import json
import math
from pathlib import Path

import numpy as np

from .metrics import pe_min_eig_series

__all__ = ["CSV_COLUMNS", "series_table", "write_series_csv", "write_json"]

CSV_COLUMNS = [
    "t",
    "i_g_d",
    "i_g_q",
    "v_d",
    "v_q",
    "i_d",
    "i_q",
    "delta",
    "u1",
    "u2",
    "u3",
    "e_detector",
    "xhat_1",
    "xhat_2",
    "theta1",
    "theta2",
    "theta3",
    "normF",
    "Vg_hat",
    "omega_hat_hz",
    "pe_min_eig",
]


def series_table(result):
    """Assemble the exported table: recorded signals plus derived columns."""
    base = result.rec[:, :19]
    omega_hat_hz = result.column("theta1") / (2.0 * math.pi)
    pe = pe_min_eig_series(result)
    return np.column_stack([base, omega_hat_hz, pe])


def write_series_csv(result, path):
    table = series_table(result)
    lines = [",".join(CSV_COLUMNS)]
    for row in table:
        lines.append(",".join(f"{v:.17g}" for v in row))
    data = "\n".join(lines) + "\n"
    Path(path).write_text(data)
    return path


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_json(obj, path):
    data = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(data)
    return path
