"""Steady-state power-flow targets and assignable equilibria.

All equilibria are expressed in the synchronous frame where the filter
capacitor voltage is real and positive, v_dq = (v_ref, 0).  With the 2x2
rotation generator J, the branch impedance matrices at frame speed omega are

    Z_g = l_g omega J - r_g I      (grid branch)
    Z   = l   omega J - r   I      (converter branch)
    Y_c = c   omega J              (capacitor)

and a steady state with power angle delta (grid voltage at angle delta in
the frame) satisfies

    Z_g i_g + v = v_g R(delta) e1,      i = i_g - Y_c v,
    u1 = omega,                         u23 = v - Z i.

Power convention: scenario power labels are three-phase powers computed as
if the dq components were amplitude-invariant (peak per-phase) quantities,
P_label = (3/2) v_dq . i_g_dq.  The transforms in this package are
power-invariant, so the dq inner product equals (2/3) of the label:

    P_dq = POWER_SCALE * P_label,  POWER_SCALE = 2/3,

with the dq capacitor-voltage target v_ref = sqrt(3/2) v_g.  Export to the
grid is positive.  This pairing reproduces the frozen anchor angles used by
the acceptance tests (0.4 GW -> 17.9 deg, 0.9 GW -> 44.6 deg).

The power-angle equation is sinusoidal in delta, so the solver is closed
form: the export power along the grid branch is

    P(delta) = a sin(delta) + b cos(delta) + v_ref^2 r_g / |Z_g|^2,
    a = v_ref v_g x_g / |Z_g|^2,   b = -v_ref v_g r_g / |Z_g|^2,

and of the two roots the one of smaller magnitude (the stable, low-angle
branch) is returned.
"""

from dataclasses import dataclass

import numpy as np

from .frames import J, wrap_to_pi
from .plant import SystemParams, default_params

__all__ = [
    "POWER_SCALE",
    "InfeasibleReferenceError",
    "ReferenceSolution",
    "build_impedances",
    "assignable_equilibrium",
    "max_power_label",
    "solve_references",
]

POWER_SCALE = 2.0 / 3.0

I2 = np.eye(2)


class InfeasibleReferenceError(ValueError):
    """Requested power exceeds what the grid branch can transfer."""


@dataclass
class ReferenceSolution:
    """Steady-state targets for one power label.

    y12 is the grid branch current, y34 the capacitor voltage (v_ref, 0),
    y56 the converter current (the reference handed to the current loop),
    u1/u23 the steady inputs, delta_bar the power angle in radians.
    """

    power_label: float
    power_dq: float
    v_ref: float
    delta_bar: float
    y12: np.ndarray
    y34: np.ndarray
    y56: np.ndarray
    u1: float
    u23: np.ndarray

    def to_dict(self):
        return {
            "power_label_w": self.power_label,
            "power_dq_w": self.power_dq,
            "v_ref_v": self.v_ref,
            "delta_bar_rad": self.delta_bar,
            "delta_bar_deg": float(np.degrees(self.delta_bar)),
            "i_g_dq_a": [float(v) for v in self.y12],
            "v_dq_v": [float(v) for v in self.y34],
            "i_dq_a": [float(v) for v in self.y56],
            "u1_rad_s": self.u1,
            "u_dq_v": [float(v) for v in self.u23],
        }


def build_impedances(params: SystemParams):
    """Impedance matrices (Z_g, Z, Y_c) at the nominal frame speed."""
    w = params.omega
    z_g = params.l_g * w * J - params.r_g * I2
    z = params.l * w * J - params.r * I2
    y_c = params.c * w * J
    return z_g, z, y_c


def assignable_equilibrium(params: SystemParams, delta_bar, v_dq=None):
    """Full steady state for a given power angle and capacitor voltage.

    v_dq defaults to (sqrt(3/2) v_g, 0).  Returns (y12, y34, y56, u1, u23).
    """
    z_g, z, y_c = build_impedances(params)
    if v_dq is None:
        y34 = np.array([np.sqrt(1.5) * params.v_g, 0.0])
    else:
        y34 = np.asarray(v_dq, dtype=float)
    xf = params.v_g * np.array([np.cos(delta_bar), np.sin(delta_bar)])
    y12 = np.linalg.solve(z_g, xf - y34)
    y56 = y12 - y_c @ y34
    u23 = y34 - z @ y56
    return y12, y34, y56, params.omega, u23


def _power_coefficients(params: SystemParams, v_ref):
    x_g = params.l_g * params.omega
    d = params.r_g**2 + x_g**2
    a = v_ref * params.v_g * x_g / d
    b = -v_ref * params.v_g * params.r_g / d
    c0 = v_ref**2 * params.r_g / d
    return a, b, c0


def max_power_label(params: SystemParams = None):
    """Largest feasible power label for the given parameters [W]."""
    if params is None:
        params = default_params()
    v_ref = np.sqrt(1.5) * params.v_g
    a, b, c0 = _power_coefficients(params, v_ref)
    return (c0 + np.hypot(a, b)) / POWER_SCALE


def solve_references(power_label, params: SystemParams = None, voltage=None):
    """Solve the steady-state targets for one power label [W].

    ``voltage`` overrides the grid amplitude v_g.  Raises
    InfeasibleReferenceError when the branch cannot transfer the request.
    """
    if params is None:
        params = default_params()
    if voltage is not None:
        params = params.copy(v_g=float(voltage))
    v_ref = np.sqrt(1.5) * params.v_g
    p_dq = POWER_SCALE * power_label

    # P(delta) = a sin + b cos + c0 = r sin(delta + phi) + c0
    a, b, c0 = _power_coefficients(params, v_ref)
    r = np.hypot(a, b)
    phi = np.arctan2(b, a)
    s = (p_dq - c0) / r
    if abs(s) > 1.0:
        raise InfeasibleReferenceError(
            f"power label {power_label:.6g} W is not transferable; "
            f"the maximum feasible label is {max_power_label(params):.6g} W"
        )
    base = np.arcsin(s)
    candidates = [wrap_to_pi(base - phi), wrap_to_pi(np.pi - base - phi)]
    delta_bar = min(candidates, key=abs)

    y12, y34, y56, u1, u23 = assignable_equilibrium(params, delta_bar)
    return ReferenceSolution(
        power_label=float(power_label),
        power_dq=float(y34 @ y12),
        v_ref=float(v_ref),
        delta_bar=float(delta_bar),
        y12=y12,
        y34=y34,
        y56=y56,
        u1=float(u1),
        u23=u23,
    )
