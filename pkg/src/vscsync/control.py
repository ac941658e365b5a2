"""Synchronizing loop and inner current controller.

The synchronizing loop is a PI acting on a phase-detector signal built from
a dq voltage v (the reconstructed grid voltage in the adaptive scheme, the
measured capacitor voltage in the conventional baseline):

    e    = detector(v, phi_ref)
    xc'  = e
    u1   = -kp e - ki xc

so the loop slows the frame down when the detected phase leads the target.
Two detectors are provided: the wrapped four-quadrant angle
atan2(v_q, v_d) - phi_ref, and the trigonometric projection
(cos(phi_ref) v_q - sin(phi_ref) v_d) / |v|, i.e. the sine of the phase
error, which avoids the angle function.  Both produce an error of angle
scale so a single PI gain pair serves either detector.

Both detectors are undefined at v = 0, so below a magnitude floor the
error is forced to zero; the integrator then holds and u1 coasts on its
last integrated value.

The current controller is a per-axis PI with exact decoupling.  The applied
voltage cancels the measured capacitor voltage and the frame-rotation
coupling, so the tracking error obeys the LTI dynamics

    L ytilde'' + (r + kp) ytilde' + ki ytilde = -r iref'

independently of the synchronizing loop.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .frames import wrap_to_pi

__all__ = [
    "ControlGains",
    "default_gains",
    "DET_ATAN",
    "DET_SRF",
    "detector_error",
    "pll_u1",
    "current_control",
    "current_loop_poles",
]

# detector selector values (shared with the engine's packed parameter array)
DET_ATAN = 0
DET_SRF = 1


@dataclass
class ControlGains:
    """Gains of the synchronizing PI and the inner current PI."""

    kp_pll: float = 200.0
    ki_pll: float = 1.0e3
    kp_cur: float = 250.0
    ki_cur: float = 5.0e4

    def __post_init__(self):
        for name in ("kp_pll", "ki_pll", "kp_cur", "ki_cur"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


def default_gains():
    return ControlGains()


@njit(cache=True)
def detector_error(v_d, v_q, phi_ref, use_atan, x_min):
    """Phase-detector error for voltage (v_d, v_q) against target phi_ref."""
    mag2 = v_d * v_d + v_q * v_q
    if mag2 < x_min * x_min:
        return 0.0
    if use_atan:
        return wrap_to_pi(np.arctan2(v_q, v_d) - phi_ref)
    return (np.cos(phi_ref) * v_q - np.sin(phi_ref) * v_d) / np.sqrt(mag2)


@njit(cache=True)
def pll_u1(e, xc, kp, ki):
    """Frame speed command of the synchronizing PI."""
    return -kp * e - ki * xc


@njit(cache=True)
def current_control(y, u1, xc_d, xc_q, iref_d, iref_q, kp, ki, l_f):
    """Applied converter voltage (u2, u3) of the decoupling current PI."""
    et_d = y[4] - iref_d
    et_q = y[5] - iref_q
    u2 = -kp * et_d - ki * xc_d + y[2] + l_f * u1 * y[5]
    u3 = -kp * et_q - ki * xc_q + y[3] - l_f * u1 * y[4]
    return u2, u3


def current_loop_poles(gains: ControlGains, r, l_f):
    """Roots of L s^2 + (r + kp) s + ki, the exact tracking-error poles."""
    return np.roots([l_f, r + gains.kp_cur, gains.ki_cur])
