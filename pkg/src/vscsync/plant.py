"""Average-value converter and grid models.

Two equivalent plants are provided: the dq model used by the closed-loop
simulator, written in a frame rotating at the converter's synchronization
speed ``u1``, and the stationary abc model used for cross-validation.  The
circuit is a VSC bridge behind an RL phase reactor (r, L), a shunt filter
capacitor C at the point of common coupling, and a Thevenin grid branch
(r_g, L_g) to a balanced source of dq magnitude V_g.

dq state layout (all 2-vectors stacked): y = (i_g_dq, v_dq, i_dq) with the
frame angle error delta carried separately.  delta is the synchronization
angle minus omega*t and is never wrapped.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .frames import SQRT23, balanced_source

__all__ = [
    "SystemParams",
    "default_params",
    "plant_deriv_dq",
    "plant_deriv_abc",
    "grid_source_dq",
    "modulation_indices",
]


@dataclass
class SystemParams:
    """Electrical parameters of the converter-grid testbed.

    Units are SI throughout: ohms, henries, farads, volts, rad/s, watts.
    ``v_dc`` only enters through the modulation-index reconstruction and the
    abc model; the dq control signal u_dq is the converter EMF in volts.
    """

    r_g: float = 10.24       # grid branch resistance [ohm]
    l_g: float = 0.33        # grid branch inductance [H]
    c: float = 5.29e-6       # PCC shunt capacitance [F]
    r: float = 1.02          # phase reactor resistance [ohm]
    l: float = 0.065         # phase reactor inductance [H]
    v_g: float = 261e3       # grid source dq magnitude [V]
    omega: float = 2.0 * math.pi * 50.0  # grid frequency [rad/s]
    v_dc: float = 640e3      # DC link voltage [V]
    rated_power: float = 1e9  # converter rating, reference-label convention [W]

    def __post_init__(self):
        for name in ("r_g", "l_g", "c", "r", "l", "v_dc"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.v_g < 0.0:
            raise ValueError("v_g must be nonnegative")

    def copy(self, **changes):
        return replace(self, **changes)


def default_params():
    """Testbed defaults: 1 GW converter on a 50 Hz weak grid (SCR about 1)."""
    return SystemParams()


@njit(cache=True)
def plant_deriv_dq(y, delta, u1, u_dq, r_g, l_g, c, r, l, v_g, omega):
    """Time derivative of the dq plant state.

    Parameters
    ----------
    y : ndarray, shape (6,)
        (i_g_d, i_g_q, v_d, v_q, i_d, i_q).
    delta : float
        Frame angle error (synchronization angle minus omega*t).
    u1 : float
        Frame rotation speed commanded by the synchronization loop [rad/s].
    u_dq : ndarray, shape (2,)
        Converter EMF in the rotating frame [V].

    Returns
    -------
    (dy, ddelta) : ndarray shape (6,), float
    """
    igd, igq, vd, vq, id_, iq = y[0], y[1], y[2], y[3], y[4], y[5]
    xd = (v_g / l_g) * math.cos(delta)
    xq = (v_g / l_g) * math.sin(delta)
    dy = np.empty(6)
    dy[0] = -(r_g / l_g) * igd + vd / l_g - u1 * igq - xd
    dy[1] = -(r_g / l_g) * igq + vq / l_g + u1 * igd - xq
    dy[2] = (id_ - igd) / c - u1 * vq
    dy[3] = (iq - igq) / c + u1 * vd
    dy[4] = (-vd - r * id_ + u_dq[0]) / l - u1 * iq
    dy[5] = (-vq - r * iq + u_dq[1]) / l + u1 * id_
    return dy, u1 - omega


@njit(cache=True)
def plant_deriv_abc(i_g, v, i, m, t, r_g, l_g, c, r, l, v_g, omega, v_dc):
    """Time derivative of the stationary-frame plant.

    ``m`` is the per-phase modulation vector; the converter EMF is
    ``v_dc * m``.  The grid source is the balanced set of dq magnitude
    ``v_g`` at phase ``omega * t``.
    """
    vg_abc = balanced_source(v_g, omega, t)
    di_g = np.empty(3)
    dv = np.empty(3)
    di = np.empty(3)
    for k in range(3):
        di_g[k] = (-r_g * i_g[k] + v[k] - vg_abc[k]) / l_g
        dv[k] = (i[k] - i_g[k]) / c
        di[k] = (-r * i[k] + v_dc * m[k] - v[k]) / l
    return di_g, dv, di


def grid_source_dq(v_g, delta):
    """Grid source seen in the rotating frame: ``v_g * (cos delta, sin delta)``."""
    return np.array([v_g * math.cos(delta), v_g * math.sin(delta)])


def modulation_indices(u_dq, v_dc, m_min=None, m_max=None):
    """Convert a dq converter EMF to modulation indices.

    Returns ``(m_dq, saturated)``.  The saturation flag checks the
    abc-reconstructed waveform: a dq vector of magnitude ``A`` maps to phase
    signals of peak ``sqrt(2/3) * A / v_dc``, so the flag is raised when that
    peak leaves ``[m_min, m_max]``.  With no bounds configured the flag is
    always False.
    """
    m_dq = np.asarray(u_dq, dtype=float) / v_dc
    saturated = False
    if m_min is not None or m_max is not None:
        peak = SQRT23 * float(np.hypot(m_dq[0], m_dq[1]))
        if m_max is not None and peak > m_max:
            saturated = True
        if m_min is not None and -peak < m_min:
            saturated = True
    return m_dq, saturated
