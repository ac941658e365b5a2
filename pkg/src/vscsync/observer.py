"""Grid-voltage observer with a filtered linear-regression readout.

The scaled grid voltage x := v_g_dq / L_g is not measurable.  It satisfies
x_dot = (u1 - omega) J x in the converter frame, and the measured branch
current obeys i_g_dot = q - x with q computable from measurements alone.
A dynamic extension (z, Phi) turns this into the algebraic identity

    x(t) = W(t) theta,      W = [-(z12 + z34 - J i_g) | Phi],
    theta = (omega, e(0)),  e := omega (z12 + z34 - J i_g) + x,

with Phi the principal rotation generated by u1.  Filtering once through
lam / (p + lam) produces the regression Y = Omega theta + eps with eps
decaying like exp(-lam t), realized without differentiating any signal.

The observer state is a flat length-18 vector:

    [0:2]   z12
    [2:4]   z34
    [4:8]   Phi, column major (phi11, phi21, phi12, phi22)
    [8:10]  filtered i_g_dq
    [10:12] filtered q
    [12:18] filtered W, column major

Only measured signals, the commanded u1 and the observer's own copies of the
grid branch constants (r_g, L_g) enter any computation here; plant-truth
quantities (delta, V_g, omega, x) never do.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "ObserverParams",
    "OBS_DIM",
    "q_signal",
    "build_w",
    "xhat_from",
    "regressor",
    "observer_deriv",
    "observer_init",
    "amplitude_estimate",
]

OBS_DIM = 18


@dataclass
class ObserverParams:
    """Observer-side copies of the grid branch constants and the filter pole.

    The copies are deliberately separate from the plant parameters so that
    plant-side events (impedance trips) do not silently update the observer.
    """

    r_g: float = 10.24   # assumed branch resistance [ohm]
    l_g: float = 0.33    # assumed branch inductance [H]
    lam: float = 100.0   # regression filter pole [rad/s]

    def __post_init__(self):
        if self.l_g <= 0.0:
            raise ValueError("l_g must be positive")
        if self.lam <= 0.0:
            raise ValueError("lam must be positive")


@njit(cache=True)
def q_signal(y, u1, r_g_o, l_g_o):
    """Measured drift of the branch current: i_g_dot = q - x.

    q = -(r_g/L_g) i_g + v/L_g + u1 J i_g, all from measurements.
    """
    q = np.empty(2)
    q[0] = -(r_g_o / l_g_o) * y[0] + y[2] / l_g_o - u1 * y[1]
    q[1] = -(r_g_o / l_g_o) * y[1] + y[3] / l_g_o + u1 * y[0]
    return q


@njit(cache=True)
def build_w(obs, y):
    """Regressor matrix W = [-(z12 + z34 - J i_g) | Phi], shape (2, 3)."""
    w = np.empty((2, 3))
    w[0, 0] = -(obs[0] + obs[2] + y[1])
    w[1, 0] = -(obs[1] + obs[3] - y[0])
    w[0, 1] = obs[4]
    w[1, 1] = obs[5]
    w[0, 2] = obs[6]
    w[1, 2] = obs[7]
    return w


@njit(cache=True)
def xhat_from(obs, y, theta):
    """Reconstructed scaled grid voltage x_hat = W theta."""
    w = build_w(obs, y)
    out = np.empty(2)
    out[0] = w[0, 0] * theta[0] + w[0, 1] * theta[1] + w[0, 2] * theta[2]
    out[1] = w[1, 0] * theta[0] + w[1, 1] * theta[1] + w[1, 2] * theta[2]
    return out


@njit(cache=True)
def regressor(obs, y, lam):
    """Filtered regression pair (Y, Omega) with Y = Omega theta + eps.

    Y = lam (i_g - f[i_g]) - f[q] realizes p * lam/(p+lam) applied to i_g
    minus the filtered drift, without differentiation.  Omega = -f[W].
    """
    yv = np.empty(2)
    yv[0] = lam * (y[0] - obs[8]) - obs[10]
    yv[1] = lam * (y[1] - obs[9]) - obs[11]
    om = np.empty((2, 3))
    om[0, 0] = -obs[12]
    om[1, 0] = -obs[13]
    om[0, 1] = -obs[14]
    om[1, 1] = -obs[15]
    om[0, 2] = -obs[16]
    om[1, 2] = -obs[17]
    return yv, om


@njit(cache=True)
def observer_deriv(obs, y, u1, r_g_o, l_g_o, lam):
    """Right-hand side of the observer extension and its filters."""
    q = q_signal(y, u1, r_g_o, l_g_o)
    d = np.empty(OBS_DIM)
    # z12: u1 J z12 + J q
    d[0] = -u1 * obs[1] - q[1]
    d[1] = u1 * obs[0] + q[0]
    # z34: u1 J (z34 - J i_g)
    a0 = obs[2] + y[1]
    a1 = obs[3] - y[0]
    d[2] = -u1 * a1
    d[3] = u1 * a0
    # principal matrix columns: u1 J phi
    d[4] = -u1 * obs[5]
    d[5] = u1 * obs[4]
    d[6] = -u1 * obs[7]
    d[7] = u1 * obs[6]
    # first-order filters
    d[8] = lam * (y[0] - obs[8])
    d[9] = lam * (y[1] - obs[9])
    d[10] = lam * (q[0] - obs[10])
    d[11] = lam * (q[1] - obs[11])
    w = build_w(obs, y)
    d[12] = lam * (w[0, 0] - obs[12])
    d[13] = lam * (w[1, 0] - obs[13])
    d[14] = lam * (w[0, 1] - obs[14])
    d[15] = lam * (w[1, 1] - obs[15])
    d[16] = lam * (w[0, 2] - obs[16])
    d[17] = lam * (w[1, 2] - obs[17])
    return d


def observer_init(y0, u1_0, params: ObserverParams, z0=None, consistent_filters=True):
    """Initial observer state.

    z defaults to zero and Phi to the identity.  With ``consistent_filters``
    the three filters start on their instantaneous inputs, which zeroes the
    initial regression residual; otherwise they start at zero and the
    residual decays like exp(-lam t).
    """
    obs = np.zeros(OBS_DIM)
    if z0 is not None:
        obs[0:4] = np.asarray(z0, dtype=float)
    obs[4] = 1.0
    obs[7] = 1.0
    if consistent_filters:
        y0 = np.asarray(y0, dtype=float)
        obs[8:10] = y0[0:2]
        obs[10:12] = q_signal(y0, u1_0, params.r_g, params.l_g)
        w = build_w(obs, y0)
        obs[12] = w[0, 0]
        obs[13] = w[1, 0]
        obs[14] = w[0, 1]
        obs[15] = w[1, 1]
        obs[16] = w[0, 2]
        obs[17] = w[1, 2]
    return obs


def amplitude_estimate(l_g_o, xhat):
    """Grid voltage amplitude implied by x_hat: L_g * |x_hat|."""
    return l_g_o * float(np.hypot(xhat[0], xhat[1]))
