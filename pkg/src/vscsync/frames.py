"""Reference-frame transformations and balanced three-phase signals.

All dq quantities use the power-invariant convention: for balanced (zero-sum)
abc signals the transform preserves instantaneous power, ``v_dq @ i_dq ==
v_abc @ i_abc``, and a balanced set with dq magnitude ``A`` has per-phase peak
``sqrt(2/3) * A``.  The q row uses ``+sin`` so that a balanced sine set of
amplitude parameter ``A`` transformed at angle ``w*t - pi/2 + d`` lands on
``A * rot(d) @ e1``.
"""

import math

import numpy as np
from numba import njit

SQRT23 = math.sqrt(2.0 / 3.0)
TWO_THIRDS_PI = 2.0 * math.pi / 3.0

# rotation generator, rot(a) = I cos a + J sin a
J = np.array([[0.0, -1.0], [1.0, 0.0]])

__all__ = [
    "J",
    "SQRT23",
    "rotation",
    "wrap_to_pi",
    "balanced_source",
    "dq_transform",
    "inverse_dq",
]


@njit(cache=True)
def rotation(alpha):
    """Planar rotation matrix by angle ``alpha`` (radians).

    Returns the 2x2 orthonormal matrix ``[[cos a, -sin a], [sin a, cos a]]``.
    """
    c = math.cos(alpha)
    s = math.sin(alpha)
    out = np.empty((2, 2))
    out[0, 0] = c
    out[0, 1] = -s
    out[1, 0] = s
    out[1, 1] = c
    return out


@njit(cache=True)
def wrap_to_pi(angle):
    """Wrap an angle in radians to the half-open interval [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


@njit(cache=True)
def balanced_source(amplitude, omega, t):
    """Balanced three-phase source sample at time ``t``.

    Phase a is ``sqrt(2/3) * amplitude * sin(omega * t)``; phases b and c lag
    and lead by 2*pi/3.  ``amplitude`` equals the dq magnitude of the set under
    the power-invariant transform.
    """
    k = SQRT23 * amplitude
    wt = omega * t
    out = np.empty(3)
    out[0] = k * math.sin(wt)
    out[1] = k * math.sin(wt - TWO_THIRDS_PI)
    out[2] = k * math.sin(wt + TWO_THIRDS_PI)
    return out


@njit(cache=True)
def dq_transform(abc, alpha):
    """Power-invariant abc -> dq projection at transformation angle ``alpha``.

    Parameters
    ----------
    abc : ndarray, shape (3,)
        Instantaneous phase quantities.
    alpha : float
        Transformation angle in radians.

    Returns
    -------
    ndarray, shape (2,)
        (d, q) components.  For balanced inputs the map is invertible and
        power preserving.
    """
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    cb = math.cos(alpha - TWO_THIRDS_PI)
    sb = math.sin(alpha - TWO_THIRDS_PI)
    cc = math.cos(alpha + TWO_THIRDS_PI)
    sc = math.sin(alpha + TWO_THIRDS_PI)
    out = np.empty(2)
    out[0] = SQRT23 * (ca * abc[0] + cb * abc[1] + cc * abc[2])
    out[1] = SQRT23 * (sa * abc[0] + sb * abc[1] + sc * abc[2])
    return out


@njit(cache=True)
def inverse_dq(dq, alpha):
    """Inverse of :func:`dq_transform` onto the balanced (zero-sum) subspace."""
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    cb = math.cos(alpha - TWO_THIRDS_PI)
    sb = math.sin(alpha - TWO_THIRDS_PI)
    cc = math.cos(alpha + TWO_THIRDS_PI)
    sc = math.sin(alpha + TWO_THIRDS_PI)
    out = np.empty(3)
    out[0] = SQRT23 * (ca * dq[0] + sa * dq[1])
    out[1] = SQRT23 * (cb * dq[0] + sb * dq[1])
    out[2] = SQRT23 * (cc * dq[0] + sc * dq[1])
    return out
