"""Least-squares parameter estimator with forgetting and a covariance cap.

Estimates theta = (omega, e(0)) from the filtered regression (Y, Omega)
produced by the observer:

    theta_hat_dot = alpha F Omega^T (Y - Omega theta_hat)
    F_dot         = beta F - alpha F Omega^T Omega F   while ||F||_F <= M
                    0                                  otherwise

Forgetting (beta > 0) keeps the gain alive through operating-point changes;
the Frobenius cap M bounds it when excitation is poor.  The freeze applies
to the covariance flow only; the parameter update always runs.

The continuous-time cap is a sliding mode on the sphere ||F||_F = M.  Under
discrete stepping the literal freeze lets F overshoot the sphere by one
step's growth, so after each step the caller projects F back to the sphere
(and re-symmetrizes, since symmetry is invariant in exact arithmetic but
drifts in floating point).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "EstimatorGains",
    "default_estimator_gains",
    "estimator_deriv",
    "covariance_post_step",
    "estimator_init",
]


@dataclass
class EstimatorGains:
    """Adaptation gain, forgetting factor, covariance cap and initial scale."""

    alpha: float = 1.0e3   # adaptation gain
    beta: float = 1.0e3    # forgetting factor [1/s]
    m_cap: float = 100.0   # Frobenius-norm cap on F
    f0: float = 1.0        # F(0) = I / f0

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.m_cap <= 0.0:
            raise ValueError("m_cap must be positive")
        if self.f0 <= 0.0:
            raise ValueError("f0 must be positive")


def default_estimator_gains():
    return EstimatorGains()


@njit(cache=True)
def estimator_deriv(theta, f_mat, yv, om, alpha, beta, m_cap):
    """Right-hand side (dtheta, dF) for one evaluation of the estimator.

    The covariance freeze is evaluated on the F passed in, so inside a
    multi-stage integrator each stage sees its own freeze decision.
    """
    err = np.empty(2)
    err[0] = yv[0] - (om[0, 0] * theta[0] + om[0, 1] * theta[1] + om[0, 2] * theta[2])
    err[1] = yv[1] - (om[1, 0] * theta[0] + om[1, 1] * theta[1] + om[1, 2] * theta[2])
    ote = np.empty(3)
    for i in range(3):
        ote[i] = om[0, i] * err[0] + om[1, i] * err[1]
    dtheta = np.empty(3)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            acc += f_mat[i, j] * ote[j]
        dtheta[i] = alpha * acc

    fro2 = 0.0
    for i in range(3):
        for j in range(3):
            fro2 += f_mat[i, j] * f_mat[i, j]
    df = np.zeros((3, 3))
    if fro2 <= m_cap * m_cap:
        # OtO = Omega^T Omega, then dF = beta F - alpha F OtO F
        oto = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                oto[i, j] = om[0, i] * om[0, j] + om[1, i] * om[1, j]
        fo = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                acc = 0.0
                for k in range(3):
                    acc += f_mat[i, k] * oto[k, j]
                fo[i, j] = acc
        for i in range(3):
            for j in range(3):
                acc = 0.0
                for k in range(3):
                    acc += fo[i, k] * f_mat[k, j]
                df[i, j] = beta * f_mat[i, j] - alpha * acc
    return dtheta, df


@njit(cache=True)
def covariance_post_step(f_mat, m_cap):
    """Symmetrize F and radially project onto the cap sphere if exceeded."""
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = 0.5 * (f_mat[i, j] + f_mat[j, i])
    fro2 = 0.0
    for i in range(3):
        for j in range(3):
            fro2 += out[i, j] * out[i, j]
    fro = np.sqrt(fro2)
    # scale with a tiny safety margin so the capped norm stays at or under
    # the bound for any floating-point summation order, and repeat in case
    # rounding still lands above
    while fro > m_cap:
        s = (m_cap / fro) * (1.0 - 2.0 ** -48)
        if s >= 1.0:
            s = 1.0 - 2.0 ** -48
        fro2 = 0.0
        for i in range(3):
            for j in range(3):
                out[i, j] *= s
                fro2 += out[i, j] * out[i, j]
        fro = np.sqrt(fro2)
    return out


def estimator_init(gains: EstimatorGains, theta0=None):
    """Initial (theta_hat, F).  theta0 defaults to zero."""
    theta = np.zeros(3) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if theta.shape != (3,):
        raise ValueError("theta0 must have shape (3,)")
    f_mat = np.eye(3) / gains.f0
    return theta, f_mat
