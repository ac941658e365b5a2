"""Plant model tests: parameters, stationarity, frame consistency."""

import numpy as np
import pytest

from vscsync.equilibrium import solve_references
from vscsync.frames import J, dq_transform, inverse_dq
from vscsync.plant import (
    SystemParams,
    default_params,
    grid_source_dq,
    modulation_indices,
    plant_deriv_abc,
    plant_deriv_dq,
)


def _unpack(p):
    return p.r_g, p.l_g, p.c, p.r, p.l, p.v_g, p.omega


def test_default_parameter_values():
    p = default_params()
    assert p.r_g == pytest.approx(10.24)
    assert p.l_g == pytest.approx(0.33)
    assert p.c == pytest.approx(5.29e-6)
    assert p.r == pytest.approx(1.02)
    assert p.l == pytest.approx(0.065)
    assert p.v_g == pytest.approx(261e3)
    assert p.omega == pytest.approx(2.0 * np.pi * 50.0)
    assert p.v_dc == pytest.approx(640e3)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(l_g=0.0)
    with pytest.raises(ValueError):
        SystemParams(c=-1e-6)
    # a dead grid is a legal operating condition
    SystemParams(v_g=0.0)


def test_copy_with_changes():
    p = default_params()
    q = p.copy(v_g=100.0)
    assert q.v_g == 100.0
    assert q.r_g == p.r_g
    assert p.v_g == 261e3


def test_equilibrium_is_stationary():
    """The solved references must zero the dq derivative for every power."""
    p = default_params()
    for label in (0.1e9, 0.2e9, 0.75e9, 1.2e9):
        refs = solve_references(label, p)
        y = np.concatenate([refs.y12, refs.y34, refs.y56])
        dy, ddelta = plant_deriv_dq(
            y, refs.delta_bar, refs.u1, refs.u23, *_unpack(p)
        )
        # the residual is cancellation noise against RHS terms of order
        # v_ref / L ~ 5e6, so bound it relative to that scale
        rhs_scale = refs.v_ref / min(p.l, p.l_g)
        assert np.max(np.abs(dy)) < 1e-12 * rhs_scale
        assert ddelta == pytest.approx(0.0, abs=1e-15)


def test_grid_source_direction():
    src = grid_source_dq(261e3, 0.3)
    assert src[0] == pytest.approx(261e3 * np.cos(0.3))
    assert src[1] == pytest.approx(261e3 * np.sin(0.3))


def test_frequency_mismatch_advances_delta():
    p = default_params()
    refs = solve_references(0.2e9, p)
    y = np.concatenate([refs.y12, refs.y34, refs.y56])
    _, ddelta = plant_deriv_dq(
        y, refs.delta_bar, refs.u1 + 1.0, refs.u23, *_unpack(p)
    )
    assert ddelta == pytest.approx(1.0)


def test_abc_derivative_matches_dq_at_a_point():
    """Both derivative fields describe the same physics: the dq derivative
    equals the projected stationary-frame derivative plus the frame-rotation
    term u1 * J y, with the frame at alpha = delta - pi/2 + omega t."""
    p = default_params()
    refs = solve_references(0.4e9, p)
    rng = np.random.default_rng(5)
    y = np.concatenate([refs.y12, refs.y34, refs.y56])
    y += rng.normal(scale=np.maximum(np.abs(y) * 0.05, 1.0))
    delta = refs.delta_bar + 0.07
    u1 = p.omega + 3.0
    u23 = refs.u23 + rng.normal(scale=1e3, size=2)
    t = 0.017
    alpha = delta - np.pi / 2.0 + p.omega * t

    i_g = inverse_dq(y[0:2].copy(), alpha)
    v = inverse_dq(y[2:4].copy(), alpha)
    i = inverse_dq(y[4:6].copy(), alpha)
    m, _ = modulation_indices(u23, p.v_dc)
    m_abc = inverse_dq(m.copy(), alpha)

    di_g, dv, di = plant_deriv_abc(i_g, v, i, m_abc, t, *_unpack(p), p.v_dc)
    dy, ddelta = plant_deriv_dq(y, delta, u1, u23, *_unpack(p))
    assert ddelta == pytest.approx(3.0)

    for sl, abc_rate in ((slice(0, 2), di_g), (slice(2, 4), dv),
                         (slice(4, 6), di)):
        expected = dq_transform(abc_rate, alpha) + u1 * (J @ y[sl])
        scale = max(1.0, float(np.max(np.abs(dy[sl]))))
        assert np.max(np.abs(dy[sl] - expected)) / scale < 1e-12


def test_modulation_indices_roundtrip_and_saturation():
    u = np.array([3.2e5, -8.5e3])
    m, sat = modulation_indices(u, 640e3)
    assert np.allclose(m * 640e3, u)
    assert sat is False
    _, sat = modulation_indices(u, 640e3, m_min=-0.2, m_max=0.2)
    assert sat is True
    _, sat = modulation_indices(u, 640e3, m_min=-1.0, m_max=1.0)
    assert sat is False
