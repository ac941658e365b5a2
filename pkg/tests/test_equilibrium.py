"""Steady-state reference solver tests.

The frozen anchor values below were derived independently from the branch
impedance model and the power convention documented in the equilibrium
module: labels are three-phase powers, the dq power is 2/3 of the label,
and the capacitor-voltage reference magnitude is sqrt(3/2) * v_g.
"""

import numpy as np
import pytest

from vscsync.equilibrium import (
    POWER_SCALE,
    InfeasibleReferenceError,
    assignable_equilibrium,
    build_impedances,
    max_power_label,
    solve_references,
)
from vscsync.plant import default_params

ANCHORS_DEG = {
    0.2e9: 8.2834,
    0.4e9: 17.9152,
    0.75e9: 35.9024,
    0.9e9: 44.6035,
}

ANCHORS_IREF = {
    0.2e9: (417.1, 19.6),
    0.4e9: (834.2, 74.2),
    0.75e9: (1564.2, 358.4),
    0.9e9: (1877.0, 574.3),
}


def test_power_scale_convention():
    assert POWER_SCALE == pytest.approx(2.0 / 3.0)
    refs = solve_references(0.3e9)
    assert refs.v_ref == pytest.approx(np.sqrt(1.5) * 261e3, rel=1e-12)
    assert refs.power_dq == pytest.approx(POWER_SCALE * 0.3e9, rel=1e-12)


def test_angle_anchors():
    for label, deg in ANCHORS_DEG.items():
        refs = solve_references(label)
        assert np.degrees(refs.delta_bar) == pytest.approx(deg, abs=5e-4)


def test_current_anchors():
    for label, (i_d, i_q) in ANCHORS_IREF.items():
        refs = solve_references(label)
        assert refs.y56[0] == pytest.approx(i_d, abs=0.05)
        assert refs.y56[1] == pytest.approx(i_q, abs=0.05)


def test_delivered_power_matches_label():
    """v . i_g at the solution equals the scaled label exactly."""
    for label in (0.05e9, 0.33e9, 1.0e9):
        refs = solve_references(label)
        assert refs.y34 @ refs.y12 == pytest.approx(
            POWER_SCALE * label, rel=1e-12)


def test_zero_power_angle():
    refs = solve_references(0.0)
    # a small negative angle remains because the branch still carries the
    # capacitor's reactive current through the resistive grid impedance
    assert -2.0 < np.degrees(refs.delta_bar) < 0.0


def test_solution_satisfies_branch_equations():
    p = default_params()
    z_g, z, y_c = build_impedances(p)
    refs = solve_references(0.6e9, p)
    v_src = p.v_g * np.array(
        [np.cos(refs.delta_bar), np.sin(refs.delta_bar)])
    assert np.allclose(z_g @ refs.y12 + refs.y34, v_src, rtol=1e-12)
    assert np.allclose(refs.y56, refs.y12 - y_c @ refs.y34, rtol=1e-12)
    assert np.allclose(refs.u23, refs.y34 - z @ refs.y56, rtol=1e-12)


def test_assignable_equilibrium_defaults_to_reference_voltage():
    p = default_params()
    y12, y34, y56, u1, u23 = assignable_equilibrium(p, 0.25)
    assert np.allclose(y34, [np.sqrt(1.5) * p.v_g, 0.0])
    assert u1 == pytest.approx(p.omega)


def test_infeasible_power_raises():
    with pytest.raises(InfeasibleReferenceError):
        solve_references(2.0e9)
    assert max_power_label(default_params()) == pytest.approx(
        1.3459e9, rel=1e-3)


def test_voltage_override_shrinks_feasible_range():
    weak = max_power_label(default_params().copy(v_g=0.7 * 261e3))
    assert weak < max_power_label(default_params())
    refs = solve_references(0.2e9, voltage=0.7 * 261e3)
    assert refs.v_ref == pytest.approx(np.sqrt(1.5) * 0.7 * 261e3, rel=1e-12)


def test_to_dict_keys():
    d = solve_references(0.4e9).to_dict()
    for key in ("power_label_w", "power_dq_w", "v_ref_v", "delta_bar_rad",
                "delta_bar_deg", "i_g_dq_a", "v_dq_v", "i_dq_a",
                "u1_rad_s", "u_dq_v"):
        assert key in d
    assert d["delta_bar_deg"] == pytest.approx(17.9152, abs=5e-4)
