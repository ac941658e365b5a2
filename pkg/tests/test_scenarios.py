"""Scenario configuration tests: presets, serialization, validation."""

import numpy as np
import pytest

from vscsync.scenarios import (
    DEFAULT_PERTURB,
    ScenarioConfig,
    from_dict,
    load_scenario,
    preset_names,
    sample_overrides,
    save_scenario,
)


def test_preset_names_cover_required_scenarios():
    names = preset_names()
    for required in ("nominal", "voltage_drop", "frequency_drop",
                     "scr_trip", "baseline_comparison"):
        assert required in names


def test_presets_validate():
    for name in preset_names():
        load_scenario(name).validate()


def test_unknown_scenario_is_rejected():
    with pytest.raises(ValueError):
        load_scenario("not_a_preset_or_file")


def test_json_roundtrip(tmp_path):
    cfg = load_scenario("voltage_drop")
    path = tmp_path / "scn.json"
    save_scenario(cfg, path)
    back = load_scenario(str(path))
    assert back.to_dict() == cfg.to_dict()


def test_from_dict_rejects_unknown_keys():
    d = load_scenario("nominal").to_dict()
    d["typo_field"] = 1
    with pytest.raises(ValueError):
        from_dict(d)


def test_validation_rules():
    with pytest.raises(ValueError):
        ScenarioConfig(name="x", dt=-1.0).validate()
    with pytest.raises(ValueError):
        ScenarioConfig(name="x", detector="fll").validate()
    with pytest.raises(ValueError):
        ScenarioConfig(
            name="x", power_schedule=[(0.5, 1e8)]).validate()  # must start at 0
    with pytest.raises(ValueError):
        ScenarioConfig(
            name="x", power_schedule=[(0.0, 1e8), (0.0, 2e8)]).validate()
    with pytest.raises(ValueError):
        ScenarioConfig(
            name="x",
            events=[{"param": "l_f", "time": 1.0, "scale": 2.0}],
        ).validate()
    with pytest.raises(ValueError):
        ScenarioConfig(
            name="x",
            events=[{"param": "v_g", "time": 1.0, "scale": 2.0, "value": 3.0}],
        ).validate()


def test_schedule_entries_past_t_end_are_tolerated():
    cfg = ScenarioConfig(
        name="x",
        power_schedule=[(0.0, 1e8), (5.0, 2e8)],
        t_end=1.0,
    )
    cfg.validate()


def test_sample_overrides_deterministic_and_in_range():
    a = sample_overrides(DEFAULT_PERTURB, np.random.default_rng(42))
    b = sample_overrides(DEFAULT_PERTURB, np.random.default_rng(42))
    assert set(a) == set(b)
    for k in a:
        assert np.all(np.asarray(a[k]) == np.asarray(b[k]))
    c = sample_overrides(DEFAULT_PERTURB, np.random.default_rng(43))
    assert any(
        np.any(np.asarray(a[k]) != np.asarray(c[k])) for k in a
    )
    assert -np.pi <= a["delta0"] < np.pi
    theta = np.asarray(a["theta0"])
    assert 2 * np.pi * 45.0 <= theta[0] <= 2 * np.pi * 55.0
