import json

import numpy as np
import pytest

from scenarios.builders import BUILDERS, build_scenario
from scenarios.catalog import SCENARIOS, scenario_ids
from scenarios.checks import DEFAULT_THRESHOLDS, fit_order, pairwise_orders, sweep_config, verify_config
from utils.config import parse_config, resolve_config, serialize_config, validate_config
from utils.errors import ConfigError


def test_catalog_lists_every_scenario():
    expected = {
        "boosted_sheet",
        "chiral_loop",
        "circle",
        "collapsing_loop",
        "flat_membrane",
        "flat_sheet",
        "helix",
        "nonchiral_loop",
        "plane_wave",
        "random_smooth",
        "rotating_loop",
        "static_loop",
        "straight_string",
    }
    assert set(scenario_ids()) == expected
    for entry in SCENARIOS.values():
        assert entry.get("builder", "movers") in BUILDERS


def test_minimal_config_is_filled_with_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"scenario": "chiral_loop"}))
    cfg = parse_config(path)
    assert cfg.n == 256
    assert cfg.mu0 == 1.0
    assert cfg.g44 == 1.0
    assert cfg.steps == 0
    assert cfg.resolved_dtau() == pytest.approx(0.25 * 2.0 * np.pi / 256)


def test_config_round_trip(tmp_path, scenario):
    cfg = scenario("chiral_loop", n=64, g44=2.0)
    path = tmp_path / "cfg.json"
    path.write_text(serialize_config(cfg))
    again = parse_config(path)
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


@pytest.mark.parametrize(
    "overrides,key",
    [
        ({"g44": -1.0}, "g44"),
        ({"n": 4}, "n"),
        ({"bogus": 1}, "bogus"),
        ({"cadence": 0}, "cadence"),
    ],
)
def test_invalid_configs_name_the_key(overrides, key):
    with pytest.raises(ConfigError, match=key):
        resolve_config({"scenario": "flat_sheet", **overrides})


def test_unknown_scenario_and_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        resolve_config({"scenario": "nope"})
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        parse_config(broken)


def test_mover_components_must_match_base_dim():
    with pytest.raises(ConfigError):
        validate_config(
            {
                "scenario": "x",
                "base_dim": 4,
                "movers": {"a": {"winding": [6.283185307179586, 0.0, 0.0]}, "b": {"winding": [6.283185307179586, 0.0, 0.0]}},
            }
        )


def test_builders_respect_dimension_requirements(scenario):
    with pytest.raises(ConfigError):
        build_scenario(scenario("helix", base_dim=3))


@pytest.mark.parametrize(
    "name,overrides",
    [
        ("flat_sheet", {}),
        ("boosted_sheet", {}),
        ("straight_string", {"n": 32}),
        ("static_loop", {}),
        ("circle", {}),
        ("helix", {}),
        ("random_smooth", {}),
    ],
)
def test_verify_passes(scenario, name, overrides):
    report = verify_config(scenario(name, **overrides))
    failed = [c.name for c in report.checks if not c.passed]
    assert report.error is None
    assert failed == []
    assert report.exit_code == 0


@pytest.mark.parametrize("name", ["chiral_loop", "rotating_loop"])
def test_verify_loops_on_a_coarse_grid(scenario, name):
    report = verify_config(scenario(name, n=64), tol_scale=100.0)
    names = {c.name for c in report.checks}
    assert {"chirality", "eom", "base_normal_trace", "kk_wave", "charge_translation"} <= names
    assert report.passed, report.to_text()


def test_nonchiral_control_trips_the_monitor(scenario):
    report = verify_config(scenario("nonchiral_loop", n=32), tol_scale=1000.0)
    check = next(c for c in report.checks if c.name == "chirality_violation")
    assert check.passed
    assert check.measured > 0.1
    assert check.threshold == DEFAULT_THRESHOLDS["chirality_violation"]


def test_random_smooth_is_off_shell_but_geometric(scenario):
    report = verify_config(scenario("random_smooth", n=32))
    names = {c.name for c in report.checks}
    assert "eom" not in names
    assert next(c for c in report.checks if c.name == "frame_orthonormality").passed


def test_order_fits():
    h = np.array([0.4, 0.2, 0.1])
    errors = 3.0 * h**2
    assert fit_order(h, errors) == pytest.approx(2.0)
    assert pairwise_orders(h, errors) == pytest.approx([2.0, 2.0])


def test_circle_sweep_converges(scenario):
    rows, report = sweep_config(scenario("circle"), [16, 32, 64])
    assert report.passed, report.to_text()
    quantities = {row[0] for row in rows}
    assert {"gauss_weingarten", "curvature"} <= quantities
    order = next(c for c in report.checks if c.name == "order_curvature")
    assert order.measured >= 1.8


def test_sweep_needs_two_grids(scenario):
    _, report = sweep_config(scenario("circle"), [32])
    assert report.error is not None
    assert not report.passed


def test_sweep_at_roundoff_passes_explicitly(scenario):
    rows, report = sweep_config(scenario("flat_sheet"), [16, 32])
    assert rows
    assert report.passed, report.to_text()
    assert all(c.name.startswith("roundoff_") for c in report.checks)


def test_circle_stretch_is_validated(scenario):
    with pytest.raises(ConfigError):
        build_scenario(scenario("circle", params={"radius": 1.5, "stretch": 1.0}))
