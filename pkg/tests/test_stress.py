from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from charges.canonical import momentum_density
from dynamics.evolution import normal_trace
from stress.hamiltonians import CallableDensity, CurvatureQuadratic, NambuGoto, density_from_name
from stress.multipliers import (
    eom_from_stress,
    force_from_normal_gradients,
    solve_multipliers,
    stationarity_residual,
    stress_conservation_residual,
    stress_tensor,
)
from utils.errors import ConfigError


class _WrongCurvaturePartial(CurvatureQuadratic):
    def partial_curvature(self, metric, curvature):
        return np.zeros(curvature.shape)


def test_nambu_goto_stress_is_minus_mu0_inverse_metric(frames_of):
    _, _, _, frames = frames_of("helix", n=32)
    density = NambuGoto(mu0=3.0)
    stress = density.stress(frames.metric, frames.curvature)
    assert_allclose(stress, -3.0 * frames.inverse_metric, atol=1e-14)


def test_curvature_quadratic_partials_match_differences(frames_of):
    _, _, _, frames = frames_of("helix", n=32)
    density = CurvatureQuadratic(mu0=1.0, alpha=0.7)
    metric = frames.metric.reshape(-1, 2, 2)[:32]
    K = frames.curvature.reshape(-1, 2, 2, frames.codim)[:32]
    assert density.validate_partials(metric, K) <= 1e-7
    density.check_partials(metric, K)


def test_wrong_partials_are_rejected(frames_of):
    _, _, _, frames = frames_of("helix", n=32)
    with pytest.raises(ConfigError):
        solve_multipliers(frames, _WrongCurvaturePartial(alpha=1.0))


def test_callable_density_uses_numeric_partials(frames_of):
    _, _, _, frames = frames_of("static_loop", n=32)
    area = CallableDensity("area", lambda metric, curvature: np.full(metric.shape[:-2], -2.0))
    ms = solve_multipliers(frames, area)
    assert_allclose(ms.force, solve_multipliers(frames, NambuGoto(2.0)).force, atol=1e-12)


def test_unknown_density_name():
    assert isinstance(density_from_name("dng"), NambuGoto)
    with pytest.raises(ConfigError):
        density_from_name("bending")


@pytest.mark.parametrize("name", ["helix", "static_loop", "chiral_loop", "random_smooth"])
def test_stress_equals_momentum_density_for_dng(frames_of, name):
    cfg, _, _, frames = frames_of(name, n=32)
    ms = solve_multipliers(frames, NambuGoto(cfg.mu0))
    P = momentum_density(frames, cfg.mu0)
    assert np.max(np.abs(frames.sqrt_det[..., None, None] * ms.force - P)) <= 1e-12 * max(1.0, np.max(np.abs(P)))


@pytest.mark.parametrize("name", ["static_loop", "helix", "random_smooth"])
def test_multipliers_are_stationary(frames_of, name):
    _, _, _, frames = frames_of(name, n=64)
    residual = stationarity_residual(frames, solve_multipliers(frames, CurvatureQuadratic(alpha=0.5)))
    assert residual["substitution"] <= 1e-10
    assert residual["normal"] <= 1e-4
    assert residual["force"] <= 1e-4


def test_tampered_multipliers_fail_stationarity(frames_of):
    _, _, _, frames = frames_of("random_smooth", n=64)
    ms = solve_multipliers(frames, CurvatureQuadratic(alpha=10.0))
    assert stationarity_residual(frames, ms)["normal"] <= 1e-3
    flipped = replace(ms, normal=-ms.normal)
    assert stationarity_residual(frames, flipped)["normal"] > 0.1
    assert stationarity_residual(frames, flipped)["substitution"] > 0.1
    scaled = replace(ms, force=1.5 * ms.force)
    assert stationarity_residual(frames, scaled)["force"] > 0.1


def test_force_assembled_two_ways(frames_of):
    _, _, _, frames = frames_of("helix")
    ms = solve_multipliers(frames, CurvatureQuadratic(alpha=0.5))
    assert_allclose(force_from_normal_gradients(frames, ms), ms.force, atol=1e-4)


def test_stress_eom_matches_dynamics_eom(frames_of):
    _, _, _, frames = frames_of("static_loop", n=32)
    eom = eom_from_stress(frames, solve_multipliers(frames, NambuGoto()))
    trace = normal_trace(frames)
    assert np.max(np.abs(eom.mean_curvature - trace)) <= 1e-12 * max(1.0, np.max(np.abs(trace)))


def test_static_loop_is_off_shell(frames_of):
    _, _, _, frames = frames_of("static_loop", n=32)
    eom = eom_from_stress(frames, solve_multipliers(frames, NambuGoto()))
    assert eom.maxima(frames)["normal_trace"] > 0.5


def test_chiral_loop_is_on_shell(frames_of):
    _, _, _, frames = frames_of("chiral_loop", n=64)
    ms = solve_multipliers(frames, NambuGoto())
    maxima = eom_from_stress(frames, ms).maxima(frames)
    assert maxima["normal_trace"] < 1e-4
    assert maxima["base_normal_trace"] < 1e-4
    assert maxima["kk_wave"] < 1e-10
    assert stress_conservation_residual(frames, ms.force) < 1e-4


def test_stress_decomposition_rebuilds_the_force(frames_of):
    _, _, _, frames = frames_of("helix", n=32)
    ms = solve_multipliers(frames, CurvatureQuadratic(alpha=0.5))
    parts = stress_tensor(frames, ms)
    rebuilt = np.einsum("...ab,...bm->...am", parts.tangential, frames.tangents) + np.einsum(
        "...aI,...Im->...am", parts.normal, frames.normals
    )
    assert_allclose(rebuilt, ms.force, atol=1e-12)
