import numpy as np
import pytest
from numpy.testing import assert_allclose

from charges.canonical import phase_slice, total_charges
from dynamics.evolution import (
    DIAGNOSTIC_COLUMNS,
    EvolutionState,
    RunResult,
    build_patch,
    constraints,
    eom_residual,
    initial_data_from_movers,
    leapfrog_step,
    run,
    wave_energy,
)
from dynamics.movers import Mover
from geometry.background import KKBackground
from geometry.frames import build_frames, induced_metric, tangent_basis
from geometry.grid import TimeAxis, WorldvolumeGrid
from utils.errors import CFLViolation, ConfigError, ContractViolation
from utils.output import write_csv


def test_mover_is_unit_speed():
    weights = np.array([1.0, 1.0, 2.0])
    mover = Mover.from_coefficients(
        [0.0, 0.0, 3.0], [[1.0, 0.2], [0.0, 0.0], [0.0, 0.1]], [[0.0, 0.0], [1.0, 0.3], [0.0, 0.0]], weights
    )
    u = np.linspace(0.0, 2.0 * np.pi, 50)
    d = mover.derivative(u)
    speed = np.sqrt(np.einsum("uc,c,uc->u", d, weights, d))
    assert_allclose(speed, 1.0, atol=1e-10)
    assert_allclose(mover(u + 2.0 * np.pi) - mover(u), np.broadcast_to(mover.unit_winding, (50, 3)), atol=1e-10)


def test_mover_with_a_stationary_point_is_rejected():
    with pytest.raises(ConfigError):
        Mover.from_coefficients([0.0, 0.0], [[0.0], [0.0]], [[0.0], [0.0]], np.ones(2))


def test_initial_data_satisfies_the_constraints(scenario):
    state = initial_data_from_movers(scenario("chiral_loop", n=128))
    plus, minus = constraints(state)
    assert plus < 1e-6
    assert minus < 1e-6


def test_leapfrog_is_time_reversible(scenario):
    cfg = scenario("chiral_loop", n=32)
    state = initial_data_from_movers(cfg)
    dtau = cfg.resolved_dtau()
    forward = state
    for _ in range(1000):
        forward = leapfrog_step(forward, dtau)
    back = forward
    for _ in range(1000):
        back = leapfrog_step(back, -dtau)
    assert np.max(np.abs(back.X - state.X)) <= 1e-10
    assert np.max(np.abs(back.V - state.V)) <= 1e-10
    assert back.step == 2000


def test_cfl_violation(scenario):
    cfg = scenario("straight_string", n=32)
    state = initial_data_from_movers(cfg)
    with pytest.raises(CFLViolation):
        leapfrog_step(state, 0.6 * cfg.spacing)


def test_eom_residual_needs_a_patch(frames_of, scenario):
    _, _, _, frames = frames_of("chiral_loop", n=32)
    state = initial_data_from_movers(scenario("chiral_loop", n=32))
    with pytest.raises(ContractViolation):
        eom_residual(state, frames)


def test_patch_is_on_shell(scenario):
    cfg = scenario("chiral_loop", n=64)
    state = initial_data_from_movers(cfg)
    patch = build_patch(state, cfg.resolved_dtau())
    frames = build_frames(patch, state.background)
    assert np.max(eom_residual(state, frames)) < 5e-3


def test_zero_step_run_has_one_row(scenario):
    result = run(scenario("straight_string", n=32, steps=0))
    assert len(result.diagnostic_rows) == 1
    assert len(result.charge_rows) == 1
    assert result.diagnostic_header == DIAGNOSTIC_COLUMNS
    assert result.max_drift() == (0.0, 0.0)


def test_short_run_conserves_charges(scenario):
    result = run(scenario("chiral_loop", n=64, steps=24, cadence=8))
    assert len(result.diagnostic_rows) == 4
    drift_p, drift_m = result.max_drift()
    assert drift_p < 1e-4
    assert drift_m < 1e-4
    energy = result.column("wave_energy")
    assert np.ptp(energy) / energy[0] < 1e-3
    assert result.final_state.step == 24


def test_straight_string_has_constant_energy(scenario):
    cfg = scenario("straight_string", n=32)
    state = initial_data_from_movers(cfg)
    later = leapfrog_step(leapfrog_step(state, cfg.resolved_dtau()), cfg.resolved_dtau())
    assert_allclose(wave_energy(later), wave_energy(state), rtol=1e-12)


def test_run_result_reloads_from_csv(scenario, tmp_path):
    result = run(scenario("straight_string", n=32, steps=4, cadence=2))
    write_csv(tmp_path / "charges.csv", result.charge_header, result.charge_rows)
    write_csv(tmp_path / "diagnostics.csv", result.diagnostic_header, result.diagnostic_rows)
    loaded = RunResult.load(tmp_path / "charges.csv", tmp_path / "diagnostics.csv")
    assert loaded.charge_header == result.charge_header
    assert_allclose(loaded.column("wave_energy"), result.column("wave_energy"), rtol=0, atol=0)
    assert loaded.max_drift() == result.max_drift()


@pytest.mark.parametrize("name", ["chiral_loop", "nonchiral_loop"])
def test_long_run_conserves_charges(scenario, name):
    cfg = scenario(name, n=256, steps=10 * 1024, cadence=1024)
    result = run(cfg)
    drift_p, drift_m = result.max_drift()
    assert drift_p <= 1e-6
    assert drift_m <= 1e-6
    if cfg.chiral:
        assert np.max(result.column("chirality")) <= 1e-8 + cfg.resolved_dtau() ** 2
    else:
        assert np.max(result.column("chirality")) >= 1e-2


def test_chiral_loop_stays_chiral_for_ten_periods(scenario):
    cfg = scenario("chiral_loop", n=64)
    time = TimeAxis(levels=81, step=10 * 2.0 * np.pi / 80, periodic=False)
    grid = WorldvolumeGrid(spatial=(cfg.n,), time=time)
    emb = cfg.mover_pair().sample(grid)
    induced = induced_metric(tangent_basis(emb, cfg.background()), cfg.background())
    assert np.max(np.abs(induced.chirality)) <= 1e-8


def test_rotating_loop_energy(scenario):
    cfg = scenario("rotating_loop", n=512, sampling="patch")
    emb, bg = cfg.mover_pair().sample(cfg.patch_grid()), cfg.background()
    frames = build_frames(emb, bg)
    charges = total_charges(phase_slice(frames, emb.xbar, cfg.mu0))
    # conformal gauge: π^0 = μ₀ ∂_τX^0 = μ₀ on every point
    assert charges.momentum[0] == pytest.approx(2.0 * np.pi * cfg.mu0, rel=1e-6)


def test_plane_wave_is_advected_for_one_period():
    n, amplitude = 128, 0.1
    grid = WorldvolumeGrid(spatial=(n,))
    bg = KKBackground(base_dim=3)
    (sigma,) = grid.mesh()
    X = np.zeros((n, 4))
    V = np.zeros((n, 4))
    X[:, 1] = sigma
    X[:, 2] = amplitude * np.sin(sigma)
    V[:, 0] = 1.0
    V[:, 2] = -amplitude * np.cos(sigma)
    winding = np.array([0.0, 2.0 * np.pi, 0.0, 0.0])
    state = EvolutionState(grid=grid, background=bg, X=X, V=V, winding=winding)
    dtau = 0.25 * grid.spatial_spacing[0]
    for _ in range(4 * n):
        state = leapfrog_step(state, dtau)

    assert state.tau == pytest.approx(2.0 * np.pi)
    assert np.max(np.abs(state.X[:, 2] - amplitude * np.sin(sigma))) <= 1e-4
    assert_allclose(state.X[:, 0], 2.0 * np.pi, atol=1e-10)
