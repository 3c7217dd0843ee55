import numpy as np
import pytest
from numpy.testing import assert_allclose

from charges.brackets import (
    LinearCharge,
    angular_charge,
    evaluate,
    momentum_charge,
    poincare_algebra_check,
    poisson_bracket,
    position_charge,
    raised_momentum_charge,
)
from charges.canonical import (
    PhaseSlice,
    canonical_momentum,
    charge_columns,
    momentum_density_and_divergence,
    phase_slice,
    symplectic_eval,
    slice_measure,
    total_charges,
    unit_normal_momentum,
)
from geometry.background import KKBackground
from dynamics.evolution import EvolutionState, canonical_slice, leapfrog_step
from geometry.grid import WorldvolumeGrid
from scenarios.checks import fundamental_bracket_residual, lorentz_flow_residual, random_slice
from utils.errors import ContractViolation


@pytest.mark.parametrize("base_dim", [2, 3, 5])
def test_poincare_algebra_closes(base_dim):
    result = poincare_algebra_check(KKBackground(base_dim=base_dim, g44=1.7))
    assert result["max"] <= 1e-10


def test_fundamental_brackets_are_exact():
    bg = KKBackground(base_dim=3)
    assert fundamental_bracket_residual(bg, 8, 2.0 * np.pi / 8) <= 1e-12


def test_lorentz_flow_rotates_positions():
    bg = KKBackground(base_dim=3, g44=2.0)
    assert lorentz_flow_residual(random_slice(bg, 8, seed=2)) <= 1e-12


def test_bracket_of_charges_with_mismatched_cells_is_rejected():
    bg = KKBackground(base_dim=3)
    with pytest.raises(ContractViolation):
        poisson_bracket(momentum_charge(bg, 8, 0.1, 0), momentum_charge(bg, 8, 0.2, 1))


def test_linear_charges_evaluate_to_slice_totals():
    bg = KKBackground(base_dim=3)
    ps = random_slice(bg, 8, seed=4)
    totals = total_charges(ps)
    for alpha in range(bg.total_dim):
        assert_allclose(evaluate(momentum_charge(bg, 8, ps.cell, alpha), ps), totals.momentum[alpha], atol=1e-12)
    assert_allclose(evaluate(angular_charge(bg, 8, ps.cell, 1, 3), ps), totals.angular[1, 3], atol=1e-12)
    assert_allclose(evaluate(position_charge(bg, 8, ps.cell, 5, 2), ps), ps.xbar[5, 2], atol=1e-12)
    assert_allclose(evaluate(raised_momentum_charge(bg, 8, ps.cell, 5, 0), ps), ps.momentum[5, 0], atol=1e-12)


def test_zero_charge_has_degree_zero():
    zero = LinearCharge.zero(8, 4, 0.1)
    assert zero.degree == 0
    assert (zero * 3.0).max_abs() == 0.0


def test_boosted_sheet_momentum_is_gamma_mu0(frames_of):
    cfg, _, bg, frames = frames_of("boosted_sheet", mu0=2.0)
    gamma = 1.0 / np.sqrt(1.0 - 0.6**2)
    pi = canonical_momentum(frames, bg, cfg.mu0)
    assert_allclose(pi.density[..., 0], gamma * cfg.mu0, rtol=1e-12)
    assert_allclose(pi.density[..., 2], gamma * 0.6 * cfg.mu0, rtol=1e-12)
    assert_allclose(pi.kk, 0.0, atol=1e-12)


def test_unit_normal_momentum_integrates_to_the_same_total(frames_of):
    cfg, _, _, frames = frames_of("chiral_loop", n=32)
    pi = canonical_momentum(frames, frames.background, cfg.mu0).density
    hat = unit_normal_momentum(frames, cfg.mu0)
    assert_allclose(hat * slice_measure(frames)[..., None], pi, atol=1e-12)


def test_chiral_loop_charges(frames_of):
    cfg, emb, _, frames = frames_of("chiral_loop", n=32)
    charges = total_charges(phase_slice(frames, emb.xbar, cfg.mu0))
    assert_allclose(charges.momentum[0], 2.0 * np.pi * cfg.mu0, rtol=1e-9)
    # φ = ½ sin(σ+τ) carries no net KK momentum
    assert_allclose(charges.momentum[1:], 0.0, atol=1e-9)


def test_charges_are_covariant_under_translations(frames_of):
    cfg, emb, bg, frames = frames_of("chiral_loop", n=32)
    ps = phase_slice(frames, emb.xbar, cfg.mu0)
    shift = np.array([0.5, -1.0, 2.0, 0.25, -0.75])
    before, after = total_charges(ps), total_charges(ps.translated(shift))
    P = before.momentum
    assert_allclose(after.momentum, P, atol=1e-12)
    assert_allclose(after.angular, before.angular + np.outer(shift, P) - np.outer(P, shift), atol=1e-10)


def test_momentum_is_conserved_on_shell(frames_of):
    cfg, _, _, frames = frames_of("chiral_loop", n=64)
    _, residual = momentum_density_and_divergence(frames, cfg.mu0)
    assert residual < 1e-4


def test_symplectic_form_is_antisymmetric():
    bg = KKBackground(base_dim=3)
    ps = random_slice(bg, 8, seed=9)
    rng = np.random.default_rng(1)
    first = (rng.standard_normal(ps.xbar.shape), rng.standard_normal(ps.xbar.shape))
    second = (rng.standard_normal(ps.xbar.shape), rng.standard_normal(ps.xbar.shape))
    assert_allclose(symplectic_eval(ps, first, second), -symplectic_eval(ps, second, first), atol=1e-12)
    with pytest.raises(ContractViolation):
        symplectic_eval(ps, first, (np.zeros(3), np.zeros(3)))


def test_phase_slice_contract():
    bg = KKBackground(base_dim=3)
    grid = WorldvolumeGrid(spatial=(8,))
    with pytest.raises(ContractViolation):
        PhaseSlice(grid, bg, np.zeros((8, 4)), np.zeros((8, 3)))
    with pytest.raises(ContractViolation):
        PhaseSlice(grid, bg, np.zeros((8, 4)), np.full((8, 4), np.nan))


def test_charge_columns_order():
    assert charge_columns(3) == ["P0", "P1", "P2", "M01", "M02", "M12"]


def test_momentum_divergence_is_visible_off_shell(frames_of):
    cfg, _, _, frames = frames_of("random_smooth", params={"amplitude": 0.2, "modes": 1})
    _, residual = momentum_density_and_divergence(frames, cfg.mu0)
    assert residual > 1e-2


def test_symplectic_form_is_the_same_on_every_slice():
    bg = KKBackground(base_dim=3, g44=1.5)
    grid = WorldvolumeGrid(spatial=(64,))
    sigma = grid.axis_coordinates(0)[:, None]
    rng = np.random.default_rng(3)
    mu0 = 2.0

    def perturbation():
        X = np.zeros((64, bg.total_dim))
        V = np.zeros_like(X)
        for k in (1, 2, 3):
            X += rng.standard_normal(bg.total_dim) * np.cos(k * sigma + rng.uniform(0, 2 * np.pi))
            V += rng.standard_normal(bg.total_dim) * np.sin(k * sigma + rng.uniform(0, 2 * np.pi))
        return EvolutionState(grid=grid, background=bg, X=X, V=V, winding=np.zeros(bg.total_dim))

    first, second = perturbation(), perturbation()

    def omega():
        ps = canonical_slice(first, mu0)
        return symplectic_eval(ps, (first.X, mu0 * first.V), (second.X, mu0 * second.V))

    start = omega()
    assert abs(start) > 1e-3
    dtau = 0.25 * grid.spatial_spacing[0]
    for _ in range(400):
        first, second = leapfrog_step(first, dtau), leapfrog_step(second, dtau)
    assert omega() == pytest.approx(start, rel=1e-11)
