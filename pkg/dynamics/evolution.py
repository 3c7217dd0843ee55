"""
Conformal-gauge evolution of strings in the extended flat background.

The state holds one τ slice. Diagnostics are computed on a five-level patch
built by stepping the reversible scheme ±Δτ, ±2Δτ around the snapshot, so
every τ-derivative used by the frames is centered on the middle level.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from charges.canonical import (
    ChargeSet,
    PhaseSlice,
    charge_columns,
    momentum_density_and_divergence,
    total_charges,
)
from geometry.background import KKBackground
from geometry.embedding import ExtendedEmbedding
from geometry.frames import FrameField, build_frames, frame_axiom_residuals
from geometry.grid import TimeAxis, WorldvolumeGrid
from stress.hamiltonians import NambuGoto
from stress.multipliers import eom_from_stress, solve_multipliers, stress_conservation_residual
from utils.errors import CFLViolation, ChiralKKError, ContractViolation, RunAborted
from utils.output import read_csv_rows

logger = logging.getLogger(__name__)

CFL_LIMIT = 0.5
PATCH_LEVELS = 5

DIAGNOSTIC_COLUMNS = [
    "tau",
    "step",
    "constraint_plus",
    "constraint_minus",
    "chirality",
    "chirality_det",
    "eom_residual",
    "base_normal_residual",
    "kk_wave_residual",
    "momentum_divergence",
    "stress_divergence",
    "stress_momentum",
    "frame_orthogonality",
    "frame_orthonormality",
    "wave_energy",
]


@dataclass(frozen=True)
class EvolutionState:
    grid: WorldvolumeGrid
    background: KKBackground
    X: np.ndarray
    V: np.ndarray
    winding: np.ndarray
    tau: float = 0.0
    step: int = 0
    cache: dict = field(default_factory=dict, compare=False)

    @property
    def spacing(self):
        return self.grid.spatial_spacing[0]

    def derivative(self):
        return self.grid.derivative(self.X, 0, self.winding)


def initial_data_from_movers(cfg) -> EvolutionState:
    """X(0) = ½(A + B), V(0) = ½(A′ − B′) on the configured σ grid."""
    pair = cfg.mover_pair()
    grid = WorldvolumeGrid(spatial=(cfg.n,))
    sigma = grid.axis_coordinates(0)
    X, V, _ = pair.evaluate(0.0, sigma)
    state = EvolutionState(
        grid=grid, background=cfg.background(), X=X, V=V, winding=pair.sigma_winding
    )
    plus, minus = constraints(state)
    logger.info(
        "initial data for %s: n=%d, constraints %.3e/%.3e", cfg.scenario, cfg.n, plus, minus
    )
    return state


def constraints(state: EvolutionState):
    """Max |g(V ± X′, V ± X′)|."""
    g = state.background.metric
    dX = state.derivative()
    plus = state.V + dX
    minus = state.V - dX
    c_plus = np.einsum("...m,mn,...n->...", plus, g, plus)
    c_minus = np.einsum("...m,mn,...n->...", minus, g, minus)
    return float(np.max(np.abs(c_plus))), float(np.max(np.abs(c_minus)))


def wave_energy(state: EvolutionState):
    """½ Σ [g(V, V) + g(X′, X′)] dσ over the spatial and KK components."""
    g = state.background.metric[1:, 1:]
    V = state.V[:, 1:]
    dX = state.derivative()[:, 1:]
    density = np.einsum("im,mn,in->i", V, g, V) + np.einsum("im,mn,in->i", dX, g, dX)
    return 0.5 * float(state.grid.slice_sum(density))


def canonical_slice(state: EvolutionState, mu0) -> PhaseSlice:
    """
    The evolved canonical pair (X̄, μ₀V). In conformal gauge π = μ₀ ∂_τX̄, and
    the scheme conserves Σπ and ΣX̄∧π exactly for σ-periodic components.
    """
    return PhaseSlice(state.grid, state.background, state.X, mu0 * state.V, state.tau)


def leapfrog_step(state: EvolutionState, dtau) -> EvolutionState:
    """Position Verlet for ∂²_τ X̄ = ∂²_σ X̄."""
    if abs(dtau) > CFL_LIMIT * state.spacing * (1.0 + 1e-12):
        raise CFLViolation(f"|dtau|={abs(dtau):.6g} exceeds {CFL_LIMIT}*h={CFL_LIMIT * state.spacing:.6g}")
    grid, w = state.grid, state.winding
    half = state.X + 0.5 * dtau * state.V
    V = state.V + dtau * grid.second_derivative(half, 0, w)
    X = half + 0.5 * dtau * V
    return replace(state, X=X, V=V, tau=state.tau + dtau, step=state.step + 1, cache={})


def build_patch(state: EvolutionState, dtau) -> ExtendedEmbedding:
    """Five slices τ−2Δτ … τ+2Δτ around the state, with velocities."""
    back1 = leapfrog_step(state, -dtau)
    back2 = leapfrog_step(back1, -dtau)
    fwd1 = leapfrog_step(state, dtau)
    fwd2 = leapfrog_step(fwd1, dtau)
    levels = [back2, back1, state, fwd1, fwd2]
    time = TimeAxis(levels=PATCH_LEVELS, step=dtau, periodic=False, origin=state.tau - 2.0 * dtau)
    grid = WorldvolumeGrid(spatial=state.grid.spatial, time=time)
    windings = np.stack([np.zeros_like(state.winding), state.winding])
    return ExtendedEmbedding.from_xbar(
        grid,
        np.stack([s.X for s in levels]),
        windings=windings,
        velocity=np.stack([s.V for s in levels]),
    )


def normal_trace(frames: FrameField):
    """Γ^ab K_ab^I at every point."""
    return np.einsum("...ab,...abI->...I", frames.inverse_metric, frames.curvature)


def eom_residual(state: EvolutionState, frames: FrameField):
    """Per-normal max |Γ^ab K_ab^I| on the middle level of the patch."""
    time = frames.grid.time
    if time is None or time.periodic or time.levels < PATCH_LEVELS:
        raise ContractViolation(
            f"eom_residual needs a stacked patch of {PATCH_LEVELS} slices around the state"
        )
    trace = normal_trace(frames)
    middle = trace[time.levels // 2]
    return np.max(np.abs(middle), axis=tuple(range(middle.ndim - 1)))


@dataclass
class RunResult:
    charge_header: List[str]
    charge_rows: List[list] = field(default_factory=list)
    diagnostic_rows: List[list] = field(default_factory=list)
    initial_charges: ChargeSet = None
    final_state: EvolutionState = None

    @property
    def diagnostic_header(self):
        return list(DIAGNOSTIC_COLUMNS)

    def column(self, name):
        idx = DIAGNOSTIC_COLUMNS.index(name)
        return np.array([row[idx] for row in self.diagnostic_rows])

    @classmethod
    def load(cls, charges_path, diagnostics_path):
        """Rebuild the tabular part of a finished run from its CSV files."""
        charge_header, charge_rows = read_csv_rows(charges_path)
        diagnostic_header, diagnostic_rows = read_csv_rows(diagnostics_path)
        if diagnostic_header != DIAGNOSTIC_COLUMNS:
            raise ContractViolation(f"{diagnostics_path}: unexpected columns {diagnostic_header}")
        return cls(charge_header=charge_header, charge_rows=charge_rows, diagnostic_rows=diagnostic_rows)

    def max_drift(self):
        if not self.charge_rows:
            return 0.0, 0.0
        D = len([c for c in self.charge_header if c.startswith("P")])
        pairs = D * (D - 1) // 2
        start = 1 + D + pairs
        drifts = np.array([row[start:] for row in self.charge_rows])
        return float(np.max(drifts[:, :D])), float(np.max(drifts[:, D:], initial=0.0))


def diagnose(state: EvolutionState, dtau, mu0):
    """One diagnostics row plus the slice charges at the state's τ."""
    patch = build_patch(state, dtau)
    frames = build_frames(patch, state.background)
    middle = PATCH_LEVELS // 2

    charges = total_charges(canonical_slice(state, mu0))
    ms = solve_multipliers(frames, NambuGoto(mu0), check=False)
    eom = eom_from_stress(frames, ms).maxima(frames)
    density, momentum_div = momentum_density_and_divergence(frames, mu0)
    identity = frames.sqrt_det[..., None, None] * ms.force - density
    ortho, orthonormal = frame_axiom_residuals(frames)
    plus, minus = constraints(state)

    row = [
        state.tau,
        state.step,
        plus,
        minus,
        float(np.max(np.abs(frames.induced.chirality[middle]))),
        float(np.max(np.abs(frames.induced.chirality_from_det[middle]))),
        float(np.max(eom_residual(state, frames))),
        eom["base_normal_trace"],
        eom["kk_wave"],
        momentum_div,
        stress_conservation_residual(frames, ms.force),
        float(np.max(np.abs(identity))),
        ortho,
        orthonormal,
        wave_energy(state),
    ]
    return row, charges


def run(cfg) -> RunResult:
    """Evolve cfg.steps steps, recording diagnostics every cfg.cadence steps and at the end."""
    dtau = cfg.resolved_dtau()
    state = initial_data_from_movers(cfg)
    result = RunResult(charge_header=["tau"] + charge_columns(state.background.total_dim))
    D = state.background.total_dim
    result.charge_header += [f"drift_{c}" for c in charge_columns(D)]

    for step in range(cfg.steps + 1):
        try:
            if step % cfg.cadence == 0 or step == cfg.steps:
                row, charges = diagnose(state, dtau, cfg.mu0)
                if result.initial_charges is None:
                    result.initial_charges = charges
                dp, dm = charges.drift(result.initial_charges)
                result.diagnostic_rows.append(row)
                result.charge_rows.append([state.tau] + charges.row() + list(dp) + list(dm))
                logger.info("tau=%.6f step=%d energy=%.12g", state.tau, step, row[-1])
            if step < cfg.steps:
                state = leapfrog_step(state, dtau)
        except ChiralKKError as exc:
            logger.error("run aborted at tau=%.17g: %s", state.tau, exc)
            raise RunAborted(state.tau, exc) from exc

    result.final_state = state
    return result
