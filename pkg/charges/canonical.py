"""
Canonical data on τ = const slices: momentum density, symplectic form and
the Poincaré charge totals.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry.background import KKBackground
from geometry.frames import FrameField
from geometry.grid import WorldvolumeGrid
from utils.errors import ContractViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseSlice:
    """Canonical pair (X̄, π) on a spatial grid; π carries an upper index."""

    grid: WorldvolumeGrid
    background: KKBackground
    xbar: np.ndarray
    momentum: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        if self.grid.has_time:
            raise ContractViolation("a phase slice lives on a spatial grid")
        expected = self.grid.shape + (self.background.total_dim,)
        if self.xbar.shape != expected or self.momentum.shape != expected:
            raise ContractViolation(
                f"slice fields {self.xbar.shape}/{self.momentum.shape}, expected {expected}"
            )
        if not np.all(np.isfinite(self.momentum)):
            raise ContractViolation("canonical momentum is not finite")

    @property
    def cell(self):
        return self.grid.cell_measure

    @property
    def points(self):
        return int(np.prod(self.grid.shape))

    @property
    def lowered_momentum(self):
        return self.background.lower(self.momentum)

    def flat(self):
        """(X̄, p) reshaped to (points, D) in C order."""
        D = self.background.total_dim
        return self.xbar.reshape(-1, D), self.lowered_momentum.reshape(-1, D)

    def translated(self, shift):
        return PhaseSlice(self.grid, self.background, self.xbar + np.asarray(shift), self.momentum, self.tau)


@dataclass(frozen=True)
class CanonicalMomentum:
    """
    π^μ̄ = P^{τμ̄} together with the split into the base block p_μ and the
    KK block p′ = g44 π^φ (both lowered).
    """

    density: np.ndarray
    base: np.ndarray
    kk: np.ndarray


@dataclass(frozen=True)
class ChargeSet:
    momentum: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angular", 0.5 * (self.angular - self.angular.T))

    def drift(self, reference: "ChargeSet"):
        """Per-component |Q − Q₀| / max(1, |Q₀|), upper triangle for M."""
        dp = np.abs(self.momentum - reference.momentum) / np.maximum(1.0, np.abs(reference.momentum))
        iu = np.triu_indices(len(self.momentum), k=1)
        dm = np.abs(self.angular[iu] - reference.angular[iu]) / np.maximum(
            1.0, np.abs(reference.angular[iu])
        )
        return dp, dm

    def row(self):
        """P^0..P^N followed by the upper triangle of M, lexicographic."""
        iu = np.triu_indices(len(self.momentum), k=1)
        return list(self.momentum) + list(self.angular[iu])


def charge_columns(total_dim):
    cols = [f"P{m}" for m in range(total_dim)]
    cols += [f"M{m}{n}" for m in range(total_dim) for n in range(m + 1, total_dim)]
    return cols


def momentum_density(frames: FrameField, mu0):
    """P^{aμ̄} = −μ₀ √(−Γ) Γ^ab e_b^μ̄, layout (..., a, μ̄)."""
    up = np.einsum("...ab,...bm->...am", frames.inverse_metric, frames.tangents)
    return -mu0 * frames.sqrt_det[..., None, None] * up


def canonical_momentum(frames: FrameField, bg: KKBackground, mu0=1.0) -> CanonicalMomentum:
    """The τ row of the momentum density, with its base/KK split."""
    if not frames.grid.has_time:
        raise ContractViolation("canonical momentum needs a τ direction")
    density = momentum_density(frames, mu0)[..., 0, :]
    lowered = bg.lower(density)
    return CanonicalMomentum(density=density, base=lowered[..., :-1], kk=lowered[..., -1])


def unit_normal_momentum(frames: FrameField, mu0=1.0):
    """P̂ = π / √det h with h the induced metric of the τ = const slice."""
    pi = canonical_momentum(frames, frames.background, mu0).density
    h = frames.metric[..., 1:, 1:]
    return pi / np.sqrt(np.linalg.det(h))[..., None]


def slice_measure(frames: FrameField):
    """dΣ / dσ = √det h."""
    return np.sqrt(np.linalg.det(frames.metric[..., 1:, 1:]))


def slice_level(frames: FrameField, level: Optional[int] = None):
    time = frames.grid.time
    if level is None:
        level = 0 if time.periodic else time.levels // 2
    return level


def phase_slice(frames: FrameField, xbar, mu0=1.0, level=None, tau=None) -> PhaseSlice:
    """Cut the canonical pair at one τ level of a worldvolume sample."""
    level = slice_level(frames, level)
    pi = canonical_momentum(frames, frames.background, mu0).density
    if tau is None:
        tau = float(frames.grid.time.coordinates()[level])
    return PhaseSlice(
        grid=frames.grid.slice_grid(),
        background=frames.background,
        xbar=np.asarray(xbar)[level],
        momentum=pi[level],
        tau=tau,
    )


def symplectic_eval(ps: PhaseSlice, first, second):
    """
    Σ [δ₁π_μ̄ δ₂X^μ̄ − δ₂π_μ̄ δ₁X^μ̄] dσ; each perturbation is a pair
    (δX̄, δπ) with δπ upper-indexed.
    """
    (dx1, dp1), (dx2, dp2) = first, second
    shape = ps.xbar.shape
    for arr in (dx1, dp1, dx2, dp2):
        if np.shape(arr) != shape:
            raise ContractViolation(f"perturbation shape {np.shape(arr)} != slice {shape}")
    lower = ps.background.lower
    density = np.einsum("...m,...m->...", lower(dp1), dx2) - np.einsum("...m,...m->...", lower(dp2), dx1)
    return float(ps.grid.slice_sum(density))


def momentum_density_and_divergence(frames: FrameField, mu0=1.0):
    """(P^{aμ̄}, max |∂_a P^{aμ̄}|) on the levels where τ-derivatives are centered."""
    density = momentum_density(frames, mu0)
    divergence = sum(
        frames.grid.derivative(density[..., a, :], a) for a in range(frames.grid.ndim)
    )
    residual = float(np.max(np.abs(frames.interior(divergence))))
    logger.debug("momentum divergence residual %.3e", residual)
    return density, residual


def total_charges(ps: PhaseSlice) -> ChargeSet:
    """P^μ̄ = Σ π^μ̄ dσ and M^μ̄ν̄ = Σ (π^ν̄ X^μ̄ − π^μ̄ X^ν̄) dσ."""
    x, _ = ps.flat()
    pi = ps.momentum.reshape(x.shape)
    momentum = pi.sum(axis=0) * ps.cell
    angular = (np.einsum("im,in->mn", x, pi) - np.einsum("in,im->mn", x, pi)) * ps.cell
    return ChargeSet(momentum=momentum, angular=angular)
