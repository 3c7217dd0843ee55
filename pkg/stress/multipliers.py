"""
Auxiliary-variable multipliers for a density H(Γ_ab, K_ab^I), the stress
f^a they assemble and the equations of motion that follow from it.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from geometry.frames import FrameField, tilde_covariant_derivative
from geometry.tolerances import TOL_DEGENERATE
from .hamiltonians import HamiltonianDensity, NambuGoto

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultiplierSet:
    """
    Layouts: curvature (..., a, b, I) for Λ^ab_I, metric (..., a, b) for λ^ab,
    normal (..., a, I) for λ^a_⊥I, frame (..., I, J) for λ_IJ,
    twist (..., a, I, J) for φ^a_IJ, stress (..., a, b) for T^ab and
    force (..., a, μ̄) for f^a.
    """

    density: HamiltonianDensity
    curvature: np.ndarray
    metric: np.ndarray
    normal: np.ndarray
    frame: np.ndarray
    twist: np.ndarray
    twist_formula: np.ndarray
    stress: np.ndarray
    force: np.ndarray


@dataclass(frozen=True)
class StressDecomposition:
    """f^a = F^{ab} e_b + F^{aI} n_I."""

    force: np.ndarray
    tangential: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True)
class EOMResiduals:
    tangential: np.ndarray
    normal: np.ndarray
    mean_curvature: np.ndarray
    base_normals: np.ndarray
    wave: np.ndarray

    def maxima(self, frames: FrameField):
        def mx(x):
            x = frames.interior(x)
            return float(np.max(np.abs(x))) if x.size else 0.0

        return {
            "tangential": mx(self.tangential),
            "normal": mx(self.normal),
            "normal_trace": mx(self.mean_curvature),
            "base_normal_trace": mx(self.base_normals),
            "kk_wave": mx(self.wave),
        }


def _mixed_curvature(frames: FrameField):
    """K_a^{cI} = Γ^cd K_ad^I, layout (..., a, c, I)."""
    return np.einsum("...cd,...adI->...acI", frames.inverse_metric, frames.curvature)


def solve_multipliers(frames: FrameField, density: HamiltonianDensity, check=True) -> MultiplierSet:
    metric, K = frames.metric, frames.curvature
    if check:
        density.check_partials(metric, K)

    Lam = -density.partial_curvature(metric, K)
    T = density.stress(metric, K)
    lam = 0.5 * T

    div = tilde_covariant_derivative(Lam, frames, "uun")
    lam_perp = -np.einsum("...aabI->...bI", div)

    lam_frame = 0.5 * np.einsum("...abI,...abJ->...IJ", Lam, K)
    lam_frame = 0.5 * (lam_frame + np.swapaxes(lam_frame, -1, -2))

    n_dot_e = np.einsum(
        "...Jm,mn,...bn->...Jb", frames.normals, frames.background.metric, frames.tangents
    )
    twist_formula = -np.einsum("...abI,...Jb->...aIJ", Lam, n_dot_e)
    twist = 0.5 * (twist_formula - np.swapaxes(twist_formula, -1, -2))

    force = _force(frames, Lam, lam, lam_perp)
    logger.debug("multipliers solved for density %s", density.name)
    return MultiplierSet(
        density=density,
        curvature=Lam,
        metric=lam,
        normal=lam_perp,
        frame=lam_frame,
        twist=twist,
        twist_formula=twist_formula,
        stress=T,
        force=force,
    )


def _force(frames, Lam, lam, lam_perp):
    """f^a = (Λ^ab_I K_b^{cI} + 2λ^ac) e_c − λ^a_⊥I n^I."""
    tangential = np.einsum("...abI,...bcI->...ac", Lam, _mixed_curvature(frames)) + 2.0 * lam
    return np.einsum("...ac,...cm->...am", tangential, frames.tangents) - np.einsum(
        "...aI,...Im->...am", lam_perp, frames.normals
    )


def force_from_normal_gradients(frames: FrameField, ms: MultiplierSet):
    """
    f^a = −λ^a_⊥I n^I + Λ^ab_I ∇̃_b n^I + 2λ^ab e_b with ∇̃_b n^I taken from
    the differenced normals, before Gauss-Weingarten is applied.
    """
    return (
        -np.einsum("...aI,...Im->...am", ms.normal, frames.normals)
        + np.einsum("...abI,...bIm->...am", ms.curvature, frames.normal_gradients)
        + 2.0 * np.einsum("...ab,...bm->...am", ms.metric, frames.tangents)
    )


def _lifted_divergence(frames: FrameField, Lam):
    """
    ∇_a(Λ^ab_J n^J) as a spacetime vector per b: plain stencil derivatives of
    the lifted field, worldvolume Christoffels on both upper indices.
    """
    lifted = np.einsum("...abJ,...Jm->...abm", Lam, frames.normals)
    grad = frames.grid.gradient(lifted)
    div = np.einsum("...aabm->...bm", grad)
    gam = frames.christoffels
    div = div + np.einsum("...ada,...dbm->...bm", gam, lifted)
    return div + np.einsum("...adb,...adm->...bm", gam, lifted)


def _relative(a, b, frames):
    a, b = frames.interior(a), frames.interior(b)
    scale = max(float(np.max(np.abs(b))), 1.0)
    return float(np.max(np.abs(a - b))) / scale


def stationarity_residual(frames: FrameField, ms: MultiplierSet):
    """
    Residuals of a multiplier set.

    substitution: the multiplier equations with the set plugged back in,
        ∇̃_a Λ^ab_I + λ^b_⊥I, 2λ_IJ − Λ^ab_(I K_ab^J), Λ^ab_I n_J·e_b + φ^a_IJ
        and the antisymmetric part of φ^a_IJ, absolute.
    normal: λ^b_⊥I against −n^I·∇_a(Λ^ab_J n^J) differenced in the target,
        without the normal links.
    force: f^a against the form assembled from ∇̃_b n^I.
    The last two are max-norm errors relative to the reference, floored at 1.
    """
    g = frames.background.metric
    div = np.einsum("...aabI->...bI", tilde_covariant_derivative(ms.curvature, frames, "uun"))
    frame = np.einsum("...abI,...abJ->...IJ", ms.curvature, frames.curvature)
    n_dot_e = np.einsum("...Jm,mn,...bn->...Jb", frames.normals, g, frames.tangents)
    twist = np.einsum("...abI,...Jb->...aIJ", ms.curvature, n_dot_e) + ms.twist_formula
    parts = (
        div + ms.normal,
        2.0 * ms.frame - 0.5 * (frame + np.swapaxes(frame, -1, -2)),
        twist,
        ms.twist - 0.5 * (ms.twist_formula - np.swapaxes(ms.twist_formula, -1, -2)),
    )

    lifted = _lifted_divergence(frames, ms.curvature)
    reference = -np.einsum("...Im,mn,...bn->...bI", frames.normals, g, lifted)
    out = {
        "substitution": max(float(np.max(np.abs(p))) for p in parts),
        "normal": _relative(ms.normal, reference, frames),
        "force": _relative(ms.force, force_from_normal_gradients(frames, ms), frames),
    }
    out["max"] = max(out.values())
    return out


def stress_tensor(frames: FrameField, ms: MultiplierSet) -> StressDecomposition:
    """f^a with its tangential F^{ab} and normal F^{aI} = −λ^a_⊥I blocks."""
    tangential = np.einsum("...abI,...bcI->...ac", ms.curvature, _mixed_curvature(frames)) + 2.0 * ms.metric
    return StressDecomposition(force=ms.force, tangential=tangential, normal=-ms.normal)


def stress_conservation_residual(frames: FrameField, force):
    """Max |∂_a(√(−Γ) f^{aμ̄})| on the levels where τ-derivatives are centered."""
    flux = frames.sqrt_det[..., None, None] * force
    divergence = sum(frames.grid.derivative(flux[..., a, :], a) for a in range(frames.grid.ndim))
    return float(np.max(np.abs(frames.interior(divergence))))


def base_inverse_metric(frames: FrameField):
    """γ^ab, falling back to Γ^ab where γ_ab is singular."""
    base = frames.induced.base_metric
    safe = frames.induced.base_regular
    m = base.shape[-1]
    guarded = np.where(safe[..., None, None], base, np.eye(m))
    return np.where(safe[..., None, None], np.linalg.inv(guarded), frames.inverse_metric)


def wave_residual(frames: FrameField):
    """(1/√−Γ) ∂_a(√−Γ Γ^ab φ,_b)."""
    grid = frames.grid
    dphi = frames.tangents[..., -1]
    flux = frames.sqrt_det[..., None] * np.einsum("...ab,...b->...a", frames.inverse_metric, dphi)
    divergence = sum(grid.derivative(flux[..., a], a) for a in range(grid.ndim))
    return divergence / frames.sqrt_det


def eom_from_stress(frames: FrameField, ms: MultiplierSet, decomposition: Optional[StressDecomposition] = None):
    """
    Both rows of the stress conservation law,
        ∇_a F^{ab} + K^{bI}_a F_I^a   and   ∇̃_a F^{aI} − F^{ab} K_ab^I,
    plus the chiral split of the normal row.
    """
    if decomposition is None:
        decomposition = stress_tensor(frames, ms)
    F_t, F_n = decomposition.tangential, decomposition.normal
    K = frames.curvature

    div_t = np.einsum("...aab->...b", tilde_covariant_derivative(F_t, frames, "uu"))
    tangential = div_t + np.einsum(
        "...bc,...caI,...aI->...b", frames.inverse_metric, K, F_n
    )
    div_n = np.einsum("...aaI->...I", tilde_covariant_derivative(F_n, frames, "un"))
    normal = div_n - np.einsum("...ab,...abI->...I", F_t, K)

    if isinstance(ms.density, NambuGoto):
        mean = normal / ms.density.mu0
    else:
        mean = frames.mean_curvature

    bg = frames.background
    dphi = frames.tangents[..., -1]
    gamma_inv = base_inverse_metric(frames)
    grad_phi = np.einsum("...ab,...b->...a", gamma_inv, dphi)
    chiral_inverse = gamma_inv - bg.g44 * np.einsum("...a,...b->...ab", grad_phi, grad_phi)
    others = [I for I in range(frames.codim) if I != frames.kk_index]
    base_normals = np.einsum("...ab,...abI->...I", chiral_inverse, K[..., others])

    return EOMResiduals(
        tangential=tangential,
        normal=normal,
        mean_curvature=mean,
        base_normals=base_normals,
        wave=wave_residual(frames),
    )
