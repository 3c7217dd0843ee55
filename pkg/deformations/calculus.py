"""
First-order deformation calculus of an embedded worldvolume.

A deformation δX̄ = φ^a e_a + φ^I n_I is split into its tangential part φ^a
and its normal multiplet φ^I; the operations below return the induced
first-order changes of the intrinsic and extrinsic geometry. The target is
flat, so every background-curvature term is zero.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from geometry.frames import FrameField, tilde_covariant_derivative
from utils.errors import ContractViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeformationField:
    tangential: np.ndarray
    normal: np.ndarray

    def check(self, frames: FrameField):
        shape = frames.grid.shape
        if self.tangential.shape != shape + (frames.wv_dim,):
            raise ContractViolation(
                f"tangential part {self.tangential.shape} does not match frames {shape + (frames.wv_dim,)}"
            )
        if self.normal.shape != shape + (frames.codim,):
            raise ContractViolation(
                f"normal part {self.normal.shape} does not match frames {shape + (frames.codim,)}"
            )

    def vector(self, frames: FrameField):
        """δX̄^μ̄ = φ^a e_a^μ̄ + φ^I n_I^μ̄."""
        self.check(frames)
        return np.einsum("...a,...am->...m", self.tangential, frames.tangents) + np.einsum(
            "...I,...Im->...m", self.normal, frames.normals
        )

    @classmethod
    def from_vector(cls, frames: FrameField, delta):
        """Project a spacetime deformation onto the frame."""
        g = frames.background.metric
        lowered = np.einsum("...am,mn,...n->...a", frames.tangents, g, delta)
        tangential = np.einsum("...ab,...b->...a", frames.inverse_metric, lowered)
        normal = np.einsum("...Im,mn,...n->...I", frames.normals, g, delta)
        return cls(tangential=tangential, normal=normal)

    @classmethod
    def normal_only(cls, frames: FrameField, normal):
        normal = np.asarray(normal, dtype=float)
        return cls(tangential=np.zeros(frames.grid.shape + (frames.wv_dim,)), normal=normal)

    @classmethod
    def zero(cls, frames: FrameField):
        return cls.normal_only(frames, np.zeros(frames.grid.shape + (frames.codim,)))


@dataclass(frozen=True)
class IntrinsicDeformation:
    metric: np.ndarray
    inverse_metric: np.ndarray
    volume: np.ndarray
    tangents: np.ndarray


def deform_intrinsic(frames: FrameField, field: DeformationField) -> IntrinsicDeformation:
    """DΓ_ab, DΓ^ab, D√(−Γ) and De_a for a mixed deformation."""
    field.check(frames)
    metric, inverse = frames.metric, frames.inverse_metric
    K = frames.curvature

    phi_up = field.tangential
    phi_low = np.einsum("...ab,...b->...a", metric, phi_up)
    phi_n = field.normal

    grad_low = tilde_covariant_derivative(phi_low, frames, "l")  # ∇_a φ_b
    grad_up = tilde_covariant_derivative(phi_up, frames, "u")  # ∇_a φ^b
    grad_n = tilde_covariant_derivative(phi_n, frames, "n")  # ∇̃_a φ^I

    d_metric = (
        2.0 * np.einsum("...abJ,...J->...ab", K, phi_n)
        + grad_low
        + np.swapaxes(grad_low, -1, -2)
    )
    d_inverse = -np.einsum("...ac,...bd,...cd->...ab", inverse, inverse, d_metric)
    divergence = np.einsum("...aa->...", grad_up)
    d_volume = frames.sqrt_det * (divergence + np.einsum("...I,...I->...", frames.mean_curvature, phi_n))

    # ∂_a δX̄ = (∇_a φ^b + K_a^b_I φ^I) e_b + (∇̃_a φ^J − φ^b K_ab^J) n_J
    mixed = np.einsum("...bc,...acI->...abI", inverse, K)
    tangent_part = grad_up + np.einsum("...abI,...I->...ab", mixed, phi_n)
    normal_part = grad_n - np.einsum("...b,...abJ->...aJ", phi_up, K)
    d_tangents = np.einsum("...ab,...bm->...am", tangent_part, frames.tangents) + np.einsum(
        "...aJ,...Jm->...am", normal_part, frames.normals
    )
    return IntrinsicDeformation(
        metric=d_metric, inverse_metric=d_inverse, volume=d_volume, tangents=d_tangents
    )


def _normal_hessian(frames: FrameField, phi_n):
    """∇̃_a ∇̃_b φ^I, symmetrized over (a, b)."""
    first = tilde_covariant_derivative(phi_n, frames, "n")
    second = tilde_covariant_derivative(first, frames, "ln")
    return 0.5 * (second + np.swapaxes(second, -2, -3))


def _curvature_square(frames: FrameField):
    """K_ac^I Γ^cd K_db^J with layout (..., a, b, I, J)."""
    K = frames.curvature
    return np.einsum("...acI,...cd,...dbJ->...abIJ", K, frames.inverse_metric, K)


def deform_extrinsic(
    frames: FrameField,
    field: DeformationField,
    background_curvature: Optional[Callable[[FrameField], np.ndarray]] = None,
):
    """
    DK_ab^I for a normal deformation, in a normal frame aligned with the
    undeformed one: DK = −∇̃_a∇̃_b φ^I + K_ac^I K^c_bJ φ^J.
    """
    field.check(frames)
    if np.any(field.tangential != 0.0):
        raise ContractViolation("deform_extrinsic takes normal deformations only")
    if background_curvature is not None:
        term = np.asarray(background_curvature(frames), dtype=float)
        if np.any(term != 0.0):
            raise ContractViolation("only flat backgrounds are supported")

    hessian = _normal_hessian(frames, field.normal)
    return -hessian + np.einsum("...abIJ,...J->...abI", _curvature_square(frames), field.normal)


def linearized_eom_apply(frames: FrameField, phi_n):
    """Δ̃φ^I + K_ac^I K^{ac}_J φ^J with Δ̃ = Γ^ab ∇̃_a∇̃_b."""
    phi_n = np.asarray(phi_n, dtype=float)
    if phi_n.shape != frames.grid.shape + (frames.codim,):
        raise ContractViolation(f"normal multiplet has shape {phi_n.shape}")
    box = np.einsum("...ab,...abI->...I", frames.inverse_metric, _normal_hessian(frames, phi_n))
    square = np.einsum("...ab,...abIJ->...IJ", frames.inverse_metric, _curvature_square(frames))
    return box + np.einsum("...IJ,...J->...I", square, phi_n)


def trace_identity_residual(frames: FrameField, deformation: IntrinsicDeformation):
    """Max |Γ^ab DΓ_ab − 2 D√(−Γ)/√(−Γ)|."""
    trace = np.einsum("...ab,...ab->...", frames.inverse_metric, deformation.metric)
    residual = trace - 2.0 * deformation.volume / frames.sqrt_det
    return float(np.max(np.abs(frames.interior(residual))))


def inverse_identity_residual(frames: FrameField, deformation: IntrinsicDeformation):
    """Max |DΓ^ab + Γ^ac Γ^bd DΓ_cd|."""
    inv = frames.inverse_metric
    residual = deformation.inverse_metric + np.einsum(
        "...ac,...bd,...cd->...ab", inv, inv, deformation.metric
    )
    return float(np.max(np.abs(residual)))
