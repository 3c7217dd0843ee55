"""
The extended embedding X^μ̄ = (X^μ, φ) sampled on a worldvolume grid.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from utils.errors import ContractViolation
from .grid import WorldvolumeGrid


@dataclass(frozen=True)
class ExtendedEmbedding:
    grid: WorldvolumeGrid
    X: np.ndarray
    phi: np.ndarray
    windings: Optional[np.ndarray] = None
    velocity: Optional[np.ndarray] = None
    spatial_tangents: Optional[np.ndarray] = None

    def __post_init__(self):
        shape = self.grid.shape
        if self.X.shape[:-1] != shape or self.phi.shape != shape:
            raise ContractViolation(
                f"X {self.X.shape} / phi {self.phi.shape} do not match grid {shape}"
            )
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.phi))):
            raise ContractViolation("embedding contains non-finite values")
        if self.windings is not None and self.windings.shape != (self.grid.ndim, self.total_dim):
            raise ContractViolation(
                f"windings must have shape {(self.grid.ndim, self.total_dim)}"
            )
        if self.velocity is not None:
            if not self.grid.has_time:
                raise ContractViolation("velocity given on a grid without a time axis")
            if self.velocity.shape != shape + (self.total_dim,):
                raise ContractViolation("velocity shape does not match the embedding")
            if not np.all(np.isfinite(self.velocity)):
                raise ContractViolation("velocity contains non-finite values")
        if self.spatial_tangents is not None:
            expected = shape + (self.grid.spatial_dim, self.total_dim)
            if self.spatial_tangents.shape != expected:
                raise ContractViolation(f"spatial tangents must have shape {expected}")

    @classmethod
    def from_xbar(cls, grid, xbar, windings=None, velocity=None, spatial_tangents=None):
        xbar = np.asarray(xbar, dtype=float)
        return cls(
            grid=grid,
            X=xbar[..., :-1],
            phi=xbar[..., -1],
            windings=None if windings is None else np.asarray(windings, dtype=float),
            velocity=None if velocity is None else np.asarray(velocity, dtype=float),
            spatial_tangents=None if spatial_tangents is None else np.asarray(spatial_tangents, dtype=float),
        )

    @property
    def base_dim(self):
        return self.X.shape[-1]

    @property
    def total_dim(self):
        return self.base_dim + 1

    @property
    def xbar(self):
        return np.concatenate([self.X, self.phi[..., None]], axis=-1)

    def deformed(self, delta, eps):
        """X̄ + ε δX̄; supplied tangent rows follow the derivatives of δX̄."""
        delta = np.asarray(delta, dtype=float)
        if delta.shape != self.xbar.shape:
            raise ContractViolation("deformation does not match the embedding shape")
        velocity = None
        if self.velocity is not None:
            velocity = self.velocity + eps * self.grid.derivative(delta, 0)
        spatial = None
        if self.spatial_tangents is not None:
            offset = 1 if self.grid.has_time else 0
            spatial = self.spatial_tangents + eps * np.stack(
                [self.grid.derivative(delta, ax) for ax in range(offset, self.grid.ndim)], axis=-2
            )
        return ExtendedEmbedding.from_xbar(
            self.grid,
            self.xbar + eps * delta,
            windings=self.windings,
            velocity=velocity,
            spatial_tangents=spatial,
        )

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return replace(self, X=self.X + shift[:-1], phi=self.phi + shift[-1])
