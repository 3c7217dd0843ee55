"""
Flat Kaluza-Klein background: Minkowski (or Euclidean, in the Riemannian
analysis mode) base block plus a constant g44 block.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from utils.errors import ConfigError


@dataclass(frozen=True)
class KKBackground:
    base_dim: int
    g44: float = 1.0
    riemannian: bool = False

    def __post_init__(self):
        if self.base_dim < 2:
            raise ConfigError(f"base_dim must be >= 2, got {self.base_dim}")
        if not self.g44 > 0:
            raise ConfigError(f"g44 must be positive, got {self.g44}")

    @property
    def total_dim(self):
        return self.base_dim + 1

    @property
    def kk_axis(self):
        return self.base_dim

    @cached_property
    def metric(self):
        diag = np.ones(self.total_dim)
        if not self.riemannian:
            diag[0] = -1.0
        diag[-1] = self.g44
        return np.diag(diag)

    @cached_property
    def inverse_metric(self):
        return np.diag(1.0 / np.diag(self.metric))

    def dot(self, u, v):
        """g(u, v) contracted over the last axis."""
        return np.einsum("...m,mn,...n->...", u, self.metric, v)

    def lower(self, v):
        return v @ self.metric

    def raise_(self, v):
        return v @ self.inverse_metric

    def riemann(self):
        """Background Riemann tensor; identically zero for this flat target."""
        d = self.total_dim
        return np.zeros((d, d, d, d))
