"""
Reparametrization-invariant densities H(Γ_ab, K_ab^I) and their partials.

Partials are taken with respect to the lower-index Γ_ab and K_ab^I, treating
the symmetric pair (a, b) as one variable split evenly between both slots.
"""

import logging
from typing import Callable

import numpy as np

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

FD_STEP = 1e-6
PARTIALS_TOL = 1e-7


def _mean_curvature(metric, curvature):
    return np.einsum("...ab,...abI->...I", np.linalg.inv(metric), curvature)


class HamiltonianDensity:
    """Base density; partials fall back to symmetric central differences."""

    name = "generic"
    analytic = False

    def evaluate(self, metric, curvature):
        raise NotImplementedError

    def partial_metric(self, metric, curvature):
        return self._numeric_metric(metric, curvature)

    def partial_curvature(self, metric, curvature):
        return self._numeric_curvature(metric, curvature)

    def _sym_steps(self, m):
        for a in range(m):
            for b in range(a, m):
                E = np.zeros((m, m))
                E[a, b] = E[b, a] = 1.0
                yield a, b, E

    def _numeric_metric(self, metric, curvature):
        m = metric.shape[-1]
        out = np.zeros(metric.shape)
        for a, b, E in self._sym_steps(m):
            d = (
                self.evaluate(metric + FD_STEP * E, curvature)
                - self.evaluate(metric - FD_STEP * E, curvature)
            ) / (2.0 * FD_STEP)
            if a != b:
                d = 0.5 * d
            out[..., a, b] = d
            out[..., b, a] = d
        return out

    def _numeric_curvature(self, metric, curvature):
        m, k = curvature.shape[-2], curvature.shape[-1]
        out = np.zeros(curvature.shape)
        for I in range(k):
            for a, b, E in self._sym_steps(m):
                step = np.zeros((m, m, k))
                step[..., I] = E
                d = (
                    self.evaluate(metric, curvature + FD_STEP * step)
                    - self.evaluate(metric, curvature - FD_STEP * step)
                ) / (2.0 * FD_STEP)
                if a != b:
                    d = 0.5 * d
                out[..., a, b, I] = d
                out[..., b, a, I] = d
        return out

    def stress(self, metric, curvature):
        """T^ab = Γ^ab H + 2 ∂H/∂Γ_ab, i.e. (2/√−Γ) ∂(√−Γ H)/∂Γ_ab."""
        inverse = np.linalg.inv(metric)
        H = self.evaluate(metric, curvature)
        return inverse * H[..., None, None] + 2.0 * self.partial_metric(metric, curvature)

    def validate_partials(self, metric, curvature):
        """Max relative deviation of the partials from central differences."""
        pairs = (
            (self.partial_metric(metric, curvature), self._numeric_metric(metric, curvature)),
            (self.partial_curvature(metric, curvature), self._numeric_curvature(metric, curvature)),
        )
        worst = 0.0
        for analytic, numeric in pairs:
            scale = max(1.0, float(np.max(np.abs(numeric))))
            worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
        logger.debug("%s partials deviation %.3e", self.name, worst)
        return worst

    def check_partials(self, metric, curvature):
        worst = self.validate_partials(metric, curvature)
        if worst > PARTIALS_TOL:
            raise ConfigError(
                f"density '{self.name}' partials disagree with its evaluator ({worst:.3e})"
            )


class NambuGoto(HamiltonianDensity):
    """H = −μ₀."""

    name = "dng"
    analytic = True

    def __init__(self, mu0=1.0):
        self.mu0 = float(mu0)

    def evaluate(self, metric, curvature):
        return np.full(metric.shape[:-2], -self.mu0)

    def partial_metric(self, metric, curvature):
        return np.zeros(metric.shape)

    def partial_curvature(self, metric, curvature):
        return np.zeros(curvature.shape)


class CurvatureQuadratic(HamiltonianDensity):
    """H = −μ₀ + α K^I K_I with K^I = Γ^ab K_ab^I."""

    name = "curvature_quadratic"
    analytic = True

    def __init__(self, mu0=1.0, alpha=1.0):
        self.mu0 = float(mu0)
        self.alpha = float(alpha)

    def evaluate(self, metric, curvature):
        K = _mean_curvature(metric, curvature)
        return -self.mu0 + self.alpha * np.einsum("...I,...I->...", K, K)

    def partial_metric(self, metric, curvature):
        inverse = np.linalg.inv(metric)
        K = _mean_curvature(metric, curvature)
        raised = np.einsum("...ac,...bd,...cdI->...abI", inverse, inverse, curvature)
        return -2.0 * self.alpha * np.einsum("...I,...abI->...ab", K, raised)

    def partial_curvature(self, metric, curvature):
        inverse = np.linalg.inv(metric)
        K = _mean_curvature(metric, curvature)
        return 2.0 * self.alpha * np.einsum("...ab,...I->...abI", inverse, K)


class CallableDensity(HamiltonianDensity):
    """Any vectorized H(Γ_ab, K_ab^I); partials by central differences."""

    def __init__(self, name, fn: Callable):
        self.name = name
        self._fn = fn

    def evaluate(self, metric, curvature):
        return np.asarray(self._fn(metric, curvature), dtype=float)


def density_from_name(name, mu0=1.0, alpha=1.0) -> HamiltonianDensity:
    if name == "dng":
        return NambuGoto(mu0)
    if name == "curvature_quadratic":
        return CurvatureQuadratic(mu0, alpha)
    raise ConfigError(f"unknown density '{name}'")
