"""
Unit-speed left/right movers and the conformal-gauge solutions they build,
X̄(τ, σ) = ½[A(σ+τ) + B(σ−τ)] with A = (u, a(u)), B = (−v, b(v)).
"""

import logging
from dataclasses import dataclass

import numpy as np

from geometry.embedding import ExtendedEmbedding
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
_SPECTRAL_POINTS = 512
_NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Mover:
    """
    A closed (up to winding) curve reparametrized to unit speed in the metric
    diag(weights). Raw curve: r(σ) = W σ/2π + Σ_h [C_h cos hσ + S_h sin hσ].
    """

    winding: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    weights: np.ndarray
    length: float
    arc_coeffs: np.ndarray

    @classmethod
    def from_coefficients(cls, winding, cos, sin, weights):
        winding = np.asarray(winding, dtype=float)
        cos = np.atleast_2d(np.asarray(cos, dtype=float))
        sin = np.atleast_2d(np.asarray(sin, dtype=float))
        weights = np.asarray(weights, dtype=float)
        ncomp = weights.shape[0]
        if winding.shape != (ncomp,) or cos.shape[0] != ncomp or sin.shape[0] != ncomp:
            raise ConfigError(f"mover coefficients must have {ncomp} components")
        width = max(cos.shape[1], sin.shape[1])
        cos = np.pad(cos, ((0, 0), (0, width - cos.shape[1])))
        sin = np.pad(sin, ((0, 0), (0, width - sin.shape[1])))

        draft = cls(winding, cos, sin, weights, 1.0, np.zeros(1))
        sigma = TWO_PI * np.arange(_SPECTRAL_POINTS) / _SPECTRAL_POINTS
        speed = draft._raw_speed(sigma)
        if np.min(speed) <= 1e-8:
            raise ConfigError("mover has vanishing speed; cannot normalize")
        spectrum = np.fft.rfft(speed) / _SPECTRAL_POINTS
        keep = np.nonzero(np.abs(spectrum) > 1e-16 * np.abs(spectrum[0]))[0]
        spectrum = spectrum[: keep[-1] + 1]
        length = float(TWO_PI * spectrum[0].real)
        mover = cls(winding, cos, sin, weights, length, spectrum)
        mover._check_normalization()
        return mover

    # raw curve

    def _harmonics(self, sigma):
        h = np.arange(1, self.cos.shape[1] + 1)
        return np.multiply.outer(sigma, h)

    def _raw(self, sigma):
        phase = self._harmonics(sigma)
        periodic = np.cos(phase) @ self.cos.T + np.sin(phase) @ self.sin.T
        return np.multiply.outer(sigma, self.winding) / TWO_PI + periodic

    def _raw_prime(self, sigma):
        phase = self._harmonics(sigma)
        h = np.arange(1, self.cos.shape[1] + 1)
        periodic = (-np.sin(phase) * h) @ self.cos.T + (np.cos(phase) * h) @ self.sin.T
        return self.winding / TWO_PI + periodic

    def _raw_speed(self, sigma):
        rp = self._raw_prime(sigma)
        return np.sqrt(np.einsum("...c,c,...c->...", rp, self.weights, rp))

    def _arc_length(self, sigma):
        c = self.arc_coeffs
        total = c[0].real * sigma
        if len(c) > 1:
            k = np.arange(1, len(c))
            phase = np.multiply.outer(sigma, k)
            alpha = 2.0 * c[1:].real
            beta = -2.0 * c[1:].imag
            total = total + (np.sin(phase) @ (alpha / k)) - ((np.cos(phase) - 1.0) @ (beta / k))
        return total

    def _reparametrize(self, u):
        """σ(u) with s(σ) = u·L/2π, by Newton iteration on the spectral arc length."""
        u = np.asarray(u, dtype=float)
        turns = np.floor(u / TWO_PI)
        rem = u - TWO_PI * turns
        target = rem * self.length / TWO_PI
        sigma = rem.copy()
        for _ in range(60):
            step = (self._arc_length(sigma) - target) / self._raw_speed(sigma)
            sigma = sigma - step
            if np.max(np.abs(step), initial=0.0) < 1e-15:
                break
        return sigma, turns

    # unit-speed mover

    @property
    def scale(self):
        return TWO_PI / self.length

    @property
    def unit_winding(self):
        return self.scale * self.winding

    def __call__(self, u):
        sigma, turns = self._reparametrize(u)
        return self.scale * self._raw(sigma) + np.multiply.outer(turns, self.unit_winding)

    def derivative(self, u):
        sigma, _ = self._reparametrize(u)
        rp = self._raw_prime(sigma)
        return rp / self._raw_speed(sigma)[..., None]

    def _check_normalization(self):
        u = TWO_PI * np.arange(_SPECTRAL_POINTS) / _SPECTRAL_POINTS
        periodic = self(u) - np.multiply.outer(u, self.unit_winding) / TWO_PI
        k = np.fft.rfftfreq(_SPECTRAL_POINTS, d=1.0 / _SPECTRAL_POINTS)
        deriv = np.fft.irfft(1j * k[:, None] * np.fft.rfft(periodic, axis=0), n=_SPECTRAL_POINTS, axis=0)
        deriv = deriv + self.unit_winding / TWO_PI
        speed = np.sqrt(np.einsum("...c,c,...c->...", deriv, self.weights, deriv))
        deviation = float(np.max(np.abs(speed - 1.0)))
        logger.debug("mover normalization deviation %.3e", deviation)
        if deviation > _NORMALIZATION_TOL:
            raise ConfigError(f"mover normalization failed: max ||a'|-1| = {deviation:.3e}")


@dataclass(frozen=True)
class MoverPair:
    """Right- and left-moving curves of one conformal-gauge solution."""

    a: Mover
    b: Mover

    def _full(self, u, v):
        A = np.concatenate([np.asarray(u)[..., None], self.a(u)], axis=-1)
        B = np.concatenate([-np.asarray(v)[..., None], self.b(v)], axis=-1)
        dA = np.concatenate([np.ones(np.shape(u) + (1,)), self.a.derivative(u)], axis=-1)
        dB = np.concatenate([-np.ones(np.shape(v) + (1,)), self.b.derivative(v)], axis=-1)
        return A, B, dA, dB

    def evaluate(self, tau, sigma):
        """(X̄, ∂_τX̄, ∂_σX̄) at broadcast (τ, σ)."""
        tau, sigma = np.broadcast_arrays(np.asarray(tau, float), np.asarray(sigma, float))
        A, B, dA, dB = self._full(sigma + tau, sigma - tau)
        return 0.5 * (A + B), 0.5 * (dA - dB), 0.5 * (dA + dB)

    @property
    def sigma_winding(self):
        w = 0.5 * (self.a.unit_winding + self.b.unit_winding)
        return np.concatenate([[0.0], w])

    @property
    def tau_winding(self):
        w = 0.5 * (self.a.unit_winding - self.b.unit_winding)
        return np.concatenate([[TWO_PI], w])

    def sample(self, grid):
        """The solution on a (τ, σ) worldvolume grid, with its exact tangents."""
        tau, sigma = grid.mesh()
        xbar, velocity, slope = self.evaluate(tau, sigma)
        windings = np.stack([self.tau_winding, self.sigma_winding])
        return ExtendedEmbedding.from_xbar(
            grid, xbar, windings=windings, velocity=velocity, spatial_tangents=slope[..., None, :]
        )
