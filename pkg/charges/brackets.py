"""
Exact Poisson brackets on a discretized slice.

Functionals are kept in the coefficient form

    F = c + Σ_i dσ [a_i·X_i + b_i·p_i + X_i·B·p_i]

with p = π lowered and one bilinear block B shared by every point. The
space is closed under the bracket {X_i^μ̄, p_jν̄} = δ^μ̄_ν̄ δ_ij / dσ.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from geometry.background import KKBackground
from utils.errors import ContractViolation
from .canonical import PhaseSlice

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearCharge:
    const: float
    a: np.ndarray
    b: np.ndarray
    B: np.ndarray
    cell: float

    def __post_init__(self):
        if self.a.ndim != 2 or self.a.shape != self.b.shape:
            raise ContractViolation("coefficients a, b must share shape (points, D)")
        D = self.a.shape[1]
        if self.B.shape != (D, D):
            raise ContractViolation(
                f"bilinear block has shape {self.B.shape}; only a uniform (D, D) block is supported"
            )

    @classmethod
    def zero(cls, points, dim, cell):
        return cls(0.0, np.zeros((points, dim)), np.zeros((points, dim)), np.zeros((dim, dim)), cell)

    @property
    def points(self):
        return self.a.shape[0]

    @property
    def dim(self):
        return self.a.shape[1]

    @property
    def degree(self):
        if np.any(self.B):
            return 2
        if np.any(self.a) or np.any(self.b):
            return 1
        return 0

    def _compatible(self, other):
        if not isinstance(other, LinearCharge):
            raise ContractViolation(f"unsupported functional {type(other).__name__}")
        if self.a.shape != other.a.shape or self.cell != other.cell:
            raise ContractViolation("functionals live on different slices")

    def __add__(self, other):
        self._compatible(other)
        return LinearCharge(
            self.const + other.const, self.a + other.a, self.b + other.b, self.B + other.B, self.cell
        )

    def __neg__(self):
        return LinearCharge(-self.const, -self.a, -self.b, -self.B, self.cell)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return LinearCharge(scalar * self.const, scalar * self.a, scalar * self.b, scalar * self.B, self.cell)

    __rmul__ = __mul__

    def max_abs(self):
        return float(
            max(abs(self.const), np.max(np.abs(self.a)), np.max(np.abs(self.b)), np.max(np.abs(self.B)))
        )


def poisson_bracket(F: LinearCharge, G: LinearCharge) -> LinearCharge:
    """{F, G} in closed form; degree 0 results are plain constants."""
    if not isinstance(F, LinearCharge):
        raise ContractViolation(f"unsupported functional {type(F).__name__}")
    F._compatible(G)
    const = F.cell * float(np.sum(F.a * G.b) - np.sum(F.b * G.a))
    a = F.a @ G.B.T - G.a @ F.B.T
    b = G.b @ F.B - F.b @ G.B
    B = G.B @ F.B - F.B @ G.B
    return LinearCharge(const, a, b, B, F.cell)


def evaluate(F: LinearCharge, ps: PhaseSlice):
    x, p = ps.flat()
    if x.shape != F.a.shape:
        raise ContractViolation("functional and slice disagree on the number of points")
    return F.const + ps.cell * float(np.sum(F.a * x) + np.sum(F.b * p) + np.sum((x @ F.B) * p))


def hamiltonian_flow(F: LinearCharge, ps: PhaseSlice):
    """({X, F}, {p, F}) per point, shaped like the slice fields."""
    x, p = ps.flat()
    dx = F.b + x @ F.B
    dp = -(F.a + p @ F.B.T)
    return dx.reshape(ps.xbar.shape), dp.reshape(ps.xbar.shape)


# --- charge constructors --------------------------------------------------------


def momentum_charge(bg: KKBackground, points, cell, alpha):
    """P^α = Σ π^α dσ."""
    F = LinearCharge.zero(points, bg.total_dim, cell)
    b = np.broadcast_to(bg.inverse_metric[alpha], F.b.shape).copy()
    return LinearCharge(0.0, F.a, b, F.B, cell)


def angular_charge(bg: KKBackground, points, cell, alpha, beta):
    """M^αβ = Σ (π^β X^α − π^α X^β) dσ."""
    ginv = bg.inverse_metric
    B = np.zeros((bg.total_dim, bg.total_dim))
    B[alpha] += ginv[beta]
    B[beta] -= ginv[alpha]
    F = LinearCharge.zero(points, bg.total_dim, cell)
    return LinearCharge(0.0, F.a, F.b, B, cell)


def position_charge(bg: KKBackground, points, cell, index, mu):
    """X_i^μ as a functional."""
    F = LinearCharge.zero(points, bg.total_dim, cell)
    a = F.a.copy()
    a[index, mu] = 1.0 / cell
    return LinearCharge(0.0, a, F.b, F.B, cell)


def lowered_momentum_charge(bg: KKBackground, points, cell, index, nu):
    """p_{iν} = (g π_i)_ν as a functional."""
    F = LinearCharge.zero(points, bg.total_dim, cell)
    b = F.b.copy()
    b[index, nu] = 1.0 / cell
    return LinearCharge(0.0, F.a, b, F.B, cell)


def raised_momentum_charge(bg: KKBackground, points, cell, index, mu):
    """π_i^μ as a functional."""
    F = LinearCharge.zero(points, bg.total_dim, cell)
    b = F.b.copy()
    b[index] = bg.inverse_metric[mu] / cell
    return LinearCharge(0.0, F.a, b, F.B, cell)


# --- Poincaré algebra -------------------------------------------------------------


def _mm_structure(bg, M, mu, nu, alpha, beta):
    g = bg.inverse_metric
    return (
        g[nu, alpha] * M[beta][mu]
        + g[mu, alpha] * M[nu][beta]
        + g[nu, beta] * M[mu][alpha]
        + g[mu, beta] * M[alpha][nu]
    )


def poincare_algebra_check(bg: KKBackground, points=8, cell=None):
    """
    Max closure residuals of {P, P}, {M, P} and {M, M} over all index tuples:
        {M^μν, P^α}  = g^μα P^ν − g^αν P^μ
        {M^μν, M^αβ} = g^να M^βμ + g^μα M^νβ + g^νβ M^μα + g^μβ M^αν
    """
    D = bg.total_dim
    cell = cell if cell is not None else 2.0 * np.pi / points
    g = bg.inverse_metric
    P = [momentum_charge(bg, points, cell, m) for m in range(D)]
    M = [[angular_charge(bg, points, cell, m, n) for n in range(D)] for m in range(D)]

    pp = mp = mm = 0.0
    for m, n in itertools.product(range(D), repeat=2):
        pp = max(pp, poisson_bracket(P[m], P[n]).max_abs())
    for mu, nu, alpha in itertools.product(range(D), repeat=3):
        expected = g[mu, alpha] * P[nu] - g[alpha, nu] * P[mu]
        mp = max(mp, (poisson_bracket(M[mu][nu], P[alpha]) - expected).max_abs())
    for mu, nu, alpha, beta in itertools.product(range(D), repeat=4):
        expected = _mm_structure(bg, M, mu, nu, alpha, beta)
        mm = max(mm, (poisson_bracket(M[mu][nu], M[alpha][beta]) - expected).max_abs())

    result = {"pp": pp, "mp": mp, "mm": mm, "max": max(pp, mp, mm)}
    logger.debug("poincare closure %s", result)
    return result
