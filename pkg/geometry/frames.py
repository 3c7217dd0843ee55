"""
Induced geometry of an extended embedding: tangents, induced metric, normal
frame, extrinsic curvature K_ab^I, twist ω_a^IJ and Christoffel symbols.

Index layout of every per-point array (grid axes first):
    tangents          (..., a, μ̄)
    tangent_derivs    (..., a, b, μ̄)    ∂_a e_b, symmetric in (a, b)
    normals           (..., I, μ̄)
    normal_gradients  (..., a, I, μ̄)    ∇̃_a n^I
    christoffels      (..., a, b, c)     Γ_ab^c
    curvature         (..., a, b, I)     K_ab^I = -(∂_a e_b)·n^I
    twist             (..., a, I, J)     ω_a^IJ
Normal indices are raised and lowered with δ_IJ.

The normal frame is pivoted point by point, so neighbouring points may hold
differently rotated frames. Every derivative of a normal-index field carries
the neighbours' components over with the orthogonal links between their
frames before the finite-difference stencil is applied.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from utils.errors import (
    ContractViolation,
    DegenerateMetricError,
    FrameConstructionError,
    NotTimelikeError,
)
from .background import KKBackground
from .embedding import ExtendedEmbedding
from .grid import WorldvolumeGrid
from .tolerances import TOL_DEGENERATE, TOL_GAUGE, TOL_PIVOT

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InducedMetric:
    metric: np.ndarray
    inverse: np.ndarray
    det: np.ndarray
    base_metric: np.ndarray
    base_det: np.ndarray
    base_regular: np.ndarray
    chirality: np.ndarray
    chirality_from_det: np.ndarray
    det_identity_residual: float


@dataclass(frozen=True)
class FrameField:
    grid: WorldvolumeGrid
    background: KKBackground
    tangents: np.ndarray
    tangent_derivs: np.ndarray
    induced: InducedMetric
    normals: np.ndarray
    links: Tuple[Tuple[np.ndarray, ...], ...]
    normal_gradients: np.ndarray
    christoffels: np.ndarray
    curvature: np.ndarray
    twist: np.ndarray
    kk_index: Optional[int] = None

    @property
    def metric(self):
        return self.induced.metric

    @property
    def inverse_metric(self):
        return self.induced.inverse

    @property
    def sqrt_det(self):
        return np.sqrt(np.abs(self.induced.det))

    @property
    def wv_dim(self):
        return self.tangents.shape[-2]

    @property
    def codim(self):
        return self.normals.shape[-2]

    @property
    def mean_curvature(self):
        """K^I = Γ^ab K_ab^I."""
        return np.einsum("...ab,...abI->...I", self.inverse_metric, self.curvature)

    def interior(self, field):
        """Restrict a field to the levels where stacked τ-derivatives are centered."""
        time = self.grid.time
        if time is None or time.periodic:
            return field
        return field[2:-2] if time.levels >= 5 else field[1:-1]


# --- tangents -----------------------------------------------------------------


def _check_mode(emb, bg):
    if emb.total_dim != bg.total_dim:
        raise ContractViolation(
            f"embedding has {emb.total_dim} components, background {bg.total_dim}"
        )
    if bg.riemannian and emb.grid.has_time:
        raise ContractViolation("Riemannian analysis mode takes a grid without τ axis")
    if not bg.riemannian and not emb.grid.has_time:
        raise ContractViolation("timelike mode needs a grid with a τ axis")


def tangent_basis(emb: ExtendedEmbedding, bg: KKBackground):
    """
    e_a^μ̄ = (e_a^μ, φ,_a). Rows the embedding supplies exactly (velocity,
    spatial tangents) are used as given; the rest are differenced.
    """
    _check_mode(emb, bg)
    grid = emb.grid
    xbar = emb.xbar
    offset = 1 if grid.has_time else 0
    rows = []
    for ax in range(grid.ndim):
        if ax == 0 and grid.has_time and emb.velocity is not None:
            rows.append(emb.velocity)
            continue
        if ax >= offset and emb.spatial_tangents is not None:
            rows.append(emb.spatial_tangents[..., ax - offset, :])
            continue
        w = None if emb.windings is None else emb.windings[ax]
        rows.append(grid.derivative(xbar, ax, w))
    return np.stack(rows, axis=-2)


def tangent_derivatives(grid: WorldvolumeGrid, tangents):
    """∂_a e_b, symmetrized over (a, b)."""
    d = grid.gradient(tangents)
    return 0.5 * (d + np.swapaxes(d, -2, -3))


# --- induced metric -------------------------------------------------------------


def adjugate(M):
    """Adjugate of a stack of small square matrices, from cofactors."""
    m = M.shape[-1]
    if m == 1:
        return np.ones_like(M)
    adj = np.empty_like(M)
    for i in range(m):
        for j in range(m):
            minor = np.delete(np.delete(M, i, axis=-2), j, axis=-1)
            adj[..., j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def induced_metric(tangents, bg: KKBackground):
    """
    Γ_ab, Γ^ab, det Γ, γ_ab and ϖ = γ^ab φ,_a φ,_b.

    The determinant identity det Γ = det γ + g44 φ,_a adj(γ)^ab φ,_b is
    checked without dividing by det γ, so it holds where γ_ab degenerates.
    There ϖ falls back to Sherman-Morrison, q/(1 - g44 q) with q = Γ^ab φ,_a φ,_b.
    """
    g = bg.metric
    metric = np.einsum("...am,mn,...bn->...ab", tangents, g, tangents)
    det = np.linalg.det(metric)

    if np.any(np.abs(det) < TOL_DEGENERATE):
        raise DegenerateMetricError(
            f"induced metric degenerate: min |det Γ| = {np.min(np.abs(det)):.3e}"
        )
    if bg.riemannian and np.any(det < 0):
        raise NotTimelikeError("Riemannian analysis mode needs det Γ > 0")
    if not bg.riemannian and np.any(det > 0):
        raise NotTimelikeError("worldvolume is not timelike: det Γ > 0 somewhere")

    inverse = np.linalg.inv(metric)
    dphi = tangents[..., -1]
    base_metric = metric - bg.g44 * np.einsum("...a,...b->...ab", dphi, dphi)
    base_det = np.linalg.det(base_metric)
    contracted = np.einsum("...ab,...a,...b->...", adjugate(base_metric), dphi, dphi)

    regular = np.abs(base_det) > TOL_DEGENERATE
    q = np.einsum("...ab,...a,...b->...", inverse, dphi, dphi)
    with np.errstate(divide="ignore", invalid="ignore"):
        sherman_morrison = q / (1.0 - bg.g44 * q)
        direct = np.where(regular, contracted / base_det, sherman_morrison)
        ratio = (det / base_det - 1.0) / bg.g44
    from_det = np.where(regular, ratio, direct)

    residual = float(
        np.max(np.abs(det - base_det - bg.g44 * contracted)) / np.max(np.abs(det))
    )
    if not np.all(regular):
        logger.info("γ_ab degenerate at %d points", int(np.sum(~regular)))
    logger.debug("det identity residual %.3e", residual)
    return InducedMetric(
        metric=metric,
        inverse=inverse,
        det=det,
        base_metric=base_metric,
        base_det=base_det,
        base_regular=regular,
        chirality=direct,
        chirality_from_det=from_det,
        det_identity_residual=residual,
    )


# --- normal frame ----------------------------------------------------------------


def kk_normal_ansatz(tangents, induced: InducedMetric, bg: KKBackground):
    """
    √g44 (e^μ_a φ'^a, -g^44) with φ'^a = γ^ab φ,_b; zero where γ_ab is singular.
    Its self-norm is 1 + g44 ϖ.
    """
    m = induced.metric.shape[-1]
    regular = induced.base_regular
    guarded = np.where(regular[..., None, None], induced.base_metric, np.eye(m))
    dphi_up = np.einsum("...ab,...b->...a", np.linalg.inv(guarded), tangents[..., -1])
    root = np.sqrt(bg.g44)
    base = root * np.einsum("...am,...a->...m", tangents[..., :-1], dphi_up)
    kk = np.full(base.shape[:-1] + (1,), -root / bg.g44)
    ansatz = np.concatenate([base, kk], axis=-1)
    return np.where(regular[..., None], ansatz, 0.0)


def _project_out_tangents(v, tangents, induced, g):
    coeff = np.einsum("...bm,mn,...n->...b", tangents, g, v)
    up = np.einsum("...ab,...b->...a", induced.inverse, coeff)
    return v - np.einsum("...a,...am->...m", up, tangents)


def _project_out(v, accepted, g):
    for n in accepted:
        v = v - np.einsum("...m,mn,...n->...", n, g, v)[..., None] * n
    return v


def _norm(v, g):
    return np.sqrt(np.maximum(np.einsum("...m,mn,...n->...", v, g, v), 0.0))


def normal_frame(emb: ExtendedEmbedding, tangents, bg: KKBackground, induced=None):
    """
    Deterministic pivoted construction of the k = total_dim - (d+1) normals.

    Candidates are the KK ansatz followed by the D coordinate axes, each
    projected off the tangents. Candidates whose residual stays above
    TOL_GAUGE on the whole grid are taken first, in one order for every
    point (highest grid-minimum residual first, ties to the lower index).
    The remaining normals are pivoted at each point: largest residual first,
    ties to the lower candidate index. The last normal is signed so that
    (e_a, n^I) is positively oriented.

    Returns (normals, kk_index); kk_index is the slot of the normalized
    ansatz, or None when the ansatz is not a grid-wide candidate.
    """
    if induced is None:
        induced = induced_metric(tangents, bg)
    g = bg.metric
    D = bg.total_dim
    m = tangents.shape[-2]
    k = D - m
    if k < 1:
        raise FrameConstructionError("worldvolume fills the target: codimension 0")

    shape = tangents.shape[:-2]
    candidates = [kk_normal_ansatz(tangents, induced, bg)]
    for axis in range(D):
        e = np.zeros(D)
        e[axis] = 1.0
        candidates.append(np.broadcast_to(e, shape + (D,)))
    projected = [_project_out_tangents(c, tangents, induced, g) for c in candidates]

    accepted = []
    used = []
    while len(accepted) < k - 1:
        best, best_score, best_vec = None, -1.0, None
        for idx, vec in enumerate(projected):
            if idx in used:
                continue
            r = _project_out(vec, accepted, g)
            score = float(np.min(_norm(r, g)))
            if score > best_score + TOL_PIVOT:
                best, best_score, best_vec = idx, score, r
        if best_score <= TOL_GAUGE:
            break
        accepted.append(best_vec / _norm(best_vec, g)[..., None])
        used.append(best)

    remaining = [i for i in range(len(projected)) if i not in used]
    residuals = np.stack([_project_out(projected[i], accepted, g) for i in remaining], axis=-2)
    while len(accepted) < k:
        norms = _norm(residuals, g)
        top = np.max(norms, axis=-1, keepdims=True)
        pick = np.argmax(norms >= top - TOL_PIVOT, axis=-1)
        best_norm = np.take_along_axis(norms, pick[..., None], axis=-1)[..., 0]
        if np.min(best_norm) <= TOL_PIVOT:
            raise FrameConstructionError(
                f"only {len(accepted)} of {k} normals found "
                f"(best residual {np.min(best_norm):.3e})"
            )
        n = np.take_along_axis(residuals, pick[..., None, None], axis=-2)[..., 0, :]
        n = n / best_norm[..., None]
        residuals = residuals - np.einsum("...cm,mn,...n->...c", residuals, g, n)[..., None] * n[..., None, :]
        accepted.append(n)
    pointwise = k - len(used)

    basis = np.concatenate([tangents] + [n[..., None, :] for n in accepted], axis=-2)
    accepted[-1] = accepted[-1] * np.sign(np.linalg.det(basis))[..., None]

    kk_index = used.index(0) if 0 in used else None
    logger.debug("normal frame: %d grid-wide, %d pointwise normals", len(used), pointwise)
    return np.stack(accepted, axis=-2), kk_index


def normal_links(grid: WorldvolumeGrid, normals, bg: KKBackground):
    """
    Per grid axis and stencil shift, the orthogonal U^IJ carrying normal
    components at p + shift into the frame at p: the polar factor of
    n^I(p)·n^J(p + shift).
    """
    lowered = np.einsum("...Im,mn->...In", normals, bg.metric)
    links = []
    for ax in range(grid.ndim):
        row = []
        for shift, _ in grid.stencil(ax):
            overlap = np.einsum("...Im,...Jm->...IJ", lowered, grid.shifted(normals, ax, shift))
            u, _, vt = np.linalg.svd(overlap)
            row.append(u @ vt)
        links.append(tuple(row))
    return tuple(links)


def _apply_link(field, link, axis, grid_ndim):
    """f^I → U^IJ f^J on one trailing slot of a per-point field."""
    moved = np.moveaxis(field, axis, -1)
    extra = moved.ndim - 1 - grid_ndim
    op = link.reshape(link.shape[:grid_ndim] + (1,) * extra + link.shape[grid_ndim:])
    return np.moveaxis(np.einsum("...IJ,...J->...I", op, moved), -1, axis)


def transported_gradient(field, grid: WorldvolumeGrid, links, normal_slots):
    """
    Stencil derivative along every grid axis (stacked right after the grid
    axes) with the normal slots of each neighbour carried into the local
    frame first. With no normal slots this is the plain gradient.
    """
    field = np.asarray(field, dtype=float)
    base = grid.ndim
    parts = []
    for ax in range(base):
        total = np.zeros_like(field)
        for (shift, weight), link in zip(grid.stencil(ax), links[ax]):
            moved = grid.shifted(field, ax, shift)
            for slot in normal_slots:
                moved = _apply_link(moved, link, base + slot, base)
            total = total + grid.stencil_weight(weight, ax, field.ndim) * moved
        parts.append(total)
    return np.stack(parts, axis=base)


# --- curvature, connection --------------------------------------------------------


def christoffel_symbols(tangents, tangent_derivs, induced: InducedMetric, bg: KKBackground):
    """Γ_ab^c = Γ^cd (∂_a e_b · e_d) on the flat target."""
    lowered = np.einsum("...abm,mn,...dn->...abd", tangent_derivs, bg.metric, tangents)
    return np.einsum("...abd,...cd->...abc", lowered, induced.inverse)


def extrinsic_curvature(tangent_derivs, normals, bg: KKBackground):
    """K_ab^I = -(∂_a e_b)·n^I, stored symmetric."""
    K = -np.einsum("...abm,mn,...In->...abI", tangent_derivs, bg.metric, normals)
    return 0.5 * (K + np.swapaxes(K, -2, -3))


def twist_potential(grid: WorldvolumeGrid, links):
    """
    ω_a^IJ = (∂_a n^I)·n^J of the stored frame, read off the links:
    Σ_shift w·U^JI, antisymmetrized over (I, J).
    """
    parts = []
    for ax in range(grid.ndim):
        total = 0.0
        for (_, weight), link in zip(grid.stencil(ax), links[ax]):
            total = total + grid.stencil_weight(weight, ax, link.ndim) * link
        parts.append(total)
    s = np.stack(parts, axis=grid.ndim)
    return 0.5 * (np.swapaxes(s, -1, -2) - s)


def build_frames(emb: ExtendedEmbedding, bg: KKBackground) -> FrameField:
    """Full induced geometry of an embedding."""
    grid = emb.grid
    tangents = tangent_basis(emb, bg)
    induced = induced_metric(tangents, bg)
    normals, kk_index = normal_frame(emb, tangents, bg, induced)
    d_tangents = tangent_derivatives(grid, tangents)
    links = normal_links(grid, normals, bg)
    frames = FrameField(
        grid=grid,
        background=bg,
        tangents=tangents,
        tangent_derivs=d_tangents,
        induced=induced,
        normals=normals,
        links=links,
        normal_gradients=transported_gradient(normals, grid, links, (0,)),
        christoffels=christoffel_symbols(tangents, d_tangents, induced, bg),
        curvature=extrinsic_curvature(d_tangents, normals, bg),
        twist=twist_potential(grid, links),
        kk_index=kk_index,
    )
    logger.debug(
        "frames built on grid %s: codim %d, kk_index %s", grid.shape, frames.codim, kk_index
    )
    return frames


# --- diagnostics -------------------------------------------------------------------


def frame_axiom_residuals(frames: FrameField):
    """Max |n^I·e_a| and max |n^I·n^J - δ^IJ|."""
    g = frames.background.metric
    ortho = np.einsum("...Im,mn,...an->...Ia", frames.normals, g, frames.tangents)
    gram = np.einsum("...Im,mn,...Jn->...IJ", frames.normals, g, frames.normals)
    return float(np.max(np.abs(ortho))), float(np.max(np.abs(gram - np.eye(frames.codim))))


def reconstruct(frames: FrameField, vectors):
    """V = (V·e^a) e_a + (V·n^I) n_I for per-point spacetime vectors."""
    g = frames.background.metric
    coeff = np.einsum("...am,mn,...n->...a", frames.tangents, g, vectors)
    up = np.einsum("...ab,...b->...a", frames.inverse_metric, coeff)
    normal = np.einsum("...Im,mn,...n->...I", frames.normals, g, vectors)
    return np.einsum("...a,...am->...m", up, frames.tangents) + np.einsum(
        "...I,...Im->...m", normal, frames.normals
    )


def gauss_weingarten_residual(frames: FrameField):
    """
    Max-norm residuals of ∂_a e_b - Γ_ab^c e_c + K_ab^I n_I and
    ∇̃_a n^I - K_a^{bI} e_b.
    """
    r_tangent = (
        frames.tangent_derivs
        - np.einsum("...abc,...cm->...abm", frames.christoffels, frames.tangents)
        + np.einsum("...abI,...Im->...abm", frames.curvature, frames.normals)
    )
    mixed = np.einsum("...bc,...acI->...abI", frames.inverse_metric, frames.curvature)
    r_normal = frames.normal_gradients - np.einsum("...abI,...bm->...aIm", mixed, frames.tangents)
    return (
        float(np.max(np.abs(frames.interior(r_tangent)))),
        float(np.max(np.abs(frames.interior(r_normal)))),
    )


def tilde_covariant_derivative(field, frames: FrameField, indices: str):
    """
    ∇̃_a of a tensor field; the derivative index is placed right after the
    grid axes.

    indices describes the field's trailing axes: 'u' upper worldvolume,
    'l' lower worldvolume, 'n' normal frame index.
    """
    grid = frames.grid
    m, k = frames.wv_dim, frames.codim
    field = np.asarray(field, dtype=float)
    if field.ndim != grid.ndim + len(indices):
        raise ContractViolation(
            f"field rank {field.ndim - grid.ndim} does not match indices '{indices}'"
        )
    for pos, kind in enumerate(indices):
        size = field.shape[grid.ndim + pos]
        expected = {"u": m, "l": m, "n": k}.get(kind)
        if expected is None:
            raise ContractViolation(f"unknown index kind '{kind}'")
        if size != expected:
            raise ContractViolation(
                f"index {pos} ('{kind}') has size {size}, expected {expected}"
            )

    normal_slots = [pos for pos, kind in enumerate(indices) if kind == "n"]
    result = transported_gradient(field, grid, frames.links, normal_slots)
    base = grid.ndim
    for pos, kind in enumerate(indices):
        if kind == "n":
            continue
        moved = np.moveaxis(field, base + pos, -1)
        rest = moved.shape[base:-1]
        flat = moved.reshape(moved.shape[:base] + (-1, moved.shape[-1]))
        if kind == "u":
            corr = np.einsum("...adc,...rd->...arc", frames.christoffels, flat)
        else:
            corr = -np.einsum("...acd,...rd->...arc", frames.christoffels, flat)
        corr = corr.reshape(corr.shape[: base + 1] + rest + (corr.shape[-1],))
        result = result + np.moveaxis(corr, -1, base + 1 + pos)
    return result
