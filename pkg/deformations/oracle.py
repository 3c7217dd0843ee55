"""
Finite-difference deformation oracle: rebuild the geometry of X̄ ± ε δX̄ and
difference it, with the deformed normals rotated onto the undeformed frame.
"""

import logging

import numpy as np

from geometry.frames import FrameField, build_frames
from utils.errors import ContractViolation
from utils.output import write_csv
from .calculus import DeformationField, deform_extrinsic, deform_intrinsic

logger = logging.getLogger(__name__)

EPS_MIN = 1e-7
EPS_MAX = 1e-3
DEFAULT_EPS = 1e-5

QUANTITIES = ("metric", "inverse_metric", "volume", "curvature")


def align_normals(reference, normals):
    """
    Orthogonal R maximizing Σ_I n^I·(R n')^I pointwise (Procrustes):
    M_IJ = n^I·n'^J = U Σ Vᵀ, R = U Vᵀ.
    """
    overlap = np.einsum("...Im,...Jm->...IJ", reference, normals)
    u, _, vt = np.linalg.svd(overlap)
    return u @ vt


def _sample(emb, bg, delta, eps, reference: FrameField):
    frames = build_frames(emb.deformed(delta, eps), bg)
    g = bg.metric
    rotation = align_normals(
        np.einsum("...Im,mn->...In", reference.normals, g), frames.normals
    )
    curvature = np.einsum("...IJ,...abJ->...abI", rotation, frames.curvature)
    return {
        "metric": frames.metric,
        "inverse_metric": frames.inverse_metric,
        "volume": frames.sqrt_det,
        "curvature": curvature,
        "tangents": frames.tangents,
    }


def deformation_oracle(emb, bg, delta, eps=DEFAULT_EPS, central=True, reference=None):
    """
    Finite-difference first-order changes of Γ_ab, Γ^ab, √(−Γ), K_ab^I and e_a
    under X̄ → X̄ + ε δX̄. Forward differences when central is False.
    """
    if not EPS_MIN <= eps <= EPS_MAX:
        raise ContractViolation(f"eps {eps:g} outside [{EPS_MIN:g}, {EPS_MAX:g}]")
    if reference is None:
        reference = build_frames(emb, bg)
    plus = _sample(emb, bg, delta, eps, reference)
    if central:
        minus = _sample(emb, bg, delta, -eps, reference)
        return {key: (plus[key] - minus[key]) / (2.0 * eps) for key in plus}
    base = _sample(emb, bg, delta, 0.0, reference)
    return {key: (plus[key] - base[key]) / eps for key in plus}


def formula_values(frames: FrameField, field: DeformationField):
    """The calculus side of the comparison, keyed like the oracle."""
    intrinsic = deform_intrinsic(frames, field)
    values = {
        "metric": intrinsic.metric,
        "inverse_metric": intrinsic.inverse_metric,
        "volume": intrinsic.volume,
        "tangents": intrinsic.tangents,
    }
    if not np.any(field.tangential != 0.0):
        values["curvature"] = deform_extrinsic(frames, field)
    return values


def relative_mismatch(frames: FrameField, formula, oracle):
    """Max |formula − oracle| / max(1, max |oracle|) per shared quantity, interior only."""
    out = {}
    for key in formula:
        if key not in oracle:
            continue
        a = frames.interior(formula[key])
        b = frames.interior(oracle[key])
        scale = max(1.0, float(np.max(np.abs(b))))
        out[key] = float(np.max(np.abs(a - b))) / scale
    return out


def oracle_sweep(emb, bg, field: DeformationField, eps_values, central=True, path=None):
    """
    Formula-vs-oracle mismatch over a list of ε. Rows are
    (ε, err_metric, err_inverse_metric, err_volume, err_curvature); written
    as CSV when path is given.
    """
    frames = build_frames(emb, bg)
    formula = formula_values(frames, field)
    delta = field.vector(frames)
    rows = []
    for eps in eps_values:
        oracle = deformation_oracle(emb, bg, delta, eps, central=central, reference=frames)
        errors = relative_mismatch(frames, formula, oracle)
        rows.append([eps] + [errors.get(q, float("nan")) for q in QUANTITIES])
        logger.debug("oracle eps=%g errors=%s", eps, errors)
    if path is not None:
        write_csv(path, ["eps"] + [f"err_{q}" for q in QUANTITIES], rows)
    return rows


def random_deformation(frames: FrameField, seed=0, amplitude=0.05, modes=1, tangential=False):
    """
    Seeded smooth deformation: a spacetime vector field of low harmonics of
    the grid coordinates, projected onto the frame. The normal multiplet
    follows the pointwise frame, so δX̄ itself stays smooth.
    """
    rng = np.random.default_rng(seed)
    coords = frames.grid.mesh()
    D = frames.background.total_dim
    vector = np.zeros(frames.grid.shape + (D,))
    for comp in range(D):
        for _ in range(modes + 1):
            wave = rng.integers(0, modes + 1, size=len(coords))
            phase = sum(k * x for k, x in zip(wave, coords)) + rng.uniform(0.0, 2.0 * np.pi)
            vector[..., comp] += amplitude * rng.standard_normal() * np.cos(phase)

    field = DeformationField.from_vector(frames, vector)
    if tangential:
        return field
    return DeformationField.normal_only(frames, field.normal)
