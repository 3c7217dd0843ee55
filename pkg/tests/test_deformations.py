import numpy as np
import pytest
from numpy.testing import assert_allclose

from deformations.calculus import (
    DeformationField,
    deform_extrinsic,
    deform_intrinsic,
    inverse_identity_residual,
    linearized_eom_apply,
    trace_identity_residual,
)
from deformations.oracle import (
    EPS_MAX,
    align_normals,
    deformation_oracle,
    formula_values,
    oracle_sweep,
    random_deformation,
    relative_mismatch,
)
from utils.errors import ContractViolation


def _sine_bump(frames, index=0, amplitude=1.0):
    sigma = frames.grid.mesh()[-1]
    normal = np.zeros(frames.grid.shape + (frames.codim,))
    normal[..., index] = amplitude * np.sin(sigma)
    return DeformationField.normal_only(frames, normal)


def test_flat_sheet_bump_bends_the_sheet(frames_of):
    _, _, _, frames = frames_of("flat_sheet")
    sigma = frames.grid.mesh()[1]
    dK = deform_extrinsic(frames, _sine_bump(frames))
    assert_allclose(dK[..., 1, 1, 0], np.sin(sigma), atol=5e-4)
    assert np.max(np.abs(dK[..., 0, :, :])) < 1e-12
    assert np.max(np.abs(dK[..., 1:])) < 1e-12


def test_zero_deformation_changes_nothing(frames_of):
    _, _, _, frames = frames_of("static_loop", n=32)
    change = deform_intrinsic(frames, DeformationField.zero(frames))
    for value in (change.metric, change.inverse_metric, change.volume, change.tangents):
        assert np.max(np.abs(value)) == 0.0


def test_tangential_input_is_rejected_by_extrinsic(frames_of):
    _, _, _, frames = frames_of("static_loop", n=32)
    field = random_deformation(frames, seed=1, tangential=True)
    with pytest.raises(ContractViolation):
        deform_extrinsic(frames, field)


def test_curved_background_callback_is_rejected(frames_of):
    _, _, _, frames = frames_of("static_loop", n=32)
    field = _sine_bump(frames)
    with pytest.raises(ContractViolation):
        deform_extrinsic(frames, field, background_curvature=lambda f: np.ones(f.curvature.shape))


@pytest.mark.parametrize("name", ["static_loop", "random_smooth", "helix"])
def test_intrinsic_identities(frames_of, name):
    _, _, _, frames = frames_of(name, n=32)
    change = deform_intrinsic(frames, random_deformation(frames, seed=5, tangential=True))
    assert trace_identity_residual(frames, change) < 1e-4
    assert inverse_identity_residual(frames, change) < 1e-12


@pytest.mark.parametrize("name", ["static_loop", "helix"])
def test_formulas_match_the_finite_difference_oracle(frames_of, name):
    _, emb, bg, frames = frames_of(name)
    field = random_deformation(frames, seed=11)
    oracle = deformation_oracle(emb, bg, field.vector(frames), 1e-5, reference=frames)
    mismatch = relative_mismatch(frames, formula_values(frames, field), oracle)
    assert set(mismatch) >= {"metric", "inverse_metric", "volume", "curvature", "tangents"}
    assert max(mismatch.values()) < 1e-4


def test_oracle_rejects_out_of_range_eps(frames_of):
    _, emb, bg, frames = frames_of("static_loop", n=32)
    delta = random_deformation(frames).vector(frames)
    with pytest.raises(ContractViolation):
        deformation_oracle(emb, bg, delta, eps=10 * EPS_MAX)


def test_oracle_sweep_writes_csv(frames_of, tmp_path):
    _, emb, bg, frames = frames_of("static_loop", n=32)
    path = tmp_path / "oracle.csv"
    rows = oracle_sweep(emb, bg, _sine_bump(frames, amplitude=0.1), [1e-4, 1e-5], path=path)
    assert len(rows) == 2
    header = path.read_text().splitlines()[0]
    assert header == "eps,err_metric,err_inverse_metric,err_volume,err_curvature"


def test_align_normals_undoes_a_rotation():
    rng = np.random.default_rng(0)
    frame = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    angle = 0.3
    rot = np.array([[np.cos(angle), -np.sin(angle), 0.0], [np.sin(angle), np.cos(angle), 0.0], [0, 0, 1.0]])
    rotated = rot @ frame
    R = align_normals(frame, rotated)
    assert_allclose(R @ rotated, frame, atol=1e-12)


def test_linearized_eom_of_a_uniform_shift_on_the_flat_sheet(frames_of):
    _, _, _, frames = frames_of("flat_sheet")
    phi = np.ones(frames.grid.shape + (frames.codim,))
    assert np.max(np.abs(linearized_eom_apply(frames, phi))) < 1e-12
    with pytest.raises(ContractViolation):
        linearized_eom_apply(frames, phi[..., :1])


def test_plane_wave_solves_the_linearized_eom_on_the_flat_sheet(frames_of):
    _, _, _, frames = frames_of("flat_sheet")
    tau, sigma = frames.grid.mesh()
    wave = np.zeros(frames.grid.shape + (frames.codim,))
    wave[..., 0] = np.sin(sigma - tau)
    assert np.max(np.abs(linearized_eom_apply(frames, wave))) < 1e-10

    standing = np.zeros_like(wave)
    standing[..., 0] = np.sin(sigma)
    assert np.max(np.abs(linearized_eom_apply(frames, standing))) > 0.5


@pytest.mark.parametrize("name", ["chiral_loop", "helix"])
def test_linearized_eom_is_the_variation_of_the_mean_curvature(frames_of, name):
    _, _, _, frames = frames_of(name, n=32)
    field = random_deformation(frames, seed=7)
    d_inverse = deform_intrinsic(frames, field).inverse_metric
    dK = deform_extrinsic(frames, field)
    variation = np.einsum("...ab,...abI->...I", d_inverse, frames.curvature) + np.einsum(
        "...ab,...abI->...I", frames.inverse_metric, dK
    )
    eom = linearized_eom_apply(frames, field.normal)
    scale = max(1.0, float(np.max(np.abs(eom))))
    assert np.max(np.abs(eom + variation)) / scale < 1e-10


def _oracle_step_ratio(name, key, central, frames_of):
    _, emb, bg, frames = frames_of(name)
    delta = random_deformation(frames, seed=3, amplitude=0.5).vector(frames)
    values = [
        frames.interior(deformation_oracle(emb, bg, delta, eps, central=central, reference=frames)[key])
        for eps in (1e-3, 5e-4, 2.5e-4)
    ]
    return float(np.max(np.abs(values[0] - values[1])) / np.max(np.abs(values[1] - values[2])))


@pytest.mark.parametrize("key", ["volume", "curvature"])
def test_central_oracle_error_is_second_order_in_eps(frames_of, key):
    ratio = _oracle_step_ratio("static_loop", key, True, frames_of)
    assert 3.5 < ratio < 4.5


def test_forward_oracle_error_is_first_order_in_eps(frames_of):
    ratio = _oracle_step_ratio("static_loop", "metric", False, frames_of)
    assert ratio == pytest.approx(2.0, rel=1e-3)
