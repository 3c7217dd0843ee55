"""
Verification harness: static checks (`verify`), convergence sweeps
(`sweep`) and the acceptance checks applied to an evolution run.
"""

import logging
import time
from pathlib import Path

import numpy as np

from charges.brackets import (
    angular_charge,
    hamiltonian_flow,
    lowered_momentum_charge,
    poincare_algebra_check,
    poisson_bracket,
    position_charge,
)
from charges.canonical import PhaseSlice, momentum_density_and_divergence, phase_slice, total_charges
from deformations.calculus import (
    deform_intrinsic,
    inverse_identity_residual,
    trace_identity_residual,
)
from deformations.oracle import (
    deformation_oracle,
    formula_values,
    random_deformation,
    relative_mismatch,
)
from dynamics.evolution import normal_trace
from geometry.frames import (
    build_frames,
    frame_axiom_residuals,
    gauss_weingarten_residual,
    reconstruct,
    tilde_covariant_derivative,
)
from geometry.grid import WorldvolumeGrid
from scenarios.builders import build_scenario, sphere_offset
from stress.hamiltonians import CurvatureQuadratic, NambuGoto, density_from_name
from stress.multipliers import (
    eom_from_stress,
    solve_multipliers,
    stationarity_residual,
    stress_conservation_residual,
)
from utils.errors import ChiralKKError
from utils.output import dump_frames, dump_vectors
from utils.report import RunReport

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = {
    "frame_orthogonality": 1e-10,
    "frame_orthonormality": 1e-10,
    "frame_completeness": 1e-10,
    "det_identity": 1e-10,
    "chirality": 1e-8,
    "chirality_violation": 1e-2,
    "chirality_two_ways": 1e-8,
    "run_chirality": 1e-8,
    "gauss_weingarten": 1e-4,
    "tilde_identity": 1e-12,
    "deformation_oracle": 1e-4,
    "deformation_trace": 1e-4,
    "deformation_inverse": 1e-12,
    "algebra_closure": 1e-10,
    "fundamental_brackets": 1e-12,
    "lorentz_flow": 1e-12,
    "charge_translation": 1e-10,
    "partials": 1e-7,
    "multiplier_stationarity": 1e-10,
    "multiplier_cross_check": 1e-4,
    "stress_momentum": 1e-12,
    "eom_equivalence": 1e-12,
    "eom": 1e-5,
    "momentum_divergence": 1e-5,
    "stress_divergence": 1e-5,
    "base_normal_trace": 1e-5,
    "kk_wave": 1e-5,
    "conservation_P": 1e-6,
    "conservation_M": 1e-6,
    "constraints": 1e-6,
    "energy_drift": 1e-3,
    "run_eom": 1e-4,
    "run_divergence": 1e-4,
    "order": 1.8,
}

EPS = 1e-5
PARTIALS_SAMPLE = 64


class _Thresholds:
    def __init__(self, cfg, scale):
        self._cfg = cfg
        self._scale = scale

    def unscaled(self, name):
        return self._cfg.thresholds.get(name, DEFAULT_THRESHOLDS[name])

    def __call__(self, name):
        return self.unscaled(name) * self._scale


def _relative(diff, ref):
    return float(np.max(np.abs(diff))) / max(1.0, float(np.max(np.abs(ref))))


def random_slice(bg, n, seed):
    """Kinematic slice with seeded positions and momenta."""
    rng = np.random.default_rng(seed)
    grid = WorldvolumeGrid(spatial=(n,))
    shape = grid.shape + (bg.total_dim,)
    return PhaseSlice(grid, bg, rng.standard_normal(shape), rng.standard_normal(shape))


def fundamental_bracket_residual(bg, points, cell):
    """Max deviation of {X_i, X_j}, {p_i, p_j}, {X_i^μ, p_jν} from 0 and δ^μ_ν δ_ij/dσ."""
    D = bg.total_dim
    worst = 0.0
    for i in range(min(points, 2)):
        for j in range(min(points, 2)):
            for mu in range(D):
                for nu in range(D):
                    X_i = position_charge(bg, points, cell, i, mu)
                    X_j = position_charge(bg, points, cell, j, nu)
                    p_i = lowered_momentum_charge(bg, points, cell, i, mu)
                    p_j = lowered_momentum_charge(bg, points, cell, j, nu)
                    expected = (1.0 / cell) if (i == j and mu == nu) else 0.0
                    xp = poisson_bracket(X_i, p_j)
                    worst = max(
                        worst,
                        poisson_bracket(X_i, X_j).max_abs(),
                        poisson_bracket(p_i, p_j).max_abs(),
                        abs(xp.const - expected) * cell,
                        np.max(np.abs(xp.a)),
                        np.max(np.abs(xp.b)),
                    )
    return worst


def lorentz_flow_residual(ps: PhaseSlice):
    """{X, M^αβ} against the infinitesimal rotation X^α g^βμ − X^β g^αμ."""
    bg = ps.background
    g = bg.inverse_metric
    worst = 0.0
    for alpha in range(bg.total_dim):
        for beta in range(alpha + 1, bg.total_dim):
            M = angular_charge(bg, ps.points, ps.cell, alpha, beta)
            dx, _ = hamiltonian_flow(M, ps)
            expected = ps.xbar[..., alpha, None] * g[beta] - ps.xbar[..., beta, None] * g[alpha]
            worst = max(worst, _relative(dx - expected, ps.xbar))
    return worst


def _geometry_checks(report, frames, cfg, thr, seed):
    ortho, orthonormal = frame_axiom_residuals(frames)
    report.add("frame_orthogonality", ortho, thr("frame_orthogonality"))
    report.add("frame_orthonormality", orthonormal, thr("frame_orthonormality"))

    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal(frames.tangents.shape[:-2] + (frames.background.total_dim,))
    report.add(
        "frame_completeness",
        _relative(reconstruct(frames, vectors) - vectors, vectors),
        thr("frame_completeness"),
    )
    report.add("det_identity", frames.induced.det_identity_residual, thr("det_identity"))

    chirality = frames.interior(frames.induced.chirality)
    if cfg.chiral is True:
        report.add("chirality", float(np.max(np.abs(chirality))), thr("chirality"))
    elif cfg.chiral is False:
        report.add(
            "chirality_violation",
            float(np.max(np.abs(chirality))),
            thr.unscaled("chirality_violation"),
            comparison=">=",
        )
    induced = frames.induced
    regular = frames.interior(induced.base_regular)
    two_ways = frames.interior(induced.chirality - induced.chirality_from_det)[regular]
    if two_ways.size:
        report.add("chirality_two_ways", _relative(two_ways, chirality), thr("chirality_two_ways"))

    r_t, r_n = gauss_weingarten_residual(frames)
    report.add("gauss_weingarten", max(r_t, r_n), thr("gauss_weingarten"))

    identity = np.broadcast_to(np.eye(frames.codim), frames.grid.shape + (frames.codim, frames.codim))
    report.add(
        "tilde_identity",
        float(np.max(np.abs(tilde_covariant_derivative(identity, frames, "nn")))),
        thr("tilde_identity"),
    )


def _deformation_checks(report, emb, bg, frames, thr, seed):
    normal = random_deformation(frames, seed=seed)
    oracle = deformation_oracle(emb, bg, normal.vector(frames), EPS, central=True, reference=frames)
    mismatch = relative_mismatch(frames, formula_values(frames, normal), oracle)
    report.add("deformation_oracle", max(mismatch.values()), thr("deformation_oracle"))

    mixed = random_deformation(frames, seed=seed + 1, tangential=True)
    intrinsic = deform_intrinsic(frames, mixed)
    report.add("deformation_trace", trace_identity_residual(frames, intrinsic), thr("deformation_trace"))
    report.add(
        "deformation_inverse", inverse_identity_residual(frames, intrinsic), thr("deformation_inverse")
    )


def _bracket_checks(report, emb, bg, frames, cfg, thr, seed):
    closure = poincare_algebra_check(bg)
    report.add("algebra_closure", closure["max"], thr("algebra_closure"))
    ps = random_slice(bg, 8, seed)
    report.add(
        "fundamental_brackets",
        fundamental_bracket_residual(bg, ps.points, ps.cell),
        thr("fundamental_brackets"),
    )
    report.add("lorentz_flow", lorentz_flow_residual(ps), thr("lorentz_flow"))

    if frames.grid.has_time:
        cut = phase_slice(frames, emb.xbar, cfg.mu0)
        charges = total_charges(cut)
        shift = np.arange(1, bg.total_dim + 1, dtype=float)
        moved = total_charges(cut.translated(shift))
        P = charges.momentum
        expected = charges.angular + np.outer(shift, P) - np.outer(P, shift)
        report.add(
            "charge_translation",
            max(_relative(moved.angular - expected, expected), _relative(moved.momentum - P, P)),
            thr("charge_translation"),
        )


def _stress_checks(report, frames, cfg, thr):
    m, k = frames.wv_dim, frames.codim
    metric = frames.metric.reshape(-1, m, m)[:PARTIALS_SAMPLE]
    K = frames.curvature.reshape(-1, m, m, k)[:PARTIALS_SAMPLE]
    report.add("partials", CurvatureQuadratic(cfg.mu0, cfg.alpha).validate_partials(metric, K), thr("partials"))

    density = density_from_name(cfg.density, cfg.mu0, cfg.alpha)
    ms = solve_multipliers(frames, density)
    quadratic = CurvatureQuadratic(cfg.mu0, cfg.alpha)
    stationary = stationarity_residual(frames, solve_multipliers(frames, quadratic, check=False))
    report.add("multiplier_stationarity", stationary["substitution"], thr("multiplier_stationarity"))
    cross = max(stationary["normal"], stationary["force"])
    report.add("multiplier_cross_check", cross, thr("multiplier_cross_check"))

    dng = ms if isinstance(density, NambuGoto) else solve_multipliers(frames, NambuGoto(cfg.mu0))
    P, momentum_div = momentum_density_and_divergence(frames, cfg.mu0)
    identity = frames.sqrt_det[..., None, None] * dng.force - P
    report.add("stress_momentum", _relative(identity, P), thr("stress_momentum"))

    eom = eom_from_stress(frames, dng)
    trace = normal_trace(frames)
    report.add("eom_equivalence", _relative(eom.mean_curvature - trace, trace), thr("eom_equivalence"))

    if cfg.on_shell and frames.grid.has_time:
        maxima = eom.maxima(frames)
        report.add("eom", float(np.max(np.abs(frames.interior(trace)))), thr("eom"))
        report.add("momentum_divergence", momentum_div, thr("momentum_divergence"))
        report.add("stress_divergence", stress_conservation_residual(frames, dng.force), thr("stress_divergence"))
        if cfg.chiral is not False:
            report.add("base_normal_trace", maxima["base_normal_trace"], thr("base_normal_trace"))
        report.add("kk_wave", maxima["kk_wave"], thr("kk_wave"))
    return dng


def verify_config(cfg, tol_scale=None, seed=None, dump_dir=None) -> RunReport:
    """
    Static geometry, deformation, bracket and stress checks on one scenario.
    With dump_dir, the frames and the DNG stress field are dumped there too.
    """
    scale = tol_scale if tol_scale is not None else cfg.tol_scale
    seed = cfg.seed if seed is None else seed
    thr = _Thresholds(cfg, scale)
    report = RunReport(
        scenario=cfg.scenario,
        command="verify",
        parameters={"n": cfg.n, "g44": cfg.g44, "mu0": cfg.mu0, "tol_scale": scale, "seed": seed},
    )
    start = time.perf_counter()
    try:
        emb, bg = build_scenario(cfg)
        frames = build_frames(emb, bg)
        _geometry_checks(report, frames, cfg, thr, seed)
        _deformation_checks(report, emb, bg, frames, thr, seed)
        _bracket_checks(report, emb, bg, frames, cfg, thr, seed)
        dng = _stress_checks(report, frames, cfg, thr)
        if dump_dir is not None:
            dump_frames(dump_dir, frames)
            dump_vectors(Path(dump_dir) / "stress.csv", dng.force, "a")
    except ChiralKKError as exc:
        report.fail(exc)
    report.duration_s = time.perf_counter() - start
    logger.info("verify %s: %s", cfg.scenario, "PASS" if report.passed else "FAIL")
    return report


# --- convergence sweeps ---------------------------------------------------------


def curvature_error(cfg, frames):
    """Error of the mean curvature against the analytic circle or sphere value."""
    R = cfg.params.get("radius", 1.0)
    K = np.max(np.abs(frames.mean_curvature), axis=-1)
    if cfg.builder == "circle":
        return float(np.max(np.abs(K - 1.0 / R)))
    if cfg.builder == "sphere":
        theta = frames.grid.mesh()[0] + sphere_offset(cfg.n)
        band = np.abs(np.sin(theta)) > 0.5
        return float(np.max(np.abs(K[band] - 2.0 / R)))
    return None


def sweep_quantities(cfg):
    emb, bg = build_scenario(cfg)
    frames = build_frames(emb, bg)
    out = {"gauss_weingarten": max(gauss_weingarten_residual(frames))}
    curvature = curvature_error(cfg, frames)
    if curvature is not None:
        out["curvature"] = curvature
    if cfg.on_shell and frames.grid.has_time:
        ms = solve_multipliers(frames, NambuGoto(cfg.mu0), check=False)
        _, out["momentum_divergence"] = momentum_density_and_divergence(frames, cfg.mu0)
        out["stress_divergence"] = stress_conservation_residual(frames, ms.force)
        out["kk_wave"] = eom_from_stress(frames, ms).maxima(frames)["kk_wave"]
    return out


def fit_order(spacings, errors):
    """Least-squares slope of log(error) against log(h)."""
    slope, _ = np.polyfit(np.log(spacings), np.log(errors), 1)
    return float(slope)


def pairwise_orders(spacings, errors):
    return [
        float(np.log(errors[i - 1] / errors[i]) / np.log(spacings[i - 1] / spacings[i]))
        for i in range(1, len(errors))
    ]


ROUNDOFF_FLOOR = 1e-12


def sweep_config(cfg, grids, tol_scale=None):
    """
    Convergence orders over a list of grid sizes. Returns (rows, report);
    rows are (quantity, n, h, error, fitted order, pairwise order).
    """
    scale = tol_scale if tol_scale is not None else cfg.tol_scale
    report = RunReport(
        scenario=cfg.scenario, command="sweep", parameters={"grids": list(grids), "tol_scale": scale}
    )
    rows = []
    start = time.perf_counter()
    try:
        if len(grids) < 2:
            raise ValueError("sweep needs at least two grids")
        per_grid = [sweep_quantities(cfg.with_overrides(n=n)) for n in grids]
        spacings = np.array([2.0 * np.pi / n for n in grids])
        for name in per_grid[0]:
            errors = np.array([q[name] for q in per_grid])
            if np.all(errors < ROUNDOFF_FLOOR):
                logger.info("sweep %s: %s at roundoff on every grid", cfg.scenario, name)
                fitted, pairwise = float("nan"), [float("nan")] * (len(grids) - 1)
                report.add(f"roundoff_{name}", float(np.max(errors)), ROUNDOFF_FLOOR)
            elif np.any(errors < ROUNDOFF_FLOOR):
                logger.info("sweep %s: %s reaches roundoff, no order fitted", cfg.scenario, name)
                fitted, pairwise = float("nan"), [float("nan")] * (len(grids) - 1)
            else:
                fitted = fit_order(spacings, errors)
                pairwise = pairwise_orders(spacings, errors)
                report.add(f"order_{name}", fitted, DEFAULT_THRESHOLDS["order"], comparison=">=")
            for i, n in enumerate(grids):
                rows.append([name, n, spacings[i], errors[i], fitted, pairwise[i - 1] if i else float("nan")])
    except (ChiralKKError, ValueError) as exc:
        report.fail(exc)
    report.duration_s = time.perf_counter() - start
    return rows, report


SWEEP_COLUMNS = ["quantity", "n", "h", "error", "order_fit", "order_pairwise"]


# --- evolution runs ---------------------------------------------------------------


def run_checks(cfg, result, tol_scale=None) -> RunReport:
    """Acceptance checks over the diagnostics of a finished run."""
    scale = tol_scale if tol_scale is not None else cfg.tol_scale
    thr = _Thresholds(cfg, scale)
    report = RunReport(
        scenario=cfg.scenario,
        command="run",
        parameters={
            "n": cfg.n,
            "steps": cfg.steps,
            "cadence": cfg.cadence,
            "dtau": cfg.resolved_dtau(),
            "tol_scale": scale,
        },
    )
    drift_p, drift_m = result.max_drift()
    report.add("conservation_P", drift_p, thr("conservation_P"))
    report.add("conservation_M", drift_m, thr("conservation_M"))
    constraint = max(np.max(result.column("constraint_plus")), np.max(result.column("constraint_minus")))
    report.add("constraints", constraint, thr("constraints"))
    chirality = result.column("chirality")
    if cfg.chiral is True:
        # leapfrog phase error shows up in ϖ at O(Δτ²)
        limit = thr("run_chirality") + cfg.resolved_dtau() ** 2
        report.add("chirality", float(np.max(chirality)), limit)
    elif cfg.chiral is False:
        report.add("chirality_violation", float(np.max(chirality)), thr.unscaled("chirality_violation"), ">=")
    energy = result.column("wave_energy")
    report.add("energy_drift", float(np.ptp(energy)) / max(1.0, abs(energy[0])), thr("energy_drift"))
    report.add("stress_momentum", float(np.max(result.column("stress_momentum"))), thr("stress_momentum"))
    report.add("frame_orthonormality", float(np.max(result.column("frame_orthonormality"))), thr("frame_orthonormality"))
    report.add("eom", float(np.max(result.column("eom_residual"))), thr("run_eom"))
    report.add("kk_wave", float(np.max(result.column("kk_wave_residual"))), thr("run_eom"))
    report.add("momentum_divergence", float(np.max(result.column("momentum_divergence"))), thr("run_divergence"))
    report.add("stress_divergence", float(np.max(result.column("stress_divergence"))), thr("run_divergence"))
    return report
