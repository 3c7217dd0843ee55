"""
Embedding builders for the scenario catalog. Each builder maps a validated
ScenarioConfig to (ExtendedEmbedding, KKBackground).
"""

import logging

import numpy as np

from geometry.embedding import ExtendedEmbedding
from geometry.grid import TWO_PI, WorldvolumeGrid
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

BUILDERS = {}


def builder(name):
    def register(fn):
        BUILDERS[name] = fn
        return fn

    return register


def _sheet_windings(cfg, boost=0.0):
    """Windings of (γτ, σ, γβτ, 0, …, φ) on the (τ, σ) grid."""
    D = cfg.base_dim + 1
    gamma = 1.0 / np.sqrt(1.0 - boost**2)
    w = np.zeros((2, D))
    w[0, 0] = TWO_PI * gamma
    w[1, 1] = TWO_PI
    if boost:
        w[0, 2] = TWO_PI * gamma * boost
    return w, gamma


@builder("flat_sheet")
def flat_sheet(cfg):
    """
    X = (τ, σ, 0, …) with φ = A_s sin σ + A_l sin(σ+τ); the left-moving part
    keeps the current null.
    """
    if cfg.base_dim < 3:
        raise ConfigError("flat_sheet needs base_dim >= 3")
    grid = cfg.worldsheet_grid()
    tau, sigma = grid.mesh()
    D = cfg.base_dim + 1
    static = cfg.params.get("phi_static", 0.0)
    left = cfg.params.get("phi_left", 0.0)

    xbar = np.zeros(grid.shape + (D,))
    xbar[..., 0] = tau
    xbar[..., 1] = sigma
    xbar[..., -1] = static * np.sin(sigma) + left * np.sin(sigma + tau)
    velocity = np.zeros_like(xbar)
    velocity[..., 0] = 1.0
    velocity[..., -1] = left * np.cos(sigma + tau)
    windings, _ = _sheet_windings(cfg)
    emb = ExtendedEmbedding.from_xbar(grid, xbar, windings=windings, velocity=velocity)
    return emb, cfg.background()


@builder("boosted_sheet")
def boosted_sheet(cfg):
    """Flat sheet boosted with velocity β along the first transverse axis."""
    beta = cfg.params.get("beta", 0.6)
    if not abs(beta) < 1:
        raise ConfigError("boost velocity must satisfy |beta| < 1")
    grid = cfg.worldsheet_grid()
    tau, sigma = grid.mesh()
    D = cfg.base_dim + 1
    windings, gamma = _sheet_windings(cfg, beta)
    xbar = np.zeros(grid.shape + (D,))
    xbar[..., 0] = gamma * tau
    xbar[..., 1] = sigma
    xbar[..., 2] = gamma * beta * tau
    velocity = np.zeros_like(xbar)
    velocity[..., 0] = gamma
    velocity[..., 2] = gamma * beta
    emb = ExtendedEmbedding.from_xbar(grid, xbar, windings=windings, velocity=velocity)
    return emb, cfg.background()


@builder("static_loop")
def static_loop(cfg):
    """X = (τ, R cos σ, R sin σ, 0, …), φ = 0; off-shell (a static loop collapses)."""
    R = cfg.params.get("radius", 1.0)
    grid = cfg.worldsheet_grid()
    tau, sigma = grid.mesh()
    D = cfg.base_dim + 1
    xbar = np.zeros(grid.shape + (D,))
    xbar[..., 0] = tau
    xbar[..., 1] = R * np.cos(sigma)
    xbar[..., 2] = R * np.sin(sigma)
    velocity = np.zeros_like(xbar)
    velocity[..., 0] = 1.0
    windings = np.zeros((2, D))
    windings[0, 0] = TWO_PI
    emb = ExtendedEmbedding.from_xbar(grid, xbar, windings=windings, velocity=velocity)
    return emb, cfg.background()


@builder("helix")
def helix(cfg):
    """Static helix X = (τ, R cos σ, R sin σ, cσ, 0, …); normal frame rotates at c/√(R²+c²)."""
    if cfg.base_dim < 4:
        raise ConfigError("helix needs base_dim >= 4")
    R = cfg.params.get("radius", 1.0)
    c = cfg.params.get("pitch", 0.5)
    grid = cfg.worldsheet_grid()
    tau, sigma = grid.mesh()
    D = cfg.base_dim + 1
    xbar = np.zeros(grid.shape + (D,))
    xbar[..., 0] = tau
    xbar[..., 1] = R * np.cos(sigma)
    xbar[..., 2] = R * np.sin(sigma)
    xbar[..., 3] = c * sigma
    velocity = np.zeros_like(xbar)
    velocity[..., 0] = 1.0
    windings = np.zeros((2, D))
    windings[0, 0] = TWO_PI
    windings[1, 3] = TWO_PI * c
    emb = ExtendedEmbedding.from_xbar(grid, xbar, windings=windings, velocity=velocity)
    return emb, cfg.background()


@builder("circle")
def circle(cfg):
    """
    Riemannian analysis mode: the curve R(cos s, sin s, 0, …) with φ = 0,
    sampled non-uniformly at s = σ + ε sin σ so differencing errors do not
    cancel out of the curvature.
    """
    R = cfg.params.get("radius", 1.0)
    stretch = cfg.params.get("stretch", 0.3)
    if not abs(stretch) < 1:
        raise ConfigError("circle stretch must satisfy |stretch| < 1")
    grid = WorldvolumeGrid(spatial=(cfg.n,))
    (sigma,) = grid.mesh()
    s = sigma + stretch * np.sin(sigma)
    xbar = np.zeros(grid.shape + (cfg.base_dim + 1,))
    xbar[..., 0] = R * np.cos(s)
    xbar[..., 1] = R * np.sin(s)
    return ExtendedEmbedding.from_xbar(grid, xbar), cfg.background()


def sphere_offset(n):
    return 0.5 * TWO_PI / n


@builder("sphere")
def sphere(cfg):
    """
    Riemannian analysis mode: the 2-sphere of radius r over θ ∈ [0, 2π) (each
    point covered twice), θ offset half a cell so no sample sits on a pole.
    """
    if cfg.base_dim < 3:
        raise ConfigError("sphere needs base_dim >= 3")
    r = cfg.params.get("radius", 1.0)
    grid = WorldvolumeGrid(spatial=(cfg.n, cfg.n))
    theta, phi = grid.mesh()
    theta = theta + sphere_offset(cfg.n)
    xbar = np.zeros(grid.shape + (cfg.base_dim + 1,))
    xbar[..., 0] = r * np.sin(theta) * np.cos(phi)
    xbar[..., 1] = r * np.sin(theta) * np.sin(phi)
    xbar[..., 2] = r * np.cos(theta)
    return ExtendedEmbedding.from_xbar(grid, xbar), cfg.background()


@builder("flat_membrane")
def flat_membrane(cfg):
    """d = 2 static membrane X = (τ, σ¹, σ², 0, …)."""
    if cfg.base_dim < 4:
        raise ConfigError("flat_membrane needs base_dim >= 4")
    levels = cfg.tau_levels or cfg.n
    grid = WorldvolumeGrid(spatial=(cfg.n, cfg.n), time=cfg.worldsheet_grid(levels).time)
    tau, s1, s2 = grid.mesh()
    D = cfg.base_dim + 1
    xbar = np.zeros(grid.shape + (D,))
    xbar[..., 0] = tau
    xbar[..., 1] = s1
    xbar[..., 2] = s2
    velocity = np.zeros_like(xbar)
    velocity[..., 0] = 1.0
    windings = np.zeros((3, D))
    windings[0, 0] = windings[1, 1] = windings[2, 2] = TWO_PI
    emb = ExtendedEmbedding.from_xbar(grid, xbar, windings=windings, velocity=velocity)
    return emb, cfg.background()


@builder("random_smooth")
def random_smooth(cfg):
    """
    Seeded off-shell control: a flat sheet plus random low harmonics in every
    spatial and KK component.
    """
    if cfg.base_dim < 3:
        raise ConfigError("random_smooth needs base_dim >= 3")
    amplitude = cfg.params.get("amplitude", 0.1)
    modes = int(cfg.params.get("modes", 2))
    rng = np.random.default_rng(cfg.seed)
    grid = cfg.worldsheet_grid()
    tau, sigma = grid.mesh()
    D = cfg.base_dim + 1

    xbar = np.zeros(grid.shape + (D,))
    velocity = np.zeros_like(xbar)
    xbar[..., 0] = tau
    xbar[..., 1] = sigma
    velocity[..., 0] = 1.0
    for comp in range(1, D):
        for j in range(modes + 1):
            for k in range(modes + 1):
                if j == 0 and k == 0:
                    continue
                c, s = amplitude * rng.standard_normal(2) / (1 + j + k)
                phase = j * tau + k * sigma
                xbar[..., comp] += c * np.cos(phase) + s * np.sin(phase)
                velocity[..., comp] += j * (s * np.cos(phase) - c * np.sin(phase))
    windings, _ = _sheet_windings(cfg)
    emb = ExtendedEmbedding.from_xbar(grid, xbar, windings=windings, velocity=velocity)
    return emb, cfg.background()


@builder("movers")
def movers(cfg):
    """
    Conformal-gauge solution ½[A(σ+τ) + B(σ−τ)], sampled over one τ period or
    on a short stacked patch around τ = 0.
    """
    pair = cfg.mover_pair()
    grid = cfg.patch_grid() if cfg.sampling == "patch" else cfg.worldsheet_grid()
    return pair.sample(grid), cfg.background()


def build_scenario(cfg):
    try:
        fn = BUILDERS[cfg.builder]
    except KeyError:
        raise ConfigError(f"unknown builder '{cfg.builder}'") from None
    emb, bg = fn(cfg)
    logger.debug("built %s on grid %s", cfg.scenario, emb.grid.shape)
    return emb, bg
