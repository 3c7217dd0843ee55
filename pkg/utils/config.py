"""
Scenario configuration: pydantic models, catalog defaults and the canonical
JSON form.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from dynamics.movers import Mover, MoverPair
from geometry.background import KKBackground
from geometry.grid import MIN_POINTS, TWO_PI, TimeAxis, WorldvolumeGrid
from utils.errors import ChiralKKError, ConfigError

logger = logging.getLogger(__name__)

DEFAULT_N = 256
DTAU_FRACTION = 0.25


def _padded(rows, width):
    return [list(r) + [0.0] * (width - len(r)) for r in rows]


class MoverSpec(BaseModel):
    """Winding plus cosine/sine harmonics per component (spatial base, then KK)."""

    model_config = ConfigDict(extra="forbid")

    winding: List[float]
    cos: List[List[float]] = Field(default_factory=list)
    sin: List[List[float]] = Field(default_factory=list)

    def build(self, weights):
        ncomp = len(weights)
        cos = self.cos or [[] for _ in range(ncomp)]
        sin = self.sin or [[] for _ in range(ncomp)]
        if len(cos) != ncomp or len(sin) != ncomp:
            raise ConfigError(f"mover harmonics must list {ncomp} components")
        width = max([len(r) for r in cos + sin] + [1])
        return Mover.from_coefficients(
            self.winding, _padded(cos, width), _padded(sin, width), weights
        )


class MoverPairSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: MoverSpec
    b: MoverSpec


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str
    builder: str = "movers"
    base_dim: int = 3
    g44: float = 1.0
    mu0: float = 1.0
    riemannian: bool = False
    n: int = DEFAULT_N
    tau_levels: Optional[int] = None
    sampling: Literal["period", "patch"] = "period"
    dtau: Optional[float] = None
    steps: int = 0
    cadence: int = 16
    movers: Optional[MoverPairSpec] = None
    params: Dict[str, float] = Field(default_factory=dict)
    density: str = "dng"
    alpha: float = 1.0
    chiral: Optional[bool] = None
    seed: int = 0
    tol_scale: float = 1.0
    on_shell: bool = False
    thresholds: Dict[str, float] = Field(default_factory=dict)

    @field_validator("g44")
    @classmethod
    def _g44_positive(cls, v):
        if not v > 0:
            raise ValueError("g44 must be positive")
        return v

    @field_validator("base_dim")
    @classmethod
    def _base_dim(cls, v):
        if v < 2:
            raise ValueError("base_dim must be >= 2")
        return v

    @field_validator("n", "tau_levels")
    @classmethod
    def _stencil(cls, v):
        if v is not None and v < MIN_POINTS:
            raise ValueError(f"needs at least {MIN_POINTS} points")
        return v

    @field_validator("steps")
    @classmethod
    def _steps(cls, v):
        if v < 0:
            raise ValueError("steps must be >= 0")
        return v

    @field_validator("cadence")
    @classmethod
    def _cadence(cls, v):
        if v < 1:
            raise ValueError("cadence must be >= 1")
        return v

    @field_validator("mu0", "tol_scale")
    @classmethod
    def _positive(cls, v):
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @model_validator(mode="after")
    def _movers_normalize(self):
        if self.builder == "movers":
            if self.movers is None:
                raise ValueError("builder 'movers' needs a movers block")
            self.mover_pair()
        return self

    @property
    def spacing(self):
        return TWO_PI / self.n

    def resolved_dtau(self):
        return self.dtau if self.dtau is not None else DTAU_FRACTION * self.spacing

    def background(self):
        return KKBackground(base_dim=self.base_dim, g44=self.g44, riemannian=self.riemannian)

    def mover_weights(self):
        return np.concatenate([np.ones(self.base_dim - 1), [self.g44]])

    def mover_pair(self) -> MoverPair:
        if self.movers is None:
            raise ConfigError(f"scenario '{self.scenario}' has no movers")
        weights = self.mover_weights()
        for name, spec in (("a", self.movers.a), ("b", self.movers.b)):
            if len(spec.winding) != len(weights):
                raise ConfigError(
                    f"movers.{name}.winding needs {len(weights)} components (base_dim spatial + KK)"
                )
        return MoverPair(self.movers.a.build(weights), self.movers.b.build(weights))

    def worldsheet_grid(self, levels=None):
        """(τ, σ) grid sampling one full τ period."""
        levels = levels or self.tau_levels or self.n
        return WorldvolumeGrid(spatial=(self.n,), time=TimeAxis.full_period(levels))

    def patch_grid(self, levels=5):
        """Stacked (τ, σ) grid of a few levels centered on τ = 0."""
        dtau = self.resolved_dtau()
        half = levels // 2
        time = TimeAxis(levels=levels, step=dtau, periodic=False, origin=-half * dtau)
        return WorldvolumeGrid(spatial=(self.n,), time=time)

    def with_overrides(self, **changes):
        data = self.model_dump()
        data.update({k: v for k, v in changes.items() if v is not None})
        return validate_config(data)


def _error_message(exc: ValidationError):
    parts = []
    for err in exc.errors():
        key = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{key}: {err['msg']}")
    return "; ".join(parts)


def validate_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {_error_message(exc)}") from exc
    except ChiralKKError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_config(data: dict) -> ScenarioConfig:
    """Fill a descriptor from its catalog entry, then validate."""
    from scenarios.catalog import SCENARIOS

    if not isinstance(data, dict) or "scenario" not in data:
        raise ConfigError("config must be a JSON object with a 'scenario' key")
    name = data["scenario"]
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{name}'")
    merged = dict(SCENARIOS[name])
    merged.update(data)
    return validate_config(merged)


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    cfg = resolve_config(data)
    logger.debug("parsed %s as scenario %s", path, cfg.scenario)
    return cfg


def serialize_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
