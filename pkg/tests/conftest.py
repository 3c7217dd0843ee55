import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from geometry.frames import build_frames  # noqa: E402
from scenarios.builders import build_scenario  # noqa: E402
from utils.config import resolve_config  # noqa: E402


@pytest.fixture
def scenario():
    """Catalog scenario with overrides, e.g. scenario("helix", n=32)."""

    def make(name, **overrides):
        return resolve_config({"scenario": name, **overrides})

    return make


@pytest.fixture
def frames_of(scenario):
    """(cfg, embedding, background, frames) for a catalog scenario."""

    def make(name, **overrides):
        cfg = scenario(name, **overrides)
        emb, bg = build_scenario(cfg)
        return cfg, emb, bg, build_frames(emb, bg)

    return make
