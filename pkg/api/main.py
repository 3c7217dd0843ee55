from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Response

from generators import report_card
from scenarios.catalog import SCENARIOS, scenario_ids
from scenarios.checks import verify_config
from utils.config import resolve_config
from utils.errors import ChiralKKError
from utils.settings import MAX_API_N, configure_logging

configure_logging()

app = FastAPI()

@app.get("/")
def read_root():
    return {"message": "ChiralKK verification API is running"}


def parse_colors(bg_color, title_color, text_color, border_color):
    """Helper to construct custom color dict only if values are provided."""
    colors = {}
    for key, value in (
        ("bg_color", bg_color),
        ("title_color", title_color),
        ("text_color", text_color),
        ("border_color", border_color),
    ):
        if value:
            colors[key] = value if value.startswith("#") else f"#{value}"
    return colors or None


def _verify(scenario, n, seed, tol_scale):
    if scenario not in SCENARIOS:
        raise HTTPException(status_code=404, detail=f"unknown scenario '{scenario}'")
    overrides = {"scenario": scenario}
    if n is not None:
        if n > MAX_API_N:
            raise HTTPException(status_code=422, detail=f"n must be <= {MAX_API_N}")
        overrides["n"] = n
    try:
        cfg = resolve_config(overrides)
    except ChiralKKError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return verify_config(cfg, tol_scale=tol_scale, seed=seed)


@app.get("/api/scenarios")
async def list_scenarios():
    return {"scenarios": scenario_ids()}


@app.get("/api/verify")
async def verify(
    scenario: str,
    n: Optional[int] = Query(None, ge=8),
    seed: int = 0,
    tol_scale: float = Query(1.0, gt=0),
):
    report = _verify(scenario, n, seed, tol_scale)
    return report.to_json_dict()


@app.get("/api/report-card")
async def get_report_card(
    scenario: str,
    theme: str = "Default",
    n: Optional[int] = Query(None, ge=8),
    seed: int = 0,
    tol_scale: float = Query(1.0, gt=0),
    bg_color: Optional[str] = None,
    title_color: Optional[str] = None,
    text_color: Optional[str] = None,
    border_color: Optional[str] = None,
):
    report = _verify(scenario, n, seed, tol_scale)
    custom_colors = parse_colors(bg_color, title_color, text_color, border_color)
    svg_content = report_card.draw_report_card(report, theme, custom_colors=custom_colors)
    return Response(content=svg_content, media_type="image/svg+xml")
