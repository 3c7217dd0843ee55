import math

from .svg_base import create_svg_base


def _status_color(theme, passed):
    return theme["pass_color"] if passed else theme["fail_color"]


def draw_report_card(report, theme_name="Default", custom_colors=None):
    """
    Generates the check summary card for a RunReport: one row per check with
    a pass/fail dot, the measured value and its threshold.
    report: RunReport or its to_json_dict() form
    """
    data = report if isinstance(report, dict) else report.to_json_dict()
    checks = data.get("checks", [])

    width = 520
    item_height = 22
    height = 80 + item_height * (len(checks) + (1 if data.get("error") else 0)) + 10
    parameters = data.get("parameters", {})
    footer = "  ".join(f"{k}={parameters[k]}" for k in sorted(parameters))
    dwg, theme = create_svg_base(
        theme_name, custom_colors, width, height, f"{data['scenario']} · {data['command']}",
        status=bool(data.get("passed")), footer=footer[:80] or None,
    )
    font_family = theme["font_family"]
    font_size = theme["text_font_size"]

    current_y = 60
    if data.get("error"):
        dwg.add(dwg.text(f"error: {data['error'][:70]}", insert=(20, current_y),
                         fill=theme["fail_color"], font_size=font_size, font_family=font_family))
        current_y += item_height

    for check in checks:
        dwg.add(dwg.circle(center=(30, current_y - 5), r=4, fill=_status_color(theme, check["passed"])))
        dwg.add(dwg.text(check["name"], insert=(45, current_y),
                         fill=theme["text_color"], font_size=font_size, font_family=font_family))
        value = f"{check['measured']:.2e} {check['comparison']} {check['threshold']:.1e}"
        dwg.add(dwg.text(value, insert=(width - 20, current_y),
                         fill=theme["text_color"], font_size=font_size, font_family=font_family,
                         text_anchor="end", font_weight="bold"))
        current_y += item_height

    return dwg.tostring()


def draw_sweep_card(rows, scenario, theme_name="Default", custom_colors=None):
    """
    Log-log convergence plot of a sweep: error against grid spacing, one
    polyline per quantity.
    rows: (quantity, n, h, error, order_fit, order_pairwise)
    """
    width, height = 480, 300
    left, top, plot_w, plot_h = 60, 50, 300, 220
    dwg, theme = create_svg_base(theme_name, custom_colors, width, height, f"{scenario} · convergence")

    series = {}
    for quantity, _, h, error, order, _ in rows:
        if error > 0:
            series.setdefault(quantity, {"points": [], "order": order})["points"].append(
                (math.log10(h), math.log10(error))
            )
    if not series:
        return dwg.tostring()

    xs = [x for s in series.values() for x, _ in s["points"]]
    ys = [y for s in series.values() for _, y in s["points"]]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    span_x = (x1 - x0) or 1.0
    span_y = (y1 - y0) or 1.0

    def to_px(x, y):
        return (left + plot_w * (x - x0) / span_x, top + plot_h * (1.0 - (y - y0) / span_y))

    dwg.add(dwg.rect(insert=(left, top), size=(plot_w, plot_h), fill="none",
                     stroke=theme["border_color"], stroke_width=1))
    palette = [theme["title_color"], theme["pass_color"], theme["fail_color"], theme["icon_color"]]
    legend_y = top + 10
    for i, (quantity, s) in enumerate(sorted(series.items())):
        color = palette[i % len(palette)]
        dwg.add(dwg.polyline([to_px(x, y) for x, y in s["points"]], fill="none",
                             stroke=color, stroke_width=2))
        label = quantity if math.isnan(s["order"]) else f"{quantity} ({s['order']:.2f})"
        dwg.add(dwg.text(label, insert=(left + plot_w + 10, legend_y), fill=color,
                         font_size=11, font_family=theme["font_family"]))
        legend_y += 16

    dwg.add(dwg.text("log10 h", insert=(left + plot_w / 2, top + plot_h + 20), fill=theme["text_color"],
                     font_size=11, font_family=theme["font_family"], text_anchor="middle"))
    return dwg.tostring()
