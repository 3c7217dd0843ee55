import svgwrite
from themes.styles import resolve_theme

FOOTER_HEIGHT = 24


def create_svg_base(theme_name, custom_colors, width, height, title_text, status=None, footer=None):
    """
    Card frame shared by the report and sweep cards: themed background,
    title, an optional PASS/FAIL badge on the right and an optional footer
    line (e.g. the run parameters). Returns (drawing, theme).
    """
    theme = resolve_theme(theme_name, custom_colors)
    if footer:
        height += FOOTER_HEIGHT

    dwg = svgwrite.Drawing(size=(f"{width}px", f"{height}px"), viewBox=f"0 0 {width} {height}")
    dwg.add(dwg.rect(insert=(0, 0), size=("100%", "100%"), rx=10, ry=10,
                     fill=theme["bg_color"], stroke=theme["border_color"], stroke_width=2))
    dwg.add(dwg.text(title_text, insert=(20, 30),
                     fill=theme["title_color"], font_size=theme["title_font_size"],
                     font_family=theme["font_family"], font_weight="bold"))

    if status is not None:
        color = theme["pass_color"] if status else theme["fail_color"]
        dwg.add(dwg.rect(insert=(width - 78, 12), size=(60, 24), rx=12, ry=12,
                         fill="none", stroke=color, stroke_width=2))
        dwg.add(dwg.text("PASS" if status else "FAIL", insert=(width - 48, 29), fill=color,
                         font_size=theme["text_font_size"], font_family=theme["font_family"],
                         font_weight="bold", text_anchor="middle"))

    if footer:
        dwg.add(dwg.text(footer, insert=(20, height - 10), fill=theme["icon_color"],
                         font_size=theme["text_font_size"] - 2, font_family=theme["font_family"]))
    return dwg, theme
