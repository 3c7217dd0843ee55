THEMES = {
    "Default": {
        "bg_color": "#0d1117",
        "border_color": "#30363d",
        "title_color": "#58a6ff",
        "text_color": "#c9d1d9",
        "icon_color": "#8b949e",
        "pass_color": "#3fb950",
        "fail_color": "#f85149",
        "font_family": "Segoe UI, Ubuntu, Sans-Serif",
        "title_font_size": 18,
        "text_font_size": 13
    },
    "Dracula": {
        "bg_color": "#282a36",
        "border_color": "#bd93f9",
        "title_color": "#ff79c6",
        "text_color": "#f8f8f2",
        "icon_color": "#6272a4",
        "pass_color": "#50fa7b",
        "fail_color": "#ff5555",
        "font_family": "Segoe UI, Ubuntu, Sans-Serif",
        "title_font_size": 18,
        "text_font_size": 13
    },
    "Paper": {
        "bg_color": "#ffffff",
        "border_color": "#d0d7de",
        "title_color": "#0969da",
        "text_color": "#24292f",
        "icon_color": "#57606a",
        "pass_color": "#1a7f37",
        "fail_color": "#cf222e",
        "font_family": "Georgia, serif",
        "title_font_size": 18,
        "text_font_size": 13
    }
}


def resolve_theme(theme_name="Default", custom_colors=None):
    """Theme dict by name (unknown names fall back to Default) with overrides applied."""
    if isinstance(theme_name, dict):
        theme = theme_name.copy()
    else:
        theme = THEMES.get(theme_name, THEMES["Default"]).copy()
    if custom_colors:
        theme.update(custom_colors)
    return theme
