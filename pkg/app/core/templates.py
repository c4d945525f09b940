from __future__ import annotations

from typing import Any

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.core.config import TEMPLATES_DIR

# --- Jinja environment -------------------------------------------------------
# Plain-text output (gnuplot scripts), so no HTML autoescaping.
templates = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)

# ----------------------------- Jinja filters --------------------------------
def num(value: Any) -> str:
    """Compact number for data blocks: ints as-is, floats to 6 significant digits, blanks as NaN."""
    if value is None or value == "":
        return "NaN"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    try:
        return f"{float(value):.6g}"
    except (TypeError, ValueError):
        return "NaN"

def gp_quote(value: Any) -> str:
    """Double-quoted gnuplot string literal."""
    s = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'

templates.filters["num"] = num
templates.filters["gp_quote"] = gp_quote

def render(name: str, **context: Any) -> str:
    return templates.get_template(name).render(**context)
