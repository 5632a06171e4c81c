"""Number formatting shared by the CSV exporters."""

import math
from typing import Optional

SIGNIFICANT_DIGITS = 17


def format_float(value: Optional[float]) -> str:
    """17 significant digits, so every written double reads back exactly; None becomes an empty cell."""
    if value is None:
        return ""
    if math.isnan(value):
        return "nan"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"
