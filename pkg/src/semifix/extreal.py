"""Extended nonnegative reals.

Values are plain floats; the point at infinity is ``math.inf`` (IEEE infinity),
which already absorbs under ``max`` and ``+`` and compares totally with finite
values. Nothing here ever stands in a large finite number for infinity.
"""

from __future__ import annotations

import math

INF = math.inf


def ext_real(value: float) -> float:
    """Coerce ``value`` to an extended nonnegative real, rejecting NaN and negatives."""
    x = float(value)
    if math.isnan(x) or x < 0:
        raise ValueError(f"not an extended nonnegative real: {value!r}")
    return x


def is_inf(value: float) -> bool:
    return value == INF


def format_number(value: float) -> str:
    """Shortest round-trip text for a float; integral values lose the ``.0``."""
    x = float(value)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = repr(x)
    if s.endswith(".0"):
        s = s[:-2]
    return s


def parse_number(text: str) -> float:
    text = text.strip()
    if text in ("inf", "+inf", "Infinity"):
        return INF
    return float(text)
