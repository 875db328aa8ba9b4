"""Box-plot summaries and Pearson correlation.

Quartiles use linear interpolation between order statistics (Hyndman &
Fan type 7, the R / numpy default): for sorted data ``x[0..n-1]`` the
p-quantile is ``x[j] + g * (x[j+1] - x[j])`` with ``h = (n-1) p``,
``j = floor(h)``, ``g = h - j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import (
    LengthMismatch,
    MissingBaseline,
    NonFiniteInput,
    TooFewValues,
    ZeroBaseline,
    ZeroVariance,
)

WHISKER_FACTOR = 1.5


@dataclass(frozen=True)
class BoxStats:
    n: int
    q1: float
    median: float
    q3: float
    iqr: float
    lower_whisker: float
    upper_whisker: float
    outliers: tuple[float, ...]
    mean: float


def _finite_array(values, name="values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contain NaN or infinity")
    return arr


def quantile_sorted(xs: np.ndarray, p: float) -> float:
    """Type-7 quantile of already sorted data."""
    h = (len(xs) - 1) * p
    j = math.floor(h)
    g = h - j
    if g == 0.0 or j + 1 >= len(xs):
        return float(xs[j])
    return float(xs[j] + g * (xs[j + 1] - xs[j]))


def boxplot_stats(values: Sequence[float]) -> BoxStats:
    """Hinges, whiskers and outliers of a sample.

    Whiskers reach the most extreme data values lying within
    1.5 x IQR of the hinges; everything beyond them is an outlier,
    reported in input order.
    """
    arr = _finite_array(values)
    if arr.size < 2:
        raise TooFewValues(f"need at least 2 values, got {arr.size}")
    xs = np.sort(arr)
    q1 = quantile_sorted(xs, 0.25)
    med = quantile_sorted(xs, 0.5)
    q3 = quantile_sorted(xs, 0.75)
    iqr = q3 - q1
    lo_fence = q1 - WHISKER_FACTOR * iqr
    hi_fence = q3 + WHISKER_FACTOR * iqr
    inside = xs[(xs >= lo_fence) & (xs <= hi_fence)]
    lw, uw = float(inside[0]), float(inside[-1])
    outliers = tuple(float(v) for v in arr if v < lw or v > uw)
    return BoxStats(int(arr.size), q1, med, q3, iqr, lw, uw, outliers,
                    math.fsum(arr.tolist()) / arr.size)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, as R's ``cor()``."""
    xa = _finite_array(x, "x")
    ya = _finite_array(y, "y")
    if xa.size != ya.size:
        raise LengthMismatch(f"x has {xa.size} values, y has {ya.size}")
    if xa.size < 3:
        raise TooFewValues(f"need at least 3 pairs, got {xa.size}")
    if xa.min() == xa.max() or ya.min() == ya.max():
        raise ZeroVariance("correlation undefined for a constant input")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    r = np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    return float(min(1.0, max(-1.0, r)))


def normalized_falloff(corrs: Sequence[tuple[Hashable, float]],
                       baseline_condition: Hashable) -> list[tuple[Hashable, float]]:
    """Divide each correlation by the baseline one (baseline maps to 1.0)."""
    base = [r for c, r in corrs if c == baseline_condition]
    if not base:
        raise MissingBaseline(baseline_condition)
    rb = base[0]
    if rb == 0:
        raise ZeroBaseline("baseline correlation is zero")
    return [(c, 1.0 if c == baseline_condition else r / rb) for c, r in corrs]
