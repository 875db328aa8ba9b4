"""Impostor-based uniqueness (IUM) and Doddington-zoo lamb indicators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateScores, NonFiniteInput, TooFewValues


@dataclass(frozen=True)
class ImpostorScoreSet:
    """Impostor scores of one probe, with min/max/mean cached on creation."""

    probe_id: str
    scores: tuple[float, ...]

    def __post_init__(self):
        scores = tuple(float(s) for s in self.scores)
        if len(scores) < 2:
            raise TooFewValues(f"need at least 2 impostor scores, got {len(scores)}")
        if not all(math.isfinite(s) for s in scores):
            raise NonFiniteInput("impostor scores must be finite")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "s_min", min(scores))
        object.__setattr__(self, "s_max", max(scores))
        object.__setattr__(self, "mean", math.fsum(scores) / len(scores))

    def __len__(self):
        return len(self.scores)


@dataclass(frozen=True)
class IUMResult:
    probe_id: str
    u: float
    n: int


def ium(s: ImpostorScoreSet) -> IUMResult:
    """u = (S_max - mean) / (S_max - S_min).

    Evaluated as the mean of the per-score terms (S_max - s) / (S_max - S_min),
    each in [0, 1], so the result never leaves [0, 1] through rounding and a
    two-score set gives exactly 0.5.
    """
    spread = s.s_max - s.s_min
    if spread == 0:
        raise DegenerateScores(f"all {len(s)} impostor scores of {s.probe_id!r} are equal")
    u = math.fsum((s.s_max - v) / spread for v in s.scores) / len(s.scores)
    return IUMResult(s.probe_id, u, len(s.scores))


def mean_threshold_lambs(means: Sequence[tuple[str, float]], threshold: float) -> list[str]:
    """Subjects whose mean impostor score is strictly above ``threshold``."""
    return [sid for sid, m in means if m > threshold]


def max_impostor_statistic(s: ImpostorScoreSet, genuine: float) -> tuple[float, float]:
    """Return ``(max impostor score, genuine - max impostor score)``.

    A small or negative margin means some impostor scores as high as the
    subject's own genuine comparison, the lamb signature.
    """
    genuine = float(genuine)
    if not math.isfinite(genuine):
        raise NonFiniteInput("genuine score must be finite")
    return s.s_max, genuine - s.s_max
