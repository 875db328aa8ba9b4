"""Image-quality conditions and their text tags.

Tag grammar (used in manifests, config files and score-file names)::

    baseline | blur:<odd int >= 3> | noise:<decimal > 0> | pose:<label>
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import BadLength, BadVariance, ParseError


@dataclass(frozen=True)
class Baseline:
    @property
    def tag(self) -> str:
        return "baseline"


@dataclass(frozen=True)
class MotionBlur:
    length: int

    def __post_init__(self):
        if isinstance(self.length, bool) or not isinstance(self.length, int):
            raise BadLength(f"blur length must be an int, got {self.length!r}")
        if self.length < 3 or self.length % 2 == 0:
            raise BadLength(f"blur length must be odd and >= 3, got {self.length}")

    @property
    def tag(self) -> str:
        return f"blur:{self.length}"


@dataclass(frozen=True)
class GaussianNoise:
    variance: float

    def __post_init__(self):
        v = float(self.variance)
        if not math.isfinite(v) or v <= 0:
            raise BadVariance(f"noise variance must be > 0, got {self.variance!r}")
        object.__setattr__(self, "variance", v)

    @property
    def tag(self) -> str:
        return f"noise:{self.variance!r}"


@dataclass(frozen=True)
class PoseLabel:
    camera: str

    def __post_init__(self):
        if not self.camera or "," in self.camera or self.camera != self.camera.strip():
            raise ParseError(f"bad pose label {self.camera!r}")

    @property
    def tag(self) -> str:
        return f"pose:{self.camera}"


QualityCondition = Union[Baseline, MotionBlur, GaussianNoise, PoseLabel]

BASELINE = Baseline()


def parse_condition(tag: str) -> QualityCondition:
    """Parse a condition tag such as ``blur:31`` or ``noise:0.03``."""
    tag = tag.strip()
    if tag == "baseline":
        return BASELINE
    kind, sep, arg = tag.partition(":")
    if not sep or not arg:
        raise ParseError(f"unrecognised condition tag {tag!r}")
    if kind == "blur":
        try:
            length = int(arg)
        except ValueError:
            raise ParseError(f"blur length is not an integer: {tag!r}") from None
        return MotionBlur(length)
    if kind == "noise":
        try:
            variance = float(arg)
        except ValueError:
            raise ParseError(f"noise variance is not a decimal: {tag!r}") from None
        return GaussianNoise(variance)
    if kind == "pose":
        return PoseLabel(arg)
    raise ParseError(f"unrecognised condition tag {tag!r}")


def condition_stem(cond: QualityCondition) -> str:
    """File-name friendly version of a tag (``blur:31`` -> ``blur_31``)."""
    return cond.tag.replace(":", "_")


def is_synthetic(cond: QualityCondition) -> bool:
    """True for conditions produced by degrading a baseline image."""
    return isinstance(cond, (MotionBlur, GaussianNoise))
