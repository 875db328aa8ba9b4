"""Eigenface baseline matcher and the score-matrix exchange format.

Faces are aligned on the two eye centres to a 64 x 80 crop with the eyes
at (16, 24) and (48, 24), sampled bilinearly, then normalized to zero
mean and unit norm. Similarity is the cosine between eigenface
coefficient vectors.

Score-matrix files look like::

    #gallery,g1,g2,g3
    p1,0.10000000000000001,0.20000000000000001,0.5
    p2,...

with every score written to 17 significant digits so files round-trip
exactly.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    DegenerateEyes,
    FlatFace,
    NonFiniteScore,
    ParseError,
    ShapeMismatch,
    TooFewFaces,
    ZeroProjection,
)
from .imageio import as_gray_image

CROP_WIDTH = 64
CROP_HEIGHT = 80
CANONICAL_LEFT_EYE = (16.0, 24.0)
CANONICAL_RIGHT_EYE = (48.0, 24.0)
DEFAULT_ENERGY = 0.95
_ZERO_NORM = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AlignedFace:
    """Geometrically and photometrically normalized face.

    ``geometry`` holds ``(a, b, tx, ty)`` of the similarity transform
    taking crop coordinates ``(u, v)`` to image coordinates
    ``(a*u - b*v + tx, b*u + a*v + ty)``.
    """

    vector: np.ndarray
    geometry: tuple[float, float, float, float]


def eye_transform(left_eye, right_eye,
                  canonical=(CANONICAL_LEFT_EYE, CANONICAL_RIGHT_EYE)):
    """Similarity transform mapping canonical eye positions onto the given eyes."""
    cl = complex(*canonical[0])
    cr = complex(*canonical[1])
    el = complex(*left_eye)
    er = complex(*right_eye)
    a = (er - el) / (cr - cl)
    b = el - a * cl
    return (a.real, a.imag, b.real, b.imag)


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x = np.clip(x, 0.0, w - 1)
    y = np.clip(y, 0.0, h - 1)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return top * (1 - fy) + bottom * fy


def normalize_photometric(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).ravel()
    v = v - v.mean()
    norm = np.sqrt(np.dot(v, v))
    if norm < _ZERO_NORM:
        raise FlatFace("aligned crop is constant")
    return v / norm


def align(img, left_eye, right_eye, size=(CROP_WIDTH, CROP_HEIGHT)) -> AlignedFace:
    """Warp ``img`` so the eyes land on the canonical positions.

    ``left_eye`` is the eye on the image's left; its x coordinate must be
    strictly smaller than the right eye's, otherwise the pair is rejected
    rather than producing an upside-down alignment. Samples falling
    outside the image take the nearest border value.
    """
    img = as_gray_image(img)
    h, w = img.shape
    (lx, ly), (rx, ry) = left_eye, right_eye
    for x, y in ((lx, ly), (rx, ry)):
        if not (0 <= x <= w - 1 and 0 <= y <= h - 1):
            raise DegenerateEyes(f"eye ({x}, {y}) lies outside the {w}x{h} image")
    if not rx > lx:
        raise DegenerateEyes("right eye x must exceed left eye x")
    geometry = eye_transform((lx, ly), (rx, ry))
    a, b, tx, ty = geometry
    cw, ch = size
    v, u = np.mgrid[0:ch, 0:cw].astype(np.float64)
    x = a * u - b * v + tx
    y = b * u + a * v + ty
    crop = _bilinear(img, x, y)
    return AlignedFace(_readonly(normalize_photometric(crop)), geometry)


# -- eigenfaces --------------------------------------------------------------

@dataclass(frozen=True)
class EigenModel:
    mean: np.ndarray
    basis: np.ndarray  # (K, d), orthonormal rows
    eigenvalues: np.ndarray  # (K,), descending

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _as_matrix(faces) -> np.ndarray:
    rows = [f.vector if isinstance(f, AlignedFace) else np.asarray(f, dtype=np.float64)
            for f in faces]
    if not rows:
        raise TooFewFaces("no faces supplied")
    return np.vstack(rows)


def train_eigenmodel(faces, k: Optional[int] = None, energy: float = DEFAULT_ENERGY) -> EigenModel:
    """Fit an eigenface basis.

    Args:
        faces: aligned faces (or raw equal-length vectors), at least two.
        k: components to keep. ``None`` keeps the smallest number whose
            eigenvalues cover ``energy`` of the total. Either way the count
            is clipped to the rank of the centred data.
        energy: eigenvalue mass fraction used when ``k`` is ``None``.
    """
    x = _as_matrix(faces)
    n, d = x.shape
    if n < 2:
        raise TooFewFaces(f"need at least 2 faces, got {n}")
    if k is not None and k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    tol = (s[0] if s.size else 0.0) * max(n, d) * np.finfo(np.float64).eps
    rank = int(np.count_nonzero(s > tol))
    if rank == 0:
        raise TooFewFaces("all training faces are identical")
    eig = s[:rank] ** 2 / (n - 1)
    if k is None:
        frac = np.cumsum(eig) / eig.sum()
        keep = int(np.searchsorted(frac, energy - 1e-12) + 1)
    else:
        keep = k
    keep = min(keep, rank)
    basis = vt[:keep].copy()
    # deterministic sign: largest-magnitude loading positive
    idx = np.argmax(np.abs(basis), axis=1)
    signs = np.sign(basis[np.arange(keep), idx])
    basis *= signs[:, None]
    return EigenModel(_readonly(mean), _readonly(basis), _readonly(eig[:keep].copy()))


FaceLike = Union[AlignedFace, np.ndarray]


def project(model: EigenModel, face: FaceLike) -> np.ndarray:
    vec = face.vector if isinstance(face, AlignedFace) else np.asarray(face, dtype=np.float64)
    if vec.shape[-1] != model.dim:
        raise ValueError(f"face has {vec.shape[-1]} values, model expects {model.dim}")
    return (vec - model.mean) @ model.basis.T


def similarity(model: EigenModel, a: FaceLike, b: FaceLike) -> float:
    """Cosine similarity of the two faces' eigen-coefficients.

    Raises ZeroProjection when either face projects to (numerically) the
    origin, leaving the caller to decide what that means.
    """
    pa = project(model, a)
    pb = project(model, b)
    na = math.sqrt(math.fsum(pa * pa))
    nb = math.sqrt(math.fsum(pb * pb))
    if na < _ZERO_NORM or nb < _ZERO_NORM:
        raise ZeroProjection("face projects to the model mean")
    r = math.fsum(pa * pb) / (na * nb)
    return min(1.0, max(-1.0, r))


def _unit_coefficients(model: EigenModel, faces: Sequence[FaceLike]) -> np.ndarray:
    if len(faces) == 0:
        return np.zeros((0, model.k))
    coeffs = project(model, _as_matrix(faces))
    norms = np.sqrt(np.einsum("ij,ij->i", coeffs, coeffs))
    if np.any(norms < _ZERO_NORM):
        raise ZeroProjection("face projects to the model mean")
    return coeffs / norms[:, None]


def score_matrix(model: EigenModel, probes: Sequence[tuple[str, FaceLike]],
                 gallery: Sequence[tuple[str, FaceLike]]) -> "ScoreMatrix":
    """All probe x gallery similarities in one matrix product."""
    p = _unit_coefficients(model, [f for _, f in probes])
    g = _unit_coefficients(model, [f for _, f in gallery])
    scores = np.clip(p @ g.T, -1.0, 1.0)
    return ScoreMatrix(tuple(i for i, _ in probes), tuple(i for i, _ in gallery), scores)


# -- score matrices ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    probe_ids: tuple[str, ...]
    gallery_ids: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probe_ids", tuple(self.probe_ids))
        object.__setattr__(self, "gallery_ids", tuple(self.gallery_ids))
        scores = np.array(self.scores, dtype=np.float64)
        if scores.size == 0 and not self.probe_ids:
            scores = scores.reshape(0, len(self.gallery_ids))
        if scores.shape != (len(self.probe_ids), len(self.gallery_ids)):
            raise ShapeMismatch(
                f"scores shape {scores.shape} does not match "
                f"{len(self.probe_ids)} probes x {len(self.gallery_ids)} gallery ids")
        if not np.all(np.isfinite(scores)):
            raise NonFiniteScore("score matrix contains NaN or infinite values")
        for name, ids in (("probe", self.probe_ids), ("gallery", self.gallery_ids)):
            if len(set(ids)) != len(ids):
                raise ParseError(f"duplicate {name} id")
        object.__setattr__(self, "scores", _readonly(scores))

    def __eq__(self, other):
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        return (self.probe_ids == other.probe_ids and self.gallery_ids == other.gallery_ids
                and np.array_equal(self.scores, other.scores))

    @property
    def shape(self):
        return self.scores.shape

    def row(self, probe_id: str) -> dict[str, float]:
        i = self.probe_ids.index(probe_id)
        return dict(zip(self.gallery_ids, self.scores[i].tolist()))


def _check_id(ident: str) -> None:
    if not ident or "," in ident or "\n" in ident or ident != ident.strip() or ident.startswith("#"):
        raise ValueError(f"id {ident!r} cannot be written to a score file")


def export_scores(m: ScoreMatrix, path) -> None:
    for ident in m.probe_ids + m.gallery_ids:
        _check_id(ident)
    lines = ["#gallery," + ",".join(m.gallery_ids)]
    for pid, row in zip(m.probe_ids, m.scores):
        lines.append(pid + "," + ",".join("%.17g" % v for v in row))
    with open(os.fspath(path), "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def import_scores(path) -> ScoreMatrix:
    with open(os.fspath(path), encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ParseError("empty score file")
    if not lines[0].startswith("#gallery,"):
        raise ParseError("score file must start with '#gallery,'")
    gallery = lines[0][len("#gallery,"):].split(",")
    if not gallery or any(not g for g in gallery):
        raise ParseError("empty gallery id in header")
    probes, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if not fields[0]:
            raise ParseError(f"line {lineno}: empty probe id")
        if len(fields) - 1 != len(gallery):
            raise ShapeMismatch(
                f"line {lineno}: {len(fields) - 1} scores for {len(gallery)} gallery ids")
        try:
            values = [float(v) for v in fields[1:]]
        except ValueError:
            raise ParseError(f"line {lineno}: unparseable score") from None
        if not all(math.isfinite(v) for v in values):
            raise NonFiniteScore(f"line {lineno}: non-finite score")
        probes.append(fields[0])
        rows.append(values)
    return ScoreMatrix(tuple(probes), tuple(gallery),
                       np.array(rows, dtype=np.float64).reshape(len(probes), len(gallery)))
