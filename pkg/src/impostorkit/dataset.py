"""Manifest ingestion and impostor-set construction.

A manifest is a UTF-8 CSV file whose first line is exactly::

    image_path,subject_id,session_id,condition_tag,lx,ly,rx,ry

Relative image paths are resolved against the manifest's directory. The
manifest is the only source of identity, session and condition; the
directory layout means nothing.
"""
from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .conditions import BASELINE, QualityCondition, parse_condition
from .errors import (
    DuplicatePath,
    EmptyImpostorSet,
    EyesOutOfBounds,
    MissingField,
    ParseError,
    UnknownSubject,
)
from .imageio import read_image

MANIFEST_HEADER = ("image_path", "subject_id", "session_id", "condition_tag",
                   "lx", "ly", "rx", "ry")

Point = tuple[float, float]


@dataclass(frozen=True)
class ManifestEntry:
    image_path: str
    subject_id: str
    session_id: str
    condition: QualityCondition
    left_eye: Point
    right_eye: Point


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    root: str = "."

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        counts = Counter(e.image_path for e in self.entries)
        dups = sorted(p for p, c in counts.items() if c > 1)
        if dups:
            raise DuplicatePath(f"duplicate image_path: {dups[0]!r}")

    def __len__(self):
        return len(self.entries)

    def subjects(self, predicate: Optional[Callable[[ManifestEntry], bool]] = None) -> list[str]:
        """Distinct subject ids (sorted), optionally restricted by ``predicate``."""
        return sorted({e.subject_id for e in self.entries if predicate is None or predicate(e)})

    def sessions(self) -> list[str]:
        return sorted({e.session_id for e in self.entries})

    def resolve(self, entry: ManifestEntry) -> str:
        if os.path.isabs(entry.image_path):
            return entry.image_path
        return os.path.join(self.root, entry.image_path)

    def load_image(self, entry: ManifestEntry) -> np.ndarray:
        """Read the entry's image and check the eye coordinates against it."""
        img = read_image(self.resolve(entry))
        h, w = img.shape
        for x, y in (entry.left_eye, entry.right_eye):
            if not (0 <= x <= w - 1 and 0 <= y <= h - 1):
                raise EyesOutOfBounds(
                    f"eye ({x}, {y}) outside {w}x{h} image {entry.image_path!r}")
        return img

    def common_subjects(self, session_a: str, session_b: str,
                        condition: QualityCondition = BASELINE) -> list[str]:
        in_a = set(self.subjects(lambda e: e.session_id == session_a and e.condition == condition))
        in_b = set(self.subjects(lambda e: e.session_id == session_b and e.condition == condition))
        return sorted(in_a & in_b)


def _parse_float(text: str, lineno: int, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"line {lineno}: {name} is not a number: {text!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ParseError(f"line {lineno}: {name} is not finite")
    return value


def parse_manifest(text: str, root: str = ".") -> DatasetManifest:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("empty manifest: header line required")
    header = tuple(lines[0].lstrip("\ufeff").split(","))
    if header != MANIFEST_HEADER:
        raise ParseError(f"manifest header must be {','.join(MANIFEST_HEADER)!r}")
    entries = []
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < len(MANIFEST_HEADER):
            raise MissingField(f"line {lineno}: expected 8 fields, got {len(row)}")
        if len(row) > len(MANIFEST_HEADER):
            raise ParseError(f"line {lineno}: expected 8 fields, got {len(row)}")
        for name, value in zip(MANIFEST_HEADER, row):
            if not value.strip():
                raise MissingField(f"line {lineno}: empty {name}")
        path, subject, session, tag = (v.strip() for v in row[:4])
        try:
            cond = parse_condition(tag)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        lx, ly, rx, ry = (_parse_float(v, lineno, n) for n, v in zip(MANIFEST_HEADER[4:], row[4:]))
        entries.append(ManifestEntry(path, subject, session, cond, (lx, ly), (rx, ry)))
    return DatasetManifest(tuple(entries), root=root)


def load_manifest(path) -> DatasetManifest:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_manifest(text, root=os.path.dirname(os.path.abspath(path)))


def _fmt(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() else repr(float(v))


def write_manifest(path, entries: Iterable[ManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(MANIFEST_HEADER) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for e in entries:
            writer.writerow([e.image_path, e.subject_id, e.session_id, e.condition.tag,
                             _fmt(e.left_eye[0]), _fmt(e.left_eye[1]),
                             _fmt(e.right_eye[0]), _fmt(e.right_eye[1])])


# -- impostor sets -----------------------------------------------------------

@dataclass(frozen=True)
class ImpostorSet:
    probe_subject: str
    members: tuple[tuple[str, ManifestEntry], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        ids = [sid for sid, _ in self.members]
        if self.probe_subject in ids:
            raise ValueError("probe subject must not be one of its own impostors")
        if len(set(ids)) != len(ids):
            raise ValueError("impostor subjects must be distinct")
        if len(ids) < 2:
            raise EmptyImpostorSet(
                f"need at least 2 impostor subjects for {self.probe_subject!r}, got {len(ids)}")

    def __len__(self):
        return len(self.members)

    @property
    def subject_ids(self) -> list[str]:
        return [sid for sid, _ in self.members]


def one_per_subject(entries: Iterable[ManifestEntry]) -> dict[str, ManifestEntry]:
    """Pick the entry with the lexicographically smallest path for each subject.

    The result is ordered by subject id.
    """
    best: dict[str, ManifestEntry] = {}
    for e in entries:
        cur = best.get(e.subject_id)
        if cur is None or e.image_path < cur.image_path:
            best[e.subject_id] = e
    return {sid: best[sid] for sid in sorted(best)}


def pool_filter(sessions: Optional[Sequence[str]] = None,
                conditions: Optional[Sequence[QualityCondition]] = (BASELINE,),
                ) -> Callable[[ManifestEntry], bool]:
    """Build a predicate on session membership and condition (``None`` = any)."""
    sess = None if sessions is None else frozenset(sessions)
    conds = None if conditions is None else frozenset(conditions)

    def accept(e: ManifestEntry) -> bool:
        return (sess is None or e.session_id in sess) and (conds is None or e.condition in conds)

    return accept


def build_impostor_set(manifest: DatasetManifest, probe_subject: str,
                       pool_filter: Callable[[ManifestEntry], bool]) -> ImpostorSet:
    """One image per non-probe subject passing ``pool_filter``.

    Raises:
        UnknownSubject: the probe subject is absent from the manifest.
        EmptyImpostorSet: fewer than two impostor subjects remain.
    """
    if not any(e.subject_id == probe_subject for e in manifest.entries):
        raise UnknownSubject(probe_subject)
    chosen = one_per_subject(
        e for e in manifest.entries if e.subject_id != probe_subject and pool_filter(e))
    if len(chosen) < 2:
        raise EmptyImpostorSet(
            f"only {len(chosen)} impostor subject(s) available for {probe_subject!r}")
    return ImpostorSet(probe_subject, tuple(chosen.items()))
