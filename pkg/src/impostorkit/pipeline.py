"""End-to-end experiments.

E1 scores one fixed probe image against a gallery (one image per
subject) whose quality is varied condition by condition and summarizes
each impostor-score distribution as box-plot statistics.

E2 computes uniqueness (IUM) scores for subjects captured in two
sessions. The reference session stays untouched; the varied session's
probe images are degraded one condition at a time while the impostor
pool stays at baseline quality. The Pearson correlation between the two
IUM vectors, per condition, measures how stable uniqueness is.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .conditions import (
    BASELINE,
    Baseline,
    GaussianNoise,
    MotionBlur,
    PoseLabel,
    QualityCondition,
    condition_stem,
    parse_condition,
)
from .dataset import (
    DatasetManifest,
    ManifestEntry,
    build_impostor_set,
    load_manifest,
    one_per_subject,
    pool_filter,
)
from .degrade import apply_condition, derive_seed
from .errors import ConfigError, MissingPoseImages, SubjectNotInBothSessions
from .imageio import read_image
from .matcher import AlignedFace, EigenModel, ScoreMatrix, align, import_scores, score_matrix, train_eigenmodel
from .stats import BoxStats, boxplot_stats, normalized_falloff, pearson
from .uniqueness import ImpostorScoreSet, ium

EIGEN = "eigen"


# -- configuration -----------------------------------------------------------

def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _point(value) -> tuple[float, float]:
    if isinstance(value, str):
        parts = _split(value)
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ConfigError(f"expected 'x,y', got {value!r}")
    return float(parts[0]), float(parts[1])


@dataclass
class ExperimentConfig:
    """Parameters for one E1 or E2 run.

    ``conditions`` lists the quality conditions in report order; any
    ``blur_lengths`` / ``noise_variances`` are appended as extra blur and
    noise conditions. Baseline must be among them.
    """

    manifest_path: str
    experiment: str
    conditions: Sequence[QualityCondition] = (BASELINE,)
    blur_lengths: Sequence[int] = ()
    noise_variances: Sequence[float] = ()
    master_seed: int = 0
    matcher: str = EIGEN
    reference_session: Optional[str] = None
    varied_session: Optional[str] = None
    impostor_sessions: Optional[Sequence[str]] = None
    gallery_sessions: Optional[Sequence[str]] = None
    eigen_k: Optional[int] = None
    output_dir: Optional[str] = None
    probe_image: Optional[str] = None
    probe_left_eye: Optional[tuple[float, float]] = None
    probe_right_eye: Optional[tuple[float, float]] = None
    probe_id: str = "probe"
    jobs: int = 1

    def __post_init__(self):
        self.experiment = self.experiment.lower()
        if self.experiment not in ("e1", "e2"):
            raise ConfigError(f"experiment must be e1 or e2, got {self.experiment!r}")
        conds = [parse_condition(c) if isinstance(c, str) else c for c in self.conditions]
        conds += [MotionBlur(int(n)) for n in self.blur_lengths]
        conds += [GaussianNoise(float(v)) for v in self.noise_variances]
        seen = []
        for c in conds:
            if c not in seen:
                seen.append(c)
        self.conditions = tuple(seen)
        self.blur_lengths = tuple(self.blur_lengths)
        self.noise_variances = tuple(self.noise_variances)
        if not self.conditions:
            raise ConfigError("conditions must not be empty")
        if BASELINE not in self.conditions:
            raise ConfigError("conditions must include baseline (the normalization anchor)")
        if not (0 <= int(self.master_seed) < 2 ** 64):
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        self.master_seed = int(self.master_seed)
        if self.matcher != EIGEN and not self.matcher.startswith("scores:"):
            raise ConfigError(f"matcher must be 'eigen' or 'scores:<dir>', got {self.matcher!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.experiment == "e2":
            if not self.reference_session or not self.varied_session:
                raise ConfigError("e2 needs reference_session and varied_session")
            if self.reference_session == self.varied_session:
                raise ConfigError("reference_session and varied_session must differ")
        if self.experiment == "e1" and self.matcher == EIGEN:
            if not self.probe_image or self.probe_left_eye is None or self.probe_right_eye is None:
                raise ConfigError("e1 with the eigen matcher needs probe_image and probe eyes")

    @property
    def scores_dir(self) -> Optional[str]:
        return self.matcher[len("scores:"):] if self.matcher.startswith("scores:") else None

    def as_dict(self) -> dict:
        return {
            "manifest_path": self.manifest_path,
            "experiment": self.experiment,
            "conditions": [c.tag for c in self.conditions],
            "master_seed": self.master_seed,
            "matcher": self.matcher,
            "reference_session": self.reference_session,
            "varied_session": self.varied_session,
            "impostor_sessions": None if self.impostor_sessions is None else list(self.impostor_sessions),
            "gallery_sessions": None if self.gallery_sessions is None else list(self.gallery_sessions),
            "eigen_k": self.eigen_k,
            "probe_image": self.probe_image,
            "probe_left_eye": self.probe_left_eye,
            "probe_right_eye": self.probe_right_eye,
            "probe_id": self.probe_id,
        }


_LIST_KEYS = {"conditions", "impostor_sessions", "gallery_sessions"}
_KEY_ALIASES = {"manifest": "manifest_path", "seed": "master_seed", "out": "output_dir",
                "probe": "probe_image"}


def parse_config(text: str, base_dir: str = ".", **overrides) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment).

    Relative paths are taken relative to ``base_dir``. Keyword
    ``overrides`` win over file values; ``None`` overrides are ignored.
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = _KEY_ALIASES.get(key.strip(), key.strip())
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    raw.update({k: v for k, v in overrides.items() if v is not None})

    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kw = {}
    for key, value in raw.items():
        if not isinstance(value, str):
            kw[key] = value
        elif key in _LIST_KEYS:
            kw[key] = _split(value)
        elif key == "blur_lengths":
            kw[key] = [int(v) for v in _split(value)]
        elif key == "noise_variances":
            kw[key] = [float(v) for v in _split(value)]
        elif key in ("master_seed", "jobs"):
            kw[key] = int(value)
        elif key == "eigen_k":
            kw[key] = None if value in ("", "auto") else int(value)
        elif key in ("probe_left_eye", "probe_right_eye"):
            kw[key] = _point(value)
        else:
            kw[key] = value
    for key in ("manifest_path", "probe_image", "output_dir"):
        if isinstance(kw.get(key), str) and not os.path.isabs(kw[key]):
            kw[key] = os.path.join(base_dir, kw[key])
    if isinstance(kw.get("matcher"), str) and kw["matcher"].startswith("scores:"):
        d = kw["matcher"][len("scores:"):]
        if not os.path.isabs(d):
            kw["matcher"] = "scores:" + os.path.join(base_dir, d)
    if "manifest_path" not in kw or "experiment" not in kw:
        raise ConfigError("config needs at least 'manifest' and 'experiment'")
    try:
        return ExperimentConfig(**kw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path, **overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)), **overrides)


# -- shared machinery --------------------------------------------------------

class FaceSource:
    """Loads, degrades and aligns manifest images.

    Decoded images are cached read-only so the undegraded pool can never be
    modified in place by a degradation.
    """

    def __init__(self, manifest: DatasetManifest, master_seed: int, jobs: int = 1):
        self.manifest = manifest
        self.master_seed = master_seed
        self.jobs = jobs
        self._images: dict[str, np.ndarray] = {}

    def image(self, entry: ManifestEntry) -> np.ndarray:
        img = self._images.get(entry.image_path)
        if img is None:
            img = self.manifest.load_image(entry)
            img.setflags(write=False)
            self._images[entry.image_path] = img
        return img

    def degraded(self, entry: ManifestEntry, cond: QualityCondition) -> np.ndarray:
        seed = derive_seed(self.master_seed, entry.image_path, cond.tag)
        return apply_condition(self.image(entry), cond, seed)

    def face(self, entry: ManifestEntry, cond: QualityCondition = BASELINE) -> AlignedFace:
        # degrade first, then align: the order a real capture would see
        return align(self.degraded(entry, cond), entry.left_eye, entry.right_eye)

    def faces(self, items: Iterable[tuple[ManifestEntry, QualityCondition]]) -> list[AlignedFace]:
        items = list(items)
        for e, _ in items:  # fill the cache serially; workers only read it
            self.image(e)
        if self.jobs == 1 or len(items) < 2:
            return [self.face(e, c) for e, c in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(lambda ec: self.face(*ec), items))


def _training_entries(manifest: DatasetManifest, sessions: Optional[Iterable[str]]) -> list[ManifestEntry]:
    accept = pool_filter(sessions=None if sessions is None else list(sessions))
    return sorted((e for e in manifest.entries if accept(e)), key=lambda e: e.image_path)


def _train(source: FaceSource, entries: list[ManifestEntry], k: Optional[int]) -> EigenModel:
    return train_eigenmodel(source.faces((e, BASELINE) for e in entries), k)


def _load_scores(config: ExperimentConfig, name: str) -> ScoreMatrix:
    path = os.path.join(config.scores_dir, name + ".csv")
    if not os.path.exists(path):
        raise FileNotFoundError(f"score file for {name!r} not found: {path}")
    return import_scores(path)


def _condition_entries(manifest: DatasetManifest, cond: QualityCondition,
                       sessions: Optional[Sequence[str]], subjects: Optional[Sequence[str]] = None,
                       ) -> dict[str, ManifestEntry]:
    """Images standing for ``cond``: pose-labelled captures or baseline ones to degrade."""
    source_cond = cond if isinstance(cond, PoseLabel) else BASELINE
    chosen = one_per_subject(e for e in manifest.entries
                             if pool_filter(sessions, (source_cond,))(e)
                             and (subjects is None or e.subject_id in subjects))
    if isinstance(cond, PoseLabel):
        if not chosen:
            raise MissingPoseImages(f"no images labelled {cond.tag!r} in the manifest")
        if subjects is not None:
            missing = sorted(set(subjects) - set(chosen))
            if missing:
                raise MissingPoseImages(f"{cond.tag!r} missing for subject(s) {', '.join(missing[:5])}")
    return chosen


# -- E1 ----------------------------------------------------------------------

@dataclass(frozen=True)
class E1Row:
    condition: QualityCondition
    stats: BoxStats
    scores: tuple[float, ...]
    gallery_ids: tuple[str, ...]


@dataclass(frozen=True)
class E1Result:
    matcher: str
    rows: tuple[E1Row, ...]

    def row(self, cond: QualityCondition) -> E1Row:
        return next(r for r in self.rows if r.condition == cond)


def run_e1(config: ExperimentConfig, manifest: Optional[DatasetManifest] = None) -> E1Result:
    """Impostor-score distribution of a fixed probe versus gallery quality."""
    if config.experiment != "e1":
        raise ConfigError("run_e1 needs an e1 config")
    manifest = manifest or load_manifest(config.manifest_path)
    sessions = config.gallery_sessions
    imported = config.scores_dir is not None
    if not imported:
        source = FaceSource(manifest, config.master_seed, config.jobs)
        model = _train(source, _training_entries(manifest, sessions), config.eigen_k)
        probe = align(read_image(config.probe_image), config.probe_left_eye, config.probe_right_eye)
    rows = []
    for cond in config.conditions:
        gallery = _condition_entries(manifest, cond, sessions)
        if imported:
            m = _load_scores(config, condition_stem(cond))
            if config.probe_id in m.probe_ids:
                i = m.probe_ids.index(config.probe_id)
            elif len(m.probe_ids) == 1:
                i = 0
            else:
                raise ConfigError(f"probe id {config.probe_id!r} not in {condition_stem(cond)}.csv")
            ids, scores = m.gallery_ids, tuple(m.scores[i].tolist())
        else:
            faces = source.faces((e, cond) for e in gallery.values())
            m = score_matrix(model, [(config.probe_id, probe)], list(zip(gallery, faces)))
            ids, scores = m.gallery_ids, tuple(m.scores[0].tolist())
        rows.append(E1Row(cond, boxplot_stats(scores), scores, tuple(ids)))
    return E1Result(config.matcher if imported else EIGEN, tuple(rows))


# -- E2 ----------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    """Cross-session IUM correlations per condition for one matcher."""

    matcher: str
    correlations: tuple[tuple[QualityCondition, float], ...]
    subjects: tuple[str, ...] = ()
    reference_ium: tuple[float, ...] = ()
    varied_ium: dict = field(default_factory=dict)  # condition -> tuple of u

    def __post_init__(self):
        object.__setattr__(self, "correlations", tuple(self.correlations))
        for _, r in self.correlations:
            if not -1.0 <= r <= 1.0:
                raise ValueError(f"correlation {r} outside [-1, 1]")
        self.falloff  # validates the baseline anchor

    @property
    def baseline_r(self) -> float:
        return dict(self.correlations)[BASELINE]

    @property
    def falloff(self) -> list[tuple[QualityCondition, float]]:
        return normalized_falloff(self.correlations, BASELINE)

    def r(self, cond: QualityCondition) -> float:
        return dict(self.correlations)[cond]


def _ium_vector(subjects, matrix: ScoreMatrix, impostors: dict[str, list[str]]) -> list[float]:
    col = {g: j for j, g in enumerate(matrix.gallery_ids)}
    out = []
    for sid in subjects:
        row = matrix.scores[matrix.probe_ids.index(sid)]
        scores = [row[col[g]] for g in impostors[sid]]
        out.append(ium(ImpostorScoreSet(sid, scores)).u)
    return out


def _imported_ium(config: ExperimentConfig, name: str, subjects) -> list[float]:
    m = _load_scores(config, name)
    missing = [s for s in subjects if s not in m.probe_ids]
    if missing:
        raise ConfigError(f"{name}.csv lacks probe rows for {', '.join(missing[:5])}")
    impostors = {s: [g for g in m.gallery_ids if g != s] for s in subjects}
    return _ium_vector(subjects, m, impostors)


def experiment_subjects(manifest: DatasetManifest, ref: str, var: str) -> list[str]:
    """Subjects of the two sessions; each must have a baseline image in both."""
    in_ref = set(manifest.subjects(lambda e: e.session_id == ref))
    in_var = set(manifest.subjects(lambda e: e.session_id == var))
    both = set(manifest.common_subjects(ref, var))
    lonely = sorted((in_ref | in_var) - both)
    if lonely:
        raise SubjectNotInBothSessions(
            f"{len(lonely)} subject(s) lack a baseline image in both {ref!r} and {var!r}: "
            + ", ".join(lonely[:5]))
    if len(both) < 3:
        raise SubjectNotInBothSessions(f"need at least 3 common subjects, found {len(both)}")
    return sorted(both)


def run_e2(config: ExperimentConfig, manifest: Optional[DatasetManifest] = None) -> StabilityReport:
    """IUM stability across sessions while the varied session's probes degrade."""
    if config.experiment != "e2":
        raise ConfigError("run_e2 needs an e2 config")
    manifest = manifest or load_manifest(config.manifest_path)
    ref, var = config.reference_session, config.varied_session
    subjects = experiment_subjects(manifest, ref, var)
    extra = (list(config.impostor_sessions) if config.impostor_sessions is not None
             else [s for s in manifest.sessions() if s not in (ref, var)])
    conds = config.conditions

    if config.scores_dir is not None:
        ref_u = _imported_ium(config, "reference", subjects)
        varied = {c: _imported_ium(config, condition_stem(c), subjects) for c in conds}
    else:
        source = FaceSource(manifest, config.master_seed, config.jobs)
        model = _train(source, _training_entries(manifest, [ref, var, *extra]), config.eigen_k)

        def side(session):
            sets = {s: build_impostor_set(manifest, s, pool_filter([session, *extra]))
                    for s in subjects}
            pool = one_per_subject(m for st in sets.values() for _, m in st.members)
            pool_faces = source.faces((e, BASELINE) for e in pool.values())
            gallery = list(zip(pool, pool_faces))
            return {s: st.subject_ids for s, st in sets.items()}, gallery

        ref_imp, ref_gallery = side(ref)
        var_imp, var_gallery = side(var)
        ref_entries = _condition_entries(manifest, BASELINE, [ref], subjects)
        ref_faces = source.faces((ref_entries[s], BASELINE) for s in subjects)
        ref_u = _ium_vector(subjects, score_matrix(model, list(zip(subjects, ref_faces)), ref_gallery),
                            ref_imp)
        varied = {}
        for cond in conds:
            entries = _condition_entries(manifest, cond, [var], subjects)
            faces = source.faces((entries[s], cond) for s in subjects)
            m = score_matrix(model, list(zip(subjects, faces)), var_gallery)
            varied[cond] = _ium_vector(subjects, m, var_imp)

    corrs = tuple((c, pearson(ref_u, varied[c])) for c in conds)
    return StabilityReport(
        matcher=EIGEN if config.scores_dir is None else config.matcher,
        correlations=corrs,
        subjects=tuple(subjects),
        reference_ium=tuple(ref_u),
        varied_ium={c: tuple(v) for c, v in varied.items()},
    )
