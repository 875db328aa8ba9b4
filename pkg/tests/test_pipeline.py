import hashlib
import os
import shutil
from dataclasses import replace

import numpy as np
import pytest

from impostorkit.cli import main as cli_main
from impostorkit.conditions import BASELINE, GaussianNoise, MotionBlur, PoseLabel
from impostorkit.dataset import load_manifest, write_manifest
from impostorkit.errors import (
    ConfigError,
    MissingPoseImages,
    SubjectNotInBothSessions,
)
from impostorkit.pipeline import (
    ExperimentConfig,
    FaceSource,
    StabilityReport,
    parse_config,
    run_e1,
    run_e2,
)
from impostorkit.synthetic import write_average_face, write_synthetic_dataset


def e2_config(manifest, **kw):
    kw.setdefault("conditions", ["baseline"])
    return ExperimentConfig(manifest, "e2", reference_session="s1", varied_session="s2", **kw)


def e1_config(corpus, **kw):
    return ExperimentConfig(corpus["manifest"], "e1", probe_image=corpus["probe"],
                            probe_left_eye=corpus["left_eye"], probe_right_eye=corpus["right_eye"],
                            **kw)


@pytest.fixture(scope="module")
def blur_run(corpus):
    cfg = e2_config(corpus["manifest"], blur_lengths=[5, 9, 17, 31], master_seed=1)
    return run_e2(cfg)


# -- config ------------------------------------------------------------------

def test_parse_config(tmp_path):
    text = """
    # comment
    manifest = data/manifest.csv
    experiment = e2
    conditions = baseline, pose:19_1
    blur_lengths = 5, 31
    noise_variances = 0.3
    reference_session = 03
    varied_session = 04   # trailing comment
    seed = 42
    eigen_k = auto
    """
    cfg = parse_config(text, base_dir=str(tmp_path))
    assert cfg.manifest_path == os.path.join(str(tmp_path), "data/manifest.csv")
    assert cfg.conditions == (BASELINE, PoseLabel("19_1"), MotionBlur(5), MotionBlur(31),
                              GaussianNoise(0.3))
    assert cfg.master_seed == 42 and cfg.eigen_k is None
    assert parse_config(text, master_seed=7, jobs=3).master_seed == 7


@pytest.mark.parametrize("text", [
    "manifest = m.csv\nexperiment = e1\nconditions =\nprobe = p.png\n"
    "probe_left_eye = 1,1\nprobe_right_eye = 5,1\n",
    "manifest = m.csv\nexperiment = e2\nconditions = blur:5\nreference_session = a\n"
    "varied_session = b\n",
    "manifest = m.csv\nexperiment = e2\nreference_session = a\nvaried_session = a\n",
    "manifest = m.csv\nexperiment = e3\n",
    "manifest = m.csv\nexperiment = e2\nreference_session = a\nvaried_session = b\ncolour = red\n",
    "manifest = m.csv\nexperiment = e2\nreference_session = a\nvaried_session = b\nmatcher = lda\n",
    "manifest = m.csv\nexperiment = e1\n",
    "experiment = e1\n",
    "manifest m.csv\n",
])
def test_config_validation(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_empty_conditions_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig("m.csv", "e2", conditions=[], reference_session="a", varied_session="b")


# -- E1 ----------------------------------------------------------------------

def test_e1_single_condition_full_gallery(tmp_path):
    manifest = write_synthetic_dataset(tmp_path, n_subjects=250, sessions=("s1",), n_external=0,
                                       seed=5, fmt="pgm")
    le, re = write_average_face(tmp_path / "probe.png")
    cfg = ExperimentConfig(manifest, "e1", probe_image=str(tmp_path / "probe.png"),
                           probe_left_eye=le, probe_right_eye=re)
    res = run_e1(cfg)
    assert len(res.rows) == 1
    row = res.rows[0]
    assert row.condition == BASELINE and row.stats.n == 250 and len(row.scores) == 250
    assert all(-1 <= s <= 1 for s in row.scores)


def test_e1_noise_shifts_distribution(tmp_path):
    manifest = write_synthetic_dataset(tmp_path, n_subjects=30, sessions=("s1",), n_external=0,
                                       seed=11)
    le, re = write_average_face(tmp_path / "probe.png")
    cfg = ExperimentConfig(manifest, "e1", noise_variances=[0.3], probe_image=str(tmp_path / "probe.png"),
                           probe_left_eye=le, probe_right_eye=re)
    res = run_e1(cfg)
    base, noisy = res.row(BASELINE).stats, res.row(GaussianNoise(0.3)).stats
    assert abs(noisy.mean - base.mean) > base.iqr / 10


def test_e1_pose_conditions(corpus):
    res = run_e1(e1_config(corpus, conditions=["baseline", "pose:L30", "pose:R30"],
                           gallery_sessions=["s1", "s2"]))
    assert [r.stats.n for r in res.rows] == [40, 40, 40]
    assert res.rows[0].gallery_ids == res.rows[1].gallery_ids


def test_e1_missing_pose(corpus):
    with pytest.raises(MissingPoseImages):
        run_e1(e1_config(corpus, conditions=["baseline", "pose:19_1"]))


# -- E2 ----------------------------------------------------------------------

def test_aliased_sessions_correlate_perfectly(tmp_path, corpus):
    m = load_manifest(corpus["manifest"])
    entries = [replace(e, image_path=m.resolve(e)) for e in m.entries]
    os.makedirs(tmp_path / "copy")
    for e in m.entries:
        if e.session_id == "s1":
            dest = os.path.join("copy", os.path.basename(e.image_path))
            shutil.copy(m.resolve(e), tmp_path / dest)
            entries.append(replace(e, image_path=dest, session_id="s1copy"))
    path = tmp_path / "manifest.csv"
    write_manifest(path, entries)
    cfg = ExperimentConfig(str(path), "e2", reference_session="s1", varied_session="s1copy",
                           impostor_sessions=["ext"])
    rep = run_e2(cfg)
    assert rep.r(BASELINE) == pytest.approx(1.0, abs=1e-12)
    assert rep.reference_ium == rep.varied_ium[BASELINE]


def test_subject_missing_from_session(tmp_path, corpus):
    m = load_manifest(corpus["manifest"])
    drop = "subj007"
    entries = [replace(e, image_path=m.resolve(e)) for e in m.entries
               if not (e.subject_id == drop and e.session_id == "s2")]
    write_manifest(tmp_path / "m.csv", entries)
    with pytest.raises(SubjectNotInBothSessions, match=drop):
        run_e2(e2_config(str(tmp_path / "m.csv")))


def test_report_invariants(blur_run):
    rep = blur_run
    assert len(rep.subjects) == 40
    assert dict(rep.falloff)[BASELINE] == 1.0
    assert all(-1 <= r <= 1 for _, r in rep.correlations)
    assert all(0 <= u <= 1 for u in rep.reference_ium)
    assert set(rep.varied_ium) == {c for c, _ in rep.correlations}


def test_blur_falloff_is_nearly_monotone(blur_run):
    rs = [blur_run.r(MotionBlur(n)) for n in (5, 9, 17, 31)]
    seq = [blur_run.r(BASELINE)] + rs
    inversions = sum(b > a for a, b in zip(seq, seq[1:]))
    assert inversions <= 1
    assert rs[-1] < 0.7 * blur_run.r(BASELINE)


def test_impostor_pool_is_never_degraded(corpus):
    m = load_manifest(corpus["manifest"])

    def digest():
        h = hashlib.sha256()
        for e in sorted(m.entries, key=lambda e: e.image_path):
            with open(m.resolve(e), "rb") as fh:
                h.update(fh.read())
        return h.hexdigest()

    before = digest()
    source = FaceSource(m, master_seed=3)
    entry = m.entries[0]
    pristine = source.image(entry).copy()
    source.face(entry, GaussianNoise(0.3))
    source.face(entry, MotionBlur(31))
    assert np.array_equal(source.image(entry), pristine)
    assert not source.image(entry).flags.writeable
    run_e2(e2_config(corpus["manifest"], noise_variances=[0.3], blur_lengths=[31]))
    assert digest() == before


def test_imported_scores_reproduce_builtin(tmp_path, corpus):
    conds = ["baseline", "blur:31", "noise:0.3", "pose:R30"]
    builtin = run_e2(e2_config(corpus["manifest"], conditions=conds, master_seed=9))
    scores = tmp_path / "scores"
    scores.mkdir()
    base = ["match", "--manifest", corpus["manifest"], "--seed", "9"]
    assert cli_main(base + ["--probe-session", "s1", "--gallery-session", "s1",
                            "--gallery-session", "ext", "--out", str(scores / "reference.csv")]) == 0
    for tag in conds:
        out = scores / (tag.replace(":", "_") + ".csv")
        assert cli_main(base + ["--probe-session", "s2", "--gallery-session", "s2",
                                "--gallery-session", "ext", "--condition", tag,
                                "--out", str(out)]) == 0
    imported = run_e2(e2_config(corpus["manifest"], conditions=conds, matcher=f"scores:{scores}"))
    assert imported.matcher == f"scores:{scores}"
    assert imported.correlations == builtin.correlations
    assert imported.reference_ium == builtin.reference_ium


def test_imported_scores_e1(tmp_path, corpus):
    scores = tmp_path / "scores"
    scores.mkdir()
    (scores / "baseline.csv").write_text("#gallery,a,b,c,d\nprobe,0.1,0.5,0.2,0.9\n")
    (scores / "blur_5.csv").write_text("#gallery,a,b,c\nprobe,-3,4,5\n")
    cfg = ExperimentConfig(corpus["manifest"], "e1", blur_lengths=[5], matcher=f"scores:{scores}")
    res = run_e1(cfg)
    assert res.rows[0].scores == (0.1, 0.5, 0.2, 0.9)
    assert res.rows[1].stats.median == 4.0


def test_stability_report_needs_baseline():
    with pytest.raises(KeyError):
        StabilityReport("eigen", ((MotionBlur(5), 0.3),))
    with pytest.raises(ValueError):
        StabilityReport("eigen", ((BASELINE, 1.3),))
