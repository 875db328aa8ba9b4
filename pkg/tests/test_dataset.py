import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impostorkit.conditions import BASELINE, MotionBlur, PoseLabel
from impostorkit.dataset import (
    MANIFEST_HEADER,
    DatasetManifest,
    ManifestEntry,
    build_impostor_set,
    load_manifest,
    one_per_subject,
    parse_manifest,
    pool_filter,
    write_manifest,
)
from impostorkit.errors import (
    DuplicatePath,
    EmptyImpostorSet,
    EyesOutOfBounds,
    MissingField,
    ParseError,
    UnknownSubject,
)
from impostorkit.imageio import write_image

HEADER = ",".join(MANIFEST_HEADER)


def entry(path, subject, session="1", cond=BASELINE):
    return ManifestEntry(path, subject, session, cond, (10.0, 20.0), (30.0, 20.0))


def test_header_is_fixed():
    assert HEADER == "image_path,subject_id,session_id,condition_tag,lx,ly,rx,ry"


def test_full_scale_bookkeeping(tmp_path):
    # 250 subjects; 407 images from sessions {1,3}, 413 from {2,4}
    rows = [HEADER]
    rs = np.random.default_rng(0)
    group_a = [i % 250 for i in range(407)]
    group_b = [i % 250 for i in range(413)]
    for k, sid in enumerate(group_a):
        rows.append(f"a/{k:04d}.png,S{sid:03d},{rs.choice(['01', '03'])},baseline,10,20,30,20")
    for k, sid in enumerate(group_b):
        rows.append(f"b/{k:04d}.png,S{sid:03d},{rs.choice(['02', '04'])},baseline,10,20,30,20")
    path = tmp_path / "m.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    m = load_manifest(path)
    assert len(m) == 820
    assert len(m.subjects()) == 250


def test_parse_fields():
    m = parse_manifest(HEADER + "\nimg/a.png,s1,03,blur:5,10.5,20,30.25,21\n"
                       "img/b.png,s2,04,pose:19_1,1,2,3,4\n")
    a, b = m.entries
    assert a == ManifestEntry("img/a.png", "s1", "03", MotionBlur(5), (10.5, 20.0), (30.25, 21.0))
    assert b.condition == PoseLabel("19_1")


@pytest.mark.parametrize("text", ["", "\n", "image_path,subject_id\n",
                                  "image_path,subject_id,session_id,condition,lx,ly,rx,ry\n"])
def test_bad_header(text):
    with pytest.raises(ParseError):
        parse_manifest(text)


def test_duplicate_path():
    with pytest.raises(DuplicatePath):
        parse_manifest(HEADER + "\na.png,s1,1,baseline,1,1,3,1\na.png,s2,1,baseline,1,1,3,1\n")


@pytest.mark.parametrize("row,err", [
    ("a.png,s1,1,baseline,1,1,3", MissingField),
    ("a.png,,1,baseline,1,1,3,1", MissingField),
    ("a.png,s1,1,baseline,1,1,3,1,9", ParseError),
    ("a.png,s1,1,blurry,1,1,3,1", ParseError),
    ("a.png,s1,1,baseline,x,1,3,1", ParseError),
    ("a.png,s1,1,baseline,nan,1,3,1", ParseError),
])
def test_bad_rows(row, err):
    with pytest.raises(err):
        parse_manifest(HEADER + "\n" + row + "\n")


def test_write_and_load_round_trip(tmp_path):
    entries = [entry("x/1.png", "a"), entry("x/2.png", "b", "2", PoseLabel("08_1"))]
    write_manifest(tmp_path / "m.csv", entries)
    assert load_manifest(tmp_path / "m.csv").entries == tuple(entries)


def test_eye_bounds_checked_on_load(tmp_path):
    write_image(tmp_path / "a.png", np.zeros((20, 25)))
    (tmp_path / "m.csv").write_text(
        HEADER + "\na.png,s1,1,baseline,5,5,24,19\nb.png,s2,1,baseline,5,5,25,5\n")
    write_image(tmp_path / "b.png", np.zeros((20, 25)))
    m = load_manifest(tmp_path / "m.csv")
    assert m.load_image(m.entries[0]).shape == (20, 25)
    with pytest.raises(EyesOutOfBounds):
        m.load_image(m.entries[1])


def test_impostor_set_full_size():
    entries = [entry(f"mpie/s3/{i:03d}.png", f"mpie{i:03d}", "3") for i in range(198)]
    entries += [entry(f"mpie/s4/{i:03d}.png", f"mpie{i:03d}", "4") for i in range(198)]
    entries += [entry(f"cas/{i:04d}.png", f"cas{i:04d}", "caspeal") for i in range(1039)]
    entries += [entry(f"feret/{i:04d}.png", f"feret{i:04d}", "feret") for i in range(1006)]
    m = DatasetManifest(tuple(entries))
    s = build_impostor_set(m, "mpie042", pool_filter(["3", "caspeal", "feret"]))
    assert len(s) == 197 + 1039 + 1006 == 2242
    assert "mpie042" not in s.subject_ids
    assert all(e.session_id != "4" for _, e in s.members)


def test_only_probe_subject():
    m = DatasetManifest((entry("a.png", "p"), entry("b.png", "p", "2")))
    with pytest.raises(EmptyImpostorSet):
        build_impostor_set(m, "p", pool_filter())


def test_single_impostor_is_not_enough():
    m = DatasetManifest((entry("a.png", "p"), entry("b.png", "q")))
    with pytest.raises(EmptyImpostorSet):
        build_impostor_set(m, "p", pool_filter())


def test_unknown_probe():
    m = DatasetManifest((entry("a.png", "p"), entry("b.png", "q"), entry("c.png", "r")))
    with pytest.raises(UnknownSubject):
        build_impostor_set(m, "zz", pool_filter())


def test_session_filter_picks_smallest_path():
    entries = [entry("p.png", "p"), entry("z/q_s2.png", "q", "2"),
               entry("m/q_s1_b.png", "q", "1"), entry("c/q_s1_a.png", "q", "1"),
               entry("r.png", "r", "1"), entry("a/q_blur.png", "q", "1", MotionBlur(3))]
    candidates = [e.image_path for e in entries
                  if e.subject_id == "q" and e.session_id == "1" and e.condition == BASELINE]
    s = build_impostor_set(DatasetManifest(tuple(entries)), "p", pool_filter(["1"]))
    q = [e for sid, e in s.members if sid == "q"]
    assert len(q) == 1 and q[0].image_path == min(candidates) == "c/q_s1_a.png"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 12), st.sampled_from(["1", "2", "x"])),
                min_size=1, max_size=60),
       st.integers(0, 12))
def test_impostor_set_properties(rows, probe):
    entries = [entry(f"img{k:03d}.png", f"s{sid}", sess) for k, (sid, sess) in enumerate(rows)]
    m = DatasetManifest(tuple(entries))
    pid = f"s{probe}"
    accept = pool_filter(["1", "x"])
    expected = {e.subject_id for e in entries if accept(e) and e.subject_id != pid}
    if pid not in m.subjects():
        with pytest.raises(UnknownSubject):
            build_impostor_set(m, pid, accept)
        return
    if len(expected) < 2:
        with pytest.raises(EmptyImpostorSet):
            build_impostor_set(m, pid, accept)
        return
    s = build_impostor_set(m, pid, accept)
    assert pid not in s.subject_ids
    assert len(set(s.subject_ids)) == len(s) == len(expected)
    assert s == build_impostor_set(m, pid, accept)


def test_one_per_subject_orders_by_subject():
    chosen = one_per_subject([entry("b.png", "z"), entry("a.png", "y"), entry("0.png", "z")])
    assert list(chosen) == ["y", "z"]
    assert chosen["z"].image_path == "0.png"
