import numpy as np
import pytest
from PIL import Image

from impostorkit.conditions import (
    BASELINE,
    GaussianNoise,
    MotionBlur,
    PoseLabel,
    condition_stem,
    parse_condition,
)
from impostorkit.errors import BadImage, BadLength, BadVariance, ParseError
from impostorkit.imageio import read_image, write_image


@pytest.mark.parametrize("tag,cond", [
    ("baseline", BASELINE),
    ("blur:31", MotionBlur(31)),
    ("noise:0.3", GaussianNoise(0.3)),
    ("noise:0.007", GaussianNoise(0.007)),
    ("pose:19_1", PoseLabel("19_1")),
])
def test_tag_round_trip(tag, cond):
    assert parse_condition(tag) == cond
    assert cond.tag == tag


@pytest.mark.parametrize("tag", ["", "blur", "blur:", "blur:x", "noise:abc", "zoom:3", "pose:"])
def test_bad_tags(tag):
    with pytest.raises(ParseError):
        parse_condition(tag)


def test_condition_invariants():
    with pytest.raises(BadLength):
        parse_condition("blur:4")
    with pytest.raises(BadLength):
        MotionBlur(1)
    with pytest.raises(BadVariance):
        GaussianNoise(0.0)
    assert condition_stem(MotionBlur(5)) == "blur_5"


@pytest.mark.parametrize("ext", ["png", "pgm"])
def test_image_round_trip(tmp_path, rng, ext):
    px = rng.integers(0, 256, size=(13, 17))
    img = px / 255.0
    path = tmp_path / f"x.{ext}"
    write_image(path, img)
    back = read_image(path)
    assert back.shape == (13, 17)
    np.testing.assert_array_equal(np.round(back * 255), px)


def test_write_rounds_to_nearest(tmp_path):
    path = tmp_path / "r.pgm"
    write_image(path, np.array([[0.0, 0.5, 1.0, 0.1]]))
    assert np.round(read_image(path) * 255).tolist() == [[0, 128, 255, 26]]


def test_ascii_pgm(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P2\n# comment\n3 1\n15\n0 15 5\n")
    np.testing.assert_allclose(read_image(path), [[0.0, 1.0, 85 / 255]])


def test_color_png_is_channel_average(tmp_path):
    rgb = np.zeros((2, 2, 3), dtype=np.uint8)
    rgb[0, 0] = (30, 60, 90)
    path = tmp_path / "c.png"
    Image.fromarray(rgb).save(path)
    assert read_image(path)[0, 0] == pytest.approx(60 / 255)


def test_write_rejects_out_of_range(tmp_path):
    with pytest.raises(BadImage):
        write_image(tmp_path / "bad.png", np.array([[1.2]]))
