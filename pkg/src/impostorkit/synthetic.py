"""Deterministic synthetic face dataset used as the bundled desk-scale corpus.

Each subject is a parametric face: an elliptical head, brows, eyes,
nose, mouth and a set of identity-specific soft blobs, all laid out in a
face frame where the eye centres sit at (-0.5, 0) and (0.5, 0) in units
of inter-eye distance. A capture session renders that face with its own
head placement, lighting ramp, small shape jitter and sensor noise, and
records the exact eye centres for the manifest.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .conditions import BASELINE, PoseLabel
from .dataset import ManifestEntry, write_manifest
from .imageio import write_image

IMAGE_WIDTH = 96
IMAGE_HEIGHT = 112
N_BLOBS = 24


@dataclass(frozen=True)
class FaceParams:
    tone: float
    head_rx: float
    head_ry: float
    head_cy: float
    brow_y: float
    brow_len: float
    brow_dark: float
    eye_size: float
    nose_len: float
    nose_w: float
    mouth_y: float
    mouth_w: float
    mouth_dark: float
    blob_xy: np.ndarray  # (N_BLOBS, 2) face-frame centres
    blob_sigma: np.ndarray  # (N_BLOBS,)
    blob_amp: np.ndarray  # (N_BLOBS,)


def random_face(rng: np.random.Generator) -> FaceParams:
    return FaceParams(
        tone=rng.uniform(0.45, 0.70),
        head_rx=rng.uniform(0.95, 1.2),
        head_ry=rng.uniform(1.25, 1.55),
        head_cy=rng.uniform(0.45, 0.65),
        brow_y=rng.uniform(-0.35, -0.22),
        brow_len=rng.uniform(0.22, 0.38),
        brow_dark=rng.uniform(0.10, 0.35),
        eye_size=rng.uniform(0.07, 0.11),
        nose_len=rng.uniform(0.45, 0.7),
        nose_w=rng.uniform(0.08, 0.16),
        mouth_y=rng.uniform(0.95, 1.2),
        mouth_w=rng.uniform(0.25, 0.45),
        mouth_dark=rng.uniform(0.10, 0.30),
        blob_xy=np.column_stack([rng.uniform(-0.85, 0.85, N_BLOBS),
                                 rng.uniform(-0.55, 1.45, N_BLOBS)]),
        blob_sigma=rng.uniform(0.05, 0.12, N_BLOBS),
        blob_amp=rng.uniform(-0.12, 0.12, N_BLOBS),
    )


def _g(d2, s):
    return np.exp(-d2 / (2.0 * s * s))


def render_face(face: FaceParams, fx: np.ndarray, fy: np.ndarray,
                jitter: float = 0.0, rng: np.random.Generator | None = None,
                pose: float = 0.0) -> np.ndarray:
    """Evaluate the face's luminance at face-frame coordinates (fx, fy).

    ``pose`` squeezes the far half of the face horizontally, a crude
    stand-in for a yaw change.
    """
    if pose:
        fx = np.where(fx * np.sign(pose) > 0, fx * (1 + abs(pose)), fx * (1 - 0.5 * abs(pose)))
    j = (lambda n: rng.normal(0.0, jitter, n)) if (rng is not None and jitter) else (lambda n: np.zeros(n))
    head = ((fx / face.head_rx) ** 2 + ((fy - face.head_cy) / face.head_ry) ** 2)
    skin = 1.0 / (1.0 + np.exp((head - 1.0) * 12.0))
    lum = 0.22 + (face.tone - 0.22) * skin
    nb = len(face.blob_amp)
    dxy = j(2 * nb).reshape(nb, 2)
    for (bx, by), (ox, oy), s, a in zip(face.blob_xy, dxy, face.blob_sigma, face.blob_amp):
        lum = lum + a * skin * _g((fx - bx - ox) ** 2 + (fy - by - oy) ** 2, s)
    for side in (-0.5, 0.5):
        lum = lum - 0.35 * _g((fx - side) ** 2 + (fy ** 2) * 2.5, face.eye_size)
        by = face.brow_y + j(1)[0]
        brow = _g(((fy - by) / 0.035) ** 2, 1.0) * _g(((fx - side) / face.brow_len) ** 2, 1.0)
        lum = lum - face.brow_dark * brow
    nose = _g((fx / face.nose_w) ** 2, 1.0) * np.clip(fy / face.nose_len, 0, 1) ** 2 \
        * _g(((fy - face.nose_len) / 0.08) ** 2, 1.0)
    lum = lum - 0.18 * nose
    my = face.mouth_y + j(1)[0]
    mw = face.mouth_w * (1.0 + j(1)[0])
    mouth = _g(((fy - my) / 0.045) ** 2, 1.0) * _g((fx / mw) ** 2, 1.0)
    lum = lum - face.mouth_dark * mouth
    return lum


@dataclass(frozen=True)
class SessionStyle:
    """How strongly one capture differs from another."""

    shift: float = 4.0  # px, head placement
    eye_dist: tuple[float, float] = (30.0, 36.0)
    roll_deg: float = 3.0
    light: float = 0.03  # amplitude of the lighting ramp
    jitter: float = 0.015  # face-frame units, feature placement
    sensor_noise: float = 0.008


def render_capture(face: FaceParams, rng: np.random.Generator,
                   style: SessionStyle = SessionStyle(), pose: float = 0.0,
                   size=(IMAGE_WIDTH, IMAGE_HEIGHT)):
    """Render one capture; returns ``(image, left_eye, right_eye)``."""
    w, h = size
    d = rng.uniform(*style.eye_dist)
    roll = np.deg2rad(rng.uniform(-style.roll_deg, style.roll_deg))
    cx = w / 2.0 + rng.uniform(-style.shift, style.shift)
    cy = 0.4 * h + rng.uniform(-style.shift, style.shift)
    a = d * np.cos(roll)
    b = d * np.sin(roll)
    # face frame -> image: (x, y) = (a*fx - b*fy + cx, b*fx + a*fy + cy)
    left = (float(-0.5 * a + cx), float(-0.5 * b + cy))
    right = (float(0.5 * a + cx), float(0.5 * b + cy))
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    px, py = xx - cx, yy - cy
    fx = (a * px + b * py) / (d * d)
    fy = (-b * px + a * py) / (d * d)
    lum = render_face(face, fx, fy, style.jitter, rng, pose)
    theta = rng.uniform(0, 2 * np.pi)
    ramp = (np.cos(theta) * (xx / w - 0.5) + np.sin(theta) * (yy / h - 0.5))
    lum = lum * (1.0 + style.light * 2.0 * ramp) + rng.normal(0, 0.02)
    lum = lum + rng.normal(0.0, style.sensor_noise, lum.shape)
    return np.clip(lum, 0.0, 1.0), left, right


def average_face() -> FaceParams:
    """Face with every parameter at the middle of its range and no blobs."""
    return FaceParams(
        tone=0.575, head_rx=1.075, head_ry=1.4, head_cy=0.55, brow_y=-0.285,
        brow_len=0.3, brow_dark=0.225, eye_size=0.09, nose_len=0.575, nose_w=0.12,
        mouth_y=1.075, mouth_w=0.35, mouth_dark=0.2,
        blob_xy=np.zeros((0, 2)), blob_sigma=np.zeros(0), blob_amp=np.zeros(0),
    )


def write_average_face(path, size=(IMAGE_WIDTH, IMAGE_HEIGHT)):
    """Render the average face upright and centred; returns its eye centres."""
    w, h = size
    d = 33.0
    cx, cy = w / 2.0, 0.4 * h
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    lum = render_face(average_face(), (xx - cx) / d, (yy - cy) / d)
    write_image(path, np.clip(lum, 0.0, 1.0))
    return (cx - d / 2, cy), (cx + d / 2, cy)


def write_synthetic_dataset(out_dir, n_subjects: int = 40, sessions=("s1", "s2"),
                            n_external: int = 80, external_session: str = "ext",
                            poses=(), seed: int = 2013, fmt: str = "png",
                            style: SessionStyle = SessionStyle()) -> str:
    """Render a synthetic multi-session face corpus and its manifest.

    Every one of ``n_subjects`` subjects gets one baseline capture per
    session; ``n_external`` further subjects get a single capture in
    ``external_session`` (an imported impostor population). ``poses`` is
    a sequence of ``(label, yaw)`` pairs rendered for the last session.
    Returns the manifest path.
    """
    os.makedirs(out_dir, exist_ok=True)
    master = np.random.SeedSequence(seed)
    subj_seq, ext_seq = master.spawn(2)
    entries = []

    def emit(face, sid, session, cond, name, rng, pose=0.0):
        img, le, re = render_capture(face, rng, style, pose)
        rel = f"{session}/{name}.{fmt}"
        os.makedirs(os.path.join(out_dir, session), exist_ok=True)
        write_image(os.path.join(out_dir, rel), img)
        entries.append(ManifestEntry(rel, sid, session, cond,
                                     (round(le[0], 3), round(le[1], 3)),
                                     (round(re[0], 3), round(re[1], 3))))

    for i, child in enumerate(subj_seq.spawn(n_subjects)):
        face_seq, *cap_seqs = child.spawn(1 + len(sessions) + len(poses))
        face = random_face(np.random.default_rng(face_seq))
        sid = f"subj{i:03d}"
        for session, cs in zip(sessions, cap_seqs):
            emit(face, sid, session, BASELINE, sid, np.random.default_rng(cs))
        for (label, yaw), cs in zip(poses, cap_seqs[len(sessions):]):
            emit(face, sid, sessions[-1], PoseLabel(label), f"{sid}_pose_{label}",
                 np.random.default_rng(cs), pose=yaw)
    for i, child in enumerate(ext_seq.spawn(n_external)):
        face_seq, cs = child.spawn(2)
        face = random_face(np.random.default_rng(face_seq))
        sid = f"ext{i:04d}"
        emit(face, sid, external_session, BASELINE, sid, np.random.default_rng(cs))
    path = os.path.join(out_dir, "manifest.csv")
    write_manifest(path, entries)
    return path
