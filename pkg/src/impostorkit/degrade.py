"""Synthetic quality degradations: horizontal motion blur and Gaussian noise.

Both functions are pure. Noise is drawn from numpy's ``PCG64`` bit
generator seeded with the caller's 64-bit seed and sampled with
``Generator.standard_normal`` (ziggurat method), scaled by
``sqrt(variance)``; the same seed always yields the same noise field.
"""
from __future__ import annotations

import hashlib
import struct

import numpy as np

from .conditions import Baseline, GaussianNoise, MotionBlur, PoseLabel, QualityCondition
from .errors import BadLength, BadVariance, KernelTooWide
from .imageio import as_gray_image

_SEED_MASK = (1 << 64) - 1


def motion_kernel(length: int) -> np.ndarray:
    """1 x N averaging kernel for ``length``-pixel horizontal motion."""
    MotionBlur(length)  # validates
    return np.full(length, 1.0 / length)


def motion_blur(img, length: int) -> np.ndarray:
    """Convolve each row with a uniform 1 x ``length`` kernel.

    Edges are handled by replicating the border pixel, so constant images
    are fixed points and no dark frame is introduced. The result is
    clipped to the input's own ``[min, max]``, which it already respects up
    to rounding because every output pixel is a convex combination.
    """
    if isinstance(length, bool) or not isinstance(length, (int, np.integer)):
        raise BadLength(f"blur length must be an int, got {length!r}")
    if length < 3 or length % 2 == 0:
        raise BadLength(f"blur length must be odd and >= 3, got {length}")
    img = as_gray_image(img)
    h, w = img.shape
    if length > w:
        raise KernelTooWide(f"kernel of {length} exceeds image width {w}")
    half = length // 2
    padded = np.pad(img, ((0, 0), (half, half)), mode="edge")
    acc = np.zeros_like(img)
    for k in range(length):
        acc += padded[:, k:k + w]
    out = acc / length
    return np.clip(out, img.min(), img.max())


def gaussian_noise_field(shape, variance: float, seed: int) -> np.ndarray:
    """The zero-mean noise field that :func:`gaussian_noise` adds."""
    variance = float(variance)
    if not np.isfinite(variance) or variance <= 0:
        raise BadVariance(f"noise variance must be > 0, got {variance!r}")
    rng = np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))
    return rng.standard_normal(shape) * np.sqrt(variance)


def gaussian_noise(img, variance: float, seed: int, *, clamp: bool = True) -> np.ndarray:
    """Add i.i.d. ``N(0, variance)`` noise and clamp to ``[0, 1]``.

    ``clamp=False`` returns the raw sum, which may leave the unit range;
    it exists for checking the noise statistics.
    """
    img = as_gray_image(img)
    out = img + gaussian_noise_field(img.shape, variance, seed)
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    return out


def derive_seed(master_seed: int, image_path: str, condition_tag: str) -> int:
    """Stable 64-bit seed for one (image, condition) work item."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", int(master_seed) & _SEED_MASK))
    h.update(image_path.encode("utf-8"))
    h.update(b"\x00")
    h.update(condition_tag.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def apply_condition(img, condition: QualityCondition, seed: int = 0) -> np.ndarray:
    """Degrade ``img`` according to ``condition``.

    Baseline and pose conditions return the image unchanged; pose is a
    property of the captured image and is never synthesized.
    """
    if isinstance(condition, MotionBlur):
        return motion_blur(img, condition.length)
    if isinstance(condition, GaussianNoise):
        return gaussian_noise(img, condition.variance, seed)
    if isinstance(condition, (Baseline, PoseLabel)):
        return as_gray_image(img)
    raise TypeError(f"not a quality condition: {condition!r}")
