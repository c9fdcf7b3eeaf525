"""Illuminant estimation and von Kries gain correction.

Images are float arrays of shape ``(height, width, 3)`` with values in
[0, 1]. The shades-of-gray estimator takes the per-channel Minkowski
p-mean; ``p = 1`` is gray world and ``p = inf`` is max-RGB.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidConfig, InvalidImage, IoFailure, ZeroChannel

GAMMA = 2.2


class Method(str, enum.Enum):
    gray_world = "gray_world"
    shades_of_gray = "shades_of_gray"
    max_rgb = "max_rgb"


class ClipPolicy(str, enum.Enum):
    clip_to_one = "clip_to_one"
    rescale_if_overflow = "rescale_if_overflow"


@dataclass(frozen=True)
class NormalizationConfig:
    method: Method = Method.shades_of_gray
    p: float = 6.0
    clip_policy: ClipPolicy = ClipPolicy.clip_to_one
    gamma: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "clip_policy", ClipPolicy(self.clip_policy))
        if not self.p >= 1:
            raise InvalidConfig(f"Minkowski order p must be >= 1, got {self.p}")

    @property
    def order(self) -> float:
        """Effective norm order for the selected method."""
        if self.method is Method.gray_world:
            return 1.0
        if self.method is Method.max_rgb:
            return math.inf
        return float(self.p)


@dataclass(frozen=True)
class IlluminantEstimate:
    m_r: float
    m_g: float
    m_b: float
    p: float

    def as_array(self) -> np.ndarray:
        return np.array([self.m_r, self.m_g, self.m_b])


def as_image(image) -> np.ndarray:
    """Validate and return ``image`` as a float64 ``(h, w, 3)`` array."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidImage(f"expected a non-empty (h, w, 3) image, got shape {img.shape}")
    if not np.all((img >= 0.0) & (img <= 1.0)):
        raise InvalidImage("pixel values must lie in [0, 1]")
    return img


def minkowski_means(image, p: float) -> np.ndarray:
    """Per-channel Minkowski p-mean ``(mean(I_c ** p)) ** (1/p)``."""
    img = np.asarray(image, dtype=np.float64).reshape(-1, 3)
    if math.isinf(p):
        return img.max(axis=0)
    if p == 1:
        return img.mean(axis=0)
    return np.mean(img**p, axis=0) ** (1.0 / p)


def estimate_illuminant(image, config: NormalizationConfig = NormalizationConfig()) -> IlluminantEstimate:
    img = as_image(image)
    p = config.order
    m = minkowski_means(img, p)
    if np.any(m <= 0):
        zero = [c for c, v in zip("rgb", m) if v <= 0]
        raise ZeroChannel(f"channel(s) {','.join(zero)} identically zero; gain undefined")
    return IlluminantEstimate(float(m[0]), float(m[1]), float(m[2]), p)


def apply_gains(image, illum: IlluminantEstimate, clip_policy=ClipPolicy.clip_to_one) -> np.ndarray:
    """Scale each channel by ``mu / m_c`` where ``mu`` is the mean of the
    channel estimates, then enforce the [0, 1] range per ``clip_policy``.
    """
    img = as_image(image)
    m = illum.as_array()
    if np.any(m <= 0):
        raise ZeroChannel("illuminant components must be positive")
    if m[0] == m[1] == m[2]:
        # neutral illuminant: exact unit gains keep the image bit-identical
        gains = np.ones(3)
    else:
        gains = (math.fsum(m) / 3.0) / m
    out = img * gains
    policy = ClipPolicy(clip_policy)
    if policy is ClipPolicy.clip_to_one:
        np.minimum(out, 1.0, out=out)
    else:
        peak = out.max()
        if peak > 1.0:
            out /= peak
    return out


def normalize_image(image, config: NormalizationConfig = NormalizationConfig()) -> np.ndarray:
    """Estimate the illuminant of ``image`` and remove it.

    With ``config.gamma`` set, the image is linearized with ``I ** 2.2``
    before estimation and re-encoded with ``I ** (1 / 2.2)`` afterwards.
    """
    img = as_image(image)
    if config.gamma:
        img = img**GAMMA
    illum = estimate_illuminant(img, config)
    out = apply_gains(img, illum, config.clip_policy)
    if config.gamma:
        out = out ** (1.0 / GAMMA)
    return out


def read_png(path) -> np.ndarray:
    """Load an 8-bit RGB PNG as floats ``k / 255``."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    return arr.astype(np.float64) / 255.0


def write_png(image, path) -> None:
    """Save ``image`` as 8-bit RGB, rounding ``v * 255`` to nearest."""
    img = as_image(image)
    arr = np.rint(img * 255.0).astype(np.uint8)
    try:
        Image.fromarray(arr).save(Path(path), format="PNG")
    except (OSError, ValueError) as exc:
        raise IoFailure(f"{path}: {exc}") from exc
