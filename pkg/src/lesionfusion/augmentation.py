"""Geometric test-time views: flip, rotation, scaling and translation.

Every transform keeps the input geometry. Output pixels are pulled back
through the inverse mapping and sampled bilinearly, with out-of-frame
coordinates clamped to the nearest edge pixel. Right-angle rotations use
exact integer rotation matrices, so on square images they (and flips and
integer translations) reduce to pixel permutations with no rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .color_constancy import as_image
from .errors import EmptyAxis, InvalidConfig


@dataclass(frozen=True)
class TransformSpec:
    rotation: float = 0.0
    flip_h: bool = False
    scale: float = 1.0
    translate: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidConfig(f"scale must be > 0, got {self.scale}")
        object.__setattr__(self, "translate", tuple(float(t) for t in self.translate))
        object.__setattr__(self, "rotation", float(self.rotation))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "flip_h", bool(self.flip_h))

    @property
    def is_identity(self) -> bool:
        return self == IDENTITY


IDENTITY = TransformSpec()

DEFAULT_AXES = {
    "rotations": [0.0, 90.0, 180.0, 270.0],
    "flips": [False, True],
    "scales": [1.0],
    "translations": [(0.0, 0.0)],
}


def _rotation_matrix(degrees: float) -> np.ndarray:
    """Forward rotation acting on (dx, dy) offsets, y pointing down.

    Positive angles turn the picture counterclockwise as displayed.
    """
    turns = degrees / 90.0
    if turns == round(turns):
        c, s = [(1, 0), (0, 1), (-1, 0), (0, -1)][int(round(turns)) % 4]
    else:
        t = np.deg2rad(degrees)
        c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [-s, c]], dtype=np.float64)


def _bilinear(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    xs = np.clip(xs, 0.0, w - 1)
    ys = np.clip(ys, 0.0, h - 1)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[..., None]
    fy = (ys - y0)[..., None]
    exact = (fx == 0) & (fy == 0)
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    out = top * (1 - fy) + bottom * fy
    # pixel-centred samples copy the source value untouched
    out = np.where(exact, img[y0, x0], out)
    return np.clip(out, 0.0, 1.0)


def apply_transform(image, spec: TransformSpec) -> np.ndarray:
    """Render one geometric view of ``image``.

    The forward map is: horizontal flip, rotation about the image centre,
    scaling about the centre, then translation by ``(dx, dy)`` pixels.
    """
    img = as_image(image)
    if spec.is_identity:
        return img.copy()
    h, w = img.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)

    dx = xs - spec.translate[0] - cx
    dy = ys - spec.translate[1] - cy
    if spec.scale != 1.0:
        dx = dx / spec.scale
        dy = dy / spec.scale
    inv = _rotation_matrix(spec.rotation).T
    sx = inv[0, 0] * dx + inv[0, 1] * dy
    sy = inv[1, 0] * dx + inv[1, 1] * dy
    if spec.flip_h:
        sx = -sx
    return _bilinear(img, sx + cx, sy + cy)


def default_transform_set(
    rotations: Sequence[float] = DEFAULT_AXES["rotations"],
    flips: Sequence[bool] = DEFAULT_AXES["flips"],
    scales: Sequence[float] = DEFAULT_AXES["scales"],
    translations: Sequence[Sequence[float]] = DEFAULT_AXES["translations"],
) -> list[TransformSpec]:
    """Cartesian product of the transform axes.

    Order is rotation-major, then flip, scale, translation, following the
    order of values within each axis. The identity spec is moved to the
    front. Repeated axis values are dropped so all specs are distinct.

    Raises
    ------
    EmptyAxis
        If an axis is empty or lacks its identity value.
    """
    axes = {
        "rotations": _dedupe(float(r) for r in rotations),
        "flips": _dedupe(bool(f) for f in flips),
        "scales": _dedupe(float(s) for s in scales),
        "translations": _dedupe(tuple(float(v) for v in t) for t in translations),
    }
    identity_values = {"rotations": 0.0, "flips": False, "scales": 1.0, "translations": (0.0, 0.0)}
    for name, values in axes.items():
        if not values:
            raise EmptyAxis(f"transform axis {name!r} is empty")
        if identity_values[name] not in values:
            raise EmptyAxis(f"transform axis {name!r} lacks its identity value")

    specs = [
        TransformSpec(rotation=r, flip_h=f, scale=s, translate=t)
        for r, f, s, t in itertools.product(*axes.values())
    ]
    specs.remove(IDENTITY)
    return [IDENTITY] + specs


def _dedupe(values) -> list:
    out = []
    for v in values:
        if v not in out:
            out.append(v)
    return out


def transform_set_from_config(config: dict | None) -> list[TransformSpec]:
    """Build a transform set from a run-config ``augmentation`` section."""
    config = dict(config or {})
    unknown = set(config) - set(DEFAULT_AXES)
    if unknown:
        raise InvalidConfig(f"unknown augmentation keys: {sorted(unknown)}")
    return default_transform_set(**{k: config.get(k, v) for k, v in DEFAULT_AXES.items()})
