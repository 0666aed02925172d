"""Affine transforms and the inverse-mapping warp.

A transform maps source pixel coordinates to output pixel coordinates
(x right, y down, integer coordinates at pixel centers). ``warp_affine``
pulls each output pixel from ``inverse(t)`` applied to its center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FillMode, check_image

INTERPOLATIONS = ("bilinear", "nearest")


@dataclass(frozen=True, eq=False)
class AffineTransform:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("affine matrix must be 3x3")
        if not np.all(np.isfinite(m)):
            raise ValueError("affine matrix must be finite")
        if not (m[2, 0] == 0.0 and m[2, 1] == 0.0 and m[2, 2] == 1.0):
            raise ValueError("last row of an affine matrix must be [0, 0, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> AffineTransform:
        return cls(np.eye(3))

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix[:2, :2]))

    def is_invertible(self) -> bool:
        return abs(self.determinant) > 1e-12

    def inverse(self) -> AffineTransform:
        if not self.is_invertible():
            raise ValueError("affine transform is singular")
        a, b, c = self.matrix[0]
        d, e, f = self.matrix[1]
        det = a * e - b * d
        ia, ib, id_, ie = e / det, -b / det, -d / det, a / det
        return AffineTransform(
            [[ia, ib, -(ia * c + ib * f)], [id_, ie, -(id_ * c + ie * f)], [0.0, 0.0, 1.0]]
        )

    def apply(self, x, y):
        m = self.matrix
        return m[0, 0] * x + m[0, 1] * y + m[0, 2], m[1, 0] * x + m[1, 1] * y + m[1, 2]

    def allclose(self, other: AffineTransform, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol))

    def __matmul__(self, other: AffineTransform) -> AffineTransform:
        return compose(self, other)

    def __repr__(self) -> str:
        rows = ", ".join("[" + ", ".join(f"{v:.6g}" for v in r) + "]" for r in self.matrix)
        return f"AffineTransform([{rows}])"


def compose(a: AffineTransform, b: AffineTransform) -> AffineTransform:
    """Transform applying ``b`` first and then ``a``."""
    m = a.matrix @ b.matrix
    m[2] = (0.0, 0.0, 1.0)
    return AffineTransform(m)


def _about(linear: np.ndarray, cx: float, cy: float) -> AffineTransform:
    # conjugate a 2x2 linear map by the translation to (cx, cy)
    m = np.eye(3)
    m[:2, :2] = linear
    m[0, 2] = cx - linear[0, 0] * cx - linear[0, 1] * cy
    m[1, 2] = cy - linear[1, 0] * cx - linear[1, 1] * cy
    return AffineTransform(m)


def image_center(width: int, height: int) -> tuple[float, float]:
    return (width - 1) / 2.0, (height - 1) / 2.0


def make_rotation(degrees: float, cx: float, cy: float) -> AffineTransform:
    """Rotate about ``(cx, cy)``; positive angles turn content counterclockwise on screen."""
    if not math.isfinite(degrees):
        raise ValueError("rotation angle must be finite")
    if degrees % 360 == 0:
        return AffineTransform.identity()
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    return _about(np.array([[c, s], [-s, c]]), cx, cy)


def make_translation(dx: float, dy: float) -> AffineTransform:
    if not (math.isfinite(dx) and math.isfinite(dy)):
        raise ValueError("translation must be finite")
    return AffineTransform([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])


def make_shear(degrees_x: float, cx: float, cy: float) -> AffineTransform:
    """Horizontal shear about ``(cx, cy)``: ``x' = x + tan(angle) * (y - cy)``."""
    if not math.isfinite(degrees_x) or abs(degrees_x) >= 90:
        raise ValueError(f"shear angle must satisfy |angle| < 90 degrees, got {degrees_x}")
    k = math.tan(math.radians(degrees_x))
    return _about(np.array([[1.0, k], [0.0, 1.0]]), cx, cy)


def make_zoom(fx: float, fy: float, cx: float, cy: float) -> AffineTransform:
    """Zoom about ``(cx, cy)``.

    Output pixel ``(x, y)`` samples the source at ``((x - cx) * fx + cx,
    (y - cy) * fy + cy)``, so factors above 1 zoom out and below 1 zoom in.
    """
    if not (fx > 0 and fy > 0):
        raise ValueError("zoom factors must be positive")
    return _about(np.array([[1.0 / fx, 0.0], [0.0, 1.0 / fy]]), cx, cy)


def warp_affine(
    img: np.ndarray,
    t: AffineTransform,
    interp: str = "bilinear",
    fill: FillMode | None = None,
) -> np.ndarray:
    """Resample ``img`` through ``t`` into an output of the same size.

    Each output pixel center is mapped through the inverse of ``t``;
    source coordinates within 1e-9 of an integer are snapped onto it so
    exact transforms (quarter turns, integer shifts) stay exact.
    """
    check_image(img)
    if interp not in INTERPOLATIONS:
        raise ValueError(f"unknown interpolation {interp!r}; expected one of {INTERPOLATIONS}")
    fill = fill or FillMode()
    inv = np.ascontiguousarray(t.inverse().matrix[:2])
    out = np.empty_like(img)
    kernel = _kernels.warp_nearest if interp == "nearest" else _kernels.warp_bilinear
    kernel(np.ascontiguousarray(img), inv, _kernels.FILL_CODES[fill.mode], fill.cval, out)
    return out


def flip_h(img: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(check_image(img)[:, ::-1])


def flip_v(img: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(check_image(img)[::-1])
