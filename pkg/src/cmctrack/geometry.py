"""Boxes, points and camera-motion transforms shared across the tracker."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Below this the projective denominator is treated as a point at infinity.
PROJECTION_EPS = 1e-9


class DegenerateProjection(ArithmeticError):
    """A homography mapped a point (numerically) to infinity."""


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in center/size form."""

    x_c: float
    y_c: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.x_c, self.y_c, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite box {vals}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box needs positive size, got w={self.w} h={self.h}")

    @classmethod
    def from_ltwh(cls, left: float, top: float, w: float, h: float) -> "BBox":
        return cls(left + w / 2.0, top + h / 2.0, w, h)

    @classmethod
    def from_xyxy(cls, x1: float, y1: float, x2: float, y2: float) -> "BBox":
        return cls((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)

    @property
    def left(self) -> float:
        return self.x_c - self.w / 2.0

    @property
    def top(self) -> float:
        return self.y_c - self.h / 2.0

    @property
    def right(self) -> float:
        return self.x_c + self.w / 2.0

    @property
    def bottom(self) -> float:
        return self.y_c + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def to_ltwh(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.w, self.h)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_c, self.y_c, self.w, self.h], dtype=float)


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # rounding can push identical boxes a few ulps above 1
    return min(inter / (a.area + b.area - inter), 1.0)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two (N, 4) and (M, 4) arrays of center/size boxes."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    a1 = a[:, :2] - a[:, 2:] / 2
    a2 = a[:, :2] + a[:, 2:] / 2
    b1 = b[:, :2] - b[:, 2:] / 2
    b2 = b[:, :2] + b[:, 2:] / 2
    lo = np.maximum(a1[:, None, :], b1[None, :, :])
    hi = np.minimum(a2[:, None, :], b2[None, :, :])
    wh = np.clip(hi - lo, 0.0, None)
    inter = wh[..., 0] * wh[..., 1]
    area_a = a[:, 2] * a[:, 3]
    area_b = b[:, 2] * b[:, 3]
    union = area_a[:, None] + area_b[None, :] - inter
    return np.minimum(inter / union, 1.0)


def boxes_to_array(boxes) -> np.ndarray:
    if not boxes:
        return np.zeros((0, 4))
    return np.array([[b.x_c, b.y_c, b.w, b.h] for b in boxes], dtype=float)


class MotionKind(enum.Enum):
    IDENTITY = "identity"
    AFFINE = "affine"
    HOMOGRAPHY = "homography"


@dataclass(frozen=True)
class CameraMotion:
    """Transform taking previous-frame pixel coordinates to current-frame ones.

    ``coefficients`` holds a11..a23 for an affine motion, the nine row-major
    entries (h33 == 1) for a homography, and is empty for the identity.
    """

    kind: MotionKind
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        c = self.coefficients
        if self.kind is MotionKind.IDENTITY:
            if c:
                raise ValueError("identity motion takes no coefficients")
            return
        if not all(math.isfinite(v) for v in c):
            raise ValueError("non-finite motion coefficients")
        if self.kind is MotionKind.AFFINE:
            if len(c) != 6:
                raise ValueError(f"affine motion needs 6 coefficients, got {len(c)}")
            if c[0] * c[4] - c[1] * c[3] == 0.0:
                raise ValueError("affine linear block is singular")
        else:
            if len(c) != 9:
                raise ValueError(f"homography needs 9 coefficients, got {len(c)}")
            if c[8] != 1.0:
                raise ValueError("homography must be normalized to h33 == 1")
            if np.linalg.det(np.array(c).reshape(3, 3)) == 0.0:
                raise ValueError("homography is singular")

    @classmethod
    def identity(cls) -> "CameraMotion":
        return cls(MotionKind.IDENTITY)

    @classmethod
    def affine(cls, coeffs) -> "CameraMotion":
        arr = np.asarray(coeffs, dtype=float).reshape(-1)[:6]
        return cls(MotionKind.AFFINE, tuple(float(v) for v in arr))

    @classmethod
    def homography(cls, matrix) -> "CameraMotion":
        m = np.asarray(matrix, dtype=float).reshape(3, 3)
        if abs(m[2, 2]) < PROJECTION_EPS:
            raise ValueError("homography h33 is zero, cannot normalize")
        m = m / m[2, 2]
        return cls(MotionKind.HOMOGRAPHY, tuple(float(v) for v in m.reshape(-1)))

    @classmethod
    def from_matrix(cls, matrix) -> "CameraMotion":
        """Build from a 3x3 matrix, choosing affine when the last row is (0, 0, 1)."""
        m = np.asarray(matrix, dtype=float).reshape(3, 3)
        if m[2, 0] == 0.0 and m[2, 1] == 0.0 and m[2, 2] == 1.0:
            return cls.affine(m[:2].reshape(-1))
        return cls.homography(m)

    @property
    def is_identity(self) -> bool:
        return self.kind is MotionKind.IDENTITY

    def matrix(self) -> np.ndarray:
        if self.kind is MotionKind.IDENTITY:
            return np.eye(3)
        if self.kind is MotionKind.AFFINE:
            return np.vstack([np.reshape(self.coefficients, (2, 3)), [0.0, 0.0, 1.0]])
        return np.reshape(np.array(self.coefficients), (3, 3))

    def inverse(self) -> "CameraMotion":
        if self.kind is MotionKind.IDENTITY:
            return self
        inv = np.linalg.inv(self.matrix())
        if self.kind is MotionKind.AFFINE:
            return CameraMotion.affine(inv[:2].reshape(-1))
        return CameraMotion.homography(inv)

    def compose(self, first: "CameraMotion") -> "CameraMotion":
        """Motion equivalent to applying ``first`` and then ``self``."""
        if first.is_identity:
            return self
        if self.is_identity:
            return first
        return CameraMotion.from_matrix(self.matrix() @ first.matrix())

    def apply(self, x, y):
        """Vectorised point mapping; returns (x', y') arrays (or floats)."""
        c = self.coefficients
        if self.kind is MotionKind.IDENTITY:
            return x, y
        if self.kind is MotionKind.AFFINE:
            return (c[0] * x + c[1] * y + c[2], c[3] * x + c[4] * y + c[5])
        den = c[6] * x + c[7] * y + c[8]
        if np.any(np.abs(den) < PROJECTION_EPS):
            raise DegenerateProjection("homography denominator vanishes")
        return ((c[0] * x + c[1] * y + c[2]) / den, (c[3] * x + c[4] * y + c[5]) / den)

    def jacobian(self, x: float, y: float) -> np.ndarray:
        """2x2 derivative of the point mapping at (x, y)."""
        c = self.coefficients
        if self.kind is MotionKind.IDENTITY:
            return np.eye(2)
        if self.kind is MotionKind.AFFINE:
            return np.array([[c[0], c[1]], [c[3], c[4]]])
        den = c[6] * x + c[7] * y + c[8]
        if abs(den) < PROJECTION_EPS:
            raise DegenerateProjection("homography denominator vanishes")
        u = (c[0] * x + c[1] * y + c[2]) / den
        v = (c[3] * x + c[4] * y + c[5]) / den
        return np.array(
            [
                [(c[0] - u * c[6]) / den, (c[1] - u * c[7]) / den],
                [(c[3] - v * c[6]) / den, (c[4] - v * c[7]) / den],
            ]
        )


def apply_motion(m: CameraMotion, p: Point2) -> Point2:
    x, y = m.apply(p.x, p.y)
    return Point2(float(x), float(y))
