"""Vector/quaternion primitives, plane projection, and the tracker-to-scene transform.

Conventions: quaternions are right-handed Hamilton quaternions (w, x, y, z).
``Quaternion.rotate(v)`` performs the active rotation q * v * q^-1; the
tracker-to-scene transform applies the inverse rotation, so a point expressed
in tracker coordinates is rotated by ``rotation.inverse()``.

Vectors are plain numpy arrays of shape (3,) (or (2,) in display space),
in meters unless stated otherwise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-9
NORMALIZE_WARN_TOL = 1e-6


class GeometryError(ValueError):
    pass


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a float64 3-vector from components or an array-like."""
    if y is None:
        v = np.asarray(x, dtype=float)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape != (3,):
        raise GeometryError(f"expected 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vector components must be finite")
    return v


def vec2(x, y=None) -> np.ndarray:
    """Build a float64 2-vector from components or an array-like."""
    if y is None:
        v = np.asarray(x, dtype=float)
    else:
        v = np.array([x, y], dtype=float)
    if v.shape != (2,):
        raise GeometryError(f"expected 2 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vector components must be finite")
    return v


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, x, y, z), Hamilton product convention."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if abs(self.norm() - 1.0) > UNIT_TOL:
            raise GeometryError(
                f"quaternion norm {self.norm():.12g} deviates from 1 by more than {UNIT_TOL}"
            )

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis, angle_rad: float) -> "Quaternion":
        axis = vec3(axis)
        n = np.linalg.norm(axis)
        if n == 0:
            raise GeometryError("rotation axis must be nonzero")
        axis = axis / n
        half = 0.5 * angle_rad
        s = np.sin(half)
        return Quaternion(float(np.cos(half)), *(s * axis))

    @staticmethod
    def normalized(w, x, y, z) -> "Quaternion":
        """Construct, renormalizing if needed (raises on zero norm)."""
        n = float(np.sqrt(w * w + x * x + y * y + z * z))
        if n == 0:
            raise GeometryError("cannot normalize zero quaternion")
        return Quaternion(w / n, x / n, y / n, z / n)

    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    def inverse(self) -> "Quaternion":
        # conjugate == inverse for unit quaternions
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion.normalized(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v) -> np.ndarray:
        """Active rotation of a 3-vector: q * v * q^-1."""
        v = vec3(v)
        qv = np.array([self.x, self.y, self.z])
        t = 2.0 * np.cross(qv, v)
        return v + self.w * t + np.cross(qv, t)

    def to_matrix(self) -> np.ndarray:
        """Equivalent 3x3 rotation matrix (columns are rotated basis vectors)."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )


@dataclass(frozen=True)
class Plane:
    """A plane given by a center point and a unit normal."""

    center: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        n = vec3(self.normal)
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise GeometryError("plane normal must be a unit vector")
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation bridging the tracker and scene coordinate frames."""

    rotation: Quaternion
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "translation", vec3(self.translation))

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(Quaternion.identity(), np.zeros(3))


def perpendicular_foot(p_i, plane: Plane) -> np.ndarray:
    """Orthogonal projection of p_i onto the plane.

    Returns p_f = p_i - ((p_i - center) . n) n, the point on the plane
    directly "below" p_i along the plane normal.
    """
    p_i = vec3(p_i)
    n = plane.normal
    return p_i - np.dot(p_i - plane.center, n) * n


def apply_transform_point(t: RigidTransform, x, convention: str = "offset") -> np.ndarray:
    """Map a tracker-frame point into the scene frame.

    convention "offset" (default): x' = R^-1 (x - x_T) + x_T, i.e. the offset
    from the transform origin is rotated and re-anchored at the same origin.
    convention "frame": x' = R^-1 (x - x_T), the plain frame change.
    Both are isometries and both are inverted by invert_transform_point.
    """
    x = vec3(x)
    rotated = t.rotation.inverse().rotate(x - t.translation)
    if convention == "offset":
        return rotated + t.translation
    if convention == "frame":
        return rotated
    raise GeometryError(f"unknown transform convention {convention!r}")


def invert_transform_point(t: RigidTransform, x_prime, convention: str = "offset") -> np.ndarray:
    """Inverse of apply_transform_point for the same convention."""
    x_prime = vec3(x_prime)
    if convention == "offset":
        return t.rotation.rotate(x_prime - t.translation) + t.translation
    if convention == "frame":
        return t.rotation.rotate(x_prime) + t.translation
    raise GeometryError(f"unknown transform convention {convention!r}")


def apply_transform_rotation(t: RigidTransform, q: Quaternion) -> Quaternion:
    """Map an object rotation into the scene frame: Q' = R^-1 * Q."""
    return t.rotation.inverse() * q


def acquire_transform(orientation: Quaternion | tuple, position=None) -> RigidTransform:
    """Build the tracker-to-scene transform from a calibration body pose.

    Accepts either (Quaternion, position) or raw quaternion components
    (w, x, y, z) as the first argument. A non-unit quaternion is
    normalized; deviations beyond 1e-6 additionally raise a warning.
    """
    if position is None:
        raise GeometryError("acquire_transform requires an orientation and a position")
    if isinstance(orientation, Quaternion):
        q = orientation
    else:
        w, x, y, z = orientation
        n = float(np.sqrt(w * w + x * x + y * y + z * z))
        if abs(n - 1.0) > NORMALIZE_WARN_TOL:
            warnings.warn(
                f"calibration quaternion norm {n:.9g} deviates from 1; normalizing",
                stacklevel=2,
            )
        q = Quaternion.normalized(w, x, y, z)
    return RigidTransform(q, vec3(position))
