"""Coordinate conventions, antenna array layouts and field-region classification.

Conventions used throughout the package:

* The omni-surface lies in the x-z plane at y = 0.  The base station sits in
  the y > 0 half-space (the reflective side); y < 0 is the refractive side.
* Every antenna array (base station, surface, user terminals) is oriented
  parallel to the x-z plane.  A uniform planar array advances along +x with
  its horizontal index and along +z with its vertical index; element ordering
  is horizontal-major so it matches the Kronecker ordering of the planar
  steering vector.
* A direction is an elevation/azimuth pair (theta, psi) with unit vector

      u(theta, psi) = (cos(theta) sin(psi), cos(theta) cos(psi), sin(theta)),

  azimuth measured from the surface normal (+y) toward +x and elevation from
  the x-y plane toward +z.  Broadside is theta = psi = 0.  Mirroring a
  direction across the surface keeps sin(psi) and negates cos(psi), so a
  point's side is the sign of cos(psi) of its outward direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

__all__ = [
    "Point3",
    "ArrayGeometry",
    "SceneLayout",
    "FieldRegion",
    "Side",
    "element_positions",
    "rayleigh_distance",
    "classify_field",
    "mirror_point",
    "side_of_point",
    "direction_angles",
    "unit_direction",
    "mirror_direction",
]


class FieldRegion(Enum):
    NEAR = "near"
    FAR = "far"


class Side(IntEnum):
    """Half-space served by a surface coefficient set; value is sign(y)."""

    REFLECTIVE = 1
    REFRACTIVE = -1


@dataclass(frozen=True)
class Point3:
    """A point in the global frame.  Coordinates must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "Point3":
        a = np.asarray(arr, dtype=float)
        if a.shape != (3,):
            raise ValueError(f"expected 3 coordinates, got shape {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class ArrayGeometry:
    """A uniform planar array parallel to the x-z plane, centred on `origin`.

    `h_count` elements along x with spacing `h_spacing`, `v_count` along z
    with spacing `v_spacing`.  A linear array is just h_count x 1.
    """

    origin: Point3
    h_count: int
    v_count: int
    h_spacing: float
    v_spacing: float

    def __post_init__(self):
        if self.h_count < 1 or self.v_count < 1:
            raise ValueError("element counts must be >= 1")
        if self.h_spacing <= 0 or self.v_spacing <= 0:
            raise ValueError("element spacings must be > 0")

    @property
    def count(self) -> int:
        return self.h_count * self.v_count

    @property
    def diagonal(self) -> float:
        """Largest aperture dimension: the diagonal of the element grid."""
        return math.hypot((self.h_count - 1) * self.h_spacing,
                          (self.v_count - 1) * self.v_spacing)


def half_wavelength_array(h_count: int, v_count: int, wavelength: float,
                          origin: Point3 = Point3(0.0, 0.0, 0.0)) -> ArrayGeometry:
    """Convenience constructor for the common half-wavelength-spaced array."""
    d = wavelength / 2.0
    return ArrayGeometry(origin, h_count, v_count, d, d)


def element_positions(array: ArrayGeometry) -> np.ndarray:
    """Element centres as an (N, 3) array, horizontal-major ordering.

    Element (i, m) sits at origin + ((i - (H-1)/2) dh, 0, (m - (V-1)/2) dv)
    and occupies row i * V + m, matching kron(horizontal, vertical) steering
    ordering.  The layout is centred so the array origin is its centroid.
    """
    xs = (np.arange(array.h_count) - (array.h_count - 1) / 2.0) * array.h_spacing
    zs = (np.arange(array.v_count) - (array.v_count - 1) / 2.0) * array.v_spacing
    pos = np.zeros((array.count, 3))
    pos[:, 0] = np.repeat(xs, array.v_count)
    pos[:, 2] = np.tile(zs, array.h_count)
    return pos + array.origin.as_array()


def rayleigh_distance(aperture: float, wavelength: float) -> float:
    """Near/far boundary 2 d^2 / lambda for largest aperture dimension d."""
    if aperture < 0:
        raise ValueError("aperture must be >= 0")
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    return 2.0 * aperture * aperture / wavelength


def classify_field(point: Point3, surface: ArrayGeometry,
                   wavelength: float) -> FieldRegion:
    """Classify a point against the surface's Rayleigh distance.

    Distances at or beyond the boundary count as far field.  Points on the
    surface plane are rejected: they belong to neither half-space.
    """
    if point.y == surface.origin.y:
        raise ValueError("point lies on the surface plane")
    dist = float(np.linalg.norm(point.as_array() - surface.origin.as_array()))
    boundary = rayleigh_distance(surface.diagonal, wavelength)
    return FieldRegion.FAR if dist >= boundary else FieldRegion.NEAR


def mirror_point(point: Point3) -> Point3:
    """Image of a point across the surface plane y = 0."""
    return Point3(point.x, -point.y, point.z)


def side_of_point(point: Point3) -> Side:
    if point.y > 0:
        return Side.REFLECTIVE
    if point.y < 0:
        return Side.REFRACTIVE
    raise ValueError("point lies on the surface plane")


def unit_direction(theta: float, psi: float) -> np.ndarray:
    """Unit vector of the direction (theta, psi); see module docstring."""
    ct = math.cos(theta)
    return np.array([ct * math.sin(psi), ct * math.cos(psi), math.sin(theta)])


def direction_angles(vec) -> tuple[float, float]:
    """Inverse of `unit_direction` for any nonzero vector."""
    v = np.asarray(vec, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("zero direction vector")
    theta = math.asin(max(-1.0, min(1.0, v[2] / n)))
    psi = math.atan2(v[0], v[1])
    return theta, psi


def mirror_direction(theta: float, psi: float) -> tuple[float, float]:
    """Direction of the mirror image: sin(psi) kept, cos(psi) negated."""
    mirrored = math.atan2(math.sin(psi), -math.cos(psi))
    return theta, mirrored


@dataclass(frozen=True)
class SceneLayout:
    """Base station, surface and user arrays sharing one global frame."""

    bs: ArrayGeometry
    ios: ArrayGeometry
    users: tuple[ArrayGeometry, ...]

    def __post_init__(self):
        if self.bs.origin.y <= self.ios.origin.y:
            raise ValueError("base station must sit on the reflective side")
        for k, u in enumerate(self.users):
            if u.origin.y == self.ios.origin.y:
                raise ValueError(f"user {k} lies on the surface plane")
