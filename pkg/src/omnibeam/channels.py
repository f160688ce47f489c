"""Deterministic line-of-sight channel constructors.

All links are free-space geometric models.  A path of length d contributes
the complex entry

    sqrt(1 / (4 pi d^2)) * exp(-j 2 pi d / lambda),

i.e. inverse-distance amplitude and propagation phase.  Within an array's
near field every element pair keeps its exact spherical-wave entry; in the
far field the channel collapses onto a rank-one outer product of planar
steering vectors.  Sampled "area" channels (the rows used for codeword
synthesis) follow the same two branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    ArrayGeometry,
    FieldRegion,
    Point3,
    SceneLayout,
    Side,
    direction_angles,
    element_positions,
    mirror_direction,
    mirror_point,
    side_of_point,
    unit_direction,
)

__all__ = [
    "pairwise_distances",
    "spherical_entries",
    "bs_ios_channel",
    "near_field_user_channel",
    "steering_vector_upa",
    "far_field_user_channel",
    "far_field_link",
    "AreaDescriptor",
    "near_area",
    "far_area",
    "mirror_area",
    "area_equivalent_channel",
]

_INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance matrix (len(a), len(b)) between two (N, 3) position sets."""
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)


def spherical_entries(distances: np.ndarray, wavelength: float) -> np.ndarray:
    """Elementwise free-space entries for a matrix of path lengths."""
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path lengths must be > 0 (coincident elements?)")
    return (_INV_SQRT_4PI / d) * np.exp(-2j * np.pi * d / wavelength)


def bs_ios_channel(scene: SceneLayout, wavelength: float) -> np.ndarray:
    """Base-station-to-surface channel, shape (L, N_b)."""
    d = pairwise_distances(element_positions(scene.ios), element_positions(scene.bs))
    return spherical_entries(d, wavelength)


def near_field_user_channel(user: ArrayGeometry, surface: ArrayGeometry,
                            wavelength: float) -> np.ndarray:
    """Spherical-wave surface-to-user channel, shape (N_u, L).

    Exact at any distance; callers reserve it for users inside the surface's
    Rayleigh distance, where the planar model is no longer adequate.
    """
    d = pairwise_distances(element_positions(user), element_positions(surface))
    return spherical_entries(d, wavelength)


def steering_vector_upa(theta: float, psi: float, counts: tuple[int, int],
                        spacings: tuple[float, float], wavelength: float) -> np.ndarray:
    """Planar steering vector, kron(horizontal, vertical) ordering.

    Entry (i, m) is exp(-j 2 pi ((i - (H-1)/2) mu + (m - (V-1)/2) nu) / lambda)
    with mu = d_h cos(theta) sin(psi) and nu = d_v sin(theta).  Phases are
    referenced to the array centroid, matching `element_positions`, so planar
    rows stay phase-consistent with spherical rows built from exact element
    distances; an index-anchored reference would leave a direction-dependent
    global phase between the two models and scramble the relative phases of
    multi-area synthesis targets.
    """
    h_count, v_count = counts
    d_h, d_v = spacings
    if h_count < 1 or v_count < 1:
        raise ValueError("element counts must be >= 1")
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    mu = d_h * math.cos(theta) * math.sin(psi)
    nu = d_v * math.sin(theta)
    h_idx = np.arange(h_count) - (h_count - 1) / 2.0
    v_idx = np.arange(v_count) - (v_count - 1) / 2.0
    h = np.exp(-2j * np.pi * h_idx * mu / wavelength)
    v = np.exp(-2j * np.pi * v_idx * nu / wavelength)
    return np.kron(h, v)


def _array_steering(array: ArrayGeometry, theta: float, psi: float,
                    wavelength: float) -> np.ndarray:
    return steering_vector_upa(theta, psi, (array.h_count, array.v_count),
                               (array.h_spacing, array.v_spacing), wavelength)


def far_field_user_channel(user_angles: tuple[float, float],
                           surface_angles: tuple[float, float],
                           distance: float,
                           user: ArrayGeometry, surface: ArrayGeometry,
                           wavelength: float) -> np.ndarray:
    """Rank-one planar-wave user channel, shape (N_u, L).

    `user_angles` is the link direction seen at the user array and
    `surface_angles` the link direction seen at the surface, each expressed
    as the angles of the unit vector pointing from the far end toward that
    array (see `far_field_link`).  The centre-to-centre propagation phase is
    a global factor common to every entry and is omitted; no gain or power
    quantity in this package depends on it.
    """
    if distance <= 0:
        raise ValueError("distance must be > 0")
    u = _array_steering(user, user_angles[0], user_angles[1], wavelength)
    a = _array_steering(surface, surface_angles[0], surface_angles[1], wavelength)
    return (_INV_SQRT_4PI / distance) * np.outer(u, a)


def far_field_link(user_center: Point3, surface: ArrayGeometry
                   ) -> tuple[tuple[float, float], tuple[float, float], float]:
    """Angle pairs and distance for `far_field_user_channel`.

    Each end uses the angles of the vector pointing from the other end toward
    itself; with the exp(-j) steering convention this makes the rank-one model
    the large-distance limit of the spherical-wave channel.
    """
    vec = user_center.as_array() - surface.origin.as_array()
    dist = float(np.linalg.norm(vec))
    if dist == 0.0:
        raise ValueError("user coincides with the surface centre")
    user_angles = direction_angles(vec)
    surface_angles = direction_angles(-vec)
    return user_angles, surface_angles, dist


@dataclass(frozen=True)
class AreaDescriptor:
    """One sampled coverage area on either side of the surface.

    Near-field areas are concrete points.  Far-field areas are directions
    (theta, psi) of the outward ray from the surface centre, sampled at a
    reference `distance`.  `side` always matches the sign of y of the area's
    position, which for far-field areas is the sign of cos(psi).
    """

    index: int
    side: Side
    region: FieldRegion
    point: Point3 | None = None
    theta: float | None = None
    psi: float | None = None
    distance: float | None = None

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("area indices are 1-based")
        if self.region is FieldRegion.NEAR:
            if self.point is None:
                raise ValueError("near-field area needs a point")
            if side_of_point(self.point) is not self.side:
                raise ValueError("side label contradicts the point's half-space")
        else:
            if self.theta is None or self.psi is None or self.distance is None:
                raise ValueError("far-field area needs (theta, psi, distance)")
            if self.distance <= 0:
                raise ValueError("reference distance must be > 0")
            c = math.cos(self.psi)
            if c == 0.0:
                raise ValueError("far-field direction lies in the surface plane")
            if (c > 0) != (self.side is Side.REFLECTIVE):
                raise ValueError("side label contradicts the direction's half-space")

    @property
    def position(self) -> Point3:
        if self.region is FieldRegion.NEAR:
            return self.point  # type: ignore[return-value]
        return Point3.from_array(self.distance * unit_direction(self.theta, self.psi))


def near_area(index: int, point: Point3) -> AreaDescriptor:
    return AreaDescriptor(index, side_of_point(point), FieldRegion.NEAR, point=point)


def far_area(index: int, theta: float, psi: float, distance: float) -> AreaDescriptor:
    side = Side.REFLECTIVE if math.cos(psi) > 0 else Side.REFRACTIVE
    return AreaDescriptor(index, side, FieldRegion.FAR,
                          theta=theta, psi=psi, distance=distance)


def mirror_area(area: AreaDescriptor, index: int | None = None) -> AreaDescriptor:
    """The image area across the surface plane, optionally reindexed."""
    idx = area.index if index is None else index
    if area.region is FieldRegion.NEAR:
        return near_area(idx, mirror_point(area.point))
    theta, psi = mirror_direction(area.theta, area.psi)
    return far_area(idx, theta, psi, area.distance)


def area_equivalent_channel(area: AreaDescriptor, surface: ArrayGeometry,
                            wavelength: float) -> np.ndarray:
    """Length-L channel row from the surface to one sampled area.

    Near branch: exact per-element spherical entries to the area point.
    Far branch: sqrt(1/(4 pi d^2)) exp(-j 2 pi d / lambda) times the planar
    steering vector of the arrival direction (the outward direction flipped).
    The far branch carries the reference-distance phase so the two branches
    agree in the overlap regime.
    """
    if area.region is FieldRegion.NEAR:
        pos = area.point.as_array()[None, :]
        d = pairwise_distances(pos, element_positions(surface))
        return spherical_entries(d, wavelength)[0]
    theta_in, psi_in = direction_angles(-unit_direction(area.theta, area.psi))
    steer = _array_steering(surface, theta_in, psi_in, wavelength)
    scale = (_INV_SQRT_4PI / area.distance) * np.exp(
        -2j * np.pi * area.distance / wavelength)
    return scale * steer
