"""Great-circle distance kernel and geographic coordinate primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GeoCoord:
    """A point on the sphere, latitude/longitude in decimal degrees.

    Latitude must lie in [-90, +90]; longitude is normalized into
    (-180, +180] on construction.
    """

    lat: float
    lng: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lng)):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lng})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        lng = (self.lng + 180.0) % 360.0 - 180.0
        if lng <= -180.0:
            lng += 360.0
        object.__setattr__(self, "lng", lng)


@dataclass(frozen=True)
class GeoConstants:
    """Spherical-earth constants. Mean radius, meters."""

    earth_radius: float = 6_371_000.0

    def __post_init__(self):
        if self.earth_radius <= 0:
            raise ValueError("earth_radius must be positive")


EARTH = GeoConstants()


def haversine_distance(a: GeoCoord, b: GeoCoord, c: GeoConstants = EARTH) -> float:
    """Great-circle distance between two coordinates, in meters.

    Computes 2R*arcsin(sqrt(sin^2(dlat/2) + cos(latA)*cos(latB)*sin^2(dlng/2)))
    with all angles in radians. The arcsin argument is clamped to [0, 1] to
    absorb floating-point overshoot on antipodal or near-identical points.

    Args:
        a: first coordinate.
        b: second coordinate.
        c: sphere constants (radius in meters).

    Returns:
        Distance in meters, in [0, pi*R].
    """
    lat_a = math.radians(a.lat)
    lat_b = math.radians(b.lat)
    dis1 = math.sin((lat_a - lat_b) / 2.0) ** 2
    dis2 = math.sin((math.radians(a.lng) - math.radians(b.lng)) / 2.0) ** 2
    arg = dis1 + math.cos(lat_a) * math.cos(lat_b) * dis2
    arg = min(1.0, max(0.0, arg))
    return 2.0 * c.earth_radius * math.asin(math.sqrt(arg))


def haversine_np(lat1, lng1, lat2, lng2, c: GeoConstants = EARTH):
    """Elementwise haversine distance over degree arrays, in meters.

    Inputs broadcast against each other like any numpy ufunc operands.
    """
    p1 = np.radians(np.asarray(lat1, dtype=float))
    p2 = np.radians(np.asarray(lat2, dtype=float))
    dis1 = np.sin((p1 - p2) / 2.0) ** 2
    dis2 = np.sin((np.radians(np.asarray(lng1, dtype=float))
                   - np.radians(np.asarray(lng2, dtype=float))) / 2.0) ** 2
    arg = np.clip(dis1 + np.cos(p1) * np.cos(p2) * dis2, 0.0, 1.0)
    return 2.0 * c.earth_radius * np.arcsin(np.sqrt(arg))


def pairwise_haversine(lats, lngs, ref_lats, ref_lngs, c: GeoConstants = EARTH):
    """Distance matrix (n, m) in meters between n points and m reference points."""
    lats = np.asarray(lats, dtype=float)[:, None]
    lngs = np.asarray(lngs, dtype=float)[:, None]
    ref_lats = np.asarray(ref_lats, dtype=float)[None, :]
    ref_lngs = np.asarray(ref_lngs, dtype=float)[None, :]
    return haversine_np(lats, lngs, ref_lats, ref_lngs, c)


def path_length(lats, lngs, c: GeoConstants = EARTH) -> float:
    """Sum of consecutive haversine distances along a polyline, in meters.

    Zero for polylines with fewer than two vertices.
    """
    lats = np.asarray(lats, dtype=float)
    lngs = np.asarray(lngs, dtype=float)
    if lats.size < 2:
        return 0.0
    return float(np.sum(haversine_np(lats[:-1], lngs[:-1], lats[1:], lngs[1:], c)))
