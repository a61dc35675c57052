"""Coupling of trace distances with the cable geometry of the design.

A branch's cable is a polyline. Planar vertices are (x, y) pairs in km;
geographic vertices are (longitude, latitude) pairs in degrees, measured on
a spherical earth of radius EARTH_RADIUS_KM.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .base import GeometryError, NetworkDesign, OutOfRangeError

EARTH_RADIUS_KM = 6371.0088

DEFAULT_LENGTH_TOLERANCE = 0.01

# slack allowed on cursor positions, km
_POSITION_TOLERANCE_KM = 1e-9

Coordinate = Tuple[float, float]


@dataclass(frozen=True)
class BranchGeometry:
    """The route of a branch cable.

    Attributes:
        vertices (tuple of coordinate pairs): the polyline, from the splitter
            to the fiber end
        declared_length (float): the cable length stated by the design, km
        geographic (bool): whether vertices are (longitude, latitude)
        tolerance (float): allowed relative mismatch between the polyline's
            arc length and the declared length. Default is 1%.
    """

    vertices: Tuple[Coordinate, ...]
    declared_length: float
    geographic: bool = False
    tolerance: float = DEFAULT_LENGTH_TOLERANCE

    def __post_init__(self) -> None:
        try:
            vertices = tuple(
                (float(first), float(second)) for first, second in self.vertices
            )
        except (TypeError, ValueError):
            raise GeometryError("vertices must be pairs of numbers")
        if len(vertices) < 2:
            raise GeometryError("a polyline needs at least 2 vertices")
        if not np.isfinite(vertices).all():
            raise GeometryError("vertices must be finite")
        if self.geographic and any(abs(lat) > 90 for _, lat in vertices):
            raise GeometryError("latitudes must lie in [-90, 90]")
        if not self.declared_length > 0:
            raise GeometryError("declared length must be positive")
        if self.tolerance < 0:
            raise GeometryError("tolerance cannot be negative")
        object.__setattr__(self, "vertices", vertices)


def _unit_vectors(vertices: np.ndarray) -> np.ndarray:
    lon, lat = np.radians(vertices[:, 0]), np.radians(vertices[:, 1])
    return np.column_stack(
        (np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat))
    )


def segment_lengths(geometry: BranchGeometry) -> np.ndarray:
    """Length of every polyline segment, km"""
    vertices = np.array(geometry.vertices)
    if not geometry.geographic:
        steps = np.diff(vertices, axis=0)
        return np.hypot(steps[:, 0], steps[:, 1])
    lon, lat = np.radians(vertices[:, 0]), np.radians(vertices[:, 1])
    half_dlat = np.diff(lat) / 2
    half_dlon = np.diff(lon) / 2
    a = (
        np.sin(half_dlat) ** 2
        + np.cos(lat[:-1]) * np.cos(lat[1:]) * np.sin(half_dlon) ** 2
    )
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def arc_length(geometry: BranchGeometry) -> float:
    """Total length of the polyline, km (Euclidean or great-circle)"""
    if len(geometry.vertices) < 2:
        raise GeometryError("a polyline needs at least 2 vertices")
    return float(np.sum(segment_lengths(geometry)))


def length_mismatch(geometry: BranchGeometry) -> float:
    """Relative difference between arc length and declared length"""
    return (
        abs(arc_length(geometry) - geometry.declared_length)
        / geometry.declared_length
    )


def validate_geometry(geometry: BranchGeometry) -> None:
    """Check that the polyline agrees with its declared length

    Raises:
        GeometryError: if the mismatch exceeds the geometry's tolerance
    """
    mismatch = length_mismatch(geometry)
    if mismatch > geometry.tolerance:
        raise GeometryError(
            "arc length {:.4f} km differs from the declared {:.4f} km by"
            " {:.2%} (tolerance {:.2%})".format(
                arc_length(geometry),
                geometry.declared_length,
                mismatch,
                geometry.tolerance,
            )
        )


def position(geometry: BranchGeometry, s: float) -> Tuple[int, float]:
    """Where along the polyline an arc distance falls

    Args:
        geometry (BranchGeometry): the polyline
        s (float): arc distance from the first vertex, km

    Returns:
        tuple of (int, float): the segment index and the fraction (0..1) of
                               that segment covered

    Raises:
        OutOfRangeError: if s lies outside [0, arc_length]
    """
    lengths = segment_lengths(geometry)
    cumulative = np.concatenate(([0.0], np.cumsum(lengths)))
    total = cumulative[-1]
    if not -_POSITION_TOLERANCE_KM <= s <= total + _POSITION_TOLERANCE_KM:
        raise OutOfRangeError(
            "{} km is outside the cable's [0, {:.6f}] km".format(s, total)
        )
    s = min(max(s, 0.0), total)
    segment = int(np.searchsorted(cumulative, s, side="right")) - 1
    segment = min(max(segment, 0), lengths.size - 1)
    if lengths[segment] == 0:
        return segment, 1.0
    fraction = (s - cumulative[segment]) / lengths[segment]
    return segment, min(max(fraction, 0.0), 1.0)


def _interpolate(
    geometry: BranchGeometry, segment: int, fraction: float
) -> Coordinate:
    start = np.array(geometry.vertices[segment])
    stop = np.array(geometry.vertices[segment + 1])
    if not geometry.geographic:
        x, y = start + fraction * (stop - start)
        return float(x), float(y)
    p, q = _unit_vectors(np.vstack((start, stop)))
    omega = math.acos(min(1.0, max(-1.0, float(np.dot(p, q)))))
    if omega == 0:
        return float(start[0]), float(start[1])
    point = (
        math.sin((1 - fraction) * omega) * p + math.sin(fraction * omega) * q
    ) / math.sin(omega)
    lat = math.degrees(math.asin(min(1.0, max(-1.0, point[2]))))
    lon = math.degrees(math.atan2(point[1], point[0]))
    return lon, lat


def cursor(geometry: BranchGeometry, s: float) -> Coordinate:
    """The coordinate reached after travelling s km along the cable

    Raises:
        OutOfRangeError: if s lies outside [0, arc_length]
    """
    segment, fraction = position(geometry, s)
    return _interpolate(geometry, segment, fraction)


def locate_event(
    design: NetworkDesign, branch_id: int, trace_distance: float
) -> Coordinate:
    """Map a distance read on the trace to a point of a branch's cable

    Optical and geometric lengths may differ (slack, service loops), so the
    distance past the splitter is scaled by the route's arc length over
    `branch.length` before walking the vertices.

    Args:
        design (NetworkDesign): the network, whose branch carries a geometry
        branch_id (int): the branch the event belongs to
        trace_distance (float): distance on the trace, km

    Returns:
        tuple of two floats: the event's coordinate

    Raises:
        GeometryError: if the branch has no geometry
        OutOfRangeError: if the distance is before the splitter or beyond
            the branch end
    """
    branch = design.branch(branch_id)
    if branch.geometry is None:
        raise GeometryError("branch {} has no geometry".format(branch_id))
    along = trace_distance - design.feeder_length
    if not -_POSITION_TOLERANCE_KM <= along <= branch.length + 1e-6:
        raise OutOfRangeError(
            "{} km is not on branch {} ({:.4f} to {:.4f} km)".format(
                trace_distance,
                branch_id,
                design.feeder_length,
                design.end_distance(branch_id),
            )
        )
    along = min(max(along, 0.0), branch.length)
    scale = arc_length(branch.geometry) / branch.length
    return cursor(branch.geometry, along * scale)


def vertices_from(points: Sequence[Sequence[float]]) -> Tuple[Coordinate, ...]:
    """Coerce a list of [a, b] pairs (as found in JSON) to vertex tuples"""
    try:
        return tuple((float(a), float(b)) for a, b in points)
    except (TypeError, ValueError):
        raise GeometryError("vertices must be [a, b] number pairs")
