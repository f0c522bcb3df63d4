"""
Planar geometry shared by both estimation stages.

All coordinates live in a world-fixed metric frame (x east, y north).
Hot paths work on numpy arrays; the pydantic types are the public values.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from shapely.geometry import LineString

_EPS = 1e-9


class Point2(BaseModel):
    """A position in the world frame."""
    model_config = ConfigDict(frozen=True)

    x: float = Field(..., description="East coordinate in meters")
    y: float = Field(..., description="North coordinate in meters")

    @field_validator("x", "y")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("coordinates must be finite")
        return value

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def from_array(cls, xy: Sequence[float]) -> "Point2":
        return cls(x=float(xy[0]), y=float(xy[1]))


class Direction2(BaseModel):
    """A unit orientation vector. Input is normalized on construction."""
    model_config = ConfigDict(frozen=True)

    dx: float = Field(..., description="East component")
    dy: float = Field(..., description="North component")

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data):
        if isinstance(data, dict):
            dx, dy = float(data["dx"]), float(data["dy"])
            norm = math.hypot(dx, dy)
            if not math.isfinite(norm) or norm < _EPS:
                raise ValueError("direction vector must be finite and non-zero")
            return {"dx": dx / norm, "dy": dy / norm}
        return data

    @property
    def angle(self) -> float:
        """Heading in [0, 2π)."""
        return math.atan2(self.dy, self.dx) % (2.0 * math.pi)

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy], dtype=float)

    @classmethod
    def from_array(cls, v: Sequence[float]) -> "Direction2":
        return cls(dx=float(v[0]), dy=float(v[1]))


class Polyline(BaseModel):
    """An ordered sequence of at least two distinct consecutive points."""
    model_config = ConfigDict(frozen=True)

    points: List[Point2] = Field(..., min_length=2, description="Vertices in order")

    @field_validator("points")
    @classmethod
    def _distinct(cls, points: List[Point2]) -> List[Point2]:
        for a, b in zip(points, points[1:]):
            if math.hypot(b.x - a.x, b.y - a.y) < _EPS:
                raise ValueError("consecutive polyline points must be distinct")
        return points

    def as_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=float)

    @property
    def length(self) -> float:
        return LineString(self.as_array()).length

    @classmethod
    def from_array(cls, xy: np.ndarray) -> "Polyline":
        return cls(points=[Point2.from_array(row) for row in np.asarray(xy, dtype=float)])


def closest_on_polyline(points: np.ndarray, vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closest-point query of many points against one polyline.

    Args:
        points: (m, 2) query points
        vertices: (k, 2) polyline vertices, k >= 2

    Returns:
        Tuple (distance, segment index, segment parameter in [0, 1]) per point
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vertices = np.asarray(vertices, dtype=float)
    a = vertices[:-1]
    ab = vertices[1:] - a
    seg_len2 = np.einsum("ij,ij->i", ab, ab)
    seg_len2 = np.where(seg_len2 > 0.0, seg_len2, 1.0)
    ap = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("mkj,kj->mk", ap, ab) / seg_len2[None, :], 0.0, 1.0)
    diff = ap - t[..., None] * ab[None, :, :]
    dist = np.sqrt(np.einsum("mkj,mkj->mk", diff, diff))
    seg = np.argmin(dist, axis=1)
    rows = np.arange(points.shape[0])
    return dist[rows, seg], seg, t[rows, seg]


def polyline_distances(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Minimum distance of each point to the polyline (endpoint distance outside segments)."""
    if len(points) == 0:
        return np.zeros(0)
    return closest_on_polyline(points, vertices)[0]


def orthogonal_distance(p: Point2, line: Polyline) -> float:
    """Distance from a point to the closest location on a polyline."""
    return float(polyline_distances(p.as_array()[None, :], line.as_array())[0])


def angle_between(u: Direction2, v: Direction2) -> float:
    """Unsigned angle between two unit vectors in [0, π]."""
    return float(np.arccos(np.clip(u.dx * v.dx + u.dy * v.dy, -1.0, 1.0)))


def cumulative_length(vertices: np.ndarray) -> np.ndarray:
    steps = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def project_onto(points: np.ndarray, vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arc length, signed lateral offset and clamping flag of each point's projection.

    The lateral offset is positive on the left of the polyline's direction.
    A point is clamped when its closest location is a polyline endpoint.
    """
    dist, seg, t = closest_on_polyline(points, vertices)
    arc = cumulative_length(vertices)
    ab = vertices[seg + 1] - vertices[seg]
    seg_len = np.linalg.norm(ab, axis=1)
    along = arc[seg] + t * seg_len
    rel = points - vertices[seg]
    cross = ab[:, 0] * rel[:, 1] - ab[:, 1] * rel[:, 0]
    lateral = np.where(cross >= 0.0, dist, -dist)
    clamped = ((seg == 0) & (t <= 0.0)) | ((seg == len(vertices) - 2) & (t >= 1.0))
    return along, lateral, clamped


def vertex_normals(vertices: np.ndarray) -> np.ndarray:
    """Unit left normals at each vertex from the averaged adjacent tangents."""
    tangents = np.gradient(vertices, axis=0)
    norms = np.linalg.norm(tangents, axis=1, keepdims=True)
    tangents = tangents / np.where(norms > 0.0, norms, 1.0)
    return np.column_stack([-tangents[:, 1], tangents[:, 0]])


def circular_mean(vectors: np.ndarray) -> np.ndarray:
    """Normalized vector sum of (n, 2) direction vectors."""
    total = np.asarray(vectors, dtype=float).sum(axis=0)
    norm = np.linalg.norm(total)
    if norm < _EPS:
        raise ValueError("directions cancel out; mean direction undefined")
    return total / norm


def resample_equidistant(line: Polyline, spacing: float) -> Polyline:
    """Support points every `spacing` meters of arc length, endpoints kept.

    A line shorter than `spacing` comes back as its two endpoints.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    return Polyline.from_array(resample_array(line.as_array(), spacing))


def resample_array(vertices: np.ndarray, spacing: float) -> np.ndarray:
    shape = LineString(vertices)
    total = shape.length
    n = int(math.floor(total / spacing + _EPS))
    stations = spacing * np.arange(n + 1, dtype=float)
    if total - stations[-1] > 1e-6:
        stations = np.append(stations, total)
    else:
        stations[-1] = total
    if len(stations) < 2:
        stations = np.array([0.0, total])
    return np.array([shape.interpolate(s).coords[0] for s in stations], dtype=float)


def angular_difference(a: float, b: float) -> float:
    """Absolute difference of two headings in [0, π]."""
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)
