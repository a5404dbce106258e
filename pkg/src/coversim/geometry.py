"""Convex-polygon primitives and distributed Voronoi cell construction.

All coordinates are meters in a fixed planar frame.  Points are plain
float64 numpy arrays of shape (2,); polygons store their vertices
counterclockwise in an (N, 2) array.  Every function here is pure and the
value types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoincidentAgents, OutsideRegion

# Tolerances, all in meters (or m^2 where noted).
DUPLICATE_TOL = 1e-9        # vertices closer than this merge into one
COLLINEAR_TOL = 1e-12       # |cross| below this drops the middle vertex (m^2)
MIN_AREA = 1e-12            # clip results below this count as empty (m^2)
EDGE_DROP_TOL = 1e-9        # boundary pieces shorter than this are dropped
BISECTOR_TOL = 1e-9         # max point-to-bisector distance for edge labeling
MIN_SEPARATION = 1e-6       # agents closer than this are coincident
CONTAINS_TOL = 1e-9         # membership test slack; points on the boundary pass


def as_point(p) -> np.ndarray:
    """Coerce to a finite float64 (2,) array, rejecting NaN/inf."""
    q = np.asarray(p, dtype=float).reshape(-1)
    if q.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError(f"point has non-finite coordinates: {q}")
    return q


def _shoelace_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _normalize_ring(verts: np.ndarray) -> np.ndarray | None:
    """Merge duplicate and collinear vertices; None if degenerate."""
    if len(verts) < 3:
        return None
    # Drop consecutive near-duplicates (cyclically).
    keep = [verts[0]]
    for v in verts[1:]:
        if np.hypot(*(v - keep[-1])) > DUPLICATE_TOL:
            keep.append(v)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= DUPLICATE_TOL:
        keep.pop()
    if len(keep) < 3:
        return None
    out = np.array(keep)
    # Merge collinear middles: cross product of adjacent edges below tolerance.
    prev_n = -1
    while len(out) >= 3 and len(out) != prev_n:
        prev_n = len(out)
        a = np.roll(out, 1, axis=0)
        c = np.roll(out, -1, axis=0)
        cross = (out[:, 0] - a[:, 0]) * (c[:, 1] - out[:, 1]) - (
            out[:, 1] - a[:, 1]
        ) * (c[:, 0] - out[:, 0])
        mask = np.abs(cross) >= COLLINEAR_TOL
        if not mask.all():
            out = out[mask]
    if len(out) < 3 or abs(_shoelace_area(out)) < MIN_AREA:
        return None
    return out


class ConvexPolygon:
    """Immutable convex polygon with counterclockwise vertices.

    Construction canonicalizes the ring: clockwise input is reversed,
    vertices closer than 1e-9 m merge, and collinear middle vertices are
    dropped.  Raises ValueError for degenerate or non-convex input.
    """

    __slots__ = ("vertices", "area", "perimeter", "centroid")

    def __init__(self, vertices):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or not np.all(np.isfinite(verts)):
            raise ValueError("vertices must be a finite (N, 2) array")
        ring = _normalize_ring(verts)
        if ring is None:
            raise ValueError("degenerate polygon (fewer than 3 distinct vertices or zero area)")
        if _shoelace_area(ring) < 0.0:
            ring = ring[::-1].copy()
        a = np.roll(ring, 1, axis=0)
        c = np.roll(ring, -1, axis=0)
        cross = (ring[:, 0] - a[:, 0]) * (c[:, 1] - ring[:, 1]) - (
            ring[:, 1] - a[:, 1]
        ) * (c[:, 0] - ring[:, 0])
        if np.any(cross < -COLLINEAR_TOL):
            raise ValueError("polygon is not convex")
        ring.setflags(write=False)
        self.vertices = ring
        self.area = _shoelace_area(ring)
        edges = np.roll(ring, -1, axis=0) - ring
        self.perimeter = float(np.hypot(edges[:, 0], edges[:, 1]).sum())
        # Area centroid (uniform density); inside the polygon by convexity.
        nxt = np.roll(ring, -1, axis=0)
        w = ring[:, 0] * nxt[:, 1] - nxt[:, 0] * ring[:, 1]
        self.centroid = ((ring + nxt) * w[:, None]).sum(axis=0) / (6.0 * self.area)
        self.centroid.setflags(write=False)

    def __repr__(self):
        return f"ConvexPolygon({len(self.vertices)} vertices, area={self.area:.6g})"

    def contains(self, point, tol: float = CONTAINS_TOL) -> bool:
        """True if the point is inside or within `tol` meters of the boundary."""
        q = as_point(point)
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        lengths = np.hypot(e[:, 0], e[:, 1])
        cross = e[:, 0] * (q[1] - v[:, 1]) - e[:, 1] * (q[0] - v[:, 0])
        return bool(np.all(cross >= -tol * lengths))

    def project(self, point) -> np.ndarray:
        """Euclidean projection onto the polygon (identity for interior points)."""
        q = as_point(point)
        if self.contains(q):
            return q
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        t = np.einsum("ij,ij->i", q - v, e) / np.einsum("ij,ij->i", e, e)
        t = np.clip(t, 0.0, 1.0)
        cand = v + t[:, None] * e
        d2 = ((cand - q) ** 2).sum(axis=1)
        return cand[int(np.argmin(d2))].copy()


def polygon_area(poly: ConvexPolygon) -> float:
    """Shoelace area, positive for the canonical CCW orientation."""
    return poly.area


def polygon_perimeter(poly: ConvexPolygon) -> float:
    return poly.perimeter


def clip_half_plane(poly: ConvexPolygon, point_on_line, inward_normal) -> ConvexPolygon | None:
    """Clip to the half-plane {q : (q - point_on_line) . inward_normal >= 0}.

    Returns None when the intersection is empty or degenerate
    (area below 1e-12 m^2).
    """
    a = as_point(point_on_line)
    n = as_point(inward_normal)
    verts = poly.vertices
    d = (verts - a) @ n
    if np.all(d >= 0.0):
        return poly
    if np.all(d <= 0.0):
        return None
    out: list[np.ndarray] = []
    m = len(verts)
    for i in range(m):
        j = (i + 1) % m
        di, dj = d[i], d[j]
        if di >= 0.0:
            out.append(verts[i])
        if (di >= 0.0) != (dj >= 0.0):
            s = di / (di - dj)
            out.append(verts[i] + s * (verts[j] - verts[i]))
    if len(out) < 3:
        return None
    try:
        return ConvexPolygon(np.array(out))
    except ValueError:
        return None


@dataclass(frozen=True)
class BoundarySegment:
    """One piece of a cell's perimeter with its outward unit normal.

    `neighbor` is the adjacent agent's id when the piece lies on a shared
    bisector, and None when it lies on the coverage-region boundary.
    """

    start: np.ndarray
    end: np.ndarray
    outward_normal: np.ndarray
    neighbor: int | None = None

    @property
    def on_region_boundary(self) -> bool:
        return self.neighbor is None

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.end - self.start)))


@dataclass(frozen=True)
class VoronoiCell:
    """An agent's Voronoi region with labeled perimeter segments."""

    owner: int
    polygon: ConvexPolygon
    segments: tuple[BoundarySegment, ...]
    neighbors: frozenset[int] = field(default_factory=frozenset)

    def region_boundary_segments(self) -> list[BoundarySegment]:
        return [s for s in self.segments if s.neighbor is None]


def voronoi_cell(self_pos, others, region: ConvexPolygon, owner: int = 0) -> VoronoiCell:
    """Build one agent's Voronoi cell by clipping the region with every bisector.

    `others` is an iterable of (agent id, position).  Neighbor identity is an
    output: ids whose bisector contributes a perimeter piece of positive
    length.  Raises OutsideRegion / CoincidentAgents on bad input.
    """
    p = as_point(self_pos)
    if not region.contains(p):
        raise OutsideRegion(f"agent position {p} lies outside the coverage region")
    other_list: list[tuple[int, np.ndarray]] = []
    for oid, opos in others:
        q = as_point(opos)
        if np.hypot(*(q - p)) < MIN_SEPARATION:
            raise CoincidentAgents(
                f"agents {owner} and {oid} are closer than {MIN_SEPARATION} m"
            )
        other_list.append((int(oid), q))

    poly: ConvexPolygon | None = region
    for _, q in other_list:
        mid = 0.5 * (p + q)
        n = (p - q) / np.hypot(*(p - q))
        poly = clip_half_plane(poly, mid, n)
        if poly is None:  # cannot happen: p itself stays strictly inside
            raise OutsideRegion("cell collapsed during clipping")

    verts = poly.vertices
    segments: list[BoundarySegment] = []
    neighbors: set[int] = set()
    m = len(verts)
    for i in range(m):
        a, b = verts[i], verts[(i + 1) % m]
        edge = b - a
        elen = np.hypot(*edge)
        if elen < EDGE_DROP_TOL:
            continue
        label: int | None = None
        normal: np.ndarray | None = None
        for oid, q in other_list:
            gap = q - p
            dist = np.hypot(*gap)
            nb = gap / dist
            mid = 0.5 * (p + q)
            # Both endpoints must sit on the bisector line.
            if abs((a - mid) @ nb) < BISECTOR_TOL and abs((b - mid) @ nb) < BISECTOR_TOL:
                label = oid
                normal = nb
                break
        if normal is None:
            normal = np.array([edge[1], -edge[0]]) / elen
        else:
            neighbors.add(label)
        normal.setflags(write=False)
        a = a.copy()
        b = b.copy()
        a.setflags(write=False)
        b.setflags(write=False)
        segments.append(BoundarySegment(a, b, normal, label))

    return VoronoiCell(owner, poly, tuple(segments), frozenset(neighbors))


def tessellate(positions, region: ConvexPolygon) -> list[VoronoiCell]:
    """Voronoi cells for all agents; cell i is owned by index i."""
    pts = [as_point(p) for p in positions]
    cells = []
    for i, p in enumerate(pts):
        others = [(j, q) for j, q in enumerate(pts) if j != i]
        cells.append(voronoi_cell(p, others, region, owner=i))
    return cells
