"""Deterministic quadrature of Gaussian-mixture quantities over polygons.

Area integrals use a centroid fan triangulation with fixed-node Gauss
rules per triangle.  Triangles are first split until no edge exceeds half
the Gaussian width being integrated, then whole-mesh refinements continue
until the Richardson error estimate from two successive levels (their
difference scaled by the rule's 2^order reduction factor) drops below the
requested relative tolerance.  Node sets are a pure function of the
polygon and the spec, so results are bit-reproducible.

Rules up to degree 5 are the classic symmetric triangle rules with exact
rational/surd coefficients; higher degrees use a Gauss-Jacobi x
Gauss-Legendre conical product, which keeps every weight positive at any
order (positivity of the integrand then carries over to the integrals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .density import GaussComponent, GmmDensity
from .errors import QuadratureNotConverged
from .geometry import ConvexPolygon, VoronoiCell

_SLIVER_AREA = 1e-12       # triangles below this are skipped (m^2)
_TRIANGLE_CAP = 4_000_000  # hard resource guard per integral


@dataclass(frozen=True)
class QuadratureSpec:
    """Knobs for polygon and boundary quadrature.

    order: polynomial degree the per-triangle rule must integrate exactly.
    max_depth: whole-mesh refinement rounds available to the convergence
        check; 0 leaves no pair of levels to compare, so every integral
        raises QuadratureNotConverged.
    rel_tol: error target, relative to the integral's own scale.
    """

    order: int = 7
    max_depth: int = 6
    rel_tol: float = 1e-9

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")
        if not (self.rel_tol > 0.0):
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")


@lru_cache(maxsize=64)
def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric nodes (R, 3) and weights (R,) summing to 1.

    Exact for bivariate polynomials of total degree <= order; all weights
    are strictly positive.
    """
    if order <= 1:
        bary = np.array([[1.0, 1.0, 1.0]]) / 3.0
        w = np.array([1.0])
    elif order == 2:
        bary = np.array(
            [[4.0, 1.0, 1.0], [1.0, 4.0, 1.0], [1.0, 1.0, 4.0]]
        ) / 6.0
        w = np.full(3, 1.0 / 3.0)
    elif order <= 5:
        s = math.sqrt(15.0)
        r1, r2 = (6.0 - s) / 21.0, (6.0 + s) / 21.0
        w1, w2 = (155.0 - s) / 1200.0, (155.0 + s) / 1200.0
        rows = [[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]
        wts = [9.0 / 40.0]
        for r, wt in ((r1, w1), (r2, w2)):
            a = 1.0 - 2.0 * r
            rows += [[a, r, r], [r, a, r], [r, r, a]]
            wts += [wt, wt, wt]
        bary = np.array(rows)
        w = np.array(wts)
    else:
        # Conical product rule: Gauss-Jacobi(1,0) in x absorbs the collapsed
        # direction's Jacobian, Gauss-Legendre in the other. n^2 positive
        # weights, exact to degree 2n-1 >= order.
        n = (order + 2) // 2
        xj, wj = roots_jacobi(n, 1.0, 0.0)
        xl, wl = leggauss(n)
        x = 0.5 * (1.0 + xj)
        tt = 0.5 * (1.0 + xl)
        X = np.repeat(x, n)
        Y = ((1.0 - x)[:, None] * tt[None, :]).ravel()
        w = (np.outer(wj, wl) / 4.0).ravel()
        bary = np.column_stack([1.0 - X - Y, X, Y])
    bary.setflags(write=False)
    w.setflags(write=False)
    return bary, w


@lru_cache(maxsize=64)
def _line_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(max(2, order))


def _split4(tris: np.ndarray) -> np.ndarray:
    """Midpoint refinement: each triangle becomes four."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return np.concatenate(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]
    )


def _clip_ring(pts: list, ax: float, ay: float, nx: float, ny: float) -> list:
    """Half-plane clip of a small vertex ring given as (x, y) tuples."""
    out = []
    m = len(pts)
    for i in range(m):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % m]
        d0 = (x0 - ax) * nx + (y0 - ay) * ny
        d1 = (x1 - ax) * nx + (y1 - ay) * ny
        if d0 >= 0.0:
            out.append((x0, y0))
        if (d0 >= 0.0) != (d1 >= 0.0):
            t = d0 / (d0 - d1)
            out.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    return out


def _base_mesh(poly: ConvexPolygon, max_edge: float) -> np.ndarray:
    """Triangulation of the polygon with every edge at most max_edge.

    A uniform grid of squares (side max_edge / sqrt 2, so diagonals stay in
    bounds) covers the bounding box; fully interior squares become two
    triangles each and boundary squares are clipped against the polygon
    edges that cross them, then fanned.  Triangle count stays proportional
    to area / max_edge^2 regardless of how elongated the polygon is.
    """
    v = poly.vertices
    side = max_edge / math.sqrt(2.0)
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    nx = max(1, math.ceil((hi[0] - lo[0]) / side))
    ny = max(1, math.ceil((hi[1] - lo[1]) / side))
    if 2.0 * nx * ny > _TRIANGLE_CAP:
        raise QuadratureNotConverged(
            f"edge target {max_edge:g} m needs more than {_TRIANGLE_CAP} triangles"
        )
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    edges = np.roll(v, -1, axis=0) - v
    elen = np.hypot(edges[:, 0], edges[:, 1])
    inward = np.stack([-edges[:, 1], edges[:, 0]], axis=1) / elen[:, None]
    # Signed distance of every grid corner to every edge line (E, nx+1, ny+1).
    d = (
        inward[:, 0, None, None] * (X[None] - v[:, 0, None, None])
        + inward[:, 1, None, None] * (Y[None] - v[:, 1, None, None])
    )
    cmin = np.minimum(
        np.minimum(d[:, :-1, :-1], d[:, 1:, :-1]),
        np.minimum(d[:, :-1, 1:], d[:, 1:, 1:]),
    )
    cmax = np.maximum(
        np.maximum(d[:, :-1, :-1], d[:, 1:, :-1]),
        np.maximum(d[:, :-1, 1:], d[:, 1:, 1:]),
    )
    full = np.all(cmin >= -1e-9, axis=0)
    dead = np.any(cmax <= -1e-9, axis=0)
    partial = ~full & ~dead

    tris = []
    if full.any():
        fi, fj = np.nonzero(full)
        p00 = np.stack([xs[fi], ys[fj]], axis=1)
        p10 = np.stack([xs[fi + 1], ys[fj]], axis=1)
        p11 = np.stack([xs[fi + 1], ys[fj + 1]], axis=1)
        p01 = np.stack([xs[fi], ys[fj + 1]], axis=1)
        tris.append(np.stack([p00, p10, p11], axis=1))
        tris.append(np.stack([p00, p11, p01], axis=1))
    if partial.any():
        pi, pj = np.nonzero(partial)
        crossing = cmin < 0.0
        extra = []
        for i, j in zip(pi, pj):
            ring = [
                (xs[i], ys[j]),
                (xs[i + 1], ys[j]),
                (xs[i + 1], ys[j + 1]),
                (xs[i], ys[j + 1]),
            ]
            for e in np.nonzero(crossing[:, i, j])[0]:
                ring = _clip_ring(ring, v[e, 0], v[e, 1], inward[e, 0], inward[e, 1])
                if len(ring) < 3:
                    break
            for k in range(1, len(ring) - 1):
                extra.append((ring[0], ring[k], ring[k + 1]))
        if extra:
            tris.append(np.asarray(extra, dtype=float))
    if not tris:
        return np.empty((0, 3, 2))
    return np.concatenate(tris)


def _integrate_mesh(tris: np.ndarray, rule, fn) -> np.ndarray:
    bary, w = rule
    areas = 0.5 * np.abs(
        (tris[:, 1, 0] - tris[:, 0, 0]) * (tris[:, 2, 1] - tris[:, 0, 1])
        - (tris[:, 1, 1] - tris[:, 0, 1]) * (tris[:, 2, 0] - tris[:, 0, 0])
    )
    keep = areas >= _SLIVER_AREA
    if not keep.all():
        tris, areas = tris[keep], areas[keep]
    if len(tris) == 0:
        probe = np.atleast_2d(fn(np.zeros((1, 2))))
        return np.zeros(probe.shape[1])
    nodes = np.matmul(bary[None, :, :], tris).reshape(-1, 2)
    wts = (areas[:, None] * w[None, :]).ravel()
    vals = fn(nodes)
    if vals.ndim == 1:
        vals = vals[:, None]
    return wts @ vals


def polygon_quadrature(
    poly: ConvexPolygon,
    fn,
    *,
    max_edge: float,
    spec: QuadratureSpec,
    floors=0.0,
) -> np.ndarray:
    """Integrate fn over the polygon with successive-refinement control.

    fn maps an (N, 2) node array to (N,) or (N, M) values; the return is
    the (M,) vector of integrals at the finest level reached.  `max_edge`
    is the width-resolution target for the base mesh.  `floors` gives
    per-column absolute scales: a column is converged once the estimated
    error of the finer level, |delta| / 2^order, is at most
    rel_tol * max(|value|, floor).  Raises QuadratureNotConverged when
    max_depth refinements are not enough.
    """
    rule = triangle_rule(spec.order)
    tris = _base_mesh(poly, max_edge)
    prev = _integrate_mesh(tris, rule, fn)
    floor_arr = np.broadcast_to(np.asarray(floors, dtype=float), prev.shape)
    budget = spec.rel_tol * float(2.0**spec.order)
    for _ in range(spec.max_depth):
        if 4 * len(tris) > _TRIANGLE_CAP:
            raise QuadratureNotConverged(
                f"refinement exceeds {_TRIANGLE_CAP} triangles before tolerance is met"
            )
        tris = _split4(tris)
        cur = _integrate_mesh(tris, rule, fn)
        scale = np.maximum(np.abs(cur), floor_arr)
        if np.all(np.abs(cur - prev) <= budget * scale):
            return cur
        prev = cur
    raise QuadratureNotConverged(
        f"no agreement to rel_tol={spec.rel_tol:g} within {spec.max_depth} refinements"
    )


@dataclass(frozen=True)
class CellMoments:
    """Per-component and aggregate mass/centroid data for one cell.

    component_masses (K,) are strictly positive; the totals satisfy
    total_mass = sum(component_masses) and
    centroid = sum(m_k c_k) / total_mass by construction.
    """

    component_masses: np.ndarray
    component_centroids: np.ndarray
    total_mass: float
    centroid: np.ndarray

    def __post_init__(self):
        if np.any(self.component_masses <= 0.0):
            raise ValueError("component masses must be strictly positive")


@dataclass(frozen=True)
class MomentRates:
    """Time derivatives of a cell's mass and centroid over a frozen cell."""

    mass_rate: float
    centroid_rate: np.ndarray


@dataclass(frozen=True)
class CellQuantities:
    """Everything a controller step needs from one cell in one pass."""

    moments: CellMoments
    rates: MomentRates | None = None
    cost: float | None = None


def _sigma_groups(density: GmmDensity):
    groups: dict[float, list[int]] = {}
    for k, comp in enumerate(density.components):
        groups.setdefault(comp.sigma, []).append(k)
    return groups


def _mass_floor(comp: GaussComponent, poly: ConvexPolygon) -> float:
    # Smallest natural scale for this component's mass over the polygon:
    # its whole-plane mass, or amplitude times the polygon area.
    return comp.weight * min(2.0 * math.pi * comp.sigma**2, poly.area)


def _rate_floor(comp: GaussComponent, poly: ConvexPolygon, speed: float, pos_scale: float) -> float:
    return _mass_floor(comp, poly) * speed * (pos_scale + comp.sigma) / comp.sigma**2


def cell_quantities(
    cell: VoronoiCell,
    density: GmmDensity,
    t: float,
    spec: QuadratureSpec,
    *,
    with_rates: bool = False,
    owner_pos=None,
) -> CellQuantities:
    """Fused quadrature over one cell: moments, optional moment rates,
    and (when owner_pos is given) the cell's coverage-cost integral.

    All requested integrands share one node set and one Gaussian
    evaluation per sigma group, and converge jointly.
    """
    poly = cell.polygon
    K = len(density)
    masses = np.empty(K)
    first_moments = np.empty((K, 2))
    want_cost = owner_pos is not None
    p = np.asarray(owner_pos, dtype=float) if want_cost else None
    cost_total = 0.0
    mass_rate = 0.0
    moment_rate = np.zeros(2)
    any_rates = False
    pos_scale = max(1.0, float(np.abs(poly.vertices).max()))
    rp2 = float(((poly.vertices - p) ** 2).sum(axis=1).max()) if want_cost else 0.0

    for sigma, idxs in _sigma_groups(density).items():
        comps = [density.components[k] for k in idxs]
        g = len(comps)
        sources = np.array([c.source_at(t) for c in comps])
        amps = np.array([c.weight for c in comps])
        inv2s2 = 1.0 / (2.0 * sigma * sigma)
        vels = np.array([c.velocity_at(t) for c in comps])
        speed = np.hypot(vels[:, 0], vels[:, 1])
        group_rates = with_rates and bool(np.any(vels))
        ncols = 3 * g + (3 * g if group_rates else 0) + (g if want_cost else 0)

        def fn(nodes, _s=sources, _a=amps, _c=inv2s2, _v=vels, _r=group_rates,
               _p=p, _g=g, _m=ncols):
            # Row-major (columns, nodes) buffer keeps every write contiguous;
            # the transposed view satisfies the (nodes, columns) interface.
            x = np.ascontiguousarray(nodes[:, 0])
            y = np.ascontiguousarray(nodes[:, 1])
            out = np.empty((_m, len(nodes)))
            phi = out[:_g]
            dx = x - _s[:, 0, None]
            dy = y - _s[:, 1, None]
            np.multiply(dx, dx, out=phi)
            tmp = dy * dy
            phi += tmp
            phi *= -_c
            np.exp(phi, out=phi)
            phi *= _a[:, None]
            np.multiply(x, phi, out=out[_g:2 * _g])
            np.multiply(y, phi, out=out[2 * _g:3 * _g])
            off = 3 * _g
            if _r:
                rate = out[off:off + _g]
                np.multiply(dx, _v[:, 0, None], out=rate)
                dy *= _v[:, 1, None]
                rate += dy
                rate *= 2.0 * _c
                rate *= phi
                np.multiply(x, rate, out=out[off + _g:off + 2 * _g])
                np.multiply(y, rate, out=out[off + 2 * _g:off + 3 * _g])
                off += 3 * _g
            if _p is not None:
                px = x - _p[0]
                py = y - _p[1]
                px *= px
                py *= py
                px += py
                np.multiply(px, phi, out=out[off:off + _g])
            return out.T

        mfloor = np.array([_mass_floor(c, poly) for c in comps])
        floor_parts = [mfloor, mfloor * pos_scale, mfloor * pos_scale]
        if group_rates:
            rfloor = np.array(
                [_rate_floor(c, poly, s, pos_scale) for c, s in zip(comps, speed)]
            )
            floor_parts += [rfloor, rfloor * pos_scale, rfloor * pos_scale]
        if want_cost:
            floor_parts.append(mfloor * max(rp2, 1.0))
        floors = np.concatenate(floor_parts)

        vals = polygon_quadrature(poly, fn, max_edge=sigma / 2.0, spec=spec, floors=floors)
        masses[idxs] = vals[:g]
        first_moments[idxs, 0] = vals[g : 2 * g]
        first_moments[idxs, 1] = vals[2 * g : 3 * g]
        off = 3 * g
        if group_rates:
            any_rates = True
            mass_rate += float(vals[off : off + g].sum())
            moment_rate += np.array(
                [vals[off + g : off + 2 * g].sum(), vals[off + 2 * g : off + 3 * g].sum()]
            )
            off += 3 * g
        if want_cost:
            cost_total += float(vals[off : off + g].sum())

    total = float(masses.sum())
    centroid = first_moments.sum(axis=0) / total
    moments = CellMoments(masses, first_moments / masses[:, None], total, centroid)
    rates = None
    if with_rates:
        # Exact zero rates when nothing moves; matches the closed forms.
        centroid_rate = (moment_rate - mass_rate * centroid) / total if any_rates else np.zeros(2)
        rates = MomentRates(mass_rate, centroid_rate)
    return CellQuantities(moments, rates, 0.5 * cost_total if want_cost else None)


def cell_moments(
    cell: VoronoiCell, density: GmmDensity, t: float, spec: QuadratureSpec
) -> CellMoments:
    """Masses and centroids of every density component over the cell."""
    return cell_quantities(cell, density, t, spec).moments


def moment_partials(
    cell: VoronoiCell,
    density: GmmDensity,
    t: float,
    moments: CellMoments,
    spec: QuadratureSpec,
) -> MomentRates:
    """Mass/centroid rates from the density's motion, cell held fixed."""
    poly = cell.polygon
    mass_rate = 0.0
    moment_rate = np.zeros(2)
    pos_scale = max(1.0, float(np.abs(poly.vertices).max()))
    for sigma, idxs in _sigma_groups(density).items():
        comps = [density.components[k] for k in idxs]
        vels = np.array([c.velocity_at(t) for c in comps])
        if not np.any(vels):
            continue
        sources = np.array([c.source_at(t) for c in comps])
        amps = np.array([c.weight for c in comps])
        inv2s2 = 1.0 / (2.0 * sigma * sigma)
        invs2 = 1.0 / (sigma * sigma)

        def fn(nodes, _s=sources, _a=amps, _c=inv2s2, _i=invs2, _v=vels):
            d = nodes[:, None, :] - _s[None, :, :]
            phi = _a * np.exp(-np.einsum("nki,nki->nk", d, d) * _c)
            rate = np.einsum("nki,ki->nk", d, _v) * _i * phi
            return np.concatenate(
                [rate, nodes[:, 0:1] * rate, nodes[:, 1:2] * rate], axis=1
            )

        g = len(comps)
        speed = np.hypot(vels[:, 0], vels[:, 1])
        rfloor = np.array(
            [_rate_floor(c, poly, s, pos_scale) for c, s in zip(comps, speed)]
        )
        floors = np.concatenate([rfloor, rfloor * pos_scale, rfloor * pos_scale])
        vals = polygon_quadrature(
            poly, fn, max_edge=sigma / 2.0, spec=spec, floors=floors
        )
        mass_rate += float(vals[:g].sum())
        moment_rate += np.array([vals[g : 2 * g].sum(), vals[2 * g : 3 * g].sum()])
    centroid_rate = (moment_rate - mass_rate * moments.centroid) / moments.total_mass
    return MomentRates(mass_rate, centroid_rate)


def segment_flux_integral(
    start, end, outward_normal, agent_pos, comp: GaussComponent, t: float, spec: QuadratureSpec
) -> float:
    """Line integral of |q - p|^2 (w . n) phi_comp along one straight segment.

    Gauss-Legendre nodes on pieces no longer than sigma/2; deterministic.
    """
    a = np.asarray(start, dtype=float)
    b = np.asarray(end, dtype=float)
    p = np.asarray(agent_pos, dtype=float)
    wn = float(np.asarray(comp.velocity_at(t)) @ np.asarray(outward_normal, dtype=float))
    if wn == 0.0:
        return 0.0
    length = float(np.hypot(*(b - a)))
    if length == 0.0:
        return 0.0
    pieces = max(1, math.ceil(length / (comp.sigma / 2.0)))
    xg, wg = _line_rule(spec.order)
    edges = np.linspace(0.0, 1.0, pieces + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    params = (mid[:, None] + half * xg[None, :]).ravel()
    weights = np.tile(wg, pieces) * half * length
    q = a[None, :] + params[:, None] * (b - a)[None, :]
    r2 = ((q - p) ** 2).sum(axis=1)
    return wn * float(weights @ (r2 * comp.value(q, t)))


def boundary_flux_integral(
    segments, agent_pos, comp: GaussComponent, t: float, spec: QuadratureSpec
) -> float:
    """Sum of segment flux integrals over region-boundary segments.

    Segments must all lie on the coverage-region boundary (neighbor is
    None); an empty list integrates to zero.
    """
    total = 0.0
    for seg in segments:
        if seg.neighbor is not None:
            raise ValueError("boundary_flux_integral expects region-boundary segments only")
        total += segment_flux_integral(
            seg.start, seg.end, seg.outward_normal, agent_pos, comp, t, spec
        )
    return total
