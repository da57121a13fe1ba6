"""Global measurements of shapes: perimeter, area, radii, strip widths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from matplotlib.path import Path
from scipy.optimize import minimize
from scipy.spatial import Voronoi, cKDTree

from .curve import (
    Ambient,
    BoundaryField,
    GeometryError,
    MultiCurve,
    PlaneCurve,
    point_in_curve,
    vertex_curvature,
    winding_number,
)


@dataclass(frozen=True)
class ShapeMeasures:
    perimeter: float
    area: float
    centroid: tuple[float, float]
    winding: tuple[int, ...]
    r_in: float | None = None
    r_out: float | None = None
    l_in: float | None = None
    l_out: float | None = None

    def as_dict(self) -> dict:
        return {
            "L": self.perimeter,
            "A": self.area,
            "centroid": list(self.centroid),
            "winding": list(self.winding),
            "R_in": self.r_in,
            "R_out": self.r_out,
            "L_in": self.l_in,
            "L_out": self.l_out,
        }


def perimeter(shape: MultiCurve) -> float:
    return float(sum(c.length for c in shape.components))


def area(shape: MultiCurve) -> float:
    """Enclosed area; strips on the torus use the x dy circulation modulo 1."""
    if shape.topology == "strip":
        comps = shape.components
        if abs(comps[0].drift[1]) > 0:
            a = sum(c.x_dy for c in comps)
        else:
            a = -sum(_y_dx(c) for c in comps)
        return float(np.mod(a, 1.0))
    a = float(sum(c.signed_area for c in shape.components))
    return a


def _y_dx(c: PlaneCurve) -> float:
    z, dz = c._dense
    return float(np.mean(z.imag * dz.real))


def centroid(shape: MultiCurve) -> np.ndarray:
    if shape.topology == "strip":
        pts = shape.points
        return pts.mean(axis=0)
    m = sum(c.first_moment for c in shape.components)
    return m / area(shape)


def measures(shape: MultiCurve, *, radii: bool | None = None, widths: bool | None = None) -> ShapeMeasures:
    """Compute :class:`ShapeMeasures`.

    ``radii`` (inscribed/enclosing disks) defaults to on for simply connected
    shapes, ``widths`` (strip widths) to on for torus strips. Asking for
    either on the wrong topology raises :class:`GeometryError`.
    """
    topo = shape.topology
    if radii is None:
        radii = topo == "simple"
    if widths is None:
        widths = topo == "strip"
    kw = {}
    if radii:
        if topo != "simple":
            raise GeometryError("R_in/R_out are only supported for simply connected plane shapes")
        c = shape.components[0]
        kw["r_in"] = inradius(c)
        kw["r_out"] = circumradius(c)
    if widths:
        if topo != "strip":
            raise GeometryError("L_in/L_out are only supported for torus strips")
        kw["l_in"], kw["l_out"] = strip_widths(shape)
    cen = centroid(shape)
    return ShapeMeasures(
        perimeter=perimeter(shape),
        area=area(shape),
        centroid=(float(cen[0]), float(cen[1])),
        winding=tuple(winding_number(c) for c in shape.components),
        **kw,
    )


# -- enclosing and inscribed disks --------------------------------------------

def _circle_two(a, b):
    c = 0.5 * (a + b)
    return c, np.hypot(*(a - c))


def _circle_three(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-300:
        pairs = [_circle_two(a, b), _circle_two(a, c), _circle_two(b, c)]
        return max(pairs, key=lambda t: t[1])
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    cen = np.array([ux, uy])
    return cen, np.hypot(*(a - cen))


def min_enclosing_circle(points: np.ndarray, seed: int = 0) -> tuple[np.ndarray, float]:
    """Welzl's algorithm (iterative move-to-front form) on a shuffled copy."""
    pts = np.array(points, dtype=float)
    np.random.default_rng(seed).shuffle(pts)
    eps = 1e-12
    c, r = pts[0].copy(), 0.0
    for i in range(1, len(pts)):
        if np.hypot(*(pts[i] - c)) <= r * (1 + eps):
            continue
        c, r = pts[i].copy(), 0.0
        for j in range(i):
            if np.hypot(*(pts[j] - c)) <= r * (1 + eps):
                continue
            c, r = _circle_two(pts[i], pts[j])
            for k in range(j):
                if np.hypot(*(pts[k] - c)) <= r * (1 + eps):
                    continue
                c, r = _circle_three(pts[i], pts[j], pts[k])
    return c, float(r)


def circumradius(curve: PlaneCurve) -> float:
    pts = curve.dense_points(8)
    # only hull points can matter; prune before the O(n) expected Welzl loop
    from scipy.spatial import ConvexHull

    hull = pts[ConvexHull(pts).vertices]
    return min_enclosing_circle(hull)[1]


def _distance_to_curve(curve: PlaneCurve, tree: cKDTree, dense: np.ndarray, c: np.ndarray) -> float:
    d, j = tree.query(c)
    # refine on the two adjacent dense segments
    m = len(dense)
    best = d
    for k in (j - 1, j):
        a = dense[k % m]
        b = dense[(k + 1) % m]
        ab = b - a
        s = np.clip(np.dot(c - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        best = min(best, float(np.hypot(*(a + s * ab - c))))
    return best


def inradius(curve: PlaneCurve) -> float:
    """Largest inscribed disk radius.

    Seeds from the Voronoi vertices of a dense boundary sample (the medial
    axis of the sample) plus the centroid, then polishes the best candidates
    with a Nelder-Mead search on the distance-to-boundary function.
    """
    dense = curve.dense_points(8)
    tree = cKDTree(dense)
    verts = Voronoi(dense).vertices
    inside = verts[Path(dense).contains_points(verts)]
    cand = np.vstack([curve.first_moment / curve.signed_area, inside])
    dist = tree.query(cand)[0]
    order = np.argsort(-dist)[:5]
    best = 0.0
    for c0 in cand[order]:
        res = minimize(
            lambda c: -_distance_to_curve(curve, tree, dense, c),
            c0,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 400},
        )
        for c in (res.x, c0):
            if point_in_curve(curve, c):
                best = max(best, _smooth_distance(curve, tree, c))
    return float(best)


def _smooth_distance(curve: PlaneCurve, tree: cKDTree, c: np.ndarray) -> float:
    """Distance from ``c`` to the trigonometric interpolant, by Newton on the parameter."""
    m = 8 * curve.n
    _, js = tree.query(c, k=4)
    t = np.atleast_1d(js) / m
    w = complex(*c)
    for _ in range(8):
        z, dz, d2z = curve.trig.at(t, (0, 1, 2))
        g = ((z - w) * np.conj(dz)).real
        h = np.abs(dz) ** 2 + ((z - w) * np.conj(d2z)).real
        t = t - g / h
    return float(np.min(np.abs(curve.trig.at(t) - w)))


# -- torus strips --------------------------------------------------------------

def _strip_axes(shape: MultiCurve) -> tuple[int, int]:
    """(across, along) coordinate indices of a strip."""
    d = shape.components[0].drift
    return (0, 1) if abs(d[1]) > 0 else (1, 0)


def strip_sides(shape: MultiCurve) -> tuple[PlaneCurve, PlaneCurve]:
    """(low, high) boundary components across the strip direction."""
    across, along = _strip_axes(shape)
    a, b = shape.components
    # the component travelling in +along has the set on its low side
    sign = 1 if across == 0 else -1
    if sign * a.drift[along] > 0:
        return b, a
    return a, b


def _lift_pair(shape: MultiCurve) -> tuple[np.ndarray, np.ndarray]:
    across, _ = _strip_axes(shape)
    low, high = strip_sides(shape)
    pl = low.dense_points(8)
    ph = high.dense_points(8)
    shift = np.floor(ph[:, across].mean() - pl[:, across].mean())
    ph = ph.copy()
    ph[:, across] -= shift
    return pl, ph


def strip_widths(shape: MultiCurve) -> tuple[float, float]:
    """(L_in, L_out): widest band inside and narrowest band containing the strip."""
    across, _ = _strip_axes(shape)
    pl, ph = _lift_pair(shape)
    l_in = ph[:, across].min() - pl[:, across].max()
    l_out = ph[:, across].max() - pl[:, across].min()
    return float(max(l_in, 0.0)), float(l_out)


def strip_inner_center(shape: MultiCurve) -> np.ndarray:
    """Center of the widest band S_{L_in} contained in the strip."""
    across, along = _strip_axes(shape)
    pl, ph = _lift_pair(shape)
    c = np.zeros(2)
    c[across] = 0.5 * (ph[:, across].min() + pl[:, across].max())
    c[along] = 0.5
    return np.mod(c, 1.0)


# -- boundary quantities and predicates ----------------------------------------

def curvature(shape: MultiCurve | PlaneCurve) -> BoundaryField:
    """Signed vertex curvature of every boundary component."""
    if isinstance(shape, PlaneCurve):
        shape = MultiCurve.single(shape)
    return shape.field(np.concatenate([vertex_curvature(c) for c in shape.components]), "curvature")


def support_function(curve: PlaneCurve, origin=(0.0, 0.0)) -> BoundaryField:
    """p_i = (X_i - origin) . n_out_i, positive for convex curves around origin."""
    if curve.ambient is not Ambient.PLANE:
        raise GeometryError("the support function is defined for plane curves")
    o = np.asarray(origin, dtype=float)
    if not point_in_curve(curve, o):
        raise GeometryError("support-function origin must lie strictly inside the curve")
    p = np.sum((curve.lifted - o) * curve.normals, axis=1)
    if np.min(np.abs(p)) == 0.0 and np.min(np.hypot(*(curve.lifted - o).T)) < 1e-14:
        raise GeometryError("support-function origin lies on the curve")
    return BoundaryField(p, "support", (curve.n,))


def is_convex(curve: PlaneCurve, tol: float = 1e-6) -> bool:
    if curve.ambient is Ambient.PLANE and curve.orientation != "ccw":
        return False
    return bool(np.min(vertex_curvature(curve)) >= -tol)


def is_star_shaped(shape: MultiCurve, center) -> bool:
    """Monotone polar angle (plane) or monotone graph coordinate (strip) from ``center``."""
    c = np.asarray(center, dtype=float)
    topo = shape.topology
    if topo == "simple" and not shape.is_torus:
        curve = shape.components[0]
        if not point_in_curve(curve, c):
            raise GeometryError("star-shapedness center lies outside the set")
        p = curve.dense_points(4) - c
        ang = np.unwrap(np.arctan2(p[:, 1], p[:, 0]))
        d = np.diff(np.r_[ang, ang[0] + 2 * np.pi])
        return bool(np.all(d > 0))
    if topo == "strip":
        _, along = _strip_axes(shape)
        if not _strip_contains(shape, c):
            raise GeometryError("star-shapedness center lies outside the set")
        for comp in shape.components:
            p = comp.dense_points(4)
            step = np.diff(np.vstack([p, p[:1] + comp.drift]), axis=0)[:, along]
            if not (np.all(step > 0) or np.all(step < 0)):
                return False
        return True
    raise GeometryError(f"star-shapedness is checked for simple plane shapes and strips, not {topo!r}")


def _strip_contains(shape: MultiCurve, c) -> bool:
    across, along = _strip_axes(shape)
    pl, ph = _lift_pair(shape)
    y = np.mod(c[along], 1.0)
    il = np.argmin(np.abs(np.mod(pl[:, along] - y + 0.5, 1.0) - 0.5))
    ih = np.argmin(np.abs(np.mod(ph[:, along] - y + 0.5, 1.0) - 0.5))
    x = c[across]
    lo, hi = pl[il, across], ph[ih, across]
    for k in (-1, 0, 1):
        if lo < x + k < hi:
            return True
    return False
