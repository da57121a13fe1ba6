"""Closed polygonal curves on the plane and on the flat torus."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .spectral import FineSampler, TrigCurve

MIN_VERTICES = 16


class GeometryError(ValueError):
    """Raised for degenerate or topologically unsupported geometry."""


class Ambient(str, enum.Enum):
    PLANE = "r2"
    TORUS = "t2"


def _rot_cw(v: np.ndarray) -> np.ndarray:
    """Rotate 2-vectors by -pi/2."""
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class PlaneCurve:
    """Closed curve given by ordered vertices; vertex i joins vertex (i+1) mod N.

    The enclosed region lies to the left of the direction of travel, so the
    outward normal is the tangent rotated by -pi/2 for every component. A
    closed curve with positive signed area is ``"ccw"``; the inner boundary of
    an annulus is ``"cw"``. Torus vertices are stored reduced to [0, 1)^2.
    """

    vertices: np.ndarray
    ambient: Ambient = Ambient.PLANE
    orientation: str | None = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("vertices must be an (N, 2) array")
        if len(v) < MIN_VERTICES:
            raise GeometryError(f"a curve needs at least {MIN_VERTICES} vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertices must be finite")
        ambient = Ambient(self.ambient)
        if ambient is Ambient.TORUS:
            v = np.mod(v, 1.0)
            v[v >= 1.0] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "ambient", ambient)
        actual = self._orientation_from_data()
        if self.orientation is None:
            object.__setattr__(self, "orientation", actual)
        elif self.orientation not in ("ccw", "cw"):
            raise GeometryError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        elif self.orientation != actual:
            raise GeometryError(
                f"declared orientation {self.orientation!r} disagrees with vertex order ({actual!r})"
            )

    def _orientation_from_data(self) -> str:
        if self.is_strip:
            return "ccw"
        return "ccw" if self.polygon_area >= 0 else "cw"

    # -- basic structure ---------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def _unwrapped(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        if self.ambient is Ambient.PLANE:
            return v, np.zeros(2)
        d = np.diff(np.vstack([v, v[:1]]), axis=0)
        d -= np.rint(d)
        lifted = v[0] + np.vstack([np.zeros(2), np.cumsum(d[:-1], axis=0)])
        drift = np.rint(d.sum(axis=0))
        return lifted, drift

    @property
    def lifted(self) -> np.ndarray:
        """Vertices unwrapped by minimal-image steps (plane: the vertices)."""
        return self._unwrapped[0]

    @property
    def drift(self) -> np.ndarray:
        """Net lattice displacement over one traversal; nonzero only for strips."""
        return self._unwrapped[1]

    @cached_property
    def is_strip(self) -> bool:
        return bool(np.any(self.drift != 0))

    @property
    def edges(self) -> np.ndarray:
        p = self.lifted
        nxt = np.roll(p, -1, axis=0)
        nxt[-1] += self.drift
        return nxt - p

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*self.edges.T)

    @property
    def polygon_perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @property
    def polygon_area(self) -> float:
        """Shoelace area of the lifted polygon (closed components only)."""
        x, y = self.lifted.T
        return 0.5 * float(x[:-1] @ y[1:] - x[1:] @ y[:-1] + x[-1] * y[0] - x[0] * y[-1])

    def fan_area(self, center=None) -> float:
        """Signed area by triangulating from ``center``; equals the shoelace area."""
        p = self.lifted
        c = p.mean(axis=0) if center is None else np.asarray(center, float)
        a = p - c
        b = np.roll(a, -1, axis=0)
        return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]))

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        e = self.edge_lengths
        return bool(np.max(np.abs(e - e.mean())) <= rtol * e.mean())

    # -- smooth model ------------------------------------------------------
    @cached_property
    def trig(self) -> TrigCurve:
        return TrigCurve(self.lifted, self.drift)

    @cached_property
    def _dense(self) -> tuple[np.ndarray, np.ndarray]:
        # 2n points integrate the quadratic and cubic area and moment integrands exactly
        m = 2 * self.n
        z = self.trig.upsample(m, 0)
        dz = self.trig.upsample(m, 1)
        return z, dz

    @cached_property
    def length(self) -> float:
        """Perimeter of the smooth interpolant (spectrally accurate)."""
        return float(np.mean(np.abs(self._dense[1])))

    @cached_property
    def signed_area(self) -> float:
        """Signed enclosed area of a closed component (spectrally accurate)."""
        if self.is_strip:
            raise GeometryError("a strip component does not enclose an area by itself")
        z, dz = self._dense
        return 0.5 * float(np.mean((np.conj(z) * dz).imag))

    @cached_property
    def x_dy(self) -> float:
        """Line integral of x dy along the lifted component."""
        z, dz = self._dense
        return float(np.mean(z.real * dz.imag))

    @cached_property
    def first_moment(self) -> np.ndarray:
        """Integral of (x, y) over the enclosed signed region."""
        z, dz = self._dense
        mx = np.mean(0.5 * z.real**2 * dz.imag)
        my = -np.mean(0.5 * z.imag**2 * dz.real)
        return np.array([mx, my])

    @cached_property
    def vertex_tangent(self) -> np.ndarray:
        # the dense grid contains the vertices at its even points
        dz = self._dense[1][::2]
        return np.stack([dz.real, dz.imag], axis=1)

    @cached_property
    def speed(self) -> np.ndarray:
        return np.hypot(*self.vertex_tangent.T)

    @cached_property
    def weights(self) -> np.ndarray:
        """Arc-length quadrature weights at the vertices (sum to ``length``)."""
        return self.speed / self.n

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward unit normals of the smooth interpolant at the vertices."""
        return _rot_cw(self.vertex_tangent) / self.speed[:, None]

    def neighbor(self, k: int) -> np.ndarray:
        """Lifted vertex i + k for every i, continuing across the seam (with drift for strips)."""
        p = self.lifted[_shift_index(self.n, k)]
        if self.is_strip:
            if k > 0:
                p[-k:] += self.drift
            elif k < 0:
                p[:-k] -= self.drift
        return p

    @cached_property
    def fd_derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        """Fourth-order centered first and second differences in the vertex index."""
        pm2, pm1, p0, pp1, pp2 = (self.neighbor(k) for k in (-2, -1, 0, 1, 2))
        d1 = (pm2 - 8 * pm1 + 8 * pp1 - pp2) / 12.0
        d2 = (-pm2 + 16 * pm1 - 30 * p0 + 16 * pp1 - pp2) / 12.0
        return d1, d2

    @cached_property
    def fd_normals(self) -> np.ndarray:
        """Outward unit normals from centered differences of the vertices."""
        d1 = self.fd_derivatives[0]
        return _rot_cw(d1) / np.hypot(*d1.T)[:, None]

    @cached_property
    def sampler(self) -> FineSampler:
        return FineSampler(self.trig)

    def dense_points(self, factor: int = 8) -> np.ndarray:
        z = self.trig.upsample(factor * self.n, 0)
        return np.stack([z.real, z.imag], axis=1)

    def reversed(self) -> "PlaneCurve":
        v = self.vertices[::-1].copy()
        v = np.roll(v, 1, axis=0)
        return PlaneCurve(v, self.ambient)

    def translated(self, shift) -> "PlaneCurve":
        return PlaneCurve(self.vertices + np.asarray(shift, float), self.ambient, None)

    def scaled(self, factor: float, center=(0.0, 0.0)) -> "PlaneCurve":
        c = np.asarray(center, float)
        out = PlaneCurve(c + factor * (self.lifted - c), self.ambient, self.orientation)
        if "_dense" in self.__dict__ and self.ambient is Ambient.PLANE:
            # the interpolant is linear in the samples, so its dense values map directly
            z, dz = self.__dict__["_dense"]
            cz = complex(c[0], c[1])
            out.__dict__["_dense"] = (cz + factor * (z - cz), factor * dz)
        if "trig" in self.__dict__ and self.ambient is Ambient.PLANE:
            out.__dict__["trig"] = self.trig.scaled(factor, complex(c[0], c[1]))
        return out


@dataclass(frozen=True, eq=False)
class BoundaryField:
    """Scalar samples aligned with the concatenated vertices of a shape."""

    values: np.ndarray
    quantity: str
    layout: tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.ndim != 1 or len(v) != sum(self.layout):
            raise GeometryError(
                f"field of length {v.size} does not match vertex layout {self.layout}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "layout", tuple(int(k) for k in self.layout))

    def per_component(self) -> list[np.ndarray]:
        return np.split(self.values, np.cumsum(self.layout)[:-1])

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class MultiCurve:
    """A set given by its boundary components.

    ``outer`` names the outer component of a plane annulus. Components of a
    plane annulus have opposite orientations so that the total signed area is
    the outer area minus the inner one.
    """

    components: tuple[PlaneCurve, ...]
    outer: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise GeometryError("a shape needs at least one boundary component")
        if len({c.ambient for c in comps}) != 1:
            raise GeometryError("all components must share one ambient")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, curve: PlaneCurve, **meta) -> "MultiCurve":
        return cls((curve,), meta=dict(meta))

    @property
    def ambient(self) -> Ambient:
        return self.components[0].ambient

    @property
    def layout(self) -> tuple[int, ...]:
        return tuple(c.n for c in self.components)

    @property
    def is_torus(self) -> bool:
        return self.ambient is Ambient.TORUS

    @cached_property
    def topology(self) -> str:
        """One of ``simple``, ``annulus``, ``disjoint``, ``strip``, ``other``."""
        comps = self.components
        if any(c.is_strip for c in comps):
            if len(comps) == 2 and all(c.is_strip for c in comps):
                d0, d1 = comps[0].drift, comps[1].drift
                if np.allclose(d0, -d1) and np.abs(d0).sum() == 1:
                    return "strip"
            return "other"
        if len(comps) == 1:
            return "simple"
        if len(comps) == 2:
            signs = sorted(c.orientation for c in comps)
            if signs == ["ccw", "cw"]:
                outer = comps[0] if comps[0].orientation == "ccw" else comps[1]
                inner = comps[1] if outer is comps[0] else comps[0]
                if point_in_curve(outer, inner.lifted[0]):
                    return "annulus"
        if all(c.orientation == "ccw" for c in comps):
            return "disjoint"
        return "other"

    @property
    def is_connected(self) -> bool:
        return self.topology in ("simple", "annulus", "strip")

    def field(self, values, quantity: str) -> BoundaryField:
        return BoundaryField(np.asarray(values, dtype=float), quantity, self.layout)

    def concat(self, attr: str) -> np.ndarray:
        return np.concatenate([getattr(c, attr) for c in self.components])

    @property
    def weights(self) -> np.ndarray:
        return self.concat("weights")

    @property
    def points(self) -> np.ndarray:
        """Concatenated vertices (torus: lifted coordinates)."""
        return np.concatenate([c.lifted for c in self.components])

    def map_components(self, fn) -> "MultiCurve":
        return MultiCurve(tuple(fn(c) for c in self.components), self.outer, dict(self.meta))


def point_in_curve(curve: PlaneCurve, point) -> bool:
    """Winding-number test against the closed polygon of ``curve``."""
    p = curve.lifted - np.asarray(point, float)
    q = np.roll(p, -1, axis=0)
    ang = np.arctan2(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0], np.sum(p * q, axis=1))
    return abs(ang.sum()) > np.pi


@lru_cache(maxsize=None)
def _shift_index(n: int, k: int) -> np.ndarray:
    return (np.arange(n) + k) % n


# -- resampling --------------------------------------------------------------

def _prepare_smooth(curve: PlaneCurve) -> TrigCurve:
    """Trigonometric model of ``curve``; non-uniform input is first re-gridded."""
    e = curve.edge_lengths
    if e.min() <= 0:
        raise GeometryError("consecutive vertices coincide")
    if e.max() <= 1.5 * e.min():
        return curve.trig
    # strongly non-uniform input: spline through chord-length parameter first
    p = curve.lifted
    s = np.r_[0.0, np.cumsum(e)]
    closed = np.vstack([p, p[:1] + curve.drift])
    periodic = closed - np.outer(s / s[-1], curve.drift)
    spl = CubicSpline(s, periodic, bc_type="periodic")
    m = 4 * curve.n
    sg = np.arange(m) / m * s[-1]
    dense = spl(sg) + np.outer(sg / s[-1], curve.drift)
    return TrigCurve(dense, curve.drift)


def resample(curve: PlaneCurve, n: int, *, tol: float = 1e-11, max_iter: int = 50) -> PlaneCurve:
    """Place ``n`` vertices at equal chord length along the curve.

    Vertex 0 is kept fixed. Positions are taken on the smooth trigonometric
    interpolant of the input samples, evaluated by quintic Hermite
    interpolation on an upsampled grid. Chords are equalized by a
    fixed-point iteration on the parameters, stopped at ``tol`` or when
    roundoff stalls it.
    """
    if n < MIN_VERTICES:
        raise GeometryError(f"resample needs n >= {MIN_VERTICES}")
    trig = _prepare_smooth(curve)
    fine = FineSampler(trig)
    speed = fine.speed
    if not speed.mean() > 0:
        raise GeometryError("degenerate curve of zero length")
    if trig is curve.trig and n == curve.n:
        t = np.arange(n) / n
    else:
        # arc-length initial guess from the fine speed table
        cum = np.r_[0.0, np.cumsum(0.5 * (speed + np.roll(speed, -1)))] / fine.m
        tgrid = np.arange(fine.m + 1) / fine.m
        t = np.interp(np.arange(n) / n * cum[-1], cum, tgrid)
    drift = trig.drift
    best = (np.inf, None)
    for _ in range(max_iter):
        z = fine(t)
        nxt = np.roll(z, -1)
        nxt[-1] += drift
        chords = np.abs(nxt - z)
        mean = chords.mean()
        dev = np.max(np.abs(chords - mean)) / mean
        if dev < best[0]:
            best = (dev, z)
        elif dev > 0.5 * best[0] and best[0] < 1e3 * tol:
            break
        if dev < tol:
            break
        pos = np.r_[0.0, np.cumsum(chords[:-1])]
        target = np.arange(n) * mean
        t = t + (target - pos) / fine.speed_at(t)
        t[0] = 0.0
    z = best[1]
    pts = np.stack([z.real, z.imag], axis=1)
    out = PlaneCurve(pts, curve.ambient)
    if out.orientation != curve.orientation:
        raise GeometryError("resampling flipped the orientation; the input is not a simple curve")
    return out


# -- discrete differential geometry -------------------------------------------

def vertex_curvature(curve: PlaneCurve) -> np.ndarray:
    """Signed curvature from fourth-order centered differences.

    Uses the parametrization-invariant form ``x' x y'' / |x'|^3`` with index
    derivatives, so the small chord-versus-arc nonuniformity of the samples
    does not enter. Positive where the curve bends toward the enclosed
    region: a counter-clockwise convex curve has positive curvature and the
    inner circle of an annulus has curvature -1/r.
    """
    cached = curve.__dict__.get("_kappa")
    if cached is not None:
        return cached
    d1, d2 = curve.fd_derivatives
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    k = cross / np.hypot(*d1.T) ** 3
    k.setflags(write=False)
    curve.__dict__["_kappa"] = k
    return k


def turning_angles(curve: PlaneCurve) -> np.ndarray:
    e = curve.edges
    ep = np.roll(e, 1, axis=0)
    cross = ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0]
    return np.arctan2(cross, np.sum(ep * e, axis=1))


def winding_number(curve: PlaneCurve) -> int:
    """Total turning divided by 2 pi; fails loudly if not near an integer."""
    w = turning_angles(curve).sum() / (2 * np.pi)
    k = int(np.rint(w))
    if abs(w - k) > 0.1:
        raise GeometryError(f"turning sum {w:.4f} x 2pi is not close to an integer; curve is corrupted")
    return k


def is_simple(curve: PlaneCurve) -> bool:
    """True when no two non-adjacent edges intersect."""
    ang = turning_angles(curve)
    if not curve.is_strip and np.all(ang > 0) and abs(ang.sum() - 2 * np.pi) < 1e-6:
        return True
    if not curve.is_strip and np.all(ang < 0) and abs(ang.sum() + 2 * np.pi) < 1e-6:
        return True
    p = curve.lifted
    e = curve.edges
    n = len(p)
    if curve.is_strip:
        # the lift repeats with period `drift`; test against neighbouring copies
        copies = [p - curve.drift, p, p + curve.drift]
    else:
        copies = [p]
    a, b = p, p + e
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    for shift_idx, q in enumerate(copies):
        qa, qb = q, q + e
        qlo = np.minimum(qa, qb)
        qhi = np.maximum(qa, qb)
        order = np.argsort(qlo[:, 0])
        sorted_lo = qlo[order, 0]
        for i in range(n):
            hi_i = np.searchsorted(sorted_lo, hi[i, 0], side="right")
            cand = order[:hi_i]
            cand = cand[qhi[cand, 0] >= lo[i, 0]]
            cand = cand[(qhi[cand, 1] >= lo[i, 1]) & (qlo[cand, 1] <= hi[i, 1])]
            if len(copies) == 1 or shift_idx == 1:
                cand = cand[(cand != i) & (cand != (i + 1) % n) & (cand != (i - 1) % n)]
            if len(cand) and _segments_cross(a[i], b[i], qa[cand], qb[cand]).any():
                return False
    return True


def _segments_cross(p1, p2, q1, q2) -> np.ndarray:
    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 < 0) & (d3 * d4 < 0)
