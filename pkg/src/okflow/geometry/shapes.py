"""Generators for the reference shapes and the seeded convex corpus."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import Ambient, GeometryError, MultiCurve, PlaneCurve

DEFAULT_N = 512


def from_parametric(z, dz, n: int, *, drift=0j, ambient=Ambient.PLANE, tol=1e-14, max_iter=60) -> PlaneCurve:
    """Sample ``z(s)``, ``s in [0, 1)``, at ``n`` points with equal chords.

    ``z`` and ``dz`` are vectorized complex callables; ``z(s + 1) = z(s) + drift``.
    Points lie exactly on the analytic curve.
    """
    m = 64 * n
    s = np.arange(m) / m
    speed = np.abs(dz(s))
    cum = np.r_[0.0, np.cumsum(0.5 * (speed + np.roll(speed, -1)))] / m
    t = np.interp(np.arange(n) / n * cum[-1], cum, np.r_[s, 1.0])
    for _ in range(max_iter):
        p = z(t)
        nxt = np.roll(p, -1)
        nxt[-1] += drift
        ch = np.abs(nxt - p)
        mean = ch.mean()
        if np.max(np.abs(ch - mean)) < tol * mean:
            break
        pos = np.r_[0.0, np.cumsum(ch[:-1])]
        t = t + (np.arange(n) * mean - pos) / np.abs(dz(t))
        t[0] = 0.0
    p = z(t)
    return PlaneCurve(np.stack([p.real, p.imag], axis=1), ambient)


def _polar(radius, dradius, center=0j):
    def z(s):
        th = 2 * np.pi * s
        return center + radius(th) * np.exp(1j * th)

    def dz(s):
        th = 2 * np.pi * s
        return 2 * np.pi * (dradius(th) + 1j * radius(th)) * np.exp(1j * th)

    return z, dz


def disk(radius: float = 1.0, n: int = DEFAULT_N, center=(0.0, 0.0), ambient=Ambient.PLANE) -> MultiCurve:
    if not radius > 0:
        raise GeometryError("disk radius must be positive")
    th = 2 * np.pi * np.arange(n) / n
    pts = np.asarray(center, float) + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return MultiCurve.single(PlaneCurve(pts, ambient), kind="disk", R=radius)


def ellipse(a: float, b: float, n: int = DEFAULT_N, center=(0.0, 0.0)) -> MultiCurve:
    if not (a > 0 and b > 0):
        raise GeometryError("ellipse semi-axes must be positive")
    c = complex(*center)

    def z(s):
        th = 2 * np.pi * s
        return c + a * np.cos(th) + 1j * b * np.sin(th)

    def dz(s):
        th = 2 * np.pi * s
        return 2 * np.pi * (-a * np.sin(th) + 1j * b * np.cos(th))

    return MultiCurve.single(from_parametric(z, dz, n), kind="ellipse", a=a, b=b)


def polar(r0: float, coeffs, n: int = DEFAULT_N, center=(0.0, 0.0)) -> MultiCurve:
    """``r(theta) = r0 (1 + sum_k a_k cos k theta + b_k sin k theta)``; ``coeffs[k-1] = (a_k, b_k)``."""
    cf = np.atleast_2d(np.asarray(coeffs, float)) if len(coeffs) else np.zeros((0, 2))
    ks = np.arange(1, len(cf) + 1)

    def r(th):
        th = np.asarray(th)[..., None]
        return r0 * (1 + np.sum(cf[:, 0] * np.cos(ks * th) + cf[:, 1] * np.sin(ks * th), axis=-1))

    def dr(th):
        th = np.asarray(th)[..., None]
        return r0 * np.sum(ks * (-cf[:, 0] * np.sin(ks * th) + cf[:, 1] * np.cos(ks * th)), axis=-1)

    probe = r(np.linspace(0, 2 * np.pi, 4096, endpoint=False))
    if probe.min() <= 0:
        raise GeometryError("polar radius must stay positive")
    z, dz = _polar(r, dr, complex(*center))
    return MultiCurve.single(from_parametric(z, dz, n), kind="polar", r0=r0, coeffs=cf.tolist())


def perturbed_disk(eps: float, k: int, n: int = DEFAULT_N, radius: float = 1.0) -> MultiCurve:
    """``r(theta) = radius (1 + eps cos k theta)``."""
    cf = np.zeros((k, 2))
    cf[k - 1, 0] = eps
    shape = polar(radius, cf, n)
    shape.meta.update(kind="perturbed_disk", eps=eps, k=k)
    return shape


def annulus(r: float, R: float, n: int = DEFAULT_N, center=(0.0, 0.0)) -> MultiCurve:
    """Outer circle counter-clockwise, inner circle clockwise."""
    if not (0 < r < R):
        raise GeometryError(f"annulus needs 0 < r < R, got r={r}, R={R}")
    outer = disk(R, n, center).components[0]
    inner = disk(r, n, center).components[0].reversed()
    return MultiCurve((outer, inner), outer=0, meta=dict(kind="annulus", r=r, R=R))


def random_convex(seed: int, k_modes: int = 6, n: int = DEFAULT_N, *, symmetric: bool = False,
                  scale: float = 1.0, min_radius: float = 0.25, amplitude: float = 0.3) -> MultiCurve:
    """Convex curve from a random support function ``h = 1 + sum_{k>=2} (a_k cos k + b_k sin k)``.

    The perturbation is shrunk until the radius of curvature ``h + h''`` is at
    least ``min_radius`` everywhere, which guarantees strict convexity. With
    ``symmetric`` only even modes are used, giving an origin-symmetric set.
    Mode ``k = 1`` is a translation and is omitted.
    """
    rng = np.random.default_rng(seed)
    ks = np.arange(2, k_modes + 1)
    if symmetric:
        ks = ks[ks % 2 == 0]
    a = rng.normal(size=len(ks)) * amplitude / ks
    b = rng.normal(size=len(ks)) * amplitude / ks
    th = np.linspace(0, 2 * np.pi, 8192, endpoint=False)[:, None]
    pert = np.sum((1 - ks**2) * (a * np.cos(ks * th) + b * np.sin(ks * th)), axis=1)
    low = pert.min()
    if 1 + low < min_radius:
        f = (1 - min_radius) / -low
        a, b = a * f, b * f

    def h(t):
        t = np.asarray(t)[..., None]
        return 1 + np.sum(a * np.cos(ks * t) + b * np.sin(ks * t), axis=-1)

    def dh(t):
        t = np.asarray(t)[..., None]
        return np.sum(ks * (-a * np.sin(ks * t) + b * np.cos(ks * t)), axis=-1)

    def d2h(t):
        t = np.asarray(t)[..., None]
        return np.sum(-ks**2 * (a * np.cos(ks * t) + b * np.sin(ks * t)), axis=-1)

    def z(s):
        t = 2 * np.pi * s
        e = np.exp(1j * t)
        return scale * (h(t) * e + dh(t) * 1j * e)

    def dz(s):
        t = 2 * np.pi * s
        return scale * 2 * np.pi * (h(t) + d2h(t)) * 1j * np.exp(1j * t)

    meta = dict(kind="random_convex", seed=seed, K=k_modes, symmetric=symmetric, scale=scale)
    return MultiCurve.single(from_parametric(z, dz, n), **meta)


# -- torus ---------------------------------------------------------------------

def _vertical_line(x_of, dx_of, y_of, dy_of, n, upward=True):
    sign = 1.0 if upward else -1.0

    def z(s):
        u = sign * s
        return x_of(u) + 1j * y_of(u)

    def dz(s):
        u = sign * s
        return sign * (dx_of(u) + 1j * dy_of(u))

    return from_parametric(z, dz, n, drift=sign * 1j, ambient=Ambient.TORUS)


def _check_width(w):
    if not (0 < w < 1):
        raise GeometryError(f"stripe width must lie in (0, 1), got {w}")


def stripe(w: float = 0.5, n: int = DEFAULT_N, x0: float | None = None) -> MultiCurve:
    """The band ``x0 <= x <= x0 + w`` on the torus; default keeps it centered at 1/2."""
    _check_width(w)
    x0 = 0.5 - w / 2 if x0 is None else x0
    return perturbed_stripe(w, 0.0, 1, n, x0=x0, kind="stripe")


def perturbed_stripe(w: float, eps: float, k: int = 1, n: int = DEFAULT_N, x0: float | None = None,
                     kind: str = "perturbed_stripe") -> MultiCurve:
    """Band with left side ``x = x0`` and right side ``x = x0 + w + eps sin(2 pi k y)``."""
    _check_width(w)
    x0 = 0.5 - w / 2 if x0 is None else x0
    if not abs(eps) < min(w, 1 - w):
        raise GeometryError("perturbation amplitude must be smaller than the stripe and gap widths")
    one = lambda u: np.ones_like(u)
    zero = lambda u: np.zeros_like(u)
    right = _vertical_line(
        lambda u: x0 + w + eps * np.sin(2 * np.pi * k * u),
        lambda u: 2 * np.pi * k * eps * np.cos(2 * np.pi * k * u),
        lambda u: u, one, n, upward=True,
    )
    left = _vertical_line(lambda u: x0 + 0 * u, zero, lambda u: u, one, n, upward=False)
    return MultiCurve((right, left), meta=dict(kind=kind, w=w, eps=eps, k=k, x0=x0))


def folded_stripe(w: float = 0.5, depth: float = 0.35, fold: float = 1.5, n: int = DEFAULT_N) -> MultiCurve:
    """Band whose right side ``(x_r - depth sin t, (t - fold sin t) / 2pi)`` folds back in ``y``.

    For ``fold > 1`` the boundary is not a graph over ``y`` while remaining a
    simple curve, so the set is not star-shaped about the band center.
    """
    _check_width(w)
    x0 = 0.5 - w / 2
    xr = x0 + w
    tp = 2 * np.pi
    right = _vertical_line(
        lambda u: xr - depth * np.sin(tp * u),
        lambda u: -tp * depth * np.cos(tp * u),
        lambda u: u - fold * np.sin(tp * u) / tp,
        lambda u: 1 - fold * np.cos(tp * u),
        n, upward=True,
    )
    left = _vertical_line(lambda u: x0 + 0 * u, lambda u: 0 * u, lambda u: u, lambda u: np.ones_like(u), n, upward=False)
    return MultiCurve((right, left), meta=dict(kind="folded_stripe", w=w, depth=depth, fold=fold))


def torus_disk(radius: float, n: int = DEFAULT_N, center=(0.5, 0.5)) -> MultiCurve:
    if not 0 < radius < 0.5:
        raise GeometryError("torus disk radius must lie in (0, 1/2)")
    shape = disk(radius, n, center, ambient=Ambient.TORUS)
    shape.meta.update(kind="torus_disk")
    return shape


# -- spec strings --------------------------------------------------------------

@dataclass(frozen=True)
class ShapeSpec:
    """A named generator with parameters, e.g. ``ShapeSpec("ellipse", (2, 1))``."""

    kind: str
    params: tuple = ()
    n: int = DEFAULT_N
    options: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str, n: int = DEFAULT_N) -> "ShapeSpec":
        """Parse ``kind:p1,p2,...`` (``disk:1``, ``ellipse:2,1``, ``stripe:0.5``)."""
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        params = tuple(float(p) for p in rest.split(",") if p.strip()) if rest else ()
        return cls(kind, params, n)


_ARITY = {
    "disk": (0, 1), "ellipse": (2, 2), "annulus": (2, 2), "stripe": (0, 1),
    "perturbed_stripe": (2, 3), "folded_stripe": (0, 3), "perturbed_disk": (2, 2),
    "random_convex": (1, 2), "symmetric_convex": (1, 2), "torus_disk": (1, 1), "polar": (1, 99),
}


def generate(spec: ShapeSpec | str, n: int | None = None) -> MultiCurve:
    if isinstance(spec, str):
        spec = ShapeSpec.parse(spec, n or DEFAULT_N)
    elif n is not None:
        spec = ShapeSpec(spec.kind, spec.params, n, spec.options)
    if spec.kind not in _ARITY:
        raise GeometryError(f"unknown shape kind {spec.kind!r}; expected one of {sorted(_ARITY)}")
    lo, hi = _ARITY[spec.kind]
    p = spec.params
    if not lo <= len(p) <= hi:
        raise GeometryError(f"shape {spec.kind!r} takes {lo}..{hi} parameters, got {len(p)}")
    n, o = spec.n, spec.options
    k = spec.kind
    if k == "disk":
        return disk(p[0] if p else 1.0, n, **o)
    if k == "ellipse":
        return ellipse(p[0], p[1], n, **o)
    if k == "annulus":
        return annulus(p[0], p[1], n, **o)
    if k == "stripe":
        return stripe(p[0] if p else 0.5, n, **o)
    if k == "perturbed_stripe":
        return perturbed_stripe(p[0], p[1], int(p[2]) if len(p) > 2 else 1, n, **o)
    if k == "folded_stripe":
        return folded_stripe(*p, n=n)
    if k == "perturbed_disk":
        return perturbed_disk(p[0], int(p[1]), n, **o)
    if k in ("random_convex", "symmetric_convex"):
        kk = int(p[1]) if len(p) > 1 else 6
        return random_convex(int(p[0]), kk, n, symmetric=k == "symmetric_convex", **o)
    if k == "torus_disk":
        return torus_disk(p[0], n, **o)
    coeffs = np.asarray(p[1:], float)
    if len(coeffs) % 2:
        raise GeometryError("polar coefficients come in (a_k, b_k) pairs")
    return polar(p[0], coeffs.reshape(-1, 2), n, **o)
