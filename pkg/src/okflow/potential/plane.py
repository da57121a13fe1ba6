"""Boundary-integral evaluation of plane potentials.

For a radial kernel G, with ``h' + h / r = G`` and ``h(0) = 0``,
``div_x [h(|x - y|) (x - y) / |x - y|] = G(|x - y|)``, so by the divergence
theorem

    phi(y) = int_Omega G(x - y) dx = sum_k  oint_{d Omega_k} h(r) (x - y) . n(x) / r dS(x).

Each component is the trigonometric interpolant of its vertices, split into
one panel per edge with 8-point Gauss-Legendre nodes. Panels touching a
self-target vertex are replaced by dyadically graded sub-panels; off-curve
targets closer than about one panel length get a local graded window around
their nearest boundary point.
"""

from __future__ import annotations

import os
import weakref
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial import cKDTree

from ..geometry.curve import Ambient, GeometryError, MultiCurve, PlaneCurve
from .kernels import Kernel, KernelError

GL_ORDER = 8
GRADE_LEVELS = 4
NEAR_FACTOR = 1.5
_CHUNK = 256

_XI, _WI = np.polynomial.legendre.leggauss(GL_ORDER)
_XI01 = 0.5 * (_XI + 1.0)
_WI01 = 0.5 * _WI


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("OKFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _integrand(kernel: Kernel, diff: np.ndarray, ndS: np.ndarray) -> np.ndarray:
    """h(r)/r (x - y).n dS for complex offsets ``diff`` and complex normal-weights ``ndS``."""
    dot = diff.real * ndS.real + diff.imag * ndS.imag
    return kernel.h_over_r(np.abs(diff)) * dot


def _ndS(dz: np.ndarray) -> np.ndarray:
    """Outward normal times the parameter speed: z' rotated by -pi/2."""
    return dz.imag - 1j * dz.real


class _Panels:
    """Gauss-Legendre nodes of one component, one panel per edge."""

    def __init__(self, curve: PlaneCurve):
        if curve.ambient is not Ambient.PLANE:
            raise GeometryError("plane potentials need plane curves")
        self.curve = curve
        trig = curve.trig
        n = curve.n
        self.n = n
        h = 1.0 / n
        z = np.empty((n, GL_ORDER), dtype=complex)
        dz = np.empty((n, GL_ORDER), dtype=complex)
        for q, x in enumerate(_XI01):
            z[:, q] = trig.shifted(x * h, 0)
            dz[:, q] = trig.shifted(x * h, 1)
        self.z = z.ravel()
        self.w = (_ndS(dz) * (_WI01 * h)).ravel()
        self.panel = np.repeat(np.arange(n), GL_ORDER)
        self.panel_len = curve.length / n
        dense = curve.dense_points(8)
        self.dense_t = np.arange(len(dense)) / len(dense)
        self.tree = cKDTree(dense)

    # -- self targets ----------------------------------------------------
    def self_values(self, kernel: Kernel) -> np.ndarray:
        """Potential contribution of this component at its own vertices."""
        n = self.n
        trig = self.curve.trig
        y = trig.shifted(0.0, 0)
        out = np.empty(n)
        for lo in range(0, n, _CHUNK):
            idx = np.arange(lo, min(lo + _CHUNK, n))
            diff = self.z[None, :] - y[idx, None]
            f = _integrand(kernel, diff, self.w[None, :])
            rel = (self.panel[None, :] - idx[:, None]) % n
            f[(rel == 0) | (rel == n - 1)] = 0.0
            out[idx] = f.sum(axis=1)
        # graded replacement of the two panels touching each vertex
        h = 1.0 / n
        edges = np.r_[0.0, 2.0 ** -np.arange(GRADE_LEVELS, -1, -1)]
        for sign in (1.0, -1.0):
            for a, b in zip(edges[:-1], edges[1:]):
                for x, wq in zip(_XI01, _WI01):
                    tau = sign * h * (a + (b - a) * x)
                    zz = trig.shifted(tau, 0)
                    dd = trig.shifted(tau, 1)
                    wt = wq * h * (b - a)
                    out += _integrand(kernel, zz - y, _ndS(dd) * wt)
        return out

    # -- arbitrary targets -----------------------------------------------
    def values(self, kernel: Kernel, y: np.ndarray) -> np.ndarray:
        """Contribution at arbitrary complex targets ``y``."""
        y = np.asarray(y, dtype=complex)
        out = np.empty(len(y))
        d, j = self.tree.query(np.stack([y.real, y.imag], axis=1))
        near = d < NEAR_FACTOR * self.panel_len
        far_idx = np.flatnonzero(~near)
        for lo in range(0, len(far_idx), _CHUNK):
            idx = far_idx[lo : lo + _CHUNK]
            diff = self.z[None, :] - y[idx, None]
            out[idx] = _integrand(kernel, diff, self.w[None, :]).sum(axis=1)
        near_idx = np.flatnonzero(near)
        for lo in range(0, len(near_idx), _CHUNK // 4):
            idx = near_idx[lo : lo + _CHUNK // 4]
            out[idx] = self._near_values(kernel, y[idx], self.dense_t[j[idx]])
        return out

    def _near_values(self, kernel: Kernel, y: np.ndarray, t: np.ndarray) -> np.ndarray:
        trig = self.curve.trig
        n = self.n
        # nearest boundary parameter by Newton on |z(t) - y|^2
        t = t.copy()
        for _ in range(8):
            z, dz, d2z = trig.at(t, (0, 1, 2))
            g = ((z - y) * np.conj(dz)).real
            hh = np.abs(dz) ** 2 + ((z - y) * np.conj(d2z)).real
            step = np.where(hh > 0, g / np.where(hh > 0, hh, 1.0), 0.0)
            t -= np.clip(step, -0.5 / n, 0.5 / n)
            if np.max(np.abs(step)) < 1e-15:
                break
        zt, dzt = trig.at(t, (0, 1))
        dist = np.abs(zt - y)
        speed = np.abs(dzt)
        k0 = np.floor(t * n).astype(int)
        lo_p = k0 - 2
        width = 5
        a, b = lo_p / n, (lo_p + width) / n
        # regular panels outside the local window
        diff = self.z[None, :] - y[:, None]
        f = _integrand(kernel, diff, self.w[None, :])
        rel = (self.panel[None, :] - lo_p[:, None]) % n
        f[rel < width] = 0.0
        total = f.sum(axis=1)
        # geometric grading toward t on both sides, down to below the target distance
        scale = np.maximum(dist / np.maximum(speed, 1e-300), 1e-16)
        side = np.maximum(t - a, b - t)
        levels = int(np.clip(np.ceil(np.log2(np.max(side / scale))) + 2, GRADE_LEVELS, 60))
        frac = np.r_[0.0, 2.0 ** -np.arange(levels, -1, -1)]
        lo_f, hi_f = frac[:-1], frac[1:]
        u = (lo_f[:, None] + (hi_f - lo_f)[:, None] * _XI01[None, :]).ravel()
        wu = ((hi_f - lo_f)[:, None] * _WI01[None, :]).ravel()
        for side_len, sign in ((t - a, -1.0), (b - t, 1.0)):
            tt = t[:, None] + sign * side_len[:, None] * u[None, :]
            ww = side_len[:, None] * wu[None, :]
            zz, dd = trig.at(tt, (0, 1))
            total += np.sum(_integrand(kernel, zz - y[:, None], _ndS(dd) * ww), axis=1)
        return total


def _check(shape: MultiCurve, kernel: Kernel):
    if not kernel.is_plane:
        raise KernelError("potential_plane needs a plane kernel (log or riesz)")
    if shape.is_torus:
        raise GeometryError("potential_plane needs a plane shape; use potential_torus on the torus")


_PANEL_CACHE: "weakref.WeakKeyDictionary[PlaneCurve, _Panels]" = weakref.WeakKeyDictionary()


def _panels(shape: MultiCurve) -> list[_Panels]:
    out = []
    for c in shape.components:
        p = _PANEL_CACHE.get(c)
        if p is None:
            p = _PANEL_CACHE[c] = _Panels(c)
        out.append(p)
    return out


def boundary_potential(shape: MultiCurve, kernel: Kernel) -> np.ndarray:
    """phi at every vertex of every component, concatenated."""
    _check(shape, kernel)
    panels = _panels(shape)
    out = []
    for i, pi in enumerate(panels):
        y = pi.curve.trig.shifted(0.0, 0)
        v = pi.self_values(kernel)
        for k, pk in enumerate(panels):
            if k != i:
                v = v + pk.values(kernel, y)
        out.append(v)
    return np.concatenate(out)


def point_potential(shape: MultiCurve, kernel: Kernel, points) -> np.ndarray:
    """phi at arbitrary plane points (inside, outside or on the boundary)."""
    _check(shape, kernel)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    y = pts[:, 0] + 1j * pts[:, 1]
    panels = _panels(shape)
    nt = _threads()

    def work(idx):
        return sum(p.values(kernel, y[idx]) for p in panels)

    if nt == 1 or len(y) < 2 * _CHUNK:
        return work(np.arange(len(y)))
    blocks = np.array_split(np.arange(len(y)), nt)
    with ThreadPoolExecutor(nt) as ex:
        parts = list(ex.map(work, blocks))
    return np.concatenate(parts)
