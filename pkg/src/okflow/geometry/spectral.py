"""Trigonometric interpolation of closed curves sampled at uniform parameter.

A curve with samples ``z_i = x_i + i y_i`` at ``t_i = i/N`` is represented by
the unique trigonometric polynomial of degree ``N/2`` through the samples (the
Nyquist mode is split symmetrically so the interpolant is real-analytic and
real-valued in each coordinate). Torus strip components carry a lattice drift
``D``: ``z(t) = p(t) + D t`` with ``p`` periodic.

All parameter derivatives are with respect to ``t`` in ``[0, 1)``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class TrigCurve:
    """Periodic interpolant of uniformly parametrized closed-curve samples."""

    def __init__(self, points: np.ndarray, drift=(0.0, 0.0)):
        pts = np.asarray(points, dtype=float)
        self.n = len(pts)
        self.drift = complex(drift[0], drift[1])
        t = np.arange(self.n) / self.n
        z = pts[:, 0] + 1j * pts[:, 1] - self.drift * t
        self.coef = np.fft.fft(z) / self.n
        self.k = np.fft.fftfreq(self.n, 1.0 / self.n)
        self._nyq = self.n // 2 if self.n % 2 == 0 else None

    def scaled(self, factor: float, center: complex = 0j) -> "TrigCurve":
        """Interpolant of the samples mapped by ``z -> center + factor (z - center)``."""
        out = object.__new__(TrigCurve)
        out.n, out.k, out._nyq = self.n, self.k, self._nyq
        out.drift = factor * self.drift
        out.coef = factor * self.coef
        out.coef[0] += (1 - factor) * center
        return out

    # -- multipliers -----------------------------------------------------
    def _multiplier(self, tau: float, deriv: int) -> np.ndarray:
        w = 2j * np.pi * self.k
        m = w**deriv * np.exp(w * tau)
        if self._nyq is not None:
            a = np.pi * self.n
            # derivative of cos(a t) evaluated at tau
            m[self._nyq] = a**deriv * np.cos(a * tau + deriv * np.pi / 2)
        return m

    def _add_drift(self, vals: np.ndarray, t: np.ndarray, deriv: int) -> np.ndarray:
        if deriv == 0:
            return vals + self.drift * t
        if deriv == 1:
            return vals + self.drift
        return vals

    def shifted(self, tau: float, deriv: int = 0, periodic_only: bool = False) -> np.ndarray:
        """Values (or derivatives) at ``t_i + tau`` for every sample index ``i``."""
        vals = self.n * np.fft.ifft(self.coef * self._multiplier(tau, deriv))
        if periodic_only:
            return vals
        t = np.arange(self.n) / self.n + tau
        return self._add_drift(vals, t, deriv)

    def upsample(self, m: int, deriv: int = 0, periodic_only: bool = False) -> np.ndarray:
        """Values (or derivatives) on the uniform grid ``j/m``, ``m >= n``."""
        if m < self.n:
            raise ValueError("upsample target must not be coarser than the sample grid")
        if m > self.n:
            slots, kk = _padding(self.n, m)
            spec = np.zeros(m, dtype=complex)
            spec[slots] = self.coef[_source_index(self.n)] * _split_weight(self.n)
        else:
            spec = self.coef.copy()
            kk = self.k.copy()
            if self._nyq is not None and deriv % 2:
                # cos(pi n t) has vanishing odd derivatives on the sample grid
                spec[self._nyq] = 0.0
        vals = m * np.fft.ifft(spec * (2j * np.pi * kk) ** deriv)
        if periodic_only:
            return vals
        return self._add_drift(vals, np.arange(m) / m, deriv)

    def _split_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients on k = -K..K with the Nyquist mode split into two halves."""
        n = self.n
        kmax = n // 2
        ks = np.arange(-kmax, kmax + 1)
        c = np.zeros(len(ks), dtype=complex)
        half = (n - 1) // 2
        for k in range(-half, half + 1):
            c[k + kmax] = self.coef[k % n]
        if self._nyq is not None:
            c[0] = c[-1] = self.coef[self._nyq] / 2.0
        return ks, c

    def at(self, t, deriv: int | tuple = 0):
        """Direct evaluation at arbitrary parameters by Horner's rule in exp(2 pi i t).

        ``deriv`` may be a tuple, in which case a tuple of arrays is returned
        from one pass over the coefficients.
        """
        many = isinstance(deriv, tuple)
        ds = deriv if many else (deriv,)
        t = np.asarray(t, dtype=float)
        shape = t.shape
        t = t.ravel()
        if not hasattr(self, "_split"):
            self._split = self._split_coefficients()
        ks, c = self._split
        if t.size <= 64:
            # few points: a dense exponential matrix beats the Python-level Horner loop
            e = np.exp(2j * np.pi * np.outer(t, ks))
            out = tuple(self._add_drift(e @ (c * (2j * np.pi * ks) ** d), t, d).reshape(shape) for d in ds)
            return out if many else out[0]
        w = np.exp(2j * np.pi * t)
        cs = [c * (2j * np.pi * ks) ** d for d in ds]
        acc = [np.full(t.shape, ci[-1]) for ci in cs]
        for j in range(len(ks) - 2, -1, -1):
            for a, ci in zip(acc, cs):
                a *= w
                a += ci[j]
        base = np.exp(-2j * np.pi * ks[-1] * t)
        out = tuple(self._add_drift(a * base, t, d).reshape(shape) for a, d in zip(acc, ds))
        return out if many else out[0]


@lru_cache(maxsize=None)
def _source_index(n: int) -> np.ndarray:
    half = (n - 1) // 2
    idx = np.r_[0 : half + 1, n - half : n]
    if n % 2 == 0:
        idx = np.r_[idx, n // 2, n // 2]
    return idx


@lru_cache(maxsize=None)
def _split_weight(n: int) -> np.ndarray:
    w = np.ones(len(_source_index(n)))
    if n % 2 == 0:
        w[-2:] = 0.5
    return w


_PAD_CACHE: dict = {}


def _padding(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Target slots and wavenumbers for zero-padding an n-point spectrum to m > n points."""
    key = (n, m)
    if key not in _PAD_CACHE:
        idx = _source_index(n)
        k = np.fft.fftfreq(n, 1.0 / n)[idx].astype(int)
        if n % 2 == 0:
            k[-2:] = (n // 2, -(n // 2))
        slots = k % m
        kk = np.zeros(m)
        kk[slots] = k
        _PAD_CACHE[key] = (slots, kk)
    return _PAD_CACHE[key]


class FineSampler:
    """Quintic Hermite evaluation of a :class:`TrigCurve` from an upsampled grid.

    Accurate to roundoff for the resolutions used here and O(1) per point,
    which is what the per-step resampling of the flow needs.
    """

    MIN_GRID = 2048

    def __init__(self, curve: TrigCurve, factor: int | None = None):
        self.curve = curve
        if factor is None:
            # the Hermite error is set by the fine spacing; 2048 points is at roundoff for smooth curves
            factor = max(4, -(-self.MIN_GRID // curve.n))
        m = self.m = factor * curve.n
        slots, kk = _padding(curve.n, m)
        spec = np.zeros((3, m), dtype=complex)
        # slots are distinct because m > n, so plain assignment suffices
        spec[0, slots] = curve.coef[_source_index(curve.n)] * _split_weight(curve.n)
        w = 2j * np.pi * kk / m
        spec[1] = spec[0] * w
        spec[2] = spec[1] * w
        self._f = m * np.fft.ifft(spec, axis=1)
        self.f0, self.f1, self.f2 = self._f
        self.speed = np.abs(self.f1 * m + curve.drift)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = t * self.m
        j = np.floor(s)
        u = s - j
        j = j.astype(int) % self.m
        a, b, c = self._f[:, j]
        A, B, C = self._f[:, (j + 1) % self.m]
        d = A - a
        # Taylor form of the quintic Hermite interpolant, evaluated by Horner's rule
        c5 = 6 * d - 3 * (b + B) + 0.5 * (C - c)
        c4 = -15 * d + 8 * b + 7 * B + 1.5 * c - C
        c3 = 10 * d - 6 * b - 4 * B - 1.5 * c + 0.5 * C
        p = ((((c5 * u + c4) * u + c3) * u + 0.5 * c) * u + b) * u + a
        return p + self.curve.drift * t

    def speed_at(self, t: np.ndarray) -> np.ndarray:
        idx = np.rint(np.asarray(t, dtype=float) * self.m).astype(int) % self.m
        return self.speed[idx]
