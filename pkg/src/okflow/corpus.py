"""Seeded shape families used by the corpus sweeps.

Every shape is determined by ``(seed, index)``; the same arguments give
bit-identical vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .criticality import eta_bar
from .geometry import (
    MultiCurve,
    area,
    centroid,
    perimeter,
    perturbed_stripe,
    random_convex,
)
from .potential import Kernel

DEFAULT_SIZE = 100
ETA_FRACTION = (0.05, 0.9)


def eta_threshold(kernel: Kernel) -> float:
    """Lower bound for the critical eta_bar: 32/pi (log) or (8/pi)(1 + 1/pi)^(1 - alpha) (Riesz)."""
    if kernel.kind == "log":
        return 32 / math.pi
    if kernel.kind == "riesz":
        return 8 / math.pi * (1 + 1 / math.pi) ** (1 - kernel.alpha)
    raise ValueError("eta_bar thresholds are defined for plane kernels")


@dataclass(frozen=True)
class CorpusEntry:
    seed: int
    index: int
    shape: MultiCurve
    scale: float
    target: float | None = None


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _scaled(shape: MultiCurve, factor: float) -> MultiCurve:
    c = centroid(shape)
    return shape.map_components(lambda comp: comp.scaled(factor, c))


def scale_to_eta(shape: MultiCurve, kernel: Kernel, target: float) -> tuple[MultiCurve, float]:
    """Homothety about the centroid after which eta_bar equals ``target``."""
    m, L = area(shape), perimeter(shape)

    def f(logs):
        s = math.exp(logs)
        return math.log(eta_bar(m * s * s, L * s, kernel)) - math.log(target)

    # eta_bar is increasing in the scale for both plane kernels
    logs = brentq(f, -30.0, 30.0, xtol=1e-14)
    s = math.exp(logs)
    return _scaled(shape, s), s


def convex_corpus(kernel: Kernel, size: int = DEFAULT_SIZE, seed: int = 0, n: int = 512,
                  fraction=ETA_FRACTION) -> list[CorpusEntry]:
    """Random convex shapes scaled to eta_bar = f * threshold, f uniform in ``fraction``."""
    thr = eta_threshold(kernel)
    out = []
    for i in range(size):
        f = _rng(seed, i).uniform(*fraction)
        base = random_convex(seed * 100003 + i, n=n)
        shape, s = scale_to_eta(base, kernel, f * thr)
        out.append(CorpusEntry(seed, i, shape, s, f * thr))
    return out


def symmetric_corpus(size: int = DEFAULT_SIZE, seed: int = 0, n: int = 512) -> list[CorpusEntry]:
    """Origin-symmetric random convex shapes centered at the origin."""
    return [CorpusEntry(seed, i, random_convex(seed * 100003 + i, n=n, symmetric=True), 1.0)
            for i in range(size)]


def small_mass_corpus(size: int = 20, seed: int = 0, n: int = 512,
                      mass=(math.pi / 400, math.pi / 100)) -> list[CorpusEntry]:
    """Random convex shapes scaled to an area drawn uniformly from ``mass``."""
    out = []
    for i in range(size):
        m = _rng(seed, i).uniform(*mass)
        base = random_convex(seed * 100003 + i, n=n)
        s = math.sqrt(m / area(base))
        out.append(CorpusEntry(seed, i, _scaled(base, s), s, m))
    return out


def strip_sweep(eps=(0.02, 0.05, 0.1), w: float = 0.5, n: int = 512) -> list[MultiCurve]:
    """Sinusoidally perturbed stripes of width ``w``."""
    return [perturbed_stripe(w, e, 1, n) for e in eps]
