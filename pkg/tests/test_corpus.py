import math

import numpy as np
import pytest

from okflow.corpus import (
    convex_corpus,
    eta_threshold,
    scale_to_eta,
    small_mass_corpus,
    strip_sweep,
    symmetric_corpus,
)
from okflow.criticality import rescaled_parameter
from okflow.geometry import area, fingerprint, is_convex, perimeter, random_convex
from okflow.inequalities import is_origin_symmetric
from okflow.potential import Kernel, potential


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_thresholds(alpha):
    assert eta_threshold(Kernel.log()) == 32 / math.pi
    assert eta_threshold(Kernel.riesz(alpha)) == pytest.approx(8 / math.pi * (1 + 1 / math.pi) ** (1 - alpha))
    with pytest.raises(ValueError):
        eta_threshold(Kernel.torus(128))


@pytest.mark.parametrize("kernel", [Kernel.log(), Kernel.riesz(0.5)], ids=lambda k: k.label)
def test_scale_to_eta(kernel):
    shape, s = scale_to_eta(random_convex(12, n=256), kernel, 3.0)
    assert rescaled_parameter(shape, kernel) == pytest.approx(3.0, rel=1e-10)
    assert s > 0


@pytest.mark.parametrize("kernel", [Kernel.log(), Kernel.riesz(0.5)], ids=lambda k: k.label)
def test_convex_corpus_below_threshold(kernel):
    entries = convex_corpus(kernel, size=8, n=256)
    thr = eta_threshold(kernel)
    for e in entries:
        assert is_convex(e.shape.components[0])
        eta = rescaled_parameter(e.shape, kernel)
        assert eta == pytest.approx(e.target, rel=1e-9)
        assert 0.05 * thr <= eta < 0.9 * thr


def test_corpus_deterministic():
    a = convex_corpus(Kernel.log(), size=4, seed=3, n=128)
    b = convex_corpus(Kernel.log(), size=4, seed=3, n=128)
    assert [fingerprint(e.shape) for e in a] == [fingerprint(e.shape) for e in b]
    c = convex_corpus(Kernel.log(), size=4, seed=4, n=128)
    assert fingerprint(a[0].shape) != fingerprint(c[0].shape)


def test_symmetric_corpus():
    for e in symmetric_corpus(size=5, n=256):
        assert is_origin_symmetric(e.shape.components[0])


def test_small_mass_range():
    for e in small_mass_corpus(size=6, n=256):
        assert math.pi / 400 <= area(e.shape) <= math.pi / 100
        assert area(e.shape) == pytest.approx(e.target, rel=1e-12)


def test_strip_sweep():
    shapes = strip_sweep((0.02, 0.05), 0.5, 256)
    assert [s.meta["eps"] for s in shapes] == [0.02, 0.05]
    assert all(s.topology == "strip" for s in shapes)


def test_potential_bound_diagnostic():
    # sup |phi| / (m (1 + |log L|)) stays bounded over the log corpus; no constant is asserted
    ratios = []
    for e in convex_corpus(Kernel.log(), size=10, n=256):
        phi = potential(e.shape, Kernel.log()).boundary_values.values
        m, L = area(e.shape), perimeter(e.shape)
        ratios.append(np.max(np.abs(phi)) / (m * (1 + abs(math.log(L)))))
    assert np.all(np.isfinite(ratios))
    assert max(ratios) < 1.0
