"""Property tests for invariants that hold for every admissible input."""

import json
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from okflow.cli import dump_json, format_float
from okflow.criticality import eta_bar, rescaled_parameter
from okflow.geometry import (
    area,
    disk,
    ellipse,
    from_dict,
    is_convex,
    perimeter,
    polar,
    random_convex,
    resample,
    to_dict,
    winding_number,
)
from okflow.inequalities import InequalityReport, check_bonnesen, check_iso_deficit, report_tol
from okflow.potential import Kernel, nonlocal_energy, potential

SETTINGS = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(0, 10_000)
scales = st.floats(0.2, 5.0)
alphas = st.floats(0.1, 0.9)
UNIT_DISK = disk(1.0, 64)


@SETTINGS
@given(seeds, st.booleans())
def test_winding_is_orientation(seed, flip):
    c = random_convex(seed, n=128).components[0]
    if flip:
        c = c.reversed()
    assert winding_number(c) == (-1 if flip else 1)


@SETTINGS
@given(seeds, st.sampled_from([(64, 5e-5), (128, 2e-6), (256, 1e-14)]))
def test_resample_preserves_length_and_area(seed, case):
    # downsampling a 256-gon loses detail, so the bound tightens with n
    n, tol = case
    c = random_convex(seed, n=256).components[0]
    r = resample(c, n)
    assert r.is_uniform(1e-6)
    assert r.length == pytest.approx(c.length, rel=tol)
    assert r.signed_area == pytest.approx(c.signed_area, rel=tol)


@SETTINGS
@given(seeds, st.tuples(st.floats(-3, 3), st.floats(-3, 3)))
def test_shoelace_and_fan_area_agree(seed, center):
    c = random_convex(seed, n=256).components[0]
    assert c.fan_area(center) == pytest.approx(c.polygon_area, rel=1e-12)
    assert c.fan_area() == pytest.approx(c.polygon_area, rel=1e-12)


@SETTINGS
@given(seeds)
def test_random_convex_is_convex(seed):
    assert is_convex(random_convex(seed, n=256).components[0])


@SETTINGS
@given(seeds)
def test_bonnesen_and_iso_deficit_hold(seed):
    shape = random_convex(seed, n=256)
    assert check_bonnesen(shape).holds
    assert check_iso_deficit(shape).holds


@SETTINGS
@given(st.floats(1.0, 4.0), st.floats(0.05, 5.0))
def test_ellipse_isoperimetric(aspect, size):
    shape = ellipse(aspect * size, size, 256)
    assert perimeter(shape) ** 2 >= 4 * math.pi * area(shape) * (1 - 1e-12)


@SETTINGS
@given(st.floats(0.05, 0.5), st.integers(2, 6))
def test_polar_area(eps, k):
    # int r^2/2 for r = 1 + eps cos(k theta) is pi (1 + eps^2 / 2)
    coeffs = [[0.0, 0.0]] * (k - 1) + [[eps, 0.0]]
    assert area(polar(1.0, coeffs, n=1024)) == pytest.approx(math.pi * (1 + eps**2 / 2), rel=1e-6)


@SETTINGS
@given(seeds, scales, st.sampled_from(["log", "riesz"]))
def test_eta_bar_homothety(seed, lam, name):
    kernel = Kernel.log() if name == "log" else Kernel.riesz(0.5)
    shape = random_convex(seed, n=128)
    big = shape.map_components(lambda c: c.scaled(lam))
    expected = eta_bar(lam**2 * area(shape), lam * perimeter(shape), kernel)
    assert rescaled_parameter(big, kernel) == pytest.approx(expected, rel=1e-10)


@SETTINGS
@given(seeds, scales, alphas)
def test_riesz_potential_scaling(seed, lam, alpha):
    kernel = Kernel.riesz(alpha)
    shape = random_convex(seed, n=128)
    big = shape.map_components(lambda c: c.scaled(lam))
    phi = potential(shape, kernel).boundary_values.values
    phi_big = potential(big, kernel).boundary_values.values
    assert np.allclose(phi_big, lam ** (2 - alpha) * phi, rtol=1e-9, atol=0)


@SETTINGS
@given(seeds, scales)
def test_log_potential_scaling(seed, lam):
    # phi_{lam Omega}(lam x) = lam^2 phi_Omega(x) - lam^2 |Omega| log(lam) / (2 pi)
    shape = random_convex(seed, n=128)
    big = shape.map_components(lambda c: c.scaled(lam))
    phi = potential(shape, Kernel.log()).boundary_values.values
    phi_big = potential(big, Kernel.log()).boundary_values.values
    expected = lam**2 * phi - lam**2 * area(shape) * math.log(lam) / (2 * math.pi)
    assert np.allclose(phi_big, expected, rtol=0, atol=1e-9 * lam**2 * max(1.0, np.max(np.abs(phi))))


@SETTINGS
@given(seeds, st.floats(0.0, 100.0))
def test_nonlocal_energy_linear_in_gamma(seed, gamma):
    shape = random_convex(seed, n=128)
    e1 = nonlocal_energy(shape, Kernel.riesz(0.5), 1.0)
    assert nonlocal_energy(shape, Kernel.riesz(0.5), gamma) == pytest.approx(gamma * e1, rel=1e-12, abs=1e-300)
    assert e1 > 0


@given(st.floats(-1e6, 1e6), st.floats(0.0, 1e6), st.floats(-1.0, 1.0))
def test_report_holds_iff_margin_within_tol(lhs, rhs_gap, fudge):
    rhs = lhs + rhs_gap * fudge
    r = InequalityReport.build("BONNESEN", lhs, rhs, 1.0, UNIT_DISK)
    assert r.holds == (r.margin >= -report_tol(lhs, rhs))


@given(st.floats(allow_nan=False))
def test_format_float_roundtrip(x):
    assert float(format_float(x)) == x


@given(st.recursive(
    st.one_of(st.none(), st.booleans(), st.integers(-10**12, 10**12), st.floats(allow_nan=False, allow_infinity=False),
              st.text(max_size=8)),
    lambda inner: st.one_of(st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=5), inner, max_size=4)),
    max_leaves=20,
))
def test_dump_json_roundtrip(doc):
    assert json.loads(dump_json(doc)) == doc


@SETTINGS
@given(seeds)
def test_shape_dict_roundtrip(seed):
    shape = random_convex(seed, n=64)
    back = from_dict(to_dict(shape))
    for a, b in zip(shape.components, back.components):
        assert np.array_equal(a.vertices, b.vertices)
