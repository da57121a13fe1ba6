"""Geometric and potential-theoretic inequalities with their explicit constants.

Each check returns an :class:`InequalityReport` with ``lhs <= rhs`` as the
claim. Plane constants are used exactly as printed; the torus constants are
universal but unknown, so the strip checks report ratios and take a
calibrated constant when one is supplied.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    GeometryError,
    MultiCurve,
    area,
    curvature,
    fingerprint,
    is_convex,
    is_star_shaped,
    measures,
    perimeter,
    point_in_curve,
    strip_inner_center,
    strip_widths,
    support_function,
)
from .potential import Kernel, potential

IDS = ("BONNESEN", "GAGE", "ISO_DEFICIT", "POT_DEFICIT", "MAIN_R2", "WEAK", "STRIP_ISO", "STRIP_POT", "MAIN_T2")
SYMMETRY_TOL = 1e-6


@dataclass(frozen=True)
class InequalityReport:
    """``lhs <= rhs`` with ``rhs = constant_used * (constant-free right side)``.

    ``ratio`` is lhs over the constant-free right side, i.e. the smallest
    constant for which the inequality would still hold on this shape.
    """

    id: str
    lhs: float
    rhs: float
    constant_used: float
    margin: float
    holds: bool
    fingerprint: str
    kernel: str
    ratio: float = float("nan")
    calibrated: bool = False
    notes: dict = field(default_factory=dict)

    @classmethod
    def build(cls, id_: str, lhs: float, base: float, constant: float, shape: MultiCurve,
              kernel: Kernel | None = None, **kw) -> "InequalityReport":
        lhs, base = float(lhs), float(base)
        rhs = constant * base
        tol = report_tol(lhs, rhs)
        if base > 0:
            ratio = lhs / base
        else:
            # an equality case: both sides vanish up to discretization
            ratio = 0.0 if abs(lhs) <= tol else float("inf")
        return cls(id_, lhs, rhs, float(constant), rhs - lhs, bool(rhs - lhs >= -tol),
                   fingerprint(shape), kernel.label if kernel is not None else "none", ratio, **kw)

    @property
    def sharpness(self) -> float:
        """lhs / rhs; how much of the printed constant is actually used."""
        if self.rhs <= 0:
            return 0.0 if abs(self.lhs) <= report_tol(self.lhs, self.rhs) else float("inf")
        return self.lhs / self.rhs

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sharpness"] = self.sharpness
        return d


def report_tol(lhs: float, rhs: float) -> float:
    return 1e-8 * max(abs(lhs), abs(rhs), 1.0)


_SUP_CACHE: "weakref.WeakKeyDictionary[MultiCurve, dict]" = weakref.WeakKeyDictionary()


def _sup_deviation(shape: MultiCurve, kernel: Kernel) -> float:
    """||phi - phi_bar||_inf on the boundary, cached per shape and kernel."""
    per = _SUP_CACHE.setdefault(shape, {})
    if kernel not in per:
        per[kernel] = potential(shape, kernel).sup_deviation
    return per[kernel]


# -- preconditions -------------------------------------------------------------

def _simple_plane(shape: MultiCurve, what: str):
    if shape.is_torus:
        raise GeometryError(f"{what} is a plane inequality; got a torus shape")
    if shape.topology != "simple":
        raise GeometryError(f"{what} needs a simply connected shape, got topology {shape.topology!r}")
    return shape.components[0]


def _convex_plane(shape: MultiCurve, what: str):
    c = _simple_plane(shape, what)
    if not is_convex(c):
        raise GeometryError(f"{what} is stated for convex shapes")
    return c


def _plane_kernel(kernel: Kernel, what: str):
    if not kernel.is_plane:
        raise GeometryError(f"{what} needs a plane kernel (log or riesz), got {kernel.label}")


def is_origin_symmetric(curve, origin=(0.0, 0.0), tol: float = SYMMETRY_TOL) -> bool:
    """Point reflection through ``origin`` maps the curve onto itself within ``tol * L``."""
    o = np.asarray(origin, dtype=float)
    dense = curve.dense_points(8)
    h = curve.length / len(dense)
    d, _ = cKDTree(dense).query(2 * o - dense)
    # nearest-sample distance overestimates the true one by at most half a spacing
    return bool(np.max(d) <= tol * curve.length + 0.5 * h)


def _dissipation(shape: MultiCurve) -> float:
    k = curvature(shape).values
    w = shape.weights
    kb = np.sum(w * k) / np.sum(w)
    return float(np.sum(w * (k - kb) ** 2))


def _log_factor(L: float) -> float:
    return 1.0 + abs(math.log(L))


# -- plane checks -----------------------------------------------------------------

def check_bonnesen(shape: MultiCurve) -> InequalityReport:
    """pi^2 (R_out - R_in)^2 <= L^2 - 4 pi A."""
    _simple_plane(shape, "Bonnesen's inequality")
    m = measures(shape)
    lhs = math.pi**2 * (m.r_out - m.r_in) ** 2
    return InequalityReport.build("BONNESEN", lhs, m.perimeter**2 - 4 * math.pi * m.area, 1.0, shape,
                                  notes={"R_in": m.r_in, "R_out": m.r_out})


def check_gage(shape: MultiCurve, origin=(0.0, 0.0)) -> InequalityReport:
    """int p^2 dS <= L A / pi for origin-symmetric convex shapes."""
    c = _convex_plane(shape, "Gage's inequality")
    if not point_in_curve(c, origin):
        raise GeometryError("Gage's inequality needs the origin inside the shape")
    if not is_origin_symmetric(c, origin):
        raise GeometryError("Gage's inequality needs a shape symmetric about the origin")
    p = support_function(c, origin).values
    lhs = float(np.sum(c.weights * p**2))
    return InequalityReport.build("GAGE", lhs, c.length * c.signed_area / math.pi, 1.0, shape)


def check_iso_deficit(shape: MultiCurve) -> InequalityReport:
    """L - 2 sqrt(pi A) <= (A / pi) int (kappa - kappa_bar)^2."""
    _convex_plane(shape, "the isoperimetric deficit bound")
    L, A = perimeter(shape), area(shape)
    lhs = L - 2 * math.sqrt(math.pi * A)
    return InequalityReport.build("ISO_DEFICIT", lhs, A / math.pi * _dissipation(shape), 1.0, shape)


def pot_deficit_constant(L: float, kernel: Kernel) -> float:
    if kernel.kind == "log":
        return 16 * L**2 * _log_factor(L) ** 2
    a = kernel.alpha
    return 4 * (1 + 1 / math.pi) ** (2 - 2 * a) * L ** (2 - 2 * a)


def main_r2_constant(A: float, L: float, kernel: Kernel) -> float:
    if kernel.kind == "log":
        return 32 * A * L**3 * _log_factor(L) ** 2 / math.pi
    a = kernel.alpha
    return 8 * A / math.pi * (1 + 1 / math.pi) ** (2 * (1 - a)) * L ** (3 - 2 * a)


def check_pot_deficit(shape: MultiCurve, kernel: Kernel) -> InequalityReport:
    """||phi - phi_bar||_inf^2 <= C (L^2 - 4 pi A)."""
    _plane_kernel(kernel, "the potential deficit bound")
    _simple_plane(shape, "the potential deficit bound")
    L, A = perimeter(shape), area(shape)
    lhs = _sup_deviation(shape, kernel) ** 2
    return InequalityReport.build("POT_DEFICIT", lhs, L**2 - 4 * math.pi * A, pot_deficit_constant(L, kernel),
                                  shape, kernel)


def check_main_r2(shape: MultiCurve, kernel: Kernel) -> InequalityReport:
    """||phi - phi_bar||_inf^2 <= C int (kappa - kappa_bar)^2 on convex plane shapes."""
    _plane_kernel(kernel, "the main plane inequality")
    _convex_plane(shape, "the main plane inequality")
    L, A = perimeter(shape), area(shape)
    lhs = _sup_deviation(shape, kernel) ** 2
    return InequalityReport.build("MAIN_R2", lhs, _dissipation(shape), main_r2_constant(A, L, kernel),
                                  shape, kernel)


def check_weak(shape: MultiCurve, kernel: Kernel) -> InequalityReport:
    """||phi - phi_bar||_inf^2 <= L^3 sqrt(int (kappa - kappa_bar)^2).

    Only the scaling ``C ~ L^3`` is known, so the constant is taken as 1
    times ``L^3``; ``ratio`` then records the constant this shape needs.
    """
    _plane_kernel(kernel, "the weak inequality")
    if shape.is_torus:
        raise GeometryError("the weak inequality is checked in the plane")
    if not shape.is_connected:
        raise GeometryError(
            f"the weak inequality needs a connected shape (topology {shape.topology!r}); "
            "two disjoint disks have constant curvature but a non-constant potential"
        )
    L = perimeter(shape)
    lhs = _sup_deviation(shape, kernel) ** 2
    return InequalityReport.build("WEAK", lhs, L**3 * math.sqrt(_dissipation(shape)), 1.0, shape, kernel,
                                  notes={"constant": "L^3 (proportionality only)"})


# -- torus strips ---------------------------------------------------------------

@dataclass(frozen=True)
class StripConstants:
    """Calibrated constants for the three strip inequalities (``None``: ratio only)."""

    iso: float | None = None
    pot: float | None = None
    c0: float | None = None


def check_strip(shape: MultiCurve, grid: int = 512, constants: StripConstants | None = None):
    """(STRIP_ISO, STRIP_POT, MAIN_T2) for a torus strip.

    STRIP_ISO: |L_out - L_in|^2 <= C int (kappa - kappa_bar)^2
    STRIP_POT: ||phi - phi_bar||_inf <= C |L_out - L_in|
    MAIN_T2:   ||phi - phi_bar||_inf^2 <= C0 L^3 (1 + |log L|^2)^2 int (kappa - kappa_bar)^2
    """
    if not shape.is_torus or shape.topology != "strip":
        raise GeometryError(f"strip inequalities need a torus strip, got topology {shape.topology!r}")
    center = strip_inner_center(shape)
    if not is_star_shaped(shape, center):
        raise GeometryError("strip inequalities need a set star-shaped about the center of the inner band")
    constants = constants or StripConstants()
    l_in, l_out = strip_widths(shape)
    gap = abs(l_out - l_in)
    diss = _dissipation(shape)
    sup = _sup_deviation(shape, Kernel.torus(grid))
    L = perimeter(shape)
    notes = {"L_in": l_in, "L_out": l_out, "A": area(shape)}
    out = []
    for id_, lhs, base, c in (
        ("STRIP_ISO", gap**2, diss, constants.iso),
        ("STRIP_POT", sup, gap, constants.pot),
        ("MAIN_T2", sup**2, L**3 * (1 + math.log(L) ** 2) ** 2 * diss, constants.c0),
    ):
        r = InequalityReport.build(id_, lhs, base, 1.0 if c is None else c, shape, Kernel.torus(grid),
                                   calibrated=c is not None, notes=dict(notes))
        out.append(r)
    return tuple(out)


def calibrate_strips(shapes, grid: int = 512):
    """Evaluate a strip family, set each constant to the largest observed ratio and re-evaluate.

    Returns ``(constants, reports)``; ``reports`` holds one calibrated triple per shape.
    """
    raw = [check_strip(s, grid) for s in shapes]
    cal = StripConstants(*(max(r[i].ratio for r in raw) for i in range(3)))
    reports = []
    for triple in raw:
        reports.append(tuple(
            replace(r, rhs=c * (r.rhs), constant_used=c, margin=c * r.rhs - r.lhs,
                    holds=bool(c * r.rhs - r.lhs >= -report_tol(r.lhs, c * r.rhs)), calibrated=True)
            for r, c in zip(triple, (cal.iso, cal.pot, cal.c0))
        ))
    return cal, reports


# -- chains and sweeps ----------------------------------------------------------

def chain_consistent(shape: MultiCurve, kernel: Kernel) -> tuple[bool, float, float]:
    """Check C_pot (L^2 - 4 pi A) <= C_pot 2 L (A/pi) int (kappa - kappa_bar)^2 <= C_main int (...)^2.

    This is how the main plane constant follows from the potential-deficit
    constant, the deficit bound and ``L^2 - 4 pi A <= 2 L (L - 2 sqrt(pi A))``.
    Returns ``(ok, pot_rhs, main_rhs)``.
    """
    L, A = perimeter(shape), area(shape)
    diss = _dissipation(shape)
    c_pot = pot_deficit_constant(L, kernel)
    pot_rhs = c_pot * (L**2 - 4 * math.pi * A)
    via_deficit = c_pot * 2 * L * (L - 2 * math.sqrt(math.pi * A))
    via_iso = c_pot * 2 * L * A / math.pi * diss
    main_rhs = main_r2_constant(A, L, kernel) * diss
    tol = report_tol(pot_rhs, main_rhs)
    ok = pot_rhs <= via_deficit + tol and via_deficit <= via_iso + tol and via_iso <= main_rhs * (1 + 1e-12) + tol
    return bool(ok), float(pot_rhs), float(main_rhs)


def plane_suite(shape: MultiCurve, kernels, *, gage_origin=None) -> list[InequalityReport]:
    """Every plane check that applies to ``shape``; GAGE only when an origin is given."""
    out = [check_bonnesen(shape), check_iso_deficit(shape)]
    if gage_origin is not None:
        out.append(check_gage(shape, gage_origin))
    for k in kernels:
        out += [check_pot_deficit(shape, k), check_main_r2(shape, k), check_weak(shape, k)]
    return out
