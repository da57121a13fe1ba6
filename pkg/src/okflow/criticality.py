"""Euler-Lagrange residuals, rescaled parameters and the annulus critical points.

A shape is critical when ``kappa + gamma phi`` is constant on its boundary.
The constant is estimated by the arc-length mean, so ``residual_sup`` is the
distance of the boundary data from a critical point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .flow import energy_derivative_analytic
from .geometry import (
    BoundaryField,
    GeometryError,
    MultiCurve,
    annulus,
    area,
    curvature,
    disk,
    is_convex,
    perimeter,
    stripe,
    winding_number,
)
from .potential import Kernel, boundary_stats, nonlocal_energy, potential, sample

CRITICAL_TOL = 1e-3
CRITICAL_LIKE = "CriticalLike"
NOT_CRITICAL = "NotCritical"

# printed value for the log-kernel annulus at r = 2^(-1/3), R = 2r
PRINTED_ANNULUS_ETA = 0.5 ** (1 / 3) * math.sqrt(3 * math.pi) * (1 + math.log(6 * math.pi * 2 ** (-1 / 3)))
PRINTED_ANNULUS_R = 0.5 ** (1 / 3)


@dataclass(frozen=True, eq=False)
class CriticalityReport:
    lambda_hat: float
    residual_field: BoundaryField
    residual_sup: float
    rescaled: float
    rescaled_name: str
    winding: tuple[int, ...]
    convex: bool
    kernel: str
    gamma: float
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "residual_sup": self.residual_sup,
            self.rescaled_name: self.rescaled,
            "winding": list(self.winding),
            "convex": self.convex,
            "kernel": self.kernel,
            "gamma": self.gamma,
            **self.extra,
        }


def eta_bar(m: float, L: float, kernel: Kernel, gamma: float = 1.0) -> float:
    """Rescaled nonlocal strength: plane eta_bar (defined at gamma = 1) or torus gamma_bar."""
    if kernel.kind == "log":
        return math.sqrt(m) * L**2 * (1 + abs(math.log(L)))
    if kernel.kind == "riesz":
        return math.sqrt(m) * L ** (2 - kernel.alpha)
    return gamma * math.sqrt(m) * L**2 * (1 + abs(math.log(L)))


def rescaled_parameter(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0) -> float:
    return eta_bar(area(shape), perimeter(shape), kernel, gamma)


def _convex_flag(shape: MultiCurve) -> bool:
    return shape.topology == "simple" and not shape.is_torus and is_convex(shape.components[0])


def _el_values(shape: MultiCurve, kernel: Kernel, gamma: float) -> np.ndarray:
    k = curvature(shape).values
    if gamma == 0:
        return k
    return k + gamma * potential(shape, kernel).boundary_values.values


def _report(shape: MultiCurve, el: np.ndarray, kernel: Kernel, gamma: float) -> CriticalityReport:
    lam, _ = boundary_stats(el, shape)
    res = el - lam
    # remove the residual mean left by roundoff so the field averages to zero exactly
    res = res - boundary_stats(res, shape)[0]
    name = "gamma_bar" if kernel.kind == "torus" else "eta_bar"
    winding = tuple(winding_number(c) for c in shape.components)
    return CriticalityReport(lam, shape.field(res, "el_residual"), float(np.max(np.abs(res))),
                             rescaled_parameter(shape, kernel, gamma), name, winding,
                             _convex_flag(shape), kernel.label, float(gamma))


def el_residual(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0) -> CriticalityReport:
    """kappa + gamma phi - lambda_hat on every boundary vertex, lambda_hat the joint arc-length mean."""
    return _report(shape, _el_values(shape, kernel, gamma), kernel, gamma)


def _component_means(shape: MultiCurve, values: np.ndarray) -> list[float]:
    out = []
    for c, v in zip(shape.components, np.split(values, np.cumsum(shape.layout)[:-1])):
        out.append(float(np.sum(c.weights * v) / np.sum(c.weights)))
    return out


# -- torus stripes -----------------------------------------------------------------

def stripe_oracle(w: float, x) -> np.ndarray:
    """1-D periodic solution of -phi'' = u - w for the stripe 0 < x < w, with zero mean."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    inside = x < w
    # -phi'' = 1 - w inside and -w outside; C^1 and periodic
    a = 1 - w
    phi_in = -0.5 * a * x * x + 0.5 * a * w * x
    xo = x - w
    L = 1 - w
    phi_out = 0.5 * w * xo * xo - 0.5 * w * L * xo
    phi = np.where(inside, phi_in, phi_out)
    # subtract the mean: int_0^w phi_in + int_0^{1-w} phi_out
    mean = a * w**3 / 12 - w * L**3 / 12
    return phi - mean


def stripe_gap_oracle(w: float) -> float:
    """phi at the stripe midline minus phi on its boundary."""
    return (1 - w) * w * w / 8


def stripe_residual(w: float, grid: int = 512, gamma: float = 1.0, n: int = 512) -> CriticalityReport:
    """Residual of the straight stripe ``x0 < x < x0 + w``; kappa vanishes, so it is gamma (phi - phi_bar)."""
    if not 0 < w < 1:
        raise GeometryError(f"stripe width must lie in (0, 1), got {w}")
    shape = stripe(w, n)
    rep = el_residual(shape, Kernel.torus(grid), gamma)
    pr = potential(shape, Kernel.torus(grid))
    x0 = float(np.min(shape.points[:, 0]))
    mid = np.array([[x0 + w / 2, 0.5]])
    gap = float(sample(pr.grid_field, mid)[0] - pr.boundary_mean)
    rep.extra.update(width=w, potential_gap=gap, potential_gap_oracle=stripe_gap_oracle(w))
    return rep


# -- annuli ------------------------------------------------------------------------

def log_annulus_potential(r: float, R: float) -> tuple[float, float]:
    """Exact log-kernel potential of the annulus r < |x| < R on its (inner, outer) circles."""
    inner = (R * R - r * r) / 4 - R * R / 2 * math.log(R) + r * r / 2 * math.log(r)
    outer = -(R * R - r * r) / 2 * math.log(R)
    return inner, outer


def printed_annulus_identity(r: float) -> tuple[float, float]:
    """Both sides of -1/r + (R^2 - r^2)/2 = 1/R + (r^2 - R^2)/2 with R = 2r."""
    R = 2 * r
    return -1 / r + 0.5 * (R * R - r * r), 1 / R + 0.5 * (r * r - R * R)


def log_annulus_jump(r: float, gamma: float = 1.0) -> float:
    """(kappa + gamma phi) on the inner circle minus the outer one, exact, R = 2r."""
    R = 2 * r
    pin, pout = log_annulus_potential(r, R)
    return (-1 / r + gamma * pin) - (1 / R + gamma * pout)


def log_annulus_critical_radius(gamma: float = 1.0) -> float:
    """The inner radius r* at which the R = 2r annulus solves the log-kernel equation.

    The potential jump scales like r^2 (the log term is the same constant on
    both circles), so r*^3 = (3/2) / (gamma (3/4 - log(2)/2)).
    """
    return (1.5 / (gamma * (0.75 - 0.5 * math.log(2)))) ** (1 / 3)


def annulus_report(r: float, kernel: Kernel, gamma: float = 1.0, n: int = 512) -> CriticalityReport:
    """Residual report of the R = 2r annulus with the per-circle means of kappa + gamma phi."""
    shape = annulus(r, 2 * r, n)
    el = _el_values(shape, kernel, gamma)
    rep = _report(shape, el, kernel, gamma)
    outer, inner = _component_means(shape, el)
    rep.extra.update(r=r, R=2 * r, el_outer=outer, el_inner=inner, m=area(shape), L=perimeter(shape))
    return rep


def counterexample_log(n: int = 512, gamma: float = 1.0) -> dict:
    """The printed log-kernel annulus and the radius that actually solves the equation.

    Returns the numerical report at the printed radius, the exact
    potential values there, both sides of the printed identity, the
    derived critical radius with its report, and both eta_bar values.
    """
    r = PRINTED_ANNULUS_R
    printed_lhs, printed_rhs = printed_annulus_identity(r)
    rep = annulus_report(r, Kernel.log(), gamma, n)
    pin, pout = log_annulus_potential(r, 2 * r)
    rstar = log_annulus_critical_radius(gamma)
    rep_star = annulus_report(rstar, Kernel.log(), gamma, n)
    return {
        "r": r,
        "identity": (printed_lhs, printed_rhs),
        "report": rep,
        "exact_potential": {"inner": pin, "outer": pout},
        "exact_jump": log_annulus_jump(r, gamma),
        "eta_bar": rep.rescaled,
        "eta_bar_printed": PRINTED_ANNULUS_ETA,
        "r_star": rstar,
        "report_star": rep_star,
    }


class NoRootError(GeometryError):
    """No sign change of the annulus jump in the bracket."""


def counterexample_riesz(alpha: float, n: int = 512, bracket=(1e-3, 10.0), gamma: float = 1.0,
                         xtol: float = 1e-12) -> tuple[float, CriticalityReport]:
    """Inner radius r* of the R = 2r annulus critical for the Riesz kernel, by bracketed root finding.

    The jump (inner minus outer mean of kappa + gamma phi) is evaluated with
    the boundary-integral potential at every trial radius.
    """
    kernel = Kernel.riesz(alpha)
    trace = []

    def jump(r):
        shape = annulus(r, 2 * r, n)
        outer, inner = _component_means(shape, _el_values(shape, kernel, gamma))
        trace.append((r, inner - outer))
        return inner - outer

    lo, hi = bracket
    flo, fhi = jump(lo), jump(hi)
    if flo * fhi > 0:
        raise NoRootError(f"no sign change of the annulus jump on ({lo}, {hi}): trace {trace}")
    r = brentq(jump, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    rep = annulus_report(r, kernel, gamma, n)
    rep.extra["trace"] = trace
    return r, rep


# -- classification ------------------------------------------------------------------

def classify(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0, tol: float = CRITICAL_TOL):
    """(label, report, dE/dt): CriticalLike iff residual_sup < tol."""
    rep = el_residual(shape, kernel, gamma)
    label = CRITICAL_LIKE if rep.residual_sup < tol else NOT_CRITICAL
    dedt = energy_derivative_analytic(shape, kernel, gamma).total
    return label, rep, dedt


def translation_derivative(radius: float = 0.5, separation: float = 2.0, kernel: Kernel | None = None,
                           h: float = 1e-3, n: int = 256) -> float:
    """Centered difference of the nonlocal energy of two disks as one moves away from the other."""
    kernel = kernel or Kernel.log()

    def energy(d):
        a = disk(radius, n).components[0]
        b = disk(radius, n, center=(d, 0.0)).components[0]
        return nonlocal_energy(MultiCurve((a, b)), kernel)

    return (energy(separation + h) - energy(separation - h)) / (2 * h)
