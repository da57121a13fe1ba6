"""Area-preserving curve shortening flow with energy and dissipation monitors.

One step is a forward-Euler move along the normal with speed kappa - kappa_bar,
a resample to equal chords, and a homothety about the centroid that restores
the initial area exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry.curve import (
    GeometryError,
    MultiCurve,
    PlaneCurve,
    is_simple,
    resample,
    vertex_curvature,
)
from .potential import Kernel, boundary_stats, potential, total_energy

C_STAB = 0.25
DEFICIT_FLOOR = 1e-12
AT_MINIMIZER = "at-minimizer"

TRACE_COLUMNS = (
    "t", "L", "A", "E_total", "E_perim", "E_nonlocal",
    "dEdt_analytic", "dissipation", "deficit", "el_residual_sup",
)


class FlowHalted(RuntimeError):
    """The curve self-intersected; carries the state before the failing step."""

    def __init__(self, message: str, state: "FlowState"):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class TraceRecord:
    t: float
    L: float
    A: float
    E_total: float
    E_perim: float
    E_nonlocal: float
    dEdt_analytic: float
    dissipation: float
    deficit: float
    el_residual_sup: float

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in TRACE_COLUMNS)


@dataclass(frozen=True)
class StopRule:
    """Stop at ``max_time``, when the deficit drops below ``deficit``, or after ``max_steps``.

    Any combination may be given; the first one reached stops the run.
    """

    max_time: float | None = None
    deficit: float | None = None
    max_steps: int | None = None

    def __post_init__(self):
        if self.max_time is None and self.deficit is None and self.max_steps is None:
            raise ValueError("a stop rule needs at least one of max_time, deficit, max_steps")
        for name in ("max_time", "deficit"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"stop rule {name} must be positive")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("stop rule max_steps must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "StopRule":
        """``deficit:1e-6``, ``time:2.5`` or ``steps:1000``; several joined by ``+``."""
        kw = {}
        for part in text.split("+"):
            kind, _, val = part.partition(":")
            kind = kind.strip().lower()
            if kind == "deficit":
                kw["deficit"] = float(val)
            elif kind in ("time", "max_time"):
                kw["max_time"] = float(val)
            elif kind in ("steps", "max_steps"):
                kw["max_steps"] = int(val)
            else:
                raise ValueError(f"unknown stop rule {kind!r}; use deficit:, time: or steps:")
        return cls(**kw)

    def reached(self, state: "FlowState", deficit: float) -> bool:
        if self.deficit is not None and deficit < self.deficit:
            return True
        if self.max_time is not None and state.t >= self.max_time * (1 - 1e-12):
            return True
        return self.max_steps is not None and state.steps >= self.max_steps


@dataclass(frozen=True, eq=False)
class FlowState:
    """Curve, time, step size and the area target of a flow.

    ``history`` is shared by successive states of one run and grows in place,
    so the full trace is reachable from any of them.
    """

    curve: PlaneCurve
    t: float = 0.0
    dt: float = 0.0
    area_target: float = 0.0
    history: list = field(default_factory=list)
    steps: int = 0
    kernel: Kernel | None = None
    gamma: float = 0.0
    c_stab: float = C_STAB
    energy_every: int = 0

    @classmethod
    def start(cls, shape: MultiCurve | PlaneCurve, *, kernel: Kernel | None = None, gamma: float = 0.0,
              c_stab: float = C_STAB, energy_every: int = 0, n: int | None = None) -> "FlowState":
        """Initial state with the uniform-chord invariant enforced and the first trace row."""
        curve = shape if isinstance(shape, PlaneCurve) else _single(shape)
        if curve.ambient.value != "r2":
            raise GeometryError("the flow is implemented for single plane curves")
        if curve.orientation != "ccw":
            raise GeometryError("the flow needs a counter-clockwise curve")
        if not 0 < c_stab <= C_STAB:
            raise ValueError(f"c_stab must lie in (0, {C_STAB}]")
        if n is not None or not curve.is_uniform(1e-9):
            curve = resample(curve, n or curve.n)
        state = cls(curve, 0.0, stable_dt(curve, c_stab), curve.signed_area, [], 0,
                    kernel, float(gamma), c_stab, int(energy_every))
        state.history.append(record(state, with_energy=state._energy_due()))
        return state

    def _energy_due(self) -> bool:
        return self.kernel is not None and self.energy_every > 0 and self.steps % self.energy_every == 0

    def shape(self) -> MultiCurve:
        return MultiCurve.single(self.curve)


def _single(shape: MultiCurve) -> PlaneCurve:
    if len(shape.components) != 1:
        raise GeometryError("the flow is restricted to single simple curves; annuli are analyzed statically")
    return shape.components[0]


def stable_dt(curve: PlaneCurve, c_stab: float = C_STAB) -> float:
    return c_stab * (curve.length / curve.n) ** 2


def mean_curvature(curve: PlaneCurve, kappa: np.ndarray | None = None) -> float:
    k = vertex_curvature(curve) if kappa is None else kappa
    w = curve.weights
    return float(np.sum(w * k) / np.sum(w))


def dissipation(curve: PlaneCurve, kappa: np.ndarray | None = None) -> float:
    """int (kappa - kappa_bar)^2 dS."""
    k = vertex_curvature(curve) if kappa is None else kappa
    kb = mean_curvature(curve, k)
    return float(np.sum(curve.weights * (k - kb) ** 2))


def deficit(curve: PlaneCurve) -> float:
    """Isoperimetric deficit L - 2 sqrt(pi A)."""
    return float(curve.length - 2 * math.sqrt(math.pi * curve.signed_area))


def _homothety(curve: PlaneCurve, target: float) -> PlaneCurve:
    a = curve.signed_area
    c = curve.first_moment / a
    return curve.scaled(math.sqrt(target / a), c)


def step(state: FlowState) -> FlowState:
    """One explicit Euler step, resample and exact area projection."""
    c = state.curve
    bound = state.c_stab * (c.length / c.n) ** 2
    if not 0 < state.dt <= bound * (1 + 1e-12):
        raise ValueError(f"dt={state.dt:g} violates the stability bound {bound:g}")
    k = vertex_curvature(c)
    kb = mean_curvature(c, k)
    moved = c.lifted - state.dt * (k - kb)[:, None] * c.fd_normals
    try:
        nxt = PlaneCurve(moved, c.ambient)
        if nxt.orientation != "ccw" or not is_simple(nxt):
            raise GeometryError("self-intersection")
        nxt = resample(nxt, c.n)
        nxt = _homothety(nxt, state.area_target)
    except GeometryError as exc:
        raise FlowHalted(f"flow halted at t={state.t:.17g} after {state.steps} steps: {exc}", state) from exc
    new = replace(state, curve=nxt, t=state.t + state.dt, steps=state.steps + 1, dt=stable_dt(nxt, state.c_stab))
    new.history.append(record(new, with_energy=new._energy_due()))
    return new


def run(state: FlowState, stop: StopRule) -> FlowState:
    """Step until ``stop`` is reached; the last step may be shortened to hit ``max_time`` exactly."""
    while not stop.reached(state, state.history[-1].deficit):
        if stop.max_time is not None:
            remaining = stop.max_time - state.t
            if remaining < state.dt:
                state = replace(state, dt=remaining)
        state = step(state)
    if state.kernel is not None and state.energy_every > 0 and not state._energy_due():
        # always close the trace with a fully evaluated row
        state.history[-1] = record(state, with_energy=True)
    return state


def record(state: FlowState, *, with_energy: bool) -> TraceRecord:
    c = state.curve
    k = vertex_curvature(c)
    diss = dissipation(c, k)
    L = c.length
    nan = float("nan")
    e_tot = e_per = e_nl = dedt = res = nan
    if with_energy and state.kernel is not None:
        shape = state.shape()
        eb = total_energy(shape, state.kernel, state.gamma)
        e_tot, e_per, e_nl = eb.total, eb.perimeter, eb.nonlocal_
        d = energy_derivative_analytic(shape, state.kernel, state.gamma)
        dedt = d.total
        res = d.el_residual_sup
    return TraceRecord(state.t, L, c.signed_area, e_tot, e_per, e_nl, dedt, diss, deficit(c), res)


def trace_csv(history, header: dict | None = None) -> str:
    """CSV text of a trace; ``header`` items become leading ``# key: value`` lines."""
    buf = io.StringIO()
    for key, val in (header or {}).items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for rec in history:
        w.writerow(["%.17g" % v for v in rec.row()])
    return buf.getvalue()


# -- energy derivative and stability ------------------------------------------

@dataclass(frozen=True)
class EnergyDerivative:
    """dE/dt at t = 0 along the flow, itemized.

    ``perimeter_term = -int (kappa - kappa_bar)^2`` and
    ``nonlocal_term = -2 gamma int (kappa - kappa_bar)(phi - phi_bar)``; the
    factor 2 comes from the symmetry of the double integral.
    """

    perimeter_term: float
    nonlocal_term: float
    dissipation: float
    sup_phi_dev: float
    el_residual_sup: float

    @property
    def total(self) -> float:
        return self.perimeter_term + self.nonlocal_term


def energy_derivative_analytic(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0) -> EnergyDerivative:
    from .geometry.measures import curvature

    k = curvature(shape).values
    w = shape.weights
    kb = float(np.sum(w * k) / np.sum(w))
    dk = k - kb
    diss = float(np.sum(w * dk**2))
    if gamma == 0:
        return EnergyDerivative(-diss, 0.0, diss, 0.0, float(np.max(np.abs(dk))))
    pr = potential(shape, kernel)
    phi = pr.boundary_values.values
    dphi = phi - pr.boundary_mean
    nl = -2.0 * gamma * float(np.sum(w * dk * dphi))
    el = k + gamma * phi
    _, el_sup = boundary_stats(el, shape)
    return EnergyDerivative(-diss, nl, diss, pr.sup_deviation, el_sup)


@dataclass(frozen=True)
class DerivativeCheck:
    """Centered two-step difference of the total energy against the analytic value at the middle state."""

    finite_difference: float
    analytic: float
    dt: float

    @property
    def rel_error(self) -> float:
        return abs(self.finite_difference - self.analytic) / max(abs(self.analytic), 1e-300)


def energy_derivative_fd(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0, *,
                         c_stab: float = C_STAB, n: int | None = None) -> DerivativeCheck:
    """(E(t_2) - E(t_0)) / (t_2 - t_0) along two flow steps, compared with dE/dt at t_1."""
    s0 = FlowState.start(shape, c_stab=c_stab, n=n)
    s1 = step(s0)
    s2 = step(s1)
    e0 = total_energy(s0.shape(), kernel, gamma).total
    e2 = total_energy(s2.shape(), kernel, gamma).total
    d = energy_derivative_analytic(s1.shape(), kernel, gamma).total
    return DerivativeCheck((e2 - e0) / (s2.t - s0.t), d, s0.dt)


def eta_cr_ratio(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0) -> float:
    """(eta^2 int (kappa - kappa_bar)^2 / (L ||phi - phi_bar||_inf))^(1/2), the lower-bound expression for eta_cr."""
    from .criticality import rescaled_parameter
    from .geometry.measures import perimeter

    d = energy_derivative_analytic(shape, kernel, gamma)
    eta = rescaled_parameter(shape, kernel, gamma)
    if d.sup_phi_dev == 0:
        return float("inf")
    return math.sqrt(eta**2 * d.dissipation / (perimeter(shape) * d.sup_phi_dev))


def stability_gap(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0):
    """(E(shape) - E(B_m)) / (L - 2 sqrt(pi m)) with B_m the disk of equal area.

    Returns ``AT_MINIMIZER`` when the deficit is below ``DEFICIT_FLOOR``.
    """
    from .geometry.measures import area, is_convex, perimeter
    from .geometry.shapes import disk

    if not kernel.is_plane:
        raise GeometryError("the plane stability gap needs a plane kernel")
    c = _single(shape)
    if not is_convex(c):
        raise GeometryError("the stability gap is defined for convex shapes")
    m = area(shape)
    dl = perimeter(shape) - 2 * math.sqrt(math.pi * m)
    if dl < DEFICIT_FLOOR:
        return AT_MINIMIZER
    ball = disk(math.sqrt(m / math.pi), c.n)
    e = total_energy(shape, kernel, gamma).total
    eb = total_energy(ball, kernel, gamma).total
    return (e - eb) / dl
