"""Potentials, boundary statistics and energies for all kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry.curve import BoundaryField, GeometryError, MultiCurve, is_simple
from ..geometry.measures import perimeter
from . import plane, torus
from .kernels import Kernel, KernelError

FAN_RADIAL_NODES = 12
FAN_STRIDE = 2


@dataclass(frozen=True, eq=False)
class PotentialResult:
    boundary_values: BoundaryField
    boundary_mean: float
    sup_deviation: float
    grid_field: np.ndarray | None = None
    target_values: np.ndarray | None = None
    source: np.ndarray | None = None


def boundary_stats(values: BoundaryField | np.ndarray, shape: MultiCurve) -> tuple[float, float]:
    """Arc-length weighted mean over all of the boundary and the sup deviation from it."""
    v = values.values if isinstance(values, BoundaryField) else np.asarray(values, float)
    w = shape.weights
    if len(v) != len(w):
        raise GeometryError(f"field of length {len(v)} does not match the {len(w)} boundary vertices")
    mean = float(np.sum(w * v) / np.sum(w))
    return mean, float(np.max(np.abs(v - mean)))


def _result(shape, vals, **extra) -> PotentialResult:
    field = shape.field(vals, "potential")
    mean, dev = boundary_stats(field, shape)
    return PotentialResult(field, mean, dev, **extra)


def potential_plane(shape: MultiCurve, kernel: Kernel, targets=None) -> PotentialResult:
    """phi at the boundary vertices, plus at ``targets`` when given."""
    vals = plane.boundary_potential(shape, kernel)
    tv = None if targets is None else plane.point_potential(shape, kernel, targets)
    return _result(shape, vals, target_values=tv)


def potential_torus(shape: MultiCurve, grid: int = 512) -> PotentialResult:
    Kernel.torus(grid)
    if not shape.is_torus:
        raise GeometryError("potential_torus needs a torus shape")
    u, phi = torus.torus_potential(shape, grid)
    vals = torus.sample(phi, shape.points)
    return _result(shape, vals, grid_field=phi, source=u)


def potential(shape: MultiCurve, kernel: Kernel) -> PotentialResult:
    if kernel.kind == "torus":
        return potential_torus(shape, kernel.grid)
    return potential_plane(shape, kernel)


def _require_simple(shape: MultiCurve):
    for c in shape.components:
        if not is_simple(c):
            raise GeometryError("energy needs simple (non-self-intersecting) boundary components")


def fan_nodes(shape: MultiCurve, radial: int = FAN_RADIAL_NODES, stride: int = FAN_STRIDE):
    """Quadrature nodes and weights for integrals over the set.

    Every component is fanned from its own centroid: trapezoid rule in the
    curve parameter times Gauss-Legendre in a stretched radial fraction. Clockwise
    components carry negative weights, so the signed sum is the integral
    over the set.
    """
    xi, wi = np.polynomial.legendre.leggauss(radial)
    # rho = 1 - (1 - s)^2 flattens the (1 - rho)^(2 - alpha) boundary layer of Riesz potentials
    sg = 0.5 * (xi + 1)
    rho = 1 - (1 - sg) ** 2
    wr = 0.5 * wi * 2 * (1 - sg)
    pts, wts = [], []
    for c in shape.components:
        cen = c.first_moment / c.signed_area
        z = c.trig.shifted(0.0, 0)[::stride]
        dz = c.trig.shifted(0.0, 1)[::stride]
        zc = cen[0] + 1j * cen[1]
        rel = z - zc
        cross = rel.real * dz.imag - rel.imag * dz.real
        m = len(z)
        p = zc + rel[:, None] * rho[None, :]
        w = (cross[:, None] * rho[None, :] * wr[None, :]) / m
        pts.append(p.ravel())
        wts.append(w.ravel())
    p = np.concatenate(pts)
    return np.stack([p.real, p.imag], axis=1), np.concatenate(wts)


def nonlocal_energy(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0) -> float:
    """gamma * int int (u - ubar) G (u - ubar); on the plane ubar = 0."""
    _require_simple(shape)
    if kernel.kind == "torus":
        u, phi = torus.torus_potential(shape, kernel.grid)
        return float(gamma * np.mean(phi * (u - u.mean())))
    pts, w = fan_nodes(shape)
    phi = plane.point_potential(shape, kernel, pts)
    return float(gamma * np.sum(w * phi))


@dataclass(frozen=True)
class EnergyBreakdown:
    perimeter: float
    nonlocal_: float
    gamma: float
    kernel: str

    @property
    def total(self) -> float:
        return self.perimeter + self.nonlocal_

    def as_dict(self) -> dict:
        return {"E_total": self.total, "E_perimeter": self.perimeter, "E_nonlocal": self.nonlocal_,
                "gamma": self.gamma, "kernel": self.kernel}


def total_energy(shape: MultiCurve, kernel: Kernel, gamma: float = 1.0) -> EnergyBreakdown:
    """Perimeter plus nonlocal energy, itemized. gamma = 0 skips the potential entirely."""
    if not isinstance(kernel, Kernel):
        raise KernelError("kernel must be a Kernel")
    per = perimeter(shape)
    nl = 0.0 if gamma == 0 else nonlocal_energy(shape, kernel, gamma)
    return EnergyBreakdown(per, nl, float(gamma), kernel.label)
