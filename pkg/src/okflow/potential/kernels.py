"""Green's kernels and their radial antiderivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class KernelError(ValueError):
    """Invalid kernel parameters."""


@dataclass(frozen=True)
class Kernel:
    """``log``: -(1/2pi) log r; ``riesz``: r^-alpha with alpha in (0, 1); ``torus``: periodic Green's function."""

    kind: str
    alpha: float | None = None
    grid: int | None = None

    def __post_init__(self):
        if self.kind not in ("log", "riesz", "torus"):
            raise KernelError(f"unknown kernel {self.kind!r}; expected log, riesz or torus")
        if self.kind == "riesz":
            a = self.alpha
            if a is None or not np.isfinite(a) or not (0.0 < a < 1.0):
                raise KernelError(
                    f"Riesz exponent alpha must lie in the open interval (0,1), got {a}; "
                    "alpha in (0,1) is the only range the energy is defined for here"
                )
        if self.kind == "torus":
            g = self.grid if self.grid is not None else 512
            if g < 128 or g & (g - 1):
                raise KernelError(f"torus grid must be a power of two >= 128, got {g}")
            object.__setattr__(self, "grid", int(g))

    @classmethod
    def log(cls) -> "Kernel":
        return cls("log")

    @classmethod
    def riesz(cls, alpha: float) -> "Kernel":
        return cls("riesz", float(alpha))

    @classmethod
    def torus(cls, grid: int = 512) -> "Kernel":
        return cls("torus", grid=grid)

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """``log``, ``riesz:0.5`` or ``torus[:512]``."""
        kind, _, arg = text.strip().lower().partition(":")
        try:
            if kind == "riesz":
                return cls.riesz(float(arg))
            if kind == "torus":
                return cls.torus(int(arg) if arg else 512)
        except ValueError as exc:
            if isinstance(exc, KernelError):
                raise
            raise KernelError(f"bad kernel parameter in {text!r}") from exc
        return cls(kind)

    @property
    def is_plane(self) -> bool:
        return self.kind != "torus"

    @property
    def label(self) -> str:
        if self.kind == "riesz":
            return f"riesz:{self.alpha:g}"
        if self.kind == "torus":
            return f"torus:{self.grid}"
        return "log"

    # -- radial functions (plane kernels) ------------------------------------
    def G(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "log":
            return -np.log(r) / (2 * np.pi)
        if self.kind == "riesz":
            return r ** (-self.alpha)
        raise KernelError("the torus kernel has no closed radial form")

    def h(self, r):
        """Solution of h' + h / r = G vanishing at r = 0."""
        r = np.asarray(r, dtype=float)
        if self.kind == "log":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = r * (-np.log(r) / (4 * np.pi) + 1 / (8 * np.pi))
            return np.where(r > 0, out, 0.0)
        if self.kind == "riesz":
            return r ** (1 - self.alpha) / (2 - self.alpha)
        raise KernelError("the torus kernel has no closed radial form")

    def h_over_r(self, r):
        """h(r) / r with the removable r = 0 point mapped to 0 (it multiplies an O(r) factor)."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "log":
                out = -np.log(r) / (4 * np.pi) + 1 / (8 * np.pi)
            else:
                out = r ** (-self.alpha) / (2 - self.alpha)
        return np.where(r > 0, out, 0.0)

    def radial_mass(self, rho):
        """Integral of G(r) r dr from 0 to rho (used by the fan oracle)."""
        rho = np.asarray(rho, dtype=float)
        if self.kind == "log":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = -(rho**2) * (2 * np.log(rho) - 1) / (8 * np.pi)
            return np.where(rho > 0, out, 0.0)
        if self.kind == "riesz":
            return rho ** (2 - self.alpha) / (2 - self.alpha)
        raise KernelError("the torus kernel has no closed radial form")
