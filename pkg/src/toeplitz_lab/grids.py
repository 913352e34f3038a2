"""Finite evaluation grids: the artifact's stand-in for "for all z"."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import BOUNDARY_MARGIN


@dataclass(frozen=True)
class PolarGrid:
    """Polar grid on ``{|z| <= rho_max}`` in the disk, radii uniform in the Bergman metric."""

    rho_max: float = 0.99
    n_radii: int = 64
    n_angles: int = 128
    space: str = "bergman"

    def __post_init__(self):
        if not 0 < self.rho_max < 1 - BOUNDARY_MARGIN:
            raise DomainError("rho_max must lie in (0, 1)")
        if self.n_radii < 1 or self.n_angles < 1:
            raise ValueError("grid sizes must be positive")

    def points(self):
        b = np.linspace(0.0, np.arctanh(self.rho_max), self.n_radii)
        s = np.tanh(b)
        t = 2 * np.pi * np.arange(self.n_angles) / self.n_angles
        pts = (s[1:, None] * np.exp(1j * t)[None, :]).ravel()
        return np.concatenate([[0j], pts]) if self.n_radii > 1 else np.array([0j])

    def to_json(self):
        return {"type": "polar", "rho_max": self.rho_max, "n_radii": self.n_radii, "n_angles": self.n_angles}


@dataclass(frozen=True)
class BoxGrid:
    """Closed rectangle ``[x0, x1] x [y0, y1]`` sampled at ``n x n`` points."""

    x0: float
    x1: float
    y0: float
    y1: float
    n: int = 101
    space: str = "fock"

    def points(self):
        x = np.linspace(self.x0, self.x1, self.n)
        y = np.linspace(self.y0, self.y1, self.n)
        return (x[None, :] + 1j * y[:, None]).ravel()

    def to_json(self):
        return {"type": "box", "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1, "n": self.n}


def fundamental_cell(r, n=101) -> BoxGrid:
    """Closed cell ``[0, r]^2`` of the square lattice of spacing ``r``."""
    return BoxGrid(0.0, float(r), 0.0, float(r), n)


@dataclass(frozen=True)
class PointGrid:
    """An explicit list of probe points."""

    pts: tuple
    space: str = "bergman"

    def points(self):
        return np.asarray(self.pts, dtype=complex)

    def to_json(self):
        return {"type": "points", "points": [[complex(p).real, complex(p).imag] for p in self.pts]}


def grid_from_json(d):
    d = dict(d)
    kind = d.pop("type")
    if kind == "polar":
        return PolarGrid(**d)
    if kind == "box":
        return BoxGrid(**d)
    if kind == "points":
        return PointGrid(tuple(complex(a, b) for a, b in d["points"]))
    raise ValueError(f"unknown grid type {kind!r}")
