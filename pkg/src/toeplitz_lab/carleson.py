"""Grid decision procedures for the Carleson and reverse Carleson conditions.

Bergman side: the ratio ``mu(E(z, r)) / A(E(z, r))`` over pseudo-hyperbolic
disks.  Fock side: the mass ``mu(B(z, r))`` of Euclidean disks.  Both are
sampled on a finite grid, and every verdict is recorded together with that
grid and the threshold used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .berezin import berezin_extrema
from .errors import AdmissibilityError, DomainError
from .geometry import EuclideanDisk, one_minus_rho_sq, pseudo_disk
from .grids import BoxGrid, PolarGrid, fundamental_cell
from .measure import Atomic, Measure, SpaceTag
from .quadrature import DEFAULT_QUAD

CARLESON_THRESHOLD = 1e8
REVERSE_THRESHOLD = 1e-8


def default_grid(mu: Measure, grid_density=None, cell=None):
    """Default probe grid for ``mu``.

    Bergman: polar grid up to ``rho = 0.99`` (or the edge of a ring
    truncation, if smaller), ``grid_density`` radii by twice as many angles.
    Fock: the closed fundamental cell ``[0, cell]^2`` (``cell`` defaults to 1).
    """
    if mu.space is SpaceTag.BERGMAN:
        n = 64 if grid_density is None else int(grid_density)
        rho_max = 0.99
        t = mu.truncation
        if t is not None and t.kind == "rings":
            rho_max = min(rho_max, math.tanh(t.extent - t.margin))
        return PolarGrid(rho_max, n, 2 * n)
    n = 101 if grid_density is None else int(grid_density)
    return fundamental_cell(1.0 if cell is None else cell, n)


def _regions(space, pts, r):
    if space is SpaceTag.BERGMAN:
        return [pseudo_disk(z, r) for z in pts]
    return [EuclideanDisk(complex(z), float(r)) for z in pts]


def disk_masses(mu: Measure, r, pts, quad=DEFAULT_QUAD):
    """``mu(E(z, r))`` (Bergman) or ``mu(B(z, r))`` (Fock) for each probe ``z``.

    Atomic measures are counted exactly, with a k-d tree restricting the
    candidates to the Euclidean disk that carries each region.
    """
    pts = np.asarray(pts, dtype=complex).ravel()
    if not isinstance(mu, Atomic):
        return np.array([mu.mass_in(reg, quad) for reg in _regions(mu.space, pts, r)])
    out = np.zeros(len(pts))
    if len(mu) == 0:
        return out
    tree = cKDTree(np.column_stack([mu.points.real, mu.points.imag]))
    for i, z in enumerate(pts):
        if mu.space is SpaceTag.BERGMAN:
            d = pseudo_disk(z, r)
            c, s = d.center_euc, d.radius_euc
        else:
            c, s = complex(z), float(r)
        idx = np.asarray(tree.query_ball_point([c.real, c.imag], s * (1 + 1e-9) + 1e-12), dtype=int)
        if len(idx) == 0:
            continue
        p = mu.points[idx]
        if mu.space is SpaceTag.BERGMAN:
            inside = one_minus_rho_sq(z, p) > 1.0 - r * r
        else:
            inside = np.abs(p - z) < r
        out[i] = math.fsum(mu.weights[idx[inside]].tolist())
    return out


def _check_r(space, r):
    if space is SpaceTag.BERGMAN and not 0 < r < 1:
        raise DomainError("Bergman r must lie in (0, 1)")
    if space is SpaceTag.FOCK and not r > 0:
        raise DomainError("Fock r must be positive")


def disk_ratios(mu: Measure, r, region=None, grid_density=None, quad=DEFAULT_QUAD):
    """Probe points and the Carleson ratios at them.

    ``region`` is a grid object (see :mod:`toeplitz_lab.grids`); ``None``
    selects :func:`default_grid`.
    """
    _check_r(mu.space, r)
    grid = region if region is not None else default_grid(mu, grid_density)
    pts = grid.points()
    mu.check_region(pts, "carleson grid")
    m = disk_masses(mu, r, pts, quad)
    if mu.space is SpaceTag.BERGMAN:
        m = m / np.array([pseudo_disk(z, r).area for z in pts])
    return grid, pts, m


def carleson_ratio_sup(mu: Measure, r, region=None, grid_density=None, quad=DEFAULT_QUAD) -> float:
    """Grid supremum of ``mu(E(z,r)) / A(E(z,r))`` or ``mu(B(z,r))``.

    Examples
    --------
    >>> from toeplitz_lab.measure import Atomic
    >>> from toeplitz_lab.grids import PointGrid
    >>> carleson_ratio_sup(Atomic("bergman", [0], [1.0]), 0.5, PointGrid((0,)))
    4.0
    """
    return float(disk_ratios(mu, r, region, grid_density, quad)[2].max())


def reverse_carleson_inf(mu: Measure, r, region=None, grid_density=None, quad=DEFAULT_QUAD) -> float:
    """Grid infimum of the same quantity as :func:`carleson_ratio_sup`."""
    return float(disk_ratios(mu, r, region, grid_density, quad)[2].min())


@dataclass
class CarlesonReport:
    """Carleson-side verdicts on a grid.

    ``verdict_reverse_condition`` is about the two-sided disk condition only.
    Whether ``mu`` is a reverse Carleson *measure* (the norm inequality, i.e.
    invertibility of ``T_mu``) is a spectral question answered by
    :func:`toeplitz_lab.toeplitz.invertibility_profile`;
    ``reverse_measure_verdict`` stays ``None`` unless a caller fills it in
    from such a profile or a symbolic argument.
    """

    space: str
    r_used: float
    sup_ratio: float
    inf_ratio: float
    grid: dict
    verdict_carleson: bool
    verdict_reverse_condition: bool
    berezin_inf: float
    berezin_sup: float
    carleson_threshold: float = CARLESON_THRESHOLD
    reverse_threshold: float = REVERSE_THRESHOLD
    reverse_measure_verdict: bool | None = None
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "space": self.space,
            "r_used": self.r_used,
            "sup_ratio": self.sup_ratio,
            "inf_ratio": self.inf_ratio,
            "grid": self.grid,
            "carleson_threshold": self.carleson_threshold,
            "reverse_threshold": self.reverse_threshold,
            "verdict_carleson": self.verdict_carleson,
            "verdict_reverse_condition": self.verdict_reverse_condition,
            "reverse_measure_verdict": self.reverse_measure_verdict,
            "berezin_inf": self.berezin_inf,
            "berezin_sup": self.berezin_sup,
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, d):
        return cls(**d)

    def csv_rows(self):
        """Scalar fields as ``field, value`` rows; the grid is flattened to ``grid.<key>``."""
        yield ("field", "value")
        for k, v in self.to_json().items():
            if k == "grid":
                for gk, gv in v.items():
                    yield (f"grid.{gk}", gv)
            elif k == "notes":
                for note in v:
                    yield ("note", note)
            else:
                yield (k, v)


def classify(mu: Measure, r=None, region=None, grid_density=None, quad=DEFAULT_QUAD) -> CarlesonReport:
    """Carleson ratios and Berezin extrema of ``mu`` on one grid.

    The default ``r`` is 0.5 on the disk and 1 in the plane.
    """
    if r is None:
        r = 0.5 if mu.space is SpaceTag.BERGMAN else 1.0
    grid, pts, ratios = disk_ratios(mu, r, region, grid_density, quad)
    sup_r, inf_r = float(ratios.max()), float(ratios.min())
    bz = berezin_extrema(mu, grid, quad)
    notes = [
        "verdict_reverse_condition concerns the disk condition only; "
        "being a reverse Carleson measure is decided by the spectral profile"
    ]
    if not np.isfinite(sup_r):
        raise AdmissibilityError("non-finite Carleson ratio")
    return CarlesonReport(
        mu.space.value,
        float(r),
        sup_r,
        inf_r,
        grid.to_json(),
        verdict_carleson=bool(sup_r < CARLESON_THRESHOLD),
        verdict_reverse_condition=bool(inf_r >= REVERSE_THRESHOLD),
        berezin_inf=bz.inf_value,
        berezin_sup=bz.sup_value,
        notes=notes,
    )


def bergman_berezin_floor(inf_ratio, r):
    """Lower bound on the Berezin transform implied by ``inf_ratio`` at radius ``r``.

    On ``E(z, r)``, ``|k_z(w)|^2 = (1 - rho(z, w)^2)^2 / (1 - |w|^2)^2``, so
    ``|k_z(w)|^2 >= (1 - r^2)^2 (1 - r)^2 / ((1 + r)^2 (1 - |z|^2)^2)`` because
    ``(1 - |w|^2) / (1 - |z|^2) <= (1 + r) / (1 - r)`` there, and
    ``A(E(z, r)) >= r^2 (1 - |z|^2)^2``.  Hence
    ``mu~(z) >= c r^2 (1 - r^2)^2 (1 - r)^2 / (1 + r)^2`` whenever
    ``mu(E(z, r)) >= c A(E(z, r))``.
    This is the constant the implementation records; it is not claimed sharp.
    """
    return inf_ratio * r * r * (1 - r * r) ** 2 * (1 - r) ** 2 / (1 + r) ** 2


def fock_berezin_floor(inf_mass, r):
    """``(1/2) c exp(-r^2/2)``: every atom of ``B(z, r)`` contributes at least ``exp(-r^2/2)/2``."""
    return 0.5 * inf_mass * math.exp(-r * r / 2)
