"""Reproducing kernels, Berezin transforms and the tail functionals of Carleson measures.

Bergman-space integrals against absolutely continuous measures are computed
after the change of variables ``w = phi_z(u)``, under which
``|k_z(w)|^2 dA(w)`` becomes ``dA(u)``.  The peak of ``|k_z|^2`` near the
boundary therefore never has to be resolved by the quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, DomainError
from .geometry import _check_disk, one_minus_rho_sq
from .parallel import pmap
from .measure import AbsolutelyContinuous, Atomic, Measure, PullBack, SpaceTag
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate_annulus, integrate_disk, integrate_plane_gaussian

PAIR_CHUNK = 4_000_000


def kernel(space, z, w, normalized=False):
    """Reproducing kernel ``K_z(w)`` (or ``k_z(w)`` when ``normalized``).

    Bergman: ``1 / (1 - conj(z) w)^2``; Fock: ``exp(conj(z) w / 2)``.
    """
    space = SpaceTag(space)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if space is SpaceTag.BERGMAN:
        _check_disk(z, w)
        out = 1.0 / (1.0 - np.conj(z) * w) ** 2
        if normalized:
            out = out * (1.0 - np.abs(z) ** 2)
    else:
        expo = np.conj(z) * w / 2
        if normalized:
            expo = expo - np.abs(z) ** 2 / 4
        out = np.exp(expo)
    return out[()] if out.ndim == 0 else out


@dataclass
class GridReport:
    """Extrema of a function sampled on a finite grid, with the samples."""

    grid: dict
    inf_value: float
    sup_value: float
    argmin: complex
    argmax: complex
    points: np.ndarray = field(repr=False, default=None)
    values: np.ndarray = field(repr=False, default=None)
    quantity: str = "berezin"

    @classmethod
    def from_samples(cls, grid, points, values, quantity="berezin"):
        values = np.asarray(values, dtype=float)
        i, j = int(np.argmin(values)), int(np.argmax(values))
        return cls(grid.to_json(), float(values[i]), float(values[j]), complex(points[i]), complex(points[j]), points, values, quantity)

    def to_json(self):
        return {
            "quantity": self.quantity,
            "grid": self.grid,
            "inf_value": self.inf_value,
            "sup_value": self.sup_value,
            "argmin": [self.argmin.real, self.argmin.imag],
            "argmax": [self.argmax.real, self.argmax.imag],
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            d["grid"], d["inf_value"], d["sup_value"], complex(*d["argmin"]), complex(*d["argmax"]), quantity=d.get("quantity", "berezin")
        )

    def csv_rows(self):
        yield ("z_re", "z_im", "value")
        for p, v in zip(self.points, self.values):
            yield (p.real, p.imag, v)


# -- atomic closed forms -----------------------------------------------------


def _pairwise_sum(z, points, weights, term):
    """``sum_k weights[k] * term(z, points[k])`` for each z, in bounded memory."""
    z = np.asarray(z, dtype=complex).ravel()
    out = np.zeros(z.shape)
    if len(points) == 0:
        return out
    step = max(1, PAIR_CHUNK // len(points))
    for i in range(0, len(z), step):
        zc = z[i : i + step, None]
        out[i : i + step] = term(zc, points[None, :]) @ weights
    return out


def _bergman_atomic_term(z, p):
    return (1.0 - np.abs(z) ** 2) ** 2 / np.abs(1.0 - np.conj(z) * p) ** 4


def _fock_atomic_term(z, p):
    return 0.5 * np.exp(-np.abs(z - p) ** 2 / 2)


# -- Berezin transform -------------------------------------------------------


def berezin_transform(mu: Measure, z, quad: QuadratureSpec = DEFAULT_QUAD):
    """Berezin transform of ``mu`` at ``z`` (scalar or array).

    Bergman: ``int |k_z|^2 dmu``; Fock: ``(1/2) int exp(-|z - w|^2/2) dmu(w)``.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if mu.space is SpaceTag.BERGMAN:
        _check_disk(z)
    if isinstance(mu, Atomic):
        term = _bergman_atomic_term if mu.space is SpaceTag.BERGMAN else _fock_atomic_term
        out = _pairwise_sum(z, mu.points, mu.weights, term)
    elif isinstance(mu, AbsolutelyContinuous):
        out = np.array(pmap(lambda zz: _berezin_ac(mu, zz, quad), z.ravel()))
    elif isinstance(mu, PullBack):
        out = np.array(pmap(lambda zz: berezin_pullback(mu, zz, quad), z.ravel()))
    else:
        raise AdmissibilityError(f"unsupported measure {type(mu).__name__}")
    out = out.reshape(z.shape)
    return float(out[0]) if scalar else out


def _berezin_ac(mu, z, quad):
    if mu.space is SpaceTag.BERGMAN:
        return integrate_disk(lambda u: mu.density(_phi(z, u)), quad).real
    g = lambda u: 0.5 * np.exp(-np.abs(u) ** 2 / 2) * mu.density(z + u)
    return integrate_plane_gaussian(g, quad, decay=0.5).real


def _phi(z, u):
    # phi_z(u) with u in the open disk; quadrature nodes never reach |u| = 1
    return (z - u) / (1.0 - np.conj(z) * u)


def berezin_pullback(mu: PullBack, z, quad=DEFAULT_QUAD):
    """``int |k_z(phi(w))|^2 dA(w) = ||C_phi k_z||^2``."""
    nz = 1.0 - abs(z) ** 2
    return integrate_disk(lambda w: nz ** 2 / np.abs(1.0 - np.conj(z) * mu.phi(w)) ** 4, quad).real


def berezin_extrema(mu: Measure, grid, quad: QuadratureSpec = DEFAULT_QUAD) -> GridReport:
    """Infimum and supremum of the Berezin transform over ``grid``.

    Raises
    ------
    TruncationError
        If a grid point lies outside the region where the truncated measure
        is representative.
    """
    pts = grid.points()
    mu.check_region(pts, "berezin grid")
    vals = berezin_transform(mu, pts, quad)
    return GridReport.from_samples(grid, pts, vals, "berezin")


# -- tails -------------------------------------------------------------------


def tail_bergman(mu: Measure, z, r, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_{D \\ E(z, r)} (1 - |z|^2)^2 / |1 - conj(z) w|^4 dmu(w)``."""
    if not 0 < r < 1:
        raise DomainError("r must lie in (0, 1)")
    if mu.space is not SpaceTag.BERGMAN:
        raise AdmissibilityError("tail_bergman needs a Bergman measure")
    z = complex(z)
    _check_disk(z)
    if isinstance(mu, Atomic):
        if len(mu) == 0:
            return 0.0
        outside = one_minus_rho_sq(z, mu.points) <= 1.0 - r * r
        return math.fsum((mu.weights[outside] * _bergman_atomic_term(z, mu.points[outside])).tolist())
    if isinstance(mu, AbsolutelyContinuous):
        return integrate_annulus(lambda u: mu.density(_phi(z, u)), 0.0, r, 1.0, quad).real
    if isinstance(mu, PullBack):
        nz = 1.0 - abs(z) ** 2

        def g(w):
            v = mu.phi(w)
            out = nz ** 2 / np.abs(1.0 - np.conj(z) * v) ** 4
            return np.where(one_minus_rho_sq(z, v) <= 1.0 - r * r, out, 0.0)

        fine = QuadratureSpec(max(quad.radial_nodes, 256), max(quad.angular_nodes, 1024), check=False)
        return integrate_disk(g, fine).real
    raise AdmissibilityError(f"unsupported measure {type(mu).__name__}")


def tail_fock(mu: Measure, z, R, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_{C \\ B(z, R)} exp(-|z - w|^2 / 2) dmu(w)``."""
    if not R > 0:
        raise DomainError("R must be positive")
    if mu.space is not SpaceTag.FOCK:
        raise AdmissibilityError("tail_fock needs a Fock measure")
    z = complex(z)
    if isinstance(mu, Atomic):
        if len(mu) == 0:
            return 0.0
        d = np.abs(mu.points - z)
        keep = d >= R
        return math.fsum((mu.weights[keep] * np.exp(-d[keep] ** 2 / 2)).tolist())
    if isinstance(mu, AbsolutelyContinuous):
        sup = max(mu.density_sup(), 1e-300)
        # the discarded Gaussian tail, 2 sup exp(-outer^2/2), stays at 1% of the tolerance
        outer = max(R + 1.0, math.sqrt(2.0 * math.log(200.0 * sup / quad.tolerance)))
        g = lambda w: np.exp(-np.abs(w - z) ** 2 / 2) * mu.density(w)
        return integrate_annulus(g, z, R, outer, quad).real
    raise AdmissibilityError(f"unsupported measure {type(mu).__name__}")


def tail_sup(mu: Measure, radius, grid, quad: QuadratureSpec = DEFAULT_QUAD) -> GridReport:
    """Grid supremum of the Bergman (``radius = r``) or Fock (``radius = R``) tail."""
    pts = grid.points()
    mu.check_region(pts, "tail grid")
    fn = tail_bergman if mu.space is SpaceTag.BERGMAN else tail_fock
    vals = np.array(pmap(lambda p: fn(mu, p, radius, quad), pts))
    return GridReport.from_samples(grid, pts, vals, f"tail(radius={radius:g})")
