"""Hyperbolic geometry of the unit disk and Euclidean disks in the plane.

All functions accept scalars or numpy arrays and broadcast.  Points of the
disk are rejected when ``|z| >= 1 - BOUNDARY_MARGIN`` so that ``1 - |z|**2``
never suffers catastrophic cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

BOUNDARY_MARGIN = 1e-12


def _check_disk(*points, name="point"):
    for p in points:
        if np.any(~np.isfinite(p)) or np.any(np.abs(p) >= 1.0 - BOUNDARY_MARGIN):
            raise DomainError(f"{name} must lie in the open unit disk (|z| < 1 - {BOUNDARY_MARGIN:g})")


def mobius_transform(a, z):
    """Return the involutive disk automorphism ``(a - z) / (1 - conj(a) z)``."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_disk(a, z)
    out = (a - z) / (1.0 - np.conj(a) * z)
    return out[()] if out.ndim == 0 else out


def one_minus_rho_sq(z, w):
    """``1 - rho(z, w)**2`` computed without cancellation.

    Uses the identity ``1 - rho**2 = (1-|z|^2)(1-|w|^2) / |1 - conj(z) w|^2``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_disk(z, w)
    num = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2)
    return num / np.abs(1.0 - np.conj(z) * w) ** 2


def rho(z, w):
    """Pseudo-hyperbolic distance ``|phi_w(z)|``."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_disk(z, w)
    out = np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)
    return out[()] if out.ndim == 0 else out


def beta(z, w):
    """Bergman distance ``atanh(rho(z, w))``.

    Evaluated as ``log((1 + rho) / sqrt(1 - rho^2))`` so that points whose
    pseudo-hyperbolic distance is within rounding of 1 keep full accuracy.
    """
    r = np.asarray(rho(z, w))
    q = one_minus_rho_sq(z, w)
    out = np.log1p(r) - 0.5 * np.log(q)
    return out[()] if np.ndim(out) == 0 else out


def beta_from_origin(z):
    """Bergman distance from 0, ``atanh|z|``."""
    z = np.asarray(z, dtype=complex)
    _check_disk(z)
    return np.arctanh(np.abs(z))


@dataclass(frozen=True)
class EuclideanDisk:
    """Open Euclidean disk ``B(center, radius)``."""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("disk radius must be positive")

    @property
    def area(self) -> float:
        """Measure under the normalized area measure ``dA = dx dy / pi``."""
        return self.radius ** 2

    def contains(self, w):
        return np.abs(np.asarray(w) - self.center) < self.radius


@dataclass(frozen=True)
class PseudoDisk:
    """Pseudo-hyperbolic disk ``E(z, r)`` with its Euclidean description.

    ``center_euc`` and ``radius_euc`` describe the same open set as
    ``{w : rho(center_hyp, w) < radius_hyp}``.
    """

    center_hyp: complex
    radius_hyp: float
    center_euc: complex
    radius_euc: float

    @property
    def area(self) -> float:
        return self.radius_euc ** 2

    def contains(self, w):
        w = np.asarray(w, dtype=complex)
        inside = np.abs(w) < 1.0
        out = np.zeros(w.shape, dtype=bool)
        out[inside] = rho(self.center_hyp, w[inside]) < self.radius_hyp
        return out[()] if out.ndim == 0 else out

    def as_euclidean(self) -> EuclideanDisk:
        return EuclideanDisk(self.center_euc, self.radius_euc)


def pseudo_disk(z, r) -> PseudoDisk:
    """Build ``E(z, r)``; the Euclidean parameters follow from the Möbius image of ``B(0, r)``."""
    z = complex(z)
    _check_disk(z)
    if not 0.0 < r < 1.0:
        raise DomainError("pseudo-hyperbolic radius must lie in (0, 1)")
    a2 = abs(z) ** 2
    den = 1.0 - r * r * a2
    return PseudoDisk(
        center_hyp=z,
        radius_hyp=float(r),
        center_euc=(1.0 - r * r) * z / den,
        radius_euc=r * (1.0 - a2) / den,
    )


def bergman_disk(z, R) -> PseudoDisk:
    """Bergman-metric disk ``D(z, R) = E(z, tanh R)``."""
    if not R > 0:
        raise DomainError("Bergman radius must be positive")
    return pseudo_disk(z, np.tanh(R))
