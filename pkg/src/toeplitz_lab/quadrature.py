"""Polar quadrature on disks and annuli, and a seeded Monte Carlo oracle.

Integrals are taken against the normalized area measure ``dA = dx dy / pi``,
so the unit disk has mass 1 and ``B(c, s)`` has mass ``s**2``.

The radial variable is ``u = r**2``: ``dA = du dtheta / (2 pi)``, hence a
Gauss-Legendre rule with ``n`` nodes in ``u`` integrates ``|z|**(2k)`` exactly
for ``k <= 2n - 1``.  The angle uses the periodic trapezoid rule, exact for
trigonometric polynomials of degree below ``angular_nodes``.

Integrands are vectorized callables: they receive a complex ndarray of nodes
and return an array of the same shape.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import AccuracyWarning, DomainError, EvaluationError
from .geometry import EuclideanDisk, PseudoDisk


@dataclass(frozen=True)
class QuadratureSpec:
    radial_nodes: int = 64
    angular_nodes: int = 256
    outer_radius: float | None = None
    tolerance: float = 1e-10
    check: bool = True

    def __post_init__(self):
        if self.radial_nodes < 1:
            raise ValueError("radial_nodes must be positive")
        if self.angular_nodes < 8:
            raise ValueError("angular_nodes must be at least 8")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.outer_radius is not None and not self.outer_radius > 0:
            raise ValueError("outer_radius must be positive")

    def refined(self) -> "QuadratureSpec":
        return replace(self, radial_nodes=2 * self.radial_nodes, angular_nodes=2 * self.angular_nodes)


@dataclass(frozen=True)
class McSpec:
    sample_count: int = 1_000_000
    seed: int = 42

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=64)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def polar_rule(center=0.0, r_inner=0.0, r_outer=1.0, radial_nodes=64, angular_nodes=256):
    """Nodes and weights for the annulus ``r_inner <= |z - center| < r_outer``.

    Returns
    -------
    nodes : complex ndarray, shape (radial_nodes * angular_nodes,)
    weights : float ndarray, same shape; they sum to ``r_outer**2 - r_inner**2``.
    """
    if not 0.0 <= r_inner < r_outer:
        raise DomainError("need 0 <= r_inner < r_outer")
    x, w = _gauss_legendre(radial_nodes)
    a, b = r_inner ** 2, r_outer ** 2
    u = 0.5 * (b - a) * x + 0.5 * (b + a)
    wu = 0.5 * (b - a) * w
    theta = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    nodes = center + np.sqrt(u)[:, None] * np.exp(1j * theta)[None, :]
    weights = np.repeat(wu[:, None] / angular_nodes, angular_nodes, axis=1)
    return nodes.ravel(), weights.ravel()


def _evaluate(f, nodes):
    vals = np.asarray(f(nodes))
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"integrand is not finite at node {nodes[i]!r} (value {vals[i]!r})")
    return vals


def _finish(val, spec, rerun, info):
    if spec.check:
        fine = rerun(spec.refined())
        err = abs(fine - val)
        info["error_estimate"] = err
        if err >= spec.tolerance:
            warnings.warn(
                f"quadrature doubling changed the result by {err:.3g} (tolerance {spec.tolerance:.3g})",
                AccuracyWarning,
                stacklevel=3,
            )
        val = fine
    return val


def integrate_annulus(f, center=0.0, r_inner=0.0, r_outer=1.0, spec=DEFAULT_QUAD, full_output=False):
    """Integrate ``f dA`` over an annulus (a disk when ``r_inner == 0``)."""

    def run(s):
        nodes, weights = polar_rule(center, r_inner, r_outer, s.radial_nodes, s.angular_nodes)
        return complex(np.sum(weights * _evaluate(f, nodes)))

    info = {"error_estimate": None}
    val = _finish(run(spec), spec, run, info)
    return (val, info) if full_output else val


def integrate_disk(f, spec=DEFAULT_QUAD, full_output=False):
    """Approximate ``int_D f dA`` over the unit disk.

    Examples
    --------
    >>> round(integrate_disk(lambda z: abs(z) ** 2).real, 12)
    0.5
    """
    return integrate_annulus(f, 0.0, 0.0, 1.0, spec, full_output)


def default_outer_radius(decay, tolerance):
    """Truncation radius ``sqrt(2 ln(1/tol) / c)`` for integrands decaying like ``exp(-c|w|^2)``."""
    return math.sqrt(2.0 * math.log(1.0 / tolerance) / decay)


def gaussian_tail_bound(outer_radius, decay):
    """``int_{|w| > R} exp(-c|w|^2) dA = exp(-c R^2) / c``."""
    return math.exp(-decay * outer_radius ** 2) / decay


def integrate_plane_gaussian(f, spec=DEFAULT_QUAD, decay=0.5, center=0.0, full_output=False):
    """Approximate ``int_C f dA`` for ``|f(w)| <~ exp(-decay |w - center|^2)``.

    The plane is truncated to ``B(center, outer_radius)``.  A caller-supplied
    ``spec.outer_radius`` is rejected when the a-priori tail bound
    ``exp(-decay R^2) / decay`` exceeds ``spec.tolerance``.
    """
    if not decay > 0:
        raise DomainError("decay must be positive")
    R = spec.outer_radius
    if R is None:
        R = default_outer_radius(decay, spec.tolerance)
    tail = gaussian_tail_bound(R, decay)
    if tail > spec.tolerance:
        raise DomainError(
            f"outer_radius {R:g} too small for decay {decay:g}: tail bound {tail:.3g} > tolerance {spec.tolerance:.3g}"
        )
    val, info = integrate_annulus(f, center, 0.0, R, spec, full_output=True)
    info["tail_bound"] = tail
    info["outer_radius"] = R
    return (val, info) if full_output else val


def _region_disk(region):
    if isinstance(region, str):
        if region != "unit-disk":
            raise ValueError(f"unknown region {region!r}")
        return 0.0, 1.0
    if isinstance(region, PseudoDisk):
        return region.center_euc, region.radius_euc
    if isinstance(region, EuclideanDisk):
        return region.center, region.radius
    raise TypeError(f"unsupported region type {type(region).__name__}")


MC_CHUNK = 1 << 17


def mc_oracle(f, region="unit-disk", spec=McSpec()):
    """Uniform-sampling estimate of ``int_region f dA`` with its standard error.

    Chunks draw from independent streams spawned from ``spec.seed``, so the
    result depends only on ``spec`` and never on how chunks are scheduled.
    """
    c, s = _region_disk(region)
    area = s * s
    n = spec.sample_count
    nchunks = -(-n // MC_CHUNK)
    streams = np.random.SeedSequence(spec.seed).spawn(nchunks)
    total = 0j
    total_sq = 0.0
    for k, ss in enumerate(streams):
        m = min(MC_CHUNK, n - k * MC_CHUNK)
        rng = np.random.default_rng(ss)
        rad = s * np.sqrt(rng.random(m))
        ang = 2.0 * np.pi * rng.random(m)
        pts = c + rad * np.exp(1j * ang)
        vals = _evaluate(f, pts).astype(complex)
        total += vals.sum()
        total_sq += float(np.sum(np.abs(vals) ** 2))
    mean = total / n
    if n > 1:
        var = max(total_sq / n - abs(mean) ** 2, 0.0) * n / (n - 1)
    else:
        var = 0.0
    return area * mean, area * math.sqrt(var / n)
