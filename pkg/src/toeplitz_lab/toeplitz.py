"""Finite sections of Toeplitz operators with measure symbols.

The compression of ``T_mu`` to polynomials of degree below ``N`` is the Gram
matrix ``M[m, n] = <T_mu e_n, e_m>`` in the orthonormal monomial basis:

* Bergman: ``e_n(z) = sqrt(n + 1) z^n`` and ``M[m, n] = int e_n conj(e_m) dmu``;
* Fock: ``e_n(z) = z^n / sqrt(2^n n!)`` and
  ``M[m, n] = (1/2) int e_n conj(e_m) exp(-|w|^2/2) dmu(w)``.

Every matrix is assembled as ``V^H V`` from a factor ``V`` whose rows are
``sqrt(weight) * (e_0(p), ..., e_{N-1}(p))`` at atoms or quadrature nodes.
Extreme eigenvalues come from the singular values of ``V``, which keeps
small eigenvalues accurate to relative precision instead of to
``eps * ||M||``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc, gammaln

from .berezin import berezin_transform
from .errors import AccuracyWarning, AdmissibilityError, DomainError, TruncationError
from .geometry import _check_disk
from .measure import AbsolutelyContinuous, Atomic, Measure, PullBack, SpaceTag
from .quadrature import DEFAULT_QUAD, QuadratureSpec, polar_rule

HERMITIAN_TOL = 1e-12
FOCK_WINDOW_PAD = 6.0


# -- basis -------------------------------------------------------------------


def _log_norm(space, n):
    """``log`` of the coefficient ``c_n`` with ``e_n = c_n z^n``."""
    n = np.asarray(n, dtype=float)
    if space is SpaceTag.BERGMAN:
        return 0.5 * np.log1p(n)
    return -0.5 * (n * math.log(2.0) + gammaln(n + 1))


def basis_matrix(space, z, N, log_weight=None):
    """Rows ``exp(log_weight / 2) * (e_0(z), ..., e_{N-1}(z))`` for each ``z``.

    Evaluated in log space, so large degrees at large ``|z|`` only overflow
    when the value itself is not representable.
    """
    space = SpaceTag(space)
    z = np.asarray(z, dtype=complex).ravel()
    n = np.arange(N)
    logc = _log_norm(space, n)
    r = np.abs(z)
    lw = np.zeros(len(z)) if log_weight is None else 0.5 * np.asarray(log_weight, dtype=float).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(r)
        # 0 ** 0 = 1: the log of r^n at r = 0 is 0 for n = 0 and -inf otherwise
        logmag = np.where(n[None, :] == 0, 0.0, n[None, :] * logr[:, None]) + logc[None, :] + lw[:, None]
    if np.any(logmag > 709.0):
        raise OverflowError("basis value exceeds the double range")
    phase = np.exp(1j * np.outer(np.angle(z), n))
    return np.exp(logmag) * phase


def basis_eval(space, n, z):
    """``e_n(z)``.

    Examples
    --------
    >>> round(abs(basis_eval("fock", 2, 2.0)), 6)
    1.414214
    """
    space = SpaceTag(space)
    if space is SpaceTag.BERGMAN:
        _check_disk(z)
    if n < 0:
        raise DomainError("n must be nonnegative")
    return complex(basis_matrix(space, [z], n + 1)[0, n])


# -- matrices ----------------------------------------------------------------


@dataclass
class HermitianMatrix:
    """``M[m, n] = <T_mu e_n, e_m>`` with the factor it was assembled from."""

    entries: np.ndarray
    space: SpaceTag
    provenance: dict = field(default_factory=dict)
    factor: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.space = SpaceTag(self.space)
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("entries must be a square matrix")
        self.entries = a

    @property
    def size(self):
        return self.entries.shape[0]

    def hermitian_defect(self):
        a = self.entries
        return float(np.max(np.abs(a - a.conj().T), initial=0.0))

    def leading(self, n) -> "HermitianMatrix":
        """The compression to degrees below ``n``; nested compressions share one factor."""
        f = None if self.factor is None else self.factor[:, :n]
        return HermitianMatrix(self.entries[:n, :n], self.space, dict(self.provenance, size=n), f)

    def to_json(self):
        return {
            "space": self.space.value,
            "size": self.size,
            "provenance": self.provenance,
            "entries_re": self.entries.real.tolist(),
            "entries_im": self.entries.imag.tolist(),
        }


def _gram(V):
    M = V.conj().T @ V
    return 0.5 * (M + M.conj().T)


def _fock_outer_radius(N, sup, tol):
    """Smallest radius beyond which every ``|e_n|^2`` term (``n < N``) has mass ``< tol``."""
    T = math.sqrt(2.0 * N) + 1.0
    while gammaincc(N, T * T / 2) * max(sup, 1.0) > tol:
        T += 0.5
    return T


def _quadrature_factor(mu, N, spec):
    if isinstance(mu, PullBack):
        k = mu.degree
        nr = max(spec.radial_nodes, (k * (N - 1)) // 2 + 2)
        na = max(spec.angular_nodes, 2 * k * (N - 1) + 2)
        nodes, w = polar_rule(0.0, 0.0, 1.0, nr, na)
        return basis_matrix(mu.space, mu.phi(nodes), N, np.log(w))
    if mu.space is SpaceTag.BERGMAN:
        nr = max(spec.radial_nodes, N + 8)
        na = max(spec.angular_nodes, 2 * N + 8)
        nodes, w = polar_rule(0.0, 0.0, 1.0, nr, na)
        dens = mu.density(nodes)
        with np.errstate(divide="ignore"):
            return basis_matrix(mu.space, nodes, N, np.log(w * dens))
    T = spec.outer_radius or _fock_outer_radius(N, mu.density_sup(), spec.tolerance)
    nr = max(spec.radial_nodes, 2 * N + 32)
    na = max(spec.angular_nodes, 2 * N + 8)
    nodes, w = polar_rule(0.0, 0.0, T, nr, na)
    dens = mu.density(nodes)
    with np.errstate(divide="ignore"):
        lw = np.log(0.5 * w * dens) - np.abs(nodes) ** 2 / 2
    return basis_matrix(mu.space, nodes, N, lw)


def _atomic_factor(mu: Atomic, N):
    if len(mu) == 0:
        return np.zeros((0, N), dtype=complex)
    lw = np.log(mu.weights)
    if mu.space is SpaceTag.FOCK:
        t = mu.truncation
        need = math.sqrt(2.0 * N) + FOCK_WINDOW_PAD
        if t is not None and t.kind == "square" and t.extent < need:
            raise TruncationError(
                f"square window half-width {t.extent:g} is below sqrt(2N) + {FOCK_WINDOW_PAD:g} = {need:.3f} for N = {N}"
            )
        lw = lw + math.log(0.5) - np.abs(mu.points) ** 2 / 2
    return basis_matrix(mu.space, mu.points, N, lw)


def toeplitz_matrix(mu: Measure, N, quad: QuadratureSpec = DEFAULT_QUAD) -> HermitianMatrix:
    """Compression of ``T_mu`` to ``span{e_0, ..., e_{N-1}}``.

    Atomic measures give exact finite sums (no quadrature).  Otherwise the
    quadrature is rerun with doubled nodes when ``quad.check`` is set, and an
    :class:`AccuracyWarning` is issued if any entry moves by ``quad.tolerance``
    or more.
    """
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    prov = {"measure": _describe(mu), "size": N}
    if isinstance(mu, Atomic):
        V = _atomic_factor(mu, N)
        prov["method"] = "exact atomic sum"
        prov["atoms"] = len(mu)
        return HermitianMatrix(_gram(V), mu.space, prov, V)
    if not isinstance(mu, (AbsolutelyContinuous, PullBack)):
        raise AdmissibilityError(f"unsupported measure {type(mu).__name__}")
    V = _quadrature_factor(mu, N, quad)
    M = _gram(V)
    prov["method"] = "quadrature"
    if quad.check:
        V2 = _quadrature_factor(mu, N, quad.refined())
        M2 = _gram(V2)
        err = float(np.max(np.abs(M2 - M)))
        prov["error_estimate"] = err
        if err >= quad.tolerance:
            warnings.warn(
                f"matrix entries moved by {err:.3g} under node doubling (tolerance {quad.tolerance:.3g})",
                AccuracyWarning,
                stacklevel=2,
            )
        V, M = V2, M2
    return HermitianMatrix(M, mu.space, prov, V)


def _describe(mu):
    if isinstance(mu, Atomic):
        return {"kind": "atomic", "space": mu.space.value, "label": mu.label, "atoms": len(mu)}
    try:
        return mu.to_json()
    except NotImplementedError:
        return {"kind": type(mu).__name__}


def spectral_bounds(mat: HermitianMatrix):
    """``(lambda_min, lambda_max)`` of a compression.

    With a factor ``V`` (``M = V^H V``) these are the squared extreme singular
    values of ``V``; otherwise a dense Hermitian eigensolve is used.

    Raises
    ------
    ValueError
        If the matrix is not Hermitian to ``1e-12`` (relative to its size).
    """
    scale = max(1.0, float(np.max(np.abs(mat.entries), initial=0.0)))
    if mat.hermitian_defect() > HERMITIAN_TOL * scale:
        raise ValueError(f"matrix is not Hermitian (defect {mat.hermitian_defect():.3g})")
    n = mat.size
    if mat.factor is not None:
        V = mat.factor
        if V.shape[0] == 0:
            return 0.0, 0.0
        s = np.linalg.svd(V, compute_uv=False)
        lmax = float(s[0] ** 2)
        lmin = float(s[-1] ** 2) if V.shape[0] >= n else 0.0
        return lmin, lmax
    ev = np.linalg.eigvalsh(mat.entries)
    return float(ev[0]), float(ev[-1])


# -- invertibility profile ---------------------------------------------------


PROFILE_NOTE = (
    "lambda_min at degree d is the smallest eigenvalue of the compression to polynomials of "
    "degree <= d (matrix size d + 1); it decreases to the infimum of <T f, f>/||f||^2 over "
    "polynomials, which is the bottom of the spectrum of T. Decay towards 0 indicates "
    "non-invertibility; a positive floor indicates coercivity on polynomial subspaces."
)


@dataclass
class SpectralProfile:
    degrees: list
    lambda_min: list
    lambda_max: list
    provenance: dict = field(default_factory=dict)
    note: str = PROFILE_NOTE

    def ratios(self):
        """``lambda_min(d) / lambda_min(d_first)`` for every degree."""
        a = self.lambda_min[0]
        return [x / a if a > 0 else math.nan for x in self.lambda_min]

    def to_json(self):
        return {
            "degrees": list(self.degrees),
            "lambda_min": list(self.lambda_min),
            "lambda_max": list(self.lambda_max),
            "provenance": self.provenance,
            "note": self.note,
        }

    @classmethod
    def from_json(cls, d):
        return cls(d["degrees"], d["lambda_min"], d["lambda_max"], d.get("provenance", {}), d.get("note", PROFILE_NOTE))

    def csv_rows(self):
        yield ("degree", "lambda_min", "lambda_max")
        yield from zip(self.degrees, self.lambda_min, self.lambda_max)


def invertibility_profile(mu: Measure, degrees, quad: QuadratureSpec = DEFAULT_QUAD) -> SpectralProfile:
    """Extreme eigenvalues of the nested compressions to degree ``<= d`` for each ``d``.

    Raises
    ------
    ArithmeticError
        If the computed ``lambda_min`` increases or ``lambda_max`` decreases
        beyond rounding, which interlacing forbids.
    """
    degrees = [int(d) for d in degrees]
    if not degrees or any(d < 0 for d in degrees) or any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise DomainError("degrees must be nonnegative and strictly increasing")
    big = toeplitz_matrix(mu, degrees[-1] + 1, quad)
    if big.factor is not None and big.provenance.get("method") == "quadrature" and big.factor.shape[0] > big.size:
        # V = QR with R upper triangular, so V[:, :k] and R[:k, :k] share their singular values
        big.factor = np.linalg.qr(big.factor, mode="r")
    lmin, lmax = [], []
    for d in degrees:
        lo, hi = spectral_bounds(big.leading(d + 1))
        lmin.append(lo)
        lmax.append(hi)
    for a, b in zip(lmin, lmin[1:]):
        if b > a + 1e-12 * max(1.0, lmax[-1]):
            raise ArithmeticError(f"lambda_min increased from {a:.6g} to {b:.6g}; interlacing violated")
    for a, b in zip(lmax, lmax[1:]):
        if b < a - 1e-12 * max(1.0, lmax[-1]):
            raise ArithmeticError(f"lambda_max decreased from {a:.6g} to {b:.6g}; interlacing violated")
    prov = dict(big.provenance)
    prov["size_convention"] = "degree d -> matrix size d + 1"
    return SpectralProfile(degrees, lmin, lmax, prov)


# -- composition operators ---------------------------------------------------


def _taylor(phi):
    if isinstance(phi, PullBack):
        return phi
    return PullBack(tuple(complex(c) for c in phi))


def composition_matrix(phi, N, rows=None, quad: QuadratureSpec = DEFAULT_QUAD):
    """``C[k, n] = <e_n o phi, e_k>`` for ``k < rows`` and ``n < N`` (Bergman space).

    ``phi`` is a :class:`PullBack` or a Taylor coefficient list of a
    polynomial self-map.  Entries are exact: ``e_n o phi = sqrt(n + 1) phi^n``
    and the powers are expanded by repeated convolution, so
    ``C[k, n] = sqrt(n + 1) [phi^n]_k / sqrt(k + 1)``.  ``rows`` defaults to
    ``N``; ``deg(phi) (N - 1) + 1`` rows hold every nonzero entry.
    """
    pb = _taylor(phi)
    N = int(N)
    rows = N if rows is None else int(rows)
    c = np.asarray(pb.taylor, dtype=complex)
    C = np.zeros((rows, N), dtype=complex)
    power = np.array([1.0 + 0j])
    for n in range(N):
        if n > 0:
            power = np.convolve(power, c)
        m = min(rows, len(power))
        C[:m, n] = math.sqrt(n + 1) * power[:m] / np.sqrt(np.arange(1, m + 1))
    return C


def pullback_identity_residual(phi, N, quad: QuadratureSpec = DEFAULT_QUAD, max_rows=100_000, tol=1e-14):
    """``max |C^H C - M(T_{mu_phi})|`` over the ``N x N`` block.

    ``C`` is taken with enough rows that the neglected tail of every column
    is below ``tol``; for a polynomial map that is ``deg(phi) (N - 1) + 1``
    rows and the tail is exactly zero.  ``M`` comes independently from the
    pull-back integral ``int (e_n o phi) conj(e_m o phi) dA``.

    Raises
    ------
    TruncationError
        If more than ``max_rows`` rows would be needed.
    """
    pb = _taylor(phi)
    need = pb.degree * (int(N) - 1) + 1
    if need > max_rows:
        raise TruncationError(f"{need} rows needed for an exact tail; max_rows = {max_rows}")
    C = composition_matrix(pb, N, rows=need)
    M = toeplitz_matrix(pb, N, quad).entries
    return float(np.max(np.abs(C.conj().T @ C - M)))


def berezin_vs_form_check(mu: Measure, probes, N, quad: QuadratureSpec = DEFAULT_QUAD):
    """``max |<M k, k> / ||k||^2 - mu~(z)|`` over probes, with ``k`` the degree-``N`` kernel truncation.

    The truncated kernel at ``z`` has coefficients ``conj(e_n(z))``.
    """
    probes = np.atleast_1d(np.asarray(probes, dtype=complex))
    M = toeplitz_matrix(mu, N, quad).entries
    B = basis_matrix(mu.space, probes, N)
    c = B.conj()
    form = np.einsum("pi,ij,pj->p", c.conj(), M, c).real / np.sum(np.abs(c) ** 2, axis=1)
    ber = np.atleast_1d(berezin_transform(mu, probes, quad))
    return float(np.max(np.abs(form - ber)))
