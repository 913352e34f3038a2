"""Positive measures on the disk or the plane: the symbols of Toeplitz operators.

Three kinds are supported: absolutely continuous (``density * dA``), atomic
(finite weighted point masses) and pull-backs ``A o phi^{-1}`` of area measure
under an analytic self-map given by Taylor coefficients.  A pull-back is never
turned into a density; every functional is routed through ``f o phi``.

Fock-space atomic weights are stored unnormalized.  The factor
``exp(-|w|^2/2) / 2`` is applied by the operators that need it.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .errors import AdmissibilityError, DomainError, TruncationError
from .geometry import BOUNDARY_MARGIN, EuclideanDisk, PseudoDisk, beta_from_origin
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate_annulus, integrate_disk, integrate_plane_gaussian


class SpaceTag(str, enum.Enum):
    BERGMAN = "bergman"
    FOCK = "fock"


def _validation_grid(space, n_radii=40, n_angles=64):
    if space is SpaceTag.BERGMAN:
        r = np.linspace(0.0, 0.999, n_radii)
    else:
        r = np.linspace(0.0, 30.0, n_radii)
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    return (r[:, None] * np.exp(1j * t)[None, :]).ravel()


# -- densities ---------------------------------------------------------------


def _one(z):
    return np.ones(np.shape(z))


def _one_minus_abs2(power=1.0):
    return lambda z: np.clip(1.0 - np.abs(z) ** 2, 0.0, None) ** power


def _abs2_power(power=1.0):
    return lambda z: np.abs(z) ** (2 * power)


def _indicator_disk(center_re=0.0, center_im=0.0, radius=0.5):
    c = complex(center_re, center_im)
    return lambda z: (np.abs(z - c) < radius).astype(float)


def _indicator_annulus(inner=0.5, outer=1.0):
    return lambda z: ((np.abs(z) >= inner) & (np.abs(z) < outer)).astype(float)


DENSITIES = {
    "one": lambda: _one,
    "one_minus_abs2": _one_minus_abs2,
    "abs2_power": _abs2_power,
    "indicator_disk": _indicator_disk,
    "indicator_annulus": _indicator_annulus,
}


@dataclass(frozen=True)
class Density:
    """A named builtin density; ``params`` are keyword arguments of its factory."""

    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in DENSITIES:
            raise ValueError(f"unknown density {self.name!r}; known: {sorted(DENSITIES)}")
        object.__setattr__(self, "_func", DENSITIES[self.name](**dict(self.params)))

    def __call__(self, z):
        return self._func(np.asarray(z))

    def to_json(self):
        if not self.params:
            return self.name
        return {"name": self.name, **dict(self.params)}


def density(name, **params) -> Density:
    return Density(name, tuple(sorted(params.items())))


# -- truncation metadata -----------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    """Finite window of an atomic measure sampled from an infinite configuration.

    ``kind == "square"``: atoms fill ``max(|Re|, |Im|) <= extent``; queries must
    keep ``margin`` away from the edge.  ``kind == "rings"``: queries must lie in
    the certified covering region ``beta(0, z) <= extent``.
    """

    kind: str
    extent: float
    margin: float = 0.0
    note: str = ""

    def admits(self, z, margin=0.0):
        """``margin`` adds to the stored margin (e.g. the radius of a query ball)."""
        z = np.asarray(z, dtype=complex)
        m = self.margin + margin
        if self.kind == "square":
            return np.maximum(np.abs(z.real), np.abs(z.imag)) + m <= self.extent + 1e-12
        if self.kind == "rings":
            return beta_from_origin(z) + m <= self.extent + 1e-12
        raise ValueError(f"unknown truncation kind {self.kind!r}")

    def require(self, z, what="query", margin=0.0):
        ok = self.admits(z, margin)
        if not np.all(ok):
            bad = np.asarray(z).ravel()[~np.asarray(ok).ravel()][0]
            raise TruncationError(
                f"{what} point {complex(bad)!r} violates the truncation margin "
                f"({self.kind} window, extent {self.extent:g}, margin {self.margin + margin:g})"
            )

    def to_json(self):
        return {"kind": self.kind, "extent": self.extent, "margin": self.margin}


# -- measures ----------------------------------------------------------------


def _region_for(space, region):
    if space is SpaceTag.BERGMAN and not isinstance(region, PseudoDisk):
        raise DomainError("Bergman measures take PseudoDisk regions")
    if space is SpaceTag.FOCK and not isinstance(region, EuclideanDisk):
        raise DomainError("Fock measures take EuclideanDisk regions")
    if isinstance(region, PseudoDisk):
        return region.center_euc, region.radius_euc
    return region.center, region.radius


class Measure:
    """Common interface; see the concrete subclasses."""

    space: SpaceTag
    truncation: Truncation | None = None

    def integrate(self, f, quad: QuadratureSpec = DEFAULT_QUAD, decay: float = 0.5):
        raise NotImplementedError

    def mass_in(self, region, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def check_region(self, z, what="query", margin=0.0):
        if self.truncation is not None:
            self.truncation.require(z, what, margin)


@dataclass(frozen=True, eq=False)
class AbsolutelyContinuous(Measure):
    space: SpaceTag
    density: Density
    truncation: Truncation | None = None

    def __post_init__(self):
        object.__setattr__(self, "space", SpaceTag(self.space))
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = self.density(_validation_grid(self.space))
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise DomainError(f"density {self.density.name!r} is negative or non-finite on the validation grid")

    def density_sup(self) -> float:
        return float(np.max(self.density(_validation_grid(self.space, 200, 128))))

    def integrate(self, f, quad=DEFAULT_QUAD, decay=0.5, center=0.0):
        """``int f * density dA``; for Fock measures ``f`` must decay like ``exp(-decay |w-center|^2)``."""
        g = lambda w: f(w) * self.density(w)
        if self.space is SpaceTag.BERGMAN:
            return integrate_disk(g, quad)
        return integrate_plane_gaussian(g, quad, decay=decay, center=center)

    def mass_in(self, region, quad=DEFAULT_QUAD):
        c, s = _region_for(self.space, region)
        return float(integrate_annulus(self.density, c, 0.0, s, quad).real)

    def to_json(self):
        return {"space": self.space.value, "kind": "ac", "density": self.density.to_json()}


@dataclass(frozen=True, eq=False)
class Atomic(Measure):
    """``sum_k weights[k] * delta_{points[k]}``.

    Atoms are stored in a canonical order (lexicographic in real part,
    imaginary part, weight) so every assembled quantity is independent of the
    order in which atoms were supplied.
    """

    space: SpaceTag
    points: np.ndarray
    weights: np.ndarray
    truncation: Truncation | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "space", SpaceTag(self.space))
        p = np.asarray(self.points, dtype=complex).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if p.shape != w.shape:
            raise ValueError("points and weights must have the same length")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("atomic weights must be strictly positive and finite")
        if np.any(~np.isfinite(p)):
            raise DomainError("atomic points must be finite")
        if self.space is SpaceTag.BERGMAN and np.any(np.abs(p) >= 1.0 - BOUNDARY_MARGIN):
            raise DomainError("Bergman atoms must lie in the open unit disk")
        order = np.lexsort((w, p.imag, p.real))
        p, w = p[order], w[order]
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.points)

    def scaled(self, factor) -> "Atomic":
        return Atomic(self.space, self.points, self.weights * factor, self.truncation, self.label)

    def integrate(self, f, quad=DEFAULT_QUAD, decay=0.5, center=0.0):
        if len(self.points) == 0:
            return 0j
        vals = np.asarray(f(self.points), dtype=complex)
        return complex(math.fsum((self.weights * vals.real).tolist()) + 1j * math.fsum((self.weights * vals.imag).tolist()))

    def mass_in(self, region, quad=DEFAULT_QUAD):
        _region_for(self.space, region)
        if len(self.points) == 0:
            return 0.0
        return math.fsum(self.weights[region.contains(self.points)].tolist())

    def to_json(self):
        out = {
            "space": self.space.value,
            "kind": "atomic",
            "atoms": [[float(p.real), float(p.imag), float(w)] for p, w in zip(self.points, self.weights)],
        }
        return out


@dataclass(frozen=True, eq=False)
class PullBack(Measure):
    """Pull-back ``mu_phi(E) = A(phi^{-1}(E))`` for a polynomial self-map ``phi``.

    ``taylor`` holds the coefficients ``c0, c1, ...`` of ``phi``; a truncated
    Taylor series is therefore handled exactly as the polynomial it is.
    """

    taylor: np.ndarray
    space: SpaceTag = SpaceTag.BERGMAN
    truncation: Truncation | None = None

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.taylor, dtype=complex).ravel(), "b")
        object.__setattr__(self, "space", SpaceTag(self.space))
        if self.space is not SpaceTag.BERGMAN:
            raise AdmissibilityError("pull-back measures are defined on the Bergman space only")
        if len(c) < 2:
            raise AdmissibilityError("pull-back requires a non-constant self-map")
        c.setflags(write=False)
        object.__setattr__(self, "taylor", c)
        sup = float(np.max(np.abs(self.phi(_validation_grid(SpaceTag.BERGMAN, 200, 256)))))
        if not sup < 1.0:
            raise DomainError(f"Taylor polynomial is not a self-map of the disk (sup |phi| = {sup:.6g} on validation grid)")
        object.__setattr__(self, "validated_sup", sup)

    @classmethod
    def monomial(cls, k, scale=1.0):
        c = np.zeros(k + 1, dtype=complex)
        c[k] = scale
        return cls(c)

    @classmethod
    def mobius(cls, a, degree=None):
        """Truncated Taylor series of ``(a - z) / (1 - conj(a) z)``.

        The default degree brings the neglected coefficients below ``1e-17``.
        """
        a = complex(a)
        if degree is None:
            degree = 1 if a == 0 else int(math.ceil(math.log(1e-17) / math.log(abs(a)))) + 1
        k = np.arange(1, degree + 1)
        c = np.empty(degree + 1, dtype=complex)
        c[0] = a
        c[1:] = -(1 - abs(a) ** 2) * np.conj(a) ** (k - 1)
        return cls(c)

    @property
    def degree(self) -> int:
        return len(self.taylor) - 1

    def phi(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.taylor)

    def _composed(self, f):
        def g(w):
            v = self.phi(w)
            if np.any(np.abs(v) >= 1.0):
                raise DomainError("self-map left the disk at a quadrature node")
            return f(v)

        return g

    def integrate(self, f, quad=DEFAULT_QUAD, decay=0.5, center=0.0):
        return integrate_disk(self._composed(f), quad)

    def mass_in(self, region, quad=DEFAULT_QUAD):
        """Approximate ``A(phi^{-1}(region))``; the indicator is discontinuous, so accuracy is limited to about 1e-4."""
        _region_for(self.space, region)
        fine = QuadratureSpec(radial_nodes=max(quad.radial_nodes, 256), angular_nodes=max(quad.angular_nodes, 1024), check=False)
        return float(integrate_disk(self._composed(lambda v: region.contains(v).astype(float)), fine).real)

    def to_json(self):
        taylor = [c.real if c.imag == 0 else [c.real, c.imag] for c in self.taylor]
        return {"space": "bergman", "kind": "pullback", "taylor": [float(t) if not isinstance(t, list) else t for t in taylor]}


def lebesgue(space) -> AbsolutelyContinuous:
    """Area measure ``dA`` on the disk or the plane (the symbol of the identity)."""
    return AbsolutelyContinuous(SpaceTag(space), density("one"))


# -- condition (M) -----------------------------------------------------------


@dataclass
class ConditionMReport:
    probes: list
    values: list
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and all(math.isfinite(v) for v in self.values)

    def to_json(self):
        return {
            "probes": [[p.real, p.imag] for p in self.probes],
            "values": self.values,
            "failures": self.failures,
            "passed": self.passed,
        }


def condition_m_check(mu: Measure, probes, quad: QuadratureSpec = DEFAULT_QUAD) -> ConditionMReport:
    """Evaluate ``int |K_z(w)|^2 exp(-|w|^2/2) dmu(w)`` at each probe ``z``.

    ``|K_z(w)|^2 exp(-|w|^2/2) = exp(Re(conj(z) w) - |w|^2/2)``.
    """
    if mu.space is not SpaceTag.FOCK:
        raise AdmissibilityError("condition (M) concerns Fock-space measures")
    probes = [complex(z) for z in np.atleast_1d(probes)]
    values, failures = [], []
    for z in probes:
        if isinstance(mu, Atomic):
            expo = (np.conj(z) * mu.points).real - np.abs(mu.points) ** 2 / 2
            top = float(np.max(expo)) if len(expo) else 0.0
            if top > 700:
                values.append(math.inf)
                failures.append({"probe": [z.real, z.imag], "reason": "overflow"})
                continue
            v = math.fsum((mu.weights * np.exp(expo)).tolist())
        elif isinstance(mu, AbsolutelyContinuous):
            # exp(Re(conj z w) - |w|^2/2) = exp(|z|^2/2) exp(-|w - z|^2/2)
            if abs(z) ** 2 / 2 > 700:
                values.append(math.inf)
                failures.append({"probe": [z.real, z.imag], "reason": "overflow"})
                continue
            g = lambda w, z=z: np.exp(-np.abs(w - z) ** 2 / 2)
            v = math.exp(abs(z) ** 2 / 2) * mu.integrate(g, quad, decay=0.5, center=z).real
        else:
            raise AdmissibilityError(f"unsupported measure kind {type(mu).__name__}")
        if not math.isfinite(v):
            failures.append({"probe": [z.real, z.imag], "reason": "non-finite"})
        values.append(v)
    return ConditionMReport(probes, values, failures)


# -- JSON ingestion ----------------------------------------------------------

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}

MEASURE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "space": {"enum": ["bergman", "fock"]},
        "kind": {"enum": ["ac", "atomic", "pullback"]},
        "density": {
            "oneOf": [
                {"enum": sorted(DENSITIES)},
                {
                    "type": "object",
                    "required": ["name"],
                    "properties": {"name": {"enum": sorted(DENSITIES)}},
                    "additionalProperties": _number,
                },
            ]
        },
        "atoms": {"type": "array", "items": {"type": "array", "items": _number, "minItems": 3, "maxItems": 3}},
        "taylor": {"type": "array", "items": _complex, "minItems": 2},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "ac"}}}, "then": {"required": ["density"], "not": {"anyOf": [{"required": ["atoms"]}, {"required": ["taylor"]}]}}},
        {"if": {"properties": {"kind": {"const": "atomic"}}}, "then": {"required": ["atoms"], "not": {"anyOf": [{"required": ["density"]}, {"required": ["taylor"]}]}}},
        {"if": {"properties": {"kind": {"const": "pullback"}}}, "then": {"required": ["taylor"], "not": {"anyOf": [{"required": ["density"]}, {"required": ["atoms"]}]}}},
    ],
}


class MeasureSpecError(ValueError):
    """Invalid measure JSON; ``pointer`` is the JSON pointer of the offending value."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def measure_from_json(spec, space=None) -> Measure:
    """Build a measure from its JSON description (a dict or a JSON string).

    ``space`` supplies the space when the document omits it; a conflicting
    value is an error.
    """
    if isinstance(spec, (str, bytes)):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise MeasureSpecError(f"invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(MEASURE_SCHEMA)
    errors = sorted(validator.iter_errors(spec), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise MeasureSpecError(err.message, pointer)
    doc_space = spec.get("space")
    if doc_space and space and SpaceTag(doc_space) is not SpaceTag(space):
        raise MeasureSpecError(f"space {doc_space!r} conflicts with requested {SpaceTag(space).value!r}", "/space")
    chosen = SpaceTag(doc_space or space or "bergman")
    kind = spec["kind"]
    if kind == "ac":
        d = spec["density"]
        dens = density(d) if isinstance(d, str) else density(d["name"], **{k: v for k, v in d.items() if k != "name"})
        return AbsolutelyContinuous(chosen, dens)
    if kind == "atomic":
        atoms = np.asarray(spec["atoms"], dtype=float).reshape(-1, 3)
        return Atomic(chosen, atoms[:, 0] + 1j * atoms[:, 1], atoms[:, 2])
    if chosen is not SpaceTag.BERGMAN:
        raise MeasureSpecError("pull-back measures require space 'bergman'", "/space")
    coeffs = [complex(*c) if isinstance(c, list) else complex(c) for c in spec["taylor"]]
    return PullBack(np.array(coeffs))
