"""Point configurations: square lattices in the plane and ring lattices in the disk.

Every sequence carries its separation and covering constants together with the
finite region on which the covering claim was checked.  Ring lattices are
certified at construction; an uncertified sequence is never returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .errors import CertificationError, DomainError
from .geometry import beta, one_minus_rho_sq, pseudo_disk, rho
from .grids import BoxGrid, PolarGrid, fundamental_cell
from .measure import Atomic, SpaceTag, Truncation

SEPARATION_SLACK = 1e-9
FOCK_THRESHOLD = math.sqrt(2 * math.pi)
FOCK_MARGIN = 5.0


@dataclass(frozen=True)
class Ring:
    beta_radius: float
    count: int
    offset: float


@dataclass(eq=False)
class PointSequence:
    """Finite window of a point configuration, with its certified constants.

    ``separation`` and ``covering_radius`` are in the space's metric: the
    pseudo-hyperbolic distance for Bergman sequences, Euclidean for Fock.
    """

    space: SpaceTag
    points: np.ndarray
    metric: str
    separation: float | None = None
    covering_radius: float | None = None
    coverage: dict | None = None
    truncation: Truncation | None = None
    rings: tuple = ()
    R: float | None = None
    separation_beta: float | None = None
    covering_beta: float | None = None
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def certified(self) -> bool:
        return self.separation is not None and self.covering_radius is not None

    def to_measure_json(self, weights=None) -> dict:
        """Serialize as the atomic branch of the measure JSON schema."""
        if weights is None:
            weights = lattice_weights(self)
        return {
            "space": self.space.value,
            "kind": "atomic",
            "atoms": [[float(p.real), float(p.imag), float(w)] for p, w in zip(self.points, weights)],
        }

    def summary(self) -> dict:
        out = {
            "space": self.space.value,
            "metric": self.metric,
            "count": len(self.points),
            "separation": self.separation,
            "covering_radius": self.covering_radius,
            "coverage": self.coverage,
            "truncation": self.truncation.to_json() if self.truncation else None,
        }
        if self.rings:
            out["R"] = self.R
            out["separation_beta"] = self.separation_beta
            out["covering_beta"] = self.covering_beta
            out["ring_counts"] = [r.count for r in self.rings]
        return out


def from_points(space, points, truncation=None) -> PointSequence:
    """Wrap an explicit finite point set; constants are left for the caller to compute."""
    space = SpaceTag(space)
    pts = np.asarray(points, dtype=complex).ravel()
    if len(np.unique(pts)) != len(pts):
        raise DomainError("points must be pairwise distinct")
    metric = "rho" if space is SpaceTag.BERGMAN else "euclidean"
    return PointSequence(space, pts, metric, truncation=truncation)


# -- square lattice ----------------------------------------------------------


def square_lattice(r, window) -> PointSequence:
    """``{r (m + i n) : |m|, |n| <= window}`` with computed constants.

    The covering radius is measured over one fundamental cell in the window
    interior; by translation invariance it holds on the whole interior.
    """
    if not r > 0:
        raise DomainError("lattice spacing must be positive")
    M = int(window)
    if M < 1:
        raise DomainError("window must be at least 1")
    m = np.arange(-M, M + 1)
    pts = (r * (m[None, :] + 1j * m[:, None])).ravel()
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    sep = float(tree.query(np.column_stack([pts.real, pts.imag]), k=2)[0][:, 1].min())
    cell = fundamental_cell(r, 101).points()
    cov = float(tree.query(np.column_stack([cell.real, cell.imag]))[0].max())
    return PointSequence(
        SpaceTag.FOCK,
        pts,
        "euclidean",
        separation=sep,
        covering_radius=cov,
        coverage={"type": "fundamental_cell", "side": r},
        truncation=Truncation("square", M * r, FOCK_MARGIN, note=f"square window |m|,|n| <= {M}"),
        info={"r": r, "window": M},
    )


# -- ring lattice in the disk ------------------------------------------------


def _ring_count(R, j):
    """Largest count whose angular neighbours on ring ``j`` stay ``R/2`` apart in beta.

    Two points at Bergman radius ``t = jR/2`` separated by angle ``theta`` are
    ``R/2`` apart exactly when ``sin(theta/2) = sinh(R/2) / sinh(jR)``.
    """
    if j == 0:
        return 1
    q = math.sinh(R / 2) / math.sinh(j * R)
    n = max(1, int(math.floor(math.pi / math.asin(q))))
    s = math.tanh(j * R / 2)
    while n > 1 and beta(s, s * np.exp(2j * np.pi / n)) < R / 2 - SEPARATION_SLACK:
        n -= 1
    return n


def ring_points(rings):
    out = []
    for ring in rings:
        s = math.tanh(ring.beta_radius)
        out.append(s * np.exp(1j * (ring.offset + 2 * np.pi * np.arange(ring.count) / ring.count)))
    return np.concatenate(out)


def nearest_ring_distance(rings, z):
    """Bergman distance from each ``z`` to the nearest ring-lattice point.

    On a circle centred at 0 the distance to ``z`` increases with the angular
    gap, so the nearest point of each ring is one of its two angular neighbours.
    """
    z = np.asarray(z, dtype=complex).ravel()
    theta = np.angle(z)
    best = np.full(z.shape, np.inf)
    for ring in rings:
        s = math.tanh(ring.beta_radius)
        step = 2 * np.pi / ring.count
        k0 = np.floor((theta - ring.offset) / step)
        for dk in (0.0, 1.0):
            ang = ring.offset + (k0 + dk) * step
            best = np.minimum(best, beta(z, s * np.exp(1j * ang)))
    return best


def _ring_separation(rings):
    """Exact minimum pairwise beta distance for a ring configuration."""
    sep = np.inf
    for ring in rings:
        if ring.count > 1:
            s = math.tanh(ring.beta_radius)
            sep = min(sep, float(beta(s, s * np.exp(2j * np.pi / ring.count))))
    for a, b in zip(rings[:-1], rings[1:]):
        pa = ring_points([a])
        sep = min(sep, float(nearest_ring_distance([b], pa).min()))
    # non-adjacent rings are at least R apart radially, hence in beta
    return sep


def hyperbolic_lattice(R, max_rings, mesh=None) -> PointSequence:
    """Certified ring lattice: rings ``j = 0 .. max_rings - 1`` at Bergman radius ``jR/2``.

    Ring ``j`` holds the largest number of equally spaced points that keeps
    angular neighbours ``R/2`` apart; odd rings are rotated by half a step.
    The construction then checks beta-separation ``>= R/2`` exactly and
    beta-covering ``<= R`` over ``{beta(0, z) <= max_rings R/2 - R}``.

    The covering bound is rigorous: the maximum distance to the lattice over a
    polar grid whose beta-mesh is at most ``mesh`` (default ``R/8``), plus that
    mesh.

    Raises
    ------
    CertificationError
        If either check fails.
    """
    if not R > 0:
        raise DomainError("R must be positive")
    K = int(max_rings)
    if K < 1:
        raise DomainError("max_rings must be at least 1")
    rings = []
    for j in range(K):
        n = _ring_count(R, j)
        rings.append(Ring(j * R / 2, n, (j % 2) * np.pi / n if n > 1 else 0.0))
    rings = tuple(rings)
    pts = ring_points(rings)

    sep_b = _ring_separation(rings) if len(pts) > 1 else np.inf
    if sep_b < R / 2 - SEPARATION_SLACK:
        raise CertificationError(f"beta-separation {sep_b:.12g} < R/2 = {R / 2:g}")

    region_beta = max(K * R / 2 - R, 0.0)
    h = R / 8 if mesh is None else float(mesh)
    grid_cov, mesh_bound, n_grid = _certify_covering(rings, R, region_beta, h)
    cov_b = grid_cov + mesh_bound
    if cov_b > R:
        raise CertificationError(f"beta-covering {cov_b:.6g} > R = {R:g} on beta(0,z) <= {region_beta:g}")

    return PointSequence(
        SpaceTag.BERGMAN,
        pts,
        "rho",
        separation=math.tanh(sep_b) if np.isfinite(sep_b) else 1.0,
        covering_radius=math.tanh(cov_b),
        coverage={"type": "beta_ball", "beta_radius": region_beta, "mesh_beta": mesh_bound, "grid_points": n_grid},
        truncation=Truncation("rings", region_beta, 0.0, note=f"{K} rings, outermost at beta = {(K - 1) * R / 2:g}"),
        rings=rings,
        R=float(R),
        separation_beta=float(sep_b),
        covering_beta=cov_b,
        info={"max_rings": K, "grid_covering_beta": grid_cov, "grid_mesh_beta": mesh_bound},
    )


def _certify_covering(rings, R, region_beta, h):
    """Grid maximum of the distance to the lattice, and the grid's mesh bound.

    Circles are uniform in beta with at most ``h/2`` between neighbours; each
    circle gets enough angles that its nodes are within ``h/2`` of every point
    on it.  Any point of the region is then within ``mesh <= h`` of a node.
    Only rings whose radius is within ``2R`` of the circle are searched, which
    can only over-estimate the distance.
    """
    if region_beta <= 0:
        return float(nearest_ring_distance(rings, [0j]).max()), 0.0, 1
    n_rad = max(16, math.ceil(region_beta / h) + 1)
    radii = np.linspace(0.0, region_beta, n_rad)
    half_step = 0.5 * region_beta / (n_rad - 1)
    worst, chord_max, count = 0.0, 0.0, 0
    for t in radii:
        s = math.tanh(t)
        if t == 0.0:
            g, chord = np.array([0j]), 0.0
        else:
            n = max(16, math.ceil(np.pi * math.sinh(2 * t) / h))
            chord = float(beta(s, s * np.exp(1j * np.pi / n)))
            while chord > h / 2:
                n *= 2
                chord = float(beta(s, s * np.exp(1j * np.pi / n)))
            g = s * np.exp(2j * np.pi * np.arange(n) / n)
        near = [rg for rg in rings if abs(rg.beta_radius - t) <= 2 * R]
        worst = max(worst, float(nearest_ring_distance(near, g).max()))
        chord_max = max(chord_max, chord)
        count += len(g)
    return worst, half_step + chord_max, count


def recheck_hyperbolic(seq: PointSequence, grid_density=(64, 256), pair_budget=20_000_000):
    """Re-derive separation and covering of a ring lattice from its raw points.

    Rings are recovered by grouping points by modulus.  Within each ring the
    angular neighbours (found by sorting) give the minimum; pairs of adjacent
    rings are compared all-against-all while their product stays within
    ``pair_budget``.  Covering uses a k-d tree over the Euclidean disks that
    contain each pseudo-hyperbolic ball of the claimed radius.

    Returns
    -------
    (separation_beta, covering_beta)
    """
    pts = seq.points
    mod = np.round(np.abs(pts), 12)
    levels = np.unique(mod)
    groups = [pts[mod == m] for m in levels]
    sep = np.inf
    for g in groups:
        if len(g) > 1:
            gs = g[np.argsort(np.angle(g))]
            sep = min(sep, float(beta(gs, np.roll(gs, 1)).min()))
    for a, b in zip(groups[:-1], groups[1:]):
        if len(a) * len(b) <= pair_budget:
            for chunk in np.array_split(a, max(1, len(a) * len(b) // 2_000_000)):
                sep = min(sep, float(beta(chunk[:, None], b[None, :]).min()))
        else:
            small, big = (a, b) if len(a) < len(b) else (b, a)
            order = np.argsort(np.angle(big))
            big = big[order]
            ang = np.angle(big)
            idx = np.searchsorted(ang, np.angle(small))
            cand = np.stack([big[(idx + d) % len(big)] for d in (-2, -1, 0, 1)])
            sep = min(sep, float(beta(small[None, :], cand).min()))

    region_beta = seq.coverage["beta_radius"]
    nr, na = grid_density
    g = PolarGrid(math.tanh(region_beta), nr, na).points() if region_beta > 0 else np.array([0j])
    claim = seq.covering_beta + 1e-9
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    cov = 0.0
    r = math.tanh(claim)
    for z in g:
        d = pseudo_disk(z, r)
        idx = tree.query_ball_point([d.center_euc.real, d.center_euc.imag], d.radius_euc + 1e-12)
        if not idx:
            return sep, np.inf
        cov = max(cov, float(beta(z, pts[idx]).min()))
    return sep, cov


# -- generic constants -------------------------------------------------------


def separation_constant(seq: PointSequence) -> float:
    """Minimum pairwise distance, in ``rho`` (Bergman) or Euclidean (Fock)."""
    if len(seq.points) < 2:
        raise DomainError("separation needs at least two points")
    if seq.space is SpaceTag.FOCK:
        xy = np.column_stack([seq.points.real, seq.points.imag])
        return float(cKDTree(xy).query(xy, k=2)[0][:, 1].min())
    if seq.rings:
        return math.tanh(_ring_separation(seq.rings))
    pts = seq.points
    best = np.inf
    for i in range(len(pts) - 1):
        best = min(best, float(rho(pts[i], pts[i + 1 :]).min()))
    return best


def nearest_distance(seq: PointSequence, z):
    """Distance from each ``z`` to the nearest point of ``seq`` in its metric."""
    z = np.asarray(z, dtype=complex).ravel()
    if seq.space is SpaceTag.FOCK:
        xy = np.column_stack([seq.points.real, seq.points.imag])
        return cKDTree(xy).query(np.column_stack([z.real, z.imag]))[0]
    if seq.rings:
        return np.tanh(nearest_ring_distance(seq.rings, z))
    out = np.empty(z.shape)
    for i in range(0, len(z), 512):
        zc = z[i : i + 512]
        q = one_minus_rho_sq(zc[:, None], seq.points[None, :])
        out[i : i + 512] = np.sqrt(np.clip(1.0 - q.max(axis=1), 0.0, None))
    return out


def net_check(seq: PointSequence, radius, region, grid_density=None):
    """Decide whether ``seq`` is a ``radius``-net over ``region``.

    ``region`` is a :class:`PolarGrid` (Bergman) or :class:`BoxGrid` (Fock);
    ``grid_density`` replaces its resolution when given.  The region must sit
    inside the truncation window with a margin of ``radius``.

    Returns
    -------
    (is_net, covering_radius)
    """
    if grid_density is not None:
        if isinstance(region, PolarGrid):
            region = PolarGrid(region.rho_max, grid_density, 2 * grid_density)
        elif isinstance(region, BoxGrid):
            region = BoxGrid(region.x0, region.x1, region.y0, region.y1, grid_density)
    z = region.points()
    if seq.truncation is not None:
        if seq.space is SpaceTag.FOCK:
            margin = radius - seq.truncation.margin
            seq.truncation.require(z, "net region", margin)
        else:
            seq.truncation.require(z, "net region")
    cov = float(nearest_distance(seq, z).max())
    return cov <= radius, cov


# -- sufficient conditions for sampling / interpolation ----------------------


def sampling_sufficient(seq: PointSequence) -> bool:
    """Separated r-net with ``r < 1/2`` (pseudo-hyperbolic) implies sampling."""
    if seq.space is not SpaceTag.BERGMAN:
        raise DomainError("the sampling criterion applies to Bergman-space sequences")
    if not seq.certified:
        raise CertificationError("sequence carries no certified separation/covering constants")
    return seq.separation > 0 and seq.covering_radius < 0.5


def interpolation_lhs(delta):
    """``(2 pi + 1) sqrt(1 - delta) / (1 - sqrt(1 - delta))^2``."""
    q = math.sqrt(1.0 - delta)
    return (2 * math.pi + 1) * q / (1.0 - q) ** 2


def interpolation_threshold():
    """Separation constant at which the interpolation criterion switches on."""
    return brentq(lambda d: interpolation_lhs(d) - 0.5, 0.5, 1.0 - 1e-15, xtol=1e-15)


def interpolation_sufficient(seq_or_delta) -> bool:
    """Separation ``delta`` with ``interpolation_lhs(delta) < 1/2`` implies interpolation."""
    if isinstance(seq_or_delta, PointSequence):
        if seq_or_delta.space is not SpaceTag.BERGMAN:
            raise DomainError("the interpolation criterion applies to Bergman-space sequences")
        if seq_or_delta.separation is None:
            raise CertificationError("sequence carries no certified separation")
        delta = seq_or_delta.separation
    else:
        delta = float(seq_or_delta)
    if not 0 < delta < 1:
        return False
    return interpolation_lhs(delta) < 0.5


# -- measures built on lattices ----------------------------------------------


def lattice_weights(seq: PointSequence):
    """``(1 - |u|^2)^2`` on the disk, unit weights in the plane."""
    if seq.space is SpaceTag.FOCK:
        return np.ones(len(seq.points))
    if seq.rings:
        # sech^4 of the Bergman radius, exact even when |u| is within rounding of 1
        return np.concatenate([np.full(r.count, 1.0 / math.cosh(r.beta_radius) ** 4) for r in seq.rings])
    return (1.0 - np.abs(seq.points) ** 2) ** 2


def lattice_measure(seq: PointSequence, label="") -> Atomic:
    return Atomic(seq.space, seq.points, lattice_weights(seq), seq.truncation, label)


def counterexample_bergman(R, max_rings, **kw) -> Atomic:
    """``sum (1 - |b_k|^2)^2 delta_{b_k}`` over a certified ring lattice."""
    seq = hyperbolic_lattice(R, max_rings, **kw)
    return lattice_measure(seq, f"bergman-lattice(R={R:g}, rings={int(max_rings)})")


def counterexample_fock(r, window) -> Atomic:
    """Unit point masses on the square lattice of spacing ``r >= sqrt(2 pi)``."""
    if not r >= FOCK_THRESHOLD:
        raise DomainError(
            f"r = {r:g} is below sqrt(2 pi) = {FOCK_THRESHOLD:.6f}; the non-invertibility result needs r >= sqrt(2 pi)"
        )
    return fock_lattice_measure(r, window)


def fock_lattice_measure(r, window) -> Atomic:
    """Unit point masses on ``square_lattice(r, window)`` with no threshold on ``r`` (controls)."""
    seq = square_lattice(r, window)
    return lattice_measure(seq, f"fock-lattice(r={r:g}, window={int(window)})")


def rings_for_degree(R, degree, eta=0.02):
    """Smallest ring count whose outermost ring ``s`` loses at most ``eta`` of ``|e_degree|^2``.

    The mass of the normalized monomial of degree ``d`` outside ``|z| < s`` is
    ``1 - s^(2d + 2)``.
    """
    s_needed = (1.0 - eta) ** (1.0 / (2 * degree + 2))
    b = math.atanh(s_needed)
    return int(math.ceil(b / (R / 2))) + 1
