import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toeplitz_lab.errors import AdmissibilityError, DomainError, TruncationError
from toeplitz_lab.geometry import EuclideanDisk, pseudo_disk
from toeplitz_lab.grids import BoxGrid, PointGrid, PolarGrid, fundamental_cell, grid_from_json
from toeplitz_lab.lattice import counterexample_fock
from toeplitz_lab.measure import (
    AbsolutelyContinuous,
    Atomic,
    MeasureSpecError,
    PullBack,
    SpaceTag,
    Truncation,
    condition_m_check,
    density,
    lebesgue,
    measure_from_json,
)
from toeplitz_lab.quadrature import integrate_disk


def test_integrate_examples():
    assert Atomic("bergman", [0], [1.0]).integrate(lambda z: (1 - np.abs(z) ** 2) ** 2) == pytest.approx(1)
    assert lebesgue("bergman").integrate(lambda z: np.abs(z) ** 2).real == pytest.approx(0.5, abs=1e-13)
    sq = PullBack.monomial(2)
    assert sq.integrate(lambda z: 2 * np.abs(z) ** 2).real == pytest.approx(2 / 3, abs=1e-13)


def test_fock_lebesgue_integrates_gaussian():
    assert lebesgue("fock").integrate(lambda w: np.exp(-np.abs(w) ** 2 / 2)).real == pytest.approx(2, abs=1e-10)


def test_mass_in_examples():
    assert Atomic("bergman", [0], [1.0]).mass_in(pseudo_disk(0, 0.5)) == 1
    assert lebesgue("bergman").mass_in(pseudo_disk(0.5, 0.5)) == pytest.approx(0.16, abs=1e-12)


def test_lattice_atoms_in_open_ball_by_brute_force():
    mu = counterexample_fock(3.5, 6)
    m, n = np.meshgrid(np.arange(-6, 7), np.arange(-6, 7))
    pts = 3.5 * (m + 1j * n).ravel()
    assert mu.mass_in(EuclideanDisk(0, 3.5)) == np.sum(np.abs(pts) < 3.5) == 1
    # the closed ball of radius 3.5 would hold the 4 nearest neighbours as well
    assert np.sum(np.abs(pts) <= 3.5) == 5


def test_mass_in_region_space_mismatch():
    with pytest.raises((TypeError, DomainError, AdmissibilityError)):
        Atomic("fock", [0], [1.0]).mass_in(pseudo_disk(0, 0.5))


def test_atomic_additivity(rng):
    pts = rng.normal(size=200) + 1j * rng.normal(size=200)
    mu = Atomic("fock", pts, rng.random(200) + 0.5)
    a, b = EuclideanDisk(-1, 0.9), EuclideanDisk(1, 0.9)
    union = lambda w: a.contains(w) | b.contains(w)
    assert mu.mass_in(a) + mu.mass_in(b) == pytest.approx(math.fsum(mu.weights[union(mu.points)]), rel=1e-15)


def test_nonnegativity(rng):
    for mu in (lebesgue("bergman"), AbsolutelyContinuous("bergman", density("one_minus_abs2")), PullBack.mobius(0.3)):
        assert mu.integrate(lambda z: np.abs(np.sin(3 * z)) ** 2).real >= -1e-12


def test_pullback_consistency(rng):
    sq = PullBack.monomial(2)
    for _ in range(50):
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        f = lambda z, c=c: np.polyval(c, z) * np.conj(np.polyval(c[::-1], z))
        assert abs(sq.integrate(f) - integrate_disk(lambda w: f(w ** 2))) <= 1e-12


def test_condition_m_examples():
    rep = condition_m_check(lebesgue("fock"), [0])
    assert rep.passed and rep.values[0] == pytest.approx(2, abs=1e-10)
    rep = condition_m_check(Atomic("fock", [0], [1.0]), [0])
    assert rep.passed and rep.values[0] == 1
    rep = condition_m_check(counterexample_fock(3.5, 10), [0, 1 + 2j, 20 - 5j])
    assert rep.passed and all(np.isfinite(rep.values))


def test_condition_m_dA_off_origin():
    rep = condition_m_check(lebesgue("fock"), [1.0, 2j])
    assert rep.values == pytest.approx([2 * math.exp(0.5), 2 * math.exp(2)], rel=1e-10)


def test_condition_m_overflow_reported_as_failure():
    rep = condition_m_check(Atomic("fock", [60.0], [1.0]), [60.0])
    assert not rep.passed and rep.failures[0]["reason"] == "overflow"


def test_condition_m_requires_fock():
    with pytest.raises(AdmissibilityError):
        condition_m_check(lebesgue("bergman"), [0])


def test_validation_rules():
    with pytest.raises(DomainError):
        Atomic("bergman", [0.5], [0.0])
    with pytest.raises(DomainError):
        Atomic("bergman", [1.0], [1.0])
    with pytest.raises(AdmissibilityError):
        PullBack([0.3])
    with pytest.raises(AdmissibilityError):
        PullBack([0.3, 0, 0])
    with pytest.raises(DomainError):
        PullBack([0.5, 0.6])
    with pytest.raises(DomainError):
        AbsolutelyContinuous("bergman", density("abs2_power", power=-1))


def test_empty_atomic_is_zero_measure():
    mu = Atomic("bergman", [], [])
    assert len(mu) == 0 and mu.integrate(lambda z: np.ones_like(z)) == 0
    assert mu.mass_in(pseudo_disk(0, 0.5)) == 0


def test_atomic_canonical_order(rng):
    pts = rng.normal(size=50) + 1j * rng.normal(size=50)
    w = rng.random(50) + 0.1
    perm = rng.permutation(50)
    a, b = Atomic("fock", pts, w), Atomic("fock", pts[perm], w[perm])
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)
    with pytest.raises(ValueError):
        a.points[0] = 0


def test_scaled_doubles_mass():
    mu = Atomic("bergman", [0, 0.5], [1.0, 2.0])
    assert mu.scaled(2).mass_in(pseudo_disk(0.2, 0.6)) == 2 * mu.mass_in(pseudo_disk(0.2, 0.6))


def test_mobius_pullback_coefficients():
    pb = PullBack.mobius(0.5)
    z = np.array([0.3, -0.2 + 0.4j])
    assert np.allclose(pb.phi(z), (0.5 - z) / (1 - 0.5 * z), atol=1e-15)
    assert pb.validated_sup < 1


def test_truncation_square_and_rings():
    t = Truncation("square", 20.0, 5.0)
    assert t.admits(14 + 15j) and not t.admits(16.0)
    assert not t.admits(14.0, margin=2)
    t.require([0, 3 + 3j])
    with pytest.raises(TruncationError):
        t.require([0, 19.0])
    r = Truncation("rings", 3.5)
    assert r.admits(0.95) and not r.admits(0.999)


@pytest.mark.parametrize(
    "spec",
    [
        {"space": "bergman", "kind": "ac", "density": "one"},
        {"space": "bergman", "kind": "ac", "density": {"name": "one_minus_abs2", "power": 2}},
        {"space": "fock", "kind": "atomic", "atoms": [[0, 0, 1], [1.5, -2, 0.5]]},
        {"space": "bergman", "kind": "pullback", "taylor": [0, 0, 1]},
        {"space": "bergman", "kind": "pullback", "taylor": [[0.1, 0.2], 0.5]},
    ],
)
def test_json_roundtrip(spec):
    mu = measure_from_json(json.dumps(spec))
    again = measure_from_json(mu.to_json())
    assert again.to_json() == mu.to_json()


@pytest.mark.parametrize(
    "spec, pointer",
    [
        ({"kind": "ac", "density": "one", "colour": 1}, ""),
        ({"kind": "atomic", "atoms": [[0, 0]]}, "/atoms/0"),
        ({"kind": "ac", "density": "nope"}, "/density"),
        ({"kind": "pullback", "taylor": [0, "x"]}, "/taylor/1"),
        ({"kind": "ac"}, ""),
        ({"space": "fock", "kind": "pullback", "taylor": [0, 1]}, "/space"),
    ],
)
def test_json_errors_carry_pointer(spec, pointer):
    with pytest.raises(MeasureSpecError) as exc:
        measure_from_json(spec)
    assert exc.value.pointer == pointer


def test_json_space_conflict():
    with pytest.raises(MeasureSpecError):
        measure_from_json({"space": "fock", "kind": "ac", "density": "one"}, space="bergman")
    assert measure_from_json({"kind": "ac", "density": "one"}, space="fock").space is SpaceTag.FOCK


def test_invalid_json_text():
    with pytest.raises(MeasureSpecError):
        measure_from_json("{not json")


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_indicator_annulus_mass(a, b):
    inner, outer = sorted((a, b))
    if outer - inner < 1e-3:
        return
    mu = AbsolutelyContinuous("bergman", density("indicator_annulus", inner=inner, outer=outer))
    pts = np.array([0.5 * (inner + outer), 0.5 * inner])
    assert np.all(mu.density(pts) == [1.0, 0.0])


def test_grids():
    g = PolarGrid(0.9, 5, 8)
    p = g.points()
    assert len(p) == 1 + 4 * 8 and p[0] == 0 and np.max(np.abs(p)) == pytest.approx(0.9)
    assert len(fundamental_cell(3.5, 11).points()) == 121
    for grid in (g, BoxGrid(-1, 1, 0, 2, 3), PointGrid((0.1, 0.2j))):
        assert np.array_equal(grid_from_json(grid.to_json()).points(), grid.points())
