import math

import numpy as np
import pytest

from toeplitz_lab.carleson import (
    REVERSE_THRESHOLD,
    CarlesonReport,
    bergman_berezin_floor,
    carleson_ratio_sup,
    classify,
    default_grid,
    disk_masses,
    fock_berezin_floor,
    reverse_carleson_inf,
)
from toeplitz_lab.errors import DomainError, TruncationError
from toeplitz_lab.geometry import pseudo_disk, one_minus_rho_sq
from toeplitz_lab.grids import PointGrid, PolarGrid, fundamental_cell
from toeplitz_lab.lattice import counterexample_bergman, counterexample_fock
from toeplitz_lab.measure import Atomic, PullBack, lebesgue
from toeplitz_lab.report import dumps_csv

from conftest import random_disk


@pytest.fixture(scope="module")
def fock_ce():
    return counterexample_fock(3.5, 12)


@pytest.fixture(scope="module")
def bergman_ce():
    return counterexample_bergman(7.0, 3)


@pytest.mark.parametrize("r", [0.3, 0.5, 0.9])
def test_lebesgue_ratio_is_one(r):
    grid = PolarGrid(0.9, 4, 8)
    assert carleson_ratio_sup(lebesgue("bergman"), r, grid) == pytest.approx(1, abs=1e-10)
    assert reverse_carleson_inf(lebesgue("bergman"), r, grid) == pytest.approx(1, abs=1e-10)


def test_single_atom_ratio():
    mu = Atomic("bergman", [0], [1.0])
    assert carleson_ratio_sup(mu, 0.5, PointGrid((0,))) == 4.0
    assert carleson_ratio_sup(mu, 0.5, PolarGrid(0.9, 8, 16)) >= 4.0


def test_fock_lattice_sup_and_inf(fock_ce):
    cell = fundamental_cell(3.5, 101)
    # the open ball of radius 3.5 never meets more than 4 atoms of a 3.5-lattice
    assert carleson_ratio_sup(fock_ce, 3.5, cell) == 4
    assert reverse_carleson_inf(fock_ce, 3.5, cell) >= 1


def test_fock_lattice_counts_by_brute_force(fock_ce):
    pts = fundamental_cell(3.5, 21).points()
    brute = np.array([np.sum(np.abs(fock_ce.points - z) < 3.5) for z in pts])
    assert np.array_equal(disk_masses(fock_ce, 3.5, pts), brute)


def test_bergman_atomic_masses_by_brute_force(rng, bergman_ce):
    pts = random_disk(rng, 30, 0.95)
    r = 0.9985
    brute = [math.fsum(bergman_ce.weights[one_minus_rho_sq(z, bergman_ce.points) > 1 - r * r]) for z in pts]
    assert np.allclose(disk_masses(bergman_ce, r, pts), brute, rtol=0, atol=0)


def test_bergman_lattice_reverse_condition(bergman_ce):
    inf = reverse_carleson_inf(bergman_ce, 0.9985, PolarGrid(0.95, 16, 32))
    assert inf > REVERSE_THRESHOLD


def test_pullback_condition_fails_near_boundary():
    mu = PullBack([0, 0.5])
    rep = classify(mu, 0.5, PolarGrid(0.95, 12, 24))
    assert not rep.verdict_reverse_condition
    assert rep.inf_ratio == 0
    assert rep.berezin_inf < 0.05


def test_scale_coherence(bergman_ce):
    grid = PolarGrid(0.9, 6, 12)
    double = bergman_ce.scaled(2)
    assert carleson_ratio_sup(double, 0.9985, grid) == 2 * carleson_ratio_sup(bergman_ce, 0.9985, grid)
    assert reverse_carleson_inf(double, 0.9985, grid) == 2 * reverse_carleson_inf(bergman_ce, 0.9985, grid)


def test_classify_lebesgue_both_spaces():
    for space, grid in (("bergman", PolarGrid(0.9, 4, 8)), ("fock", fundamental_cell(1, 5))):
        rep = classify(lebesgue(space), region=grid)
        assert rep.verdict_carleson and rep.verdict_reverse_condition
        assert rep.sup_ratio == pytest.approx(1, abs=1e-10) and rep.inf_ratio == pytest.approx(1, abs=1e-10)
        assert rep.berezin_inf == pytest.approx(1, abs=1e-10) and rep.berezin_sup == pytest.approx(1, abs=1e-10)


def test_classify_fock_counterexample(fock_ce):
    rep = classify(fock_ce, 3.5, fundamental_cell(3.5, 21))
    assert rep.verdict_reverse_condition and rep.reverse_measure_verdict is None
    assert any("spectral" in n for n in rep.notes)


def test_fock_floor_inequality(fock_ce):
    for r in (2.6, 3.5, 4.5):
        grid = fundamental_cell(3.5, 21)
        c = reverse_carleson_inf(fock_ce, r, grid)
        rep = classify(fock_ce, r, grid)
        assert rep.berezin_inf >= fock_berezin_floor(c, r)


def test_bergman_floor_constant(bergman_ce):
    grid = PolarGrid(0.95, 10, 20)
    for r in (0.9985, 0.9995):
        c = reverse_carleson_inf(bergman_ce, r, grid)
        assert c > 0
        assert classify(bergman_ce, r, grid).berezin_inf >= bergman_berezin_floor(c, r)
    for r in (0.3, 0.6):
        c = reverse_carleson_inf(lebesgue("bergman"), r, grid)
        assert 1.0 >= bergman_berezin_floor(c, r)


def test_bergman_floor_area_bound():
    # the floor uses A(E(z, r)) >= r^2 (1 - |z|^2)^2
    for z in (0, 0.5, 0.9j, 0.99):
        for r in (0.1, 0.5, 0.9):
            assert pseudo_disk(z, r).area >= r * r * (1 - abs(z) ** 2) ** 2 * (1 - 1e-12)


def test_domain_checks():
    with pytest.raises(DomainError):
        carleson_ratio_sup(lebesgue("bergman"), 1.2)
    with pytest.raises(DomainError):
        carleson_ratio_sup(lebesgue("fock"), 0)


def test_truncation_margin(bergman_ce, fock_ce):
    with pytest.raises(TruncationError):
        carleson_ratio_sup(bergman_ce, 0.5, PolarGrid(0.999, 4, 8))
    with pytest.raises(TruncationError):
        carleson_ratio_sup(fock_ce, 3.5, PointGrid((40.0,)))


def test_default_grid_respects_truncation(bergman_ce):
    assert default_grid(bergman_ce, 8).rho_max == 0.99
    assert default_grid(counterexample_bergman(0.8, 6), 8).rho_max == pytest.approx(math.tanh(1.6))
    assert default_grid(lebesgue("bergman")).rho_max == 0.99
    assert default_grid(lebesgue("fock"), cell=3.5).to_json() == fundamental_cell(3.5, 101).to_json()


def test_report_roundtrip_and_csv():
    rep = classify(lebesgue("bergman"), 0.5, PolarGrid(0.5, 3, 8))
    again = CarlesonReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    text = dumps_csv(rep)
    assert text.startswith("field,value\n") and "verdict_carleson,True" in text
