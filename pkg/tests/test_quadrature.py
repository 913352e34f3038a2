import math
import warnings

import numpy as np
import pytest

from toeplitz_lab.errors import AccuracyWarning, DomainError, EvaluationError
from toeplitz_lab.geometry import EuclideanDisk, pseudo_disk
from toeplitz_lab.quadrature import (
    McSpec,
    QuadratureSpec,
    default_outer_radius,
    integrate_annulus,
    integrate_disk,
    integrate_plane_gaussian,
    mc_oracle,
    polar_rule,
)


def test_disk_examples():
    assert integrate_disk(lambda z: np.ones_like(z)) == pytest.approx(1, abs=1e-14)
    assert abs(integrate_disk(lambda z: z)) < 1e-14
    assert integrate_disk(lambda z: np.abs(z) ** 2).real == pytest.approx(0.5, abs=1e-14)


def test_polynomial_exactness():
    spec = QuadratureSpec(radial_nodes=21, angular_nodes=64, check=False)
    for m in range(21):
        for n in range(21):
            val = integrate_disk(lambda z: z ** m * np.conj(z) ** n, spec)
            expect = 1 / (m + 1) if m == n else 0
            assert abs(val - expect) <= 1e-13


def test_weights_sum_to_annulus_area():
    nodes, w = polar_rule(0.3j, 0.5, 2.0, 16, 32)
    assert w.sum() == pytest.approx(4 - 0.25)
    assert np.all(np.abs(np.abs(nodes - 0.3j) - 1.25) <= 0.75)


def test_plane_gaussian_examples():
    assert integrate_plane_gaussian(lambda w: np.exp(-np.abs(w) ** 2 / 2)).real == pytest.approx(2, abs=1e-10)
    val, info = integrate_plane_gaussian(lambda w: np.exp(-np.abs(w) ** 2), decay=1.0, full_output=True)
    assert val.real == pytest.approx(1, abs=1e-10)
    assert info["tail_bound"] <= 1e-10
    assert abs(integrate_plane_gaussian(lambda w: w * np.exp(-np.abs(w) ** 2 / 2))) < 1e-12


def test_plane_gaussian_rejects_small_outer_radius():
    with pytest.raises(DomainError):
        integrate_plane_gaussian(lambda w: np.exp(-np.abs(w) ** 2 / 2), QuadratureSpec(outer_radius=3.0))


def test_default_outer_radius():
    assert default_outer_radius(0.5, 1e-10) == pytest.approx(math.sqrt(4 * math.log(1e10)))


def test_nonfinite_integrand_names_node():
    with pytest.raises(EvaluationError, match="node"):
        integrate_disk(lambda z: np.where(np.abs(z) < 0.5, np.inf, 1.0))


def test_accuracy_warning_on_rough_integrand():
    with pytest.warns(AccuracyWarning):
        integrate_disk(lambda z: (np.abs(z) < 0.37).astype(float), QuadratureSpec(radial_nodes=8, angular_nodes=16))


def test_no_warning_on_smooth_integrand():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        integrate_annulus(lambda z: np.exp(z.real), 0.2, 0.0, 0.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(angular_nodes=4)
    with pytest.raises(ValueError):
        QuadratureSpec(tolerance=0)
    with pytest.raises(ValueError):
        McSpec(sample_count=0)


def test_mc_examples():
    est, se = mc_oracle(lambda z: np.ones_like(z.real), "unit-disk", McSpec(10_000, 1))
    assert est == pytest.approx(1) and se == 0
    est, se = mc_oracle(lambda z: np.abs(z) ** 2, "unit-disk", McSpec(1_000_000, 42))
    assert abs(est - 0.5) <= 3 * se
    est, se = mc_oracle(lambda z: np.ones_like(z.real), pseudo_disk(0.5, 0.5), McSpec(1000, 3))
    assert est.real == pytest.approx(0.16)


def test_mc_seed_determinism():
    f = lambda z: np.exp(z.real) * np.abs(z)
    a = mc_oracle(f, EuclideanDisk(0.5, 2.0), McSpec(300_000, 7))
    b = mc_oracle(f, EuclideanDisk(0.5, 2.0), McSpec(300_000, 7))
    c = mc_oracle(f, EuclideanDisk(0.5, 2.0), McSpec(300_000, 8))
    assert a == b
    assert a != c


def test_mc_agrees_with_quadrature():
    f = lambda z: np.cos(3 * z.real) * np.abs(z) ** 3
    q = integrate_disk(f)
    est, se = mc_oracle(f, "unit-disk", McSpec(1_000_000, 42))
    assert abs(est - q) <= 3 * se
