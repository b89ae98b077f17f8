import numpy as np
import pytest
from hypothesis import given, settings

from src.fixtures import CORRELATED_BITS
from src.probability import iid_power, marginal, product
from src.spectrum import (
    compositions,
    d_max_classical,
    d_s,
    d_s_iid_exact,
    gaussian_cdf_inv,
    h_s,
    i_s,
    kl_and_variance,
    likelihood_atoms,
    second_order_prediction,
    second_order_table,
    type_class_count,
)
from src.util.errors import DomainError, ResourceError
from tests.strategies import joint_distributions, radii

PERFECT = np.array([[0.5, 0.0], [0.0, 0.5]])


def _mi_reference(p):
    return product(marginal(p, [0]), marginal(p, [1]))


def test_perfectly_correlated_bits():
    assert i_s(PERFECT, 0.3) == pytest.approx(1.0)
    assert h_s(PERFECT, 0.3) == pytest.approx(0.0)


def test_d_s_threshold_semantics():
    p = np.array([0.5, 0.25, 0.25])
    q = np.array([0.25, 0.25, 0.5])
    # log-ratios 1, 0, -1 with masses 0.5, 0.25, 0.25
    assert d_s(p, q, 0.6) == pytest.approx(0.0)
    assert d_s(p, q, 0.5) == pytest.approx(1.0)
    assert d_s(p, q, 0.8) == pytest.approx(-1.0)
    assert d_s(p, q, 1.5) == -np.inf
    with pytest.raises(DomainError):
        d_s(p, q, 0.0)


def test_d_s_infinite_mass():
    p = np.array([0.5, 0.5])
    q = np.array([1.0, 0.0])
    assert d_s(p, q, 0.4) == np.inf
    assert d_s(p, q, 0.6) == pytest.approx(-1.0)
    assert d_max_classical(p, q) == np.inf


def test_likelihood_atoms_merge_ties():
    atoms = likelihood_atoms(np.full(4, 0.25), np.full(4, 0.25))
    assert atoms.values.size == 1
    assert atoms.masses == pytest.approx([1.0])


@given(joint_distributions(), radii())
@settings(max_examples=60, deadline=None)
def test_d_s_monotone_in_eps(p, eps):
    q = _mi_reference(p)
    assert d_s(p, q, eps) >= d_s(p, q, min(eps + 0.1, 0.99)) - 1e-12


@given(joint_distributions())
@settings(max_examples=60, deadline=None)
def test_d_max_bounds_d_s(p):
    q = _mi_reference(p)
    assert d_s(p, q, 1e-3) <= d_max_classical(p, q) + 1e-12


def test_kl_and_variance():
    d, v = kl_and_variance(np.full(4, 0.25), np.full(4, 0.25))
    assert d == pytest.approx(0.0) and v == pytest.approx(0.0)
    d, v = kl_and_variance(PERFECT, _mi_reference(PERFECT))
    assert d == pytest.approx(1.0) and v == pytest.approx(0.0)
    with pytest.raises(DomainError):
        kl_and_variance(np.array([0.5, 0.5]), np.array([1.0, 0.0]))


def test_second_order_prediction_at_median():
    pred = second_order_prediction(CORRELATED_BITS, _mi_reference(CORRELATED_BITS), 100, 0.5)
    assert pred.value == pytest.approx(pred.rate)
    assert gaussian_cdf_inv(0.5) == pytest.approx(0.0)
    with pytest.raises(DomainError):
        gaussian_cdf_inv(1.0)


def test_compositions_enumerate_type_classes():
    comps = compositions(4, 3)
    assert comps.shape == (15, 3)
    assert np.all(comps.sum(axis=1) == 4)
    assert len({tuple(c) for c in comps}) == 15
    assert type_class_count(4, 3) == pytest.approx(15.0)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("eps", [0.1, 0.25, 0.6])
def test_iid_exact_matches_materialized_power(n, eps):
    p = CORRELATED_BITS
    q = _mi_reference(p)
    brute = d_s(iid_power(p, n), iid_power(q, n), eps)
    assert d_s_iid_exact(p, q, n, eps) == pytest.approx(brute, abs=1e-9)


def test_iid_exact_type_class_cap():
    p = np.arange(1, 17).reshape(4, 4) / 136
    with pytest.raises(ResourceError):
        d_s_iid_exact(p, _mi_reference(p), 200, 0.1, max_cells=1000)


def test_product_distribution_residuals_vanish():
    p = product([0.3, 0.7], [0.6, 0.4])
    table = second_order_table(p, 0.3, [8, 16])
    assert table["residual"].to_numpy() == pytest.approx([0.0, 0.0], abs=1e-12)


@pytest.mark.parametrize("eps", [0.25, 0.5, 0.75])
def test_second_order_expansion_on_correlated_bits(eps):
    table = second_order_table(CORRELATED_BITS, eps, [64, 128, 256, 512, 1024])
    assert list(table.columns) == ["n", "exact_rate", "predicted_rate", "residual", "normalized_residual"]
    assert np.all(table["normalized_residual"] <= 10.0)
