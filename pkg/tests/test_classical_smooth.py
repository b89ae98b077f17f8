import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.classical_smooth import (
    apply_function_x,
    check_given_q_sandwich,
    check_reduction_identities,
    check_reference_choice_gap,
    check_thm1_sandwich,
    function_monotonicity_gap,
    grid_search_hmin,
    grid_search_imax,
    hmin_full_classical,
    hmin_partial_classical,
    imax_full_classical,
    imax_partial_classical,
    imax_partial_given_q,
    smooth_function_extension,
    thm1_smoother_construction,
)
from src.fixtures import CORRELATED_BITS, random_distribution
from src.probability import generalized_trace_distance, marginal, product
from src.spectrum import d_max_classical
from src.util.errors import DomainError, UsageError
from src.util.utils import make_rng
from tests.strategies import joint_distributions, radii

PERFECT = np.array([[0.5, 0.0], [0.0, 0.5]])


def test_imax_partial_correlated_bits_closed_form():
    # Moving 0.1 of mass towards the off-diagonal leaves Σ_y max_x P′(x,y)/P_X(x) = 1.6
    res = imax_partial_classical(CORRELATED_BITS, 0.1)
    assert res.value == pytest.approx(np.log2(1.6), abs=1e-9)
    assert marginal(res.optimizer, [0]) == pytest.approx([0.5, 0.5], abs=1e-12)
    assert res.distance <= 0.1 + 1e-9
    assert res.q.sum() == pytest.approx(1.0)


def test_imax_partial_unsmoothed_and_large_radius():
    assert imax_partial_classical(CORRELATED_BITS, 0.0).value == pytest.approx(np.log2(1.8), abs=1e-9)
    assert imax_partial_classical(CORRELATED_BITS, 0.25).value == pytest.approx(np.log2(1.3), abs=1e-9)
    assert imax_partial_classical(CORRELATED_BITS, 0.45).value == pytest.approx(0.0, abs=1e-9)


def test_hmin_partial_correlated_bits_closed_form():
    # Removing 0.05 from each diagonal cell costs T = 0.1 and gives t = 0.8
    res = hmin_partial_classical(CORRELATED_BITS, 0.1)
    assert res.value == pytest.approx(-np.log2(0.8), abs=1e-9)
    assert hmin_partial_classical(CORRELATED_BITS, 0.0).value == pytest.approx(-np.log2(0.9), abs=1e-9)
    assert np.all(res.optimizer.sum(axis=0) <= marginal(CORRELATED_BITS, [1]) + 1e-12)


@pytest.mark.parametrize("p", [PERFECT, CORRELATED_BITS, np.array([[0.3, 0.2], [0.1, 0.4]])])
@pytest.mark.parametrize("eps", [0.05, 0.25])
def test_lp_matches_grid_search(p, eps):
    imax = imax_partial_classical(p, eps).value
    grid = grid_search_imax(p, eps, step=1e-2)
    assert imax <= grid + 1e-9
    assert grid - imax <= 0.1
    hmin = hmin_partial_classical(p, eps).value
    grid = grid_search_hmin(p, eps, step=2e-2)
    assert hmin >= grid - 1e-9
    assert hmin - grid <= 0.1


def test_grid_search_rejects_larger_tables():
    with pytest.raises(UsageError):
        grid_search_imax(np.full((3, 2), 1 / 6), 0.1)


@given(joint_distributions(max_side=3), radii(0.0, 0.4))
@settings(max_examples=25, deadline=None)
def test_pinned_marginal_costs_information(p, eps):
    assert imax_partial_classical(p, eps).value >= imax_full_classical(p, eps).value - 1e-9
    assert hmin_partial_classical(p, eps).value <= hmin_full_classical(p, eps).value + 1e-9


@given(joint_distributions(max_side=3), radii(0.0, 0.3))
@settings(max_examples=25, deadline=None)
def test_measures_monotone_in_radius(p, eps):
    assert imax_partial_classical(p, eps + 0.1).value <= imax_partial_classical(p, eps).value + 1e-9
    assert hmin_partial_classical(p, eps + 0.1).value >= hmin_partial_classical(p, eps).value - 1e-9


def test_product_distribution_has_zero_information():
    p = product([0.2, 0.8], [0.5, 0.3, 0.2])
    assert imax_partial_classical(p, 0.0).value == pytest.approx(0.0, abs=1e-9)
    assert imax_partial_classical(p, 0.1).value == pytest.approx(0.0, abs=1e-9)


def test_invalid_radius():
    with pytest.raises(DomainError):
        imax_partial_classical(CORRELATED_BITS, 1.0)
    with pytest.raises(DomainError):
        hmin_partial_classical(CORRELATED_BITS, -0.1)
    with pytest.raises(UsageError):
        imax_partial_classical(np.array([0.5, 0.5]), 0.1)


@given(joint_distributions(max_side=4), st.sampled_from([0.05, 0.1, 0.3]))
@settings(max_examples=40, deadline=None)
def test_thm1_sandwich(p, eps):
    report = check_thm1_sandwich(p, eps, eps / 2)
    assert report.passed, report.slacks


def test_thm1_sandwich_on_seeded_tables():
    for i in range(10):
        rng = make_rng(2024, i)
        side = 3 + i % 2
        report = check_thm1_sandwich(random_distribution((side, side), rng), 0.1, 0.05)
        assert report.passed, report.slacks


def test_thm1_sandwich_domain():
    with pytest.raises(DomainError):
        check_thm1_sandwich(CORRELATED_BITS, 0.6, 0.5)


@given(joint_distributions(max_side=3), st.sampled_from([0.05, 0.1, 0.3]))
@settings(max_examples=25, deadline=None)
def test_given_q_sandwich_and_reference_gap(p, eps):
    q_y = np.full(p.shape[1], 1.0 / p.shape[1])
    assert check_given_q_sandwich(p, q_y, eps, eps / 2).passed
    assert check_reference_choice_gap(p, q_y, eps, eps / 2).passed


def test_given_q_with_true_marginal_matches_partial_or_more():
    q_y = marginal(CORRELATED_BITS, [1])
    assert imax_partial_given_q(CORRELATED_BITS, q_y, 0.1).value >= imax_partial_classical(CORRELATED_BITS, 0.1).value - 1e-9


@given(joint_distributions(max_side=3), radii(0.05, 0.4))
@settings(max_examples=25, deadline=None)
def test_reduction_identities(p, eps):
    assert check_reduction_identities(p, eps).passed


@given(joint_distributions(max_side=4, full_support=True), radii(0.05, 0.4))
@settings(max_examples=40, deadline=None)
def test_smoother_construction(p, eps):
    q_y = np.full(p.shape[1], 1.0 / p.shape[1])
    cert = thm1_smoother_construction(p, q_y, eps)
    assert marginal(cert.smoothed, [0]) == pytest.approx(marginal(p, [0]), abs=1e-12)
    assert cert.tail_mass < eps + 1e-12
    assert cert.distance <= cert.tail_mass + 1e-12
    assert cert.dmax <= cert.dmax_bound + 1e-9


def test_function_extension_preserves_distance():
    p = random_distribution((4, 3), make_rng(9))
    f = [0, 1, 1, 0]
    pz = apply_function_x(p, f)
    smoothed = hmin_partial_classical(pz, 0.1).optimizer
    ext = smooth_function_extension(p, f, smoothed)
    original = np.zeros((4, 2, 3))
    original[np.arange(4), f, :] = p
    assert ext.sum(axis=0) == pytest.approx(smoothed, abs=1e-12)
    assert generalized_trace_distance(ext, original) == pytest.approx(generalized_trace_distance(smoothed, pz), abs=1e-12)
    with pytest.raises(UsageError):
        smooth_function_extension(p, [0, 1], smoothed)


@given(joint_distributions(max_side=4), radii(0.0, 0.3))
@settings(max_examples=25, deadline=None)
def test_functions_do_not_increase_min_entropy(p, eps):
    f = np.arange(p.shape[0]) % 2
    assert function_monotonicity_gap(p, f, eps, size=2) >= -1e-9


def test_result_to_dict():
    d = imax_partial_classical(CORRELATED_BITS, 0.1).to_dict()
    assert set(d) == {"value", "optimizer", "q", "distance", "residual", "lp_value"}
    assert d["value"] == pytest.approx(np.log2(1.6), abs=1e-9)


def test_optimizer_dominated_by_reported_q():
    res = imax_partial_classical(CORRELATED_BITS, 0.05)
    ref = product(marginal(CORRELATED_BITS, [0]), res.q)
    assert d_max_classical(res.optimizer, ref) <= res.value + 1e-7
