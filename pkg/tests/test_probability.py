import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.fixtures import random_stochastic
from src.probability import (
    apply_function,
    apply_stochastic,
    as_distribution,
    conditional,
    event_gap_distance,
    generalized_trace_distance,
    iid_power,
    marginal,
    product,
)
from src.util.errors import ResourceError, UsageError
from src.util.utils import make_rng
from tests.strategies import joint_distributions


def test_as_distribution_validation():
    assert as_distribution([[0.5, 0.5]]).shape == (1, 2)
    with pytest.raises(UsageError):
        as_distribution([0.6, 0.6])
    with pytest.raises(UsageError):
        as_distribution([1.2, -0.2])
    with pytest.raises(UsageError):
        as_distribution([])
    sub = as_distribution([0.2, 0.3], normalized=False)
    assert sub.sum() == pytest.approx(0.5)
    with pytest.raises(UsageError):
        as_distribution([0.7, 0.7], normalized=False)


def test_marginal_and_product():
    p = np.array([[0.1, 0.2], [0.3, 0.4]])
    assert marginal(p, [0]) == pytest.approx([0.3, 0.7])
    assert marginal(p, [1]) == pytest.approx([0.4, 0.6])
    assert np.allclose(marginal(p, [1, 0]), p.T)
    assert np.allclose(product([0.5, 0.5], [0.2, 0.8]), [[0.1, 0.4], [0.1, 0.4]])
    with pytest.raises(UsageError):
        marginal(p, [])
    with pytest.raises(UsageError):
        marginal(p, [2])


def test_generalized_trace_distance_counts_trace_gap():
    p = np.array([0.5, 0.5])
    assert generalized_trace_distance(p, p) == 0.0
    assert generalized_trace_distance(p, np.zeros(2)) == pytest.approx(1.0)
    # ½·0.2 + ½·0.2
    assert generalized_trace_distance(p, np.array([0.3, 0.5])) == pytest.approx(0.2)


@given(joint_distributions(), joint_distributions())
@settings(max_examples=50, deadline=None)
def test_trace_distance_is_event_gap(p, q):
    if p.shape != q.shape:
        q = np.full(p.shape, 1.0 / p.size)
    assert generalized_trace_distance(p, q) == pytest.approx(event_gap_distance(p, q), abs=1e-12)


def test_event_gap_cap():
    with pytest.raises(ResourceError):
        event_gap_distance(np.ones(30) / 30, np.ones(30) / 30)


def test_iid_power_grouping():
    p = np.array([[0.1, 0.2], [0.3, 0.4]])
    p2 = iid_power(p, 2)
    assert p2.shape == (4, 4)
    # (x1 x2, y1 y2) = (01, 10)
    assert p2[1, 2] == pytest.approx(p[0, 1] * p[1, 0])
    assert p2.sum() == pytest.approx(1.0)
    assert np.allclose(marginal(p2, [0]), np.kron(marginal(p, [0]), marginal(p, [0])))
    with pytest.raises(ResourceError):
        iid_power(p, 20, max_cells=1000)


@given(joint_distributions())
@settings(max_examples=30, deadline=None)
def test_stochastic_maps_contract_distance(p):
    rng = make_rng(int(p.size))
    w = random_stochastic(p.shape[1], 3, rng)
    q = np.full(p.shape, 1.0 / p.size)
    before = generalized_trace_distance(p, q)
    after = generalized_trace_distance(apply_stochastic(p, w, 1), apply_stochastic(q, w, 1))
    assert after <= before + 1e-12


def test_apply_function_and_conditional():
    p = np.array([[0.1, 0.2], [0.3, 0.1], [0.0, 0.3]])
    merged = apply_function(p, [0, 0, 1], axis=0)
    assert np.allclose(merged, [[0.4, 0.3], [0.0, 0.3]])
    cond = conditional(np.array([[0.2, 0.0], [0.2, 0.0]]), given=1)
    assert np.allclose(cond, [[0.5, 0.0], [0.5, 0.0]])


@given(st.integers(1, 3))
def test_apply_stochastic_shape_check(axis):
    with pytest.raises(UsageError):
        apply_stochastic(np.ones((2, 2)) / 4, np.eye(axis + 2), 0)
