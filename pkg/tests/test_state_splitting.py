import numpy as np
import pytest

from src.fixtures import CORRELATED_BITS, random_distribution
from src.probability import marginal, product
from src.protocols.state_splitting import (
    split_plan,
    split_spectrum_bounds,
    state_split_exact,
    state_split_sample,
)
from src.util.errors import DomainError
from src.util.utils import make_rng


def test_plan_on_correlated_bits():
    plan = split_plan(CORRELATED_BITS, 0.2, 0.05)
    # I_max^{0.15} = log2(2·(0.9 − 0.15))
    assert plan.k == pytest.approx(np.log2(1.5), abs=1e-9)
    assert plan.r == pytest.approx(np.log2(1.5) + np.log2(np.log2(20.0)), abs=1e-9)
    assert plan.r_int == 3
    assert plan.n_samples == 8
    assert plan.gamma == pytest.approx((1 - 1 / 1.5) ** 8, rel=1e-9)
    assert plan.message_bits == 4
    assert np.all((plan.acceptance() >= 0) & (plan.acceptance() <= 1))


def test_exact_run_on_correlated_bits():
    report = state_split_exact(CORRELATED_BITS, 0.2, 0.05)
    assert report.passed, report.to_dict()
    assert report.error <= 0.2
    assert report.resource == pytest.approx(np.log2(9.0))
    assert report.resource_bound == pytest.approx(4.0)
    assert marginal(report.optimizer, [0]) == pytest.approx([0.5, 0.5], abs=1e-12)


def test_product_input_costs_nothing():
    p = product([0.3, 0.7], [0.5, 0.25, 0.25])
    report = state_split_exact(p, 0.1, 0.05)
    assert report.details["N"] == 0
    assert report.resource == 0.0
    assert report.error <= 0.1
    assert report.passed


@pytest.mark.parametrize("i", range(8))
def test_exact_run_on_random_tables(i):
    rng = make_rng(70, i)
    shape = (2 + i % 3, 2 + (i // 3) % 3)
    p = random_distribution(shape, rng)
    report = state_split_exact(p, 0.2, 0.05)
    assert report.passed, report.to_dict()


def test_rate_below_one_bit_rounds_up():
    p = np.array([[0.3, 0.2], [0.2, 0.3]])
    report = state_split_exact(p, 0.5, 0.45)
    # I_max^{0.05} = log2(1.1), R ≈ 0.342
    assert report.details["K"] == pytest.approx(np.log2(1.1), abs=1e-9)
    assert 0 < report.details["R"] < 1
    assert report.details["R_int"] == 1
    assert report.details["N"] == 2
    assert report.resource == pytest.approx(np.log2(3.0))
    assert report.resource_bound == 2.0
    assert report.passed, report.to_dict()


def test_negative_rate_uses_one_sample():
    # δ > 1/2 makes log2 log2(1/δ) negative
    report = state_split_exact(CORRELATED_BITS, 0.9, 0.7)
    assert report.details["R"] < 0
    assert report.details["N"] == 1
    assert report.details["gamma"] <= 0.7
    assert report.resource == pytest.approx(1.0)
    assert report.passed, report.to_dict()


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.5])
def test_delta_at_eps(eps):
    report = state_split_exact(np.array([[0.3, 0.2], [0.2, 0.3]]), eps, eps)
    assert report.passed, report.to_dict()


def test_empty_sample():
    sample = state_split_sample(CORRELATED_BITS, 0.2, 0.05, trials=0)
    assert sample.trials == 0
    assert sample.stats == {}
    assert sample.transcript() == b""


def test_seeded_transcripts_are_reproducible():
    first = state_split_sample(CORRELATED_BITS, 0.2, 0.05, trials=500, seed=3)
    second = state_split_sample(CORRELATED_BITS, 0.2, 0.05, trials=500, seed=3)
    other = state_split_sample(CORRELATED_BITS, 0.2, 0.05, trials=500, seed=4)
    assert first.transcript() == second.transcript()
    assert first.transcript() != other.transcript()


def test_sampling_matches_exact_distribution():
    sample = state_split_sample(CORRELATED_BITS, 0.2, 0.05, trials=100_000, seed=11)
    stats = sample.stats
    assert abs(stats["empirical_T"] - stats["exact_T"]) <= 0.01
    assert abs(stats["accept_z"]) <= 5.0
    assert stats["accept_low"] <= stats["accept_rate_expected"] <= stats["accept_high"]
    assert stats["failure_low"] <= stats["gamma"] <= stats["failure_high"]
    assert np.all(sample.message <= sample.plan.n_samples)


def test_spectrum_window():
    bounds = split_spectrum_bounds(CORRELATED_BITS, 0.2, 0.05)
    assert bounds["lower"] <= bounds["upper"]
    assert np.isnan(split_spectrum_bounds(CORRELATED_BITS, 0.2, 0.1)["upper"])


def test_slack_domain():
    with pytest.raises(DomainError):
        split_plan(CORRELATED_BITS, 0.1, 0.2)
    with pytest.raises(DomainError):
        split_plan(CORRELATED_BITS, 0.2, 0.0)
