import numpy as np
import pytest

from src.fixtures import block_uniform, random_cq_distribution, random_cq_state, uniform_independent
from src.protocols.privacy_amplification import (
    hmin_unsmoothed_classical,
    leftover_hash_bound,
    pa_converse_check,
    pa_key_length,
    pa_quantum_bounds,
    pa_run,
    pa_sweep,
    privacy_amplify_exact,
    security_value,
)
from src.util.errors import DomainError, UsageError
from src.util.utils import make_rng


def test_hmin_of_fixtures():
    assert hmin_unsmoothed_classical(uniform_independent(4)) == pytest.approx(4.0)
    assert hmin_unsmoothed_classical(block_uniform(4, 3)) == pytest.approx(3.0)


def test_no_output_bits_is_perfectly_secure():
    assert security_value(block_uniform(4, 2), 0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "p, ell, bound",
    [
        (uniform_independent(5), 1, 0.125),
        (block_uniform(4, 3), 1, 0.25),
        (uniform_independent(3), 3, 0.5),
    ],
)
def test_leftover_hash_bound_holds(p, ell, bound):
    report = privacy_amplify_exact(p, ell)
    assert report.target_error == pytest.approx(bound)
    assert report.error <= bound + 1e-12
    assert report.passed


def test_leftover_bound_on_random_tables():
    for i in range(5):
        p = random_cq_distribution(3, 2, make_rng(60, i))
        for ell in range(4):
            assert security_value(p, ell) <= leftover_hash_bound(hmin_unsmoothed_classical(p), ell) + 1e-12


def test_sweep_is_monotone():
    sweep = pa_sweep(block_uniform(4, 3))
    assert list(sweep.columns) == ["ell", "error", "leftover_bound"]
    assert sweep["ell"].tolist() == [0, 1, 2, 3, 4]
    assert np.all(np.diff(sweep["error"].to_numpy()) >= -1e-12)


def test_key_length_rule():
    # H = 5, log2(1/(4·0.2²)) ≈ 2.64
    assert pa_key_length(uniform_independent(5), 0.2, 0.2) == 3
    # log2(1/(4·0.05²)) ≈ 6.64 exceeds the available entropy
    assert pa_key_length(block_uniform(4, 3), 0.2, 0.05) == 0


def test_smoothed_run():
    report = pa_run(block_uniform(4, 3), 0.2, 0.05)
    assert report.resource == 0.0
    assert report.error <= 0.2
    assert report.passed
    report = pa_run(uniform_independent(5), 0.2, 0.2)
    assert report.resource == 3.0
    assert report.resource <= report.resource_bound
    assert report.error <= leftover_hash_bound(5.0, 3) + 1e-12


@pytest.mark.parametrize("eps", [0.05, 0.2])
def test_converse(eps):
    assert pa_converse_check(block_uniform(4, 3), eps).passed
    assert pa_converse_check(random_cq_distribution(3, 2, make_rng(61)), eps).passed


def test_argument_errors():
    with pytest.raises(UsageError):
        security_value(np.full((3, 2), 1 / 6), 1)
    with pytest.raises(DomainError):
        pa_run(block_uniform(4, 3), 0.1, 0.2)
    with pytest.raises(DomainError):
        pa_key_length(block_uniform(4, 3), 1.0, 0.5)


def test_quantum_key_window():
    rho = random_cq_state(1, 2, make_rng(62))
    window = pa_quantum_bounds(rho, (2, 2), 0.2, 0.1)
    assert window["lower"] <= window["upper"]
    assert window["hmin_eps_minus_delta"] <= window["hmin_eps"] + 1e-6
