import numpy as np
import pytest

from src.fixtures import (
    classical_quantum_state,
    correlated_qubits,
    random_cq_state,
    random_tripartite_pure,
    random_two_qubit_state,
    werner_state,
)
from src.quantum_smooth.constructions import (
    check_coherent_classical,
    check_contraction,
    check_convex_split,
    check_dimension_bound,
    check_function_monotonicity,
    check_projective_measurement,
    check_thm2_sandwich,
    check_thm3_sandwich,
    coherent_copy,
    convex_split_distance,
    convex_split_state,
    convex_split_threshold,
    cq_function_apply,
    equivalence_penalty,
    projective_measure_cq,
    thm2_hat_construction,
)
from src.quantum_smooth.measures import SmoothingBall, imax_full_quantum
from src.quantum_smooth.states import partial_trace, permute_systems, random_contraction, random_state
from src.util.errors import DomainError, ResourceError, UsageError
from src.util.utils import make_rng


def test_equivalence_penalty():
    assert equivalence_penalty(1.0) == pytest.approx(np.log2(9.0))
    assert equivalence_penalty(0.05) == pytest.approx(np.log2(8.0025 / 0.0025))


@pytest.mark.parametrize("state", [correlated_qubits(), werner_state(0.8), random_two_qubit_state(make_rng(21))])
def test_thm2_sandwich(state):
    report = check_thm2_sandwich(state, (2, 2), 0.1, 0.05)
    assert report.passed, report.slacks
    assert report.quantities["imax_partial"] >= report.quantities["imax_full"] - 1e-5


@pytest.mark.parametrize("state", [correlated_qubits(), werner_state(0.8), random_two_qubit_state(make_rng(22))])
def test_thm3_sandwich(state):
    report = check_thm3_sandwich(state, (2, 2), 0.1, 0.05)
    assert report.passed, report.slacks


def test_sandwich_domain():
    with pytest.raises(DomainError):
        check_thm2_sandwich(werner_state(0.8), (2, 2), 0.45, 0.1)
    with pytest.raises(DomainError):
        check_thm3_sandwich(werner_state(0.8), (2, 2), 0.1, 0.0)


def test_hat_construction_pins_marginal():
    rho = random_two_qubit_state(make_rng(23))
    full = imax_full_quantum(rho, (2, 2), SmoothingBall("P", 0.1))
    hat = thm2_hat_construction(rho, full.state, full.sigma, (2, 2), 0.05)
    assert np.allclose(partial_trace(hat.state, (2, 2), [0]), partial_trace(rho, (2, 2), [0]), atol=1e-8)
    assert np.allclose(hat.unitary @ hat.unitary.conj().T, np.eye(2), atol=1e-10)
    assert hat.distance <= hat.distance_bound + 1e-7
    assert hat.dmax <= hat.dmax_bound + 1e-6


@pytest.mark.parametrize("metric", ["T", "P"])
def test_convex_split_threshold_and_check(metric):
    rho = correlated_qubits()
    sigma = partial_trace(rho, (2, 2), [1])
    # ⌈log2(1.8) + 2·log2(8)⌉
    assert convex_split_threshold(rho, sigma, (2, 2), 0.25) == 7
    report = check_convex_split(rho, rho, sigma, (2, 2), 0.25, metric=metric)
    assert report.quantities["R"] == 7
    assert report.passed, report.to_dict()
    assert report.quantities["distance"] <= 0.25


@pytest.mark.parametrize("metric", ["T", "P"])
def test_convex_split_from_nearby_state(metric):
    rho = correlated_qubits(0.1)
    rho_prime = correlated_qubits(0.15)
    sigma = partial_trace(rho_prime, (2, 2), [1])
    report = check_convex_split(rho, rho_prime, sigma, (2, 2), 0.25, metric=metric)
    assert report.quantities["eps"] > 0
    assert report.passed, report.to_dict()


def test_convex_split_below_threshold_is_not_asserted():
    rho = correlated_qubits()
    sigma = partial_trace(rho, (2, 2), [1])
    report = check_convex_split(rho, rho, sigma, (2, 2), 0.25, r=1)
    assert report.slacks == {}
    assert report.passed


@pytest.mark.parametrize("metric", ["T", "P"])
@pytest.mark.parametrize("r", [1, 2])
def test_type_class_path_matches_dense_state(metric, r):
    rho = correlated_qubits(0.2)
    sigma = np.diag([0.6, 0.4]).astype(complex)
    fast = convex_split_distance(rho, rho, sigma, (2, 2), r, metric)
    pair = convex_split_state(rho, rho, sigma, (2, 2), r)
    # a tiny off-diagonal entry forces the dense path
    nudged = sigma + 1e-9 * np.array([[0, 1], [1, 0]])
    dense = convex_split_distance(rho, rho, nudged, (2, 2), r, metric)
    assert pair.tau.shape == (2 * 2 ** (2**r),) * 2
    assert np.trace(pair.tau).real == pytest.approx(1.0)
    assert fast == pytest.approx(dense, abs=1e-6)


def test_convex_split_dense_cap():
    rho = werner_state(0.5)
    sigma = np.eye(2) / 2
    with pytest.raises(ResourceError):
        convex_split_state(rho, rho, sigma, (2, 2), 3, max_dim=64)
    with pytest.raises(DomainError):
        convex_split_threshold(rho, np.diag([1.0, 0.0]), (2, 2), 0.25)


def test_cq_function_apply_merges_blocks():
    rng = make_rng(41)
    states = [random_state(2, rng) for _ in range(3)]
    rho = classical_quantum_state(np.array([0.2, 0.3, 0.5]), states)
    omega, dims = cq_function_apply(rho, (3, 2), [0, 1, 1])
    assert dims == (2, 2)
    assert np.allclose(omega[2:, 2:], 0.3 * states[1] + 0.5 * states[2])
    assert np.allclose(omega[:2, 2:], 0.0)
    with pytest.raises(UsageError):
        cq_function_apply(werner_state(0.5), (2, 2), [0, 0])


def test_projective_measurement():
    rho = random_two_qubit_state(make_rng(42))
    projectors = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    omega, dims = projective_measure_cq(rho, (2, 2), projectors)
    assert dims == (2, 2, 2)
    assert np.trace(omega).real == pytest.approx(1.0)
    sigma = partial_trace(rho, (2, 2), [1])
    assert check_projective_measurement(rho, (2, 2), sigma, projectors).passed
    with pytest.raises(UsageError):
        projective_measure_cq(rho, (2, 2), [np.diag([1.0, 0.0])])


def test_contraction():
    rng = make_rng(43)
    rho = random_two_qubit_state(rng)
    assert check_contraction(rho, (2, 2), random_contraction(2, 3, rng)).passed


def test_function_monotonicity_on_cq_state():
    rho = random_cq_state(2, 2, make_rng(44))
    assert check_function_monotonicity(rho, (4, 2), [0, 1, 1, 0], 0.1).passed


def test_dimension_bound():
    rho = random_tripartite_pure((2, 2, 2), make_rng(45))
    assert check_dimension_bound(rho, (2, 2, 2), 0.1).passed


def test_coherent_classical():
    rng = make_rng(46)
    rho_xa = classical_quantum_state(np.array([0.4, 0.6]), [random_state(2, rng) for _ in range(2)])
    copied, dims = coherent_copy(rho_xa, (2, 2, 1), 0)
    assert dims == (2, 2, 1, 2)
    # X A B X′ → A B X X′
    rho = permute_systems(copied, dims, [1, 2, 0, 3])
    assert check_coherent_classical(rho, (2, 1, 2, 2), 0.1).passed
