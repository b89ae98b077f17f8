import numpy as np
import pytest

from src.fixtures import random_tripartite_pure, werner_state
from src.protocols.merging import merging_cost_bounds
from src.quantum_smooth.states import maximally_entangled, permute_systems
from src.util.errors import DomainError, UsageError
from src.util.utils import make_rng


def test_windows_are_ordered():
    psi = random_tripartite_pure((2, 2, 2), make_rng(80))
    bounds = merging_cost_bounds(psi, (2, 2, 2), 0.2, 0.1)
    assert set(bounds) == {"entanglement_lower", "entanglement_upper", "classical_lower", "classical_upper"}
    assert bounds["entanglement_lower"] <= bounds["entanglement_upper"]
    assert bounds["classical_lower"] <= bounds["classical_upper"]


def test_reference_entangled_with_a():
    # Φ_AR ⊗ |0⟩⟨0|_B, reordered to A B R
    psi = permute_systems(np.kron(maximally_entangled(2), np.diag([1.0, 0.0])), (2, 2, 2), [0, 2, 1])
    bounds = merging_cost_bounds(psi, (2, 2, 2), 0.1, 0.05)
    assert bounds["entanglement_lower"] <= 1.0 + 1e-6
    assert bounds["entanglement_lower"] > 0.0
    assert bounds["classical_lower"] <= 2.0 + 1e-6


def test_input_checks():
    mixed = np.kron(werner_state(0.5), np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        merging_cost_bounds(mixed, (2, 2, 2), 0.2, 0.1)
    psi = random_tripartite_pure((2, 2, 2), make_rng(81))
    with pytest.raises(UsageError):
        merging_cost_bounds(psi, (4, 2), 0.2, 0.1)
    with pytest.raises(DomainError):
        merging_cost_bounds(psi, (2, 2, 2), 0.1, 0.2)
