import numpy as np
import pytest

from src.protocols.hashing import ToeplitzHashFamily, bits_to_int, collision_matrix, int_to_bits, two_universality_gap
from src.util.errors import ResourceError, UsageError


def test_bit_conversions_are_msb_first():
    assert int_to_bits(np.array(5), 4).tolist() == [0, 1, 0, 1]
    assert int_to_bits(np.array([1, 6]), 3).tolist() == [[0, 0, 1], [1, 1, 0]]
    assert int(bits_to_int(np.array([1, 0, 1, 1]))) == 11


def test_toeplitz_matrix_layout():
    family = ToeplitzHashFamily(3, 2)
    assert family.seed_bits == 4
    assert family.size == 16
    # s = 1011
    assert family.matrix(0b1011).tolist() == [[1, 0, 1], [1, 1, 0]]


def test_table_matches_single_hashes():
    family = ToeplitzHashFamily(4, 2)
    table = family.table()
    assert table.shape == (32, 16)
    for seed in (0, 7, 19, 31):
        for x in (0, 3, 9, 15):
            assert table[seed, x] == family.hash(seed, x)
    assert table.max() < 4


@pytest.mark.parametrize("n, ell", [(1, 1), (3, 1), (3, 2), (4, 2), (5, 3), (5, 5)])
def test_two_universality(n, ell):
    assert two_universality_gap(ToeplitzHashFamily(n, ell)) <= 1e-12


def test_zero_output_bits():
    family = ToeplitzHashFamily(3, 0)
    assert family.seed_bits == 0
    assert np.all(family.table() == 0)
    assert np.all(collision_matrix(family) == 1.0)


def test_family_limits():
    with pytest.raises(UsageError):
        ToeplitzHashFamily(3, 4)
    with pytest.raises(UsageError):
        ToeplitzHashFamily(3, 2).matrix(16)
    with pytest.raises(ResourceError):
        ToeplitzHashFamily(6, 3).table(max_cells=1000)
