import itertools

import numpy as np
import pytest

from src.lp import LPProblem, solve_lp
from src.util.errors import UsageError
from src.util.utils import make_rng


def test_textbook_maximization():
    # max 3x + 5y  s.t.  x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18
    prob = LPProblem(
        c=[3.0, 5.0],
        a=[[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]],
        senses=["<=", "<=", "<="],
        b=[4.0, 12.0, 18.0],
        maximize=True,
    )
    sol = solve_lp(prob)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(36.0)
    assert sol.x == pytest.approx([2.0, 6.0])
    assert sol.gap == pytest.approx(0.0, abs=1e-9)
    assert sol.residual <= 1e-9


def test_equality_and_ge_rows_with_bounds():
    # min x + 2y  s.t.  x + y = 1,  x ≥ 0.25,  0 ≤ x ≤ 0.6
    prob = LPProblem(
        c=[1.0, 2.0],
        a=[[1.0, 1.0], [1.0, 0.0]],
        senses=["=", ">="],
        b=[1.0, 0.25],
        ub=[0.6, np.inf],
    )
    sol = solve_lp(prob)
    assert sol.status == "optimal"
    assert sol.x == pytest.approx([0.6, 0.4])
    assert sol.value == pytest.approx(1.4)
    assert sol.dual_value == pytest.approx(sol.value, abs=1e-9)


def test_negative_rhs_and_shifted_lower_bounds():
    # min x + y  s.t.  -x - y ≤ -3,  x ≥ 1, y ≥ 1 (as bounds)
    prob = LPProblem(c=[1.0, 1.0], a=[[-1.0, -1.0]], senses=["<="], b=[-3.0], lb=[1.0, 1.0])
    sol = solve_lp(prob)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(3.0)
    assert np.all(sol.x >= 1.0 - 1e-12)


def test_infeasible_returns_farkas_certificate():
    prob = LPProblem(c=[1.0], a=[[1.0], [1.0]], senses=["<=", ">="], b=[1.0, 2.0])
    sol = solve_lp(prob)
    assert sol.status == "infeasible"
    y = sol.farkas
    assert y is not None
    assert float(prob.a.T @ y) <= 1e-9
    assert float(prob.b @ y) > 0


def test_unbounded():
    prob = LPProblem(c=[-1.0, 0.0], a=[[0.0, 1.0]], senses=["<="], b=[1.0])
    assert solve_lp(prob).status == "unbounded"


def test_redundant_equalities():
    prob = LPProblem(
        c=[1.0, 1.0, 1.0],
        a=[[1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [1.0, 0.0, 0.0]],
        senses=["=", "=", ">="],
        b=[1.0, 2.0, 0.5],
    )
    sol = solve_lp(prob)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0)
    assert sol.x[0] >= 0.5 - 1e-12


def test_deterministic_pivoting():
    rng = np.random.default_rng(3)
    a = rng.uniform(0.1, 1.0, size=(6, 8))
    prob = LPProblem(c=-rng.uniform(size=8), a=a, senses=["<="] * 6, b=np.ones(6))
    first, second = solve_lp(prob), solve_lp(prob)
    assert first.pivots == second.pivots
    assert np.array_equal(first.x, second.x)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"c": [1.0], "a": [[1.0]], "senses": ["<"], "b": [1.0]},
        {"c": [1.0], "a": [[1.0]], "senses": ["<="], "b": [1.0, 2.0]},
        {"c": [np.nan], "a": [[1.0]], "senses": ["<="], "b": [1.0]},
        {"c": [1.0], "a": [[1.0]], "senses": ["<="], "b": [1.0], "lb": [-np.inf]},
    ],
)
def test_malformed_problems(kwargs):
    with pytest.raises(UsageError):
        LPProblem(**kwargs)


def _vertex_optimum(c, a, b):
    """min cᵀx over {a x ≤ b, 0 ≤ x ≤ 1} by trying every basis of n tight rows."""
    n = c.size
    g = np.vstack([a, -np.eye(n), np.eye(n)])
    h = np.concatenate([b, np.zeros(n), np.ones(n)])
    best = np.inf
    for rows in itertools.combinations(range(g.shape[0]), n):
        sub = g[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        x = np.linalg.solve(sub, h[list(rows)])
        if np.all(g @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


@pytest.mark.parametrize("seed", range(60))
def test_matches_vertex_enumeration(seed):
    rng = make_rng(90, seed)
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 5))
    c = rng.normal(size=n)
    a = rng.normal(size=(m, n))
    # b ≥ 0 keeps x = 0 feasible; the box keeps the optimum finite
    b = rng.uniform(0.0, 2.0, size=m)
    sol = solve_lp(LPProblem(c=c, a=a, senses=["<="] * m, b=b, ub=np.ones(n)))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(_vertex_optimum(c, a, b), abs=1e-8)
