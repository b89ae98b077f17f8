import numpy as np
import pytest

from src.reports import CheckReport
from src.statistics.analysis import (
    binomial_interval,
    chi_square_sanity,
    empirical_counts,
    empirical_distance,
    rate_z_score,
    slack_table,
    summarize_reports,
)


def test_binomial_interval():
    low, high = binomial_interval(500, 1000)
    assert low < 0.5 < high
    assert high - low < 0.2
    assert all(np.isnan(binomial_interval(0, 0)))


def test_rate_z_score():
    assert rate_z_score(50, 100, 0.5) == pytest.approx(0.0)
    assert rate_z_score(60, 100, 0.5) == pytest.approx(2.0)
    assert rate_z_score(100, 100, 1.0) == 0.0
    assert np.isnan(rate_z_score(0, 0, 0.5))


def test_empirical_counts_and_distance():
    counts = empirical_counts([np.array([0, 0, 1, 1]), np.array([0, 1, 1, 1])], (2, 2))
    assert counts.tolist() == [[1, 1], [0, 2]]
    assert empirical_distance(counts, np.full((2, 2), 0.25)) == pytest.approx(0.25)
    assert np.isnan(empirical_distance(np.zeros((2, 2)), np.full((2, 2), 0.25)))


def test_chi_square_pools_sparse_cells():
    p = np.array([0.49, 0.49, 0.01, 0.01])
    result = chi_square_sanity(np.array([49, 49, 1, 1]), p)
    assert result["cells"] == 3
    assert result["p_value"] == pytest.approx(1.0)
    assert chi_square_sanity(np.zeros(4), p)["cells"] == 0


def test_report_tables():
    reports = [
        CheckReport("a", {}, {"x <= y": 0.5, "y <= z": 0.0}),
        CheckReport("b", {}, {"u <= v": -0.1}),
    ]
    summary = summarize_reports(reports)
    assert summary["passed"].tolist() == [True, False]
    assert summary["min_slack"].tolist() == pytest.approx([0.0, -0.1])
    slacks = slack_table(reports)
    assert list(slacks.columns) == ["check", "inequality", "slack", "ok"]
    assert len(slacks) == 3
    assert slack_table([]).empty
