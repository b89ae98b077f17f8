import logging
from typing import Dict, Iterable, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from src.probability import generalized_trace_distance
from src.reports import CheckReport


def binomial_interval(successes: int, trials: int, alpha: float = 1e-6) -> Tuple[float, float]:
    """
    Wilson confidence interval for a Bernoulli rate.

    Args:
        successes (int): Number of successes.
        trials (int): Number of trials; 0 gives (nan, nan).
        alpha (float): Significance level (default is close to a 5σ band).
    Returns:
        (low, high)
    """
    if trials == 0:
        return np.nan, np.nan
    low, high = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(low), float(high)


def rate_z_score(successes: int, trials: int, rate: float) -> float:
    """Standardized deviation of an observed count from ``trials · rate``."""
    if trials == 0:
        return np.nan
    spread = np.sqrt(trials * rate * (1.0 - rate))
    if spread == 0:
        return 0.0 if successes == trials * rate else np.inf
    return float((successes - trials * rate) / spread)


def empirical_counts(indices: Iterable[np.ndarray], shape: Tuple[int, ...]) -> np.ndarray:
    """Count table of observed outcome tuples, one index array per axis."""
    flat = np.ravel_multi_index(tuple(np.asarray(i, dtype=np.int64) for i in indices), shape)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)


def empirical_distance(counts: np.ndarray, p: np.ndarray) -> float:
    """T between observed frequencies and a reference table."""
    total = counts.sum()
    if total == 0:
        return np.nan
    return generalized_trace_distance(counts / total, np.asarray(p, dtype=float))


def chi_square_sanity(counts: np.ndarray, p: np.ndarray, min_expected: float = 5.0) -> Dict[str, float]:
    """
    Pearson goodness of fit of ``counts`` against ``p``.

    Cells whose expected count is below ``min_expected`` are pooled into one
    cell so the χ² approximation stays usable.

    Returns:
        dict with statistic, p_value and the number of cells tested.
    """
    observed = np.asarray(counts, dtype=float).ravel()
    probs = np.asarray(p, dtype=float).ravel()
    total = observed.sum()
    if total == 0:
        return {"statistic": np.nan, "p_value": np.nan, "cells": 0}
    expected = probs / probs.sum() * total
    small = expected < min_expected
    if np.any(small):
        observed = np.append(observed[~small], observed[small].sum())
        expected = np.append(expected[~small], expected[small].sum())
        keep = expected > 0
        observed, expected = observed[keep], expected[keep]
    if observed.size < 2:
        return {"statistic": 0.0, "p_value": 1.0, "cells": int(observed.size)}
    result = stats.chisquare(observed, expected)
    logging.debug(f"chi-square: statistic={result.statistic:.4f}, p={result.pvalue:.4g}, cells={observed.size}")
    return {"statistic": float(result.statistic), "p_value": float(result.pvalue), "cells": int(observed.size)}


def summarize_reports(reports: Iterable[CheckReport]) -> pd.DataFrame:
    """
    One row per check report: name, min slack, pass flag.

    Args:
        reports: Check reports, in the order they were produced.
    Returns:
        pd.DataFrame with columns check, min_slack, passed.
    """
    rows = [{"check": r.name, "min_slack": r.min_slack, "passed": r.passed} for r in reports]
    return pd.DataFrame(rows, columns=["check", "min_slack", "passed"])


def slack_table(reports: Iterable[CheckReport]) -> pd.DataFrame:
    """Every evaluated inequality of every report, stacked."""
    frames = [r.to_frame() for r in reports]
    if not frames:
        return pd.DataFrame(columns=["check", "inequality", "slack", "ok"])
    return pd.concat(frames, ignore_index=True)
