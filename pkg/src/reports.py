"""
Result records shared by theorem checks and protocol runs.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

SLACK_TOL = 1e-9


@dataclass
class CheckReport:
    """
    Named quantities plus the slack of every inequality that was evaluated.

    A slack is "bound minus measured", so an inequality holds when its slack
    is at least ``-tol``. Infinite slacks are allowed (vacuous bounds).
    """

    name: str
    quantities: Dict[str, float] = field(default_factory=dict)
    slacks: Dict[str, float] = field(default_factory=dict)
    tol: float = SLACK_TOL

    @property
    def min_slack(self) -> float:
        return min(self.slacks.values()) if self.slacks else np.inf

    @property
    def passed(self) -> bool:
        return all(not np.isnan(s) and s >= -self.tol for s in self.slacks.values())

    def to_frame(self) -> pd.DataFrame:
        rows = [{"check": self.name, "inequality": k, "slack": v, "ok": v >= -self.tol} for k, v in self.slacks.items()]
        return pd.DataFrame(rows, columns=["check", "inequality", "slack", "ok"])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "quantities": {k: jsonable(v) for k, v in self.quantities.items()},
            "slacks": {k: jsonable(v) for k, v in self.slacks.items()},
            "passed": self.passed,
        }


@dataclass
class ProtocolReport:
    """
    Outcome of an exact protocol run.

    Args:
        protocol: "state-splitting" or "privacy-amplification".
        error: Exact achieved error (generalized trace distance).
        target_error: Error the run promises (ε).
        resource: Bits communicated (state splitting) or key bits.
        resource_bound: Theorem bound on ``resource``.
        details: Extra quantities of the run.
    """

    protocol: str
    error: float
    target_error: float
    resource: float
    resource_bound: float
    details: Dict[str, float] = field(default_factory=dict)
    tol: float = SLACK_TOL
    optimizer: Optional[np.ndarray] = None
    extra_slacks: Dict[str, float] = field(default_factory=dict)

    @property
    def error_slack(self) -> float:
        return self.target_error - self.error

    @property
    def resource_slack(self) -> float:
        return self.resource_bound - self.resource

    @property
    def passed(self) -> bool:
        slacks = [self.error_slack, self.resource_slack, *self.extra_slacks.values()]
        return all(not np.isnan(s) and s >= -self.tol for s in slacks)

    def as_check(self) -> CheckReport:
        slacks = {"error": self.error_slack, "resource": self.resource_slack, **self.extra_slacks}
        return CheckReport(self.protocol, {"error": self.error, "resource": self.resource}, slacks, tol=self.tol)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "error": self.error,
            "target_error": self.target_error,
            "error_slack": self.error_slack,
            "resource": self.resource,
            "resource_bound": jsonable(self.resource_bound),
            "resource_slack": jsonable(self.resource_slack),
            "details": {k: jsonable(v) for k, v in self.details.items()},
            "extra_slacks": {k: jsonable(v) for k, v in self.extra_slacks.items()},
            "passed": self.passed,
        }


def jsonable(value):
    """Floats as-is; ±inf and nan as strings so JSON output stays strict."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if np.isfinite(value):
        return value
    return str(value)
