import json

import numpy as np
import pytest

from src.reports import CheckReport, ProtocolReport, jsonable


def test_check_report_slacks():
    report = CheckReport("demo", {"a": 1.0}, {"a <= b": 1e-12, "c <= d": -5e-10}, tol=1e-9)
    assert report.passed
    assert report.min_slack == pytest.approx(-5e-10)
    assert not CheckReport("demo", {}, {"a <= b": np.nan}).passed
    assert CheckReport("vacuous", {}, {"a <= inf": np.inf}).passed
    assert CheckReport("empty").min_slack == np.inf


def test_check_report_serializes_non_finite_values():
    report = CheckReport("demo", {"dmax": np.inf}, {"bound": -np.inf})
    payload = report.to_dict()
    assert payload["quantities"]["dmax"] == "inf"
    assert payload["passed"] is False
    json.dumps(payload, allow_nan=False)
    frame = report.to_frame()
    assert frame["ok"].tolist() == [False]


def test_protocol_report():
    report = ProtocolReport(
        protocol="state-splitting",
        error=0.15,
        target_error=0.2,
        resource=3.0,
        resource_bound=3.5,
        extra_slacks={"marginal": 0.0},
    )
    assert report.error_slack == pytest.approx(0.05)
    assert report.resource_slack == pytest.approx(0.5)
    assert report.passed
    check = report.as_check()
    assert set(check.slacks) == {"error", "resource", "marginal"}
    assert check.passed
    report.resource = 4.0
    assert not report.passed
    assert report.to_dict()["passed"] is False


def test_jsonable():
    assert jsonable(np.int64(3)) == 3
    assert jsonable(np.bool_(True)) is True
    assert jsonable(np.nan) == "nan"
    assert jsonable(-np.inf) == "-inf"
    assert jsonable(np.float64(0.5)) == 0.5
