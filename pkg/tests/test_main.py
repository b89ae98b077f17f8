import json

import numpy as np
import pandas as pd
import pytest

from src.data_load import save_distribution, save_matrix
from src.fixtures import CORRELATED_BITS, block_uniform
from src.main import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from src.quantum_smooth.states import maximally_entangled


@pytest.fixture
def bits_file(tmp_path):
    return str(save_distribution(CORRELATED_BITS, tmp_path / "bits.json"))


def test_measure_writes_value(tmp_path, bits_file):
    out = tmp_path / "imax.json"
    code = main(["measure", "--kind", "imax-partial", "--eps", "0.1", "--input", bits_file, "--output", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["value"] == pytest.approx(np.log2(1.6), abs=1e-9)
    assert payload["kind"] == "imax-partial"


def test_information_spectrum_kind(tmp_path, bits_file):
    out = tmp_path / "is.json"
    assert main(["measure", "--kind", "is", "--eps", "0.3", "--input", bits_file, "--output", str(out)]) == EXIT_OK
    assert "value" in json.loads(out.read_text())


def test_usage_and_domain_errors(tmp_path, bits_file):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["measure", "--kind", "hmin-partial", "--input", str(broken)]) == EXIT_USAGE
    assert main(["measure", "--kind", "hmin-partial", "--eps", "1.5", "--input", bits_file]) == EXIT_USAGE
    assert main(["split", "--eps", "0.1", "--delta", "0.2", "--output", str(tmp_path / "s.json")]) == EXIT_USAGE
    with pytest.raises(SystemExit):
        main(["measure", "--kind", "imax-partial"])


def test_split_command(tmp_path):
    out = tmp_path / "split.json"
    code = main(["split", "--eps", "0.2", "--delta", "0.05", "--trials", "2000", "--seed", "5", "--output", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["passed"] is True
    assert payload["details"]["N"] == 8
    assert payload["sample"]["trials"] == 2000
    assert set(payload["spectrum_bounds"]) == {"lower", "upper"}


def test_pa_commands(tmp_path):
    source = str(save_distribution(block_uniform(4, 3), tmp_path / "xy.json"))
    sweep = tmp_path / "sweep.csv"
    assert main(["pa", "--input", source, "--sweep", "--output", str(sweep)]) == EXIT_OK
    assert pd.read_csv(sweep)["ell"].tolist() == [0, 1, 2, 3, 4]
    fixed = tmp_path / "fixed.json"
    assert main(["pa", "--input", source, "--ell", "1", "--output", str(fixed)]) == EXIT_OK
    assert json.loads(fixed.read_text())["error"] <= 0.25
    assert main(["pa", "--input", source, "--n", "3", "--output", str(fixed)]) == EXIT_USAGE


def test_qmeasure(tmp_path):
    state = str(save_matrix(maximally_entangled(2), tmp_path / "phi.json", dims=(2, 2)))
    out = tmp_path / "q.json"
    assert main(["qmeasure", "--kind", "imax", "--input", state, "--output", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["value"] == pytest.approx(2.0, abs=1e-6)
    bare = str(save_matrix(maximally_entangled(2), tmp_path / "bare.json"))
    assert main(["qmeasure", "--kind", "hmin", "--input", bare]) == EXIT_USAGE


def test_second_order_csv(tmp_path):
    out = tmp_path / "second.csv"
    assert main(["second-order", "--ns", "16", "32", "--output", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert frame["n"].tolist() == [16, 32]


def test_thmcheck_exit_codes(tmp_path):
    out = tmp_path / "thm.json"
    assert main(["thmcheck", "--trials", "2", "--seed", "1", "--output", str(out)]) == EXIT_OK
    reports = json.loads(out.read_text())["reports"]
    assert all(r["passed"] for r in reports)
    shifted = ["thmcheck", "--trials", "2", "--bound-shift", "1.0", "--output", str(tmp_path / "shift.json")]
    assert main(shifted) == EXIT_CHECK_FAILED


def test_thmcheck_csv(tmp_path):
    out = tmp_path / "thm.csv"
    assert main(["thmcheck", "--trials", "1", "--format", "csv", "--output", str(out)]) == EXIT_OK
    assert list(pd.read_csv(out).columns) == ["check", "inequality", "slack", "ok"]
