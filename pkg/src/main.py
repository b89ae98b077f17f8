"""
main.py
Command-line entry point.
Runs smoothed measures, theorem checks and protocols and writes JSON/CSV results.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from rich import box
from rich.console import Console
from rich.table import Table

from src.classical_smooth import (
    check_reference_choice_gap,
    check_thm1_sandwich,
    hmin_full_classical,
    hmin_partial_classical,
    imax_full_classical,
    imax_partial_classical,
)
from src.data_load import load_distribution, load_matrix, save_csv, save_json
from src.fixtures import CORRELATED_BITS, random_cq_distribution, random_distribution, random_two_qubit_state
from src.protocols.hashing import ToeplitzHashFamily, two_universality_gap
from src.protocols.merging import merging_cost_bounds
from src.protocols.privacy_amplification import (
    input_bits,
    pa_converse_check,
    pa_quantum_bounds,
    pa_run,
    pa_sweep,
    privacy_amplify_exact,
)
from src.protocols.state_splitting import split_spectrum_bounds, state_split_exact, state_split_sample
from src.quantum_smooth.constructions import check_thm2_sandwich, check_thm3_sandwich
from src.quantum_smooth.measures import (
    SmoothingBall,
    first_order_trend,
    hmin_full_quantum,
    hmin_partial_quantum,
    hmin_unsmoothed,
    imax_full_quantum,
    imax_partial_quantum,
    imax_unsmoothed,
)
from src.quantum_smooth.states import as_state, dmax_quantum
from src.reports import CheckReport, jsonable
from src.spectrum import h_s, i_s, second_order_table
from src.statistics.analysis import slack_table, summarize_reports
from src.util.config import LOG_LEVEL, MAX_CELLS, MAX_DIM, OUTPUT_PATH
from src.util.errors import DomainError, NumericalFailure, ResourceError, UsageError
from src.util.utils import make_rng, setup_logging

console = Console()

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

CLASSICAL_KINDS = {
    "imax-partial": imax_partial_classical,
    "hmin-partial": hmin_partial_classical,
    "imax-full": imax_full_classical,
    "hmin-full": hmin_full_classical,
}
QUANTUM_KINDS = {
    "imax-partial": imax_partial_quantum,
    "hmin-partial": hmin_partial_quantum,
    "imax-full": imax_full_quantum,
    "hmin-full": hmin_full_quantum,
}
THM_EPS = (0.05, 0.1, 0.3)


@dataclass
class RunConfig:
    """Validated options of one CLI invocation."""

    command: str
    input: Optional[str] = None
    sigma: Optional[str] = None
    kind: Optional[str] = None
    metric: str = "P"
    eps: float = 0.1
    delta: Optional[float] = None
    ns: List[int] = field(default_factory=list)
    ell: Optional[int] = None
    n_bits: Optional[int] = None
    trials: int = 0
    seed: int = 0
    workers: int = 1
    quantum: bool = False
    trend: bool = False
    sweep: bool = False
    bound_shift: float = 0.0
    output: Optional[str] = None
    fmt: str = "json"
    max_cells: int = MAX_CELLS
    max_dim: int = MAX_DIM

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls(**{k: v for k, v in vars(args).items() if k in cls.__dataclass_fields__ and v is not None})
        if not 0 <= cfg.seed < 2**64:
            raise UsageError(f"--seed must be a 64-bit unsigned integer, got {cfg.seed}")
        if cfg.trials < 0 or cfg.workers < 1:
            raise UsageError("--trials must be ≥ 0 and --workers ≥ 1")
        if cfg.delta is not None and not 0 < cfg.delta <= cfg.eps:
            raise DomainError(f"δ must lie in (0, ε] (got ε={cfg.eps}, δ={cfg.delta})")
        if any(n < 1 for n in cfg.ns):
            raise UsageError(f"--ns values must be positive, got {cfg.ns}")
        return cfg

    def output_path(self, default_name: str) -> Path:
        return Path(self.output) if self.output else Path(OUTPUT_PATH) / default_name


def print_message(message: str, style: str = "bold green"):
    console.print(message, style=style)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.6f}"
    return str(value)


def print_quantities(title: str, quantities: Dict) -> None:
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    table.add_column("Quantity", style="cyan", no_wrap=True)
    table.add_column("Value", style="magenta")
    for key, value in quantities.items():
        table.add_row(str(key), _fmt(value))
    console.print(table)


def print_frame(title: str, frame: pd.DataFrame) -> None:
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    for col in frame.columns:
        table.add_column(str(col), style="cyan")
    for _, row in frame.iterrows():
        table.add_row(*[_fmt(x) for x in row])
    console.print(table)


def print_check_summary(reports: Sequence[CheckReport]) -> None:
    summary = summarize_reports(reports)
    failed = summary[~summary["passed"]]
    print_message(f"\n📊 {len(summary) - len(failed)}/{len(summary)} checks passed", style="bold magenta")
    if not failed.empty:
        print_frame("Failed checks", failed)


def _require_input(cfg: RunConfig) -> str:
    if not cfg.input:
        raise UsageError(f"'{cfg.command}' needs --input")
    return cfg.input


def cmd_measure(cfg: RunConfig) -> int:
    p = load_distribution(_require_input(cfg))
    print_message(f"🔧 {cfg.kind} with ε={cfg.eps} on a {p.shape} table", style="bold blue")
    if cfg.kind == "is":
        result = {"value": jsonable(i_s(p, cfg.eps))}
    elif cfg.kind == "hs":
        result = {"value": jsonable(h_s(p, cfg.eps))}
    else:
        result = CLASSICAL_KINDS[cfg.kind](p, cfg.eps).to_dict()
    result.update({"kind": cfg.kind, "eps": cfg.eps})
    print_quantities(f"{cfg.kind} (ε={cfg.eps})", {"value": result["value"]})
    save_json(result, cfg.output_path(f"measure_{cfg.kind}.json"))
    return EXIT_OK


def cmd_qmeasure(cfg: RunConfig) -> int:
    rho, dims = load_matrix(_require_input(cfg))
    if dims is None:
        raise UsageError("State JSON needs a 'dims' entry")
    print_message(f"🔧 {cfg.kind} on a {dims} state", style="bold blue")
    if cfg.kind == "dmax":
        if not cfg.sigma:
            raise UsageError("'dmax' needs --sigma")
        sigma, _ = load_matrix(cfg.sigma)
        result = {"value": jsonable(dmax_quantum(as_state(rho, [rho.shape[0]]), sigma))}
    elif cfg.kind == "imax":
        result = imax_unsmoothed(rho, dims, max_dim=cfg.max_dim).to_dict()
    elif cfg.kind == "hmin":
        result = hmin_unsmoothed(rho, dims).to_dict()
    elif cfg.kind == "merging":
        delta = cfg.delta if cfg.delta is not None else cfg.eps / 2
        result = {k: jsonable(v) for k, v in merging_cost_bounds(rho, dims, cfg.eps, delta, cfg.max_dim).items()}
    else:
        ball = SmoothingBall(cfg.metric, cfg.eps)
        result = QUANTUM_KINDS[cfg.kind](rho, dims, ball, max_dim=cfg.max_dim).to_dict()
    result.update({"kind": cfg.kind, "eps": cfg.eps, "metric": cfg.metric})
    print_quantities(f"{cfg.kind}", {k: v for k, v in result.items() if not isinstance(v, (dict, list))})
    save_json(result, cfg.output_path(f"qmeasure_{cfg.kind}.json"))
    return EXIT_OK


def cmd_second_order(cfg: RunConfig) -> int:
    p = load_distribution(cfg.input) if cfg.input else CORRELATED_BITS
    ns = cfg.ns or [64, 128, 256, 512, 1024]
    frame = second_order_table(p, cfg.eps, ns, max_cells=cfg.max_cells)
    frame = frame.rename(
        columns={"exact_rate": "exact", "predicted_rate": "predicted", "normalized_residual": "residual*n/log2(n)"}
    )
    print_frame(f"Second-order expansion (ε={cfg.eps})", frame)
    save_csv(frame, cfg.output_path("second_order.csv"))
    return EXIT_OK


def cmd_split(cfg: RunConfig) -> int:
    p = load_distribution(cfg.input) if cfg.input else CORRELATED_BITS
    delta = cfg.delta if cfg.delta is not None else cfg.eps / 4
    report = state_split_exact(p, cfg.eps, delta)
    payload = report.to_dict()
    payload["spectrum_bounds"] = {k: jsonable(v) for k, v in split_spectrum_bounds(p, cfg.eps, delta).items()}
    print_quantities("State splitting", {**payload["details"], "error": report.error, "bits": report.resource})
    if cfg.trials:
        print_message(f"🎲 Sampling {cfg.trials} runs (seed {cfg.seed})", style="cyan")
        sample = state_split_sample(p, cfg.eps, delta, cfg.trials, seed=cfg.seed)
        payload["sample"] = {k: jsonable(v) for k, v in sample.stats.items()}
        print_quantities("Sampled run", sample.stats)
    save_json(payload, cfg.output_path("split.json"))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_pa(cfg: RunConfig) -> int:
    if cfg.quantum:
        rho, dims = load_matrix(_require_input(cfg))
        delta = cfg.delta if cfg.delta is not None else cfg.eps / 4
        bounds = pa_quantum_bounds(rho, dims, cfg.eps, delta, max_dim=cfg.max_dim)
        print_quantities("Key length window (quantum side information)", bounds)
        save_json({k: jsonable(v) for k, v in bounds.items()}, cfg.output_path("pa_quantum.json"))
        return EXIT_OK

    p = load_distribution(_require_input(cfg))
    if cfg.n_bits is not None and input_bits(p) != cfg.n_bits:
        raise UsageError(f"--n {cfg.n_bits} does not match |X| = {p.shape[0]}")
    if cfg.sweep:
        frame = pa_sweep(p, max_cells=cfg.max_cells)
        print_frame("Security value per key length", frame)
        save_csv(frame, cfg.output_path("pa_sweep.csv"))
        return EXIT_OK
    if cfg.ell is not None:
        report = privacy_amplify_exact(p, cfg.ell, max_cells=cfg.max_cells)
        checks = [report.as_check()]
    else:
        delta = cfg.delta if cfg.delta is not None else cfg.eps / 4
        report = pa_run(p, cfg.eps, delta, max_cells=cfg.max_cells)
        checks = [report.as_check(), pa_converse_check(p, cfg.eps, max_cells=cfg.max_cells)]
    print_quantities("Privacy amplification", {"ell": report.resource, "error": report.error, "bound": report.target_error})
    payload = report.to_dict()
    payload["checks"] = [c.to_dict() for c in checks]
    save_json(payload, cfg.output_path("pa.json"))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def _classical_fixture(task) -> List[CheckReport]:
    """Theorem checks on one seeded classical fixture; top-level so worker processes can pickle it."""
    seed, index, max_cells = task
    rng = make_rng(seed, index)
    side = 3 + index % 2
    p = random_distribution((side, side), rng)
    eps = THM_EPS[index % len(THM_EPS)]
    delta = eps / 2
    q_y = rng.dirichlet(np.ones(side))
    reports = [
        check_thm1_sandwich(p, eps, delta),
        check_reference_choice_gap(p, q_y, eps, delta),
        state_split_exact(p, eps, delta).as_check(),
    ]
    cq = random_cq_distribution(2, 2, rng)
    reports.append(pa_run(cq, 0.2, 0.05, max_cells=max_cells).as_check())
    reports.append(pa_converse_check(cq, 0.2, max_cells=max_cells))
    for r in reports:
        r.name = f"{r.name}[{index}]"
    return reports


def _quantum_fixture(task) -> List[CheckReport]:
    seed, index, max_dim = task
    rng = make_rng(seed, 1_000_000 + index)
    rho = random_two_qubit_state(rng)
    reports = [
        check_thm2_sandwich(rho, (2, 2), 0.1, 0.05, max_dim=max_dim),
        check_thm3_sandwich(rho, (2, 2), 0.1, 0.05, max_dim=max_dim),
    ]
    for r in reports:
        r.name = f"{r.name}[{index}]"
    return reports


def _fan_out(fn, tasks: list, workers: int) -> List[CheckReport]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(fn, tasks))
    else:
        batches = [fn(t) for t in tasks]
    return [r for batch in batches for r in batch]


def _shift_bounds(reports: List[CheckReport], shift: float) -> None:
    """Test hook: moves every bound by ``shift`` so the failure path can be exercised."""
    for r in reports:
        r.slacks = {k: v - shift for k, v in r.slacks.items()}


def cmd_thmcheck(cfg: RunConfig) -> int:
    trials = cfg.trials or 20
    print_message(f"🧪 Theorem checks on {trials} fixtures (seed {cfg.seed}, {cfg.workers} workers)", style="bold blue")
    reports = _fan_out(_classical_fixture, [(cfg.seed, i, cfg.max_cells) for i in range(trials)], cfg.workers)

    universality = {}
    for n in range(1, 6):
        for ell in range(n + 1):
            gap = two_universality_gap(ToeplitzHashFamily(n, ell), max_cells=cfg.max_cells)
            universality[f"n={n}, ell={ell}"] = -gap
    reports.append(CheckReport("toeplitz_two_universal", {}, universality))

    if cfg.quantum:
        q_trials = max(1, trials // 4)
        print_message(f"⚛️  Quantum sandwiches on {q_trials} two-qubit states", style="cyan")
        reports += _fan_out(_quantum_fixture, [(cfg.seed, i, cfg.max_dim) for i in range(q_trials)], cfg.workers)

    if cfg.bound_shift:
        _shift_bounds(reports, cfg.bound_shift)

    if cfg.trend:
        rho = random_two_qubit_state(make_rng(cfg.seed, 2_000_000))
        trend = pd.DataFrame(first_order_trend(rho, (2, 2), cfg.eps, max_dim=cfg.max_dim))
        print_frame("First-order trend (no tolerance asserted)", trend)
        save_csv(trend, cfg.output_path("thmcheck.csv").with_name("first_order_trend.csv"))

    print_check_summary(reports)
    table = slack_table(reports)
    if cfg.fmt == "csv":
        save_csv(table, cfg.output_path("thmcheck.csv"))
    else:
        save_json({"reports": [r.to_dict() for r in reports]}, cfg.output_path("thmcheck.json"))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


COMMANDS = {
    "measure": cmd_measure,
    "qmeasure": cmd_qmeasure,
    "second-order": cmd_second_order,
    "split": cmd_split,
    "pa": cmd_pa,
    "thmcheck": cmd_thmcheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Partially smoothed one-shot information measures")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Logging level (DEBUG, INFO, ...)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, eps_default: float = 0.1) -> None:
        p.add_argument("--eps", type=float, default=eps_default, help="Smoothing radius ε")
        p.add_argument("--output", type=str, default=None, help="Output file (default under OUTPUT_PATH)")
        p.add_argument("--max-cells", dest="max_cells", type=int, default=None, help="Resource cap on table cells")
        p.add_argument("--max-dim", dest="max_dim", type=int, default=None, help="Cap on SDP dimension")

    p = sub.add_parser("measure", help="Classical smoothed measure of a distribution JSON")
    common(p)
    p.add_argument("--kind", choices=[*CLASSICAL_KINDS, "is", "hs"], required=True)
    p.add_argument("--input", required=True)

    p = sub.add_parser("qmeasure", help="Quantum measure of a state JSON")
    common(p)
    p.add_argument("--kind", choices=["dmax", "imax", "hmin", *QUANTUM_KINDS, "merging"], required=True)
    p.add_argument("--metric", choices=["P", "T"], default="P")
    p.add_argument("--input", required=True)
    p.add_argument("--sigma", default=None, help="Reference state JSON for dmax")
    p.add_argument("--delta", type=float, default=None)

    p = sub.add_parser("second-order", help="Exact spectrum rates against the second-order expansion")
    common(p, eps_default=0.25)
    p.add_argument("--input", default=None, help="Distribution JSON (default: correlated bits)")
    p.add_argument("--ns", type=int, nargs="+", default=None)

    p = sub.add_parser("split", help="State splitting: exact error and optional Monte-Carlo run")
    common(p, eps_default=0.2)
    p.add_argument("--input", default=None, help="Distribution JSON (default: correlated bits)")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("pa", help="Privacy amplification with Toeplitz hashing")
    common(p, eps_default=0.2)
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--ell", type=int, default=None, help="Fixed key length (otherwise chosen from ε, δ)")
    p.add_argument("--n", dest="n_bits", type=int, default=None, help="Expected input bits")
    p.add_argument("--sweep", action="store_true", help="Security value for every key length")
    p.add_argument("--quantum", action="store_true", help="Input is a cq state; report the key length window")

    p = sub.add_parser("thmcheck", help="Theorem checks on seeded random fixtures")
    common(p)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quantum", action="store_true", help="Add the quantum sandwiches and constructions")
    p.add_argument("--trend", action="store_true", help="Print the first-order trend of tensor powers")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")
    p.add_argument("--bound-shift", dest="bound_shift", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv: Sequence[str] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        cfg = RunConfig.from_args(args)
        code = COMMANDS[cfg.command](cfg)
    except (UsageError, DomainError, ResourceError) as e:
        print_message(f"❌ {e}", style="red")
        logging.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except NumericalFailure as e:
        print_message(f"❌ Numerical failure: {e}", style="red")
        logging.error(f"{args.command}: {e}")
        return EXIT_NUMERICAL
    if code == EXIT_OK:
        print_message(f"✅ {cfg.command} finished", style="bold green")
    else:
        print_message(f"⚠️  {cfg.command}: a checked inequality failed", style="bold yellow")
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
