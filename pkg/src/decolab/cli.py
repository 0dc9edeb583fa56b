"""Command-line front end: ``simulate``, ``bound``, ``sweep`` and ``check``.

Outputs are offline CSV/JSON tables meant for external plotting; identical
invocations (including seeds) produce byte-identical files.  Exit codes are
a stable contract: 0 success, 1 failed self-check, 2 usage or parse error,
3 desk-scale resource cap exceeded.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .channels import (
    GATES,
    channel_apply,
    channel_validate,
    random_channel,
)
from .circuit import CircuitError, parse_circuit_file
from .config import ResourceLimitError
from .linalg import random_density, trace_distance

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


@dataclass
class RunConfig:
    """Everything a subcommand needs, validated before any computation."""

    command: str
    circuit: str | None = None
    eta: float | None = None
    k: list[int] = field(default_factory=list)
    depth: int = 10
    width: int | None = None
    n: list[int] = field(default_factory=lambda: [1])
    eps: float = analysis.DEFAULT_EPS
    seed: int = 0
    probes: str | None = None
    output: str | None = None
    fmt: str = "csv"
    extra_noise_round: bool = False
    jobs: int = 1
    suite: str = "all"
    qubits: int = 3
    trials: int | None = None
    etas: list[float] = field(default_factory=list)

    def validate(self) -> None:
        for eta in ([self.eta] if self.eta is not None else []) + self.etas:
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"eta must lie in [0, 1], got {eta}")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        for k in self.k:
            if k < 1:
                raise ValueError(f"k must be >= 1, got {k}")
        for n in self.n:
            if n < 0:
                raise ValueError(f"n must be >= 0, got {n}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # shortest representation that round-trips the double exactly
    return repr(float(value))


def _json_ready(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _write_table(
    path: str, columns: list[str], rows: list[list], fmt: str, preamble: list[str] | None = None
) -> None:
    if fmt == "json":
        payload = [
            {c: _json_ready(v) for c, v in zip(columns, row)} for row in rows
        ]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in preamble or []:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _default_output(config: RunConfig, stem: str) -> str:
    if config.output:
        return config.output
    suffix = "json" if config.fmt == "json" else "csv"
    return f"{stem}.{suffix}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(config: RunConfig) -> int:
    circuit = parse_circuit_file(config.circuit)
    if config.width is not None and circuit.width != config.width:
        raise ValueError(
            f"circuit width is {circuit.width}, expected --width {config.width}"
        )
    probes_spec = config.probes
    if probes_spec is None:
        probes = analysis.default_probes(circuit.in_width, config.seed)
        probes_spec = "auto"
    else:
        probes = analysis.make_probes(probes_spec, circuit.in_width, config.seed)
    report = analysis.distance_report(
        circuit,
        config.eta,
        probes,
        eps=config.eps,
        extra_noise_round=config.extra_noise_round,
    )
    columns = ["level", "i_width", "n", "empirical_d", "bound", "slack"]
    rows = [list(r) for r in report.rows]
    out = _default_output(config, "report")
    _write_table(out, columns, rows, config.fmt)
    verdict = (
        "collapse certified on the probe set (heuristic)"
        if report.practically_worthless
        else "distinguishable outputs witnessed"
    )
    print(
        f"simulate: final_max_distance={_fmt(report.final_max_distance)} "
        f"practically_worthless={_fmt(report.practically_worthless)} "
        f"eps={_fmt(config.eps)} probes={probes_spec} n_probes={len(probes)} "
        f"min_slack={_fmt(report.min_slack())} output={out} [{verdict}]"
    )
    return EXIT_OK


def cmd_bound(config: RunConfig) -> int:
    k = config.k[0]
    eta = config.eta
    n_max = config.n[0]
    series = analysis.f_series(k, eta, config.depth)
    info = analysis.theta_and_threshold(k, eta)
    flag = "above-threshold" if info.above else "at/below-threshold"
    columns = ["i", "f_i", "theta_pow_i", *(f"bound_n{j}" for j in range(1, n_max + 1))]
    rows = []
    for i in range(config.depth + 1):
        row: list = [i, series.f[i], info.theta**i]
        row.extend(analysis.analytic_bound(series, i, j) for j in range(1, n_max + 1))
        rows.append(row)
    out = _default_output(config, "bound")
    preamble = [
        f"k={k} eta={_fmt(eta)} theta={_fmt(info.theta)} "
        f"threshold={_fmt(info.threshold)} {flag}"
    ]
    _write_table(out, columns, rows, config.fmt, preamble=preamble)
    print(
        f"bound: k={k} eta={_fmt(eta)} theta={_fmt(info.theta)} "
        f"threshold={_fmt(info.threshold)} {flag} rows={len(rows)} output={out}"
    )
    return EXIT_OK


def _sweep_point(point: tuple[int, float, int, float]) -> list:
    k, eta, n, eps = point
    depth = analysis.min_worthless_depth(k, eta, n, eps)
    if depth == analysis.BELOW_THRESHOLD:
        depth = "n/a"
    return [k, eta, n, eps, depth]


def cmd_sweep(config: RunConfig) -> int:
    points = [
        (k, eta, n, config.eps)
        for k, eta, n in itertools.product(config.k, config.etas, config.n)
    ]
    if not points:
        raise ValueError("sweep needs at least one (k, eta, n) point")
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    columns = ["k", "eta", "n", "eps", "min_depth"]
    out = _default_output(config, "sweep")
    _write_table(out, columns, rows, config.fmt)
    print(f"sweep: points={len(rows)} output={out}")
    return EXIT_OK


def _check_noise_action(qubits: int, trials: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    subsets = [
        list(c)
        for size in range(qubits + 1)
        for c in itertools.combinations(range(qubits), size)
    ]
    worst = 0.0
    for _ in range(trials):
        rho = random_density(qubits, rng)
        for eta in (0.0, 0.3, 0.7, 1.0):
            for b in subsets:
                worst = max(worst, analysis.check_noise_action(rho, b, eta))
    return worst


def _check_contractivity(trials: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        qubits = int(rng.integers(1, 3))
        channel = random_channel(qubits, qubits, int(rng.integers(1, 5)), rng)
        rho, sigma = random_density(qubits, rng), random_density(qubits, rng)
        before = trace_distance(rho, sigma)
        after = trace_distance(channel_apply(channel, rho), channel_apply(channel, sigma))
        worst = max(worst, after - before)
    return worst


def _check_kraus() -> float:
    worst = 0.0
    for channel in GATES.values():
        report = channel_validate(channel)
        for _, residual in report.violations:
            worst = max(worst, residual)
    return worst


def cmd_check(config: RunConfig) -> int:
    suites = {
        "noise-action": (
            lambda: _check_noise_action(config.qubits, config.trials or 100, config.seed),
            1e-10,
        ),
        "contractivity": (
            lambda: _check_contractivity(config.trials or 200, config.seed),
            1e-9,
        ),
        "kraus": (lambda: _check_kraus(), 1e-9),
    }
    selected = list(suites) if config.suite == "all" else [config.suite]
    all_ok = True
    for name in selected:
        runner, tol = suites[name]
        residual = runner()
        ok = residual <= tol
        all_ok = all_ok and ok
        print(
            f"check {name}: max_residual={_fmt(residual)} tol={_fmt(tol)} "
            f"{'PASS' if ok else 'FAIL'}"
        )
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decolab",
        description="Density-matrix circuit simulation under per-qubit "
        "depolarizing noise, with collapse-bound analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a circuit on probe states, report distances")
    sim.add_argument("--circuit", required=True, help="circuit file path")
    sim.add_argument("--eta", type=float, required=True, help="depolarization rate in [0,1]")
    sim.add_argument("--probes", help="basis | pair:i,j | random:<count> (default: auto)")
    sim.add_argument("--eps", type=float, default=analysis.DEFAULT_EPS)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--width", type=int, help="assert the circuit width before running")
    sim.add_argument("--output", help="report path (default report.csv/.json)")
    sim.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    sim.add_argument(
        "--extra-noise-round",
        action="store_true",
        help="also depolarize before the first layer and after the last",
    )

    bnd = sub.add_parser("bound", help="tabulate the analytic recursion")
    bnd.add_argument("--k", type=int, required=True)
    bnd.add_argument("--eta", type=float, required=True)
    bnd.add_argument("--depth", type=int, default=10)
    bnd.add_argument("--n", type=int, default=1, help="largest readout size to tabulate")
    bnd.add_argument("--output")
    bnd.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    swp = sub.add_parser("sweep", help="grid min_worthless_depth over (k, eta, n)")
    swp.add_argument("--k", type=_int_list, required=True, help="comma-separated fan-ins")
    swp.add_argument("--eta", type=_float_list, required=True, help="comma-separated rates")
    swp.add_argument("--n", type=_int_list, required=True, help="comma-separated readout sizes")
    swp.add_argument("--eps", type=float, default=analysis.DEFAULT_EPS)
    swp.add_argument("--jobs", type=int, default=1)
    swp.add_argument("--output")
    swp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    chk = sub.add_parser("check", help="run the built-in numerical self-checks")
    chk.add_argument(
        "--suite",
        choices=("all", "noise-action", "contractivity", "kraus"),
        default="all",
    )
    chk.add_argument("--qubits", type=int, default=3)
    chk.add_argument("--trials", type=int)
    chk.add_argument("--seed", type=int, default=0)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(command=args.command)
    if args.command == "simulate":
        config.circuit = args.circuit
        config.eta = args.eta
        config.probes = args.probes
        config.eps = args.eps
        config.seed = args.seed
        config.width = args.width
        config.output = args.output
        config.fmt = args.fmt
        config.extra_noise_round = args.extra_noise_round
    elif args.command == "bound":
        config.k = [args.k]
        config.eta = args.eta
        config.depth = args.depth
        config.n = [args.n]
        config.output = args.output
        config.fmt = args.fmt
    elif args.command == "sweep":
        config.k = args.k
        config.etas = args.eta
        config.n = args.n
        config.eps = args.eps
        config.jobs = args.jobs
        config.output = args.output
        config.fmt = args.fmt
    elif args.command == "check":
        config.suite = args.suite
        config.qubits = args.qubits
        config.trials = args.trials
        config.seed = args.seed
    config.validate()
    return config


_HANDLERS = {
    "simulate": cmd_simulate,
    "bound": cmd_bound,
    "sweep": cmd_sweep,
    "check": cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return _HANDLERS[args.command](config)
    except ResourceLimitError as exc:
        print(f"decolab: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CircuitError, ValueError, OSError) as exc:
        print(f"decolab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
