"""Command-line front end: ``optimize``, ``sweep``, ``simulate`` and ``verify``.

Every output embeds the tool version, the resolved configuration (including the
seed) and the argument vector that reproduces it.  Exit codes: 0 success,
1 usage error, 2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from . import __version__
from .oracle import MAX_ORACLE_SPINS, MAX_QUADRATURE_SPINS, M_from_quadrature, run_all
from .protocol import LikelihoodModel, ReferenceState, SamplerError, monte_carlo_error
from .representation import orbit_dimension
from .spectral import ConvergenceError, build_M, optimal_protocol, sigma_closed_form

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
MAX_SIMULATE_SPINS = 10
SWEEP_COLUMNS = ["N", "lambda", "avg_error", "ratio", "sigma_lo", "sigma_hi", "sandwich_ok"]
SANDWICH_SLACK = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", "-o", default="-", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinframes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"spinframes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="optimal class amplitudes and <chi> for N spins")
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("sweep", help="optimal error over a range of N")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--step", type=int, default=1)
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the transmission error")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("verify", help="brute-force checks in the full 2^N space")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=48)
    p.add_argument("--seed", type=int, default=0, help="seed for random spot-check rotations")
    _common(p)
    return parser


def _config(args) -> dict:
    # worker count never changes results, so it is not part of the config
    cfg = {k: v for k, v in vars(args).items() if k not in ("output", "workers")}
    cfg.setdefault("seed", None)
    argv = [cfg["command"]]
    for k, v in cfg.items():
        if k == "command" or v is None:
            continue
        argv += [f"--{k.replace('_', '-')}", str(v)]
    cfg["argv"] = argv
    return cfg


def _sigma_pair(N: int) -> tuple[float, float]:
    return sigma_closed_form(N), sigma_closed_form(N + 2)


def cmd_optimize(N: int) -> dict:
    if N < 2:
        raise UsageError("N must be >= 2")
    prot = optimal_protocol(N)
    lo, hi = _sigma_pair(N)
    return {
        "N": N,
        "lambda": prot.eigenvalue,
        "avg_error": prot.average_error,
        "sigma_N": lo,
        "sigma_N+2": hi,
        "coefficients": [
            {"j": str(j), "A": float(a)} for j, a in zip(prot.row_labels, prot.coefficients)
        ],
        "d_max": orbit_dimension(N),
    }


def sweep_row(N: int) -> dict:
    prot = optimal_protocol(N)
    lo, hi = _sigma_pair(N)
    lam = prot.eigenvalue
    err = prot.average_error
    return {
        "N": N,
        "lambda": lam,
        "avg_error": err,
        "ratio": err * N**2 / (8 * math.pi**2),
        "sigma_lo": lo,
        "sigma_hi": hi,
        "sandwich_ok": bool(lo - SANDWICH_SLACK <= lam <= hi + SANDWICH_SLACK),
    }


def cmd_sweep(n_min: int, n_max: int, step: int = 1) -> list[dict]:
    if n_min < 2:
        raise UsageError("N must be >= 2")
    if n_max < n_min or step < 1:
        raise UsageError("need n_min <= n_max and step >= 1")
    return [sweep_row(N) for N in range(n_min, n_max + 1, step)]


def cmd_simulate(N: int, trials: int, seed: int, workers: int = 1) -> dict:
    if N < 2:
        raise UsageError("N must be >= 2")
    if N > MAX_SIMULATE_SPINS:
        raise UsageError(f"sampler limited to N <= {MAX_SIMULATE_SPINS} (rejection envelope grows as N^3)")
    if trials < 100:
        raise UsageError("trials must be >= 100")
    model = LikelihoodModel(ReferenceState.optimal(N))
    res = monte_carlo_error(model, trials, seed, workers=workers)
    out = res.to_dict()
    out["acceptance_rate"] = float(out["acceptance_rate"])
    return out


def cmd_verify(N: int, grid: int = 48, seed: int = 0) -> dict:
    if N < 1 or N > MAX_ORACLE_SPINS:
        raise UsageError(f"oracle limited to N <= {MAX_ORACLE_SPINS}")
    if grid < 4:
        raise UsageError("grid must be >= 4")
    checks = run_all(N, grid, seed=seed)
    out = {
        "N": N,
        "checks": [c.to_dict() for c in checks],
        "all_passed": all(c.passed for c in checks),
    }
    if 2 <= N <= MAX_QUADRATURE_SPINS:
        out["M_quadrature"] = M_from_quadrature(N, grid).tolist()
        out["M_expected"] = build_M(N).to_dense().tolist()
    return out


def _csv_text(rows: list[dict], columns: list[str], meta: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# spinframes {meta['version']} {json.dumps(meta['config'], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def render(command: str, result, config: dict, fmt: str) -> str:
    meta = {"tool": "spinframes", "version": __version__, "command": command, "config": config}
    if fmt == "json":
        payload = dict(meta, result=result)
        # repr-based float output: shortest string that round-trips exactly
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
    if command == "sweep":
        return _csv_text(result, SWEEP_COLUMNS, meta)
    if command == "optimize":
        row = dict(result)
        row["coefficients"] = ";".join(f"{c['j']}:{c['A']:.10g}" for c in result["coefficients"])
        return _csv_text([row], list(row), meta)
    if command == "simulate":
        return _csv_text([result], list(result), meta)
    rows = result["checks"]
    return _csv_text(rows, ["name", "value", "threshold", "passed", "detail"], meta)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config(args)
    try:
        if args.command == "optimize":
            result = cmd_optimize(args.n)
        elif args.command == "sweep":
            result = cmd_sweep(args.n_min, args.n_max, args.step)
        elif args.command == "simulate":
            result = cmd_simulate(args.n, args.trials, args.seed, args.workers)
        else:
            result = cmd_verify(args.n, args.grid, args.seed)
    except UsageError as exc:
        print(f"spinframes {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, SamplerError) as exc:
        print(f"spinframes {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = render(args.command, result, config, args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)

    if args.command == "verify" and not result["all_passed"]:
        failed = [c["name"] for c in result["checks"] if not c["passed"]]
        print(f"spinframes verify: failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
