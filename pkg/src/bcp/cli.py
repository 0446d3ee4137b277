"""Command-line front end: single runs, benchmark grids, CSV/JSONL output.

Output is deterministic: identical flags and seed give byte-identical files
regardless of worker count.  Wall-clock time is therefore only written when
--timing is passed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

from bcp.boundary import boundary_spec, parse_boundary
from bcp.engine import ExperimentConfig, bcp
from bcp.formulas import SeriesTolerance
from bcp.jumps import (
    BernoulliJumps,
    DoubleExponential,
    ExponentialJumps,
    JumpSizeLaw,
    PoissonProcess,
)
from bcp.oracle import OracleConfig, simulate_bcp

__all__ = ["RunRecord", "law_spec", "main", "parse_jumps", "parse_law"]

_CSV_COLUMNS = [
    "boundary", "law", "lambda", "t", "reps", "n", "seed", "method",
    "estimate", "std_error", "wall_time_s",
]

# benchmark grids: boundary-major, then law, then rate
_TABLE1_BOUNDARIES = ["constant:1.0", "linear:0.5,1.5", "linear:-0.5,1.5"]
_TABLE2_BOUNDARIES = ["quad", "sqrt", "expneg"]
_GRID_LAWS = [
    "de:0.5,10.0,6.666666666666667",
    "exp:1.5",
    "ber:0.5,0.15,-0.15",
]
_GRID_RATES = [0.0, 0.01, 3.0]

_DEFAULT_LAW = _GRID_LAWS[0]


@dataclass(frozen=True)
class RunRecord:
    """One configuration's echo plus its estimate."""

    boundary: str
    law: str
    rate: float
    t: float
    reps: int
    n: int
    seed: int
    method: str
    estimate: float
    std_error: float
    wall_time: float | None

    def csv_row(self) -> list[str]:
        return [
            self.boundary,
            self.law,
            repr(self.rate),
            repr(self.t),
            str(self.reps),
            str(self.n),
            str(self.seed),
            self.method,
            f"{self.estimate:.6f}",
            f"{self.std_error:.6f}",
            "" if self.wall_time is None else f"{self.wall_time:.6f}",
        ]

    def json_obj(self) -> dict:
        return {
            "boundary": self.boundary,
            "law": self.law,
            "lambda": self.rate,
            "t": self.t,
            "reps": self.reps,
            "n": self.n,
            "seed": self.seed,
            "method": self.method,
            "estimate": float(f"{self.estimate:.6f}"),
            "std_error": float(f"{self.std_error:.6f}"),
            "wall_time_s": (
                None if self.wall_time is None else float(f"{self.wall_time:.6f}")
            ),
        }


def parse_jumps(spec: str) -> PoissonProcess:
    """Parse a jump process spec; only `poisson:<rate>` is accepted."""
    kind, _, rest = spec.partition(":")
    if kind != "poisson" or not rest:
        raise ValueError(f"bad jump spec {spec!r}: expected poisson:<rate>")
    try:
        rate = float(rest)
    except ValueError:
        raise ValueError(f"bad jump spec {spec!r}: {rest!r} is not a number") from None
    return PoissonProcess(rate)


def parse_law(spec: str) -> JumpSizeLaw:
    """Parse `de:<p>,<eta1>,<eta2>`, `exp:<mean>` or `ber:<p>,<up>,<down>`."""
    kind, _, rest = spec.partition(":")
    parts = rest.split(",") if rest else []
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"bad law spec {spec!r}: {exc}") from None
    if kind == "de" and len(vals) == 3:
        return DoubleExponential(*vals)
    if kind == "exp" and len(vals) == 1:
        return ExponentialJumps(vals[0])
    if kind == "ber" and len(vals) == 3:
        return BernoulliJumps(*vals)
    raise ValueError(
        f"bad law spec {spec!r}: expected de:<p>,<eta1>,<eta2>, "
        f"exp:<mean> or ber:<p>,<up>,<down>"
    )


def law_spec(law: JumpSizeLaw) -> str:
    """Canonical spec string for a jump-size law (inverse of parse_law)."""
    if isinstance(law, DoubleExponential):
        return f"de:{law.p!r},{law.eta1!r},{law.eta2!r}"
    if isinstance(law, ExponentialJumps):
        return f"exp:{law.mean!r}"
    if isinstance(law, BernoulliJumps):
        return f"ber:{law.p!r},{law.up!r},{law.down!r}"
    raise TypeError(f"no spec string for law {law!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcp",
        description=(
            "Boundary-crossing probabilities of Brownian motion with jumps. "
            "Reports the survival (non-crossing) probability estimate and "
            "its standard error."
        ),
    )
    what = parser.add_mutually_exclusive_group(required=True)
    what.add_argument(
        "--boundary",
        help=(
            "boundary spec: constant:<b>, linear:<a>,<b>, "
            "two-sided:<a>,<b>,<c>,<d>, pwl:<s0:v0;s1:v1;...>, "
            "or a named profile (quad, sqrt, expneg)"
        ),
    )
    what.add_argument(
        "--table1", action="store_true",
        help="run the 27-configuration linear-boundary benchmark grid",
    )
    what.add_argument(
        "--table2", action="store_true",
        help="run the 27-configuration nonlinear-boundary benchmark grid",
    )
    parser.add_argument(
        "--jumps", default="poisson:0.0", metavar="poisson:<rate>",
        help="jump process spec (default: %(default)s, no jumps)",
    )
    parser.add_argument(
        "--law", default=_DEFAULT_LAW,
        help="jump-size law spec (default: %(default)s)",
    )
    parser.add_argument("--t", type=float, default=1.0, help="horizon (default 1.0)")
    parser.add_argument(
        "--reps", type=int, default=200_000,
        help="Monte Carlo replications (default 200000)",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="RNG seed (default: BCP_SEED environment variable, else 0)",
    )
    parser.add_argument(
        "--n-points", type=int, default=32,
        help="discretization segments for nonlinear boundaries (default 32)",
    )
    parser.add_argument(
        "--series-tol", type=float, default=1e-12,
        help="two-sided reflection series tolerance (default 1e-12)",
    )
    parser.add_argument(
        "--method", choices=["engine", "oracle"], default="engine",
        help="conditional-formula engine or path-simulation oracle",
    )
    parser.add_argument(
        "--oracle-dt", type=float, default=1e-3,
        help="oracle grid step (default 1e-3)",
    )
    parser.add_argument(
        "--workers", type=int, default=1,
        help="engine worker processes; does not change results (default 1)",
    )
    parser.add_argument(
        "--format", choices=["csv", "jsonl"], default="csv",
        help="output format (default csv)",
    )
    parser.add_argument("--output", help="write to this path instead of stdout")
    parser.add_argument(
        "--timing", action="store_true",
        help="fill the wall_time_s column (off by default to keep output stable)",
    )
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BCP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"BCP_SEED={env!r} is not an integer") from None
    return 0


def _run_one(boundary_str: str, law_str: str, rate: float, args, seed: int) -> RunRecord:
    boundary = parse_boundary(boundary_str, n_points=args.n_points)
    law = parse_law(law_str)
    process = PoissonProcess(rate)
    if args.method == "oracle":
        est = simulate_bcp(
            boundary, process, law, args.t,
            OracleConfig(dt=args.oracle_dt, reps=args.reps, seed=seed),
        )
    else:
        config = ExperimentConfig(
            boundary=boundary,
            process=process,
            law=law,
            t=args.t,
            reps=args.reps,
            seed=seed,
            n_points=args.n_points,
            series_tol=SeriesTolerance(eps=args.series_tol),
        )
        est = bcp(config, workers=args.workers)
    return RunRecord(
        boundary=boundary_spec(boundary),
        law=law_spec(law),
        rate=rate,
        t=args.t,
        reps=args.reps,
        n=args.n_points,
        seed=seed,
        method=args.method,
        estimate=est.estimate,
        std_error=est.std_error,
        wall_time=est.wall_time if args.timing else None,
    )


def _execute(args) -> list[RunRecord]:
    seed = _resolve_seed(args)
    if args.table1 or args.table2:
        boundaries = _TABLE1_BOUNDARIES if args.table1 else _TABLE2_BOUNDARIES
        return [
            _run_one(b, law, rate, args, seed)
            for b in boundaries
            for law in _GRID_LAWS
            for rate in _GRID_RATES
        ]
    process = parse_jumps(args.jumps)
    return [_run_one(args.boundary, args.law, process.rate, args, seed)]


def _emit(records: list[RunRecord], args, stream) -> None:
    if args.format == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.csv_row())
    else:
        for rec in records:
            stream.write(json.dumps(rec.json_obj()) + "\n")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        records = _execute(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", newline="") as fh:
            _emit(records, args, fh)
    else:
        _emit(records, args, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
