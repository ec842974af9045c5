"""Command-line front end.

    qcqp-dual solve --benchmark g07
    qcqp-dual solve problem.json --perturb 0.05 --format structured

Exit codes (stable):

    0  solved: SDP status optimal and max violation <= feas tol
    1  solved, but the SDP did not reach optimality or the point is infeasible
    2  usage error (unknown flag, conflicting inputs)
    3  missing input (neither a problem file nor --benchmark)
    4  malformed numeric argument
    5  unknown benchmark id
    6  problem file not found or unreadable
    7  problem file violates the schema
    8  solver raised an error
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Optional, Sequence

from . import __version__
from .benchmarks import BENCHMARK_IDS, UnknownBenchmark, case_settings, load_case
from .dual import DualStatus
from .io import SchemaError, dumps_report, read_problem
from .model import ProblemError
from .recovery import SolveReport, SolveSettings, solve


class Exit(IntEnum):
    OK = 0
    NOT_SOLVED = 1
    USAGE = 2
    MISSING_INPUT = 3
    BAD_NUMBER = 4
    UNKNOWN_BENCHMARK = 5
    FILE_ERROR = 6
    SCHEMA = 7
    SOLVER_ERROR = 8


class CliError(Exception):
    def __init__(self, code: Exit, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class CliConfig:
    problem_file: Optional[str] = None
    benchmark: Optional[str] = None
    gap_tol: Optional[float] = None
    feas_tol: Optional[float] = None
    max_iter: Optional[int] = None
    eps: Optional[float] = None
    format: str = "human"
    trace: bool = False

    def __post_init__(self):
        if (self.problem_file is None) == (self.benchmark is None):
            raise ValueError("exactly one input source is required")
        if self.eps is not None and self.eps < 0:
            raise ValueError("eps must be >= 0")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(Exit.USAGE, message)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qcqp-dual", description="Canonical-dual solver for nonconvex QCQPs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    s = sub.add_parser("solve", help="solve one problem")
    s.add_argument("problem", nargs="?", help="problem file (JSON)")
    s.add_argument("--benchmark", metavar="ID", help=f"built-in case: {', '.join(BENCHMARK_IDS)}")
    # numbers are parsed by hand so malformed values get their own exit code
    s.add_argument("--gap-tol", metavar="TOL", help="IPM relative gap tolerance")
    s.add_argument("--feas-tol", metavar="TOL", help="primal feasibility tolerance")
    s.add_argument("--max-iter", metavar="N", help="IPM iteration limit")
    s.add_argument("--perturb", metavar="EPS", help="linear perturbation size")
    s.add_argument("--format", choices=("human", "structured"), default="human")
    s.add_argument("--trace", action="store_true", help="IPM iterations on stderr")
    return ap


def _positive(name: str, text: Optional[str], integer=False, allow_zero=False):
    if text is None:
        return None
    try:
        v = int(text) if integer else float(text)
    except ValueError:
        raise CliError(Exit.BAD_NUMBER, f"{name}: not a number: {text!r}") from None
    if not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        raise CliError(Exit.BAD_NUMBER, f"{name}: out of range: {text!r}")
    return v


def parse_args(argv: Sequence[str]) -> CliConfig:
    """Validated config; raises :class:`CliError` with the exit code to use."""
    ns = _parser().parse_args(list(argv))
    if ns.command != "solve":
        raise CliError(Exit.USAGE, "expected the 'solve' command")
    if ns.problem is None and ns.benchmark is None:
        raise CliError(Exit.MISSING_INPUT, "give a problem file or --benchmark ID")
    if ns.problem is not None and ns.benchmark is not None:
        raise CliError(Exit.USAGE, "give either a problem file or --benchmark, not both")
    if ns.benchmark is not None and ns.benchmark.lower() not in BENCHMARK_IDS:
        raise CliError(Exit.UNKNOWN_BENCHMARK, f"unknown benchmark {ns.benchmark!r}")
    return CliConfig(
        problem_file=ns.problem,
        benchmark=ns.benchmark.lower() if ns.benchmark else None,
        gap_tol=_positive("--gap-tol", ns.gap_tol),
        feas_tol=_positive("--feas-tol", ns.feas_tol),
        max_iter=_positive("--max-iter", ns.max_iter, integer=True),
        eps=_positive("--perturb", ns.perturb, allow_zero=True),
        format=ns.format,
        trace=ns.trace,
    )


def build_settings(cfg: CliConfig, base: Optional[SolveSettings] = None) -> SolveSettings:
    s = base or SolveSettings()
    ipm = s.ipm
    if cfg.gap_tol is not None:
        ipm = replace(ipm, gap_tol=cfg.gap_tol)
    if cfg.max_iter is not None:
        ipm = replace(ipm, max_iter=cfg.max_iter)
    s = replace(s, ipm=ipm)
    if cfg.feas_tol is not None:
        s = replace(s, feas_tol=cfg.feas_tol)
    if cfg.eps is not None:
        s = replace(s, eps=cfg.eps)
    return s


def exit_status(report: SolveReport, settings: SolveSettings) -> Exit:
    ok = report.sdp_status == DualStatus.OPTIMAL and report.max_violation <= settings.feas_tol
    return Exit.OK if ok else Exit.NOT_SOLVED


def format_human(report: SolveReport, label: str) -> str:
    d = report.definiteness
    xs = ", ".join(f"{v:.10g}" for v in report.x)
    lines = [
        f"problem        {label}",
        f"objective      {report.objective:.10g}",
        f"x              ({xs})",
        f"path           {report.path.value}",
        f"dual value     {report.dual_value:.10g}",
        f"gap            {report.gap:.4e}",
        f"max violation  {report.max_violation:.4e}",
        f"sdp status     {report.sdp_status.value}",
        f"G verdict      {d.verdict.value} (cond {d.cond_estimate:.4e}, "
        f"eig [{d.min_eig:.4e}, {d.max_eig:.4e}])",
    ]
    if report.eps:
        lines.append(f"perturbation   eps = {report.eps:g}")
    lines.extend(f"note           {n}" for n in report.notes)
    return "\n".join(lines) + "\n"


def run(cfg: CliConfig, out=None, err=None) -> Exit:
    out = out or sys.stdout
    err = err or sys.stderr
    if cfg.benchmark is not None:
        case = load_case(cfg.benchmark)
        problem, label = case.problem, case.id
        # explicit flags win over the stored hints
        settings = build_settings(cfg, case_settings(case))
    else:
        try:
            problem = read_problem(cfg.problem_file)
        except (FileNotFoundError, IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
            raise CliError(Exit.FILE_ERROR, f"cannot read {cfg.problem_file}: {exc}") from None
        except ProblemError as exc:  # SchemaError included
            raise CliError(Exit.SCHEMA, f"{cfg.problem_file}: {exc}") from None
        label = cfg.problem_file
        settings = build_settings(cfg)
    try:
        report = solve(problem, settings)
    except Exception as exc:  # noqa: BLE001 - reported with diagnostics
        raise CliError(Exit.SOLVER_ERROR, f"solver failed: {type(exc).__name__}: {exc}") from None
    if cfg.trace and report.trace is not None:
        for line in report.trace.lines():
            err.write(line + "\n")
    if cfg.format == "structured":
        out.write(dumps_report(report, settings, __version__))
    else:
        out.write(format_human(report, label))
    return exit_status(report, settings)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return int(run(parse_args(argv)))
    except CliError as exc:
        sys.stderr.write(f"qcqp-dual: error: {exc}\n")
        return int(exc.code)
    except UnknownBenchmark as exc:
        sys.stderr.write(f"qcqp-dual: error: unknown benchmark {exc}\n")
        return int(Exit.UNKNOWN_BENCHMARK)


if __name__ == "__main__":
    sys.exit(main())
