"""The five CEC 2006 problems that fit the quadratic form: g01, g04, g07, g10, g18.

Coefficients follow the published problem statements, with the g04 objective
in its short form (no x2 cross terms).  Variable indices in the builders are
1-based to match those statements.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import QcqpProblem, QuadraticForm, build_problem

BENCHMARK_IDS = ("g01", "g04", "g07", "g10", "g18")


class UnknownBenchmark(KeyError):
    pass


class Poly:
    """Accumulates a quadratic polynomial term by term (1-based indices)."""

    def __init__(self, n: int):
        self.n = n
        self.H = np.zeros((n, n))  # Hessian
        self.lin = np.zeros(n)
        self.const = 0.0

    def c(self, value: float) -> "Poly":
        self.const += value
        return self

    def x(self, i: int, coef: float = 1.0) -> "Poly":
        self.lin[i - 1] += coef
        return self

    def xx(self, i: int, j: int, coef: float = 1.0) -> "Poly":
        i, j = i - 1, j - 1
        if i == j:
            self.H[i, i] += 2.0 * coef
        else:
            self.H[i, j] += coef
            self.H[j, i] += coef
        return self

    def sq(self, i: int, shift: float = 0.0, coef: float = 1.0) -> "Poly":
        """``coef * (x_i - shift)^2``"""
        self.xx(i, i, coef)
        self.x(i, -2.0 * coef * shift)
        return self.c(coef * shift * shift)

    def sqdiff(self, i: int, j: int, coef: float = 1.0) -> "Poly":
        """``coef * (x_i - x_j)^2``"""
        self.xx(i, i, coef)
        self.xx(j, j, coef)
        return self.xx(i, j, -2.0 * coef)

    def form(self) -> QuadraticForm:
        return QuadraticForm(self.H, -self.lin, -self.const)


@dataclass(frozen=True)
class RecoveryHints:
    """Manually chosen recovery inputs for one case."""

    free_vars: Optional[tuple[int, ...]] = None  # 0-based
    start: Optional[tuple[float, ...]] = None
    eps: Optional[float] = None


@dataclass(frozen=True)
class BenchmarkCase:
    id: str
    problem: QcqpProblem
    expected_objective: float
    expected_point: Optional[np.ndarray]
    expected_path: str
    hints: RecoveryHints = field(default_factory=RecoveryHints)
    # objective tolerance the regression is judged at
    objective_tol: float = 1e-3
    alternates: tuple[np.ndarray, ...] = ()


def _g01() -> BenchmarkCase:
    n = 13
    f = Poly(n)
    for i in range(1, 5):
        f.x(i, 5.0).xx(i, i, -5.0)
    for i in range(5, 14):
        f.x(i, -1.0)
    g = [
        Poly(n).x(1, 2).x(2, 2).x(10).x(11).c(-10),
        Poly(n).x(1, 2).x(3, 2).x(10).x(12).c(-10),
        Poly(n).x(2, 2).x(3, 2).x(11).x(12).c(-10),
        Poly(n).x(1, -8).x(10),
        Poly(n).x(2, -8).x(11),
        Poly(n).x(3, -8).x(12),
        Poly(n).x(4, -2).x(5, -1).x(10),
        Poly(n).x(6, -2).x(7, -1).x(11),
        Poly(n).x(8, -2).x(9, -1).x(12),
    ]
    lower = np.zeros(n)
    upper = np.ones(n)
    upper[9:12] = 100.0
    prob = build_problem(f.form(), [p.form() for p in g], lower, upper, "g01")
    xstar = np.array([1, 1, 1, 1, 1, 1, 1, 1, 1, 3, 3, 3, 1], dtype=float)
    return BenchmarkCase("g01", prob, -15.0, xstar, "active_set_linear", objective_tol=1e-6)


def _g04() -> BenchmarkCase:
    n = 5
    f = Poly(n).xx(3, 3, 5.3578547).xx(1, 5, 0.8356891).x(1, 37.293239).c(-40792.141)

    def u():  # 85.334407 + 0.0056858 x2x5 + 0.0006262 x1x4 - 0.0022053 x3x5
        return Poly(n).c(85.334407).xx(2, 5, 0.0056858).xx(1, 4, 0.0006262).xx(3, 5, -0.0022053)

    def v():  # 80.51249 + 0.0071317 x2x5 + 0.0029955 x1x2 + 0.0021813 x3^2
        return Poly(n).c(80.51249).xx(2, 5, 0.0071317).xx(1, 2, 0.0029955).xx(3, 3, 0.0021813)

    # The printed constant 9.30096 is truncated; the reported optimum solves
    # g6 = 0 only with 9.300961.
    def w():  # 9.300961 + 0.0047026 x3x5 + 0.0012547 x1x3 + 0.0019085 x3x4
        return Poly(n).c(9.300961).xx(3, 5, 0.0047026).xx(1, 3, 0.0012547).xx(3, 4, 0.0019085)

    def neg(p: Poly) -> Poly:
        p.H, p.lin, p.const = -p.H, -p.lin, -p.const
        return p

    g = [
        u().c(-92), neg(u()),
        v().c(-110), neg(v()).c(90),
        w().c(-25), neg(w()).c(20),
    ]
    lower = np.array([78.0, 33.0, 27.0, 27.0, 27.0])
    upper = np.array([102.0, 45.0, 45.0, 45.0, 45.0])
    prob = build_problem(f.form(), [p.form() for p in g], lower, upper, "g04")
    xstar = np.array([78.0, 33.0, 29.995256025681599, 45.0, 36.775812905788207])
    return BenchmarkCase("g04", prob, -3.0666e4, xstar, "active_set_linear", objective_tol=1.0)


def _g07() -> BenchmarkCase:
    n = 10
    f = (
        Poly(n).xx(1, 1).xx(2, 2).xx(1, 2).x(1, -14).x(2, -16)
        .sq(3, 10).sq(4, 5, 4).sq(5, 3).sq(6, 1, 2).xx(7, 7, 5)
        .sq(8, 11, 7).sq(9, 10, 2).sq(10, 7).c(45)
    )
    g = [
        Poly(n).c(-105).x(1, 4).x(2, 5).x(7, -3).x(8, 9),
        Poly(n).x(1, 10).x(2, -8).x(7, -17).x(8, 2),
        Poly(n).x(1, -8).x(2, 2).x(9, 5).x(10, -2).c(-12),
        Poly(n).sq(1, 2, 3).sq(2, 3, 4).xx(3, 3, 2).x(4, -7).c(-120),
        Poly(n).xx(1, 1, 5).x(2, 8).sq(3, 6).x(4, -2).c(-40),
        Poly(n).xx(1, 1).sq(2, 2, 2).xx(1, 2, -2).x(5, 14).x(6, -6),
        Poly(n).sq(1, 8, 0.5).sq(2, 4, 2).xx(5, 5, 3).x(6, -1).c(-30),
        Poly(n).x(1, -3).x(2, 6).sq(9, 8, 12).x(10, -7),
    ]
    prob = build_problem(
        f.form(), [p.form() for p in g], np.full(n, -10.0), np.full(n, 10.0), "g07"
    )
    xstar = np.array(
        [2.1721, 2.3636, 8.7746, 5.0959, 0.9903, 1.4307, 1.3218, 9.8286, 8.2800, 8.3760]
    )
    return BenchmarkCase("g07", prob, 24.3111, xstar, "direct", objective_tol=1e-2)


def _g10() -> BenchmarkCase:
    n = 8
    f = Poly(n).x(1).x(2).x(3)
    g = [
        Poly(n).c(-1).x(4, 0.0025).x(6, 0.0025),
        Poly(n).c(-1).x(5, 0.0025).x(7, 0.0025).x(4, -0.0025),
        Poly(n).c(-1).x(8, 0.01).x(5, -0.01),
        Poly(n).xx(1, 6, -1).x(4, 833.33252).x(1, 100).c(-83333.333),
        Poly(n).xx(2, 7, -1).x(5, 1250).xx(2, 4, 1).x(4, -1250),
        Poly(n).xx(3, 8, -1).c(1250000).xx(3, 5, 1).x(5, -2500),
    ]
    lower = np.array([100.0, 1000.0, 1000.0, 10.0, 10.0, 10.0, 10.0, 10.0])
    upper = np.array([10000.0, 10000.0, 10000.0, 1000.0, 1000.0, 1000.0, 1000.0, 1000.0])
    prob = build_problem(f.form(), [p.form() for p in g], lower, upper, "g10")
    xstar = np.array([
        579.3066844253549, 1359.970668051655, 5109.970668051655, 182.0176995811199,
        295.6011732779338, 217.9823004188801, 286.4165263031861, 395.6011732779338,
    ])
    hints = RecoveryHints(free_vars=(3, 4), start=(100.0, 200.0))
    return BenchmarkCase(
        "g10", prob, 7049.248020528666, xstar, "eliminate_and_minimize", hints, objective_tol=1e-3
    )


def _g18() -> BenchmarkCase:
    n = 9
    f = Poly(n)
    for i, j, s in [(1, 4, 1), (2, 3, -1), (3, 9, 1), (5, 9, -1), (5, 8, 1), (6, 7, -1)]:
        f.xx(i, j, -0.5 * s)
    g = [
        Poly(n).xx(3, 3).xx(4, 4).c(-1),
        Poly(n).xx(9, 9).c(-1),
        Poly(n).xx(5, 5).xx(6, 6).c(-1),
        Poly(n).xx(1, 1).sqdiff(2, 9).c(-1),
        Poly(n).sqdiff(1, 5).sqdiff(2, 6).c(-1),
        Poly(n).sqdiff(1, 7).sqdiff(2, 8).c(-1),
        Poly(n).sqdiff(3, 5).sqdiff(4, 6).c(-1),
        Poly(n).sqdiff(3, 7).sqdiff(4, 8).c(-1),
        Poly(n).xx(7, 7).sqdiff(8, 9).c(-1),
        Poly(n).xx(2, 3).xx(1, 4, -1),
        Poly(n).xx(3, 9, -1),
        Poly(n).xx(5, 9),
        Poly(n).xx(6, 7).xx(5, 8, -1),
    ]
    lower = np.array([-10.0] * 8 + [0.0])
    upper = np.array([10.0] * 8 + [20.0])
    prob = build_problem(f.form(), [p.form() for p in g], lower, upper, "g18")
    xbar = np.array([-0.9660, -0.2585, -0.2587, -0.9660, -0.9661, -0.2588, -0.2589, -0.9657, 0.0005])
    alternates = tuple(np.array(v) for v in [
        [0.0450, -0.0387, 0.8663, -0.4999, 0.0004, -1.0001, 0.8878, 0.5000, 0.9604],
        [0.0689, -0.9972, 0.9088, -0.4179, 0.0920, -0.9959, 0.8986, -0.4388, 0.0009],
        [0.6888, -0.7257, 0.9693, 0.2454, 0.6973, -0.7173, 0.9726, 0.2332, -0.0006],
    ])
    return BenchmarkCase(
        "g18", prob, -0.8663, xbar, "perturbed", RecoveryHints(eps=0.05),
        objective_tol=1e-3, alternates=alternates,
    )


_BUILDERS = {"g01": _g01, "g04": _g04, "g07": _g07, "g10": _g10, "g18": _g18}


def load_case(case_id: str) -> BenchmarkCase:
    try:
        return _BUILDERS[case_id.lower()]()
    except KeyError:
        raise UnknownBenchmark(case_id) from None


def case_settings(case: BenchmarkCase, base=None):
    """``base`` solve settings with the case's recovery hints applied."""
    from dataclasses import replace

    from .recovery import SolveSettings

    s = base or SolveSettings()
    h = case.hints
    if h.free_vars is not None and s.free_vars is None:
        s = replace(s, free_vars=h.free_vars)
    if h.start is not None and s.start is None:
        s = replace(s, start=h.start)
    if h.eps is not None:
        s = replace(s, eps=h.eps)
    return s


@dataclass
class BenchmarkResult:
    case: BenchmarkCase
    report: Optional[object]  # SolveReport, or None when the solve raised
    error: Optional[str] = None

    @property
    def objective_ok(self) -> bool:
        if self.report is None:
            return False
        return abs(self.report.objective - self.case.expected_objective) <= self.case.objective_tol


def run_all(settings=None, ids=BENCHMARK_IDS) -> list[BenchmarkResult]:
    """Solve every case; a failing case is recorded, not raised."""
    from .recovery import solve

    out = []
    for cid in ids:
        case = load_case(cid)
        try:
            out.append(BenchmarkResult(case, solve(case.problem, case_settings(case, settings))))
        except Exception as exc:  # noqa: BLE001 - batch keeps going
            out.append(BenchmarkResult(case, None, f"{type(exc).__name__}: {exc}"))
    return out
