"""Primal problem: quadratic objective, quadratic inequalities, box bounds.

Every quadratic is stored in the form ``q(x) = 1/2 x^T Q x - p^T x - r`` and
every constraint reads ``q(x) <= 0``.  Box bounds are uniformized into the same
form by :func:`uniformize`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

DEFAULT_FEAS_TOL = 1e-6


class ProblemError(ValueError):
    """Raised for malformed problem data."""


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ProblemError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """``q(x) = 1/2 x^T Q x - p^T x - r``; ``Q`` is symmetrized on construction."""

    Q: np.ndarray
    p: np.ndarray
    r: float = 0.0

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ProblemError(f"Q must be square, got shape {Q.shape}")
        if not np.all(np.isfinite(Q)):
            raise ProblemError("Q has non-finite entries")
        # exact symmetric input is kept bit-identical
        if not np.array_equal(Q, Q.T):
            Q = 0.5 * (Q + Q.T)
        p = _as_vector(self.p, "p")
        if p.shape[0] != Q.shape[0]:
            raise ProblemError(f"p has length {p.shape[0]}, Q has side {Q.shape[0]}")
        r = float(self.r)
        if not np.isfinite(r):
            raise ProblemError("r is not finite")
        Q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "QuadraticForm":
        return cls(np.zeros((n, n)), np.zeros(n), 0.0)

    @classmethod
    def linear(cls, coef: Sequence[float], const: float = 0.0) -> "QuadraticForm":
        """The affine function ``coef^T x + const``."""
        coef = np.asarray(coef, dtype=float)
        return cls(np.zeros((coef.size, coef.size)), -coef, -const)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x - self.p @ x - self.r)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) - self.p

    def __eq__(self, other):
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return (
            np.array_equal(self.Q, other.Q)
            and np.array_equal(self.p, other.p)
            and self.r == other.r
        )


# A uniformized constraint has exactly the same shape as a quadratic form.
CanonicalConstraint = QuadraticForm


@dataclass(frozen=True, eq=False)
class QcqpProblem:
    objective: QuadraticForm
    constraints: tuple[QuadraticForm, ...]
    lower: np.ndarray
    upper: np.ndarray
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def m(self) -> int:
        return len(self.constraints)

    def __eq__(self, other):
        if not isinstance(other, QcqpProblem):
            return NotImplemented
        return (
            self.objective == other.objective
            and len(self.constraints) == len(other.constraints)
            and all(a == b for a, b in zip(self.constraints, other.constraints))
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )


def build_problem(
    objective: QuadraticForm,
    constraints: Sequence[QuadraticForm],
    lower,
    upper,
    name: str = "",
) -> QcqpProblem:
    """Validate and assemble a :class:`QcqpProblem`.

    Raises :class:`ProblemError` on dimension mismatch, non-finite data, or a
    box with ``lower[i] >= upper[i]``.
    """
    n = objective.n
    lower = _as_vector(lower, "lower")
    upper = _as_vector(upper, "upper")
    if lower.shape[0] != n or upper.shape[0] != n:
        raise ProblemError(
            f"bounds have lengths {lower.shape[0]}/{upper.shape[0]}, expected {n}"
        )
    bad = np.flatnonzero(lower >= upper)
    if bad.size:
        raise ProblemError(f"lower >= upper for variables {bad.tolist()}")
    constraints = tuple(constraints)
    for j, g in enumerate(constraints):
        if not isinstance(g, QuadraticForm):
            raise ProblemError(f"constraint {j} is not a QuadraticForm")
        if g.n != n:
            raise ProblemError(f"constraint {j} has dimension {g.n}, expected {n}")
    lower.setflags(write=False)
    upper.setflags(write=False)
    return QcqpProblem(objective, constraints, lower, upper, name)


def box_constraint(n: int, i: int, lo: float, hi: float) -> QuadraticForm:
    """``(x_i - lo)(x_i - hi)``, nonpositive exactly on ``[lo, hi]``."""
    B = np.zeros((n, n))
    B[i, i] = 2.0
    b = np.zeros(n)
    b[i] = lo + hi
    return QuadraticForm(B, b, -lo * hi)


def uniformize(p: QcqpProblem) -> list[QuadraticForm]:
    """Original constraints followed by one quadratic constraint per box."""
    boxes = [box_constraint(p.n, i, p.lower[i], p.upper[i]) for i in range(p.n)]
    return list(p.constraints) + boxes


def _check_dim(p: QcqpProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.n:
        raise ProblemError(f"x has length {x.shape[0]}, expected {p.n}")
    return x


def eval_objective(p: QcqpProblem, x) -> float:
    return p.objective(_check_dim(p, x))


def eval_constraints(
    p: QcqpProblem, x, tol: float = DEFAULT_FEAS_TOL
) -> tuple[np.ndarray, bool]:
    """Residuals ``g_k(x)`` for all ``m + n`` uniformized constraints.

    The box rows are evaluated in the factored form ``(x_i - c_i)(x_i - d_i)``
    so they vanish exactly at the bounds.
    """
    x = _check_dim(p, x)
    res = np.empty(p.m + p.n)
    for j, g in enumerate(p.constraints):
        res[j] = g(x)
    res[p.m:] = (x - p.lower) * (x - p.upper)
    return res, bool(res.max(initial=-np.inf) <= tol)


def max_violation(p: QcqpProblem, x) -> float:
    """Largest violation over the original constraints and the boxes.

    Box violations are measured as distances outside ``[c, d]`` rather than
    through the quadratic residual, which overweights wide boxes.
    """
    x = _check_dim(p, x)
    viol = [0.0]
    viol.extend(g(x) for g in p.constraints)
    viol.extend(p.lower - x)
    viol.extend(x - p.upper)
    return float(max(viol))


def perturb_linear(p: QcqpProblem, eps: float) -> QcqpProblem:
    """Add ``eps * sum(x)`` to the objective."""
    eps = float(eps)
    if not np.isfinite(eps):
        raise ProblemError("eps must be finite")
    if eps == 0.0:
        return p
    obj = p.objective
    return replace(p, objective=QuadraticForm(obj.Q, obj.p - eps, obj.r))
