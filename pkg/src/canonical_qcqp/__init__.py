"""Global solutions of nonconvex QCQPs through a canonical dual SDP."""
from .model import (
    ProblemError,
    QcqpProblem,
    QuadraticForm,
    build_problem,
    eval_constraints,
    eval_objective,
    max_violation,
    perturb_linear,
    uniformize,
)
from .recovery import Path, SolveReport, SolveSettings, Verdict, assess, solve
from .sdp import IpmSettings, solve_sdp

__version__ = "0.1.0"

__all__ = [
    "IpmSettings",
    "Path",
    "ProblemError",
    "QcqpProblem",
    "QuadraticForm",
    "SolveReport",
    "SolveSettings",
    "Verdict",
    "assess",
    "build_problem",
    "eval_constraints",
    "eval_objective",
    "max_violation",
    "perturb_linear",
    "solve",
    "solve_sdp",
    "uniformize",
]
