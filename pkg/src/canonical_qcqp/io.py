"""JSON problem files and structured reports.

Problem file::

    {"n": 2,
     "objective": {"Q_lower": [q00, q10, q11], "p": [p0, p1], "r": r},
     "constraints": [{"Q_lower": ..., "p": ..., "r": ...}, ...],
     "lower": [...], "upper": [...]}

``Q_lower`` is the row-major lower triangle of ``Q`` in
``q(x) = 1/2 x^T Q x - p^T x - r``.  Floats are written with ``repr``
precision, so coefficients survive a write/read cycle bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import Any

import numpy as np

from .dual import DualStatus
from .model import ProblemError, QcqpProblem, QuadraticForm, build_problem
from .recovery import DefinitenessReport, Path, SolveReport, SolveSettings, Verdict

PROBLEM_KEYS = ("n", "objective", "constraints", "lower", "upper")
FORM_KEYS = ("Q_lower", "p", "r")


class SchemaError(ProblemError):
    """Problem or report document with missing, extra, or mistyped fields."""


# -- problems ------------------------------------------------------------------


def lower_triangle(Q: np.ndarray) -> list[float]:
    n = Q.shape[0]
    return [float(Q[i, j]) for i in range(n) for j in range(i + 1)]


def from_lower_triangle(vals, n: int) -> np.ndarray:
    if len(vals) != n * (n + 1) // 2:
        raise SchemaError(f"Q_lower has {len(vals)} entries, expected {n * (n + 1) // 2}")
    Q = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1):
            Q[i, j] = Q[j, i] = vals[k]
            k += 1
    return Q


def _numbers(v, name: str) -> list[float]:
    if not isinstance(v, list) or not all(
        isinstance(e, (int, float)) and not isinstance(e, bool) for e in v
    ):
        raise SchemaError(f"{name} must be a list of numbers")
    return [float(e) for e in v]


def _check_keys(d, keys, name):
    if not isinstance(d, dict):
        raise SchemaError(f"{name} must be an object")
    missing = [k for k in keys if k not in d]
    extra = sorted(set(d) - set(keys))
    if missing or extra:
        raise SchemaError(f"{name}: missing {missing}, unexpected {extra}")


def form_to_dict(q: QuadraticForm) -> dict:
    return {"Q_lower": lower_triangle(q.Q), "p": [float(v) for v in q.p], "r": float(q.r)}


def form_from_dict(d, n: int, name: str = "form") -> QuadraticForm:
    _check_keys(d, FORM_KEYS, name)
    Q = from_lower_triangle(_numbers(d["Q_lower"], f"{name}.Q_lower"), n)
    p = _numbers(d["p"], f"{name}.p")
    if len(p) != n:
        raise SchemaError(f"{name}.p has length {len(p)}, expected {n}")
    r = d["r"]
    if not isinstance(r, (int, float)) or isinstance(r, bool):
        raise SchemaError(f"{name}.r must be a number")
    return QuadraticForm(Q, p, float(r))


def problem_to_dict(p: QcqpProblem) -> dict:
    return {
        "n": p.n,
        "objective": form_to_dict(p.objective),
        "constraints": [form_to_dict(g) for g in p.constraints],
        "lower": [float(v) for v in p.lower],
        "upper": [float(v) for v in p.upper],
    }


def problem_from_dict(d: Any, name: str = "") -> QcqpProblem:
    _check_keys(d, PROBLEM_KEYS, "problem")
    n = d["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("n must be a positive integer")
    if not isinstance(d["constraints"], list):
        raise SchemaError("constraints must be a list")
    obj = form_from_dict(d["objective"], n, "objective")
    cons = [form_from_dict(g, n, f"constraints[{j}]") for j, g in enumerate(d["constraints"])]
    return build_problem(obj, cons, _numbers(d["lower"], "lower"), _numbers(d["upper"], "upper"), name)


def dumps_problem(p: QcqpProblem) -> str:
    return json.dumps(problem_to_dict(p), indent=2) + "\n"


def loads_problem(text: str, name: str = "") -> QcqpProblem:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    return problem_from_dict(d, name)


def read_problem(path) -> QcqpProblem:
    with open(path, encoding="utf-8") as fh:
        return loads_problem(fh.read(), name=str(path))


def write_problem(p: QcqpProblem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_problem(p))


# -- reports -------------------------------------------------------------------

REPORT_VERSION = 1


def _num(v: float):
    """JSON has no infinities; non-finite values travel as strings."""
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _unnum(v) -> float:
    if isinstance(v, str):
        if v not in ("inf", "-inf", "nan"):
            raise SchemaError(f"bad number {v!r}")
        return float(v)
    return float(v)


def _vec(v) -> list:
    return [_num(e) for e in np.asarray(v, dtype=float)]


def settings_to_dict(s: SolveSettings) -> dict:
    d = asdict(s)
    for k in ("free_vars", "start"):
        if d[k] is not None:
            d[k] = list(d[k])
    return d


def settings_from_dict(d: dict) -> SolveSettings:
    from .sdp import IpmSettings

    d = dict(d)
    d["ipm"] = IpmSettings(**d["ipm"])
    for k in ("free_vars", "start"):
        if d[k] is not None:
            d[k] = tuple(d[k])
    return SolveSettings(**d)


def report_to_dict(r: SolveReport, settings: SolveSettings, version: str) -> dict:
    dr = r.definiteness
    return {
        "format_version": REPORT_VERSION,
        "tool_version": version,
        "settings": settings_to_dict(settings),
        "x": _vec(r.x),
        "objective": _num(r.objective),
        "max_violation": _num(r.max_violation),
        "dual_value": _num(r.dual_value),
        "gap": _num(r.gap),
        "path": r.path.value,
        "definiteness": {
            "cholesky_ok": dr.cholesky_ok,
            "cond_estimate": _num(dr.cond_estimate),
            "min_eig": _num(dr.min_eig),
            "max_eig": _num(dr.max_eig),
            "verdict": dr.verdict.value,
        },
        "sdp_status": r.sdp_status.value,
        "sigma": _vec(r.sigma),
        "feasible": r.feasible,
        "residuals": _vec(r.residuals),
        "eps": _num(r.eps),
        "notes": list(r.notes),
    }


def report_from_dict(d: dict) -> tuple[SolveReport, SolveSettings, str]:
    try:
        dd = d["definiteness"]
        rep = SolveReport(
            x=np.array([_unnum(v) for v in d["x"]]),
            objective=_unnum(d["objective"]),
            max_violation=_unnum(d["max_violation"]),
            dual_value=_unnum(d["dual_value"]),
            gap=_unnum(d["gap"]),
            path=Path(d["path"]),
            definiteness=DefinitenessReport(
                bool(dd["cholesky_ok"]),
                _unnum(dd["cond_estimate"]),
                _unnum(dd["min_eig"]),
                _unnum(dd["max_eig"]),
                Verdict(dd["verdict"]),
            ),
            sdp_status=DualStatus(d["sdp_status"]),
            sigma=np.array([_unnum(v) for v in d["sigma"]]),
            feasible=bool(d["feasible"]),
            residuals=np.array([_unnum(v) for v in d["residuals"]]),
            eps=_unnum(d["eps"]),
            notes=tuple(d["notes"]),
        )
        return rep, settings_from_dict(d["settings"]), d["tool_version"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed report: {exc}") from None


def dumps_report(r: SolveReport, settings: SolveSettings, version: str) -> str:
    return json.dumps(report_to_dict(r, settings, version), indent=2) + "\n"


def loads_report(text: str) -> tuple[SolveReport, SolveSettings, str]:
    return report_from_dict(json.loads(text))
