import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonical_qcqp import __version__
from canonical_qcqp.benchmarks import BENCHMARK_IDS, case_settings, load_case
from canonical_qcqp.io import (
    SchemaError,
    dumps_problem,
    dumps_report,
    from_lower_triangle,
    loads_problem,
    loads_report,
    lower_triangle,
)
from canonical_qcqp.model import ProblemError
from canonical_qcqp.recovery import solve
from oracles import random_problem


def test_lower_triangle_row_major():
    Q = np.array([[1.0, 2.0, 4.0], [2.0, 3.0, 5.0], [4.0, 5.0, 6.0]])
    assert lower_triangle(Q) == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    assert np.array_equal(from_lower_triangle([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3), Q)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_problem_round_trip_bit_exact(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, int(rng.integers(1, 6)), int(rng.integers(0, 4)))
    text = dumps_problem(p)
    q = loads_problem(text)
    assert q == p
    assert dumps_problem(q) == text


@pytest.mark.parametrize("case_id", BENCHMARK_IDS)
def test_benchmark_round_trip(case_id):
    p = load_case(case_id).problem
    assert loads_problem(dumps_problem(p)) == p


def _doc():
    return {
        "n": 2,
        "objective": {"Q_lower": [2.0, 0.0, 2.0], "p": [0.0, 0.0], "r": 0.0},
        "constraints": [],
        "lower": [-1.0, -1.0],
        "upper": [1.0, 1.0],
    }


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("lower"),
        lambda d: d.update(extra=1),
        lambda d: d.update(n=0),
        lambda d: d.update(n=True),
        lambda d: d["objective"].update(Q_lower=[1.0, 2.0]),
        lambda d: d["objective"].update(p=[1.0]),
        lambda d: d["objective"].update(r="x"),
        lambda d: d.update(constraints={}),
        lambda d: d.update(lower=[2.0, 2.0]),
        lambda d: d.update(upper=["a", 1.0]),
    ],
)
def test_schema_violations(mutate):
    d = _doc()
    mutate(d)
    # SchemaError for shape problems; an empty box fails model validation
    with pytest.raises(ProblemError):
        loads_problem(json.dumps(d))


def test_not_json():
    with pytest.raises(SchemaError):
        loads_problem("{")


@pytest.mark.parametrize("case_id", ["g07", "g18"])
def test_report_round_trip_byte_identical(case_id):
    case = load_case(case_id)
    s = case_settings(case)
    text = dumps_report(solve(case.problem, s), s, __version__)
    rep, s2, ver = loads_report(text)
    assert s2 == s and ver == __version__
    assert dumps_report(rep, s2, ver) == text


def test_report_non_finite_values():
    case = load_case("g01")
    s = case_settings(case)
    rep = replace(solve(case.problem, s), dual_value=-np.inf, gap=np.inf)
    text = dumps_report(rep, s, __version__)
    assert '"-inf"' in text
    back, _, _ = loads_report(text)
    assert back.dual_value == -np.inf and back.gap == np.inf
    assert dumps_report(back, s, __version__) == text
