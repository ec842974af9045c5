import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonical_qcqp import dual as cd
from canonical_qcqp.benchmarks import BENCHMARK_IDS, load_case
from canonical_qcqp.dual import DualStatus
from canonical_qcqp.model import QuadraticForm, build_problem
from canonical_qcqp.sdp import (
    InitialPointError,
    IpmSettings,
    initial_point,
    solve_sdp,
    verify_certificate,
)
from oracles import dual_grid_max, random_problem

seeds = st.integers(0, 2**32 - 1)


def _sdp(p):
    asm = cd.assemble(p)
    return asm, cd.build_sdp(asm)


def test_settings_validation():
    for bad in (dict(gap_tol=0), dict(feas_tol=-1), dict(step_fraction=1.0), dict(max_iter=0)):
        with pytest.raises(ValueError):
            IpmSettings(**bad)


def test_trivial_one_dimensional():
    # min x^2 - 4x on [-10, 10]: unconstrained minimizer x = 2 inside the box,
    # so the box multiplier is 0, t = F^2 / G = 16 / 2 = 8
    p = build_problem(QuadraticForm([[2.0]], [4.0]), [], [-10.0], [10.0])
    asm, sdp = _sdp(p)
    pt, trace = solve_sdp(sdp)
    assert pt.status == DualStatus.OPTIMAL
    assert pt.sigma[0] == pytest.approx(0.0, abs=1e-6)
    assert pt.t == pytest.approx(8.0, rel=1e-6)
    assert cd.sdp_to_dual_value(asm, pt.dual_value) == pytest.approx(-4.0, abs=1e-6)
    assert np.allclose(pt.x_relax, [2.0], atol=1e-5)
    assert len(trace.lines()) == len(trace.records) > 0


@pytest.mark.parametrize("seed", range(5))
def test_initial_point_strictly_feasible(seed):
    p = random_problem(np.random.default_rng(seed), 3, 2)
    _, sdp = _sdp(p)
    sigma0, t0 = initial_point(sdp)
    assert np.all(sigma0 > 0)
    assert np.linalg.eigvalsh(sdp.lmi(np.append(sigma0, t0)))[0] > 0


def test_initial_point_convex_objective():
    # G(0) = A is already positive definite: sigma0 stays tiny but positive
    p = build_problem(QuadraticForm(np.eye(2) * 3, [1.0, 1.0]), [], [-1, -1], [1, 1])
    sigma0, _ = initial_point(_sdp(p)[1])
    assert np.all(sigma0 > 0) and np.all(sigma0 <= 1e-3)


def test_initial_point_failure():
    # a single unbounded-below direction no multiplier can fix
    asm = cd.DualAssembly(
        A=-np.eye(1), avec=np.zeros(1), aconst=0.0,
        Bks=np.zeros((1, 1, 1)), bvecs=np.zeros((1, 1)), dvec=np.zeros(1),
    )
    with pytest.raises(InitialPointError):
        initial_point(cd.build_sdp(asm))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_ipm_matches_dual_grid(seed):
    """Two multipliers (n = 1 with one constraint, or n = 2 unconstrained)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    p = random_problem(rng, n, 2 - n, box=1.0)
    asm, sdp = _sdp(p)
    pt, _ = solve_sdp(sdp)
    assert pt.status == DualStatus.OPTIMAL
    v_ipm = cd.sdp_to_dual_value(asm, pt.dual_value)
    v_grid, s_grid = dual_grid_max(asm, hi=max(10.0, 2 * pt.sigma.max()))
    tol = 1e-5 * (1 + abs(v_ipm))
    assert v_ipm >= v_grid - tol
    assert v_ipm <= v_grid + 1e-3 * (1 + abs(v_ipm))


@pytest.mark.parametrize("case_id", BENCHMARK_IDS)
def test_benchmark_sdp_certificate_and_gap_decrease(case_id):
    asm, sdp = _sdp(load_case(case_id).problem)
    pt, trace = solve_sdp(sdp)
    assert pt.status == DualStatus.OPTIMAL
    assert verify_certificate(sdp, pt)
    gaps = [r.gap for r in trace.records]
    assert gaps[-1] < 1e-6 * gaps[0]
    # the step safeguard allows at most 10% growth between iterations
    assert all(b <= 1.1 * a * (1 + 1e-12) for a, b in zip(gaps, gaps[1:]))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_random_certificate(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, int(rng.integers(1, 5)), int(rng.integers(0, 4)))
    _, sdp = _sdp(p)
    pt, _ = solve_sdp(sdp)
    if pt.status == DualStatus.OPTIMAL:
        assert verify_certificate(sdp, pt)


def test_max_iter_reports_non_optimal():
    _, sdp = _sdp(load_case("g07").problem)
    pt, trace = solve_sdp(sdp, IpmSettings(max_iter=2))
    assert pt.status != DualStatus.OPTIMAL
    assert len(trace.records) <= 2
