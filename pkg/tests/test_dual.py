import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canonical_qcqp import dual as cd
from canonical_qcqp.model import QuadraticForm, build_problem, eval_objective, uniformize
from oracles import random_problem

seeds = st.integers(0, 2**32 - 1)


def _pd_sigma(rng, asm, p):
    """Random multipliers with box rows large enough that G is positive definite."""
    sigma = rng.uniform(0, 1, size=asm.num_multipliers)
    w = np.linalg.eigvalsh(cd.eval_G(asm, sigma))
    sigma[p.m:] += max(0.0, -w[0]) / 2 + rng.uniform(0.1, 2.0)
    return sigma


def test_assemble_shapes_and_order():
    p = random_problem(np.random.default_rng(0), 3, 2)
    asm = cd.assemble(p)
    assert asm.Bks.shape == (5, 3, 3) and asm.bvecs.shape == (5, 3) and asm.dvec.shape == (5,)
    cons = uniformize(p)
    assert np.array_equal(asm.Bks[4], cons[4].Q) and asm.dvec[1] == cons[1].r


def test_sigma_length_checked():
    asm = cd.assemble(random_problem(np.random.default_rng(1), 2, 1))
    with pytest.raises(ValueError):
        cd.eval_G(asm, np.zeros(2))


@settings(max_examples=200)
@given(seeds)
def test_complementary_function_identity(seed):
    """Xi(x, s) = P(x) + s^T g(x), and Xi at G^{-1}F equals P^d(s)."""
    rng = np.random.default_rng(seed)
    p = random_problem(rng, int(rng.integers(1, 5)), int(rng.integers(0, 3)))
    asm = cd.assemble(p)
    sigma = _pd_sigma(rng, asm, p)
    x = rng.uniform(-2, 2, size=p.n)
    g = np.array([c(x) for c in uniformize(p)])
    lhs = cd.complementary_function(asm, x, sigma)
    assert lhs == pytest.approx(eval_objective(p, x) + sigma @ g, rel=1e-9, abs=1e-9)
    xbar, res = cd.primal_from_dual(asm, sigma)
    assert res < 1e-8
    assert cd.complementary_function(asm, xbar, sigma) == pytest.approx(
        cd.dual_value(asm, sigma), rel=1e-9, abs=1e-9
    )


@settings(max_examples=300)
@given(seeds)
def test_weak_duality_random(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, int(rng.integers(1, 5)), int(rng.integers(0, 3)))
    asm = cd.assemble(p)
    sigma = _pd_sigma(rng, asm, p)
    for _ in range(20):
        x = rng.uniform(p.lower, p.upper)
        if all(g(x) <= 0 for g in p.constraints):
            assert cd.dual_value(asm, sigma) <= eval_objective(p, x) + 1e-9
            return


@settings(max_examples=100)
@given(seeds)
def test_dual_gradient_is_constraint_value(seed):
    """dP^d/ds_k = g_k(x(s)) where G(s) is positive definite."""
    rng = np.random.default_rng(seed)
    p = random_problem(rng, int(rng.integers(1, 4)), int(rng.integers(0, 3)))
    asm = cd.assemble(p)
    sigma = _pd_sigma(rng, asm, p)
    xbar, _ = cd.primal_from_dual(asm, sigma)
    cons = uniformize(p)
    k = int(rng.integers(0, len(cons)))
    h = 1e-6
    e = np.zeros_like(sigma)
    e[k] = h
    fd = (cd.dual_value(asm, sigma + e) - cd.dual_value(asm, sigma - e)) / (2 * h)
    assert fd == pytest.approx(cons[k](xbar), rel=1e-4, abs=1e-5)


def test_dual_value_outside_domain():
    # min -x^2 on [-1, 1]; G(s) = -2 + 2 s is indefinite for s < 1
    p = build_problem(QuadraticForm([[-2.0]], [0.0]), [], [-1.0], [1.0])
    asm = cd.assemble(p)
    assert cd.dual_value(asm, [0.5]) == -np.inf
    # s = 1: G = 0, F = 0 in its column space; P^d = -s * d = -1
    assert cd.dual_value(asm, [1.0]) == pytest.approx(-1.0)


def test_column_space_failure():
    # G = 0 but F != 0
    p = build_problem(QuadraticForm([[0.0]], [1.0]), [], [-1.0], [1.0])
    assert cd.dual_value(cd.assemble(p), [0.0]) == -np.inf


def test_pinv_solve_min_norm():
    G = np.diag([2.0, 0.0])
    x, res = cd.pinv_solve(G, np.array([4.0, 0.0]))
    assert np.allclose(x, [2.0, 0.0]) and res == pytest.approx(0.0)
    x, res = cd.pinv_solve(G, np.array([4.0, 1.0]))
    assert res == pytest.approx(1.0)
    x, res = cd.pinv_solve(np.zeros((2, 2)), np.array([1.0, 1.0]))
    assert np.array_equal(x, [0.0, 0.0])


@settings(max_examples=200)
@given(seeds)
def test_sdp_objective_maps_to_dual_value(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, int(rng.integers(1, 4)), int(rng.integers(0, 3)))
    asm = cd.assemble(p)
    sdp = cd.build_sdp(asm)
    sigma = _pd_sigma(rng, asm, p)
    G, F = cd.eval_G(asm, sigma), cd.eval_F(asm, sigma)
    t = float(F @ np.linalg.solve(G, F))
    y = np.append(sigma, t)
    assert np.allclose(sdp.lmi(y), np.block([[G, F[:, None]], [F[None, :], np.array([[t]])]]))
    assert cd.sdp_to_dual_value(asm, sdp.objective(y)) == pytest.approx(
        cd.dual_value(asm, sigma), rel=1e-8, abs=1e-8
    )


@settings(max_examples=300)
@given(seeds, st.sampled_from([-1.0, 1.0]))
def test_schur_equivalence(seed, sign):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    R = rng.normal(size=(n, n))
    G = R @ R.T + 0.1 * np.eye(n)
    F = rng.normal(size=n)
    s = float(F @ np.linalg.solve(G, F))
    t = s + sign * rng.uniform(1e-3, 1.0) * (1 + s)
    assert cd.block_psd(G, F, t) == cd.schur_psd(G, F, t) == (sign > 0)
