"""Independent reference computations used by the test suite."""
from __future__ import annotations

import numpy as np

from canonical_qcqp.model import QcqpProblem, QuadraticForm, build_problem


def random_form(rng: np.random.Generator, n: int, scale: float = 1.0) -> QuadraticForm:
    M = rng.normal(size=(n, n)) * scale
    return QuadraticForm(M + M.T, rng.normal(size=n) * scale, float(rng.normal()))


def random_problem(rng: np.random.Generator, n: int, m: int, box: float = 2.0) -> QcqpProblem:
    """Random nonconvex QCQP on ``[-box, box]^n`` with a strictly feasible anchor.

    Each constraint's constant is shifted so a random interior point satisfies
    it with slack, so the feasible set is never empty.
    """
    anchor = rng.uniform(-0.8 * box, 0.8 * box, size=n)
    cons = []
    for _ in range(m):
        g = random_form(rng, n)
        slack = rng.uniform(0.1, 1.0)
        # g(anchor) = -slack after the shift
        cons.append(QuadraticForm(g.Q, g.p, g.r + g(anchor) + slack))
    return build_problem(random_form(rng, n), cons, np.full(n, -box), np.full(n, box))


def _monomials(X: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    cols = [np.ones(X.shape[0])] + [X[:, i] for i in range(n)]
    cols += [X[:, i] * X[:, j] for i in range(n) for j in range(i, n)]
    return np.stack(cols, axis=1)


def _coefficients(q: QuadraticForm) -> np.ndarray:
    """q in the monomial basis ``1, x_i, x_i x_j (i <= j)``, read entry by entry."""
    n = q.n
    c = [-q.r] + [-q.p[i] for i in range(n)]
    c += [0.5 * q.Q[i, i] if i == j else q.Q[i, j] for i in range(n) for j in range(i, n)]
    return np.array(c)


def grid_minimum(p: QcqpProblem, step: float = 1e-2, feas_tol: float = 0.0):
    """Minimum of the objective over the feasible grid points.

    Returns ``(f_min, x_min)`` or ``(inf, None)`` if no grid point is feasible.
    Up to two trailing coordinates are vectorized; the rest are looped.
    """
    n = p.n
    axes = [np.linspace(p.lower[i], p.upper[i], int(round((p.upper[i] - p.lower[i]) / step)) + 1)
            for i in range(n)]
    k = min(n, 2)
    inner = np.stack(np.meshgrid(*axes[n - k:], indexing="ij"), -1).reshape(-1, k)
    outer_axes = axes[: n - k]
    outer = (np.stack(np.meshgrid(*outer_axes, indexing="ij"), -1).reshape(-1, len(outer_axes))
             if outer_axes else np.zeros((1, 0)))
    cf = _coefficients(p.objective)
    cg = np.array([_coefficients(g) for g in p.constraints]).reshape(len(p.constraints), cf.size)
    best, arg = np.inf, None
    for head in outer:
        X = np.hstack([np.broadcast_to(head, (inner.shape[0], head.size)), inner])
        Phi = _monomials(X)
        ok = np.all(Phi @ cg.T <= feas_tol, axis=1) if cg.size else np.ones(len(X), bool)
        if not ok.any():
            continue
        f = Phi[ok] @ cf
        i = int(np.argmin(f))
        if f[i] < best:
            best, arg = float(f[i]), X[ok][i].copy()
    return best, arg


def dual_grid_max(asm, hi: float = 10.0, step: float = 0.02, zoom: int = 2):
    """Max of P^d over a grid of two multipliers, for n <= 2.

    ``G(s)^{-1}`` is written in closed form; singular or indefinite grid
    points are skipped.  Each zoom level re-grids a 5-cell neighborhood of
    the incumbent ten times finer.
    """
    assert asm.num_multipliers == 2 and asm.n <= 2
    lo = np.zeros(2)
    top = np.full(2, hi)
    best, arg = -np.inf, None
    for _ in range(zoom + 1):
        axes = [np.arange(lo[k], top[k] + step / 2, step) for k in range(2)]
        S1, S2 = np.meshgrid(*axes, indexing="ij")
        s1, s2 = S1.ravel(), S2.ravel()
        G = asm.A[None] + s1[:, None, None] * asm.Bks[0] + s2[:, None, None] * asm.Bks[1]
        F = asm.avec[None] + s1[:, None] * asm.bvecs[0] + s2[:, None] * asm.bvecs[1]
        if asm.n == 1:
            g = G[:, 0, 0]
            ok = g > 1e-9
            quad = np.where(ok, F[:, 0] ** 2 / np.where(ok, g, 1.0), np.inf)
        else:
            a, b, d = G[:, 0, 0], G[:, 0, 1], G[:, 1, 1]
            det = a * d - b * b
            ok = (a > 1e-9) & (det > 1e-12 * (1 + a * a + d * d))
            safe = np.where(ok, det, 1.0)
            quad = np.where(ok, (d * F[:, 0] ** 2 - 2 * b * F[:, 0] * F[:, 1] + a * F[:, 1] ** 2) / safe,
                            np.inf)
        val = -0.5 * quad - s1 * asm.dvec[0] - s2 * asm.dvec[1] - asm.aconst
        k = int(np.argmax(val))
        if val[k] > best:
            best, arg = float(val[k]), np.array([s1[k], s2[k]])
        lo = np.maximum(arg - 5 * step, 0.0)
        top = arg + 5 * step
        step /= 10
    return best, arg
