"""Primal recovery from a canonical dual solution.

When ``G(sigma)`` is comfortably positive definite the primal minimizer is
``G^{-1} F``.  Otherwise the multipliers are read as an active-set guess: box
rows with positive multipliers pin variables to a bound, other positive rows
become equations, and the resulting system is solved for the free variables.
Affine objectives with an underdetermined system go through variable
elimination plus a reduced unconstrained minimization; purely quadratic
objectives get a small linear perturbation and are re-solved.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import dual as cd
from .model import (
    DEFAULT_FEAS_TOL,
    QcqpProblem,
    eval_constraints,
    eval_objective,
    max_violation,
    perturb_linear,
)
from .sdp import IpmSettings, IpmTrace, solve_sdp

log = logging.getLogger(__name__)

CERT_GAP_REL = 1e-4  # relative duality gap below which a feasible point is certified


class Verdict(str, Enum):
    POSITIVE_DEFINITE = "positive_definite"
    ILL_CONDITIONED = "ill_conditioned"
    SINGULAR = "singular"


class Path(str, Enum):
    DIRECT = "direct"
    ACTIVE_SET_LINEAR = "active_set_linear"
    ELIMINATE_AND_MINIMIZE = "eliminate_and_minimize"
    PERTURBED = "perturbed"
    TENTATIVE = "tentative"  # no recovery route succeeded


class RecoveryError(RuntimeError):
    pass


class NonlinearResidual(RecoveryError):
    """Active equations stay quadratic in the free variables."""


class Underdetermined(RecoveryError):
    pass


class Inconsistent(RecoveryError):
    pass


class EliminationError(RecoveryError):
    pass


# -- definiteness --------------------------------------------------------------


@dataclass(frozen=True)
class DefinitenessReport:
    cholesky_ok: bool
    cond_estimate: float
    min_eig: float
    max_eig: float
    verdict: Verdict


def assess(
    G,
    eig_tol_rel: float = 1e-8,
    cond_warn: float = 1e5,
    cond_max: float = 1e10,
    zero_tol: float = 1e-3,
) -> DefinitenessReport:
    """Cholesky, condition number and extreme eigenvalues of ``G``.

    ``G`` whose largest eigenvalue is at most ``zero_tol`` counts as singular:
    its inverse is dominated by noise even if the condition number is modest.
    """
    G = np.asarray(G, dtype=float)
    scale = max(1.0, float(np.max(np.abs(G)))) if G.size else 1.0
    if G.ndim != 2 or G.shape[0] != G.shape[1] or \
            np.max(np.abs(G - G.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("assess expects a symmetric matrix")
    try:
        np.linalg.cholesky(G)
        chol = True
    except np.linalg.LinAlgError:
        chol = False
    w = np.linalg.eigvalsh(G)
    lo, hi = float(w[0]), float(w[-1])
    absw = np.abs(w)
    cond = float(absw.max() / absw.min()) if absw.min() > 0 else np.inf
    eig_tol = eig_tol_rel * max(1.0, hi)
    if lo <= eig_tol or hi <= zero_tol:
        verdict = Verdict.SINGULAR
    elif chol and cond <= min(cond_warn, cond_max):
        verdict = Verdict.POSITIVE_DEFINITE
    else:
        verdict = Verdict.ILL_CONDITIONED
    return DefinitenessReport(chol, cond, lo, hi, verdict)


def null_weights(G, eig_tol_rel: float = 1e-8, zero_tol: float = 1e-3) -> np.ndarray:
    """Per-variable weight of the (numerical) null space of ``G``.

    A weight near 1 means ``G x = F`` leaves that coordinate undetermined.
    """
    w, Q = np.linalg.eigh(np.asarray(G, dtype=float))
    if w[-1] <= zero_tol:
        return np.ones(len(w))
    null = Q[:, w <= eig_tol_rel * max(1.0, w[-1])]
    return np.sum(null**2, axis=1)


# -- active set ----------------------------------------------------------------


@dataclass(frozen=True)
class ActiveSet:
    active_constraints: tuple[int, ...]  # indices into the original m constraints
    pinned_variables: dict = field(default_factory=dict)  # var -> bound value
    ambiguous: tuple[int, ...] = ()  # pinned vars whose bound side is undetermined
    demoted: tuple[int, ...] = ()  # positive box multiplier, but far from both bounds

    def free_variables(self, n: int) -> list[int]:
        return [i for i in range(n) if i not in self.pinned_variables]

    def variants(self, p: QcqpProblem, limit: int = 729) -> Iterator["ActiveSet"]:
        """Concrete active sets: ambiguous pins at lower, upper, or released."""
        if not self.ambiguous:
            yield self
            return
        amb = self.ambiguous
        count = 0
        base = {i: v for i, v in self.pinned_variables.items() if i not in amb}
        for choice in itertools.product((0, 1, 2), repeat=len(amb)):
            if count >= limit:
                return
            pins = dict(base)
            for i, ch in zip(amb, choice):
                if ch == 0:
                    pins[i] = float(p.lower[i])
                elif ch == 1:
                    pins[i] = float(p.upper[i])
            count += 1
            yield ActiveSet(self.active_constraints, pins)


def detect_active_set(
    p: QcqpProblem,
    sigma,
    x_tentative,
    sigma_active_tol: float = 1e-4,
    box_snap_frac: float = 0.3,
    null_weight: Optional[np.ndarray] = None,
    null_tol: float = 0.5,
) -> ActiveSet:
    """Read an active-set guess off the multipliers.

    A multiplier counts as nonzero when it exceeds ``sigma_active_tol`` times
    ``max(1, max(sigma))``.  Box rows pin their variable to the bound nearer
    ``x_tentative``; an exact tie goes to the bound the objective gradient
    points toward.  Variables whose tentative value sits in the null space of
    ``G`` (``null_weight > null_tol``) are marked ambiguous, and variables
    farther than ``box_snap_frac`` of the box width from both bounds are
    demoted to free.
    """
    sigma = np.asarray(sigma, dtype=float)
    x = np.asarray(x_tentative, dtype=float)
    if sigma.shape[0] != p.m + p.n:
        raise ValueError(f"sigma has length {sigma.shape[0]}, expected {p.m + p.n}")
    thresh = sigma_active_tol * max(1.0, float(sigma.max(initial=0.0)))
    active = tuple(int(j) for j in np.flatnonzero(sigma[: p.m] > thresh))
    grad = p.objective.gradient(x)
    pinned, ambiguous, demoted = {}, [], []
    for i in np.flatnonzero(sigma[p.m:] > thresh):
        i = int(i)
        lo, hi = float(p.lower[i]), float(p.upper[i])
        dlo, dhi = abs(x[i] - lo), abs(x[i] - hi)
        if dlo < dhi or (dlo == dhi and grad[i] >= 0):
            side, dist = lo, dlo
        else:
            side, dist = hi, dhi
        undetermined = null_weight is not None and null_weight[i] > null_tol
        if undetermined:
            ambiguous.append(i)
            pinned[i] = side
        elif dist <= box_snap_frac * (hi - lo):
            pinned[i] = side
        else:
            demoted.append(i)
    return ActiveSet(active, pinned, tuple(ambiguous), tuple(demoted))


def _split(p: QcqpProblem, aset: ActiveSet):
    free = aset.free_variables(p.n)
    pin_idx = sorted(aset.pinned_variables)
    xp = np.array([aset.pinned_variables[i] for i in pin_idx], dtype=float)
    return free, pin_idx, xp


def _reduced_rows(p: QcqpProblem, aset: ActiveSet):
    """Each active ``g_k`` restricted to the free variables.

    Returns ``(Qff, lin, const)`` triples with
    ``g_k = 1/2 u^T Qff u + lin^T u + const`` for free values ``u``.
    """
    free, pin_idx, xp = _split(p, aset)
    rows = []
    for k in aset.active_constraints:
        g = p.constraints[k]
        Qff = g.Q[np.ix_(free, free)]
        lin = g.Q[np.ix_(free, pin_idx)] @ xp - g.p[free]
        Qpp = g.Q[np.ix_(pin_idx, pin_idx)]
        const = 0.5 * xp @ Qpp @ xp - g.p[pin_idx] @ xp - g.r
        rows.append((Qff, lin, const))
    return free, rows


def _assemble_point(p: QcqpProblem, aset: ActiveSet, free, u) -> np.ndarray:
    x = np.empty(p.n)
    for i, v in aset.pinned_variables.items():
        x[i] = v
    x[free] = u
    return x


def refine_linear(
    p: QcqpProblem,
    aset: ActiveSet,
    x_tentative=None,
    residual_tol: float = 1e-8,
) -> np.ndarray:
    """Pin variables and solve the active equations when they are linear.

    Raises :class:`NonlinearResidual` when some active equation keeps a
    quadratic term in the free variables, :class:`Underdetermined` when the
    equations do not fix every free variable, and :class:`Inconsistent` when
    an overdetermined system has no solution.
    """
    if not aset.active_constraints and not aset.pinned_variables:
        if x_tentative is None:
            raise Underdetermined("empty active set and no tentative point")
        return np.array(x_tentative, dtype=float)
    free, rows = _reduced_rows(p, aset)
    if any(np.any(Qff != 0.0) for Qff, _, _ in rows):
        raise NonlinearResidual("active equations are quadratic in the free variables")
    if not free:
        x = _assemble_point(p, aset, free, np.empty(0))
        if rows and max(abs(c) for _, _, c in rows) > residual_tol * _scale(rows):
            raise Inconsistent("pinned point violates an active equation")
        return x
    if not rows:
        if x_tentative is None:
            raise Underdetermined("no active equations for the free variables")
        x = np.array(x_tentative, dtype=float)
        for i, v in aset.pinned_variables.items():
            x[i] = v
        return x
    J = np.array([lin for _, lin, _ in rows])
    h = np.array([c for _, _, c in rows])
    rank = np.linalg.matrix_rank(J)
    if rank < len(free):
        raise Underdetermined(f"{rank} independent equations for {len(free)} free variables")
    u, *_ = np.linalg.lstsq(J, -h, rcond=None)
    resid = float(np.max(np.abs(J @ u + h)))
    if resid > residual_tol * _scale(rows):
        raise Inconsistent(f"least-squares residual {resid:.3e}")
    return _assemble_point(p, aset, free, u)


def _scale(rows) -> float:
    return max([1.0] + [abs(c) for _, _, c in rows] + [float(np.max(np.abs(l), initial=0)) for _, l, _ in rows])


def refine_newton(
    p: QcqpProblem,
    aset: ActiveSet,
    x0,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> np.ndarray:
    """Newton's method on a square system of quadratic active equations.

    The nonlinear counterpart of :func:`refine_linear`, started from the
    free components of ``x0``.
    """
    free, rows = _reduced_rows(p, aset)
    if len(rows) != len(free) or not free:
        raise Underdetermined(f"{len(rows)} equations for {len(free)} free variables")
    u = np.asarray(x0, dtype=float)[free].copy()
    scale = _scale(rows)

    def resid(u):
        return np.array([0.5 * u @ Q @ u + l @ u + c for Q, l, c in rows])

    r = resid(u)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol * scale:
            return _assemble_point(p, aset, free, u)
        J = np.array([Q @ u + l for Q, l, _ in rows])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise Inconsistent("singular Jacobian in Newton refinement") from None
        alpha = 1.0
        norm0 = np.linalg.norm(r)
        while alpha > 1e-8:
            un = u + alpha * step
            rn = resid(un)
            if np.linalg.norm(rn) < (1 - 1e-4 * alpha) * norm0 or norm0 == 0:
                break
            alpha *= 0.5
        u, r = un, rn
    if np.max(np.abs(r)) <= 1e-8 * scale:
        return _assemble_point(p, aset, free, u)
    raise Inconsistent(f"Newton refinement stalled at residual {np.max(np.abs(r)):.3e}")


def polish_kkt(
    p: QcqpProblem,
    asm: cd.DualAssembly,
    x0,
    sigma,
    active_tol: float = 1e-4,
    tol: float = 1e-12,
    max_iter: int = 30,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Newton on ``G(s) x = F(s)``, ``g_k(x) = 0`` over the multipliers in use.

    Started from an interior-point estimate ``(x0, sigma)``; returns the
    polished ``(x, sigma)`` or ``None`` if Newton fails, a multiplier turns
    negative, or ``G`` loses definiteness.
    """
    sigma = np.asarray(sigma, dtype=float)
    act = np.flatnonzero(sigma > active_tol * max(1.0, sigma.max(initial=0.0)))
    Bs, bs, ds = asm.Bks[act], asm.bvecs[act], asm.dvec[act]
    n, k = p.n, act.size
    x, lam = np.asarray(x0, dtype=float).copy(), sigma[act].copy()

    def resid(x, lam):
        G = asm.A + np.tensordot(lam, Bs, axes=1)
        F = asm.avec + lam @ bs
        g = 0.5 * np.einsum("i,kij,j->k", x, Bs, x) - bs @ x - ds
        return G, np.concatenate([G @ x - F, g])

    G, r = resid(x, lam)
    scale = 1.0 + np.linalg.norm(asm.avec) + np.max(np.abs(ds), initial=0.0)
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol * scale:
            break
        Jg = np.einsum("kij,j->ki", Bs, x) - bs  # rows: gradients of g_k
        J = np.block([[G, Jg.T], [Jg, np.zeros((k, k))]])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        x, lam = x + step[:n], lam + step[n:]
        G, r = resid(x, lam)
    else:
        return None
    if not np.all(np.isfinite(r)) or np.linalg.norm(r) > 1e-9 * scale or np.any(lam < 0):
        return None
    if np.linalg.eigvalsh(G)[0] <= 0:
        return None
    out = np.zeros_like(sigma)
    out[act] = lam
    return x, out


# -- elimination ---------------------------------------------------------------


def _support(g) -> set[int]:
    return set(np.flatnonzero(np.any(g.Q != 0, axis=0) | (g.p != 0)).tolist())


def elimination_order(
    p: QcqpProblem, aset: ActiveSet, free_vars: Sequence[int]
) -> list[tuple[int, int]]:
    """Order ``(constraint, variable)`` in which each equation fixes one unknown.

    An equation can fix an unknown once every other variable in it is known
    and it has no square term in that unknown; products with known variables
    are fine.  Raises :class:`EliminationError` when some variable cannot be
    fixed this way.
    """
    known = set(aset.pinned_variables) | set(free_vars)
    pending = list(aset.active_constraints)
    order = []
    progress = True
    while pending and progress:
        progress = False
        for k in list(pending):
            g = p.constraints[k]
            unknown = _support(g) - known
            if len(unknown) > 1:
                continue
            pending.remove(k)
            progress = True
            if not unknown:
                order.append((k, -1))  # consistency check only
                continue
            (j,) = unknown
            if g.Q[j, j] != 0.0:
                raise EliminationError(f"constraint {k} is quadratic in x[{j}]")
            known.add(j)
            order.append((k, j))
    missing = set(range(p.n)) - known
    if missing or pending:
        raise EliminationError(
            f"cannot eliminate variables {sorted(missing)} with the active equations"
        )
    return order


def back_substitute(
    p: QcqpProblem, aset: ActiveSet, free_vars, u, order, tol: float = 1e-9
) -> Optional[np.ndarray]:
    """Full point from free values, or ``None`` where the map is undefined."""
    # unknown entries stay 0; the order guarantees they are outside the support
    x = np.zeros(p.n)
    for i, v in aset.pinned_variables.items():
        x[i] = v
    x[list(free_vars)] = u
    with np.errstate(all="ignore"):
        for k, j in order:
            g = p.constraints[k]
            if j < 0:
                if abs(g(x)) > tol * (1 + np.max(np.abs(x))):
                    return None
                continue
            x[j] = 0.0
            coef = float(g.Q[j] @ x - g.p[j])
            if not np.isfinite(coef) or abs(coef) < 1e-14 * (1 + np.max(np.abs(g.Q[j] * x))):
                return None
            x[j] = -g(x) / coef
    return x if np.all(np.isfinite(x)) else None


def _num_grad(f, u, h_rel=1e-7):
    g = np.empty_like(u)
    for i in range(u.size):
        h = h_rel * max(1.0, abs(u[i]))
        e = np.zeros_like(u)
        e[i] = h
        g[i] = (f(u + e) - f(u - e)) / (2 * h)
    return g


def _bfgs(f, u0, accept: Callable[[np.ndarray], bool], gtol=1e-9, max_iter=500):
    """Quasi-Newton descent with central-difference gradients.

    ``accept`` filters trial points that already pass the Armijo test;
    rejected trials shrink the step.
    """
    u = np.asarray(u0, dtype=float)
    fu = f(u)
    if not np.isfinite(fu):
        raise EliminationError("reduced objective undefined at the start point")
    g = _num_grad(f, u)
    H = np.eye(u.size)
    for it in range(max_iter):
        if not np.all(np.isfinite(g)):
            raise EliminationError("non-finite gradient in reduced minimization")
        if np.linalg.norm(g) <= gtol * (1 + abs(fu)):
            return u, fu, True
        d = -H @ g
        if g @ d >= 0:
            H = np.eye(u.size)
            d = -g
        alpha = 1.0
        while alpha > 1e-16:
            un = u + alpha * d
            fn = f(un)
            # accept last: it may record state and must only see steps actually taken
            if np.isfinite(fn) and fn <= fu + 1e-4 * alpha * (g @ d) and accept(un):
                break
            alpha *= 0.5
        else:
            return u, fu, True  # no acceptable decrease along d
        gn = _num_grad(f, un)
        s, yv = un - u, gn - g
        sy = s @ yv
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            rho = 1.0 / sy
            I = np.eye(u.size)
            H = (I - rho * np.outer(s, yv)) @ H @ (I - rho * np.outer(yv, s)) + rho * np.outer(s, s)
        if abs(fu - fn) <= 1e-15 * (1 + abs(fu)) and np.linalg.norm(s) <= 1e-13 * (1 + np.linalg.norm(u)):
            return un, fn, True
        u, fu, g = un, fn, gn
    return u, fu, False


def eliminate_and_minimize(
    p: QcqpProblem,
    aset: ActiveSet,
    free_vars: Sequence[int],
    start,
    max_iter: int = 500,
) -> np.ndarray:
    """Solve the active equations for the non-free variables, then minimize.

    The objective becomes a function of ``free_vars`` alone through
    :func:`back_substitute`.  A start whose image leaves the box is first
    moved by minimizing the squared box excess.  Once an iterate lands inside
    every box, trial points that leave a box are rejected.
    """
    free_vars = list(free_vars)
    start = np.asarray(start, dtype=float)
    if start.shape[0] != len(free_vars):
        raise ValueError(f"start has length {start.shape[0]}, expected {len(free_vars)}")
    order = elimination_order(p, aset, free_vars)

    def full(u):
        return back_substitute(p, aset, free_vars, u, order)

    def reduced(u):
        x = full(u)
        return np.inf if x is None else p.objective(x)

    def inside(x):
        return x is not None and np.all(x >= p.lower) and np.all(x <= p.upper)

    # phase 1 aims at a slightly shrunken box so it ends strictly inside
    margin = 1e-3 * (p.upper - p.lower)
    lo_in, hi_in = p.lower + margin, p.upper - margin

    def outside(u):
        x = full(u)
        if x is None:
            return np.inf
        ex = np.maximum(lo_in - x, 0) + np.maximum(x - hi_in, 0)
        return float(ex @ ex)

    if not inside(full(start)) and np.isfinite(outside(start)):
        u1, _, _ = _bfgs(outside, start, lambda u: True, gtol=1e-12, max_iter=max_iter)
        if inside(full(u1)):
            start = u1
    state = {"inside": inside(full(start))}

    def accept(u):
        ok = inside(full(u))
        if state["inside"] and not ok:
            return False
        state["inside"] = state["inside"] or ok
        return True

    u, _, converged = _bfgs(reduced, start, accept, max_iter=max_iter)
    if not converged:
        raise EliminationError("reduced minimization did not converge")
    x = full(u)
    if x is None:
        raise EliminationError("back-substitution undefined at the minimizer")
    return x


def choose_free_variables(p: QcqpProblem, aset: ActiveSet) -> list[int]:
    """First variable subset (lexicographic) that makes elimination possible."""
    cand = aset.free_variables(p.n)
    k = len(cand) - len(aset.active_constraints)
    if k < 0:
        raise EliminationError("more active equations than free variables")
    for combo in itertools.combinations(cand, k):
        try:
            elimination_order(p, aset, combo)
            return list(combo)
        except EliminationError:
            continue
    raise EliminationError("no subset of free variables admits elimination")


# -- orchestration -------------------------------------------------------------


@dataclass(frozen=True)
class SolveSettings:
    ipm: IpmSettings = field(default_factory=IpmSettings)
    feas_tol: float = DEFAULT_FEAS_TOL
    sigma_active_tol: float = 1e-4
    box_snap_frac: float = 0.3
    eps: float = 0.05
    allow_perturbation: bool = True
    free_vars: Optional[tuple[int, ...]] = None
    start: Optional[tuple[float, ...]] = None
    max_variants: int = 729


@dataclass(frozen=True)
class SolveReport:
    x: np.ndarray
    objective: float
    max_violation: float
    dual_value: float
    gap: float
    path: Path
    definiteness: DefinitenessReport
    sdp_status: cd.DualStatus
    sigma: np.ndarray
    feasible: bool
    residuals: np.ndarray
    eps: float = 0.0
    notes: tuple[str, ...] = ()
    trace: Optional[IpmTrace] = field(default=None, compare=False, repr=False)

    @property
    def success(self) -> bool:
        return self.feasible and self.path != Path.TENTATIVE

    @property
    def certified(self) -> bool:
        """Feasible with a closed duality gap, so the point is a global minimizer.

        A feasible point with a large gap may be only a local KKT point.
        """
        return self.success and self.gap <= CERT_GAP_REL * (1.0 + abs(self.objective))


@dataclass
class _DualInfo:
    asm: cd.DualAssembly
    point: cd.DualPoint
    trace: IpmTrace
    G: np.ndarray
    F: np.ndarray
    report: DefinitenessReport
    dual_value: float


def _dual_stage(p: QcqpProblem, settings: SolveSettings) -> _DualInfo:
    asm = cd.assemble(p)
    sdp = cd.build_sdp(asm)
    point, trace = solve_sdp(sdp, settings.ipm)
    G = cd.eval_G(asm, point.sigma)
    F = cd.eval_F(asm, point.sigma)
    return _DualInfo(
        asm, point, trace, G, F, assess(G), cd.sdp_to_dual_value(asm, point.dual_value)
    )


def _tentative(info: _DualInfo) -> np.ndarray:
    """A solution of ``G x = F``: the SDP's own choice when available."""
    xr = info.point.x_relax
    if xr is not None and np.all(np.isfinite(xr)):
        return xr
    return cd.pinv_solve(info.G, info.F)[0]


def _best(p: QcqpProblem, cands, feas_tol):
    """Pick the lowest objective among feasible candidates, else least violation."""
    scored = [(max_violation(p, x), eval_objective(p, x), x, tag) for x, tag in cands]
    feas = [c for c in scored if c[0] <= feas_tol]
    if feas:
        return min(feas, key=lambda c: c[1])
    return min(scored, key=lambda c: c[0]) if scored else None


def _active_set_candidates(p, info, x_tent, settings, notes):
    aset = detect_active_set(
        p,
        info.point.sigma,
        x_tent,
        settings.sigma_active_tol,
        settings.box_snap_frac,
        null_weight=null_weights(info.G),
    )
    notes.append(
        f"active constraints {list(aset.active_constraints)}, pinned "
        f"{sorted(aset.pinned_variables)}, ambiguous {list(aset.ambiguous)}, "
        f"demoted {list(aset.demoted)}"
    )
    cands, escalated = [], []
    for variant in aset.variants(p, settings.max_variants):
        try:
            x = refine_linear(p, variant, x_tent)
        except NonlinearResidual:
            try:
                x = refine_newton(p, variant, x_tent)
            except RecoveryError as exc:
                escalated.append(exc)
                continue
        except RecoveryError as exc:
            escalated.append(exc)
            continue
        cands.append((x, Path.ACTIVE_SET_LINEAR))
    return aset, cands, escalated


def _elimination_starts(p, free, x_tent, grid=(0.25, 0.5, 0.75)):
    lo, hi = p.lower[free], p.upper[free]
    starts = []
    if x_tent is not None:
        starts.append(np.clip(x_tent[free], lo, hi))
    for fr in itertools.product(grid, repeat=len(free)):
        starts.append(lo + np.asarray(fr) * (hi - lo))
    return starts


def _eliminate_candidate(p, settings, notes, x_tent=None, max_subsets=64):
    """Eliminate with every constraint active; best feasible result or ``None``.

    Stored hints (free variables, start) are used as given.  Otherwise each
    admissible free-variable subset is tried from the tentative point, then
    from a 3^k grid in the free box.
    """
    all_active = ActiveSet(tuple(range(p.m)), {})
    if settings.free_vars is not None:
        subsets = [list(settings.free_vars)]
    else:
        k = p.n - p.m
        subsets = []
        for combo in itertools.combinations(range(p.n), max(k, 0)):
            try:
                elimination_order(p, all_active, combo)
            except EliminationError:
                continue
            subsets.append(list(combo))
            if len(subsets) >= max_subsets:
                break
    if not subsets:
        notes.append("elimination failed: no subset of free variables admits elimination")
        return None
    best, last_err = None, None
    for free in subsets:
        if settings.start is not None:
            starts = [np.asarray(settings.start, dtype=float)]
        else:
            starts = _elimination_starts(p, free, x_tent)
        for start in starts:
            try:
                x = eliminate_and_minimize(p, all_active, free, start)
            except (RecoveryError, ValueError) as exc:
                last_err = exc
                continue
            if max_violation(p, x) > settings.feas_tol:
                continue
            f = eval_objective(p, x)
            if best is None or f < best[0]:
                best = (f, x, free)
            break  # first feasible start per subset
    if best is None:
        notes.append(f"elimination found no feasible point (last error: {last_err})")
        return None
    notes.append(f"eliminated with free variables {best[2]}")
    return best[1]


def solve(p: QcqpProblem, settings: Optional[SolveSettings] = None) -> SolveReport:
    """Dual SDP, definiteness check, then the first recovery route that works."""
    settings = settings or SolveSettings()
    notes: list[str] = []
    info = _dual_stage(p, settings)
    rep = info.report
    notes.append(
        f"sdp {info.point.status.value} in {len(info.trace.records)} iterations; "
        f"G verdict {rep.verdict.value} (cond {rep.cond_estimate:.4e}, "
        f"min eig {rep.min_eig:.4e}, max eig {rep.max_eig:.4e})"
    )

    chosen = None
    eps_used = 0.0
    if rep.verdict == Verdict.POSITIVE_DEFINITE:
        x = np.linalg.solve(info.G, info.F)
        polished = polish_kkt(p, info.asm, x, info.point.sigma, settings.sigma_active_tol)
        if polished is not None and max_violation(p, polished[0]) <= max_violation(p, x):
            x = polished[0]
            notes.append("direct point polished on the KKT system")
        chosen = (x, Path.DIRECT)
    else:
        x_tent = _tentative(info)
        aset, cands, escalated = _active_set_candidates(p, info, x_tent, settings, notes)
        best = _best(p, cands, settings.feas_tol)
        if best is not None and best[0] <= settings.feas_tol:
            chosen = (best[2], best[3])
        else:
            if escalated:
                notes.append(f"active-set refinement escalated: {escalated[0]}")
            affine = not np.any(p.objective.Q)
            if affine:
                x = _eliminate_candidate(p, settings, notes, x_tent)
                if x is not None:
                    chosen = (x, Path.ELIMINATE_AND_MINIMIZE)
            elif (
                rep.verdict == Verdict.SINGULAR
                and settings.allow_perturbation
                and not np.any(p.objective.p)
                and settings.eps > 0
            ):
                eps_used = settings.eps
                inner = solve(
                    perturb_linear(p, eps_used),
                    replace(settings, allow_perturbation=False),
                )
                notes.append(
                    f"perturbed by {eps_used:g}*sum(x): inner path {inner.path.value}"
                )
                if inner.path != Path.TENTATIVE:
                    chosen = (inner.x, Path.PERTURBED)
            if chosen is None:
                fallback = [(x_tent, Path.TENTATIVE)] + cands
                best = _best(p, fallback, settings.feas_tol)
                chosen = (best[2], best[3] if best[0] <= settings.feas_tol else Path.TENTATIVE)
                if best[3] == Path.TENTATIVE:
                    notes.append("no recovery route succeeded; returning the tentative point")

    x, path = chosen
    x = np.asarray(x, dtype=float)
    residuals, feasible = eval_constraints(p, x, settings.feas_tol)
    viol = max_violation(p, x)
    obj = eval_objective(p, x)
    return SolveReport(
        x=x,
        objective=obj,
        max_violation=viol,
        dual_value=info.dual_value,
        gap=obj - info.dual_value,
        path=path,
        definiteness=rep,
        sdp_status=info.point.status,
        sigma=info.point.sigma,
        feasible=viol <= settings.feas_tol,
        residuals=residuals,
        eps=eps_used,
        notes=tuple(notes),
        trace=info.trace,
    )
