"""Primal-dual interior-point method for one LMI block plus a nonnegative orthant.

Solves

    min c^T y   s.t.  Z = M0 + sum_i y_i M_i  psd,   z = y[:K] >= 0

together with its conic dual

    max -<M0, X>   s.t.  <M_i, X> + x_i = c_i  (x_i = 0 for i >= K),
                         X psd,  x >= 0.

Search directions use Nesterov-Todd scaling on the matrix block and the usual
``x z`` complementarity on the orthant, with a Mehrotra predictor-corrector.
The dual (y-side) iterate starts strictly feasible and stays feasible; the
X-side is allowed to start infeasible.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .dual import DualPoint, DualStatus, SdpData

log = logging.getLogger(__name__)


class InitialPointError(RuntimeError):
    pass


@dataclass(frozen=True)
class IpmSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    predictor_corrector: bool = True

    def __post_init__(self):
        if not (self.gap_tol > 0 and self.feas_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class IterRecord:
    iteration: int
    gap: float  # complementarity <X, Z> + x^T z
    rel_gap: float
    pinf: float
    dinf: float
    alpha_p: float
    alpha_d: float
    mu: float

    def line(self) -> str:
        return (
            f"iter={self.iteration:3d} gap={self.gap:.3e} relgap={self.rel_gap:.3e} "
            f"pinf={self.pinf:.3e} dinf={self.dinf:.3e} "
            f"ap={self.alpha_p:.3f} ad={self.alpha_d:.3f} mu={self.mu:.3e}"
        )


@dataclass
class IpmTrace:
    records: list[IterRecord] = field(default_factory=list)
    regularizations: int = 0

    def lines(self) -> list[str]:
        return [r.line() for r in self.records]


# -- initial point -------------------------------------------------------------


def _G_part(sdp: SdpData, sigma: np.ndarray) -> np.ndarray:
    n = sdp.side - 1
    K = sdp.num_nonneg
    return sdp.M0[:n, :n] + np.tensordot(sigma, sdp.Ms[:K, :n, :n], axes=1)


def initial_point(
    sdp: SdpData, delta: float = 1e-3, s_max: float = 1e8
) -> tuple[np.ndarray, float]:
    """Strictly feasible ``(sigma0, t0)`` with ``G(sigma0) >= delta I``.

    ``sigma0 = s * w`` where ``w`` is all ones, or (when the summed constraint
    matrices are not positive definite) ones on the box rows and ``1e-3`` on
    the rest.  ``s`` is the smallest value found by bisection.
    """
    K = sdp.num_nonneg
    n = sdp.side - 1

    def lam_min(sigma):
        return np.linalg.eigvalsh(_G_part(sdp, sigma))[0]

    weights = [np.ones(K)]
    if K > n:
        w = np.full(K, 1e-3)
        w[K - n:] = 1.0
        weights.append(w)
    for w in weights:
        if lam_min(s_max * w) < delta:
            continue
        lo, hi = 0.0, s_max
        if lam_min(np.zeros(K)) >= delta:
            hi = delta  # keep sigma strictly positive
        else:
            while hi > 1e-12 and lam_min(hi * 1e-3 * w) >= delta:
                hi *= 1e-3
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if lam_min(mid * w) >= delta:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 1e-12 * hi:
                    break
        sigma0 = hi * w
        G = _G_part(sdp, sigma0)
        F = sdp.M0[:n, n] + sigma0 @ sdp.Ms[:K, :n, n]
        t0 = float(F @ np.linalg.solve(G, F)) + 1.0
        # t enters only through the corner entry; the remaining constant there
        # comes from M0 and the sigma terms
        corner = sdp.M0[n, n] + sigma0 @ sdp.Ms[:K, n, n]
        tcoef = sdp.Ms[K, n, n]
        return sigma0, (t0 - corner) / tcoef
    raise InitialPointError(f"no s <= {s_max:g} makes G(s w) >= {delta:g} I")


# -- linear algebra helpers ----------------------------------------------------


def _sym(M):
    return 0.5 * (M + M.T)


def _sqrtm_psd(M):
    w, Q = np.linalg.eigh(_sym(M))
    w = np.maximum(w, 0.0)
    return (Q * np.sqrt(w)) @ Q.T


def _nt_scaling(X, Z):
    """``W`` with ``W Z W = X`` and its square root ``G`` and inverse."""
    Xh = _sqrtm_psd(X)
    w, Q = np.linalg.eigh(_sym(Xh @ Z @ Xh))
    w = np.maximum(w, 1e-300)
    mid = (Q / np.sqrt(w)) @ Q.T  # (Xh Z Xh)^(-1/2)
    W = _sym(Xh @ mid @ Xh)
    wv, Qw = np.linalg.eigh(W)
    wv = np.maximum(wv, 1e-300)
    G = (Qw * np.sqrt(wv)) @ Qw.T
    Ginv = (Qw / np.sqrt(wv)) @ Qw.T
    return W, G, Ginv


def _lyap(lam, Q, R):
    """Solve ``(V S + S V)/2 = R`` for ``V = Q diag(lam) Q^T``."""
    Rt = Q.T @ R @ Q
    S = Rt * (2.0 / (lam[:, None] + lam[None, :]))
    return _sym(Q @ S @ Q.T)


def _max_step(M, dM):
    """Largest ``a`` (capped at 1e30) such that ``M + a dM`` stays psd."""
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return 0.0
    Li = linalg.solve_triangular(L, np.eye(M.shape[0]), lower=True)
    ev = np.linalg.eigvalsh(_sym(Li @ dM @ Li.T))
    return 1e30 if ev[0] >= 0 else -1.0 / ev[0]


def _max_step_vec(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return 1e30
    return float(np.min(-v[neg] / dv[neg]))


# -- solver --------------------------------------------------------------------


@dataclass
class _State:
    X: np.ndarray
    x: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    z: np.ndarray


def solve_sdp(
    sdp: SdpData,
    settings: Optional[IpmSettings] = None,
    start: Optional[tuple[np.ndarray, float]] = None,
) -> tuple[DualPoint, IpmTrace]:
    """Run the interior-point method; ``dual_value`` in the result is ``c^T y``.

    Callers that want the canonical dual value map it through
    :func:`canonical_qcqp.dual.sdp_to_dual_value`.
    """
    settings = settings or IpmSettings()
    K = sdp.num_nonneg
    N = sdp.side
    nv = sdp.num_vars
    Ms = sdp.Ms
    Mflat = Ms.reshape(nv, -1)
    c = sdp.c

    sigma0, t0 = start if start is not None else initial_point(sdp)
    y = np.append(sigma0, t0)
    Z = _sym(sdp.lmi(y))
    z = y[:K].copy()

    norms = np.linalg.norm(Mflat, axis=1)
    xi = max(10.0, np.sqrt(N), float(np.max((1.0 + np.abs(c)) / (1.0 + norms))))
    state = _State(X=xi * np.eye(N), x=np.full(K, xi), y=y, Z=Z, z=z)
    nu = N + K
    cnorm = 1.0 + np.linalg.norm(c)

    trace = IpmTrace()
    best: Optional[tuple[float, _State]] = None
    status = DualStatus.MAX_ITER
    prev_gap = np.inf

    for it in range(settings.max_iter):
        X, x, y, Z, z = state.X, state.x, state.y, state.Z, state.z
        gap = float(np.vdot(X, Z) + x @ z)
        mu = gap / nu
        rp = c - Mflat @ X.ravel()
        rp[:K] -= x
        pinf = float(np.linalg.norm(rp) / cnorm)
        Rd = _sym(sdp.lmi(y) - Z)
        rz = y[:K] - z
        dinf = float(np.linalg.norm(Rd) + np.linalg.norm(rz))
        pobj = -float(np.vdot(sdp.M0, X))
        dobj = float(c @ y)
        rel_gap = abs(dobj - pobj) / (1.0 + abs(dobj) + abs(pobj))
        score = max(rel_gap, pinf)
        if best is None or score <= best[0]:
            best = (score, _State(X.copy(), x.copy(), y.copy(), Z.copy(), z.copy()))
        if it > 0:
            trace.records[-1].gap = gap
            trace.records[-1].rel_gap = rel_gap
        if rel_gap <= settings.gap_tol and pinf <= settings.feas_tol and \
                mu <= settings.gap_tol * (1.0 + abs(dobj)):
            status = DualStatus.OPTIMAL
            break

        try:
            W, Gs, Ginv = _nt_scaling(X, Z)
        except np.linalg.LinAlgError:
            status = DualStatus.NUMERICAL_FAILURE
            break
        V = _sym(Gs @ Z @ Gs)
        lam, Qv = np.linalg.eigh(V)
        lam = np.maximum(lam, 1e-300)

        WM = np.einsum("ab,ibc,cd->iad", W, Ms, W).reshape(nv, -1)
        H = WM @ Mflat.T
        H = _sym(H)
        H[np.arange(K), np.arange(K)] += x / z
        chol = None
        reg = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H)))))
        for attempt in range(4):
            try:
                chol = linalg.cho_factor(H, check_finite=False)
                break
            except linalg.LinAlgError:
                trace.regularizations += 1
                H[np.diag_indices(nv)] += reg
                reg *= 1e2
        if chol is None:
            status = DualStatus.NUMERICAL_FAILURE
            break

        WRdW = W @ Rd @ W

        def direction(Rc, rc):
            rhs = Mflat @ (Rc - WRdW).ravel() - rp
            rhs[:K] += (rc - x * rz) / z
            dy = linalg.cho_solve(chol, rhs, check_finite=False)
            dZ = _sym(np.tensordot(dy, Ms, axes=1) + Rd)
            dz = dy[:K] + rz
            dX = _sym(Rc - W @ dZ @ W)
            dx = (rc - x * dz) / z
            return dX, dx, dy, dZ, dz

        def steps(dX, dx, dZ, dz):
            ap = min(_max_step(X, dX), _max_step_vec(x, dx))
            ad = min(_max_step(Z, dZ), _max_step_vec(z, dz))
            return ap, ad

        # predictor
        S = -V
        dX, dx, dy, dZ, dz = direction(Gs @ S @ Gs, -x * z)
        if settings.predictor_corrector:
            ap, ad = steps(dX, dx, dZ, dz)
            ap, ad = min(1.0, ap), min(1.0, ad)
            gap_aff = np.vdot(X + ap * dX, Z + ad * dZ) + (x + ap * dx) @ (z + ad * dz)
            sig = min(1.0, max(0.0, gap_aff / gap)) ** 3
            dXs = Ginv @ dX @ Ginv
            dZs = Gs @ dZ @ Gs
            R = sig * mu * np.eye(N) - np.diag(lam**2)
            R = Qv @ R @ Qv.T - _sym(dXs @ dZs)
            S = _lyap(lam, Qv, R)
            rc = sig * mu - x * z - dx * dz
        else:
            sig = 0.1
            S = _lyap(lam, Qv, sig * mu * np.eye(N) - Qv @ np.diag(lam**2) @ Qv.T)
            rc = sig * mu - x * z
        dX, dx, dy, dZ, dz = direction(Gs @ S @ Gs, rc)

        ap, ad = steps(dX, dx, dZ, dz)
        ap = min(1.0, settings.step_fraction * ap)
        ad = min(1.0, settings.step_fraction * ad)

        # safeguard: complementarity may not grow by more than 10%
        for _ in range(30):
            Xn, xn = X + ap * dX, x + ap * dx
            Zn, zn = Z + ad * dZ, z + ad * dz
            new_gap = float(np.vdot(Xn, Zn) + xn @ zn)
            if new_gap <= 1.1 * min(gap, prev_gap) or new_gap <= 1e-300:
                break
            ap *= 0.5
            ad *= 0.5
        prev_gap = min(gap, prev_gap)

        trace.records.append(
            IterRecord(it, gap, rel_gap, pinf, dinf, ap, ad, mu)
        )
        state = _State(_sym(Xn), xn, y + ad * dy, _sym(Zn), zn)
    else:
        it = settings.max_iter

    if trace.records:
        # the last record's gap is refreshed in the loop; make sure it is finite
        trace.records = [r for r in trace.records if np.isfinite(r.gap)]

    final = state if status == DualStatus.OPTIMAL else best[1]
    y = final.y.copy()
    sigma = y[:K]
    sigma[sigma < 0] = 0.0
    n = N - 1
    Xf = final.X
    x_relax = -Xf[:n, n] / Xf[n, n] if Xf[n, n] > 0 else None
    point = DualPoint(
        sigma=sigma, t=float(y[K]), dual_value=float(c @ y), status=status, x_relax=x_relax
    )
    log.debug("sdp solve: status=%s iterations=%d", status.value, len(trace.records))
    return point, trace


def verify_certificate(sdp: SdpData, point: DualPoint, tol: float = 1e-8) -> bool:
    """Fresh eigenvalue check that ``(sigma, t)`` lies in the feasible set."""
    y = np.append(point.sigma, point.t)
    M = _sym(sdp.lmi(y))
    return bool(np.linalg.eigvalsh(M)[0] >= -tol and np.all(point.sigma >= -tol))
