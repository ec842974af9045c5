"""Canonical dual: G(sigma), F(sigma), the dual function and its SDP form.

For multipliers ``sigma >= 0`` on the uniformized constraints

    G(sigma) = A + sum_k sigma_k B_k
    F(sigma) = a + sum_k sigma_k b_k
    P^d(sigma) = -1/2 F^T G^+ F - sigma^T d - a

and maximizing ``P^d`` over ``{sigma >= 0, G(sigma) psd}`` is the SDP

    min 1/2 t + d^T sigma   s.t.  [[G, F], [F^T, t]] psd,  sigma >= 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .model import QcqpProblem, uniformize

PINV_RCOND = 1e-10
COLSPACE_TOL = 1e-6


@dataclass(frozen=True)
class DualAssembly:
    A: np.ndarray
    avec: np.ndarray
    aconst: float
    Bks: np.ndarray  # (K, n, n)
    bvecs: np.ndarray  # (K, n)
    dvec: np.ndarray  # (K,)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def num_multipliers(self) -> int:
        return self.dvec.shape[0]


class DualStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class DualPoint:
    sigma: np.ndarray
    t: float
    dual_value: float
    status: DualStatus
    # -X[:n, n] / X[n, n] from the conic dual multiplier X of the LMI; solves
    # G(sigma) x = F(sigma) at complementarity
    x_relax: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SdpData:
    """``min c^T y`` s.t. ``M0 + sum_i y_i Ms[i]`` psd and ``y[:num_nonneg] >= 0``.

    Here ``y = (sigma, t)``.
    """

    c: np.ndarray
    M0: np.ndarray
    Ms: np.ndarray  # (num_vars, N, N)
    num_nonneg: int

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def side(self) -> int:
        return self.M0.shape[0]

    @property
    def num_multipliers(self) -> int:
        return self.num_nonneg

    def lmi(self, y) -> np.ndarray:
        return self.M0 + np.tensordot(np.asarray(y, dtype=float), self.Ms, axes=1)

    def objective(self, y) -> float:
        return float(self.c @ np.asarray(y, dtype=float))


def assemble(p: QcqpProblem) -> DualAssembly:
    cons = uniformize(p)
    return DualAssembly(
        A=p.objective.Q,
        avec=p.objective.p,
        aconst=p.objective.r,
        Bks=np.array([g.Q for g in cons]).reshape(len(cons), p.n, p.n),
        bvecs=np.array([g.p for g in cons]).reshape(len(cons), p.n),
        dvec=np.array([g.r for g in cons], dtype=float),
    )


def _check_sigma(asm: DualAssembly, sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float).reshape(-1)
    if sigma.shape[0] != asm.num_multipliers:
        raise ValueError(
            f"sigma has length {sigma.shape[0]}, expected {asm.num_multipliers}"
        )
    return sigma


def eval_G(asm: DualAssembly, sigma) -> np.ndarray:
    sigma = _check_sigma(asm, sigma)
    G = asm.A + np.tensordot(sigma, asm.Bks, axes=1)
    return 0.5 * (G + G.T)


def eval_F(asm: DualAssembly, sigma) -> np.ndarray:
    sigma = _check_sigma(asm, sigma)
    return asm.avec + sigma @ asm.bvecs


def pinv_solve(G: np.ndarray, F: np.ndarray, rcond: float = PINV_RCOND):
    """Minimum-norm solution of ``G x = F`` and its residual norm.

    Singular values below ``rcond * s_max`` are treated as zero.
    """
    U, s, Vt = np.linalg.svd(G)
    # zero matrix: nothing to invert
    keep = s > rcond * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    coef = (U.T @ F)[keep] / s[keep]
    x = Vt[keep].T @ coef
    return x, float(np.linalg.norm(G @ x - F))


def primal_from_dual(asm: DualAssembly, sigma) -> tuple[np.ndarray, float]:
    """``x = G^+(sigma) F(sigma)`` with the residual ``||G x - F||``."""
    return pinv_solve(eval_G(asm, sigma), eval_F(asm, sigma))


def in_column_space(F: np.ndarray, residual: float, tol: float = COLSPACE_TOL) -> bool:
    return residual <= tol * (1.0 + np.linalg.norm(F))


def dual_value(asm: DualAssembly, sigma, psd_tol: float = 1e-9) -> float:
    """``P^d(sigma)``; ``-inf`` outside the effective domain.

    The domain requires G(sigma) psd (up to ``psd_tol`` relative) and F(sigma)
    in the column space of G(sigma).
    """
    sigma = _check_sigma(asm, sigma)
    G = eval_G(asm, sigma)
    F = eval_F(asm, sigma)
    w = np.linalg.eigvalsh(G)
    if w.size and w[0] < -psd_tol * max(1.0, abs(w[-1])):
        return -np.inf
    x, res = pinv_solve(G, F)
    if not in_column_space(F, res):
        return -np.inf
    return float(-0.5 * F @ x - sigma @ asm.dvec - asm.aconst)


def complementary_function(asm: DualAssembly, x, sigma) -> float:
    """``Xi(x, sigma) = 1/2 x^T G x - x^T F - sigma^T d - a``."""
    x = np.asarray(x, dtype=float)
    G = eval_G(asm, sigma)
    F = eval_F(asm, sigma)
    return float(0.5 * x @ G @ x - x @ F - np.asarray(sigma) @ asm.dvec - asm.aconst)


def _block(G: np.ndarray, F: np.ndarray, t: float) -> np.ndarray:
    n = G.shape[0]
    M = np.empty((n + 1, n + 1))
    M[:n, :n] = G
    M[:n, n] = F
    M[n, :n] = F
    M[n, n] = t
    return M


def build_sdp(asm: DualAssembly) -> SdpData:
    K = asm.num_multipliers
    n = asm.n
    Ms = np.zeros((K + 1, n + 1, n + 1))
    for k in range(K):
        Ms[k] = _block(asm.Bks[k], asm.bvecs[k], 0.0)
    Ms[K, n, n] = 1.0
    c = np.append(asm.dvec, 0.5)
    return SdpData(c=c, M0=_block(asm.A, asm.avec, 0.0), Ms=Ms, num_nonneg=K)


def sdp_to_dual_value(asm: DualAssembly, sdp_objective: float) -> float:
    """SDP optimum ``1/2 t + d^T sigma`` mapped back to ``P^d``."""
    return -sdp_objective - asm.aconst


def block_psd(G: np.ndarray, F: np.ndarray, t: float, tol: float = 0.0) -> bool:
    """Eigenvalue verdict on the block ``[[G, F], [F^T, t]]``."""
    return bool(np.linalg.eigvalsh(_block(G, F, t))[0] >= -tol)


def schur_psd(G: np.ndarray, F: np.ndarray, t: float, tol: float = 0.0) -> bool:
    """Scalar verdict ``t >= F^T G^{-1} F`` for positive definite ``G``."""
    L = np.linalg.cholesky(G)
    w = np.linalg.solve(L, F)
    return bool(t - w @ w >= -tol)
