"""Linear algebra backend: Jacobi-preconditioned CG with a dense fallback."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .config import SolverConfig, default_config
from .errors import NotConverged


class SparseSpd:
    """Symmetric positive definite system in CSR storage."""

    def __init__(self, matrix, config: SolverConfig | None = None):
        self.matrix = sp.csr_matrix(matrix)
        self.config = config or default_config()
        self.n = self.matrix.shape[0]

    def solve(self, rhs: np.ndarray, method: str = "auto") -> np.ndarray:
        return solve_spd(self.matrix, rhs, self.config, method=method)


def _cg(A, b, tol, maxiter):
    diag = A.diagonal()
    if np.any(diag <= 0.0):
        raise NotConverged("non-positive diagonal entry: system is not SPD")
    inv_diag = 1.0 / diag
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    p = z
    rz = float(r @ z)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x
    for _ in range(maxiter):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotConverged("non-positive curvature: system is not SPD")
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NotConverged(f"CG did not reach {tol:g} in {maxiter} iterations")


def solve_spd(A, b, config: SolverConfig | None = None, method: str = "auto") -> np.ndarray:
    """Solve an SPD system; dense Cholesky for small n, else Jacobi-CG.

    The residual is re-verified after the solve; failure raises NotConverged.
    """
    config = config or default_config()
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    if method == "direct" or (method == "auto" and n <= config.dense_fallback_n):
        dense = A.toarray()
        if np.any(dense.diagonal() <= 0.0):
            raise NotConverged("non-positive diagonal entry: system is not SPD")
        try:
            cho = sla.cho_factor(dense)
        except sla.LinAlgError as exc:
            raise NotConverged("dense Cholesky failed: system is not SPD") from exc
        x = sla.cho_solve(cho, b)
    else:
        x = _cg(A, b, config.cg_tol, config.cg_max_iter_factor * n)
    bnorm = float(np.linalg.norm(b))
    if bnorm > 0.0:
        resid = float(np.linalg.norm(A @ x - b)) / bnorm
        if resid > 1e-9:
            raise NotConverged(f"post-solve residual {resid:g} exceeds 1e-9")
    return x
