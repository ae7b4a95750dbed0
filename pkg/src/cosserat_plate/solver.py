"""Sparse solves of the assembled plate system.

The matrix is nonsymmetric and has no definite sign, so the default path is
a sparse LU factorisation (SuperLU).  A restarted GMRES with an incomplete
LU preconditioner is available for large meshes on a best-effort basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


class SolverError(RuntimeError):
    pass


class SingularSystem(SolverError):
    """The factorisation broke down (e.g. a pure-Neumann block)."""


class NonConvergence(SolverError):
    def __init__(self, message, relative_residual):
        super().__init__(f"{message} (relative residual {relative_residual:.3e})")
        self.relative_residual = relative_residual


@dataclass(frozen=True)
class SolveReport:
    relative_residual: float
    iterations: Optional[int]
    method: str


def relative_residual(K, x, F) -> float:
    nf = np.linalg.norm(F)
    r = np.linalg.norm(K @ x - F)
    return float(r / nf) if nf > 0 else float(r)


class Factorization:
    """Reusable LU factorisation of one system matrix, solving to a residual target."""

    def __init__(self, K, tol: float = DEFAULT_TOL):
        _check_tol(tol)
        self.K = sp.csc_matrix(K)
        self.tol = tol
        if self.K.shape[0] != self.K.shape[1]:
            raise ValueError("system matrix must be square")
        try:
            self.lu = spla.splu(self.K)
        except RuntimeError as err:
            raise SingularSystem(f"sparse LU failed: {err}") from None
        diag_u = self.lu.U.diagonal()
        if not np.all(np.isfinite(diag_u)) or np.min(np.abs(diag_u)) <= 1e-14 * np.max(np.abs(diag_u)):
            raise SingularSystem("matrix is numerically singular (tiny pivot in LU)")

    def solve(self, F):
        F = np.asarray(F, dtype=float)
        if not np.any(F):
            return np.zeros_like(F), SolveReport(0.0, None, "direct")
        x = self.lu.solve(F)
        res = relative_residual(self.K, x, F)
        steps = 0
        while res > self.tol and steps < 3:
            x = x + self.lu.solve(F - self.K @ x)
            res = relative_residual(self.K, x, F)
            steps += 1
        if not np.isfinite(res):
            raise SingularSystem("solution is not finite")
        if res > self.tol:
            raise NonConvergence("direct solve missed the residual target", res)
        return x, SolveReport(res, steps, "direct")


def _check_tol(tol):
    if not 0 < tol <= 1e-2:
        raise ValueError(f"tol must lie in (0, 1e-2], got {tol}")


def solve_linear(K, F, tol: float = DEFAULT_TOL, method: str = "direct"):
    """Solve ``K x = F`` so that ``||K x - F|| <= tol * ||F||``."""
    _check_tol(tol)
    if method == "direct":
        return Factorization(K, tol).solve(F)
    if method == "iterative":
        return _solve_gmres(sp.csc_matrix(K), np.asarray(F, dtype=float), tol)
    raise ValueError(f"unknown solver method {method!r}")


def solve(system, tol: float = DEFAULT_TOL, method: str = "direct"):
    """Solve an assembled ``BlockSystem``; returns ``(x, SolveReport)``."""
    return solve_linear(system.matrix, system.rhs, tol, method)


def _solve_gmres(K, F, tol):
    if not np.any(F):
        return np.zeros_like(F), SolveReport(0.0, 0, "iterative")
    try:
        ilu = spla.spilu(K, drop_tol=1e-5, fill_factor=20)
    except RuntimeError as err:
        raise SingularSystem(f"incomplete LU failed: {err}") from None
    M = spla.LinearOperator(K.shape, ilu.solve)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(K, F, M=M, rtol=tol * 0.5, atol=0.0, restart=200, maxiter=50,
                         callback=cb, callback_type="pr_norm")
    res = relative_residual(K, x, F)
    if not np.isfinite(res):
        raise SingularSystem("GMRES produced a non-finite iterate")
    if res > tol:
        raise NonConvergence(f"GMRES stopped (info={info})", res)
    log.debug("gmres converged in %d iterations, residual %.2e", count[0], res)
    return x, SolveReport(res, count[0], "iterative")
