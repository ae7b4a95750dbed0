"""Optimal splitting parameter and the two-solve plate algorithm.

The right-hand side is affine in the splitting parameter eta, so the
solution is too.  Two solves (eta = 0 and eta = 1) give every solution by
linear combination, and four load-solution work integrals

    W_ij = int f(eta=i) . v_j

determine the stationary point of ``W(eta) = int f(eta) . v_eta``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import (BcSpec, apply_dirichlet, assemble_load, assemble_matrix, dirichlet_dofs,
                       triangle_geometry)
from .fields import FIELD_NAMES, N_FIELDS
from .material import MaterialParams
from .mesh import TriMesh
from .operator import LoadSpec, OperatorTable, rhs
from .quadrature import MIDEDGE_POINTS, MIDEDGE_WEIGHTS, physical_points
from .solver import DEFAULT_TOL, Factorization, solve_linear

log = logging.getLogger(__name__)


class DegenerateSplit(ArithmeticError):
    """The work quadratic has no curvature: the load does not depend on eta."""


class SplittingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WorkDensities:
    W00: float
    W01: float
    W10: float
    W11: float

    @property
    def denominator(self) -> float:
        return 2.0 * (self.W11 + self.W00 - self.W10 - self.W01)

    def quadratic(self, eta: float) -> float:
        """``W(eta)`` for the combined solution at ``eta``."""
        return ((1 - eta) ** 2 * self.W00 + eta * (1 - eta) * (self.W01 + self.W10)
                + eta**2 * self.W11)


@dataclass(frozen=True)
class SplitReport:
    densities: WorkDensities
    eta0: float
    residuals: tuple
    warnings: tuple = ()
    v0: Optional[np.ndarray] = field(default=None, repr=False)
    v1: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class FieldSolution:
    """Nodal values of the nine kinematic variables, shape (9, m)."""

    values: np.ndarray
    eta: Optional[float] = None
    report: Optional[SplitReport] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(N_FIELDS, -1)
        if v.shape[0] != N_FIELDS:
            raise ValueError("a solution has nine fields")
        object.__setattr__(self, "values", v)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, name_or_index):
        if isinstance(name_or_index, str):
            return self.values[FIELD_NAMES.index(name_or_index)]
        return self.values[name_or_index]

    def flat(self) -> np.ndarray:
        return self.values.ravel()


def work_integral(f, sol: FieldSolution, mesh: TriMesh) -> float:
    """``int f . v`` with the mid-edge rule; ``f`` maps (n, 2) points to (9, n)."""
    t = mesh.triangles
    verts = mesh.nodes[t]
    area, _ = triangle_geometry(verts)
    x = physical_points(verts, MIDEDGE_POINTS).reshape(-1, 2)
    fv = np.asarray(f(x)).reshape(N_FIELDS, len(t), 3)
    vq = np.einsum("qk,ilk->ilq", MIDEDGE_POINTS, sol.values[:, t])
    return float(np.einsum("q,l,ilq->", MIDEDGE_WEIGHTS, area, fv * vq))


def work_density(load_eta: int, sol: FieldSolution, mesh: TriMesh, load: LoadSpec,
                 m: MaterialParams) -> float:
    """``int f(eta=load_eta) . v`` for a solution ``v``."""
    if load_eta not in (0, 1):
        raise ValueError("load_eta must be 0 or 1")
    return work_integral(rhs(load, m, load_eta), sol, mesh)


def optimal_eta(w: WorkDensities) -> float:
    """Stationary point of the work quadratic."""
    den = w.denominator
    scale = max(abs(w.W00), abs(w.W01), abs(w.W10), abs(w.W11))
    if not abs(den) > 1e-14 * scale:
        raise DegenerateSplit("work densities do not depend on eta "
                              f"(denominator {den:.3e})")
    return (2.0 * w.W00 - w.W10 - w.W01) / den


def solve_fixed_eta(mesh: TriMesh, table: OperatorTable, load: LoadSpec, m: MaterialParams,
                    bc: BcSpec, eta: float, tol: float = DEFAULT_TOL,
                    method: str = "direct") -> FieldSolution:
    K = assemble_matrix(mesh, table)
    F = assemble_load(mesh, rhs(load, m, eta))
    Kbc, Fbc = apply_dirichlet(K, F, dirichlet_dofs(mesh, bc))
    x, _ = solve_linear(Kbc, Fbc, tol, method)
    return FieldSolution(x, eta)


def solve_with_splitting(mesh: TriMesh, table: OperatorTable, load: LoadSpec,
                         m: MaterialParams, bc: BcSpec, tol: float = DEFAULT_TOL,
                         method: str = "direct") -> FieldSolution:
    """Solve at eta = 0 and 1, pick the optimal eta and combine the two solutions."""
    K = assemble_matrix(mesh, table)
    dofs = dirichlet_dofs(mesh, bc)
    F0 = assemble_load(mesh, rhs(load, m, 0.0))
    F1 = assemble_load(mesh, rhs(load, m, 1.0))
    Kbc, F0bc = apply_dirichlet(K, F0, dofs)
    _, F1bc = apply_dirichlet(K, F1, dofs)

    if method == "direct":
        fact = Factorization(Kbc, tol)
        x0, r0 = fact.solve(F0bc)
        x1, r1 = fact.solve(F1bc)
    else:
        x0, r0 = solve_linear(Kbc, F0bc, tol, method)
        x1, r1 = solve_linear(Kbc, F1bc, tol, method)
    v0 = FieldSolution(x0, 0.0)
    v1 = FieldSolution(x1, 1.0)

    w = WorkDensities(
        W00=work_density(0, v0, mesh, load, m),
        W01=work_density(0, v1, mesh, load, m),
        W10=work_density(1, v0, mesh, load, m),
        W11=work_density(1, v1, mesh, load, m),
    )
    notes = []
    try:
        eta0 = optimal_eta(w)
    except DegenerateSplit as err:
        msg = f"{err}; falling back to eta = 1"
        warnings.warn(msg, SplittingWarning, stacklevel=2)
        notes.append(msg)
        eta0 = 1.0
    if not 0.0 <= eta0 <= 1.0:
        msg = f"optimal eta {eta0:.6g} lies outside [0, 1]"
        warnings.warn(msg, SplittingWarning, stacklevel=2)
        notes.append(msg)
    log.info("W00=%.6e W01=%.6e W10=%.6e W11=%.6e eta0=%.6f", w.W00, w.W01, w.W10, w.W11, eta0)

    combined = (1.0 - eta0) * v0.values + eta0 * v1.values
    report = SplitReport(w, eta0, (r0.relative_residual, r1.relative_residual), tuple(notes),
                         v0.values, v1.values)
    return FieldSolution(combined, eta0, report)
