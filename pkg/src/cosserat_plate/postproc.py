"""Stress resultants, displacement reconstruction, error norms and studies.

Resultants are evaluated per element from the constant P1 gradients;
undifferentiated variables enter through their element mean (the value at
the centroid).  Moments carry units of N·m/m, forces N/m.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .assembly import BcSpec, apply_dirichlet, assemble_load, assemble_matrix, dirichlet_dofs, \
    triangle_geometry
from .fields import N_FIELDS, OMEGA1_0, OMEGA1_HAT, OMEGA2_0, OMEGA2_HAT, OMEGA3, PSI1, PSI2, \
    W, W_STAR
from .material import MaterialParams
from .mesh import HOLE, TriMesh, locate_points, metrics, refine_uniform
from .operator import LoadSpec, OperatorTable, RhsVector, manufactured_rhs, split_pressures
from .quadrature import DEG5_POINTS, DEG5_WEIGHTS, physical_points
from .solver import DEFAULT_TOL, solve_linear
from .splitting import FieldSolution

log = logging.getLogger(__name__)


class MissingHole(ValueError):
    """The mesh carries no hole rim and no reference point was given."""


#: resultant names, units in brackets
RESULTANT_UNITS = {
    "M11": "N m/m", "M22": "N m/m", "M12": "N m/m", "M21": "N m/m",
    "R11": "N m/m", "R22": "N m/m", "R12": "N m/m", "R21": "N m/m",
    "Rs11": "N m/m", "Rs22": "N m/m", "Rs12": "N m/m", "Rs21": "N m/m",
    "Q1": "N/m", "Q2": "N/m", "Qs1": "N/m", "Qs2": "N/m", "Qh1": "N/m", "Qh2": "N/m",
    "Ss1": "N m/m", "Ss2": "N m/m",
}
RESULTANT_NAMES = tuple(RESULTANT_UNITS)


@dataclass(frozen=True, eq=False)
class ResultantField:
    """Piecewise-constant stress resultants, one value per triangle.

    ``R*``, ``Q*``, ``Q^`` and ``S*`` are stored as ``Rs``, ``Qs``, ``Qh``
    and ``Ss``.  ``values[name]`` has shape (n_triangles,).
    """

    values: dict

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __iter__(self):
        return iter(RESULTANT_NAMES)

    @property
    def n_elements(self) -> int:
        return len(self.values["M11"])

    def nodal_average(self, name: str, mesh: TriMesh) -> np.ndarray:
        """Area-weighted nodal average, for plotting only."""
        area, _ = triangle_geometry(mesh.nodes[mesh.triangles])
        t = mesh.triangles.ravel()
        w = np.repeat(area, 3)
        num = np.bincount(t, weights=w * np.repeat(self.values[name], 3), minlength=mesh.n_nodes)
        den = np.bincount(t, weights=w, minlength=mesh.n_nodes)
        return num / np.where(den > 0, den, 1.0)


def element_gradients(values: np.ndarray, mesh: TriMesh):
    """Element means (k, l) and constant gradients (k, l, 2) of nodal fields (k, m)."""
    t = mesh.triangles
    _, grads = triangle_geometry(mesh.nodes[t])
    local = values[:, t]                                   # (k, l, 3)
    return local.mean(axis=2), np.einsum("kla,lad->kld", local, grads)


def resultants(sol: FieldSolution, mesh: TriMesh, m: MaterialParams,
               load: Optional[LoadSpec] = None) -> ResultantField:
    """Moments, shear forces and couple moments on every element.

    The pressure term of the bending moments uses ``sol.eta`` and the load at
    the element centroid; it is omitted when ``load`` or ``sol.eta`` is None.
    """
    lam, mu, al = m.lam, m.mu, m.alpha
    be, ga, ep, h = m.beta, m.gamma, m.epsilon, m.thickness
    mean, g = element_gradients(sol.values, mesh)
    n_el = mesh.n_triangles

    if load is not None and sol.eta is not None:
        centroids = mesh.nodes[mesh.triangles].mean(axis=1)
        p1, p2 = split_pressures(load.p(centroids), sol.eta)
        press = (3 * p1 + 5 * p2) * lam * h**2 / (30 * (lam + 2 * mu))
    else:
        press = np.zeros(n_el)

    out = {}
    psi = (PSI1, PSI2)
    om0 = (OMEGA1_0, OMEGA2_0)
    omh = (OMEGA1_HAT, OMEGA2_HAT)
    c_mm = h**3 * mu * (lam + mu) / (3 * (lam + 2 * mu))
    c_mo = lam * mu * h**3 / (6 * (lam + 2 * mu))
    r_aa = 10 * h * ga * (be + ga) / (3 * (be + 2 * ga))
    r_ab = 5 * h * be * ga / (3 * (be + 2 * ga))
    rs_aa = 8 * ga * (ga + be) * h / (3 * (be + 2 * ga))
    rs_ab = 4 * ga * be * h / (3 * (be + 2 * ga))
    qh = 8 * al * mu * h / (3 * (mu + al))
    for a in range(2):
        b = 1 - a
        A, B = a + 1, b + 1
        sb = (-1) ** B                                     # (-1)^beta
        sa = (-1) ** A                                     # (-1)^alpha
        out[f"M{A}{A}"] = c_mm * g[psi[a], :, a] + c_mo * g[psi[b], :, b] + press
        # M_{beta alpha}
        out[f"M{B}{A}"] = ((mu - al) * h**3 / 12 * g[psi[a], :, b]
                           + h**3 * (al + mu) / 12 * g[psi[b], :, a]
                           + sb * al * h**3 / 6 * mean[OMEGA3])
        out[f"R{B}{A}"] = (5 * (ga - ep) * h / 6 * g[om0[b], :, a]
                           + 5 * h * (ga + ep) / 6 * g[om0[a], :, b])
        out[f"R{A}{A}"] = r_aa * g[om0[a], :, a] + r_ab * g[om0[b], :, b]
        out[f"Rs{B}{A}"] = (2 * (ga - ep) * h / 3 * g[omh[b], :, a]
                            + 2 * (ga + ep) * h / 3 * g[omh[a], :, b])
        out[f"Rs{A}{A}"] = rs_aa * g[omh[a], :, a] + rs_ab * g[omh[b], :, b]
        out[f"Q{A}"] = (5 * h * (al + mu) / 6 * mean[psi[a]]
                        + 5 * (mu - al) * h / 6 * g[W, :, a]
                        + 2 * (mu - al) * h / 3 * g[W_STAR, :, a]
                        + sb * 5 * h * al / 3 * (mean[om0[b]] + mean[omh[b]]))
        out[f"Qs{A}"] = (5 * (mu - al) * h / 6 * mean[psi[a]]
                         + 5 * (mu - al) ** 2 * h / (6 * (mu + al)) * g[W, :, a]
                         + 2 * (mu + al) * h / 3 * g[W_STAR, :, a]
                         + sa * 5 * h * al / 3 * (mean[om0[b]]
                                                  + (mu - al) / (mu + al) * mean[omh[b]]))
        out[f"Qh{A}"] = qh * g[W, :, a] + sa * qh * mean[omh[b]]
        out[f"Ss{A}"] = 5 * ga * ep * h**3 / (3 * (ga + ep)) * g[OMEGA3, :, a]
    return ResultantField({k: np.asarray(out[k], dtype=float) for k in RESULTANT_NAMES})


@dataclass(frozen=True, eq=False)
class Displacements:
    """Displacements and microrotations through the thickness.

    ``zeta = 2 x3 / h`` runs over [-1, 1].  ``u_a = zeta Psi_a``,
    ``u3 = W + (1 - zeta^2) W*``, ``phi_a = (1 - zeta^2) Omega0_a + Omega^_a``
    and ``phi3 = zeta Omega3``.
    """

    sol: FieldSolution
    thickness: float
    mesh: Optional[TriMesh] = None

    def zeta(self, x3):
        return 2.0 * np.asarray(x3, dtype=float) / self.thickness

    @staticmethod
    def _combine(v, zeta):
        if not -1.0 <= zeta <= 1.0:
            raise ValueError("zeta must lie in [-1, 1]")
        s = 1.0 - zeta**2
        return {
            "u1": zeta * v[PSI1],
            "u2": zeta * v[PSI2],
            "u3": v[W] + s * v[W_STAR],
            "phi1": s * v[OMEGA1_0] + v[OMEGA1_HAT],
            "phi2": s * v[OMEGA2_0] + v[OMEGA2_HAT],
            "phi3": zeta * v[OMEGA3],
        }

    def nodal(self, zeta: float) -> dict:
        """All six components at every node for one fibre ``zeta``."""
        return self._combine(self.sol.values, float(zeta))

    def at(self, points, zeta: float) -> dict:
        """Components at arbitrary points of the mesh."""
        if self.mesh is None:
            raise ValueError("point evaluation needs the mesh")
        elems, bary = locate_points(self.mesh, points)
        v = np.einsum("kln,ln->kl", self.sol.values[:, self.mesh.triangles[elems]], bary)
        return self._combine(v, float(zeta))


def reconstruct_displacements(sol: FieldSolution, m: MaterialParams,
                              mesh: Optional[TriMesh] = None) -> Displacements:
    return Displacements(sol, m.thickness, mesh)


def error_norms(sol, exact: Sequence, mesh: TriMesh) -> tuple[float, float]:
    """``(eH1, eL2)`` of a P1 solution against nine analytic fields.

    ``exact[i]`` provides ``value`` and ``grad``; integrals use the
    degree-5 rule on every triangle.
    """
    values = sol.values if isinstance(sol, FieldSolution) else np.asarray(sol).reshape(N_FIELDS, -1)
    t = mesh.triangles
    verts = mesh.nodes[t]
    area, grads = triangle_geometry(verts)
    x = physical_points(verts, DEG5_POINTS).reshape(-1, 2)
    l2 = semi = 0.0
    for i in range(N_FIELDS):
        local = values[i][t]                                       # (l, 3)
        uh = local @ DEG5_POINTS.T                                 # (l, q)
        guh = np.einsum("la,lad->ld", local, grads)                # (l, 2)
        u = exact[i].value(x).reshape(uh.shape)
        gu = exact[i].grad(x).reshape(*uh.shape, 2)
        l2 += float(np.einsum("q,l,lq->", DEG5_WEIGHTS, area, (uh - u) ** 2))
        semi += float(np.einsum("q,l,lq->", DEG5_WEIGHTS, area,
                                ((guh[:, None, :] - gu) ** 2).sum(axis=2)))
    return math.sqrt(l2 + semi), math.sqrt(l2)


def p1_norms(values: np.ndarray, mesh: TriMesh) -> tuple[float, float]:
    """``(H1, L2)`` norms of nodal P1 fields (9, m), computed exactly."""
    values = np.asarray(values, dtype=float).reshape(N_FIELDS, -1)
    t = mesh.triangles
    area, grads = triangle_geometry(mesh.nodes[t])
    local = values[:, t]
    mass = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    l2 = float(np.einsum("l,kla,ab,klb->", area, local, mass, local))
    g = np.einsum("kla,lad->kld", local, grads)
    semi = float(np.einsum("l,kld->", area, g**2))
    return math.sqrt(l2 + semi), math.sqrt(max(l2, 0.0))


def prolongate(values: np.ndarray, coarse: TriMesh) -> np.ndarray:
    """Nodal P1 fields on ``coarse`` expressed on ``refine_uniform(coarse)``."""
    values = np.asarray(values, dtype=float).reshape(N_FIELDS, -1)
    uniq, _ = coarse.edges()
    return np.concatenate([values, 0.5 * (values[:, uniq[:, 0]] + values[:, uniq[:, 1]])], axis=1)


@dataclass(frozen=True)
class ErrorReport:
    """Errors per refinement level and the observed rates between levels."""

    h_max: tuple
    n_nodes: tuple
    eH1: tuple
    eL2: tuple

    def __post_init__(self):
        n = len(self.h_max)
        if not (len(self.n_nodes) == len(self.eH1) == len(self.eL2) == n):
            raise ValueError("inconsistent report lengths")

    @staticmethod
    def _rates(e) -> tuple:
        return tuple(math.log2(e[k] / e[k + 1]) for k in range(len(e) - 1))

    @property
    def rates_h1(self) -> tuple:
        return self._rates(self.eH1)

    @property
    def rates_l2(self) -> tuple:
        return self._rates(self.eL2)

    def table(self, norm: str = "H1") -> str:
        """Plain-text table: Refinements, Number of Nodes, Diameter, Error, Convergence Rate."""
        errs, rates = (self.eH1, self.rates_h1) if norm == "H1" else (self.eL2, self.rates_l2)
        head = f"{'Refinements':>11}  {'Number of Nodes':>15}  {'Diameter':>10}  " \
               f"{'Error in ' + norm + '-norm':>17}  {'Convergence Rate':>16}"
        lines = [head]
        for k in range(len(errs)):
            rate = f"{rates[k - 1]:.2f}" if k > 0 else ""
            lines.append(f"{k:>11d}  {self.n_nodes[k]:>15d}  {self.h_max[k]:>10.6f}  "
                         f"{errs[k]:>17.6f}  {rate:>16}")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class MmsProblem:
    """Manufactured problem: operator, nine exact fields and boundary conditions."""

    table: OperatorTable
    exact: Sequence
    bc: BcSpec
    rhs: Optional[RhsVector] = field(default=None)

    def load(self) -> RhsVector:
        if self.rhs is not None:
            return self.rhs
        return manufactured_rhs(self.table, self.exact)


def convergence_study(mesh: TriMesh, levels: int, problem: MmsProblem,
                      tol: float = DEFAULT_TOL, method: str = "direct",
                      progress: Optional[Callable] = None) -> ErrorReport:
    """Solve on ``mesh`` and ``levels`` successive red refinements; collect errors."""
    if levels < 1:
        raise ValueError("a convergence study needs at least one refinement")
    f = problem.load()
    hs, ns, e1, e0 = [], [], [], []
    for k in range(levels + 1):
        if k:
            mesh = refine_uniform(mesh)
        K = assemble_matrix(mesh, problem.table)
        F = assemble_load(mesh, f)
        Kbc, Fbc = apply_dirichlet(K, F, dirichlet_dofs(mesh, problem.bc))
        x, _ = solve_linear(Kbc, Fbc, tol, method)
        eh1, el2 = error_norms(FieldSolution(x), problem.exact, mesh)
        mt = metrics(mesh)
        hs.append(mt.h_max)
        ns.append(mt.n_nodes)
        e1.append(eh1)
        e0.append(el2)
        log.info("level %d: %d nodes, eH1=%.6e eL2=%.6e", k, mt.n_nodes, eh1, el2)
        if progress is not None:
            progress(k, mt, eh1, el2)
    return ErrorReport(tuple(hs), tuple(ns), tuple(e1), tuple(e0))


def self_convergence_study(mesh: TriMesh, levels: int, table: OperatorTable, f: RhsVector,
                           bc: BcSpec, tol: float = DEFAULT_TOL,
                           method: str = "direct") -> ErrorReport:
    """Rates without an exact solution, from differences of consecutive levels.

    Entry ``k`` holds the norm of ``u_{k+1} - u_k`` on mesh ``k + 1``; for a
    method of order ``r`` this behaves like the error on level ``k`` up to a
    constant factor ``1 - 2^-r``, so the observed rates are unchanged.
    """
    if levels < 2:
        raise ValueError("self-convergence needs at least two refinements")
    prev = None
    hs, ns, e1, e0 = [], [], [], []
    for k in range(levels + 1):
        if k:
            coarse = mesh
            mesh = refine_uniform(mesh)
        K = assemble_matrix(mesh, table)
        F = assemble_load(mesh, f)
        Kbc, Fbc = apply_dirichlet(K, F, dirichlet_dofs(mesh, bc))
        x, _ = solve_linear(Kbc, Fbc, tol, method)
        x = x.reshape(N_FIELDS, -1)
        if prev is not None:
            d1, d0 = p1_norms(x - prolongate(prev, coarse), mesh)
            mt = metrics(coarse)
            hs.append(mt.h_max)
            ns.append(mt.n_nodes)
            e1.append(d1)
            e0.append(d0)
        prev = x
    return ErrorReport(tuple(hs), tuple(ns), tuple(e1), tuple(e0))


def bending_stress(res: ResultantField, m: MaterialParams) -> np.ndarray:
    """Top-fibre bending stress ``6 M11 / h^2`` per element."""
    return 6.0 * res["M11"] / m.thickness**2


def rim_elements(mesh: TriMesh) -> np.ndarray:
    """Triangles touching a node on the hole rim."""
    rim = mesh.nodes_with_tags({HOLE})
    if rim.size == 0:
        raise MissingHole("mesh has no hole rim (tag HOLE)")
    on_rim = np.zeros(mesh.n_nodes, dtype=bool)
    on_rim[rim] = True
    return np.flatnonzero(on_rim[mesh.triangles].any(axis=1))


def nominal_stress(sol: FieldSolution, mesh: TriMesh, m: MaterialParams, load: LoadSpec,
                   point) -> float:
    """``|6 M11 / h^2|`` in the element containing ``point``."""
    elems, _ = locate_points(mesh, np.asarray(point, dtype=float).reshape(1, 2))
    s = bending_stress(resultants(sol, mesh, m, load), m)
    return float(abs(s[elems[0]]))


def stress_concentration(sol_with_hole: FieldSolution, mesh: TriMesh, m: MaterialParams,
                         load: LoadSpec, nominal: float, reference_point=None) -> float:
    """Peak rim bending stress divided by ``nominal``.

    Without a hole rim, ``reference_point`` selects the element whose stress
    is compared; otherwise ``MissingHole`` is raised.
    """
    if not nominal > 0:
        raise ValueError("nominal stress must be positive")
    s = np.abs(bending_stress(resultants(sol_with_hole, mesh, m, load), m))
    if mesh.nodes_with_tags({HOLE}).size:
        return float(s[rim_elements(mesh)].max() / nominal)
    if reference_point is None:
        raise MissingHole("mesh has no hole rim (tag HOLE)")
    elems, _ = locate_points(mesh, np.asarray(reference_point, dtype=float).reshape(1, 2))
    return float(s[elems[0]] / nominal)
