"""P1 Galerkin assembly of the block stiffness matrix and load vector.

The global unknown vector is laid out in blocks, ``x[i * m + n]`` being
variable ``i`` at node ``n``.  For an operator term ``D`` acting from unknown
``j`` into equation ``i`` the block entry is ``K^{ij}_{mn} = int phi_m D phi_n``:

* order 0: ``coefficient * mass``
* order 1: ``coefficient * convection[direction]``
* order 2: ``-coefficient * stiffness(A)`` (integration by parts, boundary
  term dropped, i.e. homogeneous natural conditions)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .fields import (N_FIELDS, OMEGA1_0, OMEGA1_HAT, OMEGA2_0, OMEGA2_HAT, PSI1, PSI2, W,
                     W_STAR)
from .mesh import G1, G2, G3, G4, TriMesh
from .operator import OperatorTable, RhsVector
from .quadrature import MIDEDGE_POINTS, MIDEDGE_WEIGHTS, physical_points


class DegenerateElementError(ValueError):
    pass


def triangle_geometry(vertices):
    """Areas (l,) and constant basis gradients (l, 3, 2) of triangles (l, 3, 2)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[..., 0], v[..., 1]
    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    grads = np.empty(v.shape)
    grads[:, 0, 0] = y[:, 1] - y[:, 2]
    grads[:, 1, 0] = y[:, 2] - y[:, 0]
    grads[:, 2, 0] = y[:, 0] - y[:, 1]
    grads[:, 0, 1] = x[:, 2] - x[:, 1]
    grads[:, 1, 1] = x[:, 0] - x[:, 2]
    grads[:, 2, 1] = x[:, 1] - x[:, 0]
    grads /= det[:, None, None]
    return 0.5 * det, grads


_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True)
class ElementMatrices:
    """Exact P1 integrals on one triangle.

    ``mass[m, n] = int phi_m phi_n``, ``convection_x[m, n] = int phi_m d(phi_n)/dx1``
    and ``stiffness(A)[m, n] = int (A grad phi_n) . grad phi_m``.
    """

    area: float
    grads: np.ndarray
    mass: np.ndarray
    convection_x: np.ndarray
    convection_y: np.ndarray

    def stiffness(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        return self.area * self.grads @ A @ self.grads.T


def element_matrices(tri) -> ElementMatrices:
    tri = np.asarray(tri, dtype=float).reshape(1, 3, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        area, grads = triangle_geometry(tri)
    span = np.ptp(tri[0], axis=0).max()
    if not area[0] > 1e-14 * span**2:
        raise DegenerateElementError(f"degenerate or clockwise triangle (area {area[0]:.3e})")
    a, g = float(area[0]), grads[0]
    conv = (a / 3.0) * np.broadcast_to(g[None, :, :], (3, 3, 2))
    return ElementMatrices(a, g, a * _MASS_REF, conv[:, :, 0], conv[:, :, 1])


# scalar building blocks: mass, convection x1/x2, stiffness parts S_kl
_BASIS = ("M", "C1", "C2", "S11", "S12", "S21", "S22")


def _term_weights(terms) -> np.ndarray:
    w = np.zeros(len(_BASIS))
    for t in terms:
        if t.order == 0:
            w[0] += t.coefficient
        elif t.order == 1:
            w[t.direction] += t.coefficient
        else:
            A = np.asarray(t.A)
            w[3:] -= t.coefficient * A.ravel()
    return w


class _ScalarPattern:
    """The seven scalar P1 matrices sharing one CSR sparsity pattern."""

    def __init__(self, mesh: TriMesh):
        m = mesh.n_nodes
        t = mesh.triangles
        area, grads = triangle_geometry(mesh.nodes[t])
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        local = []
        local.append(area[:, None, None] * _MASS_REF[None])
        for d in range(2):
            local.append((area / 3.0)[:, None, None] * np.broadcast_to(grads[:, None, :, d], (len(t), 3, 3)))
        for k in range(2):
            for l in range(2):
                local.append(area[:, None, None] * grads[:, :, None, k] * grads[:, None, :, l])
        # sort once by (row, col); duplicates are summed segment-wise
        order = np.lexsort((cols, rows))
        r_sorted, c_sorted = rows[order], cols[order]
        key = r_sorted * m + c_sorted
        first = np.concatenate([[True], key[1:] != key[:-1]])
        seg = np.cumsum(first) - 1
        self.indices = c_sorted[first].astype(np.int32 if m < 2**31 else np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(r_sorted[first], minlength=m))])
        self.shape = (m, m)
        self.data = []
        for L in local:
            v = L.reshape(-1)[order]
            self.data.append(np.bincount(seg, weights=v, minlength=int(seg[-1]) + 1))

    def combine(self, w: np.ndarray) -> sp.csr_matrix:
        data = np.zeros_like(self.data[0])
        for k, wk in enumerate(w):
            if wk != 0.0:
                data += wk * self.data[k]
        return sp.csr_matrix((data, self.indices.copy(), self.indptr.copy()), shape=self.shape)

    def matrix(self, name: str) -> sp.csr_matrix:
        w = np.zeros(len(_BASIS))
        w[_BASIS.index(name)] = 1.0
        return self.combine(w)


def scalar_matrices(mesh: TriMesh) -> dict[str, sp.csr_matrix]:
    """Global scalar mass, convection and stiffness-part matrices (diagnostics)."""
    pat = _ScalarPattern(mesh)
    return {name: pat.matrix(name) for name in _BASIS}


def assemble_matrix(mesh: TriMesh, table: OperatorTable) -> sp.csr_matrix:
    """Global 9m x 9m block matrix before boundary conditions."""
    pat = _ScalarPattern(mesh)
    blocks = [[None] * N_FIELDS for _ in range(N_FIELDS)]
    m = mesh.n_nodes
    for i, j, terms in table.nonzero_blocks():
        blocks[i][j] = pat.combine(_term_weights(terms))
    for i in range(N_FIELDS):
        if blocks[i][i] is None:
            blocks[i][i] = sp.csr_matrix((m, m))
    return sp.bmat(blocks, format="csr")


def assemble_load(mesh: TriMesh, f: RhsVector) -> np.ndarray:
    """Load vector ``F^i_m = int phi_m f_i`` using the mid-edge rule."""
    t = mesh.triangles
    verts = mesh.nodes[t]
    area, _ = triangle_geometry(verts)
    x = physical_points(verts, MIDEDGE_POINTS)           # (l, 3, 2)
    vals = np.asarray(f(x.reshape(-1, 2))).reshape(N_FIELDS, len(t), 3)
    # phi_m at quadrature point q equals MIDEDGE_POINTS[q, m]
    local = np.einsum("q,qm,ilq->ilm", MIDEDGE_WEIGHTS, MIDEDGE_POINTS, vals) * area[None, :, None]
    m = mesh.n_nodes
    F = np.zeros((N_FIELDS, m))
    for i in range(N_FIELDS):
        F[i] = np.bincount(t.ravel(), weights=local[i].ravel(), minlength=m)
    return F.ravel()


@dataclass(frozen=True)
class BcSpec:
    """Homogeneous Dirichlet data per variable.

    ``dirichlet[i]`` is either ``None`` (variable ``i`` fixed on the whole
    topological boundary) or a frozenset of segment tags on which it is
    fixed.  Every other boundary piece is natural ("do nothing").
    """

    kind: str
    dirichlet: tuple

    @classmethod
    def clamped(cls, tags=None) -> BcSpec:
        """All nine variables fixed; on every boundary edge unless ``tags`` is given."""
        d = None if tags is None else frozenset(int(t) for t in tags)
        return cls("clamped", (d,) * N_FIELDS)

    @classmethod
    def simply_supported(cls) -> BcSpec:
        """Hard simple support on the rectangle edges G1..G4."""
        sides_12 = frozenset((G1, G2))
        sides_34 = frozenset((G3, G4))
        d = [frozenset()] * N_FIELDS
        for v in (W, W_STAR):
            d[v] = sides_12 | sides_34
        for v in (PSI2, OMEGA1_0, OMEGA1_HAT):
            d[v] = sides_12
        for v in (PSI1, OMEGA2_0, OMEGA2_HAT):
            d[v] = sides_34
        return cls("simply_supported", tuple(d))

    @classmethod
    def custom(cls, mapping) -> BcSpec:
        """``mapping[(variable, tag)]`` is ``"dirichlet0"`` or ``"natural"``."""
        d = [set() for _ in range(N_FIELDS)]
        for (var, tag), kind in mapping.items():
            if kind == "dirichlet0":
                d[var].add(int(tag))
            elif kind != "natural":
                raise ValueError(f"unknown condition {kind!r}")
        return cls("custom", tuple(frozenset(s) for s in d))

    @classmethod
    def from_name(cls, name: str, tags=None) -> BcSpec:
        if name == "clamped":
            return cls.clamped(tags)
        if name == "simply_supported":
            return cls.simply_supported()
        raise ValueError(f"unknown boundary condition {name!r}")

    def dirichlet_nodes(self, mesh: TriMesh) -> tuple:
        out = []
        whole = None
        for d in self.dirichlet:
            if d is None:
                if whole is None:
                    whole = mesh.boundary_nodes()
                out.append(whole)
            else:
                out.append(mesh.nodes_with_tags(d))
        return tuple(out)


def dirichlet_dofs(mesh: TriMesh, bc: BcSpec) -> np.ndarray:
    m = mesh.n_nodes
    nodes = bc.dirichlet_nodes(mesh)
    return np.concatenate([i * m + n for i, n in enumerate(nodes)]).astype(np.int64)


def apply_dirichlet(K: sp.spmatrix, F: np.ndarray, dofs: np.ndarray):
    """Zero constrained rows and columns, unit diagonal, zero right-hand side."""
    n = K.shape[0]
    free = np.ones(n)
    free[dofs] = 0.0
    D = sp.diags(free)
    Kbc = (D @ K @ D + sp.diags(1.0 - free)).tocsr()
    Kbc.sort_indices()
    Fbc = F * free
    return Kbc, Fbc


@dataclass(frozen=True, eq=False)
class BlockSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dirichlet_nodes: tuple
    n_nodes: int

    def block(self, i: int, j: int) -> sp.csr_matrix:
        m = self.n_nodes
        return self.matrix[i * m:(i + 1) * m, j * m:(j + 1) * m]

    def dump_matrix_market(self, path) -> None:
        scipy.io.mmwrite(path, self.matrix, field="real", symmetry="general")


def assemble(mesh: TriMesh, table: OperatorTable, load: RhsVector, bc: BcSpec) -> BlockSystem:
    """Assemble and constrain the full system ``K x = F``."""
    K = assemble_matrix(mesh, table)
    F = assemble_load(mesh, load)
    nodes = bc.dirichlet_nodes(mesh)
    m = mesh.n_nodes
    dofs = np.concatenate([i * m + n for i, n in enumerate(nodes)]).astype(np.int64)
    Kbc, Fbc = apply_dirichlet(K, F, dofs)
    return BlockSystem(Kbc, Fbc, nodes, m)
