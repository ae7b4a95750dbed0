"""Triangular meshes: construction, validation, uniform refinement and metrics.

Boundary pieces are identified by small integer tags.  For rectangles
``[0, a] x [0, b]`` the tags follow the usual plate-edge naming:

    G1 (x1 = 0), G2 (x1 = a), G3 (x2 = 0), G4 (x2 = b)

and the rim of a circular hole is tagged ``HOLE``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

G1, G2, G3, G4 = 1, 2, 3, 4
HOLE = 5
UNTAGGED = 0


class MeshError(ValueError):
    """Invalid or non-conforming triangulation."""


class GeometryError(ValueError):
    """Geometric input that cannot be meshed."""


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Conforming P1 triangulation.

    Attributes:
        nodes: (m, 2) node coordinates.
        triangles: (l, 3) counterclockwise node indices.
        boundary_edges: (B, 2) node-index pairs of tagged boundary edges.
        boundary_tags: (B,) segment tag of each boundary edge.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray

    def __init__(self, nodes, triangles, boundary_edges=(), boundary_tags=(), validate=True):
        nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "nodes", _readonly(nodes, float))
        object.__setattr__(self, "triangles",
                           _readonly(np.asarray(triangles, dtype=np.int64).reshape(-1, 3), np.int64))
        object.__setattr__(self, "boundary_edges",
                           _readonly(np.asarray(boundary_edges, dtype=np.int64).reshape(-1, 2), np.int64))
        object.__setattr__(self, "boundary_tags",
                           _readonly(np.asarray(boundary_tags, dtype=np.int64).reshape(-1), np.int64))
        if len(self.boundary_tags) != len(self.boundary_edges):
            raise MeshError("boundary_edges and boundary_tags differ in length")
        if validate:
            self.validate()

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def __repr__(self):
        return (f"TriMesh(n_nodes={self.n_nodes}, n_triangles={self.n_triangles}, "
                f"n_boundary_edges={len(self.boundary_edges)})")

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique undirected edges (sorted pairs) and, per triangle, its three edge ids.

        Edge ``k`` of a triangle joins local vertices ``k`` and ``(k + 1) % 3``.
        """
        t = self.triangles
        all_edges = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2)
        all_edges = np.sort(all_edges, axis=1)
        uniq, inverse = np.unique(all_edges, axis=0, return_inverse=True)
        return uniq, inverse.reshape(-1, 3)

    def tags(self) -> set[int]:
        return set(int(t) for t in np.unique(self.boundary_tags))

    def nodes_with_tags(self, tags) -> np.ndarray:
        """Sorted indices of nodes lying on boundary edges carrying any of ``tags``."""
        sel = np.isin(self.boundary_tags, list(tags))
        return np.unique(self.boundary_edges[sel])

    def topological_boundary_edges(self) -> np.ndarray:
        uniq, tri_edges = self.edges()
        counts = np.bincount(tri_edges.ravel(), minlength=len(uniq))
        return uniq[counts == 1]

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.topological_boundary_edges())

    def validate(self) -> None:
        """Check index ranges, orientation, conformity and boundary tagging."""
        m = self.n_nodes
        t = self.triangles
        if not np.all(np.isfinite(self.nodes)):
            raise MeshError("node coordinates must be finite")
        if len(t) == 0:
            raise MeshError("mesh has no triangles")
        if t.min() < 0 or t.max() >= m:
            raise MeshError("triangle references a node index outside 0..m-1")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("triangle with repeated vertex")
        span = np.ptp(self.nodes, axis=0).max()
        areas = self.signed_areas()
        bad = np.flatnonzero(areas <= 1e-14 * span**2)
        if len(bad):
            raise MeshError(f"triangle {bad[0]} is degenerate or clockwise (area {areas[bad[0]]:.3e})")

        directed = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2)
        _, dcount = np.unique(directed, axis=0, return_counts=True)
        if np.any(dcount > 1):
            raise MeshError("overlapping triangles: a directed edge is used twice")
        uniq, tri_edges = self.edges()
        counts = np.bincount(tri_edges.ravel(), minlength=len(uniq))
        if np.any(counts > 2):
            raise MeshError("non-manifold edge shared by more than two triangles")

        bnd = uniq[counts == 1]
        self._check_hanging_nodes(bnd)

        if len(self.boundary_edges):
            be = np.sort(self.boundary_edges, axis=1)
            if be.min() < 0 or be.max() >= m:
                raise MeshError("boundary edge references a node index outside 0..m-1")
            _, bcount = np.unique(be, axis=0, return_counts=True)
            if np.any(bcount > 1):
                raise MeshError("boundary edge listed twice")
            bnd_set = {tuple(e) for e in bnd.tolist()}
            for k, e in enumerate(be.tolist()):
                if tuple(e) not in bnd_set:
                    raise MeshError(f"tagged edge {k} ({e[0]}, {e[1]}) is not a boundary edge")

    def _check_hanging_nodes(self, bnd: np.ndarray) -> None:
        if len(bnd) == 0:
            return
        cand = np.unique(bnd)
        q = self.nodes[cand]
        for start in range(0, len(bnd), 512):
            e = bnd[start:start + 512]
            a = self.nodes[e[:, 0]][:, None, :]
            b = self.nodes[e[:, 1]][:, None, :]
            d = b - a
            L2 = np.sum(d * d, axis=2)
            s = np.sum((q[None] - a) * d, axis=2) / L2
            cross = d[..., 0] * (q[None, :, 1] - a[..., 1]) - d[..., 1] * (q[None, :, 0] - a[..., 0])
            on = (np.abs(cross) <= 1e-10 * L2) & (s > 1e-9) & (s < 1 - 1e-9)
            if np.any(on):
                i, j = np.argwhere(on)[0]
                raise MeshError(
                    f"non-conforming mesh: node {cand[j]} lies on edge "
                    f"({e[i, 0]}, {e[i, 1]}) of another triangle")


@dataclass(frozen=True)
class MeshMetrics:
    h_max: float
    n_nodes: int
    n_triangles: int


def metrics(mesh: TriMesh) -> MeshMetrics:
    """Mesh parameter (longest edge) and entity counts."""
    uniq, _ = mesh.edges()
    d = mesh.nodes[uniq[:, 1]] - mesh.nodes[uniq[:, 0]]
    return MeshMetrics(float(np.sqrt(np.max(np.sum(d * d, axis=1)))),
                       mesh.n_nodes, mesh.n_triangles)


def generate_rectangle(a: float, b: float, nx: int, ny: int) -> TriMesh:
    """Structured mesh of ``[0, a] x [0, b]`` with each cell cut along its rising diagonal."""
    if not (a > 0 and b > 0):
        raise GeometryError("rectangle sides must be positive")
    if nx < 1 or ny < 1:
        raise GeometryError("nx and ny must be at least 1")
    xs = np.linspace(0.0, a, nx + 1)
    ys = np.linspace(0.0, b, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    n00 = idx[:-1, :-1].ravel()
    n10 = idx[:-1, 1:].ravel()
    n01 = idx[1:, :-1].ravel()
    n11 = idx[1:, 1:].ravel()
    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([n00, n10, n11])
    tris[1::2] = np.column_stack([n00, n11, n01])

    left = idx[:, 0]
    right = idx[:, -1]
    bottom = idx[0, :]
    top = idx[-1, :]
    edges, tags = [], []
    for line, tag in ((left, G1), (right, G2), (bottom, G3), (top, G4)):
        edges.append(np.column_stack([line[:-1], line[1:]]))
        tags.append(np.full(len(line) - 1, tag))
    return TriMesh(nodes, tris, np.vstack(edges), np.concatenate(tags))


def generate_plate_with_hole(a: float, b: float, r: float, center=None,
                             density: float = 0.1) -> TriMesh:
    """Rectangle ``[0, a] x [0, b]`` minus a disc, meshed with a graded O-grid.

    Rays run from the hole centre to points on the outer rectangle (corners
    included).  Along each ray the layers are spaced geometrically, so cells
    stay close to square from the rim outwards.  The construction is fully
    deterministic.

    Outer edges carry G1..G4, the rim carries ``HOLE``.  Rim vertices lie
    exactly on the circle; rim chords do not exceed ``density``.
    """
    if center is None:
        center = (0.5 * a, 0.5 * b)
    cx, cy = float(center[0]), float(center[1])
    if not (a > 0 and b > 0):
        raise GeometryError("rectangle sides must be positive")
    if not r > 0:
        raise GeometryError("hole radius must be positive")
    if not density > 0:
        raise GeometryError("density must be positive")
    clearance = min(cx, a - cx, cy, b - cy)
    if r >= clearance:
        raise GeometryError(
            f"hole of radius {r} at ({cx}, {cy}) touches or leaves the rectangle")

    corners = np.array([[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
    side_tags = (G3, G2, G4, G1)
    c = np.array([cx, cy])
    ang = np.arctan2(corners[:, 1] - cy, corners[:, 0] - cx)

    n_theta = max(8, math.ceil(max(2 * math.pi * r, 2 * (a + b)) / density))
    n_theta = 8 * math.ceil(n_theta / 8)

    outer, outer_tags, side_of_ray = [], [], []
    for s in range(4):
        p, q = corners[s], corners[(s + 1) % 4]
        t0 = ang[s]
        sweep = (ang[(s + 1) % 4] - t0) % (2 * math.pi)
        n_s = max(2, math.ceil(n_theta * sweep / (2 * math.pi) - 1e-9))
        for k in range(n_s):
            if k == 0:
                outer.append(p)
            else:
                th = t0 + sweep * k / n_s
                d = np.array([math.cos(th), math.sin(th)])
                # c + s d = p + tau (q - p)
                mat = np.column_stack([d, p - q])
                sol = np.linalg.solve(mat, p - c)
                outer.append(p + sol[1] * (q - p))
            outer_tags.append(side_tags[s])
            side_of_ray.append((s, k, n_s))
    outer = np.array(outer)
    n_rays = len(outer)

    rel = outer - c
    lengths = np.hypot(rel[:, 0], rel[:, 1])
    dirs = rel / lengths[:, None]
    d_theta = 2 * math.pi / n_rays
    n_layers = max(1, math.ceil(math.log(lengths.max() / r) / d_theta))

    k = np.arange(n_layers + 1)[:, None]
    rho = r * (lengths[None, :] / r) ** (k / n_layers)
    pts = c + rho[..., None] * dirs[None, :, :]
    pts[0] = c + r * dirs
    pts[-1] = outer
    nodes = pts.reshape(-1, 2)

    def node(layer, ray):
        return layer * n_rays + ray % n_rays

    tris = []
    for layer in range(n_layers):
        for j in range(n_rays):
            p0, p1 = node(layer, j), node(layer, j + 1)
            p2, p3 = node(layer + 1, j + 1), node(layer + 1, j)
            _, ks, n_s = side_of_ray[j]
            # mirror the split pattern about the middle of each side
            if ks < n_s // 2:
                tris.append((p0, p1, p2))
                tris.append((p0, p2, p3))
            else:
                tris.append((p0, p1, p3))
                tris.append((p1, p2, p3))
    tris = np.array(tris, dtype=np.int64)
    p = nodes[tris]
    area = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - \
           (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    cw = area < 0
    tris[cw] = tris[cw][:, [0, 2, 1]]

    j = np.arange(n_rays)
    rim = np.column_stack([node(0, j), node(0, j + 1)])
    out = np.column_stack([node(n_layers, j), node(n_layers, j + 1)])
    edges = np.vstack([out, rim])
    tags = np.concatenate([np.array(outer_tags), np.full(n_rays, HOLE)])
    return TriMesh(nodes, tris, edges, tags)


def refine_uniform(mesh: TriMesh) -> TriMesh:
    """Red refinement: split every triangle into four through its edge midpoints.

    Midpoint of edge ``e`` becomes node ``m + e`` in the sorted unique edge
    order, so the result is deterministic.  Children inherit boundary tags.
    """
    m = mesh.n_nodes
    uniq, tri_edges = mesh.edges()
    mids = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    nodes = np.vstack([mesh.nodes, mids])

    t = mesh.triangles
    e01, e12, e20 = (m + tri_edges[:, k] for k in range(3))
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    children = np.stack([
        np.column_stack([a, e01, e20]),
        np.column_stack([e01, b, e12]),
        np.column_stack([e20, e12, c]),
        np.column_stack([e01, e12, e20]),
    ], axis=1).reshape(-1, 3)

    if len(mesh.boundary_edges):
        be = mesh.boundary_edges
        key = np.sort(be, axis=1)
        # locate each boundary edge in the sorted unique edge list
        pos = np.searchsorted(uniq[:, 0] * (m + 1) + uniq[:, 1], key[:, 0] * (m + 1) + key[:, 1])
        mid = m + pos
        new_edges = np.stack([np.column_stack([be[:, 0], mid]),
                              np.column_stack([mid, be[:, 1]])], axis=1).reshape(-1, 2)
        new_tags = np.repeat(mesh.boundary_tags, 2)
    else:
        new_edges = np.empty((0, 2), dtype=np.int64)
        new_tags = np.empty(0, dtype=np.int64)
    return TriMesh(nodes, children, new_edges, new_tags, validate=False)


def refined_counts(n_nodes: int, n_edges: int, n_triangles: int) -> tuple[int, int, int]:
    """Node, edge and triangle counts after one red refinement."""
    return n_nodes + n_edges, 2 * n_edges + 3 * n_triangles, 4 * n_triangles


def locate_points(mesh: TriMesh, points) -> tuple[np.ndarray, np.ndarray]:
    """Containing triangle and barycentric coordinates for each point.

    Brute force over all triangles; meant for a handful of probe points.
    Raises ``ValueError`` for points outside the mesh.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    p = mesh.nodes[mesh.triangles]
    x0 = p[:, 0]
    d1 = p[:, 1] - x0
    d2 = p[:, 2] - x0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    elems = np.empty(len(pts), dtype=np.int64)
    bary = np.empty((len(pts), 3))
    for i, x in enumerate(pts):
        r = x - x0
        l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
        l0 = 1 - l1 - l2
        worst = np.minimum(np.minimum(l0, l1), l2)
        k = int(np.argmax(worst))
        if worst[k] < -1e-10:
            raise ValueError(f"point {tuple(x)} lies outside the mesh")
        elems[i] = k
        bary[i] = (l0[k], l1[k], l2[k])
    return elems, bary
