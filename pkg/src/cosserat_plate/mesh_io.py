"""Mesh file formats.

Two text formats are supported:

* Gmsh legacy ASCII 2.2, restricted to 2-node lines (type 1) and 3-node
  triangles (type 2).  The physical tag of a line element becomes the
  boundary segment tag.
* A native format::

      tri-mesh v1
      nodes N
      x y
      ...
      triangles L
      i j k
      ...
      bedges B
      i j tag
      ...
"""

from __future__ import annotations

import os

import numpy as np

from .mesh import MeshError, TriMesh


class MeshParseError(ValueError):
    """Malformed mesh file.  ``line`` is 1-based."""

    def __init__(self, message, line=None, token=None):
        self.line = line
        self.token = token
        where = f"line {line}: " if line is not None else ""
        what = f" (token {token!r})" if token is not None else ""
        super().__init__(f"{where}{message}{what}")


def _text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("ascii")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("ascii") if isinstance(data, bytes) else data
    return str(source)


class _Lines:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, what):
        while self.pos < len(self.lines):
            self.pos += 1
            s = self.lines[self.pos - 1].strip()
            if s:
                return s
        raise MeshParseError(f"unexpected end of file while reading {what}", self.pos)

    @property
    def lineno(self):
        return self.pos


def _int(tok, lines):
    try:
        return int(tok)
    except ValueError:
        raise MeshParseError("expected integer", lines.lineno, tok) from None


def _float(tok, lines):
    try:
        v = float(tok)
    except ValueError:
        raise MeshParseError("expected number", lines.lineno, tok) from None
    if not np.isfinite(v):
        raise MeshParseError("non-finite coordinate", lines.lineno, tok)
    return v


def parse_msh(source) -> TriMesh:
    """Read a Gmsh 2.2 ASCII mesh (text, bytes, or a file object)."""
    lines = _Lines(_text(source))
    version_seen = False
    node_ids = None
    coords = None
    tris, tri_lines = [], []
    edges, tags, edge_lines = [], [], []
    elements_seen = False

    while lines.pos < len(lines.lines):
        try:
            head = lines.next("section header")
        except MeshParseError:
            break
        if not head.startswith("$"):
            raise MeshParseError("expected section header", lines.lineno, head.split()[0])
        name = head[1:]
        if name == "MeshFormat":
            toks = lines.next("$MeshFormat").split()
            if len(toks) != 3:
                raise MeshParseError("expected 'version file-type data-size'", lines.lineno)
            if toks[0] not in ("2.2", "2.2.0") or toks[1] != "0":
                bad = toks[0] if toks[0] not in ("2.2", "2.2.0") else toks[1]
                raise MeshParseError("unsupported mesh format (need ASCII 2.2)", lines.lineno, bad)
            version_seen = True
        elif name == "Nodes":
            if not version_seen:
                raise MeshParseError("$Nodes before $MeshFormat", lines.lineno)
            n = _int(lines.next("node count").split()[0], lines)
            node_ids = np.empty(n, dtype=np.int64)
            coords = np.empty((n, 2))
            for i in range(n):
                toks = lines.next("node").split()
                if len(toks) != 4:
                    raise MeshParseError("node line needs 'id x y z'", lines.lineno,
                                         toks[0] if toks else None)
                node_ids[i] = _int(toks[0], lines)
                coords[i] = (_float(toks[1], lines), _float(toks[2], lines))
                z = _float(toks[3], lines)
                if abs(z) > 1e-12:
                    raise MeshParseError("node has nonzero z coordinate", lines.lineno, toks[3])
        elif name == "Elements":
            if node_ids is None:
                raise MeshParseError("$Elements before $Nodes", lines.lineno)
            elements_seen = True
            n = _int(lines.next("element count").split()[0], lines)
            for _ in range(n):
                toks = lines.next("element").split()
                if len(toks) < 3:
                    raise MeshParseError("truncated element line", lines.lineno)
                etype = _int(toks[1], lines)
                ntags = _int(toks[2], lines)
                if etype not in (1, 2):
                    raise MeshParseError(f"unsupported element type {etype}", lines.lineno, toks[1])
                nn = 2 if etype == 1 else 3
                if ntags < 0 or len(toks) != 3 + ntags + nn:
                    raise MeshParseError(f"element type {etype} expects {ntags} tags and {nn} nodes",
                                         lines.lineno)
                phys = _int(toks[3], lines) if ntags > 0 else 0
                conn = [_int(t, lines) for t in toks[3 + ntags:]]
                if etype == 2:
                    tris.append(conn)
                    tri_lines.append(lines.lineno)
                else:
                    edges.append(conn)
                    tags.append(phys)
                    edge_lines.append(lines.lineno)
        else:
            start = lines.lineno
            end = "$End" + name
            while True:
                try:
                    s = lines.next(end)
                except MeshParseError:
                    raise MeshParseError(f"section ${name} is not closed", start) from None
                if s == end:
                    break
            continue
        closing = lines.next("$End" + name)
        if closing != "$End" + name:
            raise MeshParseError(f"expected $End{name}", lines.lineno, closing.split()[0])

    if not version_seen:
        raise MeshParseError("missing $MeshFormat section", 1)
    if node_ids is None or not elements_seen:
        raise MeshParseError("missing $Nodes or $Elements section", lines.lineno)
    if not tris:
        raise MeshParseError("mesh contains no triangles", lines.lineno)

    index = {int(nid): k for k, nid in enumerate(node_ids)}
    if len(index) != len(node_ids):
        raise MeshParseError("duplicate node id")

    def remap(conn, line):
        try:
            return [index[c] for c in conn]
        except KeyError as err:
            raise MeshParseError("element references unknown node", line, str(err.args[0])) from None

    tri_arr = np.array([remap(c, ln) for c, ln in zip(tris, tri_lines)], dtype=np.int64)
    edge_arr = np.array([remap(c, ln) for c, ln in zip(edges, edge_lines)],
                        dtype=np.int64).reshape(-1, 2)

    p = coords[tri_arr]
    area = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - \
           (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    cw = area < 0
    tri_arr[cw] = tri_arr[cw][:, [0, 2, 1]]
    try:
        return TriMesh(coords, tri_arr, edge_arr, np.array(tags, dtype=np.int64))
    except MeshError as err:
        raise MeshError(f"invalid mesh: {err}") from None


def write_msh(mesh: TriMesh) -> str:
    """Serialise to Gmsh 2.2 ASCII (1-based ids, two tags per element)."""
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$Nodes", str(mesh.n_nodes)]
    out += [f"{i + 1} {x!r} {y!r} 0" for i, (x, y) in enumerate(mesh.nodes.tolist())]
    out += ["$EndNodes", "$Elements", str(len(mesh.boundary_edges) + mesh.n_triangles)]
    k = 1
    for (i, j), tag in zip(mesh.boundary_edges.tolist(), mesh.boundary_tags.tolist()):
        out.append(f"{k} 1 2 {tag} {tag} {i + 1} {j + 1}")
        k += 1
    for i, j, l in mesh.triangles.tolist():
        out.append(f"{k} 2 2 0 1 {i + 1} {j + 1} {l + 1}")
        k += 1
    out.append("$EndElements")
    return "\n".join(out) + "\n"


def write_native(mesh: TriMesh) -> str:
    out = ["tri-mesh v1", f"nodes {mesh.n_nodes}"]
    out += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    out.append(f"triangles {mesh.n_triangles}")
    out += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    out.append(f"bedges {len(mesh.boundary_edges)}")
    out += [f"{i} {j} {t}" for (i, j), t in zip(mesh.boundary_edges.tolist(),
                                                mesh.boundary_tags.tolist())]
    return "\n".join(out) + "\n"


def parse_native(source) -> TriMesh:
    lines = _Lines(_text(source))
    head = lines.next("header")
    if head != "tri-mesh v1":
        raise MeshParseError("expected header 'tri-mesh v1'", lines.lineno, head)

    def block(keyword, width, conv):
        toks = lines.next(keyword).split()
        if len(toks) != 2 or toks[0] != keyword:
            raise MeshParseError(f"expected '{keyword} COUNT'", lines.lineno, toks[0] if toks else None)
        n = _int(toks[1], lines)
        rows = []
        for _ in range(n):
            t = lines.next(keyword).split()
            if len(t) != width:
                raise MeshParseError(f"expected {width} values", lines.lineno)
            rows.append([conv(v, lines) for v in t])
        return rows

    nodes = block("nodes", 2, _float)
    tris = block("triangles", 3, _int)
    bedges = block("bedges", 3, _int)
    be = np.array(bedges, dtype=np.int64).reshape(-1, 3)
    return TriMesh(nodes, tris, be[:, :2], be[:, 2])


def read_mesh(path) -> TriMesh:
    """Read a mesh file, choosing the format by extension (``.msh`` or native)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if os.fspath(path).endswith(".msh"):
        return parse_msh(data)
    return parse_native(data)


def write_mesh(mesh: TriMesh, path) -> None:
    text = write_msh(mesh) if os.fspath(path).endswith(".msh") else write_native(mesh)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def same_mesh(a: TriMesh, b: TriMesh, tol: float = 0.0) -> bool:
    """True if the meshes coincide up to a permutation of node indices.

    Nodes are matched by coordinates; triangles are compared as vertex sets,
    boundary edges as (vertex set, tag).
    """
    if (a.n_nodes, a.n_triangles, len(a.boundary_edges)) != \
            (b.n_nodes, b.n_triangles, len(b.boundary_edges)):
        return False
    oa = np.lexsort(a.nodes.T[::-1])
    ob = np.lexsort(b.nodes.T[::-1])
    if np.max(np.abs(a.nodes[oa] - b.nodes[ob]), initial=0.0) > tol:
        return False
    # map b's node ids onto a's
    perm = np.empty(b.n_nodes, dtype=np.int64)
    perm[ob] = oa
    tb = np.sort(perm[b.triangles], axis=1)
    tb = tb[np.lexsort(tb.T[::-1])]
    ta = np.sort(a.triangles, axis=1)
    ta = ta[np.lexsort(ta.T[::-1])]
    if not np.array_equal(ta, tb):
        return False
    ea = np.column_stack([np.sort(a.boundary_edges, axis=1), a.boundary_tags])
    eb = np.column_stack([np.sort(perm[b.boundary_edges], axis=1), b.boundary_tags])
    ea = ea[np.lexsort(ea.T[::-1])]
    eb = eb[np.lexsort(eb.T[::-1])]
    return bool(np.array_equal(ea, eb))
