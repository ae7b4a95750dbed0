"""Plot-ready exports: nodal and element CSV tables and legacy VTK."""

from __future__ import annotations

import io

import numpy as np

from .fields import FIELD_NAMES
from .mesh import TriMesh
from .postproc import RESULTANT_NAMES, ResultantField
from .splitting import FieldSolution


def _num(v: float) -> str:
    return repr(float(v))


def fields_csv(sol: FieldSolution, mesh: TriMesh) -> str:
    """One row per node: ``x,y,Psi1,...,Omega_hat2``."""
    out = io.StringIO()
    out.write(",".join(("x", "y") + FIELD_NAMES) + "\n")
    data = np.column_stack([mesh.nodes, sol.values.T])
    for row in data:
        out.write(",".join(_num(v) for v in row) + "\n")
    return out.getvalue()


def resultants_csv(res: ResultantField, mesh: TriMesh) -> str:
    """One row per element: centroid and every resultant."""
    out = io.StringIO()
    out.write(",".join(("element", "xc", "yc") + RESULTANT_NAMES) + "\n")
    cen = mesh.nodes[mesh.triangles].mean(axis=1)
    cols = np.column_stack([res[n] for n in RESULTANT_NAMES])
    for k in range(mesh.n_triangles):
        vals = [_num(cen[k, 0]), _num(cen[k, 1])] + [_num(v) for v in cols[k]]
        out.write(f"{k}," + ",".join(vals) + "\n")
    return out.getvalue()


def vtk_legacy(mesh: TriMesh, sol: FieldSolution | None = None,
               res: ResultantField | None = None, title: str = "cosserat plate") -> str:
    """ASCII legacy VTK unstructured grid with nodal fields and element resultants."""
    out = io.StringIO()
    out.write("# vtk DataFile Version 3.0\n")
    out.write(title.replace("\n", " ")[:255] + "\n")
    out.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
    out.write(f"POINTS {mesh.n_nodes} double\n")
    for x, y in mesh.nodes:
        out.write(f"{_num(x)} {_num(y)} 0.0\n")
    nt = mesh.n_triangles
    out.write(f"CELLS {nt} {4 * nt}\n")
    for a, b, c in mesh.triangles:
        out.write(f"3 {a} {b} {c}\n")
    out.write(f"CELL_TYPES {nt}\n")
    out.write("5\n" * nt)
    if sol is not None:
        out.write(f"POINT_DATA {mesh.n_nodes}\n")
        for i, name in enumerate(FIELD_NAMES):
            out.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            out.write("\n".join(_num(v) for v in sol.values[i]) + "\n")
    if res is not None:
        out.write(f"CELL_DATA {nt}\n")
        for name in RESULTANT_NAMES:
            out.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            out.write("\n".join(_num(v) for v in res[name]) + "\n")
    return out.getvalue()


def parse_vtk_scalars(text: str) -> dict:
    """Read back the POINT_DATA and CELL_DATA scalars of a file written above."""
    lines = text.splitlines()
    out, i = {}, 0
    counts = {"POINT_DATA": None, "CELL_DATA": None}
    section = None
    while i < len(lines):
        tok = lines[i].split()
        if tok and tok[0] in counts:
            section = tok[0]
            counts[section] = int(tok[1])
        elif tok and tok[0] == "SCALARS":
            n = counts[section]
            vals = np.array([float(v) for v in lines[i + 2:i + 2 + n]])
            out[(section, tok[1])] = vals
            i += 2 + n
            continue
        i += 1
    return out
