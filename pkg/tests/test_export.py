import numpy as np
import pytest
from numpy.testing import assert_allclose

from cosserat_plate.export import fields_csv, parse_vtk_scalars, resultants_csv, vtk_legacy
from cosserat_plate.fields import FIELD_NAMES
from cosserat_plate.postproc import RESULTANT_NAMES, resultants
from cosserat_plate.splitting import FieldSolution


@pytest.fixture
def data(square8, material, rng):
    sol = FieldSolution(rng.normal(size=(9, square8.n_nodes)), eta=0.5)
    return square8, sol, resultants(sol, square8, material)


class TestCsv:
    def test_fields(self, data):
        mesh, sol, _ = data
        lines = fields_csv(sol, mesh).splitlines()
        assert lines[0] == "x,y," + ",".join(FIELD_NAMES)
        assert len(lines) == mesh.n_nodes + 1
        table = np.loadtxt(lines[1:], delimiter=",")
        assert_allclose(table[:, :2], mesh.nodes, rtol=0)
        # repr floats survive exactly
        assert np.array_equal(table[:, 2:].T, sol.values)

    def test_resultants(self, data):
        mesh, _, res = data
        lines = resultants_csv(res, mesh).splitlines()
        assert lines[0].split(",")[:3] == ["element", "xc", "yc"]
        assert len(lines) == mesh.n_triangles + 1
        table = np.loadtxt(lines[1:], delimiter=",")
        assert np.array_equal(table[:, 0], np.arange(mesh.n_triangles))
        assert np.array_equal(table[:, 3 + RESULTANT_NAMES.index("Q2")], res["Q2"])

    def test_deterministic(self, data):
        mesh, sol, res = data
        assert fields_csv(sol, mesh) == fields_csv(sol, mesh)
        assert resultants_csv(res, mesh) == resultants_csv(res, mesh)


class TestVtk:
    def test_structure(self, data):
        mesh, sol, res = data
        text = vtk_legacy(mesh, sol, res, title="two\nlines")
        lines = text.splitlines()
        assert lines[0] == "# vtk DataFile Version 3.0"
        assert lines[1] == "two lines"
        assert lines[2:4] == ["ASCII", "DATASET UNSTRUCTURED_GRID"]
        assert f"POINTS {mesh.n_nodes} double" in lines
        assert f"CELLS {mesh.n_triangles} {4 * mesh.n_triangles}" in lines
        i = lines.index(f"CELL_TYPES {mesh.n_triangles}")
        assert set(lines[i + 1:i + 1 + mesh.n_triangles]) == {"5"}

    def test_parse_back(self, data):
        mesh, sol, res = data
        back = parse_vtk_scalars(vtk_legacy(mesh, sol, res))
        assert len(back) == 9 + len(RESULTANT_NAMES)
        for i, name in enumerate(FIELD_NAMES):
            assert np.array_equal(back[("POINT_DATA", name)], sol.values[i])
        for name in RESULTANT_NAMES:
            assert np.array_equal(back[("CELL_DATA", name)], res[name])

    def test_mesh_only(self, square8):
        text = vtk_legacy(square8)
        assert "POINT_DATA" not in text and parse_vtk_scalars(text) == {}
