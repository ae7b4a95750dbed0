from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosserat_plate.mesh import MeshError, generate_rectangle, refine_uniform
from cosserat_plate.mesh_io import (MeshParseError, parse_msh, parse_native, read_mesh, same_mesh,
                                    write_mesh, write_msh, write_native)

FIXTURES = Path(__file__).parent / "fixtures" / "msh"
VALID = sorted(FIXTURES.glob("*.msh"))
MALFORMED = {
    "bad_version.msh": (2, "unsupported mesh format"),
    "binary_flag.msh": (2, "unsupported mesh format"),
    "unsupported_type.msh": (13, "unsupported element type 4"),
    "bad_float.msh": (7, "expected number"),
    "missing_end_nodes.msh": (9, "expected $EndNodes"),
    "unknown_node.msh": (12, "unknown node"),
    "nonzero_z.msh": (7, "nonzero z"),
    "truncated.msh": (12, "unexpected end of file"),
}


def test_fixture_inventory():
    assert len(VALID) == 10
    assert sorted(p.name for p in (FIXTURES / "malformed").glob("*.msh")) == sorted(MALFORMED)


@pytest.mark.parametrize("path", VALID, ids=lambda p: p.stem)
class TestRoundTrip:
    def test_parse_write_parse_identity(self, path):
        mesh = parse_msh(path.read_text())
        again = parse_msh(write_msh(mesh))
        assert same_mesh(mesh, again)
        assert np.array_equal(mesh.nodes, again.nodes)
        assert np.array_equal(mesh.triangles, again.triangles)

    def test_text_is_stable(self, path):
        text = write_msh(parse_msh(path.read_text()))
        assert write_msh(parse_msh(text)) == text

    def test_native_round_trip(self, path):
        mesh = parse_msh(path.read_bytes())
        assert same_mesh(mesh, parse_native(write_native(mesh)))

    def test_oriented_and_valid(self, path):
        mesh = parse_msh(path.read_text())
        assert np.all(mesh.signed_areas() > 0)
        mesh.validate()


@pytest.mark.parametrize("name", sorted(MALFORMED))
def test_malformed_reports_line(name):
    line, fragment = MALFORMED[name]
    with pytest.raises(MeshParseError) as info:
        parse_msh((FIXTURES / "malformed" / name).read_text())
    assert info.value.line == line
    assert f"line {line}:" in str(info.value)
    assert fragment in str(info.value)


class TestSpecialCases:
    def test_noncontiguous_ids(self):
        mesh = parse_msh((FIXTURES / "noncontiguous_ids.msh").read_text())
        assert mesh.n_nodes == 4 and mesh.n_triangles == 2
        assert mesh.tags() == {1, 2}

    def test_physical_tag_is_first_tag(self):
        mesh = parse_msh((FIXTURES / "physical_names.msh").read_text())
        assert mesh.tags() == {2, 3}

    def test_clockwise_input_reoriented(self):
        mesh = parse_msh((FIXTURES / "clockwise_triangles.msh").read_text())
        assert np.all(mesh.signed_areas() > 0)

    def test_overlapping_triangles_rejected(self):
        text = ("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n"
                "$EndNodes\n$Elements\n2\n1 2 2 0 1 1 2 3\n2 2 2 0 1 1 2 3\n$EndElements\n")
        with pytest.raises(MeshError, match="invalid mesh"):
            parse_msh(text)

    def test_no_triangles(self):
        text = ("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0 0\n2 1 0 0\n"
                "$EndNodes\n$Elements\n1\n1 1 2 1 1 1 2\n$EndElements\n")
        with pytest.raises(MeshParseError, match="no triangles"):
            parse_msh(text)

    def test_native_bad_header(self):
        with pytest.raises(MeshParseError, match="line 1"):
            parse_native("tri-mesh v2\n")

    @pytest.mark.parametrize("suffix", [".msh", ".mesh"])
    def test_file_round_trip(self, tmp_path, suffix):
        mesh = refine_uniform(generate_rectangle(1.0, 2.0, 2, 3))
        path = tmp_path / ("m" + suffix)
        write_mesh(mesh, path)
        assert same_mesh(mesh, read_mesh(path))


@settings(max_examples=20, deadline=None)
@given(nx=st.integers(1, 6), ny=st.integers(1, 6), a=st.floats(0.01, 100), b=st.floats(0.01, 100))
def test_generated_meshes_round_trip_exactly(nx, ny, a, b):
    mesh = generate_rectangle(a, b, nx, ny)
    assert same_mesh(mesh, parse_msh(write_msh(mesh)))
    assert same_mesh(mesh, parse_native(write_native(mesh)))
