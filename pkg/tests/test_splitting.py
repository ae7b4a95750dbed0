import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cosserat_plate.assembly import BcSpec, dirichlet_dofs
from cosserat_plate.mesh import generate_rectangle
from cosserat_plate.operator import LoadSpec, rhs
from cosserat_plate.quadrature import DEG5_POINTS, DEG5_WEIGHTS, physical_points
from cosserat_plate.assembly import triangle_geometry
from cosserat_plate.splitting import (DegenerateSplit, FieldSolution, SplittingWarning,
                                      WorkDensities, optimal_eta, solve_fixed_eta,
                                      solve_with_splitting, work_density, work_integral)

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.fixture(scope="module")
def clamped_run(request):
    from cosserat_plate.material import MaterialParams, derive_coefficients
    from cosserat_plate.operator import build_operator_table
    m = MaterialParams(2.0, 1.0, 0.5, 0.3, 0.4, 0.2, 0.1)
    table = build_operator_table(derive_coefficients(m))
    mesh = generate_rectangle(2.0, 2.0, 10, 10)
    load = LoadSpec("sinusoidal", 1.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SplittingWarning)
        sol = solve_with_splitting(mesh, table, load, m, BcSpec.clamped())
    return m, table, mesh, load, sol


class TestOptimalEta:
    @settings(max_examples=200, deadline=None)
    @given(finite, finite, finite, finite)
    def test_stationary_point_of_quadratic(self, w00, w01, w10, w11):
        w = WorkDensities(w00, w01, w10, w11)
        scale = max(abs(w00), abs(w01), abs(w10), abs(w11))
        if abs(w.denominator) < 1e-6 * max(scale, 1.0):
            return
        eta = optimal_eta(w)
        # derivative of the quadratic, written out
        deriv = (-2 * (1 - eta) * w00 + (1 - 2 * eta) * (w01 + w10) + 2 * eta * w11)
        assert abs(deriv) <= 1e-13 * max(scale, 1.0) * max(1.0, abs(eta)) * 10

    def test_formula(self):
        w = WorkDensities(1.0, 0.2, 0.3, 2.0)
        assert_allclose(optimal_eta(w), (2 - 0.3 - 0.2) / (2 * (2 + 1 - 0.3 - 0.2)))

    def test_degenerate(self):
        with pytest.raises(DegenerateSplit):
            optimal_eta(WorkDensities(1.0, 0.5, 0.5, 0.0))
        with pytest.raises(DegenerateSplit):
            optimal_eta(WorkDensities(0.0, 0.0, 0.0, 0.0))


class TestTwoSolveAlgorithm:
    def test_affine_in_eta(self, clamped_run):
        m, table, mesh, load, sol = clamped_run
        rep = sol.report
        for eta in (0.0, 0.37, 1.0, sol.eta):
            direct = solve_fixed_eta(mesh, table, load, m, BcSpec.clamped(), eta)
            combo = (1 - eta) * rep.v0 + eta * rep.v1
            diff = np.linalg.norm(direct.values - combo) / np.linalg.norm(direct.values)
            assert diff <= 1e-8

    def test_stationarity(self, clamped_run):
        m, table, mesh, load, sol = clamped_run
        rep = sol.report

        def W(eta):
            v = FieldSolution((1 - eta) * rep.v0 + eta * rep.v1, eta)
            return work_integral(rhs(load, m, eta), v, mesh)

        d = 1e-3
        deriv = (W(sol.eta + d) - W(sol.eta - d)) / (2 * d)
        assert abs(deriv) <= 1e-6 * abs(W(sol.eta))
        assert_allclose(W(sol.eta), rep.densities.quadratic(sol.eta), rtol=1e-10)

    def test_dirichlet_exact(self, clamped_run):
        _, _, mesh, _, sol = clamped_run
        assert not sol.flat()[dirichlet_dofs(mesh, BcSpec.clamped())].any()

    def test_report(self, clamped_run):
        *_, sol = clamped_run
        assert len(sol.report.residuals) == 2
        assert max(sol.report.residuals) <= 1e-10
        assert sol.eta == sol.report.eta0

    def test_field_access(self, clamped_run):
        *_, sol = clamped_run
        assert np.array_equal(sol["W"], sol[2])
        assert sol.values.shape == (9, sol.n_nodes)

    def test_zero_load_falls_back(self, clamped_run):
        m, table, mesh, _, _ = clamped_run
        with pytest.warns(SplittingWarning, match="eta = 1"):
            sol = solve_with_splitting(mesh, table, LoadSpec("uniform", 0.0, 2.0), m,
                                       BcSpec.clamped())
        assert sol.eta == 1.0
        assert not sol.values.any()


class TestWorkDensity:
    def test_linear_load_against_quadrature_oracle(self, material, rng):
        mesh = generate_rectangle(1.0, 1.0, 5, 4)
        load = LoadSpec("custom", 1.0, 1.0, pressure=lambda x: 2 + x[:, 0] - 3 * x[:, 1],
                        gradient=lambda x: np.tile([1.0, -3.0], (len(x), 1)))
        v = FieldSolution(rng.normal(size=(9, mesh.n_nodes)), 0.5)
        verts = mesh.nodes[mesh.triangles]
        area, _ = triangle_geometry(verts)
        x = physical_points(verts, DEG5_POINTS)
        for eta in (0, 1):
            f = rhs(load, material, eta)
            fv = f(x.reshape(-1, 2)).reshape(9, len(area), -1)
            vq = np.einsum("qk,ilk->ilq", DEG5_POINTS, v.values[:, mesh.triangles])
            want = np.einsum("q,l,ilq->", DEG5_WEIGHTS, area, fv * vq)
            assert_allclose(work_density(eta, v, mesh, load, material), want, rtol=1e-12)

    def test_rejects_other_eta(self, material, square8):
        v = FieldSolution(np.zeros((9, square8.n_nodes)))
        with pytest.raises(ValueError):
            work_density(2, v, square8, LoadSpec(), material)


def test_solution_shape_checked():
    with pytest.raises(ValueError):
        FieldSolution(np.zeros((8, 3)))
