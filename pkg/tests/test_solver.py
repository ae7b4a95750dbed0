import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from cosserat_plate.assembly import BcSpec, assemble
from cosserat_plate.mesh import generate_rectangle
from cosserat_plate.operator import LoadSpec, rhs
from cosserat_plate.solver import (Factorization, NonConvergence, SingularSystem, relative_residual,
                                   solve, solve_linear)


@pytest.fixture
def nonsymmetric(rng):
    n = 200
    A = sp.random(n, n, density=0.03, random_state=7, format="csr")
    return (A + sp.diags(np.full(n, 4.0))).tocsr(), rng.normal(size=n)


class TestDirect:
    def test_residual_target(self, nonsymmetric):
        K, F = nonsymmetric
        x, rep = solve_linear(K, F, tol=1e-12)
        assert rep.relative_residual <= 1e-12
        assert_allclose(relative_residual(K, x, F), rep.relative_residual)
        assert rep.method == "direct"

    def test_reuse_factorization(self, nonsymmetric, rng):
        K, F = nonsymmetric
        fact = Factorization(K)
        x1, _ = fact.solve(F)
        x2, _ = fact.solve(2 * F)
        assert_allclose(x2, 2 * x1, rtol=1e-10)

    def test_zero_rhs(self, nonsymmetric):
        K, F = nonsymmetric
        x, rep = solve_linear(K, 0 * F)
        assert not x.any() and rep.relative_residual == 0.0

    def test_singular(self):
        K = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(SingularSystem):
            solve_linear(K, np.ones(2))

    def test_structurally_singular(self):
        K = sp.csr_matrix((3, 3))
        with pytest.raises(SingularSystem):
            solve_linear(K, np.ones(3))

    @pytest.mark.parametrize("tol", [0.0, -1.0, 0.5])
    def test_bad_tolerance(self, nonsymmetric, tol):
        K, F = nonsymmetric
        with pytest.raises(ValueError):
            solve_linear(K, F, tol=tol)

    def test_unknown_method(self, nonsymmetric):
        with pytest.raises(ValueError):
            solve_linear(*nonsymmetric, method="cholesky")


class TestIterative:
    def test_matches_direct(self, nonsymmetric):
        K, F = nonsymmetric
        xd, _ = solve_linear(K, F, method="direct")
        xi, rep = solve_linear(K, F, tol=1e-10, method="iterative")
        assert rep.relative_residual <= 1e-10
        assert_allclose(xi, xd, rtol=1e-7, atol=1e-9)

    def test_plate_system(self, table, material):
        mesh = generate_rectangle(2.0, 2.0, 6, 6)
        system = assemble(mesh, table, rhs(LoadSpec("sinusoidal", 1.0, 2.0), material, 0.5),
                          BcSpec.clamped())
        xd, _ = solve(system)
        xi, _ = solve(system, tol=1e-10, method="iterative")
        assert_allclose(xi, xd, rtol=1e-6, atol=1e-8 * np.abs(xd).max())


def test_nonconvergence_carries_residual():
    err = NonConvergence("stopped", 3e-4)
    assert err.relative_residual == 3e-4
    assert "3.000e-04" in str(err)
