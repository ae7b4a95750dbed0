import numpy as np
import pytest
from numpy.testing import assert_allclose

from cosserat_plate.fields import N_FIELDS, Quadratic, TrigProduct, manufactured_fields
from cosserat_plate.material import StiffnessCoefficients
from cosserat_plate.operator import (OPERATOR_PATTERN, LoadSpec, ScalarOperatorTerm,
                                     apply_operator_analytic, build_operator_table, rhs,
                                     scalar_operators, single_entry_table, split_pressures)


def fd_apply(term, f, x, step=1e-4):
    """Finite-difference evaluation of one scalar term on one field."""
    if term.order == 0:
        return term.coefficient * f.value(x)
    e = np.eye(2) * step
    if term.order == 1:
        d = term.direction - 1
        return term.coefficient * (f.value(x + e[d]) - f.value(x - e[d])) / (2 * step)
    A = np.array(term.A)
    total = np.zeros(len(x))
    for k in range(2):
        for l in range(2):
            if A[k, l] == 0:
                continue
            if k == l:
                d2 = (f.value(x + e[k]) - 2 * f.value(x) + f.value(x - e[k])) / step**2
            else:
                d2 = (f.value(x + e[k] + e[l]) - f.value(x + e[k] - e[l])
                      - f.value(x - e[k] + e[l]) + f.value(x - e[k] - e[l])) / (4 * step**2)
            total += A[k, l] * d2
    return term.coefficient * total


class TestPattern:
    def test_shape_and_literal_rows(self):
        assert len(OPERATOR_PATTERN) == 9 and all(len(r) == 9 for r in OPERATOR_PATTERN)
        assert OPERATOR_PATTERN[0] == ("L11", "L12", "L13", "L14", "0", "L16", "k1 L13", "0", "L16")
        assert OPERATOR_PATTERN[6] == ("-L13", "-L14", "L73", "0", "L35", "L36", "k1 L77",
                                       "L78", "L79")
        assert OPERATOR_PATTERN[8][5] == "L55"

    def test_zero_entries(self, table):
        assert table[3, 2] == () and table[0, 4] == ()

    def test_k1_scales_marked_entries(self, coeffs):
        t1 = build_operator_table(coeffs)
        t2 = build_operator_table(StiffnessCoefficients(coeffs.c, k1=2.0))
        for i, row in enumerate(OPERATOR_PATTERN):
            for j, token in enumerate(row):
                c1 = [t.coefficient for t in t1[i, j]]
                c2 = [t.coefficient for t in t2[i, j]]
                factor = 2.0 if "k1" in token else 1.0
                assert_allclose(c2, [factor * c for c in c1])

    def test_mixed_derivative_is_symmetric_split(self, coeffs):
        (term,) = scalar_operators(coeffs)["L12"]
        assert_allclose(np.array(term.A), [[0, (coeffs[1] - coeffs[2]) / 2],
                                           [(coeffs[1] - coeffs[2]) / 2, 0]])

    def test_reflection_breaking_entries(self):
        # Under x1 <-> x2 the fields map as polar vector (Psi), scalars (W, W*),
        # pseudo-scalar (Omega3) and axial vectors (Omega0, Omega^).  These
        # entries of the table are not compatible with that symmetry.
        c = StiffnessCoefficients(np.random.default_rng(1).uniform(1, 2, 15), k1=1.3)
        t = build_operator_table(c)
        perm = [1, 0, 2, 3, 5, 4, 6, 8, 7]
        sign = [1, 1, 1, -1, -1, -1, 1, -1, -1]
        xi = np.array([0.37, 1.91])

        def symbol(terms, v):
            out = 0.0
            for term in terms:
                if term.order == 0:
                    out += term.coefficient
                elif term.order == 1:
                    out += term.coefficient * v[term.direction - 1]
                else:
                    out += term.coefficient * v @ np.array(term.A) @ v
            return out

        broken = set()
        for i in range(9):
            for j in range(9):
                a = symbol(t[i, j], xi)
                b = sign[i] * sign[j] * symbol(t[perm[i], perm[j]], xi[::-1])
                if abs(a - b) > 1e-12:
                    broken.add((i + 1, j + 1))
        assert broken == {(1, 6), (1, 9), (2, 5), (2, 8), (7, 1), (7, 2), (8, 5), (9, 6)}


class TestScalarTerm:
    @pytest.mark.parametrize("kwargs", [dict(order=3, coefficient=1.0),
                                        dict(order=1, coefficient=1.0, direction=3),
                                        dict(order=2, coefficient=1.0),
                                        dict(order=0, coefficient=1.0, direction=1)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ScalarOperatorTerm(**kwargs)

    def test_zero_detection(self):
        assert ScalarOperatorTerm(2, 1.0, A=((0, 0), (0, 0))).is_zero()
        assert not ScalarOperatorTerm(1, 0.5, direction=2).is_zero()


class TestAnalyticApplication:
    def test_matches_finite_differences(self, table, rng):
        fields = [TrigProduct(rng.uniform(0.5, 2), 2.0, 1.5, *rng.integers(0, 2, 2).astype(bool))
                  for _ in range(N_FIELDS)]
        x = rng.uniform(0.1, 1.4, size=(12, 2))
        got = apply_operator_analytic(table, fields)(x)
        want = np.zeros_like(got)
        for i, j, terms in table.nonzero_blocks():
            for term in terms:
                want[i] += fd_apply(term, fields[j], x)
        assert_allclose(got, want, rtol=1e-6, atol=1e-6 * np.abs(want).max())

    def test_single_entry_by_hand(self, coeffs, table):
        a, b = 2.0, 1.5
        u = manufactured_fields("clamped", a, b)
        zero = [TrigProduct(0.0, a, b)] * N_FIELDS
        fields = list(zero)
        fields[0] = u[0]
        x = np.array([[0.3, 0.7], [1.1, 0.2]])
        out = apply_operator_analytic(table, fields)(x)
        kx, ky = np.pi / a, np.pi / b
        want = (-coeffs[1] * kx**2 - coeffs[2] * ky**2 - coeffs[3]) * u[0].value(x)
        assert_allclose(out[0], want, rtol=1e-13)
        # -L13 in row 3 acting on Psi1
        assert_allclose(out[2], -coeffs[11] * u[0].grad(x)[:, 0], rtol=1e-13)

    def test_quadratic_fields_exact(self, coeffs):
        term = ScalarOperatorTerm(2, 2.0, A=((1.0, 0.25), (0.25, 3.0)))
        t = single_entry_table(4, 4, [term])
        q = Quadratic((1.0, 2.0, -1.0, 0.5, 1.5, -2.0))
        fields = [Quadratic((0,) * 6)] * N_FIELDS
        fields = fields[:4] + [q] + fields[5:]
        out = apply_operator_analytic(t, fields)(np.array([[0.2, 0.9]]))
        # div(A grad q) with Hessian [[1, 1.5], [1.5, -4]]
        assert_allclose(out[4], [2.0 * (1.0 * 1.0 + 2 * 0.25 * 1.5 + 3.0 * -4.0)])


class TestLoad:
    def test_split_pressures(self):
        p1, p2 = split_pressures(3.0, 0.25)
        assert_allclose([p1, p2], [0.75, 1.5])
        assert_allclose(p1 + 1.5 * p2, 3.0)

    @pytest.mark.parametrize("eta", [0.0, 0.3, 1.0])
    def test_uniform_components(self, material, eta):
        f = rhs(LoadSpec("uniform", 2.0, 2.0), material, eta)
        vals = f(np.array([[0.5, 0.5], [1.0, 1.5]]))
        h = material.thickness
        p1, p2 = eta * 2.0, (2 / 3) * (1 - eta) * 2.0
        assert_allclose(vals[[0, 1, 3, 4, 5, 7, 8]], 0.0)
        assert_allclose(vals[2], -p1)
        assert_allclose(vals[6], h**2 * (3 * p1 + 4 * p2) / 24)

    def test_sinusoidal_gradient_term(self, material):
        load = LoadSpec("sinusoidal", 1.0, 2.0)
        x = np.array([[0.4, 0.9]])
        f = rhs(load, material, 1.0)(x)
        lam, mu, h = material.lam, material.mu, material.thickness
        g = load.grad_p(x)[0]
        assert_allclose(f[:2, 0], -h**2 * lam * 3 * g / (30 * (lam + 2 * mu)), rtol=1e-14)

    def test_custom_load_gradient_checked(self):
        with pytest.raises(ValueError, match="inconsistent"):
            LoadSpec("custom", a=1.0, pressure=lambda x: x[:, 0] ** 2,
                     gradient=lambda x: np.zeros((len(x), 2)))

    def test_custom_load_accepted(self):
        load = LoadSpec("custom", a=1.0, pressure=lambda x: 1 + x[:, 0] - 2 * x[:, 1],
                        gradient=lambda x: np.tile([1.0, -2.0], (len(x), 1)))
        assert_allclose(load.p([[0.5, 0.25]]), [1.0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            LoadSpec("point")
