"""The 9 x 9 plate field operator, its right-hand side and analytic application.

Unknowns are ordered ``[Psi1, Psi2, W, Omega3, Omega1_0, Omega2_0, W*,
Omega_hat1, Omega_hat2]``.  Each operator entry is a list of scalar terms of
order 0 (multiplication), 1 (one partial derivative) or 2 (``div(A grad)``
with a constant 2 x 2 matrix ``A``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fields import N_FIELDS
from .material import MaterialParams, StiffnessCoefficients


@dataclass(frozen=True)
class ScalarOperatorTerm:
    """``coefficient * D`` where D is 1, d/dx_direction, or div(A grad)."""

    order: int
    coefficient: float
    direction: Optional[int] = None
    A: Optional[tuple] = None

    def __post_init__(self):
        if self.order == 0:
            if self.direction is not None or self.A is not None:
                raise ValueError("order-0 term carries only a coefficient")
        elif self.order == 1:
            if self.direction not in (1, 2) or self.A is not None:
                raise ValueError("order-1 term needs direction 1 or 2")
        elif self.order == 2:
            if self.A is None or self.direction is not None:
                raise ValueError("order-2 term needs a 2x2 matrix A")
            A = tuple(tuple(float(v) for v in row) for row in self.A)
            if len(A) != 2 or any(len(r) != 2 for r in A):
                raise ValueError("A must be 2x2")
            object.__setattr__(self, "A", A)
        else:
            raise ValueError(f"order must be 0, 1 or 2, got {self.order}")
        object.__setattr__(self, "coefficient", float(self.coefficient))

    def scaled(self, s: float) -> ScalarOperatorTerm:
        return ScalarOperatorTerm(self.order, s * self.coefficient, self.direction, self.A)

    def is_zero(self) -> bool:
        if self.coefficient == 0.0:
            return True
        return self.order == 2 and not any(v for row in self.A for v in row)


def _o0(c):
    return ScalarOperatorTerm(0, c)


def _o1(c, d):
    return ScalarOperatorTerm(1, c, direction=d)


def _o2(a11, a22, a12=0.0):
    return ScalarOperatorTerm(2, 1.0, A=((a11, a12 / 2), (a12 / 2, a22)))


def scalar_operators(c: StiffnessCoefficients) -> dict[str, list[ScalarOperatorTerm]]:
    """The named scalar operators ``L11 .. L99`` as term lists."""
    return {
        "L11": [_o2(c[1], c[2]), _o0(-c[3])],
        "L12": [_o2(0.0, 0.0, c[1] - c[2])],
        "L13": [_o1(c[11], 1)],
        "L14": [_o1(c[12], 2)],
        "L16": [_o0(c[13])],
        "L17": [_o1(c.k1 * c[11], 1)],
        "L22": [_o2(c[2], c[1]), _o0(-c[3])],
        "L23": [_o1(c[11], 2)],
        "L24": [_o1(-c[12], 1)],
        "L33": [_o2(c[3], c[3])],
        "L35": [_o1(-c[13], 2)],
        "L36": [_o1(c[13], 1)],
        "L38": [_o1(-c[10], 2)],
        "L39": [_o1(c[10], 1)],
        "L41": [_o1(-c[12], 2)],
        "L42": [_o1(c[12], 1)],
        "L44": [_o2(c[6], c[6]), _o0(-2 * c[12])],
        "L55": [_o2(c[7], c[8]), _o0(-2 * c[13])],
        "L56": [_o2(0.0, 0.0, c[7] - c[8])],
        "L58": [_o0(-c[9])],
        "L66": [_o2(c[8], c[7]), _o0(-2 * c[13])],
        "L73": [_o2(c[5], c[5])],
        "L77": [_o2(c[4], c[4])],
        "L78": [_o1(-c[14], 2)],
        "L79": [_o1(c[14], 1)],
        "L85": [_o2(c[7], c[8]), _o0(-2 * c[13])],
        "L88": [_o2(c[7], c[8]), _o0(-c[15])],
        "L99": [_o2(c[8], c[7]), _o0(-c[15])],
    }


# Block pattern of the field operator, row by row.  Transcribed as printed,
# including the k1 factors and entries such as row 7 / column 2 = -L14.
OPERATOR_PATTERN = (
    ("L11", "L12", "L13", "L14", "0", "L16", "k1 L13", "0", "L16"),
    ("L12", "L22", "L23", "L24", "L16", "0", "k1 L23", "L16", "0"),
    ("-L13", "-L23", "L33", "0", "L35", "L36", "k1 L77", "L38", "L39"),
    ("L41", "L42", "0", "L44", "0", "0", "0", "0", "0"),
    ("0", "-L16", "-L38", "0", "L55", "L56", "-k1 L35", "L58", "0"),
    ("L16", "0", "-L39", "0", "L56", "L66", "-k1 L36", "0", "L58"),
    ("-L13", "-L14", "L73", "0", "L35", "L36", "k1 L77", "L78", "L79"),
    ("0", "-L16", "-L78", "0", "L85", "L56", "-k1 L35", "k1 L88", "k1 L56"),
    ("L16", "0", "-L79", "0", "L56", "L55", "-k1 L36", "k1 L56", "k1 L99"),
)


def _resolve(token: str, ops, k1: float) -> list[ScalarOperatorTerm]:
    if token == "0":
        return []
    sign = 1.0
    if token.startswith("-"):
        sign, token = -1.0, token[1:]
    scale = sign
    parts = token.split()
    if parts[0] == "k1":
        scale *= k1
        parts = parts[1:]
    (name,) = parts
    return [t.scaled(scale) for t in ops[name]]


@dataclass(frozen=True)
class OperatorTable:
    """9 x 9 grid of term lists; ``entries[i][j]`` acts on unknown j in equation i (0-based)."""

    entries: tuple

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def nonzero_blocks(self):
        for i in range(N_FIELDS):
            for j in range(N_FIELDS):
                if self.entries[i][j]:
                    yield i, j, self.entries[i][j]


def build_operator_table(c: StiffnessCoefficients) -> OperatorTable:
    ops = scalar_operators(c)
    rows = []
    for pattern_row in OPERATOR_PATTERN:
        row = []
        for token in pattern_row:
            terms = tuple(t for t in _resolve(token, ops, c.k1) if not t.is_zero())
            row.append(terms)
        rows.append(tuple(row))
    return OperatorTable(tuple(rows))


def single_entry_table(i: int, j: int, terms) -> OperatorTable:
    """Table with one populated entry (0-based indices), for testing and diagnostics."""
    rows = [[() for _ in range(N_FIELDS)] for _ in range(N_FIELDS)]
    rows[i][j] = tuple(terms)
    return OperatorTable(tuple(tuple(r) for r in rows))


def apply_operator_analytic(table: OperatorTable, u) -> Callable[[np.ndarray], np.ndarray]:
    """Pointwise ``L u`` for nine analytic fields (objects with value/grad/hess).

    Returns a function mapping (n, 2) points to a (9, n) array.
    """
    if len(u) != N_FIELDS:
        raise ValueError("need nine fields")

    def evaluate(x):
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        out = np.zeros((N_FIELDS, len(x)))
        cache = {}
        for i, j, terms in table.nonzero_blocks():
            for t in terms:
                key = (j, t.order)
                if key not in cache:
                    f = u[j]
                    cache[key] = (f.value(x), f.grad(x), f.hess(x))[t.order]
                d = cache[key]
                if t.order == 0:
                    out[i] += t.coefficient * d
                elif t.order == 1:
                    out[i] += t.coefficient * d[:, t.direction - 1]
                else:
                    A = np.array(t.A)
                    out[i] += t.coefficient * np.einsum("kl,nkl->n", A, d)
        return out

    return evaluate


@dataclass(frozen=True)
class LoadSpec:
    """Transverse pressure ``p(x1, x2)`` acting on the plate.

    ``sinusoidal``: ``amplitude * sin(pi x1 / a) * sin(pi x2 / b)``.
    ``uniform``: constant ``amplitude``.
    ``custom``: caller-supplied ``pressure(x)`` and ``gradient(x)`` on (n, 2) points.
    """

    kind: str = "sinusoidal"
    amplitude: float = 1.0
    a: float = 1.0
    b: Optional[float] = None
    pressure: Optional[Callable] = field(default=None, compare=False)
    gradient: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("sinusoidal", "uniform", "custom"):
            raise ValueError(f"unknown load kind {self.kind!r}")
        if self.b is None:
            object.__setattr__(self, "b", self.a)
        if self.kind == "custom":
            if self.pressure is None or self.gradient is None:
                raise ValueError("custom load needs pressure and gradient evaluators")
            self._check_gradient()

    def _check_gradient(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0.0, 1.0, size=(10, 2)) * np.array([self.a, self.b])
        g = np.asarray(self.gradient(x), dtype=float).reshape(10, 2)
        step = 1e-5 * max(self.a, self.b)
        fd = np.empty_like(g)
        for d in range(2):
            e = np.zeros(2)
            e[d] = step
            fd[:, d] = (np.asarray(self.pressure(x + e)) - np.asarray(self.pressure(x - e))) / (2 * step)
        scale = np.max(np.abs(g)) + np.max(np.abs(self.pressure(x))) / max(self.a, self.b)
        if not np.allclose(fd, g, rtol=1e-6, atol=1e-6 * scale):
            raise ValueError("custom load gradient is inconsistent with its pressure")

    def p(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        if self.kind == "uniform":
            return np.full(len(x), float(self.amplitude))
        if self.kind == "sinusoidal":
            return self.amplitude * np.sin(np.pi * x[:, 0] / self.a) * np.sin(np.pi * x[:, 1] / self.b)
        return np.asarray(self.pressure(x), dtype=float).reshape(len(x))

    def grad_p(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        if self.kind == "uniform":
            return np.zeros((len(x), 2))
        if self.kind == "sinusoidal":
            kx, ky = np.pi / self.a, np.pi / self.b
            sx, cx = np.sin(kx * x[:, 0]), np.cos(kx * x[:, 0])
            sy, cy = np.sin(ky * x[:, 1]), np.cos(ky * x[:, 1])
            return self.amplitude * np.column_stack([kx * cx * sy, ky * sx * cy])
        return np.asarray(self.gradient(x), dtype=float).reshape(len(x), 2)


def split_pressures(p, eta: float):
    """Pressures carried by the two transverse modes: ``eta p`` and ``2/3 (1 - eta) p``."""
    return eta * p, (2.0 / 3.0) * (1.0 - eta) * p


@dataclass(frozen=True)
class RhsVector:
    """Right-hand side of the field equations as a pointwise evaluator.

    ``components(x)`` returns a (9, n) array.  ``eta`` is the splitting
    parameter that produced it, or None for manufactured right-hand sides.
    """

    components: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    eta: Optional[float] = None

    def __call__(self, x):
        return self.components(x)


def rhs(load: LoadSpec, m: MaterialParams, eta: float) -> RhsVector:
    """Right-hand side ``f(eta)`` of the plate equations for a transverse load."""
    eta = float(eta)
    h, lam, mu = m.thickness, m.lam, m.mu
    kf = -h**2 * lam / (30.0 * (lam + 2.0 * mu))

    def components(x):
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        p = load.p(x)
        g = load.grad_p(x)
        p1, p2 = split_pressures(p, eta)
        g1, g2 = split_pressures(g, eta)
        out = np.zeros((N_FIELDS, len(x)))
        out[0] = kf * (3 * g1[:, 0] + 5 * g2[:, 0])
        out[1] = kf * (3 * g1[:, 1] + 5 * g2[:, 1])
        out[2] = -p1
        out[6] = h**2 * (3 * p1 + 4 * p2) / 24.0
        return out

    return RhsVector(components, eta)


def manufactured_rhs(table: OperatorTable, exact) -> RhsVector:
    """Right-hand side that makes ``exact`` (nine analytic fields) solve ``L u = f``."""
    return RhsVector(apply_operator_analytic(table, exact), None)
