"""Analytic scalar fields with exact first and second derivatives.

Fields take points as an (n, 2) array and return values (n,), gradients
(n, 2) and Hessians (n, 2, 2).  They serve as manufactured solutions and as
test fields for the operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: kinematic variables in solution-vector order
FIELD_NAMES = ("Psi1", "Psi2", "W", "Omega3", "Omega1_0", "Omega2_0",
               "W_star", "Omega_hat1", "Omega_hat2")
PSI1, PSI2, W, OMEGA3, OMEGA1_0, OMEGA2_0, W_STAR, OMEGA1_HAT, OMEGA2_HAT = range(9)
N_FIELDS = 9


def _pts(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 2)


@dataclass(frozen=True)
class TrigProduct:
    """``U * s(pi x1 / a) * s(pi x2 / b)`` with ``s`` either sin or cos per axis."""

    amplitude: float
    a: float
    b: float
    cos_x: bool = False
    cos_y: bool = False

    def _parts(self, x):
        x = _pts(x)
        kx, ky = np.pi / self.a, np.pi / self.b
        sx, cx = np.sin(kx * x[:, 0]), np.cos(kx * x[:, 0])
        sy, cy = np.sin(ky * x[:, 1]), np.cos(ky * x[:, 1])
        # (f, f', f'') for each factor
        fx = (cx, -kx * sx, -kx**2 * cx) if self.cos_x else (sx, kx * cx, -kx**2 * sx)
        fy = (cy, -ky * sy, -ky**2 * cy) if self.cos_y else (sy, ky * cy, -ky**2 * sy)
        return fx, fy

    def value(self, x):
        fx, fy = self._parts(x)
        return self.amplitude * fx[0] * fy[0]

    def grad(self, x):
        fx, fy = self._parts(x)
        return self.amplitude * np.column_stack([fx[1] * fy[0], fx[0] * fy[1]])

    def hess(self, x):
        fx, fy = self._parts(x)
        h = np.empty((len(fx[0]), 2, 2))
        h[:, 0, 0] = fx[2] * fy[0]
        h[:, 0, 1] = h[:, 1, 0] = fx[1] * fy[1]
        h[:, 1, 1] = fx[0] * fy[2]
        return self.amplitude * h


@dataclass(frozen=True)
class Quadratic:
    """``c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2``."""

    coeffs: tuple

    def value(self, x):
        x = _pts(x)
        c = self.coeffs
        X, Y = x[:, 0], x[:, 1]
        return c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y + c[5] * Y * Y

    def grad(self, x):
        x = _pts(x)
        c = self.coeffs
        X, Y = x[:, 0], x[:, 1]
        return np.column_stack([c[1] + 2 * c[3] * X + c[4] * Y,
                                c[2] + c[4] * X + 2 * c[5] * Y])

    def hess(self, x):
        n = len(_pts(x))
        c = self.coeffs
        h = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
        return np.broadcast_to(h, (n, 2, 2)).copy()


# sin/cos pattern (cos_x, cos_y) of each variable for the simply supported family
_SIMPLY_SUPPORTED_PATTERN = {
    PSI1: (True, False),
    PSI2: (False, True),
    W: (False, False),
    OMEGA3: (True, True),
    OMEGA1_0: (False, True),
    OMEGA2_0: (True, False),
    W_STAR: (False, False),
    OMEGA1_HAT: (False, True),
    OMEGA2_HAT: (True, False),
}


def manufactured_fields(bc_kind: str, a: float, b: float | None = None,
                        amplitudes=None) -> list[TrigProduct]:
    """Nine trigonometric fields compatible with the given boundary conditions.

    ``clamped`` uses ``U_i sin(pi x1/a) sin(pi x2/b)`` for every variable.
    ``simply_supported`` swaps sines for cosines where a variable carries a
    natural condition, so that homogeneous Dirichlet and Neumann data both
    hold exactly on the rectangle edges.
    """
    b = a if b is None else b
    amps = np.ones(N_FIELDS) if amplitudes is None else np.asarray(amplitudes, dtype=float)
    if amps.shape != (N_FIELDS,):
        raise ValueError("need nine amplitudes")
    if bc_kind == "clamped":
        return [TrigProduct(float(u), a, b) for u in amps]
    if bc_kind == "simply_supported":
        return [TrigProduct(float(amps[i]), a, b, *_SIMPLY_SUPPORTED_PATTERN[i])
                for i in range(N_FIELDS)]
    raise ValueError(f"unknown boundary-condition kind {bc_kind!r}")
