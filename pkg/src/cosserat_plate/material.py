"""Elastic constants of a Cosserat plate and the derived stiffness coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MaterialError(ValueError):
    """Raised when Cosserat constants violate a physical invariant."""


@dataclass(frozen=True)
class MaterialParams:
    """Cosserat constants of the plate material.

    Attributes:
        lam: Lame constant lambda [Pa].
        mu: Lame constant mu [Pa].
        alpha: asymmetric constant alpha [Pa].
        beta: asymmetric constant beta [N].
        gamma: asymmetric constant gamma [N].
        epsilon: asymmetric constant epsilon [N].
        thickness: plate thickness h [m].
    """

    lam: float
    mu: float
    alpha: float
    beta: float
    gamma: float
    epsilon: float
    thickness: float

    def __post_init__(self):
        for name in ("lam", "mu", "alpha", "beta", "gamma", "epsilon", "thickness"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise MaterialError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        self.validate()

    def validate(self) -> None:
        if not self.mu > 0:
            raise MaterialError("mu must be positive")
        if not self.lam + 2 * self.mu > 0:
            raise MaterialError("lambda+2*mu must be positive")
        if not self.thickness > 0:
            raise MaterialError("thickness must be positive")
        if not self.alpha > 0:
            # alpha = 0 leaves the Omega3 equation as a pure Neumann Laplacian
            raise MaterialError("alpha must be positive")
        if not self.gamma + self.epsilon > 0:
            raise MaterialError("gamma+epsilon must be positive")
        if not self.beta + 2 * self.gamma > 0:
            raise MaterialError("beta+2*gamma must be positive")

    def scaled(self, thickness: float) -> MaterialParams:
        return MaterialParams(self.lam, self.mu, self.alpha, self.beta,
                              self.gamma, self.epsilon, thickness)


@dataclass(frozen=True)
class StiffnessCoefficients:
    """The fifteen operator coefficients ``c[0] .. c[14]`` (c1 .. c15) plus ``k1``."""

    c: tuple
    k1: float = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        if len(c) != 15:
            raise ValueError(f"expected 15 coefficients, got {len(c)}")
        if not all(np.isfinite(c)):
            raise ValueError("stiffness coefficients must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "k1", float(self.k1))

    def __getitem__(self, i: int) -> float:
        """One-based access, ``coeffs[3]`` is c3."""
        if not 1 <= i <= 15:
            raise IndexError(f"coefficient index {i} outside 1..15")
        return self.c[i - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.c)


def derive_coefficients(m: MaterialParams, k1: float = 1.0) -> StiffnessCoefficients:
    """Compute c1..c15 of the plate field operator from the material constants."""
    m.validate()
    lam, mu, al = m.lam, m.mu, m.alpha
    be, ga, ep = m.beta, m.gamma, m.epsilon
    h = m.thickness
    c = (
        h**3 * mu * (lam + mu) / (3 * (lam + 2 * mu)),
        h**3 * (al + mu) / 12,
        5 * h * (al + mu) / 6,
        5 * h * (al - mu) ** 2 / (6 * (al + mu)),
        h * (5 * al**2 + 6 * al * mu + 5 * mu**2) / (6 * (al + mu)),
        h**3 * ga * ep / (3 * (ga + ep)),
        10 * h * ga * (be + ga) / (3 * (be + 2 * ga)),
        5 * h * (ga + ep) / 6,
        10 * h * al**2 / (3 * (al + mu)),
        5 * h * al * (al - mu) / (3 * (al + mu)),
        5 * h * (al - mu) / 6,
        h**3 * al / 6,
        5 * h * al / 3,
        h * al * (5 * al + 3 * mu) / (3 * (al + mu)),
        2 * h * al * (5 * al + 4 * mu) / (3 * (al + mu)),
    )
    return StiffnessCoefficients(c, k1)
