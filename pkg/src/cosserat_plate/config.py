"""Flat ``section.key = value`` run configuration.

Lines are ``key = value``; ``#`` starts a comment; blank lines are ignored.
Keys are dotted (``material.mu``).  Lists are comma separated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .material import MaterialError, MaterialParams


class ConfigError(ValueError):
    """Malformed or incomplete configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


def parse_flat(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into an ordered dict of strings."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or any(c.isspace() for c in key):
            raise ConfigError(f"line {n}: bad key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key", key)
        out[key] = value
    return out


def dump_flat(entries: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in entries.items())


MATERIAL_KEYS = ("lambda", "mu", "alpha", "beta", "gamma", "epsilon", "h")
_KNOWN = {f"material.{k}" for k in MATERIAL_KEYS + ("k1",)} | {
    "geometry.kind", "geometry.a", "geometry.b", "geometry.nx", "geometry.ny", "geometry.path",
    "geometry.radius", "geometry.radii", "geometry.density", "geometry.center",
    "bc", "load.kind", "load.amplitude", "eta", "refinements",
    "output.csv", "output.vtk", "output.resultants", "output.report",
    "solver.tol", "solver.method", "mms.amplitudes",
}


@dataclass(frozen=True)
class RunConfig:
    material: MaterialParams
    k1: float = 1.0
    geometry: str = "rectangle"
    a: float = 1.0
    b: Optional[float] = None
    nx: int = 4
    ny: Optional[int] = None
    mesh_path: Optional[str] = None
    radius: Optional[float] = None
    radii: tuple = ()
    density: float = 0.1
    center: Optional[tuple] = None
    bc: str = "clamped"
    load_kind: str = "sinusoidal"
    load_amplitude: float = 1.0
    eta: Optional[float] = None                 # None: optimal splitting
    refinements: int = 0
    csv: Optional[str] = None
    vtk: Optional[str] = None
    resultants_csv: Optional[str] = None
    report: Optional[str] = None
    tol: float = 1e-10
    method: str = "direct"
    mms_amplitudes: tuple = field(default=(1.0,) * 9)

    @property
    def side_b(self) -> float:
        return self.a if self.b is None else self.b

    @property
    def cells_y(self) -> int:
        return self.nx if self.ny is None else self.ny

    def with_overrides(self, **kw) -> RunConfig:
        return replace(self, **kw)

    def to_entries(self) -> dict[str, str]:
        m = self.material
        e = {
            "material.lambda": repr(m.lam), "material.mu": repr(m.mu),
            "material.alpha": repr(m.alpha), "material.beta": repr(m.beta),
            "material.gamma": repr(m.gamma), "material.epsilon": repr(m.epsilon),
            "material.h": repr(m.thickness), "material.k1": repr(self.k1),
            "geometry.kind": self.geometry, "geometry.a": repr(self.a),
            "geometry.b": repr(self.side_b), "geometry.nx": str(self.nx),
            "geometry.ny": str(self.cells_y), "geometry.density": repr(self.density),
        }
        if self.mesh_path is not None:
            e["geometry.path"] = self.mesh_path
        if self.radius is not None:
            e["geometry.radius"] = repr(self.radius)
        if self.radii:
            e["geometry.radii"] = ", ".join(repr(r) for r in self.radii)
        if self.center is not None:
            e["geometry.center"] = ", ".join(repr(c) for c in self.center)
        e["bc"] = self.bc
        e["load.kind"] = self.load_kind
        e["load.amplitude"] = repr(self.load_amplitude)
        e["eta"] = "auto" if self.eta is None else repr(self.eta)
        e["refinements"] = str(self.refinements)
        for key, val in (("output.csv", self.csv), ("output.vtk", self.vtk),
                         ("output.resultants", self.resultants_csv),
                         ("output.report", self.report)):
            if val is not None:
                e[key] = val
        e["solver.tol"] = repr(self.tol)
        e["solver.method"] = self.method
        e["mms.amplitudes"] = ", ".join(repr(float(u)) for u in self.mms_amplitudes)
        return e

    def dumps(self) -> str:
        return dump_flat(self.to_entries())


def _float(d, key, default=None):
    if key not in d:
        if default is None:
            raise ConfigError("missing key", key)
        return default
    try:
        return float(d[key])
    except ValueError:
        raise ConfigError(f"not a number: {d[key]!r}", key) from None


def _int(d, key, default):
    if key not in d:
        return default
    try:
        return int(d[key])
    except ValueError:
        raise ConfigError(f"not an integer: {d[key]!r}", key) from None


def _floats(d, key):
    if key not in d or not d[key]:
        return ()
    try:
        return tuple(float(s) for s in d[key].split(","))
    except ValueError:
        raise ConfigError(f"not a list of numbers: {d[key]!r}", key) from None


def _choice(d, key, options, default):
    v = d.get(key, default)
    if v not in options:
        raise ConfigError(f"expected one of {', '.join(options)}, got {v!r}", key)
    return v


def from_entries(d: dict[str, str]) -> RunConfig:
    unknown = sorted(set(d) - _KNOWN)
    if unknown:
        raise ConfigError("unknown key", unknown[0])
    vals = {k: _float(d, f"material.{k}") for k in MATERIAL_KEYS}
    try:
        mat = MaterialParams(vals["lambda"], vals["mu"], vals["alpha"], vals["beta"],
                             vals["gamma"], vals["epsilon"], vals["h"])
    except MaterialError as err:
        raise ConfigError(str(err), "material") from None

    geometry = _choice(d, "geometry.kind", ("rectangle", "msh", "hole"), "rectangle")
    eta_raw = d.get("eta", "auto")
    if eta_raw == "auto":
        eta = None
    else:
        eta = _float(d, "eta")
    amps = _floats(d, "mms.amplitudes") or (1.0,) * 9
    if len(amps) != 9:
        raise ConfigError("need nine amplitudes", "mms.amplitudes")
    center = _floats(d, "geometry.center") or None
    if center is not None and len(center) != 2:
        raise ConfigError("need two coordinates", "geometry.center")
    cfg = RunConfig(
        material=mat,
        k1=_float(d, "material.k1", 1.0),
        geometry=geometry,
        a=_float(d, "geometry.a", 1.0),
        b=_float(d, "geometry.b", 0.0) or None,
        nx=_int(d, "geometry.nx", 4),
        ny=_int(d, "geometry.ny", 0) or None,
        mesh_path=d.get("geometry.path"),
        radius=_float(d, "geometry.radius", 0.0) or None,
        radii=_floats(d, "geometry.radii"),
        density=_float(d, "geometry.density", 0.1),
        center=center,
        bc=_choice(d, "bc", ("clamped", "simply_supported"), "clamped"),
        load_kind=_choice(d, "load.kind", ("sinusoidal", "uniform"), "sinusoidal"),
        load_amplitude=_float(d, "load.amplitude", 1.0),
        eta=eta,
        refinements=_int(d, "refinements", 0),
        csv=d.get("output.csv"),
        vtk=d.get("output.vtk"),
        resultants_csv=d.get("output.resultants"),
        report=d.get("output.report"),
        tol=_float(d, "solver.tol", 1e-10),
        method=_choice(d, "solver.method", ("direct", "iterative"), "direct"),
        mms_amplitudes=amps,
    )
    _check(cfg)
    return cfg


def _check(cfg: RunConfig) -> None:
    if not (cfg.a > 0 and cfg.side_b > 0):
        raise ConfigError("plate sides must be positive", "geometry.a")
    if cfg.nx < 1 or cfg.cells_y < 1:
        raise ConfigError("need at least one cell per side", "geometry.nx")
    if cfg.refinements < 0:
        raise ConfigError("must be non-negative", "refinements")
    if cfg.geometry == "msh" and not cfg.mesh_path:
        raise ConfigError("msh geometry needs a path", "geometry.path")
    if cfg.geometry == "hole" and cfg.radius is None and not cfg.radii:
        raise ConfigError("hole geometry needs a radius", "geometry.radius")
    if not 0 < cfg.tol <= 1e-2:
        raise ConfigError("must lie in (0, 1e-2]", "solver.tol")
    if not cfg.density > 0:
        raise ConfigError("must be positive", "geometry.density")


def loads(text: str) -> RunConfig:
    return from_entries(parse_flat(text))


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err.strerror}", str(path)) from None
    return loads(text)


def equivalent(a: RunConfig, b: RunConfig) -> bool:
    """Field-wise equality with ``b = None`` and ``b = a`` treated alike."""
    def norm(c):
        return replace(c, b=c.side_b, ny=c.cells_y)
    na, nb = norm(a), norm(b)
    return all(getattr(na, f.name) == getattr(nb, f.name) for f in fields(RunConfig))
