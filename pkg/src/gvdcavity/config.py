"""Run configuration: a strict JSON key tree with documented defaults.

Top-level sections and their keys (``*`` = required)::

    cavity:       sqrt_r*, length_mm*, round_trip_time_fs*, k2_fs2_per_mm*,
                  tau_s_fs*, sqrt_t
    profile:      kind, n_gamma0, beta, table
    basis:        n_max, q
    solver:       m_max, tol, order, compare_threshold
    material:     name, a0, a1, c1, a2, valid_range, lambda_um
    input:        modes              (list of [re, im] phase-free mode coefficients)
    roundtrip:    tol, max_iter, phase
    validity_map: x_axis, y_axis, n_d, n, levels
    output:       directory, format

Only ``cavity`` is required. Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cavity import CavityParams, n_gamma
from .errors import ConfigError
from .dispersion import SellmeierFit
from .hg_basis import default_quadrature_size
from .series import DecayProfile
from .validity import Axis, MapSpec


@dataclass(frozen=True)
class CavitySection:
    sqrt_r: float
    length_mm: float
    round_trip_time_fs: float
    k2_fs2_per_mm: float
    tau_s_fs: float
    sqrt_t: Optional[float] = None


@dataclass(frozen=True)
class ProfileSection:
    kind: str = "constant"
    n_gamma0: Optional[float] = None  # None: take N_gamma of the cavity
    beta: float = 0.0
    table: Optional[tuple] = None


@dataclass(frozen=True)
class BasisSection:
    n_max: int = 32
    q: Optional[int] = None  # None: max(64, 2 n_max + 8)


@dataclass(frozen=True)
class SolverSection:
    m_max: int = 64
    tol: float = 1e-12
    order: int = 16
    compare_threshold: float = 1e-6


@dataclass(frozen=True)
class MaterialSection:
    name: Optional[str] = "bibo"
    a0: Optional[float] = None
    a1: Optional[float] = None
    c1: Optional[float] = None
    a2: Optional[float] = None
    valid_range: tuple = (0.45, 2.2)
    lambda_um: float = 0.795


@dataclass(frozen=True)
class InputSection:
    modes: tuple = ((1.0, 0.0),)


@dataclass(frozen=True)
class RoundTripSection:
    tol: float = 1e-8
    max_iter: int = 100_000
    phase: str = "gvd_only"


@dataclass(frozen=True)
class AxisSection:
    name: str
    lo: float
    hi: float
    samples: int = 50


@dataclass(frozen=True)
class MapSection:
    x_axis: AxisSection = AxisSection("n", 0, 40, 41)
    y_axis: AxisSection = AxisSection("N_D", 5.0, 200.0, 80)
    n_d: float = 36.0
    n: int = 0
    levels: tuple = (1.0, 0.5, 0.2, 0.1)


@dataclass(frozen=True)
class OutputSection:
    directory: Optional[str] = None  # None: write to stdout
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    cavity: CavitySection
    profile: ProfileSection = field(default_factory=ProfileSection)
    basis: BasisSection = field(default_factory=BasisSection)
    solver: SolverSection = field(default_factory=SolverSection)
    material: MaterialSection = field(default_factory=MaterialSection)
    input: InputSection = field(default_factory=InputSection)
    roundtrip: RoundTripSection = field(default_factory=RoundTripSection)
    validity_map: MapSection = field(default_factory=MapSection)
    output: OutputSection = field(default_factory=OutputSection)

    # --- derived objects -------------------------------------------------

    def cavity_params(self) -> CavityParams:
        c = self.cavity
        return _wrap("cavity", CavityParams, sqrt_r=c.sqrt_r, length=c.length_mm,
                     round_trip_time=c.round_trip_time_fs, k2=c.k2_fs2_per_mm,
                     tau_s=c.tau_s_fs, sqrt_t=c.sqrt_t)

    @property
    def q(self) -> int:
        return self.basis.q if self.basis.q is not None else default_quadrature_size(self.basis.n_max)

    def decay_profile(self) -> DecayProfile:
        p = self.profile
        n_gamma0 = p.n_gamma0 if p.n_gamma0 is not None else n_gamma(self.cavity.sqrt_r)
        return _wrap("profile", DecayProfile, kind=p.kind, n_gamma0=n_gamma0, beta=p.beta,
                     table=p.table, n_max=self.basis.n_max)

    def sellmeier(self) -> SellmeierFit:
        m = self.material
        coeffs = {k: getattr(m, k) for k in ("a0", "a1", "c1", "a2") if getattr(m, k) is not None}
        return _wrap("material", SellmeierFit, valid_range=tuple(m.valid_range), **coeffs)

    def input_modes(self) -> list:
        return [complex(re, im) for re, im in self.input.modes]

    def map_spec(self) -> MapSpec:
        v = self.validity_map
        axes = [_wrap("validity_map", Axis, **dataclasses.asdict(a)) for a in (v.x_axis, v.y_axis)]
        return _wrap("validity_map", MapSpec, x_axis=axes[0], y_axis=axes[1],
                     profile=self.decay_profile(), n_d=v.n_d, n=v.n, levels=v.levels)

    def to_dict(self) -> dict:
        return _to_plain(dataclasses.asdict(self))


def _wrap(section, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def _to_plain(value):
    if isinstance(value, dict):
        return {k: _to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    return value


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


_NESTED = {
    "cavity": CavitySection,
    "profile": ProfileSection,
    "basis": BasisSection,
    "solver": SolverSection,
    "material": MaterialSection,
    "input": InputSection,
    "roundtrip": RoundTripSection,
    "validity_map": MapSection,
    "output": OutputSection,
    "x_axis": AxisSection,
    "y_axis": AxisSection,
}

_INT_FIELDS = {"n_max", "q", "m_max", "order", "max_iter", "samples", "n"}
_STR_FIELDS = {"kind", "name", "phase", "directory", "format"}


def _coerce(path, key, value):
    if value is None:
        return None
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
        return value
    if key in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"{path}.{key}: expected a string, got {value!r}")
        return value
    if isinstance(value, list):
        return _freeze(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise ConfigError(f"{path}.{name}: missing required field")
            continue
        value = data[name]
        if name in _NESTED:
            kwargs[name] = _build(_NESTED[name], value, f"{path}.{name}")
        else:
            kwargs[name] = _coerce(path, name, value)
    return cls(**kwargs)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    config = _build(RunConfig, data, "config")
    validate(config)
    return config


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def emit_config(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def validate(config: RunConfig):
    """Run every sub-object constructor so invariants are checked at load time."""
    config.cavity_params()
    config.decay_profile()
    config.sellmeier()
    config.map_spec()
    if config.basis.n_max < 1:
        raise ConfigError("basis.n_max must be at least 1")
    if config.q < config.basis.n_max + 4:
        raise ConfigError(f"basis.q={config.q} is too small for n_max={config.basis.n_max}")
    if config.solver.m_max < 1 or config.solver.order < 0:
        raise ConfigError("solver.m_max must be >= 1 and solver.order >= 0")
    if not config.solver.tol > 0 or not config.roundtrip.tol > 0:
        raise ConfigError("tolerances must be positive")
    if config.output.format not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {config.output.format!r}")
    if config.roundtrip.phase not in ("gvd_only", "full_sellmeier"):
        raise ConfigError(f"roundtrip.phase must be gvd_only or full_sellmeier")
    if config.material.name not in (None, "bibo"):
        raise ConfigError(f"material.name: unknown material {config.material.name!r}")
    if not config.input.modes or any(len(m) != 2 for m in config.input.modes):
        raise ConfigError("input.modes must be a nonempty list of [re, im] pairs")
    if len(config.input.modes) > config.basis.n_max - 4 and config.basis.n_max > 4:
        raise ConfigError("input.modes must leave a 4-mode buffer below basis.n_max")


def reference_config() -> RunConfig:
    """The packaged reference configuration (BiBO crystal, 795 nm)."""
    text = (Path(__file__).parent / "data" / "reference.json").read_text()
    return parse_config(text, "reference.json")


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply CLI-style overrides (``None`` values are ignored)."""
    mapping = {
        "n_max": ("basis", "n_max"),
        "m_max": ("solver", "m_max"),
        "tol": ("solver", "tol"),
        "order": ("solver", "order"),
        "sqrt_r": ("cavity", "sqrt_r"),
        "k2": ("cavity", "k2_fs2_per_mm"),
        "tau_s": ("cavity", "tau_s_fs"),
        "length": ("cavity", "length_mm"),
        "directory": ("output", "directory"),
        "format": ("output", "format"),
    }
    for key, value in overrides.items():
        if value is None:
            continue
        section, name = mapping[key]
        updates = {name: value}
        if section == "cavity" and name == "sqrt_r":
            updates["sqrt_t"] = None
        config = dataclasses.replace(
            config, **{section: dataclasses.replace(getattr(config, section), **updates)}
        )
    if "n_max" in overrides and overrides["n_max"] is not None and config.basis.q is not None:
        if config.basis.q < overrides["n_max"] + 4:
            config = dataclasses.replace(config, basis=dataclasses.replace(config.basis, q=None))
    validate(config)
    return config
