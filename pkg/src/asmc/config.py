"""Run configuration: TOML text with top-level run keys and one table per subcommand.

Example::

    potential = "tilted_quartic"
    eta = 0.05
    delta = 0.05
    c_n = 0.01

    [params]
    tilt = 0.1

    [verify]
    runs = 20

Keys not listed in :data:`RUN_KEYS` or :data:`SECTION_KEYS` are errors.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .potential import POTENTIALS, PotentialError, UnknownPotentialError, make_potential
from .records import config_hash


class ConfigError(ValueError):
    """Invalid configuration text or value."""


SECTION_KEYS = {
    "sample": {"workers"},
    "oracle": {"eps", "n_modes", "fixtures_dir"},
    "verify": {"eps", "runs", "fixtures_dir", "first_seed"},
    "bench": {"etas", "seeds", "baseline", "sweep_alpha", "first_seed"},
    "calibrate": {"runs", "factor", "max_iter", "first_seed"},
}

SECTION_DEFAULTS = {
    "sample": {},
    "oracle": {"n_modes": 6},
    "verify": {"runs": 20, "first_seed": 0},
    "bench": {"etas": [1 / 4, 1 / 8, 1 / 16, 1 / 32], "seeds": 5, "baseline": True, "first_seed": 0},
    "calibrate": {"runs": 20, "factor": 2.0, "max_iter": 12, "first_seed": 0},
}


@dataclass(frozen=True)
class RunConfig:
    potential: str = "quartic"
    params: dict = field(default_factory=dict)
    eta: float = 0.1
    eta1: float = 1.0
    delta: float = 0.1
    theta: float = 0.1
    alpha: float = 1.0
    nu: float = 1.0
    c_n: float = 1.0
    c_t: float = 1.0
    c_tem: float = 1.0
    budget_cap: float | None = 1e10
    dt: float = 1e-2
    integrator: str = "ula"
    guard_radius: float = 1e6
    m: int | None = None
    n: int | None = None
    t: float | None = None
    unsafe: bool = False
    seed: int = 0
    init: str = "uniform"
    c_ini: float | None = None
    resampler: str = "multinomial"
    output_dir: str | None = None
    threads: int = 1
    sections: dict = field(default_factory=dict)

    def section(self, name):
        return {**SECTION_DEFAULTS.get(name, {}), **self.sections.get(name, {})}

    def to_dict(self):
        return asdict(self)

    def result_dict(self):
        """Keys that influence numerical results (no paths or thread counts)."""
        d = self.to_dict()
        for k in ("output_dir", "threads", "sections"):
            d.pop(k)
        return d

    @property
    def hash(self):
        return config_hash(self.result_dict())

    def make_potential(self):
        return make_potential(self.potential, **self.params)


RUN_KEYS = {f.name for f in fields(RunConfig)} - {"sections"}
_ALIASES = {"C_N": "c_n", "C_T": "c_t", "C_tem": "c_tem", "M": "m", "N": "n", "T": "t"}


def _check(cond, msg):
    if not cond:
        raise ConfigError(msg)


def validate(cfg):
    """Raise :class:`ConfigError` for out-of-range values; returns ``cfg``."""
    if cfg.potential not in POTENTIALS:
        raise ConfigError(f"unknown potential {cfg.potential!r}; valid ids: {', '.join(sorted(POTENTIALS))}")
    try:
        cfg.make_potential()
    except UnknownPotentialError as exc:
        raise ConfigError(str(exc)) from None
    except (PotentialError, TypeError) as exc:
        raise ConfigError(f"bad potential parameters: {exc}") from None
    _check(0 < cfg.delta < 1, "delta must lie in (0, 1)")
    _check(0 < cfg.theta < 1, "theta must lie in (0, 1)")
    _check(cfg.eta1 > 0, "eta1 must be positive")
    _check(0 < cfg.eta < cfg.eta1, f"eta must lie in (0, eta1) = (0, {cfg.eta1:g})")
    _check(cfg.alpha > 0 and cfg.nu > 0, "alpha and nu must be positive")
    _check(min(cfg.c_n, cfg.c_t, cfg.c_tem) > 0, "planner constants must be positive")
    _check(cfg.budget_cap is None or cfg.budget_cap > 0, "budget_cap must be positive")
    _check(cfg.dt > 0 and math.isfinite(cfg.dt), "dt must be positive")
    _check(cfg.guard_radius > 0, "guard_radius must be positive")
    _check(cfg.integrator in ("ula", "mala"), "integrator must be 'ula' or 'mala'")
    _check(cfg.init in ("uniform", "origin"), "init must be 'uniform' or 'origin'")
    _check(cfg.resampler in ("multinomial", "systematic"), "resampler must be 'multinomial' or 'systematic'")
    _check(cfg.m is None or cfg.m >= 1, "m must be at least 1")
    _check(cfg.n is None or cfg.n >= 1, "n must be at least 1")
    _check(cfg.t is None or cfg.t >= 0, "t must be non-negative")
    _check(cfg.threads >= 1, "threads must be at least 1")
    _check(0 <= cfg.seed < 2**64, "seed must fit in 64 bits")
    return cfg


_INT_KEYS = {"m", "n", "seed", "threads"}
_FLOAT_KEYS = {
    "eta", "eta1", "delta", "theta", "alpha", "nu", "c_n", "c_t", "c_tem",
    "budget_cap", "dt", "guard_radius", "t", "c_ini",
}


def _coerce(key, value):
    if value is None:
        return None
    if key in _INT_KEYS:
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ConfigError(f"{key} must be an integer")
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be an integer") from None
    if key in _FLOAT_KEYS:
        if isinstance(value, bool):
            raise ConfigError(f"{key} must be a number")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number") from None
    if key == "unsafe" and not isinstance(value, bool):
        raise ConfigError("unsafe must be true or false")
    return value


def from_mapping(data):
    """Build a validated config from a parsed mapping."""
    data = dict(data)
    kwargs, sections = {}, {}
    for key, value in data.items():
        key = _ALIASES.get(key, key)
        if key in SECTION_KEYS:
            if not isinstance(value, dict):
                raise ConfigError(f"[{key}] must be a table")
            unknown = set(value) - SECTION_KEYS[key]
            if unknown:
                raise ConfigError(f"unknown key(s) in [{key}]: {', '.join(sorted(unknown))}")
            sections[key] = dict(value)
        elif key == "params":
            if not isinstance(value, dict):
                raise ConfigError("[params] must be a table")
            kwargs["params"] = dict(value)
        elif key in RUN_KEYS:
            kwargs[key] = _coerce(key, value)
        else:
            raise ConfigError(f"unknown key {key!r}")
    if kwargs.get("budget_cap") is not None and kwargs["budget_cap"] <= 0:
        kwargs["budget_cap"] = None  # budget_cap = 0 disables the cap
    return validate(RunConfig(**kwargs, sections=sections))


def parse_config(text):
    """Parse TOML config text into a fully defaulted, validated :class:`RunConfig`."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    return from_mapping(data)


def load_config(path):
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return from_mapping(data)


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text  # bare word: treat as a string


def apply_overrides(cfg, items):
    """Apply ``key=value`` strings; ``section.key=value`` targets a table."""
    data = cfg.to_dict()
    data["sections"] = {k: dict(v) for k, v in cfg.sections.items()}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        key, value = key.strip(), _parse_value(raw.strip())
        if "." in key:
            head, sub = key.split(".", 1)
            if head == "params":
                data["params"][sub] = value
            else:
                data["sections"].setdefault(head, {})[sub] = value
        else:
            data[key] = value
    sections = data.pop("sections")
    merged = {k: v for k, v in data.items() if not (v is None and k not in ("budget_cap",))}
    merged.update(sections)
    if data.get("budget_cap") is None:
        merged["budget_cap"] = 0
    return from_mapping(merged)


def with_values(cfg, **changes):
    return validate(replace(cfg, **changes))
