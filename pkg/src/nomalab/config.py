"""Strict JSON run configuration.

Unknown keys are rejected with their path so typos fail loudly instead
of silently running defaults. Modulations are given as "MIxMQ" axis
sizes, e.g. "2x2" (QPSK), "4x2" (rectangular 8-QAM), "4x4" (16-QAM).
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass

from .constellation import build_rect_qam
from .detectors import SystemModel, UserProfile
from .errors import ConfigError
from .montecarlo import StopRule, TolerancePolicy
from .poweralloc import PaConfig

_MISSING = object()
_MOD_RE = re.compile(r"^(\d+)x(\d+)$")


@dataclass(frozen=True)
class UserConfig:
    power_db: float
    sigma: float
    modulation: str = "2x2"
    sic_rank: int | None = None


@dataclass(frozen=True)
class SystemConfig:
    n_antennas: int
    noise_sigma: float
    users: tuple[UserConfig, ...]


@dataclass(frozen=True)
class SweepConfig:
    start_db: float = 0.0
    stop_db: float = 0.0
    step_db: float = 5.0


@dataclass(frozen=True)
class McConfig:
    seed: int = 0
    min_errors: int = 100
    max_symbols: int = 100_000_000
    batch_size: int = 10_000
    workers: int = 1

    def stop_rule(self) -> StopRule:
        return StopRule(self.min_errors, self.max_symbols, self.batch_size)


@dataclass(frozen=True)
class AnalyticConfig:
    mode: str = "auto"
    prune_threshold: float = 1e-12
    max_leaves: int = 10_000_000


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    sweep: SweepConfig = SweepConfig()
    montecarlo: McConfig = McConfig()
    poweralloc: PaConfig = PaConfig()
    analytic: AnalyticConfig = AnalyticConfig()
    validate: TolerancePolicy = TolerancePolicy()
    output: OutputConfig = OutputConfig()


def _section(raw, path: str, allowed: dict):
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    out = {}
    for key, default in allowed.items():
        if key in raw:
            out[key] = raw[key]
        elif default is _MISSING:
            raise ConfigError(f"{path}.{key}: required")
        else:
            out[key] = default
    return out


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def parse_modulation(text, path: str = "modulation") -> tuple[int, int]:
    if not isinstance(text, str):
        raise ConfigError(f"{path}: expected a string like '4x2'")
    m = _MOD_RE.match(text.strip().lower())
    if not m:
        raise ConfigError(f"{path}: malformed modulation {text!r}, want 'MIxMQ'")
    return int(m.group(1)), int(m.group(2))


def _parse_user(raw, path: str) -> UserConfig:
    d = _section(raw, path, {
        "power_db": _MISSING, "sigma": _MISSING,
        "modulation": "2x2", "sic_rank": None})
    mi, mq = parse_modulation(d["modulation"], f"{path}.modulation")
    try:
        build_rect_qam(mi, mq)
    except ValueError as exc:
        raise ConfigError(f"{path}.modulation: {exc}") from exc
    rank = d["sic_rank"]
    if rank is not None:
        rank = _integer(rank, f"{path}.sic_rank")
    return UserConfig(
        power_db=_number(d["power_db"], f"{path}.power_db"),
        sigma=_number(d["sigma"], f"{path}.sigma"),
        modulation=f"{mi}x{mq}",
        sic_rank=rank)


def _parse_system(raw, path: str) -> SystemConfig:
    d = _section(raw, path, {
        "n_antennas": _MISSING, "noise_sigma": _MISSING, "users": _MISSING})
    users_raw = d["users"]
    if not isinstance(users_raw, list) or not users_raw:
        raise ConfigError(f"{path}.users: expected a nonempty array")
    users = tuple(_parse_user(u, f"{path}.users[{i}]")
                  for i, u in enumerate(users_raw))
    return SystemConfig(
        n_antennas=_integer(d["n_antennas"], f"{path}.n_antennas"),
        noise_sigma=_number(d["noise_sigma"], f"{path}.noise_sigma"),
        users=users)


def _parse_simple(raw, path: str, cls, fields: dict):
    """Parse a flat section, typing each value after its default."""
    d = _section(raw, path, fields)
    kwargs = {}
    for key, value in d.items():
        default = fields[key]
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{path}.{key}: expected a boolean")
            kwargs[key] = value
        elif isinstance(default, int):
            kwargs[key] = _integer(value, f"{path}.{key}")
        elif isinstance(default, float):
            kwargs[key] = _number(value, f"{path}.{key}")
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError(f"{path}.{key}: expected a string")
            kwargs[key] = value
        else:
            kwargs[key] = value
    return cls(**kwargs)


def parse_config(data: dict, path: str = "config") -> RunConfig:
    top = _section(data, path, {
        "system": _MISSING, "sweep": {}, "montecarlo": {}, "poweralloc": {},
        "analytic": {}, "validate": {}, "output": {}})
    system = _parse_system(top["system"], f"{path}.system")
    sweep = _parse_simple(top["sweep"], f"{path}.sweep", SweepConfig,
                          {"start_db": 0.0, "stop_db": 0.0, "step_db": 5.0})
    mc = _parse_simple(top["montecarlo"], f"{path}.montecarlo", McConfig,
                       {"seed": 0, "min_errors": 100, "max_symbols": 100_000_000,
                        "batch_size": 10_000, "workers": 1})
    pa = _parse_simple(top["poweralloc"], f"{path}.poweralloc", PaConfig,
                       {"p_max_db": 30.0, "max_iters": 500, "fd_step_db": 0.01,
                        "tol_db": 1e-4, "armijo_c": 1e-4, "step0_db": 4.0,
                        "min_step_db": 1e-6, "mode": "auto",
                        "multistart_points": 4})
    analytic = _parse_simple(top["analytic"], f"{path}.analytic", AnalyticConfig,
                             {"mode": "auto", "prune_threshold": 1e-12,
                              "max_leaves": 10_000_000})
    validate = _parse_simple(top["validate"], f"{path}.validate", TolerancePolicy,
                             {"k_ci": 3.0, "rel_tol": 0.15, "min_ber": 1e-5})
    output = _parse_simple(top["output"], f"{path}.output", OutputConfig,
                           {"directory": "out"})
    if analytic.mode not in ("auto", "exact", "approx"):
        raise ConfigError(f"{path}.analytic.mode: unknown mode {analytic.mode!r}")
    if pa.mode not in ("auto", "exact", "approx"):
        raise ConfigError(f"{path}.poweralloc.mode: unknown mode {pa.mode!r}")
    if sweep.step_db <= 0:
        raise ConfigError(f"{path}.sweep.step_db: must be positive")
    return RunConfig(system, sweep, mc, pa, analytic, validate, output)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def build_model(cfg: RunConfig) -> SystemModel:
    users = []
    for u in cfg.system.users:
        mi, mq = parse_modulation(u.modulation)
        users.append(UserProfile(
            power=10.0 ** (u.power_db / 10.0),
            sigma=u.sigma,
            constellation=build_rect_qam(mi, mq),
            sic_rank=u.sic_rank))
    try:
        return SystemModel(cfg.system.n_antennas, cfg.system.noise_sigma,
                           tuple(users))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_grid(cfg: RunConfig) -> list[float]:
    out = []
    off = cfg.sweep.start_db
    while off <= cfg.sweep.stop_db + 1e-9:
        out.append(round(off, 10))
        off += cfg.sweep.step_db
    return out


def to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
