"""Scenario configuration: ``key = value`` text format with the reference defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .backbone import Algorithm

MODES = ("cds", "flooding")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    area: tuple[float, float] = (1000.0, 1000.0)
    nodes: tuple[int, ...] = (50, 100, 150, 200, 250)
    range_r: float = 250.0
    v_max: tuple[float, ...] = (5.0, 15.0, 25.0)
    pause: float = 100.0
    energy_range: tuple[float, float] = (1.0, 15.0)
    tx_w: float = 1.4
    rx_w: float = 1.0
    idle_w: float = 0.013
    bitrate: float = 2e6
    duration: float = 600.0
    hello_interval: float = 1.0
    recompute_interval: float = 5.0
    flows: int = 20
    packet_rate: float = 5.0
    packet_size: int = 512
    seeds: tuple[int, ...] = tuple(range(1, 11))
    algorithms: tuple[str, ...] = ("EAS_CDS", "WU_EMPR", "MIN_VELOCITY")
    modes: tuple[str, ...] = ("cds",)
    hello_size: int = 64
    hello_per_neighbor: int = 4
    control_size: int = 48
    tick: float = 0.1

    def __post_init__(self):
        validate(self)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


# text key -> (field name, kind)
_KEYS = {
    "area": ("area", "pair"),
    "nodes": ("nodes", "ints"),
    "range": ("range_r", "float"),
    "vmax": ("v_max", "floats"),
    "pause": ("pause", "float"),
    "energy": ("energy_range", "pair"),
    "tx_power": ("tx_w", "float"),
    "rx_power": ("rx_w", "float"),
    "idle_power": ("idle_w", "float"),
    "bitrate": ("bitrate", "float"),
    "duration": ("duration", "float"),
    "hello_interval": ("hello_interval", "float"),
    "recompute_interval": ("recompute_interval", "float"),
    "flows": ("flows", "int"),
    "rate": ("packet_rate", "float"),
    "packet_size": ("packet_size", "int"),
    "seeds": ("seeds", "ints"),
    "algorithms": ("algorithms", "algos"),
    "mode": ("modes", "modes"),
    "hello_size": ("hello_size", "int"),
    "hello_per_neighbor": ("hello_per_neighbor", "int"),
    "control_size": ("control_size", "int"),
    "tick": ("tick", "float"),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}

# quantities allowed to be zero
_NON_NEGATIVE = {"pause", "duration", "flows", "hello_per_neighbor"}


def validate(cfg: ScenarioConfig) -> None:
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in ("algorithms", "modes"):
            if not value:
                raise ConfigError(f"{_FIELD_TO_KEY[f.name]}: empty list")
            continue
        values = value if isinstance(value, tuple) else (value,)
        if not values:
            raise ConfigError(f"{_FIELD_TO_KEY[f.name]}: empty list")
        for x in values:
            if not math.isfinite(x):
                raise ConfigError(f"{_FIELD_TO_KEY[f.name]}: non-finite value")
            if f.name == "seeds":
                continue
            if x < 0 or (x == 0 and f.name not in _NON_NEGATIVE):
                raise ConfigError(f"{_FIELD_TO_KEY[f.name]}: must be positive, got {x}")
    lo, hi = cfg.energy_range
    if lo > hi:
        raise ConfigError("energy: lower bound exceeds upper bound")
    for tag in cfg.algorithms:
        Algorithm.parse(tag)
    for m in cfg.modes:
        if m not in MODES:
            raise ConfigError(f"mode: unknown mode {m!r}")


def _split(raw: str) -> list[str]:
    return [p.strip() for p in raw.replace("x", ",").split(",") if p.strip()]


def _convert(kind: str, raw: str):
    if kind == "float":
        return float(raw)
    if kind == "int":
        return int(raw)
    if kind == "pair":
        parts = [float(p) for p in _split(raw.replace("..", ","))]
        if len(parts) != 2:
            raise ValueError("expected two values")
        return tuple(parts)
    if kind in ("ints", "floats"):
        conv = int if kind == "ints" else float
        if ".." in raw and kind == "ints":
            lo, hi = raw.split("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(conv(p) for p in raw.split(",") if p.strip())
    if kind == "algos":
        return tuple(Algorithm.parse(p.strip()).value for p in raw.split(",") if p.strip())
    if kind == "modes":
        raw = raw.strip().lower()
        return MODES if raw == "both" else tuple(p.strip() for p in raw.split(",") if p.strip())
    raise AssertionError(kind)


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment; absent keys keep defaults."""
    changes = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, kind = _KEYS[key]
        try:
            changes[name] = _convert(kind, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        try:
            ScenarioConfig(**{name: changes[name]})
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return ScenarioConfig(**changes)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        key = _FIELD_TO_KEY[f.name]
        if f.name in ("area", "energy_range"):
            lines.append(f"{key} = {_fmt(value[0])}, {_fmt(value[1])}")
        else:
            lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"
