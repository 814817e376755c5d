"""Tool-wide configuration as flat ``section.key=value`` text.

Every module config is reachable under a dotted prefix, for example
``nonwear.refined.temp_min_c=32.0`` or ``bootstrap.method=multi_block:1..5``.
Unknown keys are rejected. Floats are written with ``repr`` so a dump
loads back bit-exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .activity import ActivityConfig
from .bootstrap import BootstrapConfig, GapMethod, parse_method
from .compliance import AlertRule, ComplianceConfig
from .eda import EdaQualityConfig
from .errors import ConfigError, WearQCError
from .ingest import ACC_COUNTS_PER_G
from .nonwear import BottcherConfig, RefinedConfig
from .timeutil import get_tz

__all__ = ["StudyConfig", "IoConfig", "ToolConfig", "loads", "dumps", "load", "dump"]


@dataclass(frozen=True)
class StudyConfig:
    tz: str = "UTC"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        get_tz(self.tz)
        if self.jobs < 1:
            raise ConfigError("study.jobs must be >= 1")


@dataclass(frozen=True)
class IoConfig:
    acc_scale: float = 1.0 / ACC_COUNTS_PER_G
    # time-of-day bin width for median imputation
    impute_bin_s: float = 1800.0

    def __post_init__(self):
        if not self.acc_scale > 0:
            raise ConfigError("io.acc_scale must be positive")


@dataclass(frozen=True)
class ToolConfig:
    refined: RefinedConfig = field(default_factory=RefinedConfig)
    bottcher: BottcherConfig = field(default_factory=BottcherConfig)
    eda: EdaQualityConfig = field(default_factory=EdaQualityConfig)
    activity: ActivityConfig = field(default_factory=ActivityConfig)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    compliance: ComplianceConfig = field(default_factory=ComplianceConfig)
    study: StudyConfig = field(default_factory=StudyConfig)
    io: IoConfig = field(default_factory=IoConfig)

    def bootstrap_config(self) -> BootstrapConfig:
        return dataclasses.replace(self.bootstrap, seed=self.study.seed)

    def compliance_config(self) -> ComplianceConfig:
        return dataclasses.replace(self.compliance, tz=self.study.tz)


# attribute -> key prefix; fields listed in _DERIVED come from study.*
_SECTIONS = {
    "refined": "nonwear.refined",
    "bottcher": "nonwear.bottcher",
    "eda": "eda",
    "activity": "activity",
    "bootstrap": "bootstrap",
    "compliance": "compliance",
    "study": "study",
    "io": "io",
}
_DERIVED = {("bootstrap", "seed"), ("compliance", "tz")}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _flatten(obj, prefix, attr, out):
    for f in dataclasses.fields(obj):
        if (attr, f.name) in _DERIVED:
            continue
        v = getattr(obj, f.name)
        key = f"{prefix}.{f.name}"
        if dataclasses.is_dataclass(v) and not isinstance(v, GapMethod):
            _flatten(v, key, None, out)
        else:
            out[key] = _fmt(v)


def _parse_like(default, text: str, key: str):
    text = text.strip()
    try:
        if isinstance(default, bool):
            if text.lower() not in ("true", "false"):
                raise ValueError("expected true or false")
            return text.lower() == "true"
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, GapMethod):
            return parse_method(text)
        if isinstance(default, tuple):
            items = [t.strip() for t in text.split(",") if t.strip()]
            if default and isinstance(default[0], str):
                return tuple(items)
            return tuple(float(t) for t in items)
        return text
    except (ValueError, WearQCError) as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}: {exc}") from None


def _build(obj, prefix, attr, values: dict, used: set):
    changes = {}
    for f in dataclasses.fields(obj):
        if (attr, f.name) in _DERIVED:
            continue
        v = getattr(obj, f.name)
        key = f"{prefix}.{f.name}"
        if dataclasses.is_dataclass(v) and not isinstance(v, GapMethod):
            changes[f.name] = _build(v, key, None, values, used)
        elif key in values:
            used.add(key)
            changes[f.name] = _parse_like(v, values[key], key)
    try:
        return dataclasses.replace(obj, **changes)
    except WearQCError as exc:
        raise ConfigError(f"{prefix}: {exc}") from None


def keys() -> list[str]:
    return sorted(_flat(ToolConfig()))


def _flat(cfg: ToolConfig) -> dict[str, str]:
    out: dict[str, str] = {}
    for attr, prefix in _SECTIONS.items():
        _flatten(getattr(cfg, attr), prefix, attr, out)
    return out


def from_mapping(values: dict[str, str], base: ToolConfig | None = None) -> ToolConfig:
    base = base or ToolConfig()
    known = set(_flat(base))
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    used: set = set()
    parts = {attr: _build(getattr(base, attr), prefix, attr, values, used)
             for attr, prefix in _SECTIONS.items()}
    return ToolConfig(**parts)


def loads(text: str, source: str = "<config>") -> ToolConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key}")
        values[key] = value
    return from_mapping(values)


def dumps(cfg: ToolConfig) -> str:
    flat = _flat(cfg)
    return "".join(f"{k}={flat[k]}\n" for k in sorted(flat))


def load(path) -> ToolConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror or exc}") from None
    return loads(text, str(p))


def dump(cfg: ToolConfig, path) -> None:
    Path(path).write_text(dumps(cfg), encoding="utf-8")
