"""Run configuration: JSON schema, defaults and validation.

A run config is a JSON object with the sections below; every field has a
default so a minimal config is just ``{"seed": 1}``. Validation collects
every problem instead of stopping at the first, so a bad file reports all
of its errors in one pass.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .policies import POLICY_NAMES
from .traces import FailureCategory


@dataclass(frozen=True)
class DeviceSection:
    count: int = 10
    mips: float = 1000.0
    telemetry_step: float = 2.0
    telemetry_drift: float = 0.0
    telemetry_lo: float = 5.0
    telemetry_hi: float = 40.0
    init_lo: float = 5.0
    init_hi: float = 35.0


@dataclass(frozen=True)
class WorkloadSection:
    task_count: int = 100
    arrival_rate_per_s: float = 0.01
    length_min: float = 1e6      # instructions
    length_max: float = 1e7
    slack_min: float = 0.10
    slack_max: float = 0.80
    app_count: int = 0           # 0 = one application per task


@dataclass(frozen=True)
class OverheadSection:
    checkpoint_frac: float = 0.02    # of remaining task time
    checkpoint_min_s: float = 0.5
    migration_state_mib: float = 64.0
    bandwidth_mbps: float = 100.0
    stop_copy_s: float = 0.5
    recovery_load_s: float = 1.0

    @property
    def transfer_s(self) -> float:
        bits = self.migration_state_mib * 1024 * 1024 * 8
        return bits / (self.bandwidth_mbps * 1e6)


@dataclass(frozen=True)
class PolicySection:
    name: str = "flbfh"
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class TraceSection:
    kind: str = "none"               # none | synth | file
    path: str | None = None
    format: str = "normalized"       # normalized | lanl (file kind only)
    nodes: int | None = None         # synth kind; defaults to device count
    span_s: int = 86400
    mtbf_s: float = 172800.0
    mttr_s: float = 7200.0
    offset_s: int = 0
    duration_s: int | None = None
    compression: float = 1.0
    top_n_failing: int | None = None


@dataclass(frozen=True)
class CostSection:
    # AWS-style IoT rates, taken at the top of the quoted bands.
    message_rate_per_million: float = 1.65
    connectivity_rate_per_million_min: float = 0.132
    messages_base: float = 2.0
    messages_per_checkpoint: float = 2.0
    messages_per_migration: float = 4.0
    messages_per_recovery: float = 2.0
    messages_per_replication: float = 2.0
    mirror_messages_per_minute: float = 1.0


# Pre-failure ramp windows per failure category, seconds. Categories with a
# window of 0 produce pure unpredicted failures.
DEFAULT_RAMP_WINDOWS: dict[str, float] = {
    "CPU": 300.0,
    "POWER": 300.0,
    "NETWORK": 300.0,
    "MEMORY": 0.0,
    "SOFTWARE": 0.0,
    "UNKNOWN": 0.0,
}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    devices: DeviceSection = field(default_factory=DeviceSection)
    workload: WorkloadSection = field(default_factory=WorkloadSection)
    overheads: OverheadSection = field(default_factory=OverheadSection)
    policy: PolicySection = field(default_factory=PolicySection)
    trace: TraceSection = field(default_factory=TraceSection)
    cost: CostSection = field(default_factory=CostSection)
    monitor_interval_s: float = 1.0
    ramp_windows: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_RAMP_WINDOWS))
    mips_ref: float | None = None    # deadline reference; defaults to device mips
    max_time_s: float | None = None
    telemetry_log: str | None = None

    def ramp_window_for(self, category: FailureCategory) -> float:
        return float(self.ramp_windows.get(category.value, 0.0))

    def reference_mips(self) -> float:
        return self.mips_ref if self.mips_ref is not None else self.devices.mips

    def to_dict(self) -> dict:
        data = asdict(self)
        data["policy"]["params"] = dict(self.policy.params)
        data["ramp_windows"] = dict(self.ramp_windows)
        return data


_SECTIONS = {
    "devices": DeviceSection,
    "workload": WorkloadSection,
    "overheads": OverheadSection,
    "policy": PolicySection,
    "trace": TraceSection,
    "cost": CostSection,
}


def _build_section(cls, data: Mapping, label: str, errors: list[str]):
    fields = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(data) - fields
    for key in sorted(unknown):
        errors.append(f"{label}: unknown field {key!r}")
    kwargs = {k: v for k, v in data.items() if k in fields}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(f"{label}: {exc}")
        return cls()


def config_from_dict(data: Mapping) -> tuple[RunConfig, list[str]]:
    """Build a RunConfig from a JSON-style mapping, collecting all errors."""
    errors: list[str] = []
    if not isinstance(data, Mapping):
        return RunConfig(), ["config root must be a JSON object"]
    top_fields = {f.name for f in RunConfig.__dataclass_fields__.values()}
    for key in sorted(set(data) - top_fields):
        errors.append(f"unknown top-level field {key!r}")
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        raw = data.get(name, {})
        if not isinstance(raw, Mapping):
            errors.append(f"{name}: must be an object")
            raw = {}
        kwargs[name] = _build_section(cls, raw, name, errors)
    for name in ("seed", "monitor_interval_s", "mips_ref", "max_time_s", "telemetry_log"):
        if name in data:
            kwargs[name] = data[name]
    if "ramp_windows" in data:
        raw = data["ramp_windows"]
        if not isinstance(raw, Mapping):
            errors.append("ramp_windows: must be an object of category -> seconds")
        else:
            windows = dict(DEFAULT_RAMP_WINDOWS)
            for key, value in raw.items():
                if key not in windows:
                    errors.append(f"ramp_windows: unknown failure category {key!r}")
                else:
                    windows[key] = float(value)
            kwargs["ramp_windows"] = windows
    try:
        config = RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(str(exc))
        config = RunConfig()
    errors.extend(validate(config))
    return config, errors


def validate(config: RunConfig) -> list[str]:
    errors: list[str] = []

    def require(condition: bool, message: str) -> None:
        if not condition:
            errors.append(message)

    require(isinstance(config.seed, int) and not isinstance(config.seed, bool), "seed: must be an integer")
    d = config.devices
    require(d.count >= 1, f"devices.count: must be >= 1, got {d.count}")
    require(d.mips > 0, f"devices.mips: must be > 0, got {d.mips}")
    require(d.telemetry_step >= 0, "devices.telemetry_step: must be >= 0")
    require(0 <= d.telemetry_lo <= d.telemetry_hi <= 100, "devices.telemetry bounds: need 0 <= lo <= hi <= 100")
    require(0 <= d.init_lo <= d.init_hi <= 100, "devices.init bounds: need 0 <= lo <= hi <= 100")
    w = config.workload
    require(w.task_count >= 0, f"workload.task_count: must be >= 0, got {w.task_count}")
    if w.task_count > 0:
        require(w.arrival_rate_per_s > 0, "workload.arrival_rate_per_s: must be > 0")
        require(0 < w.length_min <= w.length_max, "workload.length range: need 0 < min <= max")
    require(0 <= w.slack_min <= w.slack_max, "workload.slack range: need 0 <= min <= max")
    require(w.app_count >= 0, "workload.app_count: must be >= 0")
    o = config.overheads
    require(o.checkpoint_frac >= 0, "overheads.checkpoint_frac: must be >= 0")
    require(o.checkpoint_min_s >= 0, "overheads.checkpoint_min_s: must be >= 0")
    require(o.migration_state_mib >= 0, "overheads.migration_state_mib: must be >= 0")
    require(o.bandwidth_mbps > 0, "overheads.bandwidth_mbps: must be > 0")
    require(o.stop_copy_s >= 0, "overheads.stop_copy_s: must be >= 0")
    require(o.recovery_load_s >= 0, "overheads.recovery_load_s: must be >= 0")
    require(config.policy.name in POLICY_NAMES,
            f"policy.name: unknown policy {config.policy.name!r}; expected one of {POLICY_NAMES}")
    t = config.trace
    require(t.kind in ("none", "synth", "file"), f"trace.kind: must be none|synth|file, got {t.kind!r}")
    if t.kind == "file":
        require(bool(t.path), "trace.path: required when trace.kind is 'file'")
        require(t.format in ("normalized", "lanl"), f"trace.format: must be normalized|lanl, got {t.format!r}")
    if t.kind == "synth":
        nodes = t.nodes if t.nodes is not None else d.count
        require(nodes >= d.count, f"trace.nodes: must cover device count ({nodes} < {d.count})")
        require(t.span_s > 0, "trace.span_s: must be > 0")
        require(t.mtbf_s > 0, "trace.mtbf_s: must be > 0")
        require(t.mttr_s > 0, "trace.mttr_s: must be > 0")
    require(t.compression > 0, "trace.compression: must be > 0")
    require(t.offset_s >= 0, "trace.offset_s: must be >= 0")
    if t.duration_s is not None:
        require(t.duration_s > 0, "trace.duration_s: must be > 0")
    c = config.cost
    require(c.message_rate_per_million >= 0, "cost.message_rate_per_million: must be >= 0")
    require(c.connectivity_rate_per_million_min >= 0, "cost.connectivity_rate_per_million_min: must be >= 0")
    require(config.monitor_interval_s > 0, "monitor_interval_s: must be > 0")
    if config.mips_ref is not None:
        require(config.mips_ref > 0, "mips_ref: must be > 0")
    if config.max_time_s is not None:
        require(config.max_time_s > 0, "max_time_s: must be > 0")
    for key, value in config.ramp_windows.items():
        require(key in DEFAULT_RAMP_WINDOWS, f"ramp_windows: unknown failure category {key!r}")
        require(float(value) >= 0, f"ramp_windows.{key}: must be >= 0")
    return errors


def load_config(path: str | Path) -> tuple[RunConfig, list[str]]:
    path = Path(path)
    if not path.exists():
        return RunConfig(), [f"config file not found: {path}"]
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        return RunConfig(), [f"{path}: invalid JSON ({exc})"]
    return config_from_dict(data)
