"""Fog device state and its evolution over simulated time.

Each device carries five telemetry channels on the percent scale plus a
processing capacity and availability flag. Channels move as independent
reflected random walks (a construction of this artifact; no public failure
trace records resource dynamics), and degrade linearly toward the failing
zone during a configurable window before a trace failure so that predicted
failures are actually predictable from telemetry.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping

from .traces import FailureCategory

CHANNELS = ("mobility", "cpu", "network", "response", "power")

# Telemetry value a ramped channel reaches at failure onset.
RAMP_TARGET = 95.0

# Channels degraded by each failure category; categories without a specific
# telemetry signature degrade everything.
CATEGORY_CHANNELS: dict[FailureCategory, tuple[str, ...]] = {
    FailureCategory.CPU: ("cpu",),
    FailureCategory.POWER: ("power",),
    FailureCategory.NETWORK: ("network",),
    FailureCategory.MEMORY: CHANNELS,
    FailureCategory.SOFTWARE: CHANNELS,
    FailureCategory.UNKNOWN: CHANNELS,
}


@dataclass(frozen=True)
class ChannelProfile:
    """Random-walk parameters for one telemetry channel."""

    step: float = 2.0
    drift: float = 0.0
    lo: float = 5.0
    hi: float = 40.0

    def __post_init__(self) -> None:
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")
        if not (0.0 <= self.lo <= self.hi <= 100.0):
            raise ValueError(f"bounds must satisfy 0 <= lo <= hi <= 100, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class TelemetryProfile:
    """Per-channel walk parameters plus the base seed for device streams."""

    channels: Mapping[str, ChannelProfile] = field(
        default_factory=lambda: {name: ChannelProfile() for name in CHANNELS}
    )
    seed: int = 0

    def channel(self, name: str) -> ChannelProfile:
        return self.channels.get(name, ChannelProfile())


@dataclass(frozen=True)
class DeviceState:
    """Snapshot of one device's telemetry and failure tallies."""

    device_id: int
    mips: float = 1000.0
    mobility_pct: float = 20.0
    cpu_util_pct: float = 20.0
    network_pct: float = 20.0
    response_pct: float = 20.0
    power_pct: float = 20.0
    up: bool = True
    failure_count: int = 0
    unpredicted_failure_count: int = 0
    # Raw-range normalization bounds per channel (alpha, beta); telemetry in
    # this simulator is generated directly on the percent scale, so these
    # default to the identity range.
    bounds: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: {name: (0.0, 100.0) for name in CHANNELS}
    )

    def __post_init__(self) -> None:
        for name in CHANNELS:
            value = self.channel(name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} = {value} outside [0, 100]")

    def channel(self, name: str) -> float:
        return getattr(self, _FIELD_BY_CHANNEL[name])

    def telemetry(self) -> dict[str, float]:
        return {name: self.channel(name) for name in CHANNELS}

    def with_channels(self, **values: float) -> "DeviceState":
        return replace(self, **{_FIELD_BY_CHANNEL[k]: v for k, v in values.items()})


_FIELD_BY_CHANNEL = {
    "mobility": "mobility_pct",
    "cpu": "cpu_util_pct",
    "network": "network_pct",
    "response": "response_pct",
    "power": "power_pct",
}


def device_rng(seed: int, device_id: int) -> random.Random:
    """Dedicated, reproducible stream for one device.

    Seeding through a string keeps streams distinct across devices without
    arithmetic collisions between (seed, id) pairs.
    """
    return random.Random(f"{seed}:device:{device_id}")


def initial_state(
    device_id: int,
    mips: float,
    seed: int,
    safe_lo: float = 5.0,
    safe_hi: float = 35.0,
    rng: random.Random | None = None,
) -> DeviceState:
    """Fresh device with channels drawn uniformly from the safe zone."""
    rng = rng or device_rng(seed, device_id)
    values = {name: rng.uniform(safe_lo, safe_hi) for name in CHANNELS}
    return DeviceState(device_id=device_id, mips=mips).with_channels(**values)


def evolve(state: DeviceState, profile: TelemetryProfile, dt: float, rng: random.Random) -> DeviceState:
    """Advance every channel by one reflected random-walk step over ``dt``.

    x' = clamp(x + drift*dt + step*sqrt(dt)*u) with u uniform in [-1, 1];
    channels are consumed from ``rng`` in CHANNELS order, so trajectories are
    fully determined by the stream. Aggregating several small steps into one
    larger dt keeps the same per-step statistics.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    sqrt_dt = math.sqrt(dt)
    values = {}
    for name in CHANNELS:
        ch = profile.channel(name)
        u = rng.uniform(-1.0, 1.0)
        x = state.channel(name) + ch.drift * dt + ch.step * sqrt_dt * u
        values[name] = min(ch.hi, max(ch.lo, x))
    return state.with_channels(**values)


def ramp_progress(now: float, failure_start: float, window: float) -> float:
    """Fraction of the pre-failure ramp elapsed at ``now`` (0 outside it)."""
    if window <= 0 or now < failure_start - window:
        return 0.0
    return min(1.0, (now - (failure_start - window)) / window)


def pre_failure_ramp(
    state: DeviceState,
    anchors: Mapping[str, float],
    now: float,
    failure_start: float,
    window: float,
    category: FailureCategory,
) -> DeviceState:
    """Overlay the linear degradation ramp onto the affected channels.

    ``anchors`` holds each channel's value when its ramp began; the channel
    rises linearly from there to RAMP_TARGET at failure onset and never drops
    below its naturally evolved value. window == 0 disables the ramp, which
    turns the failure into a pure unpredicted one.
    """
    progress = ramp_progress(now, failure_start, window)
    if progress <= 0.0:
        return state
    values = {}
    for name in CATEGORY_CHANNELS[category]:
        anchor = anchors.get(name, state.channel(name))
        ramped = anchor + (RAMP_TARGET - anchor) * progress
        values[name] = max(state.channel(name), min(100.0, ramped))
    return state.with_channels(**values)
