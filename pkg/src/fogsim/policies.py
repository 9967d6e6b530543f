"""Failure-handling policies consulted by the simulator.

Three policies sit behind one interface:

* ``flbfh`` - the fuzzy composite: scores each running app's device with the
  reactive (mobility/response/power) and predictive (five-channel) scorers,
  fuses them as the max, and maps the fused score onto action bands
  (checkpoint / migrate / recover). A per-app running average of the score
  triggers one-shot replication after enough evaluations.
* ``hffr`` - adapted baseline: migrates when the hosting device's observed
  downtime fraction over a trailing window exceeds a threshold. No
  checkpoints, no replicas.
* ``ftsm`` - adapted baseline: checkpoints each device's running task on a
  fixed cadence derived from the device's observed mean time between
  failures. No migration, no replicas.

Policies are deterministic state machines owned by the single-threaded
simulation loop; every decision is a pure function of (time, app, device
snapshot, internal state).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from .devices import DeviceState
from .errors import UndefinedScoreError
from .fuzzy import FuzzyScorer, cpmnr_scorer, mrp_scorer

log = logging.getLogger(__name__)

# Score injected when the hosting device actually fails; defuzzification
# cannot produce it (the highest output center is 90), so it unambiguously
# selects the recover branch.
FAILURE_SENTINEL = 100.0


class Action(str, Enum):
    NONE = "NONE"
    CHECKPOINT = "CHECKPOINT"
    MIGRATE = "MIGRATE"
    CHECKPOINT_RECOVER = "CHECKPOINT_RECOVER"
    REPLICATE = "REPLICATE"


def classify(score: float) -> Action:
    """Map a degree-of-failure score onto its action band.

    Bands partition [0, 100]: below 50 no action, [50, 80] checkpoint,
    (80, 100) migrate, 100 (the failure sentinel) recover.
    """
    if score >= FAILURE_SENTINEL:
        return Action.CHECKPOINT_RECOVER
    if score > 80.0:
        return Action.MIGRATE
    if score >= 50.0:
        return Action.CHECKPOINT
    return Action.NONE


@dataclass(frozen=True)
class ActionRecord:
    time_s: float
    app_id: str
    action: Action
    score: float


@dataclass
class AppLedger:
    """Per-application evaluation tally driving the replication decision."""

    eval_count: int = 0          # A_c
    score_total: float = 0.0     # SD_ft
    score_avg: float = 0.0       # ASD_f
    replica_active: bool = False

    def record(self, score: float) -> None:
        self.eval_count += 1
        self.score_total += score
        self.score_avg = self.score_total / self.eval_count


class FailureHistory:
    """Failure intervals observed so far, per device.

    The simulator feeds start/end notifications as they happen; baselines
    query downtime fractions and inter-failure gaps. Only information
    available at query time is ever used.
    """

    def __init__(self) -> None:
        self._closed: dict[int, list[tuple[float, float]]] = {}
        self._open: dict[int, float] = {}
        self._starts: dict[int, list[float]] = {}

    def note_failure_start(self, device_id: int, now: float) -> None:
        self._open[device_id] = now
        self._starts.setdefault(device_id, []).append(now)

    def note_failure_end(self, device_id: int, now: float) -> None:
        start = self._open.pop(device_id, None)
        if start is not None:
            self._closed.setdefault(device_id, []).append((start, now))

    def downtime_fraction(self, device_id: int, now: float, window_s: float) -> float:
        if window_s <= 0:
            return 0.0
        lo = now - window_s
        down = 0.0
        for start, end in self._closed.get(device_id, ()):
            down += max(0.0, min(end, now) - max(start, lo))
        if device_id in self._open:
            down += max(0.0, now - max(self._open[device_id], lo))
        return min(1.0, down / window_s)

    def observed_mtbf(self, device_id: int) -> float | None:
        """Mean gap between observed failure starts; None below two starts."""
        starts = self._starts.get(device_id, ())
        if len(starts) < 2:
            return None
        gaps = [b - a for a, b in zip(starts, starts[1:])]
        return sum(gaps) / len(gaps)

    def failure_starts(self, device_id: int) -> tuple[float, ...]:
        return tuple(self._starts.get(device_id, ()))


class FailurePolicy:
    """Interface the simulation loop drives."""

    name = "base"

    def on_monitor(
        self, now: float, app_id: str, device: DeviceState, history: FailureHistory
    ) -> list[ActionRecord]:
        raise NotImplementedError

    def on_device_failure(self, now: float, app_id: str) -> list[ActionRecord]:
        raise NotImplementedError

    def notify_replica_gone(self, app_id: str) -> None:
        pass


class FuzzyCompositePolicy(FailurePolicy):
    """Composite proactive/reactive handler driven by the two fuzzy scorers."""

    name = "flbfh"

    def __init__(
        self,
        checkpoint_interval_s: float = 60.0,
        replication_min_evals: int = 10,
        replication_threshold: float = 50.0,
        reactive: FuzzyScorer | None = None,
        predictive: FuzzyScorer | None = None,
    ) -> None:
        self.checkpoint_interval_s = checkpoint_interval_s
        self.replication_min_evals = replication_min_evals
        self.replication_threshold = replication_threshold
        self.reactive = reactive or mrp_scorer()
        self.predictive = predictive or cpmnr_scorer()
        self.ledgers: dict[str, AppLedger] = {}
        self._last_checkpoint: dict[str, float] = {}

    def ledger(self, app_id: str) -> AppLedger:
        return self.ledgers.setdefault(app_id, AppLedger())

    def fused_score(self, device: DeviceState) -> float:
        t = device.telemetry()
        reactive = self.reactive.score((t["mobility"], t["response"], t["power"]))
        predictive = self.predictive.score(
            (t["cpu"], t["power"], t["mobility"], t["network"], t["response"])
        )
        return max(reactive, predictive)

    def evaluate(self, now: float, app_id: str, score: float) -> list[ActionRecord]:
        """Band the score, update the app ledger, and decide on replication."""
        action = classify(score)
        records: list[ActionRecord] = []
        if action is Action.CHECKPOINT:
            last = self._last_checkpoint.get(app_id)
            if last is None or now - last >= self.checkpoint_interval_s:
                self._last_checkpoint[app_id] = now
                records.append(ActionRecord(now, app_id, action, score))
        elif action is not Action.NONE:
            records.append(ActionRecord(now, app_id, action, score))
        ledger = self.ledger(app_id)
        ledger.record(score)
        if (
            not ledger.replica_active
            and ledger.score_avg >= self.replication_threshold
            and ledger.eval_count > self.replication_min_evals
        ):
            ledger.replica_active = True
            records.append(ActionRecord(now, app_id, Action.REPLICATE, score))
        return records

    def on_monitor(self, now, app_id, device, history):
        try:
            score = self.fused_score(device)
        except UndefinedScoreError:
            log.warning("no fuzzy reading for app %s at t=%.1f; treating as safe", app_id, now)
            return []
        return self.evaluate(now, app_id, score)

    def on_device_failure(self, now, app_id):
        return self.evaluate(now, app_id, FAILURE_SENTINEL)

    def notify_replica_gone(self, app_id):
        self.ledger(app_id).replica_active = False


class ProbabilityThresholdPolicy(FailurePolicy):
    """Baseline: migrate off devices whose observed downtime fraction over a
    trailing window exceeds a threshold. Reactive recovery reruns from
    scratch (the policy never checkpoints or replicates)."""

    name = "hffr"

    def __init__(self, threshold: float = 0.5, window_s: float = 21600.0) -> None:
        self.threshold = threshold
        self.window_s = window_s

    def on_monitor(self, now, app_id, device, history):
        p = history.downtime_fraction(device.device_id, now, self.window_s)
        if p > self.threshold:
            return [ActionRecord(now, app_id, Action.MIGRATE, 100.0 * p)]
        return []

    def on_device_failure(self, now, app_id):
        return [ActionRecord(now, app_id, Action.CHECKPOINT_RECOVER, FAILURE_SENTINEL)]


class CheckpointIntervalPolicy(FailurePolicy):
    """Baseline: per-device periodic checkpointing with the cadence derived
    from the device's observed mean time between failures."""

    name = "ftsm"

    def __init__(
        self,
        divisor: float = 2.0,
        min_interval_s: float = 300.0,
        fallback_interval_s: float = 86400.0,
    ) -> None:
        if divisor <= 0:
            raise ValueError("divisor must be positive")
        self.divisor = divisor
        self.min_interval_s = min_interval_s
        self.fallback_interval_s = fallback_interval_s
        self._last_checkpoint: dict[int, float] = {}

    def interval_for(self, device_id: int, history: FailureHistory) -> float:
        mtbf = history.observed_mtbf(device_id)
        base = self.fallback_interval_s if mtbf is None else mtbf / self.divisor
        return max(self.min_interval_s, base)

    def on_monitor(self, now, app_id, device, history):
        last = self._last_checkpoint.get(device.device_id)
        if last is None:
            # arm the timer when the device first hosts monitored work
            self._last_checkpoint[device.device_id] = now
            return []
        if now - last >= self.interval_for(device.device_id, history):
            self._last_checkpoint[device.device_id] = now
            return [ActionRecord(now, app_id, Action.CHECKPOINT, 0.0)]
        return []

    def on_device_failure(self, now, app_id):
        return [ActionRecord(now, app_id, Action.CHECKPOINT_RECOVER, FAILURE_SENTINEL)]


class NullPolicy(FailurePolicy):
    """No proactive handling at all; failures rerun from scratch."""

    name = "none"

    def on_monitor(self, now, app_id, device, history):
        return []

    def on_device_failure(self, now, app_id):
        return [ActionRecord(now, app_id, Action.CHECKPOINT_RECOVER, FAILURE_SENTINEL)]


POLICY_NAMES = ("flbfh", "hffr", "ftsm", "none")


def build_policy(name: str, params: dict | None = None) -> FailurePolicy:
    params = dict(params or {})
    if name == "flbfh":
        return FuzzyCompositePolicy(
            checkpoint_interval_s=params.pop("checkpoint_interval_s", 60.0),
            replication_min_evals=int(params.pop("replication_min_evals", 10)),
            replication_threshold=params.pop("replication_threshold", 50.0),
        )
    if name == "hffr":
        return ProbabilityThresholdPolicy(
            threshold=params.pop("threshold", 0.5),
            window_s=params.pop("window_s", 21600.0),
        )
    if name == "ftsm":
        return CheckpointIntervalPolicy(
            divisor=params.pop("divisor", 2.0),
            min_interval_s=params.pop("min_interval_s", 300.0),
            fallback_interval_s=params.pop("fallback_interval_s", 86400.0),
        )
    if name == "none":
        return NullPolicy()
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
