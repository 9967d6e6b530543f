"""Deterministic discrete-event simulation of tasks on unreliable devices.

One run is one strictly single-threaded event loop. Events are processed in
(time, sequence) order with sequence numbers assigned at insertion; initial
events (trace failures, arrivals, the first monitor tick) are inserted in a
canonical sort order, so identical configs replay identically regardless of
how the trace events were listed.

Scheduling is least-loaded with lowest-device-id tie-break. Devices execute
one task at a time from a FIFO queue; replicas (and tasks promoted from a
replica) run in a background slot on their host, which keeps replica
accounting out of the queueing model.

Execution-start semantics: a task's ``exec_start_s`` marks the start of its
current from-scratch execution. Resuming from a checkpoint or arriving from
a migration continues the same execution; a restart-from-zero recovery
begins a new one and therefore resets ``exec_start_s``. ``proc_start_s`` is
never reset, so processing time includes every overhead and recomputation.
"""

from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .config import RunConfig
from .devices import (
    CHANNELS,
    ChannelProfile,
    DeviceState,
    TelemetryProfile,
    device_rng,
    evolve,
    initial_state,
    pre_failure_ramp,
)
from .errors import ConfigurationError
from .policies import Action, ActionRecord, FailureHistory, FailurePolicy, build_policy
from .traces import FailureCategory, FailureEvent, TraceSet, parse_lanl, parse_normalized_csv, synthesize

log = logging.getLogger(__name__)


class EventKind(Enum):
    ARRIVAL = "ARRIVAL"
    MONITOR_TICK = "MONITOR_TICK"
    FAILURE_START = "FAILURE_START"
    FAILURE_END = "FAILURE_END"
    TASK_DONE = "TASK_DONE"
    MIGRATION_DONE = "MIGRATION_DONE"
    CHECKPOINT_DONE = "CHECKPOINT_DONE"


# Canonical ordering for same-timestamp events at preload: repairs complete
# before new failures, failures land before arrivals see the device pool,
# and the monitor observes the settled state.
_PRELOAD_RANK = {
    EventKind.FAILURE_END: 0,
    EventKind.FAILURE_START: 1,
    EventKind.ARRIVAL: 2,
    EventKind.MONITOR_TICK: 3,
}


class TaskStatus(str, Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    CHECKPOINTED = "CHECKPOINTED"
    MIGRATING = "MIGRATING"
    FAILED = "FAILED"
    DONE = "DONE"
    DONE_LATE = "DONE_LATE"


# FAILED is transient (between a device failure and the recovery restart);
# it only becomes terminal for tasks still unfinished when the run ends.
COMPLETED = {TaskStatus.DONE, TaskStatus.DONE_LATE}


@dataclass
class MigrationPlan:
    target: int
    source_end_s: float
    arrive_s: float


@dataclass
class ReplicaRun:
    host: int
    progress_base: float
    anchor_s: float
    epoch: int


@dataclass
class TaskRecord:
    task_id: int
    app_id: str
    length: float
    submit_s: float
    deadline_s: float
    slack: float
    status: TaskStatus = TaskStatus.PENDING
    exec_start_s: float | None = None
    proc_start_s: float | None = None
    proc_end_s: float | None = None
    progress: float = 0.0
    last_checkpoint: float | None = None
    host: int | None = None
    running_since: float | None = None
    bound_since: float | None = None
    fresh: bool = True
    background: bool = False
    epoch: int = 0
    mig_epoch: int = 0
    migration: MigrationPlan | None = None
    replica: ReplicaRun | None = None
    replica_epoch: int = 0
    checkpoints: int = 0
    migrations: int = 0
    recoveries: int = 0
    replications: int = 0
    device_seconds: float = 0.0
    replica_seconds: float = 0.0


@dataclass
class SimDevice:
    device_id: int
    state: DeviceState
    rng: object
    failures: tuple[FailureEvent, ...] = ()
    next_failure: int = 0
    last_obs_s: float = 0.0
    queue: list[int] = field(default_factory=list)
    running: int | None = None
    background: set[int] = field(default_factory=set)
    replicas: set[int] = field(default_factory=set)
    ramp_anchor_start: int | None = None
    ramp_anchors: dict[str, float] = field(default_factory=dict)

    def load(self) -> int:
        return len(self.queue) + (1 if self.running is not None else 0)


@dataclass
class RunResult:
    config: RunConfig
    tasks: list[TaskRecord]
    actions: list[ActionRecord]
    diagnostics: dict


def load_trace(config: RunConfig) -> TraceSet:
    """Materialize the configured failure trace, windowed and compressed."""
    t = config.trace
    if t.kind == "none":
        return TraceSet.build([], nodes=range(config.devices.count))
    if t.kind == "synth":
        nodes = t.nodes if t.nodes is not None else config.devices.count
        trace = synthesize(nodes, t.span_s, t.mtbf_s, t.mttr_s, seed=config.seed)
    else:
        path = Path(t.path)
        if not path.exists():
            raise ConfigurationError(f"trace file not found: {path}")
        trace = parse_lanl(path).trace if t.format == "lanl" else parse_normalized_csv(path)
    if t.top_n_failing is not None:
        trace = trace.top_n_failing(t.top_n_failing)
    if t.offset_s or t.duration_s is not None or t.compression != 1.0:
        trace = trace.window(t.offset_s, t.duration_s, t.compression)
    return trace


class Simulation:
    def __init__(self, config: RunConfig, trace: TraceSet | None = None):
        self.config = config
        self.trace = trace if trace is not None else load_trace(config)
        if len(self.trace.nodes) < config.devices.count:
            raise ConfigurationError(
                f"trace provides {len(self.trace.nodes)} nodes for {config.devices.count} devices"
            )
        self.policy: FailurePolicy = build_policy(config.policy.name, dict(config.policy.params))
        self.history = FailureHistory()
        self.now = 0.0
        self._heap: list[tuple[float, int, EventKind, dict]] = []
        self._seq = 0
        self.tasks: dict[int, TaskRecord] = {}
        self.devices: dict[int, SimDevice] = {}
        self.actions: list[ActionRecord] = []
        self.pending_pool: list[int] = []
        self.terminal_count = 0
        self.arrivals_left = 0
        self.violations = 0
        self.deferred_actions = 0
        self.warnings = 0
        self._telemetry_rows: list[str] = []
        d = config.devices
        profile_channels = {
            name: ChannelProfile(d.telemetry_step, d.telemetry_drift, d.telemetry_lo, d.telemetry_hi)
            for name in CHANNELS
        }
        self.profile = TelemetryProfile(channels=profile_channels, seed=config.seed)
        node_for_device = list(self.trace.nodes)[: d.count]
        for device_id in range(d.count):
            node = node_for_device[device_id]
            state = initial_state(device_id, d.mips, config.seed, d.init_lo, d.init_hi)
            self.devices[device_id] = SimDevice(
                device_id=device_id,
                state=state,
                rng=device_rng(config.seed, device_id),
                failures=self.trace.for_node(node),
            )

    # ------------------------------------------------------------------
    # event plumbing

    def _push(self, time_s: float, kind: EventKind, payload: dict) -> None:
        heapq.heappush(self._heap, (time_s, self._seq, kind, payload))
        self._seq += 1

    def _preload(self) -> None:
        initial: list[tuple[float, int, int, EventKind, dict]] = []
        for device in self.devices.values():
            for event in device.failures:
                initial.append(
                    (float(event.start_s), _PRELOAD_RANK[EventKind.FAILURE_START],
                     device.device_id, EventKind.FAILURE_START,
                     {"device": device.device_id, "event": event})
                )
                initial.append(
                    (float(event.end_s), _PRELOAD_RANK[EventKind.FAILURE_END],
                     device.device_id, EventKind.FAILURE_END,
                     {"device": device.device_id, "event": event})
                )
        for task in self.tasks.values():
            initial.append(
                (task.submit_s, _PRELOAD_RANK[EventKind.ARRIVAL], task.task_id,
                 EventKind.ARRIVAL, {"task": task.task_id})
            )
        if self.tasks:
            initial.append((0.0, _PRELOAD_RANK[EventKind.MONITOR_TICK], -1, EventKind.MONITOR_TICK, {}))
        initial.sort(key=lambda item: (item[0], item[1], item[2]))
        for time_s, _rank, _key, kind, payload in initial:
            self._push(time_s, kind, payload)

    def _generate_workload(self) -> None:
        w = self.config.workload
        rng = random.Random(f"{self.config.seed}:workload")
        mips_ref = self.config.reference_mips()
        t = 0.0
        for i in range(w.task_count):
            t += rng.expovariate(w.arrival_rate_per_s)
            length = rng.uniform(w.length_min, w.length_max)
            slack = rng.uniform(w.slack_min, w.slack_max)
            app_id = f"a{i % w.app_count}" if w.app_count > 0 else f"a{i}"
            deadline = t + (length / mips_ref) * (1.0 + slack)
            self.tasks[i] = TaskRecord(
                task_id=i, app_id=app_id, length=length, submit_s=t,
                deadline_s=deadline, slack=slack,
            )
        self.arrivals_left = w.task_count

    # ------------------------------------------------------------------
    # telemetry

    def _observe(self, device: SimDevice) -> DeviceState:
        """Advance the device walk lazily to `now` and overlay any ramp."""
        dt = self.now - device.last_obs_s
        if dt > 0 and device.state.up:
            device.state = evolve(device.state, self.profile, dt, device.rng)
        device.last_obs_s = self.now
        while device.next_failure < len(device.failures) and \
                device.failures[device.next_failure].start_s <= self.now:
            device.next_failure += 1
        if device.next_failure < len(device.failures):
            event = device.failures[device.next_failure]
            window = self.config.ramp_window_for(event.category)
            if window > 0 and event.start_s - self.now <= window:
                if device.ramp_anchor_start != event.start_s:
                    device.ramp_anchor_start = event.start_s
                    device.ramp_anchors = dict(device.state.telemetry())
                return pre_failure_ramp(
                    device.state, device.ramp_anchors, self.now,
                    float(event.start_s), window, event.category,
                )
        return device.state

    # ------------------------------------------------------------------
    # task accounting

    def _mips(self, device_id: int) -> float:
        return self.devices[device_id].state.mips

    def _touch(self, task: TaskRecord) -> None:
        """Settle progress and connection time up to `now`."""
        if task.bound_since is not None:
            task.device_seconds += self.now - task.bound_since
            task.bound_since = self.now
        if task.running_since is None or task.host is None:
            return
        if task.status is TaskStatus.RUNNING:
            until = self.now
        elif task.status is TaskStatus.MIGRATING and task.migration is not None:
            until = min(self.now, task.migration.source_end_s)
        else:
            return
        if until > task.running_since:
            task.progress = min(task.length, task.progress + self._mips(task.host) * (until - task.running_since))
            task.running_since = until

    def _replica_progress(self, task: TaskRecord) -> float:
        r = task.replica
        return min(task.length, r.progress_base + self._mips(r.host) * (self.now - r.anchor_s))

    def _drop_replica(self, task: TaskRecord) -> None:
        r = task.replica
        if r is None:
            return
        task.replica_seconds += self.now - r.anchor_s
        self.devices[r.host].replicas.discard(task.task_id)
        task.replica = None
        self.policy.notify_replica_gone(task.app_id)

    # ------------------------------------------------------------------
    # scheduling

    def _pick_device(self, exclude: set[int] = frozenset()) -> SimDevice | None:
        best = None
        for device_id in sorted(self.devices):
            device = self.devices[device_id]
            if not device.state.up or device_id in exclude:
                continue
            if best is None or device.load() < best.load():
                best = device
        return best

    def _schedule_task(self, task: TaskRecord) -> None:
        device = self._pick_device()
        if device is None:
            task.status = TaskStatus.PENDING
            task.host = None
            if task.task_id not in self.pending_pool:
                self.pending_pool.append(task.task_id)
            return
        if device.running is None:
            self._start_task(task, device)
        else:
            task.status = TaskStatus.PENDING
            task.host = device.device_id
            device.queue.append(task.task_id)

    def _start_task(self, task: TaskRecord, device: SimDevice) -> None:
        device.running = task.task_id
        task.host = device.device_id
        task.status = TaskStatus.RUNNING
        task.background = False
        task.running_since = self.now
        task.bound_since = self.now
        if task.fresh:
            task.exec_start_s = self.now
            task.fresh = False
        if task.proc_start_s is None:
            task.proc_start_s = self.now
        self._schedule_completion(task)

    def _schedule_completion(self, task: TaskRecord) -> None:
        task.epoch += 1
        remaining = (task.length - task.progress) / self._mips(task.host)
        self._push(self.now + remaining, EventKind.TASK_DONE, {"task": task.task_id, "epoch": task.epoch})

    def _release_slot(self, device: SimDevice) -> None:
        device.running = None
        while device.queue:
            next_id = device.queue.pop(0)
            next_task = self.tasks[next_id]
            if next_task.status is TaskStatus.PENDING:
                self._start_task(next_task, device)
                return

    # ------------------------------------------------------------------
    # actions

    def _record(self, records: list[ActionRecord]) -> None:
        self.actions.extend(records)

    def _apply_action(self, record: ActionRecord, task: TaskRecord) -> None:
        if record.action is Action.CHECKPOINT:
            self._apply_checkpoint(task)
        elif record.action is Action.MIGRATE:
            self._apply_migrate(task)
        elif record.action is Action.REPLICATE:
            self._apply_replicate(task)
        # CHECKPOINT_RECOVER is applied by the failure path, NONE never emitted

    def _apply_checkpoint(self, task: TaskRecord) -> None:
        if task.status is not TaskStatus.RUNNING:
            return
        self._touch(task)
        o = self.config.overheads
        remaining_s = (task.length - task.progress) / self._mips(task.host)
        cost = max(o.checkpoint_min_s, o.checkpoint_frac * remaining_s)
        task.status = TaskStatus.CHECKPOINTED
        task.running_since = None
        task.epoch += 1
        self._push(self.now + cost, EventKind.CHECKPOINT_DONE, {"task": task.task_id, "epoch": task.epoch})

    def _apply_migrate(self, task: TaskRecord) -> None:
        if task.status is not TaskStatus.RUNNING or task.host is None:
            return
        target = self._pick_device(exclude={task.host})
        if target is None:
            self.deferred_actions += 1
            return
        self._touch(task)
        o = self.config.overheads
        source_end = self.now + o.transfer_s
        completes_at = self.now + (task.length - task.progress) / self._mips(task.host)
        if completes_at <= source_end:
            # the task will finish before the pre-copy completes; migrating
            # buys nothing, so leave it alone
            return
        task.migrations += 1
        task.mig_epoch += 1
        task.epoch += 1  # cancel the scheduled completion
        task.status = TaskStatus.MIGRATING
        task.migration = MigrationPlan(target.device_id, source_end, source_end + o.stop_copy_s)
        self._push(task.migration.arrive_s, EventKind.MIGRATION_DONE,
                   {"task": task.task_id, "mig_epoch": task.mig_epoch})

    def _apply_replicate(self, task: TaskRecord) -> None:
        if task.status is not TaskStatus.RUNNING or task.host is None:
            return
        target = self._pick_device(exclude={task.host})
        if target is None:
            self.deferred_actions += 1
            # re-arm the policy so it can ask again next tick
            self.policy.notify_replica_gone(task.app_id)
            return
        self._touch(task)
        task.replications += 1
        task.replica_epoch += 1
        task.replica = ReplicaRun(
            host=target.device_id, progress_base=task.progress, anchor_s=self.now, epoch=task.replica_epoch,
        )
        target.replicas.add(task.task_id)
        remaining = (task.length - task.progress) / self._mips(target.device_id)
        self._push(self.now + remaining, EventKind.TASK_DONE,
                   {"task": task.task_id, "replica": True, "epoch": task.replica.epoch})

    # ------------------------------------------------------------------
    # failure handling

    def _recover_task(self, task: TaskRecord) -> None:
        """Apply recover semantics: replica first, then checkpoint, else rerun."""
        self._touch(task)
        task.recoveries += 1
        task.bound_since = None
        task.running_since = None
        task.migration = None
        replica = task.replica
        if replica is not None and self.devices[replica.host].state.up:
            # promote the replica: same progress, no recompute; it keeps its
            # background slot on the replica host
            task.progress = self._replica_progress(task)
            host = self.devices[replica.host]
            self._drop_replica(task)
            task.host = host.device_id
            task.status = TaskStatus.RUNNING
            task.background = True
            host.background.add(task.task_id)
            task.running_since = self.now
            task.bound_since = self.now
            self._schedule_completion(task)
            return
        if replica is not None:
            self._drop_replica(task)
        task.host = None
        task.status = TaskStatus.FAILED
        task.epoch += 1
        if task.last_checkpoint is not None:
            task.progress = task.last_checkpoint
        else:
            task.progress = 0.0
            task.fresh = True  # the next start is a new execution
        self._push(self.now + self.config.overheads.recovery_load_s, EventKind.ARRIVAL,
                   {"task": task.task_id, "reschedule": True})

    def _on_failure_start(self, device: SimDevice, event: FailureEvent) -> None:
        device.state = replace(device.state, up=False, failure_count=device.state.failure_count + 1)
        if self.config.ramp_window_for(event.category) <= 0:
            device.state = replace(
                device.state, unpredicted_failure_count=device.state.unpredicted_failure_count + 1
            )
        device.ramp_anchor_start = None
        device.ramp_anchors = {}
        device.last_obs_s = self.now
        self.history.note_failure_start(device.device_id, self.now)
        # running task (primary slot and any promoted/background tasks) fail
        affected = []
        if device.running is not None:
            affected.append(device.running)
        affected.extend(sorted(device.background))
        device.running = None
        device.background.clear()
        for task_id in affected:
            task = self.tasks[task_id]
            if task.status in TERMINAL:
                continue
            self._record(self.policy.on_device_failure(self.now, task.app_id))
            self._recover_task(task)
        # queued tasks simply move elsewhere, nothing was lost
        queued = [self.tasks[i] for i in device.queue]
        device.queue.clear()
        for task in queued:
            if task.status is TaskStatus.PENDING:
                task.host = None
                self._schedule_task(task)
        # replicas hosted here are lost
        for task_id in sorted(device.replicas):
            task = self.tasks[task_id]
            if task.replica is not None and task.replica.host == device.device_id:
                task.replica_seconds += self.now - task.replica.anchor_s
                task.replica = None
                self.policy.notify_replica_gone(task.app_id)
        device.replicas.clear()

    def _on_failure_end(self, device: SimDevice) -> None:
        # repair restores the device to a fresh safe-zone telemetry draw
        d = self.config.devices
        values = {name: device.rng.uniform(d.init_lo, d.init_hi) for name in CHANNELS}
        device.state = replace(device.state, up=True).with_channels(**values)
        device.last_obs_s = self.now
        device.ramp_anchor_start = None
        device.ramp_anchors = {}
        self.history.note_failure_end(device.device_id, self.now)
        if self.pending_pool:
            waiting = [self.tasks[i] for i in self.pending_pool]
            self.pending_pool.clear()
            for task in waiting:
                if task.status in (TaskStatus.PENDING, TaskStatus.FAILED) and task.status not in TERMINAL:
                    self._schedule_task(task)

    # ------------------------------------------------------------------
    # event handlers

    def _on_arrival(self, payload: dict) -> None:
        task = self.tasks[payload["task"]]
        if not payload.get("reschedule"):
            self.arrivals_left -= 1
        if task.status in TERMINAL:
            return
        self._schedule_task(task)

    def _on_task_done(self, payload: dict) -> None:
        task = self.tasks[payload["task"]]
        if task.status in TERMINAL:
            return
        if payload.get("replica"):
            if task.replica is None or task.replica.epoch != payload["epoch"]:
                return
            self._touch(task)
            self._drop_replica(task)
            self._complete(task, via_replica=True)
            return
        if payload["epoch"] != task.epoch or task.status is not TaskStatus.RUNNING:
            return
        self._touch(task)
        if abs(task.progress - task.length) > 1e-6 * max(1.0, task.length):
            self.violations += 1
            log.error("task %d completed with progress %.3f != length %.3f",
                      task.task_id, task.progress, task.length)
        self._drop_replica(task)
        self._complete(task)

    def _complete(self, task: TaskRecord, via_replica: bool = False) -> None:
        task.progress = task.length
        task.proc_end_s = self.now
        task.status = TaskStatus.DONE if self.now <= task.deadline_s else TaskStatus.DONE_LATE
        task.running_since = None
        task.bound_since = None
        task.epoch += 1
        if task.host is not None:
            device = self.devices[task.host]
            if device.running == task.task_id:
                self._release_slot(device)
            device.background.discard(task.task_id)
        self.terminal_count += 1

    def _on_migration_done(self, payload: dict) -> None:
        task = self.tasks[payload["task"]]
        if task.status is not TaskStatus.MIGRATING or task.mig_epoch != payload["mig_epoch"]:
            return
        self._touch(task)  # progress settled up to source_end
        plan = task.migration
        task.migration = None
        source = self.devices[task.host]
        if source.running == task.task_id:
            self._release_slot(source)
        source.background.discard(task.task_id)
        task.background = False
        target = self.devices[plan.target]
        if not target.state.up:
            fallback = self._pick_device(exclude={source.device_id})
            target = fallback
        if target is None:
            task.status = TaskStatus.PENDING
            task.host = None
            task.running_since = None
            task.bound_since = None
            self.pending_pool.append(task.task_id)
            return
        task.running_since = None
        task.bound_since = None
        if target.running is None:
            self._start_task(task, target)
        else:
            task.status = TaskStatus.PENDING
            task.host = target.device_id
            target.queue.append(task.task_id)

    def _on_checkpoint_done(self, payload: dict) -> None:
        task = self.tasks[payload["task"]]
        if task.status is not TaskStatus.CHECKPOINTED or task.epoch != payload["epoch"]:
            return
        self._touch(task)
        task.last_checkpoint = task.progress
        task.checkpoints += 1
        task.status = TaskStatus.RUNNING
        task.running_since = self.now
        self._schedule_completion(task)

    def _on_monitor_tick(self, payload: dict) -> None:
        interval = self.config.monitor_interval_s
        if self.terminal_count < len(self.tasks) or self.arrivals_left > 0:
            self._push(self.now + interval, EventKind.MONITOR_TICK, {})
        log_telemetry = self.config.telemetry_log is not None
        for device_id in sorted(self.devices):
            device = self.devices[device_id]
            monitored = []
            if device.running is not None:
                monitored.append(device.running)
            monitored.extend(sorted(device.background))
            if not monitored and not log_telemetry:
                continue
            if not device.state.up:
                if monitored:
                    self.violations += 1
                    log.error("tasks %s observed on down device %d", monitored, device_id)
                continue
            snapshot = self._observe(device)
            if log_telemetry:
                t = snapshot.telemetry()
                self._telemetry_rows.append(
                    f"{self.now!r},{device_id},{t['mobility']!r},{t['cpu']!r},"
                    f"{t['network']!r},{t['response']!r},{t['power']!r}"
                )
            for task_id in monitored:
                task = self.tasks[task_id]
                if task.status is not TaskStatus.RUNNING:
                    continue
                records = self.policy.on_monitor(self.now, task.app_id, snapshot, self.history)
                if records:
                    self._record(records)
                    for record in records:
                        self._apply_action(record, task)

    # ------------------------------------------------------------------

    def run(self) -> RunResult:
        self._generate_workload()
        self._preload()
        max_time = self.config.max_time_s
        while self._heap:
            if self.terminal_count == len(self.tasks) and self.arrivals_left == 0:
                break
            time_s, _seq, kind, payload = heapq.heappop(self._heap)
            self.now = time_s
            if max_time is not None and self.now > max_time:
                break
            if kind is EventKind.ARRIVAL:
                self._on_arrival(payload)
            elif kind is EventKind.MONITOR_TICK:
                self._on_monitor_tick(payload)
            elif kind is EventKind.FAILURE_START:
                self._on_failure_start(self.devices[payload["device"]], payload["event"])
            elif kind is EventKind.FAILURE_END:
                self._on_failure_end(self.devices[payload["device"]])
            elif kind is EventKind.TASK_DONE:
                self._on_task_done(payload)
            elif kind is EventKind.MIGRATION_DONE:
                self._on_migration_done(payload)
            elif kind is EventKind.CHECKPOINT_DONE:
                self._on_checkpoint_done(payload)
        for task in self.tasks.values():
            if task.status not in TERMINAL:
                task.status = TaskStatus.FAILED
                self.warnings += 1
        if self.config.telemetry_log is not None:
            header = "time_s,device_id,mobility,cpu,network,response,power"
            Path(self.config.telemetry_log).write_text(
                "\n".join([header] + self._telemetry_rows) + "\n", encoding="utf-8"
            )
        diagnostics = {
            "violations": self.violations,
            "deferred_actions": self.deferred_actions,
            "unfinished_tasks": self.warnings,
            "events_processed": self._seq,
        }
        return RunResult(
            config=self.config,
            tasks=[self.tasks[i] for i in sorted(self.tasks)],
            actions=list(self.actions),
            diagnostics=diagnostics,
        )


def run(config: RunConfig, trace: TraceSet | None = None) -> RunResult:
    """Execute one simulation run; deterministic given (config, trace)."""
    return Simulation(config, trace).run()
