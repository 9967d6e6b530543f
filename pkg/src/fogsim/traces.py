"""Failure-trace ingestion, normalization and synthesis.

Supports two on-disk formats:

* LANL-style input: CSV with a header row naming at least the node number,
  failure start, failure end and failure category columns (several common
  header spellings are accepted, times are epoch seconds). Overlapping
  intervals per node are merged and zero/negative-length records dropped.
* Normalized format: exactly the header ``node_id,start_s,end_s,category``,
  integer seconds, upper-case category tokens, LF line endings, no quoting.

Synthetic traces draw per-node exponential up-times (mean ``mtbf_s``) and
repair durations (mean ``mttr_s``) from dedicated per-node streams, so a
trace is fully determined by (nodes, span, mtbf, mttr, seed).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import TraceFormatError

log = logging.getLogger(__name__)


class FailureCategory(str, Enum):
    CPU = "CPU"
    MEMORY = "MEMORY"
    NETWORK = "NETWORK"
    POWER = "POWER"
    SOFTWARE = "SOFTWARE"
    UNKNOWN = "UNKNOWN"


# Lookup from raw LANL-style failure descriptions to the category enum.
# Anything not listed maps to UNKNOWN.
LANL_CATEGORY_MAP: dict[str, FailureCategory] = {
    "CPU": FailureCategory.CPU,
    "CPU FAILURE": FailureCategory.CPU,
    "PROC": FailureCategory.CPU,
    "PROCESSOR": FailureCategory.CPU,
    "MEMORY": FailureCategory.MEMORY,
    "MEM": FailureCategory.MEMORY,
    "DIMM": FailureCategory.MEMORY,
    "NETWORK": FailureCategory.NETWORK,
    "NET": FailureCategory.NETWORK,
    "NETWORK FAILURE": FailureCategory.NETWORK,
    "POWER": FailureCategory.POWER,
    "POWER FAILURE": FailureCategory.POWER,
    "POWER OUTAGE": FailureCategory.POWER,
    "UPS": FailureCategory.POWER,
    "SOFTWARE": FailureCategory.SOFTWARE,
    "SW": FailureCategory.SOFTWARE,
    "OS": FailureCategory.SOFTWARE,
}

_NODE_HEADERS = {"node", "nodenum", "node_id", "nodenumber"}
_START_HEADERS = {"start", "start_s", "prob_started", "failure_start"}
_END_HEADERS = {"end", "end_s", "prob_fixed", "failure_end"}
_CATEGORY_HEADERS = {"category", "reason", "failure_type", "type"}

NORMALIZED_HEADER = "node_id,start_s,end_s,category"


@dataclass(frozen=True, order=True)
class FailureEvent:
    """One unavailability interval of one node, in integer epoch seconds."""

    start_s: int
    end_s: int
    node_id: int
    category: FailureCategory

    def __post_init__(self) -> None:
        if self.end_s <= self.start_s:
            raise ValueError(f"failure event must have end > start, got [{self.start_s}, {self.end_s}]")


@dataclass(frozen=True)
class TraceSet:
    """Events sorted by start time plus the node roster.

    The time origin is the earliest event start and the span the distance to
    the latest end, both 0 for an empty set.
    """

    events: tuple[FailureEvent, ...]
    nodes: tuple[int, ...]

    @classmethod
    def build(cls, events: Iterable[FailureEvent], nodes: Iterable[int] | None = None) -> "TraceSet":
        ordered = tuple(sorted(events, key=lambda e: (e.start_s, e.node_id, e.end_s)))
        seen = sorted({e.node_id for e in ordered})
        roster = tuple(sorted(set(nodes))) if nodes is not None else tuple(seen)
        missing = set(seen) - set(roster)
        if missing:
            raise TraceFormatError(f"events reference nodes outside the roster: {sorted(missing)}")
        last_end: dict[int, int] = {}
        for event in ordered:
            if event.node_id in last_end and event.start_s < last_end[event.node_id]:
                raise TraceFormatError(
                    f"overlapping events for node {event.node_id} at t={event.start_s}"
                )
            last_end[event.node_id] = event.end_s
        return cls(events=ordered, nodes=roster)

    @property
    def origin(self) -> int:
        return self.events[0].start_s if self.events else 0

    @property
    def span(self) -> int:
        return max(e.end_s for e in self.events) - self.origin if self.events else 0

    def for_node(self, node_id: int) -> tuple[FailureEvent, ...]:
        return tuple(e for e in self.events if e.node_id == node_id)

    def failure_counts(self) -> dict[int, int]:
        counts = {node: 0 for node in self.nodes}
        for event in self.events:
            counts[event.node_id] += 1
        return counts

    def downtime_by_node(self) -> dict[int, int]:
        down = {node: 0 for node in self.nodes}
        for event in self.events:
            down[event.node_id] += event.end_s - event.start_s
        return down

    def top_n_failing(self, n: int) -> "TraceSet":
        """Restrict to the n nodes with the most failures (ties by id)."""
        counts = self.failure_counts()
        keep = set(sorted(self.nodes, key=lambda node: (-counts[node], node))[:n])
        return TraceSet.build([e for e in self.events if e.node_id in keep], keep)

    def window(self, offset_s: int = 0, duration_s: int | None = None, compression: float = 1.0) -> "TraceSet":
        """Shift to a zero-based window and optionally compress time.

        Event times become (t - origin - offset) / compression, clipped to
        [0, duration/compression) and rounded to whole seconds; events that
        collapse to zero length are dropped.
        """
        if compression <= 0:
            raise ValueError(f"compression must be > 0, got {compression}")
        base = self.origin + offset_s
        horizon = None if duration_s is None else duration_s / compression
        kept = []
        for event in self.events:
            start = (event.start_s - base) / compression
            end = (event.end_s - base) / compression
            if end <= 0 or (horizon is not None and start >= horizon):
                continue
            start = max(0.0, start)
            if horizon is not None:
                end = min(end, horizon)
            start_i, end_i = int(round(start)), int(round(end))
            if end_i > start_i:
                kept.append(FailureEvent(start_i, end_i, event.node_id, event.category))
        return TraceSet.build(kept, self.nodes)


def merge_intervals(events: Sequence[FailureEvent]) -> list[FailureEvent]:
    """Merge overlapping or touching intervals per node, keeping the earliest
    event's category for each merged run."""
    merged: list[FailureEvent] = []
    by_node: dict[int, list[FailureEvent]] = {}
    for event in sorted(events, key=lambda e: (e.node_id, e.start_s, e.end_s)):
        by_node.setdefault(event.node_id, []).append(event)
    for node in sorted(by_node):
        current = None
        for event in by_node[node]:
            if current is None:
                current = event
            elif event.start_s <= current.end_s:
                if event.end_s > current.end_s:
                    current = FailureEvent(current.start_s, event.end_s, node, current.category)
            else:
                merged.append(current)
                current = event
        if current is not None:
            merged.append(current)
    return merged


@dataclass(frozen=True)
class LanlParseResult:
    trace: TraceSet
    dropped_rows: int
    merged_away: int


def map_category(raw: str) -> FailureCategory:
    return LANL_CATEGORY_MAP.get(raw.strip().upper(), FailureCategory.UNKNOWN)


def _locate(header: list[str], wanted: set[str], label: str, path: str) -> int:
    for i, name in enumerate(header):
        if name.strip().lower() in wanted:
            return i
    raise TraceFormatError(f"{path}: no {label} column in header {header}")


def parse_lanl(path: str | Path) -> LanlParseResult:
    """Parse a LANL-style CSV into a normalized TraceSet.

    Overlapping intervals per node are merged; rows with end <= start are
    dropped (counted and logged); malformed rows raise with their line
    number.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [line for line in lines if line.strip()]
    if not rows:
        raise TraceFormatError(f"{path}: empty trace file")
    header = rows[0].split(",")
    node_col = _locate(header, _NODE_HEADERS, "node number", str(path))
    start_col = _locate(header, _START_HEADERS, "failure start", str(path))
    end_col = _locate(header, _END_HEADERS, "failure end", str(path))
    cat_col = _locate(header, _CATEGORY_HEADERS, "failure category", str(path))
    if len(rows) == 1:
        raise TraceFormatError(f"{path}: no failure records")
    events = []
    dropped = 0
    for lineno, line in enumerate(rows[1:], start=2):
        fields = line.split(",")
        try:
            node = int(fields[node_col])
            start = int(float(fields[start_col]))
            end = int(float(fields[end_col]))
            category = map_category(fields[cat_col])
        except (IndexError, ValueError) as exc:
            raise TraceFormatError(f"{path}:{lineno}: malformed row ({exc})") from exc
        if end <= start:
            dropped += 1
            continue
        events.append(FailureEvent(start, end, node, category))
    if dropped:
        log.warning("%s: dropped %d records with end <= start", path, dropped)
    merged = merge_intervals(events)
    return LanlParseResult(
        trace=TraceSet.build(merged),
        dropped_rows=dropped,
        merged_away=len(events) - len(merged),
    )


def to_normalized_csv(trace: TraceSet, path: str | Path) -> None:
    """Write the bit-exact normalized format (LF endings, no quoting)."""
    out = [NORMALIZED_HEADER]
    for event in trace.events:
        out.append(f"{event.node_id},{event.start_s},{event.end_s},{event.category.value}")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")


def parse_normalized_csv(path: str | Path) -> TraceSet:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TraceFormatError(f"{path}: empty trace file")
    header = lines[0].split(",")
    expected = NORMALIZED_HEADER.split(",")
    for i, name in enumerate(expected):
        if i >= len(header) or header[i] != name:
            found = header[i] if i < len(header) else "<missing>"
            raise TraceFormatError(f"{path}: expected column {name!r}, found {found!r}")
    events = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise TraceFormatError(f"{path}:{lineno}: expected 4 columns, found {len(fields)}")
        try:
            node = int(fields[0])
            start = int(fields[1])
            end = int(fields[2])
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: non-integer field ({exc})") from exc
        try:
            category = FailureCategory(fields[3])
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: unknown category {fields[3]!r}") from exc
        events.append(FailureEvent(start, end, node, category))
    return TraceSet.build(events)


def synthesize(nodes: int, span_s: int, mtbf_s: float, mttr_s: float, seed: int) -> TraceSet:
    """Generate a renewal-process failure trace for ``nodes`` devices.

    Up-times are exponential with mean ``mtbf_s``, repairs exponential with
    mean ``mttr_s`` (at least 1 s), categories uniform over the enum. Each
    node uses its own stream so the result is independent of node count.
    """
    if nodes < 0:
        raise ValueError("nodes must be >= 0")
    if span_s <= 0 or mtbf_s <= 0 or mttr_s <= 0:
        raise ValueError("span_s, mtbf_s and mttr_s must be positive")
    categories = list(FailureCategory)
    events = []
    for node in range(nodes):
        rng = random.Random(f"{seed}:synth:{node}")
        t = 0.0
        while True:
            t += rng.expovariate(1.0 / mtbf_s)
            start = int(round(t))
            if start >= span_s:
                break
            duration = max(1, int(round(rng.expovariate(1.0 / mttr_s))))
            end = min(span_s, start + duration)
            if end > start:
                events.append(FailureEvent(start, end, node, rng.choice(categories)))
            t = start + duration
    return TraceSet.build(events, nodes=range(nodes))
