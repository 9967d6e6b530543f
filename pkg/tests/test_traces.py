"""Trace parsing, normalization round-trips and synthetic generation."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from fogsim.errors import TraceFormatError
from fogsim.traces import (
    FailureCategory,
    FailureEvent,
    TraceSet,
    map_category,
    merge_intervals,
    parse_lanl,
    parse_normalized_csv,
    synthesize,
    to_normalized_csv,
)


def write(tmp_path, text, name="trace.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


LANL_HEADER = "node,start,end,category\n"


class TestParseLanl:
    def test_single_row(self, tmp_path):
        path = write(tmp_path, LANL_HEADER + "7,100,200,CPU\n")
        result = parse_lanl(path)
        assert len(result.trace.events) == 1
        event = result.trace.events[0]
        assert (event.node_id, event.start_s, event.end_s) == (7, 100, 200)
        assert event.category is FailureCategory.CPU
        assert result.dropped_rows == 0

    def test_overlap_merged(self, tmp_path):
        path = write(tmp_path, LANL_HEADER + "3,100,200,CPU\n3,150,250,Software\n")
        result = parse_lanl(path)
        assert len(result.trace.events) == 1
        event = result.trace.events[0]
        assert (event.start_s, event.end_s) == (100, 250)
        # earliest record's category survives the merge
        assert event.category is FailureCategory.CPU
        assert result.merged_away == 1

    def test_end_before_start_dropped(self, tmp_path):
        path = write(tmp_path, LANL_HEADER + "1,200,100,CPU\n1,300,400,CPU\n")
        result = parse_lanl(path)
        assert result.dropped_rows == 1
        assert len(result.trace.events) == 1

    def test_malformed_row_names_line(self, tmp_path):
        path = write(tmp_path, LANL_HEADER + "1,100,200,CPU\n1,abc,300,CPU\n")
        with pytest.raises(TraceFormatError, match=":3"):
            parse_lanl(path)

    def test_empty_file(self, tmp_path):
        with pytest.raises(TraceFormatError, match="empty"):
            parse_lanl(write(tmp_path, ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(TraceFormatError, match="no failure records"):
            parse_lanl(write(tmp_path, LANL_HEADER))

    def test_missing_column(self, tmp_path):
        with pytest.raises(TraceFormatError, match="failure end"):
            parse_lanl(write(tmp_path, "node,start,category\n1,10,CPU\n"))

    def test_alternate_headers(self, tmp_path):
        path = write(tmp_path, "nodenum,prob_started,prob_fixed,reason\n4,10,20,Network\n")
        result = parse_lanl(path)
        assert result.trace.events[0].category is FailureCategory.NETWORK

    def test_float_times_truncated_to_seconds(self, tmp_path):
        path = write(tmp_path, LANL_HEADER + "1,10.7,20.2,CPU\n")
        event = parse_lanl(path).trace.events[0]
        assert (event.start_s, event.end_s) == (10, 20)


class TestCategoryMapping:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("CPU", FailureCategory.CPU),
            ("processor", FailureCategory.CPU),
            ("Power Outage", FailureCategory.POWER),
            ("network failure", FailureCategory.NETWORK),
            ("DIMM", FailureCategory.MEMORY),
            ("OS", FailureCategory.SOFTWARE),
            ("Hardware", FailureCategory.UNKNOWN),
            ("Human Error", FailureCategory.UNKNOWN),
            ("Undetermined", FailureCategory.UNKNOWN),
        ],
    )
    def test_lookup(self, raw, expected):
        assert map_category(raw) is expected


class TestNormalizedFormat:
    def test_empty_set_header_only(self, tmp_path):
        path = tmp_path / "out.csv"
        to_normalized_csv(TraceSet.build([]), path)
        assert path.read_text() == "node_id,start_s,end_s,category\n"

    def test_three_events_four_lines(self, tmp_path):
        trace = TraceSet.build(
            [
                FailureEvent(10, 20, 1, FailureCategory.CPU),
                FailureEvent(30, 40, 1, FailureCategory.POWER),
                FailureEvent(5, 9, 2, FailureCategory.UNKNOWN),
            ]
        )
        path = tmp_path / "out.csv"
        to_normalized_csv(trace, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0] == "node_id,start_s,end_s,category"
        assert lines[1] == "2,5,9,UNKNOWN"

    def test_round_trip_identity(self, tmp_path):
        trace = TraceSet.build(
            [
                FailureEvent(10, 20, 1, FailureCategory.CPU),
                FailureEvent(25, 40, 1, FailureCategory.SOFTWARE),
                FailureEvent(5, 9, 2, FailureCategory.UNKNOWN),
            ]
        )
        path = tmp_path / "out.csv"
        to_normalized_csv(trace, path)
        assert parse_normalized_csv(path) == trace

    def test_schema_mismatch_names_column(self, tmp_path):
        path = write(tmp_path, "node_id,begin,end_s,category\n")
        with pytest.raises(TraceFormatError, match="start_s"):
            parse_normalized_csv(path)

    def test_bad_category_rejected(self, tmp_path):
        path = write(tmp_path, "node_id,start_s,end_s,category\n1,10,20,GREMLINS\n")
        with pytest.raises(TraceFormatError, match="GREMLINS"):
            parse_normalized_csv(path)

    def test_non_integer_rejected(self, tmp_path):
        path = write(tmp_path, "node_id,start_s,end_s,category\n1,10.5,20,CPU\n")
        with pytest.raises(TraceFormatError, match=":2"):
            parse_normalized_csv(path)


@st.composite
def trace_sets(draw):
    events = []
    for node in range(draw(st.integers(min_value=0, max_value=4))):
        t = 0
        for _ in range(draw(st.integers(min_value=0, max_value=5))):
            t += draw(st.integers(min_value=1, max_value=1000))
            duration = draw(st.integers(min_value=1, max_value=500))
            events.append(
                FailureEvent(t, t + duration, node, draw(st.sampled_from(list(FailureCategory))))
            )
            t += duration
    return TraceSet.build(events)


@settings(max_examples=60, deadline=None)
@given(trace_sets())
def test_round_trip_property(tmp_path_factory, trace):
    path = tmp_path_factory.mktemp("rt") / "trace.csv"
    to_normalized_csv(trace, path)
    assert parse_normalized_csv(path) == trace


class TestTraceSet:
    def test_overlap_rejected(self):
        with pytest.raises(TraceFormatError, match="overlapping"):
            TraceSet.build(
                [
                    FailureEvent(10, 30, 1, FailureCategory.CPU),
                    FailureEvent(20, 40, 1, FailureCategory.CPU),
                ]
            )

    def test_roster_must_cover_events(self):
        with pytest.raises(TraceFormatError, match="outside the roster"):
            TraceSet.build([FailureEvent(1, 2, 9, FailureCategory.CPU)], nodes=[0, 1])

    def test_origin_and_span(self):
        trace = TraceSet.build(
            [
                FailureEvent(100, 150, 0, FailureCategory.CPU),
                FailureEvent(300, 500, 1, FailureCategory.CPU),
            ]
        )
        assert trace.origin == 100
        assert trace.span == 400

    def test_window_shift_and_clip(self):
        trace = TraceSet.build(
            [
                FailureEvent(100, 150, 0, FailureCategory.CPU),
                FailureEvent(300, 500, 1, FailureCategory.CPU),
                FailureEvent(900, 950, 0, FailureCategory.CPU),
            ]
        )
        windowed = trace.window(offset_s=0, duration_s=600)
        assert [(e.start_s, e.end_s) for e in windowed.events] == [(0, 50), (200, 400)]

    def test_window_compression(self):
        trace = TraceSet.build([FailureEvent(0, 300, 0, FailureCategory.CPU)])
        compressed = trace.window(compression=30.0)
        assert [(e.start_s, e.end_s) for e in compressed.events] == [(0, 10)]

    def test_window_keeps_roster(self):
        trace = TraceSet.build([FailureEvent(0, 10, 0, FailureCategory.CPU)], nodes=[0, 1, 2])
        assert trace.window(duration_s=5).nodes == (0, 1, 2)

    def test_top_n_failing(self):
        trace = TraceSet.build(
            [
                FailureEvent(0, 10, 0, FailureCategory.CPU),
                FailureEvent(20, 30, 0, FailureCategory.CPU),
                FailureEvent(0, 10, 1, FailureCategory.CPU),
                FailureEvent(50, 60, 2, FailureCategory.CPU),
                FailureEvent(70, 80, 2, FailureCategory.CPU),
                FailureEvent(90, 95, 2, FailureCategory.CPU),
            ]
        )
        top = trace.top_n_failing(2)
        assert top.nodes == (0, 2)
        assert len(top.events) == 5

    def test_merge_never_overlaps(self):
        rng = random.Random(5)
        raw = []
        for _ in range(200):
            start = rng.randrange(0, 5000)
            raw.append(
                FailureEvent(start, start + rng.randrange(1, 300), rng.randrange(3), FailureCategory.CPU)
            )
        merged = merge_intervals(raw)
        by_node = {}
        for event in merged:
            by_node.setdefault(event.node_id, []).append(event)
        for events in by_node.values():
            events.sort(key=lambda e: e.start_s)
            for first, second in zip(events, events[1:]):
                assert second.start_s > first.end_s


class TestSynthesize:
    def test_deterministic(self):
        a = synthesize(10, 100_000, 5000.0, 500.0, seed=3)
        b = synthesize(10, 100_000, 5000.0, 500.0, seed=3)
        assert a == b

    def test_seed_changes_output(self):
        a = synthesize(10, 100_000, 5000.0, 500.0, seed=3)
        b = synthesize(10, 100_000, 5000.0, 500.0, seed=4)
        assert a != b

    def test_zero_nodes_empty(self):
        trace = synthesize(0, 1000, 100.0, 10.0, seed=1)
        assert trace.events == ()
        assert trace.nodes == ()

    def test_node_count_independence(self):
        # adding nodes must not perturb the existing nodes' streams
        small = synthesize(3, 50_000, 2000.0, 100.0, seed=9)
        large = synthesize(6, 50_000, 2000.0, 100.0, seed=9)
        assert [e for e in large.events if e.node_id < 3] == list(small.events)

    def test_downtime_within_span(self):
        trace = synthesize(20, 50_000, 1000.0, 800.0, seed=2)
        for node, downtime in trace.downtime_by_node().items():
            assert downtime <= 50_000
        for event in trace.events:
            assert 0 <= event.start_s < event.end_s <= 50_000

    def test_sparse_failures_with_huge_mtbf(self):
        # mtbf = 10 * span: mean failures per node stays well under 0.3
        span = 10_000
        total = 0
        nodes = 0
        for seed in range(100):
            trace = synthesize(5, span, 10.0 * span, 100.0, seed=seed)
            total += len(trace.events)
            nodes += 5
        assert total / nodes < 0.3

    def test_poisson_count_within_three_sigma(self):
        # counts against the span/mtbf expectation; mttr << mtbf keeps the
        # renewal correction negligible
        span, mtbf, mttr, per_seed_nodes = 1_000_000, 200_000.0, 200.0, 20
        expected = span / mtbf
        counts = []
        for seed in range(100):
            trace = synthesize(per_seed_nodes, span, mtbf, mttr, seed=seed)
            counts.extend(trace.failure_counts().values())
        mean = sum(counts) / len(counts)
        sigma = (expected / len(counts)) ** 0.5
        assert abs(mean - expected) <= 3.0 * sigma

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            synthesize(1, 0, 10.0, 1.0, seed=1)
        with pytest.raises(ValueError):
            synthesize(-1, 10, 10.0, 1.0, seed=1)
