"""Assertion monitor: timing, statuses, cancellation, $past, oracle parity."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from svaport.errors import UnknownSignalError
from svaport.monitor import Failure, check_assertion, check_assertions
from svaport.sim import Trace
from svaport.sva import parse_assertion

from . import gen, oracles


def make_trace(cycles: int, **values) -> Trace:
    """1-bit nets unless a (width, values) pair is given; clk always present."""
    nets: dict[str, int] = {"clk": 1}
    cols: dict[str, list[int]] = {"clk": [1] * cycles}
    for name, v in values.items():
        if isinstance(v, tuple):
            width, series = v
        else:
            width, series = 1, v
        assert len(series) == cycles
        nets[name] = width
        cols[name] = list(series)
    return Trace("hand_trace", tuple(nets), nets, {}, cols, cycles)


def prop(text: str):
    return parse_assertion(f"assert property (@(posedge clk) {text});")


def test_overlapped_checks_same_cycle():
    trace = make_trace(4, a=[1, 0, 1, 0], b=[1, 0, 0, 1])
    v = check_assertion(trace, prop("a |-> b"))
    assert v.statuses == ["pass", "vacuous_pass", "fail", "vacuous_pass"]
    assert v.failures == [Failure(attempt_cycle=2, fail_cycle=2)]


def test_non_overlapped_checks_next_cycle():
    trace = make_trace(4, a=[1, 0, 1, 0], b=[0, 1, 0, 0])
    v = check_assertion(trace, prop("a |=> b"))
    assert v.statuses == ["pass", "vacuous_pass", "fail", "vacuous_pass"]
    assert v.failures == [Failure(attempt_cycle=2, fail_cycle=3)]


def test_delay_schedules_failure_cycle():
    # antecedent at cycle 1 with ##2 consequent: violation sampled at cycle 3
    trace = make_trace(5, a=[0, 1, 0, 0, 0], b=[0, 0, 0, 0, 0])
    v = check_assertion(trace, prop("a |-> ##2 b"))
    assert v.statuses[1] == "fail"
    assert v.failures == [Failure(attempt_cycle=1, fail_cycle=3)]


def test_multi_step_antecedent():
    trace = make_trace(5, a=[1, 0, 0, 0, 0], b=[0, 0, 1, 0, 0],
                       c=[0, 0, 0, 1, 0])
    v = check_assertion(trace, prop("a ##2 b |-> ##1 c"))
    assert v.statuses[0] == "pass"
    # antecedent incomplete at cycle 1 (a false) -> vacuous
    assert v.statuses[1] == "vacuous_pass"


def test_pending_when_schedule_runs_out():
    trace = make_trace(3, a=[0, 0, 1], b=[0, 0, 0])
    v = check_assertion(trace, prop("a |=> b"))
    assert v.statuses == ["vacuous_pass", "vacuous_pass", "pending"]
    assert v.pending_at_end == 1 and v.failure_count == 0


def test_disable_blocks_attempt_start():
    trace = make_trace(4, a=[1, 1, 1, 1], b=[0, 0, 0, 0],
                       rst=[1, 0, 1, 0])
    v = check_assertion(
        trace, parse_assertion(
            "assert property (@(posedge clk) disable iff (rst) a |-> b);"))
    assert v.statuses == ["not_attempted", "fail", "not_attempted", "fail"]


def test_disable_cancels_in_flight_attempt_silently():
    # attempt at cycle 0 needs cycle 2; reset pulses at cycle 1 -> cancelled
    trace = make_trace(4, a=[1, 0, 0, 0], b=[0, 0, 0, 0],
                       rst=[0, 1, 0, 0])
    v = check_assertion(
        trace, parse_assertion(
            "assert property (@(posedge clk) disable iff (rst) a |-> ##2 b);"))
    assert v.statuses[0] == "not_attempted"
    assert v.failure_count == 0


def test_past_reads_back_and_underflow_warns():
    # $past before cycle 0 reads as 0: y[0]=1 mismatches it, y[0]=0 would not
    trace = make_trace(4, en=[1, 1, 1, 1], x=(4, [3, 5, 7, 9]),
                       y=(4, [1, 3, 5, 7]))
    v = check_assertion(trace, prop("en |-> y == $past(x)"))
    assert v.statuses == ["fail", "pass", "pass", "pass"]
    assert v.past_underflow_warnings == 1  # the cycle-0 read of x[-1]


def test_past_depth_two():
    trace = make_trace(5, en=[0, 0, 1, 1, 1], x=(4, [2, 4, 6, 8, 10]),
                       y=(4, [0, 0, 2, 4, 6]))
    v = check_assertion(trace, prop("en |-> y == $past(x, 2)"))
    assert v.failure_count == 0
    assert v.non_vacuous_passes == 3


def test_verdict_counters_are_consistent():
    trace = make_trace(6, a=[1, 0, 1, 0, 1, 1], b=[1, 1, 0, 0, 0, 0])
    v = check_assertion(trace, prop("a |-> b"))
    assert v.attempts == len([s for s in v.statuses if s != "not_attempted"])
    assert (v.non_vacuous_passes + v.vacuous_passes + v.failure_count
            + v.pending_at_end) == v.attempts
    assert v.failed is (v.failure_count > 0)
    summary = v.summary()
    assert summary["failures"] == v.failure_count
    assert summary["attempts"] == v.attempts


def test_unknown_signal_rejected():
    trace = make_trace(3, a=[0, 0, 0])
    with pytest.raises(UnknownSignalError, match="ghost"):
        check_assertion(trace, prop("a |-> ghost"))
    with pytest.raises(UnknownSignalError, match="clock"):
        check_assertion(
            trace, parse_assertion("assert property (@(posedge ck2) a |-> a);"))


def test_params_resolve_in_assertions():
    nets = {"clk": 1, "op": 2}
    trace = Trace("t", tuple(nets), nets, {"OP_WRITE": 1},
                  {"clk": [1, 1, 1], "op": [0, 1, 2]}, 3)
    v = check_assertion(trace, prop("op == OP_WRITE |-> op != 2"))
    assert v.statuses == ["vacuous_pass", "pass", "vacuous_pass"]


def test_check_assertions_preserves_order():
    trace = make_trace(3, a=[1, 1, 1], b=[1, 1, 1])
    named = [parse_assertion(f"P{i}: assert property (@(posedge clk) a |-> b);")
             for i in range(3)]
    verdicts = check_assertions(trace, named)
    assert [v.name for v in verdicts] == ["P0", "P1", "P2"]


@given(gen.traces())
def test_nonoverlapped_equals_overlapped_with_delay(trace):
    nb = prop("a |=> c")
    ov = prop("a |-> ##1 c")
    x, y = check_assertion(trace, nb), check_assertion(trace, ov)
    assert x.statuses == y.statuses
    assert x.failures == y.failures


@given(gen.traces(), st.data())
def test_monitor_matches_reference(trace, data):
    symbols = {"a": 1, "b": 1, "c": 1, "d": 1, "x": 4, "y": 4}
    a = data.draw(gen.assertions(symbols))
    got = check_assertion(trace, a)
    statuses, failures = oracles.check_reference(trace, a)
    assert got.statuses == statuses
    assert [(f.attempt_cycle, f.fail_cycle) for f in got.failures] == failures
