import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsc.benchgen import generate
from lsc.frontend import Circuit, Gate, GateKind
from lsc.layout import InvalidArgument, build_layout, place_factories
from lsc.metrics import (
    CSV_COLUMNS,
    BlockKind,
    MismatchedInputs,
    baseline_block,
    compute_metrics,
    lower_bound,
)
from lsc.pipeline import compile_circuit
from lsc.schedule import GATE, Schedule, ScheduledOp
from lsc.scheduler import SchedulerConfig


@pytest.mark.parametrize("args,expected", [((280, 11, 1), 3080), ((0, 11, 4), 0), ((540, 11, 2), 2970),
                                           ((3, 5.5, 2), Fraction(33, 4))])
def test_lower_bound(args, expected):
    assert lower_bound(*args) == expected


@pytest.mark.parametrize("args", [(10, 11, 0), (10, 0, 1), (-1, 11, 1)])
def test_lower_bound_rejects(args):
    with pytest.raises(InvalidArgument):
        lower_bound(*args)


@given(st.integers(0, 10_000), st.integers(1, 40), st.integers(1, 16), st.integers(2, 5))
def test_lower_bound_linear(n_t, half_d, n, k):
    t = Fraction(half_d, 2)
    assert lower_bound(k * n_t, t, n) == k * lower_bound(n_t, t, n)
    assert lower_bound(n_t, t, k * n) * k == lower_bound(n_t, t, n)


def _fixed_schedule(g, c, end_tick):
    op = ScheduledOp(GATE, ((1, 1), (0, 1)), end_tick - 6, 6, gate=0)
    return Schedule([op], g, c, {0: (1, 1)})


def test_spacetime_arithmetic():
    g = place_factories(build_layout(10, 4), 1)
    c = Circuit(100, [Gate(GateKind.H, (0,))])
    s = _fixed_schedule(g, c, 200)
    m = compute_metrics(s, s, g, c, SchedulerConfig())
    assert m.exec_time_d == 100
    assert (m.spacetime_excl, m.spacetime_incl) == (14400, 15500)
    assert m.lower_bound_d == 0 and m.cpi_d == 100


def test_mismatched_inputs():
    g = place_factories(build_layout(10, 4), 1)
    c = Circuit(100, [Gate(GateKind.H, (0,))])
    other = Circuit(100, [Gate(GateKind.H, (1,))])
    s = _fixed_schedule(g, c, 10)
    with pytest.raises(MismatchedInputs):
        compute_metrics(s, s, g, other, SchedulerConfig())
    with pytest.raises(MismatchedInputs):
        compute_metrics(s, s, build_layout(10, 6), c, SchedulerConfig())
    with pytest.raises(MismatchedInputs):
        compute_metrics(s, s, g, c, SchedulerConfig(n_msf=2))


def test_t_free_circuit():
    c = Circuit(3, [Gate(GateKind.H, (0,)), Gate(GateKind.CNOT, (0, 1)), Gate(GateKind.CNOT, (1, 2))])
    res = compile_circuit(c, r=2)
    assert res.ok
    assert res.metrics.lower_bound_d == 0 and res.metrics.exec_time_d > 0


@pytest.mark.parametrize("model,L,r,n", [("ising", 4, 3, 1), ("heisenberg", 2, 2, 2), ("fermihubbard", 4, 4, 4)])
def test_report_identities(model, L, r, n):
    c = generate(model, L)
    res = compile_circuit(c, r=r, n_msf=n)
    m = res.metrics
    assert res.ok
    # independent recomputation from the raw schedule and layout
    exec_d = max(max(op.end for op in res.schedule.ops), max(op.place or 0 for op in res.schedule.ops)) / 2
    cells = res.layout.rows * res.layout.cols
    assert m.exec_time_d == exec_d
    assert m.qubits_excl_factories == cells and m.qubits_incl_factories == cells + 11 * n
    assert m.spacetime_excl == cells * exec_d
    assert m.spacetime_incl == (cells + 11 * n) * exec_d
    assert m.cpi_d == exec_d / len(c.gates)
    assert m.lower_bound_d == m.n_T * 11 / n
    assert m.lower_bound_d <= m.unit_cost_time_d <= m.exec_time_d
    assert m.spacetime_incl_per_gate == m.spacetime_incl / len(c.gates)


def test_report_json():
    res = compile_circuit(generate("ising", 2), r=2)
    d = json.loads(res.metrics.dumps())
    assert {"exec_time_d", "unit_cost_time_d", "lower_bound_d", "spacetime_excl", "cpi_d"} <= d.keys()
    row = res.metrics.csv_row("ising", 2)
    assert tuple(row) == CSV_COLUMNS


@pytest.mark.parametrize("kind,qubits,depth", [("compact", 303, 4), ("intermediate", 400, 3), ("fast", 406, 3)])
def test_block_qubits(kind, qubits, depth):
    b = baseline_block(kind, 100, 280, 1, 11)
    assert (b.qubits, b.ppr_depth_d) == (qubits, depth)
    assert b.time_d == 3080 == lower_bound(280, 11, 1)


def test_block_examples():
    compact = baseline_block(BlockKind.COMPACT, 100, 280, 1, 11)
    assert compact.spacetime == 933_240
    inter = baseline_block(BlockKind.INTERMEDIATE, 100, 280, 8, 11)
    assert inter.time_d == 840 and inter.spacetime == 400 * 840
    with pytest.raises(InvalidArgument):
        baseline_block("fast", 0, 1, 1, 11)
    with pytest.raises(ValueError):
        baseline_block("huge", 10, 1, 1, 11)


@given(st.sampled_from(list(BlockKind)), st.integers(1, 500), st.integers(0, 2000), st.integers(1, 16))
def test_block_time_is_lower_bound_when_distillation_dominates(kind, n, n_t, n_msf):
    b = baseline_block(kind, n, n_t, n_msf, 11)
    lb = lower_bound(n_t, 11, n_msf)
    assert b.time_d == max(lb, n_t * b.ppr_depth_d)
    if n_t * b.ppr_depth_d <= lb:
        assert b.time_d == lb
