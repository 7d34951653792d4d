import pytest

from lsc.benchgen import generate
from lsc.frontend import Circuit, Gate, GateKind, build_dag, count_t_states
from lsc.layout import NoBoundaryBus, OccupancyState, build_layout, data, initial_mapping, place_factories
from lsc.schedule import CONSUME, DISTILL, GATE, MOVE, LatencyModel, validate_schedule
from lsc.scheduler import (
    SchedulerConfig,
    Unplaceable,
    plan_gate_placement,
    schedule,
)

K = GateKind


def occupancy(layout, cells):
    occ = OccupancyState(layout)
    for q, cell in enumerate(cells):
        occ.place(data(q), cell)
    return occ


def test_latency_model_consistency():
    lat = LatencyModel()
    assert lat.t_consume == lat.mzz + lat.s
    assert LatencyModel.with_distill_d(11).distill_period == 22
    with pytest.raises(ValueError):
        LatencyModel.with_distill_d(10.2)
    with pytest.raises(ValueError):
        LatencyModel(distill_period=0)
    assert LatencyModel().unit().cnot == 2 and LatencyModel().unit().pauli == 0


def test_empty_circuit():
    s = schedule(Circuit(4, []), build_layout(2, 2))
    assert s.makespan == 0 and s.ops == []


def test_cnot_in_legal_configuration():
    g = build_layout(2, 2)
    occ = occupancy(g, [(1, 1), (2, 2)])
    c = Circuit(2, [Gate(K.CNOT, (0, 1))])
    plan = plan_gate_placement(c.gates[0], occ)
    assert plan.cells == ((1, 1), (2, 1), (2, 2)) and plan.moves == []
    s = schedule(c, g, occ=occ)
    assert s.makespan == 4
    assert validate_schedule(s).ok


def test_single_t_gate():
    # the landing cell above qubit 1 is one hop from the single port at the top centre
    g = build_layout(2, 2)
    c = Circuit(2, [Gate(K.T, (1,))])
    s = schedule(c, g)
    assert s.layout.factory_ports == [(0, 1)]
    assert s.initial[1] == (1, 2)
    assert s.makespan == 22 + 2 + 5
    assert [op.kind for op in s.ops] == [DISTILL, MOVE, CONSUME]
    assert validate_schedule(s).ok


def test_h_on_packed_grid_is_unplaceable():
    g = build_layout(2, 2)
    occ = occupancy(g, [(r, c) for r in range(3) for c in range(3)])
    with pytest.raises(Unplaceable):
        plan_gate_placement(Gate(K.H, (4,)), occ)


def test_pairs_step_into_diagonal_together():
    # one row of qubits under the top bus row, everything else packed
    L = 6
    g = build_layout(L, 2)
    row = [(1, c) for c in range(1, L + 1)]
    rest = [(r, c) for r in range(2, L + 1) for c in range(1, L + 1)]
    occ = occupancy(g, row + rest)
    c = Circuit(L * L, [Gate(K.CNOT, (0, 1)), Gate(K.CNOT, (2, 3)), Gate(K.CNOT, (4, 5))])
    for gate in c.gates:
        plan = plan_gate_placement(gate, occ)
        # one partner steps up into the bus row, leaving a diagonal pair around a free ancilla
        (m,) = plan.moves
        assert m.occupant in {data(q) for q in gate.operands} and m.dst[0] == 0
    s = schedule(c, g, occ=occ)
    moves = [op for op in s.ops if op.kind == MOVE]
    assert len(moves) == 3 and {op.start for op in moves} == {0}
    assert s.makespan == 2 + 4
    assert validate_schedule(s).ok


@pytest.mark.parametrize("model,L,r,n", [("ising", 2, 2, 1), ("ising", 4, 3, 2), ("heisenberg", 2, 4, 2),
                                         ("fermihubbard", 4, 2, 4), ("ising", 4, 10, 1)])
def test_benchmarks_validate(model, L, r, n):
    c = generate(model, L)
    s = schedule(c, build_layout(L, r), SchedulerConfig(n_msf=n))
    rep = validate_schedule(s)
    assert rep.ok, str(rep)
    gates = [op for op in s.ops if op.kind in (GATE, CONSUME)]
    assert sorted(op.gate for op in gates) == list(range(len(c.gates)))
    # conservation: distillations cover every consumption
    assert s.count(DISTILL) >= s.count(CONSUME) == count_t_states(c)
    lb = count_t_states(c) * 22 / n
    assert s.makespan >= lb


@pytest.mark.parametrize("model", ["ising", "heisenberg", "fermihubbard"])
def test_bound_holds_over_every_r_and_factory_count(model):
    c = generate(model, 2)
    for r in range(2, 7):
        for n in range(1, 9):
            try:
                s = schedule(c, build_layout(2, r), SchedulerConfig(n_msf=n))
            except NoBoundaryBus:
                # small grids run out of boundary cells for ports
                assert n > 4
                continue
            assert s.makespan >= count_t_states(c) * 22 / n, (r, n)
            assert validate_schedule(s).ok, (r, n)


def test_dependencies_respected():
    c = generate("heisenberg", 2)
    s = schedule(c, build_layout(2, 3))
    end = {op.gate: op.end for op in s.ops if op.kind in (GATE, CONSUME)}
    start = {op.gate: op.start for op in s.ops if op.kind in (GATE, CONSUME)}
    for a, b in build_dag(c).edges:
        assert end[a] <= start[b]


def test_deterministic():
    c = generate("ising", 4)
    runs = [schedule(c, build_layout(4, 3), SchedulerConfig(n_msf=2)).to_jsonl() for _ in range(2)]
    assert runs[0] == runs[1]


def test_unit_cost_flag():
    c = generate("ising", 2)
    real = schedule(c, build_layout(2, 2))
    unit = schedule(c, build_layout(2, 2), SchedulerConfig(unit_cost=True))
    assert {op.duration for op in unit.ops if op.kind != DISTILL} <= {0, 2}
    assert validate_schedule(unit).ok
    assert unit.makespan <= real.makespan


def test_factory_ports_follow_config():
    c = generate("ising", 2)
    s = schedule(c, place_factories(build_layout(2, 4), 1), SchedulerConfig(n_msf=2))
    assert s.layout.n_factories == 2


def test_data_on_port_rejected():
    g = place_factories(build_layout(2, 2), 1)
    occ = occupancy(g, [(0, 1)])
    with pytest.raises(Unplaceable):
        schedule(Circuit(1, [Gate(K.H, (0,))]), g, occ=occ)


def test_snake_mapping_schedules():
    c = generate("ising", 2)
    g = build_layout(2, 2)
    s = schedule(c, g, SchedulerConfig(mapping="snake1d"))
    assert s.initial == {q: initial_mapping(c, g, "snake1d").qubit_cell(q) for q in range(c.n_qubits)}
    assert validate_schedule(s).ok


@pytest.mark.xfail(strict=False, reason="greedy routing: extra ports and states in flight can congest the grid "
                                        "enough to outweigh the added distillation capacity")
@pytest.mark.parametrize("model,L,r", [("heisenberg", 2, 4), ("fermihubbard", 4, 2), ("ising", 4, 3)])
def test_doubling_factories_never_slows_down(model, L, r):
    c = generate(model, L)
    spans = [schedule(c, build_layout(L, r), SchedulerConfig(n_msf=n)).makespan for n in (1, 2, 4)]
    assert spans == sorted(spans, reverse=True)
