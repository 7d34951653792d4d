import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsc.benchgen import generate
from lsc.frontend import GateKind
from lsc.layout import (
    CellKind,
    InvalidArgument,
    InvalidRoutingCount,
    NoBoundaryBus,
    OccupancyState,
    TooManyQubits,
    build_layout,
    data,
    initial_mapping,
    interior_gaps,
    line_counts,
    magic,
    place_factories,
    total_qubits,
)


@pytest.mark.parametrize("L,r,side,cells", [(10, 4, 12, 144), (10, 6, 13, 169), (10, 22, 21, 441)])
def test_cell_counts(L, r, side, cells):
    g = build_layout(L, r)
    assert (g.rows, g.cols, g.n_cells) == (side, side, cells)


def test_first_panel_has_top_and_left_bus():
    g = build_layout(4, 2)
    assert g.n_cells == 25
    assert g.render().splitlines() == [".....", ".DDDD", ".DDDD", ".DDDD", ".DDDD"]


def test_allocation_order():
    assert [line_counts(r) for r in range(2, 9)] == [(1, 1), (2, 1), (2, 2), (2, 3), (3, 3), (3, 4), (4, 4)]
    # r = 3 adds the bottom row, r = 4 the right column, r = 5 an interior column
    assert build_layout(4, 3).render().splitlines()[-1] == "....."
    assert build_layout(4, 4).render().splitlines()[1] == ".DDDD."
    assert build_layout(4, 5).render().splitlines()[1] == ".DD.DD."


@pytest.mark.parametrize("L", [2, 3, 5, 10])
def test_r_bounds(L):
    build_layout(L, 2)
    build_layout(L, 2 * L + 2)
    for bad in (0, 1, 2 * L + 3):
        with pytest.raises(InvalidRoutingCount):
            build_layout(L, bad)


def test_max_r_isolates_every_data_slot():
    g = build_layout(3, 8)
    for (r, c) in g.data_slots:
        assert all(g.kind(n) is CellKind.BUS for n in g.neighbours((r, c)))


@given(st.integers(1, 12), st.data())
def test_layout_invariants(L, d):
    r = d.draw(st.integers(2, 2 * L + 2))
    g = build_layout(L, r)
    h, v = line_counts(r)
    assert h + v == r and abs(h - v) <= 1
    assert g.n_cells == (L + h) * (L + v)
    assert len(g.data_slots) == L * L == len(set(g.data_slots))
    assert sum(g.bus_rows) == h and sum(g.bus_cols) == v
    # routing lines are full rows/columns of bus cells
    for row in range(g.rows):
        if g.bus_rows[row]:
            assert all(g.kind((row, c)) is CellKind.BUS for c in range(g.cols))
    for col in range(g.cols):
        if g.bus_cols[col]:
            assert all(g.kind((row, col)) is CellKind.BUS for row in range(g.rows))


@given(st.integers(1, 12))
def test_cells_non_decreasing_in_r(L):
    counts = [build_layout(L, r).n_cells for r in range(2, 2 * L + 3)]
    assert counts == sorted(counts)


def test_interior_lines_maximise_min_spacing():
    for L in range(2, 12):
        for k in range(1, L):
            gaps = interior_gaps(L, k)
            assert len(set(gaps)) == k and all(1 <= x <= L - 1 for x in gaps)
            segments = [b - a for a, b in zip([0] + gaps, gaps + [L])]
            assert min(segments) == L // (k + 1)


@pytest.mark.parametrize("r", [3, 4])
def test_data_to_ancilla_ratio(r):
    g = build_layout(10, r)
    ratio = len(g.data_slots) / g.bus_count()
    assert 2.0 <= ratio <= 3.2


def test_single_port_at_top_centre():
    g = place_factories(build_layout(10, 4), 1)
    assert g.factory_ports == [(0, 6)]


def test_four_ports_evenly_spaced():
    g = place_factories(build_layout(10, 4), 4)
    assert g.factory_ports == [(0, 12 * k // 5) for k in range(1, 5)]


def test_ports_spill_to_bottom_then_sides():
    g = place_factories(build_layout(4, 4), 8)
    rows = [p[0] for p in g.factory_ports]
    assert rows[:3] == [0, 0, 0] and g.rows - 1 in rows
    assert len(set(g.factory_ports)) == 8
    for p in g.factory_ports:
        assert g.kind(p) is CellKind.BUS
        assert p[0] in (0, g.rows - 1) or p[1] in (0, g.cols - 1)


def test_factory_errors():
    with pytest.raises(InvalidArgument):
        place_factories(build_layout(10, 4), 0)
    with pytest.raises(NoBoundaryBus):
        place_factories(build_layout(2, 2), 6)


def test_total_qubits():
    g = place_factories(build_layout(10, 4), 1)
    assert total_qubits(g) == 144
    assert total_qubits(g, include_factories=True) == 155
    assert total_qubits(build_layout(4, 2)) == 25


def test_grid2d_mapping_row_major():
    g = build_layout(2, 4)
    occ = initial_mapping(4, g)
    assert [occ.qubit_cell(q) for q in range(4)] == g.data_slots


def test_snake_mapping():
    g = build_layout(2, 2)
    occ = initial_mapping(4, g, "snake1d")
    # data coordinates (0,0),(0,1),(1,1),(1,0), offset by the top and left bus lines
    assert [occ.qubit_cell(q) for q in range(4)] == [(1, 1), (1, 2), (2, 2), (2, 1)]


def test_too_many_qubits():
    with pytest.raises(TooManyQubits):
        initial_mapping(5, build_layout(2, 2))
    with pytest.raises(InvalidArgument):
        initial_mapping(4, build_layout(2, 2), "spiral")


def test_grid2d_preserves_lattice_adjacency():
    L = 10
    g = build_layout(L, 4)
    occ = initial_mapping(generate("ising", L), g)
    slot_index = {cell: i for i, cell in enumerate(g.data_slots)}
    cnots = [gate for gate in generate("ising", L).gates if gate.kind is GateKind.CNOT]
    assert len(cnots) == 360
    for gate in cnots:
        a, b = (divmod(slot_index[occ.qubit_cell(q)], L) for q in gate.operands)
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def test_occupancy_operations():
    occ = OccupancyState(build_layout(2, 2))
    occ.place(data(0), (0, 0))
    occ.place(magic(3), (0, 1))
    with pytest.raises(ValueError):
        occ.place(data(1), (0, 0))
    with pytest.raises(ValueError):
        occ.move(data(0), (0, 1))
    occ.move(data(0), (1, 0))
    assert occ.holds_data((1, 0)) and occ.holds_magic((0, 1)) and occ.is_empty((0, 0))
    assert occ.remove(magic(3)) == (0, 1)
    occ.check()
    assert str(magic(3)) == "m3" and type(magic(3)).parse("q7") == data(7)


def test_json_export():
    g = place_factories(build_layout(2, 2), 1)
    d = json.loads(g.dumps({0: (1, 1)}))
    assert d["rows"] == 3 and d["cols"] == 3 and d["r"] == 2
    assert d["cells"] == [["B", 4], ["D", 2], ["B", 1], ["D", 2]]
    assert d["data_positions"] == {"0": [1, 1]}
    assert d["factory_ports"] == [[0, [0, 1]]]
