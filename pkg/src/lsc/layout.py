"""Routing-path parameterized grid layouts, initial mappings and factory ports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, NamedTuple

from .frontend import Circuit

Cell = tuple[int, int]

DEFAULT_FACTORY_FOOTPRINT = 11


class CellKind(str, Enum):
    DATA = "D"
    BUS = "B"


class LayoutError(ValueError):
    pass


class InvalidRoutingCount(LayoutError):
    pass


class TooManyQubits(LayoutError):
    pass


class NoBoundaryBus(LayoutError):
    pass


class InvalidArgument(LayoutError):
    pass


def line_counts(r: int) -> tuple[int, int]:
    """Split ``r`` routing paths into (horizontal, vertical) lines.

    Allocation order is top, left, bottom, right, then interior lines
    alternating vertical and horizontal.
    """
    if r <= 4:
        return (r + 1) // 2, r // 2
    return r // 2, (r + 1) // 2


def interior_gaps(L: int, k: int) -> list[int]:
    """Gap indices in 1..L-1 for ``k`` interior lines; gap g sits before data row g."""
    return [(j * L) // (k + 1) for j in range(1, k + 1)]


def _axis(L: int, n_lines: int) -> tuple[list[bool], list[int]]:
    """Bus flags along one axis plus the grid index of each data row/col."""
    first = n_lines >= 1
    last = n_lines >= 2
    gaps = set(interior_gaps(L, n_lines - 2)) if n_lines > 2 else set()
    is_bus: list[bool] = []
    data_idx: list[int] = []
    if first:
        is_bus.append(True)
    for i in range(L):
        if i in gaps:
            is_bus.append(True)
        data_idx.append(len(is_bus))
        is_bus.append(False)
    if last:
        is_bus.append(True)
    return is_bus, data_idx


@dataclass
class GridLayout:
    L: int
    r: int
    rows: int
    cols: int
    bus_rows: list[bool]
    bus_cols: list[bool]
    data_slots: list[Cell]
    factory_ports: list[Cell] = field(default_factory=list)
    factory_footprint: int = DEFAULT_FACTORY_FOOTPRINT
    _nbr: dict[Cell, list[Cell]] = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def h_lines(self) -> int:
        return sum(self.bus_rows)

    @property
    def v_lines(self) -> int:
        return sum(self.bus_cols)

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def n_factories(self) -> int:
        return len(self.factory_ports)

    def kind(self, cell: Cell) -> CellKind:
        r, c = cell
        return CellKind.BUS if self.bus_rows[r] or self.bus_cols[c] else CellKind.DATA

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def cells(self) -> Iterator[Cell]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield (r, c)

    def neighbours(self, cell: Cell) -> list[Cell]:
        """In-bounds 4-neighbours in (row, col) order."""
        out = self._nbr.get(cell)
        if out is None:
            r, c = cell
            out = [x for x in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)) if self.in_bounds(x)]
            self._nbr[cell] = out
        return out

    def bus_count(self) -> int:
        return self.n_cells - len(self.data_slots)

    def render(self) -> str:
        ports = set(self.factory_ports)
        lines = []
        for r in range(self.rows):
            row = []
            for c in range(self.cols):
                if (r, c) in ports:
                    row.append("F")
                else:
                    row.append("D" if self.kind((r, c)) is CellKind.DATA else ".")
            lines.append("".join(row))
        return "\n".join(lines)

    def to_json(self, data_positions: dict[int, Cell] | None = None) -> dict:
        runs: list[list] = []
        for cell in self.cells():
            k = self.kind(cell).value
            if runs and runs[-1][0] == k:
                runs[-1][1] += 1
            else:
                runs.append([k, 1])
        return {
            "rows": self.rows,
            "cols": self.cols,
            "r": self.r,
            "cells": runs,
            "data_positions": {str(q): list(c) for q, c in sorted((data_positions or {}).items())},
            "factory_ports": [[i, list(c)] for i, c in enumerate(self.factory_ports)],
        }

    def dumps(self, data_positions: dict[int, Cell] | None = None) -> str:
        return json.dumps(self.to_json(data_positions), sort_keys=True)


def build_layout(L: int, r: int, footprint: int = DEFAULT_FACTORY_FOOTPRINT) -> GridLayout:
    if L < 1:
        raise InvalidArgument(f"L must be >= 1, got {L}")
    if not 2 <= r <= 2 * L + 2:
        raise InvalidRoutingCount(f"routing paths must lie in [2, {2 * L + 2}] for L={L}, got {r}")
    h, v = line_counts(r)
    bus_rows, row_idx = _axis(L, h)
    bus_cols, col_idx = _axis(L, v)
    slots = [(ri, ci) for ri in row_idx for ci in col_idx]
    return GridLayout(L, r, len(bus_rows), len(bus_cols), bus_rows, bus_cols, slots, [], footprint)


def _boundary_sides(g: GridLayout) -> list[list[Cell]]:
    """Bus cells of each boundary in order top, bottom, left, right."""
    sides = []
    if g.bus_rows[0]:
        sides.append([(0, c) for c in range(g.cols)])
    if g.h_lines >= 2 and g.bus_rows[-1]:
        sides.append([(g.rows - 1, c) for c in range(g.cols)])
    if g.bus_cols[0]:
        sides.append([(r, 0) for r in range(g.rows)])
    if g.v_lines >= 2 and g.bus_cols[-1]:
        sides.append([(r, g.cols - 1) for r in range(g.rows)])
    return sides


def _spread(cells: list[Cell], n: int) -> list[Cell]:
    m = len(cells)
    picked = []
    for k in range(1, n + 1):
        cell = cells[(m * k) // (n + 1)]
        if cell not in picked:
            picked.append(cell)
    return picked


def place_factories(g: GridLayout, n_msf: int) -> GridLayout:
    """Return a copy of ``g`` with ``n_msf`` evenly spaced boundary ports.

    Each side first takes at most half of its free cells, so ports do not
    wall off the boundary; any overflow then fills sides completely.
    """
    if n_msf < 1:
        raise InvalidArgument(f"need at least one factory, got {n_msf}")
    sides = _boundary_sides(g)
    ports: list[Cell] = []
    for fill in ("half", "full"):
        for side in sides:
            free = [c for c in side if c not in ports]
            remaining = n_msf - len(ports)
            if remaining <= 0 or not free:
                continue
            if fill == "half":
                already = sum(1 for c in side if c in ports)
                cap = max(0, (len(side) + 1) // 2 - already)
            else:
                cap = len(free)
            take = min(remaining, cap)
            if take:
                ports += _spread(free, take)
    if len(ports) < n_msf:
        raise NoBoundaryBus(f"only {len(ports)} boundary bus cells for {n_msf} factories")
    return replace(g, factory_ports=ports)


def total_qubits(g: GridLayout, include_factories: bool = False) -> int:
    n = g.n_cells
    if include_factories:
        n += g.n_factories * g.factory_footprint
    return n


# --- occupancy ----------------------------------------------------------------

class Occupant(NamedTuple):
    kind: str  # "q" data qubit, "m" magic state
    id: int

    def __str__(self) -> str:
        return f"{self.kind}{self.id}"

    @classmethod
    def parse(cls, text: str) -> Occupant:
        return cls(text[0], int(text[1:]))


def data(q: int) -> Occupant:
    return Occupant("q", q)


def magic(m: int) -> Occupant:
    return Occupant("m", m)


@dataclass
class OccupancyState:
    layout: GridLayout
    cell_of: dict[Occupant, Cell] = field(default_factory=dict)
    at: dict[Cell, Occupant] = field(default_factory=dict)

    def copy(self) -> OccupancyState:
        return OccupancyState(self.layout, dict(self.cell_of), dict(self.at))

    def place(self, occ: Occupant, cell: Cell) -> None:
        if cell in self.at:
            raise ValueError(f"cell {cell} already holds {self.at[cell]}")
        if occ in self.cell_of:
            raise ValueError(f"{occ} already placed")
        self.at[cell] = occ
        self.cell_of[occ] = cell

    def remove(self, occ: Occupant) -> Cell:
        cell = self.cell_of.pop(occ)
        del self.at[cell]
        return cell

    def move(self, occ: Occupant, dst: Cell) -> None:
        if dst in self.at:
            raise ValueError(f"cell {dst} already holds {self.at[dst]}")
        src = self.cell_of[occ]
        del self.at[src]
        self.at[dst] = occ
        self.cell_of[occ] = dst

    def is_empty(self, cell: Cell) -> bool:
        return cell not in self.at

    def holds_data(self, cell: Cell) -> bool:
        o = self.at.get(cell)
        return o is not None and o.kind == "q"

    def holds_magic(self, cell: Cell) -> bool:
        o = self.at.get(cell)
        return o is not None and o.kind == "m"

    def qubit_cell(self, q: int) -> Cell:
        return self.cell_of[data(q)]

    def mapping(self) -> dict[int, Cell]:
        return {o.id: c for o, c in self.cell_of.items() if o.kind == "q"}

    def check(self) -> None:
        assert len(self.at) == len(self.cell_of)
        for o, c in self.cell_of.items():
            assert self.at[c] == o

    def render(self) -> str:
        g = self.layout
        ports = set(g.factory_ports)
        lines = []
        for r in range(g.rows):
            row = []
            for c in range(g.cols):
                o = self.at.get((r, c))
                if o is None:
                    row.append("F" if (r, c) in ports else ".")
                else:
                    row.append("D" if o.kind == "q" else "m")
            lines.append("".join(row))
        return "\n".join(lines)


def snake_order(g: GridLayout) -> list[Cell]:
    rows: dict[int, list[Cell]] = {}
    for cell in g.data_slots:
        rows.setdefault(cell[0], []).append(cell)
    out = []
    for i, r in enumerate(sorted(rows)):
        row = sorted(rows[r], key=lambda c: c[1])
        out += row if i % 2 == 0 else row[::-1]
    return out


def initial_mapping(c: Circuit | int, g: GridLayout, mode: str = "grid2d") -> OccupancyState:
    n = c.n_qubits if isinstance(c, Circuit) else c
    if n > len(g.data_slots):
        raise TooManyQubits(f"{n} qubits do not fit in {len(g.data_slots)} data slots")
    if mode == "grid2d":
        order = g.data_slots
    elif mode == "snake1d":
        order = snake_order(g)
    else:
        raise InvalidArgument(f"unknown mapping mode {mode!r}")
    occ = OccupancyState(g)
    for q in range(n):
        occ.place(data(q), order[q])
    return occ
