"""Schedule data model, JSONL I/O, replay validation and redundant-move removal.

Time is counted in ticks of half a code distance, so every latency in the
instruction set is an integer.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable

from .frontend import Circuit, DependencyGraph, GateKind, build_dag
from .layout import Cell, GridLayout, Occupant, OccupancyState, data, magic

TICKS_PER_D = 2


@dataclass(frozen=True)
class LatencyModel:
    move: int = 2
    mzz: int = 2
    mxx: int = 2
    cnot: int = 4
    h: int = 6
    s: int = 3
    t_consume: int = 5
    pauli: int = 0
    distill_period: int = 22

    def __post_init__(self) -> None:
        for name, v in vars(self).items():
            if v < 0:
                raise ValueError(f"{name} latency must be >= 0")
        if self.distill_period <= 0:
            raise ValueError("distill_period must be positive")

    @classmethod
    def with_distill_d(cls, t_msf_d: float, **kw) -> LatencyModel:
        ticks = t_msf_d * TICKS_PER_D
        if abs(ticks - round(ticks)) > 1e-9:
            raise ValueError(f"t_MSF must be a multiple of 0.5d, got {t_msf_d}")
        return cls(distill_period=int(round(ticks)), **kw)

    def unit(self) -> LatencyModel:
        """Every grid operation at 1d; Pauli frame updates and distillation unchanged."""
        one = TICKS_PER_D
        return replace(self, move=one, mzz=one, mxx=one, cnot=one, h=one, s=one,
                       t_consume=one if self.t_consume else 0)

    def gate(self, kind: GateKind) -> int:
        if kind is GateKind.CNOT:
            return self.cnot
        if kind is GateKind.H:
            return self.h
        if kind in (GateKind.S, GateKind.SDG, GateKind.SX):
            return self.s
        if kind in (GateKind.X, GateKind.Z):
            return self.pauli
        return self.t_consume

    def to_json(self) -> dict:
        return dict(vars(self))


GATE = "gate"
MOVE = "move"
DISTILL = "distill"
CONSUME = "consume"


@dataclass
class ScheduledOp:
    kind: str
    cells: tuple[Cell, ...]
    start: int
    duration: int
    gate: int | None = None
    occupant: str | None = None
    factory: int | None = None
    magic: int | None = None
    place: int | None = None

    @property
    def end(self) -> int:
        return self.start + self.duration

    def to_json(self) -> dict:
        d: dict = {
            "kind": self.kind,
            "cells": [list(c) for c in self.cells],
            "start_tick": self.start,
            "duration_ticks": self.duration,
        }
        if self.gate is not None:
            d["gate_index"] = self.gate
        for key in ("occupant", "factory", "magic"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        if self.place is not None:
            d["place_tick"] = self.place
        return d

    @classmethod
    def from_json(cls, d: dict) -> ScheduledOp:
        return cls(
            kind=d["kind"],
            cells=tuple(tuple(c) for c in d["cells"]),
            start=int(d["start_tick"]),
            duration=int(d["duration_ticks"]),
            gate=d.get("gate_index"),
            occupant=d.get("occupant"),
            factory=d.get("factory"),
            magic=d.get("magic"),
            place=d.get("place_tick"),
        )


@dataclass
class Schedule:
    ops: list[ScheduledOp]
    layout: GridLayout
    circuit: Circuit
    initial: dict[int, Cell]
    latency: LatencyModel = field(default_factory=LatencyModel)

    @property
    def makespan(self) -> int:
        ends = [op.end for op in self.ops]
        ends += [op.place for op in self.ops if op.place is not None]
        return max(ends, default=0)

    @property
    def makespan_d(self) -> float:
        return self.makespan / TICKS_PER_D

    def count(self, kind: str) -> int:
        return sum(1 for op in self.ops if op.kind == kind)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(op.to_json(), sort_keys=True) + "\n" for op in self.ops)

    @staticmethod
    def ops_from_jsonl(text: str) -> list[ScheduledOp]:
        return [ScheduledOp.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]


# --- validation -----------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # exclusivity | dag | placement | conservation | duration | completeness
    message: str
    op: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(1 for v in self.violations if v.kind == kind)

    def add(self, kind: str, message: str, op: int | None = None) -> None:
        self.violations.append(Violation(kind, message, op))

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(f"[{v.kind}] op {v.op}: {v.message}" for v in self.violations)


def _adjacent(a: Cell, b: Cell) -> bool:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def _vertical(a: Cell, b: Cell) -> bool:
    return a[1] == b[1] and abs(a[0] - b[0]) == 1


def _horizontal(a: Cell, b: Cell) -> bool:
    return a[0] == b[0] and abs(a[1] - b[1]) == 1


def _check_exclusivity(ops: list[ScheduledOp], rep: ValidationReport) -> None:
    per_cell: dict[Cell, list[tuple[int, int, int]]] = defaultdict(list)
    for i, op in enumerate(ops):
        if op.duration == 0:
            continue
        for c in op.cells:
            per_cell[c].append((op.start, op.end, i))
    for c, ivs in sorted(per_cell.items()):
        ivs.sort()
        latest_end, latest_op = -1, -1
        for s, e, i in ivs:
            if s < latest_end:
                rep.add("exclusivity", f"ops {latest_op} and {i} both reserve {c}", i)
            if e > latest_end:
                latest_end, latest_op = e, i


def _order(ops: list[ScheduledOp]) -> list[tuple[int, int, int]]:
    """Replay events: (tick, phase, op index); phase 0 places a magic state, 1 starts an op."""
    ev = [(op.start, 1, i) for i, op in enumerate(ops) if op.kind != DISTILL]
    ev += [(op.place, 0, i) for i, op in enumerate(ops) if op.kind == DISTILL and op.place is not None]
    ev.sort()
    return ev


def validate_schedule(s: Schedule, dag: DependencyGraph | None = None) -> ValidationReport:
    rep = ValidationReport()
    c, g, lat = s.circuit, s.layout, s.latency
    dag = dag or build_dag(c)
    ops = s.ops
    _check_exclusivity(ops, rep)

    occ = OccupancyState(g)
    for q, cell in s.initial.items():
        occ.place(data(q), cell)

    gate_op: dict[int, int] = {}
    produced: dict[int, int] = {}
    consumed: set[int] = set()
    intervals: dict[Cell, list[tuple[int, int]]] = defaultdict(list)
    for op in ops:
        for cell in op.cells:
            intervals[cell].append((op.start, op.end))

    for i, op in enumerate(ops):
        if op.kind == MOVE and op.duration != lat.move:
            rep.add("duration", f"move lasts {op.duration}, expected {lat.move}", i)
        elif op.kind == DISTILL and op.duration != lat.distill_period:
            rep.add("duration", f"distillation lasts {op.duration}, expected {lat.distill_period}", i)
        elif op.kind in (GATE, CONSUME) and op.gate is not None and 0 <= op.gate < len(c.gates):
            want = lat.gate(c.gates[op.gate].kind)
            if op.duration != want:
                rep.add("duration", f"gate {op.gate} lasts {op.duration}, expected {want}", i)
        if op.kind == DISTILL:
            if op.magic in produced:
                rep.add("conservation", f"magic state {op.magic} produced twice", i)
            produced[op.magic] = i
            if op.place is not None and op.place < op.end:
                rep.add("conservation", f"magic state {op.magic} placed before distillation ends", i)

    per_factory: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for i, op in enumerate(ops):
        if op.kind == DISTILL and op.factory is not None:
            per_factory[op.factory].append((op.start, op.place if op.place is not None else op.end, i))
    for f, runs in sorted(per_factory.items()):
        runs.sort()
        for (_, held_until, _), (start, _, i) in zip(runs, runs[1:]):
            if start < held_until:
                rep.add("conservation", f"factory {f} restarts before delivering its previous state", i)

    for tick, phase, i in _order(ops):
        op = ops[i]
        if phase == 0:
            port = g.factory_ports[op.factory] if op.factory is not None and op.factory < len(g.factory_ports) else None
            if port is None:
                rep.add("placement", f"distillation {i} names unknown factory {op.factory}", i)
                continue
            if not occ.is_empty(port) or any(s_ < tick < e_ for s_, e_ in intervals[port]):
                rep.add("placement", f"port {port} busy when magic state {op.magic} arrives", i)
                continue
            occ.place(magic(op.magic), port)
            continue

        if op.kind == MOVE:
            if len(op.cells) != 2 or op.occupant is None:
                rep.add("placement", "malformed move", i)
                continue
            src, dst = op.cells
            who = Occupant.parse(op.occupant)
            if occ.cell_of.get(who) != src:
                rep.add("placement", f"{who} is not at {src}", i)
                continue
            if not _adjacent(src, dst) or not occ.is_empty(dst):
                rep.add("placement", f"illegal hop {src}->{dst}", i)
                continue
            occ.move(who, dst)
            continue

        if op.gate is None or not 0 <= op.gate < len(c.gates):
            rep.add("completeness", f"op references unknown gate {op.gate}", i)
            continue
        gi = op.gate
        gate = c.gates[gi]
        if gi in gate_op:
            rep.add("completeness", f"gate {gi} executed twice", i)
        gate_op[gi] = i
        for p in dag.preds[gi]:
            if p in gate_op and ops[gate_op[p]].end > op.start:
                rep.add("dag", f"gate {gi} starts before predecessor {p} ends", i)
            elif p not in gate_op:
                rep.add("dag", f"gate {gi} starts before predecessor {p}", i)
        cells = op.cells
        if op.kind == CONSUME:
            if not gate.needs_magic_state:
                rep.add("conservation", f"gate {gi} does not need a magic state", i)
                continue
            if op.magic not in produced:
                rep.add("conservation", f"magic state {op.magic} for gate {gi} was never distilled", i)
                continue
            if op.magic in consumed:
                rep.add("conservation", f"magic state {op.magic} consumed twice", i)
                continue
            consumed.add(op.magic)
            qcell, land = cells
            if occ.cell_of.get(data(gate.operands[0])) != qcell:
                rep.add("placement", f"qubit {gate.operands[0]} not at {qcell}", i)
            if occ.cell_of.get(magic(op.magic)) != land or not _vertical(qcell, land):
                rep.add("placement", f"magic state {op.magic} not vertically adjacent to target", i)
            else:
                occ.remove(magic(op.magic))
            continue
        if gate.needs_magic_state:
            rep.add("conservation", f"gate {gi} executed without consuming a magic state", i)
            continue
        if gate.kind is GateKind.CNOT:
            if len(cells) != 3:
                rep.add("placement", "CNOT needs control, ancilla and target cells", i)
                continue
            cc, ac, tc = cells
            ctl, tgt = gate.operands
            if occ.cell_of.get(data(ctl)) != cc or occ.cell_of.get(data(tgt)) != tc:
                rep.add("placement", f"CNOT operands not at {cc}/{tc}", i)
            elif not occ.is_empty(ac):
                rep.add("placement", f"CNOT ancilla {ac} occupied", i)
            elif not (_vertical(cc, ac) and _horizontal(ac, tc)):
                rep.add("placement", "CNOT needs ZZ-vertical control and XX-horizontal target", i)
        elif gate.kind is GateKind.H:
            if len(cells) != 2:
                rep.add("placement", "H needs an ancilla cell", i)
                continue
            qc, ac = cells
            if occ.cell_of.get(data(gate.operands[0])) != qc:
                rep.add("placement", f"qubit {gate.operands[0]} not at {qc}", i)
            elif not (_adjacent(qc, ac) and occ.is_empty(ac)):
                rep.add("placement", f"H ancilla {ac} not a free neighbour", i)
        else:
            if occ.cell_of.get(data(gate.operands[0])) != cells[0]:
                rep.add("placement", f"qubit {gate.operands[0]} not at {cells[0]}", i)

    for gi, gate in enumerate(c.gates):
        if gi not in gate_op:
            if gate.needs_magic_state and not produced:
                rep.add("conservation", f"gate {gi} needs a magic state but none was distilled")
            else:
                rep.add("completeness", f"gate {gi} never executed")
    return rep


def render_trace(s: Schedule, every: int = TICKS_PER_D) -> str:
    """ASCII snapshots of the grid, one per ``every`` ticks.

    ``D`` data, ``m`` magic state, ``F`` empty factory port, ``.`` empty
    bus, ``*`` an empty cell reserved by a running op.
    """
    g = s.layout
    occ = OccupancyState(g)
    for q, cell in s.initial.items():
        occ.place(data(q), cell)
    events = _order(s.ops)
    k = 0
    frames = []
    for t in range(0, s.makespan + 1, every):
        while k < len(events) and events[k][0] <= t:
            _, phase, i = events[k]
            op = s.ops[i]
            if phase == 0:
                occ.place(magic(op.magic), g.factory_ports[op.factory])
            elif op.kind == MOVE:
                occ.move(Occupant.parse(op.occupant), op.cells[1])
            elif op.kind == CONSUME:
                occ.remove(magic(op.magic))
            k += 1
        busy = {c for op in s.ops if op.start <= t < op.end for c in op.cells}
        rows = [list(line) for line in occ.render().splitlines()]
        for (r, c) in busy:
            if rows[r][c] in ".F":
                rows[r][c] = "*"
        frames.append(f"t={t / TICKS_PER_D:g}d\n" + "\n".join("".join(row) for row in rows))
    return "\n\n".join(frames) + "\n"


# --- redundant move removal ----------------------------------------------------

def _touches(op: ScheduledOp, cells: Iterable[Cell]) -> bool:
    cs = set(cells)
    return any(c in cs for c in op.cells)


def _actors(op: ScheduledOp, c: Circuit) -> set[str]:
    if op.kind == MOVE:
        return {op.occupant}
    out = set()
    if op.gate is not None:
        out |= {f"q{q}" for q in c.gates[op.gate].operands}
    if op.kind == CONSUME and op.magic is not None:
        out.add(f"m{op.magic}")
    return out


def cancel_inverse_moves(ops: list[ScheduledOp], c: Circuit, layout: GridLayout) -> list[ScheduledOp]:
    """Drop pairs A->B, B->A of one occupant with nothing in between touching A, B or it.

    Passes repeat until a full scan cancels nothing, so pairs exposed by an
    earlier cancellation are caught too.
    """
    arrivals: dict[Cell, list[int]] = defaultdict(list)
    for op in ops:
        if op.kind == DISTILL and op.place is not None:
            arrivals[layout.factory_ports[op.factory]].append(op.place)
    actors = [_actors(op, c) for op in ops]

    def arrival_between(cells: tuple[Cell, ...], lo: int, hi: int) -> bool:
        return any(lo <= t <= hi for x in cells for t in arrivals.get(x, ()))

    seq = sorted(range(len(ops)), key=lambda i: ops[i].start)
    alive = [True] * len(seq)
    changed = True
    while changed:
        changed = False
        for pi, i in enumerate(seq):
            a = ops[i]
            if not alive[pi] or a.kind != MOVE:
                continue
            src, dst = a.cells
            for pj in range(pi + 1, len(seq)):
                if not alive[pj]:
                    continue
                b = ops[seq[pj]]
                if b.kind == MOVE and b.occupant == a.occupant:
                    if b.cells == (dst, src) and not arrival_between((src, dst), a.start, b.start):
                        alive[pi] = alive[pj] = False
                        changed = True
                    break
                if _touches(b, (src, dst)) or a.occupant in actors[seq[pj]]:
                    break
    return [ops[i] for pi, i in enumerate(seq) if alive[pi]]


def retime(ops: list[ScheduledOp], layout: GridLayout, c: Circuit) -> list[ScheduledOp]:
    """Earliest start times preserving the per-cell and per-occupant op order.

    Distillations keep their times; each port arrival acts as a fixed
    event on the port cell.
    """
    events: list[tuple[int, int, int]] = []
    for i, op in enumerate(ops):
        if op.kind == DISTILL:
            if op.place is not None:
                events.append((op.place, 0, i))
        else:
            events.append((op.start, 1, i))
    events.sort()
    cell_free: dict[Cell, int] = defaultdict(int)
    actor_free: dict[str, int] = defaultdict(int)
    out = [replace(op) for op in ops]
    for _, phase, i in events:
        op = ops[i]
        if phase == 0:
            port = layout.factory_ports[op.factory]
            cell_free[port] = max(cell_free[port], op.place)
            actor_free[f"m{op.magic}"] = max(actor_free[f"m{op.magic}"], op.place)
            continue
        actors = _actors(op, c)
        start = max([cell_free[x] for x in op.cells] + [actor_free[a] for a in actors] + [0])
        out[i] = replace(op, start=start)
        end = start + op.duration
        for x in op.cells:
            cell_free[x] = max(cell_free[x], end)
        for a in actors:
            actor_free[a] = max(actor_free[a], end)
    return out


def remove_redundant_moves(s: Schedule) -> Schedule:
    reduced = cancel_inverse_moves(s.ops, s.circuit, s.layout)
    if len(reduced) == len(s.ops):
        return s
    retimed = retime(reduced, s.layout, s.circuit)
    return replace(s, ops=retimed)


def relatency(s: Schedule, lat: LatencyModel) -> Schedule:
    """Same ops in the same per-cell and per-qubit order, timed under ``lat``.

    Distillation times are kept, so ``lat`` must share the distillation
    period of ``s``. With durations no longer than the originals the
    makespan cannot grow.
    """
    if lat.distill_period != s.latency.distill_period:
        raise ValueError("relatency keeps distillation times; periods must match")
    ops = []
    for op in s.ops:
        if op.kind == MOVE:
            ops.append(replace(op, duration=lat.move))
        elif op.kind in (GATE, CONSUME) and op.gate is not None:
            ops.append(replace(op, duration=lat.gate(s.circuit.gates[op.gate].kind)))
        else:
            ops.append(op)
    return replace(s, ops=retime(ops, s.layout, s.circuit), latency=lat)

