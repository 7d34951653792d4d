"""Event-driven mapping, routing and scheduling of a circuit onto a grid layout.

Every grid operation reserves its cells for its duration. Data qubits and
magic states move one hop at a time; a hop into a cell held by a data
qubit first shifts that qubit (and any chain behind it) toward the nearest
empty cell. Ready gates are served in priority order (DAG depth, then
program index) and each one claims the cells its plan relies on, so
lower-priority plans route around it.
"""

from __future__ import annotations

import heapq
from collections import deque
import logging
from dataclasses import dataclass, field
from typing import Collection

from .frontend import Circuit, DependencyGraph, Gate, GateKind, build_dag, count_t_states
from .layout import Cell, GridLayout, Occupant, OccupancyState, data, initial_mapping, magic, place_factories
from .router import DEFAULT_PENALTY, Move, NoPath, NoSpace, clearing_moves, find_path, space_search
from .schedule import CONSUME, DISTILL, GATE, MOVE, LatencyModel, Schedule, ScheduledOp

log = logging.getLogger(__name__)

IN_PLACE = (GateKind.S, GateKind.SDG, GateKind.SX, GateKind.X, GateKind.Z)


class Unplaceable(Exception):
    pass


class SchedulingDeadlock(Exception):
    def __init__(self, tick: int, frontier: list[int]) -> None:
        super().__init__(f"no progress possible at tick {tick}; stuck gates {frontier[:10]}")
        self.tick = tick
        self.frontier = frontier


@dataclass(frozen=True)
class SchedulerConfig:
    n_msf: int = 1
    latency: LatencyModel = field(default_factory=LatencyModel)
    unit_cost: bool = False
    mapping: str = "grid2d"
    penalty: int = DEFAULT_PENALTY
    max_candidates: int = 10
    max_failures: int = 4  # failed plans tolerated per event before lower gates wait
    max_in_flight: int | None = None  # states on the grid at once; None means one per routing path
    lookahead: bool = True  # send states toward T gates whose predecessors are ready or running

    @property
    def effective_latency(self) -> LatencyModel:
        return self.latency.unit() if self.unit_cost else self.latency


@dataclass
class PlacementPlan:
    """Cells a gate executes on, plus the hops that bring the grid there.

    ``cells`` follows the op layout: (control, ancilla, target) for CNOT,
    (qubit, ancilla) for H, (qubit, landing) for magic-state consumption.
    """
    cells: tuple[Cell, ...]
    moves: list[Move]
    staged: bool = False  # brings a state near a gate that is not ready yet

    @property
    def n_moves(self) -> int:
        return len(self.moves)

    def touched(self) -> set[Cell]:
        out = set(self.cells)
        for m in self.moves:
            out.add(m.src)
            out.add(m.dst)
        return out

    def held(self) -> set[Cell]:
        """Cells this plan occupies for more than a passing magic-state hop."""
        out = set(self.cells)
        for m in self.moves:
            if m.occupant.kind != "m":
                out.add(m.src)
                out.add(m.dst)
        return out


def _manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _magic_cells(occ: OccupancyState) -> set[Cell]:
    return {c for c, o in occ.at.items() if o.kind == "m"}


def route_occupant(sim: OccupancyState, who: Occupant, dst: Cell, forbidden: Collection[Cell],
                   keep: Collection[Cell] = (), penalty: int = DEFAULT_PENALTY) -> list[Move]:
    """Hops (with clearing shifts) taking ``who`` to ``dst``; applied to ``sim`` in place.

    ``forbidden`` cells are never entered by ``who``; clearing shifts also
    stay off ``keep`` cells.
    """
    src = sim.cell_of[who]
    if src == dst:
        return []
    blocked = set(forbidden) | (_magic_cells(sim) - {src})
    path = find_path(sim, src, dst, blocked, penalty)
    moves: list[Move] = []
    for nxt in path.cells[1:]:
        cur = sim.cell_of[who]
        if not sim.is_empty(nxt):
            if not sim.holds_data(nxt):
                raise NoPath(f"{nxt} holds a magic state")
            shift = clearing_moves(sim, nxt, (set(blocked) | set(keep) | {cur}) - {nxt})
            for m in shift:
                sim.move(m.occupant, m.dst)
            moves += shift
        moves.append(Move(who, cur, nxt))
        sim.move(who, nxt)
    return moves


def _cnot_candidates(occ: OccupancyState, cc: Cell, tc: Cell) -> list[tuple[Cell, Cell, Cell]]:
    g = occ.layout
    out: set[tuple[Cell, Cell, Cell]] = set()
    orient = [(dv, dh) for dv in (-1, 1) for dh in (-1, 1)]
    for anchor in [cc] + g.neighbours(cc):
        for dv, dh in orient:
            a = (anchor[0] + dv, anchor[1])
            out.add((anchor, a, (a[0], a[1] + dh)))
    for anchor in [tc] + g.neighbours(tc):
        for dv, dh in orient:
            a = (anchor[0], anchor[1] - dh)
            out.add(((a[0] - dv, a[1]), a, anchor))
    valid = []
    for C, A, T in out:
        if not all(g.in_bounds(x) for x in (C, A, T)):
            continue
        if C == tc or T == cc or A in (cc, tc):
            continue
        valid.append((C, A, T))
    return sorted(valid)


def _next_partner_cell(q: int, gi: int, circuit: Circuit, dag: DependencyGraph, occ: OccupancyState) -> Cell | None:
    """Cell of the partner in the next CNOT on ``q``, if that is q's next gate."""
    j = dag.next_on.get((gi, q))
    if j is None:
        return None
    g = circuit.gates[j]
    if g.kind is not GateKind.CNOT:
        return None
    other = g.operands[0] if g.operands[1] == q else g.operands[1]
    return occ.qubit_cell(other)


def plan_cnot(occ: OccupancyState, ctl: int, tgt: int, forbidden: Collection[Cell] = (),
              lookahead: tuple[Cell | None, Cell | None] = (None, None),
              penalty: int = DEFAULT_PENALTY, max_candidates: int = 10) -> PlacementPlan:
    cc, tc = occ.qubit_cell(ctl), occ.qubit_cell(tgt)
    forbidden = set(forbidden) - {cc, tc}
    mcells = _magic_cells(occ)
    scored = []
    for C, A, T in _cnot_candidates(occ, cc, tc):
        if {C, A, T} & (forbidden | mcells):
            continue
        lb = _manhattan(cc, C) + _manhattan(tc, T)
        lb += occ.holds_data(A) + (occ.holds_data(C) and C != cc) + (occ.holds_data(T) and T != tc)
        la = sum(_manhattan(x, p) for x, p in zip((C, T), lookahead) if p is not None)
        scored.append((lb, la, (C, A, T)))
    scored.sort()
    best: tuple[int, int, tuple[Cell, Cell, Cell], list[Move]] | None = None
    tried = 0
    for lb, la, (C, A, T) in scored:
        if best is not None and (lb > best[0] or tried >= max_candidates):
            break
        tried += 1
        for first, second in (((ctl, C, tc), (tgt, T, C)), ((tgt, T, cc), (ctl, C, T))):
            sim = occ.copy()
            try:
                moves = route_occupant(sim, data(first[0]), first[1], forbidden | {first[2]}, {A, C, T}, penalty)
                moves += route_occupant(sim, data(second[0]), second[1], forbidden | {second[2]}, {A, second[2]}, penalty)
                moves += clearing_moves(sim, A, forbidden | {C, T})
            except (NoPath, NoSpace):
                continue
            key = (len(moves), la, (C, A, T))
            if best is None or key < (best[0], best[1], best[2]):
                best = (len(moves), la, (C, A, T), moves)
    if best is None:
        raise Unplaceable(f"no CNOT configuration for qubits {ctl}, {tgt}")
    return PlacementPlan(best[2], best[3])


def plan_h(occ: OccupancyState, q: int, forbidden: Collection[Cell] = ()) -> PlacementPlan:
    qc = occ.qubit_cell(q)
    try:
        anc, moves = space_search(occ, qc, forbidden=set(forbidden) | _magic_cells(occ))
    except NoSpace as e:
        raise Unplaceable(str(e)) from e
    return PlacementPlan((qc, anc), moves)


def plan_magic(occ: OccupancyState, q: int, m: int, forbidden: Collection[Cell] = (),
               penalty: int = DEFAULT_PENALTY, max_candidates: int = 10, radius: int = 2) -> PlacementPlan:
    """Bring magic state ``m`` and qubit ``q`` into a vertical pair.

    The qubit may shift up to ``radius`` hops toward the state when that
    saves hops overall; routing the state alone is one of the candidates.
    """
    qc = occ.qubit_cell(q)
    mc = occ.cell_of[magic(m)]
    g = occ.layout
    forbidden = set(forbidden) - {qc}
    mcells = _magic_cells(occ) - {mc}
    scored = []
    for dr in range(-radius, radius + 1):
        for dc in range(-radius + abs(dr), radius - abs(dr) + 1):
            Q = (qc[0] + dr, qc[1] + dc)
            if not g.in_bounds(Q) or Q in forbidden or Q in mcells or Q == mc:
                continue
            for land in ((Q[0] - 1, Q[1]), (Q[0] + 1, Q[1])):
                if not g.in_bounds(land) or land in forbidden or land in mcells:
                    continue
                # data shifts cost hops too, so weigh the qubit's own moves double
                lb = 2 * _manhattan(qc, Q) + _manhattan(mc, land) + occ.holds_data(land) * (land != qc)
                scored.append((lb, Q, land))
    scored.sort()
    best: tuple[int, Cell, Cell, list[Move]] | None = None
    for tried, (lb, Q, land) in enumerate(scored):
        if tried >= max_candidates or (best is not None and lb > 2 * best[0]):
            break
        if Q == qc and land == mc:
            return PlacementPlan((qc, land), [])
        orders = [("m", "q"), ("q", "m")] if Q != qc else [("m",)]
        for order in orders:
            sim = occ.copy()
            moves: list[Move] = []
            try:
                for who in order:
                    if who == "q":
                        moves += route_occupant(sim, data(q), Q, forbidden | {sim.cell_of[magic(m)], land}, {land}, penalty)
                    else:
                        qcur = sim.qubit_cell(q)
                        moves += route_occupant(sim, magic(m), land, forbidden | {qcur, Q}, {qcur, Q}, penalty)
            except (NoPath, NoSpace, ValueError):
                continue
            if sim.qubit_cell(q) != Q or sim.cell_of[magic(m)] != land:
                continue
            if best is None or (len(moves), Q, land) < (best[0], best[1], best[2]):
                best = (len(moves), Q, land, moves)
    if best is None:
        raise Unplaceable(f"no landing cell for magic state {m} next to qubit {q}")
    return PlacementPlan((best[1], best[2]), best[3])


def plan_gate_placement(gate: Gate, occ: OccupancyState, dag: DependencyGraph | None = None,
                        circuit: Circuit | None = None, gate_index: int | None = None,
                        forbidden: Collection[Cell] = (), magic_id: int | None = None,
                        penalty: int = DEFAULT_PENALTY) -> PlacementPlan:
    """Target configuration and hop list for one frontier gate."""
    if gate.kind is GateKind.CNOT:
        la: tuple[Cell | None, Cell | None] = (None, None)
        if dag is not None and circuit is not None and gate_index is not None:
            la = tuple(_next_partner_cell(q, gate_index, circuit, dag, occ) for q in gate.operands)  # type: ignore[assignment]
        return plan_cnot(occ, *gate.operands, forbidden=forbidden, lookahead=la, penalty=penalty)
    if gate.kind is GateKind.H:
        return plan_h(occ, gate.operands[0], forbidden)
    if gate.needs_magic_state:
        if magic_id is None:
            raise Unplaceable("magic-state gate without an assigned state")
        return plan_magic(occ, gate.operands[0], magic_id, forbidden, penalty)
    return PlacementPlan((occ.qubit_cell(gate.operands[0]),), [])


# --- the event loop -------------------------------------------------------------------

@dataclass
class _Factory:
    port: Cell
    finish: int | None = None  # tick the current distillation completes
    op: ScheduledOp | None = None  # distillation whose state is still inside
    out: int | None = None  # delivered state still sitting on the port
    clearing: PlacementPlan | None = None  # hops emptying the port for delivery


class _Run:
    def __init__(self, c: Circuit, g: GridLayout, cfg: SchedulerConfig, occ: OccupancyState) -> None:
        self.c = c
        self.g = g
        self.cfg = cfg
        self.lat = cfg.effective_latency
        self.dag = build_dag(c)
        self.occ = occ
        self.initial = occ.mapping()
        self.busy: dict[Cell, int] = {}
        self.ops: list[ScheduledOp] = []
        self.t = 0
        n = len(c.gates)
        self.missing = [len(p) for p in self.dag.preds]
        self.ready: set[int] = {i for i in range(n) if self.missing[i] == 0}
        # preds not yet ready, started or done; zero for a T gate means a state may head its way
        self.unreleased = [len(p) for p in self.dag.preds]
        self.soon: set[int] = set()
        for i in self.ready:
            self.release(i)
        self.claims: set[Cell] = set()
        self.stage_failed: dict[int, int] = {}
        self.started: set[int] = set()
        self.done = 0
        self.completions: list[tuple[int, int]] = []
        self.plans: dict[int, PlacementPlan] = {}
        self.n_t = count_t_states(c)
        self.produced = 0
        self.delivered = 0
        self.factories = [_Factory(p) for p in g.factory_ports]
        self.assigned: dict[int, int] = {}  # gate -> magic id
        self.ports = set(g.factory_ports)
        self.relaxed = False
        self.version = 0  # bumped on every occupancy change
        self.in_flight_cap = cfg.max_in_flight if cfg.max_in_flight is not None else max(2, g.r)
        self.failed: dict[int, int] = {}  # gate -> earliest tick to retry a failed plan

    # helpers
    def free(self, cell: Cell) -> bool:
        return self.busy.get(cell, 0) <= self.t

    def reserve(self, cells, duration: int) -> None:
        for x in cells:
            self.busy[x] = self.t + duration

    def emit(self, op: ScheduledOp) -> None:
        self.ops.append(op)

    def start_distill(self, f: int) -> None:
        fac = self.factories[f]
        if self.produced >= self.n_t:
            fac.finish, fac.op = None, None
            return
        op = ScheduledOp(DISTILL, (), self.t, self.lat.distill_period, factory=f, magic=self.produced)
        self.produced += 1
        self.emit(op)
        fac.finish, fac.op = self.t + self.lat.distill_period, op

    # phases
    def complete(self) -> bool:
        progressed = False
        while self.completions and self.completions[0][0] <= self.t:
            _, gi = heapq.heappop(self.completions)
            self.done += 1
            progressed = True
            for j in self.dag.succs[gi]:
                self.missing[j] -= 1
                if self.missing[j] == 0:
                    self.ready.add(j)
                    self.soon.discard(j)
                    self.release(j)
        return progressed

    def clear_port(self, fac: _Factory) -> bool:
        """Shift a data qubit off a port whose factory holds a finished state."""
        plan = fac.clearing
        if plan is not None and plan.moves:
            mv = plan.moves[0]
            if self.occ.cell_of.get(mv.occupant) != mv.src or not self.occ.is_empty(mv.dst):
                plan = fac.clearing = None
        if plan is None or not plan.moves:
            blocked = _magic_cells(self.occ)
            fac.clearing = None
            for forbidden in (blocked | self.ports, blocked):
                try:
                    moves = clearing_moves(self.occ, fac.port, forbidden - {fac.port})
                except NoSpace:
                    continue
                fac.clearing = PlacementPlan((fac.port,), moves)
                break
            if fac.clearing is None:
                return False
        return self.start_moves(fac.clearing)

    def run_factories(self) -> bool:
        """Restart each factory whose delivered state has left its port."""
        progressed = False
        for f, fac in enumerate(self.factories):
            if fac.out is not None and self.occ.cell_of.get(magic(fac.out)) != fac.port:
                fac.out = None
                self.start_distill(f)
                progressed = True
        return progressed

    def release(self, gi: int) -> None:
        if not self.cfg.lookahead:
            return
        for j in self.dag.succs[gi]:
            self.unreleased[j] -= 1
            if self.unreleased[j] == 0 and self.missing[j] and self.c.gates[j].needs_magic_state:
                self.soon.add(j)

    def priority(self) -> list[int]:
        return sorted(self.ready, key=lambda i: (self.dag.depth[i], i))

    def supply(self, order: list[int]) -> bool:
        """Deliver finished states to ready T-type gates, nearest factory first.

        A finished state waits inside its factory until a gate asks for it;
        at most ``max_in_flight`` states are on the grid at once.
        """
        progressed = False
        soon = sorted(self.soon, key=lambda i: (self.dag.depth[i], i))
        for gi in order + soon:
            if len(self.assigned) >= self.in_flight_cap:
                break
            if gi in self.assigned or not self.c.gates[gi].needs_magic_state:
                continue
            early = gi not in self.ready
            if early and self.stage_failed.get(gi, -1) > self.t:
                continue
            waiting = [f for f in self.factories
                       if f.op is not None and f.finish is not None and f.finish <= self.t and f.out is None]
            if not waiting:
                break
            qc = self.occ.qubit_cell(self.c.gates[gi].operands[0])
            waiting.sort(key=lambda f: (_manhattan(f.port, qc), f.port))
            open_ = [f for f in waiting if self.occ.is_empty(f.port) and self.free(f.port)]
            if not open_:
                if early:
                    break
                for f in waiting:
                    if self.occ.holds_data(f.port):
                        progressed |= self.clear_port(f)
                        break
                break
            fac = open_[0]
            if early:
                plan = self.staging_plan(gi, fac.op.magic, fac.port)
                if plan is None:
                    self.stage_failed[gi] = self.t + max(1, self.lat.move)
                    continue
                self.plans[gi] = plan
            fac.clearing = None
            op = fac.op
            op.place = self.t
            self.occ.place(magic(op.magic), fac.port)
            self.version += 1
            fac.out, fac.op, fac.finish = op.magic, None, None
            self.delivered += 1
            self.assigned[gi] = op.magic
            progressed = True
        return progressed

    def staging_plan(self, gi: int, m: int, at: Cell | None = None) -> PlacementPlan | None:
        """Hops over empty cells taking state ``m`` as close as it can get to the qubit of ``gi``.

        Data never moves; a vertical neighbour of the qubit is the ideal stop.
        """
        src = at if at is not None else self.occ.cell_of[magic(m)]
        qc = self.occ.qubit_cell(self.c.gates[gi].operands[0])
        blocked = self.claims | self.ports | _magic_cells(self.occ)
        parent = {src: src}
        queue = deque([src])
        best = None
        while queue:
            cur = queue.popleft()
            d = _manhattan(cur, qc)
            # vertical neighbours rank first, then distance, then hops so far
            key = (d != 1 or cur[1] != qc[1], d, cur)
            if cur not in self.ports and (best is None or key < best[0]):
                best = (key, cur)
            for nb in self.g.neighbours(cur):
                if nb not in parent and nb not in blocked and self.occ.is_empty(nb) and self.free(nb):
                    parent[nb] = cur
                    queue.append(nb)
        if best is None:
            return None
        dst = best[1]
        chain = [dst]
        while chain[-1] != src:
            chain.append(parent[chain[-1]])
        chain.reverse()
        moves = [Move(magic(m), x, y) for x, y in zip(chain, chain[1:])]
        return PlacementPlan((qc, dst), moves, staged=True)

    def stage(self) -> bool:
        """Advance states assigned to gates that are not ready yet."""
        progressed = False
        for gi in sorted(g for g in self.assigned if g not in self.ready):
            plan = self.plans.get(gi)
            qc = self.occ.qubit_cell(self.c.gates[gi].operands[0])
            here = self.occ.cell_of[magic(self.assigned[gi])]
            if plan is not None and (plan.cells[0] != qc or here in self.claims
                                     or not self.plan_valid(gi, plan, self.claims)):
                plan = None
            if plan is None:
                if self.stage_failed.get(gi, -1) > self.t:
                    continue
                plan = self.staging_plan(gi, self.assigned[gi])
                if plan is None:
                    self.stage_failed[gi] = self.t + max(1, self.lat.move)
                    self.plans.pop(gi, None)
                    continue
                self.plans[gi] = plan
            progressed |= self.start_moves(plan)
            self.claims |= plan.touched()
        return progressed

    def plan_valid(self, gi: int, plan: PlacementPlan, claims: set[Cell]) -> bool:
        if any(x in claims for x in plan.cells):
            return False
        for mv in plan.moves:
            if mv.src in claims or mv.dst in claims:
                return False
        if plan.moves:
            mv = plan.moves[0]
            return self.occ.cell_of.get(mv.occupant) == mv.src and self.occ.is_empty(mv.dst)
        return True

    def config_ready(self, gi: int, plan: PlacementPlan) -> bool | None:
        """True if executable now, False if waiting, None if the plan went stale."""
        gate = self.c.gates[gi]
        occ = self.occ
        cells = plan.cells
        if gate.kind is GateKind.CNOT:
            C, A, T = cells
            if occ.qubit_cell(gate.operands[0]) != C or occ.qubit_cell(gate.operands[1]) != T or not occ.is_empty(A):
                return None
        elif gate.kind is GateKind.H:
            qc, A = cells
            if occ.qubit_cell(gate.operands[0]) != qc or not occ.is_empty(A):
                return None
        elif gate.needs_magic_state:
            qc, land = cells
            if occ.qubit_cell(gate.operands[0]) != qc or occ.cell_of.get(magic(self.assigned[gi])) != land:
                return None
        else:
            if occ.qubit_cell(gate.operands[0]) != cells[0]:
                return None
        return all(self.free(x) for x in cells) or self.lat.gate(gate.kind) == 0

    def make_plan(self, gi: int, claims: set[Cell], pinned: set[Cell] | None = None) -> PlacementPlan | None:
        """Plan around the factory ports, or across them if nothing else works.

        ``pinned`` is a last-resort weaker claim set tried after ``claims``.
        """
        gate = self.c.gates[gi]
        # once every state is on the grid the ports are ordinary bus cells
        ports = self.ports if self.delivered < self.n_t else set()
        tries = [set(claims) | ports, set(claims)]
        if pinned is not None:
            tries.append(pinned)
        for forbidden in tries:
            try:
                return plan_gate_placement(gate, self.occ, self.dag, self.c, gi, forbidden,
                                           self.assigned.get(gi), self.cfg.penalty)
            except Unplaceable:
                continue
        return None

    def start_moves(self, plan: PlacementPlan) -> bool:
        """Start every pending hop that commutes with the hops still ahead of it."""
        progressed = False
        pending: list[Move] = []
        held: set = set()  # cells and occupants touched by hops that have not started
        for mv in plan.moves:
            ok = (mv.src not in held and mv.dst not in held and mv.occupant not in held
                  and self.free(mv.src) and self.free(mv.dst)
                  and self.occ.cell_of.get(mv.occupant) == mv.src and self.occ.is_empty(mv.dst))
            if ok:
                self.occ.move(mv.occupant, mv.dst)
                self.version += 1
                self.reserve((mv.src, mv.dst), self.lat.move)
                self.emit(ScheduledOp(MOVE, (mv.src, mv.dst), self.t, self.lat.move, occupant=str(mv.occupant)))
                progressed = True
            else:
                pending.append(mv)
                held |= {mv.src, mv.dst, mv.occupant}
        plan.moves[:] = pending
        return progressed

    def execute(self, gi: int, plan: PlacementPlan) -> None:
        gate = self.c.gates[gi]
        dur = self.lat.gate(gate.kind)
        if gate.needs_magic_state:
            m = self.assigned.pop(gi)
            self.occ.remove(magic(m))
            self.version += 1
            op = ScheduledOp(CONSUME, plan.cells, self.t, dur, gate=gi, magic=m)
        else:
            op = ScheduledOp(GATE, plan.cells, self.t, dur, gate=gi)
        if dur:
            self.reserve(plan.cells, dur)
        self.emit(op)
        self.ready.discard(gi)
        self.started.add(gi)
        self.plans.pop(gi, None)
        heapq.heappush(self.completions, (self.t + dur, gi))

    def serve(self, order: list[int]) -> bool:
        progressed = False
        claims: set[Cell] = set()  # every cell a higher-priority plan touches
        hard: set[Cell] = set()  # the subset a passing magic state may still cross
        pinned: set[Cell] = set()  # operand cells only
        failures = 0
        for gi in order:
            gate = self.c.gates[gi]
            own = {self.occ.qubit_cell(q) for q in gate.operands}
            pinned |= own
            if gate.needs_magic_state and gi not in self.assigned:
                claims |= own
                hard |= own
                continue
            mine = hard if gate.needs_magic_state else claims
            plan = self.plans.get(gi)
            if plan is not None and (plan.staged or not self.plan_valid(gi, plan, mine)):
                plan = None
            if plan is not None and not plan.moves and self.config_ready(gi, plan) is None:
                plan = None
            if plan is None:
                retry_at = self.failed.get(gi, -1)
                if not self.relaxed and (self.t < retry_at or failures >= self.cfg.max_failures):
                    claims |= own
                    hard |= own
                    continue
                weak = pinned - own if gate.needs_magic_state and not self.relaxed else None
                plan = self.make_plan(gi, set() if self.relaxed else mine, weak)
                if plan is None:
                    self.failed[gi] = self.t + max(1, self.lat.move)
                    failures += 1
                    claims |= own
                    hard |= own
                    continue
                self.plans[gi] = plan
            if self.start_moves(plan):
                progressed = True
            if not plan.moves:
                state = self.config_ready(gi, plan)
                if state:
                    self.execute(gi, plan)
                    progressed = True
                    continue
                if state is None:
                    self.plans.pop(gi, None)
            claims |= own | plan.touched()
            hard |= own | plan.held()
            if gate.needs_magic_state and gi in self.assigned:
                here = self.occ.cell_of[magic(self.assigned[gi])]
                claims.add(here)
                hard.add(here)
        self.claims = hard
        return progressed

    def step(self) -> bool:
        progressed = self.complete()
        progressed |= self.run_factories()
        order = self.priority()
        progressed |= self.supply(order)
        progressed |= self.serve(order)
        if self.soon or len(self.assigned) > len(self.ready):
            progressed |= self.stage()
        return progressed

    def escape(self) -> bool:
        """Drop all plans and let stuck gates, best first, plan while ignoring claims."""
        self.plans.clear()
        self.failed.clear()
        self.relaxed = True
        try:
            for gi in self.priority():
                gate = self.c.gates[gi]
                if gate.needs_magic_state and gi not in self.assigned:
                    continue
                if self.serve([gi]) or self.next_event() is not None:
                    return True
        finally:
            self.relaxed = False
        return False

    def next_event(self) -> int | None:
        cands = [e for e in self.busy.values() if e > self.t]
        cands += [f.finish for f in self.factories if f.finish is not None and f.finish > self.t]
        cands += [e for e, _ in self.completions if e > self.t]
        return min(cands, default=None)

    def run(self) -> Schedule:
        n = len(self.c.gates)
        for f in range(len(self.factories)):
            self.start_distill(f)
        guard = 0
        last_done, escapes = -1, 0
        while self.done < n:
            progressed = True
            while progressed:
                progressed = self.step()
                guard += 1
                if guard > 50_000_000:
                    raise SchedulingDeadlock(self.t, self.priority())
            if self.done >= n:
                break
            nxt = self.next_event()
            if nxt is None:
                if self.done != last_done:
                    last_done, escapes = self.done, 0
                escapes += 1
                if escapes > 200 or not self.escape():
                    raise SchedulingDeadlock(self.t, self.priority())
                continue
            self.t = nxt
        return Schedule(self.ops, self.g, self.c, self.initial, self.lat)


def schedule(c: Circuit, g: GridLayout, cfg: SchedulerConfig | None = None,
             occ: OccupancyState | None = None) -> Schedule:
    cfg = cfg or SchedulerConfig()
    if g.n_factories != cfg.n_msf:
        g = place_factories(g, cfg.n_msf)
    if occ is None:
        occ = initial_mapping(c, g, cfg.mapping)
    else:
        occ = OccupancyState(g, dict(occ.cell_of), dict(occ.at))
    for cell in g.factory_ports:
        if occ.holds_data(cell):
            raise Unplaceable(f"data qubit mapped onto factory port {cell}")
    return _Run(c, g, cfg, occ).run()
