"""Penalty-weighted grid pathfinding and ancilla space search."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Collection, NamedTuple

from .layout import Cell, OccupancyState, Occupant

DEFAULT_PENALTY = 1000


class NoPath(Exception):
    pass


class NoSpace(Exception):
    pass


class Move(NamedTuple):
    occupant: Occupant
    src: Cell
    dst: Cell


@dataclass(frozen=True)
class Path:
    cells: tuple[Cell, ...]
    occupied_crossed: int
    surrogate_cost: int

    @property
    def hops(self) -> int:
        return len(self.cells) - 1

    @property
    def reported_cost(self) -> int:
        # distance times penalty, penalty = data cells crossed
        return self.hops * self.occupied_crossed


def cell_weight(occ: OccupancyState, cell: Cell, penalty: int = DEFAULT_PENALTY) -> int:
    return 1 + penalty * occ.holds_data(cell)


def _dijkstra(occ: OccupancyState, src: Cell, forbidden: Collection[Cell], penalty: int,
              dst: Cell | None = None) -> tuple[dict[Cell, int], dict[Cell, Cell], list[Cell]]:
    g = occ.layout
    dist = {src: 0}
    parent: dict[Cell, Cell] = {}
    popped: list[Cell] = []
    heap = [(0, src)]
    done: set[Cell] = set()
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        popped.append(cell)
        if cell == dst:
            break
        for nb in g.neighbours(cell):
            if nb in forbidden or nb in done:
                continue
            nd = d + 1 + penalty * occ.holds_data(nb)
            if nd < dist.get(nb, nd + 1):
                dist[nb] = nd
                parent[nb] = cell
                heapq.heappush(heap, (nd, nb))
    return dist, parent, popped


def find_path(occ: OccupancyState, src: Cell, dst: Cell, forbidden: Collection[Cell] = (),
              penalty: int = DEFAULT_PENALTY) -> Path:
    """Cheapest 4-neighbour path from ``src`` to ``dst``.

    Entering a cell costs 1, plus ``penalty`` if a data qubit sits there.
    Ties resolve by popping the lexicographically smallest (row, col).
    """
    if src == dst:
        raise ValueError("source and destination coincide")
    if dst in forbidden:
        raise ValueError(f"destination {dst} is forbidden")
    dist, parent, _ = _dijkstra(occ, src, forbidden, penalty, dst)
    if dst not in dist:
        raise NoPath(f"no path {src} -> {dst}")
    cells = [dst]
    while cells[-1] != src:
        cells.append(parent[cells[-1]])
    cells.reverse()
    crossed = sum(1 for c in cells[1:] if occ.holds_data(c))
    return Path(tuple(cells), crossed, dist[dst])


def distance_map(occ: OccupancyState, src: Cell, forbidden: Collection[Cell] = (),
                 penalty: int = DEFAULT_PENALTY) -> dict[Cell, int]:
    return _dijkstra(occ, src, forbidden, penalty)[0]


def decision_tree_dot(occ: OccupancyState, src: Cell, dst: Cell, forbidden: Collection[Cell] = (),
                      penalty: int = DEFAULT_PENALTY) -> str:
    """DOT text of the shortest-path tree explored while searching src -> dst."""
    dist, parent, popped = _dijkstra(occ, src, forbidden, penalty, dst)
    on_path = set()
    if dst in dist:
        c = dst
        while c != src:
            on_path.add(c)
            c = parent[c]
        on_path.add(src)
    lines = ["digraph dijkstra {"]
    for c in popped:
        colour = "green" if c in on_path else "red"
        lines.append(f'  "{c[0]},{c[1]}" [color={colour}];')
    for child, par in sorted(parent.items()):
        if child in popped:
            w = dist[child] - dist[par]
            lines.append(f'  "{par[0]},{par[1]}" -> "{child[0]},{child[1]}" [label={w}];')
    lines.append("}")
    return "\n".join(lines)


def clearing_moves(occ: OccupancyState, cell: Cell, forbidden: Collection[Cell] = ()) -> list[Move]:
    """Single-hop moves that empty ``cell`` by shifting data toward the nearest hole.

    The returned moves are in execution order: the occupant next to the hole
    moves first. Raises NoSpace when no empty cell can be reached through
    movable data qubits.
    """
    if occ.is_empty(cell):
        return []
    if not occ.holds_data(cell) or cell in forbidden:
        raise NoSpace(f"cell {cell} cannot be cleared")
    g = occ.layout
    parent: dict[Cell, Cell] = {cell: cell}
    queue = deque([cell])
    hole = None
    while queue and hole is None:
        cur = queue.popleft()
        for nb in g.neighbours(cur):
            if nb in parent or nb in forbidden:
                continue
            if occ.is_empty(nb):
                parent[nb] = cur
                hole = nb
                break
            if occ.holds_data(nb):
                parent[nb] = cur
                queue.append(nb)
    if hole is None:
        raise NoSpace(f"no reachable empty cell to clear {cell}")
    chain = [hole]
    while chain[-1] != cell:
        chain.append(parent[chain[-1]])
    # chain runs hole -> ... -> cell; shift from the hole end backwards
    return [Move(occ.at[chain[i + 1]], chain[i + 1], chain[i]) for i in range(len(chain) - 1)]


class AdjacencyRequirement(str, Enum):
    ANY = "any"
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"
    DIAGONAL_SHARED = "diagonal"


def candidate_neighbours(occ: OccupancyState, target: Cell, required: AdjacencyRequirement) -> list[Cell]:
    r, c = target
    if required is AdjacencyRequirement.VERTICAL:
        cands = [(r - 1, c), (r + 1, c)]
    elif required is AdjacencyRequirement.HORIZONTAL:
        cands = [(r, c - 1), (r, c + 1)]
    elif required is AdjacencyRequirement.DIAGONAL_SHARED:
        # ancilla above/below the target (ZZ side) that also has a horizontal neighbour
        cands = [(r - 1, c), (r + 1, c)]
        cands = [a for a in cands if occ.layout.in_bounds((a[0], a[1] - 1)) or occ.layout.in_bounds((a[0], a[1] + 1))]
    else:
        cands = [(r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)]
    return sorted(x for x in cands if occ.layout.in_bounds(x))


def space_search(occ: OccupancyState, target: Cell,
                 required: AdjacencyRequirement = AdjacencyRequirement.ANY,
                 forbidden: Collection[Cell] = ()) -> tuple[Cell, list[Move]]:
    """Pick the neighbour of ``target`` that takes the fewest hops to empty."""
    blocked = set(forbidden) | {target}
    best: tuple[int, Cell, list[Move]] | None = None
    for cand in candidate_neighbours(occ, target, required):
        if cand in blocked:
            continue
        try:
            moves = clearing_moves(occ, cand, blocked)
        except NoSpace:
            continue
        if best is None or (len(moves), cand) < (best[0], best[1]):
            best = (len(moves), cand, moves)
    if best is None:
        raise NoSpace(f"no clearable {required.value} neighbour of {target}")
    return best[1], best[2]
