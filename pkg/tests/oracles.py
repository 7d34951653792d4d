"""Independent reference implementations shared by the router tests."""

import itertools
from collections import deque

from lsc.layout import OccupancyState, build_layout, data, magic
from lsc.router import DEFAULT_PENALTY


def grid(rows: int, occupied=(), magic_cells=()) -> OccupancyState:
    """Square occupancy grid; every cell is free to hold anything."""
    layouts = {5: (4, 2), 6: (4, 4), 8: (6, 4)}
    L, r = layouts[rows]
    occ = OccupancyState(build_layout(L, r))
    assert occ.layout.rows == occ.layout.cols == rows
    for i, cell in enumerate(sorted(occupied)):
        occ.place(data(i), cell)
    for i, cell in enumerate(sorted(magic_cells)):
        occ.place(magic(i), cell)
    return occ


def nbrs(cell, n):
    r, c = cell
    for x in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
        if 0 <= x[0] < n and 0 <= x[1] < n:
            yield x


def bellman_ford(occ, src, dst, forbidden=(), penalty=DEFAULT_PENALTY):
    n = occ.layout.rows
    cells = [(r, c) for r in range(n) for c in range(n) if (r, c) not in forbidden]
    dist = {c: None for c in cells}
    dist[src] = 0
    for _ in range(len(cells)):
        changed = False
        for u in cells:
            if dist[u] is None:
                continue
            for v in nbrs(u, n):
                if v in forbidden:
                    continue
                w = 1 + penalty * occ.holds_data(v)
                if dist[v] is None or dist[u] + w < dist[v]:
                    dist[v] = dist[u] + w
                    changed = True
        if not changed:
            break
    return dist[dst]


def _bfs_hops(n, src, dst, allowed):
    seen = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            return seen[u]
        for v in nbrs(u, n):
            if v in allowed and v not in seen:
                seen[v] = seen[u] + 1
                q.append(v)
    return None


def fewest_crossings(n, src, dst, obstacles):
    """Smallest obstacle subset that opens a route, then the shortest route through it."""
    free = {(r, c) for r in range(n) for c in range(n)} - set(obstacles)
    for k in range(len(obstacles) + 1):
        hops = [h for sub in itertools.combinations(sorted(obstacles), k)
                if (h := _bfs_hops(n, src, dst, free | set(sub) | {src})) is not None]
        if hops:
            return k, min(hops)
    raise AssertionError("unreachable")
