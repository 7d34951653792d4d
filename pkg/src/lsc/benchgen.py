"""Single-Trotter-step circuits for 2D condensed-matter models on an L x L lattice.

Qubits are indexed row-major, ``q = row * L + col``. Every two-qubit term
acts on a nearest-neighbour pair of that lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .frontend import Circuit, Gate, GateKind

DEFAULT_ANGLE = 0.1


class Model(str, Enum):
    ISING = "ising"
    HEISENBERG = "heisenberg"
    FERMI_HUBBARD = "fermihubbard"


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    side: int
    model: Model
    trotter_steps: int = 1
    angle: float = DEFAULT_ANGLE

    def __post_init__(self) -> None:
        if self.side < 2:
            raise InvalidSpec(f"side length must be >= 2, got {self.side}")
        if self.trotter_steps < 1:
            raise InvalidSpec(f"trotter_steps must be >= 1, got {self.trotter_steps}")


def lattice_edges(L: int) -> list[tuple[int, int]]:
    """Nearest-neighbour edges grouped into four disjoint layers.

    Horizontal edges starting at even columns, then odd columns, then the
    same for vertical edges. Edges inside one layer share no qubit.
    """
    edges = []
    for parity in (0, 1):
        for r in range(L):
            for c in range(parity, L - 1, 2):
                edges.append((r * L + c, r * L + c + 1))
    for parity in (0, 1):
        for r in range(parity, L - 1, 2):
            for c in range(L):
                edges.append((r * L + c, (r + 1) * L + c))
    return edges


def _zz(a: int, b: int, theta: float) -> list[Gate]:
    return [Gate(GateKind.CNOT, (a, b)), Gate(GateKind.RZ, (b,), theta), Gate(GateKind.CNOT, (a, b))]


def _xx(a: int, b: int, theta: float) -> list[Gate]:
    h = [Gate(GateKind.H, (a,)), Gate(GateKind.H, (b,))]
    return h + _zz(a, b, theta) + h


def _yy(a: int, b: int, theta: float) -> list[Gate]:
    sdg = [Gate(GateKind.SDG, (a,)), Gate(GateKind.SDG, (b,))]
    s = [Gate(GateKind.S, (a,)), Gate(GateKind.S, (b,))]
    return sdg + _xx(a, b, theta) + s


def _check(spec: LatticeSpec, model: Model) -> None:
    if spec.model is not model:
        raise InvalidSpec(f"expected model {model.value}, got {spec.model.value}")


def gen_ising2d(spec: LatticeSpec) -> Circuit:
    _check(spec, Model.ISING)
    L, th = spec.side, spec.angle
    gates = [Gate(GateKind.H, (q,)) for q in range(L * L)]
    for _ in range(spec.trotter_steps):
        for a, b in lattice_edges(L):
            gates += _zz(a, b, th)
        for q in range(L * L):
            gates += [Gate(GateKind.H, (q,)), Gate(GateKind.RZ, (q,), th), Gate(GateKind.H, (q,))]
    return Circuit(L * L, gates, f"ising_{L}x{L}")


def gen_heisenberg2d(spec: LatticeSpec) -> Circuit:
    _check(spec, Model.HEISENBERG)
    L, th = spec.side, spec.angle
    gates: list[Gate] = []
    for _ in range(spec.trotter_steps):
        edges = lattice_edges(L)
        for term in (_zz, _xx, _yy):
            for a, b in edges:
                gates += term(a, b, th)
    return Circuit(L * L, gates, f"heisenberg_{L}x{L}")


def hubbard_edges(L: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(hopping, interaction) edge lists, L*L/2 each.

    Hopping couples columns (2k, 2k+1) within a row; interaction couples
    rows (2k, 2k+1) within a column.
    """
    hop = [(r * L + c, r * L + c + 1) for r in range(L) for c in range(0, L - 1, 2)]
    inter = [(r * L + c, (r + 1) * L + c) for r in range(0, L - 1, 2) for c in range(L)]
    return hop, inter


def gen_fermi_hubbard2d(spec: LatticeSpec) -> Circuit:
    _check(spec, Model.FERMI_HUBBARD)
    L, th = spec.side, spec.angle
    if L % 2:
        raise InvalidSpec(f"Fermi-Hubbard lattice needs even side length, got {L}")
    hop, inter = hubbard_edges(L)
    gates: list[Gate] = []
    for _ in range(spec.trotter_steps):
        for term in (_xx, _yy):
            for a, b in hop:
                gates += term(a, b, th)
        for a, b in inter:
            gates += _zz(a, b, th)
    return Circuit(L * L, gates, f"fermihubbard_{L}x{L}")


GENERATORS = {
    Model.ISING: gen_ising2d,
    Model.HEISENBERG: gen_heisenberg2d,
    Model.FERMI_HUBBARD: gen_fermi_hubbard2d,
}


def generate(model: str | Model, L: int, steps: int = 1) -> Circuit:
    m = Model(model)
    return GENERATORS[m](LatticeSpec(L, m, steps))
