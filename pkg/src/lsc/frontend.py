"""Circuit representation, OpenQASM 2.0 subset parser and dependency DAG."""

from __future__ import annotations

import ast
import json
import math
import operator
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

CLIFFORD_TOL = 1e-9


class GateKind(str, Enum):
    H = "H"
    S = "S"
    SDG = "Sdg"
    X = "X"
    Z = "Z"
    SX = "SX"
    T = "T"
    TDG = "Tdg"
    RZ = "RZ"
    CNOT = "CNOT"


QASM_NAMES = {
    "h": GateKind.H,
    "s": GateKind.S,
    "sdg": GateKind.SDG,
    "x": GateKind.X,
    "z": GateKind.Z,
    "sx": GateKind.SX,
    "t": GateKind.T,
    "tdg": GateKind.TDG,
    "rz": GateKind.RZ,
    "cx": GateKind.CNOT,
}
_KIND_TO_QASM = {v: k for k, v in QASM_NAMES.items()}


class QasmError(Exception):
    """Base class for frontend errors."""


class QasmSyntaxError(QasmError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnsupportedGate(QasmError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unsupported gate {name!r}")
        self.name = name


class MultiRegister(QasmError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    operands: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        want = 2 if self.kind is GateKind.CNOT else 1
        if len(self.operands) != want:
            raise ValueError(f"{self.kind.value} takes {want} operand(s), got {self.operands}")
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"repeated operand in {self.operands}")
        if (self.angle is not None) != (self.kind is GateKind.RZ):
            raise ValueError("angle must be given exactly for RZ")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValueError("RZ angle must be finite")

    @property
    def needs_magic_state(self) -> bool:
        if self.kind in (GateKind.T, GateKind.TDG):
            return True
        if self.kind is GateKind.RZ:
            return not is_clifford_angle(self.angle)
        return False

    def __str__(self) -> str:
        args = ",".join(str(q) for q in self.operands)
        if self.angle is not None:
            return f"{self.kind.value}({args}; {self.angle:g})"
        return f"{self.kind.value}({args})"


def is_clifford_angle(theta: float) -> bool:
    k = theta / (math.pi / 2)
    return abs(k - round(k)) * (math.pi / 2) <= CLIFFORD_TOL


def lower_clifford_rz(qubit: int, theta: float) -> Gate | None:
    """Replace an RZ at a multiple of pi/2 by I (None), S, Z or Sdg."""
    k = round(theta / (math.pi / 2)) % 4
    return [None, Gate(GateKind.S, (qubit,)), Gate(GateKind.Z, (qubit,)), Gate(GateKind.SDG, (qubit,))][k]


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    name: str = "circuit"

    def __post_init__(self) -> None:
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        for q in g.operands:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"operand {q} out of range for {self.n_qubits} qubits")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.kind.value] = out.get(g.kind.value, 0) + 1
        return out

    def __len__(self) -> int:
        return len(self.gates)

    def to_json(self) -> dict:
        gates = []
        for g in self.gates:
            d: dict = {"kind": g.kind.value, "operands": list(g.operands)}
            if g.angle is not None:
                d["angle"] = g.angle
            gates.append(d)
        return {"name": self.name, "n_qubits": self.n_qubits, "gates": gates}

    @classmethod
    def from_json(cls, data: dict | str) -> Circuit:
        if isinstance(data, str):
            data = json.loads(data)
        gates = [Gate(GateKind(d["kind"]), tuple(d["operands"]), d.get("angle")) for d in data["gates"]]
        return cls(int(data["n_qubits"]), gates, data.get("name", "circuit"))

    def to_qasm(self) -> str:
        lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{self.n_qubits}];"]
        for g in self.gates:
            name = _KIND_TO_QASM[g.kind]
            if g.angle is not None:
                name = f"{name}({g.angle!r})"
            lines.append(f"{name} " + ",".join(f"q[{q}]" for q in g.operands) + ";")
        return "\n".join(lines) + "\n"


# --- QASM parsing -----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_angle(expr: str) -> float:
    def ev(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(expr)

    return ev(ast.parse(expr.strip(), mode="eval"))


_STMT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*(.*)$", re.S)
_ARG = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[\s*(\d+)\s*\])?$")


def _statements(text: str) -> Iterable[tuple[str, int, int]]:
    """Yield (statement, line, col) with comments stripped."""
    text = re.sub(r"//[^\n]*", lambda m: " " * len(m.group()), text)
    start = 0
    for i, ch in enumerate(text):
        if ch == ";":
            raw = text[start:i]
            stripped = raw.lstrip()
            if stripped.strip():
                pos = start + len(raw) - len(stripped)
                line = text.count("\n", 0, pos) + 1
                col = pos - (text.rfind("\n", 0, pos) + 1) + 1
                yield stripped.strip(), line, col
            start = i + 1
    tail = text[start:]
    if tail.strip():
        pos = start + len(tail) - len(tail.lstrip())
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        raise QasmSyntaxError("missing ';'", line, col)


def parse_qasm(text: str, name: str = "circuit") -> Circuit:
    reg: tuple[str, int] | None = None
    pending: list[tuple[GateKind, list[str], str | None, int, int]] = []

    for stmt, line, col in _statements(text):
        head = stmt.split(None, 1)[0]
        if head == "OPENQASM" or head == "include" or head.startswith("creg") or head == "barrier":
            continue
        if head == "qreg":
            m = re.fullmatch(r"qreg\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]", stmt)
            if not m:
                raise QasmSyntaxError("malformed qreg", line, col)
            if reg is not None:
                raise MultiRegister(f"second quantum register {m.group(1)!r} at line {line}")
            reg = (m.group(1), int(m.group(2)))
            continue
        if head == "measure" or stmt.startswith("measure"):
            continue
        m = _STMT.match(stmt)
        if not m:
            raise QasmSyntaxError(f"cannot parse {stmt!r}", line, col)
        gname, params, args = m.group(1), m.group(2), m.group(3)
        if gname not in QASM_NAMES:
            raise UnsupportedGate(gname)
        pending.append((QASM_NAMES[gname], [a.strip() for a in args.split(",")] if args.strip() else [], params, line, col))

    if reg is None:
        raise QasmSyntaxError("no qreg declared", 1, 1)
    rname, size = reg
    circ = Circuit(size, [], name)

    for kind, args, params, line, col in pending:
        want = 2 if kind is GateKind.CNOT else 1
        angle = None
        if kind is GateKind.RZ:
            if params is None:
                raise QasmSyntaxError("rz needs an angle", line, col)
            try:
                angle = _eval_angle(params)
            except (ValueError, SyntaxError, ZeroDivisionError):
                raise QasmSyntaxError(f"bad angle expression {params!r}", line, col) from None
        elif params is not None:
            raise QasmSyntaxError(f"{kind.value} takes no parameters", line, col)
        if len(args) != want:
            raise QasmSyntaxError(f"expected {want} argument(s)", line, col)
        idxs: list[int | None] = []
        for a in args:
            am = _ARG.match(a)
            if not am or am.group(1) != rname:
                raise QasmSyntaxError(f"bad qubit argument {a!r}", line, col)
            idxs.append(int(am.group(2)) if am.group(2) is not None else None)
        if any(i is not None and i >= size for i in idxs):
            raise QasmSyntaxError("qubit index out of range", line, col)
        if None in idxs:
            if want != 1:
                raise QasmSyntaxError("register broadcast only supported for 1-qubit gates", line, col)
            targets = [(q,) for q in range(size)]
        else:
            targets = [tuple(idxs)]  # type: ignore[arg-type]
        for ops in targets:
            if len(set(ops)) != len(ops):
                raise QasmSyntaxError("repeated operand", line, col)
            if kind is GateKind.RZ and is_clifford_angle(angle):
                lowered = lower_clifford_rz(ops[0], angle)
                if lowered is not None:
                    circ.append(lowered)
                continue
            circ.append(Gate(kind, ops, angle))
    return circ


# --- dependency graph ---------------------------------------------------------

@dataclass
class DependencyGraph:
    n_nodes: int
    preds: list[list[int]]
    succs: list[list[int]]
    depth: list[int]
    next_on: dict[tuple[int, int], int] = field(default_factory=dict)  # (gate, qubit) -> next gate on that qubit

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n_nodes) for j in self.succs[i]]

    def topological_order(self) -> list[int]:
        indeg = [len(p) for p in self.preds]
        ready = [i for i in range(self.n_nodes) if indeg[i] == 0]
        out = []
        while ready:
            i = ready.pop()
            out.append(i)
            for j in self.succs[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
        if len(out) != self.n_nodes:
            raise ValueError("cycle in dependency graph")
        return out


def _reaches(succs: list[list[int]], depth: list[int], a: int, b: int) -> bool:
    stack, seen = [a], {a}
    while stack:
        x = stack.pop()
        for y in succs[x]:
            if y == b:
                return True
            if y < b and depth[y] < depth[b] and y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def build_dag(c: Circuit) -> DependencyGraph:
    """Per-qubit program-order chains, transitively reduced."""
    n = len(c.gates)
    preds: list[list[int]] = [[] for _ in range(n)]
    succs: list[list[int]] = [[] for _ in range(n)]
    depth = [0] * n
    last: dict[int, int] = {}
    next_on: dict[tuple[int, int], int] = {}
    for j, g in enumerate(c.gates):
        cands = sorted({last[q] for q in g.operands if q in last})
        if len(cands) == 2:
            a, b = cands
            if depth[a] < depth[b] and _reaches(succs, depth, a, b):
                cands = [b]
        for i in cands:
            preds[j].append(i)
            succs[i].append(j)
        for q in g.operands:
            if q in last:
                next_on[last[q], q] = j
            last[q] = j
        depth[j] = max((depth[i] + 1 for i in preds[j]), default=0)
    return DependencyGraph(n, preds, succs, depth, next_on)


def count_t_states(c: Circuit | Sequence[Gate]) -> int:
    gates = c.gates if isinstance(c, Circuit) else c
    return sum(1 for g in gates if g.needs_magic_state)
