"""Evaluation quantities: lower bound, execution times, spacetime volume, CPI,
and analytic block-layout baselines."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction
from numbers import Real

from .frontend import Circuit, count_t_states
from .layout import GridLayout, InvalidArgument, total_qubits
from .schedule import TICKS_PER_D, Schedule

CSV_COLUMNS = (
    "benchmark", "L", "r", "n_MSF", "t_MSF_d", "qubits_excl", "qubits_incl",
    "exec_time_d", "unit_cost_time_d", "lower_bound_d", "spacetime_excl", "spacetime_incl", "cpi_d",
    "spacetime_excl_per_gate", "spacetime_incl_per_gate", "error",
)


class MismatchedInputs(ValueError):
    pass


def _exact(x: Real | str) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def lower_bound(n_T: int, t_MSF_d: Real, n_MSF: int) -> Fraction:
    """Distillation-limited execution time n_T * t_MSF / n_MSF, exact."""
    if n_MSF < 1:
        raise InvalidArgument(f"n_MSF must be >= 1, got {n_MSF}")
    if t_MSF_d <= 0:
        raise InvalidArgument(f"t_MSF_d must be positive, got {t_MSF_d}")
    if n_T < 0:
        raise InvalidArgument(f"n_T must be >= 0, got {n_T}")
    return Fraction(n_T) * _exact(t_MSF_d) / n_MSF


@dataclass(frozen=True)
class MetricsReport:
    exec_time_d: float
    unit_cost_time_d: float
    lower_bound_d: float
    qubits_excl_factories: int
    qubits_incl_factories: int
    spacetime_excl: float
    spacetime_incl: float
    cpi_d: float
    n_T: int
    n_MSF: int
    r: int
    n_gates: int = 0
    t_MSF_d: float = 11.0

    @property
    def spacetime_excl_per_gate(self) -> float:
        return self.spacetime_excl / self.n_gates if self.n_gates else 0.0

    @property
    def spacetime_incl_per_gate(self) -> float:
        return self.spacetime_incl / self.n_gates if self.n_gates else 0.0

    def to_json(self) -> dict:
        d = asdict(self)
        d["spacetime_excl_per_gate"] = self.spacetime_excl_per_gate
        d["spacetime_incl_per_gate"] = self.spacetime_incl_per_gate
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def csv_row(self, benchmark: str, L: int) -> dict:
        return {
            "benchmark": benchmark, "L": L, "r": self.r, "n_MSF": self.n_MSF, "t_MSF_d": self.t_MSF_d,
            "qubits_excl": self.qubits_excl_factories, "qubits_incl": self.qubits_incl_factories,
            "exec_time_d": self.exec_time_d, "unit_cost_time_d": self.unit_cost_time_d,
            "lower_bound_d": self.lower_bound_d, "spacetime_excl": self.spacetime_excl,
            "spacetime_incl": self.spacetime_incl, "cpi_d": self.cpi_d,
            "spacetime_excl_per_gate": self.spacetime_excl_per_gate,
            "spacetime_incl_per_gate": self.spacetime_incl_per_gate, "error": "",
        }


def compute_metrics(s: Schedule, s_unit: Schedule, g: GridLayout, c: Circuit, cfg) -> MetricsReport:
    """Metrics for one compiled point; ``cfg`` is the SchedulerConfig of ``s``."""
    for name, sched in (("schedule", s), ("unit-cost schedule", s_unit)):
        if sched.circuit is not c and sched.circuit != c:
            raise MismatchedInputs(f"{name} was built for a different circuit")
        if sched.layout.n_cells != g.n_cells or sched.layout.r != g.r:
            raise MismatchedInputs(f"{name} was built for a different layout")
    if g.n_factories and g.n_factories != cfg.n_msf:
        raise MismatchedInputs(f"layout has {g.n_factories} factories, config {cfg.n_msf}")
    n_T = count_t_states(c)
    t_msf_d = Fraction(cfg.latency.distill_period, TICKS_PER_D)
    exec_d = s.makespan_d
    unit_d = s_unit.makespan_d
    q_ex = total_qubits(g)
    q_in = q_ex + cfg.n_msf * g.factory_footprint
    n_gates = len(c.gates)
    return MetricsReport(
        exec_time_d=exec_d,
        unit_cost_time_d=unit_d,
        lower_bound_d=float(lower_bound(n_T, t_msf_d, cfg.n_msf)),
        qubits_excl_factories=q_ex,
        qubits_incl_factories=q_in,
        spacetime_excl=q_ex * exec_d,
        spacetime_incl=q_in * exec_d,
        cpi_d=exec_d / n_gates if n_gates else 0.0,
        n_T=n_T,
        n_MSF=cfg.n_msf,
        r=g.r,
        n_gates=n_gates,
        t_MSF_d=float(t_msf_d),
    )


class BlockKind(str, Enum):
    COMPACT = "compact"
    INTERMEDIATE = "intermediate"
    FAST = "fast"


# qubits = a*n + b, and the depth of one Pauli-product rotation in d
_BLOCKS = {
    BlockKind.COMPACT: (3, 3, 4),
    BlockKind.INTERMEDIATE: (4, 0, 3),
    BlockKind.FAST: (4, 6, 3),
}


@dataclass(frozen=True)
class BlockBaseline:
    kind: BlockKind
    n: int
    qubits: int
    ppr_depth_d: int
    time_d: Fraction
    spacetime: Fraction


def baseline_block(kind: BlockKind | str, n: int, n_T: int, n_MSF: int, t_MSF_d: Real) -> BlockBaseline:
    """Serial rotation-per-T execution on a block layout."""
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    kind = BlockKind(kind)
    a, b, depth = _BLOCKS[kind]
    qubits = a * n + b
    time = max(lower_bound(n_T, t_MSF_d, n_MSF), Fraction(n_T * depth))
    return BlockBaseline(kind, n, qubits, depth, time, qubits * time)
