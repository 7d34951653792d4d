"""One compile point: layout, schedule, unit-cost schedule, validation and metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .frontend import Circuit
from .layout import DEFAULT_FACTORY_FOOTPRINT, GridLayout, build_layout, place_factories
from .metrics import MetricsReport, compute_metrics
from .schedule import (LatencyModel, Schedule, ValidationReport, relatency, remove_redundant_moves,
                       validate_schedule)
from .scheduler import SchedulerConfig, schedule


@dataclass
class CompileResult:
    circuit: Circuit
    layout: GridLayout
    config: SchedulerConfig
    schedule: Schedule
    unit_schedule: Schedule
    report: ValidationReport
    unit_report: ValidationReport
    metrics: MetricsReport

    @property
    def ok(self) -> bool:
        return self.report.ok and self.unit_report.ok


def side_for(c: Circuit) -> int:
    """Smallest square data region holding every qubit of ``c``."""
    return max(1, math.isqrt(max(c.n_qubits, 1) - 1) + 1)


def compile_circuit(c: Circuit, r: int, n_msf: int = 1, t_msf_d: float = 11, L: int | None = None,
                    footprint: int = DEFAULT_FACTORY_FOOTPRINT, optimize: bool = True,
                    config: SchedulerConfig | None = None, reschedule_unit: bool = False) -> CompileResult:
    L = L or side_for(c)
    base = config or SchedulerConfig()
    period = LatencyModel.with_distill_d(t_msf_d).distill_period
    cfg = replace(base, n_msf=n_msf, latency=replace(base.latency, distill_period=period), unit_cost=False)
    g = place_factories(build_layout(L, r, footprint), n_msf)
    s = schedule(c, g, cfg)
    if optimize:
        s = remove_redundant_moves(s)
    su = relatency(s, cfg.latency.unit())
    if reschedule_unit:
        # an independent unit-cost run sometimes packs better; keep the faster one
        alt = schedule(c, g, replace(cfg, unit_cost=True))
        if optimize:
            alt = remove_redundant_moves(alt)
        if alt.makespan < su.makespan:
            su = alt
    rep, urep = validate_schedule(s), validate_schedule(su)
    m = compute_metrics(s, su, g, c, cfg)
    return CompileResult(c, g, cfg, s, su, rep, urep, m)


__all__ = ["CompileResult", "LatencyModel", "compile_circuit", "side_for"]
