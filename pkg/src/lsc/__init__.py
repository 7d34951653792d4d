"""Lattice-surgery compiler for surface-code grids with parameterized routing paths."""

from .benchgen import Model, generate
from .frontend import Circuit, Gate, GateKind, build_dag, count_t_states, parse_qasm
from .layout import GridLayout, build_layout, initial_mapping, place_factories
from .metrics import MetricsReport, baseline_block, compute_metrics, lower_bound
from .pipeline import CompileResult, compile_circuit
from .router import find_path, space_search
from .schedule import LatencyModel, Schedule, remove_redundant_moves, validate_schedule
from .scheduler import SchedulerConfig, schedule

__all__ = [
    "Circuit", "CompileResult", "Gate", "GateKind", "GridLayout", "LatencyModel", "MetricsReport", "Model",
    "Schedule", "SchedulerConfig", "baseline_block", "build_dag", "build_layout", "compile_circuit",
    "compute_metrics", "count_t_states", "find_path", "generate", "initial_mapping", "lower_bound",
    "parse_qasm", "place_factories", "remove_redundant_moves", "schedule", "space_search", "validate_schedule",
]
