"""Command-line entry point: compile, sweep, bench, validate."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .benchgen import InvalidSpec, Model, generate
from .frontend import Circuit, QasmError, parse_qasm
from .layout import LayoutError, build_layout, place_factories
from .metrics import CSV_COLUMNS
from .pipeline import compile_circuit, side_for
from .schedule import Schedule, LatencyModel, render_trace, validate_schedule
from .scheduler import SchedulerConfig, SchedulingDeadlock, Unplaceable
from .svg import line_chart, scatter_chart

log = logging.getLogger("lsc")

EXIT_OK, EXIT_ERROR, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for schedules that fail validation
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: usage error: {message}\n")


def _setup_logging() -> None:
    level = os.environ.get("LSC_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def parse_gen(text: str) -> tuple[str, int]:
    model, sep, L = text.partition(":")
    if not sep:
        raise UsageError(f"--gen expects model:L, got {text!r}")
    try:
        Model(model)
    except ValueError:
        raise UsageError(f"unknown model {model!r}; choose from {[m.value for m in Model]}") from None
    try:
        side = int(L)
    except ValueError:
        raise UsageError(f"lattice side must be an integer, got {L!r}") from None
    return model, side


def parse_int_list(text: str) -> list[int]:
    """'1,2,4' or '1-8' or a mix such as '1-3,6'."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            if sep:
                out += list(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"bad integer list {text!r}") from None
    if not out:
        raise UsageError("empty value list")
    return out


def _load_circuit(args) -> tuple[Circuit, int, str]:
    if args.gen:
        model, L = parse_gen(args.gen)
        c = generate(model, L, getattr(args, "steps", 1))
        return c, L, model
    if not args.circuit:
        raise UsageError("give a QASM file or --gen model:L")
    path = Path(args.circuit)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    c = parse_qasm(path.read_text(), path.stem)
    return c, side_for(c), path.stem


def _check_r(r: int, L: int) -> None:
    if not 2 <= r <= 2 * L + 2:
        raise UsageError(f"--r must lie in [2, {2 * L + 2}] for L={L}, got {r}")


def cmd_compile(args) -> int:
    c, L, _ = _load_circuit(args)
    _check_r(args.r, L)
    cfg = SchedulerConfig(mapping=args.mapping)
    res = compile_circuit(c, args.r, args.factories, args.t_msf, L=L, footprint=args.footprint,
                          optimize=not args.no_optimize, config=cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    main = res.unit_schedule if args.unit_cost else res.schedule
    (out / "schedule.jsonl").write_text(main.to_jsonl())
    (out / "metrics.json").write_text(res.metrics.dumps() + "\n")
    (out / "circuit.json").write_text(json.dumps(c.to_json(), sort_keys=True) + "\n")
    (out / "layout.json").write_text(res.layout.dumps(main.initial) + "\n")
    run = {"L": L, "r": args.r, "n_msf": args.factories, "footprint": args.footprint,
           "latency": main.latency.to_json()}
    (out / "run.json").write_text(json.dumps(run, sort_keys=True) + "\n")
    if args.trace:
        (out / "trace.txt").write_text(render_trace(main))
    m = res.metrics
    report = res.unit_report if args.unit_cost else res.report
    print(f"{c.name}: L={L} r={args.r} factories={args.factories} exec={m.exec_time_d:g}d "
          f"unit={m.unit_cost_time_d:g}d lower_bound={m.lower_bound_d:g}d qubits={m.qubits_excl_factories}"
          f"/{m.qubits_incl_factories} violations={len(report.violations)}")
    if not res.ok:
        print(str(res.report if not res.report.ok else res.unit_report), file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _sweep_point(job: tuple[str, int, int, int, float, int]) -> dict:
    model, L, r, k, t_msf, footprint = job
    name = f"{model}"
    try:
        res = compile_circuit(generate(model, L), r, k, t_msf, L=L, footprint=footprint)
        row = res.metrics.csv_row(name, L)
        if not res.ok:
            row["error"] = f"{len(res.report.violations) + len(res.unit_report.violations)} validation violations"
        return row
    except (LayoutError, SchedulingDeadlock, Unplaceable, ValueError) as e:
        row = {col: "" for col in CSV_COLUMNS}
        row.update(benchmark=name, L=L, r=r, n_MSF=k, t_MSF_d=t_msf, error=f"{type(e).__name__}: {e}")
        return row


def sweep_rows(gens: list[tuple[str, int]], rs: list[int], ks: list[int], t_msf: float,
               footprint: int = 11, jobs: int = 1) -> list[dict]:
    points = [(m, L, r, k, t_msf, footprint) for m, L in gens for r in rs for k in ks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    return sorted(rows, key=lambda row: (row["benchmark"], int(row["L"]), int(row["r"]), int(row["n_MSF"])))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def spacetime_svg(rows: list[dict], per_gate: bool = True) -> str:
    key = "spacetime_incl_per_gate" if per_gate else "spacetime_incl"
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if row["error"]:
            continue
        name = f"{row['benchmark']} {row['L']}x{row['L']} r={row['r']}"
        series.setdefault(name, []).append((float(row["n_MSF"]), float(row[key])))
    ylabel = "spacetime incl. factories per gate" if per_gate else "spacetime incl. factories"
    return line_chart(series, "Spacetime volume vs. factory count", "factories", ylabel)


def scatter_svg(rows: list[dict]) -> str:
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if row["error"]:
            continue
        name = f"{row['benchmark']} {row['L']}x{row['L']}"
        series.setdefault(name, []).append((float(row["qubits_incl"]), float(row["exec_time_d"])))
    return scatter_chart(series, "Execution time vs. qubits", "qubits incl. factories", "execution time (d)")


def cmd_sweep(args) -> int:
    gens = [parse_gen(g) for g in args.gen]
    rs = parse_int_list(args.r)
    ks = parse_int_list(args.factories)
    if any(k < 1 for k in ks):
        raise UsageError("factory counts must be >= 1")
    for _, L in gens:
        for r in rs:
            _check_r(r, L)
    rows = sweep_rows(gens, rs, ks, args.t_msf, args.footprint, args.jobs)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(spacetime_svg(rows, not args.raw))
    if args.scatter:
        Path(args.scatter).write_text(scatter_svg(rows))
    return EXIT_OK if any(not row["error"] for row in rows) else EXIT_ERROR


def count_table(c: Circuit) -> str:
    counts = c.counts()
    names = sorted(counts)
    width = max([len(n) for n in names] + [5])
    lines = [f"{'gate':<{width}}  count"]
    lines += [f"{n:<{width}}  {counts[n]}" for n in names]
    lines.append(f"{'total':<{width}}  {len(c.gates)}")
    return "\n".join(lines)


def cmd_bench(args) -> int:
    c = generate(args.model, args.L, args.steps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.model}_{args.L}x{args.L}.qasm"
    path.write_text(c.to_qasm())
    print(count_table(c))
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.schedule)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    folder = path.parent
    try:
        run = json.loads((folder / "run.json").read_text())
        c = Circuit.from_json((folder / "circuit.json").read_text())
        layout = json.loads((folder / "layout.json").read_text())
    except FileNotFoundError as e:
        raise FileNotFoundError(f"missing compile artifact next to the schedule: {e.filename}") from None
    g = place_factories(build_layout(run["L"], run["r"], run["footprint"]), run["n_msf"])
    initial = {int(q): tuple(cell) for q, cell in layout["data_positions"].items()}
    s = Schedule(Schedule.ops_from_jsonl(path.read_text()), g, c, initial, LatencyModel(**run["latency"]))
    rep = validate_schedule(s)
    print(f"{path}: {len(s.ops)} ops, makespan {s.makespan_d:g}d, {len(rep.violations)} violations")
    if not rep.ok:
        print(str(rep), file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lsc", description="Lattice-surgery compiler for routing-path grid layouts.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile", help="compile one circuit")
    c.add_argument("circuit", nargs="?", help="OpenQASM 2 file")
    c.add_argument("--gen", help="generated benchmark, model:L")
    c.add_argument("--r", type=int, required=True, help="routing paths")
    c.add_argument("--factories", type=int, default=1)
    c.add_argument("--t-msf", type=float, default=11.0, help="distillation period in d")
    c.add_argument("--footprint", type=int, default=11, help="factory footprint in tiles")
    c.add_argument("--mapping", choices=["grid2d", "snake1d"], default="grid2d")
    c.add_argument("--unit-cost", action="store_true", help="write the unit-cost schedule")
    c.add_argument("--no-optimize", action="store_true", help="keep redundant moves")
    c.add_argument("--trace", action="store_true", help="write an ASCII grid trace")
    c.add_argument("--out", default=".")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("sweep", help="sweep routing paths and factory counts")
    s.add_argument("--gen", action="append", required=True, help="model:L, repeatable")
    s.add_argument("--r", required=True, help="e.g. 3,22 or 2-6")
    s.add_argument("--factories", default="1-8")
    s.add_argument("--t-msf", type=float, default=11.0)
    s.add_argument("--footprint", type=int, default=11)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.add_argument("--svg", help="spacetime-vs-factories chart")
    s.add_argument("--scatter", help="exec-time-vs-qubits chart")
    s.add_argument("--raw", action="store_true", help="plot raw rather than per-gate spacetime")
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", help="write a benchmark circuit as QASM")
    b.add_argument("--model", required=True, choices=[m.value for m in Model])
    b.add_argument("--L", type=int, required=True)
    b.add_argument("--steps", type=int, default=1)
    b.add_argument("--out", default=".")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="replay a schedule JSONL written by compile")
    v.add_argument("schedule")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidSpec, LayoutError) as e:
        print(f"lsc: usage error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as e:
        print(f"lsc: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (QasmError, SchedulingDeadlock, Unplaceable, ValueError) as e:
        print(f"lsc: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
