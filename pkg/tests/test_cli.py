import csv
import io
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from lsc.cli import EXIT_ERROR, EXIT_INVALID, EXIT_OK, main, parse_gen, parse_int_list
from lsc.metrics import CSV_COLUMNS

GOLDEN_HEADER = ("benchmark,L,r,n_MSF,t_MSF_d,qubits_excl,qubits_incl,exec_time_d,unit_cost_time_d,"
                 "lower_bound_d,spacetime_excl,spacetime_incl,cpi_d,spacetime_excl_per_gate,"
                 "spacetime_incl_per_gate,error")


def test_parsers():
    assert parse_gen("ising:10") == ("ising", 10)
    assert parse_int_list("1-3,7") == [1, 2, 3, 7]
    with pytest.raises(Exception):
        parse_gen("ising")
    with pytest.raises(Exception):
        parse_int_list("3-1")


def test_compile_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["compile", "--gen", "ising:2", "--r", "2", "--factories", "1", "--trace", "--out", str(out)]) == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert line.startswith("ising_2x2:") and "violations=0" in line
    for name in ("schedule.jsonl", "metrics.json", "circuit.json", "layout.json", "run.json", "trace.txt"):
        assert (out / name).is_file()
    m = json.loads((out / "metrics.json").read_text())
    assert m["exec_time_d"] >= m["lower_bound_d"] == 88
    assert main(["validate", str(out / "schedule.jsonl")]) == EXIT_OK


def test_compile_qasm_file(tmp_path, capsys):
    src = tmp_path / "bell.qasm"
    src.write_text('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\nt q[1];\n')
    assert main(["compile", str(src), "--r", "2", "--out", str(tmp_path / "o")]) == EXIT_OK
    assert capsys.readouterr().out.startswith("bell:")


def test_validate_detects_tampering(tmp_path, capsys):
    out = tmp_path / "run"
    main(["compile", "--gen", "ising:2", "--r", "3", "--out", str(out)])
    lines = (out / "schedule.jsonl").read_text().splitlines()
    ops = [json.loads(x) for x in lines]
    gate = next(op for op in ops if op["kind"] == "gate")
    gate["duration_ticks"] += 1
    (out / "schedule.jsonl").write_text("".join(json.dumps(op) + "\n" for op in ops))
    assert main(["validate", str(out / "schedule.jsonl")]) == EXIT_INVALID


def test_usage_errors(tmp_path, capsys):
    assert main(["compile", "--gen", "ising:2", "--r", "23"]) == EXIT_ERROR
    assert "usage error" in capsys.readouterr().err
    assert main(["compile", str(tmp_path / "missing.qasm"), "--r", "2"]) == EXIT_ERROR
    assert "not found" in capsys.readouterr().err
    assert main(["bench", "--model", "fermihubbard", "--L", "3", "--out", str(tmp_path)]) == EXIT_ERROR
    with pytest.raises(SystemExit) as e:
        main(["compile"])
    assert e.value.code == EXIT_ERROR


@pytest.mark.parametrize("model,counts", [
    ("heisenberg", {"H": 1440, "CNOT": 1080, "RZ": 540, "S": 360, "Sdg": 360}),
    ("ising", {"CNOT": 360, "RZ": 280, "H": 300}),
])
def test_bench_table(tmp_path, capsys, model, counts):
    assert main(["bench", "--model", model, "--L", "10", "--out", str(tmp_path)]) == EXIT_OK
    table = dict(line.split() for line in capsys.readouterr().out.splitlines()[1:])
    assert {k: int(v) for k, v in table.items() if k != "total"} == counts
    assert (tmp_path / f"{model}_10x10.qasm").is_file()


def _sweep(tmp_path, name, *extra):
    csv_path = tmp_path / f"{name}.csv"
    code = main(["sweep", "--gen", "ising:2", "--r", "2,4", "--factories", "1-2", "--out", str(csv_path), *extra])
    return code, csv_path.read_text()


def test_sweep_csv(tmp_path):
    code, text = _sweep(tmp_path, "a", "--svg", str(tmp_path / "a.svg"), "--scatter", str(tmp_path / "s.svg"))
    assert code == EXIT_OK
    assert text.splitlines()[0] == GOLDEN_HEADER == ",".join(CSV_COLUMNS)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [(row["r"], row["n_MSF"]) for row in rows] == [("2", "1"), ("2", "2"), ("4", "1"), ("4", "2")]
    for row in rows:
        exec_d = float(row["exec_time_d"])
        assert row["error"] == ""
        assert float(row["spacetime_excl"]) == pytest.approx(int(row["qubits_excl"]) * exec_d)
        assert float(row["spacetime_incl"]) == pytest.approx(int(row["qubits_incl"]) * exec_d)
        assert exec_d >= float(row["lower_bound_d"])
    # byte-identical on a repeat run
    assert _sweep(tmp_path, "b")[1] == text
    for svg in ("a.svg", "s.svg"):
        root = ET.fromstring((tmp_path / svg).read_text())
        assert root.tag.endswith("svg") and root.get("viewBox") == "0 0 960 600"


def test_sweep_t_free_benchmark_ignores_distillation(tmp_path, capsys):
    src = tmp_path / "ghz.qasm"
    src.write_text("qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];")
    results = []
    for t in ("11", "20"):
        out = tmp_path / t
        assert main(["compile", str(src), "--r", "2", "--t-msf", t, "--out", str(out)]) == EXIT_OK
        results.append(json.loads((out / "metrics.json").read_text())["spacetime_incl"])
    assert results[0] == results[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lsc", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "compile" in proc.stdout
