#!/usr/bin/env python3
import io
import json

import pandas as pd

from scenario_binpack.bench import CSV_COLUMNS, SUMMARY_COLUMNS
from scenario_binpack.cli import main
from scenario_binpack.formats import read_instance

HEADER = ",".join(CSV_COLUMNS)


def split_solve_output(out: str):
    record, csv = out.split(HEADER, 1)
    return json.loads(record), pd.read_csv(io.StringIO(HEADER + csv))


def test_gen_writes_requested_classes(tmp_path, capsys):
    assert main(["gen", "--out", str(tmp_path), "--n", "10", "--d-mode", "n", "--replicates", "3"]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [f"bpps_n10_d10_s{r}.txt" for r in range(3)]
    assert "Wrote 3 instances" in capsys.readouterr().err


def test_gen_with_explicit_d(tmp_path):
    assert main(["gen", "--out", str(tmp_path), "--n", "8", "--d", "3", "--replicates", "1"]) == 0
    inst = read_instance(tmp_path / "bpps_n8_d3_s0.txt")
    assert (inst.n, inst.d) == (8, 3)


def test_solve_prints_record_and_csv_row(tmp_path, capsys):
    main(["gen", "--out", str(tmp_path), "--n", "10", "--d-mode", "0.5n", "--replicates", "1"])
    capsys.readouterr()
    path = tmp_path / "bpps_n10_d5_s0.txt"
    out_file = tmp_path / "records" / "enum.json"
    assert main(["solve", str(path), "--algo", "enum", "--out", str(out_file)]) == 0
    captured = capsys.readouterr()
    record, row = split_solve_output(captured.out)
    assert record["algorithm"] == "enum"
    assert record["status"] == "optimal"
    assert record["lower_bound"] == record["val_bpps"]
    assert row.loc[0, "class"] == "n10_d5"
    assert row.loc[0, "seed"] == 0
    assert row.loc[0, "ub"] == record["val_bpps"]
    assert json.loads(out_file.read_text())["bins"] == record["bins"]
    assert "Worst-case bins" in captured.err


def test_solve_with_budget_flags(tmp_path, capsys):
    main(["gen", "--out", str(tmp_path), "--n", "10", "--d-mode", "n", "--replicates", "1"])
    path = tmp_path / "bpps_n10_d10_s0.txt"
    capsys.readouterr()
    assert main(["solve", str(path), "--algo", "vns+bp", "--cmax", "3", "--tlimit", "20", "--no-warm-columns"]) == 0
    record, row = split_solve_output(capsys.readouterr().out)
    assert record["algorithm"] == "vns+bp"
    assert record["metadata"]["vns_ub"] >= record["val_bpps"]
    assert row.loc[0, "lb"] <= row.loc[0, "ub"]


def test_bench_writes_csv_files(tmp_path, capsys):
    suite = tmp_path / "suite"
    main(["gen", "--out", str(suite), "--n", "10", "--replicates", "1"])
    out = tmp_path / "results"
    assert main(["bench", str(suite), "--algo", "ffd", "--algo", "enum", "--out", str(out)]) == 0
    rows = pd.read_csv(out / "instances.csv")
    assert len(rows) == 6
    assert list(pd.read_csv(out / "summary.csv").columns) == SUMMARY_COLUMNS
    assert "Benchmark summary" in capsys.readouterr().err


def test_bounds_table(tmp_path, capsys):
    path = tmp_path / "toy.txt"
    path.write_text("3 1 100\n51 1 1\n51 1 1\n51 1 1\n")
    assert main(["bounds", str(path)]) == 0
    out = capsys.readouterr().out
    assert "continuous" in out
    assert "lambda=50" in out


def test_gen_theorem3_writes_worst_case(tmp_path, capsys):
    path = tmp_path / "worst.txt"
    assert main(["gen-theorem3", "--d", "9", "--out", str(path)]) == 0
    inst = read_instance(path)
    assert (inst.n, inst.d) == (3, 9)
    assert "Ratio" in capsys.readouterr().err


def test_errors_exit_with_code_two(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 100\n50 1 3\n")
    assert main(["solve", str(bad), "--algo", "ffd"]) == 2
    assert "InstanceFormatError" in capsys.readouterr().err
    assert main(["bounds", str(tmp_path / "missing.txt")]) == 2
    assert main(["gen-theorem3", "--d", "0", "--out", str(tmp_path / "w.txt")]) == 2
