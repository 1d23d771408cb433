import random
import re
from pathlib import Path

import pytest

from logram import bench
from logram.cli import main, read_config
from logram.isa import MachineConfig
from logram.mulgen import build

from _traps import TRAP_CASES, TRAP_DIR

DATA = Path(__file__).parent / "data"


def drop_wall(text):
    return [line.rsplit(",", 1)[0] for line in text.splitlines()]


def test_parse_sizes():
    assert bench.parse_sizes("4096:65536:x2") == [4096, 8192, 16384, 32768, 65536]
    assert bench.parse_sizes("64:1024:x4") == [64, 256, 1024]
    assert bench.parse_sizes("64, 128") == [64, 128]
    for bad in ("64:32:x2", "64:128", "64:128:x1", "64:128:2"):
        with pytest.raises(ValueError):
            bench.parse_sizes(bad)


def test_padded_size():
    assert bench.padded_size("school", 3) == 64
    assert bench.padded_size("karatsuba", 1000) == 1024
    assert bench.padded_size("ssf", 5000) == 8192
    assert bench.padded_size("toom3", 1) == 256


def test_operands_reproducible():
    assert bench.operands(3, 64, 1) == bench.operands(3, 64, 1)
    assert bench.operands(3, 64, 1) != bench.operands(3, 64, 2)
    a, b = bench.operands(0, 100, 0)
    assert a < 1 << 100 and b < 1 << 100


def test_sweep_rows_order_and_invariant():
    spec = bench.SweepSpec(["school", "add"], [128, 64], ["depth", "unit"], trials=2, seed=5)
    rows = bench.sweep_rows(spec, MachineConfig(n=64))
    keys = [(r["algorithm"], r["n"], r["model"], r["trial"]) for r in rows]
    assert keys == [(a, n, m, t) for a in ("add", "school") for n in (64, 128)
                    for m in ("unit", "depth") for t in (0, 1)]
    for r in rows:
        parts = sum(r[c] for c in bench.CLASS_COLUMNS) + r["access_cost"]
        assert r["total_cost"] == parts
        assert (r["access_cost"] == 0) == (r["model"] == "unit")
    text = bench.rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(bench.CSV_COLUMNS)


@pytest.mark.parametrize("spec", [
    bench.SweepSpec(["fft"], [64]),
    bench.SweepSpec(["ssc"], [1024]),
    bench.SweepSpec(["add"], [96]),
    bench.SweepSpec(["add"], [64], ["tm"]),
    bench.SweepSpec(["add"], [64], trials=0),
    bench.SweepSpec(["add"], [64], seed=-1),
])
def test_sweep_spec_validation(spec):
    with pytest.raises(ValueError):
        spec.validate()


def test_mean_costs_and_fit_report():
    rows = bench.read_csv(DATA / "sweep_fixture.csv")
    means = bench.mean_costs(rows)
    assert means[("ssc", "unit")][4096] == 730 * 4096 + 3.5
    text, ranking = bench.fit_report(rows, "ssc", "unit")
    assert "best_shape=n\n" in text
    assert ranking[0].form.shape == "n"
    assert ranking[0].residual < 1e-3
    text, ranking = bench.fit_report(rows, "school", "unit")
    assert ranking[0].form.shape == "(n/log n)^2"
    with pytest.raises(Exception):
        bench.fit_report(rows, "karatsuba", "unit")


def test_svg_golden():
    rows = bench.read_csv(DATA / "sweep_fixture.csv")
    assert bench.svg_chart(rows) == (DATA / "sweep_fixture.svg").read_text()


def test_svg_ignores_wall_clock():
    rows = bench.read_csv(DATA / "sweep_fixture.csv")
    shuffled = [dict(r, wall_ms="999.9") for r in rows]
    assert bench.svg_chart(shuffled) == bench.svg_chart(rows)


def test_execute_reports_mismatch():
    prog, _ = build("add", 64, MachineConfig(n=64))
    with pytest.raises(bench.OracleMismatch):
        bench.execute(prog, "school", 64, 3, 4, MachineConfig(n=64))


# -- command line -------------------------------------------------------------

def test_cli_mul(tmp_path, capsys):
    code = main(["mul", "--alg", "school", "--a-hex", "6", "--b-hex", "7",
                 "--programs", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "product=0x2A\n" in out and "n=64\n" in out and "oracle=ok\n" in out
    assert re.search(r"^total_cost=\d+$", out, re.M)
    assert (tmp_path / "school_64.lram").exists()


def test_cli_add_depth(tmp_path, capsys):
    code = main(["mul", "--alg", "add", "--a-hex", "0xFFFFFFFFFFFFFFFF", "--b-hex", "1",
                 "--model", "depth", "--programs", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0 and "sum=0x10000000000000000\n" in out
    assert int(re.search(r"^access_cost=(\d+)$", out, re.M).group(1)) > 0


def test_cli_operands_too_long(tmp_path, capsys):
    code = main(["mul", "--alg", "school", "--a-hex", "1" + "0" * 40, "--b-hex", "1",
                 "--n", "64", "--programs", str(tmp_path)])
    assert code == 1
    assert "do not fit" in capsys.readouterr().err


def _tamper(tmp_path, alg, n, body):
    build(alg, n, MachineConfig(n=n), cache_dir=tmp_path)
    (tmp_path / f"{alg}_{n}.lram").write_text(f".tape 2n\n{body}")


def test_cli_oracle_mismatch_exit_code(tmp_path, capsys):
    _tamper(tmp_path, "school", 64, "out R1, #32\n" * 4 + "halt\n")
    code = main(["mul", "--alg", "school", "--a-hex", "6", "--b-hex", "7",
                 "--programs", str(tmp_path)])
    assert code == 20
    assert "disagrees" in capsys.readouterr().err


def test_cli_precision_exit_code(tmp_path, capsys):
    body = ("not R1, #0\n"
            "loop:\n  out R1, #64\n  add R2, R2, #1\n  jeq R2, #128, done\n"
            "  jeq #0, #0, loop\ndone:\n  halt\n")
    _tamper(tmp_path, "ssc", 4096, body)
    code = main(["mul", "--alg", "ssc", "--a-hex", "3", "--b-hex", "5",
                 "--programs", str(tmp_path)])
    assert code == 10
    assert "precision" in capsys.readouterr().err


@pytest.mark.parametrize("stem", sorted(TRAP_CASES))
def test_cli_trap_exit_codes(stem, capsys):
    kind, pc, code = TRAP_CASES[stem]
    got = main(["run", str(TRAP_DIR / f"{stem}.lram"), "--n", "256", "--c", "2",
                "--max-steps", "1000"])
    captured = capsys.readouterr()
    assert got == code
    assert f"status={kind}\n" in captured.out
    assert f"{kind} at pc {pc}" in captured.err


def test_cli_run_golden(tmp_path, capsys):
    src = tmp_path / "inc.lram"
    src.write_text(".tape 8\nin R1, #0, #7\nadd R2, R1, #1\nout R2, #8\nhalt\n")
    assert main(["run", str(src), "--n", "256", "--c", "2", "--tape-hex", "05",
                 "--model", "depth", "--trace"]) == 0
    out = capsys.readouterr().out
    assert "output=0x6\n" in out and "total_cost=13\n" in out
    assert out.startswith("0\tin R1, #0, #7\t0,7\t4\n")


def test_cli_asm(tmp_path, capsys):
    src = tmp_path / "p.lram"
    src.write_text("x:  ADD r1, r1, #0x10\n jeq r1, #32, x\n")
    assert main(["asm", str(src), "-o", str(tmp_path / "out.lram")]) == 0
    assert (tmp_path / "out.lram").read_text() == (
        ".name p\nx:\n    add R1, R1, #16\n    jeq R1, #32, x\n")
    src.write_text("jeq R0, R0, nowhere\n")
    assert main(["asm", str(src)]) == 1
    assert "undefined label" in capsys.readouterr().err


def test_cli_asm_validation(tmp_path, capsys):
    src = tmp_path / "p.lram"
    src.write_text("out R1, #100000\n")
    assert main(["asm", str(src), "--n", "256"]) == 1
    assert "argument bound exceeded" in capsys.readouterr().err


def test_cli_predict(capsys):
    assert main(["predict", "--alg", "fr", "--model", "tm", "--n", str(2 ** 16 + 1)]) == 0
    out = capsys.readouterr().out
    assert "shape=n log n 2^log* n\n" in out and "log_star=5\n" in out
    assert main(["predict", "--alg", "fr", "--model", "tm", "--n", str(2 ** 16 + 1),
                 "--corrected-exponent"]) == 0
    assert "shape=n log n 2^max(0,log* n-4)\n" in capsys.readouterr().out
    assert main(["predict", "--alg", "ssc", "--model", "unit", "--n", "8", ]) == 1


def test_cli_fit_and_plot(tmp_path, capsys):
    assert main(["fit", str(DATA / "sweep_fixture.csv"), "--alg", "ssf"]) == 0
    assert "best_shape=n loglog n\n" in capsys.readouterr().out
    out = tmp_path / "chart.svg"
    assert main(["plot", str(DATA / "sweep_fixture.csv"), "-o", str(out)]) == 0
    assert out.read_text() == (DATA / "sweep_fixture.svg").read_text()


def test_cli_empty_csv(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(bench.CSV_COLUMNS) + "\n")
    assert main(["fit", str(empty), "--alg", "ssc"]) == 1
    assert main(["plot", str(empty), "-o", str(tmp_path / "x.svg")]) == 1
    (tmp_path / "bad.csv").write_text("algorithm,n\n")
    assert main(["fit", str(tmp_path / "bad.csv"), "--alg", "ssc"]) == 1
    assert "missing columns" in capsys.readouterr().err


def test_cli_usage_errors():
    for argv in ([], ["mul", "--alg", "fft", "--a-hex", "1", "--b-hex", "1"], ["frobnicate"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "machine.cfg"
    cfg.write_text("# machine\nc = 3\nB=16\nmaxSteps=0x100\n")
    assert read_config(str(cfg)) == {"c": 3, "block": 16, "max_steps": 256}
    src = tmp_path / "p.lram"
    src.write_text("add R1, #255, #0\nadd R1, R1, #1\nout R1, #12\nhalt\n")
    # W = 3 * 4 = 12 bits at n = 16
    assert main(["run", str(src), "--n", "16", "--config", str(cfg)]) == 0
    assert main(["run", str(src), "--n", "16", "--config", str(cfg), "--c", "2"]) == 11
    cfg.write_text("W=3\n")
    assert main(["run", str(src), "--n", "16", "--config", str(cfg)]) == 1
    assert "expected c=" in capsys.readouterr().err


def test_cli_sweep_deterministic(tmp_path):
    texts, charts = [], []
    for i in range(2):
        out = tmp_path / f"s{i}.csv"
        argv = ["sweep", "--algs", "add,school", "--sizes", "64:512:x2", "--models",
                "unit,depth", "--trials", "2", "--seed", "11", "--out", str(out),
                "--programs", str(tmp_path / f"prog{i}")]
        assert main(argv) == 0
        texts.append(out.read_text())
        svg = tmp_path / f"s{i}.svg"
        assert main(["plot", str(out), "-o", str(svg)]) == 0
        charts.append(svg.read_bytes())
    assert drop_wall(texts[0]) == drop_wall(texts[1])
    assert charts[0] == charts[1]
    assert len(texts[0].splitlines()) == 1 + 2 * 4 * 2 * 2
    assert main(["fit", str(tmp_path / "s0.csv"), "--alg", "school"]) == 0


def test_cli_sweep_rejects_bad_spec(capsys):
    assert main(["sweep", "--algs", "ssc", "--sizes", "1024", "--trials", "1"]) == 1
