import csv
import io
import math
import subprocess
import sys

import pytest

from c3ppl.cli import BENCH_FIELDS, confidence_interval, main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def footer(text):
    kv = {}
    for line in text.splitlines():
        if line.startswith("# "):
            for part in line[2:].split():
                k, v = part.split("=", 1)
                kv[k] = v
    return kv


def test_run_single_flip_accepts_everything():
    code, out = run("run", "--model", "single-flip", "--engine", "c3", "--iters", "100",
                    "--seed", "1")
    assert code == 0
    f = footer(out)
    assert float(f["acceptRate"]) == 1.0
    assert f["burn"] == "10" and f["samples"] == "90"
    assert all(line.startswith("value=") for line in out.splitlines() if not line.startswith("#"))


def test_run_hmm_counters():
    lw = footer(run("run", "--model", "hmm", "--size", "100", "--engine", "lightweight",
                    "--iters", "300", "--seed", "7")[1])
    c3 = footer(run("run", "--model", "hmm", "--size", "100", "--engine", "c3",
                    "--iters", "300", "--seed", "7")[1])
    assert float(lw["mean_nodes_executed"]) == pytest.approx(200, rel=0.2)
    assert float(c3["mean_nodes_executed"]) <= 8


def test_run_writes_query_records(tmp_path):
    dest = tmp_path / "s.txt"
    code, _ = run("run", "--model", "tiny-hmm", "--iters", "50", "--out", str(dest))
    assert code == 0
    lines = [l for l in dest.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 45
    assert all(l.split()[0].startswith("1=") and l.split()[1].startswith("2=") for l in lines)


def test_run_from_file(tmp_path):
    p = tmp_path / "p.c3p"
    p.write_text("(sample bernoulli 0.5)")
    code, out = run("run", "--file", str(p), "--iters", "20", "--engine", "cps")
    assert code == 0 and footer(out)["engine"] == "cps"


def test_run_init_failure_exit_1(tmp_path):
    p = tmp_path / "p.c3p"
    p.write_text("(let ((x (sample bernoulli 0.5))) (observe bernoulli 0.0 true) x)")
    assert run("run", "--file", str(p), "--iters", "5")[0] == 1


@pytest.mark.parametrize("argv", [
    ["run", "--model", "hmm", "--engine", "gibbs"],
    ["run", "--model", "hmm", "--iters", "0"],
    ["run", "--model", "hmm", "--size", "5000"],
    ["run"],
    ["bench", "--sizes", ""],
    ["bench", "--models", "nope"],
    ["bench", "--models", "hmm", "--sizes", "11", "--normalized"],
    ["transform-dump", "--model", "hmm", "--passes", "caching"],
    ["cache-dump", "--model", "hmm", "--engine", "lightweight"],
])
def test_bad_flags_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv, out=io.StringIO())
    assert exc.value.code == 2


def test_bench_rows_and_columns(tmp_path):
    rows_path, summary_path = tmp_path / "rows.csv", tmp_path / "sum.csv"
    code, _ = run("bench", "--models", "hmm", "--sizes", "10..12", "--iters", "40",
                  "--reps", "2", "--csv", str(rows_path), "--summary", str(summary_path))
    assert code == 0
    rows = list(csv.DictReader(rows_path.open()))
    assert len(rows) == 4 * 3 * 2
    assert list(rows[0]) == BENCH_FIELDS
    for r in rows:
        pps = float(r["proposals_per_second"])
        assert pps == pytest.approx(int(r["iterations"]) / float(r["wall_seconds"]), rel=1e-9)
        assert float(r["mean_nodes_executed"]) >= 0
    summary = list(csv.DictReader(summary_path.open()))
    assert len(summary) == 12
    assert {"proposals_per_second_lo", "proposals_per_second_hi"} <= set(summary[0])
    by = {(r["engine"], r["size"]): float(r["mean_nodes_executed"]) for r in summary}
    for size in ("10", "11", "12"):
        assert by[("caching", size)] >= by[("c3", size)]


def test_bench_counters_reproducible():
    argv = ["bench", "--models", "gmm", "--sizes", "1", "--normalized", "--iters", "30",
            "--engines", "c3,lightweight"]
    a = list(csv.DictReader(io.StringIO(run(*argv)[1])))
    b = list(csv.DictReader(io.StringIO(run(*argv)[1])))
    for x, y in zip(a, b):
        for k in BENCH_FIELDS:
            if k not in ("wall_seconds", "proposals_per_second"):
                assert x[k] == y[k]
    assert {r["size"] for r in a} == {"20"}


def test_confidence_interval():
    m, lo, hi = confidence_interval([1.0, 2.0, 3.0])
    # t(0.975, 2) = 4.302653
    assert m == 2.0 and hi - m == pytest.approx(4.302653 / math.sqrt(3), rel=1e-6)
    assert confidence_interval([5.0]) == (5.0, 5.0, 5.0)


def test_compare_passes():
    code, out = run("compare", "--model", "branching", "--iters", "200", "--seeds", "0,1")
    assert code == 0
    assert out.count("pass") == 2


def test_enumerate_single_flip():
    code, out = run("enumerate", "--model", "single-flip")
    assert code == 0
    rows = dict(line.split("\t") for line in out.splitlines())
    assert float(rows["value=true"]) == pytest.approx(0.3, abs=1e-12)
    assert float(rows["value=false"]) == pytest.approx(0.7, abs=1e-12)


def test_enumerate_tiny_hmm_and_gmm():
    code, out = run("enumerate", "--model", "tiny-hmm")
    probs = [float(l.split("\t")[1]) for l in out.splitlines()]
    assert code == 0 and len(probs) == 4 and math.fsum(probs) == pytest.approx(1, abs=1e-9)
    assert run("enumerate", "--model", "gmm")[0] == 1


def test_transform_dump_shows_each_pass():
    code, out = run("transform-dump", "--model", "hmm")
    assert code == 0
    for name in ("source", "after caching", "after tagging", "after addressing", "after cps"):
        assert f";; {name}" in out
    assert "(cache " in out and "(tag " in out
    code, out = run("transform-dump", "--model", "hmm", "--engine", "lightweight")
    assert "after caching" not in out and "after addressing" in out


def test_cache_dump():
    code, out = run("cache-dump", "--model", "tiny-hmm", "--iters", "3")
    assert code == 0
    assert out.count(";; proposal") == 3 and ";; initial" in out


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "c3ppl", "enumerate", "--model", "single-flip"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "value=true" in p.stdout
