from __future__ import annotations

import io
import logging

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from app.core.errors import CorrectnessError, DataError, PreconditionError, StreamOrderError
from app.services.bench import (
    Interner, RunSpec, SweepPlan, check_agreement, ingest, make_index, parse_edges, parse_synthetic,
    read_csv, render_summary, resolve_window, rows_to_csv, run_isolated, run_spec, summarize, sweep,
    synthesize_stream, uniform_timestamps,
)
from app.services.stream import StreamingEdge

SMALL = dict(synthetic="60:400", alpha=40, beta=5, workload=50, seed=7)


def test_parse_edges_skips_comments_and_blank_lines():
    interner = Interner()
    lines = ["# source: test\n", "a b 1\r\n", "\n", "  b c 2\n", "c a 2"]
    edges = parse_edges(lines, interner=interner)
    assert edges == [StreamingEdge(0, 1, 1), StreamingEdge(1, 2, 2), StreamingEdge(2, 0, 2)]
    assert interner.ids == {"a": 0, "b": 1, "c": 2}


@pytest.mark.parametrize("line,fragment", [
    ("a b c d", "fields"),
    ("a b", "missing timestamp"),
    ("a b x", "not an integer"),
    ("a b -4", "negative"),
])
def test_parse_edges_reports_the_line(line, fragment):
    with pytest.raises(DataError) as info:
        parse_edges(["a b 1", line])
    assert info.value.line == 2
    assert fragment in str(info.value)


def test_parse_edges_rejects_unordered_input():
    with pytest.raises(StreamOrderError) as info:
        parse_edges(["a b 5", "b c 3"])
    assert info.value.position == 1


def test_uniform_mode_replaces_timestamps(caplog):
    with caplog.at_level(logging.WARNING, logger="app.services.bench"):
        edges = parse_edges(["a b", "b c 900", "c d"], timestamp_mode="uniform", t_max=10, seed=3)
    assert "replaced 1 explicit timestamps" in caplog.text
    stamps = [e.t for e in edges]
    assert stamps == sorted(stamps) and all(0 <= t < 10 for t in stamps)
    with pytest.raises(PreconditionError):
        parse_edges(["a b"], timestamp_mode="bogus")


def test_uniform_timestamps_are_uniform():
    t_max = 1000
    sample = uniform_timestamps(5000, t_max, seed=1)
    assert np.all(np.diff(sample) >= 0)
    assert stats.kstest((sample + 0.5) / t_max, "uniform").pvalue > 1e-3


def test_ingest(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# u v t\n1 2 0\n2 3 1\n", encoding="utf-8")
    assert ingest(path) == [StreamingEdge(0, 1, 0), StreamingEdge(1, 2, 1)]
    with pytest.raises(DataError):
        ingest(tmp_path / "missing.txt")
    bad = tmp_path / "latin1.txt"
    bad.write_bytes(b"\xff\xfe 1 2 3\n")
    with pytest.raises(DataError):
        ingest(bad)


def test_synthetic_streams():
    edges = synthesize_stream(200, 3000, seed=4)
    assert edges == synthesize_stream(200, 3000, seed=4)
    assert len(edges) <= 3000 and not any(e.is_loop for e in edges)
    assert [e.t for e in edges] == sorted(e.t for e in edges)
    degree = np.bincount([x for e in edges for x in (e.u, e.v)], minlength=200)
    assert degree[:10].sum() > degree[-10:].sum()
    with pytest.raises(PreconditionError):
        synthesize_stream(1, 10)
    with pytest.raises(PreconditionError):
        synthesize_stream(10, 10, exponent=1.0)


def test_parse_synthetic():
    assert parse_synthetic("10:20") == (10, 20, 2.5)
    assert parse_synthetic("10:20:3") == (10, 20, 3.0)
    for bad in ("10", "a:b", "1:2:3:4"):
        with pytest.raises(PreconditionError):
            parse_synthetic(bad)


@pytest.mark.parametrize("fields", [
    dict(input="x.txt", synthetic="10:20", alpha=5, beta=1),
    dict(alpha=5, beta=1),
    dict(synthetic="10:20", beta=1),
    dict(synthetic="10:20", alpha=5, edges_per_window=10, beta=1),
    dict(synthetic="10:20", alpha=5, beta=1, strategy="bfs"),
    dict(synthetic="ten:20", alpha=5, beta=1),
    dict(synthetic="10:20", alpha=5, beta=1, workload=0),
    dict(synthetic="10:20", alpha=5, beta=1, timestamp_mode="poisson"),
])
def test_run_spec_validation(fields):
    with pytest.raises(ValidationError):
        RunSpec(**fields)


def test_resolve_window():
    stream = [StreamingEdge(0, 1, t) for t in range(10, 20) for _ in range(2)]  # 2 edges per time unit
    spec = RunSpec(synthetic="10:20", edges_per_window=10, edges_per_slide=3)
    config = resolve_window(spec, stream)
    assert (config.alpha, config.beta, config.t0) == (5, 2, 10)
    spec = RunSpec(synthetic="10:20", edges_per_window=10, edges_per_slide=100)
    assert resolve_window(spec, stream).beta == 5
    config = resolve_window(RunSpec(synthetic="10:20", alpha=7, beta=3), stream)
    assert (config.alpha, config.beta, config.t0) == (7, 3, 10)
    with pytest.raises(ValidationError):
        resolve_window(RunSpec(synthetic="10:20", alpha=3, beta=7), stream)
    with pytest.raises(DataError):
        resolve_window(spec, [])


def test_make_index_rejects_unknown_strategies():
    assert make_index("omst-lc").name == "omst-lc"
    with pytest.raises(PreconditionError):
        make_index("bfs")


def test_verified_runs_agree_across_strategies():
    rows = [run_spec(RunSpec(strategy=s, verify=True, **SMALL)) for s in ("omst-d", "omst-lc", "rwc")]
    assert len({r["answer_checksum"] for r in rows}) == 1
    assert all(r["error"] == "" and r["windows"] > 0 for r in rows)
    assert rows[0]["mem_nontree_edges"] == 0
    assert rows[1]["accesses"] > 0


def test_sweep_turns_failures_into_rows(tmp_path):
    good = RunSpec(strategy="omst-s", **SMALL)
    bad = RunSpec(input=str(tmp_path / "missing.txt"), alpha=5, beta=1, strategy="dfs")
    rows = sweep([good, bad], workers=2)
    assert rows[0]["error"] == "" and rows[0]["strategy"] == "omst-s"
    assert rows[1]["error"].startswith("DataError") and rows[1]["edges"] == ""
    with pytest.raises(PreconditionError):
        sweep([])


def test_sweep_measures_peak_memory_per_run():
    big = RunSpec(strategy="omst-s", synthetic="20000:400000", alpha=20000, beta=5000, workload=10)
    tiny = RunSpec(strategy="omst-s", synthetic="10:20", alpha=5, beta=1, workload=2)
    first, second = sweep([big, tiny], workers=1)
    assert first["error"] == second["error"] == ""
    assert 0 < second["peak_mem"] < first["peak_mem"]


def test_run_isolated(tmp_path):
    spec = RunSpec(strategy="omst-lc", **SMALL)
    row = run_isolated(spec)
    assert row["answer_checksum"] == run_spec(spec)["answer_checksum"]
    with pytest.raises(DataError):
        run_isolated(RunSpec(input=str(tmp_path / "missing.txt"), alpha=5, beta=1))
    bad = tmp_path / "bad.txt"
    bad.write_text("a b 1\nb c x\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        run_isolated(RunSpec(input=str(bad), alpha=5, beta=1))
    assert info.value.line == 2
    with pytest.raises(PreconditionError):
        run_isolated(RunSpec(synthetic="10:20", alpha=2, beta=5))


def test_check_agreement():
    a, b = RunSpec(strategy="omst-s", **SMALL), RunSpec(strategy="dfs", **SMALL)
    row = dict(alpha=40, beta=5, workload=50, error="")
    check_agreement([a, b], [{**row, "answer_checksum": "x"}, {**row, "answer_checksum": "x"}])
    check_agreement([a, b], [{**row, "answer_checksum": "x"}, {**row, "answer_checksum": "", "error": "boom"}])
    with pytest.raises(CorrectnessError):
        check_agreement([a, b], [{**row, "answer_checksum": "x"}, {**row, "answer_checksum": "y"}])
    other = RunSpec(strategy="dfs", **{**SMALL, "seed": 8})
    check_agreement([a, other], [{**row, "answer_checksum": "x"}, {**row, "answer_checksum": "y"}])


def test_csv_layout():
    row = run_spec(RunSpec(strategy="omst-s", **SMALL))
    text = rows_to_csv([row])
    header, columns = text.splitlines()[:2]
    assert header == "# swconn-csv v1"
    assert columns.split(",")[0] == "strategy" and columns.split(",")[-2:] == ["answer_checksum", "error"]
    (back,) = read_csv(io.StringIO(text))
    assert back["strategy"] == "omst-s" and back["answer_checksum"] == row["answer_checksum"]


def test_sweep_plan_specs():
    base = RunSpec(strategy="omst-s", **SMALL)
    plan = SweepPlan(base=base, strategies=["omst-s", "dfs"], vary="edges_per_window", values=[50, 100])
    specs = plan.specs()
    assert [(s.strategy, s.edges_per_window, s.alpha) for s in specs] == [
        ("omst-s", 50, None), ("dfs", 50, None), ("omst-s", 100, None), ("dfs", 100, None)]
    assert all(s.beta == 5 for s in specs)
    with pytest.raises(ValidationError):
        SweepPlan(base=base, vary="gamma", values=[1])
    with pytest.raises(ValidationError):
        SweepPlan(base=base, strategies=["bfs"], vary="workload", values=[1])


def test_render_summary():
    plan = SweepPlan(base=RunSpec(**SMALL), strategies=["omst-d", "dfs"], vary="workload", values=[10, 40])
    rows = sweep(plan.specs(), workers=1)
    rows.append({"strategy": "rwc", "error": "DataError: boom"})
    script = render_summary(rows, "workload", prefix="wl")
    assert "$omst_d << EOD" in script and "$dfs << EOD" in script
    assert "$rwc" not in script
    assert 'set output "wl_throughput.png"' in script
    assert "set logscale x" in script
    points = summarize(rows, "workload")
    assert [(p["strategy"], p["x"]) for p in points] == [
        ("omst-d", 10.0), ("omst-d", 40.0), ("dfs", 10.0), ("dfs", 40.0)]
    with pytest.raises(PreconditionError):
        summarize(rows, "gamma")
