# app/services/bench.py
"""
Benchmark plumbing behind the CLI and the results API: edge-file ingestion, synthetic
streams, run specs and sweep plans, CSV rows and the gnuplot summary.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.core.config import SWCONN_THREADS
from app.core.constants import CSV_FIELDS, CSV_SCHEMA_VERSION, STRATEGIES, SWEEP_DIMENSIONS
from app.core.errors import CorrectnessError, DataError, PreconditionError, SwconnError
from app.core.templates import render
from app.services.baselines import DfsIndex, RwcIndex, replay_oracle
from app.services.driver import generate_workload, run
from app.services.dtree import MstDTree, OmstDTree, VanillaDTree
from app.services.lctree import OmstLCTree
from app.services.stree import OmstSTree
from app.services.stream import (
    ConnectivityIndex, StreamingEdge, VertexId, WindowConfig, require_ordered,
)

log = logging.getLogger(__name__)

ROW_FIELDS = CSV_FIELDS + ("error",)
TIMESTAMP_MODES = ("explicit", "uniform")

INDEXES: Dict[str, Callable[[], ConnectivityIndex]] = {
    "omst-s": OmstSTree,
    "omst-d": OmstDTree,
    "omst-lc": OmstLCTree,
    "mst-d": MstDTree,
    "vanilla-d": VanillaDTree,
    "rwc": RwcIndex,
    "dfs": DfsIndex,
}


def make_index(strategy: str) -> ConnectivityIndex:
    try:
        return INDEXES[strategy]()
    except KeyError:
        raise PreconditionError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}") from None


# --------------------------------- ingestion -------------------------------- #

class Interner:
    """Dense integer ids for vertex labels, in first-appearance order."""

    def __init__(self) -> None:
        self.ids: Dict[str, VertexId] = {}

    def __call__(self, label: str) -> VertexId:
        vid = self.ids.get(label)
        if vid is None:
            vid = self.ids[label] = len(self.ids)
        return vid

    def __len__(self) -> int:
        return len(self.ids)


def uniform_timestamps(n: int, t_max: int, seed: int) -> np.ndarray:
    """n sorted uniform integer timestamps over [0, t_max)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return np.sort(rng.integers(0, t_max, size=n))


def parse_edges(lines: Iterable[str], timestamp_mode: str = "explicit", t_max: Optional[int] = None,
                seed: int = 0, interner: Optional[Interner] = None) -> List[StreamingEdge]:
    if timestamp_mode not in TIMESTAMP_MODES:
        raise PreconditionError(f"timestamp mode must be one of {TIMESTAMP_MODES}, got {timestamp_mode!r}")
    intern = interner if interner is not None else Interner()
    ends: List[Tuple[VertexId, VertexId]] = []
    stamps: List[int] = []
    ignored = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DataError(f"expected 'u v' or 'u v t', got {len(parts)} fields", lineno)
        if timestamp_mode == "explicit":
            if len(parts) != 3:
                raise DataError("missing timestamp (use --timestamp-mode uniform)", lineno)
            try:
                t = int(parts[2])
            except ValueError:
                raise DataError(f"timestamp {parts[2]!r} is not an integer", lineno) from None
            if t < 0:
                raise DataError(f"negative timestamp {t}", lineno)
            stamps.append(t)
        elif len(parts) == 3:
            ignored += 1
        ends.append((intern(parts[0]), intern(parts[1])))

    if timestamp_mode == "uniform":
        if ignored:
            log.warning("uniform mode: replaced %d explicit timestamps", ignored)
        horizon = t_max if t_max is not None else max(1, len(ends))
        if horizon < 1:
            raise PreconditionError(f"t_max must be >= 1, got {horizon}")
        stamps = uniform_timestamps(len(ends), horizon, seed).tolist()
    edges = [StreamingEdge(u, v, int(t)) for (u, v), t in zip(ends, stamps)]
    require_ordered(edges)
    return edges


def ingest(path: str | Path, timestamp_mode: str = "explicit", t_max: Optional[int] = None,
           seed: int = 0) -> List[StreamingEdge]:
    """Read a whitespace-separated edge list; `#` lines are comments."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            edges = parse_edges(fh, timestamp_mode, t_max, seed)
    except FileNotFoundError:
        raise DataError(f"no such input file: {path}") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not UTF-8: {exc}") from None
    log.info("ingested %d edges from %s", len(edges), path)
    return edges


def synthesize_stream(vertices: int, edges: int, exponent: float = 2.5, seed: int = 0,
                      t_max: Optional[int] = None) -> List[StreamingEdge]:
    """
    Power-law stream: endpoints drawn independently with weight rank^(-1/(exponent-1)),
    which gives a degree tail with the requested exponent. Self-loops are dropped, so the
    result can be slightly shorter than `edges`.
    """
    if vertices < 2 or edges < 1:
        raise PreconditionError("a synthetic stream needs >= 2 vertices and >= 1 edge")
    if exponent <= 1:
        raise PreconditionError(f"exponent must be > 1, got {exponent}")
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = np.arange(1, vertices + 1, dtype=np.float64) ** (-1.0 / (exponent - 1.0))
    weights /= weights.sum()
    us = rng.choice(vertices, size=edges, p=weights)
    vs = rng.choice(vertices, size=edges, p=weights)
    stamps = np.sort(rng.integers(0, t_max or edges, size=edges))
    keep = us != vs
    return [StreamingEdge(int(u), int(v), int(t)) for u, v, t in zip(us[keep], vs[keep], stamps[keep])]


def parse_synthetic(text: str) -> Tuple[int, int, float]:
    """'N:M[:exponent]' -> (vertices, edges, exponent)."""
    parts = text.split(":")
    try:
        if len(parts) not in (2, 3):
            raise ValueError
        n, m = int(parts[0]), int(parts[1])
        exponent = float(parts[2]) if len(parts) == 3 else 2.5
    except ValueError:
        raise PreconditionError(f"synthetic stream must look like N:M[:exponent], got {text!r}") from None
    return n, m, exponent


# --------------------------------- run specs -------------------------------- #

class RunSpec(BaseModel):
    input: Optional[str] = None
    synthetic: Optional[str] = Field(None, description="N:M[:exponent] power-law stream")
    strategy: str = "omst-d"
    alpha: Optional[int] = Field(None, ge=1)
    beta: Optional[int] = Field(None, ge=1)
    edges_per_window: Optional[int] = Field(None, ge=1)
    edges_per_slide: Optional[int] = Field(None, ge=1)
    workload: int = Field(1000, ge=1)
    seed: int = 0
    timestamp_mode: str = "explicit"
    t_max: Optional[int] = Field(None, ge=1)
    out: Optional[str] = None
    verify: bool = False
    resample: bool = False
    compact_every: int = Field(0, ge=0)

    @field_validator("strategy")
    @classmethod
    def _known_strategy(cls, v: str) -> str:
        if v not in STRATEGIES:
            raise ValueError(f"unknown strategy {v!r}; expected one of {', '.join(STRATEGIES)}")
        return v

    @field_validator("timestamp_mode")
    @classmethod
    def _known_mode(cls, v: str) -> str:
        if v not in TIMESTAMP_MODES:
            raise ValueError(f"timestamp mode must be one of {TIMESTAMP_MODES}")
        return v

    @model_validator(mode="after")
    def _consistent(self) -> "RunSpec":
        if (self.input is None) == (self.synthetic is None):
            raise ValueError("give exactly one of input or synthetic")
        if (self.alpha is None) == (self.edges_per_window is None):
            raise ValueError("give exactly one of alpha or edges_per_window")
        if (self.beta is None) == (self.edges_per_slide is None):
            raise ValueError("give exactly one of beta or edges_per_slide")
        if self.synthetic is not None:
            try:
                parse_synthetic(self.synthetic)
            except PreconditionError as exc:
                raise ValueError(str(exc)) from None
        return self

    def source_key(self) -> Tuple:
        """Everything that determines the stream, workload and windows (not the strategy)."""
        return (self.input, self.synthetic, self.alpha, self.beta, self.edges_per_window,
                self.edges_per_slide, self.workload, self.seed, self.timestamp_mode,
                self.t_max, self.resample)


class SweepPlan(BaseModel):
    base: RunSpec
    strategies: List[str] = Field(default_factory=lambda: list(STRATEGIES))
    vary: str
    values: List[int] = Field(..., min_length=1)

    @field_validator("vary")
    @classmethod
    def _known_dimension(cls, v: str) -> str:
        if v not in SWEEP_DIMENSIONS:
            raise ValueError(f"vary must be one of {', '.join(SWEEP_DIMENSIONS)}")
        return v

    @field_validator("strategies")
    @classmethod
    def _known_strategies(cls, v: List[str]) -> List[str]:
        bad = [s for s in v if s not in STRATEGIES]
        if bad or not v:
            raise ValueError(f"unknown or empty strategies: {bad}")
        return v

    def specs(self) -> List[RunSpec]:
        # a window dimension replaces its counterpart sizing mode
        partner = {"alpha": "edges_per_window", "edges_per_window": "alpha",
                   "beta": "edges_per_slide", "edges_per_slide": "beta"}.get(self.vary)
        out = []
        base = self.base.model_dump()
        for value in self.values:
            for strategy in self.strategies:
                fields = {**base, "strategy": strategy, self.vary: value}
                if partner:
                    fields[partner] = None
                out.append(RunSpec.model_validate(fields))
        return out


def load_stream(spec: RunSpec) -> List[StreamingEdge]:
    if spec.synthetic is not None:
        n, m, exponent = parse_synthetic(spec.synthetic)
        return synthesize_stream(n, m, exponent, spec.seed, spec.t_max)
    return ingest(spec.input, spec.timestamp_mode, spec.t_max, spec.seed)


def resolve_window(spec: RunSpec, stream: Sequence[StreamingEdge]) -> WindowConfig:
    """Window in time units; edge-count sizes go through the mean edges per time unit."""
    t0 = stream[0].t if stream else 0
    alpha, beta = spec.alpha, spec.beta
    if spec.edges_per_window is not None or spec.edges_per_slide is not None:
        if not stream:
            raise DataError("cannot size windows by edge count on an empty stream")
        span = stream[-1].t - stream[0].t + 1
        rate = len(stream) / span
        if spec.edges_per_window is not None:
            alpha = max(1, math.ceil(spec.edges_per_window / rate))
        if spec.edges_per_slide is not None:
            beta = max(1, math.ceil(spec.edges_per_slide / rate))
        beta = min(beta, alpha)
    return WindowConfig(alpha=alpha, beta=beta, t0=t0)


def run_spec(spec: RunSpec) -> Dict[str, object]:
    """Execute one spec and return its CSV row. --verify compares every window to the oracle."""
    stream = load_stream(spec)
    config = resolve_window(spec, stream)
    universe = sorted({x for e in stream for x in (e.u, e.v)})
    workload = generate_workload(universe, spec.workload, spec.seed)
    index = make_index(spec.strategy)
    log.info("run %s alpha=%d beta=%d workload=%d", spec.strategy, config.alpha, config.beta, workload.size)
    report, answers = run(stream, config, index, workload, resample=spec.resample,
                          universe=universe, compact_every=spec.compact_every)
    if spec.verify:
        if spec.resample:
            raise PreconditionError("--verify does not support --resample")
        truth = replay_oracle(stream, config, workload.pairs)
        if truth != answers:
            bad = next((i for i, (a, b) in enumerate(zip(answers, truth)) if a != b), min(len(answers), len(truth)))
            raise CorrectnessError(f"{spec.strategy}: answers differ from the oracle at window {bad}")
    return {
        "strategy": spec.strategy,
        "alpha": config.alpha,
        "beta": config.beta,
        "workload": workload.size,
        "edges": report.edges,
        "windows": report.windows,
        "seconds": report.seconds,
        "throughput": report.throughput,
        "ns_per_edge": report.ns_per_edge,
        "q_p95": report.q_p95,
        "q_p99": report.q_p99,
        "wm_p95": report.wm_p95,
        "wm_p99": report.wm_p99,
        "mem_vertices": report.mem_vertices,
        "mem_tree_edges": report.mem_tree_edges,
        "mem_nontree_edges": report.mem_nontree_edges,
        "mem_words": report.mem_words,
        "peak_mem": report.peak_mem,
        "replacement_searches": report.counters.get("replacement_searches", 0),
        "accesses": report.counters.get("accesses", 0),
        "answer_checksum": report.answer_checksum,
        "error": "",
    }


def _failed_row(spec: RunSpec, exc: Exception) -> Dict[str, object]:
    row: Dict[str, object] = {k: "" for k in ROW_FIELDS}
    row.update(strategy=spec.strategy, alpha=spec.alpha or "", beta=spec.beta or "",
               workload=spec.workload, error=f"{type(exc).__name__}: {exc}")
    return row


def _isolated_pool(workers: int) -> ProcessPoolExecutor:
    # a fresh interpreter per run, so peak_mem is that run's high-water mark
    return ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("spawn"),
                               max_tasks_per_child=1)


def _row_or_failure(spec: RunSpec) -> Dict[str, object]:
    try:
        return run_spec(spec)
    except (SwconnError, ValueError) as exc:
        log.warning("sweep row %s failed: %s", spec.strategy, exc)
        return _failed_row(spec, exc)


def _row_or_raise(spec: RunSpec) -> Dict[str, object]:
    try:
        return run_spec(spec)
    except ValidationError as exc:
        # an explicit beta > alpha surfaces from WindowConfig; callers map the toolkit error
        raise PreconditionError(str(exc)) from None


def sweep(specs: Sequence[RunSpec], workers: int = SWCONN_THREADS) -> List[Dict[str, object]]:
    """Run every spec in its own worker process; a failing run becomes a row with `error` set."""
    if not specs:
        raise PreconditionError("sweep needs at least one run spec")
    workers = max(1, min(workers, len(specs)))
    with _isolated_pool(workers) as pool:
        rows = list(pool.map(_row_or_failure, specs))
    log.info("sweep finished: %d rows, %d failed", len(rows), sum(1 for r in rows if r["error"]))
    return rows


def run_isolated(spec: RunSpec) -> Dict[str, object]:
    """run_spec in a worker process of its own; toolkit errors are re-raised here."""
    with _isolated_pool(1) as pool:
        return pool.submit(_row_or_raise, spec).result()


def check_agreement(specs: Sequence[RunSpec], rows: Sequence[Dict[str, object]]) -> None:
    """Successful runs over the same stream, windows and workload must share one checksum."""
    seen: Dict[Tuple, Tuple[str, object]] = {}
    for spec, row in zip(specs, rows):
        if row.get("error"):
            continue
        key = spec.source_key()
        first = seen.setdefault(key, (spec.strategy, row["answer_checksum"]))
        if first[1] != row["answer_checksum"]:
            raise CorrectnessError(
                f"{spec.strategy} disagrees with {first[0]} (alpha={row['alpha']}, beta={row['beta']}, "
                f"workload={row['workload']})")


# ----------------------------------- output --------------------------------- #

def write_csv(rows: Iterable[Dict[str, object]], out: TextIO) -> None:
    out.write(f"# swconn-csv v{CSV_SCHEMA_VERSION}\n")
    writer = csv.DictWriter(out, fieldnames=ROW_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def rows_to_csv(rows: Iterable[Dict[str, object]]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(src: TextIO) -> List[Dict[str, str]]:
    lines = (line for line in src if not line.startswith("#"))
    return list(csv.DictReader(lines))


# sweep dimension -> row column used as the x axis
_AXIS = {"workload": "workload", "alpha": "alpha", "edges_per_window": "alpha",
         "beta": "beta", "edges_per_slide": "beta"}

_METRICS = (
    {"name": "throughput", "column": 2, "title": "Throughput", "ylabel": "edges / s", "logscale_y": True},
    {"name": "query_p99", "column": 3, "title": "Query latency (P99)", "ylabel": "ms", "logscale_y": True},
    {"name": "wm_p99", "column": 4, "title": "Window management latency (P99)", "ylabel": "ms", "logscale_y": True},
    {"name": "memory", "column": 5, "title": "Logical memory", "ylabel": "words", "logscale_y": False},
)


def summarize(rows: Iterable[Dict[str, object]], dimension: str) -> List[Dict[str, object]]:
    """One point per (strategy, sweep value), sorted; failed rows are skipped."""
    axis = _AXIS.get(dimension)
    if axis is None:
        raise PreconditionError(f"unknown sweep dimension {dimension!r}")
    points = []
    for row in rows:
        if row.get("error"):
            continue
        points.append({"strategy": row["strategy"], "x": float(row[axis]),
                       "throughput": row["throughput"], "q_p99": row["q_p99"],
                       "wm_p99": row["wm_p99"], "mem_words": row["mem_words"]})
    points.sort(key=lambda p: (STRATEGIES.index(p["strategy"]), p["x"]))
    return points


def render_summary(rows: Iterable[Dict[str, object]], dimension: str, prefix: str = "summary") -> str:
    """gnuplot script with one inline data block per strategy."""
    points = summarize(rows, dimension)
    series = []
    for strategy in STRATEGIES:
        mine = [p for p in points if p["strategy"] == strategy]
        if mine:
            series.append({"strategy": strategy, "block": strategy.replace("-", "_"), "points": mine})
    return render(
        "summary.gp.j2",
        schema_version=CSV_SCHEMA_VERSION,
        dimension=dimension,
        logscale_x=dimension == "workload",
        series=series,
        metrics=_METRICS,
        prefix=prefix,
    )
