# app/services/driver.py
"""
Sliding-window replay: inserts on arrival, and at every window boundary the query batch
first, then the expirations. Latencies are per batch.

A window w_i completes when the first edge with t > w_i.t_e arrives; at end of stream
windows keep completing until every live edge has expired.
"""
from __future__ import annotations

import hashlib
import logging
import resource
import time
from collections import deque
from typing import Deque, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.core.constants import WORKLOAD_PRNG
from app.core.errors import PreconditionError, StreamOrderError
from app.services.stream import (
    ConnectivityIndex, StreamingEdge, VertexId, WindowConfig, WindowSnapshot, expiry_horizon,
    window_bounds,
)

log = logging.getLogger(__name__)

Pair = Tuple[VertexId, VertexId]


class Workload(BaseModel):
    pairs: List[Pair] = Field(default_factory=list)
    seed: int = 0
    prng: str = WORKLOAD_PRNG

    @property
    def size(self) -> int:
        return len(self.pairs)


class LatencyRecord(NamedTuple):
    index: int
    query_ns: int
    wm_ns: int


class MetricsReport(BaseModel):
    """Run totals. Latencies in milliseconds, throughput in edges per second."""

    strategy: str
    edges: int = 0
    windows: int = 0
    seconds: float = 0.0
    throughput: float = 0.0
    ns_per_edge: float = 0.0
    q_p95: float = 0.0
    q_p99: float = 0.0
    wm_p95: float = 0.0
    wm_p99: float = 0.0
    mem_vertices: int = 0
    mem_tree_edges: int = 0
    mem_nontree_edges: int = 0
    mem_words: int = 0
    peak_mem: int = 0
    counters: Dict[str, int] = Field(default_factory=dict)
    dropped_loops: int = 0
    skipped_early: int = 0
    answer_checksum: str = ""


def generate_workload(universe: Iterable[VertexId], size: int, seed: int) -> Workload:
    """Uniform i.i.d. pairs with distinct endpoints, reproducible from seed."""
    if size < 1:
        raise PreconditionError(f"workload size must be >= 1, got {size}")
    verts = np.unique(np.fromiter(universe, dtype=np.int64))
    n = len(verts)
    if n < 2:
        raise PreconditionError(f"workload universe needs at least 2 vertices, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.integers(0, n, size=size)
    b = rng.integers(0, n - 1, size=size)
    b += b >= a  # skip a: uniform over the other n-1 vertices
    pairs = [(int(x), int(y)) for x, y in zip(verts[a], verts[b])]
    return Workload(pairs=pairs, seed=seed)


def percentiles_ms(samples_ns: Sequence[int]) -> Tuple[float, float]:
    if not samples_ns:
        return 0.0, 0.0
    p95, p99 = np.percentile(np.asarray(samples_ns, dtype=np.float64), [95, 99])
    return float(p95) / 1e6, float(p99) / 1e6


def answer_checksum(answers: Sequence[Sequence[bool]]) -> str:
    h = hashlib.blake2b(digest_size=16)
    for row in answers:
        h.update(len(row).to_bytes(8, "little"))
        h.update(np.packbits(np.asarray(row, dtype=bool)).tobytes())
    return h.hexdigest()


def peak_rss_bytes() -> int:
    # ru_maxrss is in KiB on Linux; it covers the whole process lifetime, so bench.sweep
    # gives every run a process of its own
    return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss) * 1024


def run(stream: Iterable[StreamingEdge], config: WindowConfig, index: ConnectivityIndex,
        workload: Workload, *, resample: bool = False,
        universe: Optional[Sequence[VertexId]] = None,
        compact_every: int = 0) -> Tuple[MetricsReport, List[List[bool]]]:
    """
    Replay stream through index. Returns the metrics and one answer row per window.

    With resample, window i queries a fresh workload drawn from universe with seed + i.
    compact_every > 0 calls index.compact() every that many windows when it has one.
    """
    if resample and not universe:
        raise PreconditionError("resampling needs the vertex universe")
    live: Deque[StreamingEdge] = deque()
    records: List[LatencyRecord] = []
    answers: List[List[bool]] = []
    peak = {"vertices": 0, "tree": 0, "nontree": 0, "words": 0}
    compact = getattr(index, "compact", None) if compact_every > 0 else None

    def complete(w: WindowSnapshot) -> None:
        pairs = workload.pairs
        if resample:
            pairs = generate_workload(universe, max(1, workload.size), workload.seed + w.index).pairs
        t0 = time.perf_counter_ns()
        row = [index.query(u, v) for u, v in pairs]
        t1 = time.perf_counter_ns()
        peak["vertices"] = max(peak["vertices"], index.vertex_count)
        peak["tree"] = max(peak["tree"], index.tree_edge_count)
        peak["nontree"] = max(peak["nontree"], index.non_tree_edge_count)
        peak["words"] = max(peak["words"], index.memory_words())
        horizon = expiry_horizon(config, w)
        t2 = time.perf_counter_ns()
        while live and live[0].t < horizon:
            index.delete(live.popleft())
        t3 = time.perf_counter_ns()
        answers.append(row)
        records.append(LatencyRecord(w.index, t1 - t0, t3 - t2))
        if compact is not None and (w.index + 1) % compact_every == 0:
            compact()
        log.debug("window %d [%d,%d]: query %.3f ms, expire %.3f ms",
                  w.index, w.t_b, w.t_e, (t1 - t0) / 1e6, (t3 - t2) / 1e6)

    w = window_bounds(config, 0)
    prev_t = None
    edges = loops = early = 0
    started = time.perf_counter_ns()
    for pos, e in enumerate(stream):
        if prev_t is not None and e.t < prev_t:
            raise StreamOrderError(pos)
        prev_t = e.t
        if e.t < config.t0:
            early += 1
            continue
        if e.is_loop:
            loops += 1
            continue
        while e.t > w.t_e:
            complete(w)
            w = window_bounds(config, w.index + 1)
        index.insert(e)
        live.append(e)
        edges += 1
    while live:
        complete(w)
        w = window_bounds(config, w.index + 1)
    elapsed_ns = time.perf_counter_ns() - started

    if loops:
        log.warning("%s: dropped %d self-loop edges", index.name, loops)
    if early:
        log.warning("%s: skipped %d edges before t0=%d", index.name, early, config.t0)

    q95, q99 = percentiles_ms([r.query_ns for r in records])
    w95, w99 = percentiles_ms([r.wm_ns for r in records])
    seconds = elapsed_ns / 1e9
    report = MetricsReport(
        strategy=index.name,
        edges=edges,
        windows=len(records),
        seconds=seconds,
        throughput=edges / seconds if seconds > 0 else 0.0,
        ns_per_edge=elapsed_ns / edges if edges else 0.0,
        q_p95=q95, q_p99=q99, wm_p95=w95, wm_p99=w99,
        mem_vertices=peak["vertices"],
        mem_tree_edges=peak["tree"],
        mem_nontree_edges=peak["nontree"],
        mem_words=peak["words"],
        peak_mem=peak_rss_bytes(),
        counters=index.counters.as_dict(),
        dropped_loops=loops,
        skipped_early=early,
        answer_checksum=answer_checksum(answers),
    )
    log.info("%s: %d edges, %d windows, %.0f edges/s", index.name, edges, len(records),
             report.throughput)
    return report, answers
