# app/services/baselines.py
"""
Baselines that keep the whole window graph (DFS per query, RWC = components recomputed per
window) and the brute-force oracles the tests and --verify runs check against.

The traversal and union-find loops are numba kernels over int64 arrays. Vertex labels are
mapped to dense ids with np.unique before a kernel runs.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np
from numba import njit

from app.core.errors import UnknownEdgeError
from app.services.stream import (
    ConnectivityIndex, StreamingEdge, Timestamp, TreeEdge, VertexId, WindowConfig,
    expiry_window, window_bounds,
)

Pair = Tuple[VertexId, VertexId]


# --------------------------------- kernels ---------------------------------- #

@njit(cache=True)
def uf_find(parent, x):
    # path halving
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def uf_union(parent, size, x, y):
    rx = uf_find(parent, x)
    ry = uf_find(parent, y)
    if rx == ry:
        return False
    if size[rx] < size[ry]:
        rx, ry = ry, rx
    parent[ry] = rx
    size[rx] += size[ry]
    return True


@njit(cache=True)
def _component_roots(n, us, vs):
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for j in range(us.shape[0]):
        uf_union(parent, size, us[j], vs[j])
    for x in range(n):
        parent[x] = uf_find(parent, x)
    return parent


@njit(cache=True)
def _kruskal_keep(n, us, vs):
    """Edges come in descending weight order; True where an edge joins two trees."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    keep = np.zeros(us.shape[0], dtype=np.bool_)
    for j in range(us.shape[0]):
        keep[j] = uf_union(parent, size, us[j], vs[j])
    return keep


@njit(cache=True)
def _window_answers(us, vs, lo, hi, n, pu, pv, same):
    table = np.zeros((lo.shape[0], pu.shape[0]), dtype=np.bool_)
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    for w in range(lo.shape[0]):
        for x in range(n):
            parent[x] = x
            size[x] = 1
        for j in range(lo[w], hi[w]):
            uf_union(parent, size, us[j], vs[j])
        for k in range(pu.shape[0]):
            if same[k]:
                table[w, k] = True
            elif pu[k] >= 0 and pv[k] >= 0:
                table[w, k] = uf_find(parent, pu[k]) == uf_find(parent, pv[k])
    return table


@njit(cache=True)
def _reachable(indptr, indices, src, dst):
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    seen[src] = True
    stack[0] = src
    top = 1
    while top > 0:
        top -= 1
        x = stack[top]
        for j in range(indptr[x], indptr[x + 1]):
            y = indices[j]
            if y == dst:
                return True
            if not seen[y]:
                seen[y] = True
                stack[top] = y
                top += 1
    return False


def edge_columns(edges: Sequence[Tuple[int, int, int]]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(us, vs, ts) as contiguous int64 columns."""
    us, vs, ts = np.array(edges, dtype=np.int64).reshape(-1, 3).T.copy()
    return us, vs, ts


def dense_ids(us: np.ndarray, vs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sorted distinct labels, and both endpoint columns as indexes into them."""
    labels, inv = np.unique(np.concatenate((us, vs)), return_inverse=True)
    inv = inv.astype(np.int64)
    return labels, inv[:us.shape[0]], inv[us.shape[0]:]


def lookup_ids(labels: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Dense id of every x, -1 where x is not a label."""
    if labels.size == 0:
        return np.full(xs.shape, -1, dtype=np.int64)
    idx = np.minimum(np.searchsorted(labels, xs), labels.size - 1)
    return np.where(labels[idx] == xs, idx, -1).astype(np.int64)


# ------------------------------- window graph -------------------------------- #

class CsrGraph(NamedTuple):
    ids: Dict[VertexId, int]
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def words(self) -> int:
        return 2 * len(self.ids) + self.indptr.size + self.indices.size


class WindowGraph:
    """Undirected multigraph of the live window: per-vertex multiset of (neighbor, t)."""

    def __init__(self, edges: Iterable[StreamingEdge] = ()) -> None:
        self.adjacency: Dict[VertexId, Counter] = defaultdict(Counter)
        self.edge_count = 0
        self._csr: Optional[CsrGraph] = None
        for e in edges:
            self.add(e)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    def add(self, e: StreamingEdge) -> None:
        u, v, t = e
        self.adjacency[u][(v, t)] += 1
        self.adjacency[v][(u, t)] += 1
        self.edge_count += 1
        self._csr = None

    def remove(self, e: StreamingEdge) -> None:
        u, v, t = e
        nu = self.adjacency.get(u)
        if nu is None or nu[(v, t)] == 0:
            raise UnknownEdgeError(f"{e} is not in the window")
        for a, b in ((u, v), (v, u)):
            bucket = self.adjacency[a]
            bucket[(b, t)] -= 1
            if bucket[(b, t)] == 0:
                del bucket[(b, t)]
            if not bucket:
                del self.adjacency[a]
        self.edge_count -= 1
        self._csr = None

    def edges(self) -> List[StreamingEdge]:
        """Each live edge once, with multiplicity, as (min, max, t)."""
        out: List[StreamingEdge] = []
        for u, nbrs in self.adjacency.items():
            for (v, t), cnt in nbrs.items():
                if u < v:
                    out.extend([StreamingEdge(u, v, t)] * cnt)
                elif u == v:
                    out.extend([StreamingEdge(u, v, t)] * (cnt // 2))
        return out

    def csr(self) -> CsrGraph:
        """Compressed adjacency of the live graph, rebuilt on first use after a change."""
        if self._csr is None:
            us, vs, _ = edge_columns(self.edges())
            labels, du, dv = dense_ids(us, vs)
            src = np.concatenate((du, dv))
            dst = np.concatenate((dv, du))
            indptr = np.zeros(labels.size + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=labels.size), out=indptr[1:])
            indices = dst[np.argsort(src, kind="stable")]
            ids = {x: i for i, x in enumerate(labels.tolist())}
            self._csr = CsrGraph(ids, indptr, indices)
        return self._csr

    @property
    def csr_words(self) -> int:
        return 0 if self._csr is None else self._csr.words


# ---------------------------- baselines and oracles -------------------------- #

def dfs_query(g: WindowGraph, u: VertexId, v: VertexId) -> bool:
    if u == v:
        return True
    csr = g.csr()
    a, b = csr.ids.get(u), csr.ids.get(v)
    if a is None or b is None:
        return False
    return bool(_reachable(csr.indptr, csr.indices, a, b))


def rwc_rebuild(g: WindowGraph) -> Dict[VertexId, VertexId]:
    """Component representative of every vertex of g, from one union-find pass."""
    us, vs, _ = edge_columns(g.edges())
    labels, du, dv = dense_ids(us, vs)
    roots = _component_roots(labels.size, du, dv)
    return dict(zip(labels.tolist(), labels[roots].tolist()))


def rwc_query(labeling: Dict[VertexId, VertexId], u: VertexId, v: VertexId) -> bool:
    if u == v:
        return True
    lu, lv = labeling.get(u), labeling.get(v)
    return lu is not None and lu == lv


def kruskal_max_forest(g: WindowGraph) -> Tuple[int, List[TreeEdge]]:
    """Maximum-weight spanning forest by descending timestamp; ties by (u, v)."""
    us, vs, ts = edge_columns(g.edges())
    order = np.lexsort((vs, us, -ts))
    us, vs, ts = us[order], vs[order], ts[order]
    labels, du, dv = dense_ids(us, vs)
    keep = _kruskal_keep(labels.size, du, dv)
    forest = list(zip(us[keep].tolist(), vs[keep].tolist(), ts[keep].tolist()))
    return int(ts[keep].sum()), forest


def window_count(config: WindowConfig, max_t: Optional[Timestamp]) -> int:
    """Number of windows a replay completes: up to the first whose expiry covers max_t."""
    if max_t is None or max_t < config.t0:
        return 0
    return expiry_window(config, max_t) + 1


def replay_oracle(stream: Sequence[StreamingEdge], config: WindowConfig,
                  pairs: Sequence[Pair]) -> List[List[bool]]:
    """Per completed window, the union-find answer for every pair. stream must be ordered."""
    live = [e for e in stream if not e.is_loop and e.t >= config.t0]
    windows = window_count(config, max((e.t for e in live), default=None))
    if not windows:
        return []
    us, vs, ts = edge_columns(live)
    labels, du, dv = dense_ids(us, vs)
    bounds = np.array([window_bounds(config, i)[1:] for i in range(windows)], dtype=np.int64)
    lo = np.searchsorted(ts, bounds[:, 0], side="left").astype(np.int64)
    hi = np.searchsorted(ts, bounds[:, 1], side="right").astype(np.int64)
    pu = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
    pv = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
    table = _window_answers(du, dv, lo, hi, labels.size,
                            lookup_ids(labels, pu), lookup_ids(labels, pv), pu == pv)
    return table.tolist()


# --------------------------- index adapters --------------------------------- #

class DfsIndex(ConnectivityIndex):
    name = "dfs"

    def __init__(self) -> None:
        super().__init__()
        self.graph = WindowGraph()

    def insert(self, e: StreamingEdge) -> None:
        if not e.is_loop:
            self.graph.add(e)

    def delete(self, e: StreamingEdge) -> None:
        if not e.is_loop:
            self.graph.remove(e)

    def query(self, u: VertexId, v: VertexId) -> bool:
        return dfs_query(self.graph, u, v)

    @property
    def tree_edge_count(self) -> int:
        return 0

    @property
    def non_tree_edge_count(self) -> int:
        return self.graph.edge_count

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    def vertices(self) -> Set[VertexId]:
        return set(self.graph.adjacency)

    def memory_words(self) -> int:
        # adjacency header per vertex, two entries per edge, plus the compressed copy
        return self.graph.vertex_count + 2 * self.graph.edge_count + self.graph.csr_words


class RwcIndex(DfsIndex):
    """Components recomputed from scratch on the first query after the window changed."""

    name = "rwc"

    def __init__(self) -> None:
        super().__init__()
        self._labels: Optional[Dict[VertexId, VertexId]] = None

    def insert(self, e: StreamingEdge) -> None:
        super().insert(e)
        self._labels = None

    def delete(self, e: StreamingEdge) -> None:
        super().delete(e)
        self._labels = None

    def query(self, u: VertexId, v: VertexId) -> bool:
        if self._labels is None:
            self._labels = rwc_rebuild(self.graph)
        return rwc_query(self._labels, u, v)

    def memory_words(self) -> int:
        labels = 0 if self._labels is None else 2 * len(self._labels)
        return super().memory_words() + labels
