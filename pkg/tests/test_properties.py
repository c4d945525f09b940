"""Randomised checks against brute-force oracles."""
from __future__ import annotations

from typing import List, Tuple

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.constants import MST_STRATEGIES, STRATEGIES
from app.services.baselines import WindowGraph, kruskal_max_forest, replay_oracle
from app.services.bench import make_index
from app.services.driver import Workload, generate_workload, run
from app.services.lctree import OmstLCTree
from app.services.stream import ConnectivityIndex, StreamingEdge, WindowConfig
from app.services.stree import OmstSTree
from tests.conftest import tree_set

N = 8
PAIRS = [(a, b) for a in range(N) for b in range(a + 1, N)]


@st.composite
def windowed_streams(draw) -> Tuple[List[StreamingEdge], WindowConfig]:
    n = draw(st.integers(2, N))
    steps = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(0, 2)),
                          max_size=40))
    t = draw(st.integers(0, 3))
    stream = []
    for u, v, dt in steps:
        t += dt
        stream.append(StreamingEdge(u, v, t))
    alpha = draw(st.integers(1, 6))
    beta = draw(st.integers(1, alpha))
    return stream, WindowConfig(alpha=alpha, beta=beta, t0=draw(st.integers(0, 2)))


class MaxForestCheck(ConnectivityIndex):
    """Pass-through that compares the inner forest with Kruskal over the live edges."""

    def __init__(self, inner: ConnectivityIndex) -> None:
        super().__init__()
        self.inner = inner
        self.name = inner.name
        self.graph = WindowGraph()

    def _check(self) -> None:
        self.inner.check_invariants()
        total, forest = kruskal_max_forest(self.graph)
        assert self.inner.tree_weight() == total
        assert self.inner.tree_edge_count == len(forest)

    def insert(self, e: StreamingEdge) -> None:
        self.inner.insert(e)
        self.graph.add(e)
        self._check()

    def delete(self, e: StreamingEdge) -> None:
        # mid-batch the forest may lag; the next query checks it
        self.inner.delete(e)
        self.graph.remove(e)

    def query(self, u: int, v: int) -> bool:
        self._check()
        return self.inner.query(u, v)

    @property
    def tree_edge_count(self) -> int:
        return self.inner.tree_edge_count

    @property
    def vertex_count(self) -> int:
        return self.inner.vertex_count

    def memory_words(self) -> int:
        return self.inner.memory_words()


class SameForest(MaxForestCheck):
    """Drives an S-Tree and an LC-Tree in lockstep; both must hold the same edges."""

    def __init__(self) -> None:
        super().__init__(OmstSTree())
        self.twin = OmstLCTree(verify_queries=True)

    def _check(self) -> None:
        self.twin.check_invariants()
        assert tree_set(self.inner.tree_edges()) == tree_set(self.twin.tree_edges())

    def insert(self, e: StreamingEdge) -> None:
        self.twin.insert(e)
        super().insert(e)

    def delete(self, e: StreamingEdge) -> None:
        self.twin.delete(e)
        super().delete(e)
        self._check()

    def query(self, u: int, v: int) -> bool:
        answer = super().query(u, v)
        assert self.twin.query(u, v) == answer
        return answer


@given(windowed_streams())
def test_every_strategy_answers_like_the_oracle(case):
    stream, config = case
    truth = replay_oracle(stream, config, PAIRS)
    for strategy in STRATEGIES:
        index = make_index(strategy)
        _, answers = run(stream, config, index, Workload(pairs=PAIRS))
        assert answers == truth, strategy
        assert index.tree_edge_count == 0 and index.non_tree_edge_count == 0
        index.check_invariants()


@given(windowed_streams())
def test_mst_strategies_hold_a_maximum_spanning_forest(case):
    stream, config = case
    for strategy in MST_STRATEGIES:
        run(stream, config, MaxForestCheck(make_index(strategy)), Workload(pairs=PAIRS[:3]))


@given(windowed_streams())
def test_stree_and_lctree_keep_the_same_edges(case):
    stream, config = case
    run(stream, config, SameForest(), Workload(pairs=PAIRS))


def _lca(parent: List[int], u: int, v: int) -> int:
    seen = set()
    while u != -1:
        seen.add(u)
        u = parent[u]
    while v not in seen:
        v = parent[v]
    return v


@given(st.data())
def test_lctree_lca_and_path_min_on_random_trees(data):
    n = data.draw(st.integers(2, 20))
    parent = [-1] + [data.draw(st.integers(0, i - 1)) for i in range(1, n)]
    stamps = [0] + [data.draw(st.integers(0, 5)) for _ in range(1, n)]
    lc = OmstLCTree()
    for i in range(1, n):
        lc.link(i, parent[i], stamps[i])  # seq i
    lc.check_invariants()
    for _ in range(10):
        u = data.draw(st.integers(0, n - 1))
        v = data.draw(st.integers(0, n - 1))
        lc.access(u)
        lca = lc.access(v)
        assert lca == _lca(parent, u, v)
        assert lc.find_root(u) == 0
        if u != lca:
            expect, x = None, u
            while x != lca:
                rank = (stamps[x], -x)
                expect = rank if expect is None else min(expect, rank)
                x = parent[x]
            link = lc.path_min(u, lca)
            assert (link.weight, -link.seq) == expect
    for i in range(1, n):
        assert lc.parent(i) == parent[i]


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 9)), max_size=25),
       st.randoms(use_true_random=False))
def test_kruskal_weight_is_order_independent(triples, rnd):
    edges = [StreamingEdge(*x) for x in triples]
    shuffled = list(edges)
    rnd.shuffle(shuffled)
    assert kruskal_max_forest(WindowGraph(edges))[0] == kruskal_max_forest(WindowGraph(shuffled))[0]


def seeded_stream(seed: int) -> Tuple[List[StreamingEdge], WindowConfig, int]:
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(20, 1001))
    m = int(rng.integers(500, 20_001))
    horizon = int(rng.integers(m // 4, 2 * m))
    stamps = np.sort(rng.integers(0, horizon, size=m))
    us, vs = rng.integers(0, n, size=m), rng.integers(0, n, size=m)
    stream = [StreamingEdge(int(u), int(v), int(t)) for u, v, t in zip(us, vs, stamps)]
    beta = -(-horizon // 200) + int(rng.integers(0, 10))
    alpha = beta * int(rng.integers(1, 20)) + int(rng.integers(0, beta))
    return stream, WindowConfig(alpha=alpha, beta=beta, t0=0), n


@pytest.mark.parametrize("seed", [s if s < 3 else pytest.param(s, marks=pytest.mark.slow) for s in range(100)])
def test_seeded_streams_answer_like_the_oracle(seed):
    stream, config, n = seeded_stream(seed)
    workload = generate_workload(range(n), 200, seed)
    truth = replay_oracle(stream, config, workload.pairs)
    assert 0 < len(truth) <= 201
    for strategy in STRATEGIES:
        index = make_index(strategy)
        report, answers = run(stream, config, index, workload)
        assert answers == truth, strategy
        if strategy in MST_STRATEGIES:
            assert report.counters["replacement_searches"] == 0, strategy
