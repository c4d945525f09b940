# tests/conftest.py
"""
Shared fixtures. The running example: a nine-vertex window w7 (t7..t11, alpha=5, beta=1)
and the four edges arriving at t12. Vertex letters map to integer ids.
"""
from __future__ import annotations

import os
import tempfile

# the results store must point somewhere disposable before app.core.db is imported
_TMP = tempfile.mkdtemp(prefix="swconn-tests-")
os.environ["DATABASE_URL"] = f"sqlite:///{_TMP}/results.db"
os.environ["SWCONN_RESULTS_DIR"] = _TMP

from typing import Iterable, List, Set, Tuple  # noqa: E402

import pytest  # noqa: E402
from hypothesis import HealthCheck, settings  # noqa: E402

from app.services.stream import StreamingEdge, TreeEdge, WindowConfig  # noqa: E402

settings.register_profile("swconn", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("swconn")

V = {c: i for i, c in enumerate("ABCDEFGHIK")}
NAME = {i: c for c, i in V.items()}


def E(a: str, b: str, t: int) -> StreamingEdge:
    return StreamingEdge(V[a], V[b], t)


def tree_set(edges: Iterable[Tuple[int, int, int]]) -> Set[TreeEdge]:
    return {(min(u, v), max(u, v), t) for u, v, t in edges}


W7_EDGES: List[StreamingEdge] = [
    E("B", "D", 7), E("A", "D", 7), E("E", "F", 7), E("B", "C", 8), E("E", "C", 9),
    E("A", "C", 10), E("D", "F", 10), E("F", "G", 10), E("A", "H", 11), E("H", "I", 11),
]
T12_ARRIVALS: List[StreamingEdge] = [E("A", "I", 12), E("K", "B", 12), E("H", "D", 12), E("D", "C", 12)]
RUNNING_STREAM: List[StreamingEdge] = W7_EDGES + T12_ARRIVALS
RUNNING_CONFIG = WindowConfig(alpha=5, beta=1, t0=0)

W7_TREE = tree_set([
    E("B", "D", 7), E("B", "C", 8), E("E", "C", 9), E("A", "C", 10),
    E("D", "F", 10), E("F", "G", 10), E("A", "H", 11), E("H", "I", 11),
])

# w8 maximum spanning tree rooted at B, parents listed top-down: (child, parent, t)
W8_LINKS: List[StreamingEdge] = [
    E("C", "B", 8), E("K", "B", 12), E("E", "C", 9), E("D", "C", 12), E("H", "D", 12),
    E("F", "D", 10), E("G", "F", 10), E("A", "H", 11), E("I", "A", 12),
]
W8_TREE = tree_set(W8_LINKS)


def attach_forest(index, links: Iterable[StreamingEdge]) -> None:
    """Lay out a parent-linked forest exactly (child under parent, top-down order)."""
    for child, parent, t in links:
        index._node(parent)
        index._node(child)
        index._seq += 1
        index._attach(child, parent, t, index._seq)


@pytest.fixture
def running_stream() -> List[StreamingEdge]:
    return list(RUNNING_STREAM)


@pytest.fixture
def running_config() -> WindowConfig:
    return RUNNING_CONFIG
