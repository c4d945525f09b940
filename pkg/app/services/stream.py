# app/services/stream.py
"""
Shared domain types for the sliding-window connectivity indexes:
edges, window arithmetic, the index interface and its operation counters.

Windows are inclusive: w_i spans [t_b, t_e] with t_e - t_b + 1 = alpha, and the
edges that expire on the w_i -> w_{i+1} transition are exactly those with
t_b <= t < t_b + beta.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, fields
from typing import Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import StreamOrderError

VertexId = int
Timestamp = int


class StreamingEdge(NamedTuple):
    u: VertexId
    v: VertexId
    t: Timestamp

    def key(self) -> Tuple[VertexId, VertexId, Timestamp]:
        """Orientation-free identity: (u,v,t) and (v,u,t) are the same edge."""
        return (self.u, self.v, self.t) if self.u <= self.v else (self.v, self.u, self.t)

    @property
    def is_loop(self) -> bool:
        return self.u == self.v


class WindowConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: int = Field(..., ge=1, description="window size in time units")
    beta: int = Field(..., ge=1, description="slide interval in time units")
    t0: int = Field(0, ge=0, description="beginning of the first window")

    @model_validator(mode="after")
    def _sliding(self) -> "WindowConfig":
        if self.beta > self.alpha:
            raise ValueError(f"beta ({self.beta}) must not exceed alpha ({self.alpha})")
        return self


class WindowSnapshot(NamedTuple):
    index: int
    t_b: Timestamp
    t_e: Timestamp

    def contains(self, t: Timestamp) -> bool:
        return self.t_b <= t <= self.t_e


def window_bounds(config: WindowConfig, i: int) -> WindowSnapshot:
    if i < 0:
        raise ValueError(f"snapshot index must be >= 0, got {i}")
    t_b = config.t0 + i * config.beta
    return WindowSnapshot(i, t_b, t_b + config.alpha - 1)


def expiry_horizon(config: WindowConfig, w: WindowSnapshot) -> Timestamp:
    """First timestamp that survives the transition out of w."""
    return w.t_b + config.beta


def expired_edges(config: WindowConfig, w: WindowSnapshot,
                  edges: Iterable[StreamingEdge]) -> List[StreamingEdge]:
    """Edges of w that are not in the next snapshot."""
    horizon = expiry_horizon(config, w)
    return [e for e in edges if w.t_b <= e.t < horizon]


def expiry_window(config: WindowConfig, t: Timestamp) -> int:
    """Index of the snapshot whose completion deletes an edge with timestamp t (t >= t0)."""
    return (t - config.t0) // config.beta


def stream_validate(edges: Sequence[StreamingEdge]) -> Optional[int]:
    """None when timestamps are non-decreasing, else the index of the first violation."""
    prev = None
    for i, e in enumerate(edges):
        if prev is not None and e.t < prev:
            return i
        prev = e.t
    return None


def require_ordered(edges: Sequence[StreamingEdge]) -> None:
    pos = stream_validate(edges)
    if pos is not None:
        raise StreamOrderError(pos)


# ------------------------------ instrumentation ----------------------------- #

@dataclass
class OperationCounters:
    replacement_searches: int = 0
    nodes_visited: int = 0
    accesses: int = 0
    rotations: int = 0
    reroots: int = 0

    def reset(self) -> None:
        for f in fields(self):
            setattr(self, f.name, 0)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ------------------------------ index interface ----------------------------- #

TreeEdge = Tuple[VertexId, VertexId, Timestamp]


class TreeLink(NamedTuple):
    """A stored tree edge seen from its child endpoint. seq is the arrival number of the edge."""
    child: VertexId
    parent: VertexId
    weight: Timestamp
    seq: int = 0

    @property
    def rank(self) -> Tuple[Timestamp, int]:
        # total order; among equal timestamps the later arrival ranks lower
        return (self.weight, -self.seq)

    def as_edge(self) -> StreamingEdge:
        return StreamingEdge(self.child, self.parent, self.weight)


class ConnectivityIndex(abc.ABC):
    """Behaviour shared by every strategy: insert, delete, query plus introspection."""

    name: str = "index"

    def __init__(self) -> None:
        self.counters = OperationCounters()

    @abc.abstractmethod
    def insert(self, e: StreamingEdge) -> None: ...

    @abc.abstractmethod
    def delete(self, e: StreamingEdge) -> None: ...

    @abc.abstractmethod
    def query(self, u: VertexId, v: VertexId) -> bool: ...

    @property
    @abc.abstractmethod
    def tree_edge_count(self) -> int: ...

    @property
    def non_tree_edge_count(self) -> int:
        return 0

    @property
    @abc.abstractmethod
    def vertex_count(self) -> int: ...

    @abc.abstractmethod
    def memory_words(self) -> int:
        """Logical storage: number of stored fields (pointers, weights, sizes, set entries)."""

    def tree_edges(self) -> List[TreeEdge]:
        """Stored tree edges as (min(u,v), max(u,v), t); empty for non-forest strategies."""
        return []

    def tree_weight(self) -> int:
        return sum(t for _, _, t in self.tree_edges())

    def check_invariants(self) -> None:
        """Raise AssertionError when a structural invariant is broken."""

    def vertices(self) -> Set[VertexId]:
        return set()
