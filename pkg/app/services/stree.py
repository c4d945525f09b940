# app/services/stree.py
"""
OMST S-Tree: a parent-linked maximum spanning forest.

Each vertex keeps its parent, the weight (timestamp) and arrival number of the edge to
that parent, and its subtree size. Non-tree edges are never stored: an edge that closes
a cycle either replaces the cycle minimum or is dropped, and an expiring tree edge is a
plain cut.
"""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Protocol, Set, Tuple

from app.core.errors import PreconditionError
from app.services.stream import (
    ConnectivityIndex, OperationCounters, StreamingEdge, Timestamp, TreeEdge, TreeLink, VertexId,
)


class _Linked(Protocol):
    parent: Optional[VertexId]
    weight: Timestamp
    seq: int


def min_edge_on_cycle(nodes: Mapping[VertexId, _Linked], counters: OperationCounters,
                      u: VertexId, du: int, v: VertexId, dv: int) -> TreeLink:
    """
    Minimum tree edge on the path u -> LCA(u,v) -> v, by rank: timestamp, and among
    equal timestamps the later arrival.

    du/dv are the root distances of u and v in the same tree. The deeper endpoint is
    lifted to equal depth, then both climb in lockstep until they meet.
    """
    best: Optional[TreeLink] = None
    best_rank = None
    a, b = u, v
    steps = 0

    def consider(x: VertexId) -> VertexId:
        nonlocal best, best_rank
        node = nodes[x]
        rank = (node.weight, -node.seq)
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best = TreeLink(x, node.parent, node.weight, node.seq)
        return node.parent

    while du > dv:
        a = consider(a); du -= 1; steps += 1
    while dv > du:
        b = consider(b); dv -= 1; steps += 1
    while a != b:
        a = consider(a)
        b = consider(b)
        steps += 2
    counters.nodes_visited += steps
    if best is None:
        raise PreconditionError(f"no cycle: {u} and {v} are the same vertex")
    return best


class SNode:
    __slots__ = ("parent", "weight", "seq", "size")

    def __init__(self) -> None:
        self.parent: Optional[VertexId] = None
        self.weight: Timestamp = 0
        self.seq: int = 0
        self.size: int = 1

    def __repr__(self) -> str:
        return f"SNode(parent={self.parent}, weight={self.weight}, size={self.size})"


class OmstSTree(ConnectivityIndex):
    name = "omst-s"

    def __init__(self) -> None:
        super().__init__()
        self._nodes: Dict[VertexId, SNode] = {}
        self._tree_edges = 0
        self._seq = 0

    # ------------------------------------------------------------ primitives

    def _node(self, v: VertexId) -> SNode:
        node = self._nodes.get(v)
        if node is None:
            node = self._nodes[v] = SNode()
        return node

    def find_root(self, v: VertexId) -> Tuple[VertexId, int]:
        nodes = self._nodes
        node = nodes.get(v)
        if node is None:
            return v, 0
        depth = 0
        while node.parent is not None:
            v = node.parent
            node = nodes[v]
            depth += 1
        self.counters.nodes_visited += depth + 1
        return v, depth

    def parent_of(self, v: VertexId) -> Optional[VertexId]:
        node = self._nodes.get(v)
        return None if node is None else node.parent

    def weight_of(self, v: VertexId) -> Optional[Timestamp]:
        node = self._nodes.get(v)
        return None if node is None or node.parent is None else node.weight

    def size_of(self, v: VertexId) -> int:
        node = self._nodes.get(v)
        return 1 if node is None else node.size

    def re_root(self, v: VertexId) -> None:
        nodes = self._nodes
        if v not in nodes:
            return
        path = [v]
        x = nodes[v].parent
        while x is not None:
            path.append(x)
            x = nodes[x].parent
        if len(path) == 1:
            return
        self.counters.reroots += 1
        nodes_on_path = [nodes[x] for x in path]
        old_size = [n.size for n in nodes_on_path]
        old_w = [(n.weight, n.seq) for n in nodes_on_path]
        k = len(path) - 1
        # walking the reversed chain from the old root down to v
        nodes_on_path[k].size = old_size[k] - old_size[k - 1]
        for i in range(k - 1, 0, -1):
            nodes_on_path[i].size = old_size[i] - old_size[i - 1] + nodes_on_path[i + 1].size
        nodes_on_path[0].size = old_size[k]
        for i in range(k, 0, -1):
            child = nodes_on_path[i]
            child.parent = path[i - 1]
            child.weight, child.seq = old_w[i - 1]
        head = nodes_on_path[0]
        head.parent = None
        head.weight, head.seq = 0, 0

    def _attach(self, child: VertexId, parent: VertexId, t: Timestamp, seq: int) -> None:
        """child must be a root; grows sizes along parent's root path."""
        nodes = self._nodes
        c = nodes[child]
        c.parent, c.weight, c.seq = parent, t, seq
        grow = c.size
        x: Optional[VertexId] = parent
        while x is not None:
            n = nodes[x]
            n.size += grow
            x = n.parent
        self._tree_edges += 1

    def _link(self, u: VertexId, ru: VertexId, v: VertexId, rv: VertexId,
              t: Timestamp, seq: int) -> None:
        # smaller tree goes under the larger; ties put e.u's tree under e.v
        if self._nodes[ru].size <= self._nodes[rv].size:
            child, parent = u, v
        else:
            child, parent = v, u
        self.re_root(child)
        self._attach(child, parent, t, seq)

    def _cut(self, child: VertexId) -> None:
        nodes = self._nodes
        c = nodes[child]
        p = c.parent
        if p is None:
            raise PreconditionError(f"cut at root {child}")
        c.parent, c.weight, c.seq = None, 0, 0
        shrink = c.size
        while p is not None:
            n = nodes[p]
            n.size -= shrink
            p = n.parent
        self._tree_edges -= 1

    # ------------------------------------------------------------ operations

    def query(self, u: VertexId, v: VertexId) -> bool:
        if u == v:
            return True
        return self.find_root(u)[0] == self.find_root(v)[0]

    def find_min_in_cycle(self, u: VertexId, v: VertexId) -> TreeLink:
        ru, du = self.find_root(u)
        rv, dv = self.find_root(v)
        if u == v or ru != rv:
            raise PreconditionError(f"{u} and {v} do not close a cycle")
        return min_edge_on_cycle(self._nodes, self.counters, u, du, v, dv)

    def insert(self, e: StreamingEdge) -> None:
        u, v, t = e
        if u == v:
            return
        self._seq += 1
        seq = self._seq
        self._node(u)
        self._node(v)
        ru, du = self.find_root(u)
        rv, dv = self.find_root(v)
        if ru != rv:
            self._link(u, ru, v, rv, t, seq)
            return
        e_min = min_edge_on_cycle(self._nodes, self.counters, u, du, v, dv)
        if e_min.weight < t:
            self._cut(e_min.child)
            ru, _ = self.find_root(u)
            rv, _ = self.find_root(v)
            self._link(u, ru, v, rv, t, seq)
        # otherwise e is dropped: OMST keeps no non-tree edges

    def delete(self, e: StreamingEdge) -> None:
        u, v, t = e
        nodes = self._nodes
        nu = nodes.get(u)
        if nu is not None and nu.parent == v and nu.weight == t:
            self._cut(u)
            return
        nv = nodes.get(v)
        if nv is not None and nv.parent == u and nv.weight == t:
            self._cut(v)
        # anything else was dropped at insert time

    def compact(self) -> int:
        """Forget isolated vertices (singleton roots). Returns how many were removed."""
        lonely = [v for v, n in self._nodes.items() if n.parent is None and n.size == 1]
        for v in lonely:
            del self._nodes[v]
        return len(lonely)

    # --------------------------------------------------------- introspection

    @property
    def tree_edge_count(self) -> int:
        return self._tree_edges

    @property
    def vertex_count(self) -> int:
        return len(self._nodes)

    def vertices(self) -> Set[VertexId]:
        return set(self._nodes)

    def memory_words(self) -> int:
        # parent, weight, seq, size
        return 4 * len(self._nodes)

    def tree_edges(self) -> List[TreeEdge]:
        out = []
        for v, n in self._nodes.items():
            if n.parent is not None:
                a, b = (v, n.parent) if v <= n.parent else (n.parent, v)
                out.append((a, b, n.weight))
        return out

    def check_invariants(self) -> None:
        check_parent_forest(self._nodes, self._tree_edges)


def check_parent_forest(nodes: Mapping[VertexId, SNode], tree_edges: int) -> None:
    """Acyclic parent links, size recount, tree-edge count. Shared with the D-Tree family."""
    children: Dict[VertexId, List[VertexId]] = {v: [] for v in nodes}
    links = 0
    for v, n in nodes.items():
        if n.parent is not None:
            assert n.parent in nodes, f"parent {n.parent} of {v} unknown"
            children[n.parent].append(v)
            links += 1
    assert links == tree_edges, f"tree edge count {tree_edges} != parent links {links}"
    seen: Set[VertexId] = set()
    for r, n in nodes.items():
        if n.parent is not None:
            continue
        order = [r]
        for x in order:
            order.extend(children[x])
        for x in reversed(order):
            expect = 1 + sum(nodes[c].size for c in children[x])
            assert nodes[x].size == expect, f"size of {x} is {nodes[x].size}, recount {expect}"
        seen.update(order)
    assert len(seen) == len(nodes), "parent links contain a cycle"
