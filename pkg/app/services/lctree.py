# app/services/lctree.py
"""
OMST LC-Tree: a link-cut forest holding the maximum spanning forest of the window.

Every tree edge is a node of its own between its two endpoint nodes, so re-rooting is a
lazy reversal and the cycle minimum is a path aggregate. Edge nodes are keyed by
(timestamp, -arrival number); vertex nodes carry no key. Preferred paths live in splay
trees; a node's `parent` is its splay parent or, at the top of a splay tree, the
path-parent pointer into the path above.

Between public operations every preferred path ends at a vertex node, so the value
returned by access is always a vertex.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Set, Tuple

from app.core.errors import CorrectnessError, PreconditionError
from app.services.stream import (
    ConnectivityIndex, StreamingEdge, Timestamp, TreeEdge, TreeLink, VertexId,
)


class LCNode:
    __slots__ = ("left", "right", "parent", "rev", "key", "agg", "vid", "ends")

    def __init__(self, vid: Optional[VertexId] = None,
                 key: Optional[Tuple[Timestamp, int]] = None,
                 ends: Optional[Tuple[VertexId, VertexId]] = None) -> None:
        self.left: Optional[LCNode] = None
        self.right: Optional[LCNode] = None
        self.parent: Optional[LCNode] = None
        self.rev = False
        self.key = key
        self.agg: Optional[LCNode] = self if key is not None else None
        self.vid = vid
        self.ends = ends

    @property
    def is_edge(self) -> bool:
        return self.key is not None

    def __repr__(self) -> str:
        if self.is_edge:
            return f"LCNode(edge={self.ends}, key={self.key})"
        return f"LCNode(vertex={self.vid})"


# ---------------------------- splay primitives ------------------------------ #

def _is_root(x: LCNode) -> bool:
    p = x.parent
    return p is None or (p.left is not x and p.right is not x)


def _update(x: LCNode) -> None:
    best = x if x.key is not None else None
    for c in (x.left, x.right):
        if c is not None and c.agg is not None and (best is None or c.agg.key < best.key):
            best = c.agg
    x.agg = best


def _push(x: LCNode) -> None:
    if x.rev:
        x.left, x.right = x.right, x.left
        if x.left is not None:
            x.left.rev = not x.left.rev
        if x.right is not None:
            x.right.rev = not x.right.rev
        x.rev = False


def _rotate(x: LCNode) -> None:
    p = x.parent
    g = p.parent
    if not _is_root(p):
        if g.left is p:
            g.left = x
        else:
            g.right = x
    x.parent = g
    if p.left is x:
        p.left = x.right
        if x.right is not None:
            x.right.parent = p
        x.right = p
    else:
        p.right = x.left
        if x.left is not None:
            x.left.parent = p
        x.left = p
    p.parent = x
    _update(p)
    _update(x)


def _splay(x: LCNode) -> int:
    """Splay x to the top of its splay tree; returns the number of rotations."""
    chain = [x]
    y = x
    while not _is_root(y):
        y = y.parent
        chain.append(y)
    for y in reversed(chain):
        _push(y)
    rotations = 0
    while not _is_root(x):
        p = x.parent
        if not _is_root(p):
            g = p.parent
            _rotate(x if (g.left is p) != (p.left is x) else p)
            rotations += 1
        _rotate(x)
        rotations += 1
    return rotations


def _detach_left(x: LCNode) -> Optional[LCNode]:
    """x must be a splay root with pushed flags."""
    lhs = x.left
    if lhs is not None:
        lhs.parent = None
        x.left = None
        _update(x)
    return lhs


class OmstLCTree(ConnectivityIndex):
    name = "omst-lc"

    def __init__(self, verify_queries: bool = False) -> None:
        super().__init__()
        self.verify_queries = verify_queries
        self._vertices: Dict[VertexId, LCNode] = {}
        # live tree edges by endpoint pair; a forest has at most one edge per pair
        self._edges: Dict[Tuple[VertexId, VertexId], LCNode] = {}
        self._seq = 0

    # ------------------------------------------------------------ primitives

    def _vertex(self, v: VertexId) -> LCNode:
        node = self._vertices.get(v)
        if node is None:
            node = self._vertices[v] = LCNode(vid=v)
        return node

    def _access(self, x: LCNode) -> Tuple[LCNode, Optional[LCNode]]:
        """
        Make the root path of x preferred, with x deepest.

        Returns (last, detached): last is the node where the walk entered the root's
        splay tree, detached the subtree cut off below x on the first splay.
        """
        self.counters.accesses += 1
        last: Optional[LCNode] = None
        detached: Optional[LCNode] = None
        y: Optional[LCNode] = x
        first = True
        while y is not None:
            self.counters.rotations += _splay(y)
            if first:
                detached = y.right
                first = False
            y.right = last
            _update(y)
            last = y
            y = y.parent
        self.counters.rotations += _splay(x)
        return last, detached

    def _evert(self, x: LCNode) -> None:
        self._access(x)
        x.rev = not x.rev

    def _root_of(self, x: LCNode) -> LCNode:
        self._access(x)
        y = x
        _push(y)
        while y.left is not None:
            y = y.left
            _push(y)
        self.counters.rotations += _splay(y)
        return y

    def _link(self, a: LCNode, b: LCNode, t: Timestamp, seq: int) -> LCNode:
        """Join the trees of a and b with a new edge node; a's tree hangs under b."""
        e = LCNode(key=(t, -seq), ends=(a.vid, b.vid))
        self._evert(a)
        _push(a)
        self._access(b)
        # one preferred path: b's root path, then e, then a's (reversed) tree path
        e.right = a
        a.parent = e
        _update(e)
        b.right = e
        e.parent = b
        _update(b)
        self._edges[_pair(a.vid, b.vid)] = e
        return e

    def _remove_edge(self, e: LCNode) -> None:
        a_id, b_id = e.ends
        a, b = self._vertices[a_id], self._vertices[b_id]
        self._evert(e)
        self._access(a)
        _detach_left(a)
        self._access(b)
        _detach_left(b)
        e.parent = e.left = e.right = None
        del self._edges[_pair(a_id, b_id)]

    # ------------------------------------------------------------ operations

    def access(self, v: VertexId) -> VertexId:
        """Switch point of the access; after a preceding access(u) this is LCA(u, v)."""
        last, _ = self._access(self._vertex(v))
        return last.vid

    def find_root(self, v: VertexId) -> VertexId:
        node = self._vertices.get(v)
        if node is None:
            return v
        return self._root_of(node).vid

    def re_root(self, v: VertexId) -> None:
        node = self._vertices.get(v)
        if node is not None:
            self._evert(node)

    def link(self, u: VertexId, v: VertexId, t: Timestamp) -> None:
        nu, nv = self._vertex(u), self._vertex(v)
        if u == v or self._root_of(nu) is self._root_of(nv):
            raise PreconditionError(f"link within one tree: {u}, {v}")
        self._seq += 1
        self._link(nu, nv, t, self._seq)

    def cut(self, v: VertexId) -> None:
        """Detach v from its parent under the current rooting."""
        node = self._vertices.get(v)
        e = self._parent_edge(node) if node is not None else None
        if e is None:
            raise PreconditionError(f"cut at root {v}")
        self._remove_edge(e)

    def _parent_edge(self, x: LCNode) -> Optional[LCNode]:
        self._access(x)
        y = x.left
        if y is None:
            return None
        _push(y)
        while y.right is not None:
            y = y.right
            _push(y)
        self.counters.rotations += _splay(y)
        return y

    def parent(self, v: VertexId) -> Optional[VertexId]:
        node = self._vertices.get(v)
        if node is None:
            return None
        e = self._parent_edge(node)
        if e is None:
            return None
        a, b = e.ends
        return b if a == v else a

    def path_min(self, u: VertexId, lca: VertexId) -> TreeLink:
        """Minimum edge on the path u -> lca, lca being an ancestor of u."""
        nu, nl = self._vertices.get(u), self._vertices.get(lca)
        if nu is None or nl is None or u == lca:
            raise PreconditionError(f"{lca} is not a proper ancestor of {u}")
        self._access(nu)
        last, detached = self._access(nl)
        if last is not nl or nu.parent is None or detached is None:
            raise PreconditionError(f"{lca} is not a proper ancestor of {u}")
        e = detached.agg
        a, b = e.ends
        return TreeLink(a, b, e.key[0], -e.key[1])

    def _connected(self, nu: LCNode, nv: LCNode) -> Tuple[bool, LCNode]:
        self._access(nu)
        last, _ = self._access(nv)
        return nu.parent is not None, last

    def query(self, u: VertexId, v: VertexId) -> bool:
        if u == v:
            return True
        nu, nv = self._vertices.get(u), self._vertices.get(v)
        if nu is None or nv is None:
            return False
        verdict, _ = self._connected(nu, nv)
        if self.verify_queries:
            expected = self._root_of(nu) is self._root_of(nv)
            if verdict != expected:
                raise CorrectnessError(f"query({u},{v}) verdict {verdict}, roots say {expected}")
        return verdict

    def find_min_in_cycle(self, u: VertexId, v: VertexId) -> TreeLink:
        nu, nv = self._vertices.get(u), self._vertices.get(v)
        if u == v or nu is None or nv is None:
            raise PreconditionError(f"{u} and {v} do not close a cycle")
        connected, last = self._connected(nu, nv)
        if not connected:
            raise PreconditionError(f"{u} and {v} do not close a cycle")
        return self._cycle_min(u, v, last.vid)

    def _cycle_min(self, u: VertexId, v: VertexId, lca: VertexId) -> TreeLink:
        found = [self.path_min(x, lca) for x in (u, v) if x != lca]
        return min(found, key=lambda link: link.rank)

    def insert(self, e: StreamingEdge) -> None:
        u, v, t = e
        if u == v:
            return
        self._seq += 1
        seq = self._seq
        nu, nv = self._vertex(u), self._vertex(v)
        connected, last = self._connected(nu, nv)
        if not connected:
            self._link(nu, nv, t, seq)
            return
        e_min = self._cycle_min(u, v, last.vid)
        if e_min.weight < t:
            self._remove_edge(self._edges[_pair(e_min.child, e_min.parent)])
            self._link(nu, nv, t, seq)

    def delete(self, e: StreamingEdge) -> None:
        node = self._edges.get(_pair(e.u, e.v))
        if node is not None and node.key[0] == e.t:
            self._remove_edge(node)

    # --------------------------------------------------------- introspection

    @property
    def tree_edge_count(self) -> int:
        return len(self._edges)

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    def vertices(self) -> Set[VertexId]:
        return set(self._vertices)

    def memory_words(self) -> int:
        # vertex node: left, right, parent, rev, agg, vertex id
        # edge node: left, right, parent, rev, agg, timestamp, seq, two endpoints
        # registry entry per edge: endpoint pair and node reference
        return 6 * len(self._vertices) + (9 + 3) * len(self._edges)

    def tree_edges(self) -> List[TreeEdge]:
        return [(a, b, node.key[0]) for (a, b), node in self._edges.items()]

    def check_invariants(self) -> None:
        nodes: List[LCNode] = list(self._vertices.values()) + list(self._edges.values())
        for x in nodes:
            for c in (x.left, x.right):
                if c is not None:
                    assert c.parent is x, f"{c} does not point back to {x}"
            agg = x.agg
            _update(x)
            assert x.agg is agg, f"aggregate of {x} is {agg}, recount {x.agg}"
        for (a, b), e in self._edges.items():
            assert _pair(*e.ends) == (a, b), f"edge {e} registered under {(a, b)}"
        # registered edges form a forest
        boss: Dict[VertexId, VertexId] = {}

        def find(x: VertexId) -> VertexId:
            while boss.get(x, x) != x:
                x = boss[x]
            return x

        for a, b in self._edges:
            ra, rb = find(a), find(b)
            assert ra != rb, f"registered edges close a cycle at {(a, b)}"
            boss[ra] = rb


def _pair(a: VertexId, b: VertexId) -> Tuple[VertexId, VertexId]:
    return (a, b) if a <= b else (b, a)
