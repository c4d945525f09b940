# app/services/dtree.py
"""
D-Tree indexes: one node layout, three policies.

    VanillaDTree  spanning forest with stored non-tree edges; deleting a tree edge runs a
                  replacement search (Technique 3).
    MstDTree      maximum spanning forest with stored non-tree edges; no search on delete.
    OmstDTree     maximum spanning forest, non-tree edges dropped; a vertex keeps only
                  parent, weight and size, like the S-Tree.

Technique 1 (promote a child of the root holding more than half the tree) runs on the
root walks of query and of the connectivity test inside insert, at most once per test.
Technique 2 (shortcut a far endpoint under the near one) runs on non-tree insertions; in
the MST variants only for the incoming edge, never for an evicted cycle minimum.
"""
from __future__ import annotations

import abc
from collections import Counter
from typing import Dict, List, Optional, Set, Tuple

from app.core.errors import PreconditionError, UnknownEdgeError
from app.services.stree import check_parent_forest, min_edge_on_cycle
from app.services.stream import (
    ConnectivityIndex, StreamingEdge, Timestamp, TreeEdge, TreeLink, VertexId,
)


class DNode:
    __slots__ = ("parent", "weight", "seq", "size", "children", "nontree")

    def __init__(self, keeps_children: bool, keeps_nontree: bool) -> None:
        self.parent: Optional[VertexId] = None
        self.weight: Timestamp = 0
        self.seq: int = 0
        self.size: int = 1
        self.children: Optional[Set[VertexId]] = set() if keeps_children else None
        # multiset of (neighbor, timestamp)
        self.nontree: Optional[Counter] = Counter() if keeps_nontree else None

    def __repr__(self) -> str:
        return f"DNode(parent={self.parent}, weight={self.weight}, size={self.size})"


class _DTree(ConnectivityIndex):
    keeps_children = True
    keeps_nontree = True

    def __init__(self) -> None:
        super().__init__()
        self._nodes: Dict[VertexId, DNode] = {}
        self._tree_edges = 0
        self._nontree_edges = 0
        # distinct (neighbor, timestamp) keys over all vertices
        self._nontree_entries = 0
        self._seq = 0

    # ------------------------------------------------------------ primitives

    def _node(self, v: VertexId) -> DNode:
        node = self._nodes.get(v)
        if node is None:
            node = self._nodes[v] = DNode(self.keeps_children, self.keeps_nontree)
        return node

    def _walk(self, v: VertexId, promote: bool) -> Tuple[VertexId, int, bool]:
        """Root walk from v -> (root, depth of v, promoted). Applies Technique 1 if allowed."""
        nodes = self._nodes
        node = nodes.get(v)
        if node is None:
            return v, 0, False
        x, below, depth = v, None, 0
        while node.parent is not None:
            below = x
            x = node.parent
            node = nodes[x]
            depth += 1
        self.counters.nodes_visited += depth + 1
        if promote and below is not None and 2 * nodes[below].size > node.size:
            self._promote(below, x)
            return below, depth - 1, True
        return x, depth, False

    def _promote(self, x: VertexId, r: VertexId) -> None:
        """x is a child of the root r: swap them so x becomes the root."""
        nx, nr = self._nodes[x], self._nodes[r]
        total = nr.size
        nr.size = total - nx.size
        nx.size = total
        nr.parent, nr.weight, nr.seq = x, nx.weight, nx.seq
        nx.parent, nx.weight, nx.seq = None, 0, 0
        if nx.children is not None:
            nr.children.discard(x)
            nx.children.add(r)
        self.counters.reroots += 1

    def find_root(self, v: VertexId) -> Tuple[VertexId, int]:
        root, depth, _ = self._walk(v, promote=True)
        return root, depth

    def depth_of(self, v: VertexId) -> int:
        return self._walk(v, promote=False)[1]

    def parent_of(self, v: VertexId) -> Optional[VertexId]:
        node = self._nodes.get(v)
        return None if node is None else node.parent

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
        on_path = [nodes[x] for x in path]
        old_size = [n.size for n in on_path]
        old_w = [(n.weight, n.seq) for n in on_path]
        k = len(path) - 1
        on_path[k].size = old_size[k] - old_size[k - 1]
        for i in range(k - 1, 0, -1):
            on_path[i].size = old_size[i] - old_size[i - 1] + on_path[i + 1].size
        on_path[0].size = old_size[k]
        for i in range(k, 0, -1):
            child = on_path[i]
            child.parent = path[i - 1]
            child.weight, child.seq = old_w[i - 1]
            if child.children is not None:
                child.children.discard(path[i - 1])
                on_path[i - 1].children.add(path[i])
        head = on_path[0]
        head.parent = None
        head.weight, head.seq = 0, 0

    def _attach(self, child: VertexId, parent: VertexId, t: Timestamp, seq: int) -> None:
        nodes = self._nodes
        c = nodes[child]
        c.parent, c.weight, c.seq = parent, t, seq
        if c.children is not None:
            nodes[parent].children.add(child)
        grow = c.size
        x: Optional[VertexId] = parent
        while x is not None:
            n = nodes[x]
            n.size += grow
            x = n.parent
        self._tree_edges += 1

    def _link(self, u: VertexId, ru: VertexId, v: VertexId, rv: VertexId,
              t: Timestamp, seq: int) -> None:
        if self._nodes[ru].size <= self._nodes[rv].size:
            child, parent = u, v
        else:
            child, parent = v, u
        self.re_root(child)
        self._attach(child, parent, t, seq)

    def _cut(self, child: VertexId) -> VertexId:
        nodes = self._nodes
        c = nodes[child]
        p = c.parent
        if p is None:
            raise PreconditionError(f"cut at root {child}")
        if c.children is not None:
            nodes[p].children.discard(child)
        c.parent, c.weight, c.seq = None, 0, 0
        shrink = c.size
        x: Optional[VertexId] = p
        while x is not None:
            n = nodes[x]
            n.size -= shrink
            x = n.parent
        self._tree_edges -= 1
        return p

    def _tree_child(self, e: StreamingEdge) -> Optional[VertexId]:
        """Child endpoint when e is the stored tree edge (endpoints and weight), else None."""
        u, v, t = e
        nu = self._nodes.get(u)
        if nu is not None and nu.parent == v and nu.weight == t:
            return u
        nv = self._nodes.get(v)
        if nv is not None and nv.parent == u and nv.weight == t:
            return v
        return None

    # ------------------------------------------------------- non-tree storage

    def _store_nontree(self, a: VertexId, b: VertexId, t: Timestamp) -> None:
        for node, key in ((self._nodes[a], (b, t)), (self._nodes[b], (a, t))):
            if node.nontree[key] == 0:
                self._nontree_entries += 1
            node.nontree[key] += 1
        self._nontree_edges += 1

    def _remove_nontree(self, a: VertexId, b: VertexId, t: Timestamp) -> bool:
        na, nb = self._nodes.get(a), self._nodes.get(b)
        if na is None or nb is None or na.nontree is None or na.nontree[(b, t)] == 0:
            return False
        for node, key in ((na, (b, t)), (nb, (a, t))):
            node.nontree[key] -= 1
            if node.nontree[key] == 0:
                del node.nontree[key]
                self._nontree_entries -= 1
        self._nontree_edges -= 1
        return True

    def _on_detached(self, link: TreeLink) -> None:
        """A tree edge displaced by Technique 2 (and still live)."""
        if self.keeps_nontree:
            self._store_nontree(link.child, link.parent, link.weight)

    # ------------------------------------------------------------ techniques

    def technique1_promote(self, v: VertexId) -> None:
        self._walk(v, promote=True)

    def technique2_shortcut(self, u: VertexId, v: VertexId, e: StreamingEdge,
                            du: Optional[int] = None, dv: Optional[int] = None,
                            seq: Optional[int] = None) -> bool:
        """
        Hang the endpoint farther from the root directly under the nearer one, through e.

        Returns True when the tree changed. The tree edge removed to make room sits on the
        cycle closed by e, so connectivity is preserved.
        """
        if du is None or dv is None:
            ru, du, _ = self._walk(u, promote=False)
            rv, dv, _ = self._walk(v, promote=False)
            if ru != rv:
                raise PreconditionError(f"{u} and {v} are not connected")
        if abs(du - dv) < 2:
            return False
        far, near, gap = (u, v, du - dv) if du > dv else (v, u, dv - du)
        nodes = self._nodes
        x = far
        for _ in range(gap - 2):
            x = nodes[x].parent
        nx = nodes[x]
        detached = TreeLink(x, nx.parent, nx.weight, nx.seq)
        self._cut(x)
        self.re_root(far)
        if seq is None:
            self._seq += 1
            seq = self._seq
        self._attach(far, near, e.t, seq)
        self._on_detached(detached)
        return True

    def _connectivity_test(self, u: VertexId, v: VertexId) -> Tuple[bool, VertexId, int, VertexId, int]:
        ru, du, promoted = self._walk(u, promote=True)
        rv, dv, promoted_v = self._walk(v, promote=not promoted)
        if promoted_v and ru != rv:
            # u's tree may be the one v just re-rooted
            ru, du, _ = self._walk(u, promote=False)
        return ru == rv, ru, du, rv, dv

    # ------------------------------------------------------------ operations

    def query(self, u: VertexId, v: VertexId) -> bool:
        if u == v:
            return True
        return self._connectivity_test(u, v)[0]

    def find_min_in_cycle(self, u: VertexId, v: VertexId) -> TreeLink:
        ru, du, _ = self._walk(u, promote=False)
        rv, dv, _ = self._walk(v, promote=False)
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
        same, ru, du, rv, dv = self._connectivity_test(u, v)
        if not same:
            self._link(u, ru, v, rv, t, seq)
            return
        self._insert_cycle_edge(e, du, dv, seq)

    @abc.abstractmethod
    def _insert_cycle_edge(self, e: StreamingEdge, du: int, dv: int, seq: int) -> None:
        """e closes a cycle: du and dv are the endpoint depths from the connectivity test."""

    def _relink(self, e: StreamingEdge, seq: int) -> None:
        u, v, t = e
        ru, _, _ = self._walk(u, promote=False)
        rv, _, _ = self._walk(v, promote=False)
        self._link(u, ru, v, rv, t, seq)

    # --------------------------------------------------------- introspection

    @property
    def tree_edge_count(self) -> int:
        return self._tree_edges

    @property
    def non_tree_edge_count(self) -> int:
        return self._nontree_edges

    @property
    def vertex_count(self) -> int:
        return len(self._nodes)

    def vertices(self) -> Set[VertexId]:
        return set(self._nodes)

    def nontree_neighbors(self, v: VertexId) -> Counter:
        node = self._nodes.get(v)
        return Counter() if node is None or node.nontree is None else Counter(node.nontree)

    def memory_words(self) -> int:
        words = 4 * len(self._nodes)  # parent, weight, seq, size
        if self.keeps_children:
            # set header per vertex, one entry per tree edge
            words += len(self._nodes) + self._tree_edges
        if self.keeps_nontree:
            # multiset header per vertex; an entry holds neighbor, timestamp and multiplicity
            words += len(self._nodes) + 3 * self._nontree_entries
        return words

    def tree_edges(self) -> List[TreeEdge]:
        out = []
        for v, n in self._nodes.items():
            if n.parent is not None:
                a, b = (v, n.parent) if v <= n.parent else (n.parent, v)
                out.append((a, b, n.weight))
        return out

    def check_invariants(self) -> None:
        nodes = self._nodes
        check_parent_forest(nodes, self._tree_edges)
        if self.keeps_children:
            for v, n in nodes.items():
                for c in n.children:
                    assert nodes[c].parent == v, f"{c} listed under {v} but parent is {nodes[c].parent}"
                if n.parent is not None:
                    assert v in nodes[n.parent].children, f"{v} missing from children of {n.parent}"
        if self.keeps_nontree:
            entries = keys = 0
            for v, n in nodes.items():
                keys += len(n.nontree)
                for (w, t), cnt in n.nontree.items():
                    assert nodes[w].nontree[(v, t)] == cnt, f"non-tree ({v},{w},{t}) not symmetric"
                    entries += cnt
            assert entries == 2 * self._nontree_edges, "non-tree edge count drifted"
            assert keys == self._nontree_entries, "non-tree entry count drifted"
        else:
            assert self._nontree_edges == 0


class VanillaDTree(_DTree):
    name = "vanilla-d"

    def _insert_cycle_edge(self, e: StreamingEdge, du: int, dv: int, seq: int) -> None:
        if not self.technique2_shortcut(e.u, e.v, e, du, dv, seq):
            self._store_nontree(e.u, e.v, e.t)

    def technique3_replacement_search(self, e: StreamingEdge) -> Optional[StreamingEdge]:
        """
        Replacement for the tree edge e, which has just been cut.

        Scans the non-tree neighbours of every vertex of the smaller side. Among edges
        reaching the larger side, returns (u', v', t) whose v' (larger side) is closest to
        its root; ties by smallest v', then u', then t. None when the sides stay apart.
        """
        self.counters.replacement_searches += 1
        nodes = self._nodes
        ru, _, _ = self._walk(e.u, promote=False)
        rv, _, _ = self._walk(e.v, promote=False)
        if ru == rv:
            raise PreconditionError(f"{e} is not a cut tree edge")
        small = ru if nodes[ru].size <= nodes[rv].size else rv
        members = [small]
        for x in members:
            members.extend(nodes[x].children)
        inside = set(members)
        self.counters.nodes_visited += len(members)

        depth: Dict[VertexId, int] = {}
        best = None
        for x in members:
            for (y, t) in nodes[x].nontree:
                if y in inside:
                    continue
                if y not in depth:
                    depth[y] = self._walk(y, promote=False)[1]
                key = (depth[y], y, x, t)
                if best is None or key < best:
                    best = key
        if best is None:
            return None
        _, y, x, t = best
        return StreamingEdge(x, y, t)

    def delete(self, e: StreamingEdge) -> None:
        child = self._tree_child(e)
        if child is not None:
            self._cut(child)
            rep = self.technique3_replacement_search(e)
            if rep is not None:
                self._remove_nontree(rep.u, rep.v, rep.t)
                self.re_root(rep.u)
                self._seq += 1
                self._attach(rep.u, rep.v, rep.t, self._seq)
            return
        if not self._remove_nontree(e.u, e.v, e.t):
            raise UnknownEdgeError(f"{e} is not stored")


class MstDTree(_DTree):
    name = "mst-d"

    def _insert_cycle_edge(self, e: StreamingEdge, du: int, dv: int, seq: int) -> None:
        e_min = min_edge_on_cycle(self._nodes, self.counters, e.u, du, e.v, dv)
        if e_min.weight < e.t:
            self._cut(e_min.child)
            self._store_nontree(e_min.child, e_min.parent, e_min.weight)
            self._relink(e, seq)
        elif not self.technique2_shortcut(e.u, e.v, e, du, dv, seq):
            self._store_nontree(e.u, e.v, e.t)

    def delete(self, e: StreamingEdge) -> None:
        child = self._tree_child(e)
        if child is not None:
            self._cut(child)  # no replacement search
            return
        if not self._remove_nontree(e.u, e.v, e.t):
            raise UnknownEdgeError(f"{e} is not stored")


class OmstDTree(_DTree):
    name = "omst-d"
    keeps_children = False
    keeps_nontree = False

    def _insert_cycle_edge(self, e: StreamingEdge, du: int, dv: int, seq: int) -> None:
        e_min = min_edge_on_cycle(self._nodes, self.counters, e.u, du, e.v, dv)
        if e_min.weight < e.t:
            self._cut(e_min.child)
            self._relink(e, seq)
        else:
            # e ties the cycle minimum: the shortcut swap keeps the forest maximum
            self.technique2_shortcut(e.u, e.v, e, du, dv, seq)

    def delete(self, e: StreamingEdge) -> None:
        child = self._tree_child(e)
        if child is not None:
            self._cut(child)

    def compact(self) -> int:
        lonely = [v for v, n in self._nodes.items() if n.parent is None and n.size == 1]
        for v in lonely:
            del self._nodes[v]
        return len(lonely)
