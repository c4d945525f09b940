from __future__ import annotations

from collections import Counter

import pytest

from app.core.errors import PreconditionError, UnknownEdgeError
from app.services.dtree import MstDTree, OmstDTree, VanillaDTree, _DTree
from app.services.stream import StreamingEdge
from app.services.stree import OmstSTree
from tests.conftest import E, V, W7_EDGES, W7_TREE, W8_LINKS, W8_TREE, attach_forest, tree_set

SHORTCUT_TREE = (W8_TREE - tree_set([E("D", "H", 12)])) | tree_set([E("C", "H", 12)])


@pytest.mark.parametrize("cls", [OmstDTree, MstDTree, VanillaDTree])
def test_shortcut_swaps_dh_for_ch(cls):
    idx = cls()
    attach_forest(idx, W8_LINKS)
    idx.insert(E("C", "H", 12))
    idx.check_invariants()
    # C held 8 of 10 vertices: promoted to the root on the way
    assert idx.parent_of(V["C"]) is None
    assert idx.parent_of(V["B"]) == V["C"]
    assert idx.parent_of(V["H"]) == V["C"] and idx.depth_of(V["H"]) == 1
    assert idx.parent_of(V["D"]) == V["C"]
    assert tree_set(idx.tree_edges()) == SHORTCUT_TREE
    assert idx.tree_weight() == 96
    assert idx.counters.replacement_searches == 0


def test_omst_shortcut_drops_the_displaced_edge():
    idx = OmstDTree()
    attach_forest(idx, W8_LINKS)
    idx.insert(E("C", "H", 12))
    assert idx.non_tree_edge_count == 0
    assert idx.memory_words() == 4 * 10


def test_mst_shortcut_keeps_the_displaced_edge_as_non_tree():
    idx = MstDTree()
    attach_forest(idx, W8_LINKS)
    idx.insert(E("C", "H", 12))
    assert idx.non_tree_edge_count == 1
    assert idx.nontree_neighbors(V["D"]) == Counter({(V["H"], 12): 1})
    idx.delete(E("H", "D", 12))
    assert idx.non_tree_edge_count == 0
    idx.check_invariants()


def test_query_promotes_a_heavy_child_once():
    idx = OmstDTree()
    attach_forest(idx, W8_LINKS)
    assert idx.query(V["E"], V["K"])
    assert idx.parent_of(V["C"]) is None
    assert idx.parent_of(V["B"]) == V["C"]
    assert idx.size_of(V["C"]) == 10 and idx.size_of(V["B"]) == 2
    assert idx.counters.reroots == 1
    idx.check_invariants()


def test_technique2_on_a_chain():
    idx = OmstDTree()
    attach_forest(idx, [StreamingEdge(1, 0, 5), StreamingEdge(2, 1, 6), StreamingEdge(3, 2, 7)])
    assert not idx.technique2_shortcut(0, 1, StreamingEdge(0, 1, 9))
    assert idx.technique2_shortcut(0, 3, StreamingEdge(0, 3, 9))
    idx.check_invariants()
    assert idx.parent_of(3) == 0 and idx.depth_of(3) == 1
    assert idx.parent_of(2) == 3 and idx.parent_of(1) == 0
    assert tree_set(idx.tree_edges()) == {(0, 1, 5), (0, 3, 9), (2, 3, 7)}


def test_technique2_needs_one_tree():
    idx = OmstDTree()
    attach_forest(idx, [StreamingEdge(1, 0, 5), StreamingEdge(3, 2, 5)])
    with pytest.raises(PreconditionError):
        idx.technique2_shortcut(0, 3, StreamingEdge(0, 3, 9))


def _triangle(cls):
    idx = cls()
    for e in (StreamingEdge(1, 2, 1), StreamingEdge(2, 3, 2), StreamingEdge(1, 3, 3)):
        idx.insert(e)
    idx.check_invariants()
    return idx


def test_vanilla_replacement_search_reconnects():
    idx = _triangle(VanillaDTree)
    assert idx.non_tree_edge_count == 1
    idx.delete(StreamingEdge(1, 2, 1))
    idx.check_invariants()
    assert idx.counters.replacement_searches == 1
    assert idx.query(1, 2)
    assert idx.non_tree_edge_count == 0
    assert tree_set(idx.tree_edges()) == {(2, 3, 2), (1, 3, 3)}
    idx.delete(StreamingEdge(1, 3, 3))
    assert idx.counters.replacement_searches == 2
    assert not idx.query(1, 2)


def test_vanilla_replacement_prefers_the_shallowest_endpoint():
    idx = VanillaDTree()
    # star around 0 plus a pendant 9 under 1
    attach_forest(idx, [StreamingEdge(1, 0, 1), StreamingEdge(2, 0, 1), StreamingEdge(3, 2, 1),
                        StreamingEdge(9, 1, 1)])
    idx._store_nontree(9, 3, 4)
    idx._store_nontree(9, 2, 5)
    idx.delete(StreamingEdge(9, 1, 1))
    # 2 is one hop from the root, 3 is two
    assert idx.parent_of(9) == 2
    assert idx.nontree_neighbors(9) == Counter({(3, 4): 1})
    idx.check_invariants()


def test_mst_insert_evicts_the_cycle_minimum_into_storage():
    idx = _triangle(MstDTree)
    assert tree_set(idx.tree_edges()) == {(2, 3, 2), (1, 3, 3)}
    assert idx.nontree_neighbors(1) == Counter({(2, 1): 1})
    assert idx.tree_weight() == 5
    idx.delete(StreamingEdge(1, 2, 1))
    assert idx.counters.replacement_searches == 0


@pytest.mark.parametrize("cls", [MstDTree, VanillaDTree])
def test_unknown_delete_raises_where_every_edge_is_stored(cls):
    idx = _triangle(cls)
    with pytest.raises(UnknownEdgeError):
        idx.delete(StreamingEdge(8, 9, 1))


def test_unknown_delete_is_a_no_op_for_omst():
    idx = _triangle(OmstDTree)
    idx.delete(StreamingEdge(8, 9, 1))
    idx.delete(StreamingEdge(1, 2, 1))  # evicted at insert
    assert tree_set(idx.tree_edges()) == {(2, 3, 2), (1, 3, 3)}


def test_omst_dtree_matches_stree_memory_and_weight():
    s, d = OmstSTree(), OmstDTree()
    for e in W7_EDGES:
        s.insert(e)
        d.insert(e)
    d.check_invariants()
    assert d.memory_words() == s.memory_words() == 4 * 9
    assert d.tree_weight() == s.tree_weight() == 76
    assert d.non_tree_edge_count == 0


def test_mst_and_vanilla_store_every_live_edge():
    for cls in (MstDTree, VanillaDTree):
        idx = cls()
        for e in W7_EDGES:
            idx.insert(e)
        idx.check_invariants()
        assert idx.tree_edge_count + idx.non_tree_edge_count == len(W7_EDGES)
        # no two non-tree edges share an endpoint and a timestamp here: two entries each
        assert idx.memory_words() == 6 * 9 + idx.tree_edge_count + 3 * 2 * idx.non_tree_edge_count


def test_vanilla_reconnects_w7_through_ac_when_bd_expires():
    idx = VanillaDTree()
    # the w7 spanning tree rooted at A, non-tree edges (A,C) and (E,F)
    attach_forest(idx, [E("D", "A", 7), E("B", "D", 7), E("C", "B", 8), E("E", "C", 9),
                        E("F", "D", 10), E("G", "F", 10), E("H", "A", 11), E("I", "H", 11)])
    idx._store_nontree(V["A"], V["C"], 10)
    idx._store_nontree(V["E"], V["F"], 7)
    idx.check_invariants()
    idx.delete(E("B", "D", 7))
    idx.check_invariants()
    assert idx.counters.replacement_searches == 1
    # {B,C,E} hangs back on through (A,C); A is the root of the other side
    assert idx.parent_of(V["C"]) == V["A"]
    assert tree_set(idx.tree_edges()) == (W7_TREE - tree_set([E("B", "D", 7)])) | tree_set([E("A", "D", 7)])
    assert idx.nontree_neighbors(V["E"]) == Counter({(V["F"], 7): 1})
    assert idx.non_tree_edge_count == 1


def test_dtree_base_needs_a_cycle_policy():
    with pytest.raises(TypeError, match="_insert_cycle_edge"):
        _DTree()
