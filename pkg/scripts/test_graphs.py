# test_graphs.py
import pytest

from src.core.graphs import compositions, connected_graphs, ordered_splits, set_partitions


@pytest.mark.parametrize("n, count", [(1, 1), (2, 1), (3, 4), (4, 38)])
def test_connected_labelled_graph_counts(n, count):
    assert len(connected_graphs(n)) == count


def test_leaf_and_inner_edges_of_a_path():
    path = next(g for g in connected_graphs(3) if len(g.edges) == 2 and g.valency(1) == 2)
    assert path.inner_vertices == [1]
    assert len(path.leaf_edges) == 2
    assert path.inner_edges == []


def test_compositions():
    assert list(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert list(compositions(1, 0)) == []


def test_ordered_splits_cover_every_assignment():
    splits = list(ordered_splits((1, 2), 2))
    assert len(splits) == 4
    assert ((1, 2), ()) in splits and ((), (1, 2)) in splits


def test_set_partitions_bell_numbers():
    assert [len(list(set_partitions(tuple(range(n))))) for n in range(5)] == [1, 1, 2, 5, 15]
