# graphs.py
import logging
from functools import lru_cache
from itertools import combinations, product
from typing import FrozenSet, Iterator, List, Sequence, Tuple

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class SimpleGraph:
    """A simple labelled graph on vertices 0..n-1 with edges (k, l), k < l."""

    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges: FrozenSet[Edge]):
        self.n = n
        self.edges = edges

    def valency(self, vertex: int) -> int:
        return sum(1 for e in self.edges if vertex in e)

    def neighbours(self, vertex: int) -> List[int]:
        return sorted(l if k == vertex else k for k, l in self.edges if vertex in (k, l))

    @property
    def inner_vertices(self) -> List[int]:
        """Vertices of valency ≥ 2."""
        return [v for v in range(self.n) if self.valency(v) >= 2]

    @property
    def leaf_edges(self) -> List[Tuple[int, int]]:
        """Edges with a leaf: pairs (leaf, inner) where ``leaf`` has valency 1.

        For n = 2 the single edge has two leaves and is reported once as (0, 1).
        """
        out = []
        for k, l in sorted(self.edges):
            if self.valency(k) == 1 and self.valency(l) == 1:
                out.append((k, l))
            elif self.valency(k) == 1:
                out.append((k, l))
            elif self.valency(l) == 1:
                out.append((l, k))
        return out

    @property
    def inner_edges(self) -> List[Edge]:
        leafy = {tuple(sorted(e)) for e in self.leaf_edges}
        return [e for e in sorted(self.edges) if e not in leafy]

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in self.neighbours(v):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == self.n

    def __repr__(self) -> str:
        return f"SimpleGraph({self.n}, {sorted(self.edges)})"


@lru_cache(maxsize=None)
def connected_graphs(n: int) -> Tuple[SimpleGraph, ...]:
    """All connected simple graphs on n labelled vertices."""
    if n < 1:
        return ()
    pairs = list(combinations(range(n), 2))
    out = []
    for size in range(n - 1, len(pairs) + 1):
        for chosen in combinations(pairs, size):
            graph = SimpleGraph(n, frozenset(chosen))
            if graph.is_connected():
                out.append(graph)
    logger.debug("enumerated %d connected graphs on %d vertices", len(out), n)
    return tuple(out)


# ---------------------------------------------------------------------- set combinatorics
def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def ordered_splits(items: Sequence[int], parts: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """All ordered decompositions of ``items`` into ``parts`` possibly empty blocks."""
    for assignment in product(range(parts), repeat=len(items)):
        yield tuple(tuple(x for x, a in zip(items, assignment) if a == b) for b in range(parts))


def set_partitions(items: Sequence[int]) -> Iterator[List[Tuple[int, ...]]]:
    """Unordered partitions of ``items`` into non-empty blocks, each block in input order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [(first,)] + partition
        for i, block in enumerate(partition):
            yield partition[:i] + [(first,) + block] + partition[i + 1:]
