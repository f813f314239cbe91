"""Finite digraphs on integer vertices and the reachability primitives shared
by the box-map, filtration and Morse code.

Every routine here is duck-typed over objects exposing ``vertices``, ``succ``
and ``pred``; :class:`conley.boxdyn.BoxMap` and the digraph classes below both
qualify.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import AbstractSet, Iterable, Mapping, Optional

import networkx as nx

BASEPOINT = -1
"""Vertex id of the collapsed exit set in a :class:`PointedDigraph`."""


def _invert(vertices: Iterable[int], succ: Mapping[int, Iterable[int]]) -> dict[int, tuple[int, ...]]:
    pred: dict[int, list[int]] = {v: [] for v in vertices}
    for u in sorted(pred):
        for v in succ.get(u, ()):
            if v in pred:
                pred[v].append(u)
    return {v: tuple(us) for v, us in pred.items()}


@dataclass(frozen=True, eq=False)
class Digraph:
    """Immutable digraph; ``succ[v]`` is a sorted, duplicate-free tuple."""

    vertices: frozenset
    succ: Mapping[int, tuple[int, ...]]

    @cached_property
    def pred(self) -> dict[int, tuple[int, ...]]:
        return _invert(self.vertices, self.succ)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in sorted(self.vertices) for v in self.succ.get(u, ())]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(sorted(self.vertices))
        g.add_edges_from(self.edges())
        return g

    def to_json(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "edges": [list(e) for e in self.edges()],
        }


@dataclass(frozen=True, eq=False)
class SubDigraph(Digraph):
    """Restriction of a map to a vertex set.

    ``leaving`` holds the vertices having at least one original edge, or the
    exit flag, pointing outside the vertex set.
    """

    leaving: frozenset = frozenset()

    def to_json(self) -> dict:
        out = super().to_json()
        out["leaving"] = sorted(self.leaving)
        return out


def make_digraph(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> Digraph:
    vs = frozenset(vertices)
    succ: dict[int, set[int]] = {v: set() for v in vs}
    for u, v in edges:
        if u not in vs or v not in vs:
            raise ValueError(f"edge ({u}, {v}) has an endpoint outside the vertex set")
        succ[u].add(v)
    return Digraph(vs, {v: tuple(sorted(ws)) for v, ws in succ.items()})


def _closure(adj: Mapping[int, Iterable[int]], sources: Iterable[int],
             within: Optional[AbstractSet[int]], strict: bool) -> set[int]:
    seen: set[int] = set()
    queue: deque[int] = deque()
    for s in sources:
        if within is not None and s not in within:
            continue
        if strict:
            queue.append(s)
        elif s not in seen:
            seen.add(s)
            queue.append(s)
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if within is not None and v not in within:
                continue
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def reach(g, sources: Iterable[int], within: Optional[AbstractSet[int]] = None,
          strict: bool = False) -> set[int]:
    """Vertices reachable from ``sources`` inside ``within``.

    With ``strict`` only paths of length at least one count, so a source is
    included only if it lies on a cycle through the sources' forward set.
    """
    return _closure(g.succ, sources, within, strict)


def coreach(g, targets: Iterable[int], within: Optional[AbstractSet[int]] = None,
            strict: bool = False) -> set[int]:
    """Vertices that reach ``targets`` inside ``within``."""
    return _closure(g.pred, targets, within, strict)


def trim_invariant(g, within: Iterable[int]) -> frozenset:
    """Largest subset in which every vertex keeps an in-edge and an out-edge.

    Worklist deletion; the result is the unique fixed point and does not
    depend on deletion order.
    """
    alive = set(within)
    indeg = {v: 0 for v in alive}
    outdeg = {v: 0 for v in alive}
    for u in alive:
        for v in g.succ.get(u, ()):
            if v in alive:
                outdeg[u] += 1
                indeg[v] += 1
    work = deque(v for v in sorted(alive) if indeg[v] == 0 or outdeg[v] == 0)
    while work:
        v = work.popleft()
        if v not in alive:
            continue
        alive.discard(v)
        for w in g.succ.get(v, ()):
            if w in alive and w != v:
                indeg[w] -= 1
                if indeg[w] == 0:
                    work.append(w)
        for u in g.pred.get(v, ()):
            if u in alive and u != v:
                outdeg[u] -= 1
                if outdeg[u] == 0:
                    work.append(u)
    return frozenset(alive)


def cyclic_components(g, within: Optional[Iterable[int]] = None) -> list[frozenset]:
    """Strongly connected components carrying at least one edge.

    Sorted by smallest member so the output is deterministic.
    """
    verts = set(g.vertices if within is None else within)
    h = nx.DiGraph()
    h.add_nodes_from(verts)
    h.add_edges_from((u, v) for u in verts for v in g.succ.get(u, ()) if v in verts)
    comps = []
    for comp in nx.strongly_connected_components(h):
        if len(comp) > 1 or any(h.has_edge(v, v) for v in comp):
            comps.append(frozenset(comp))
    comps.sort(key=min)
    return comps
