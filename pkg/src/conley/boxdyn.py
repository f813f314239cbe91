"""Box grids, outer-approximating box maps, and invariant-set primitives.

Box sets are plain ``frozenset`` objects of integer box ids; the grid they
refer to is carried by the :class:`BoxMap` they are used with.

Box ids are row-major with axis 0 varying fastest, so in 1D box ``k`` is the
k-th interval from the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import graph
from .errors import BudgetExceeded, DigraphOnly, NonFiniteImage
from .graph import SubDigraph, _invert
from .systems import SystemSpec

DEFAULT_BOX_BUDGET = 2 ** 22


@dataclass(frozen=True)
class BoxGrid:
    dimension: int
    bounds: tuple[tuple[float, float], ...]
    subdivisions: tuple[int, ...]

    def __post_init__(self):
        if self.dimension < 1 or len(self.bounds) != self.dimension \
                or len(self.subdivisions) != self.dimension:
            raise ValueError("grid shape does not match its dimension")
        if any(n < 1 for n in self.subdivisions):
            raise ValueError("subdivisions must be positive")

    @classmethod
    def uniform(cls, bounds: Sequence[Sequence[float]], depth: int) -> "BoxGrid":
        b = tuple((float(lo), float(hi)) for lo, hi in bounds)
        return cls(len(b), b, (2 ** depth,) * len(b))

    @property
    def size(self) -> int:
        return math.prod(self.subdivisions)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @cached_property
    def widths(self) -> np.ndarray:
        return (self.upper - self.lower) / np.array(self.subdivisions)

    def multi_index(self, ids) -> np.ndarray:
        """``(n, d)`` array of per-axis indices."""
        ids = np.asarray(ids, dtype=np.int64)
        return np.stack(np.unravel_index(ids, self.subdivisions, order="F"), axis=-1)

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        out, acc = [], 1
        for n in self.subdivisions:
            out.append(acc)
            acc *= n
        return tuple(out)

    def coords(self, b: int) -> tuple[int, ...]:
        """Per-axis indices of a single box (pure Python, for hot loops)."""
        out = []
        for n in self.subdivisions:
            b, r = divmod(b, n)
            out.append(r)
        return tuple(out)

    def box_id(self, idx) -> int:
        return sum(int(i) * s for i, s in zip(idx, self._strides))

    def box_ids(self, idx: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(tuple(idx.T), self.subdivisions, order="F")

    def box_bounds(self, ids) -> tuple[np.ndarray, np.ndarray]:
        idx = self.multi_index(ids)
        n = np.array(self.subdivisions)
        span = self.upper - self.lower
        lo = self.lower + span * idx / n
        hi = self.lower + span * (idx + 1) / n
        return lo, hi

    def touching(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis index ranges of the closed boxes meeting the hulls ``[lo, hi]``.

        Ranges are clipped to the grid; an empty range has ``kmin > kmax``.
        """
        w = self.widths
        kmin = np.ceil((lo - self.lower) / w).astype(np.int64) - 1
        kmax = np.floor((hi - self.lower) / w).astype(np.int64)
        top = np.array(self.subdivisions) - 1
        return np.maximum(kmin, 0), np.minimum(kmax, top)

    def boxes_containing(self, point: Sequence[float]) -> list[int]:
        p = np.asarray(point, dtype=float)[None, :]
        kmin, kmax = self.touching(p, p)
        if np.any(kmin > kmax):
            return []
        return sorted(self.rectangle(kmin[0], kmax[0]))

    def rectangle(self, kmin, kmax) -> list[int]:
        """Box ids of the index rectangle ``kmin..kmax`` (inclusive)."""
        ids = [0]
        for a, z, st in zip(kmin, kmax, self._strides):
            ids = [base + k * st for k in range(int(a), int(z) + 1) for base in ids]
        return ids

    def bounding_rectangle(self, boxes: Iterable[int]):
        """``(kmin, kmax, is_rectangle)`` of a nonempty box collection."""
        boxes = list(boxes)
        cs = [self.coords(b) for b in boxes]
        kmin = tuple(min(c[j] for c in cs) for j in range(self.dimension))
        kmax = tuple(max(c[j] for c in cs) for j in range(self.dimension))
        count = math.prod(z - a + 1 for a, z in zip(kmin, kmax))
        return kmin, kmax, count == len(set(boxes))

    def on_outer_face(self, b: int) -> bool:
        return any(i == 0 or i == n - 1 for i, n in zip(self.coords(b), self.subdivisions))

    def outer_face(self) -> frozenset:
        idx = self.multi_index(np.arange(self.size))
        top = np.array(self.subdivisions) - 1
        mask = np.any((idx == 0) | (idx == top), axis=1)
        return frozenset(int(b) for b in np.nonzero(mask)[0])

    def neighbors(self, b: int) -> list[int]:
        """Vertex-adjacent grid neighbours (up to 3^d - 1 of them)."""
        c = self.coords(b)
        lo = [max(x - 1, 0) for x in c]
        hi = [min(x + 1, n - 1) for x, n in zip(c, self.subdivisions)]
        return [v for v in self.rectangle(lo, hi) if v != b]

    def dilate(self, boxes: Iterable[int], layers: int = 1) -> frozenset:
        """Grow a box set by ``layers`` rings of vertex-adjacent neighbours."""
        boxes = frozenset(boxes)
        if not boxes or layers <= 0:
            return boxes
        kmin, kmax, rect = self.bounding_rectangle(boxes)
        if rect:
            lo = [max(a - layers, 0) for a in kmin]
            hi = [min(z + layers, n - 1) for z, n in zip(kmax, self.subdivisions)]
            return frozenset(self.rectangle(lo, hi))
        out = set(boxes)
        frontier = set(out)
        for _ in range(layers):
            new = {v for b in frontier for v in self.neighbors(b)} - out
            out |= new
            frontier = new
        return frozenset(out)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "bounds": [list(b) for b in self.bounds],
            "subdivisions": list(self.subdivisions),
        }


@dataclass(frozen=True, eq=False)
class BoxMap:
    """Multivalued map on boxes, stored as a digraph.

    ``grid`` is ``None`` for pure-digraph input. ``exits`` holds boxes whose
    image leaves the grid region; ``boundary`` the boxes touching the exterior.
    """

    grid: Optional[BoxGrid]
    vertices: frozenset
    succ: Mapping[int, tuple[int, ...]]
    exits: frozenset = frozenset()
    boundary: frozenset = frozenset()
    system: Optional[SystemSpec] = field(default=None, compare=False)

    @cached_property
    def pred(self) -> dict[int, tuple[int, ...]]:
        return _invert(self.vertices, self.succ)

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]],
                   exits: Iterable[int] = (), boundary: Optional[Iterable[int]] = None,
                   grid: Optional[BoxGrid] = None) -> "BoxMap":
        """Hand-built map. On a grid, ``boundary`` defaults to the outer face."""
        g = graph.make_digraph(vertices, edges)
        if boundary is None:
            bd = grid.outer_face() & g.vertices if grid is not None else frozenset()
        else:
            bd = frozenset(boundary)
        return cls(grid, g.vertices, g.succ, frozenset(exits), bd)

    @property
    def is_grid(self) -> bool:
        return self.grid is not None

    def require_grid(self) -> BoxGrid:
        if self.grid is None:
            raise DigraphOnly("operation needs box geometry; map is a pure digraph")
        return self.grid

    def image(self, boxes: Iterable[int]) -> frozenset:
        return frozenset(v for b in boxes for v in self.succ.get(b, ()))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in sorted(self.vertices) for v in self.succ.get(u, ())]

    def fattened(self, slack: int) -> "BoxMap":
        """Same map with every image grown by ``slack`` layers of grid neighbours."""
        if slack == 0:
            return self
        grid = self.require_grid()
        succ = {b: tuple(sorted(grid.dilate(ws, slack))) if ws else () for b, ws in self.succ.items()}
        return BoxMap(grid, self.vertices, succ, self.exits, self.boundary, self.system)

    def to_json(self) -> dict:
        out = {
            "vertices": sorted(self.vertices),
            "edges": [list(e) for e in self.edges()],
            "exits": sorted(self.exits),
            "boundary": sorted(self.boundary),
        }
        if self.grid is not None:
            out["grid"] = self.grid.to_json()
        return out


def build_boxmap(system: SystemSpec, depth: Optional[int] = None,
                 padding: Optional[float] = None,
                 budget: int = DEFAULT_BOX_BUDGET) -> BoxMap:
    """Outer approximation of ``system`` on the uniform grid of the given depth."""
    if system.kind == "digraph":
        g = graph.make_digraph(system.vertices, system.edges)
        return BoxMap(None, g.vertices, g.succ, frozenset(system.exits),
                      frozenset(system.boundary), system)
    depth = system.depth if depth is None else depth
    if depth is None:
        raise ValueError("no depth given and the system does not set one")
    padding = system.padding if padding is None else float(padding)
    if padding < 0:
        raise ValueError("padding must be nonnegative")
    if (2 ** depth) ** system.dimension > budget:
        raise BudgetExceeded(
            f"depth {depth} gives {(2 ** depth) ** system.dimension} boxes, budget is {budget}")
    grid = BoxGrid.uniform(system.bounds, depth)
    ids = np.arange(grid.size)
    lo, hi = grid.box_bounds(ids)
    with np.errstate(all="ignore"):
        hulls = system.enclose_pieces(lo, hi)
    leaves = np.zeros(grid.size, dtype=bool)
    images: list[set[int]] = [set() for _ in range(grid.size)]
    for img_lo, img_hi, active in hulls:
        with np.errstate(over="ignore", invalid="ignore"):
            img_lo = img_lo - padding
            img_hi = img_hi + padding
        finite = np.all(np.isfinite(img_lo), axis=1) & np.all(np.isfinite(img_hi), axis=1)
        bad = active & ~finite
        if np.any(bad):
            b = int(np.nonzero(bad)[0][0])
            raise NonFiniteImage(f"image hull of box {b} is not finite")
        out = np.any(img_lo < grid.lower, axis=1) | np.any(img_hi > grid.upper, axis=1)
        leaves |= active & out
        kmin, kmax = grid.touching(np.where(finite[:, None], img_lo, 0.0),
                                   np.where(finite[:, None], img_hi, 0.0))
        ok = active & np.all(kmin <= kmax, axis=1)
        for b in np.nonzero(ok)[0]:
            if grid.dimension == 1:
                images[b].update(range(int(kmin[b, 0]), int(kmax[b, 0]) + 1))
            else:
                images[b].update(grid.rectangle(kmin[b], kmax[b]))
    succ = {b: tuple(sorted(ws)) for b, ws in enumerate(images)}
    exits = frozenset(int(b) for b in np.nonzero(leaves)[0])
    return BoxMap(grid, frozenset(range(grid.size)), succ, exits, grid.outer_face(), system)


def restrict(bmap, N: Iterable[int]) -> SubDigraph:
    """Digraph on ``N`` keeping only edges inside ``N``."""
    ns = frozenset(N) & bmap.vertices
    succ = {}
    leaving = set()
    exits = getattr(bmap, "exits", frozenset())
    for b in ns:
        ws = bmap.succ.get(b, ())
        inside = tuple(v for v in ws if v in ns)
        succ[b] = inside
        if len(inside) < len(ws) or b in exits:
            leaving.add(b)
    return SubDigraph(ns, succ, frozenset(leaving))


def inv_m(bmap, N: Iterable[int], m: int) -> frozenset:
    """Boxes admitting an orbit segment of length ``m`` each way inside ``N``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    ns = frozenset(N) & bmap.vertices
    fwd, bwd = set(ns), set(ns)
    for _ in range(m):
        fwd = {b for b in fwd if any(v in fwd for v in bmap.succ.get(b, ()))}
        bwd = {b for b in bwd if any(u in bwd for u in bmap.pred.get(b, ()))}
    return frozenset(fwd & bwd)


def inv(bmap, N: Iterable[int]) -> frozenset:
    """Maximal invariant subset of ``N``."""
    return graph.trim_invariant(bmap, frozenset(N) & bmap.vertices)


def interior(bmap, N: Iterable[int]) -> frozenset:
    ns = frozenset(N)
    if bmap.grid is None:
        return ns - bmap.boundary
    grid = bmap.grid
    return frozenset(b for b in ns
                     if b not in bmap.boundary and all(v in ns for v in grid.neighbors(b)))


def is_isolating_neighborhood(bmap, N: Iterable[int]) -> bool:
    ns = frozenset(N)
    return inv(bmap, ns) <= interior(bmap, ns)


def is_isolating_block(bmap, N: Iterable[int]) -> bool:
    ns = frozenset(N)
    inner = interior(bmap, ns)
    for b in ns:
        if b in inner:
            continue
        if any(u in ns for u in bmap.pred.get(b, ())) and any(v in ns for v in bmap.succ.get(b, ())):
            return False
    return True


def exit_set(bmap, N: Iterable[int]) -> frozenset:
    ns = frozenset(N)
    inner = interior(bmap, ns)
    return frozenset(b for b in ns
                     if b in bmap.exits or any(v not in inner for v in bmap.succ.get(b, ())))


def reachable_limit_classes(bmap, N: Iterable[int], b: int) -> list[frozenset]:
    """Cyclic strongly connected components of ``restrict(N)`` reachable from ``b``."""
    ns = frozenset(N)
    if b not in ns:
        raise ValueError(f"box {b} is not in N")
    sub = restrict(bmap, ns)
    seen = graph.reach(sub, [b])
    return [c for c in graph.cyclic_components(sub) if c <= seen]


def limit_class_table(g, within: Optional[Iterable[int]] = None):
    """All cyclic components plus, for every vertex, the indices of those it reaches.

    Computed once over the condensation, so it is linear in the graph size.
    """
    import networkx as nx

    verts = set(g.vertices if within is None else within)
    h = nx.DiGraph()
    h.add_nodes_from(verts)
    h.add_edges_from((u, v) for u in verts for v in g.succ.get(u, ()) if v in verts)
    classes = graph.cyclic_components(g, verts)
    where = {v: i for i, c in enumerate(classes) for v in c}
    cond = nx.condensation(h)
    mapping = cond.graph["mapping"]
    members = {n: cond.nodes[n]["members"] for n in cond.nodes}
    reach_of: dict[int, frozenset] = {}
    for n in reversed(list(nx.topological_sort(cond))):
        own = set()
        v0 = next(iter(members[n]))
        if v0 in where:
            own.add(where[v0])
        for s in cond.successors(n):
            own |= reach_of[s]
        reach_of[n] = frozenset(own)
    table = {v: reach_of[mapping[v]] for v in verts}
    return classes, table
