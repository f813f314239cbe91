"""Elementary cubes and cubical chain complexes of box sets.

A cell is a tuple of doubled grid coordinates: an even entry ``2k`` is the
grid point ``k`` on that axis, an odd entry ``2k + 1`` is the interval
spanned by box index ``k``. Box ``(i, j)`` is the cell ``(2i + 1, 2j + 1)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ..boxdyn import BoxGrid, BoxMap
from ..errors import DigraphOnly

Cell = tuple[int, ...]
Chain = dict  # Cell -> int, zero coefficients omitted


def cell_dim(c: Cell) -> int:
    return sum(x & 1 for x in c)


def box_cell(grid: BoxGrid, b: int) -> Cell:
    return tuple(2 * i + 1 for i in grid.coords(b))


def faces_closure(c: Cell) -> Iterable[Cell]:
    """The cell and all its faces."""
    opts = [(x - 1, x, x + 1) if x & 1 else (x,) for x in c]
    return itertools.product(*opts)


def boundary(c: Cell) -> Chain:
    """Cubical boundary; the sign of the pair of faces on axis ``j`` is
    ``(-1)^k`` with ``k`` the number of nondegenerate axes before ``j``."""
    out: Chain = {}
    k = 0
    for j, x in enumerate(c):
        if not x & 1:
            continue
        s = -1 if k & 1 else 1
        hi = c[:j] + (x + 1,) + c[j + 1:]
        lo = c[:j] + (x - 1,) + c[j + 1:]
        out[hi] = out.get(hi, 0) + s
        out[lo] = out.get(lo, 0) - s
        k += 1
    return out


def chain_boundary(ch: Chain) -> Chain:
    out: Chain = {}
    for c, a in ch.items():
        for f, s in boundary(c).items():
            out[f] = out.get(f, 0) + a * s
    return {f: v for f, v in out.items() if v}


def chain_add(a: Chain, b: Chain, scale: int = 1) -> Chain:
    out = dict(a)
    for c, v in b.items():
        out[c] = out.get(c, 0) + scale * v
    return {c: v for c, v in out.items() if v}


def boxes_containing_cell(grid: BoxGrid, c: Cell) -> list[int]:
    axes = []
    for x, n in zip(c, grid.subdivisions):
        if x & 1:
            axes.append(((x - 1) // 2,))
        else:
            axes.append(tuple(k for k in (x // 2 - 1, x // 2) if 0 <= k < n))
    return [grid.box_id(idx) for idx in itertools.product(*axes)]


def _grid_of(space) -> BoxGrid:
    if isinstance(space, BoxGrid):
        return space
    if isinstance(space, BoxMap):
        if space.grid is None:
            raise DigraphOnly("cubical complexes need box geometry")
        return space.grid
    raise TypeError(f"expected a BoxGrid or BoxMap, got {type(space).__name__}")


def closure_cells(grid: BoxGrid, boxes: Iterable[int]) -> set[Cell]:
    out: set[Cell] = set()
    for b in boxes:
        out.update(faces_closure(box_cell(grid, b)))
    return out


@dataclass
class CubicalComplex:
    """Cells of a (relative) cubical complex, sorted and indexed per dimension.

    For a relative complex ``cells`` holds the cells of ``N`` outside the
    closure of ``L``; ``boundary_matrices`` then drops faces lying in ``L``.
    """

    grid: BoxGrid
    dimension: int
    cells: list[list[Cell]]
    index: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self.index = [{c: i for i, c in enumerate(cs)} for cs in self.cells]

    def count(self, k: int) -> int:
        return len(self.cells[k]) if 0 <= k <= self.dimension else 0

    def vector(self, ch: Chain, k: int, strict: bool = True) -> np.ndarray:
        """Coefficient column of a k-chain; cells outside the complex are dropped
        unless ``strict``."""
        v = np.zeros(self.count(k), dtype=object)
        idx = self.index[k]
        for c, a in ch.items():
            i = idx.get(c)
            if i is None:
                if strict:
                    raise KeyError(f"cell {c} not in complex")
                continue
            v[i] += a
        return v

    def chain(self, vec, k: int) -> Chain:
        return {self.cells[k][i]: int(a) for i, a in enumerate(vec) if a != 0}


def relative_complex(space, N: Iterable[int], L: Iterable[int] = ()) -> CubicalComplex:
    grid = _grid_of(space)
    cells = closure_cells(grid, N) - closure_cells(grid, L)
    by_dim: list[list[Cell]] = [[] for _ in range(grid.dimension + 1)]
    for c in cells:
        by_dim[cell_dim(c)].append(c)
    for cs in by_dim:
        cs.sort()
    return CubicalComplex(grid, grid.dimension, by_dim)


def cubical_complex(space, N: Iterable[int]) -> CubicalComplex:
    """All faces of all boxes of ``N``."""
    return relative_complex(space, N, ())


def boundary_matrices(C: CubicalComplex) -> list[np.ndarray]:
    """``[d_0, d_1, ..., d_dim]`` where ``d_k`` maps k-chains to (k-1)-chains.

    ``d_0`` is the empty ``0 x n_0`` map. Faces missing from the complex
    (relative case) are dropped.
    """
    mats = [np.zeros((0, C.count(0)), dtype=object)]
    for k in range(1, C.dimension + 1):
        m = np.zeros((C.count(k - 1), C.count(k)), dtype=object)
        rows = C.index[k - 1]
        for j, c in enumerate(C.cells[k]):
            for f, s in boundary(c).items():
                i = rows.get(f)
                if i is not None:
                    m[i, j] += s
        mats.append(m)
    return mats
