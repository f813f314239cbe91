"""Index maps: the map induced by a box map on the homology of a pair.

The chain map is built with acyclic carriers. The carrier of a cell is the
intersection of the images of all boxes of ``N`` containing it; for maps
whose box images are rectangles this is again a rectangle, and carriers grow
as cells shrink. Vertices go to a vertex of their carrier; a k-cell goes to
the cone of the already chosen image of its boundary, taken inside its
carrier with the standard contraction of a product of intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import sympy

from ..boxdyn import BoxGrid
from ..errors import CarrierNotAcyclic, InvalidPair, NonrectangularImage
from .cubical import (Cell, Chain, boundary, boxes_containing_cell, cell_dim,
                      chain_add, chain_boundary, closure_cells, relative_complex)
from .relative import HomologyGroups, homology_of_complex
from .snf import int_matrix

Rect = tuple[tuple[int, int], ...]  # per-axis inclusive box index range


def image_rectangle(bmap, b: int) -> Optional[Rect]:
    """Index rectangle spanned by ``F(b)``; ``None`` when the image is empty."""
    grid = bmap.grid
    ws = bmap.succ.get(b, ())
    if not ws:
        return None
    idx = grid.multi_index(list(ws))
    lo, hi = idx.min(axis=0), idx.max(axis=0)
    if int(np.prod(hi - lo + 1)) != len(ws):
        raise NonrectangularImage(f"image of box {b} is not a rectangular block of boxes")
    return tuple((int(a), int(z)) for a, z in zip(lo, hi))


class ChainSelector:
    """Chain map on the cells of ``|K|`` induced by ``bmap`` through carriers in ``N``."""

    def __init__(self, bmap, N: Iterable[int]):
        self.map = bmap
        self.grid: BoxGrid = bmap.require_grid()
        self.N = frozenset(N)
        self._rects: dict[int, Optional[Rect]] = {}
        self._phi: dict[Cell, Chain] = {}

    def _rect(self, b):
        if b not in self._rects:
            self._rects[b] = image_rectangle(self.map, b)
        return self._rects[b]

    def carrier(self, c: Cell) -> Rect:
        boxes = [b for b in boxes_containing_cell(self.grid, c) if b in self.N]
        if not boxes:
            raise CarrierNotAcyclic(f"cell {c} lies in no box of N")
        lo = [-1] * self.grid.dimension
        hi = [10 ** 18] * self.grid.dimension
        for b in boxes:
            r = self._rect(b)
            if r is None:
                raise CarrierNotAcyclic(f"box {b} has empty image; carrier of {c} is empty")
            for j, (a, z) in enumerate(r):
                lo[j] = max(lo[j], a)
                hi[j] = min(hi[j], z)
        if any(a > z for a, z in zip(lo, hi)):
            raise CarrierNotAcyclic(f"carrier of cell {c} is empty")
        return tuple(zip(lo, hi))

    @staticmethod
    def _contract(c: Cell, rect: Rect) -> Chain:
        """Chain homotopy of the contraction of a rectangle to its lower corner."""
        if not c:
            return {}
        x, rest = c[0], c[1:]
        if x & 1:
            return {}
        lo = 2 * rect[0][0]
        out: Chain = {(e,) + rest: 1 for e in range(lo + 1, x, 2)}
        for r, v in ChainSelector._contract(rest, rect[1:]).items():
            out[(lo,) + r] = out.get((lo,) + r, 0) + v
        return out

    def phi(self, c: Cell) -> Chain:
        got = self._phi.get(c)
        if got is not None:
            return got
        rect = self.carrier(c)
        if cell_dim(c) == 0:
            # carrier vertex nearest the carrier centre, ties to the lower one
            v = []
            for a, z in rect:
                mid = a + z + 1
                v.append(mid if mid % 2 == 0 else mid - 1)
            out = {tuple(v): 1}
        else:
            bd: Chain = {}
            for f, s in boundary(c).items():
                bd = chain_add(bd, self.phi(f), s)
            out = {}
            for f, s in bd.items():
                out = chain_add(out, self._contract(f, rect), s)
        self._phi[c] = out
        return out

    def phi_chain(self, ch: Chain) -> Chain:
        out: Chain = {}
        for c, a in ch.items():
            out = chain_add(out, self.phi(c), a)
        return out

    def check_chain_map(self, cells: Iterable[Cell]) -> None:
        for c in cells:
            lhs = chain_boundary(self.phi(c))
            rhs = self.phi_chain(boundary(c))
            if lhs != rhs:
                raise CarrierNotAcyclic(f"selector is not a chain map at cell {c}")


@dataclass
class IndexMap:
    """Per-degree matrices of the induced map on the free part of ``H(N, L)``."""

    matrices: list[np.ndarray]
    homology: HomologyGroups = field(repr=False)

    def matrix(self, k: int) -> np.ndarray:
        if 0 <= k < len(self.matrices):
            return self.matrices[k]
        return np.zeros((0, 0), dtype=object)

    def cohomology(self) -> list[np.ndarray]:
        """Cohomological index on free coefficients: the transposes."""
        return [m.T.copy() for m in self.matrices]

    def to_json(self) -> list[dict]:
        return [{"dim": k, "rows": m.shape[0], "cols": m.shape[1],
                 "entries": [[int(x) for x in row] for row in m]}
                for k, m in enumerate(self.matrices)]


def _solve_unimodular(J: np.ndarray, Phi: np.ndarray) -> np.ndarray:
    if J.shape[0] == 0:
        return np.zeros((0, Phi.shape[1]), dtype=object)
    Jm = sympy.Matrix(J.tolist())
    if Jm.det() == 0:
        raise CarrierNotAcyclic("inclusion of pairs is not an isomorphism on homology")
    X = Jm.inv() * sympy.Matrix(Phi.tolist())
    if any(not x.is_integer for x in X):
        raise CarrierNotAcyclic("inclusion of pairs is not invertible over the integers")
    return int_matrix([[int(x) for x in X.row(i)] for i in range(X.rows)], X.rows, X.cols)


def induced_map(bmap, N: Iterable[int], L: Iterable[int] = (), check: bool = True) -> IndexMap:
    """Map induced on ``H(N, L)`` without checking the pair conditions.

    The image lands in ``(N + F(L), L + F(L))``; the result is pulled back to
    ``H(N, L)`` through the inclusion, which is an isomorphism whenever
    ``F(L)`` misses ``N \\ L``.
    """
    grid = bmap.require_grid()
    ns, ls = frozenset(N), frozenset(L)
    source = relative_complex(grid, ns, ls)
    H = homology_of_complex(source)
    FL = bmap.image(ls)
    T, T0 = ns | FL, ls | FL
    target = relative_complex(grid, T, T0)
    same = target.cells == source.cells
    HT = H if same else homology_of_complex(target)
    K = closure_cells(grid, ns - ls)
    sel = ChainSelector(bmap, ns)
    if check:
        sel.check_chain_map(sorted(K))
    mats = []
    for k, hk in enumerate(H.dims):
        htk = HT.dims[k]
        cols = []
        for g in hk.generators:
            img = sel.phi_chain(g)
            cols.append(htk.coordinates(target.vector(img, k, strict=False)))
        Phi = int_matrix(np.array(cols, dtype=object).T if cols else [], htk.betti, hk.betti)
        if same:
            mats.append(Phi)
            continue
        jcols = [htk.coordinates(target.vector(g, k, strict=False)) for g in hk.generators]
        J = int_matrix(np.array(jcols, dtype=object).T if jcols else [], htk.betti, hk.betti)
        if J.shape[0] != J.shape[1]:
            raise CarrierNotAcyclic("target pair has different homology rank")
        mats.append(_solve_unimodular(J, Phi))
    return IndexMap(mats, H)


def index_map(bmap, P, check: bool = True) -> IndexMap:
    """Index map of a validated filtration pair."""
    if not P.validity.ok:
        raise InvalidPair(f"pair fails conditions {P.validity.as_list()}")
    return induced_map(bmap, P.N, P.L, check=check)
