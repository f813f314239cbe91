"""Integer homology of cubical pairs, with explicit generators.

For each degree k we take the Smith form of ``d_k`` to get a basis of the
cycles (the trailing columns of ``V``), rewrite ``d_{k+1}`` in that basis and
take its Smith form again. The second change of basis splits the cycle
lattice into torsion and free generators and gives coordinates of any cycle
on the free part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .cubical import Chain, CubicalComplex, boundary_matrices, relative_complex
from .snf import matmul, snf


@dataclass
class HomologyDim:
    dim: int
    betti: int
    torsion: list[int]
    generators: list[Chain] = field(repr=False)
    torsion_generators: list[Chain] = field(repr=False)
    # basis bookkeeping
    _d: np.ndarray = field(repr=False, default=None)
    _v_inv: np.ndarray = field(repr=False, default=None)
    _rank: int = 0
    _u2: np.ndarray = field(repr=False, default=None)
    _split: int = 0

    def coordinates(self, vec: np.ndarray) -> list[int]:
        """Coordinates of the class of the cycle ``vec`` on the free generators."""
        vec = np.asarray(vec, dtype=object)
        if self._d.shape[0] and any(x != 0 for x in matmul(self._d, vec.reshape(-1, 1)).ravel()):
            raise ValueError(f"chain is not a cycle in degree {self.dim}")
        y = matmul(self._v_inv, vec.reshape(-1, 1))[self._rank:]
        y2 = matmul(self._u2, y).ravel()
        return [int(x) for x in y2[self._split:]]

    def to_json(self) -> dict:
        return {"dim": self.dim, "betti": self.betti, "torsion": list(self.torsion)}


@dataclass
class HomologyGroups:
    complex: CubicalComplex = field(repr=False)
    dims: list[HomologyDim]

    def betti(self, k: int) -> int:
        return self.dims[k].betti if 0 <= k < len(self.dims) else 0

    def torsion(self, k: int) -> list[int]:
        return self.dims[k].torsion if 0 <= k < len(self.dims) else []

    @property
    def betti_numbers(self) -> list[int]:
        return [h.betti for h in self.dims]

    def to_json(self) -> list[dict]:
        return [h.to_json() for h in self.dims]


def homology_of_complex(C: CubicalComplex) -> HomologyGroups:
    mats = boundary_matrices(C)
    top = C.dimension
    dims = []
    for k in range(top + 1):
        dk = mats[k]
        nk = C.count(k)
        dk1 = mats[k + 1] if k < top else np.zeros((nk, 0), dtype=object)
        s1 = snf(dk)
        r = s1.rank
        W = s1.V[:, r:]
        M = matmul(s1.V_inv, dk1)[r:, :]
        s2 = snf(M)
        diag = s2.diagonal
        split = len(diag)
        G = matmul(W, s2.U_inv)
        gens = [C.chain(G[:, i], k) for i in range(split, G.shape[1])]
        tors_idx = [i for i, d in enumerate(diag) if d > 1]
        dims.append(HomologyDim(
            dim=k,
            betti=G.shape[1] - split,
            torsion=[diag[i] for i in tors_idx],
            generators=gens,
            torsion_generators=[C.chain(G[:, i], k) for i in tors_idx],
            _d=dk, _v_inv=s1.V_inv, _rank=r, _u2=s2.U, _split=split,
        ))
    return HomologyGroups(C, dims)


def relative_homology(space, N: Iterable[int], L: Iterable[int] = ()) -> HomologyGroups:
    """Homology of the cubical pair ``(|N|, |L|)``; ``space`` is a grid or grid map."""
    ns, ls = frozenset(N), frozenset(L)
    if not ls <= ns:
        raise ValueError("L must be a subset of N")
    return homology_of_complex(relative_complex(space, ns, ls))
