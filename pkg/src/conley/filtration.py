"""Isolating blocks, filtration pairs and the pointed quotient dynamics.

A filtration pair is built in three steps: shrink an isolating neighbourhood
to an isolating block made of chains through the invariant set, collar its
exit set by forward saturation, then check the three pair conditions.

Chains are allowed to jump ``slack`` boxes past the computed images. With
slack 0 the chain neighbourhood of ``S`` in a grid is usually ``S`` itself,
which is never a block; growing the slack plays the part of a larger chain
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from . import graph
from .boxdyn import BoxMap, exit_set, interior, inv, is_isolating_block, \
    is_isolating_neighborhood, restrict
from .errors import DegeneratePair, DigraphOnly, GridMismatch, InvalidPair, \
    NotABlock, NotIsolating, RefineRequired
from .graph import BASEPOINT, Digraph, SubDigraph


@dataclass(frozen=True)
class PairValidity:
    isolating: bool
    exit_covered: bool
    saturated: bool

    @property
    def ok(self) -> bool:
        return self.isolating and self.exit_covered and self.saturated

    def as_list(self) -> list[bool]:
        return [self.isolating, self.exit_covered, self.saturated]

    def __iter__(self):
        return iter(self.as_list())


@dataclass(frozen=True, eq=False)
class FiltrationPair:
    N: frozenset
    L: frozenset
    map: BoxMap = field(repr=False)
    validity: PairValidity
    invariant_set: frozenset = frozenset()

    @property
    def difference(self) -> frozenset:
        return self.N - self.L

    def to_json(self) -> dict:
        return {"N": sorted(self.N), "L": sorted(self.L), "valid": self.validity.as_list()}


class Refine:
    """Signal that no block exists at this resolution; the caller should refine."""

    suggestion = "increase --depth"

    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"Refine({self.reason!r})"


@dataclass(frozen=True, eq=False)
class PointedDigraph(Digraph):
    """Quotient dynamics on ``(N \\ L) + {basepoint}``."""

    pair: Optional[FiltrationPair] = field(default=None, repr=False)
    basepoint: int = BASEPOINT

    def to_json(self) -> dict:
        out = super().to_json()
        out["basepoint"] = self.basepoint
        return out


def _slack_restrict(bmap, ns: frozenset, slack: int) -> SubDigraph:
    if slack == 0:
        return restrict(bmap, ns)
    grid = bmap.require_grid()
    succ = {}
    for b in ns:
        ws = bmap.succ.get(b, ())
        succ[b] = tuple(sorted(v for v in grid.dilate(ws, slack) if v in ns)) if ws else ()
    return SubDigraph(ns, succ)


def chain_neighborhood(bmap, N: Iterable[int], S: Iterable[int], slack: int = 0) -> frozenset:
    """``S`` together with every box on a path from ``S`` back to ``S`` inside ``N``."""
    ns = frozenset(N)
    ss = frozenset(S) & ns
    if not ss:
        return frozenset()
    sub = _slack_restrict(bmap, ns, slack)
    return frozenset(ss | (graph.reach(sub, ss) & graph.coreach(sub, ss)))


def _default_max_slack(bmap) -> int:
    return max(bmap.grid.subdivisions) if bmap.grid is not None else 0


def block_candidates(bmap, N: Iterable[int], max_slack: Optional[int] = None) -> Iterator[frozenset]:
    """Distinct isolating blocks inside ``N`` with the same invariant set, smallest first.

    Chain neighbourhoods for growing slack, then ``N`` itself if it is a block.
    """
    ns = frozenset(N)
    S = inv(bmap, ns)
    if not S:
        yield frozenset()
        return
    if max_slack is None:
        max_slack = _default_max_slack(bmap)
    seen = set()
    for slack in range(max_slack + 1):
        B = chain_neighborhood(bmap, ns, S, slack)
        if B in seen:
            continue
        seen.add(B)
        if is_isolating_block(bmap, B) and inv(bmap, B) == S:
            yield B
        if B == ns:
            return
    if ns not in seen and is_isolating_block(bmap, ns):
        yield ns


def isolating_block_in(bmap, N: Iterable[int], max_slack: Optional[int] = None):
    """Smallest isolating block found inside the isolating neighbourhood ``N``.

    Returns a :class:`Refine` signal when none of the candidates is a block.
    """
    ns = frozenset(N)
    if not is_isolating_neighborhood(bmap, ns):
        raise NotIsolating("N is not an isolating neighborhood")
    for B in block_candidates(bmap, ns, max_slack):
        return B
    return Refine("no isolating block found at this resolution")


def grow_exit_collar(bmap, N: Iterable[int], extra_layers: int = 0) -> frozenset:
    """Forward-saturated collar ``L`` of the exit set of the block ``N``.

    ``extra_layers`` first thickens the exit set by that many layers of grid
    neighbours inside ``N``, which makes ``L`` a genuine neighbourhood of it.
    """
    ns = frozenset(N)
    if not is_isolating_block(bmap, ns):
        raise NotABlock("N is not an isolating block")
    L = set(exit_set(bmap, ns))
    if extra_layers:
        if bmap.grid is None:
            raise DigraphOnly("collar thickening needs box geometry")
        L = set(bmap.grid.dilate(L, extra_layers) & ns)
    frontier = set(L)
    while frontier:
        new = {v for b in frontier for v in bmap.succ.get(b, ()) if v in ns} - L
        L |= new
        frontier = new
    overlap = frozenset(L) & inv(bmap, ns)
    if overlap:
        raise DegeneratePair(f"exit collar meets the invariant set in {len(overlap)} boxes", overlap)
    return frozenset(L)


def validate_filtration_pair(bmap, N: Iterable[int], L: Iterable[int],
                             invariant_set: Optional[Iterable[int]] = None) -> PairValidity:
    """Check the three pair conditions.

    ``invariant_set`` is the set the pair is meant to isolate; it defaults to
    ``inv(N)``. Nested pairs of a Morse filtration pass their Morse set here.
    """
    ns, ls = frozenset(N), frozenset(L)
    if not ls <= ns:
        raise ValueError("L must be a subset of N")
    S = inv(bmap, ns) if invariant_set is None else frozenset(invariant_set)
    diff = ns - ls
    isolating = is_isolating_neighborhood(bmap, diff) and inv(bmap, diff) == S
    exit_covered = exit_set(bmap, ns) <= ls
    saturated = not (bmap.image(ls) & diff)
    return PairValidity(isolating, exit_covered, saturated)


def make_pair(bmap, N: Iterable[int], L: Iterable[int],
              invariant_set: Optional[Iterable[int]] = None) -> FiltrationPair:
    ns, ls = frozenset(N), frozenset(L)
    validity = validate_filtration_pair(bmap, ns, ls, invariant_set)
    S = inv(bmap, ns - ls)
    return FiltrationPair(ns, ls, bmap, validity, S)


def pointed_map(bmap, P: FiltrationPair) -> PointedDigraph:
    if not P.validity.ok:
        raise InvalidPair(f"pair fails conditions {P.validity.as_list()}")
    diff = P.difference
    succ: dict[int, tuple[int, ...]] = {}
    for b in sorted(diff):
        ws = bmap.succ.get(b, ())
        inside = [v for v in ws if v in diff]
        if b in bmap.exits or len(inside) < len(ws):
            inside.append(BASEPOINT)
        succ[b] = tuple(sorted(inside))
    succ[BASEPOINT] = (BASEPOINT,)
    return PointedDigraph(frozenset(diff | {BASEPOINT}), succ, P)


@dataclass(frozen=True)
class RobustnessReport:
    validity: PairValidity
    invariant_changed: bool

    def to_json(self) -> dict:
        return {"valid": self.validity.as_list(), "invariant_changed": self.invariant_changed}


def robustness_check(map2, P: FiltrationPair) -> RobustnessReport:
    """Re-validate the pair ``P`` against another map on the same grid."""
    if map2.grid != P.map.grid or (map2.grid is None and map2.vertices != P.map.vertices):
        raise GridMismatch("maps live on different grids")
    validity = validate_filtration_pair(map2, P.N, P.L)
    changed = inv(map2, P.difference) != inv(P.map, P.difference)
    return RobustnessReport(validity, changed)


def find_filtration_pair(bmap, N: Optional[Iterable[int]] = None, extra_layers: int = 0,
                         max_slack: Optional[int] = None) -> FiltrationPair:
    """Block, collar and validation in one go, trying blocks from small to large.

    Raises :class:`RefineRequired` (or its subclass :class:`DegeneratePair`)
    when no candidate block yields a valid pair.
    """
    ns = frozenset(bmap.vertices if N is None else N)
    if not is_isolating_neighborhood(bmap, ns):
        raise NotIsolating("N is not an isolating neighborhood")
    S = inv(bmap, ns)
    degenerate = None
    for B in block_candidates(bmap, ns, max_slack):
        try:
            L = grow_exit_collar(bmap, B, extra_layers)
        except DegeneratePair as exc:
            degenerate = exc
            continue
        validity = validate_filtration_pair(bmap, B, L, S)
        if validity.ok:
            return FiltrationPair(B, L, bmap, validity, S)
    if degenerate is not None:
        raise degenerate
    raise RefineRequired("no isolating block at this resolution yields a filtration pair")


__all__ = [
    "PairValidity", "FiltrationPair", "PointedDigraph", "Refine", "RobustnessReport",
    "chain_neighborhood", "block_candidates", "isolating_block_in", "grow_exit_collar",
    "validate_filtration_pair", "make_pair", "pointed_map", "robustness_check",
    "find_filtration_pair", "interior",
]
