"""Morse decompositions on box digraphs and Morse set filtrations.

Morse sets are the cyclic strongly connected components. The order is the
flow order: ``p < q`` when some path runs from ``M_q`` down to ``M_p``.
Intervals and attracting intervals are sets of class indices.

Every function takes a "digraph" in the duck-typed sense of :mod:`conley.graph`
(a :class:`~conley.boxdyn.BoxMap`, a restriction, or a pointed quotient).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from . import graph
from .boxdyn import limit_class_table
from .errors import BudgetExceeded, DefectiveFiltration, NotAnInterval, NotAttracting, \
    NotAttractingInterval
from .filtration import validate_filtration_pair
from .graph import BASEPOINT

DEFAULT_INTERVAL_BUDGET = 4096


def recurrent_classes(pd) -> list[frozenset]:
    """Cyclic strongly connected components, sorted by smallest vertex."""
    return graph.cyclic_components(pd)


@dataclass(frozen=True)
class MorsePoset:
    """Classes ``M_p`` indexed ``0..len-1`` with the strict order ``less``.

    ``(p, q) in less`` means ``p < q``: orbits may flow from ``M_q`` to ``M_p``.
    ``basepoint`` is the index of the class ``{*}`` when there is one.
    """

    classes: tuple[frozenset, ...]
    less: frozenset
    basepoint: Optional[int] = None

    def __len__(self):
        return len(self.classes)

    @property
    def elements(self) -> range:
        return range(len(self.classes))

    def lt(self, p: int, q: int) -> bool:
        return (p, q) in self.less

    def below(self, p: int) -> frozenset:
        return frozenset(r for r in self.elements if (r, p) in self.less)

    def down_closure(self, S: Iterable[int]) -> frozenset:
        S = frozenset(S)
        return S | frozenset(r for (r, q) in self.less if q in S)

    def maximal(self, S: Iterable[int]) -> frozenset:
        S = frozenset(S)
        return frozenset(p for p in S if not any((p, q) in self.less for q in S))

    def is_interval(self, I: Iterable[int]) -> bool:
        I = frozenset(I)
        for p in I:
            for r in I:
                if (p, r) in self.less:
                    for q in self.elements:
                        if q not in I and (p, q) in self.less and (q, r) in self.less:
                            return False
        return True

    def is_attracting(self, I: Iterable[int]) -> bool:
        I = frozenset(I)
        return all(r in I for (r, q) in self.less if q in I)

    def covering_relations(self) -> list[tuple[int, int]]:
        out = []
        for p, q in sorted(self.less):
            if not any((p, r) in self.less and (r, q) in self.less for r in self.elements):
                out.append((p, q))
        return out

    def linear_extension(self) -> list[int]:
        """Minimal elements first; ties broken by index (basepoint first)."""
        left = set(self.elements)
        order = []
        while left:
            ready = [p for p in left if not any((r, p) in self.less for r in left)]
            pick = min(ready, key=lambda p: (p != self.basepoint, p))
            order.append(pick)
            left.discard(pick)
        return order

    def check(self) -> None:
        for p, q in self.less:
            if p == q or (q, p) in self.less:
                raise ValueError(f"relation is not a strict order at ({p}, {q})")
            for r in self.elements:
                if (q, r) in self.less and (p, r) not in self.less:
                    raise ValueError(f"relation is not transitive at ({p}, {q}, {r})")

    def to_json(self) -> dict:
        return {
            "classes": [sorted(c) for c in self.classes],
            "less": [list(e) for e in sorted(self.less)],
            "basepoint": self.basepoint,
        }


def morse_poset(pd, classes: Optional[list] = None) -> MorsePoset:
    if classes is None:
        classes = recurrent_classes(pd)
    classes = tuple(frozenset(c) for c in classes)
    where = {v: i for i, c in enumerate(classes) for v in c}
    less = set()
    for q, c in enumerate(classes):
        for v in graph.reach(pd, c, strict=True):
            p = where.get(v)
            if p is not None and p != q:
                less.add((p, q))
    base = next((i for i, c in enumerate(classes) if c == {BASEPOINT}), None)
    return MorsePoset(classes, frozenset(less), base)


def associated_decomposition(pd, poset: Optional[MorsePoset] = None) -> MorsePoset:
    """Poset with the basepoint class added as the unique minimum."""
    if poset is None:
        poset = morse_poset(pd)
    classes = list(poset.classes)
    base = poset.basepoint
    if base is None:
        if BASEPOINT not in pd.vertices:
            raise ValueError("associated decomposition needs a pointed digraph")
        classes = [frozenset({BASEPOINT})] + classes
        shift = {(p + 1, q + 1) for p, q in poset.less}
        base = 0
        less = shift
    else:
        less = set(poset.less)
    less |= {(base, p) for p in range(len(classes)) if p != base}
    out = MorsePoset(tuple(classes), frozenset(less), base)
    out.check()
    return out


@dataclass(frozen=True)
class IntervalFamily:
    poset: MorsePoset
    intervals: tuple[frozenset, ...]

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)


def attracting_intervals(poset: MorsePoset, budget: int = DEFAULT_INTERVAL_BUDGET,
                         elements: Optional[Iterable[int]] = None) -> IntervalFamily:
    """All down-sets of ``poset`` (restricted to ``elements`` if given)."""
    order = [p for p in poset.linear_extension() if elements is None or p in set(elements)]
    below = {p: poset.below(p) & set(order) for p in order}
    out: list[frozenset] = []

    def rec(i: int, chosen: frozenset):
        if i == len(order):
            out.append(chosen)
            if len(out) > budget:
                raise BudgetExceeded(f"more than {budget} attracting intervals")
            return
        p = order[i]
        rec(i + 1, chosen)
        if below[p] <= chosen:
            rec(i + 1, chosen | {p})

    rec(0, frozenset())
    out.sort(key=lambda s: (len(s), sorted(s)))
    return IntervalFamily(poset, tuple(out))


def morse_set_of_interval(pd, poset: MorsePoset, I: Iterable[int]) -> frozenset:
    I = frozenset(I)
    if not poset.is_interval(I):
        raise NotAnInterval(f"{sorted(I)} is not an interval")
    U = frozenset().union(*(poset.classes[p] for p in I)) if I else frozenset()
    if not U:
        return frozenset()
    return frozenset(graph.reach(pd, U) & graph.coreach(pd, U))


def connecting_orbits(pd, B: Iterable[int], C: Iterable[int]) -> frozenset:
    B, C = frozenset(B), frozenset(C)
    return frozenset((graph.reach(pd, B) & graph.coreach(pd, C)) - B - C)


def _leaves(pd, v) -> bool:
    return v in getattr(pd, "exits", ())


def is_attracting_neighborhood(pd, U: Iterable[int]) -> bool:
    U = frozenset(U)
    return all(not _leaves(pd, b) and all(v in U for v in pd.succ.get(b, ())) for b in U)


def attractor_from_neighborhood(pd, U: Iterable[int]) -> frozenset:
    U = frozenset(U)
    if not is_attracting_neighborhood(pd, U):
        raise NotAttracting("U is not forward invariant")
    alive = set(U)
    indeg = {v: 0 for v in alive}
    for u in alive:
        for v in pd.succ.get(u, ()):
            if v in alive:
                indeg[v] += 1
    work = [v for v in sorted(alive) if indeg[v] == 0]
    while work:
        v = work.pop()
        alive.discard(v)
        for w in pd.succ.get(v, ()):
            if w in alive:
                indeg[w] -= 1
                if indeg[w] == 0:
                    work.append(w)
    return frozenset(alive)


def dual_repeller(pd, X: Iterable[int], U: Iterable[int]) -> frozenset:
    return graph.trim_invariant(pd, frozenset(X) - frozenset(U))


def preimage_attracting(pd, V: Iterable[int]) -> frozenset:
    V = frozenset(V)
    if not is_attracting_neighborhood(pd, V):
        raise NotAttracting("V is not forward invariant")
    return frozenset(b for b in pd.vertices
                     if not _leaves(pd, b) and all(v in V for v in pd.succ.get(b, ())))


def limit_sets(pd, poset: MorsePoset) -> dict[int, frozenset]:
    """``R(b)`` for every vertex, as a set of poset indices."""
    classes, table = limit_class_table(pd)
    pos = {c: i for i, c in enumerate(poset.classes)}
    remap = []
    for c in classes:
        if c not in pos:
            raise ValueError("poset classes do not match the digraph's recurrent classes")
        remap.append(pos[c])
    return {v: frozenset(remap[i] for i in idx) for v, idx in table.items()}


def _with_base(poset: MorsePoset, I: Iterable[int]) -> frozenset:
    I = frozenset(I)
    return I | {poset.basepoint} if poset.basepoint is not None else I


def attracting_neighborhood_of_interval(pd, poset: MorsePoset, I: Iterable[int],
                                        R: Optional[dict] = None) -> frozenset:
    """``{b : R(b) ⊆ I}``, the basepoint class counted as part of every ``I``."""
    J = _with_base(poset, I)
    if not poset.is_attracting(J):
        raise NotAttractingInterval(f"{sorted(I)} is not an attracting interval")
    if R is None:
        R = limit_sets(pd, poset)
    return frozenset(b for b, r in R.items() if r <= J)


@dataclass
class MorseFiltration:
    """``N(I)`` for a family of attracting intervals.

    Intervals exclude the basepoint class; ``N`` includes ``L`` when built on
    a pointed quotient, so the pairs live in the original map.
    """

    mode: str
    poset: MorsePoset
    sets: dict  # frozenset interval -> frozenset of boxes
    defects: list = field(default_factory=list)

    @property
    def intervals(self) -> list[frozenset]:
        return sorted(self.sets, key=lambda s: (len(s), sorted(s)))

    @property
    def bottom(self) -> frozenset:
        return self.sets[frozenset()]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "filtration": [{"interval": sorted(I), "boxes": sorted(self.sets[I])}
                           for I in self.intervals],
            "defects": self.defects,
        }


def filtration_set(pd, poset: MorsePoset, I: Iterable[int], R: Optional[dict] = None) -> frozenset:
    """``N(I)``: boxes whose limit classes all lie in ``I`` (plus the basepoint
    class), pulled back through the quotient so ``L`` is included."""
    J = _with_base(poset, I)
    if R is None:
        R = limit_sets(pd, poset)
    pair = getattr(pd, "pair", None)
    L = pair.L if pair is not None else frozenset()
    return frozenset(b for b, r in R.items() if r <= J and b != BASEPOINT) | L


def defect_witness(poset, r: frozenset) -> Optional[tuple[frozenset, frozenset]]:
    """Attracting intervals ``I, J`` splitting the limit set ``r``, if it has
    two or more maximal classes; such a box breaks the union identity."""
    core = r - ({poset.basepoint} if poset.basepoint is not None else set())
    maxima = sorted(poset.maximal(core))
    if len(maxima) < 2:
        return None
    I = poset.down_closure(maxima[1:]) - {poset.basepoint}
    J = poset.down_closure(maxima[:1]) - {poset.basepoint}
    return I, J


def morse_filtration(pd, poset: Optional[MorsePoset] = None, mode: str = "chain",
                     budget: int = DEFAULT_INTERVAL_BUDGET, strict: bool = False) -> MorseFiltration:
    """Morse set filtration; ``chain`` mode follows a linear extension,
    ``poset`` mode covers every attracting interval and reports union defects.
    """
    if mode not in ("chain", "poset"):
        raise ValueError(f"unknown mode {mode!r}")
    if poset is None:
        poset = morse_poset(pd)
        if BASEPOINT in pd.vertices:
            poset = associated_decomposition(pd, poset)
    R = limit_sets(pd, poset)
    base = poset.basepoint
    elements = [p for p in poset.linear_extension() if p != base]
    if mode == "chain":
        family = [frozenset(elements[:k]) for k in range(len(elements) + 1)]
    else:
        family = list(attracting_intervals(poset, budget, elements))

    sets = {I: filtration_set(pd, poset, I, R) for I in family}
    defects = []
    if mode == "poset":
        fam = set(family)
        by_sig: dict[frozenset, list[int]] = {}
        for b, r in R.items():
            if b != BASEPOINT:
                by_sig.setdefault(r, []).append(b)
        for r, boxes in sorted(by_sig.items(), key=lambda kv: min(kv[1])):
            hit = _union_violation(poset, r, family, fam)
            if hit is None:
                continue
            I, J = hit
            for b in sorted(boxes):
                defects.append({"box": b, "limit_classes": sorted(r),
                                "intervals": [sorted(I), sorted(J)]})
        defects.sort(key=lambda d: d["box"])
        if defects and strict:
            raise DefectiveFiltration(f"union identity fails at {len(defects)} boxes", defects)
    return MorseFiltration(mode, poset, sets, defects)


def _union_violation(poset, r, family, fam):
    """A pair ``I, J`` with ``R ⊆ I ∪ J`` but ``R ⊄ I`` and ``R ⊄ J``."""
    core = r - ({poset.basepoint} if poset.basepoint is not None else set())
    for I, J in combinations(family, 2):
        U = I | J
        if U in fam and core <= U and not core <= I and not core <= J:
            return I, J
    return None


def validate_morse_filtration(bmap, F: MorseFiltration, pd=None) -> dict:
    """Check the filtration axioms; returns a diagnostic report.

    ``pd`` is the digraph the Morse sets live in (defaults to ``bmap``).
    """
    if pd is None:
        pd = bmap
    poset = F.poset
    intervals = F.intervals
    failures = []
    pairs = []
    if frozenset() not in F.sets:
        return {"ok": False, "pairs": [], "nested": [], "lattice": [],
                "failures": [{"axiom": "bottom", "interval": []}]}
    bottom = F.sets[frozenset()]
    for I in intervals:
        M = morse_set_of_interval(pd, poset, I)
        v = validate_filtration_pair(bmap, F.sets[I], bottom, M - {BASEPOINT}) \
            if bottom <= F.sets[I] else None
        ok = v is not None and v.ok
        pairs.append({"interval": sorted(I), "valid": v.as_list() if v else [False, False, False]})
        if not ok:
            failures.append({"axiom": "filtration_pair", "interval": sorted(I)})
    nested = []
    for J in intervals:
        for I in intervals:
            if J < I:
                M = morse_set_of_interval(pd, poset, I - J)
                if F.sets[J] <= F.sets[I]:
                    v = validate_filtration_pair(bmap, F.sets[I], F.sets[J], M - {BASEPOINT})
                    vl = v.as_list()
                else:
                    vl = [False, False, False]
                nested.append({"interval": sorted(I), "sub": sorted(J), "valid": vl})
                if not all(vl):
                    failures.append({"axiom": "nested_pair", "interval": sorted(I), "sub": sorted(J)})
    lattice = []
    fam = set(intervals)
    for I, J in combinations(intervals, 2):
        meet, join = I & J, I | J
        row = {"intervals": [sorted(I), sorted(J)]}
        if meet in fam:
            row["intersection"] = F.sets[I] & F.sets[J] == F.sets[meet]
            if not row["intersection"]:
                failures.append({"axiom": "intersection", "intervals": [sorted(I), sorted(J)]})
        if join in fam:
            row["union"] = F.sets[I] | F.sets[J] == F.sets[join]
            if not row["union"]:
                failures.append({"axiom": "union", "intervals": [sorted(I), sorted(J)]})
        lattice.append(row)
    return {"ok": not failures, "pairs": pairs, "nested": nested, "lattice": lattice,
            "failures": failures}


def morse_graph_dot(poset: MorsePoset, labels: Optional[dict] = None) -> str:
    """Graphviz source: one node per class, edges along covering relations, high to low."""
    labels = labels or {}
    lines = ["digraph morse {", "  rankdir=TB;"]
    for p, c in enumerate(poset.classes):
        if p == poset.basepoint:
            text = "basepoint"
        else:
            text = f"M{p} ({len(c)} boxes)"
        extra = labels.get(p)
        if extra:
            text += "\\n" + extra
        lines.append(f'  n{p} [label="{text}"];')
    for p, q in poset.covering_relations():
        lines.append(f"  n{q} -> n{p};")
    lines.append("}")
    return "\n".join(lines) + "\n"
