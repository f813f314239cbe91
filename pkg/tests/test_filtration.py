import random

import pytest
from hypothesis import given, settings, strategies as st

from conley.boxdyn import BoxGrid, BoxMap, build_boxmap, inv, is_isolating_block, \
    is_isolating_neighborhood
from conley.errors import DegeneratePair, GridMismatch, InvalidPair, NotABlock, NotIsolating
from conley.filtration import (Refine, chain_neighborhood, find_filtration_pair,
                               grow_exit_collar, isolating_block_in, make_pair, pointed_map,
                               robustness_check, validate_filtration_pair)
from conley.graph import BASEPOINT, reach

from conftest import contraction, digraph, five_box, random_digraph


def test_chain_neighborhood_examples(G1):
    cyc = digraph([(0, 1), (1, 2), (2, 0)])
    assert chain_neighborhood(cyc, {0, 1, 2}, {0}) == {0, 1, 2}
    assert chain_neighborhood(G1, G1.vertices, {0, 4}) == {0, 4}
    assert chain_neighborhood(G1, G1.vertices, set()) == set()


def test_isolating_block_examples(G1):
    bm = five_box()
    B = isolating_block_in(bm, {1, 2, 3})
    # with slack 0 the chain neighbourhood {b2} touches the outside; one
    # layer of slack gives the whole neighbourhood, which is a block
    assert B == {1, 2, 3}
    assert is_isolating_block(bm, B)

    flagged = digraph([(0, 0), (1, 0), (2, 1), (2, 3), (3, 4), (4, 4)], boundary=[2])
    r = isolating_block_in(flagged, flagged.vertices)
    assert isinstance(r, Refine) or (r >= inv(flagged, flagged.vertices) and
                                     is_isolating_block(flagged, r))

    empty = digraph([(0, 1)])
    assert isolating_block_in(empty, {0, 1}) == frozenset()


def test_block_in_requires_isolation():
    with pytest.raises(NotIsolating):
        isolating_block_in(five_box([(1, 1)]), {1, 2, 3})


def test_refine_is_falsy():
    r = Refine("x")
    assert not r
    assert "depth" in r.suggestion


def test_exit_collar_examples(G3):
    assert grow_exit_collar(G3, {0, 1, 2}) == {1}
    # x -> w closes the cycle w <-> x, so the saturated collar {x, w} is
    # invariant: the collar is computed but reported as degenerate
    G3b = digraph([(2, 2), (0, 1), (1, 0)], exits=[1])
    with pytest.raises(DegeneratePair) as err:
        grow_exit_collar(G3b, {0, 1, 2})
    assert err.value.overlap == [0, 1]
    attracting = digraph([(0, 0), (1, 0)])
    assert grow_exit_collar(attracting, {0, 1}) == set()


def test_exit_collar_errors():
    with pytest.raises(NotABlock):
        grow_exit_collar(five_box([(1, 1)]), {1, 2, 3})
    # the exit box feeds the loop, so saturation swallows it
    g = digraph([(0, 0), (1, 0)], exits=[1])
    with pytest.raises(DegeneratePair):
        grow_exit_collar(g, {0, 1})


def test_validate_examples(G3):
    assert validate_filtration_pair(G3, {0, 1, 2}, {1}).as_list() == [True, True, True]
    v = validate_filtration_pair(G3, {0, 1, 2}, set())
    assert v.exit_covered is False
    v = validate_filtration_pair(G3, {0, 1, 2}, {0, 1, 2})
    assert v.isolating is False


def test_pointed_map_examples(G3):
    P = make_pair(G3, {0, 1, 2}, {1})
    pd = pointed_map(G3, P)
    assert pd.vertices == {0, 2, BASEPOINT}
    assert pd.edges() == [(BASEPOINT, BASEPOINT), (0, BASEPOINT), (2, 2)]
    assert pd.to_json()["basepoint"] == BASEPOINT

    att = digraph([(0, 0), (1, 0)])
    pd = pointed_map(att, make_pair(att, {0, 1}, set()))
    assert pd.edges() == [(BASEPOINT, BASEPOINT), (0, 0), (1, 0)]

    g = digraph([(0, 1)], exits=[1])
    P = make_pair(g, {0, 1}, {0, 1})
    assert P.validity.ok
    assert pointed_map(g, P).edges() == [(BASEPOINT, BASEPOINT)]

    with pytest.raises(InvalidPair):
        pointed_map(G3, make_pair(G3, {0, 1, 2}, set()))


def test_robustness_examples():
    depth, pad = 4, 0.05
    bm = build_boxmap(contraction(depth, pad))
    P = find_filtration_pair(bm)
    pert = build_boxmap(contraction(depth, pad).perturbed(0.01))
    r = robustness_check(pert, P)
    assert r.validity.ok
    same = robustness_check(bm, P)
    assert same.validity.ok and not same.invariant_changed

    G3 = digraph([(2, 2), (0, 1)], vertices=[0, 1, 2], exits=[1])
    P = make_pair(G3, {0, 1, 2}, {1})
    G3back = digraph([(2, 2), (0, 1), (1, 2)], vertices=[0, 1, 2], exits=[1])
    assert robustness_check(G3back, P).validity.saturated is False

    with pytest.raises(GridMismatch):
        robustness_check(build_boxmap(contraction(5, pad)), find_filtration_pair(bm))


def test_quotient_omega_and_soundness():
    rng = random.Random(11)
    checked = 0
    while checked < 40:
        g = random_digraph(rng, 10, 0.25)
        g = BoxMap.from_edges(g.vertices, g.edges(), exits=[v for v in g.vertices
                                                             if rng.random() < 0.2])
        N = g.vertices
        if not is_isolating_neighborhood(g, N):
            continue
        try:
            P = find_filtration_pair(g, N)
        except DegeneratePair:
            continue
        except Exception as exc:
            assert type(exc).__name__ == "RefineRequired"
            continue
        checked += 1
        pd = pointed_map(g, P)
        diff = P.difference
        # every vertex with no edge to the basepoint maps into N \ L exactly
        for b in diff:
            if BASEPOINT not in pd.succ[b]:
                assert set(g.succ.get(b, ())) <= diff and b not in g.exits
        # infinite paths avoiding the basepoint live in inv(N \ L)
        assert inv(pd, diff) == inv(g, diff)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_collar_conditions_two_and_three(seed):
    rng = random.Random(seed)
    g = random_digraph(rng, 10, 0.2)
    g = BoxMap.from_edges(g.vertices, g.edges(), exits=[v for v in g.vertices if rng.random() < 0.3])
    N = g.vertices
    if not is_isolating_block(g, N):
        return
    try:
        L = grow_exit_collar(g, N)
    except DegeneratePair:
        return
    v = validate_filtration_pair(g, N, L)
    assert v.exit_covered and v.saturated


def test_nesting_of_pairs():
    # two pairs sharing L with N1 inside the interior of N2
    g = BoxGrid(1, ((0.0, 9.0),), (9,))
    edges = [(4, 4), (3, 4), (5, 4), (2, 3), (6, 5), (1, 2), (7, 6)]
    bm = BoxMap.from_edges(range(9), edges, grid=g)
    L = frozenset()
    N1, N2 = {3, 4, 5}, set(range(1, 8))
    assert validate_filtration_pair(bm, N1, L).ok
    assert validate_filtration_pair(bm, N2, L).ok
    v = validate_filtration_pair(bm, N2, N1 | L, invariant_set=inv(bm, set(N2) - N1))
    assert v.ok


def test_chain_neighborhoods_shrink_with_depth():
    sizes = []
    for depth in (4, 5, 6, 7):
        bm = build_boxmap(contraction(depth))
        P = find_filtration_pair(bm)
        lo, hi = bm.grid.box_bounds(sorted(P.N))
        sizes.append(float(hi.max() - lo.min()))
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


def test_pair_json(G3):
    P = make_pair(G3, {0, 1, 2}, {1})
    assert P.to_json() == {"N": [0, 1, 2], "L": [1], "valid": [True, True, True]}
