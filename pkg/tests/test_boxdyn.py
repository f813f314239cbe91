import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conley.boxdyn import (BoxGrid, BoxMap, build_boxmap, exit_set, interior, inv, inv_m,
                           is_isolating_block, is_isolating_neighborhood,
                           reachable_limit_classes, restrict)
from conley.errors import BudgetExceeded, NonFiniteImage, UnknownFamily
from conley.systems import SystemSpec

from conftest import contraction, digraph, five_box, random_digraph, sampled


def brute_inv(bmap, N):
    """Vertices with a path of length |N| both ways inside N, by explicit enumeration."""
    ns = set(N)
    n = len(ns)

    def walks(v, step):
        frontier = {v}
        for _ in range(n):
            frontier = {w for u in frontier for w in step(u) if w in ns}
            if not frontier:
                return False
        return True

    fwd = lambda u: bmap.succ.get(u, ())
    bwd = lambda u: bmap.pred.get(u, ())
    return {v for v in ns if walks(v, fwd) and walks(v, bwd)}


# -- build_boxmap ------------------------------------------------------------------

def test_contraction_depth2_closed_touching():
    bm = build_boxmap(contraction(depth=2))
    # hull [-.5, -.25] sits in b1 but touches b0 at -0.5 under the closed rule
    assert bm.succ[0] == (0, 1)
    assert 1 in bm.succ[0]


def test_identity_touches_neighbours():
    bm = build_boxmap(sampled("linear", [(0, 1)], [1, 0], depth=3))
    assert bm.succ[0] == (0, 1)
    assert bm.succ[3] == (2, 3, 4)
    assert bm.succ[7] == (6, 7)
    assert not bm.exits


def test_digraph_echo():
    spec = SystemSpec.from_json({"type": "digraph", "vertices": [0, 1], "edges": [[0, 1]],
                                 "exits": [1]})
    bm = build_boxmap(spec)
    assert bm.edges() == [(0, 1)]
    assert bm.exits == {1}
    assert bm.grid is None


def test_build_errors():
    with pytest.raises(UnknownFamily):
        SystemSpec.from_json({"type": "sampled", "dimension": 1, "bounds": [[0, 1]],
                              "family": "nope", "params": []})
    with pytest.raises(BudgetExceeded):
        build_boxmap(contraction(depth=10), budget=100)
    with pytest.raises(NonFiniteImage):
        build_boxmap(sampled("linear", [(0, 1)], [1e308, 1e308], depth=2), padding=1e308)


def test_exits_flag_hull_leaving_bounds():
    bm = build_boxmap(sampled("linear", [(-1, 1)], [2, 0], depth=2))
    assert bm.exits == {0, 3}


def test_grid_soundness_fixed_points():
    systems = [
        sampled("linear", [(-1, 1)], [2, 0], 6),
        sampled("quadratic", [(-0.5, 1.5)], [3.7], 7),
        sampled("henon", [(-2, 2), (-2, 2)], [1.4, 0.3], 5),
        sampled("linear", [(-1, 1), (-1, 1)], [2, 0.3, 0, 0.5, 0.01, -0.02], 4),
        sampled("piecewise_linear", [(0, 1)], (0, 0.5, 5, -1, 0.5, 1, 5, -3), 7),
    ]
    for spec in systems:
        bm = build_boxmap(spec)
        S = inv(bm, bm.vertices)
        for p in spec.fixed_points():
            if np.all(p >= bm.grid.lower) and np.all(p <= bm.grid.upper):
                for b in bm.grid.boxes_containing(p):
                    assert b in S, (spec.family, p, b)


def test_outer_approximation_contract_sampled():
    rng = np.random.default_rng(0)
    for spec in [sampled("henon", [(-2, 2), (-2, 2)], [1.4, 0.3], 4),
                 sampled("quadratic", [(-0.5, 1.5)], [5], 6)]:
        bm = build_boxmap(spec)
        g = bm.grid
        for b in rng.choice(g.size, 40, replace=False):
            lo, hi = g.box_bounds([int(b)])
            for _ in range(20):
                x = lo[0] + rng.random(g.dimension) * (hi[0] - lo[0])
                y = spec.evaluate(x)
                if np.any(y < g.lower) or np.any(y > g.upper):
                    assert int(b) in bm.exits
                else:
                    assert set(g.boxes_containing(y)) & set(bm.succ[int(b)])


# -- restrict / inv ------------------------------------------------------------------

def test_restrict_examples(G1):
    r = restrict(G1, {0, 1})
    assert r.edges() == [(0, 0), (1, 0)]
    assert restrict(G1, G1.vertices).edges() == G1.edges()
    r2 = restrict(G1, {2})
    assert r2.edges() == []
    assert 2 in r2.leaving


def test_inv_m_chain():
    chain = digraph([(0, 1), (1, 2)])
    assert inv_m(chain, {0, 1, 2}, 0) == {0, 1, 2}
    assert inv_m(chain, {0, 1, 2}, 1) == {1}
    assert inv_m(chain, {0, 1, 2}, 2) == set()


def test_inv_examples(G1):
    assert inv(G1, G1.vertices) == {0, 4}
    assert inv(digraph([(0, 1), (1, 2), (2, 0)]), {0, 1, 2}) == {0, 1, 2}
    assert inv(digraph([(0, 1), (1, 2)]), {0, 1, 2}) == set()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_inv_matches_brute_force(seed):
    rng = random.Random(seed)
    g = random_digraph(rng)
    N = {v for v in g.vertices if rng.random() < 0.8}
    S = inv(g, N)
    assert S == brute_inv(g, N)
    assert S == inv_m(g, N, len(N))
    prev = set(N)
    for m in range(len(N) + 1):
        cur = inv_m(g, N, m)
        assert cur <= prev
        prev = cur


# -- interior / isolation ---------------------------------------------------------------

def test_interior_examples():
    bm = five_box()
    assert interior(bm, {1, 2, 3}) == {2}
    assert interior(bm, range(5)) == {1, 2, 3}
    g = digraph([], vertices=[0, 1], boundary=[1])
    assert interior(g, {0, 1}) == {0}


def test_isolation_examples():
    bm = five_box()
    assert is_isolating_neighborhood(bm, {1, 2, 3})
    assert is_isolating_block(bm, {1, 2, 3})
    bad = five_box([(1, 1)])
    assert not is_isolating_neighborhood(bad, {1, 2, 3})
    assert not is_isolating_block(bad, {1, 2, 3})
    assert is_isolating_neighborhood(bm, set())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_block_implies_neighborhood(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 10)
    grid = BoxGrid(1, ((0.0, float(n)),), (n,))
    edges = [(u, v) for u in range(n) for v in range(n) if rng.random() < 0.2]
    bm = BoxMap.from_edges(range(n), edges, grid=grid)
    N = {b for b in range(n) if rng.random() < 0.7}
    if is_isolating_block(bm, N):
        assert is_isolating_neighborhood(bm, N)


def test_exit_set_examples():
    bm = five_box()
    assert exit_set(bm, {1, 2, 3}) == {1, 3}
    # depth 4 is the smallest grid where the attracting images stay off the outer face
    c = build_boxmap(contraction(depth=4))
    N = set(range(4, 12))
    assert exit_set(c, N) == set()
    everything_exits = digraph([], vertices=[0, 1, 2], exits=[0, 1, 2])
    assert exit_set(everything_exits, {0, 1, 2}) == {0, 1, 2}


def test_exit_set_is_complement_of_interior_mapped():
    bm = build_boxmap(sampled("quadratic", [(-0.5, 1.5)], [3.2], 6))
    N = set(range(10, 60))
    inner = interior(bm, N)
    E = exit_set(bm, N)
    for b in N:
        inside = b not in bm.exits and set(bm.succ[b]) <= inner
        assert (b not in E) == inside


def test_reachable_limit_classes(G1):
    assert sorted(map(sorted, reachable_limit_classes(G1, G1.vertices, 2))) == [[0], [4]]
    assert reachable_limit_classes(G1, G1.vertices, 0) == [frozenset({0})]
    assert reachable_limit_classes(digraph([(0, 1)]), {0, 1}, 0) == []


def test_grid_ids_row_major():
    g = BoxGrid(2, ((0.0, 1.0), (0.0, 1.0)), (4, 2))
    assert g.coords(5) == (1, 1)
    assert g.box_id((3, 1)) == 7
    for b in range(g.size):
        assert g.box_id(g.coords(b)) == b
    assert sorted(g.neighbors(0)) == [1, 4, 5]
    assert g.outer_face() == frozenset(range(8))


def test_dilate_matches_neighbors():
    g = BoxGrid(2, ((0.0, 1.0), (0.0, 1.0)), (6, 5))
    rng = random.Random(3)
    for _ in range(20):
        S = {rng.randrange(g.size) for _ in range(rng.randint(1, 6))}
        want = set(S)
        for b in S:
            want.update(g.neighbors(b))
        assert g.dilate(S, 1) == want
