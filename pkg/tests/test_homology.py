import random

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conley.boxdyn import BoxGrid, BoxMap, build_boxmap
from conley.errors import DigraphOnly, InvalidPair, NonrectangularImage
from conley.filtration import find_filtration_pair, make_pair
from conley.homology import (boundary_matrices, cubical_complex, index_map, induced_map,
                             invariant_factors, relative_complex, relative_homology,
                             smith_normal_form, snf)
from conley.homology.snf import matmul

from conftest import contraction, digraph, doubling, sampled


def grid(*n):
    return BoxGrid(len(n), tuple((0.0, float(k)) for k in n), tuple(n))


def counts(C):
    return [C.count(k) for k in range(C.dimension + 1)]


def rank_q(m):
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0
    return sympy.Matrix(m.tolist()).rank()


def det(m):
    return sympy.Matrix(m.tolist()).det() if m.shape[0] else 1


# -- complexes ---------------------------------------------------------------------

def test_complex_examples():
    assert counts(cubical_complex(grid(4), [1])) == [2, 1]
    assert counts(cubical_complex(grid(4), [1, 2])) == [3, 2]
    assert counts(cubical_complex(grid(3, 3), [4])) == [4, 4, 1]


def test_boundary_examples():
    d = boundary_matrices(cubical_complex(grid(2), [0]))
    assert d[1][:, 0].tolist() == [-1, 1]
    d = boundary_matrices(cubical_complex(grid(2, 2), [0]))
    assert sum(1 for x in d[2].ravel() if x != 0) == 4
    assert set(d[2].ravel()) <= {-1, 1}
    assert not np.any(matmul(d[1], d[2]))
    empty = boundary_matrices(cubical_complex(grid(2, 2), []))
    assert all(m.size == 0 for m in empty)


def test_digraph_has_no_geometry(G1):
    with pytest.raises(DigraphOnly):
        cubical_complex(G1, [0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_boundary_squares_to_zero(seed, dim):
    rng = random.Random(seed)
    g = grid(*([4] * dim))
    N = {b for b in range(g.size) if rng.random() < 0.5}
    L = {b for b in N if rng.random() < 0.3}
    for C in (cubical_complex(g, N), relative_complex(g, N, L)):
        d = boundary_matrices(C)
        for k in range(1, len(d) - 1):
            assert not np.any(matmul(d[k], d[k + 1]))


# -- Smith normal form ---------------------------------------------------------------

def test_snf_examples():
    U, D, V = smith_normal_form([[2, 4], [6, 8]])
    assert D.tolist() == [[2, 0], [0, 4]]
    U, D, V = smith_normal_form(np.eye(3, dtype=int).tolist())
    assert D.tolist() == np.eye(3, dtype=int).tolist()
    U, D, V = smith_normal_form([[0, 0], [0, 0]])
    assert not np.any(D)


def check_snf(a):
    A = np.array(a, dtype=object)
    r = snf(A)
    assert (matmul(matmul(r.U, A), r.V) == r.D).all()
    assert abs(det(r.U)) == 1 and abs(det(r.V)) == 1
    assert (matmul(r.U, r.U_inv) == np.eye(A.shape[0], dtype=object)).all()
    assert (matmul(r.V, r.V_inv) == np.eye(A.shape[1], dtype=object)).all()
    diag = r.diagonal
    off = r.D.copy()
    for i in range(min(off.shape)):
        off[i, i] = 0
    assert not np.any(off)
    for i in range(min(r.D.shape)):
        assert r.D[i, i] >= 0
    for x, y in zip(diag, diag[1:]):
        assert y % x == 0
    return diag


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 10 ** 6))
def test_snf_against_sympy(r, c, seed):
    rng = random.Random(seed)
    a = [[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)]
    diag = check_snf(a)
    from sympy.matrices.normalforms import invariant_factors as sym_if
    want = [int(x) for x in sym_if(sympy.Matrix(a), domain=sympy.ZZ) if x != 0]
    assert diag == [abs(x) for x in want]
    assert invariant_factors(a) == diag


# -- homology --------------------------------------------------------------------------

def test_relative_homology_examples():
    H = relative_homology(grid(5), [2])
    assert H.betti_numbers == [1, 0]
    H = relative_homology(grid(3), [0, 1, 2], [0, 2])
    assert H.betti_numbers == [0, 1]
    g = grid(3, 3)
    H = relative_homology(g, set(range(9)) - {4})
    assert H.betti_numbers == [1, 1, 0]
    assert H.to_json()[1] == {"dim": 1, "betti": 1, "torsion": []}


def test_circle_benchmark():
    # boundary ring of a 4x4 block is a thickened circle
    g = grid(4, 4)
    ring = {b for b in range(16) if g.on_outer_face(b)}
    assert relative_homology(g, ring).betti_numbers == [1, 1, 0]


def test_three_dimensional_shell():
    g = grid(3, 3, 3)
    shell = set(range(27)) - {13}
    assert relative_homology(g, shell).betti_numbers == [1, 0, 1, 0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_betti_rational_rank_oracle(seed, dim):
    rng = random.Random(seed)
    g = grid(*([3] * dim))
    N = {b for b in range(g.size) if rng.random() < 0.6}
    L = {b for b in N if rng.random() < 0.3}
    C = relative_complex(g, N, L)
    d = boundary_matrices(C) + [np.zeros((C.count(dim), 0), dtype=object)]
    H = relative_homology(g, N, L)
    for k in range(dim + 1):
        want = C.count(k) - rank_q(d[k]) - rank_q(d[k + 1])
        assert H.betti(k) == want
        assert H.torsion(k) == []
    euler_cells = sum((-1) ** k * C.count(k) for k in range(dim + 1))
    assert sum((-1) ** k * b for k, b in enumerate(H.betti_numbers)) == euler_cells


# -- index maps ----------------------------------------------------------------------

def test_contraction_index():
    bm = build_boxmap(contraction(depth=4))
    P = make_pair(bm, set(range(16)), set())
    assert P.validity.ok
    im = index_map(bm, P)
    assert im.matrix(0).tolist() == [[1]]
    assert im.matrix(1).shape == (0, 0)


@pytest.mark.parametrize("sign,want", [(1, [[1]]), (-1, [[-1]])])
def test_expansion_index(sign, want):
    bm = build_boxmap(doubling(6, sign))
    P = find_filtration_pair(bm)
    im = index_map(bm, P)
    assert im.matrix(1).tolist() == want
    assert im.matrix(0).shape == (0, 0)
    assert [m.tolist() for m in im.cohomology()] == [m.T.tolist() for m in im.matrices]


def test_identity_system_is_identity_on_homology():
    for bounds in ([(0, 1)], [(0, 1), (0, 1)], [(0, 1), (0, 1), (0, 1)]):
        depth = 3 if len(bounds) < 3 else 2
        bm = build_boxmap(sampled("linear", bounds,
                                  list(np.eye(len(bounds)).ravel()) + [0] * len(bounds), depth))
        im = induced_map(bm, bm.vertices)
        assert im.matrix(0).tolist() == [[1]]
        for k in range(1, len(bounds) + 1):
            assert im.matrix(k).shape == (0, 0)


def test_rotation_on_annulus_is_identity():
    # the closed-touching identity on a 2D annulus; L collects the images that
    # spill into the hole and past the rim
    g = BoxGrid(2, ((0.0, 6.0), (0.0, 6.0)), (6, 6))
    succ = {b: tuple(sorted(g.dilate({b}, 1))) for b in range(g.size)}
    bm = BoxMap(g, frozenset(range(g.size)), succ, frozenset(), g.outer_face())
    ring = {b for b in range(36) if 1 <= g.coords(b)[0] <= 4 and 1 <= g.coords(b)[1] <= 4}
    ring -= {g.box_id((2, 2)), g.box_id((2, 3)), g.box_id((3, 2)), g.box_id((3, 3))}
    im = induced_map(bm, ring | set(bm.image(ring)), ())
    assert im.matrix(0).tolist() == [[1]]


def test_invalid_pair_rejected():
    bm = build_boxmap(doubling(6))
    P = make_pair(bm, set(range(64)), set())
    assert not P.validity.ok
    with pytest.raises(InvalidPair):
        index_map(bm, P)


def test_nonrectangular_image_detected():
    g = BoxGrid(1, ((0.0, 4.0),), (4,))
    bm = BoxMap.from_edges(range(4), [(1, 0), (1, 2), (2, 1)], grid=g)
    with pytest.raises(NonrectangularImage):
        induced_map(bm, {1, 2})
