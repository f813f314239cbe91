import random

import pytest

from conley.boxdyn import BoxGrid, BoxMap
from conley.systems import SystemSpec


def digraph(edges, vertices=None, exits=(), boundary=()):
    vs = set(vertices or ())
    for u, v in edges:
        vs.update((u, v))
    return BoxMap.from_edges(sorted(vs), edges, exits, boundary)


def five_box(extra_edges=()):
    """1D grid of five boxes; only b2 loops, every other box exits."""
    grid = BoxGrid(1, ((0.0, 5.0),), (5,))
    edges = [(2, 2), *extra_edges]
    looping = {u for u, _ in edges}
    exits = [b for b in range(5) if b not in looping]
    return BoxMap.from_edges(range(5), edges, exits, grid=grid)


def random_digraph(rng: random.Random, n_max=12, density=0.2):
    n = rng.randint(1, n_max)
    edges = [(u, v) for u in range(n) for v in range(n) if rng.random() < density]
    return BoxMap.from_edges(range(n), edges)


def sampled(family, bounds, params, depth=None, padding=0.0):
    return SystemSpec(kind="sampled", dimension=len(bounds),
                      bounds=tuple(tuple(map(float, b)) for b in bounds), family=family,
                      params=tuple(float(p) for p in params), depth=depth, padding=padding)


SHIFT_PARAMS = (0, 0.5, 5, -1, 0.5, 1, 5, -3)


def doubling(depth=6, sign=1, padding=0.0):
    return sampled("linear", [(-1, 1)], [2 * sign, 0], depth, padding)


def contraction(depth=4, padding=0.0):
    return sampled("linear", [(-1, 1)], [0.5, 0], depth, padding)


def two_shift(depth=7):
    return sampled("piecewise_linear", [(0, 1)], SHIFT_PARAMS, depth)


def logistic(depth=7):
    return sampled("quadratic", [(-0.5, 1.5)], [5], depth)


@pytest.fixture
def G1():
    return digraph([(0, 0), (1, 0), (2, 1), (2, 3), (3, 4), (4, 4)])


@pytest.fixture
def G3():
    # w=0, x=1, y=2
    return digraph([(2, 2), (0, 1)], vertices=[0, 1, 2], exits=[1])


@pytest.fixture
def G4():
    # a=0, b=1, c=2
    return digraph([(0, 0), (1, 1), (1, 2), (2, 0)])
