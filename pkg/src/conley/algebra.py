"""Shift equivalence of integer matrices, Leray reduction and Szymczak morphisms.

Everything is exact, over the rationals via sympy. Decisions about shift
equivalence are made over Q; integer-level obstructions are reported by
:func:`z_distinguishers` but never claimed to be complete.

Two independent routes decide rational shift equivalence:

* :func:`shift_equivalent_rational` compares the Leray forms up to similarity
  (ranks of ``p(M)^k`` for every irreducible factor ``p`` of the
  characteristic polynomial);
* :func:`szymczak_isomorphism` looks for an intertwiner that is bijective on
  eventual images, builds its inverse morphism and checks both composites.

Bound for the Szymczak search: the two sides of
``g1 f^(n2+k) = g2 f^(n1+k)`` differ by a map that kills ``f^k X`` once
``f^k X`` is the eventual image, where f acts invertibly; if they agree for
some k they agree for every larger k, and ``f^k X`` stabilises by
``k = dim X``. So checking ``k <= dim X`` is complete.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import sympy
from sympy import Matrix

from .errors import InvalidWitness, NotIntertwining, ShapeMismatch


def to_sympy(a) -> Matrix:
    """Matrix from nested lists, numpy arrays or sympy matrices; keeps empty shapes."""
    if isinstance(a, Matrix):
        return a
    shape = getattr(a, "shape", None)
    if shape is not None and len(shape) == 2:
        rows, cols = shape
        if rows == 0 or cols == 0:
            return sympy.zeros(rows, cols)
        return Matrix(rows, cols, [sympy.Rational(int(x)) for x in a.ravel().tolist()])
    rows = list(a)
    if not rows:
        return sympy.zeros(0, 0)
    return Matrix(rows)


def _square(A: Matrix, name: str = "matrix") -> int:
    if A.rows != A.cols:
        raise ShapeMismatch(f"{name} must be square, got {A.rows}x{A.cols}")
    return A.rows


def mpow(A: Matrix, k: int) -> Matrix:
    out = sympy.eye(A.rows)
    for _ in range(k):
        out = out * A
    return out


def _rank(A: Matrix) -> int:
    return 0 if A.rows == 0 or A.cols == 0 else A.rank()


def _primitive(v: Matrix) -> Matrix:
    """Scale a nonzero rational vector to a primitive integer vector."""
    den = 1
    for x in v:
        den = sympy.ilcm(den, sympy.fraction(x)[1])
    w = v * den
    g = 0
    for x in w:
        g = sympy.igcd(g, int(x))
    return w / g if g else w


def nilpotency_index(A: Matrix) -> int:
    """Smallest k with rank(A^k) = rank(A^(k+1))."""
    A = to_sympy(A)
    n = _square(A)
    P = sympy.eye(n)
    r = n
    for k in range(n + 1):
        Q = P * A
        rq = _rank(Q)
        if rq == r:
            return k
        P, r = Q, rq
    return n


@dataclass
class LerayForm:
    """``A`` restricted to its eventual image ``A^n Q^n``.

    ``basis`` holds the chosen basis vectors as columns (primitive integer
    vectors), so ``A * basis == basis * matrix``.
    """

    dimension: int
    matrix: Matrix
    basis: Matrix = field(repr=False)

    @property
    def charpoly(self) -> list:
        if self.dimension == 0:
            return [1]
        x = sympy.Symbol("x")
        return [sympy.Rational(c) for c in self.matrix.charpoly(x).all_coeffs()]

    @property
    def is_trivial(self) -> bool:
        return self.dimension == 0

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "matrix": [[str(x) for x in self.matrix.row(i)] for i in range(self.dimension)],
            "charpoly": [str(c) for c in self.charpoly],
        }


def leray_reduction(A) -> LerayForm:
    A = to_sympy(A)
    n = _square(A)
    if n == 0:
        return LerayForm(0, sympy.zeros(0, 0), sympy.zeros(0, 0))
    cols = [_primitive(c) for c in mpow(A, n).columnspace()]
    if not cols:
        return LerayForm(0, sympy.zeros(0, 0), sympy.zeros(n, 0))
    P = Matrix.hstack(*cols)
    M = (P.T * P).inv() * P.T * A * P
    if P * M != A * P:
        raise ArithmeticError("eventual image is not invariant; reduction failed")
    if M.det() == 0:
        raise ArithmeticError("reduced map is not invertible")
    return LerayForm(P.cols, M, P)


def _similar(M1: Matrix, M2: Matrix) -> bool:
    if M1.shape != M2.shape:
        return False
    r = M1.rows
    if r == 0:
        return True
    x = sympy.Symbol("x")
    p1, p2 = M1.charpoly(x).as_expr(), M2.charpoly(x).as_expr()
    if sympy.expand(p1 - p2) != 0:
        return False
    _, factors = sympy.factor_list(p1, x, domain="QQ")
    for fac, mult in factors:
        poly = sympy.Poly(fac, x)
        F1 = _poly_at(poly, M1)
        F2 = _poly_at(poly, M2)
        P1, P2 = sympy.eye(r), sympy.eye(r)
        for _ in range(mult):
            P1, P2 = P1 * F1, P2 * F2
            if _rank(P1) != _rank(P2):
                return False
    return True


def _poly_at(poly: sympy.Poly, M: Matrix) -> Matrix:
    out = sympy.zeros(M.rows, M.cols)
    for c in poly.all_coeffs():
        out = out * M + c * sympy.eye(M.rows)
    return out


def shift_equivalent_rational(A, B) -> bool:
    """Shift equivalence over Q, decided on the Leray forms."""
    return _similar(leray_reduction(A).matrix, leray_reduction(B).matrix)


def is_trivial_index(matrices: Sequence) -> bool:
    """True when every degree's Leray form is zero-dimensional."""
    return all(leray_reduction(m).is_trivial for m in matrices)


@dataclass
class ShiftWitness:
    """``R: X -> X'``, ``S: X' -> X`` with lag ``lag``."""

    R: Matrix
    S: Matrix
    lag: int

    def to_json(self) -> dict:
        return {"R": _mat_json(self.R), "S": _mat_json(self.S), "lag": self.lag}


def verify_shift_witness(A, B, w: ShiftWitness) -> bool:
    A, B = to_sympy(A), to_sympy(B)
    R, S = to_sympy(w.R), to_sympy(w.S)
    n, m = _square(A, "A"), _square(B, "B")
    if R.shape != (m, n) or S.shape != (n, m):
        raise ShapeMismatch(f"witness shapes R {R.shape}, S {S.shape} do not fit A {n}x{n}, B {m}x{m}")
    if w.lag < 0:
        raise ShapeMismatch("lag must be nonnegative")
    return (R * A == B * R and S * B == A * S
            and R * S == mpow(B, w.lag) and S * R == mpow(A, w.lag))


def _eventual_projection(A: Matrix):
    """``(P, L, Q)`` with ``A P = P L``, ``Q P = I`` and ``Q A = L Q``."""
    n = A.rows
    lf = leray_reduction(A)
    P = lf.basis
    if lf.dimension == 0:
        return P, lf.matrix, sympy.zeros(0, n)
    K = mpow(A, n).nullspace()
    full = Matrix.hstack(P, *K) if K else P
    Q = full.inv()[:lf.dimension, :]
    return P, lf.matrix, Q


def _invertible_intertwiner(L1: Matrix, L2: Matrix, seed: int = 0, trials: int = 12) -> Optional[Matrix]:
    """Some invertible ``T`` with ``T L1 = L2 T``, or ``None``."""
    r = L1.rows
    if L2.rows != r:
        return None
    if r == 0:
        return sympy.zeros(0, 0)
    basis = _intertwiners(L1, L2)
    if not basis:
        return None
    rng = random.Random(seed)
    for _ in range(trials):
        T = sympy.zeros(r, r)
        for Bm in basis:
            T += rng.randint(-50, 50) * Bm
        if T.det() != 0:
            return T
    return None


def _intertwiners(F: Matrix, G: Matrix) -> list[Matrix]:
    """Basis of ``{X : X F = G X}`` for ``F`` n x n and ``G`` m x m."""
    n, m = F.rows, G.rows
    if n == 0 or m == 0:
        return []
    syms = sympy.symbols(f"x0:{m * n}")
    X = Matrix(m, n, syms)
    eqs = list(X * F - G * X)
    system = Matrix([[sympy.Poly(e, *syms).coeff_monomial(s) for s in syms] for e in eqs])
    out = []
    for v in system.nullspace():
        out.append(Matrix(m, n, list(v)))
    return out


def rational_shift_witness(A, B) -> Optional[ShiftWitness]:
    """Rational witness through the Leray forms, or ``None`` if there is none."""
    A, B = to_sympy(A), to_sympy(B)
    n, m = _square(A, "A"), _square(B, "B")
    PA, LA, QA = _eventual_projection(A)
    PB, LB, QB = _eventual_projection(B)
    T = _invertible_intertwiner(LA, LB)
    if T is None:
        return None
    lag = max(nilpotency_index(A) if n else 0, nilpotency_index(B) if m else 0)
    R = PB * T * QA if LA.rows else sympy.zeros(m, n)
    S = PA * mpow(LA, lag) * T.inv() * QB if LA.rows else sympy.zeros(n, m)
    w = ShiftWitness(R, S, lag)
    if not verify_shift_witness(A, B, w):
        raise ArithmeticError("constructed witness failed verification")
    return w


# -- integer-level obstructions ---------------------------------------------------

def _lattice_action(A: Matrix):
    """Matrix of ``A`` on the lattice ``A^n Z^n`` in a lattice basis."""
    from .homology.snf import snf

    n = A.rows
    if n == 0:
        return sympy.zeros(0, 0)
    An = mpow(A, n)
    s = snf([[int(x) for x in An.row(i)] for i in range(n)])
    Uinv = Matrix(s.U_inv.tolist())
    r = s.rank
    if r == 0:
        return sympy.zeros(0, 0)
    basis = Matrix.hstack(*[Uinv[:, i] * s.diagonal[i] for i in range(r)])
    return (basis.T * basis).inv() * basis.T * A * basis


def _bowen_franks(A: Matrix) -> dict:
    from .homology.snf import snf

    n = A.rows
    if n == 0:
        return {"free_rank": 0, "torsion": []}
    M = sympy.eye(n) - A
    d = snf([[int(x) for x in M.row(i)] for i in range(n)]).diagonal
    return {"free_rank": n - len(d), "torsion": [x for x in d if x > 1]}


def z_distinguishers(A, B) -> dict:
    """Integer-level invariants of shift equivalence that can tell ``A``, ``B`` apart.

    Only a semi-decision: "not-distinguished" says nothing about equivalence
    over Z.
    """
    A, B = to_sympy(A), to_sympy(B)
    n, m = _square(A, "A"), _square(B, "B")
    kmax = max(n, m, 1)
    ta = [int(mpow(A, k).trace()) if n else 0 for k in range(1, kmax + 1)]
    tb = [int(mpow(B, k).trace()) if m else 0 for k in range(1, kmax + 1)]
    la, lb = leray_reduction(A), leray_reduction(B)
    da = abs(int(_lattice_action(A).det())) if la.dimension else 1
    db = abs(int(_lattice_action(B).det())) if lb.dimension else 1
    bfa, bfb = _bowen_franks(A), _bowen_franks(B)
    checks = {
        "trace_sequence": ta == tb,
        "leray_charpoly": la.charpoly == lb.charpoly,
        "lattice_det": da == db,
        "bowen_franks": bfa == bfb,
    }
    return {
        "verdict": "not-distinguished" if all(checks.values()) else "distinguished",
        "checks": checks,
        "traces": [ta, tb],
        "leray_charpoly": [[str(c) for c in la.charpoly], [str(c) for c in lb.charpoly]],
        "lattice_det": [da, db],
        "bowen_franks": [bfa, bfb],
    }


# -- Szymczak category -----------------------------------------------------------

@dataclass
class SzymczakMorphism:
    """Morphism ``[g, n]`` from ``(X, source)`` to ``(X', target)``."""

    g: Matrix
    n: int
    source: Matrix
    target: Matrix

    def __post_init__(self):
        self.g, self.source, self.target = to_sympy(self.g), to_sympy(self.source), to_sympy(self.target)

    def check(self) -> None:
        if self.g.shape != (self.target.rows, self.source.rows):
            raise ShapeMismatch("morphism matrix does not fit its objects")
        if self.g * self.source != self.target * self.g:
            raise NotIntertwining("g f != f' g")

    def compose(self, first: "SzymczakMorphism") -> "SzymczakMorphism":
        """``self ∘ first``."""
        return SzymczakMorphism(self.g * first.g, self.n + first.n, first.source, self.target)

    @classmethod
    def identity(cls, f) -> "SzymczakMorphism":
        f = to_sympy(f)
        return cls(sympy.eye(f.rows), 0, f, f)


def szymczak_equivalent(f, f2, m1: SzymczakMorphism, m2: SzymczakMorphism) -> bool:
    """Whether ``[g1, n1]`` and ``[g2, n2]`` are the same morphism ``(X, f) -> (X', f2)``."""
    f, f2 = to_sympy(f), to_sympy(f2)
    for mm in (m1, m2):
        if mm.g.shape != (f2.rows, f.rows):
            raise ShapeMismatch("morphism matrix does not fit its objects")
        if mm.g * f != f2 * mm.g:
            raise NotIntertwining("morphism does not intertwine f and f'")
    size = f.rows
    for k in range(size + 1):
        if m1.g * mpow(f, m2.n + k) == m2.g * mpow(f, m1.n + k):
            return True
    return False


def szymczak_iso_from_witness(A, B, w: ShiftWitness):
    """``([R, lag], [S, 0])``, mutually inverse in the Szymczak category."""
    A, B = to_sympy(A), to_sympy(B)
    if not verify_shift_witness(A, B, w):
        raise InvalidWitness("witness does not satisfy the shift-equivalence identities")
    fwd = SzymczakMorphism(to_sympy(w.R), w.lag, A, B)
    back = SzymczakMorphism(to_sympy(w.S), 0, B, A)
    return fwd, back


def szymczak_isomorphism(A, B, seed: int = 0, trials: int = 12):
    """Search for mutually inverse morphisms ``(X, A) <-> (X', B)``.

    Picks random intertwiners ``g`` (``g A = B g``) until one is bijective
    between eventual images, then builds the inverse from it. Every returned
    pair has both composites checked against the identities, so a positive
    answer is certified; a negative answer is exact unless all ``trials``
    random draws hit the proper subvariety of singular intertwiners.
    """
    A, B = to_sympy(A), to_sympy(B)
    n, m = _square(A, "A"), _square(B, "B")
    PA, LA, QA = _eventual_projection(A)
    PB, LB, QB = _eventual_projection(B)
    r = LA.rows
    if LB.rows != r:
        return None
    if r == 0:
        g, h = sympy.zeros(m, n), sympy.zeros(n, m)
    else:
        basis = _intertwiners(A, B)
        rng = random.Random(seed)
        g = None
        for _ in range(trials if basis else 0):
            cand = sympy.zeros(m, n)
            for Bm in basis:
                cand += rng.randint(-50, 50) * Bm
            M = QB * cand * PA
            if M.det() != 0:
                g = cand
                break
        if g is None:
            return None
        h = PA * (QB * g * PA).inv() * QB
    fwd = SzymczakMorphism(g, 0, A, B)
    back = SzymczakMorphism(h, 0, B, A)
    if not (szymczak_equivalent(A, A, back.compose(fwd), SzymczakMorphism.identity(A))
            and szymczak_equivalent(B, B, fwd.compose(back), SzymczakMorphism.identity(B))):
        raise ArithmeticError("constructed inverse failed the composite check")
    return fwd, back


def witness_from_isomorphism(fwd: SzymczakMorphism, back: SzymczakMorphism) -> ShiftWitness:
    """Shift witness ``(g, h B^k)`` with lag ``k`` from inverse morphisms ``[g, 0]``, ``[h, 0]``."""
    if fwd.n or back.n:
        raise InvalidWitness("only shift-free morphisms convert directly")
    A, B = fwd.source, fwd.target
    k = max(nilpotency_index(A) if A.rows else 0, nilpotency_index(B) if B.rows else 0)
    w = ShiftWitness(fwd.g, back.g * mpow(B, k), k)
    if not verify_shift_witness(A, B, w):
        raise InvalidWitness("isomorphism does not yield a shift witness")
    return w


# -- JSON ---------------------------------------------------------------------------

def _mat_json(M) -> dict:
    M = to_sympy(M)
    ent = [[int(x) if x.is_integer else str(x) for x in M.row(i)] for i in range(M.rows)]
    return {"rows": M.rows, "cols": M.cols, "entries": ent}


def matrix_to_json(M) -> dict:
    return _mat_json(M)


def matrix_from_json(data) -> Matrix:
    """Accepts ``{"rows", "cols", "entries"}`` or a bare list of rows."""
    if isinstance(data, dict):
        if "entries" not in data:
            raise ShapeMismatch("matrix JSON needs 'entries'")
        rows = data["entries"]
        r = data.get("rows", len(rows))
        c = data.get("cols", len(rows[0]) if rows else 0)
    elif isinstance(data, list):
        rows = data
        r, c = len(rows), (len(rows[0]) if rows else 0)
    else:
        raise ShapeMismatch("matrix JSON must be an object or a list of rows")
    if len(rows) != r or any(not isinstance(row, list) or len(row) != c for row in rows):
        raise ShapeMismatch("matrix rows have inconsistent lengths")
    if r == 0 or c == 0:
        return sympy.zeros(r, c)
    try:
        return Matrix([[sympy.Rational(x) for x in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch(f"bad matrix entry: {exc}") from exc
