"""System descriptions: the built-in map families and the System JSON format.

Each family provides a vectorised interval enclosure ``enclose(lo, hi)`` over
arrays of boxes (shape ``(n, d)``), a point evaluator, and its fixed points
in closed form. Enclosures use exact ranges where the formula allows it and
ordinary floating point otherwise; the padding parameter absorbs rounding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SystemSpecError, UnknownFamily


def _affine_range(a, lo, hi):
    p, q = a * lo, a * hi
    return np.minimum(p, q), np.maximum(p, q)


def _square_range(lo, hi):
    p, q = lo * lo, hi * hi
    low = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(p, q))
    return low, np.maximum(p, q)


# -- linear: x -> A x + c ---------------------------------------------------

def _linear_parts(params, d):
    a = np.asarray(params[: d * d], dtype=float).reshape(d, d)
    c = np.asarray(params[d * d:], dtype=float)
    return a, c


def _linear_enclose(params, lo, hi):
    d = lo.shape[1]
    a, c = _linear_parts(params, d)
    out_lo = np.tile(c, (lo.shape[0], 1)).astype(float)
    out_hi = out_lo.copy()
    for i in range(d):
        for j in range(d):
            p, q = _affine_range(a[i, j], lo[:, j], hi[:, j])
            out_lo[:, i] += p
            out_hi[:, i] += q
    return out_lo, out_hi


def _linear_eval(params, x):
    a, c = _linear_parts(params, len(x))
    return a @ np.asarray(x, dtype=float) + c


def _linear_fixed(params, d):
    a, c = _linear_parts(params, d)
    m = a - np.eye(d)
    if abs(np.linalg.det(m)) < 1e-12:
        return []
    return [np.linalg.solve(m, -c)]


# -- quadratic: x -> a x (1 - x) ----------------------------------------------

def _quadratic_value(a, x):
    return a * x * (1.0 - x)


def _quadratic_enclose(params, lo, hi):
    a = float(params[0])
    l, h = lo[:, 0], hi[:, 0]
    fl, fh = _quadratic_value(a, l), _quadratic_value(a, h)
    low, high = np.minimum(fl, fh), np.maximum(fl, fh)
    vertex = (l <= 0.5) & (h >= 0.5)
    fv = _quadratic_value(a, 0.5)
    low = np.where(vertex, np.minimum(low, fv), low)
    high = np.where(vertex, np.maximum(high, fv), high)
    return low[:, None], high[:, None]


def _quadratic_eval(params, x):
    return np.array([_quadratic_value(float(params[0]), float(x[0]))])


def _quadratic_fixed(params, d):
    a = float(params[0])
    pts = [np.array([0.0])]
    if a != 0 and a != 1:
        pts.append(np.array([1.0 - 1.0 / a]))
    return pts


# -- Henon: (x, y) -> (1 - a x^2 + y, b x) --------------------------------------

def _henon_enclose(params, lo, hi):
    a, b = float(params[0]), float(params[1])
    sq_lo, sq_hi = _square_range(lo[:, 0], hi[:, 0])
    t_lo, t_hi = _affine_range(-a, sq_lo, sq_hi)
    x_lo = 1.0 + t_lo + lo[:, 1]
    x_hi = 1.0 + t_hi + hi[:, 1]
    y_lo, y_hi = _affine_range(b, lo[:, 0], hi[:, 0])
    return np.stack([x_lo, y_lo], axis=1), np.stack([x_hi, y_hi], axis=1)


def _henon_eval(params, x):
    a, b = float(params[0]), float(params[1])
    return np.array([1.0 - a * x[0] ** 2 + x[1], b * x[0]])


def _henon_fixed(params, d):
    a, b = float(params[0]), float(params[1])
    # a x^2 + (1 - b) x - 1 = 0, y = b x
    if a == 0:
        if b == 1:
            return []
        xs = [1.0 / (1.0 - b)]
    else:
        disc = (1.0 - b) ** 2 + 4.0 * a
        if disc < 0:
            return []
        r = math.sqrt(disc)
        xs = [(-(1.0 - b) + r) / (2 * a), (-(1.0 - b) - r) / (2 * a)]
    return [np.array([x, b * x]) for x in xs]


# -- piecewise linear: pieces (start, end, slope, intercept) on closed intervals ---

def _pieces(params):
    return [tuple(float(v) for v in params[i:i + 4]) for i in range(0, len(params), 4)]


def _pwl_pieces_enclose(params, lo, hi):
    """One hull per piece, with a mask of the boxes the piece meets."""
    l, h = lo[:, 0], hi[:, 0]
    out = []
    for start, end, slope, icpt in _pieces(params):
        a = np.maximum(l, start)
        b = np.minimum(h, end)
        hit = a <= b
        p, q = slope * a + icpt, slope * b + icpt
        out.append((np.minimum(p, q)[:, None], np.maximum(p, q)[:, None], hit))
    return out


def _pwl_enclose(params, lo, hi):
    out_lo = np.full(lo.shape, np.inf)
    out_hi = np.full(lo.shape, -np.inf)
    for p, q, hit in _pwl_pieces_enclose(params, lo, hi):
        out_lo = np.where(hit[:, None], np.minimum(out_lo, p), out_lo)
        out_hi = np.where(hit[:, None], np.maximum(out_hi, q), out_hi)
    return out_lo, out_hi


def _pwl_eval(params, x):
    for start, end, slope, icpt in _pieces(params):
        if start <= x[0] <= end:
            return np.array([slope * x[0] + icpt])
    raise ValueError(f"{x[0]} lies outside every piece")


def _pwl_fixed(params, d):
    pts = []
    for start, end, slope, icpt in _pieces(params):
        if slope != 1:
            x = icpt / (1.0 - slope)
            if start <= x <= end:
                pts.append(np.array([x]))
    return pts


@dataclass(frozen=True)
class Family:
    name: str
    dimensions: tuple[int, ...]
    arity: Callable[[int], Optional[int]]
    enclose: Callable
    evaluate: Callable
    fixed_points: Callable
    pieces: Optional[Callable] = None


def _pwl_arity(d):
    return None  # any positive multiple of four


FAMILIES = {
    "linear": Family("linear", (1, 2, 3), lambda d: d * d + d,
                     _linear_enclose, _linear_eval, _linear_fixed),
    "quadratic": Family("quadratic", (1,), lambda d: 1,
                        _quadratic_enclose, _quadratic_eval, _quadratic_fixed),
    "henon": Family("henon", (2,), lambda d: 2,
                    _henon_enclose, _henon_eval, _henon_fixed),
    "piecewise_linear": Family("piecewise_linear", (1,), _pwl_arity,
                               _pwl_enclose, _pwl_eval, _pwl_fixed,
                               _pwl_pieces_enclose),
}


@dataclass(frozen=True)
class SystemSpec:
    """Parsed System JSON: either a sampled map family on a box or a raw digraph."""

    kind: str
    dimension: int = 1
    bounds: tuple[tuple[float, float], ...] = ()
    family: Optional[str] = None
    params: tuple[float, ...] = ()
    depth: Optional[int] = None
    padding: float = 0.0
    vertices: tuple[int, ...] = ()
    edges: tuple[tuple[int, int], ...] = ()
    exits: tuple[int, ...] = ()
    boundary: tuple[int, ...] = ()
    shift: float = 0.0  # constant added to every image coordinate
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("sampled", "digraph"):
            raise SystemSpecError(f"unknown system type {self.kind!r}")
        if self.kind == "digraph":
            vs = set(self.vertices)
            if len(vs) != len(self.vertices):
                raise SystemSpecError("duplicate vertices")
            for u, v in self.edges:
                if u not in vs or v not in vs:
                    raise SystemSpecError(f"edge ({u}, {v}) uses an unknown vertex")
            for v in (*self.exits, *self.boundary):
                if v not in vs:
                    raise SystemSpecError(f"flagged vertex {v} is unknown")
            return
        if self.dimension not in (1, 2, 3):
            raise SystemSpecError("dimension must be 1, 2 or 3")
        if len(self.bounds) != self.dimension:
            raise SystemSpecError("bounds must give one interval per axis")
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise SystemSpecError(f"empty or non-finite bound [{lo}, {hi}]")
        fam = FAMILIES.get(self.family)
        if fam is None:
            raise UnknownFamily(f"unknown family {self.family!r}")
        if self.dimension not in fam.dimensions:
            raise SystemSpecError(f"family {self.family} needs dimension in {fam.dimensions}")
        want = fam.arity(self.dimension)
        if want is None:
            if not self.params or len(self.params) % 4:
                raise SystemSpecError("piecewise_linear needs params in groups of 4")
            self._check_pieces_cover()
        elif len(self.params) != want:
            raise SystemSpecError(f"family {self.family} takes {want} params, got {len(self.params)}")
        if self.padding < 0 or not math.isfinite(self.padding):
            raise SystemSpecError("padding must be a finite nonnegative number")
        if not math.isfinite(self.shift):
            raise SystemSpecError("shift must be finite")
        if self.depth is not None and self.depth < 0:
            raise SystemSpecError("depth must be nonnegative")

    def _check_pieces_cover(self):
        lo, hi = self.bounds[0]
        reach = lo
        for start, end, _, _ in sorted(_pieces(self.params)):
            if start > reach:
                break
            reach = max(reach, end)
        if reach < hi:
            raise SystemSpecError("piecewise_linear pieces must cover the bounds")

    @property
    def family_impl(self) -> Family:
        return FAMILIES[self.family]

    def enclose(self, lo: np.ndarray, hi: np.ndarray):
        a, z = self.family_impl.enclose(self.params, lo, hi)
        return a + self.shift, z + self.shift

    def enclose_pieces(self, lo: np.ndarray, hi: np.ndarray):
        """Hulls ``(lo, hi, mask)`` whose union covers the image of each box.

        Families given by several formulas return one hull per formula, so a
        box straddling a jump is not smeared over the whole jump.
        """
        fam = self.family_impl
        if fam.pieces is not None:
            hulls = fam.pieces(self.params, lo, hi)
        else:
            out_lo, out_hi = fam.enclose(self.params, lo, hi)
            hulls = [(out_lo, out_hi, np.ones(lo.shape[0], dtype=bool))]
        if self.shift:
            hulls = [(a + self.shift, z + self.shift, m) for a, z, m in hulls]
        return hulls

    def evaluate(self, x: Sequence[float]) -> np.ndarray:
        return self.family_impl.evaluate(self.params, np.asarray(x, dtype=float)) + self.shift

    def fixed_points(self) -> list[np.ndarray]:
        if self.shift:
            raise NotImplementedError("fixed points of shifted systems are not tabulated")
        return self.family_impl.fixed_points(self.params, self.dimension)

    def perturbed(self, eps: float) -> "SystemSpec":
        """The same system with ``eps`` added to every image coordinate."""
        return SystemSpec(**{**self.__dict__, "shift": self.shift + float(eps)})

    def with_params(self, params) -> "SystemSpec":
        return SystemSpec(**{**self.__dict__, "params": tuple(float(p) for p in params)})

    @classmethod
    def from_json(cls, data: dict) -> "SystemSpec":
        if not isinstance(data, dict) or "type" not in data:
            raise SystemSpecError("system JSON must be an object with a 'type'")
        kind = data["type"]
        try:
            if kind == "digraph":
                return cls(
                    kind="digraph",
                    vertices=tuple(int(v) for v in data["vertices"]),
                    edges=tuple((int(u), int(v)) for u, v in data.get("edges", [])),
                    exits=tuple(int(v) for v in data.get("exits", [])),
                    boundary=tuple(int(v) for v in data.get("boundary", [])),
                )
            return cls(
                kind=kind,
                dimension=int(data["dimension"]),
                bounds=tuple((float(lo), float(hi)) for lo, hi in data["bounds"]),
                family=data["family"],
                params=tuple(float(p) for p in data["params"]),
                depth=None if data.get("depth") is None else int(data["depth"]),
                padding=float(data.get("padding", 0.0)),
                shift=float(data.get("shift", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SystemSpecError):
                raise
            raise SystemSpecError(f"malformed system JSON: {exc}") from exc

    def to_json(self) -> dict:
        if self.kind == "digraph":
            return {
                "type": "digraph",
                "vertices": list(self.vertices),
                "edges": [list(e) for e in self.edges],
                "exits": list(self.exits),
                "boundary": list(self.boundary),
            }
        out = {
            "type": self.kind,
            "dimension": self.dimension,
            "bounds": [list(b) for b in self.bounds],
            "family": self.family,
            "params": list(self.params),
            "padding": self.padding,
        }
        if self.depth is not None:
            out["depth"] = self.depth
        if self.shift:
            out["shift"] = self.shift
        return out


def load_system(path) -> SystemSpec:
    with open(Path(path)) as fh:
        return SystemSpec.from_json(json.load(fh))
