"""The analysis pipeline and its JSON report.

``analyze`` runs box map, block, collar, homology, index map, Leray
reduction and the Morse machinery on one system and returns a plain dict
that validates against ``schemas/analysis_report.schema.json``.
"""

from __future__ import annotations

import json
import time
from importlib import resources
from typing import Optional

import jsonschema

from . import __version__
from .algebra import is_trivial_index, leray_reduction
from .boxdyn import DEFAULT_BOX_BUDGET, build_boxmap, inv, is_isolating_neighborhood
from .errors import ConleyError, NonrectangularImage, NotIsolating, RefineRequired
from .filtration import find_filtration_pair, pointed_map
from .graph import BASEPOINT
from .homology import induced_map
from .morse import (DEFAULT_INTERVAL_BUDGET, associated_decomposition, morse_filtration,
                    morse_poset, validate_morse_filtration)
from .systems import SystemSpec

_SCHEMA = None


def report_schema() -> dict:
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("conley").joinpath("schemas/analysis_report.schema.json").read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report is malformed, and
    ``ValueError`` if its verdicts contradict each other."""
    jsonschema.validate(report, report_schema())
    leray, trivial = report["leray"], report["trivial"]
    if leray is not None and trivial != all(f["dimension"] == 0 for f in leray):
        raise ValueError("triviality verdict disagrees with the Leray forms")
    if trivial is False and not report["wazewski"]["invariant_nonempty"]:
        raise ValueError("nontrivial index over an empty invariant set")


def dumps(report: dict) -> str:
    """Canonical text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.marks: dict[str, float] = {}
        self._t = time.perf_counter()

    def lap(self, name: str):
        if self.enabled:
            now = time.perf_counter()
            self.marks[name] = round(now - self._t, 6)
            self._t = now


def index_summary(bmap, N, L) -> dict:
    """Homology, index matrices and Leray forms of the pair ``(N, L)``."""
    im = induced_map(bmap, N, L)
    forms = [leray_reduction(m) for m in im.matrices]
    return {
        "homology": im.homology.to_json(),
        "index": im.to_json(),
        "cohomology_index": [{"dim": k, "rows": m.shape[0], "cols": m.shape[1],
                              "entries": [[int(x) for x in row] for row in m]}
                             for k, m in enumerate(im.cohomology())],
        "leray": [{"dim": k, **f.to_json()} for k, f in enumerate(forms)],
        "trivial": is_trivial_index(im.matrices),
        "matrices": im.matrices,
    }


def morse_label(summary: dict) -> str:
    """Short per-dimension index text for a Morse graph node."""
    parts = []
    for f in summary["leray"]:
        if f["dimension"]:
            cp = " ".join(f["charpoly"])
            parts.append(f"H{f['dim']}: r={f['dimension']} cp=[{cp}]")
    return "; ".join(parts) if parts else "trivial index"


def morse_set_label(bmap, M, max_layers: int = 3) -> str:
    """Index summary of one Morse set, from a pair inside a grid dilation of
    it or, failing that, inside the whole grid."""
    M = frozenset(M)
    hoods = [bmap.grid.dilate(M, k) for k in range(1, max_layers + 1)] + [bmap.vertices]
    for N in hoods:
        if inv(bmap, N) != M or not is_isolating_neighborhood(bmap, N):
            continue
        try:
            P = find_filtration_pair(bmap, N)
            return morse_label(index_summary(bmap, P.N, P.L))
        except NonrectangularImage:
            return "index needs refinement"
        except ConleyError:
            continue
    return "not isolated at this depth"


def morse_analysis(bmap, P=None, mode: str = "chain",
                   interval_budget: int = DEFAULT_INTERVAL_BUDGET, with_index: bool = True):
    """Morse poset, filtration, validation and per-class index labels.

    With a pair ``P`` the quotient dynamics of ``P`` are decomposed, so the
    basepoint becomes the bottom class; without one the digraph itself is.
    """
    if P is not None:
        pd = pointed_map(bmap, P)
        poset = associated_decomposition(pd, morse_poset(pd))
    else:
        pd = bmap
        poset = morse_poset(pd)
    F = morse_filtration(pd, poset, mode=mode, budget=interval_budget)
    check = validate_morse_filtration(bmap, F, pd)
    labels = {}
    if with_index and bmap.grid is not None:
        for p in poset.elements:
            if p != poset.basepoint:
                labels[p] = morse_set_label(bmap, poset.classes[p])
    return pd, poset, F, check, labels


def analyze(system: SystemSpec, depth: Optional[int] = None, padding: Optional[float] = None,
            mode: str = "chain", seed: int = 0, budget: int = DEFAULT_BOX_BUDGET,
            interval_budget: int = DEFAULT_INTERVAL_BUDGET, extra_layers: int = 0,
            timings: bool = False):
    """Full pipeline on one system. Returns ``(report, artifacts)``; the
    artifacts dict carries the live objects (map, pair, poset, filtration,
    DOT labels) for callers that want more than JSON."""
    clock = _Clock(timings)
    bmap = build_boxmap(system, depth, padding, budget)
    clock.lap("boxmap")
    try:
        P = find_filtration_pair(bmap, extra_layers=extra_layers)
    except NotIsolating as exc:
        raise RefineRequired("the invariant set reaches the outer face of the grid; "
                             "refine or enlarge the bounds") from exc
    clock.lap("pair")
    S = P.invariant_set
    diff_inv = inv(bmap, P.difference)
    report = {
        "version": __version__,
        "system": system.to_json(),
        "seed": seed,
        "depth": None if bmap.grid is None else (system.depth if depth is None else depth),
        "padding": None if bmap.grid is None else (system.padding if padding is None else padding),
        "invariant_set": {"size": len(S)},
        "pair": {"N": sorted(P.N), "L": sorted(P.L), "valid": P.validity.as_list(),
                 "size_N": len(P.N), "size_L": len(P.L), "invariant_size": len(diff_inv)},
        "homology": None, "index": None, "cohomology_index": None, "leray": None,
        "trivial": None,
    }
    summary = None
    if bmap.grid is not None:
        summary = index_summary(bmap, P.N, P.L)
        for key in ("homology", "index", "cohomology_index", "leray", "trivial"):
            report[key] = summary[key]
        clock.lap("index")
    report["wazewski"] = {
        "invariant_nonempty": bool(diff_inv),
        "consistent": report["trivial"] is not False or bool(diff_inv),
    }
    pd, poset, F, check, labels = morse_analysis(bmap, P, mode, interval_budget)
    clock.lap("morse")
    report["morse"] = {
        "classes": len(poset.classes),
        "sizes": [len(c) for c in poset.classes],
        "order": [list(e) for e in poset.covering_relations()],
        "basepoint": poset.basepoint,
    }
    report["filtration"] = {"mode": mode, "intervals": len(F.sets), "defects": len(F.defects),
                            "valid": bool(check["ok"])}
    if timings:
        report["timings"] = dict(clock.marks)
    validate_report(report)
    artifacts = {"map": bmap, "pair": P, "pointed": pd, "poset": poset, "filtration": F,
                 "filtration_check": check, "labels": labels,
                 "matrices": None if summary is None else summary["matrices"]}
    return report, artifacts


def error_json(exc: BaseException) -> dict:
    if isinstance(exc, ConleyError):
        out = exc.to_json()
    elif isinstance(exc, OSError):
        out = {"error": "io", "message": str(exc)}
    elif isinstance(exc, json.JSONDecodeError):
        out = {"error": "invalid_json", "message": str(exc)}
    else:
        out = {"error": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "suggestion", None):
        out.setdefault("suggestion", exc.suggestion)
    return out


__all__ = ["analyze", "index_summary", "morse_analysis", "morse_label", "report_schema",
           "validate_report", "dumps", "error_json", "BASEPOINT"]
