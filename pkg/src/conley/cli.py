"""Command line front end: ``conley <subcommand> ...``.

Every command writes JSON (to ``--out`` or stdout). Errors are JSON too, on
stderr. Exit codes: 0 ok, 1 refinement needed or a defect was found, 2 bad
usage, bad input or IO failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .algebra import (ShiftWitness, leray_reduction, matrix_from_json, matrix_to_json,
                      rational_shift_witness, shift_equivalent_rational, verify_shift_witness,
                      z_distinguishers)
from .boxdyn import DEFAULT_BOX_BUDGET, build_boxmap, inv, is_isolating_neighborhood
from .errors import ConleyError, DefectiveFiltration, NonrectangularImage, RefineRequired
from .filtration import find_filtration_pair, make_pair, robustness_check
from .homology import induced_map
from .morse import DEFAULT_INTERVAL_BUDGET, morse_graph_dot
from .report import analyze, dumps, error_json, morse_analysis
from .systems import load_system

OK, SIGNAL, USAGE = 0, 1, 2


class UsageError(ConleyError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_json(path):
    with open(Path(path)) as fh:
        return json.load(fh)


def _emit(data, out=None):
    text = dumps(data)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_dot(path, text):
    if path:
        Path(path).write_text(text)


def _map_for(args, system=None):
    system = system or load_system(args.system)
    return system, build_boxmap(system, args.depth, args.padding, args.budget)


# -- subcommands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    system = load_system(args.system)
    report, art = analyze(system, depth=args.depth, padding=args.padding, mode=args.mode,
                          seed=args.seed, budget=args.budget,
                          interval_budget=args.interval_budget,
                          extra_layers=args.extra_layers, timings=args.timings)
    _emit(report, args.out)
    _write_dot(args.dot, morse_graph_dot(art["poset"], art["labels"]))
    return OK


def cmd_shifteq(args) -> int:
    A = matrix_from_json(_read_json(args.A))
    B = matrix_from_json(_read_json(args.B))
    eq = shift_equivalent_rational(A, B)
    out = {
        "rational": "equivalent" if eq else "inequivalent",
        "verdict": "equivalent (rational)" if eq else "inequivalent",
        "leray": [leray_reduction(A).to_json(), leray_reduction(B).to_json()],
        "z_report": z_distinguishers(A, B),
    }
    if args.witness:
        w = _read_json(args.witness)
        ws = ShiftWitness(matrix_from_json(w["R"]), matrix_from_json(w["S"]), int(w["lag"]))
        out["witness_verified"] = verify_shift_witness(A, B, ws)
    if args.witness_out:
        ws = rational_shift_witness(A, B) if eq else None
        if ws is not None:
            Path(args.witness_out).write_text(dumps(
                {"R": matrix_to_json(ws.R), "S": matrix_to_json(ws.S), "lag": ws.lag}))
        out["witness_written"] = ws is not None
    _emit(out, args.out)
    return OK


def cmd_morse(args) -> int:
    system, bmap = _map_for(args)
    P = None if bmap.grid is None else find_filtration_pair(bmap, extra_layers=args.extra_layers)
    pd, poset, F, check, labels = morse_analysis(bmap, P, args.mode, args.interval_budget)
    out = {
        "poset": poset.to_json(),
        "covering": [list(e) for e in poset.covering_relations()],
        "filtration": F.to_json(),
        "valid": bool(check["ok"]),
        "failures": check["failures"],
        "labels": {str(p): t for p, t in sorted(labels.items())},
    }
    if P is not None:
        out["pair"] = P.to_json()
    _emit(out, args.out)
    _write_dot(args.dot, morse_graph_dot(poset, labels))
    return SIGNAL if F.defects else OK


def _pair_from(args, bmap):
    if args.pair:
        data = _read_json(args.pair)
        return make_pair(bmap, data["N"], data.get("L", []))
    return find_filtration_pair(bmap, extra_layers=args.extra_layers)


def cmd_continue(args) -> int:
    system, bmap = _map_for(args)
    if args.perturbed:
        other = load_system(args.perturbed)
    else:
        other = system.perturbed(args.perturbation)
    _, map2 = _map_for(args, other)
    P = _pair_from(args, bmap)
    rob = robustness_check(map2, P)
    out = {"pair": P.to_json(), "perturbation": args.perturbation if not args.perturbed else None,
           "robustness": rob.to_json(), "indices_equivalent": None, "per_dimension": None}
    if not (P.validity.ok and rob.validity.ok):
        out["note"] = "pair is not a filtration pair for both maps; indices not compared"
        _emit(out, args.out)
        return SIGNAL
    if bmap.grid is not None:
        m1 = induced_map(bmap, P.N, P.L).matrices
        m2 = induced_map(map2, P.N, P.L).matrices
        per = [shift_equivalent_rational(a, b) for a, b in zip(m1, m2)]
        out["per_dimension"] = per
        out["indices_equivalent"] = all(per)
        out["index"] = [[[int(x) for x in row] for row in m] for m in m1]
        out["index_perturbed"] = [[[int(x) for x in row] for row in m] for m in m2]
    _emit(out, args.out)
    return OK


def cmd_invariant(args) -> int:
    system, bmap = _map_for(args)
    N = bmap.vertices
    S = inv(bmap, N)
    out = {"size": len(S), "boxes": sorted(S), "isolating": is_isolating_neighborhood(bmap, N),
           "vertices": len(N)}
    _emit(out, args.out)
    return OK


def cmd_pair(args) -> int:
    system, bmap = _map_for(args)
    P = _pair_from(args, bmap)
    out = P.to_json()
    out["invariant_size"] = len(inv(bmap, P.difference))
    _emit(out, args.out)
    return OK if P.validity.ok else SIGNAL


# -- wiring --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="conley", description="Discrete Conley index of box-map dynamics.")
    ap.add_argument("--version", action="version", version=f"conley {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def system_cmd(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--system", required=True, help="system JSON file")
        p.add_argument("--depth", type=int, default=None)
        p.add_argument("--padding", type=float, default=None)
        p.add_argument("--budget", type=int, default=DEFAULT_BOX_BUDGET, help="maximum box count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--extra-layers", type=int, default=0,
                       help="thicken the exit collar by this many box layers")
        p.set_defaults(func=func)
        return p

    p = system_cmd("analyze", cmd_analyze, "full index and Morse pipeline")
    p.add_argument("--mode", choices=("chain", "poset"), default="chain")
    p.add_argument("--dot", default=None)
    p.add_argument("--interval-budget", type=int, default=DEFAULT_INTERVAL_BUDGET)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings")

    p = system_cmd("morse", cmd_morse, "Morse graph and Morse set filtration")
    p.add_argument("--mode", choices=("chain", "poset"), default="chain")
    p.add_argument("--dot", default=None)
    p.add_argument("--interval-budget", type=int, default=DEFAULT_INTERVAL_BUDGET)

    p = system_cmd("continue", cmd_continue, "check a pair and its index under perturbation")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--perturbation", type=float, default=0.0,
                   help="constant added to the map's values")
    g.add_argument("--perturbed", default=None, help="system JSON of the perturbed map")
    p.add_argument("--pair", default=None, help="pair JSON to test instead of computing one")

    system_cmd("invariant", cmd_invariant, "maximal invariant set of the whole grid")
    p = system_cmd("pair", cmd_pair, "filtration pair")
    p.add_argument("--pair", default=None, help="pair JSON to validate instead of computing one")

    p = sub.add_parser("shifteq", help="shift equivalence of two matrices")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--witness", default=None, help="witness JSON to verify")
    p.add_argument("--witness-out", default=None, help="write a rational witness here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_shifteq)
    return ap


def _fail(exc, code) -> int:
    sys.stderr.write(json.dumps(error_json(exc), sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(exc, USAGE)
    try:
        return args.func(args)
    except (RefineRequired, DefectiveFiltration, NonrectangularImage) as exc:
        return _fail(exc, SIGNAL)
    except (ConleyError, OSError, ValueError, KeyError, TypeError) as exc:
        return _fail(exc, USAGE)


if __name__ == "__main__":
    sys.exit(main())
