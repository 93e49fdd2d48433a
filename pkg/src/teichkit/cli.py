"""teichkit command line.

Every subcommand writes one JSON report (stdout or --out) with a versioned
header echoing the configuration.  Exit codes: 0 all checks passed, 1 some
check failed, 2 malformed input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__

SCHEMA = "teichkit.report/1"


class InputError(Exception):
    """Malformed or inconsistent user input (exit code 2)."""


# ---- json helpers ---------------------------------------------------------

def _clean(obj):
    """Plain JSON types; non-finite floats become strings so output stays valid JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _load_graph(path):
    from .surface import FatGraph, GraphError
    try:
        return FatGraph.from_json(_load_json(path))
    except GraphError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _vector(data, n, what):
    """Edge- or vertex-indexed vector from a list or a map keyed by ids."""
    if isinstance(data, dict):
        for key in ("l", "z", "values"):
            if key in data and isinstance(data[key], (list, dict)):
                return _vector(data[key], n, what)
        try:
            items = {int(k): float(v) for k, v in data.items()}
        except (TypeError, ValueError) as exc:
            raise InputError(f"{what}: keys must be ids and values numbers") from exc
        if sorted(items) != list(range(n)):
            raise InputError(f"{what}: expected ids 0..{n - 1}")
        return np.array([items[i] for i in range(n)])
    try:
        v = np.asarray(data, float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}: not a numeric vector") from exc
    if v.shape != (n,):
        raise InputError(f"{what}: expected {n} entries, got shape {v.shape}")
    return v


def _keyed(v):
    return {str(i): float(x) for i, x in enumerate(v)}


def _threads():
    raw = os.environ.get("TEICHKIT_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"TEICHKIT_THREADS must be an integer, got {raw!r}") from exc


# ---- subcommands ------------------------------------------------------------
#
# Each returns (result dict, passed).

def cmd_validate(args):
    from .surface import SurfaceSpec, validate_fat_graph
    graph = _load_graph(args.graph)
    spec = SurfaceSpec.parse(args.surface) if args.surface else None
    rep = validate_fat_graph(graph, spec)
    return rep.to_json(), rep.valid


def cmd_coords(args):
    from .coords import (constraint_f, fock_from_penner, kashaev_from_penner,
                         kashaev_legend)
    from .surface import face_path
    graph = _load_graph(args.graph)
    l = _vector(_load_json(args.penner), graph.n_edges, "penner")
    z = fock_from_penner(graph, l).z
    k = kashaev_from_penner(graph, l)
    vs = graph.vertices
    res = {"penner": _keyed(l), "lambda": _keyed(np.sqrt(2.0) * np.exp(l)), "fock": _keyed(z),
           "kashaev": {"q": {str(v): float(x) for v, x in zip(vs, k.q)},
                       "p": {str(v): float(x) for v, x in zip(vs, k.p)},
                       "legend": kashaev_legend(graph)},
           "puncture_constraints": [constraint_f(graph, z, face_path(graph, i))
                                    for i in range(len(graph.faces))]}
    return res, True


def cmd_transport(args):
    moves = _load_json(args.moves)
    if args.marking:
        from .modular import Marking, ModularError, apply_modular_word, parse_modular_moves
        try:
            mk = Marking.from_json(_load_json(args.marking))
            word = parse_modular_moves(moves)
        except ModularError as exc:
            raise InputError(str(exc)) from exc
        try:
            out = apply_modular_word(mk, word)
        except ModularError as exc:
            return {"error": str(exc)}, False
        return {"marking": out.to_json(), "moves": [str(m) for m in word]}, True
    if not args.graph:
        raise InputError("transport needs --graph or --marking")
    from .coords import PennerVector
    from .ptolemy import MoveError, all_coords, apply_word
    from .surface import parse_moves
    graph = _load_graph(args.graph)
    try:
        word = parse_moves(moves)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"moves: {exc}") from exc
    coords = None
    if args.penner:
        coords = all_coords(graph, _vector(_load_json(args.penner), graph.n_edges, "penner"))
    try:
        g2, c2 = apply_word(graph, word, coords)
    except MoveError as exc:
        return {"error": str(exc)}, False
    res = {"graph": g2.to_json(), "moves": [m.to_json() for m in word]}
    if c2:
        pen = c2["penner"]
        pen = pen.l if isinstance(pen, PennerVector) else pen
        res["penner"] = _keyed(pen)
        res["fock"] = _keyed(c2["fock"].z)
        vs = g2.vertices
        res["kashaev"] = {"q": {str(v): float(x) for v, x in zip(vs, c2["kashaev"].q)},
                          "p": {str(v): float(x) for v, x in zip(vs, c2["kashaev"].p)}}
    return res, True


def _curves(data):
    if isinstance(data, list):
        return {"curve": data}
    if isinstance(data, dict):
        if "curves" in data:
            return {str(k): (v["path"] if isinstance(v, dict) else v)
                    for k, v in data["curves"].items()}
        if "path" in data:
            return {str(data.get("id", "curve")): data["path"]}
    raise InputError("curve JSON must be a path array, {'path': [...]} or {'curves': {...}}")


def cmd_lengths(args):
    from .geometry import EllipticError, length_of_curve
    from .surface import EdgePath, PathError
    graph = _load_graph(args.graph)
    z = _vector(_load_json(args.fock), graph.n_edges, "fock")
    out = {}
    for name, steps in sorted(_curves(_load_json(args.curve)).items()):
        try:
            path = EdgePath(graph, tuple(int(h) for h in steps), True)
        except (PathError, TypeError, ValueError) as exc:
            raise InputError(f"curve {name}: {exc}") from exc
        lv = length_of_curve(graph, z, path)
        try:
            out[name] = lv.to_json()
        except EllipticError:
            out[name] = {"trace": lv.trace, "class": lv.kind, "length": None}
    return out, True


def cmd_modular(args):
    from .modular import ModularError, RELATION_NAMES, verify_modular_relations
    rels = args.relations.split(",") if args.relations else None
    if rels:
        alias = {"hexagon": ["hexa", "hexb", "hexc"], "onetor": ["onetor_a", "onetor_b"]}
        rels = [r for x in rels for r in alias.get(x, [x])]
        unknown = [r for r in rels if r not in RELATION_NAMES]
        if unknown:
            raise InputError(f"unknown relations {unknown}; known: {list(RELATION_NAMES)}")
    try:
        vs = verify_modular_relations(args.surface, rels, args.bound)
    except (ModularError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    ran = [v for v in vs if not v.skipped]
    return {"verdicts": [v.to_json() for v in vs]}, bool(ran) and all(v.ok for v in ran)


def _parse_range(text):
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise InputError(f"--tabulate expects start:stop:count, got {text!r}") from exc


def cmd_qdilog(args):
    from . import qdilog
    try:
        qdilog.BParameter(args.b)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.tabulate:
        xs = _parse_range(args.tabulate) + 1j * args.imag
        try:
            rows = qdilog.tabulate(xs, args.b, args.which)
        except qdilog.PoleError as exc:
            raise InputError(str(exc)) from exc
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x_re", "x_im", f"{args.which}_re", f"{args.which}_im", "est_error"])
        for x, re, im, err in rows:
            w.writerow([repr(x.real), repr(x.imag), repr(re), repr(im), repr(err)])
        return buf.getvalue(), True
    ident = qdilog.identity_residuals(args.b)
    res = {}
    fails = [k for k, v in sorted(ident.items()) if not v <= args.tol]
    for which in ("eb", "sb"):
        m = qdilog.check_residue(args.b, which=which)
        exp = qdilog.expected_residue(args.b, which)
        err = abs(m.value - exp)
        res[which] = {"measured": m.value, "expected": exp, "error": err,
                      "est_error": m.est_error}
        if not err <= 1e-6:
            fails.append(f"residue_{which}")
    return {"identities": ident, "residues": res, "tolerance": args.tol,
            "failures": fails}, not fails


def _qcheck_kwargs(name, args):
    kw = {}
    if args.b is not None:
        kw["b"] = args.b
    if args.grid_n is not None:
        kw["N"] = args.grid_n
    if args.half_width is not None:
        kw["L"] = args.half_width
    if name in ("relations", "intertwiner", "dehn"):
        kw["seed"] = args.seed
    return kw


def cmd_qcheck(args):
    from . import qrep
    names = list(qrep.CHECKS) if args.check == "all" else [args.check]
    if args.b is not None and not 0.0 < args.b <= 1.0:
        raise InputError("--b must lie in (0, 1]")
    if args.grid_n is not None and (args.grid_n < 32 or args.grid_n & (args.grid_n - 1)):
        raise InputError("--grid-n must be a power of two >= 32")

    def run(name):
        return qrep.CHECKS[name](**_qcheck_kwargs(name, args))

    workers = min(_threads(), len(names))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(run, names))
    else:
        reports = [run(n) for n in names]
    return {"checks": reports}, all(r["passed"] for r in reports)


def cmd_all(args):
    from .acceptance import run_criteria
    t = time.perf_counter()
    verdicts, times = run_criteria(seed=args.seed, workers=_threads())
    total = time.perf_counter() - t
    for v in verdicts:
        print(f"criterion {v['id']:2d} {v['name']:<20s} {'PASS' if v['passed'] else 'FAIL'}"
              f"  ({times[v['id']]:.1f} s)", file=sys.stderr)
    print(f"total {total:.1f} s", file=sys.stderr)
    return {"criteria": verdicts, "within_time_limit": total < 600.0}, all(
        v["passed"] for v in verdicts)


# ---- argument parsing -------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="teichkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"teichkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--out", help="write the report here instead of stdout")
        s.set_defaults(func=fn)
        return s

    s = add("validate", cmd_validate, "check a fat graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--surface", help="expected type, e.g. g1s2")

    s = add("coords", cmd_coords, "Penner -> lambda, Fock and Kashaev coordinates")
    s.add_argument("--graph", required=True)
    s.add_argument("--penner", required=True)

    s = add("transport", cmd_transport, "apply a move word to a graph or a marking")
    s.add_argument("--graph")
    s.add_argument("--marking")
    s.add_argument("--moves", required=True)
    s.add_argument("--penner")

    s = add("lengths", cmd_lengths, "holonomy traces and geodesic lengths")
    s.add_argument("--graph", required=True)
    s.add_argument("--fock", required=True)
    s.add_argument("--curve", required=True)

    s = add("modular", cmd_modular, "modular groupoid relation suites")
    s.add_argument("--surface", help="e.g. g0s5; default: every supported surface")
    s.add_argument("--relations", help="comma separated, e.g. pentagon,hexagon")
    s.add_argument("--bound", type=int, help="cap on enumerated markings")

    s = add("qdilog", cmd_qdilog, "tabulate or check s_b and e_b")
    s.add_argument("--b", type=float, default=0.8)
    s.add_argument("--which", choices=("eb", "sb"), default="eb")
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--tabulate", metavar="START:STOP:COUNT",
                      help="CSV table; write negative starts as --tabulate=-1:1:5")
    mode.add_argument("--check", action="store_true", help="identities and residues")
    s.add_argument("--imag", type=float, default=0.0, help="imaginary part of tabulated points")
    s.add_argument("--tol", type=float, default=1e-8)

    s = add("qcheck", cmd_qcheck, "finite-grid operator checks")
    s.add_argument("--b", type=float)
    s.add_argument("--grid-n", type=int)
    s.add_argument("--half-width", type=float)
    s.add_argument("--check", default="all",
                   choices=("pentagon", "relations", "spectrum", "intertwiner", "dehn",
                            "flipconj", "all"))
    s.add_argument("--seed", type=int, default=0)

    s = add("all", cmd_all, "full acceptance run")
    s.add_argument("--seed", type=int, default=0)
    return p


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "tol") and args.tol <= 0:
            raise InputError("tolerances must be positive")
        result, passed = args.func(args)
    except InputError as exc:
        print(f"teichkit: error: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, str):
        _emit(result, args.out)
    else:
        report = {"schema": SCHEMA, "version": __version__, "command": args.command,
                  "config": _config(args), "passed": passed, "result": result}
        _emit(dumps(report), args.out)
    if not passed:
        print("teichkit: checks failed: " + ", ".join(_failures(result)), file=sys.stderr)
    return 0 if passed else 1


def _failures(result):
    if isinstance(result, dict):
        if "failures" in result and result["failures"]:
            return [str(f) for f in result["failures"]]
        if "criteria" in result:
            return [f"criterion {v['id']} ({v['name']})" for v in result["criteria"]
                    if not v["passed"]]
        if "checks" in result:
            return [f"{r['check']}:{i['name']}" for r in result["checks"]
                    for i in r["items"] if not i["passed"]]
        if "verdicts" in result:
            return [f"{v['relation']}@{v['surface']}" for v in result["verdicts"]
                    if not v.get("ok") and not v.get("skipped")]
        if "error" in result:
            return [result["error"]]
    return ["see report"]


if __name__ == "__main__":
    sys.exit(main())
