"""The acceptance suite: one function per criterion, each returning a JSON-ready verdict.

Verdicts carry no wall-clock values so that reports are byte-identical for a
fixed seed; runtime limits enter only as the boolean ``within_time_limit``.
Measured times are returned separately by :func:`run_criteria`.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import qdilog, qrep
from .coords import constraint_f, fock_from_penner, poisson_matrix_fock
from .geometry import (SHADOW_SIGN, brackets_canonical, classical_lengths, curve_traces,
                       holonomy)
from .modular import (enumerate_markings, fat_graph_from_marking, is_admissible,
                      verify_modular_relations)
from .ptolemy import (A_map, T_map, apply_word, flip_context, flip_graph, flippable_word,
                      random_flip_word, transport_fock, transport_path, transport_penner,
                      verify_ptolemy_relations)
from .surface import (SurfaceSpec, cycle_basis, face_path, standard_graph,
                      validate_fat_graph)

CLASSICAL_SURFACES = ((0, 4), (1, 1))


def _verdict(cid, name, passed, details, limit=None):
    d = {"id": cid, "name": name, "passed": bool(passed), "details": details}
    if limit is not None:
        d["time_limit_s"] = limit
    return d


# ---- 1: Ptolemy relations --------------------------------------------------

def criterion_1(rng, n_seeds=100):
    out, ok_names, bad = [], set(), []
    seeds = [int(s) for s in rng.integers(0, 2 ** 31, n_seeds)]
    for g, s in CLASSICAL_SURFACES:
        graph = standard_graph(g, s)
        for v in verify_ptolemy_relations(graph, seeds):
            d = v.to_json()
            d["surface"] = f"g{g}s{s}"
            out.append(d)
            if v.skipped:
                continue
            (ok_names.add if v.ok else bad.append)(v.name)
    names = {"cube", "commute", "pentagon", "rotflip", "inversion"}
    passed = not bad and ok_names >= names
    return _verdict(1, "ptolemy_relations", passed,
                    {"verdicts": out, "failing": sorted(set(bad)),
                     "covered": sorted(ok_names)}, 10)


# ---- 2: commuting square ---------------------------------------------------

def _random_flip(graph, rng):
    """Rotate marks so a random non-loop edge is flippable; return (graph, v, w)."""
    cand = [e for e in range(graph.n_edges) if not graph.is_loop(e)]
    word = flippable_word(graph, cand[int(rng.integers(len(cand)))])
    g = apply_word(graph, word[:-1])[0]
    return g, word[-1].v, word[-1].w


def criterion_2(rng, n_seeds=100):
    worst = 0.0
    for g, s in CLASSICAL_SURFACES:
        graph = standard_graph(g, s)
        for _ in range(n_seeds):
            l = rng.normal(size=graph.n_edges)
            gg, v, w = _random_flip(graph, rng)
            ctx = flip_context(gg, v, w)
            g2 = flip_graph(gg, v, w)
            lhs = transport_fock(ctx, fock_from_penner(gg, l)).z
            rhs = fock_from_penner(g2, transport_penner(ctx, l)).z
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return _verdict(2, "commuting_square", worst <= 1e-12,
                    {"max_deviation": worst, "tolerance": 1e-12, "samples": 2 * n_seeds}, 5)


# ---- 3: symplecticity ------------------------------------------------------

def _jacobian(f, x, h=1e-5):
    x = np.asarray(x, float)
    cols = []
    for i in range(len(x)):
        d = np.zeros_like(x)
        d[i] = h
        cols.append((np.asarray(f(x + d)) - np.asarray(f(x - d))) / (2 * h))
    return np.array(cols).T


# (q, p) ordering; {p, q} = 1
_OMEGA1 = np.array([[0.0, -1.0], [1.0, 0.0]])
_OMEGA2 = np.kron(np.eye(2), _OMEGA1)


def criterion_3(rng, n_points=20):
    res = {"A": 0.0, "T": 0.0, "fock_flip": 0.0}
    for _ in range(n_points):
        x = rng.normal(size=2)
        J = _jacobian(lambda y: A_map(*y), x)
        res["A"] = max(res["A"], float(np.max(np.abs(J @ _OMEGA1 @ J.T - _OMEGA1))))
        x = rng.normal(size=4)
        J = _jacobian(lambda y: T_map(*y), x)
        res["T"] = max(res["T"], float(np.max(np.abs(J @ _OMEGA2 @ J.T - _OMEGA2))))
    for g, s in CLASSICAL_SURFACES:
        graph = standard_graph(g, s)
        for _ in range(n_points // 2):
            gg, v, w = _random_flip(graph, rng)
            ctx = flip_context(gg, v, w)
            n0 = poisson_matrix_fock(gg).matrix.astype(float)
            n1 = poisson_matrix_fock(flip_graph(gg, v, w)).matrix.astype(float)
            z = rng.normal(size=gg.n_edges)
            J = _jacobian(lambda y: transport_fock(ctx, y).z, z)
            res["fock_flip"] = max(res["fock_flip"], float(np.max(np.abs(J @ n0 @ J.T - n1))))
    return _verdict(3, "symplecticity", max(res.values()) <= 1e-9,
                    {"residuals": res, "tolerance": 1e-9})


# ---- 4: holonomy invariance ------------------------------------------------

def _rel_trace_drift(t0, t1):
    return abs(t1 - t0) / max(1.0, abs(t0))


def criterion_4(rng, n_words=10, max_flips=10):
    drift, n_paths = 0.0, 0
    mismatch = []
    for g, s in CLASSICAL_SURFACES + ((1, 2),):
        graph = standard_graph(g, s)
        for _ in range(n_words):
            z = rng.normal(size=graph.n_edges)
            paths = cycle_basis(graph)
            t0 = [abs(np.trace(holonomy(graph, z, p))) for p in paths]
            word = random_flip_word(graph, rng, int(rng.integers(1, max_flips + 1)))
            gcur, coords, cur = graph, {"fock": z}, list(paths)
            for mv in word:
                cur = [transport_path(gcur, mv, p) for p in cur]
                gcur, coords = apply_word(gcur, [mv], coords)
            t1 = [abs(np.trace(holonomy(gcur, coords["fock"], p))) for p in cur]
            drift = max(drift, max(_rel_trace_drift(a, b) for a, b in zip(t0, t1)))
            n_paths += len(paths)
        # puncture loops: parabolic exactly when f_c = 0
        for z in (fock_from_penner(graph, rng.normal(size=graph.n_edges)).z,
                  rng.normal(size=graph.n_edges)):
            for i in range(len(graph.faces)):
                loop = face_path(graph, i)
                f = constraint_f(graph, z, loop)
                tr = abs(np.trace(holonomy(graph, z, loop)))
                if (abs(tr - 2.0) <= 1e-9) != (abs(f) <= 1e-9):
                    mismatch.append({"surface": f"g{g}s{s}", "face": i, "f": f, "trace": tr})
    return _verdict(4, "holonomy_invariance", drift <= 1e-9 and not mismatch,
                    {"max_relative_trace_drift": drift, "paths": n_paths,
                     "parabolic_mismatches": mismatch, "tolerance": 1e-9})


# ---- 5: length recursion ---------------------------------------------------

def criterion_5(rng, n_seeds=50):
    worst, count = 0.0, 0
    for g, s in CLASSICAL_SURFACES:
        for mk in enumerate_markings(SurfaceSpec(g, s)):
            if not is_admissible(mk):
                continue
            mg = fat_graph_from_marking(mk)
            for _ in range(n_seeds):
                z = rng.normal(size=mg.graph.n_edges)
                tr = curve_traces(mg, z)
                for c, v in classical_lengths(mg, z).items():
                    worst = max(worst, abs(v.trace - tr[c]) / tr[c])
                    count += 1
    return _verdict(5, "length_recursion", worst <= 1e-9,
                    {"max_relative_error": worst, "comparisons": count,
                     "calibration": {"shadow_sign": SHADOW_SIGN}, "tolerance": 1e-9})


# ---- 6: modular relations --------------------------------------------------

def criterion_6(rng=None):
    vs = verify_modular_relations()
    return _verdict(6, "modular_relations", all(v.ok for v in vs),
                    {"verdicts": [v.to_json() for v in vs],
                     "failing": [v.name for v in vs if not v.ok]}, 60)


# ---- 7: phi_sigma ----------------------------------------------------------

PHI_SURFACES = ((0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (2, 1))


def criterion_7(rng=None):
    counts, bad = {}, []
    for g, s in PHI_SURFACES:
        n = 0
        for mk in enumerate_markings(SurfaceSpec(g, s)):
            if not is_admissible(mk):
                continue
            n += 1
            mg = fat_graph_from_marking(mk)
            rep = validate_fat_graph(mg.graph, SurfaceSpec(g, s))
            if not rep.valid or not brackets_canonical(mg):
                bad.append({"surface": f"g{g}s{s}", "marking": mk.to_json(),
                            "validation": rep.failures})
        counts[f"g{g}s{s}"] = n
    return _verdict(7, "phi_sigma", not bad, {"admissible_markings": counts, "failures": bad})


# ---- 8: special functions --------------------------------------------------

def criterion_8(rng=None, bs=(0.6, 0.8, 1.0)):
    ident, res, failing = {}, {}, []
    for b in bs:
        r = qdilog.identity_residuals(b)
        ident[str(b)] = r
        failing += [f"{k}@b={b}" for k, v in sorted(r.items()) if not v <= 1e-8]
        row = {}
        for which in ("eb", "sb"):
            m = qdilog.check_residue(b, which=which)
            exp = qdilog.expected_residue(b, which)
            other = qdilog.expected_residue(b, "sb" if which == "eb" else "eb")
            row[which] = {"measured": qrep.complex_json(m.value),
                          "expected": qrep.complex_json(exp),
                          "error": float(abs(m.value - exp)),
                          "error_vs_swapped_assignment": float(abs(m.value - other)),
                          "est_error": m.est_error}
            if not row[which]["error"] <= 1e-6:
                failing.append(f"residue_{which}@b={b}")
        res[str(b)] = row
    return _verdict(8, "special_functions", not failing,
                    {"identities": ident, "residues": res, "failing": failing,
                     "tolerance": 1e-8, "residue_tolerance": 1e-6}, 30)


# ---- 9-13: quantum checks --------------------------------------------------

def criterion_9(rng=None):
    r = qrep.scalar_pentagon_check()
    return _verdict(9, "scalar_pentagon", r["passed"], r)


def criterion_10(rng):
    r = qrep.relations_check(seed=int(rng.integers(2 ** 31)))
    return _verdict(10, "operator_relations", r["passed"], r, 300)


def criterion_11(rng=None):
    rs = [qrep.spectrum_check(b=b) for b in (0.8, 0.3)]
    return _verdict(11, "spectrum", all(r["passed"] for r in rs), {"runs": rs})


def criterion_12(rng):
    r = qrep.intertwiner_check(seed=int(rng.integers(2 ** 31)))
    return _verdict(12, "intertwiner", r["passed"], r)


def criterion_13(rng):
    r = qrep.dehn_twist_check(seed=int(rng.integers(2 ** 31)))
    return _verdict(13, "dehn_twist", r["passed"], r)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
            9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
            13: criterion_13}


def run_criterion(cid, seed):
    """Run one criterion with its own generator; returns (verdict, seconds)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, cid]))
    t = time.perf_counter()
    v = CRITERIA[cid](rng)
    dt = time.perf_counter() - t
    if "time_limit_s" in v:
        v["within_time_limit"] = bool(dt < v["time_limit_s"])
        v["passed"] = v["passed"] and v["within_time_limit"]
    return v, dt


def run_criteria(ids=None, seed=0, workers=1):
    """Verdicts in id order and the measured seconds per criterion."""
    ids = sorted(ids or CRITERIA)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda c: run_criterion(c, seed), ids))
    else:
        results = [run_criterion(c, seed) for c in ids]
    return [r[0] for r in results], {c: r[1] for c, r in zip(ids, results)}
