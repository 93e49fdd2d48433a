"""Ptolemy moves on decorated fat graphs and coordinate transport.

Moves:
  rot v       advance the mark at v one step counterclockwise
  rotinv v    inverse rotation
  perm v w    exchange the labels v and w
  flip v w    flip the edge e = e3 at v = e1 at w

Before a flip, v reads (a, d, e) and w reads (e, c, b) from their marks.
Afterwards v reads (a, e', b) and w reads (d, c, e').  Edge ids are kept:
the new diagonal reuses the id of e.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .coords import (FockVector, KashaevVector, PennerVector, fock_from_kashaev,
                     fock_from_penner, kashaev_from_penner, vertex_index)
from .surface import Move


class MoveError(ValueError):
    pass


def softplus(x):
    return np.logaddexp(0.0, x)


# ---- graph moves ----------------------------------------------------------

@dataclass
class FlipContext:
    v: int
    w: int
    e: int
    a: int
    b: int
    c: int
    d: int


def flip_context(graph, v, w):
    if v == w:
        raise MoveError("flip on a loop edge is unsupported")
    if v not in graph.corners or w not in graph.corners:
        raise MoveError(f"unknown vertex in flip ({v},{w})")
    ha, hd, he = graph.corners[v]
    ge, gc, gb = graph.corners[w]
    if graph.twin(he) != ge:
        raise MoveError(f"flip ({v},{w}) needs e3 at {v} to be e1 at {w}")
    E = graph.edge
    return FlipContext(v, w, E(he), E(ha), E(gb), E(gc), E(hd))


def flip_graph(graph, v, w):
    flip_context(graph, v, w)
    ha, hd, he = graph.corners[v]
    ge, gc, gb = graph.corners[w]
    corners = dict(graph.corners)
    corners[v] = (ha, he, gb)
    corners[w] = (hd, gc, ge)
    return graph.replace(corners)


def rotate_graph(graph, v, k=1):
    if v not in graph.corners:
        raise MoveError(f"unknown vertex {v}")
    hs = graph.corners[v]
    k %= 3
    corners = dict(graph.corners)
    corners[v] = hs[k:] + hs[:k]
    return graph.replace(corners)


def permute_graph(graph, v, w):
    if v not in graph.corners or w not in graph.corners:
        raise MoveError(f"unknown vertex in permutation ({v},{w})")
    corners = dict(graph.corners)
    corners[v], corners[w] = graph.corners[w], graph.corners[v]
    return graph.replace(corners)


# ---- coordinate transport -------------------------------------------------

def transport_penner(ctx, penner):
    """l_e' from lam_e' lam_e = lam_a lam_c + lam_b lam_d."""
    l = np.array(getattr(penner, "l", penner), float)
    new = np.logaddexp(l[ctx.a] + l[ctx.c], l[ctx.b] + l[ctx.d]) - l[ctx.e]
    l[ctx.e] = new
    return PennerVector(l)


def ptolemy_lambda(lam_a, lam_b, lam_c, lam_d, lam_e):
    return (lam_a * lam_c + lam_b * lam_d) / lam_e


def transport_fock(ctx, fock):
    """Shear update: a, c gain log(1 + e^{z_e}), b, d lose log(1 + e^{-z_e})."""
    z = np.array(getattr(fock, "z", fock), float)
    ze = z[ctx.e]
    up, down = softplus(ze), softplus(-ze)
    out = z.copy()
    out[ctx.a] += up
    out[ctx.c] += up
    out[ctx.b] -= down
    out[ctx.d] -= down
    out[ctx.e] = -ze
    return FockVector(out)


def A_map(q, p):
    return p - q, -q


def A_inv_map(q, p):
    return -p, q - p


def T_map(qv, pv, qw, pw):
    """T_vw in log coordinates U = e^q, V = e^p."""
    s = np.logaddexp(qv + pw, pv)
    return qv + qw, s, qw + pv - s, pw - s


def transport_kashaev(graph, move, kash):
    idx = vertex_index(graph)
    q, p = np.array(kash.q, float), np.array(kash.p, float)
    if move.op in ("rot", "rotinv"):
        i = idx[move.v]
        f = A_map if move.op == "rot" else A_inv_map
        q[i], p[i] = f(q[i], p[i])
    elif move.op == "flip":
        i, j = idx[move.v], idx[move.w]
        q[i], p[i], q[j], p[j] = T_map(q[i], p[i], q[j], p[j])
    elif move.op == "perm":
        i, j = idx[move.v], idx[move.w]
        q[[i, j]], p[[i, j]] = q[[j, i]], p[[j, i]]
    return KashaevVector(q, p)


@dataclass
class MoveApplication:
    graph_in: object
    move: Move
    graph_out: object
    coords: dict = field(default_factory=dict)


def apply_move(graph, move, coords=None):
    """Apply one move; coords may hold 'penner', 'fock', 'kashaev'."""
    coords = dict(coords or {})
    out = dict(coords)
    if move.op == "flip":
        ctx = flip_context(graph, move.v, move.w)
        g2 = flip_graph(graph, move.v, move.w)
        if "penner" in coords:
            out["penner"] = transport_penner(ctx, coords["penner"])
        if "fock" in coords:
            out["fock"] = transport_fock(ctx, coords["fock"])
    elif move.op == "rot":
        g2 = rotate_graph(graph, move.v, 1)
    elif move.op == "rotinv":
        g2 = rotate_graph(graph, move.v, -1)
    elif move.op == "perm":
        g2 = permute_graph(graph, move.v, move.w)
    else:
        raise MoveError(f"unknown move {move.op!r}")
    if "kashaev" in coords:
        out["kashaev"] = transport_kashaev(graph, move, coords["kashaev"])
    return MoveApplication(graph, move, g2, out)


def apply_word(graph, word, coords=None):
    for m in word:
        app = apply_move(graph, m, coords)
        graph, coords = app.graph_out, app.coords
    return graph, coords


def all_coords(graph, penner):
    return {"penner": PennerVector(np.asarray(penner, float)),
            "fock": fock_from_penner(graph, penner),
            "kashaev": kashaev_from_penner(graph, penner)}


# ---- relations -------------------------------------------------------------

def F(v, w):
    return Move("flip", v, w)


def R(v):
    return Move("rot", v)


def Rinv(v):
    return Move("rotinv", v)


def P(v, w):
    return Move("perm", v, w)


# each entry: name, number of vertex arguments, builder -> (lhs, rhs) in
# application order (rightmost factor of the composition first)
RELATIONS = {
    "cube": (1, lambda v: ([R(v), R(v), R(v)], [])),
    "commute": (4, lambda a, b, c, d: ([F(c, d), F(a, b)], [F(a, b), F(c, d)])),
    "pentagon": (3, lambda u, v, w: ([F(u, v), F(u, w), F(v, w)], [F(v, w), F(u, v)])),
    "rotflip": (2, lambda v, w: ([F(v, w), Rinv(v), R(w)], [Rinv(v), R(w), F(w, v)])),
    "inversion": (2, lambda v, w: ([F(v, w), R(v), F(w, v)], [R(v), R(w), P(v, w)])),
}


@dataclass
class RelationVerdict:
    name: str
    word: dict
    graph_identity: bool
    max_deviation: float
    phase: complex = 1.0
    skipped: str | None = None
    samples: int = 0

    @property
    def ok(self):
        return self.skipped is None and self.graph_identity and self.max_deviation <= 1e-12

    def to_json(self):
        return {"relation": self.name, "word": self.word,
                "graph_identity": self.graph_identity,
                "max_deviation": float(self.max_deviation),
                "phase": [float(np.real(self.phase)), float(np.imag(self.phase))],
                "samples": self.samples, "skipped": self.skipped, "ok": self.ok}


def _word_json(word):
    return [m.to_json() for m in word]


def _try(graph, word):
    try:
        return apply_word(graph, word)[0]
    except MoveError:
        return None


def redecorations(graph):
    """All decorations of the graph obtained by rotating marks."""
    vs = graph.vertices
    for shifts in itertools.product(range(3), repeat=len(vs)):
        g = graph
        for v, k in zip(vs, shifts):
            if k:
                g = rotate_graph(g, v, k)
        yield g


def find_configurations(graph, name, limit=4):
    """Decorated graphs and vertex arguments on which both sides apply."""
    nargs, build = RELATIONS[name]
    found = []
    for g in redecorations(graph):
        for args in itertools.permutations(g.vertices, nargs):
            lhs, rhs = build(*args)
            if _try(g, lhs) is not None and _try(g, rhs) is not None:
                found.append((g, args))
                break
        if len(found) >= limit:
            break
    return found


def coord_deviation(g1, c1, g2, c2):
    emap = g1.match(g2)
    if emap is None:
        return np.inf
    idx = list(emap)
    tgt = [emap[e] for e in idx]
    dev = 0.0
    for key in ("penner", "fock"):
        a = getattr(c1[key], "l" if key == "penner" else "z")
        b = getattr(c2[key], "l" if key == "penner" else "z")
        dev = max(dev, float(np.max(np.abs(a[idx] - b[tgt]))))
    dev = max(dev, float(np.max(np.abs(c1["kashaev"].flat - c2["kashaev"].flat))))
    return dev


def check_relation(graph, name, args, penner_samples):
    lhs, rhs = RELATIONS[name][1](*args)
    word = {"lhs": _word_json(lhs), "rhs": _word_json(rhs), "args": list(args)}
    gl = apply_word(graph, lhs)[0]
    gr = apply_word(graph, rhs)[0]
    ident = gl.match(gr) is not None
    dev = 0.0
    for l in penner_samples:
        c0 = all_coords(graph, l)
        g1, c1 = apply_word(graph, lhs, c0)
        g2, c2 = apply_word(graph, rhs, c0)
        dev = max(dev, coord_deviation(g1, c1, g2, c2))
        # transported Kashaev data stays consistent with transported Penner data
        for g, c in ((g1, c1), (g2, c2)):
            k = kashaev_from_penner(g, c["penner"])
            dev = max(dev, float(np.max(np.abs(k.flat - c["kashaev"].flat))))
            z = fock_from_kashaev(g, c["kashaev"]).z
            dev = max(dev, float(np.max(np.abs(z - c["fock"].z))))
    return RelationVerdict(name, word, ident, dev, 1.0, None, len(penner_samples))


def verify_ptolemy_relations(graph, seeds, scale=1.0, names=None):
    """Run every relation on every configuration found, over seeded samples."""
    out = []
    samples = [np.random.default_rng(s).normal(scale=scale, size=graph.n_edges) for s in seeds]
    for name in names or RELATIONS:
        confs = find_configurations(graph, name)
        if not confs:
            out.append(RelationVerdict(name, {}, False, 0.0, 1.0,
                                       "vertex configuration not available"))
            continue
        for g, args in confs:
            out.append(check_relation(g, name, args, samples))
    return out


# ---- curves through moves --------------------------------------------------

def transport_path(graph, move, path):
    """Homotopic closed path on the graph after the move."""
    from .surface import EdgePath, reduce_path
    if move.op != "flip":
        return path
    g2 = flip_graph(graph, move.v, move.w)
    he = graph.corners[move.v][2]
    ediag = graph.edge(he)
    keep = [h for h in path.steps if graph.edge(h) != ediag]
    if not keep:
        raise MoveError("path runs only along the flipped edge")
    out = []
    for i, h in enumerate(keep):
        nxt = keep[(i + 1) % len(keep)]
        out.append(h)
        a = g2.vertex(g2.twin(h))
        if a != g2.vertex(nxt):
            # cross the new diagonal from a
            out.append(next(x for x in g2.corners[a] if g2.edge(x) == ediag))
    return reduce_path(EdgePath(g2, tuple(out), True))


def flippable_word(graph, e):
    """Rotations that bring edge e into flip position, followed by the flip."""
    x, y = graph.edges[e]
    v, w = graph.vertex(x), graph.vertex(y)
    if v == w:
        raise MoveError("loop edge")
    word = [R(v)] * ((graph.pos(x) + 1) % 3) + [R(w)] * (graph.pos(y) % 3)
    word.append(F(v, w))
    return word


def random_flip_word(graph, rng, n_flips):
    word, g = [], graph
    for _ in range(n_flips):
        cand = [e for e in range(g.n_edges) if not g.is_loop(e)]
        e = cand[int(rng.integers(len(cand)))]
        w = flippable_word(g, e)
        g = apply_word(g, w)[0]
        word += w
    return word
