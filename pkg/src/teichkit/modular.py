"""Markings of surfaces, the modular groupoid moves and their relations.

A marking is a pants decomposition in which each trinion has a distinguished
outgoing boundary (leg 0) and two incoming ones (legs 1, 2, in that cyclic
order).  Besides this combinatorial data every marking carries a realization
in the free fundamental group of the surface:

* ``loops[(t, i)]`` is the loop around leg i of trinion t, read in the frame of
  t, with ``loops[t,0] loops[t,1] loops[t,2] = 1``;
* ``deltas[(t, i)]`` for a glued leg is the loop obtained by walking from the
  frame of t across the curve to the frame of the partner leg (t', j), so that
  ``loops[t,i] = delta loops[t',j]^-1 delta^-1``.

The deltas record the seams of the marking graph, so twists along cut curves
are visible.  Two markings are equal when they agree combinatorially and
their realizations differ only by a change of frame of each trinion.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from . import words as W
from .surface import SurfaceSpec


class ModularError(ValueError):
    pass


# ---------------------------------------------------------------- markings


@dataclass
class Marking:
    genus: int
    trinions: dict            # id -> (out, in1, in2) curve names
    boundary: tuple           # boundary curve names
    loops: dict = field(default_factory=dict)
    deltas: dict = field(default_factory=dict)
    rank: int = 0

    def __post_init__(self):
        self.trinions = {int(t): tuple(c) for t, c in self.trinions.items()}
        self.boundary = tuple(self.boundary)
        self._index()

    def _index(self):
        where = {}
        for t in sorted(self.trinions):
            for i, c in enumerate(self.trinions[t]):
                where.setdefault(c, []).append((t, i))
        for c, legs in where.items():
            n = 1 if c in self.boundary else 2
            if len(legs) != n:
                raise ModularError(f"curve {c!r} appears on {len(legs)} legs, expected {n}")
        missing = set(self.boundary) - set(where)
        if missing:
            raise ModularError(f"boundary curves {sorted(missing)} not used")
        self._where = where

    # combinatorics
    @property
    def surface(self):
        return SurfaceSpec(self.genus, len(self.boundary))

    def legs(self, c):
        return self._where[c]

    def curve(self, t, i):
        return self.trinions[t][i]

    def is_boundary(self, c):
        return c in self.boundary

    def partner(self, t, i):
        c = self.trinions[t][i]
        if c in self.boundary:
            return None
        a, b = self._where[c]
        return b if a == (t, i) else a

    @property
    def internal_curves(self):
        return sorted(c for c in self._where if c not in self.boundary)

    def outgoing_of(self, c):
        return [leg for leg in self._where[c] if leg[1] == 0]

    def copy(self):
        return Marking(self.genus, dict(self.trinions), self.boundary,
                       dict(self.loops), dict(self.deltas), self.rank)

    def to_json(self):
        return {
            "genus": self.genus,
            "trinions": [{"id": t, "out": c[0], "in": [c[1], c[2]]}
                         for t, c in sorted(self.trinions.items())],
            "curves": [{"id": c, "boundary": c in self.boundary}
                       for c in sorted(self._where)],
        }

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or "trinions" not in data:
            raise ModularError("marking JSON needs a 'trinions' list")
        tr = {}
        for item in data["trinions"]:
            try:
                tid = int(item["id"])
                ins = list(item["in"])
                if len(ins) != 2:
                    raise ModularError(f"trinion {tid} needs exactly two incoming curves")
                tr[tid] = (str(item["out"]), str(ins[0]), str(ins[1]))
            except (KeyError, TypeError) as exc:
                raise ModularError(f"malformed trinion entry {item!r}") from exc
        counts = {}
        for c in tr.values():
            for x in c:
                counts[x] = counts.get(x, 0) + 1
        bnd = []
        for item in data.get("curves", []):
            if isinstance(item, dict):
                if item.get("boundary"):
                    bnd.append(str(item["id"]))
            elif counts.get(str(item)) == 1:
                bnd.append(str(item))
        if not data.get("curves"):
            bnd = [c for c, n in counts.items() if n == 1]
        bnd = sorted(set(bnd), key=_natural)
        M = len(tr)
        s = len(bnd)
        if (M + 2 - s) % 2:
            raise ModularError("trinion and boundary counts are inconsistent")
        genus = data.get("genus", (M + 2 - s) // 2)
        return realize(tr, bnd, genus)

    # realization helpers
    def frame_loops(self, t):
        return tuple(self.loops[(t, i)] for i in range(3))


def _natural(name):
    digits = "".join(ch for ch in name if ch.isdigit())
    return (name.rstrip("0123456789"), int(digits) if digits else -1, name)


def realize(trinions, boundary, genus=None):
    """Attach loops and seams to a purely combinatorial marking.

    Each trinion starts with two free generators; gluing along a spanning tree
    identifies loops, every remaining gluing adds a generator for its seam.
    The relations are solved by Tietze elimination, leaving a free basis.
    """
    tr = {int(t): tuple(c) for t, c in trinions.items()}
    M = len(tr)
    if genus is None:
        genus = (M + 2 - len(boundary)) // 2
    mk = Marking(genus, tr, boundary)
    if M != 2 * genus - 2 + len(boundary):
        raise ModularError("trinion count does not match the surface")
    ids = sorted(tr)
    loops = {}
    for n, t in enumerate(ids):
        a, b = 2 * n + 1, 2 * n + 2
        loops[(t, 0)] = (-b, -a)
        loops[(t, 1)] = (a,)
        loops[(t, 2)] = (b,)
    next_gen = 2 * M + 1
    deltas = {}

    def substitute(g, w):
        nonlocal loops, deltas
        wi = W.inv(w)
        def sub(word):
            out = []
            for x in word:
                if x == g:
                    out.extend(w)
                elif x == -g:
                    out.extend(wi)
                else:
                    out.append(x)
            return W.reduce(out)
        loops = {k: sub(v) for k, v in loops.items()}
        deltas = {k: sub(v) for k, v in deltas.items()}

    def solve(relator, avoid):
        rel = W.reduce(relator)
        counts = {}
        for x in rel:
            counts[abs(x)] = counts.get(abs(x), 0) + 1
        cands = sorted(g for g, n in counts.items() if n == 1 and g not in avoid)
        if not cands:
            raise ModularError("could not realize marking (no eliminable generator)")
        g = cands[-1]
        k = next(i for i, x in enumerate(rel) if abs(x) == g)
        U, eps, V = rel[:k], rel[k], rel[k + 1:]
        val = W.mul(W.inv(U), W.inv(V))
        substitute(g, val if eps > 0 else W.inv(val))

    seen = {ids[0]}
    queue = deque([ids[0]])
    tree = set()
    while queue:
        t = queue.popleft()
        for i in range(3):
            pr = mk.partner(t, i)
            if pr is None or pr[0] in seen:
                continue
            seen.add(pr[0])
            queue.append(pr[0])
            tree.add(frozenset([(t, i), pr]))
            deltas[(t, i)] = ()
            deltas[pr] = ()
            # loops[t,i] = loops[pr]^-1; eliminate a generator of the child
            child = {2 * ids.index(pr[0]) + 1, 2 * ids.index(pr[0]) + 2}
            avoid = set(range(1, next_gen)) - child
            solve(W.mul(loops[(t, i)], loops[pr]), avoid)
    if len(seen) != M:
        raise ModularError("marking is not connected")
    for c in mk.internal_curves:
        a, b = mk.legs(c)
        if frozenset([a, b]) in tree:
            continue
        d = next_gen
        next_gen += 1
        deltas[a] = (d,)
        deltas[b] = (-d,)
        # loops[a] = d loops[b]^-1 d^-1
        solve(W.mul(W.inv(loops[a]), (d,), W.inv(loops[b]), (-d,)), {d})
    used = sorted({abs(x) for w in list(loops.values()) + list(deltas.values()) for x in w})
    ren = {g: k + 1 for k, g in enumerate(used)}
    rn = lambda w: tuple(ren[x] if x > 0 else -ren[-x] for x in w)
    mk.loops = {k: rn(v) for k, v in loops.items()}
    mk.deltas = {k: rn(v) for k, v in deltas.items()}
    mk.rank = len(used)
    return mk


def standard_marking(genus, boundaries):
    """A caterpillar marking: one-holed tori hanging off a chain of trinions."""
    spec = SurfaceSpec(genus, boundaries)
    if spec.M <= 0:
        raise ModularError("surface admits no pants decomposition")
    bnd = [f"b{k + 1}" for k in range(boundaries)]
    tr = {}
    leaves = list(bnd[:-1])
    nt = 0
    for h in range(genus):
        o = f"o{h + 1}"
        tr[nt] = (o, f"a{h + 1}", f"a{h + 1}")
        nt += 1
        leaves.append(o)
    if len(leaves) == 1:
        only = leaves[0]
        t = next(t for t, c in tr.items() if c[0] == only)
        tr[t] = (bnd[-1],) + tr[t][1:]
    else:
        cur = leaves[0]
        for k, leaf in enumerate(leaves[1:]):
            last = k == len(leaves) - 2
            out = bnd[-1] if last else f"c{k + 1}"
            tr[nt] = (out, cur, leaf)
            nt += 1
            cur = out
    return realize(tr, bnd, genus)


# ---------------------------------------------------------------- moves

MOVE_NAMES = ("Z", "Zinv", "B", "Binv", "F", "Finv", "S", "Sinv", "T", "Tinv", "perm")
_INVERSE = {"Z": "Zinv", "Zinv": "Z", "B": "Binv", "Binv": "B", "F": "Finv",
            "Finv": "F", "S": "Sinv", "Sinv": "S", "T": "Tinv", "Tinv": "T",
            "perm": "perm"}


@dataclass(frozen=True)
class ModMove:
    op: str
    p: int
    q: int | None = None

    def __post_init__(self):
        if self.op not in MOVE_NAMES:
            raise ModularError(f"unknown modular move {self.op!r}")
        if self.op in ("F", "Finv", "perm") and self.q is None:
            raise ModularError(f"{self.op} needs two trinions")

    @property
    def support(self):
        return frozenset([self.p] if self.q is None else [self.p, self.q])

    def inverse(self):
        return ModMove(_INVERSE[self.op], self.p, self.q)

    def __str__(self):
        args = f"{self.p}" if self.q is None else f"{self.p},{self.q}"
        return f"{self.op}({args})"

    def to_json(self):
        d = {"op": self.op, "p": self.p}
        if self.q is not None:
            d["q"] = self.q
        return d


def Zm(p):
    return ModMove("Z", p)


def Zi(p):
    return ModMove("Zinv", p)


def Bm(p):
    return ModMove("B", p)


def Bi(p):
    return ModMove("Binv", p)


def Fm(p, q):
    return ModMove("F", p, q)


def Fi(p, q):
    return ModMove("Finv", p, q)


def Sm(p):
    return ModMove("S", p)


def Si(p):
    return ModMove("Sinv", p)


def Tm(p):
    return ModMove("T", p)


def Ti(p):
    return ModMove("Tinv", p)


def Perm(p, q):
    return ModMove("perm", p, q)


def inverse_word(word):
    return [m.inverse() for m in reversed(word)]


# Composites, each listed in application order (rightmost factor first).
def A_word(p, q):
    """A_pq = Z_q^-1 F_pq Z_q^-1 Z_p."""
    return [Zm(p), Zi(q), Fm(p, q), Zi(q)]


def Bprime_word(p):
    """B'_p = Z_p^-1 B_p Z_p^-1."""
    return [Zi(p), Bm(p), Zi(p)]


def T_word(p):
    """T_p, the Dehn twist about incoming leg 1 of p.

    The product Z_p^-1 B_p Z_p B_p of half-twists only permutes the legs
    of p in the realized model, so the twist is a primitive here.
    """
    return [Tm(p)]


def Bqp_word(q, p):
    """B_qp = Z_q^-1 F_qp^-1 B'_q F_pq^-1 Z_q^-1 (pq)."""
    return [Perm(p, q), Zi(q), Fi(p, q)] + Bprime_word(q) + [Fi(q, p), Zi(q)]


def Sqp_word(q, p):
    """S_qp = (F_qp Z_q)^-1 S_p (F_qp Z_q)."""
    conj = [Zm(q), Fm(q, p)]
    return conj + [Sm(p)] + inverse_word(conj)


COMPOSITES = {
    "A": (A_word, 2), "Bprime": (Bprime_word, 1), "T": (T_word, 1),
    "Bqp": (Bqp_word, 2), "Sqp": (Sqp_word, 2),
}


def _fresh(mk, stem="c"):
    used = set(mk._where)
    k = 1
    while f"{stem}{k}" in used:
        k += 1
    return f"{stem}{k}"


def _rebuild(mk, new_tr, sources, extra_loops=None, extra_deltas=None):
    """Assemble a marking from relabelled legs.

    ``sources[(t, i)] = (old_leg, g)`` means the new leg is the old one seen
    through the frame change g (loop g x g^-1).  Legs created by the move are
    given in ``extra_loops`` / ``extra_deltas``.
    """
    loops = dict(extra_loops or {})
    deltas = dict(extra_deltas or {})
    back = {}
    for leg, (old, g) in sources.items():
        loops[leg] = W.conj(g, mk.loops[old])
        back[old] = (leg, g)
    for leg, (old, g) in sources.items():
        pr = mk.partner(*old)
        if pr is None:
            continue
        new_pr, h = back.get(pr, (pr, ()))
        deltas[leg] = W.mul(g, mk.deltas[old], W.inv(h))
    for t in mk.trinions:
        for i in range(3):
            leg = (t, i)
            if t in {x[0] for x in sources} or leg in loops:
                continue
            loops[leg] = mk.loops[leg]
            pr = mk.partner(t, i)
            if pr is not None:
                _, h = back.get(pr, (pr, ()))
                deltas[leg] = W.mul(mk.deltas[leg], W.inv(h))
    tr = dict(mk.trinions)
    tr.update(new_tr)
    out = Marking(mk.genus, tr, mk.boundary, loops, deltas, mk.rank)
    return out


def _need(cond, msg):
    if not cond:
        raise ModularError(msg)


def apply_modular_move(mk, move):
    """Apply one elementary move; composites go through apply_modular_word."""
    if isinstance(move, str):
        move = parse_modular_moves([move])[0]
    op, p, q = move.op, move.p, move.q
    _need(p in mk.trinions, f"trinion {p} does not exist")
    if q is not None:
        _need(q in mk.trinions, f"trinion {q} does not exist")
        _need(p != q, f"{op} needs two distinct trinions")
    c = mk.trinions[p]
    x = mk.frame_loops(p)
    if op in ("Z", "Zinv"):
        k = 2 if op == "Z" else 1
        src = {(p, i): ((p, (i + k) % 3), ()) for i in range(3)}
        return _rebuild(mk, {p: tuple(c[(i + k) % 3] for i in range(3))}, src)
    if op == "B":
        src = {(p, 0): ((p, 0), ()), (p, 1): ((p, 2), x[1]), (p, 2): ((p, 1), ())}
        return _rebuild(mk, {p: (c[0], c[2], c[1])}, src)
    if op == "Binv":
        src = {(p, 0): ((p, 0), ()), (p, 1): ((p, 2), ()), (p, 2): ((p, 1), W.inv(x[2]))}
        return _rebuild(mk, {p: (c[0], c[2], c[1])}, src)
    if op == "perm":
        sw = {p: q, q: p}
        tr = {sw.get(t, t): v for t, v in mk.trinions.items()}
        ren = lambda leg: (sw.get(leg[0], leg[0]), leg[1])
        out = Marking(mk.genus, tr, mk.boundary,
                      {ren(k): v for k, v in mk.loops.items()},
                      {ren(k): v for k, v in mk.deltas.items()}, mk.rank)
        return out
    if op == "F":
        _need(mk.partner(p, 0) == (q, 1),
              f"F({p},{q}) needs the outgoing curve of {p} to be the first incoming curve of {q}")
        D = mk.deltas[(p, 0)]
        Di = W.inv(D)
        y = mk.frame_loops(q)
        z = W.mul(Di, x[2], D, y[2])
        cq = mk.trinions[q]
        new = _fresh(mk)
        tr = {p: (cq[0], c[1], new), q: (new, c[2], cq[2])}
        src = {(p, 0): ((q, 0), ()), (p, 1): ((p, 1), Di),
               (q, 1): ((p, 2), Di), (q, 2): ((q, 2), ())}
        return _rebuild(mk, tr, src, {(p, 2): z, (q, 0): W.inv(z)},
                        {(p, 2): (), (q, 0): ()})
    if op == "Finv":
        _need(mk.partner(p, 2) == (q, 0),
              f"F^-1({p},{q}) needs the outgoing curve of {q} to be the second incoming curve of {p}")
        D = mk.deltas[(p, 2)]
        y = mk.frame_loops(q)
        yb = W.conj(D, y[1])
        w = W.mul(x[1], yb)
        cq = mk.trinions[q]
        new = _fresh(mk)
        tr = {p: (new, c[1], cq[1]), q: (c[0], new, cq[2])}
        src = {(p, 1): ((p, 1), ()), (p, 2): ((q, 1), D),
               (q, 0): ((p, 0), ()), (q, 2): ((q, 2), D)}
        return _rebuild(mk, tr, src, {(p, 0): W.inv(w), (q, 1): w},
                        {(p, 0): (), (q, 1): ()})
    if op in ("S", "Sinv"):
        _need(mk.partner(p, 1) == (p, 2),
              f"S({p}) needs the incoming curves of {p} glued to each other (one-holed torus)")
        alpha = x[1]
        beta = W.inv(mk.deltas[(p, 1)])
        if op == "S":
            x1 = W.inv(beta)
            D = W.mul(beta, W.inv(alpha), W.inv(beta))
        else:
            x1 = W.mul(alpha, beta, W.inv(alpha))
            D = alpha
        x2 = W.mul(W.inv(D), W.inv(x1), D)
        new = _fresh(mk)
        tr = {p: (c[0], new, new)}
        src = {(p, 0): ((p, 0), ())}
        return _rebuild(mk, tr, src, {(p, 1): x1, (p, 2): x2},
                        {(p, 1): D, (p, 2): W.inv(D)})
    if op in ("T", "Tinv"):
        pr = mk.partner(p, 1)
        out = mk.copy()
        if pr is None:
            return out
        x1 = x[1] if op == "T" else W.inv(x[1])
        out.deltas[(p, 1)] = W.mul(x1, mk.deltas[(p, 1)])
        out.deltas[pr] = W.inv(out.deltas[(p, 1)])
        return out
    raise ModularError(f"unknown move {op}")


def apply_modular_word(mk, word):
    for m in word:
        mk = apply_modular_move(mk, m)
    return mk


def parse_modular_moves(items):
    """Moves from strings like "F(0,1)" or dicts {"op","p","q"}; composites expand."""
    out = []
    for it in items:
        if isinstance(it, ModMove):
            out.append(it)
            continue
        if isinstance(it, dict):
            op, args = it.get("op"), [it.get("p")] + ([it["q"]] if "q" in it else [])
        else:
            s = str(it).replace(" ", "")
            if "(" not in s or not s.endswith(")"):
                raise ModularError(f"cannot parse move {it!r}")
            op, rest = s[:-1].split("(", 1)
            args = [a for a in rest.split(",") if a]
        try:
            args = [int(a) for a in args]
        except (TypeError, ValueError) as exc:
            raise ModularError(f"bad trinion ids in {it!r}") from exc
        if op in COMPOSITES:
            fn, n = COMPOSITES[op]
            if len(args) != n:
                raise ModularError(f"{op} takes {n} trinion ids")
            out.extend(fn(*args))
        else:
            out.append(ModMove(op, *args))
    return out


# ---------------------------------------------------------------- identity


def equivalent(m1, m2):
    """Equality of markings up to a change of frame of every trinion."""
    if set(m1.trinions) != set(m2.trinions) or m1.boundary != m2.boundary:
        return False
    for t in m1.trinions:
        for i in range(3):
            b1 = m1.partner(t, i)
            if b1 != m2.partner(t, i):
                return False
            if b1 is None and m1.curve(t, i) != m2.curve(t, i):
                return False
    g = {}
    for t in m1.trinions:
        sol = W.simultaneous_conjugator(list(zip(m1.frame_loops(t), m2.frame_loops(t))))
        if sol is None:
            return False
        g[t] = sol
    for (t, i), d in m1.deltas.items():
        t2, _ = m1.partner(t, i)
        if W.mul(g[t], d, W.inv(g[t2])) != m2.deltas[(t, i)]:
            return False
    return True


def combinatorial_key(mk):
    """Canonical form of the decorated trinion graph up to relabelling.

    The order of the two incoming legs is not part of the key.
    """
    ids = sorted(mk.trinions)
    best = None
    for perm in itertools.permutations(range(len(ids))):
        pos = {t: perm[k] for k, t in enumerate(ids)}
        rows = [None] * len(ids)
        for t in ids:
            codes = []
            for i in range(3):
                pr = mk.partner(t, i)
                if pr is None:
                    codes.append(("b", mk.curve(t, i)))
                else:
                    codes.append(("t", pos[pr[0]], pr[1] == 0))
            rows[pos[t]] = (codes[0], tuple(sorted(codes[1:])))
        key = tuple(rows)
        if best is None or key < best:
            best = key
    return best


def canonical_form(mk):
    """Marking JSON-ready canonical form (lexicographically minimal encoding)."""
    return combinatorial_key(mk)


# ---------------------------------------------------------------- enumeration

ENUM_LIMIT = {"genus": 2, "boundaries": 5}


def _neighbours(mk):
    ids = sorted(mk.trinions)
    for p in ids:
        for op in ("Z", "B", "S"):
            yield ModMove(op, p)
        for q in ids:
            if q != p:
                yield ModMove("F", p, q)
                yield ModMove("Finv", p, q)


def enumerate_markings(surface, bound=None):
    """Markings of a surface up to relabelling and seams, one per canonical form.

    Breadth-first search over the Z, B, F and S moves starting from the
    standard marking.  ``bound`` caps the number of markings produced.
    """
    if isinstance(surface, str):
        surface = SurfaceSpec.parse(surface)
    g, s = surface.genus, surface.boundaries
    if g > ENUM_LIMIT["genus"] or s > ENUM_LIMIT["boundaries"]:
        raise ModularError(f"enumeration limited to g <= 2, s <= 5 (got g={g}, s={s})")
    m0 = standard_marking(g, s)
    seen = {combinatorial_key(m0)}
    queue = deque([m0])
    count = 0
    while queue:
        mk = queue.popleft()
        yield mk
        count += 1
        if bound is not None and count >= bound:
            return
        for mv in _neighbours(mk):
            try:
                nxt = apply_modular_move(mk, mv)
            except ModularError:
                continue
            key = combinatorial_key(nxt)
            if key not in seen:
                seen.add(key)
                queue.append(nxt)


# ---------------------------------------------------------------- admissibility


@dataclass
class Admissibility:
    admissible: bool
    witness: str | None = None

    def __bool__(self):
        return self.admissible

    def to_json(self):
        return {"admissible": self.admissible, "witness": self.witness}


def incoming_pairs(mk):
    """The set A of curves that are incoming for both adjacent trinions."""
    return [c for c in mk.internal_curves if not any(i == 0 for _, i in mk.legs(c))]


def is_admissible(mk):
    for c in mk.internal_curves:
        if all(i == 0 for _, i in mk.legs(c)):
            return Admissibility(False, f"curve {c} is outgoing for both trinions")
    cut = set(incoming_pairs(mk))
    # components after cutting along A: trinions joined by the remaining curves
    parent = {t: t for t in mk.trinions}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t
    for c in mk.internal_curves:
        if c not in cut:
            (a, _), (b, _) = mk.legs(c)
            parent[find(a)] = find(b)
    comps = {}
    for t in mk.trinions:
        comps.setdefault(find(t), []).append(t)
    for members in comps.values():
        ms = set(members)
        n_tr = len(members)
        inner = sum(1 for c in mk.internal_curves
                    if c not in cut and mk.legs(c)[0][0] in ms)
        holes = 3 * n_tr - 2 * inner
        # Euler characteristic -n_tr = 2 - 2g - holes
        genus = (2 + n_tr - holes) // 2
        if genus > 0:
            return Admissibility(False, f"component {sorted(members)} has genus {genus}")
    return Admissibility(True)


# ---------------------------------------------------------------- relations


@dataclass
class RelationVerdict:
    name: str
    surface: str
    checked: int = 0
    failures: int = 0
    combinatorial_failures: int = 0
    example: dict | None = None
    skipped: str | None = None

    @property
    def ok(self):
        return self.skipped is None and self.checked > 0 and self.failures == 0

    def to_json(self):
        return {"relation": self.name, "surface": self.surface,
                "checked": self.checked, "failures": self.failures,
                "combinatorial_failures": self.combinatorial_failures,
                "example": self.example, "skipped": self.skipped, "ok": self.ok}


def _rel_words():
    """name -> (arity, builder(args) -> (lhs, rhs)) in application order."""
    S = lambda p: [Sm(p)]
    T = T_word
    iw = inverse_word
    return {
        "zrel": (1, lambda p: ([Zm(p)] * 3, [])),
        "hexa": (2, lambda p, q: ([Fm(p, q), Bm(p), Fm(q, p)],
                                  [Bm(p), Fm(p, q), Bm(q), Perm(p, q)])),
        "hexb": (2, lambda p, q: ([Fm(p, q), Bi(p), Fm(q, p)],
                                  [Bi(p), Fm(p, q), Bi(q), Perm(p, q)])),
        "hexc": (2, lambda p, q: (A_word(q, p) + A_word(p, q), [Perm(p, q)])),
        "pentagon": (3, lambda p, q, r: ([Fm(p, q), Fm(p, r), Fm(q, r)],
                                         [Fm(q, r), Fm(p, q)])),
        "onetor_a": (1, lambda p: (S(p) + S(p), Bprime_word(p))),
        "onetor_b": (1, lambda p: (S(p) + T(p) + S(p), iw(T(p)) + S(p) + iw(T(p)))),
        "twotor": (2, lambda p, q: (Bqp_word(q, p),
                                    Sqp_word(p, q) + T(p) + iw(T(q)) + iw(Sqp_word(q, p)))),
    }


RELATION_SURFACES = {
    "zrel": [(0, 3)], "hexa": [(0, 4)], "hexb": [(0, 4)], "hexc": [(0, 4)],
    "pentagon": [(0, 5)], "onetor_a": [(1, 1)], "onetor_b": [(1, 1)],
    "twotor": [(1, 2)], "locality": [(0, 5), (1, 2)],
}
RELATION_NAMES = tuple(RELATION_SURFACES)


def _locality_pairs(mk):
    ids = sorted(mk.trinions)
    singles = [ModMove(op, p) for p in ids for op in ("Z", "B", "S", "T")]
    pairs = [ModMove(op, p, q) for p in ids for q in ids if p != q for op in ("F", "perm")]
    moves = singles + pairs
    for m1, m2 in itertools.combinations(moves, 2):
        if not (m1.support & m2.support):
            yield [m1, m2], [m2, m1]


def _instances(mk, name, words):
    if name == "locality":
        yield from _locality_pairs(mk)
        return
    n, fn = words[name]
    for args in itertools.permutations(sorted(mk.trinions), n):
        yield fn(*args)


def check_word_pair(mk, lhs, rhs):
    """(exact, combinatorial) equality of lhs(mk) and rhs(mk), or None if not applicable."""
    try:
        a = apply_modular_word(mk, lhs)
        b = apply_modular_word(mk, rhs)
    except ModularError:
        return None
    return equivalent(a, b), combinatorial_key(a) == combinatorial_key(b)


def verify_modular_relations(surface=None, relations=None, bound=None):
    """Run relation words on every enumerated marking of the relevant surfaces.

    ``exact`` equality compares the realized markings (loops and seams up to a
    change of frame), which sees twists; the combinatorial comparison only
    uses the canonical form.  A verdict passes when every applicable instance
    is exact.
    """
    if isinstance(surface, str):
        surface = SurfaceSpec.parse(surface)
    names = list(relations or RELATION_NAMES)
    words = _rel_words()
    pools = {}
    verdicts = []
    for name in names:
        if name not in RELATION_SURFACES:
            raise ModularError(f"unknown relation {name!r}")
        targets = RELATION_SURFACES[name]
        if surface is not None:
            key = (surface.genus, surface.boundaries)
            if key not in targets:
                verdicts.append(RelationVerdict(name, f"g{key[0]}s{key[1]}",
                                                skipped="relation not supported on this surface"))
                continue
            targets = [key]
        for g, s in targets:
            tag = f"g{g}s{s}"
            if (g, s) not in pools:
                pools[(g, s)] = list(enumerate_markings(SurfaceSpec(g, s), bound))
            v = RelationVerdict(name, tag)
            for mk in pools[(g, s)]:
                for lhs, rhs in _instances(mk, name, words):
                    res = check_word_pair(mk, lhs, rhs)
                    if res is None:
                        continue
                    exact, comb = res
                    v.checked += 1
                    if not comb:
                        v.combinatorial_failures += 1
                    if not exact:
                        v.failures += 1
                        if v.example is None:
                            v.example = {"marking": mk.to_json(),
                                         "lhs": [str(m) for m in lhs],
                                         "rhs": [str(m) for m in rhs]}
            if v.checked == 0:
                v.skipped = "no marking with the required configuration"
            verdicts.append(v)
    return verdicts


# ---------------------------------------------------------------- fat graphs
#
# Local pieces (each boundary curve of a piece is crossed by one edge):
#   trinion with internal outgoing curve c: vertex v_c, one edge per leg;
#   trinion with boundary outgoing curve: a single edge joining its two
#     incoming legs, the boundary face on either side;
#   curve c incoming on both sides: annulus with vertices u, w joined by
#     the core edges e1, e2, spokes of u and w leaving to opposite sides;
#   incoming boundary curve: vertex with a loop around the boundary face.

# orientation choices of the pieces, fixed by the canonical bracket check
_VC_ORDER = (1, 2, 0)       # ccw order of the legs at v_c, mark on the first
_ANNULUS = (0, 0, 0)        # (u order flag, w order flag, swap e1/e2)


@dataclass
class CurveData:
    kind: str               # "trinion", "annulus", "boundary_in", "boundary_out"
    vertex: int | None = None           # v_c
    trinion_edges: tuple = ()           # (e_{c,0}, e_{c,1}, e_{c,2})
    annulus_edges: tuple = ()           # (e1, e2)
    path: tuple = ()                    # closed graph path homotopic to c

    def to_json(self):
        d = {"kind": self.kind, "path": list(self.path)}
        if self.vertex is not None:
            d["vertex"] = self.vertex
            d["trinion_edges"] = list(self.trinion_edges)
        if self.annulus_edges:
            d["annulus_edges"] = list(self.annulus_edges)
        return d


@dataclass
class MarkingGraph:
    """phi_sigma together with the dictionary curve -> graph data."""
    graph: object
    curves: dict
    marking: Marking

    def to_json(self):
        return {"graph": self.graph.to_json(),
                "curves": {c: d.to_json() for c, d in sorted(self.curves.items())}}


def curve_kind(mk, c):
    legs = mk.legs(c)
    if mk.is_boundary(c):
        return "boundary_out" if legs[0][1] == 0 else "boundary_in"
    outs = sum(1 for _, i in legs if i == 0)
    return {0: "annulus", 1: "trinion", 2: "double_out"}[outs]


def fat_graph_from_marking(mk, vc_order=None, annulus=None):
    from .surface import EdgePath, FatGraph

    adm = is_admissible(mk)
    if not adm:
        raise ModularError(f"marking is not admissible: {adm.witness}")
    vc_order = vc_order or _VC_ORDER
    au, aw, swap = annulus or _ANNULUS
    corners = {}
    edges = []
    counter = itertools.count()
    inner, outer = {}, {}
    vert_of_trinion = {}
    nv = itertools.count()
    # trinion pieces
    for t in sorted(mk.trinions):
        if mk.is_boundary(mk.curve(t, 0)):
            inner[(t, 1)] = ("wire", (t, 2))
            inner[(t, 2)] = ("wire", (t, 1))
            continue
        hs = [next(counter) for _ in range(3)]
        v = next(nv)
        corners[v] = tuple(hs[k] for k in vc_order)
        vert_of_trinion[t] = (v, hs)
        for i in range(3):
            inner[(t, i)] = ("h", hs[i])
    curves = {}
    core = {}
    for c in sorted(mk._where, key=_natural):
        kind = curve_kind(mk, c)
        legs = mk.legs(c)
        if kind == "boundary_in":
            la, sb, lb = next(counter), next(counter), next(counter)
            corners[next(nv)] = (la, sb, lb)
            edges.append((la, lb))
            outer[legs[0]] = ("h", sb)
            curves[c] = CurveData(kind, path=(la,))
        elif kind == "boundary_out":
            outer[legs[0]] = None
            curves[c] = CurveData(kind)
        elif kind == "trinion":
            a, b = legs
            outer[a] = ("leg", b)
            outer[b] = ("leg", a)
            curves[c] = CurveData(kind)
        else:
            a, b = legs
            su, x1, x2, sw, y1, y2 = (next(counter) for _ in range(6))
            corners[next(nv)] = (su, x1, x2) if au else (su, x2, x1)
            corners[next(nv)] = (sw, y1, y2) if aw else (sw, y2, y1)
            outer[a] = ("h", su)
            outer[b] = ("h", sw)
            pair = [(x1, y1), (y2, x2)]
            if swap:
                pair = pair[::-1]
            core[c] = pair
            curves[c] = CurveData(kind)
    # resolve spokes and trinion legs into edges, recording crossed legs
    def inward(leg, seen):
        seen.append(leg)
        kind, x = inner[leg]
        return x if kind == "h" else across(x, seen)

    def across(leg, seen):
        seen.append(leg)
        o = outer[leg]
        if o is None:
            raise ModularError(f"leg {leg} leads into a boundary")
        kind, x = o
        return x if kind == "h" else inward(x, seen)

    paired = set(h for e in edges for h in e)
    for pair in core.values():
        for a, b in pair:
            paired.update((a, b))
    starts = [(x, across, leg) for leg, (kind, x) in sorted(inner.items()) if kind == "h"]
    starts += [(o[1], inward, leg) for leg, o in sorted(outer.items())
               if o is not None and o[0] == "h"]
    crossing = {}
    for h, step, leg in starts:
        if h in paired:
            continue
        seen = []
        g = step(leg, seen)
        for lg in seen:
            crossing[lg] = h
        edges.append((h, g))
        paired.update((h, g))
    for c in sorted(core, key=_natural):
        edges.extend(core[c])
    graph = FatGraph(corners, tuple(edges), mk.genus, len(mk.boundary))
    # dictionary
    for c, d in curves.items():
        if d.kind == "annulus":
            (h1, _), (h2, _) = core[c]
            d.annulus_edges = (graph.edge(h1), graph.edge(h2))
            d.path = (h1, h2)
        elif d.kind == "trinion":
            t = next(t for t, i in mk.legs(c) if i == 0)
            v, hs = vert_of_trinion[t]
            d.vertex = v
            d.trinion_edges = tuple(graph.edge(h) for h in hs)
            d.path = _side_walk(graph, hs[0])
        elif d.kind == "boundary_out":
            (t, _), = mk.legs(c)
            h = crossing[(t, 1)]
            d.path = next(tuple(f) for f in graph.faces if h in f)
    for c, d in curves.items():
        if d.path:
            EdgePath(graph, tuple(d.path), True)
    return MarkingGraph(graph, curves, mk)


def _side_walk(graph, h0):
    """Closed walk around the side of v = vertex(h0) away from the edge of h0."""
    start = graph.next_ccw(h0)
    out = [start]
    h = start
    for _ in range(4 * len(graph.edges) + 4):
        nxt = graph.next_ccw(graph.twin(h))
        if nxt == h0:
            nxt = graph.next_ccw(h0)
        if nxt == start:
            return tuple(out)
        out.append(nxt)
        h = nxt
    raise ModularError("side walk did not close")
