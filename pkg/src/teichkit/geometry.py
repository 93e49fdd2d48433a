"""Fuchsian holonomy along graph paths and geodesic length functions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import turning_signs

V_MAT = np.array([[1.0, 1.0], [-1.0, 0.0]])
V_INV = np.array([[0.0, -1.0], [1.0, 1.0]])


def matrix_E(z):
    h = np.exp(0.5 * z)
    return np.array([[0.0, h], [-1.0 / h, 0.0]])


def matrix_V():
    return V_MAT.copy()


def holonomy(graph, fock, path):
    """X = V^{s_r} E(z_r) ... V^{s_1} E(z_1), s = +1 for a left turn."""
    z = np.asarray(getattr(fock, "z", fock), float)
    signs = turning_signs(path, "left")
    X = np.eye(2)
    for e, s in zip(path.edges, signs):
        X = (V_MAT if s > 0 else V_INV) @ matrix_E(z[e]) @ X
    return X


class EllipticError(ValueError):
    pass


@dataclass
class LengthValue:
    trace: float
    kind: str
    tol: float = 1e-9

    @property
    def length(self):
        if self.kind == "elliptic":
            raise EllipticError("elliptic element has no geodesic length")
        if self.kind == "parabolic":
            return 0.0
        return 2.0 * np.arccosh(max(self.trace / 2.0, 1.0 + 1e-15))

    @property
    def L(self):
        return self.trace

    def to_json(self):
        d = {"trace": float(self.trace), "class": self.kind}
        d["length"] = None if self.kind == "elliptic" else float(self.length)
        return d


def classify(trace, tol=1e-9):
    t = abs(float(trace))
    if abs(t - 2.0) <= tol:
        return LengthValue(t, "parabolic", tol)
    return LengthValue(t, "hyperbolic" if t > 2.0 else "elliptic", tol)


def geodesic_length(m, tol=1e-9):
    return classify(np.trace(np.asarray(m)), tol)


def length_of_curve(graph, fock, path):
    return geodesic_length(holonomy(graph, fock, path))


def classical_length_annulus(q, p):
    """Classical shadow of e^{-2 pi b q} + 2 cosh(2 pi b p) with 2 pi b -> 1."""
    return classify(np.exp(-q) + 2.0 * np.cosh(p))


def trinion_L(y2, y1, L1, L2):
    return 2.0 * np.cosh(y2 + y1) + np.exp(-y2) * L1 + np.exp(y1) * L2 + np.exp(y1 - y2)


def classical_length_trinion(y2, y1, L1, L2):
    return classify(trinion_L(y2, y1, L1, L2))


# ---- separated variables on the graph of a marking -------------------------

# The separated variables are linear in the shear coordinates.  Matching the
# annulus and trinion length formulas against holonomy fixes one global sign:
# they are evaluated on SHADOW_SIGN * z.  No additive offset is needed.
SHADOW_SIGN = -1


@dataclass
class AnnulusCoords:
    q: dict                 # curve -> q_c
    p: dict                 # curve -> p_c
    y: dict                 # trinion curve -> (y_{c2}, y_{c1})

    def to_json(self):
        return {"q": {c: float(v) for c, v in sorted(self.q.items())},
                "p": {c: float(v) for c, v in sorted(self.p.items())},
                "y": {c: [float(a), float(b)] for c, (a, b) in sorted(self.y.items())}}


def _path(graph, steps):
    from .surface import EdgePath
    return EdgePath(graph, tuple(steps), True)


def _unit(n, i):
    v = np.zeros(n, dtype=np.int64)
    v[i] = 1
    return v


def separated_functionals(mg):
    """Twice the coefficient vectors of (q_c, p_c) and of y_{c,eps} over z.

    Returns (Q2, P2, Y2) with integer vectors: q_c = SHADOW_SIGN * Q2[c] @ z / 2,
    and Y2[c] = (2 y_{c2}, 2 y_{c1}) likewise.
    """
    from .coords import fock_count

    g, mk = mg.graph, mg.marking
    E = g.n_edges
    f = {c: fock_count(g, _path(g, d.path)) for c, d in mg.curves.items() if d.path}
    Q2, P2, Y2 = {}, {}, {}
    for c, d in mg.curves.items():
        if d.kind == "annulus":
            e1, e2 = d.annulus_edges
            Q2[c] = _unit(E, e1) - _unit(E, e2)
            P2[c] = -(_unit(E, e1) + _unit(E, e2))
        elif d.kind == "trinion":
            t = next(t for t, i in mk.legs(c) if i == 0)
            _, e1, e2 = d.trinion_edges
            y1 = 2 * _unit(E, e1) + f[mk.curve(t, 1)]
            y2 = 2 * _unit(E, e2) + f[mk.curve(t, 2)]
            Y2[c] = (y2, y1)
            Q2[c], P2[c] = y2, -y1
    return Q2, P2, Y2


def canonical_brackets(mg):
    """Integer matrices 4 Omega(p, q), 4 Omega(p, p), 4 Omega(q, q) over internal curves."""
    from .coords import poisson_matrix_fock

    n = poisson_matrix_fock(mg.graph).matrix.astype(np.int64)
    Q2, P2, _ = separated_functionals(mg)
    cs = sorted(Q2)
    E = mg.graph.n_edges
    Qm = np.array([Q2[c] for c in cs], dtype=np.int64).reshape(len(cs), E)
    Pm = np.array([P2[c] for c in cs], dtype=np.int64).reshape(len(cs), E)
    return cs, Pm @ n @ Qm.T, Pm @ n @ Pm.T, Qm @ n @ Qm.T


def brackets_canonical(mg):
    cs, PQ, PP, QQ = canonical_brackets(mg)
    k = len(cs)
    return (np.array_equal(PQ, 4 * np.eye(k, dtype=np.int64))
            and not PP.any() and not QQ.any())


def annulus_coords(mg, fock):
    """(q_c, p_c) for every internal curve of the marking behind mg."""
    z = SHADOW_SIGN * np.asarray(getattr(fock, "z", fock), float)
    Q2, P2, Y2 = separated_functionals(mg)
    return AnnulusCoords({c: 0.5 * (v @ z) for c, v in Q2.items()},
                         {c: 0.5 * (v @ z) for c, v in P2.items()},
                         {c: (0.5 * (a @ z), 0.5 * (b @ z)) for c, (a, b) in Y2.items()})


def curve_traces(mg, fock):
    """|tr X_c| of the graph path of every curve that has one."""
    return {c: abs(float(np.trace(holonomy(mg.graph, fock, _path(mg.graph, d.path)))))
            for c, d in mg.curves.items() if d.path}


def classical_lengths(mg, fock):
    """Lengths of all internal curves from the recursion along the trinion tree.

    Boundary curves enter through their face holonomy; annulus curves use
    the annulus formula; every other curve is computed from the two incoming
    curves of the trinion for which it is outgoing (postorder).
    """
    mk = mg.marking
    ac = annulus_coords(mg, fock)
    L = {}
    for c, d in mg.curves.items():
        if d.kind in ("boundary_in", "boundary_out"):
            L[c] = abs(float(np.trace(holonomy(mg.graph, fock, _path(mg.graph, d.path)))))
        elif d.kind == "annulus":
            L[c] = classical_length_annulus(ac.q[c], ac.p[c]).trace

    def visit(c, depth=0):
        if c in L:
            return L[c]
        if depth > len(mg.curves):
            raise ValueError("cyclic trinion tree")
        t = next(t for t, i in mk.legs(c) if i == 0)
        L1 = visit(mk.curve(t, 1), depth + 1)
        L2 = visit(mk.curve(t, 2), depth + 1)
        y2, y1 = ac.y[c]
        L[c] = trinion_L(y2, y1, L1, L2)
        return L[c]
    for c in mk.internal_curves:
        visit(c)
    return {c: classify(L[c]) for c in mk.internal_curves}
