"""Penner, Fock and Kashaev coordinates on a decorated fat graph.

Conventions.  At a vertex v the half-edge in position k (counterclockwise
from the mark) carries label e_{k+1}.  The triangle side lengths entering
the Kashaev pair are numbered so that l^v_j is the length of the edge
e^v_{j+1}; with that numbering the Kashaev pair, the Fock reconstruction
and the flip maps fit together.  lambda-lengths are sqrt(2) * exp(l).

Kashaev-space vectors use the basis (q_v for v in order, p_v for v in
order), vertices ordered by label.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import EdgePath, PathError, turning_signs


@dataclass
class PennerVector:
    l: np.ndarray

    @property
    def lam(self):
        return np.sqrt(2.0) * np.exp(self.l)

    @classmethod
    def from_lambda(cls, lam):
        return cls(np.log(np.asarray(lam, float) / np.sqrt(2.0)))


@dataclass
class FockVector:
    z: np.ndarray


@dataclass
class KashaevVector:
    q: np.ndarray
    p: np.ndarray

    @property
    def flat(self):
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_flat(cls, x):
        n = len(x) // 2
        return cls(np.asarray(x[:n], float), np.asarray(x[n:], float))


@dataclass
class LinearFunctional:
    coeffs: np.ndarray
    basis: str
    const: float = 0.0

    def __call__(self, x):
        return self.const + float(np.dot(self.coeffs, x))

    def __neg__(self):
        return LinearFunctional(-self.coeffs, self.basis, -self.const)


@dataclass
class PoissonForm:
    matrix: np.ndarray
    basis: str
    legend: list

    def bracket(self, f, g):
        return f @ self.matrix @ g

    def to_json(self):
        return {"basis": self.basis, "legend": self.legend,
                "matrix": self.matrix.astype(int).tolist()}


def vertex_index(graph):
    return {v: i for i, v in enumerate(graph.vertices)}


def kashaev_legend(graph):
    vs = graph.vertices
    return [f"q{v}" for v in vs] + [f"p{v}" for v in vs]


# ---- Penner -> Fock / Kashaev --------------------------------------------

def fock_from_penner(graph, penner):
    l = np.asarray(getattr(penner, "l", penner), float)
    z = np.zeros(graph.n_edges)
    for e, pair in enumerate(graph.edges):
        for h in pair:
            z[e] += l[graph.edge(graph.next_ccw(h))] - l[graph.edge(graph.prev_ccw(h))]
    return FockVector(z)


def triangle_lengths(graph, penner, v):
    """(l^v_1, l^v_2, l^v_3) at vertex v."""
    l = np.asarray(getattr(penner, "l", penner), float)
    e = [graph.edge_label(v, k) for k in range(3)]
    return l[e[1]], l[e[2]], l[e[0]]


def kashaev_pair(l1, l2, l3):
    return l3 - l2, l1 - l2


def kashaev_from_penner(graph, penner):
    vs = graph.vertices
    q, p = np.zeros(len(vs)), np.zeros(len(vs))
    for i, v in enumerate(vs):
        q[i], p[i] = kashaev_pair(*triangle_lengths(graph, penner, v))
    return KashaevVector(q, p)


# ---- Kashaev -> Fock ------------------------------------------------------

def vertex_contribution(k):
    """Coefficients (dq, dp) of the label-e_{k+1} contribution at a vertex."""
    return ((0, 1), (-1, 0), (1, -1))[k]


def fock_embedding(graph):
    """Integer matrix J with z_hat = J @ (q, p)."""
    idx = vertex_index(graph)
    n = len(idx)
    J = np.zeros((graph.n_edges, 2 * n), dtype=np.int64)
    for e, pair in enumerate(graph.edges):
        for h in pair:
            i = idx[graph.vertex(h)]
            dq, dp = vertex_contribution(graph.pos(h))
            J[e, i] += dq
            J[e, n + i] += dp
    return J


def fock_from_kashaev(graph, kash):
    return FockVector(fock_embedding(graph) @ kash.flat)


# ---- constraints ----------------------------------------------------------

_PAIR_CASE = {frozenset((2, 0)): (-1, 0), frozenset((1, 2)): (0, 1),
              frozenset((0, 1)): (1, -1)}


def constraint_h(graph, cycle):
    """Coefficient vector of h_c over the Kashaev basis (integers)."""
    if not cycle.closed:
        raise PathError("constraint needs a closed path")
    if not cycle.reduced:
        raise PathError("constraint needs a reduced path")
    idx = vertex_index(graph)
    n = len(idx)
    h = np.zeros(2 * n, dtype=np.int64)
    signs = turning_signs(cycle, "ccw")
    s = cycle.steps
    for i, step in enumerate(s):
        arrive, leave = graph.twin(step), s[(i + 1) % len(s)]
        key = frozenset((graph.pos(arrive), graph.pos(leave)))
        if key not in _PAIR_CASE:
            raise PathError("consecutive edges do not form a corner")
        dq, dp = _PAIR_CASE[key]
        j = idx[graph.vertex(arrive)]
        h[j] += signs[i] * dq
        h[n + j] += signs[i] * dp
    return LinearFunctional(h, "kashaev")


def fock_count(graph, cycle):
    """Edge multiplicity vector of a path, so that f_c = count @ z."""
    c = np.zeros(graph.n_edges, dtype=np.int64)
    for e in cycle.edges:
        c[e] += 1
    return c


def constraint_f(graph, fock, loop):
    z = np.asarray(getattr(fock, "z", fock), float)
    return float(fock_count(graph, loop) @ z)


# ---- Poisson structures ---------------------------------------------------

def kashaev_form(graph):
    n = graph.n_vertices
    O = np.zeros((2 * n, 2 * n), dtype=np.int64)
    O[n:, :n] = np.eye(n, dtype=np.int64)
    O[:n, n:] = -np.eye(n, dtype=np.int64)
    return PoissonForm(O, "kashaev-canonical", kashaev_legend(graph))


def _side(graph, x, y):
    """+1 if y is the first edge to the right of x at their vertex, -1 if left."""
    if y == graph.prev_ccw(x):
        return 1
    if y == graph.next_ccw(x):
        return -1
    return 0


def poisson_matrix_fock(graph):
    E = graph.n_edges
    n = np.zeros((E, E), dtype=np.int64)
    for e in range(E):
        for f in range(E):
            if e == f or graph.is_loop(e) or graph.is_loop(f):
                continue
            ends_e = {graph.vertex(h): h for h in graph.edges[e]}
            ends_f = {graph.vertex(h): h for h in graph.edges[f]}
            common = sorted(set(ends_e) & set(ends_f))
            if not common:
                continue
            sides = [_side(graph, ends_e[v], ends_f[v]) for v in common]
            if len(common) == 2:
                n[e, f] = 2 * sides[0] if sides[0] == sides[1] else 0
            else:
                n[e, f] = sides[0]
    return PoissonForm(n, "fock-wp", [f"z{e}" for e in range(E)])


def wp_two_form_penner(graph):
    """-sum over triangles of (dl1^dl2 + dl2^dl3 + dl3^dl1)."""
    E = graph.n_edges
    w = np.zeros((E, E), dtype=np.int64)
    for v in graph.vertices:
        es = [graph.edge_label(v, k) for k in range(3)]
        for k in range(3):
            a, b = es[k], es[(k + 1) % 3]
            w[a, b] -= 1
            w[b, a] += 1
    return PoissonForm(w, "penner-wp-two-form", [f"l{e}" for e in range(E)])


def gauge_vectors(graph):
    """One direction d(p) per boundary component, as a vector on edges."""
    out = np.zeros((len(graph.faces), graph.n_edges), dtype=np.int64)
    for e, (a, b) in enumerate(graph.edges):
        out[graph.face_of[a], e] += 1
        out[graph.face_of[b], e] += 1
    return out


def gauge_shift(graph, penner, d):
    l = np.asarray(getattr(penner, "l", penner), float)
    return PennerVector(l + np.asarray(d, float) @ gauge_vectors(graph))


# ---- splitting ------------------------------------------------------------

@dataclass
class SplittingReport:
    dim_W: int
    dim_C: int
    dim_B: int
    dim_N: int
    restricted_form: np.ndarray
    intersection: np.ndarray
    matches_intersection: bool
    expected: dict

    @property
    def ok(self):
        return (self.matches_intersection and self.dim_W == self.expected["W"]
                and self.dim_C == self.expected["C"] and self.dim_N == self.expected["N"])

    def to_json(self):
        return {"dim_W": self.dim_W, "dim_C": self.dim_C, "dim_B": self.dim_B,
                "dim_N": self.dim_N, "expected": self.expected,
                "restricted_form": self.restricted_form.tolist(),
                "intersection": self.intersection.tolist(),
                "matches_intersection": self.matches_intersection, "ok": self.ok}


def _rank(m):
    return int(np.linalg.matrix_rank(np.asarray(m, float))) if np.size(m) else 0


def kashaev_splitting(graph, cycles, intersection=None):
    """Dimensions of the constraint subspaces and the restricted form.

    With the normalisations used here the constraint functionals pair to
    twice the intersection form: Omega(h_a, h_b) = 2 I(a, b).
    """
    from .surface import intersection_number
    H = np.array([constraint_h(graph, c).coeffs for c in cycles], dtype=np.int64)
    k = len(cycles)
    if _rank(H) < k:
        raise ValueError("supplied cycles are not independent (rank deficiency)")
    O = kashaev_form(graph).matrix
    R = H @ O @ H.T
    if intersection is None:
        intersection = np.array([[intersection_number(a, b) for b in cycles] for a in cycles])
    intersection = np.asarray(intersection, dtype=np.int64)
    # radical of the restricted form: combinations of h's central in C
    _, s, vt = np.linalg.svd(R.astype(float)) if k else (None, np.array([]), np.zeros((0, 0)))
    null = vt[np.sum(s > 1e-9):] if k else np.zeros((0, 0))
    B = null @ H if len(null) else np.zeros((0, H.shape[1]))
    N = np.vstack([B, B @ O]) if len(B) else B
    g, s_ = graph.genus, graph.boundaries
    if g is None:
        g, s_ = graph.euler_genus(), len(graph.faces)
    return SplittingReport(
        dim_W=2 * graph.n_vertices, dim_C=_rank(H), dim_B=len(null), dim_N=_rank(N),
        restricted_form=R, intersection=intersection,
        matches_intersection=bool(np.array_equal(R, 2 * intersection)),
        expected={"W": 8 * g - 8 + 4 * s_, "C": 2 * g + s_ - 1, "N": 2 * s_ - 2})
