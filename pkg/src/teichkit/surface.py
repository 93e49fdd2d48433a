"""Decorated trivalent fat graphs, closed edge paths and move words.

A fat graph is stored as a map from vertex label to the triple of its
half-edges in counterclockwise order, starting at the marked half-edge.
Position k in that triple is the edge label e_{k+1} at the vertex.
A half-edge h, read as a directed step, walks from the vertex holding h
to the vertex holding its twin.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property


class GraphError(ValueError):
    pass


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceSpec:
    genus: int
    boundaries: int
    kinds: tuple = ()

    def __post_init__(self):
        if self.genus < 0 or self.boundaries < 1:
            raise ValueError("need genus >= 0 and at least one boundary")
        if self.M <= 0:
            raise ValueError("unstable surface: 2g-2+s must be positive")
        if not self.kinds:
            object.__setattr__(self, "kinds", ("puncture",) * self.boundaries)
        if len(self.kinds) != self.boundaries:
            raise ValueError("one boundary kind per boundary component")
        for k in self.kinds:
            if k not in ("puncture", "hole"):
                raise ValueError(f"unknown boundary kind {k!r}")

    @property
    def M(self):
        return 2 * self.genus - 2 + self.boundaries

    @property
    def n_triangles(self):
        return 2 * self.M

    @property
    def n_edges(self):
        return 3 * self.M

    @property
    def dim_teich(self):
        return 6 * self.genus - 6 + 2 * self.boundaries

    @classmethod
    def parse(cls, tag):
        """Parse tags like 'g1s2'."""
        t = tag.strip().lower()
        if not (t.startswith("g") and "s" in t):
            raise ValueError(f"bad surface tag {tag!r}")
        g, s = t[1:].split("s")
        return cls(int(g), int(s))


@dataclass(frozen=True)
class FatGraph:
    """Decorated trivalent ribbon graph.

    corners: vertex label -> half-edges (h1, h2, h3), counterclockwise,
    h1 being the marked one.  edges: list of half-edge pairs; the edge id
    is the index in this list.
    """
    corners: dict
    edges: tuple
    genus: int | None = None
    boundaries: int | None = None

    # ---- derived tables -------------------------------------------------
    @cached_property
    def _tables(self):
        twin, edge_of, vert_of, pos_of = {}, {}, {}, {}
        for i, (a, b) in enumerate(self.edges):
            for h in (a, b):
                if h in edge_of:
                    raise GraphError(f"half-edge {h} used by two edges")
            twin[a], twin[b] = b, a
            edge_of[a] = edge_of[b] = i
        for v, hs in self.corners.items():
            for k, h in enumerate(hs):
                if h in vert_of:
                    raise GraphError(f"half-edge {h} at two vertices")
                vert_of[h] = v
                pos_of[h] = k
        return twin, edge_of, vert_of, pos_of

    @property
    def vertices(self):
        return sorted(self.corners)

    @property
    def n_vertices(self):
        return len(self.corners)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def half_edges(self):
        return [h for e in self.edges for h in e]

    def twin(self, h):
        return self._tables[0][h]

    def edge(self, h):
        return self._tables[1][h]

    def vertex(self, h):
        return self._tables[2][h]

    def pos(self, h):
        return self._tables[3][h]

    def label(self, v, k):
        """Half-edge carrying edge label e_{k+1} at vertex v (k = 0, 1, 2)."""
        return self.corners[v][k % 3]

    def edge_label(self, v, k):
        return self.edge(self.label(v, k))

    def next_ccw(self, h):
        hs = self.corners[self.vertex(h)]
        return hs[(self.pos(h) + 1) % len(hs)]

    def prev_ccw(self, h):
        hs = self.corners[self.vertex(h)]
        return hs[(self.pos(h) - 1) % len(hs)]

    def endpoints(self, e):
        a, b = self.edges[e]
        return self.vertex(a), self.vertex(b)

    def is_loop(self, e):
        v, w = self.endpoints(e)
        return v == w

    # ---- faces ----------------------------------------------------------
    @cached_property
    def faces(self):
        """Boundary cycles, each as the list of half-edges walked.

        The walk h -> next_ccw(twin(h)) always turns right, so each cycle
        runs once around one boundary component.
        """
        seen, out = set(), []
        for h in sorted(self.half_edges):
            if h in seen:
                continue
            cyc, x = [], h
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                x = self.next_ccw(self.twin(x))
            out.append(cyc)
        return out

    @cached_property
    def face_of(self):
        return {h: i for i, cyc in enumerate(self.faces) for h in cyc}

    def edge_punctures(self, e):
        """The two boundary components a triangulation edge e connects."""
        a, b = self.edges[e]
        return self.face_of[a], self.face_of[b]

    def euler_genus(self):
        chi = self.n_vertices - self.n_edges + len(self.faces)
        return (2 - chi) // 2

    def is_connected(self):
        if not self.corners:
            return False
        start = self.vertices[0]
        seen, stack = {start}, [start]
        while stack:
            v = stack.pop()
            for h in self.corners[v]:
                w = self.vertex(self.twin(h))
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    # ---- identity -------------------------------------------------------
    def match(self, other):
        """Edge map e -> e' if the two decorated graphs coincide.

        Vertices are identified by label, half-edges by (vertex, position);
        edge ids are allowed to differ.  Returns None when they differ.
        """
        if sorted(self.corners) != sorted(other.corners):
            return None
        emap = {}
        for v in self.corners:
            for k in range(3):
                h, h2 = self.label(v, k), other.label(v, k)
                t, t2 = self.twin(h), other.twin(h2)
                if (self.vertex(t), self.pos(t)) != (other.vertex(t2), other.pos(t2)):
                    return None
                e, e2 = self.edge(h), other.edge(h2)
                if emap.setdefault(e, e2) != e2:
                    return None
        return emap

    # ---- serialisation --------------------------------------------------
    def to_json(self):
        return {
            "genus": self.genus,
            "boundaries": self.boundaries,
            "vertices": [{"id": v, "marked": self.corners[v][0],
                          "cyclic": list(self.corners[v])} for v in self.vertices],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            corners = {}
            for vd in data["vertices"]:
                cyc = [int(h) for h in vd["cyclic"]]
                mark = int(vd.get("marked", cyc[0]))
                if mark not in cyc:
                    raise GraphError(f"vertex {vd['id']}: marked half-edge not incident")
                k = cyc.index(mark)
                corners[int(vd["id"])] = tuple(cyc[k:] + cyc[:k])
            edges = tuple((int(a), int(b)) for a, b in data["edges"])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph json: {exc}") from exc
        return cls(corners, edges, data.get("genus"), data.get("boundaries"))

    def replace(self, corners=None, edges=None):
        return FatGraph(dict(self.corners if corners is None else corners),
                        self.edges if edges is None else tuple(edges),
                        self.genus, self.boundaries)


@dataclass
class ValidationReport:
    valid: bool
    failures: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    def to_json(self):
        return {"valid": self.valid, "failures": self.failures, "counts": self.counts}


def validate_fat_graph(graph, spec=None):
    fails = []
    counts = {"vertices": len(graph.corners), "edges": len(graph.edges)}
    if spec is None and graph.genus is not None and graph.boundaries is not None:
        spec = SurfaceSpec(graph.genus, graph.boundaries)
    for v, hs in sorted(graph.corners.items()):
        if len(hs) != 3:
            fails.append(f"non-trivalent vertex {v} (degree {len(hs)})")
    try:
        graph._tables
        for (a, b) in graph.edges:
            if a == b:
                fails.append(f"edge ({a},{b}) pairs a half-edge with itself")
        at_vertex = set(h for hs in graph.corners.values() for h in hs)
        in_edges = set(graph.half_edges)
        if at_vertex != in_edges:
            fails.append("half-edges at vertices and in edges differ: "
                         f"{sorted(at_vertex ^ in_edges)}")
    except GraphError as exc:
        fails.append(str(exc))
    if fails:
        return ValidationReport(False, fails, counts)
    faces = graph.faces
    counts["boundary_cycles"] = len(faces)
    counts["genus"] = graph.euler_genus()
    if not graph.is_connected():
        fails.append("graph is disconnected")
    if spec is not None:
        if counts["vertices"] != 2 * spec.M:
            fails.append(f"expected {2 * spec.M} vertices, found {counts['vertices']}")
        if counts["edges"] != 3 * spec.M:
            fails.append(f"expected {3 * spec.M} edges, found {counts['edges']}")
        if len(faces) != spec.boundaries:
            fails.append(f"expected {spec.boundaries} boundary cycles, found {len(faces)}")
        if counts["genus"] != spec.genus:
            fails.append(f"expected genus {spec.genus}, found {counts['genus']}")
    return ValidationReport(not fails, fails, counts)


# ---- paths --------------------------------------------------------------

@dataclass(frozen=True)
class EdgePath:
    """Walk given by the half-edges it leaves from."""
    graph: FatGraph
    steps: tuple
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(int(h) for h in self.steps))
        g = self.graph
        for h in self.steps:
            if h not in g._tables[0]:
                raise PathError(f"unknown half-edge {h}")
        n = len(self.steps)
        pairs = range(n if self.closed else n - 1)
        for i in pairs:
            a, b = self.steps[i], self.steps[(i + 1) % n]
            if g.vertex(g.twin(a)) != g.vertex(b):
                raise PathError("non-incident consecutive half-edges "
                                f"{a} -> {b}")

    @property
    def edges(self):
        return [self.graph.edge(h) for h in self.steps]

    @property
    def reduced(self):
        t = self.graph.twin
        s, n = self.steps, len(self.steps)
        m = n if self.closed else n - 1
        return all(s[(i + 1) % n] != t(s[i]) for i in range(m)) if n else True

    def reversed(self):
        t = self.graph.twin
        return EdgePath(self.graph, tuple(t(h) for h in reversed(self.steps)), self.closed)

    def rotated(self, k):
        s = self.steps
        k %= max(len(s), 1)
        return EdgePath(self.graph, s[k:] + s[:k], self.closed)

    def __len__(self):
        return len(self.steps)


def reduce_path(path):
    t = path.graph.twin
    out = []
    for h in path.steps:
        if out and out[-1] == t(h):
            out.pop()
        else:
            out.append(h)
    if path.closed:
        while len(out) >= 2 and out[-1] == t(out[0]):
            out = out[1:-1]
    return EdgePath(path.graph, tuple(out), path.closed)


def turning_signs(path, convention="left"):
    """Turn sign at the vertex after each step.

    convention 'left': +1 for a left turn (holonomy convention).
    convention 'ccw': +1 when the path turns counterclockwise around the
    vertex (constraint convention).  With counterclockwise cyclic orders
    both coincide; they are kept as separate names for the call sites.
    """
    if convention not in ("left", "ccw"):
        raise ValueError(f"unknown convention {convention!r}")
    if not path.closed:
        raise PathError("turning signs need a closed path")
    g, s = path.graph, path.steps
    out = []
    for i, h in enumerate(s):
        arrive, leave = g.twin(h), s[(i + 1) % len(s)]
        if leave == g.prev_ccw(arrive):
            out.append(1)
        elif leave == g.next_ccw(arrive):
            out.append(-1)
        elif leave == arrive:
            raise PathError("path is not reduced (backtrack)")
        else:
            raise PathError("malformed turn")
    return out


def face_path(graph, i):
    """Closed path around boundary component i (all right turns)."""
    return EdgePath(graph, tuple(graph.faces[i]), True)


def intersection_number(p1, p2):
    """Algebraic intersection number of two closed reduced paths.

    Shared stretches are the maximal common subwalks (either direction).
    A stretch counts as a crossing when p2 enters and leaves it on
    opposite sides of p1; the sign is +1 when p2 crosses from the left of
    p1 to its right.
    """
    g = p1.graph
    a = list(p1.steps)
    if not a or not p2.steps:
        return 0
    t = g.twin
    na = len(a)
    total = 0
    for orient in (1, -1):
        b = list(p2.steps) if orient == 1 else [t(h) for h in reversed(p2.steps)]
        nb = len(b)
        for i in range(na):
            for j in range(nb):
                if a[i] != b[j] or a[(i - 1) % na] == b[(j - 1) % nb]:
                    continue
                k = 0
                while k < min(na, nb) and a[(i + k) % na] == b[(j + k) % nb]:
                    k += 1
                if k >= min(na, nb):
                    continue
                # leaving along a[i], next_ccw(a[i]) lies to the left
                before = 1 if t(b[(j - 1) % nb]) == g.next_ccw(a[i]) else -1
                # arriving along r, prev_ccw(r) lies to the left
                r = t(a[(i + k - 1) % na])
                after = 1 if b[(j + k) % nb] == g.prev_ccw(r) else -1
                if before != after:
                    total -= orient * after
    return total


# ---- move words ---------------------------------------------------------

@dataclass(frozen=True)
class Move:
    op: str
    v: int
    w: int | None = None

    def to_json(self):
        d = {"op": self.op, "v": self.v}
        if self.w is not None:
            d["w"] = self.w
        return d


MOVE_OPS = ("flip", "rot", "rotinv", "perm")


def parse_moves(data):
    if isinstance(data, str):
        data = json.loads(data)
    out = []
    for m in data:
        op = m.get("op")
        if op not in MOVE_OPS:
            raise ValueError(f"unknown move op {op!r}")
        v = int(m["v"])
        w = int(m["w"]) if "w" in m else None
        if op in ("flip", "perm") and w is None:
            raise ValueError(f"{op} needs two vertices")
        out.append(Move(op, v, w))
    return out


# ---- sample graphs ------------------------------------------------------

def random_fat_graph(genus, boundaries, rng, loops=False, tries=100000):
    """Random decorated fat graph of the given type.

    Vertex v holds half-edges (3v, 3v+1, 3v+2); the pairing is drawn at
    random until the ribbon surface has the requested type.
    """
    spec = SurfaceSpec(genus, boundaries)
    n = spec.n_triangles
    for _ in range(tries):
        perm = rng.permutation(3 * n)
        edges = tuple((int(perm[2 * i]), int(perm[2 * i + 1])) for i in range(3 * n // 2))
        if not loops and any(a // 3 == b // 3 for a, b in edges):
            continue
        corners = {v: (3 * v, 3 * v + 1, 3 * v + 2) for v in range(n)}
        g = FatGraph(corners, tuple(sorted(edges)), genus, boundaries)
        if g.is_connected() and len(g.faces) == boundaries:
            return g
    raise RuntimeError("no graph found")


_STANDARD = {}


def standard_graph(genus, boundaries):
    """Fixed loop-free sample graph for (genus, boundaries)."""
    import numpy as np
    key = (genus, boundaries)
    if key not in _STANDARD:
        rng = np.random.default_rng(1000 * genus + boundaries)
        _STANDARD[key] = random_fat_graph(genus, boundaries, rng)
    return _STANDARD[key]


def cycle_basis(graph):
    """Fundamental closed paths of a spanning tree, reduced.

    For a fat graph of type (g, s) these give a basis of the first
    homology of the punctured surface (2g + s - 1 cycles).
    """
    root = graph.vertices[0]
    parent = {root: None}  # vertex -> half-edge leading into it from the tree
    order = [root]
    for v in order:
        for h in graph.corners[v]:
            w = graph.vertex(graph.twin(h))
            if w not in parent:
                parent[w] = h
                order.append(w)
    tree = {graph.edge(h) for h in parent.values() if h is not None}

    def down(v):
        steps = []
        while parent[v] is not None:
            steps.append(parent[v])
            v = graph.vertex(parent[v])
        return steps[::-1]

    out, done = [], set()
    for e in range(graph.n_edges):
        if e in tree or e in done:
            continue
        done.add(e)
        h = graph.edges[e][0]
        u, w = graph.vertex(h), graph.vertex(graph.twin(h))
        back = [graph.twin(x) for x in reversed(down(w))]
        steps = down(u) + [h] + back
        out.append(reduce_path(EdgePath(graph, tuple(steps), True)))
    return out
