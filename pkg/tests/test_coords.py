import numpy as np
import pytest

from teichkit.coords import (PennerVector, constraint_f, constraint_h, fock_embedding,
                             fock_from_kashaev, fock_from_penner, gauge_shift, gauge_vectors,
                             kashaev_form, kashaev_from_penner, kashaev_legend, kashaev_pair,
                             kashaev_splitting, poisson_matrix_fock, vertex_contribution,
                             wp_two_form_penner)
from teichkit.surface import (PathError, cycle_basis, face_path, random_fat_graph,
                              standard_graph)

GRAPHS = [(0, 3), (0, 4), (1, 1), (1, 2), (2, 1)]


def test_lambda_normalisation():
    p = PennerVector(np.array([0.0, np.log(2.0)]))
    assert np.allclose(p.lam, [np.sqrt(2.0), 2.0 * np.sqrt(2.0)])
    assert np.allclose(PennerVector.from_lambda(p.lam).l, p.l)


@pytest.mark.parametrize("g,s", GRAPHS)
def test_equal_lengths_give_zero_shears_and_kashaev(g, s):
    graph = standard_graph(g, s)
    l = np.full(graph.n_edges, 0.37)
    assert np.allclose(fock_from_penner(graph, l).z, 0.0, atol=1e-15)
    k = kashaev_from_penner(graph, l)
    assert np.allclose(k.q, 0.0) and np.allclose(k.p, 0.0)


def test_torus_shears_by_hand(torus):
    # Each edge of the torus graph bounds a quadrilateral whose four sides are
    # the other two edges, each appearing twice: z_0 = 2(l_1 - l_2),
    # z_1 = 2(l_2 - l_0), z_2 = 2(l_0 - l_1).
    l = np.array([0.0, np.log(2.0), 0.0])
    z = fock_from_penner(torus, l).z
    assert np.allclose(z, [2 * np.log(2.0), 0.0, -2 * np.log(2.0)], atol=1e-15)


@pytest.mark.parametrize("g,s", GRAPHS)
def test_gauge_shift_leaves_shears_unchanged(g, s, rng):
    graph = standard_graph(g, s)
    l = rng.normal(size=graph.n_edges)
    d = rng.normal(size=len(graph.faces))
    z0 = fock_from_penner(graph, l).z
    z1 = fock_from_penner(graph, gauge_shift(graph, l, d)).z
    assert np.max(np.abs(z0 - z1)) <= 1e-12


def test_kashaev_pair_substitution():
    assert kashaev_pair(3.0, 1.0, 2.0) == (1.0, 2.0)


def test_kashaev_legend(torus):
    assert kashaev_legend(torus) == ["q0", "q1", "p0", "p1"]


def test_vertex_contribution_case_table():
    q, p = 1.5, 0.0
    dq, dp = vertex_contribution(1)
    assert dq * q + dp * p == -1.5
    assert vertex_contribution(0) == (0, 1)
    assert vertex_contribution(2) == (1, -1)


@pytest.mark.parametrize("g,s", GRAPHS)
def test_kashaev_reconstructs_shears(g, s, rng):
    graph = standard_graph(g, s)
    for _ in range(10):
        l = rng.normal(size=graph.n_edges)
        z = fock_from_penner(graph, l).z
        zk = fock_from_kashaev(graph, kashaev_from_penner(graph, l)).z
        assert np.max(np.abs(z - zk)) <= 1e-12


def test_zero_kashaev_gives_zero_shears(sphere4):
    from teichkit.coords import KashaevVector
    k = KashaevVector(np.zeros(4), np.zeros(4))
    assert np.all(fock_from_kashaev(sphere4, k).z == 0.0)
    assert fock_embedding(sphere4).dtype.kind == "i"


@pytest.mark.parametrize("g,s", GRAPHS)
def test_puncture_constraints_vanish_on_penner_data(g, s, rng):
    graph = standard_graph(g, s)
    z = fock_from_penner(graph, rng.normal(size=graph.n_edges))
    for i in range(len(graph.faces)):
        assert abs(constraint_f(graph, z, face_path(graph, i))) <= 1e-12
        assert constraint_f(graph, np.zeros(graph.n_edges), face_path(graph, i)) == 0.0


def test_torus_puncture_constraint_counts_each_edge_twice(torus, rng):
    z = rng.normal(size=3)
    assert np.isclose(constraint_f(torus, z, face_path(torus, 0)), 2 * z.sum())


def test_constraint_h_integer_and_reversal(torus):
    for c in cycle_basis(torus) + [face_path(torus, 0)]:
        h = constraint_h(torus, c).coeffs
        assert h.dtype.kind == "i"
        assert np.array_equal(constraint_h(torus, c.reversed()).coeffs, -h)


def test_constraint_h_representative_independent(torus):
    for c in cycle_basis(torus):
        h = constraint_h(torus, c).coeffs
        for k in range(1, len(c.steps)):
            assert np.array_equal(constraint_h(torus, c.rotated(k)).coeffs, h)


def test_constraint_h_rejects_open_paths(torus):
    from teichkit.surface import EdgePath
    with pytest.raises(PathError):
        constraint_h(torus, EdgePath(torus, (1,), closed=False))


def test_torus_poisson_matrix(torus):
    n = poisson_matrix_fock(torus).matrix
    assert np.array_equal(n, -n.T)
    off = n[~np.eye(3, dtype=bool)]
    assert set(off.tolist()) <= {-2, 0, 2}
    assert np.all(off != 0)


def test_poisson_disjoint_edges_and_loops(sphere4, rng):
    n = poisson_matrix_fock(sphere4).matrix
    for e in range(6):
        for f in range(6):
            ve = {sphere4.vertex(h) for h in sphere4.edges[e]}
            vf = {sphere4.vertex(h) for h in sphere4.edges[f]}
            if not ve & vf:
                assert n[e, f] == 0
    for _ in range(500):
        graph = random_fat_graph(0, 4, rng, loops=True)
        loops = [e for e in range(graph.n_edges) if graph.is_loop(e)]
        if loops:
            m = poisson_matrix_fock(graph).matrix
            assert not m[loops].any() and not m[:, loops].any()
            return
    pytest.skip("no graph with a loop edge sampled")


@pytest.mark.parametrize("g,s", GRAPHS)
def test_penner_two_form(g, s):
    graph = standard_graph(g, s)
    w = wp_two_form_penner(graph).matrix
    assert np.array_equal(w, -w.T)
    assert not (w @ gauge_vectors(graph).T).any()


def test_penner_two_form_single_vertex_block():
    graph = standard_graph(0, 3)
    w = np.zeros((3, 3), dtype=np.int64)
    for v in graph.vertices:
        es = [graph.edge_label(v, k) for k in range(3)]
        for k in range(3):
            a, b = es[k], es[(k + 1) % 3]
            w[a, b] -= 1
            w[b, a] += 1
    assert np.array_equal(wp_two_form_penner(graph).matrix, w)


def test_kashaev_form_is_canonical(torus):
    O = kashaev_form(torus).matrix
    assert np.array_equal(O, -O.T)
    assert O[2, 0] == 1 and O[0, 2] == -1


def test_torus_splitting(torus):
    rep = kashaev_splitting(torus, cycle_basis(torus))
    assert rep.dim_W == 4 and rep.dim_C == 2
    assert abs(rep.intersection[0, 1]) == 1
    # constraint functionals pair to twice the intersection form
    assert np.array_equal(rep.restricted_form, 2 * rep.intersection)
    assert rep.ok


def test_pants_splitting_is_isotropic():
    graph = standard_graph(0, 3)
    rep = kashaev_splitting(graph, [face_path(graph, 0), face_path(graph, 1)])
    assert rep.dim_C == 2
    assert not rep.restricted_form.any()
    assert rep.ok
