import numpy as np
import pytest

from teichkit.surface import (EdgePath, FatGraph, GraphError, PathError, SurfaceSpec,
                              cycle_basis, face_path, intersection_number, parse_moves,
                              random_fat_graph, standard_graph, validate_fat_graph)


NON_TRIVALENT = {"vertices": [{"id": 0, "marked": 0, "cyclic": [0, 1, 2, 3]},
                              {"id": 1, "marked": 4, "cyclic": [4, 5]}],
                 "edges": [[0, 4], [1, 5], [2, 3]]}


def test_surface_spec_counts():
    s = SurfaceSpec.parse("g1s2")
    assert (s.genus, s.boundaries) == (1, 2)
    assert s.n_triangles == 4
    assert s.n_edges == 6
    assert s.dim_teich == 4
    with pytest.raises(ValueError):
        SurfaceSpec.parse("torus")


@pytest.mark.parametrize("g,s", [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (2, 1)])
def test_standard_graphs_validate(g, s):
    rep = validate_fat_graph(standard_graph(g, s), SurfaceSpec(g, s))
    assert rep.valid, rep.failures
    assert rep.counts["genus"] == g
    assert rep.counts["boundary_cycles"] == s


def test_non_trivalent_vertex_reported():
    rep = validate_fat_graph(FatGraph.from_json(NON_TRIVALENT))
    assert not rep.valid
    assert any("non-trivalent vertex" in f for f in rep.failures)


def test_wrong_surface_type_reported(torus):
    rep = validate_fat_graph(torus, SurfaceSpec(0, 4))
    assert not rep.valid
    assert rep.counts["genus"] == 1


def test_json_round_trip(sphere4):
    g = FatGraph.from_json(sphere4.to_json())
    assert g.to_json() == sphere4.to_json()


def test_malformed_json_rejected():
    with pytest.raises(GraphError):
        FatGraph.from_json({"vertices": [{"id": 0, "cyclic": [0, 1, 2]}]})
    with pytest.raises(GraphError):
        FatGraph.from_json({"vertices": [{"id": 0, "marked": 5, "cyclic": [0, 1, 2]}],
                            "edges": []})


def test_inconsistent_pairing_reported():
    g = FatGraph.from_json({"vertices": [{"id": 0, "marked": 0, "cyclic": [0, 1, 2]}],
                            "edges": [[0, 1], [1, 2]]})
    assert not validate_fat_graph(g).valid


def test_torus_single_face_traverses_each_edge_twice(torus):
    assert len(torus.faces) == 1
    counts = np.bincount(face_path(torus, 0).edges, minlength=3)
    assert counts.tolist() == [2, 2, 2]


def test_random_graphs_have_requested_type(rng):
    for g, s in [(0, 4), (1, 1), (1, 2)]:
        graph = random_fat_graph(g, s, rng)
        assert validate_fat_graph(graph, SurfaceSpec(g, s)).valid


def test_path_reversal_and_rejection(torus):
    a, _ = cycle_basis(torus)
    assert a.reversed().reversed().steps == a.steps
    assert sorted(a.reversed().edges) == sorted(a.edges)
    with pytest.raises(PathError):
        EdgePath(torus, (1, 1), True)


def test_torus_cycle_basis_intersects_once(torus):
    a, b = cycle_basis(torus)
    assert abs(intersection_number(a, b)) == 1
    assert intersection_number(a, b) == -intersection_number(b, a)
    assert intersection_number(a, a) == 0


def test_parse_moves():
    ms = parse_moves([{"op": "flip", "v": 0, "w": 1}, {"op": "rot", "v": 2}])
    assert [m.op for m in ms] == ["flip", "rot"]
    assert ms[0].to_json() == {"op": "flip", "v": 0, "w": 1}
    with pytest.raises(ValueError):
        parse_moves([{"op": "twist", "v": 0}])
