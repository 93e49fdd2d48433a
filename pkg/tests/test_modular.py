import pytest

from teichkit.modular import (Fm, Marking, ModularError, RELATION_NAMES, Zm, apply_modular_word,
                              canonical_form, combinatorial_key, enumerate_markings, equivalent,
                              fat_graph_from_marking, is_admissible, parse_modular_moves,
                              standard_marking, verify_modular_relations)
from teichkit.surface import SurfaceSpec, validate_fat_graph

# counts from the first enumeration (all markings / admissible ones)
GOLDEN_COUNTS = {"g0s3": (3, 3), "g0s4": (18, 16), "g0s5": (135, 105),
                 "g1s1": (2, 1), "g1s2": (11, 5), "g2s1": (24, 3)}


def _verdict(surface, name):
    vs = [v for v in verify_modular_relations(surface, [name]) if v.skipped is None]
    assert vs, f"{name} not run on {surface}"
    return vs


def test_Z_cubed_is_identity():
    for g, s in ((0, 3), (0, 4), (1, 1)):
        mk = standard_marking(g, s)
        for t in mk.trinions:
            out = apply_modular_word(mk, [Zm(t)] * 3)
            assert equivalent(out, mk)
    pants = standard_marking(0, 3)
    assert not equivalent(apply_modular_word(pants, [Zm(0)]), pants)


def test_F_changes_cut_curve():
    mk = standard_marking(0, 4)

    def split(m):
        c, = m.internal_curves
        t = next(t for t, i in m.legs(c) if i == 0)
        return frozenset(x for x in m.trinions[t][1:] if x in m.boundary)
    out = apply_modular_word(mk, [Fm(0, 1)])
    assert split(out) != split(mk)
    assert combinatorial_key(out) != combinatorial_key(mk)


@pytest.mark.parametrize("name,surface", [("zrel", "g0s3"), ("hexa", "g0s4"),
                                          ("hexb", "g0s4"), ("hexc", "g0s4"),
                                          ("pentagon", "g0s5"), ("onetor_a", "g1s1"),
                                          ("onetor_b", "g1s1"), ("locality", "g1s2"),
                                          ("locality", "g0s5")])
def test_relation_holds_exactly(name, surface):
    for v in _verdict(surface, name):
        assert v.ok, v.to_json()


def test_genus_one_two_holes_relation():
    for v in _verdict("g1s2", "twotor"):
        assert v.ok, v.to_json()


def test_relation_names():
    assert set(RELATION_NAMES) == {"zrel", "hexa", "hexb", "hexc", "pentagon", "onetor_a",
                                   "onetor_b", "twotor", "locality"}


@pytest.mark.parametrize("surface", sorted(GOLDEN_COUNTS))
def test_enumeration_counts(surface):
    ms = list(enumerate_markings(surface))
    assert (len(ms), sum(bool(is_admissible(m)) for m in ms)) == GOLDEN_COUNTS[surface]
    assert len({canonical_form(m) for m in ms}) == len(ms)


def test_pants_enumeration_is_the_three_decorations():
    ms = list(enumerate_markings("g0s3"))
    assert len(ms) == 3
    assert {m.trinions[0][0] for m in ms} == set(ms[0].boundary)


def test_enumeration_bound_and_limit():
    assert len(list(enumerate_markings("g0s5", bound=7))) == 7
    with pytest.raises(ModularError):
        list(enumerate_markings("g3s1"))


def test_torus_irreducible_marking_admissible():
    ms = [m for m in enumerate_markings("g1s1") if is_admissible(m)]
    assert len(ms) == 1
    assert ms[0].trinions[0][1] == ms[0].trinions[0][2]


def test_doubly_outgoing_curve_inadmissible():
    mk = Marking.from_json({"trinions": [{"id": 0, "out": "c", "in": ["b1", "b2"]},
                                         {"id": 1, "out": "c", "in": ["b3", "b4"]}]})
    res = is_admissible(mk)
    assert not res and "outgoing for both" in res.witness


def test_genus_two_has_genus_one_components():
    witnesses = [is_admissible(m).witness for m in enumerate_markings("g2s1")
                 if not is_admissible(m)]
    assert any("genus 1" in w for w in witnesses)


@pytest.mark.parametrize("surface", ["g0s3", "g0s4", "g1s1", "g1s2", "g2s1"])
def test_phi_sigma_is_valid(surface):
    spec = SurfaceSpec.parse(surface)
    for mk in enumerate_markings(spec):
        if not is_admissible(mk):
            continue
        mg = fat_graph_from_marking(mk)
        rep = validate_fat_graph(mg.graph, spec)
        assert rep.valid, rep.failures
        assert rep.counts["vertices"] == 2 * len(mk.trinions)
        vc = [d.vertex for d in mg.curves.values() if d.kind == "trinion"]
        assert len(vc) == len(set(vc))


def test_marking_json_round_trip():
    mk = standard_marking(0, 5)
    again = Marking.from_json(mk.to_json())
    assert equivalent(mk, again)


def test_parse_modular_moves():
    w = parse_modular_moves(["F(0,1)", {"op": "Z", "p": 1}])
    assert [m.to_json()["op"] for m in w] == ["F", "Z"]
    with pytest.raises(ModularError):
        parse_modular_moves(["Q(0)"])


def test_inadmissible_word_rejected():
    with pytest.raises(ModularError):
        apply_modular_word(standard_marking(0, 3), [Fm(0, 1)])
