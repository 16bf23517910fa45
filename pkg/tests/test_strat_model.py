"""Canonical resolution, tower validation, skeleton extraction."""

import dataclasses

import pytest

from equires.catalogue import generate_catalogue
from equires.chain_engine import SimplicialComplexDesc, cohomology, equalizer_complex
from equires.corner_poset import validate_ifs
from equires.group_data import CompactGroupDesc, GroupInclusion, TRIVIAL_GROUP, borel_fiber
from equires.strat_model import (
    BoundaryDecl,
    IsotropySpec,
    IsotropyType,
    ResolutionError,
    boundary_faces,
    canonical_resolution,
    node_skeleton,
    quotient_skeleton,
    validate_tower,
)

T1 = CompactGroupDesc(1)
T2 = CompactGroupDesc(2)
T3 = CompactGroupDesc(3)


def sphere_spec():
    return generate_catalogue("rotation_sphere").strata


def s2xs2_spec():
    return generate_catalogue("torus_on_s2xs2").strata


# ---------------------------------------------------------------------------
# canonical resolution


def test_sphere_resolution_structure():
    tower, trace = canonical_resolution(sphere_spec())
    assert [r.blown_up for r in trace.rounds] == [("poles",)]
    assert tower.root == "free"
    assert sorted(tower.nodes) == ["free", "poles#0", "poles#1"]
    assert len(tower.edges) == 2
    # pole nodes carry the polynomial ring on one degree-2 generator
    for nid in ("poles#0", "poles#1"):
        ring = borel_fiber(tower.nodes[nid].group)
        assert [ring.dim(d) for d in (0, 2, 4)] == [1, 1, 1]
    assert tower.depth == 1


def test_trivial_action_no_rounds():
    tower, trace = canonical_resolution(generate_catalogue("trivial_action").strata)
    assert trace.rounds == ()
    assert tower.edges == ()
    assert len(tower.nodes) == 1


def test_s2xs2_two_rounds_and_shape():
    tower, trace = canonical_resolution(s2xs2_spec())
    assert len(trace.rounds) == 2
    assert trace.rounds[0].blown_up == ("kNN", "kNS", "kSN", "kSS")
    assert trace.rounds[1].blown_up == ("m1", "m2")
    assert len(tower.nodes[tower.root].hypersurfaces) == 8
    assert len(tower.nodes) == 9
    assert tower.depth == 2
    assert validate_tower(tower) == []


def test_rounds_leave_isotropy_set():
    spec = s2xs2_spec()
    _, trace = canonical_resolution(spec)
    for r in trace.rounds:
        for gone in r.blown_up:
            for stay in r.remaining_after:
                # no remaining type's group strictly contains a blown-up one:
                # the blown-up types were minimal, so nothing left precedes them
                assert not spec.below(stay, gone)


def test_depth_equals_longest_chain_minus_one():
    spec = s2xs2_spec()
    tower, _ = canonical_resolution(spec)
    # longest chain: corner < middle < free, length 3
    assert tower.depth == 3 - 1


def test_resolution_order_insensitive_under_relabeling():
    base = generate_catalogue("torus_on_s2xs2").raw
    import copy
    import json

    from equires.scenarios import parse_scenario

    relabeled = copy.deepcopy(base)
    mapping = {"free": "zz_open", "m1": "a_mid1", "m2": "b_mid2"}
    text = json.dumps(relabeled)
    for old, new in mapping.items():
        text = text.replace(f'"{old}"', f'"{new}"')
    sc2 = parse_scenario(text)
    tower1, trace1 = canonical_resolution(s2xs2_spec())
    tower2, trace2 = canonical_resolution(sc2.strata)
    rename = lambda tid: mapping.get(tid, tid)
    assert [tuple(sorted(rename(t) for t in r.blown_up)) for r in trace1.rounds] == [
        tuple(sorted(r.blown_up)) for r in trace2.rounds
    ]
    # node-by-node identification preserving groups and complex refs
    for nid, node in tower1.nodes.items():
        tid, _, comp = nid.partition("#")
        other_id = rename(tid) + ("#" + comp if comp else "")
        other = tower2.nodes[other_id]
        assert other.group == node.group
        assert other.complex.simplices == node.complex.simplices
    edges1 = {(e.source, e.hyp_id, e.target) for e in tower1.edges}
    edges2 = {(e.source, e.hyp_id, e.target) for e in tower2.edges}
    def rn(eid):
        src, hyp, tgt = eid
        for old, new in mapping.items():
            src = src.replace(old, new)
            tgt = tgt.replace(old, new)
        return src, hyp, tgt
    assert {rn(e) for e in edges1} == edges2


def test_errors_cyclic_and_missing_refs():
    t_a = IsotropyType("a", TRIVIAL_GROUP, 1, "interval")
    t_b = IsotropyType("b", T1, 0, "missing")
    spec = IsotropySpec(
        ambient=T1, types=(t_a, t_b),
        inclusions={("a", "b"): GroupInclusion(TRIVIAL_GROUP, T1, ())},
        complexes={"interval": SimplicialComplexDesc.build([("a", "b")])},
    )
    with pytest.raises(ResolutionError, match="missing complex"):
        canonical_resolution(spec)
    cyc = IsotropySpec(
        ambient=T1,
        types=(IsotropyType("a", T1, 1, "interval"), IsotropyType("b", T1, 0, "interval")),
        inclusions={
            ("a", "b"): GroupInclusion(T1, T1, ((1,),)),
            ("b", "a"): GroupInclusion(T1, T1, ((1,),)),
        },
        complexes={"interval": SimplicialComplexDesc.build([("a", "b")])},
    )
    with pytest.raises(ResolutionError, match="cyclic"):
        canonical_resolution(cyc)


def test_error_multiple_open_types():
    spec = IsotropySpec(
        ambient=T1,
        types=(
            IsotropyType("a", TRIVIAL_GROUP, 1, "pt"),
            IsotropyType("b", TRIVIAL_GROUP, 1, "pt"),
        ),
        inclusions={},
        complexes={"pt": SimplicialComplexDesc.build([("P",)])},
    )
    with pytest.raises(ResolutionError, match="unique open isotropy type"):
        canonical_resolution(spec)


def test_error_round_with_declared_overlap():
    spec = s2xs2_spec()
    bad = dataclasses.replace(spec, overlaps=frozenset({frozenset(("kNN", "kNS"))}))
    with pytest.raises(ResolutionError, match="declared intersecting"):
        canonical_resolution(bad)


def test_boundary_coverage_enforced_when_stratified():
    spec = sphere_spec()
    free = spec.type("free")
    trimmed = dataclasses.replace(free, boundary=free.boundary[:1])
    bad = dataclasses.replace(spec, types=(trimmed, spec.type("poles")))
    with pytest.raises(ResolutionError, match="cover"):
        canonical_resolution(bad)


# ---------------------------------------------------------------------------
# a depth-2 fixture with rank-positive groups everywhere ("flag" tower)


def flag_spec(corner_lattice=((1, 0, 0),)):
    """Square quotient: generic T^1, two middle types T^2, deep type T^3.

    corner_lattice is the declared generic->deep character restriction;
    the functorial value is [[1, 0, 0]].
    """
    square = SimplicialComplexDesc.build(
        [("qc", "q0", "q1"), ("qc", "q1", "q2"), ("qc", "q2", "q3"), ("qc", "q0", "q3")]
    )
    mid = SimplicialComplexDesc.build([("a0", "a1"), ("b0", "b1")])
    deep = SimplicialComplexDesc.build([("pA",), ("pB",)])
    types = (
        IsotropyType(
            "gen", T1, 3, "square",
            boundary=(
                BoundaryDecl("left", (("q0", "q1"),), "mid", {"q0": "a0", "q1": "a1"}),
                BoundaryDecl("right", (("q2", "q3"),), "mid", {"q2": "b0", "q3": "b1"}),
                BoundaryDecl("bottom", (("q1", "q2"),), "deep", {"q1": "pA", "q2": "pA"}),
                BoundaryDecl("top", (("q0", "q3"),), "deep", {"q0": "pB", "q3": "pB"}),
            ),
        ),
        IsotropyType(
            "mid", T2, 2, "mid2",
            boundary=(
                BoundaryDecl("a_end0", (("a0",),), "deep", {"a0": "pB"}),
                BoundaryDecl("a_end1", (("a1",),), "deep", {"a1": "pA"}),
                BoundaryDecl("b_end0", (("b0",),), "deep", {"b0": "pA"}),
                BoundaryDecl("b_end1", (("b1",),), "deep", {"b1": "pB"}),
            ),
        ),
        IsotropyType("deep", T3, 0, "deep2"),
    )
    inclusions = {
        ("gen", "mid"): GroupInclusion(T1, T2, ((1, 0),)),
        ("mid", "deep"): GroupInclusion(T2, T3, ((1, 0, 0), (0, 1, 0))),
        ("gen", "deep"): GroupInclusion(T1, T3, corner_lattice),
    }
    return IsotropySpec(
        ambient=T3, types=types, inclusions=inclusions,
        complexes={"square": square, "mid2": mid, "deep2": deep},
    )


def test_flag_tower_valid_and_functorial():
    tower, trace = canonical_resolution(flag_spec())
    assert len(trace.rounds) == 2
    assert validate_tower(tower) == []


def test_flag_tower_detects_noncommuting_restrictions():
    tower, _ = canonical_resolution(flag_spec(corner_lattice=((0, 0, 1),)))
    problems = validate_tower(tower)
    assert any("do not commute" in p for p in problems)


def test_flag_tower_cartan_sanity():
    # the equalizer complex is still a complex; top of the tower is exact
    tower, _ = canonical_resolution(flag_spec())
    table = cohomology(equalizer_complex(tower, "borel", 4))
    assert table.rank(0) == 1
    assert table.rank(1) == 0


# ---------------------------------------------------------------------------
# validate_tower mutations


def test_validate_rejects_equal_group_edge():
    tower, _ = canonical_resolution(sphere_spec())
    bad_edges = tuple(
        dataclasses.replace(
            e,
            inclusion=GroupInclusion.identity(TRIVIAL_GROUP),
        )
        for e in tower.edges
    )
    bad_nodes = {
        nid: (dataclasses.replace(n, group=TRIVIAL_GROUP) if nid != tower.root else n)
        for nid, n in tower.nodes.items()
    }
    bad = dataclasses.replace(tower, nodes=bad_nodes, edges=bad_edges)
    problems = validate_tower(bad)
    assert any("must strictly contain" in p for p in problems)


def test_validate_rejects_incomparable_intersections():
    tower, _ = canonical_resolution(s2xs2_spec())
    bad = dataclasses.replace(tower, comparable_types=frozenset())
    problems = validate_tower(bad)
    assert any("incomparable" in p for p in problems)


def test_validate_detects_missing_triangle_edge():
    tower, _ = canonical_resolution(s2xs2_spec())
    # drop one middle -> corner edge: the octagon corner loses its triangle
    pruned = tuple(
        e for e in tower.edges if not (e.source == "m1#0" and e.target == "kNN")
    )
    bad = dataclasses.replace(tower, edges=pruned)
    problems = validate_tower(bad)
    assert any("no commuting triangle" in p or "without an edge" in p for p in problems)


# ---------------------------------------------------------------------------
# skeleton extraction


def test_quotient_skeleton_sphere():
    tower, _ = canonical_resolution(sphere_spec())
    skel = quotient_skeleton(tower)
    poset, ifs = skel["nodes"]["free"]
    assert sorted(poset.hypersurfaces) == ["end_a", "end_b"]
    assert validate_ifs(poset, ifs) == []
    assert skel["incidence"][("free", "end_a")] == "poles#0"
    # pole nodes have empty posets
    p_poset, _ = skel["nodes"]["poles#0"]
    assert p_poset.hypersurfaces == frozenset()


def test_quotient_skeleton_s2xs2_root():
    tower, _ = canonical_resolution(s2xs2_spec())
    poset, ifs = node_skeleton(tower, tower.root)
    assert len(poset.hypersurfaces) == 8
    assert validate_ifs(poset, ifs) == []
    # front faces have fibration codim 1, side lifts codim 0
    assert ifs.fibrations["ff_NN"].codim == 1
    assert ifs.fibrations["side_left"].codim == 0
    assert poset.hypersurfaces_intersect("side_left", "ff_NN")
    assert not poset.hypersurfaces_intersect("side_left", "side_right")


def test_skeleton_round_trips_with_validators():
    for name in ("rotation_sphere", "torus_on_s2xs2", "reflection_circle", "torus_on_s3"):
        tower, _ = canonical_resolution(generate_catalogue(name).strata)
        for nid in tower.nodes:
            poset, ifs = node_skeleton(tower, nid)
            assert poset.validate() == []
            assert validate_ifs(poset, ifs) == []


def test_boundary_faces_helper():
    interval = SimplicialComplexDesc.build([("a", "b"), ("b", "c")])
    assert boundary_faces(interval) == {("a",), ("c",)}
    circle = SimplicialComplexDesc.build([("x", "y"), ("y", "z"), ("x", "z")])
    assert boundary_faces(circle) == set()
    point = SimplicialComplexDesc.build([("P",)])
    assert boundary_faces(point) == set()
