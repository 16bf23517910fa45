"""Face lattices: partition test, blow-up bookkeeping, fibration validation."""

import pytest

from equires.corner_poset import (
    Face,
    FacePoset,
    Fibration,
    HypersurfaceAction,
    InteriorCenter,
    InvalidActionError,
    IteratedFibrationDesc,
    PosetError,
    UnsupportedBlowupError,
    apply_total_boundary_blowup,
    blowup_face_poset,
    check_intersection_free,
    induced_ifs_on_base,
    lift_ifs_under_blowup,
    total_boundary_blowup_order,
    validate_ifs,
    validate_partition,
)


def square_poset():
    corners = [
        Face("LT", 2, frozenset({"left", "top"})),
        Face("LB", 2, frozenset({"left", "bottom"})),
        Face("RT", 2, frozenset({"right", "top"})),
        Face("RB", 2, frozenset({"right", "bottom"})),
    ]
    return FacePoset.build(["left", "right", "top", "bottom"], corners)


def triangle_poset():
    corners = [
        Face("AB", 2, frozenset({"a", "b"})),
        Face("BC", 2, frozenset({"b", "c"})),
        Face("AC", 2, frozenset({"a", "c"})),
    ]
    return FacePoset.build(["a", "b", "c"], corners)


def interval_poset():
    return FacePoset.build(["p", "q"])


# ---------------------------------------------------------------------------
# boundary-intersection-free partition


def test_square_trivial_action_opposite_pairs():
    poset = square_poset()
    action = HypersurfaceAction(())
    res = check_intersection_free(poset, action)
    assert res.ok
    assert set(res.partition) == {
        frozenset({"left", "right"}), frozenset({"top", "bottom"})
    }
    # the partition named in the spec example is itself valid
    assert validate_partition(poset, action, [{"left", "right"}, {"top", "bottom"}])


def test_triangle_rotation_is_violated():
    poset = triangle_poset()
    rot = HypersurfaceAction(({"a": "b", "b": "c", "c": "a"},))
    res = check_intersection_free(poset, rot)
    assert not res.ok
    orbit, h1, h2 = res.witness
    assert orbit == frozenset({"a", "b", "c"})
    assert poset.hypersurfaces_intersect(h1, h2)


def test_interval_swap_single_block():
    poset = interval_poset()
    swap = HypersurfaceAction(({"p": "q", "q": "p"},))
    res = check_intersection_free(poset, swap)
    assert res.ok
    assert res.partition == (frozenset({"p", "q"}),)


def test_square_rotation_action():
    poset = square_poset()
    rot = HypersurfaceAction(
        ({"left": "top", "top": "right", "right": "bottom", "bottom": "left"},)
    )
    res = check_intersection_free(poset, rot)
    # single orbit with intersecting members
    assert not res.ok


def test_action_must_preserve_poset():
    poset = square_poset()
    bad = HypersurfaceAction(({"left": "top"},))  # not a permutation
    with pytest.raises(InvalidActionError):
        check_intersection_free(poset, bad)
    not_preserving = HypersurfaceAction(
        ({"left": "right", "right": "top", "top": "left"},)
    )
    with pytest.raises(InvalidActionError):
        check_intersection_free(poset, not_preserving)


def test_partition_equivariance_under_relabeling():
    relabel = {"left": "L1", "right": "L2", "top": "L3", "bottom": "L4"}
    poset = square_poset()
    res = check_intersection_free(poset, HypersurfaceAction(()))
    corners2 = [
        Face(f.id, 2, frozenset(relabel[h] for h in f.contains))
        for f in poset.faces
        if f.codim == 2
    ]
    poset2 = FacePoset.build(relabel.values(), corners2)
    res2 = check_intersection_free(poset2, HypersurfaceAction(()))
    relabeled = {frozenset(relabel[h] for h in block) for block in res.partition}
    assert relabeled == set(res2.partition)


# ---------------------------------------------------------------------------
# blow-up


def pentagon_oracle():
    """Truncating one corner of the square: 5 sides, 5 vertices."""
    return {"sides": 5, "vertices": 5}


def test_blowup_square_corner_gives_pentagon():
    poset = square_poset()
    res = blowup_face_poset(poset, "LT")
    oracle = pentagon_oracle()
    assert len(res.poset.hypersurfaces) == oracle["sides"]
    assert len([f for f in res.poset.faces if f.codim == 2]) == oracle["vertices"]
    ff = res.front_face
    assert res.poset.hypersurfaces_intersect(ff, "left")
    assert res.poset.hypersurfaces_intersect(ff, "top")
    assert not res.poset.hypersurfaces_intersect(ff, "right")
    assert all(res.lift[h] == h for h in poset.hypersurfaces)


def test_blowup_interior_point_of_disk():
    disk = FacePoset.build(["circle"])
    res = blowup_face_poset(disk, InteriorCenter("pt"))
    assert len(res.poset.hypersurfaces) == 2
    assert not res.poset.hypersurfaces_intersect("circle", res.front_face)


def test_blowup_two_poles_of_sphere():
    sphere = FacePoset.build([])
    step1 = blowup_face_poset(sphere, InteriorCenter("N"))
    step2 = blowup_face_poset(step1.poset, InteriorCenter("S"))
    assert len(step2.poset.hypersurfaces) == 2
    assert {h for h in step2.poset.hypersurfaces} == {"ff_N", "ff_S"}
    assert not step2.poset.hypersurfaces_intersect("ff_N", "ff_S")


def test_blowup_count_invariant_plus_one():
    for poset, center in [
        (square_poset(), "LT"),
        (FacePoset.build(["circle"]), InteriorCenter("pt")),
        (triangle_poset(), "AB"),
    ]:
        before = len(poset.hypersurfaces)
        assert len(blowup_face_poset(poset, center).poset.hypersurfaces) == before + 1


def test_blowup_rejects_trivial_centers():
    poset = square_poset()
    with pytest.raises(PosetError):
        blowup_face_poset(poset, "int")
    with pytest.raises(PosetError):
        blowup_face_poset(poset, "left")
    with pytest.raises(UnsupportedBlowupError):
        blowup_face_poset(poset, "LT", separates=True)


def test_blowup_cube_vertex_face_bookkeeping():
    # cube corner: three facets, three edges, one vertex at the corner
    faces = [
        Face("e_xy", 2, frozenset({"x", "y"})),
        Face("e_yz", 2, frozenset({"y", "z"})),
        Face("e_xz", 2, frozenset({"x", "z"})),
        Face("v", 3, frozenset({"x", "y", "z"})),
    ]
    cube_corner = FacePoset.build(["x", "y", "z"], faces)
    res = blowup_face_poset(cube_corner, "v")
    new = res.poset
    assert len(new.hypersurfaces) == 4
    # truncated edges survive; the triangle ff has 3 edges and 3 vertices
    codim2 = [f for f in new.faces if f.codim == 2]
    codim3 = [f for f in new.faces if f.codim == 3]
    assert len(codim2) == 6  # 3 old edges + 3 ff edges
    assert len(codim3) == 3  # ff triangle corners
    for f in codim3:
        assert res.front_face in f.contains


# ---------------------------------------------------------------------------
# total boundary blow-up order


def test_total_order_square():
    order = total_boundary_blowup_order(square_poset())
    assert order.rounds[0] == ("LB", "LT", "RB", "RT")
    assert order.rounds[1] == ("bottom", "left", "right", "top")
    assert order.order_independent_within_rounds


def test_total_order_interval():
    order = total_boundary_blowup_order(interval_poset())
    assert order.rounds == (("p", "q"),)


def test_boundary_resolution_triangle():
    # the rotation action fails before total boundary blow-up, passes after
    poset = triangle_poset()
    rot = HypersurfaceAction(({"a": "b", "b": "c", "c": "a"},))
    assert not check_intersection_free(poset, rot).ok
    resolved = apply_total_boundary_blowup(poset)
    assert len(resolved.hypersurfaces) == 6
    lifted_rot = HypersurfaceAction((
        {
            "a": "b", "b": "c", "c": "a",
            "ff_AB": "ff_BC", "ff_BC": "ff_AC", "ff_AC": "ff_AB",
        },
    ))
    res = check_intersection_free(resolved, lifted_rot)
    assert res.ok


def test_boundary_resolution_square_rotation():
    poset = square_poset()
    resolved = apply_total_boundary_blowup(poset)
    assert len(resolved.hypersurfaces) == 8
    rot = HypersurfaceAction((
        {
            "left": "top", "top": "right", "right": "bottom", "bottom": "left",
            "ff_LT": "ff_RT", "ff_RT": "ff_RB", "ff_RB": "ff_LB", "ff_LB": "ff_LT",
        },
    ))
    assert check_intersection_free(resolved, rot).ok


# ---------------------------------------------------------------------------
# iterated fibration structures


def sphere_resolution_ifs():
    poset = FacePoset.build(["circle_N", "circle_S"])
    fib = {
        "circle_N": Fibration("pole_N", 1),
        "circle_S": Fibration("pole_S", 1),
    }
    return poset, IteratedFibrationDesc(poset, fib)


def test_validate_ifs_sphere_tower_ok():
    poset, ifs = sphere_resolution_ifs()
    assert validate_ifs(poset, ifs) == []


def test_validate_ifs_equal_codim_violation():
    poset = FacePoset.build(
        ["h1", "h2"], [Face("c", 2, frozenset({"h1", "h2"}))]
    )
    ifs = IteratedFibrationDesc(
        poset, {"h1": Fibration("y1", 1), "h2": Fibration("y2", 1)}
    )
    out = validate_ifs(poset, ifs)
    assert any("share fibration codim" in v for v in out)


def test_validate_ifs_missing_compat_map():
    poset = FacePoset.build(
        ["h1", "h2"], [Face("c", 2, frozenset({"h1", "h2"}))]
    )
    ifs = IteratedFibrationDesc(
        poset, {"h1": Fibration("y1", 0), "h2": Fibration("y2", 1)}
    )
    out = validate_ifs(poset, ifs)
    assert any("missing compatibility map" in v for v in out)
    fixed = IteratedFibrationDesc(
        poset, dict(ifs.fibrations), {("h1", "h2"): "psi12"}
    )
    assert validate_ifs(poset, fixed) == []


def test_validate_ifs_composition_table_closure():
    faces = [
        Face("c12", 2, frozenset({"h1", "h2"})),
        Face("c13", 2, frozenset({"h1", "h3"})),
        Face("c23", 2, frozenset({"h2", "h3"})),
        Face("c123", 3, frozenset({"h1", "h2", "h3"})),
    ]
    poset = FacePoset.build(["h1", "h2", "h3"], faces)
    fib = {"h1": Fibration("y1", 0), "h2": Fibration("y2", 1), "h3": Fibration("y3", 2)}
    compat = {("h1", "h2"): "p12", ("h1", "h3"): "p13", ("h2", "h3"): "p23"}
    good = IteratedFibrationDesc(poset, fib, compat, {("p12", "p23"): "p13"})
    assert validate_ifs(poset, good) == []
    bad = IteratedFibrationDesc(poset, fib, compat, {("p12", "p23"): "other"})
    assert any("does not commute" in v for v in validate_ifs(poset, bad))


def test_induced_ifs_on_base():
    # h1 fibers with smallest codim and meets h2 (deeper); h3 is disjoint
    faces = [Face("c12", 2, frozenset({"h1", "h2"}))]
    poset = FacePoset.build(["h1", "h2", "h3"], faces)
    fib = {"h1": Fibration("y1", 0), "h2": Fibration("y2", 2), "h3": Fibration("y3", 1)}
    ifs = IteratedFibrationDesc(poset, fib, {("h1", "h2"): "p12"})
    base_poset, induced = induced_ifs_on_base(ifs, "h1")
    assert len(base_poset.hypersurfaces) == 1
    (only,) = induced.fibrations.values()
    assert only.base == "y2" and only.codim == 2
    assert validate_ifs(base_poset, induced) == []
    # disjoint hypersurface: empty induced structure
    empty_poset, empty = induced_ifs_on_base(ifs, "h3")
    assert empty_poset.hypersurfaces == frozenset()
    assert empty.fibrations == {}
    # appendix sphere: base of a boundary circle is a point, nothing induced
    sp, sifs = sphere_resolution_ifs()
    bp, bifs = induced_ifs_on_base(sifs, "circle_N")
    assert bp.hypersurfaces == frozenset() and bifs.fibrations == {}


def test_induced_ifs_inherits_validity():
    # octagon-like: a side (codim 0) meeting two front faces (codim 1)
    faces = [
        Face("c1", 2, frozenset({"side", "ff1"})),
        Face("c2", 2, frozenset({"side", "ff2"})),
    ]
    poset = FacePoset.build(["side", "ff1", "ff2"], faces)
    fib = {
        "side": Fibration("mid", 0),
        "ff1": Fibration("pt1", 1),
        "ff2": Fibration("pt2", 1),
    }
    ifs = IteratedFibrationDesc(
        poset, fib, {("side", "ff1"): "q1", ("side", "ff2"): "q2"}
    )
    assert validate_ifs(poset, ifs) == []
    base_poset, induced = induced_ifs_on_base(ifs, "side")
    assert len(base_poset.hypersurfaces) == 2
    assert validate_ifs(base_poset, induced) == []


def test_lift_ifs_interior_center_boundaryless():
    poset = FacePoset.build([])
    ifs = IteratedFibrationDesc(poset, {})
    new_poset, lifted = lift_ifs_under_blowup(ifs, poset, InteriorCenter("x"), ff_codim=1)
    assert len(new_poset.hypersurfaces) == 1
    (fib,) = lifted.fibrations.values()
    assert fib.base == "x" and fib.codim == 1


def test_lift_ifs_sphere_appendix():
    poset = FacePoset.build([])
    ifs = IteratedFibrationDesc(poset, {})
    p1, l1 = lift_ifs_under_blowup(ifs, poset, InteriorCenter("N"), ff_codim=1)
    p2, l2 = lift_ifs_under_blowup(l1, p1, InteriorCenter("S"), ff_codim=1)
    assert validate_ifs(p2, l2) == []
    assert {f.base for f in l2.fibrations.values()} == {"N", "S"}


def test_lift_ifs_requires_transversality_flags():
    poset = FacePoset.build(["h"])
    ifs = IteratedFibrationDesc(poset, {"h": Fibration("y", 2)})
    center = InteriorCenter("x", meets=frozenset({"h"}))
    with pytest.raises(PosetError):
        lift_ifs_under_blowup(ifs, poset, center, transversal=(), ff_codim=1)
    new_poset, lifted = lift_ifs_under_blowup(
        ifs, poset, center, transversal=("h",), ff_codim=1
    )
    assert validate_ifs(new_poset, lifted) == []


def test_lift_ifs_s2xs2_upstairs_replay():
    # round 1: four fixed points; round 2: the two pole-sphere lifts, each
    # meeting two of the front faces
    poset = FacePoset.build([])
    ifs = IteratedFibrationDesc(poset, {})
    for p in ("NN", "NS", "SN", "SS"):
        poset, ifs = lift_ifs_under_blowup(ifs, poset, InteriorCenter(p), ff_codim=3)
    for mid, meets in (
        ("m1N", ("ff_NN", "ff_NS")),
        ("m1S", ("ff_SN", "ff_SS")),
        ("m2N", ("ff_NN", "ff_SN")),
        ("m2S", ("ff_NS", "ff_SS")),
    ):
        poset, ifs = lift_ifs_under_blowup(
            ifs, poset, InteriorCenter(mid, meets=frozenset(meets)),
            transversal=meets, ff_codim=1,
        )
    assert len(poset.hypersurfaces) == 8
    assert validate_ifs(poset, ifs) == []


# ---------------------------------------------------------------------------
# serialization


def test_poset_round_trip():
    poset = square_poset()
    data = poset.to_dict()
    back = FacePoset.from_dict(data)
    assert back.hypersurfaces == poset.hypersurfaces
    assert {(f.id, f.codim, f.contains) for f in back.faces} == {
        (f.id, f.codim, f.contains) for f in poset.faces
    }


def test_poset_from_dict_rejects_bad_intersections():
    data = square_poset().to_dict()
    data["intersections"] = [["left", "right"]]
    with pytest.raises(PosetError):
        FacePoset.from_dict(data)


def test_poset_validate():
    ok = square_poset()
    assert ok.validate() == []
    bad = FacePoset(
        frozenset({"h"}),
        (Face("int", 0, frozenset()), Face("h", 1, frozenset({"h"})),
         Face("weird", 2, frozenset({"h"}))),
    )
    assert any("codim" in v for v in bad.validate())
