"""Groups, coefficient rings, restriction maps, coefficient Chern character."""

import random
from fractions import Fraction
from math import comb, factorial

import pytest

from equires.group_data import (
    CompactGroupDesc,
    FormalGroupData,
    FormalRepRing,
    GradedRingDesc,
    GroupDataError,
    GroupInclusion,
    TRIVIAL_GROUP,
    borel_fiber,
    chern_of_rep,
    graded_mul,
    rep_ring,
    restrict_poly,
    restrict_rep,
)

T1 = CompactGroupDesc(1)
T2 = CompactGroupDesc(2)
Z2 = CompactGroupDesc(0, (2,))


# ---------------------------------------------------------------------------
# borel fibers


def test_borel_circle_dims():
    ring = borel_fiber(T1)
    assert [ring.dim(d) for d in (0, 2, 4)] == [1, 1, 1]
    assert ring.dim(3) == 0


def test_borel_finite_group_is_rationals_in_degree_zero():
    ring = borel_fiber(Z2)
    assert ring.nvars == 0
    assert ring.dim(0) == 1
    assert ring.dim(2) == 0


def test_borel_torus_rank_two():
    ring = borel_fiber(T2)
    assert ring.dim(4) == 3  # u1^2, u1 u2, u2^2


def test_borel_dimension_binomial_count():
    for r in range(4):
        ring = borel_fiber(CompactGroupDesc(r))
        for p in range(6):
            expected = comb(p + r - 1, r - 1) if r else (1 if p == 0 else 0)
            assert ring.dim(2 * p) == expected


def test_borel_formal_override_returned():
    formal = FormalGroupData(
        borel=GradedRingDesc(generators=(("g", 4),), dims=(1, 0, 0, 0, 1)),
        rep=FormalRepRing(("1", "s"), {("s", "s"): {"1": 1}}, "1"),
    )
    g = CompactGroupDesc(0, (), formal)
    assert borel_fiber(g) is formal.borel
    assert rep_ring(g) is formal.rep


def test_graded_ring_invariants():
    with pytest.raises(GroupDataError):
        GradedRingDesc(generators=(("u", 3),))  # odd degree
    with pytest.raises(GroupDataError):
        GradedRingDesc(generators=(), dims=(2,))  # degree-0 dim must be 1


# ---------------------------------------------------------------------------
# representation rings


def test_rep_ring_circle_product():
    rr = rep_ring(T1)
    assert rr.mul_chars((2,), (3,)) == (5,)
    assert rr.mul({(1,): 1}, {(1,): 1}) == {(2,): 1}
    assert rr.augmentation({(1,): 2, (-3,): 1}) == 3


def test_rep_ring_z2():
    rr = rep_ring(Z2)
    s = (1,)
    assert rr.mul_chars(s, s) == (0,)  # s . s = 1
    assert rr.unit == (0,)


def test_rep_ring_product_group_basis():
    rr = rep_ring(CompactGroupDesc(1, (2,)))
    win = rr.window(-1, 1)
    assert len(win) == 3 * 2
    assert rr.mul_chars((1, 1), (2, 1)) == (3, 0)


def test_rep_ring_window_trivial_group():
    rr = rep_ring(TRIVIAL_GROUP)
    assert rr.window(-5, 5) == ((),)


def test_invariant_factor_validation():
    with pytest.raises(GroupDataError):
        CompactGroupDesc(0, (1,))
    with pytest.raises(GroupDataError):
        CompactGroupDesc(-1)


def test_descriptor_equality_is_identity_of_data():
    assert CompactGroupDesc(1, (2,)) == CompactGroupDesc(1, (2,))
    assert CompactGroupDesc(1) != CompactGroupDesc(1, (2,))
    assert CompactGroupDesc(2) != CompactGroupDesc(1)


# ---------------------------------------------------------------------------
# restriction maps


def trivial_in_circle():
    return GroupInclusion(TRIVIAL_GROUP, T1, ())


def diagonal_in_t2():
    return GroupInclusion(T1, T2, ((1, 1),))


def first_factor_in_t2():
    return GroupInclusion(T1, T2, ((1, 0),))


def test_restrict_poly_to_trivial_group():
    pm = restrict_poly(trivial_in_circle())
    assert pm.matrix(0) == [[1]]  # 1 -> 1
    assert pm.matrix(2) == []  # u -> 0 (no degree-2 piece downstairs)
    assert pm.apply_poly({(1,): Fraction(1)}) == {}


def test_restrict_poly_diagonal():
    pm = restrict_poly(diagonal_in_t2())
    # u1 -> u, u2 -> u
    assert pm.apply_poly({(1, 0): Fraction(1)}) == {(1,): Fraction(1)}
    assert pm.apply_poly({(0, 1): Fraction(1)}) == {(1,): Fraction(1)}


def test_restrict_poly_first_factor():
    pm = restrict_poly(first_factor_in_t2())
    assert pm.apply_poly({(1, 0): Fraction(1)}) == {(1,): Fraction(1)}
    assert pm.apply_poly({(0, 1): Fraction(1)}) == {}


def test_restrict_poly_degree_matrix_shape():
    pm = restrict_poly(first_factor_in_t2())
    mat = pm.matrix(4)  # domain u1^2, u1u2, u2^2 -> codomain u^2
    assert len(mat) == 1 and len(mat[0]) == 3
    assert mat == [[1, 0, 0]]


def test_restrict_rep_to_trivial_is_augmentation():
    rm = restrict_rep(trivial_in_circle())
    assert rm.apply({(5,): 2, (-1,): 3}) == {(): 5}


def test_restrict_rep_diagonal():
    rm = restrict_rep(diagonal_in_t2())
    assert rm.apply_char((2, 3)) == (5,)


def test_restrict_rep_z2_in_circle():
    incl = GroupInclusion(Z2, T1, ((1,),))
    rm = restrict_rep(incl)
    assert rm.apply_char((4,)) == (0,)
    assert rm.apply_char((3,)) == (1,)


def test_inclusion_shape_validation():
    with pytest.raises(GroupDataError):
        GroupInclusion(T1, T2, ((1,),))  # wrong width
    with pytest.raises(GroupDataError):
        GroupInclusion(T1, T2, ((1, 0),), lie_map=((1, 2),))  # wrong lie shape
    with pytest.raises(GroupDataError):
        # finite target character restricting to a torus weight is malformed
        GroupInclusion(T1, CompactGroupDesc(0, (2,)), ((1,),))


def test_inclusion_finite_well_definedness():
    z4 = CompactGroupDesc(0, (4,))
    # Z/4 -> Z/2 dual map must send order-2 characters to order-2 characters
    GroupInclusion(Z2, z4, ((2,),))  # fine: s -> t^2
    with pytest.raises(GroupDataError):
        GroupInclusion(z4, Z2, ((1,),))  # Z/2 character of order 4: impossible


# ---------------------------------------------------------------------------
# functoriality on random composable inclusions (spec invariant, 100 cases)


def _random_inclusion(rng, source, target):
    lat = tuple(
        tuple(rng.randint(-2, 2) for _ in range(target.torus_rank))
        for _ in range(source.torus_rank)
    )
    return GroupInclusion(source, target, lat)


def test_functoriality_100_random_composites():
    rng = random.Random(4321)
    for _ in range(100):
        ra, rb, rc = (rng.randint(0, 2) for _ in range(3))
        a, b, c = CompactGroupDesc(ra), CompactGroupDesc(rb), CompactGroupDesc(rc)
        ab = _random_inclusion(rng, a, b)
        bc = _random_inclusion(rng, b, c)
        ac = bc.compose(ab)
        # rep: restriction along composite equals composite of restrictions
        rm_ac = restrict_rep(ac)
        rm_ab, rm_bc = restrict_rep(ab), restrict_rep(bc)
        for _ in range(5):
            char = tuple(rng.randint(-3, 3) for _ in range(rc))
            assert rm_ac.apply_char(char) == rm_ab.apply_char(rm_bc.apply_char(char))
        # poly: compare induced matrices on low degrees
        pm_ac = restrict_poly(ac)
        pm_ab, pm_bc = restrict_poly(ab), restrict_poly(bc)
        for degree in (0, 2, 4):
            direct = pm_ac.matrix(degree)
            m_ab, m_bc = pm_ab.matrix(degree), pm_bc.matrix(degree)
            rows = borel_fiber(a).dim(degree)
            cols = borel_fiber(c).dim(degree)
            mid = borel_fiber(b).dim(degree)
            composite = [
                [
                    sum((m_ab[i][k] * m_bc[k][j] for k in range(mid)), Fraction(0))
                    for j in range(cols)
                ]
                for i in range(rows)
            ]
            assert direct == composite


def test_augmentation_preserved_by_restriction():
    rng = random.Random(7)
    for _ in range(50):
        src = CompactGroupDesc(rng.randint(0, 2), (2,) if rng.random() < 0.3 else ())
        tgt = CompactGroupDesc(rng.randint(0, 2))
        lat = tuple(
            tuple(rng.randint(-2, 2) for _ in range(tgt.dual_rank))
            for _ in range(src.dual_rank)
        )
        try:
            incl = GroupInclusion(src, tgt, lat)
        except GroupDataError:
            continue
        rm = restrict_rep(incl)
        elem = {
            tuple(rng.randint(-2, 2) for _ in range(tgt.dual_rank)): rng.randint(-3, 3)
            for _ in range(3)
        }
        assert rep_ring(src).augmentation(rm.apply(elem)) == rep_ring(tgt).augmentation(elem)


# ---------------------------------------------------------------------------
# Chern character at coefficient level


def exp_oracle(weight, max_degree):
    """Term-by-term exponential of a single torus weight, independent path."""
    out = {}
    for k in range(0, max_degree // 2 + 1):
        out[2 * k] = {(k,): Fraction(weight**k, factorial(k))}
    return {d: {m: c for m, c in p.items() if c} for d, p in out.items() if any(p.values())}


def test_chern_trivial_character():
    ch = chern_of_rep(T1, {(0,): 1}, 8)
    assert ch == {0: {(0,): Fraction(1)}}


def test_chern_weight_one_matches_exponential_oracle():
    ch = chern_of_rep(T1, {(1,): 1}, 4)
    assert ch == exp_oracle(1, 4)
    assert ch[4] == {(2,): Fraction(1, 2)}


def test_chern_ring_map_t1_t2_equals_t3():
    # expand both sides independently and compare through degree 6
    ring = borel_fiber(T1)
    lhs = graded_mul(ring, chern_of_rep(T1, {(1,): 1}, 6), chern_of_rep(T1, {(2,): 1}, 6), 6)
    rhs = chern_of_rep(T1, {(3,): 1}, 6)
    assert lhs == rhs
    assert rhs == exp_oracle(3, 6)


def test_chern_multiplicative_100_random_monomials():
    rng = random.Random(2026)
    ring = borel_fiber(T2)
    for _ in range(100):
        a = (rng.randint(-3, 3), rng.randint(-3, 3))
        b = (rng.randint(-3, 3), rng.randint(-3, 3))
        prod_char = tuple(x + y for x, y in zip(a, b))
        lhs = graded_mul(ring, chern_of_rep(T2, {a: 1}, 8), chern_of_rep(T2, {b: 1}, 8), 8)
        rhs = chern_of_rep(T2, {prod_char: 1}, 8)
        assert lhs == rhs


def test_chern_degree_zero_is_augmentation():
    rng = random.Random(5)
    for _ in range(30):
        tau = {
            (rng.randint(-3, 3),): rng.randint(-4, 4) for _ in range(3)
        }
        ch = chern_of_rep(T1, tau, 6)
        aug = rep_ring(T1).augmentation(tau)
        got = ch.get(0, {}).get((0,), Fraction(0))
        assert got == aug


def test_chern_finite_characters_drop_to_augmentation():
    g = CompactGroupDesc(1, (2,))
    ch = chern_of_rep(g, {(2, 1): 1}, 4)
    # finite component contributes nothing beyond the identity-component data
    assert ch == exp_oracle(2, 4)


def test_chern_rejects_odd_degree():
    with pytest.raises(GroupDataError):
        chern_of_rep(T1, {(1,): 1}, 3)
    with pytest.raises(GroupDataError):
        chern_of_rep(T1, {(1,): 1}, -2)


def test_rep_ring_commutative_associative_on_basis():
    rng = random.Random(11)
    rr = rep_ring(CompactGroupDesc(1, (2, 4)))
    chars = [
        (rng.randint(-3, 3), rng.randint(0, 1), rng.randint(0, 3)) for _ in range(12)
    ]
    for a in chars:
        for b in chars:
            assert rr.mul_chars(a, b) == rr.mul_chars(b, a)
    for a, b, c in zip(chars, chars[1:], chars[2:]):
        assert rr.mul_chars(rr.mul_chars(a, b), c) == rr.mul_chars(a, rr.mul_chars(b, c))
    # unit and augmentation behave as a ring map to the integers
    assert rr.mul_chars(rr.unit, chars[0]) == rr.reduce(chars[0])
    x = {chars[0]: 2, chars[1]: -1}
    y = {chars[2]: 3}
    assert rr.augmentation(rr.mul(x, y)) == rr.augmentation(x) * rr.augmentation(y)
