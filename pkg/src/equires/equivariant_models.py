"""The three reduced theories over a resolution tower and the Chern character.

Reduced Cartan cohomology is the Borel-coefficient equalizer complex;
delocalized cohomology is the same complex with representation-ring
coefficients cut to a character window; reduced K-theory is the equalizer
of windowed free modules over the representation rings, with the K-groups
of the node complexes supplied as fixture ranks (catalogue nodes are
points, intervals and circles).  The Chern character applies the truncated
exponential character-wise at every node and lands, by construction, in
the Borel equalizer; membership and closedness are verified exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import linalg
from .chain_engine import (
    BOREL,
    REP,
    CohomologyTable,
    LocalSystem,
    SimplicialComplexDesc,
    TowerComplexSlice,
    cohomology,
    equalizer_complex,
    rep_windows,
    twisted_cohomology,
)
from .group_data import (
    CompactGroupDesc,
    borel_fiber,
    chern_of_rep,
    rep_ring,
    restrict_rep,
)
from .linalg import Vector


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# reduced Cartan and delocalized cohomology


def reduced_cartan_cohomology(tower, max_degree: int) -> CohomologyTable:
    """Cohomology of the Borel-twisted relative complex through max_degree.

    Total degree is form degree plus twice the polynomial degree.
    """
    return cohomology(equalizer_complex(tower, BOREL, max_degree))


def delocalized_cohomology(tower, window: tuple[int, int]) -> CohomologyTable:
    """Even/odd ranks of the representation-ring equalizer complex.

    Requires abelian node groups (a formal group is admitted only on a
    tower without edges, where no derived restriction maps are needed).
    """
    return cohomology(equalizer_complex(tower, REP, window))


# ---------------------------------------------------------------------------
# reduced K-theory

KCoord = tuple[str, int, tuple]  # node, generator index, character


@dataclass(frozen=True)
class KClassPresentation:
    """Virtual class over the tower in normal form.

    Per node, integer multiplicities of (generator, character) summands;
    positive entries are the plus bundle, negative the minus bundle, and
    matching summands are already cancelled.  Presentations are equal in
    reduced K-theory exactly when these dictionaries agree.
    """

    entries: Mapping[str, Mapping[tuple[int, tuple], int]]

    @staticmethod
    def from_dict(data: Mapping[str, Mapping]) -> "KClassPresentation":
        clean: dict[str, dict] = {}
        for node, chars in data.items():
            acc: dict = {}
            for key, mult in chars.items():
                if len(key) == 2 and isinstance(key[1], tuple):
                    gen, char = int(key[0]), tuple(key[1])
                else:
                    gen, char = 0, tuple(key)
                acc[(gen, char)] = acc.get((gen, char), 0) + int(mult)
            clean[node] = {k: v for k, v in sorted(acc.items()) if v}
        return KClassPresentation({n: e for n, e in sorted(clean.items()) if e})

    def plus_minus(self) -> tuple[dict, dict]:
        plus: dict = {}
        minus: dict = {}
        for node, chars in self.entries.items():
            for key, mult in chars.items():
                (plus if mult > 0 else minus).setdefault(node, {})[key] = abs(mult)
        return plus, minus

    def to_dict(self) -> dict:
        return {
            node: {f"{gen}:{','.join(map(str, char))}": mult for (gen, char), mult in chars.items()}
            for node, chars in self.entries.items()
        }

    def to_wire(self) -> list[dict]:
        """Wire form: one {node, plus, minus} entry per node, characters
        repeated with multiplicity."""
        out = []
        for node, chars in self.entries.items():
            plus: list[list[int]] = []
            minus: list[list[int]] = []
            for (gen, char), mult in chars.items():
                target = plus if mult > 0 else minus
                target.extend([list(char)] * abs(mult))
            out.append({"node": node, "plus": plus, "minus": minus})
        return out

    @staticmethod
    def from_wire(data: Sequence[Mapping]) -> "KClassPresentation":
        acc: dict[str, dict] = {}
        for entry in data:
            node = entry["node"]
            for char in entry.get("plus", ()):
                key = tuple(char)
                acc.setdefault(node, {})[key] = acc.get(node, {}).get(key, 0) + 1
            for char in entry.get("minus", ()):
                key = tuple(char)
                acc.setdefault(node, {})[key] = acc.get(node, {}).get(key, 0) - 1
        return KClassPresentation.from_dict(acc)


@dataclass(frozen=True)
class KTheoryTables:
    k0_rank: int
    k1_rank: int
    k0_basis: tuple[KClassPresentation, ...]
    windows: Mapping[str, tuple]


def _k_coords(tower, windows, ranks: Mapping[str, int]) -> list[KCoord]:
    coords = []
    for nid in sorted(tower.nodes):
        for g in range(ranks[nid]):
            for char in windows[nid]:
                coords.append((nid, g, char))
    return coords


def _k_constraints(tower, windows, ranks: Mapping[str, int], coords: Sequence[KCoord]) -> list[Vector]:
    index = {c: i for i, c in enumerate(coords)}
    rows: list[Vector] = []
    for e in tower.edges:
        src, tgt = e.source, e.target
        r_src, r_tgt = ranks[src], ranks[tgt]
        if r_src == 0 or r_tgt == 0:
            if r_src != r_tgt:
                raise ModelError(
                    f"edge {e.hyp_id}: K-rank fixture mismatch ({r_src} vs {r_tgt}) "
                    "needs explicit restriction data"
                )
            continue
        if r_src != r_tgt:
            raise ModelError(
                f"edge {e.hyp_id}: unequal K-rank fixtures need explicit matrices"
            )
        rm = restrict_rep(e.inclusion)
        # image multiset: target chars restricting to each source char
        preimage: dict[tuple, list[tuple]] = {}
        for c in windows[tgt]:
            preimage.setdefault(rm.apply_char(c), []).append(c)
        for g in range(r_src):
            for c in windows[src]:
                row = [Fraction(0)] * len(coords)
                row[index[(src, g, c)]] = Fraction(1)
                for ct in preimage.get(c, ()):
                    row[index[(tgt, g, ct)]] -= Fraction(1)
                rows.append(row)
    return rows


def reduced_k_theory(tower, window: tuple[int, int]) -> KTheoryTables:
    """Equalizer of the windowed representation modules over the tower.

    K^0 uses the per-node k0 fixture ranks, K^1 the k1 ranks; the basis of
    the K^0 equalizer is returned as normal-form presentations.
    """
    lo, hi = window
    windows = rep_windows(tower, lo, hi)
    ranks0 = {nid: tower.nodes[nid].k_data.k0 for nid in tower.nodes}
    ranks1 = {nid: tower.nodes[nid].k_data.k1 for nid in tower.nodes}

    coords0 = _k_coords(tower, windows, ranks0)
    rows0 = _k_constraints(tower, windows, ranks0, coords0)
    basis0 = linalg.kernel_basis(rows0, len(coords0))

    coords1 = _k_coords(tower, windows, ranks1)
    rows1 = _k_constraints(tower, windows, ranks1, coords1)
    basis1 = linalg.kernel_basis(rows1, len(coords1))

    presentations = tuple(_presentation(coords0, v) for v in basis0)
    return KTheoryTables(len(basis0), len(basis1), presentations, windows)


def _presentation(coords: Sequence[KCoord], vec: Vector) -> KClassPresentation:
    # scale to integers
    denom = 1
    for x in vec:
        denom = denom * x.denominator // _gcd(denom, x.denominator)
    data: dict[str, dict] = {}
    for (node, g, char), x in zip(coords, vec):
        v = int(x * denom)
        if v:
            data.setdefault(node, {})[(g, char)] = v
    return KClassPresentation({n: dict(sorted(e.items())) for n, e in sorted(data.items())})


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a) or 1


def k_membership(tower, window: tuple[int, int], assignment: Mapping[str, Mapping]) -> bool:
    """Whether a partial per-node character assignment extends to a K^0 class.

    Nodes absent from `assignment` are free; listed nodes are pinned to the
    stated virtual characters (keys are characters, or (generator,
    character) pairs).
    """
    lo, hi = window
    windows = rep_windows(tower, lo, hi)
    ranks0 = {nid: tower.nodes[nid].k_data.k0 for nid in tower.nodes}
    coords = _k_coords(tower, windows, ranks0)
    rows = _k_constraints(tower, windows, ranks0, coords)
    pinned = KClassPresentation.from_dict(dict(assignment)).entries
    for nid in pinned:
        if nid not in tower.nodes:
            raise ModelError(f"assignment references unknown node {nid!r}")
    free_idx = [i for i, (nid, g, c) in enumerate(coords) if nid not in pinned]
    consts = []
    for nid, g, c in coords:
        consts.append(Fraction(pinned.get(nid, {}).get((g, c), 0)) if nid in pinned else Fraction(0))
    if not rows:
        return True
    reduced = [[row[i] for i in free_idx] for row in rows]
    rhs = [-sum((row[i] * consts[i] for i in range(len(coords))), Fraction(0)) for row in rows]
    aug = [r + [b] for r, b in zip(reduced, rhs)]
    return linalg.rank(reduced) == linalg.rank(aug)


# ---------------------------------------------------------------------------
# Chern character


@dataclass(frozen=True)
class ChernImage:
    """A closed class in the Borel equalizer complex, truncated at max degree.

    `vectors[n]` is the ambient coordinate vector at total degree n;
    `coords[n]` expresses it on the slice basis (its existence is the
    constraint check).  The degree-0 component carries the augmentations.
    """

    max_degree: int
    vectors: Mapping[int, Vector]
    coords: Mapping[int, Vector]
    constraint_defect: int


def chern_character(
    tower,
    k_class: KClassPresentation,
    max_degree: int,
    slices: Optional[Sequence[TowerComplexSlice]] = None,
) -> ChernImage:
    """Coefficient-level Chern character of a reduced K-class.

    Every character summand contributes its truncated exponential as a
    constant 0-form on its node (K-generators are fixture trivial bundles,
    so their own character is the constant 1).  The image is verified to
    satisfy every equalizer constraint and to be closed; a violation means
    the input presentation was not a compatible K-class.
    """
    if max_degree % 2 != 0 or max_degree < 0:
        raise ModelError("chern truncation degree must be even and nonnegative")
    if slices is None:
        slices = equalizer_complex(tower, BOREL, max_degree)

    node_poly: dict[str, dict[int, dict]] = {}
    for nid, chars in k_class.entries.items():
        group = tower.nodes[nid].group
        tau: dict = {}
        for (g, char), mult in chars.items():
            tau[char] = tau.get(char, 0) + mult
        node_poly[nid] = chern_of_rep(group, tau, max_degree)

    vectors: dict[int, Vector] = {}
    coords: dict[int, Vector] = {}
    defect = 0
    for s in slices:
        n = s.degree
        if n % 2 != 0:
            continue
        vec = [Fraction(0)] * len(s.labels)
        for i, (nid, k, simplex, d, fi) in enumerate(s.labels):
            if k != 0 or nid not in node_poly:
                continue
            piece = node_poly[nid].get(d)
            if not piece:
                continue
            ring = borel_fiber(tower.nodes[nid].group)
            basis = ring.basis(d)
            vec[i] = piece.get(basis[fi], Fraction(0))
        vectors[n] = vec
        if not any(vec):
            coords[n] = [Fraction(0)] * s.dim
            continue
        try:
            sol = linalg.solve_columns(list(s.basis), [vec])
            coords[n] = [row[0] for row in sol]
        except ValueError:
            defect += 1
            coords[n] = []
            continue
        if s.differential:
            img = linalg.mat_vec(s.differential, coords[n])
            if any(img):
                defect += 1
    return ChernImage(max_degree, vectors, coords, defect)


def chern_image_rank(
    tower, window: tuple[int, int], max_degree: int
) -> tuple[int, int, int]:
    """(rank of the stacked Chern images of a K^0 window basis,
    K^0 window rank, sum of even reduced-Cartan ranks through max_degree).

    The three agree at desk scale when the image matrix is square in the
    window; the middle value can exceed the first if the window is larger
    than the truncation can separate.
    """
    kt = reduced_k_theory(tower, window)
    slices = equalizer_complex(tower, BOREL, max_degree)
    stacked: list[Vector] = []
    total_defect = 0
    for pres in kt.k0_basis:
        img = chern_character(tower, pres, max_degree, slices=slices)
        total_defect += img.constraint_defect
        stacked.append(
            [x for n in sorted(img.vectors) for x in img.vectors[n]]
        )
    if total_defect:
        raise ModelError("chern image violated equalizer constraints")
    rank = linalg.rank(linalg.column_stack(stacked)) if stacked else 0
    even = cohomology(slices).even
    return rank, kt.k0_rank, even


# ---------------------------------------------------------------------------
# single-type shortcut


@dataclass(frozen=True)
class FixedIsotropyTables:
    cartan: CohomologyTable
    deloc: CohomologyTable
    k0_rank: int
    k1_rank: int


def fixed_isotropy_shortcut(
    group: CompactGroupDesc,
    base: SimplicialComplexDesc,
    max_degree: int,
    window: tuple[int, int],
    monodromy: Mapping[tuple[str, str], tuple] = None,
    k0: int = 1,
    k1: int = 0,
) -> FixedIsotropyTables:
    """Direct single-type computation: no tower, just the twisted complexes.

    H(base; Borel system) and the R(K)-window tensor of the fixture K-data;
    cross-validates single-node towers.
    """
    monodromy = dict(monodromy or {})
    ring = borel_fiber(group)
    dims = {d: ring.dim(d) for d in range(0, max_degree + 1) if ring.dim(d)}
    if monodromy and group.is_formal:
        raise ModelError("monodromy on formal groups is unsupported")
    from .chain_engine import _borel_transports  # local: same transport builder

    class _Node:
        def __init__(self):
            self.group = group
            self.monodromy = monodromy

    borel_system = LocalSystem(base, dims, _borel_transports(_Node(), ring, sorted(dims)))
    cartan = twisted_cohomology(base, borel_system, (0, max_degree))

    rr = rep_ring(group)
    if group.is_formal:
        chars = tuple(group.formal.rep.basis)
    else:
        chars = rr.window(*window)
        for _, lattice in sorted(monodromy.items()):
            from .group_data import RepMap

            mm = RepMap(rr, rr, tuple(tuple(int(x) for x in row) for row in lattice))
            if any(mm.apply_char(c) not in set(chars) for c in chars):
                raise ModelError("character window is not invariant under the monodromy")
    rep_transports = {}
    if monodromy and not group.is_formal:
        from .chain_engine import _rep_transports

        rep_transports = _rep_transports(_Node(), chars)
    rep_system = LocalSystem(base, {0: len(chars)}, rep_transports)
    deloc = twisted_cohomology(base, rep_system, (0, max(base.dim, 0)))

    return FixedIsotropyTables(cartan, deloc, len(chars) * k0, len(chars) * k1)
