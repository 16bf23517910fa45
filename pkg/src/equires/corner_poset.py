"""Combinatorial calculus of manifolds with corners at face-lattice level.

Faces are abstract ids carrying a codimension and the set of boundary
hypersurfaces containing them; components of intersections are enumerated
explicitly as separate faces.  Geometry never enters: blow-up is pure
bookkeeping on the lattice, fibration structures are validated through
their incidence data only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence


class PosetError(ValueError):
    pass


class InvalidActionError(PosetError):
    pass


class UnsupportedBlowupError(PosetError):
    pass


@dataclass(frozen=True)
class Face:
    id: str
    codim: int
    contains: frozenset[str]
    embedded: bool = True

    def __post_init__(self):
        object.__setattr__(self, "contains", frozenset(self.contains))


@dataclass(frozen=True)
class FacePoset:
    """Face lattice of a manifold with corners.

    The subface order defaults to reverse containment of hypersurface sets;
    explicit `order` pairs (sub, super) refine it when distinct components
    share the same hypersurface set.
    """

    hypersurfaces: frozenset[str]
    faces: tuple[Face, ...]
    order: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "hypersurfaces", frozenset(self.hypersurfaces))
        object.__setattr__(self, "order", frozenset(self.order))
        ids = [f.id for f in self.faces]
        if len(set(ids)) != len(ids):
            raise PosetError("duplicate face ids")

    @staticmethod
    def build(hypersurfaces: Iterable[str], corner_faces: Iterable[Face] = ()) -> "FacePoset":
        """Poset with the interior face and one codim-1 face per hypersurface."""
        hs = sorted(set(hypersurfaces))
        faces = [Face("int", 0, frozenset())]
        faces += [Face(h, 1, frozenset([h])) for h in hs]
        faces += list(corner_faces)
        return FacePoset(frozenset(hs), tuple(faces))

    def face(self, fid: str) -> Face:
        for f in self.faces:
            if f.id == fid:
                return f
        raise PosetError(f"unknown face {fid!r}")

    def interior(self) -> Face:
        tops = [f for f in self.faces if f.codim == 0]
        if len(tops) != 1:
            raise PosetError("poset must have exactly one codimension-0 face")
        return tops[0]

    def leq(self, a: Face, b: Face) -> bool:
        """a <= b: a is a subface of b.

        Reverse containment of hypersurface sets, refined by the transitive
        closure of any explicit order pairs.
        """
        if a.id == b.id:
            return True
        if a.contains > b.contains:
            return True
        return bool(self.order) and a.id in self._descendants(b.id)

    def _descendants(self, fid: str) -> set[str]:
        out, frontier = {fid}, [fid]
        while frontier:
            cur = frontier.pop()
            for s, t in self.order:
                if t == cur and s not in out:
                    out.add(s)
                    frontier.append(s)
        return out

    def hypersurfaces_intersect(self, h1: str, h2: str) -> bool:
        if h1 == h2:
            return False
        return any({h1, h2} <= f.contains for f in self.faces)

    def intersection_faces(self, h1: str, h2: str) -> tuple[Face, ...]:
        return tuple(f for f in self.faces if {h1, h2} <= f.contains)

    def validate(self) -> list[str]:
        violations = []
        tops = [f for f in self.faces if f.codim == 0]
        if len(tops) != 1:
            violations.append(f"expected exactly one codim-0 face, found {len(tops)}")
        seen_h = set()
        for f in self.faces:
            extra = f.contains - self.hypersurfaces
            if extra:
                violations.append(f"face {f.id}: unknown hypersurfaces {sorted(extra)}")
            if f.embedded and f.codim != len(f.contains):
                violations.append(
                    f"face {f.id}: codim {f.codim} != {len(f.contains)} containing hypersurfaces"
                )
            if f.codim == 1:
                seen_h |= f.contains
        missing = self.hypersurfaces - seen_h
        if missing:
            violations.append(f"hypersurfaces without codim-1 face: {sorted(missing)}")
        return violations

    def to_dict(self) -> dict:
        return {
            "hypersurfaces": sorted(self.hypersurfaces),
            "faces": [
                {"id": f.id, "codim": f.codim, "contains": sorted(f.contains)}
                for f in self.faces
            ],
            "intersections": sorted(
                [sorted(p) for p in itertools.combinations(sorted(self.hypersurfaces), 2)
                 if self.hypersurfaces_intersect(*p)]
            ),
        }

    @staticmethod
    def from_dict(data: Mapping) -> "FacePoset":
        faces = tuple(
            Face(f["id"], int(f["codim"]), frozenset(f["contains"]))
            for f in data["faces"]
        )
        poset = FacePoset(frozenset(data["hypersurfaces"]), faces)
        declared = data.get("intersections")
        if declared is not None:
            actual = sorted(
                sorted(p) for p in itertools.combinations(sorted(poset.hypersurfaces), 2)
                if poset.hypersurfaces_intersect(*p)
            )
            if sorted(map(sorted, declared)) != actual:
                raise PosetError("declared intersections disagree with face data")
        return poset


@dataclass(frozen=True)
class HypersurfaceAction:
    """Generators of a group action given as permutations of hypersurface ids.

    Permutations may be partial; omitted ids are fixed.
    """

    generators: tuple[Mapping[str, str], ...]

    def full(self, poset: FacePoset) -> list[dict[str, str]]:
        out = []
        for g in self.generators:
            perm = {h: g.get(h, h) for h in poset.hypersurfaces}
            if sorted(perm.values()) != sorted(poset.hypersurfaces):
                raise InvalidActionError("generator is not a permutation of the hypersurfaces")
            out.append(perm)
        return out

    def check_preserves(self, poset: FacePoset) -> None:
        signature = sorted((f.codim, tuple(sorted(f.contains))) for f in poset.faces)
        for perm in self.full(poset):
            mapped = sorted(
                (f.codim, tuple(sorted(perm[h] for h in f.contains))) for f in poset.faces
            )
            if mapped != signature:
                raise InvalidActionError("generator does not preserve the face poset")

    def orbits(self, poset: FacePoset) -> list[frozenset[str]]:
        perms = self.full(poset)
        parent = {h: h for h in poset.hypersurfaces}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for perm in perms:
            for h, h2 in perm.items():
                parent[find(h)] = find(h2)
        groups: dict[str, set[str]] = {}
        for h in poset.hypersurfaces:
            groups.setdefault(find(h), set()).add(h)
        return sorted((frozenset(g) for g in groups.values()), key=lambda s: sorted(s))


@dataclass(frozen=True)
class IntersectionFreeResult:
    ok: bool
    partition: tuple[frozenset[str], ...] = ()
    witness: Optional[tuple[frozenset[str], str, str]] = None  # orbit, h1, h2


def check_intersection_free(poset: FacePoset, action: HypersurfaceAction) -> IntersectionFreeResult:
    """Partition hypersurfaces into invariant blocks of disjoint elements.

    Any invariant partition is a coarsening of the orbit partition, so the
    action fails to be boundary intersection free exactly when some orbit
    contains two intersecting hypersurfaces; that orbit and pair are the
    returned witness.  Otherwise orbits are merged into as few blocks as
    possible by an exact minimal coloring of the orbit conflict graph.
    """
    action.check_preserves(poset)
    orbits = action.orbits(poset)
    for orbit in orbits:
        for h1, h2 in itertools.combinations(sorted(orbit), 2):
            if poset.hypersurfaces_intersect(h1, h2):
                return IntersectionFreeResult(False, witness=(orbit, h1, h2))
    n = len(orbits)
    conflict = [
        [
            any(
                poset.hypersurfaces_intersect(a, b)
                for a in orbits[i]
                for b in orbits[j]
            )
            for j in range(n)
        ]
        for i in range(n)
    ]
    coloring = _min_coloring(conflict)
    blocks: dict[int, set[str]] = {}
    for i, c in enumerate(coloring):
        blocks.setdefault(c, set()).update(orbits[i])
    partition = tuple(sorted((frozenset(b) for b in blocks.values()), key=lambda s: sorted(s)))
    return IntersectionFreeResult(True, partition=partition)


def _min_coloring(conflict: list[list[bool]]) -> list[int]:
    """Exact minimal proper coloring by iterative deepening backtracking."""
    n = len(conflict)
    if n == 0:
        return []
    for k in range(1, n + 1):
        colors = [-1] * n

        def assign(i: int) -> bool:
            if i == n:
                return True
            used = {colors[j] for j in range(i) if conflict[i][j]}
            # bound symmetry: only allow introducing one fresh color at a time
            limit = min(k, max(colors[:i], default=-1) + 2)
            for c in range(limit):
                if c not in used:
                    colors[i] = c
                    if assign(i + 1):
                        return True
                    colors[i] = -1
            return False

        if assign(0):
            return colors
    raise AssertionError("coloring with n colors always exists")


def validate_partition(poset: FacePoset, action: HypersurfaceAction,
                       partition: Sequence[Iterable[str]]) -> bool:
    """True if partition blocks are disjoint-element, invariant, and cover."""
    blocks = [frozenset(b) for b in partition]
    covered: set[str] = set()
    for b in blocks:
        if b & covered:
            return False
        covered |= b
    if covered != set(poset.hypersurfaces):
        return False
    for b in blocks:
        for h1, h2 in itertools.combinations(sorted(b), 2):
            if poset.hypersurfaces_intersect(h1, h2):
                return False
    for perm in action.full(poset):
        for b in blocks:
            if frozenset(perm[h] for h in b) != b:
                return False
    return True


# ---------------------------------------------------------------------------
# blow-up


@dataclass(frozen=True)
class InteriorCenter:
    """Interior p-submanifold descriptor: incidence with hypersurfaces only."""

    id: str
    meets: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "meets", frozenset(self.meets))


@dataclass(frozen=True)
class BlowupResult:
    poset: FacePoset
    front_face: str
    lift: Mapping[str, str]  # old hypersurface id -> its lift (identity here)


def blowup_face_poset(
    poset: FacePoset,
    center,
    separates: bool = False,
) -> BlowupResult:
    """Face lattice of [M; X] for a face id or InteriorCenter descriptor.

    The center and its strict subfaces disappear; every face strictly above
    it acquires a companion on the new front face.  Lifted hypersurfaces
    keep their ids.
    """
    if separates:
        raise UnsupportedBlowupError(
            "separating blow-ups are not representable at poset level"
        )
    if isinstance(center, InteriorCenter):
        missing = center.meets - poset.hypersurfaces
        if missing:
            raise PosetError(f"center meets unknown hypersurfaces {sorted(missing)}")
        ff = f"ff_{center.id}"
        if ff in poset.hypersurfaces:
            raise PosetError(f"front face id {ff} already taken")
        faces = list(poset.faces)
        faces.append(Face(ff, 1, frozenset([ff])))
        for h in sorted(center.meets):
            faces.append(Face(f"{h}*{ff}", 2, frozenset([h, ff])))
        new = FacePoset(poset.hypersurfaces | {ff}, tuple(faces), poset.order)
        return BlowupResult(new, ff, {h: h for h in poset.hypersurfaces})

    cf = poset.face(center)
    if cf.codim == 0:
        raise PosetError("cannot blow up the whole manifold")
    if cf.codim == 1:
        raise PosetError("blowing up a boundary hypersurface is trivial; rejected")
    ff = f"ff_{cf.id}"
    if ff in poset.hypersurfaces:
        raise PosetError(f"front face id {ff} already taken")
    removed = {f.id for f in poset.faces if poset.leq(f, cf)}
    kept = [f for f in poset.faces if f.id not in removed]
    above = [f for f in poset.faces if poset.leq(cf, f) and f.id != cf.id]
    new_faces = list(kept)
    new_order = {(a, b) for (a, b) in poset.order if a not in removed and b not in removed}
    for f in above:
        nid = ff if f.codim == 0 else f"{f.id}*{ff}"
        new_faces.append(Face(nid, f.codim + 1, f.contains | {ff}))
        new_order.add((nid, f.id))
    for f, g in itertools.combinations(above, 2):
        fa = ff if f.codim == 0 else f"{f.id}*{ff}"
        ga = ff if g.codim == 0 else f"{g.id}*{ff}"
        if poset.leq(f, g):
            new_order.add((fa, ga))
        elif poset.leq(g, f):
            new_order.add((ga, fa))
    new = FacePoset(poset.hypersurfaces | {ff}, tuple(new_faces), frozenset(new_order))
    return BlowupResult(new, ff, {h: h for h in poset.hypersurfaces})


@dataclass(frozen=True)
class BlowupOrder:
    rounds: tuple[tuple[str, ...], ...]  # equal-dimension groups, deepest first
    order_independent_within_rounds: bool = True

    @property
    def ordered(self) -> tuple[str, ...]:
        return tuple(itertools.chain.from_iterable(self.rounds))


def total_boundary_blowup_order(poset: FacePoset) -> BlowupOrder:
    """All proper boundary faces by increasing dimension (decreasing codim).

    Ties within a round are listed in id order; rounds are order-independent
    because earlier rounds separate all faces of the next dimension.
    """
    proper = [f for f in poset.faces if f.codim >= 1]
    by_codim: dict[int, list[str]] = {}
    for f in proper:
        by_codim.setdefault(f.codim, []).append(f.id)
    rounds = tuple(
        tuple(sorted(by_codim[c])) for c in sorted(by_codim, reverse=True)
    )
    return BlowupOrder(rounds)


def apply_total_boundary_blowup(poset: FacePoset) -> FacePoset:
    """Replay the total boundary blow-up, skipping trivial codim-1 centers."""
    current = poset
    for fid in total_boundary_blowup_order(poset).ordered:
        try:
            face = current.face(fid)
        except PosetError:
            continue  # removed by an earlier round
        if face.codim <= 1:
            continue
        current = blowup_face_poset(current, fid).poset
    return current


# ---------------------------------------------------------------------------
# iterated fibration structures


@dataclass(frozen=True)
class Fibration:
    base: str
    codim: int


@dataclass(frozen=True)
class IteratedFibrationDesc:
    """Boundary fibration data over a face poset.

    fibrations: per hypersurface, its base id and fibration codimension.
    compat: per ordered intersecting pair (smaller codim first), the id of
    the compatibility map to the deeper base.  An optional composition table
    on compat ids lets triangles be checked for closure.
    """

    poset: FacePoset
    fibrations: Mapping[str, Fibration]
    compat: Mapping[tuple[str, str], str] = field(default_factory=dict)
    compositions: Mapping[tuple[str, str], str] = field(default_factory=dict)


def validate_ifs(poset: FacePoset, ifs: IteratedFibrationDesc) -> list[str]:
    violations = []
    for h in sorted(poset.hypersurfaces):
        if h not in ifs.fibrations:
            violations.append(f"hypersurface {h} has no fibration")
    fib = ifs.fibrations
    pairs = [
        (h1, h2)
        for h1, h2 in itertools.combinations(sorted(poset.hypersurfaces), 2)
        if poset.hypersurfaces_intersect(h1, h2) and h1 in fib and h2 in fib
    ]
    for h1, h2 in pairs:
        c1, c2 = fib[h1].codim, fib[h2].codim
        if c1 == c2:
            violations.append(
                f"intersecting hypersurfaces {h1}, {h2} share fibration codim {c1}"
            )
            continue
        lo, hi = (h1, h2) if c1 < c2 else (h2, h1)
        if (lo, hi) not in ifs.compat:
            violations.append(f"missing compatibility map for ({lo}, {hi})")
    # triangles: all three pairwise maps must exist and, when a composition
    # table is declared, compose consistently
    for h1, h2, h3 in itertools.combinations(sorted(poset.hypersurfaces), 3):
        if not all(
            poset.hypersurfaces_intersect(a, b)
            for a, b in itertools.combinations((h1, h2, h3), 2)
        ):
            continue
        if not all(h in fib for h in (h1, h2, h3)):
            continue
        trip = sorted((h1, h2, h3), key=lambda h: fib[h].codim)
        if len({fib[h].codim for h in trip}) < 3:
            continue  # already reported above
        a, b, c = trip
        legs = [(a, b), (b, c), (a, c)]
        if any(p not in ifs.compat for p in legs):
            continue  # missing maps already reported
        if ifs.compositions:
            composite = ifs.compositions.get((ifs.compat[(a, b)], ifs.compat[(b, c)]))
            if composite is not None and composite != ifs.compat[(a, c)]:
                violations.append(
                    f"triangle ({a}, {b}, {c}) does not commute: "
                    f"{ifs.compat[(a, b)]};{ifs.compat[(b, c)]} != {ifs.compat[(a, c)]}"
                )
    return violations


def induced_ifs_on_base(ifs: IteratedFibrationDesc, h: str) -> tuple[FacePoset, IteratedFibrationDesc]:
    """Iterated fibration structure induced on the base Y_h.

    Bases of the induced structure are exactly the Y_k with h and k
    intersecting and codim(phi_h) < codim(phi_k); hypersurfaces of Y_h are
    the images of the corresponding intersections.
    """
    poset = ifs.poset
    if h not in poset.hypersurfaces:
        raise PosetError(f"unknown hypersurface {h!r}")
    base_codim = ifs.fibrations[h].codim
    deeper = sorted(
        k
        for k in poset.hypersurfaces
        if k != h
        and poset.hypersurfaces_intersect(h, k)
        and ifs.fibrations[k].codim > base_codim
    )
    img = {k: f"{ifs.fibrations[h].base}|{k}" for k in deeper}
    faces = [Face("int", 0, frozenset())]
    faces += [Face(img[k], 1, frozenset([img[k]])) for k in deeper]
    # images of deeper corners of h: drop h and shallower hypersurfaces
    seen = {frozenset(): None}
    for f in poset.faces:
        if h not in f.contains:
            continue
        rest = frozenset(img[k] for k in f.contains if k in img)
        if len(rest) >= 2 and rest not in seen:
            seen[rest] = None
            faces.append(Face("^".join(sorted(rest)), len(rest), rest))
    new_poset = FacePoset(frozenset(img.values()), tuple(faces))
    fibrations = {
        img[k]: Fibration(ifs.fibrations[k].base, ifs.fibrations[k].codim - base_codim)
        for k in deeper
    }
    compat = {}
    for k1 in deeper:
        for k2 in deeper:
            key = (k1, k2) if ifs.fibrations[k1].codim < ifs.fibrations[k2].codim else None
            if key and key in ifs.compat and new_poset.hypersurfaces_intersect(img[k1], img[k2]):
                compat[(img[k1], img[k2])] = ifs.compat[key]
    return new_poset, IteratedFibrationDesc(new_poset, fibrations, compat)


def lift_ifs_under_blowup(
    ifs: IteratedFibrationDesc,
    poset: FacePoset,
    center,
    transversal: Iterable[str] = (),
    ff_codim: Optional[int] = None,
) -> tuple[FacePoset, IteratedFibrationDesc]:
    """Lift a fibration structure through one blow-up.

    Old fibrations persist on the lifted hypersurfaces; the front face
    fibers over the center with the declared codimension (for a face center
    this defaults to its codimension minus one, the dimension of the normal
    sphere sector).  Every hypersurface meeting the center must be flagged
    transversal.
    """
    transversal = set(transversal)
    if isinstance(center, InteriorCenter):
        meeting = set(center.meets)
        if ff_codim is None:
            raise PosetError("interior centers need an explicit front-face fibration codim")
        center_base = center.id
    else:
        cf = poset.face(center)
        meeting = set(cf.contains)
        if ff_codim is None:
            ff_codim = cf.codim - 1
        center_base = cf.id
    not_flagged = sorted(meeting - transversal)
    if not_flagged:
        raise PosetError(
            f"hypersurfaces meeting the center must be flagged transversal: {not_flagged}"
        )
    result = blowup_face_poset(poset, center)
    new_poset, ff = result.poset, result.front_face
    fibrations = dict(ifs.fibrations)
    fibrations[ff] = Fibration(center_base, ff_codim)
    compat = dict(ifs.compat)
    for h in sorted(meeting):
        ch = ifs.fibrations[h].codim
        if ch == ff_codim:
            raise PosetError(
                f"front face and {h} would share fibration codim {ch}; lift invalid"
            )
        pair = (ff, h) if ff_codim < ch else (h, ff)
        compat[pair] = f"psi[{pair[0]}>{pair[1]}]"
    lifted = IteratedFibrationDesc(new_poset, fibrations, compat, dict(ifs.compositions))
    problems = validate_ifs(new_poset, lifted)
    if problems:
        raise PosetError("lifted structure invalid: " + "; ".join(problems))
    return new_poset, lifted
