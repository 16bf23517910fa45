"""Compact abelian groups and their two coefficient rings.

A group is a torus rank plus a finite abelian part (invariant factors).
For each group we provide the Borel fiber -- the invariant polynomials on
its Lie algebra, which for an abelian group is the full polynomial ring on
the torus coordinates with generators placed in degree 2 -- and the
representation ring on the character lattice.  Inclusions of groups induce
restriction maps on both rings, and the coefficient-level Chern character
sends a character of weight w to the truncated exponential of the degree-2
linear form w.u.

Nonabelian groups enter only through a formal override carrying
user-supplied ring data; no restriction maps or Chern data are derived for
those.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Mapping, Optional, Sequence

from .linalg import Matrix


class GroupDataError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomial dictionaries: {exponent tuple: Fraction}, all same length


def poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, Fraction(0)) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def poly_scale(a: dict, c) -> dict:
    c = Fraction(c)
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            s = out.get(m, Fraction(0)) + c1 * c2
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of the given total degree, lexicographically."""
    if nvars == 0:
        return ((),) if degree == 0 else ()
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(nvars - 1, degree - first):
            out.append((first,) + rest)
    return tuple(sorted(out, reverse=True))


# ---------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class GradedRingDesc:
    """Presentation of a graded commutative ring with finite graded pieces."""

    generators: tuple[tuple[str, int], ...]
    relations: tuple = ()
    dims: Optional[tuple[int, ...]] = None  # explicit per-degree dims (formal rings)

    def __post_init__(self):
        for name, deg in self.generators:
            if deg % 2 != 0 or deg < 2:
                raise GroupDataError(f"generator {name} must have even degree >= 2")
        if self.dims is not None and (len(self.dims) == 0 or self.dims[0] != 1):
            raise GroupDataError("graded ring must have one-dimensional degree 0")

    @property
    def nvars(self) -> int:
        return len(self.generators)

    def dim(self, degree: int) -> int:
        """Dimension of the graded piece in (doubled) total degree."""
        if degree < 0:
            return 0
        if self.dims is not None:
            return self.dims[degree] if degree < len(self.dims) else 0
        if degree % 2 != 0:
            return 0
        if self.relations:
            raise GroupDataError("no dimension rule for rings with relations")
        p = degree // 2
        return comb(p + self.nvars - 1, self.nvars - 1) if self.nvars else (1 if p == 0 else 0)

    def basis(self, degree: int) -> tuple[tuple[int, ...], ...]:
        if self.dims is not None or self.relations:
            raise GroupDataError("monomial basis only defined for free polynomial rings")
        if degree % 2 != 0 or degree < 0:
            return ()
        return monomials(self.nvars, degree // 2)


@dataclass(frozen=True)
class RepRingDesc:
    """Representation ring of a compact abelian group on its dual group.

    Characters are integer tuples: torus weights followed by finite-part
    components stored modulo the invariant factors.  The product is addition
    in the dual group and the augmentation sends every character to 1.
    """

    torus_rank: int
    finite_part: tuple[int, ...]

    def reduce(self, char: Sequence[int]) -> tuple[int, ...]:
        char = tuple(int(x) for x in char)
        if len(char) != self.torus_rank + len(self.finite_part):
            raise GroupDataError(f"character length {len(char)} does not match dual rank")
        torus = char[: self.torus_rank]
        fin = tuple(c % m for c, m in zip(char[self.torus_rank:], self.finite_part))
        return torus + fin

    @property
    def unit(self) -> tuple[int, ...]:
        return (0,) * (self.torus_rank + len(self.finite_part))

    def mul_chars(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        return self.reduce(tuple(x + y for x, y in zip(self.reduce(a), self.reduce(b))))

    def mul(self, a: Mapping, b: Mapping) -> dict:
        out: dict = {}
        for ca, va in a.items():
            for cb, vb in b.items():
                c = self.mul_chars(ca, cb)
                s = out.get(c, 0) + va * vb
                if s:
                    out[c] = s
                else:
                    out.pop(c, None)
        return out

    def augmentation(self, elem: Mapping) -> int:
        return sum(elem.values())

    def window(self, lo: int, hi: int) -> tuple[tuple[int, ...], ...]:
        """Characters with every torus weight in [lo, hi]; full finite duals."""
        if lo > hi:
            raise GroupDataError("empty character window")
        boxes = [range(lo, hi + 1)] * self.torus_rank + [range(m) for m in self.finite_part]
        return tuple(itertools.product(*boxes))


@dataclass(frozen=True)
class FormalRepRing:
    """User-supplied representation ring: finite basis plus multiplication table."""

    basis: tuple[str, ...]
    table: Mapping[tuple[str, str], Mapping[str, int]]
    unit: str

    def __post_init__(self):
        if self.unit not in self.basis:
            raise GroupDataError("formal rep ring unit must be a basis element")


@dataclass(frozen=True)
class FormalGroupData:
    borel: GradedRingDesc
    rep: FormalRepRing


@dataclass(frozen=True)
class CompactGroupDesc:
    """T^r x (finite abelian part), or a formal stand-in with supplied rings.

    Equality is identity of the data, not isomorphism.
    """

    torus_rank: int
    finite_part: tuple[int, ...] = ()
    formal: Optional[FormalGroupData] = None

    def __post_init__(self):
        if self.torus_rank < 0:
            raise GroupDataError("torus rank must be nonnegative")
        object.__setattr__(self, "finite_part", tuple(int(m) for m in self.finite_part))
        for m in self.finite_part:
            if m < 2:
                raise GroupDataError("invariant factors must be >= 2")

    @property
    def is_formal(self) -> bool:
        return self.formal is not None

    @property
    def dual_rank(self) -> int:
        return self.torus_rank + len(self.finite_part)

    def describe(self) -> str:
        if self.is_formal:
            return "formal"
        parts = [f"T^{self.torus_rank}"] if self.torus_rank else []
        parts += [f"Z/{m}" for m in self.finite_part]
        return " x ".join(parts) if parts else "1"


TRIVIAL_GROUP = CompactGroupDesc(0)


def borel_fiber(group: CompactGroupDesc) -> GradedRingDesc:
    """Invariant polynomials on the Lie algebra, generators in degree 2.

    The adjoint action of an abelian group is trivial, so this is the full
    polynomial ring on torus_rank generators; the finite part has zero Lie
    algebra and contributes nothing.
    """
    if group.is_formal:
        return group.formal.borel
    gens = tuple((f"u{i + 1}", 2) for i in range(group.torus_rank))
    return GradedRingDesc(generators=gens)


def rep_ring(group: CompactGroupDesc):
    if group.is_formal:
        return group.formal.rep
    return RepRingDesc(torus_rank=group.torus_rank, finite_part=group.finite_part)


# ---------------------------------------------------------------------------
# inclusions and restriction maps


def _torus_block(mat: Sequence[Sequence[int]], rows: int, cols: int):
    return [[int(mat[i][j]) for j in range(cols)] for i in range(rows)]


@dataclass(frozen=True)
class GroupInclusion:
    """source -> target subgroup inclusion.

    lattice_map is the induced restriction on character lattices: it sends a
    character tuple of the target to one of the source (finite rows reduced
    modulo the source invariant factors).  Its shape is
    (dual rank of source) x (dual rank of target); the torus block is the
    transpose of the group-level cocharacter/Lie inclusion.  lie_map, when
    omitted, is derived as that transpose, which is exactly the coherence
    required for the Chern character to commute with restriction.
    """

    source: CompactGroupDesc
    target: CompactGroupDesc
    lattice_map: tuple[tuple[int, ...], ...]
    lie_map: tuple[tuple[Fraction, ...], ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.source.is_formal or self.target.is_formal:
            raise GroupDataError("inclusions between formal groups are not supported")
        rs, rt = self.source.dual_rank, self.target.dual_rank
        lat = tuple(tuple(int(x) for x in row) for row in self.lattice_map)
        if len(lat) != rs or any(len(row) != rt for row in lat):
            raise GroupDataError(
                f"lattice_map shape {len(lat)}x{'?' if not lat else len(lat[0])} "
                f"does not match dual ranks {rs}x{rt}"
            )
        ts, tt = self.source.torus_rank, self.target.torus_rank
        # finite columns cannot hit torus rows; torsion orders must divide out
        for j, m in enumerate(self.target.finite_part):
            for i in range(ts):
                if lat[i][tt + j] != 0:
                    raise GroupDataError("finite-part character cannot restrict to a torus weight")
            for i, ms in enumerate(self.source.finite_part):
                if (lat[ts + i][tt + j] * m) % ms != 0:
                    raise GroupDataError("lattice_map not well defined modulo invariant factors")
        object.__setattr__(self, "lattice_map", lat)
        if self.lie_map is None:
            lie = tuple(
                tuple(Fraction(lat[i][j]) for i in range(ts)) for j in range(tt)
            )
        else:
            lie = tuple(tuple(Fraction(x) for x in row) for row in self.lie_map)
            if len(lie) != tt or any(len(row) != ts for row in lie):
                raise GroupDataError(
                    f"lie_map shape does not match torus ranks {tt}x{ts}"
                )
        object.__setattr__(self, "lie_map", lie)

    def compose(self, inner: "GroupInclusion") -> "GroupInclusion":
        """Composite inclusion inner.source -> self.target (self after inner)."""
        if inner.target != self.source:
            raise GroupDataError("inclusions not composable")
        lat = [
            [
                sum(inner.lattice_map[i][k] * self.lattice_map[k][j] for k in range(len(self.lattice_map)))
                for j in range(self.target.dual_rank)
            ]
            for i in range(inner.source.dual_rank)
        ]
        lie = [
            [
                sum(self.lie_map[i][k] * inner.lie_map[k][j] for k in range(len(inner.lie_map)))
                for j in range(inner.source.torus_rank)
            ]
            for i in range(self.target.torus_rank)
        ]
        return GroupInclusion(inner.source, self.target, tuple(map(tuple, lat)), tuple(map(tuple, lie)))

    @staticmethod
    def identity(group: CompactGroupDesc) -> "GroupInclusion":
        n = group.dual_rank
        lat = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
        return GroupInclusion(group, group, lat)


@dataclass(frozen=True)
class PolyLinearMap:
    """Graded ring map defined by degree-preserving linear generator images.

    images[j] is the coefficient vector, over the codomain generators, of the
    image of the j-th domain generator.  matrix(degree) expands the induced
    linear map on the monomial basis of each graded piece.
    """

    domain: GradedRingDesc
    codomain: GradedRingDesc
    images: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.images) != self.domain.nvars:
            raise GroupDataError("one image per domain generator required")
        for row in self.images:
            if len(row) != self.codomain.nvars:
                raise GroupDataError("generator image has wrong arity")
        object.__setattr__(
            self, "images", tuple(tuple(Fraction(x) for x in row) for row in self.images)
        )

    def apply_linear(self, weights: Sequence) -> list[Fraction]:
        """Image of the degree-2 element sum(w_j u_j) as codomain coefficients."""
        n = self.codomain.nvars
        out = [Fraction(0)] * n
        for w, row in zip(weights, self.images):
            for i in range(n):
                out[i] += Fraction(w) * row[i]
        return out

    def apply_poly(self, poly: Mapping) -> dict:
        gens = []
        for row in self.images:
            gens.append({_unit_mono(self.codomain.nvars, i): c for i, c in enumerate(row) if c})
        out: dict = {}
        for mono, coeff in poly.items():
            term = {(0,) * self.codomain.nvars: Fraction(coeff)}
            for j, e in enumerate(mono):
                for _ in range(e):
                    term = poly_mul(term, gens[j])
            out = poly_add(out, term)
        return out

    def matrix(self, degree: int) -> Matrix:
        """Matrix of the map on graded pieces, codomain basis x domain basis."""
        dom = self.domain.basis(degree)
        cod = self.codomain.basis(degree)
        index = {m: i for i, m in enumerate(cod)}
        cols = []
        for mono in dom:
            img = self.apply_poly({mono: Fraction(1)})
            col = [Fraction(0)] * len(cod)
            for m, c in img.items():
                col[index[m]] = c
            cols.append(col)
        return [[cols[j][i] for j in range(len(dom))] for i in range(len(cod))]


def _unit_mono(n: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(n))


def restrict_poly(incl: GroupInclusion) -> PolyLinearMap:
    """Restriction borel_fiber(target) -> borel_fiber(source).

    Acts on degree-2 generators by the transpose of the Lie inclusion and
    extends multiplicatively.
    """
    return PolyLinearMap(
        domain=borel_fiber(incl.target),
        codomain=borel_fiber(incl.source),
        images=tuple(tuple(row) for row in incl.lie_map),
    )


@dataclass(frozen=True)
class RepMap:
    """Map of representation rings sending characters to characters."""

    domain: RepRingDesc
    codomain: RepRingDesc
    matrix: tuple[tuple[int, ...], ...]

    def apply_char(self, char: Sequence[int]) -> tuple[int, ...]:
        char = self.domain.reduce(char)
        out = [sum(row[j] * char[j] for j in range(len(char))) for row in self.matrix]
        return self.codomain.reduce(out)

    def apply(self, elem: Mapping) -> dict:
        out: dict = {}
        for c, v in elem.items():
            img = self.apply_char(c)
            s = out.get(img, 0) + v
            if s:
                out[img] = s
            else:
                out.pop(img, None)
        return out


def restrict_rep(incl: GroupInclusion) -> RepMap:
    """Restriction rep_ring(target) -> rep_ring(source) on the character level."""
    return RepMap(
        domain=rep_ring(incl.target),
        codomain=rep_ring(incl.source),
        matrix=incl.lattice_map,
    )


# ---------------------------------------------------------------------------
# Chern character at coefficient level


def chern_of_rep(group: CompactGroupDesc, tau: Mapping, max_degree: int) -> dict[int, dict]:
    """Truncated Chern character of a virtual character combination.

    A character of torus weight w maps to sum_{2k <= D} (w.u)^k / k!; finite
    components only contribute their evaluation at the identity component,
    i.e. drop to the augmentation.  Returns {degree: polynomial dict} with
    only even degrees <= max_degree present.
    """
    if group.is_formal:
        raise GroupDataError("chern character undefined for formal groups")
    if max_degree < 0 or max_degree % 2 != 0:
        raise GroupDataError("chern truncation degree must be even and nonnegative")
    ring = borel_fiber(group)
    rr = rep_ring(group)
    nv = ring.nvars
    out: dict[int, dict] = {}
    for char, coeff in tau.items():
        char = rr.reduce(char)
        w = char[: group.torus_rank]
        lin = {_unit_mono(nv, i): Fraction(wi) for i, wi in enumerate(w) if wi}
        term = {(0,) * nv: Fraction(coeff)}
        for k in range(0, max_degree // 2 + 1):
            deg = 2 * k
            if term:
                out[deg] = poly_add(out.get(deg, {}), term)
            term = poly_scale(poly_mul(term, lin), Fraction(1, k + 1))
    return {d: p for d, p in out.items() if p}


def graded_mul(ring: GradedRingDesc, a: Mapping[int, Mapping], b: Mapping[int, Mapping], max_degree: int) -> dict[int, dict]:
    """Product of graded elements given as {degree: poly}, truncated."""
    out: dict[int, dict] = {}
    for da, pa in a.items():
        for db, pb in b.items():
            d = da + db
            if d > max_degree:
                continue
            prod = poly_mul(dict(pa), dict(pb))
            if prod:
                out[d] = poly_add(out.get(d, {}), prod)
    return {d: p for d, p in out.items() if p}
