"""Exact cochain computations over flat graded local systems.

Simplicial cochains realize all complexes; a local system assigns to every
vertex a copy of a graded fiber and to every edge a degree-preserving
invertible transport, flat around each 2-simplex.  Cochains take values at
the first (smallest) vertex of a simplex, the twisted coboundary transports
the 0-th face term back to that anchor, and pull-backs along simplicial
maps collapse degenerate images to zero.

Total gradings double the coefficient degree: a k-form with coefficients
in the degree-2p piece sits in total degree k + 2p.

Ranks come from fraction-free elimination over exact integers (linalg).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from . import linalg
from .linalg import Matrix, Vector


class ChainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# simplicial complexes and maps

Simplex = tuple[str, ...]


def _closure(top: Iterable[Sequence[str]]) -> dict[int, tuple[Simplex, ...]]:
    seen: set[Simplex] = set()
    for s in top:
        vs = tuple(sorted(set(s)))
        if len(vs) != len(s):
            raise ChainError(f"simplex with repeated vertices: {s}")
        for k in range(1, len(vs) + 1):
            seen.update(itertools.combinations(vs, k))
    out: dict[int, list[Simplex]] = {}
    for s in seen:
        out.setdefault(len(s) - 1, []).append(s)
    return {k: tuple(sorted(v)) for k, v in sorted(out.items())}


@dataclass(frozen=True)
class SimplicialComplexDesc:
    """Finite simplicial complex; simplices are sorted vertex tuples."""

    simplices: Mapping[int, tuple[Simplex, ...]]

    @staticmethod
    def build(top: Iterable[Sequence[str]]) -> "SimplicialComplexDesc":
        return SimplicialComplexDesc(_closure(top))

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(s[0] for s in self.simplices.get(0, ()))

    @property
    def dim(self) -> int:
        return max(self.simplices, default=-1)

    def k_simplices(self, k: int) -> tuple[Simplex, ...]:
        return self.simplices.get(k, ())

    def has(self, s: Sequence[str]) -> bool:
        vs = tuple(sorted(set(s)))
        return vs in set(self.simplices.get(len(vs) - 1, ()))

    def edges(self) -> tuple[Simplex, ...]:
        return self.k_simplices(1)

    def components(self) -> list["SimplicialComplexDesc"]:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges():
            parent[find(a)] = find(b)
        groups: dict[str, list[Simplex]] = {}
        for k, simps in self.simplices.items():
            for s in simps:
                groups.setdefault(find(s[0]), []).append(s)
        return [
            SimplicialComplexDesc(_closure(simps))
            for _, simps in sorted(groups.items())
        ]

    def subcomplex(self, top: Iterable[Sequence[str]]) -> "SimplicialComplexDesc":
        sub = SimplicialComplexDesc.build(top)
        for k, simps in sub.simplices.items():
            for s in simps:
                if not self.has(s):
                    raise ChainError(f"{s} is not a simplex of the ambient complex")
        return sub


@dataclass(frozen=True)
class SimplicialMapDesc:
    source: SimplicialComplexDesc
    target: SimplicialComplexDesc
    vertex_map: Mapping[str, str]

    def __post_init__(self):
        for v in self.source.vertices:
            if v not in self.vertex_map:
                raise ChainError(f"vertex {v} has no image")
        for k, simps in self.source.simplices.items():
            for s in simps:
                img = tuple(sorted(set(self.vertex_map[v] for v in s)))
                if not self.target.has(img):
                    raise ChainError(f"image of {s} is not a simplex of the target")

    def image(self, s: Simplex) -> tuple[Optional[Simplex], int]:
        """(sorted image, sign) or (None, 0) for a degenerate image."""
        img = [self.vertex_map[v] for v in s]
        if len(set(img)) != len(img):
            return None, 0
        order = sorted(range(len(img)), key=lambda i: img[i])
        sign = _perm_sign(order)
        return tuple(img[i] for i in order), sign


def _perm_sign(perm: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# local systems


@dataclass(frozen=True)
class LocalSystem:
    """Flat bundle of graded modules specified by edge transport matrices.

    `transports[(a, b)][d]`, for an edge with a < b, carries fiber degree-d
    vectors at a to vectors at b; missing entries are the identity.  The
    flatness invariant -- composing around any 2-simplex is the identity --
    is enforced by `validate`.
    """

    complex: SimplicialComplexDesc
    piece_dims: Mapping[int, int]  # coefficient degree -> fiber dimension
    transports: Mapping[tuple[str, str], Mapping[int, Matrix]] = field(default_factory=dict)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted(d for d, n in self.piece_dims.items() if n > 0))

    def dim(self, d: int) -> int:
        return self.piece_dims.get(d, 0)

    def _edge_matrix(self, a: str, b: str, d: int) -> Matrix:
        """Transport fiber_d from a to b along the (existing) edge {a, b}."""
        n = self.dim(d)
        if a == b:
            return linalg.identity(n)
        key, forward = ((a, b), True) if a < b else ((b, a), False)
        entry = self.transports.get(key)
        mat = None if entry is None else entry.get(d)
        if mat is None:
            return linalg.identity(n)
        if forward:
            return [[Fraction(x) for x in row] for row in mat]
        return _inverse(mat)

    def validate(self) -> list[str]:
        out = []
        edge_set = set(self.complex.edges())
        for (a, b) in self.transports:
            if (a, b) not in edge_set:
                out.append(f"transport on non-edge ({a}, {b})")
        for d in self.degrees:
            n = self.dim(d)
            for (a, b), mats in self.transports.items():
                m = mats.get(d)
                if m is None:
                    continue
                if len(m) != n or any(len(r) != n for r in m):
                    out.append(f"transport on ({a}, {b}) has wrong shape in degree {d}")
                elif linalg.rank(m) != n:
                    out.append(f"transport on ({a}, {b}) is singular in degree {d}")
            for tri in self.complex.k_simplices(2):
                a, b, c = tri
                lhs = linalg.mat_mul(self._edge_matrix(b, c, d), self._edge_matrix(a, b, d))
                rhs = self._edge_matrix(a, c, d)
                if lhs != rhs:
                    out.append(f"holonomy around {tri} is nontrivial in degree {d}")
        return out


def _inverse(mat: Sequence[Sequence]) -> Matrix:
    n = len(mat)
    cols = [[Fraction(mat[i][j]) for i in range(n)] for j in range(n)]
    try:
        inv_cols = linalg.solve_columns(cols, [linalg._unit(n, i) for i in range(n)])
    except ValueError as exc:
        raise ChainError("transport matrix is not invertible") from exc
    return [[inv_cols[j][i] for j in range(n)] for i in range(n)]


def constant_system(complex_: SimplicialComplexDesc, dim: int = 1, degree: int = 0) -> LocalSystem:
    return LocalSystem(complex_, {degree: dim})


# ---------------------------------------------------------------------------
# twisted cochain complexes on a single complex

CoordLabel = tuple[str, int, Simplex, int, int]  # node, form degree, simplex, coeff degree, fiber index


def _block_coords(node: str, X: SimplicialComplexDesc, L: LocalSystem, n: int) -> list[CoordLabel]:
    labels = []
    for d in L.degrees:
        k = n - d
        if k < 0:
            continue
        nd = L.dim(d)
        for s in X.k_simplices(k):
            labels.extend((node, k, s, d, i) for i in range(nd))
    return labels


def _coboundary_entries(X: SimplicialComplexDesc, L: LocalSystem, k: int, d: int):
    """Yield (target simplex, source simplex, block matrix) for C^k -> C^{k+1}."""
    nd = L.dim(d)
    ident = linalg.identity(nd)
    for s in X.k_simplices(k + 1):
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            if not X.has(face):
                continue
            if i == 0:
                # value anchored at s[1]; transport back to the anchor s[0]
                block = L._edge_matrix(s[1], s[0], d)
            else:
                block = ident
            sign = 1 if i % 2 == 0 else -1
            yield s, face, [[sign * x for x in row] for row in block]


def twisted_cohomology(
    X: SimplicialComplexDesc, L: LocalSystem, window: tuple[int, int]
) -> "CohomologyTable":
    """Ranks of the twisted cochain complex, totaled with doubled coefficient degree."""
    lo, hi = window
    if lo > hi:
        raise ChainError("empty degree window")
    flat = L.validate()
    if flat:
        raise ChainError("local system is not flat: " + "; ".join(flat))
    ranks = {}
    for n in range(max(lo, 0), hi + 1):
        dim_n = 0
        rank_d_n = 0
        rank_d_prev = 0
        for d in L.degrees:
            k = n - d
            if k < 0 or k > X.dim:
                continue
            dim_n += len(X.k_simplices(k)) * L.dim(d)
            rank_d_n += _block_rank(X, L, k, d)
            if k >= 1:
                rank_d_prev += _block_rank(X, L, k - 1, d)
        ranks[n] = dim_n - rank_d_n - rank_d_prev
    return CohomologyTable(ranks)


def _block_rank(X: SimplicialComplexDesc, L: LocalSystem, k: int, d: int) -> int:
    rows_idx = {s: i for i, s in enumerate(X.k_simplices(k + 1))}
    cols_idx = {s: j for j, s in enumerate(X.k_simplices(k))}
    nd = L.dim(d)
    if not rows_idx or not cols_idx or nd == 0:
        return 0
    mat = [
        [Fraction(0)] * (len(cols_idx) * nd) for _ in range(len(rows_idx) * nd)
    ]
    for tgt, src, block in _coboundary_entries(X, L, k, d):
        r0, c0 = rows_idx[tgt] * nd, cols_idx[src] * nd
        for i in range(nd):
            for j in range(nd):
                mat[r0 + i][c0 + j] += block[i][j]
    return linalg.rank(mat)


# ---------------------------------------------------------------------------
# assembled tower data and equalizer slices


@dataclass(frozen=True)
class AssembledNode:
    id: str
    complex: SimplicialComplexDesc
    system: LocalSystem


@dataclass(frozen=True)
class AssembledEdge:
    """One compatibility constraint: restriction = coefficients o pull-back."""

    source: str
    target: str
    hyp: SimplicialComplexDesc              # subcomplex of the source complex
    vertex_map: Mapping[str, str]           # hyp vertices -> target vertices
    coeff: Mapping[int, Matrix]             # coeff degree -> fiber(target) -> fiber(source)


@dataclass(frozen=True)
class TowerComplexSlice:
    degree: int
    labels: tuple[CoordLabel, ...]
    basis: tuple[Vector, ...]               # columns spanning the constrained space
    differential: Matrix                    # next basis coords x this basis coords

    @property
    def dim(self) -> int:
        return len(self.basis)


def equalizer_slices(
    nodes: Sequence[AssembledNode],
    edges: Sequence[AssembledEdge],
    max_degree: int,
    zero_nodes: Iterable[str] = (),
) -> list[TowerComplexSlice]:
    """Constrained subcomplex slices of the direct sum over all nodes.

    Constraints per edge: the source cochain restricted to the hypersurface
    equals the coefficient map applied to the pull-back of the target
    cochain.  `zero_nodes` adds the relative condition zeroing whole node
    summands.
    """
    node_map = {n.id: n for n in nodes}
    zero_nodes = set(zero_nodes)
    for e in edges:
        if e.source not in node_map or e.target not in node_map:
            raise ChainError(f"edge references unknown node {e.source}->{e.target}")
    for nid in zero_nodes:
        if nid not in node_map:
            raise ChainError(f"cannot zero unknown node {nid}")
    for n in nodes:
        bad = n.system.validate()
        if bad:
            raise ChainError(f"node {n.id}: " + "; ".join(bad))

    maps = {
        id(e): SimplicialMapDesc(e.hyp, node_map[e.target].complex, e.vertex_map)
        for e in edges
    }

    labels: dict[int, list[CoordLabel]] = {}
    index: dict[int, dict[CoordLabel, int]] = {}
    kernels: dict[int, list[Vector]] = {}
    for n in range(0, max_degree + 2):
        labs: list[CoordLabel] = []
        for nd in sorted(node_map):
            labs.extend(_block_coords(nd, node_map[nd].complex, node_map[nd].system, n))
        labels[n] = labs
        index[n] = {lab: i for i, lab in enumerate(labs)}
        rows = _constraint_rows(node_map, edges, maps, labs, index[n], zero_nodes)
        kernels[n] = linalg.kernel_basis(rows, len(labs))

    slices = []
    for n in range(0, max_degree + 1):
        amb = _ambient_differential(node_map, labels[n], index[n + 1], len(labels[n + 1]))
        dK = [linalg.mat_vec(amb, v) for v in kernels[n]]
        if kernels[n + 1]:
            # rows of the solution are coefficients on the next slice's basis
            differential = [list(row) for row in linalg.solve_columns(kernels[n + 1], dK)]
        else:
            if any(any(x != 0 for x in v) for v in dK):
                raise ChainError("differential leaves the constrained subcomplex")
            differential = []
        slices.append(
            TowerComplexSlice(n, tuple(labels[n]), tuple(kernels[n]), differential)
        )
    return slices


def _constraint_rows(node_map, edges, maps, labs, idx, zero_nodes) -> list[Vector]:
    rows: list[Vector] = []
    ncols = len(labs)
    for lab in labs:
        if lab[0] in zero_nodes:
            row = [Fraction(0)] * ncols
            row[idx[lab]] = Fraction(1)
            rows.append(row)
    for e in edges:
        src = node_map[e.source]
        tgt = node_map[e.target]
        f = maps[id(e)]
        for d in src.system.degrees:
            rho = e.coeff.get(d)
            nd_src = src.system.dim(d)
            nd_tgt = tgt.system.dim(d)
            if rho is None:
                if nd_src and nd_tgt:
                    raise ChainError(
                        f"edge {e.source}->{e.target}: no coefficient matrix in degree {d}"
                    )
                rho = []
            if nd_src and (len(rho) != nd_src or any(len(r) != nd_tgt for r in rho)):
                raise ChainError(
                    f"edge {e.source}->{e.target}: coefficient matrix shape mismatch in degree {d}"
                )
            for k in sorted(e.hyp.simplices):
                for s in e.hyp.k_simplices(k):
                    base = [(e.source, k, s, d, i) for i in range(nd_src)]
                    if any(b not in idx for b in base):
                        continue
                    img, sign = f.image(s)
                    block_rows = [[Fraction(0)] * ncols for _ in range(nd_src)]
                    for i, b in enumerate(base):
                        block_rows[i][idx[b]] = Fraction(1)
                    if img is not None and nd_tgt:
                        # transport the target value from its anchor to the
                        # image of the source anchor inside the image simplex
                        w = tgt.system._edge_matrix(img[0], f.vertex_map[s[0]], d)
                        rw = linalg.mat_mul(rho, w)
                        tcoords = [(e.target, k, img, d, j) for j in range(nd_tgt)]
                        for i in range(nd_src):
                            for j, tc in enumerate(tcoords):
                                block_rows[i][idx[tc]] -= sign * rw[i][j]
                    rows.extend(block_rows)
    return rows


def _ambient_differential(node_map, labs_n, idx_next, ncols_next) -> Matrix:
    cols = {lab: i for i, lab in enumerate(labs_n)}
    mat = [[Fraction(0)] * len(labs_n) for _ in range(ncols_next)]
    for nd in sorted(node_map):
        X, L = node_map[nd].complex, node_map[nd].system
        for d in L.degrees:
            ndim = L.dim(d)
            for k in range(0, X.dim + 1):
                if not any((nd, k, s, d, 0) in cols for s in X.k_simplices(k)):
                    continue
                for tgt, src, block in _coboundary_entries(X, L, k, d):
                    for i in range(ndim):
                        r = idx_next.get((nd, k + 1, tgt, d, i))
                        if r is None:
                            continue
                        for j in range(ndim):
                            c = cols.get((nd, k, src, d, j))
                            if c is not None:
                                mat[r][c] += block[i][j]
    return mat


# ---------------------------------------------------------------------------
# cohomology of slices


@dataclass(frozen=True)
class CohomologyTable:
    ranks: Mapping[int, int]
    generators: Optional[Mapping[int, tuple[Vector, ...]]] = None

    def rank(self, degree: int) -> int:
        return self.ranks.get(degree, 0)

    @property
    def even(self) -> int:
        return sum(r for d, r in self.ranks.items() if d % 2 == 0)

    @property
    def odd(self) -> int:
        return sum(r for d, r in self.ranks.items() if d % 2 == 1)

    def as_list(self, max_degree: int) -> list[int]:
        return [self.rank(n) for n in range(max_degree + 1)]

    def to_dict(self) -> dict:
        return {str(d): self.ranks[d] for d in sorted(self.ranks)}


def cohomology(slices: Sequence[TowerComplexSlice], representatives: bool = False) -> CohomologyTable:
    """rank(ker d_n) - rank(im d_{n-1}) per slice degree; checks d^2 = 0."""
    for i in range(len(slices) - 1):
        if slices[i + 1].degree != slices[i].degree + 1:
            continue
        comp = linalg.mat_mul(slices[i + 1].differential, slices[i].differential)
        if not linalg.is_zero(comp):
            raise ChainError(f"d^2 != 0 between degrees {slices[i].degree} and {slices[i + 1].degree}")
    ranks: dict[int, int] = {}
    gens: dict[int, tuple[Vector, ...]] = {}
    prev_rank = 0
    prev_diff: Optional[Matrix] = None
    for s in slices:
        r = linalg.rank(s.differential) if s.differential else 0
        ranks[s.degree] = s.dim - r - prev_rank
        if representatives:
            gens[s.degree] = _representatives(s, prev_diff)
        prev_rank = r
        prev_diff = s.differential
    return CohomologyTable(ranks, tuple_map(gens) if representatives else None)


def tuple_map(d: dict) -> dict:
    return {k: tuple(v) for k, v in d.items()}


def _representatives(s: TowerComplexSlice, prev_diff: Optional[Matrix]) -> tuple[Vector, ...]:
    if s.dim == 0:
        return ()
    cocycles = (
        linalg.kernel_basis(s.differential, s.dim) if s.differential else
        [linalg._unit(s.dim, i) for i in range(s.dim)]
    )
    boundaries: list[Vector] = []
    if prev_diff and prev_diff[0:1] and len(prev_diff[0]):
        boundaries = [
            [prev_diff[i][j] for i in range(len(prev_diff))] for j in range(len(prev_diff[0]))
        ]
    chosen: list[Vector] = []
    current = list(boundaries)
    base_rank = linalg.rank(linalg.column_stack(current)) if current else 0
    for z in cocycles:
        trial = current + [z]
        if linalg.rank(linalg.column_stack(trial)) > base_rank:
            chosen.append(z)
            current = trial
            base_rank += 1
    # lift to ambient coordinates
    return tuple(
        [sum((s.basis[j][i] * z[j] for j in range(s.dim)), Fraction(0)) for i in range(len(s.labels))]
        for z in chosen
    )


# ---------------------------------------------------------------------------
# relative complexes and the long-exact-sequence check


def closed_below(edges: Sequence[AssembledEdge], nodes: Iterable[str], subset: Iterable[str]) -> bool:
    subset = set(subset)
    targets_of = {}
    for e in edges:
        targets_of.setdefault(e.source, set()).add(e.target)
    return all(targets_of.get(b, set()) <= subset for b in subset)


@dataclass(frozen=True)
class LesSlot:
    degree: int
    dims: tuple[int, int, int]      # H(A), H(B), H(C)
    rank_f: int
    rank_g: int
    rank_delta: int
    defect: int


@dataclass(frozen=True)
class LesReport:
    slots: tuple[LesSlot, ...]

    @property
    def total_defect(self) -> int:
        return sum(s.defect for s in self.slots)

    @property
    def exact(self) -> bool:
        return self.total_defect == 0


def les_check_assembled(
    nodes: Sequence[AssembledNode],
    edges: Sequence[AssembledEdge],
    small: Iterable[str],
    large: Iterable[str],
    max_degree: int,
) -> LesReport:
    """Rank-exactness of H(rel large) -> H(rel small) -> H(quotient).

    `large` must equal `small` plus one node h, both closed below.  The
    quotient complex is the image of the relative-to-small complex in the
    h summand.  Per slot the report carries the computed ranks of the two
    induced maps, the connecting rank inferred from exactness at the
    quotient slot, and the total defect (0 exactly when the rank
    bookkeeping is exact everywhere).
    """
    small, large = set(small), set(large)
    extra = large - small
    if not small <= large or len(extra) > 1:
        raise ChainError("sets must differ by exactly one boundary class")
    node_ids = [n.id for n in nodes]
    if not closed_below(edges, node_ids, small) or not closed_below(edges, node_ids, large):
        raise ChainError("boundary class sets must be closed below")
    if not extra:
        # degenerate row: identical complexes, zero quotient, trivially exact
        table = cohomology(equalizer_slices(nodes, edges, max_degree + 1, zero_nodes=small))
        slots = tuple(
            LesSlot(n, (table.rank(n), table.rank(n), 0), table.rank(n), 0, 0, 0)
            for n in range(0, max_degree + 1)
        )
        return LesReport(slots)
    h = next(iter(extra))

    top = max_degree + 1
    s_small = equalizer_slices(nodes, edges, top, zero_nodes=small)
    s_large = equalizer_slices(nodes, edges, top, zero_nodes=large)

    # quotient: projection of the relative-to-small complex onto node h
    def project(labels, vec):
        return [x for lab, x in zip(labels, vec) if lab[0] == h]

    h_labels = {
        n: [lab for lab in s_small[n].labels if lab[0] == h] for n in range(len(s_small))
    }
    q_basis: dict[int, list[Vector]] = {}
    for n in range(len(s_small)):
        cols = [project(s_small[n].labels, v) for v in s_small[n].basis]
        q_basis[n] = _independent(cols)

    node_map = {nd.id: nd for nd in nodes}

    def h_diff(n: int) -> Matrix:
        idx_next = {lab: i for i, lab in enumerate(h_labels[n + 1])}
        return _ambient_differential({h: node_map[h]}, h_labels[n], idx_next, len(h_labels[n + 1]))

    def coh_dims(slices):
        table = cohomology(slices)
        return table

    tab_A = coh_dims(s_large)
    tab_B = coh_dims(s_small)

    # quotient cohomology dims
    q_rank_d: dict[int, int] = {}
    for n in range(0, top):
        d_h = h_diff(n)
        imgs = [linalg.mat_vec(d_h, v) for v in q_basis[n]]
        q_rank_d[n] = linalg.rank(linalg.column_stack(imgs)) if imgs else 0
    c_dim = {
        n: len(q_basis[n]) - q_rank_d.get(n, 0) - q_rank_d.get(n - 1, 0)
        for n in range(0, top)
    }

    slots = []
    prev_delta = 0
    for n in range(0, max_degree + 1):
        a_n, b_n = tab_A.rank(n), tab_B.rank(n)
        c_n = c_dim[n]

        # rank of H^n(A) -> H^n(B): cocycles of A against boundaries of B
        za = _cocycle_vectors(s_large, n)
        bb = _boundary_vectors(s_small, n)
        rank_f = _rank_mod(za, bb)

        # rank of H^n(B) -> H^n(C)
        zb = _cocycle_vectors(s_small, n)
        zb_h = [project(s_small[n].labels, v) for v in zb]
        bq = [linalg.mat_vec(h_diff(n - 1), v) for v in q_basis[n - 1]] if n >= 1 else []
        rank_g = _rank_mod(zb_h, bq)

        rank_delta = c_n - rank_g
        defect = abs(b_n - rank_f - rank_g) + abs(a_n - rank_f - prev_delta)
        slots.append(LesSlot(n, (a_n, b_n, c_n), rank_f, rank_g, rank_delta, defect))
        prev_delta = rank_delta
    return LesReport(tuple(slots))


def _independent(cols: list[Vector]) -> list[Vector]:
    out: list[Vector] = []
    r = 0
    for c in cols:
        trial = out + [c]
        nr = linalg.rank(linalg.column_stack(trial))
        if nr > r:
            out.append(c)
            r = nr
    return out


def _cocycle_vectors(slices, n) -> list[Vector]:
    s = slices[n]
    if s.dim == 0:
        return []
    ker = (
        linalg.kernel_basis(s.differential, s.dim)
        if s.differential
        else [linalg._unit(s.dim, i) for i in range(s.dim)]
    )
    return [
        [sum((s.basis[j][i] * z[j] for j in range(s.dim)), Fraction(0)) for i in range(len(s.labels))]
        for z in ker
    ]


def _boundary_vectors(slices, n) -> list[Vector]:
    if n == 0:
        return []
    prev = slices[n - 1]
    cur = slices[n]
    if not prev.differential or cur.dim == 0:
        return []
    out = []
    for j in range(prev.dim):
        vec_basis = [prev.differential[i][j] for i in range(cur.dim)]
        out.append(
            [
                sum((cur.basis[b][i] * vec_basis[b] for b in range(cur.dim)), Fraction(0))
                for i in range(len(cur.labels))
            ]
        )
    return out


def _rank_mod(vectors: list[Vector], modulo: list[Vector]) -> int:
    if not vectors:
        return 0
    base = linalg.rank(linalg.column_stack(modulo)) if modulo else 0
    total = linalg.rank(linalg.column_stack(modulo + vectors))
    return total - base


# ---------------------------------------------------------------------------
# barycentric subdivision


def _bname(s: Simplex) -> str:
    return s[0] if len(s) == 1 else "b(" + "+".join(s) + ")"


def barycentric_subdivision(X: SimplicialComplexDesc) -> tuple[SimplicialComplexDesc, dict[str, Simplex]]:
    """Subdivision whose vertices are barycenters of the original simplices.

    Original vertices keep their names; returns the new complex and the map
    from new vertex names to the original simplices they sit over.
    """
    chains: list[list[Simplex]] = []

    def extend(chain: list[Simplex]):
        top = chain[-1]
        extended = False
        for k, simps in X.simplices.items():
            if k <= len(top) - 1:
                continue
            for s in simps:
                if set(top) < set(s):
                    extend(chain + [s])
                    extended = True
        chains.append(chain)

    for v in X.simplices.get(0, ()):
        extend([v])
    top_cells = [tuple(_bname(s) for s in chain) for chain in chains]
    sd = SimplicialComplexDesc.build(top_cells)
    origin = {}
    for k, simps in X.simplices.items():
        for s in simps:
            origin[_bname(s)] = s
    return sd, origin


def subdivide_map(
    f_vertex_map: Mapping[str, str],
    source_origin: Mapping[str, Simplex],
    target_origin: Mapping[str, Simplex],
) -> dict[str, str]:
    rev = {s: name for name, s in target_origin.items()}
    out = {}
    for name, s in source_origin.items():
        img = tuple(sorted(set(f_vertex_map[v] for v in s)))
        out[name] = rev[img]
    return out


def subdivide_system(L: LocalSystem, sd: SimplicialComplexDesc, origin: Mapping[str, Simplex]) -> LocalSystem:
    """Induced flat system: the fiber over a barycenter sits at the smallest
    original vertex of its simplex, transports follow original edges."""
    transports: dict[tuple[str, str], dict[int, Matrix]] = {}
    for a, b in sd.edges():
        va, vb = origin[a][0], origin[b][0]
        if va == vb:
            continue
        mats = {d: L._edge_matrix(va, vb, d) for d in L.degrees}
        transports[(a, b)] = mats
    return LocalSystem(sd, dict(L.piece_dims), transports)


def subdivide_assembled(
    nodes: Sequence[AssembledNode], edges: Sequence[AssembledEdge]
) -> tuple[list[AssembledNode], list[AssembledEdge]]:
    sd_nodes = {}
    origins = {}
    for nd in nodes:
        sd, origin = barycentric_subdivision(nd.complex)
        origins[nd.id] = origin
        sd_nodes[nd.id] = AssembledNode(nd.id, sd, subdivide_system(nd.system, sd, origin))
    out_edges = []
    for e in edges:
        sd_h, h_origin = barycentric_subdivision(e.hyp)
        vm = subdivide_map(e.vertex_map, h_origin, origins[e.target])
        out_edges.append(AssembledEdge(e.source, e.target, sd_h, vm, e.coeff))
    return [sd_nodes[n.id] for n in nodes], out_edges


# ---------------------------------------------------------------------------
# assembly of tower coefficient data

from .group_data import (  # noqa: E402  (tower glue sits below the generic engine)
    PolyLinearMap,
    RepMap,
    borel_fiber,
    rep_ring,
    restrict_poly,
    restrict_rep,
)

BOREL = "borel"
REP = "rep"


def _borel_transports(node, ring, degrees):
    transports = {}
    for edge, lattice in sorted(node.monodromy.items()):
        r = node.group.torus_rank
        images = tuple(
            tuple(Fraction(lattice[i][j]) for i in range(r)) for j in range(r)
        )
        pm = PolyLinearMap(ring, ring, images)
        transports[edge] = {d: pm.matrix(d) for d in degrees}
    return transports


def borel_assembled(tower, max_degree: int) -> tuple[list[AssembledNode], list[AssembledEdge]]:
    """Borel-fiber local systems and restriction constraints for a tower."""
    if max_degree < 0:
        raise ChainError("empty degree window")
    nodes = []
    for nid in sorted(tower.nodes):
        node = tower.nodes[nid]
        ring = borel_fiber(node.group)
        dims = {d: ring.dim(d) for d in range(0, max_degree + 1)}
        dims = {d: n for d, n in dims.items() if n}
        if node.group.is_formal and node.monodromy:
            raise ChainError(f"node {nid}: monodromy on a formal group is unsupported")
        transports = (
            {} if node.group.is_formal
            else _borel_transports(node, ring, sorted(dims))
        )
        nodes.append(AssembledNode(nid, node.complex, LocalSystem(node.complex, dims, transports)))
    by_id = {n.id: n for n in nodes}
    edges = []
    for e in tower.edges:
        if tower.nodes[e.source].group.is_formal or tower.nodes[e.target].group.is_formal:
            raise ChainError("edges touching formal groups carry no derived restriction maps")
        pm = restrict_poly(e.inclusion)
        coeff = {
            d: pm.matrix(d)
            for d in range(0, max_degree + 1, 2)
        }
        hyp = tower.hyp_subcomplex(e.source, e.hyp_id)
        edges.append(AssembledEdge(e.source, e.target, hyp, dict(e.vertex_map), coeff))
    return nodes, edges


def rep_windows(tower, lo: int, hi: int) -> dict[str, tuple]:
    """Per-node character windows: the requested box on each node's own
    lattice, expanded until closed under monodromy and under the images of
    neighboring windows along edge restriction maps."""
    win = {}
    for nid in sorted(tower.nodes):
        node = tower.nodes[nid]
        if node.group.is_formal:
            win[nid] = set(node.group.formal.rep.basis)
        else:
            win[nid] = set(rep_ring(node.group).window(lo, hi))
    for _ in range(64):
        changed = False
        for nid in sorted(tower.nodes):
            node = tower.nodes[nid]
            if node.group.is_formal:
                continue
            rr = rep_ring(node.group)
            for _, lattice in sorted(node.monodromy.items()):
                mm = RepMap(rr, rr, tuple(tuple(int(x) for x in row) for row in lattice))
                imgs = {mm.apply_char(c) for c in win[nid]}
                if not imgs <= win[nid]:
                    win[nid] |= imgs
                    changed = True
        for e in tower.edges:
            src_g = tower.nodes[e.source].group
            tgt_g = tower.nodes[e.target].group
            if src_g.is_formal or tgt_g.is_formal:
                raise ChainError("edges touching formal groups carry no derived restriction maps")
            rm = restrict_rep(e.inclusion)
            imgs = {rm.apply_char(c) for c in win[e.target]}
            if not imgs <= win[e.source]:
                win[e.source] |= imgs
                changed = True
        if not changed:
            return {nid: tuple(sorted(chars)) for nid, chars in win.items()}
    raise ChainError("character windows do not stabilize under monodromy/restriction")


def _rep_transports(node, chars):
    index = {c: i for i, c in enumerate(chars)}
    rr = rep_ring(node.group)
    transports = {}
    for edge, lattice in sorted(node.monodromy.items()):
        mm = RepMap(rr, rr, tuple(tuple(int(x) for x in row) for row in lattice))
        mat = [[Fraction(0)] * len(chars) for _ in range(len(chars))]
        for j, c in enumerate(chars):
            mat[index[mm.apply_char(c)]][j] = Fraction(1)
        transports[edge] = {0: mat}
    return transports


def rep_assembled(tower, lo: int, hi: int) -> tuple[list[AssembledNode], list[AssembledEdge]]:
    """Representation-ring local systems restricted to character windows."""
    windows = rep_windows(tower, lo, hi)
    nodes = []
    for nid in sorted(tower.nodes):
        node = tower.nodes[nid]
        chars = windows[nid]
        transports = {} if node.group.is_formal else _rep_transports(node, chars)
        nodes.append(
            AssembledNode(nid, node.complex, LocalSystem(node.complex, {0: len(chars)}, transports))
        )
    edges = []
    for e in tower.edges:
        rm = restrict_rep(e.inclusion)
        src_chars = windows[e.source]
        tgt_chars = windows[e.target]
        src_index = {c: i for i, c in enumerate(src_chars)}
        mat = [[Fraction(0)] * len(tgt_chars) for _ in range(len(src_chars))]
        for j, c in enumerate(tgt_chars):
            mat[src_index[rm.apply_char(c)]][j] = Fraction(1)
        hyp = tower.hyp_subcomplex(e.source, e.hyp_id)
        edges.append(AssembledEdge(e.source, e.target, hyp, dict(e.vertex_map), {0: mat}))
    return nodes, edges


def _tower_max_form_degree(tower) -> int:
    return max((n.complex.dim for n in tower.nodes.values()), default=0)


def assemble_tower(tower, coeff: str, window):
    """(nodes, edges, top slice degree) for the requested coefficients."""
    if coeff == BOREL:
        max_degree = int(window)
        nodes, edges = borel_assembled(tower, max_degree)
        return nodes, edges, max_degree
    if coeff == REP:
        lo, hi = window
        nodes, edges = rep_assembled(tower, lo, hi)
        return nodes, edges, _tower_max_form_degree(tower)
    raise ChainError(f"unknown coefficient kind {coeff!r}")


def equalizer_complex(tower, coeff: str, window) -> list[TowerComplexSlice]:
    """Constrained direct-sum complex over the whole tower (every edge
    imposes restriction-equals-coefficient-pullback on its hypersurface)."""
    nodes, edges, top = assemble_tower(tower, coeff, window)
    return equalizer_slices(nodes, edges, top)


def relative_complex(tower, boundary: Iterable[str], coeff: str, window) -> list[TowerComplexSlice]:
    """Equalizer complex with the listed boundary-class node summands zeroed."""
    boundary = set(boundary)
    for b in boundary:
        if b == tower.root:
            raise ChainError("the root is not a boundary class")
        if not tower.below_nodes(b) <= boundary:
            raise ChainError(f"boundary set is not closed below at {b}")
    nodes, edges, top = assemble_tower(tower, coeff, window)
    return equalizer_slices(nodes, edges, top, zero_nodes=boundary)


def les_check(tower, small: Iterable[str], large: Iterable[str],
              coeff: str, window, max_degree: int) -> LesReport:
    """Tower-level long-exact-sequence rank check between two relative
    complexes whose boundary sets differ by one class."""
    nodes, edges, _ = assemble_tower(tower, coeff, window)
    return les_check_assembled(nodes, edges, small, large, max_degree)
