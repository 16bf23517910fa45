"""Isotropy stratifications and the canonical resolution of the quotient.

An action is described by its poset of isotropy types: each type carries a
group, a dimension, and a reference to the scenario-supplied simplicial
complex realizing its resolved stratum quotient, together with boundary
declarations saying which pieces of that complex fiber to which deeper
type.  The engine computes the structure: rounds of simultaneous blow-up
of minimal types, one tower node per connected component of each resolved
quotient, fibration edges decorated with the restriction maps of the
declared group inclusions.

Smooth blow-up geometry is never computed; the structural theorems are
all order- and incidence-theoretic at this level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from . import corner_poset
from .chain_engine import ChainError, Simplex, SimplicialComplexDesc, SimplicialMapDesc
from .corner_poset import Face, FacePoset, Fibration, IteratedFibrationDesc
from .group_data import CompactGroupDesc, GroupInclusion, borel_fiber, rep_ring


class ResolutionError(ValueError):
    pass


LatticeMatrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class BoundaryDecl:
    """One boundary hypersurface of a resolved stratum quotient."""

    hyp_id: str
    simplices: tuple[Simplex, ...]          # top simplices inside the type's complex
    target_type: str
    vertex_map: Mapping[str, str]
    interior_front_face: bool = False       # blow-up center inside one isotropy type


@dataclass(frozen=True)
class IsotropyType:
    id: str
    group: CompactGroupDesc
    dim: int
    complex_ref: str
    boundary: tuple[BoundaryDecl, ...] = ()
    # a blow-up center inside a single isotropy type: contributes a node and
    # front-face edges but does not participate in the isotropy order
    interior_center: bool = False


@dataclass(frozen=True)
class NodeKData:
    k0: int = 1
    k1: int = 0


@dataclass(frozen=True)
class IsotropySpec:
    """Input data: types, their partial order via declared group inclusions.

    `inclusions` is keyed by (generic_id, special_id) where the special type
    precedes the generic one (its group is strictly larger); the value
    includes group(generic) into group(special).  The order is the
    reflexive-transitive closure of these pairs.
    """

    ambient: CompactGroupDesc
    types: tuple[IsotropyType, ...]
    inclusions: Mapping[tuple[str, str], GroupInclusion]
    complexes: Mapping[str, SimplicialComplexDesc]
    monodromy: Mapping[str, Mapping[tuple[str, str], LatticeMatrix]] = field(default_factory=dict)
    k_data: Mapping[str, NodeKData] = field(default_factory=dict)
    overlaps: frozenset[frozenset[str]] = frozenset()

    def type(self, tid: str) -> IsotropyType:
        for t in self.types:
            if t.id == tid:
                return t
        raise ResolutionError(f"unknown isotropy type {tid!r}")

    def below(self, special: str, generic: str) -> bool:
        """special strictly precedes generic (its group is strictly larger)."""
        if special == generic:
            return False
        frontier, seen = [generic], set()
        while frontier:
            cur = frontier.pop()
            for (g, s) in self.inclusions:
                if g == cur and s not in seen:
                    if s == special:
                        return True
                    seen.add(s)
                    frontier.append(s)
        return False

    def comparable(self, a: str, b: str) -> bool:
        return a == b or self.below(a, b) or self.below(b, a)

    def inclusion(self, generic: str, special: str) -> GroupInclusion:
        if (generic, special) in self.inclusions:
            return self.inclusions[(generic, special)]
        # compose along a declared chain
        for (g, s), inc in self.inclusions.items():
            if g == generic and s != special and self.below(special, s):
                tail = self.inclusion(s, special)
                return tail.compose(inc)
        raise ResolutionError(f"no inclusion path from {generic} to {special}")

    def validate(self) -> list[str]:
        out = []
        ids = {t.id for t in self.types}
        for (g, s), inc in self.inclusions.items():
            if g not in ids or s not in ids:
                out.append(f"inclusion references unknown type ({g}, {s})")
                continue
            if inc.source != self.type(g).group:
                out.append(f"inclusion ({g}, {s}): source group mismatch")
            if inc.target != self.type(s).group:
                out.append(f"inclusion ({g}, {s}): target group mismatch")
            if self.below(g, s):
                out.append(f"cyclic order between {g} and {s}")
        for t in self.types:
            if t.complex_ref not in self.complexes:
                out.append(f"type {t.id}: missing complex {t.complex_ref!r}")
        return out


@dataclass(frozen=True)
class TowerNode:
    id: str
    type_id: str
    group: CompactGroupDesc
    complex: SimplicialComplexDesc
    complex_ref: str
    hypersurfaces: Mapping[str, tuple[Simplex, ...]]
    monodromy: Mapping[tuple[str, str], LatticeMatrix] = field(default_factory=dict)
    k_data: NodeKData = NodeKData()
    depth: int = 0


@dataclass(frozen=True)
class TowerEdge:
    source: str
    hyp_id: str
    target: str
    vertex_map: Mapping[str, str]
    inclusion: GroupInclusion
    interior_front_face: bool = False


@dataclass(frozen=True)
class ResolutionTower:
    root: str
    nodes: Mapping[str, TowerNode]
    edges: tuple[TowerEdge, ...]
    comparable_types: frozenset[frozenset[str]]

    def node(self, nid: str) -> TowerNode:
        if nid not in self.nodes:
            raise ResolutionError(f"unknown node {nid!r}")
        return self.nodes[nid]

    def edges_from(self, nid: str) -> tuple[TowerEdge, ...]:
        return tuple(e for e in self.edges if e.source == nid)

    def boundary_classes(self) -> tuple[str, ...]:
        return tuple(sorted(n for n in self.nodes if n != self.root))

    def below_nodes(self, nid: str) -> set[str]:
        out: set[str] = set()
        frontier = [nid]
        while frontier:
            cur = frontier.pop()
            for e in self.edges_from(cur):
                if e.target not in out:
                    out.add(e.target)
                    frontier.append(e.target)
        return out

    @property
    def depth(self) -> int:
        return max((n.depth for n in self.nodes.values()), default=0)

    def hyp_subcomplex(self, nid: str, hyp_id: str) -> SimplicialComplexDesc:
        node = self.node(nid)
        return node.complex.subcomplex(node.hypersurfaces[hyp_id])


@dataclass(frozen=True)
class ResolutionRound:
    index: int
    blown_up: tuple[str, ...]
    remaining_before: tuple[str, ...]
    remaining_after: tuple[str, ...]


@dataclass(frozen=True)
class ResolutionTrace:
    rounds: tuple[ResolutionRound, ...]

    def to_dict(self) -> dict:
        return {
            "rounds": [
                {
                    "round": r.index,
                    "blown_up": list(r.blown_up),
                    "remaining_before": list(r.remaining_before),
                    "remaining_after": list(r.remaining_after),
                }
                for r in self.rounds
            ]
        }


def boundary_faces(X: SimplicialComplexDesc) -> set[Simplex]:
    """Codimension-1 faces lying in exactly one top-dimensional simplex."""
    d = X.dim
    if d <= 0:
        return set()
    count: dict[Simplex, int] = {}
    for s in X.k_simplices(d):
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            count[face] = count.get(face, 0) + 1
    return {f for f, c in count.items() if c == 1}


def canonical_resolution(spec: IsotropySpec) -> tuple[ResolutionTower, ResolutionTrace]:
    """Iteratively blow up all minimal remaining types and assemble the tower.

    Types blown up within a round are pairwise incomparable and must be
    disjoint; each round removes them from the isotropy set.  Node set:
    the root carries the unique open type's complex, every other type
    contributes one node per connected component of its resolved quotient.
    """
    problems = spec.validate()
    if problems:
        raise ResolutionError("; ".join(problems))

    remaining = sorted(t.id for t in spec.types if not t.interior_center)
    rounds = []
    idx = 0
    while True:
        minimal = [
            t for t in remaining
            if not any(spec.below(o, t) for o in remaining if o != t)
        ]
        if set(minimal) == set(remaining):
            break
        idx += 1
        for a, b in itertools.combinations(sorted(minimal), 2):
            if frozenset((a, b)) in spec.overlaps:
                raise ResolutionError(
                    f"round {idx}: minimal types {a} and {b} are declared intersecting"
                )
        after = [t for t in remaining if t not in minimal]
        rounds.append(ResolutionRound(idx, tuple(sorted(minimal)), tuple(remaining), tuple(after)))
        remaining = after

    if len(remaining) != 1:
        raise ResolutionError(
            f"expected a unique open isotropy type, found {remaining}"
        )
    root_type = remaining[0]

    depth_of = {root_type: 0}
    changed = True
    while changed:
        changed = False
        for t in spec.types:
            for u in spec.types:
                if spec.below(t.id, u.id) and u.id in depth_of:
                    d = depth_of[u.id] + 1
                    if depth_of.get(t.id, -1) < d:
                        depth_of[t.id] = d
                        changed = True

    # nodes: one per component of every non-open type; a single root node
    nodes: dict[str, TowerNode] = {}
    comp_node: dict[tuple[str, str], str] = {}  # (type id, component key) -> node id

    def register(tid: str, as_root: bool) -> None:
        t = spec.type(tid)
        X = spec.complexes[t.complex_ref]
        comps = X.components() if not as_root else [X]
        for i, comp in enumerate(comps):
            nid = tid if len(comps) == 1 else f"{tid}#{i}"
            mono = {
                e: m
                for e, m in spec.monodromy.get(t.complex_ref, {}).items()
                if comp.has(e)
            }
            nodes[nid] = TowerNode(
                id=nid,
                type_id=tid,
                group=t.group,
                complex=comp,
                complex_ref=t.complex_ref,
                hypersurfaces={},
                monodromy=mono,
                k_data=spec.k_data.get(t.complex_ref, NodeKData()),
                depth=depth_of.get(tid, 0),
            )
            for v in comp.vertices:
                comp_node[(tid, v)] = nid

    register(root_type, as_root=True)
    for t in spec.types:
        if t.id != root_type:
            register(t.id, as_root=False)

    # edges from boundary declarations; hypersurface data attaches to nodes
    edges = []
    hyps: dict[str, dict[str, tuple[Simplex, ...]]] = {nid: {} for nid in nodes}
    for t in spec.types:
        for decl in t.boundary:
            src_vertices = {v for s in decl.simplices for v in s}
            src_nodes = {comp_node.get((t.id, v)) for v in src_vertices}
            if len(src_nodes) != 1 or None in src_nodes:
                raise ResolutionError(
                    f"type {t.id}: hypersurface {decl.hyp_id} does not lie in one component"
                )
            src = src_nodes.pop()
            tgt_type = spec.type(decl.target_type)
            img_vertices = {decl.vertex_map[v] for v in src_vertices}
            tgt_nodes = {comp_node.get((tgt_type.id, v)) for v in img_vertices}
            if len(tgt_nodes) != 1 or None in tgt_nodes:
                raise ResolutionError(
                    f"type {t.id}: image of {decl.hyp_id} does not lie in one component"
                )
            tgt = tgt_nodes.pop()
            if decl.interior_front_face:
                if t.group != tgt_type.group:
                    raise ResolutionError(
                        f"interior front face {decl.hyp_id} must keep the isotropy group"
                    )
                inc = GroupInclusion.identity(t.group)
            else:
                inc = spec.inclusion(t.id, decl.target_type)
            hyps[src][decl.hyp_id] = tuple(decl.simplices)
            edges.append(
                TowerEdge(src, decl.hyp_id, tgt, dict(decl.vertex_map), inc,
                          decl.interior_front_face)
            )

    nodes = {
        nid: TowerNode(
            id=n.id, type_id=n.type_id, group=n.group, complex=n.complex,
            complex_ref=n.complex_ref, hypersurfaces=hyps[nid],
            monodromy=n.monodromy, k_data=n.k_data, depth=n.depth,
        )
        for nid, n in nodes.items()
    }

    # Declared hypersurfaces must sit inside the simplicial boundary and, in
    # genuinely stratified scenarios, cover it entirely.  A single-type
    # scenario may leave its boundary bare (manifold with corners, trivial
    # or free action): the complex is then computed absolutely.
    stratified = len([t for t in spec.types if not t.interior_center]) > 1
    for nid, node in nodes.items():
        declared: set[Simplex] = set()
        for top in node.hypersurfaces.values():
            declared |= set(node.complex.subcomplex(top).k_simplices(node.complex.dim - 1))
        actual = boundary_faces(node.complex)
        if not declared <= actual:
            raise ResolutionError(
                f"node {nid}: declared hypersurfaces are not boundary faces"
            )
        if stratified and declared != actual:
            raise ResolutionError(
                f"node {nid}: declared hypersurfaces do not cover the complex boundary "
                f"(declared {sorted(declared)}, actual {sorted(actual)})"
            )

    comparable = frozenset(
        frozenset((a.id, b.id))
        for a, b in itertools.combinations(spec.types, 2)
        if spec.comparable(a.id, b.id)
    )
    tower = ResolutionTower(
        root=root_type, nodes=nodes, edges=tuple(edges), comparable_types=comparable
    )
    return tower, ResolutionTrace(tuple(rounds))


# ---------------------------------------------------------------------------
# validation


def validate_tower(tower: ResolutionTower) -> list[str]:
    """All tower invariants: edge growth, comparability of intersecting
    hypersurfaces, per-node fibration structure, coefficient functoriality."""
    out = []
    node_types = {nid: n.type_id for nid, n in tower.nodes.items()}
    for e in tower.edges:
        if e.source not in tower.nodes or e.target not in tower.nodes:
            out.append(f"edge {e.hyp_id}: dangling node reference")
            continue
        src_g = tower.nodes[e.source].group
        tgt_g = tower.nodes[e.target].group
        if e.inclusion.source != src_g or e.inclusion.target != tgt_g:
            out.append(f"edge {e.hyp_id}: inclusion groups do not match its nodes")
        if not e.interior_front_face and src_g == tgt_g:
            out.append(
                f"edge {e.hyp_id}: target group equals source group "
                "(must strictly contain it)"
            )

    # intersecting hypersurfaces must point at comparable types
    for nid, node in tower.nodes.items():
        targets = {e.hyp_id: e.target for e in tower.edges_from(nid)}
        for h1, h2 in itertools.combinations(sorted(node.hypersurfaces), 2):
            v1 = {v for s in node.hypersurfaces[h1] for v in s}
            v2 = {v for s in node.hypersurfaces[h2] for v in s}
            if not (v1 & v2):
                continue
            t1, t2 = node_types.get(targets.get(h1, "")), node_types.get(targets.get(h2, ""))
            if t1 is None or t2 is None:
                out.append(f"node {nid}: hypersurface without an edge among {h1}, {h2}")
                continue
            if t1 != t2 and frozenset((t1, t2)) not in tower.comparable_types:
                out.append(
                    f"node {nid}: hypersurfaces {h1}, {h2} intersect but target "
                    f"incomparable types {t1}, {t2}"
                )

    for nid in sorted(tower.nodes):
        poset, ifs = node_skeleton(tower, nid)
        for v in corner_poset.validate_ifs(poset, ifs):
            out.append(f"node {nid}: {v}")

    out.extend(_check_triangles(tower))
    out.extend(_check_coefficients(tower))
    return out


def _check_coefficients(tower: ResolutionTower) -> list[str]:
    out = []
    for e in tower.edges:
        try:
            borel_fiber(tower.nodes[e.source].group)
            borel_fiber(tower.nodes[e.target].group)
            rep_ring(tower.nodes[e.source].group)
        except Exception as exc:  # invalid descriptor data
            out.append(f"edge {e.hyp_id}: coefficient rings unavailable ({exc})")
            continue
        try:
            src = tower.hyp_subcomplex(e.source, e.hyp_id)
            SimplicialMapDesc(src, tower.nodes[e.target].complex, e.vertex_map)
        except ChainError as exc:
            out.append(f"edge {e.hyp_id}: simplicial map invalid ({exc})")
    return out


def _check_triangles(tower: ResolutionTower) -> list[str]:
    """Corner compatibility: where two hypersurfaces of a node meet, the two
    routes to the deeper node must agree on vertices and on inclusions."""
    out = []
    for nid, node in tower.nodes.items():
        edges = {e.hyp_id: e for e in tower.edges_from(nid)}
        for h1, h2 in itertools.combinations(sorted(node.hypersurfaces), 2):
            e1, e2 = edges.get(h1), edges.get(h2)
            if e1 is None or e2 is None:
                continue
            v1 = {v for s in node.hypersurfaces[h1] for v in s}
            v2 = {v for s in node.hypersurfaces[h2] for v in s}
            shared = v1 & v2
            if not shared:
                continue
            # order by fibration codimension: shallower fibration first
            d1 = _fib_codim(tower, e1)
            d2 = _fib_codim(tower, e2)
            lo, hi = (e1, e2) if d1 < d2 else (e2, e1)
            mid_edges = {
                (ee.hyp_id, ee.target): ee for ee in tower.edges_from(lo.target)
            }
            for v in sorted(shared):
                img_mid = lo.vertex_map[v]
                img_deep = hi.vertex_map[v]
                hits = [
                    ee for ee in mid_edges.values()
                    if ee.target == hi.target and ee.vertex_map.get(img_mid) == img_deep
                ]
                if not hits:
                    out.append(
                        f"node {nid}: corner {v} of {h1} and {h2} has no commuting "
                        f"triangle through {lo.target}"
                    )
                    continue
                composite = hits[0].inclusion.compose(lo.inclusion)
                if (composite.lattice_map != hi.inclusion.lattice_map
                        or composite.lie_map != hi.inclusion.lie_map):
                    out.append(
                        f"node {nid}: corner {v}: restriction maps do not commute "
                        f"through {lo.target}"
                    )
    return out


def _fib_codim(tower: ResolutionTower, e: TowerEdge) -> int:
    hyp = tower.hyp_subcomplex(e.source, e.hyp_id)
    return hyp.dim - tower.nodes[e.target].complex.dim


# ---------------------------------------------------------------------------
# bridge to corner_poset


def node_skeleton(tower: ResolutionTower, nid: str) -> tuple[FacePoset, IteratedFibrationDesc]:
    """Face poset of a node's boundary plus its induced fibration data."""
    node = tower.node(nid)
    hyp_ids = sorted(node.hypersurfaces)
    faces = [Face("int", 0, frozenset())]
    faces += [Face(h, 1, frozenset([h])) for h in hyp_ids]
    for h1, h2 in itertools.combinations(hyp_ids, 2):
        v1 = {v for s in node.hypersurfaces[h1] for v in s}
        v2 = {v for s in node.hypersurfaces[h2] for v in s}
        for i, v in enumerate(sorted(v1 & v2)):
            faces.append(Face(f"{h1}^{h2}" + (f"#{i}" if i else ""), 2, frozenset((h1, h2))))
    poset = FacePoset(frozenset(hyp_ids), tuple(faces))
    edges = {e.hyp_id: e for e in tower.edges_from(nid)}
    fibrations = {}
    compat = {}
    for h in hyp_ids:
        e = edges.get(h)
        if e is None:
            continue
        fibrations[h] = Fibration(e.target, _fib_codim(tower, e))
    for h1, h2 in itertools.combinations(hyp_ids, 2):
        if h1 in fibrations and h2 in fibrations and poset.hypersurfaces_intersect(h1, h2):
            c1, c2 = fibrations[h1].codim, fibrations[h2].codim
            if c1 == c2:
                continue
            lo, hi = (h1, h2) if c1 < c2 else (h2, h1)
            compat[(lo, hi)] = f"{nid}:{lo}>{hi}"
    return poset, IteratedFibrationDesc(poset, fibrations, compat)


def quotient_skeleton(tower: ResolutionTower) -> dict:
    """Per-node face posets and fibration descriptors plus global incidence."""
    per_node = {nid: node_skeleton(tower, nid) for nid in sorted(tower.nodes)}
    incidence = {
        (e.source, e.hyp_id): e.target for e in tower.edges
    }
    return {"nodes": per_node, "incidence": incidence}
