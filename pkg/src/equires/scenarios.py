"""Scenario files: strict schema, parsing, orchestration, reports.

A scenario is a versioned JSON document carrying groups, simplicial
complexes, the isotropy stratification, optional monodromy and K fixtures,
and the list of requested computations with embedded oracle expectations.
Parsing is strict: unknown fields are rejected and every cross-reference
must resolve, with the offending path reported.

run() resolves the tower, validates it, executes the requested
computations, compares against the embedded expectations, and emits a
deterministic report (timing is kept on the report object but excluded
from serialization so repeated runs are byte-identical).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from . import __version__
from .chain_engine import ChainError, SimplicialComplexDesc
from .equivariant_models import (
    chern_image_rank,
    delocalized_cohomology,
    k_membership,
    reduced_cartan_cohomology,
    reduced_k_theory,
)
from .group_data import (
    CompactGroupDesc,
    FormalGroupData,
    FormalRepRing,
    GradedRingDesc,
    GroupDataError,
    GroupInclusion,
)
from .strat_model import (
    BoundaryDecl,
    IsotropySpec,
    IsotropyType,
    NodeKData,
    canonical_resolution,
    validate_tower,
)

SCHEMA_VERSION = "1"

COMMANDS = ("resolve", "cohomology", "deloc", "ktheory", "chern", "all", "validate")

_KIND_OF_COMMAND = {
    "resolve": ("resolve",),
    "cohomology": ("cohomology",),
    "deloc": ("deloc",),
    "ktheory": ("ktheory",),
    "chern": ("chern",),
    "all": ("resolve", "cohomology", "deloc", "ktheory", "chern"),
}

DEFAULT_MAX_DEGREE = 12
DEFAULT_WINDOW = (-6, 6)


class ScenarioError(ValueError):
    """Schema or reference failure, carrying the offending path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ScenarioFile:
    id: str
    raw: Mapping[str, Any]
    groups: Mapping[str, CompactGroupDesc]
    strata: IsotropySpec
    variant: Optional[IsotropySpec]
    computations: tuple[Mapping[str, Any], ...]

    def __eq__(self, other):
        return isinstance(other, ScenarioFile) and self.raw == other.raw

    def __hash__(self):
        return hash(self.id)


def emit(scenario: ScenarioFile) -> str:
    return json.dumps(scenario.raw, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# strict parsing


def _require(obj: Mapping, path: str, allowed: Mapping[str, bool]) -> None:
    if not isinstance(obj, dict):
        raise ScenarioError(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in allowed:
            raise ScenarioError(path, f"unknown field {key!r}")
    for key, mandatory in allowed.items():
        if mandatory and key not in obj:
            raise ScenarioError(path, f"missing field {key!r}")


def _int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(path, "expected an integer")
    return value


def _int_matrix(value, path: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list):
        raise ScenarioError(path, "expected a matrix (list of rows)")
    return tuple(tuple(_int(x, f"{path}[{i}][{j}]") for j, x in enumerate(row))
                 for i, row in enumerate(value))


def parse_scenario(text: str) -> ScenarioFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return _parse_data(data)


def _parse_data(data: Mapping) -> ScenarioFile:
    _require(data, "$", {
        "version": True, "id": True, "description": False,
        "groups": True, "complexes": True, "strata": True,
        "variant_strata": False, "monodromy": False, "k_fixtures": False,
        "overlaps": False, "computations": False,
    })
    if data["version"] != SCHEMA_VERSION:
        raise ScenarioError("$.version", f"unsupported version {data['version']!r}")
    if not isinstance(data["id"], str) or not data["id"]:
        raise ScenarioError("$.id", "scenario id must be a nonempty string")

    groups = {}
    for gid, g in data["groups"].items():
        groups[gid] = _parse_group(g, f"$.groups.{gid}")

    complexes = {}
    for cid, c in data["complexes"].items():
        path = f"$.complexes.{cid}"
        _require(c, path, {"simplices": True})
        try:
            complexes[cid] = SimplicialComplexDesc.build(
                [tuple(map(str, s)) for s in c["simplices"]]
            )
        except ChainError as exc:
            raise ScenarioError(path, str(exc)) from None

    monodromy = _parse_monodromy(data.get("monodromy", {}), complexes)
    k_fixtures = _parse_k_fixtures(data.get("k_fixtures", {}), complexes)
    overlaps = frozenset(
        frozenset(map(str, pair)) for pair in data.get("overlaps", [])
    )

    strata = _parse_strata(
        data["strata"], "$.strata", groups, complexes, monodromy, k_fixtures, overlaps
    )
    variant = None
    if "variant_strata" in data:
        variant = _parse_strata(
            data["variant_strata"], "$.variant_strata", groups, complexes,
            monodromy, k_fixtures, overlaps,
        )

    computations = tuple(
        _parse_computation(c, f"$.computations[{i}]")
        for i, c in enumerate(data.get("computations", []))
    )
    return ScenarioFile(
        id=data["id"], raw=data, groups=groups,
        strata=strata, variant=variant, computations=computations,
    )


def _parse_group(g: Mapping, path: str) -> CompactGroupDesc:
    _require(g, path, {"torus_rank": True, "finite_part": False, "formal": False})
    formal = None
    if "formal" in g:
        fp = f"{path}.formal"
        _require(g["formal"], fp, {"borel": True, "rep": True})
        b = g["formal"]["borel"]
        _require(b, f"{fp}.borel", {"generators": False, "dims": True})
        rep = g["formal"]["rep"]
        _require(rep, f"{fp}.rep", {"basis": True, "unit": True, "table": True})
        try:
            ring = GradedRingDesc(
                generators=tuple((str(n), _int(d, f"{fp}.borel.generators"))
                                 for n, d in b.get("generators", [])),
                dims=tuple(_int(x, f"{fp}.borel.dims") for x in b["dims"]),
            )
            table = {}
            for key, prods in rep["table"].items():
                a, _, c = key.partition(",")
                table[(a, c)] = {str(k): _int(v, f"{fp}.rep.table") for k, v in prods.items()}
            formal = FormalGroupData(
                borel=ring,
                rep=FormalRepRing(tuple(map(str, rep["basis"])), table, str(rep["unit"])),
            )
        except GroupDataError as exc:
            raise ScenarioError(fp, str(exc)) from None
    try:
        return CompactGroupDesc(
            torus_rank=_int(g["torus_rank"], f"{path}.torus_rank"),
            finite_part=tuple(_int(m, f"{path}.finite_part") for m in g.get("finite_part", [])),
            formal=formal,
        )
    except GroupDataError as exc:
        raise ScenarioError(path, str(exc)) from None


def _parse_monodromy(data: Mapping, complexes) -> dict:
    out: dict = {}
    for cid, entries in data.items():
        path = f"$.monodromy.{cid}"
        if cid not in complexes:
            raise ScenarioError(path, f"unknown complex {cid!r}")
        per_edge = {}
        for i, entry in enumerate(entries):
            p = f"{path}[{i}]"
            _require(entry, p, {"edge": True, "lattice": True})
            a, b = (str(v) for v in entry["edge"])
            edge = (a, b) if a < b else (b, a)
            if not complexes[cid].has(edge):
                raise ScenarioError(p, f"({a}, {b}) is not an edge of {cid!r}")
            per_edge[edge] = _int_matrix(entry["lattice"], f"{p}.lattice")
        out[cid] = per_edge
    return out


def _parse_k_fixtures(data: Mapping, complexes) -> dict:
    out = {}
    for cid, fx in data.items():
        path = f"$.k_fixtures.{cid}"
        if cid not in complexes:
            raise ScenarioError(path, f"unknown complex {cid!r}")
        _require(fx, path, {"k0": False, "k1": False})
        out[cid] = NodeKData(
            k0=_int(fx.get("k0", 1), f"{path}.k0"),
            k1=_int(fx.get("k1", 0), f"{path}.k1"),
        )
    return out


def _parse_strata(
    data: Mapping, path: str, groups, complexes, monodromy, k_fixtures, overlaps
) -> IsotropySpec:
    _require(data, path, {"ambient": True, "types": True, "inclusions": True})
    if data["ambient"] not in groups:
        raise ScenarioError(f"{path}.ambient", f"unknown group {data['ambient']!r}")
    types = []
    type_ids = set()
    for i, t in enumerate(data["types"]):
        p = f"{path}.types[{i}]"
        _require(t, p, {
            "id": True, "group": True, "dim": True, "complex": True,
            "boundary": False, "interior_center": False,
        })
        if t["group"] not in groups:
            raise ScenarioError(f"{p}.group", f"unknown group {t['group']!r}")
        if t["complex"] not in complexes:
            raise ScenarioError(f"{p}.complex", f"unknown complex {t['complex']!r}")
        boundary = []
        for j, b in enumerate(t.get("boundary", [])):
            bp = f"{p}.boundary[{j}]"
            _require(b, bp, {
                "id": True, "simplices": True, "target": True, "map": True,
                "interior_front_face": False,
            })
            boundary.append(BoundaryDecl(
                hyp_id=str(b["id"]),
                simplices=tuple(tuple(map(str, s)) for s in b["simplices"]),
                target_type=str(b["target"]),
                vertex_map={str(k): str(v) for k, v in b["map"].items()},
                interior_front_face=bool(b.get("interior_front_face", False)),
            ))
        types.append(IsotropyType(
            id=str(t["id"]), group=groups[t["group"]],
            dim=_int(t["dim"], f"{p}.dim"), complex_ref=str(t["complex"]),
            boundary=tuple(boundary),
            interior_center=bool(t.get("interior_center", False)),
        ))
        type_ids.add(str(t["id"]))
    for i, t in enumerate(data["types"]):
        for j, b in enumerate(t.get("boundary", [])):
            if str(b["target"]) not in type_ids:
                raise ScenarioError(
                    f"{path}.types[{i}].boundary[{j}].target",
                    f"unknown type {b['target']!r}",
                )
    inclusions = {}
    for i, inc in enumerate(data["inclusions"]):
        p = f"{path}.inclusions[{i}]"
        _require(inc, p, {"generic": True, "special": True, "lattice_map": True, "lie_map": False})
        gid, sid = str(inc["generic"]), str(inc["special"])
        if gid not in type_ids or sid not in type_ids:
            raise ScenarioError(p, f"unknown type in pair ({gid}, {sid})")
        g_t = next(t for t in types if t.id == gid)
        s_t = next(t for t in types if t.id == sid)
        lie = None
        if "lie_map" in inc:
            lie = tuple(tuple(x for x in row) for row in inc["lie_map"])
        try:
            inclusions[(gid, sid)] = GroupInclusion(
                g_t.group, s_t.group, _int_matrix(inc["lattice_map"], f"{p}.lattice_map"), lie
            )
        except GroupDataError as exc:
            raise ScenarioError(p, str(exc)) from None
    return IsotropySpec(
        ambient=groups[data["ambient"]],
        types=tuple(types),
        inclusions=inclusions,
        complexes=complexes,
        monodromy=monodromy,
        k_data=k_fixtures,
        overlaps=overlaps,
    )


_COMP_FIELDS = {
    "resolve": {"kind": True, "expect": False},
    "cohomology": {"kind": True, "max_degree": False, "expect": False},
    "deloc": {"kind": True, "window": False, "expect": False},
    "ktheory": {"kind": True, "window": False, "expect": False, "members": False},
    "chern": {"kind": True, "max_degree": False, "window": False, "expect": False},
}


def _parse_computation(c: Mapping, path: str) -> dict:
    if not isinstance(c, dict) or "kind" not in c:
        raise ScenarioError(path, "computation needs a 'kind'")
    kind = c["kind"]
    if kind not in _COMP_FIELDS:
        raise ScenarioError(f"{path}.kind", f"unknown computation kind {kind!r}")
    _require(c, path, _COMP_FIELDS[kind])
    out = dict(c)
    if "window" in c:
        w = c["window"]
        if not (isinstance(w, list) and len(w) == 2):
            raise ScenarioError(f"{path}.window", "expected [lo, hi]")
        out["window"] = (_int(w[0], f"{path}.window"), _int(w[1], f"{path}.window"))
    if "max_degree" in c:
        out["max_degree"] = _int(c["max_degree"], f"{path}.max_degree")
    return out


# ---------------------------------------------------------------------------
# running


@dataclass
class RunReport:
    scenario: str
    command: str
    engine_version: str
    validator: list[str]
    trace: dict
    results: list[dict]
    status: int
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        # timing deliberately excluded: reports are byte-identical across runs
        return {
            "scenario": self.scenario,
            "command": self.command,
            "engine_version": self.engine_version,
            "validator": list(self.validator),
            "trace": self.trace,
            "results": self.results,
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def run(scenario: ScenarioFile, command: str,
        max_degree: Optional[int] = None,
        window: Optional[tuple[int, int]] = None) -> RunReport:
    """Resolve, validate, compute, and compare against embedded oracles.

    Status: 0 ok, 1 computation mismatch, 2 validation failure.  Input
    errors raise ScenarioError/ResolutionError before a report exists.
    """
    if command not in COMMANDS:
        raise ScenarioError("$.command", f"unknown command {command!r}")
    start = time.monotonic()
    tower, trace = canonical_resolution(scenario.strata)
    violations = validate_tower(tower)
    variant_tower = None
    if scenario.variant is not None:
        variant_tower, _ = canonical_resolution(scenario.variant)
        violations += [f"variant: {v}" for v in validate_tower(variant_tower)]
    report = RunReport(
        scenario=scenario.id, command=command, engine_version=__version__,
        validator=violations, trace=trace.to_dict(), results=[], status=0,
    )
    if violations:
        report.status = 2
        report.elapsed = time.monotonic() - start
        return report
    if command == "validate":
        report.elapsed = time.monotonic() - start
        return report

    kinds = _KIND_OF_COMMAND[command]
    tasks = [c for c in scenario.computations if c["kind"] in kinds]
    if not tasks and command != "all":
        # no embedded spec for this command: run it with defaults
        tasks = [{"kind": k} for k in kinds]
    ok = True
    for task in tasks:
        result = _run_one(scenario, tower, trace, variant_tower, task, max_degree, window)
        report.results.append(result)
        ok = ok and result["ok"]
    report.status = 0 if ok else 1
    report.elapsed = time.monotonic() - start
    return report


def _run_one(scenario, tower, trace, variant_tower, task, max_degree, window) -> dict:
    kind = task["kind"]
    expect = task.get("expect")
    # embedded expectations are pinned to the scenario's own parameters;
    # explicit overrides run the computation but skip the comparison
    task_degree = task.get("max_degree", DEFAULT_MAX_DEGREE)
    task_window = task.get("window", DEFAULT_WINDOW)
    if max_degree is not None and max_degree != task_degree and kind in ("cohomology", "chern"):
        expect = None
    if window is not None and tuple(window) != tuple(task_window) and kind in ("deloc", "ktheory", "chern"):
        expect = None
    result: dict[str, Any] = {"kind": kind, "ok": True}
    if expect is not None:
        result["expected"] = expect

    if kind == "resolve":
        rounds = len(trace.rounds)
        result["rounds"] = rounds
        result["nodes"] = sorted(tower.nodes)
        result["depth"] = tower.depth
        if expect is not None and expect.get("rounds") is not None:
            result["ok"] = rounds == expect["rounds"]
        return result

    if kind == "cohomology":
        d = max_degree if max_degree is not None else task.get("max_degree", DEFAULT_MAX_DEGREE)
        table = reduced_cartan_cohomology(tower, d)
        result["max_degree"] = d
        result["ranks"] = table.as_list(d)
        if variant_tower is not None:
            vtable = reduced_cartan_cohomology(variant_tower, d)
            result["variant_ranks"] = vtable.as_list(d)
            result["ok"] = result["ok"] and result["ranks"] == result["variant_ranks"]
        if expect is not None and "ranks" in expect:
            result["ok"] = result["ok"] and result["ranks"] == list(expect["ranks"])
        return result

    if kind == "deloc":
        w = window if window is not None else task.get("window", DEFAULT_WINDOW)
        table = delocalized_cohomology(tower, w)
        result["window"] = list(w)
        result["even"], result["odd"] = table.even, table.odd
        if expect is not None:
            result["ok"] = (
                ("even" not in expect or table.even == expect["even"])
                and ("odd" not in expect or table.odd == expect["odd"])
            )
        return result

    if kind == "ktheory":
        w = window if window is not None else task.get("window", DEFAULT_WINDOW)
        kt = reduced_k_theory(tower, w)
        result["window"] = list(w)
        result["k0"], result["k1"] = kt.k0_rank, kt.k1_rank
        if expect is not None:
            result["ok"] = (
                ("k0" not in expect or kt.k0_rank == expect["k0"])
                and ("k1" not in expect or kt.k1_rank == expect["k1"])
            )
        memberships = []
        members = task.get("members", [])
        if window is not None and tuple(window) != tuple(task_window):
            members = []
        for m in members:
            assign = {
                node: {tuple(entry["char"]): entry["coeff"] for entry in entries}
                for node, entries in m["assign"].items()
            }
            got = k_membership(tower, w, assign)
            memberships.append({"assign": m["assign"], "member": got, "expected": m["expect"]})
            result["ok"] = result["ok"] and got == m["expect"]
        if memberships:
            result["members"] = memberships
        return result

    if kind == "chern":
        d = max_degree if max_degree is not None else task.get("max_degree", DEFAULT_MAX_DEGREE)
        w = window if window is not None else task.get("window", DEFAULT_WINDOW)
        rank, k0, even = chern_image_rank(tower, w, d)
        result["max_degree"], result["window"] = d, list(w)
        result["image_rank"], result["k0"], result["even_cartan"] = rank, k0, even
        result["defect"] = 0  # chern_image_rank raises on any constraint defect
        if expect is not None:
            result["ok"] = (
                ("rank" not in expect or rank == expect["rank"])
                and ("even" not in expect or even == expect["even"])
                and ("defect" not in expect or expect["defect"] == 0)
            )
        return result

    raise ScenarioError("$.computations", f"unhandled kind {kind!r}")


# ---------------------------------------------------------------------------
# report formatting


def format_report(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        lines = ["kind,key,value"]
        for res in report.results:
            for key, value in sorted(res.items()):
                if key in ("kind", "expected"):
                    continue
                if isinstance(value, list):
                    value = ";".join(map(str, value))
                lines.append(f"{res['kind']},{key},{value}")
        return "\n".join(lines) + "\n"
    if fmt == "text":
        lines = [f"scenario {report.scenario} [{report.command}] engine {report.engine_version}"]
        if report.validator:
            lines.append("validation FAILED:")
            lines += [f"  - {v}" for v in report.validator]
        for res in report.results:
            status = "ok" if res["ok"] else "MISMATCH"
            lines.append(f"{res['kind']:<12} {status}")
            if "ranks" in res:
                lines.append("  degree: " + " ".join(f"{i:>3}" for i in range(len(res["ranks"]))))
                lines.append("  rank:   " + " ".join(f"{r:>3}" for r in res["ranks"]))
            if "variant_ranks" in res:
                lines.append("  variant:" + " ".join(f"{r:>3}" for r in res["variant_ranks"]))
            for key in ("even", "odd", "k0", "k1", "image_rank", "even_cartan", "rounds", "depth"):
                if key in res:
                    lines.append(f"  {key} = {res[key]}")
        lines.append(f"status {report.status}")
        return "\n".join(lines) + "\n"
    raise ScenarioError("$.format", f"unknown format {fmt!r}")
