"""Built-in scenario catalogue with embedded oracle expectations.

Each generator returns the raw schema dict; generate_catalogue pushes it
through the strict parser so catalogue output and file input share one code
path.  The embedded expected values are frozen from independent oracles
(see the test suite): closed-form series products, augmentation-kernel
counts, and brute-force equalizer dimensions.
"""

from __future__ import annotations

import json
from typing import Mapping, Optional

from .scenarios import ScenarioError, ScenarioFile, parse_scenario

CATALOGUE_NAMES = (
    "rotation_sphere",
    "rotation_sphere_with_trivial_H",
    "antipodal_circle",
    "reflection_circle",
    "trivial_action",
    "torus_on_s3",
    "torus_on_s2xs2",
    "blowup_invariance_pair",
)

_CIRCLE = [["x", "y"], ["y", "z"], ["x", "z"]]
_INTERVAL = [["a", "b"]]
_POINT = [["P"]]
_SQUARE_DISK = [
    ["qc", "q0", "q1"], ["qc", "q1", "q2"], ["qc", "q2", "q3"], ["qc", "q0", "q3"],
]
_OCTAHEDRON = [
    ["N", "E1", "E2"], ["N", "E2", "E3"], ["N", "E3", "E4"], ["N", "E1", "E4"],
    ["S", "E1", "E2"], ["S", "E2", "E3"], ["S", "E3", "E4"], ["S", "E1", "E4"],
]
_CAPPED_DISK = [
    ["N", "E1", "E2"], ["N", "E2", "E3"], ["N", "E3", "E4"], ["N", "E1", "E4"],
]


def _rotation_sphere() -> dict:
    return {
        "version": "1",
        "id": "rotation_sphere",
        "description": "Circle rotating the 2-sphere about its axis; "
                       "resolved by cutting out the two poles.",
        "groups": {"G": {"torus_rank": 1}, "e": {"torus_rank": 0}},
        "complexes": {
            "interval": {"simplices": _INTERVAL},
            "two_points": {"simplices": [["N"], ["S"]]},
        },
        "strata": {
            "ambient": "G",
            "types": [
                {
                    "id": "free", "group": "e", "dim": 2, "complex": "interval",
                    "boundary": [
                        {"id": "end_a", "simplices": [["a"]], "target": "poles",
                         "map": {"a": "N"}},
                        {"id": "end_b", "simplices": [["b"]], "target": "poles",
                         "map": {"b": "S"}},
                    ],
                },
                {"id": "poles", "group": "G", "dim": 0, "complex": "two_points"},
            ],
            "inclusions": [
                {"generic": "free", "special": "poles", "lattice_map": []},
            ],
        },
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 1}},
            {"kind": "cohomology", "max_degree": 8,
             "expect": {"ranks": [1, 0, 2, 0, 2, 0, 2, 0, 2]}},
            {"kind": "deloc", "window": [-2, 2], "expect": {"even": 9, "odd": 0}},
            {"kind": "ktheory", "window": [-2, 2], "expect": {"k0": 9, "k1": 0},
             "members": [
                 {"assign": {"poles#0": [{"char": [1], "coeff": 1}],
                             "poles#1": [{"char": [0], "coeff": 1}]},
                  "expect": True},
                 {"assign": {"poles#0": [{"char": [1], "coeff": 1}],
                             "poles#1": [{"char": [0], "coeff": 2}]},
                  "expect": False},
             ]},
            {"kind": "chern", "max_degree": 8, "window": [-2, 2],
             "expect": {"rank": 9, "even": 9, "defect": 0}},
        ],
    }


def _rotation_sphere_with_trivial_H() -> dict:
    # G = T^2 with normal H = first factor acting trivially; G/H rotates.
    return {
        "version": "1",
        "id": "rotation_sphere_with_trivial_H",
        "description": "Sphere rotation by G/H for a rank-2 torus G with a "
                       "codimension-one subgroup H acting trivially.",
        "groups": {"G": {"torus_rank": 2}, "H": {"torus_rank": 1}},
        "complexes": {
            "interval": {"simplices": _INTERVAL},
            "two_points": {"simplices": [["N"], ["S"]]},
        },
        "strata": {
            "ambient": "G",
            "types": [
                {
                    "id": "free", "group": "H", "dim": 2, "complex": "interval",
                    "boundary": [
                        {"id": "end_a", "simplices": [["a"]], "target": "poles",
                         "map": {"a": "N"}},
                        {"id": "end_b", "simplices": [["b"]], "target": "poles",
                         "map": {"b": "S"}},
                    ],
                },
                {"id": "poles", "group": "G", "dim": 0, "complex": "two_points"},
            ],
            "inclusions": [
                # characters of G restrict to H by dropping the rotation weight
                {"generic": "free", "special": "poles", "lattice_map": [[1, 0]]},
            ],
        },
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 1}},
            {"kind": "cohomology", "max_degree": 8,
             "expect": {"ranks": [1, 0, 3, 0, 5, 0, 7, 0, 9]}},
            {"kind": "deloc", "window": [-2, 2], "expect": {"even": 45, "odd": 0}},
            {"kind": "ktheory", "window": [-2, 2], "expect": {"k0": 45, "k1": 0}},
            {"kind": "chern", "max_degree": 8, "window": [-2, 2],
             "expect": {"rank": 25, "even": 25, "defect": 0}},
        ],
    }


def _antipodal_circle() -> dict:
    return {
        "version": "1",
        "id": "antipodal_circle",
        "description": "Free antipodal involution on the circle; the quotient "
                       "circle is the whole tower.",
        "groups": {"Z2": {"torus_rank": 0, "finite_part": [2]},
                   "e": {"torus_rank": 0}},
        "complexes": {"circle": {"simplices": _CIRCLE}},
        "strata": {
            "ambient": "Z2",
            "types": [
                {"id": "free", "group": "e", "dim": 1, "complex": "circle"},
            ],
            "inclusions": [],
        },
        "k_fixtures": {"circle": {"k0": 1, "k1": 1}},
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 0}},
            {"kind": "cohomology", "max_degree": 8,
             "expect": {"ranks": [1, 1, 0, 0, 0, 0, 0, 0, 0]}},
            {"kind": "deloc", "window": [-2, 2], "expect": {"even": 1, "odd": 1}},
            {"kind": "ktheory", "window": [-2, 2], "expect": {"k0": 1, "k1": 1}},
        ],
    }


def _reflection_circle() -> dict:
    return {
        "version": "1",
        "id": "reflection_circle",
        "description": "Circle reflected across a diameter; two fixed points "
                       "with full isotropy, quotient an interval.",
        "groups": {"Z2": {"torus_rank": 0, "finite_part": [2]},
                   "e": {"torus_rank": 0}},
        "complexes": {
            "interval": {"simplices": _INTERVAL},
            "two_points": {"simplices": [["N"], ["S"]]},
        },
        "strata": {
            "ambient": "Z2",
            "types": [
                {
                    "id": "free", "group": "e", "dim": 1, "complex": "interval",
                    "boundary": [
                        {"id": "end_a", "simplices": [["a"]], "target": "fixed",
                         "map": {"a": "N"}},
                        {"id": "end_b", "simplices": [["b"]], "target": "fixed",
                         "map": {"b": "S"}},
                    ],
                },
                {"id": "fixed", "group": "Z2", "dim": 0, "complex": "two_points"},
            ],
            "inclusions": [
                {"generic": "free", "special": "fixed", "lattice_map": []},
            ],
        },
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 1}},
            {"kind": "cohomology", "max_degree": 8,
             "expect": {"ranks": [1, 0, 0, 0, 0, 0, 0, 0, 0]}},
            {"kind": "deloc", "window": [-2, 2], "expect": {"even": 3, "odd": 0}},
            {"kind": "ktheory", "window": [-2, 2], "expect": {"k0": 3, "k1": 0}},
        ],
    }


def _trivial_action(base: str) -> dict:
    if base == "circle":
        complexes = {"circle": {"simplices": _CIRCLE}}
        ref, dim = "circle", 1
        k_fixtures = {"circle": {"k0": 1, "k1": 1}}
        # H(S^1) x series of Q[u]: (1+t)(1+t^2+t^4+...)
        ranks = [1] * 13
    elif base == "square":
        complexes = {"square": {"simplices": _SQUARE_DISK}}
        ref, dim = "square", 2
        k_fixtures = {"square": {"k0": 1, "k1": 0}}
        ranks = [1 if n % 2 == 0 else 0 for n in range(13)]
    else:
        raise ScenarioError("$.params.base", f"unknown base {base!r}")
    return {
        "version": "1",
        "id": f"trivial_action_{base}",
        "description": "Circle group acting trivially; the reduced complex is "
                       "the base tensored with the Borel fiber.",
        "groups": {"G": {"torus_rank": 1}},
        "complexes": complexes,
        "strata": {
            "ambient": "G",
            "types": [{"id": "all", "group": "G", "dim": dim, "complex": ref}],
            "inclusions": [],
        },
        "k_fixtures": k_fixtures,
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 0}},
            {"kind": "cohomology", "max_degree": 12, "expect": {"ranks": ranks}},
        ],
    }


def _torus_on_s3() -> dict:
    # T^2 on the 3-sphere in C^2; two circle-isotropy orbits, free elsewhere.
    return {
        "version": "1",
        "id": "torus_on_s3",
        "description": "Rank-2 torus on the 3-sphere: two exceptional circles "
                       "with rank-1 isotropy over the endpoints of the quotient arc.",
        "groups": {"G": {"torus_rank": 2}, "T": {"torus_rank": 1},
                   "e": {"torus_rank": 0}},
        "complexes": {
            "interval": {"simplices": _INTERVAL},
            "point": {"simplices": _POINT},
        },
        "strata": {
            "ambient": "G",
            "types": [
                {
                    "id": "free", "group": "e", "dim": 3, "complex": "interval",
                    "boundary": [
                        {"id": "end_a", "simplices": [["a"]], "target": "c1",
                         "map": {"a": "P"}},
                        {"id": "end_b", "simplices": [["b"]], "target": "c2",
                         "map": {"b": "P"}},
                    ],
                },
                {"id": "c1", "group": "T", "dim": 1, "complex": "point"},
                {"id": "c2", "group": "T", "dim": 1, "complex": "point"},
            ],
            "inclusions": [
                {"generic": "free", "special": "c1", "lattice_map": []},
                {"generic": "free", "special": "c2", "lattice_map": []},
            ],
        },
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 1}},
            {"kind": "cohomology", "max_degree": 8,
             "expect": {"ranks": [1, 0, 2, 0, 2, 0, 2, 0, 2]}},
            {"kind": "deloc", "window": [-2, 2], "expect": {"even": 9, "odd": 0}},
            {"kind": "ktheory", "window": [-2, 2], "expect": {"k0": 9, "k1": 0}},
        ],
    }


def _torus_on_s2xs2() -> dict:
    rim = [f"v{i}" for i in range(8)]
    octagon = [["c", rim[i], rim[(i + 1) % 8]] for i in range(8)]
    return {
        "version": "1",
        "id": "torus_on_s2xs2",
        "description": "Product of two rotation spheres under the rank-2 torus: "
                       "four fixed corners, two circle-isotropy types, octagon quotient.",
        "groups": {"G": {"torus_rank": 2}, "T": {"torus_rank": 1},
                   "e": {"torus_rank": 0}},
        "complexes": {
            "octagon": {"simplices": octagon},
            "m1_pair": {"simplices": [["n1_0", "n1_1"], ["s1_0", "s1_1"]]},
            "m2_pair": {"simplices": [["n2_0", "n2_1"], ["s2_0", "s2_1"]]},
            "point": {"simplices": _POINT},
        },
        "strata": {
            "ambient": "G",
            "types": [
                {
                    "id": "free", "group": "e", "dim": 4, "complex": "octagon",
                    "boundary": [
                        {"id": "side_left", "simplices": [["v0", "v1"]], "target": "m1",
                         "map": {"v0": "n1_0", "v1": "n1_1"}},
                        {"id": "ff_NS", "simplices": [["v1", "v2"]], "target": "kNS",
                         "map": {"v1": "P", "v2": "P"}},
                        {"id": "side_top", "simplices": [["v2", "v3"]], "target": "m2",
                         "map": {"v2": "s2_0", "v3": "s2_1"}},
                        {"id": "ff_SS", "simplices": [["v3", "v4"]], "target": "kSS",
                         "map": {"v3": "P", "v4": "P"}},
                        {"id": "side_right", "simplices": [["v4", "v5"]], "target": "m1",
                         "map": {"v4": "s1_1", "v5": "s1_0"}},
                        {"id": "ff_SN", "simplices": [["v5", "v6"]], "target": "kSN",
                         "map": {"v5": "P", "v6": "P"}},
                        {"id": "side_bot", "simplices": [["v6", "v7"]], "target": "m2",
                         "map": {"v6": "n2_1", "v7": "n2_0"}},
                        {"id": "ff_NN", "simplices": [["v7", "v0"]], "target": "kNN",
                         "map": {"v7": "P", "v0": "P"}},
                    ],
                },
                {
                    "id": "m1", "group": "T", "dim": 2, "complex": "m1_pair",
                    "boundary": [
                        {"id": "n1a", "simplices": [["n1_0"]], "target": "kNN",
                         "map": {"n1_0": "P"}},
                        {"id": "n1b", "simplices": [["n1_1"]], "target": "kNS",
                         "map": {"n1_1": "P"}},
                        {"id": "s1a", "simplices": [["s1_0"]], "target": "kSN",
                         "map": {"s1_0": "P"}},
                        {"id": "s1b", "simplices": [["s1_1"]], "target": "kSS",
                         "map": {"s1_1": "P"}},
                    ],
                },
                {
                    "id": "m2", "group": "T", "dim": 2, "complex": "m2_pair",
                    "boundary": [
                        {"id": "n2a", "simplices": [["n2_0"]], "target": "kNN",
                         "map": {"n2_0": "P"}},
                        {"id": "n2b", "simplices": [["n2_1"]], "target": "kSN",
                         "map": {"n2_1": "P"}},
                        {"id": "s2a", "simplices": [["s2_0"]], "target": "kNS",
                         "map": {"s2_0": "P"}},
                        {"id": "s2b", "simplices": [["s2_1"]], "target": "kSS",
                         "map": {"s2_1": "P"}},
                    ],
                },
                {"id": "kNN", "group": "G", "dim": 0, "complex": "point"},
                {"id": "kNS", "group": "G", "dim": 0, "complex": "point"},
                {"id": "kSN", "group": "G", "dim": 0, "complex": "point"},
                {"id": "kSS", "group": "G", "dim": 0, "complex": "point"},
            ],
            "inclusions": (
                [
                    {"generic": "free", "special": "m1", "lattice_map": []},
                    {"generic": "free", "special": "m2", "lattice_map": []},
                ]
                + [
                    {"generic": "m1", "special": k, "lattice_map": [[1, 0]]}
                    for k in ("kNN", "kNS", "kSN", "kSS")
                ]
                + [
                    {"generic": "m2", "special": k, "lattice_map": [[0, 1]]}
                    for k in ("kNN", "kNS", "kSN", "kSS")
                ]
                + [
                    {"generic": "free", "special": k, "lattice_map": []}
                    for k in ("kNN", "kNS", "kSN", "kSS")
                ]
            ),
        },
        "computations": [
            {"kind": "resolve", "expect": {"rounds": 2}},
            {"kind": "cohomology", "max_degree": 6,
             "expect": {"ranks": [1, 0, 4, 0, 8, 0, 12]}},
        ],
    }


def _blowup_invariance_pair() -> dict:
    return {
        "version": "1",
        "id": "blowup_invariance_pair",
        "description": "Trivially acted sphere versus the same sphere with an "
                       "interior point blown up; the twisted tables must agree.",
        "groups": {"G": {"torus_rank": 1}},
        "complexes": {
            "sphere": {"simplices": _OCTAHEDRON},
            "capped_disk": {"simplices": _CAPPED_DISK},
            "point": {"simplices": _POINT},
        },
        "strata": {
            "ambient": "G",
            "types": [
                {
                    "id": "all", "group": "G", "dim": 2, "complex": "capped_disk",
                    "boundary": [
                        {"id": "ff", "target": "center", "interior_front_face": True,
                         "simplices": [["E1", "E2"], ["E2", "E3"], ["E3", "E4"],
                                        ["E1", "E4"]],
                         "map": {"E1": "P", "E2": "P", "E3": "P", "E4": "P"}},
                    ],
                },
                {"id": "center", "group": "G", "dim": 0, "complex": "point",
                 "interior_center": True},
            ],
            "inclusions": [],
        },
        "variant_strata": {
            "ambient": "G",
            "types": [{"id": "all", "group": "G", "dim": 2, "complex": "sphere"}],
            "inclusions": [],
        },
        "computations": [
            {"kind": "cohomology", "max_degree": 8,
             "expect": {"ranks": [1, 0, 2, 0, 2, 0, 2, 0, 2]}},
        ],
    }


_BUILDERS = {
    "rotation_sphere": lambda params: _rotation_sphere(),
    "rotation_sphere_with_trivial_H": lambda params: _rotation_sphere_with_trivial_H(),
    "antipodal_circle": lambda params: _antipodal_circle(),
    "reflection_circle": lambda params: _reflection_circle(),
    "trivial_action": lambda params: _trivial_action(params.get("base", "circle")),
    "torus_on_s3": lambda params: _torus_on_s3(),
    "torus_on_s2xs2": lambda params: _torus_on_s2xs2(),
    "blowup_invariance_pair": lambda params: _blowup_invariance_pair(),
}


def generate_catalogue(name: str, params: Optional[Mapping] = None) -> ScenarioFile:
    """Emit a catalogue scenario, parsed through the strict schema."""
    if name not in _BUILDERS:
        raise ScenarioError("$.catalogue", f"unknown catalogue scenario {name!r}")
    params = dict(params or {})
    known = {"trivial_action": {"base"}}.get(name, set())
    extra = set(params) - known
    if extra:
        raise ScenarioError("$.params", f"unknown parameters {sorted(extra)}")
    data = _BUILDERS[name](params)
    return parse_scenario(json.dumps(data))
