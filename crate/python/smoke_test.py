#!/usr/bin/env python3
"""Smoke test for the conesmith_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/, copies
it to a temp directory under the importable name, and runs a handful of
end-to-end checks against known exact values.

Usage:
    cargo build -p conesmith-py --release
    python3 python/smoke_test.py
"""

import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_cdylib():
    candidates = [
        ROOT / "target" / "release" / "libconesmith_py.so",
        ROOT / "target" / "debug" / "libconesmith_py.so",
        ROOT / "target" / "release" / "libconesmith_py.dylib",
        ROOT / "target" / "debug" / "libconesmith_py.dylib",
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("no compiled extension found; run: cargo build -p conesmith-py --release")


def import_module():
    lib = locate_cdylib()
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="conesmith-smoke-"))
    shutil.copy(lib, tmp / "conesmith_py.so")
    sys.path.insert(0, str(tmp))
    import conesmith_py

    return conesmith_py


def main():
    cs = import_module()
    failures = []

    def check(name, condition):
        status = "ok" if condition else "FAIL"
        print(f"  {name}: {status}")
        if not condition:
            failures.append(name)

    print("lattices:")
    u = cs.Lattice.from_name("U")
    check("U signature (1,1,0)", u.signature() == (1, 1, 0))
    check("U determinant -1", u.det() == "-1")
    check("U even", u.is_even())
    disc = json.loads(u.discriminant_json())
    check("U discriminant trivial", disc["invariant_factors"] == [])

    e8 = cs.Lattice.from_name("E8")
    check("E8 signature (8,0,0)", e8.signature() == (8, 0, 0))
    check("E8 unimodular", e8.det() == "1")

    m6 = cs.Lattice([[-6]])
    disc = json.loads(m6.discriminant_json())
    check("<-6> discriminant Z/6", disc["invariant_factors"] == ["6"])
    check("<-6> q = -1/6 mod 2Z", disc["q_values"] == ["11/6"])

    print("cones:")
    quadrant = cs.Cone([[1, 0], [0, 1]])
    check("quadrant pointed", quadrant.is_pointed())
    check("quadrant self-dual", quadrant.dual().rays() == quadrant.rays())
    verdict = json.loads(quadrant.singularity_json())
    check("quadrant canonical", verdict["canonical"]["status"] == "canonical")
    check("quadrant index 1", verdict["gorenstein_index"] == "1")

    wedge = cs.Cone([[1, 1], [1, -1]])
    verdict = json.loads(wedge.singularity_json())
    check("wedge m = (1,0)", verdict["m"] == ["1", "0"])

    print("perfect fans:")
    fan = json.loads(
        cs.perfect_fan_json("lorentzian", [[1, 0], [0, 1]], lattice="U")
    )
    check("U fan has one facet", len(fan["piece"]["facets"]) == 1)
    check("U fan canonical", fan["all_canonical"])

    a2 = json.loads(
        cs.perfect_fan_json("psd", [[1, 0, 0], [0, 0, 1], [1, -1, 1]], g=2)
    )
    check("A2 facet has 3 vertices", len(a2["piece"]["facets"][0]["vertices"]) == 3)
    check(
        "A2 facet normal is the hexagonal form",
        a2["piece"]["facets"][0]["normal_dual_vector"] == ["1", "1/2", "1"],
    )

    print("quotients:")
    pentagon = [[1, 1, 1], [1, -1, 1], [-1, 1, 1], [-1, -1, 1], [0, 2, 1]]
    reflection = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]
    q = json.loads(cs.quotient_json(pentagon, [reflection]))
    check("pentagon m = (0,0,1)", q["verdict"]["m"] == ["0", "0", "1"])
    check("pentagon canonical", q["verdict"]["canonical"]["status"] == "canonical")
    refl = [e for e in q["elements"] if e["class"] == "reflection"]
    check("one reflection, 2 components", len(refl) == 1 and refl[0]["torus_fixed_components"] == "2")
    check("reduction not Q-Cartier", q["q_cartier"]["q_cartier"] is False)
    check("klt certificate", q["klt"]["certificate"] is True)

    print("k3 scenarios:")
    k3 = json.loads(cs.k3_scenario_json(3))
    check("lambda_6 signature (2,19)", k3["lattice"]["signature"] == [2, 19, 0])
    check("lambda_6 discriminant Z/6", k3["discriminant"]["invariant_factors"] == ["6"])
    check("quotient signature (1,18)", k3["quotient"]["signature"] == [1, 18, 0])

    paper = json.loads(cs.paper_example_json())
    check("paper example command", paper["command"] == "paper-example")
    check("paper example klt", paper["report"]["klt"]["certificate"] is True)

    if failures:
        sys.exit(f"\n{len(failures)} smoke check(s) failed: {failures}")
    print("\nall smoke checks passed")


if __name__ == "__main__":
    main()
