"""Smoke test for the compiled supercvx extension module."""

import json

import supercvx as sc


def main():
    p = sc.Measure([(0, "1/4"), (2, "3/4")])
    assert p.mass([2]) == "3/4"
    assert p.integrate(["0", "5", "inf"]) == "inf"
    assert p.pushforward([0, 0, 0]) == sc.Measure.dirac(0)

    mixed = sc.Measure.mixture(["1/2", "1/2"], [sc.Measure.uniform([0, 1]), sc.Measure.dirac(0)])
    assert mixed.atoms() == [(0, "3/4"), (1, "1/4")]

    assert sc.combine("closed_unit", ["1/2", "1/2"], ["0", "1"]) == "1/2"
    assert sc.combine("ext_real", ["1/4", "3/4"], ["8", "inf"]) == "inf"

    sigma = sc.generate_sigma_algebra(["1", "2", "3"], [["1"], ["1", "2"]])
    assert len(sigma) == 8

    assert sc.divergent_sum(100) == "5050/1"
    lo, hi = sc.open_interval_barycenter(50)
    assert 0 < float(lo.split("/")[0]) / float(lo.split("/")[1]) < 1

    reports = json.loads(sc.run_laws(cases=20, suite="axiom*"))
    assert reports and all(r["pass"] for r in reports)
    print(f"ok: {len(reports)} suites")


if __name__ == "__main__":
    main()
