#!/usr/bin/env python3
"""Import the built extension module and drive every exposed entry point.

Run from the repository root after `cargo build -p ramseyforge-py --release`
(a debug build works too):

    python3 python/smoke_test.py
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_extension():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libramseyforge.so", "ramseyforge.so", "libramseyforge.dylib")
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit(
        "extension not found; run `cargo build -p ramseyforge-py --release` first\n"
        "looked at:\n  " + "\n  ".join(str(c) for c in candidates)
    )


def main():
    src = locate_extension()
    workdir = tempfile.mkdtemp(prefix="ramseyforge-smoke-")
    shutil.copy2(src, Path(workdir) / "ramseyforge.so")
    sys.path.insert(0, workdir)
    import ramseyforge as rf

    checks = 0

    def check(cond, what):
        nonlocal checks
        checks += 1
        if not cond:
            sys.exit(f"FAILED: {what}")
        print(f"  ok: {what}")

    # polynomials parse, print, and evaluate exactly
    p = rf.Polynomial("2z^2+1")
    check(str(p) == "2z^2+1" and p.eval(10) == 201, "polynomial parse/eval round trip")
    check(p.eval_mod(123456789, 2) == 1, "every value of 2z^2+1 is odd")
    cubic = rf.parse_polynomial("z^3+3z^2+2z+3")
    check(cubic.coeffs() == [3, 2, 3, 1], "coefficients in ascending order")
    check(not p.is_candidate_ramsey() and not cubic.is_candidate_ramsey(),
          "both reference polynomials sit on the non-solvable side")

    # the two reference solution-free colorings really have zero solutions
    parity = rf.Coloring.parity()
    rep = json.loads(rf.count_monochromatic(p, parity, 100_000))
    check(rep["count"] == 0, "parity coloring: zero solutions for 2z^2+1 up to 1e5")
    mod6 = rf.Coloring.divisibility(6, [2, 3, 5])
    rep = json.loads(rf.count_monochromatic(cubic, mod6, 100_000))
    check(rep["count"] == 0, "mod-6 coloring: zero solutions for the cubic up to 1e5")

    # a solvable instance: z^2 under parity has witnesses
    sq = rf.Polynomial("z^2")
    rep = json.loads(rf.count_monochromatic(sq, parity, 200, collect_witnesses=True))
    check(rep["count"] == 182 and len(rep["witnesses"]) == 182,
          "z^2 under parity: 182 solutions up to 200, witnesses collected")
    w = rep["witnesses"][0]
    check(w["x"] + w["y"] == w["z"] ** 2, "first witness satisfies x + y = z^2")

    # degenerate tallies stay separate from the strict count
    rep = json.loads(rf.count_monochromatic(sq, parity, 50, include_degenerate=True))
    degen = rep["degenerate"]
    check(rep["count"] == 18 and degen["equal_pair"] == 4
          and degen["repeated_z"] == 2 and degen["trivial"] == 1,
          "degenerate solutions tallied apart from the strict count")

    # residue sets: sumset and the stability decomposition
    a = rf.ResidueSet(6, [2, 3, 5])
    check(sorted(a.sumset(a).members()) == [0, 1, 2, 4, 5],
          "A+A misses exactly the odd residue 3")
    dec = json.loads(rf.stability_decomposition(a))
    check(dec["m_prime"] == 6 and dec["alpha"] == 3,
          "decomposition pins m'=6, alpha=3")

    # certificates: the cubic's coloring is certified, parity for z^2 is not
    rep = json.loads(rf.verify_characterization(cubic, 6, [2, 3, 5], 100_000))
    check(rep["certified"] and rep["empirical_zero"] and rep["agrees"],
          "certificate and horizon count agree for the cubic")
    rep = json.loads(rf.verify_characterization(sq, 2, [1], 1_000))
    check(not rep["certified"] and not rep["empirical_zero"] and rep["agrees"],
          "z^2 under parity: refuted both ways")

    # exhaustive search: every certified bad coloring of period <= 6
    found = json.loads(rf.enumerate_bad_periodic(cubic, 6, 1_500))
    check(len(found["records"]) == 6 and found["colorings_examined"] == 14,
          "bad-coloring enumeration finds 6 certificates among 14 candidates")

    # stability oracle sweep
    rep = json.loads(rf.exhaustive_stability_oracle(6))
    check(rep["balanced_sets"] == 20 and rep["decomposed"] == 20,
          "all 20 balanced subsets of Z_6 decompose")

    # switch analysis on an explicit coloring
    phi = rf.Coloring.explicit(2_000, list(range(1, 2_000, 3)))
    switches = rf.find_switches(phi, 1, 40)
    check(len(switches) > 0, "explicit coloring has switches")
    k = switches[-1]
    prof = json.loads(rf.residue_profile(sq, phi, k))
    wits = json.loads(rf.nonmonotone_solutions(sq, phi, k))
    check(len(wits) == len(prof["nonmonotone_classes"]),
          f"switch k={k}: one witness per non-monotone class")

    # sieve structure for z^2 mod 441
    s = rf.SieveSet(sq, 441, 1, 441)
    c_star, count, bound = s.max_root_count()
    check(count <= bound and s.count_roots(c_star) == count,
          "worst root count matches its own recount and the bound")
    check(rf.verify_nesting(sq, 441, 21, 1, 441), "sieve nesting 441 -> 21")
    z = rf.find_avoiding(sq, 1, 50, [(3, 1), (5, 4)])
    check(z is not None and (z * z) % 3 != 1 and (z * z) % 5 != 4,
          "find_avoiding returns a residue-dodging z")

    # landscape: exhaustive minimum over colorings of [1, 12]
    land = json.loads(rf.min_solutions_landscape(sq, 12))
    check(land["min_count"] == 0 and land["colorings_examined"] == 2_048,
          "exhaustive landscape over [1,12]: minimum 0 across 2^11 colorings")
    land = json.loads(rf.min_solutions_landscape(sq, 64, samples=100, seed=7))
    check(land["mode"] == "random" and land["seed"] == 7,
          "random landscape records its seed")

    # three-interval construction pipes back into the counter
    phi3, n1, n2 = rf.three_interval_coloring(sq, 1_000)
    rep = json.loads(rf.count_monochromatic(sq, phi3, 1_000))
    check(rep["count"] <= 2 * n1 * n1, "three-interval count within 2*n1^2")
    round_trip = rf.Coloring(phi3.to_json())
    check(round_trip.color_at(n1) == -1 and round_trip.color_at(n2) == 1,
          "coloring JSON round trip preserves the interval boundaries")

    print(f"smoke test passed: {checks} checks")


if __name__ == "__main__":
    main()
