#!/usr/bin/env python3
"""Regenerates tests/data/corpus. Files named canon-* are in the exact form the
writers produce; edge-* files exercise parser leniency (comments, headers that
miscount clauses, clauses split across lines, SATLIB trailers)."""

import os
import random

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")


def clause_line(lits):
    return " ".join(str(l) for l in lits) + (" 0\n" if lits else "0\n")


def random_clauses(rng, nvars, nclauses, max_len=4, allow_empty=False):
    out = []
    for _ in range(nclauses):
        if allow_empty and rng.random() < 0.1:
            out.append([])
            continue
        k = rng.randint(1, min(max_len, nvars))
        vs = rng.sample(range(1, nvars + 1), k)
        out.append([v if rng.random() < 0.5 else -v for v in vs])
    return out


def cnf_text(nvars, clauses, header_clauses=None):
    n = len(clauses) if header_clauses is None else header_clauses
    return f"p cnf {nvars} {n}\n" + "".join(clause_line(c) for c in clauses)


def icnf_text(nvars, clauses, cubes):
    used = max([abs(l) for c in clauses for l in c] + [0])
    out = "p inccnf\n"
    if nvars > used:
        out += f"c num_vars {nvars}\n"
    out += "".join(clause_line(c) for c in clauses)
    out += "".join("a " + clause_line(c) for c in cubes)
    return out


def main():
    os.makedirs(HERE, exist_ok=True)
    rng = random.Random(2024)
    files = {}
    files["canon-00-empty.cnf"] = cnf_text(0, [])
    files["canon-01-novars-emptyclause.cnf"] = cnf_text(0, [[]])
    files["canon-02-unit.cnf"] = cnf_text(1, [[1], [-1]])
    files["canon-03-unused-vars.cnf"] = cnf_text(9, [[1, -2]])
    for i in range(4, 22):
        nv = rng.randint(1, 30)
        files[f"canon-{i:02d}-random.cnf"] = cnf_text(nv, random_clauses(rng, nv, rng.randint(0, 40), allow_empty=i % 5 == 0))
    # Edge cases: not in writer form, but must parse and then round-trip.
    files["edge-22-header-more.cnf"] = cnf_text(3, [[1, 2], [-3]], header_clauses=5)
    files["edge-23-header-fewer.cnf"] = cnf_text(3, [[1, 2], [-3], [2, 3]], header_clauses=1)
    files["edge-24-comments.cnf"] = "c generated\nc by hand\np cnf 2 1\nc inside\n1 -2 0\n"
    files["edge-25-multiline.cnf"] = "p cnf 4 2\n1 2\n3 0 -4\n0\n"
    files["edge-26-trailer.cnf"] = "p cnf 2 1\n1 2 0\n%\n0\n\n"
    files["edge-27-blank-lines.cnf"] = "\n\np cnf 2 2\n\n1 0\n\n-2 0\n\n"
    files["edge-28-emptyclause-mismatch.cnf"] = "p cnf 2 3\n0\n1 2 0\n"
    files["edge-29-tabs.cnf"] = "p  cnf\t3 1\n1\t-2   3 0\n"
    for i in range(30, 44):
        nv = rng.randint(1, 24)
        cl = random_clauses(rng, nv, rng.randint(0, 25), allow_empty=i % 7 == 0)
        cubes = []
        for _ in range(rng.randint(0, 8)):
            k = rng.randint(0, min(4, nv))
            cubes.append([v if rng.random() < 0.5 else -v for v in rng.sample(range(1, nv + 1), k)])
        files[f"canon-{i:02d}-random.icnf"] = icnf_text(nv, cl, cubes)
    files["canon-44-cubes-only.icnf"] = icnf_text(3, [], [[1, -3], [-1]])
    files["canon-45-empty-cube.icnf"] = icnf_text(2, [[1, 2]], [[]])
    files["canon-46-no-cubes.icnf"] = icnf_text(2, [[1], [-2]], [])
    files["canon-47-unused.icnf"] = icnf_text(12, [[1, 2]], [[3]])
    files["edge-48-comments.icnf"] = "c split by hand\np inccnf\n1 2 0\nc two cubes\na 1 0\na -1 0\n"
    files["edge-49-multiline.icnf"] = "p inccnf\n1\n2 0 -1\n0\na 2 0\n"
    assert len(files) == 50
    for name, text in files.items():
        with open(os.path.join(HERE, name), "w") as f:
            f.write(text)


if __name__ == "__main__":
    main()
