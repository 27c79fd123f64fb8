#!/usr/bin/env python3
"""Regenerate the shipped corpus config (src/freudhc/data/corpus.json).

Coefficients of the random-expansion members are drawn once from the
counter-based generator below and frozen into the file, so the corpus is a
plain data artifact; rerunning this script reproduces it bit for bit.
"""

import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "freudhc" / "data" / "corpus.json"

ENTROPY = 20240611


def rng_for(tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(ENTROPY, spawn_key=(tag,))))


def expansion_1d(name, degree, tag):
    c = rng_for(tag).standard_normal(degree + 1)
    return {
        "id": name,
        "kind": "expansion",
        "dim": 1,
        "indices": [[k] for k in range(degree + 1)],
        "values": [float(v) for v in c],
    }


def expansion_2d(name, deg1, deg2, tag):
    g = rng_for(tag)
    idx = [[i, j] for i in range(deg1 + 1) for j in range(deg2 + 1)]
    vals = g.standard_normal(len(idx))
    return {
        "id": name,
        "kind": "expansion",
        "dim": 2,
        "indices": idx,
        "values": [float(v) for v in vals],
    }


def main():
    functions = []
    for dim in (1, 2):
        for s in (1.0, 1.5, 2.5):
            functions.append(
                {
                    "id": f"law{dim}d_s{s:g}",
                    "kind": "law",
                    "dim": dim,
                    "decay": s,
                    "box": 256 if dim == 1 else 31,
                }
            )
    for dim in (1, 2):
        for c in (0.25, 1.0):
            # univariate boxes are generous so deep truncation budgets stay
            # inside the stored coefficients; planar ones stay moderate
            if dim == 1:
                box = 128 if c == 0.25 else 160
            else:
                box = 64 if c == 0.25 else 96
            functions.append(
                {"id": f"gauss{dim}d_c{c:g}", "kind": "gaussian", "dim": dim, "c": c, "box": box}
            )
    degrees_1d = (4, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256)
    for i, deg in enumerate(degrees_1d):
        functions.append(expansion_1d(f"exp1d_deg{deg}", deg, 100 + i))
    boxes_2d = ((3, 3), (5, 5), (7, 7), (11, 11), (15, 15), (23, 23), (31, 31))
    for i, (d1, d2) in enumerate(boxes_2d):
        functions.append(expansion_2d(f"exp2d_{d1}x{d2}", d1, d2, 200 + i))

    spec = {
        "default_weight": {"lambda": 2.0, "a": 0.5, "b": 0.0, "r": 2, "p": 2.0, "q": 2.0},
        "functions": functions,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(spec, indent=1))
    print(f"wrote {OUT} with {len(functions)} members")


if __name__ == "__main__":
    main()
