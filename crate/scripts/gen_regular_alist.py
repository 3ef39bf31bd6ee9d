#!/usr/bin/env python3
"""Generate a seeded (3,6)-regular binary LDPC code without 4-cycles.

Produces the N=504, M=252 matrix shipped in crates/core/data/. Columns are
filled one at a time; each picks the least-loaded rows that do not close a
4-cycle. The result is rejected unless it has full GF(2) rank.
"""
import random
import sys

import numpy as np


def build(n, m, wc, wr, rng):
    row_deg = [0] * m
    row_cols = [set() for _ in range(m)]
    col_rows = []
    for c in range(n):
        chosen = []
        for _ in range(wc):
            blocked = set(chosen)
            for r in chosen:
                for c2 in row_cols[r]:
                    blocked.update(col_rows[c2])
            cand = [r for r in range(m) if row_deg[r] < wr and r not in blocked]
            if not cand:
                return None
            low = min(row_deg[r] for r in cand)
            pick = rng.choice([r for r in cand if row_deg[r] == low])
            chosen.append(pick)
        for r in chosen:
            row_deg[r] += 1
            row_cols[r].add(c)
        col_rows.append(sorted(chosen))
    if any(d != wr for d in row_deg):
        return None
    return col_rows, [sorted(s) for s in row_cols]


def gf2_rank(rows, n):
    mat = np.zeros((len(rows), n), dtype=np.uint8)
    for r, cols in enumerate(rows):
        mat[r, cols] = 1
    rank = 0
    for c in range(n):
        piv = np.nonzero(mat[rank:, c])[0]
        if piv.size == 0:
            continue
        p = rank + piv[0]
        mat[[rank, p]] = mat[[p, rank]]
        others = np.nonzero(mat[:, c])[0]
        for r in others:
            if r != rank:
                mat[r] ^= mat[rank]
        rank += 1
        if rank == len(rows):
            break
    return rank


def main():
    n, m, wc, wr = 504, 252, 3, 6
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 20100504
    rng = random.Random(seed)
    while True:
        res = build(n, m, wc, wr, rng)
        if res is None:
            continue
        cols, rows = res
        if gf2_rank(rows, n) == m:
            break
    out = [f"{n} {m}", f"{wc} {wr}", " ".join([str(wc)] * n), " ".join([str(wr)] * m)]
    out += [" ".join(str(r + 1) for r in c) for c in cols]
    out += [" ".join(str(c + 1) for c in r) for r in rows]
    sys.stdout.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
