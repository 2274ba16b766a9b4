#!/usr/bin/env python3
"""Sweep alpha over every overlap interval and compare the surjectivity predicate with the branch images.

Prints one line per (signature, overlap) with the number of grid points, how many were
surjective, which surjectivity condition applied, and the disagreement count. Exits non-zero
if any disagreement is found.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from mpmath import mp

from bsdeform.analysis import alpha_grid, resolve_net, surjectivity_empirical, surjectivity_predicate
from bsdeform.config import Config
from bsdeform.dynamics import deformed_map, matching_sets

DEFAULT_SIGS = ["6,6,3", "4,4,3", "4,6,2", "8,4,3", "4,6,5"]


def condition(net, i):
    if net.n(i) > 2:
        return "n_i > 2"
    if net.n(i + 2) > 2:
        return "n_i = 2, n_(i+2) > 2"
    return "alpha in closure(M_1)"


def sweep(task):
    sig, i, grid, precision = task
    net = resolve_net(sig, Config(precision=precision))
    table = matching_sets(net, i)
    surjective = disagree = 0
    alphas = alpha_grid(net, i, grid, table)
    with mp.workprec(net.prec):
        for a in alphas:
            fmap = deformed_map(net, a)
            pred = surjectivity_predicate(net, i, fmap.deformation.alpha, table.M1)
            emp = surjectivity_empirical(fmap)
            surjective += emp
            disagree += pred != emp
    return sig, i, len(alphas), surjective, condition(net, i), disagree


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("signatures", nargs="*", default=DEFAULT_SIGS, help="comma-separated orders, e.g. 4,4,3")
    ap.add_argument("--grid", type=int, default=200)
    ap.add_argument("--precision", type=int, default=256)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    tasks = [(tuple(int(m) for m in s.split(",")), i, args.grid, args.precision) for s in args.signatures for i in range(1, 5)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(sweep, tasks))
    else:
        results = [sweep(t) for t in tasks]

    total = 0
    print(f"{'signature':>10} {'O_i':>3} {'points':>6} {'surj':>5}  condition                disagreements")
    for sig, i, n, surj, cond, bad in results:
        total += bad
        print(f"{str(sig):>10} {i:>3} {n:>6} {surj:>5}  {cond:<24} {bad}")
    sys.exit(1 if total else 0)


if __name__ == "__main__":
    main()
