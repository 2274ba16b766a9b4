"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible even under output capture)
before asserting, so ``pytest tests/test_acceptance.py`` doubles as a report.
"""

import random

import pytest
from mpmath import mp, mpf

from bsdeform.analysis import (
    alpha_grid,
    aperiodicity_check,
    hyperbolic_alpha,
    markov_check,
    surjectivity_empirical,
    surjectivity_predicate,
    transition_matrix,
)
from bsdeform.dynamics import (
    base_map,
    collision_audit,
    deformed_map,
    iterate,
    matching_sets,
    theta,
    trace_matching,
)
from bsdeform.errors import SignatureRejected
from bsdeform.geometry import angle_gap, tau
from bsdeform.group import Verdict, build_domain, classify_signature, rho, verify_relations

from .conftest import WORD_443, WORD_663, REGRESSION, net_for

# Markov cases met in criteria 7 and 8, as (label, surjective, aperiodic); read by criterion 10.
MARKOV_CASES = []


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_signature_gate(report):
    table = {
        (6, 6, 3): Verdict.IN_E,
        (4, 4, 3): Verdict.IN_E,
        (4, 6, 2): Verdict.IN_E,
        (4, 6, 5): Verdict.IN_E,
        (3, 5, 6): Verdict.EXTENSION_IMPOSSIBLE,
        (3, 3, 4): Verdict.EXTENSION_IMPOSSIBLE,
        (7, 7, 7): Verdict.EXTENSION_IMPOSSIBLE,
        (4, 4, 2): Verdict.NOT_HYPERBOLIC,
    }
    wrong = {sig: classify_signature(*sig).verdict.value for sig, v in table.items() if classify_signature(*sig).verdict is not v}
    report(1, not wrong, f"{len(table) - len(wrong)}/{len(table)} verdicts match" + (f", wrong: {wrong}" if wrong else ""))


def test_criterion_02_domain_construction(report):
    worst_rel, worst_iso, failures = 0.0, 0.0, []
    for sig in REGRESSION:
        try:
            rep = verify_relations(build_domain(sig))
        except SignatureRejected as exc:
            failures.append(f"{sig}: {exc}")
            continue
        worst_rel = max(worst_rel, rep.max_residual)
        worst_iso = max(worst_iso, max(rep.isometric_gaps.values()))
        if not rep.passed:
            failures.append(f"{sig}: {rep.failures()}")
    ok = not failures and worst_rel < 1e-9 and worst_iso < 1e-8
    report(2, ok, f"max relation residual {worst_rel:.1e}, max isometric-circle gap {worst_iso:.1e}" + (f", {failures}" if failures else ""))


def test_criterion_03_net_facts(report):
    n663 = net_for((6, 6, 3))
    shape = tuple(n663.n(i) for i in range(1, 5)) == (3, 3, 3, 3) and len(n663.W) == 16
    key, endpoint_law = 0.0, 0.0
    for sig in REGRESSION:
        net = net_for(sig)
        with mp.workprec(net.prec):
            key = max(key, net.gluing_residual)
            for i in range(1, 5):
                for k in range(1, 2 * net.n(i) + 1):
                    endpoint_law = max(
                        endpoint_law,
                        angle_gap(net.T(i - 1).act(net.a(i, k)), net.a(rho(i), k - 1)),
                        angle_gap(net.T(i).act(net.a(i, k)), net.a(rho(i), k + 1)),
                    )
    ok = shape and key < 1e-9 and endpoint_law < 1e-9
    report(3, ok, f"(6,6,3) n=(3,3,3,3), |W|={len(n663.W)}; gluing identities {float(key):.1e}; endpoint law {float(endpoint_law):.1e}")


def test_criterion_04_base_map(report):
    worst, powers, bad = 0.0, {}, []
    for sig in REGRESSION:
        net = net_for(sig)
        f = base_map(net)
        with mp.workprec(net.prec):
            for w in net.W:
                img = f(w)
                worst = max(worst, min(angle_gap(img, v) for v in net.W))
        res = aperiodicity_check(transition_matrix(f, net.W))
        powers[sig] = res.power
        if not res.aperiodic:
            bad.append(sig)
    ok = worst < 1e-9 and not bad
    report(4, ok, f"f(W) in W to {float(worst):.1e}; aperiodic powers {powers}" + (f"; not aperiodic: {bad}" if bad else ""))


def test_criterion_05_orbit_identity(report):
    rng = random.Random(5)
    worst = mpf(0)
    for sig in REGRESSION:
        net = net_for(sig)
        f = base_map(net)
        with mp.workprec(net.prec):
            for i in range(1, 5):
                steps = net.n(i) - 1
                T_theta, T_prev = net.T(theta(net, i)), net.T(i - 1)
                for _ in range(100):
                    x = net.O(i).point_at(mpf(rng.random()))
                    lhs = T_theta.act(iterate(f, x, steps))
                    rhs = iterate(f, T_prev.act(x), steps)
                    worst = max(worst, angle_gap(lhs, rhs))
    report(5, worst < 1e-6, f"max |lhs - rhs| = {float(worst):.1e} over 2000 points")


def test_criterion_06_matching_sets(report):
    rng = random.Random(6)
    worst_residual, longest, disagreements, anomalies, checked = 0.0, 0, 0, 0, 0
    for sig in REGRESSION:
        net = net_for(sig)
        with mp.workprec(net.prec):
            for i in range(1, 5):
                table = matching_sets(net, i, lmax=200, residual_target=1e-6)
                worst_residual = max(worst_residual, float(table.residual))
                longest = max(longest, len(table.entries))
                for _ in range(500):
                    x = net.O(i).point_at(mpf(rng.random()))
                    if table.boundary_distance(x) < 10 * net.domain.tol.point:
                        continue
                    tr = trace_matching(net, x)
                    checked += 1
                    disagreements += tr.ell != table.locate(x)
                    anomalies += bool(tr.anomalies)
    ok = worst_residual < 1e-6 and longest <= 200 and disagreements == 0
    report(
        6,
        ok,
        f"max residual {worst_residual:.1e} with at most {longest} sets; {disagreements} disagreements, "
        f"{anomalies} index anomalies in {checked} points",
    )


def _condition(net, i, alpha, M1):
    if net.n(i) > 2:
        return "i"
    if net.n(i + 2) > 2:
        return "ii"
    return "iii-in" if M1.closure_contains(alpha, net.domain.tol.point) else "iii-out"


def test_criterion_07_surjectivity_grid(report):
    disagreements, points, conditions = 0, 0, set()
    for sig in [(6, 6, 3), (4, 4, 3), (4, 6, 2)]:
        net = net_for(sig)
        for i in range(1, 5):
            table = matching_sets(net, i)
            for a in alpha_grid(net, i, 200, table):
                with mp.workprec(net.prec):
                    fmap = deformed_map(net, a)
                    alpha = fmap.deformation.alpha
                    predicate = surjectivity_predicate(net, i, alpha, table.M1)
                    empirical = surjectivity_empirical(fmap)
                    conditions.add(_condition(net, i, alpha, table.M1))
                    markov = markov_check(fmap)
                points += 1
                disagreements += predicate != empirical
                if markov.markov:
                    ap = aperiodicity_check(transition_matrix(fmap, markov.W_alpha)).aperiodic
                    MARKOV_CASES.append((f"{sig} O_{i} grid", empirical, ap))
    covered = {"i", "ii", "iii-in", "iii-out"} <= conditions
    report(
        7,
        disagreements == 0 and covered,
        f"{disagreements} disagreements over {points} grid points; branches exercised {sorted(conditions)}",
    )


def test_criterion_08_markov_verdicts(report):
    problems = []
    n663 = net_for((6, 6, 3))
    alpha, i = hyperbolic_alpha(n663, WORD_663)
    fa = deformed_map(n663, alpha)
    table = matching_sets(n663, i)
    m = markov_check(fa)
    surj = surjectivity_empirical(fa)
    ap = aperiodicity_check(transition_matrix(fa, m.W_alpha)).aperiodic if m.markov else None
    if not (i == 4 and table.locate(alpha) == 1 and m.markov and surj and ap):
        problems.append(f"(6,6,3) word: O_{i}, M_{table.locate(alpha)}, markov={m.markov}, surjective={surj}, aperiodic={ap}")
    if m.markov:
        MARKOV_CASES.append(("(6,6,3) worked word", surj, ap))

    n443 = net_for((4, 4, 3))
    alpha, i = hyperbolic_alpha(n443, WORD_443)
    fa = deformed_map(n443, alpha)
    m2 = markov_check(fa)
    surj2 = surjectivity_empirical(fa)
    ap2 = aperiodicity_check(transition_matrix(fa, m2.W_alpha)).aperiodic if m2.markov else None
    if not (m2.markov and not surj2 and ap2 is False):
        problems.append(f"(4,4,3) word: markov={m2.markov}, surjective={surj2}, aperiodic={ap2}")
    if m2.markov:
        MARKOV_CASES.append(("(4,4,3) worked word", surj2, ap2))

    rng = random.Random(8)
    capped = 0
    for _ in range(10):
        sig = rng.choice(REGRESSION)
        net = net_for(sig)
        k = rng.randint(1, 4)
        with mp.workprec(net.prec):
            a = net.O(k).point_at(mpf(rng.uniform(0.05, 0.95)))
            fa = deformed_map(net, a)
            res = markov_check(fa)
        capped += not res.markov
        if res.markov:
            ap = aperiodicity_check(transition_matrix(fa, res.W_alpha)).aperiodic
            MARKOV_CASES.append((f"{sig} generic", surjectivity_empirical(fa), ap))
    if capped != 10:
        problems.append(f"only {capped}/10 generic alphas hit the cap")
    detail = (
        f"(6,6,3) |W_alpha|={m.size} surjective aperiodic; (4,4,3) |W_alpha|={m2.size} not surjective, not aperiodic; "
        f"{capped}/10 generic NotMarkovWithinCap"
    )
    report(8, not problems, detail if not problems else "; ".join(problems))


def _audit(sig, seed):
    net = net_for(sig)
    rng = random.Random(seed)
    forms, anomalous, starts = {}, 0, 0
    with mp.workprec(net.prec):
        for i in range(1, 5):
            fa = deformed_map(net, net.O(i).point_at(mpf("0.6180339887498949")))
            for _ in range(25):
                starts += 1
                for e in collision_audit(fa, mpf(rng.random()) * tau(), 60):
                    forms[e.form] = forms.get(e.form, 0) + 1
                    anomalous += e.anomalous
    return forms, anomalous, starts


def test_criterion_09_collision_audit(report):
    even, even_bad, n_even = _audit((4, 6, 2), 9)
    odd, odd_bad, n_odd = _audit((4, 4, 3), 10)
    ok = (
        even
        and set(even) == {1}
        and odd
        and set(odd) <= {1, 2, 3}
        and even_bad == 0
        and odd_bad == 0
        and n_even == n_odd == 100
    )
    report(9, bool(ok), f"(4,6,2) forms {even}; (4,4,3) forms {odd}; anomalies {even_bad + odd_bad}")


def test_criterion_10_final_equivalence(report):
    if not MARKOV_CASES:
        pytest.skip("criteria 7 and 8 must run first in the same session")
    bad = [c for c in MARKOV_CASES if c[1] != c[2]]
    report(10, not bad, f"{len(MARKOV_CASES) - len(bad)}/{len(MARKOV_CASES)} Markov cases have aperiodic == surjective" + (f"; exceptions {bad}" if bad else ""))
