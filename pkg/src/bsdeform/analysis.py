"""Surjectivity, Markov and aperiodicity verdicts for the deformations f_alpha."""

from __future__ import annotations

import time
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from mpmath import mp, mpf

from .config import Config
from .dynamics import (
    BoundaryMap,
    MatchingTable,
    base_map,
    deformed_map,
    horizon_bits,
    iterate,
    match_eps,
    matching_sets,
)
from .errors import (
    AlphaOutsideOverlap,
    AmbiguousAlpha,
    ConsistencyViolation,
    NoFixedPointInOverlap,
    NotMarkovCell,
)
from .geometry import CircleArc, MapKind, angle_gap, arcs_cover, circle_point, classify, fixed_points_on_circle
from .group import GroupWord, admissible_signature, build_domain, parse_word, sigma, word_to_map
from .netpartition import NetData, build_net


# --- alpha from a word ----------------------------------------------------------


def hyperbolic_alpha(net: NetData, word, select: Optional[str] = None):
    """(alpha, i): the fixed point of the word's map lying in the overlap O_i.

    If both fixed points lie in overlaps, ``select`` ('attracting' or 'repelling') must choose.
    """
    fd = net.domain
    word = parse_word(word)
    with mp.workprec(net.prec):
        M = word_to_map(fd, word)
        attracting, repelling = fixed_points_on_circle(M, fd.tol.trace)
        found = {}
        for name, p in (("attracting", attracting), ("repelling", repelling)):
            i = net.overlap_of(p)
            if i is not None:
                found[name] = (p, i)
    if not found:
        raise NoFixedPointInOverlap(f"neither fixed point of {word} lies in an overlap interval")
    if len(found) == 2:
        if select not in found:
            raise AmbiguousAlpha({k: (float(p), i) for k, (p, i) in found.items()})
        return found[select]
    if select is not None and select not in found:
        raise NoFixedPointInOverlap(f"the {select} fixed point of {word} lies in no overlap interval")
    return next(iter(found.values()))


# --- surjectivity ---------------------------------------------------------------


def surjectivity_predicate(net: NetData, i: int, alpha, M1: CircleArc) -> bool:
    """n_i > 2, or n_i = 2 and n_{i+2} > 2, or alpha in the closure of M_1."""
    if net.n(i) > 2:
        return True
    if net.n(i + 2) > 2:
        return True
    with mp.workprec(net.prec):
        return M1.closure_contains(circle_point(alpha), net.domain.tol.point)


def coverage_gaps(fmap: BoundaryMap, tol: Optional[float] = None) -> list:
    """Arcs of the circle missed by the union of the branch images."""
    tol = fmap.net.domain.tol.point if tol is None else tol
    with mp.workprec(fmap.prec):
        return arcs_cover(fmap.image_arcs(), tol)


def surjectivity_empirical(fmap: BoundaryMap, tol: Optional[float] = None) -> bool:
    return not coverage_gaps(fmap, tol)


def raw_first_match(net: NetData, i: int, x) -> bool:
    """Whether f^{n_i}(x) = f^{n_i - 1}(T_{i-1} x), the matching condition at the first giant step."""
    f = base_map(net)
    n = net.n(i)
    with mp.workprec(net.prec):
        x = circle_point(x)
        left = iterate(f, x, n)
        right = iterate(f, net.T(i - 1).act(x), n - 1)
        return angle_gap(left, right) < match_eps(net.prec)


# --- Markov -------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovResult:
    markov: bool
    W_alpha: tuple
    provenance: dict  # angle -> "W" | "alpha" | "T alpha"
    cycle_lengths: tuple
    steps: int
    limited_by: Optional[str] = None
    alpha_word: Optional[GroupWord] = None  # a word fixing alpha, read off the alpha-orbit

    @property
    def size(self) -> int:
        return len(self.W_alpha)

    @property
    def cells(self) -> tuple:
        W = self.W_alpha
        return tuple(CircleArc(W[k], W[(k + 1) % len(W)]) for k in range(len(W)))


class _PointSet:
    """Sorted angles with nearest-neighbour lookup."""

    def __init__(self):
        self.keys = []
        self.items = {}

    def add(self, x, tag):
        insort(self.keys, x)
        self.items[x] = tag

    def nearest(self, x):
        if not self.keys:
            return None
        k = bisect_left(self.keys, x)
        cands = [self.keys[k % len(self.keys)], self.keys[k - 1]]
        return min(cands, key=lambda y: angle_gap(x, y))

    def __len__(self):
        return len(self.keys)


def _closing_word_fixes(net: NetData, letters: Sequence[int], q) -> bool:
    """Whether q is a fixed point of the word (letters applied in order) as a matrix equation."""
    M = word_to_map(net.domain, tuple(reversed(letters)))
    if classify(M, net.domain.tol.trace) is not MapKind.HYPERBOLIC:
        return False
    eps = match_eps(net.prec)
    return any(angle_gap(p, q) < eps for p in fixed_points_on_circle(M, net.domain.tol.trace))


def markov_check(fmap: BoundaryMap, max_iter: int = 20000, max_size: int = 50000, cycle_tol: float = 1e-6) -> MarkovResult:
    """Grow W_alpha from the f_alpha-orbits of alpha and T_{i-1} alpha until both close up.

    A candidate closure (within ``cycle_tol``) is accepted only if it also holds to the
    matching tolerance and, for a return to the orbit's own past, the closing word has the
    earlier point as a hyperbolic fixed point.
    """
    if fmap.deformation is None:
        raise ValueError("markov_check needs a deformed map")
    net = fmap.net
    d = fmap.deformation
    eps = match_eps(net.prec)
    limit = horizon_bits(net.prec)
    with mp.workprec(net.prec):
        seen = _PointSet()
        for w in net.W:
            seen.add(w, "W")
        cycles = []
        steps = 0
        alpha_word = None
        for name, start in (("alpha", d.alpha), ("T alpha", net.T(d.index - 1).act(d.alpha))):
            # Follow each orbit until it returns to its own past, so the closing word is known.
            own = _PointSet()
            x, growth = start, 0.0
            letters = []
            while True:
                y = own.nearest(x)
                if y is not None and angle_gap(x, y) < cycle_tol and angle_gap(x, y) < eps:
                    k = own.items[y]
                    if _closing_word_fixes(net, letters[k:], y):
                        cycles.append(len(letters) - k)
                        if name == "alpha":
                            # conjugate the cycle word back to alpha
                            pre, loop = letters[:k], letters[k:]
                            alpha_word = tuple(sigma(g) for g in pre) + tuple(reversed(loop)) + tuple(reversed(pre))
                        break
                own.add(x, len(letters))
                z = seen.nearest(x)
                if angle_gap(x, z) >= eps:
                    seen.add(x, name)
                if steps >= max_iter or len(seen) >= max_size:
                    return _open_result(seen, cycles, steps, "max_iter" if steps >= max_iter else "max_size")
                x, g, der = fmap.step(x)
                growth += float(mp.log(der, 2))
                letters.append(g)
                steps += 1
                if growth > limit:
                    return _open_result(seen, cycles, steps, "precision")
        W_alpha = tuple(seen.keys)
        prov = {w: seen.items[w] for w in W_alpha}
    return MarkovResult(True, W_alpha, prov, tuple(cycles), steps, None, alpha_word)


def _open_result(seen, cycles, steps, why):
    W = tuple(seen.keys)
    return MarkovResult(False, W, {w: seen.items[w] for w in W}, tuple(cycles), steps, why)


# --- transition matrix and aperiodicity -----------------------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    W: tuple
    matrix: np.ndarray = field(compare=False)

    @property
    def size(self) -> int:
        return len(self.W)

    def row_block(self, j: int) -> list:
        return [int(k) for k in np.flatnonzero(self.matrix[j])]


def _index_of(points, x, tol):
    k = bisect_left(points, x)
    for c in (k % len(points), k - 1):
        if angle_gap(points[c], x) <= tol:
            return c
    return None


def transition_matrix(fmap: BoundaryMap, W_alpha: Sequence) -> TransitionMatrix:
    """Entry (j, k) is true iff the image of cell j covers cell k."""
    net = fmap.net
    tol = net.domain.tol.point
    with mp.workprec(net.prec):
        W = list(W_alpha)
        s = len(W)
        A = np.zeros((s, s), dtype=bool)
        for j in range(s):
            left, right = W[j], W[(j + 1) % s]
            g = fmap.letter(left)
            mid = CircleArc(left, right).point_at(mpf(1) / 2)
            if fmap.letter(mid) != g:
                raise NotMarkovCell(f"cell {j} straddles a branch cut")
            T = net.T(g)
            k0 = _index_of(W, T.act(left), tol)
            k1 = _index_of(W, T.act(right), tol)
            if k0 is None or k1 is None:
                raise NotMarkovCell(f"image of cell {j} has an endpoint outside W_alpha")
            span = (k1 - k0) % s or s
            for t in range(span):
                A[j, (k0 + t) % s] = True
    return TransitionMatrix(tuple(W), A)


@dataclass(frozen=True)
class AperiodicityResult:
    aperiodic: bool
    power: Optional[int] = None


def aperiodicity_check(T: Union[TransitionMatrix, np.ndarray]) -> AperiodicityResult:
    """Smallest N <= (s-1)^2 + 1 with A^N all true, or NotAperiodic."""
    A = T.matrix if isinstance(T, TransitionMatrix) else np.asarray(T, dtype=bool)
    s = A.shape[0]
    Ai = A.astype(np.int64)
    P = A.copy()
    seen = set()
    for N in range(1, (s - 1) ** 2 + 2):
        if P.all():
            return AperiodicityResult(True, N)
        key = P.tobytes()
        if key in seen:
            break  # the powers have started to cycle without reaching all-true
        seen.add(key)
        P = (P.astype(np.int64) @ Ai) > 0
    return AperiodicityResult(False)


# --- pipeline -------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    signature: tuple
    alpha: mpf
    word: Optional[GroupWord]
    overlap: int
    surjective_predicate: bool
    surjective_empirical: bool
    gaps: tuple
    markov: MarkovResult
    aperiodic: Optional[AperiodicityResult]
    matching: MatchingTable
    timings: dict

    def to_dict(self) -> dict:
        alpha = {"angle": mp.nstr(self.alpha, 17), "overlap": self.overlap}
        if self.word is not None:
            alpha["word"] = ",".join(map(str, self.word))
        markov = {"verdict": self.markov.markov}
        if self.markov.markov:
            markov["W_alpha_size"] = self.markov.size
            markov["cycle_lengths"] = list(self.markov.cycle_lengths)
        else:
            markov["limited_by"] = self.markov.limited_by
            markov["steps"] = self.markov.steps
        aperiodic = {"verdict": None if self.aperiodic is None else self.aperiodic.aperiodic}
        if self.aperiodic is not None and self.aperiodic.power is not None:
            aperiodic["power"] = self.aperiodic.power
        M1 = self.matching.M1
        return {
            "signature": list(self.signature),
            "alpha": alpha,
            "surjective": {"predicate": self.surjective_predicate, "empirical": self.surjective_empirical},
            "markov": markov,
            "aperiodic": aperiodic,
            "matching": {"M1": [mp.nstr(M1.left, 17), mp.nstr(M1.right, 17)], "residual": float(self.matching.residual)},
            "timings": {k: round(v, 4) for k, v in self.timings.items()},
        }


def resolve_net(sig, config: Config) -> NetData:
    return build_net(build_domain(admissible_signature(*tuple(sig)), config.precision, config.tol))


def analyze(
    sig,
    alpha_word=None,
    alpha_angle=None,
    config: Config = Config(),
    select: Optional[str] = None,
    net: Optional[NetData] = None,
) -> AnalysisReport:
    """Full pipeline for one (signature, alpha)."""
    if (alpha_word is None) == (alpha_angle is None):
        raise ValueError("give exactly one of alpha_word, alpha_angle")
    timings = {}
    t0 = time.perf_counter()
    net = resolve_net(sig, config) if net is None else net
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    word = None
    with mp.workprec(net.prec):
        if alpha_word is not None:
            word = parse_word(alpha_word)
            alpha, i = hyperbolic_alpha(net, word, select)
        else:
            alpha = circle_point(mpf(alpha_angle))
            i = net.overlap_of(alpha)
            if i is None:
                raise AlphaOutsideOverlap(f"alpha = {alpha_angle} lies in no overlap interval")
        fmap = deformed_map(net, alpha)
        alpha = fmap.deformation.alpha
        table = matching_sets(net, i, config.lmax, config.residual)
    timings["alpha"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    predicate = surjectivity_predicate(net, i, alpha, table.M1)
    gaps = tuple(coverage_gaps(fmap))
    empirical = not gaps
    if predicate != empirical:
        raise ConsistencyViolation(f"surjectivity predicate {predicate} but branch images give {empirical}")
    with mp.workprec(net.prec):
        if table.boundary_distance(alpha) > 10 * net.domain.tol.point and not fmap.deformation.D.empty:
            in_M1 = table.locate(alpha) == 1
            if raw_first_match(net, i, alpha) != in_M1:
                raise ConsistencyViolation("first-giant-step matching disagrees with membership in M_1")
    timings["surjectivity"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    markov = markov_check(fmap, config.max_iter, config.max_size, config.tol.cycle)
    aperiodic = None
    if markov.markov:
        aperiodic = aperiodicity_check(transition_matrix(fmap, markov.W_alpha))
        if aperiodic.aperiodic != empirical:
            raise ConsistencyViolation(f"Markov map with aperiodic={aperiodic.aperiodic} but surjective={empirical}")
    timings["markov"] = time.perf_counter() - t0

    return AnalysisReport(
        signature=tuple(net.domain.signature),
        alpha=alpha,
        word=word,
        overlap=i,
        surjective_predicate=predicate,
        surjective_empirical=empirical,
        gaps=gaps,
        markov=markov,
        aperiodic=aperiodic,
        matching=table,
        timings=timings,
    )


# --- alpha grids ----------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    alpha: mpf
    surjective_predicate: bool
    surjective_empirical: bool
    markov_within_cap: bool


def alpha_grid(net: NetData, i: int, N: int, table: Optional[MatchingTable] = None, exclusion: Optional[float] = None):
    """N evenly spaced alpha in O_i, dropping those near an endpoint of P or of M_1."""
    table = matching_sets(net, i) if table is None else table
    exclusion = 10 * net.domain.tol.point if exclusion is None else exclusion
    with mp.workprec(net.prec):
        O = net.O(i)
        fences = [O.left, O.right, table.M1.left, table.M1.right]
        out = []
        for k in range(N):
            a = O.point_at(mpf(k) / N)
            if k and min(angle_gap(a, c) for c in fences) < exclusion:
                continue
            out.append(a)
    return out


def scan_point(net: NetData, alpha, table: MatchingTable, config: Config) -> ScanRow:
    with mp.workprec(net.prec):
        fmap = deformed_map(net, alpha)
        predicate = surjectivity_predicate(net, table.index, fmap.deformation.alpha, table.M1)
        empirical = surjectivity_empirical(fmap)
        markov = markov_check(fmap, config.max_iter, config.max_size, config.tol.cycle)
    return ScanRow(fmap.deformation.alpha, predicate, empirical, markov.markov)
