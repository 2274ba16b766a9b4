"""The boundary map f, its deformations f_alpha, orbits with word tracking, and matching sets."""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

from mpmath import mp, mpf

from .errors import AlphaOutsideOverlap, ConsistencyViolation, PrecisionExhausted, Unresolved
from .geometry import CircleArc, MoebiusMap, angle_gap, circle_point, ccw_dist
from .group import GroupWord, cyc, rho, sigma, word_to_map
from .netpartition import Locator, NetData, scaled_eps

__all__ = [
    "BoundaryMap",
    "Deformation",
    "OrbitRecord",
    "MatchingTable",
    "MatchEntry",
    "MatchTrace",
    "CollisionEvent",
    "base_map",
    "f_eval",
    "deformed_map",
    "orbit",
    "theta",
    "rho",
    "sigma",
    "index_sequence",
    "giant_step_map",
    "right_giant_step_map",
    "matching_sets",
    "matching_index",
    "trace_matching",
    "collision_audit",
    "plot_rows",
    "write_plot_csv",
]


def match_eps(prec: int):
    return scaled_eps(prec, 1e-8)


def horizon_bits(prec: int) -> float:
    """Largest log2 expansion an orbit may accumulate before its branch choices stop being trustworthy."""
    return prec / 2 - 16


# --- maps -------------------------------------------------------------------


@dataclass(frozen=True)
class Deformation:
    index: int
    alpha: mpf
    D: CircleArc


@dataclass(frozen=True)
class BoundaryMap:
    net: NetData
    branches: tuple  # ((CircleArc, generator), ...) in counter-clockwise order
    deformation: Optional[Deformation] = None
    locator: Locator = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        with mp.workprec(self.net.prec):
            loc = Locator([arc.left for arc, _ in self.branches], self.net.eps, labels=range(len(self.branches)))
        object.__setattr__(self, "locator", loc)

    @property
    def prec(self) -> int:
        return self.net.prec

    def branch_index(self, x) -> int:
        return self.locator(x)

    def letter(self, x) -> int:
        return self.branches[self.locator(x)][1]

    def generator(self, x) -> MoebiusMap:
        return self.net.T(self.letter(x))

    def step(self, x):
        """(image, letter, |derivative|) for one application of the map."""
        g = self.letter(x)
        T = self.net.T(g)
        return T.act(x), g, T.derivative(x)

    def __call__(self, x):
        with mp.workprec(self.prec):
            return self.step(circle_point(x))[0]

    def in_differing(self, x) -> bool:
        d = self.deformation
        return d is not None and not d.D.empty and self.letter(x) != base_map(self.net).letter(x)

    def image_arcs(self):
        """Image of every branch arc; the maps preserve orientation so endpoints suffice."""
        with mp.workprec(self.prec):
            out = []
            for arc, g in self.branches:
                T = self.net.T(g)
                out.append(CircleArc(T.act(arc.left), T.act(arc.right)))
            return out


def base_map(net: NetData) -> BoundaryMap:
    """The map f: T_{i-1} on [a_i^1, a_i^{n_i})."""
    if "base" not in net.cache:
        branches = tuple((net.branch_arc(i), cyc(i - 1)) for i in range(1, 5))
        net.cache["base"] = BoundaryMap(net, branches)
    return net.cache["base"]


def f_eval(net: NetData, x):
    """(f(x), generator index)."""
    fmap = base_map(net)
    with mp.workprec(net.prec):
        x = circle_point(x)
        g = fmap.letter(x)
        return net.T(g).act(x), g


def deformed_map(net: NetData, alpha) -> BoundaryMap:
    """f_alpha: T_{i-1} on D = [a_i^{n_i}, alpha) for alpha in O_i, f elsewhere."""
    with mp.workprec(net.prec):
        alpha = circle_point(alpha)
        i = net.overlap_of(alpha)
        if i is None:
            raise AlphaOutsideOverlap(f"alpha = {mp.nstr(alpha, 17)} lies in no overlap interval")
        start = net.a(i, net.n(i))
        if angle_gap(alpha, start) <= net.eps:
            alpha = start
        D = CircleArc(start, alpha, empty=alpha == start)
        branches = []
        for arc, g in base_map(net).branches:
            if D.empty or arc.left != start:
                branches.append((arc, g))
                continue
            # D splits the branch arc of i+1, where f acts by T_i.
            branches.append((CircleArc(start, alpha), cyc(i - 1)))
            branches.append((CircleArc(alpha, arc.right), g))
        return BoundaryMap(net, tuple(branches), Deformation(i, alpha, D))


# --- orbits -----------------------------------------------------------------


@dataclass(frozen=True)
class OrbitRecord:
    points: tuple
    letters: tuple
    log2_expansion: tuple  # cumulative log2 |(f^p)'| at the start point

    def word(self, p: Optional[int] = None) -> GroupWord:
        """gamma_p as a word, leftmost letter outermost."""
        p = len(self.letters) if p is None else p
        return tuple(reversed(self.letters[:p]))

    @property
    def words(self) -> tuple:
        return tuple(self.word(p) for p in range(len(self.points)))


def orbit(fmap: BoundaryMap, x, steps: int, strict: bool = True) -> OrbitRecord:
    """Iterate ``fmap`` from x.

    With ``strict`` the accumulated expansion is capped at the precision horizon and
    PrecisionExhausted is raised beyond it; otherwise a numerical pseudo-orbit is returned.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    limit = horizon_bits(fmap.prec)
    with mp.workprec(fmap.prec):
        x = circle_point(x)
        points, letters, growth = [x], [], [0.0]
        total = 0.0
        for p in range(steps):
            x, g, d = fmap.step(x)
            total += float(mp.log(d, 2))
            if strict and total > limit:
                raise PrecisionExhausted(
                    f"orbit expansion 2^{total:.0f} after {p + 1} steps exceeds the {fmap.prec}-bit horizon"
                )
            points.append(x)
            letters.append(g)
            growth.append(total)
    return OrbitRecord(tuple(points), tuple(letters), tuple(growth))


def iterate(fmap: BoundaryMap, x, steps: int, strict: bool = True):
    """Endpoint of ``orbit`` without keeping the record."""
    return orbit(fmap, x, steps, strict).points[-1]


# --- index bookkeeping --------------------------------------------------------


def _theta_closed_form(net: NetData, i: int) -> int:
    if i % 2 == 0:
        return i
    return i if net.n(i) % 2 else rho(i)


def theta(net: NetData, i: int) -> int:
    """theta(i) = rho^{n_i - 1}(i), cross-checked against its case split."""
    i = cyc(i)
    t = i
    for _ in range(net.n(i) - 1):
        t = rho(t)
    if t != _theta_closed_form(net, i):
        raise ConsistencyViolation(f"theta({i}) = {t} disagrees with the parity rule")
    return t


def index_sequence(net: NetData, i0: int, K: int) -> list:
    """i_0 .. i_K with i_k = theta(i_{k-1}) + 1."""
    seq = [cyc(i0)]
    for _ in range(max(K, 4)):
        seq.append(cyc(theta(net, seq[-1]) + 1))
    period = 2 if net.domain.signature.m3 % 2 == 0 else 4
    if len(set(seq[:period])) != period or any(seq[k] != seq[k + period] for k in range(len(seq) - period)):
        raise ConsistencyViolation(f"index sequence {seq[:8]} is not purely periodic with period {period}")
    if any((a - b) % 2 == 0 for a, b in zip(seq, seq[1:])):
        raise ConsistencyViolation(f"index sequence {seq[:8]} does not alternate parity")
    return seq[: K + 1]


def giant_step_map(net: NetData, i: int) -> MoebiusMap:
    """T_{rho^{n_i-2}(i)} ... T_{rho(i)} T_i, which realises f^{n_i-1} on O_i."""
    i = cyc(i)
    key = ("giant", i)
    if key not in net.cache:
        with mp.workprec(net.prec):
            word, j = [], i
            for _ in range(net.n(i) - 1):
                word.append(j)
                j = rho(j)
            G = word_to_map(net.domain, tuple(reversed(word)))
            t = theta(net, i)
            target = net.L(t, 1)
            if max(angle_gap(G.act(net.a(i, net.n(i))), target.left), angle_gap(G.act(net.a(i, net.n(i) + 1)), target.right)) > net.domain.tol.point:
                raise ConsistencyViolation(f"giant step at {i} does not map O_{i} onto L_1(v_{t})")
        net.cache[key] = G
    return net.cache[key]


def right_giant_step_map(net: NetData, i: int) -> MoebiusMap:
    """T_{rho^{n_i-1}(i)-1} ... T_{rho(i)-1}, the f^{n_i-1} branch following T_{i-1} on O_i."""
    i = cyc(i)
    with mp.workprec(net.prec):
        word, j = [], rho(i)
        for _ in range(net.n(i) - 1):
            word.append(cyc(j - 1))
            j = rho(j)
        return word_to_map(net.domain, tuple(reversed(word)))


# --- matching ---------------------------------------------------------------


@dataclass(frozen=True)
class MatchEntry:
    ell: int
    arc: CircleArc
    r: int


@dataclass(frozen=True)
class MatchingTable:
    index: int
    entries: tuple
    residual: mpf

    @property
    def M1(self) -> CircleArc:
        return self.entries[0].arc

    def cuts(self):
        return [e.arc.left for e in self.entries] + [self.entries[-1].arc.right]

    def locate(self, x):
        """ell with x in M_ell, or None if x lies in the unclassified tail or outside O_i."""
        first = self.entries[0].arc.left
        offset = ccw_dist(first, x)
        ends = [ccw_dist(first, e.arc.right) for e in self.entries]
        k = bisect_right(ends, offset)
        return self.entries[k].ell if k < len(self.entries) else None

    def boundary_distance(self, x):
        return min(angle_gap(x, c) for c in self.cuts())


def _r_values(net: NetData, seq):
    r = [0]
    for ik in seq:
        r.append(r[-1] + net.n(ik) - 1)
    return r


def matching_sets(net: NetData, i: int, lmax: int = 200, residual_target: float = 1e-6) -> MatchingTable:
    """M_1, M_2, ... as consecutive arcs from the left of O_i, by pulling back through giant steps.

    The complement of M_1 .. M_l in O_i is the rightmost arc [u_l, a_i^{n_i+1}) where
    u_l = H_l^{-1}(a_{i_l}^{n_{i_l}}) and H_l is the composite of the first l giant steps.
    """
    if lmax < 1:
        raise ValueError("lmax must be at least 1")
    i = cyc(i)
    with mp.workprec(net.prec):
        O = net.O(i)
        seq = index_sequence(net, i, lmax)
        r = _r_values(net, seq)
        pull = MoebiusMap.identity()
        entries = []
        u = O.left
        residual = O.length
        for ell in range(1, lmax + 1):
            pull = pull @ giant_step_map(net, seq[ell - 1]).inverse()
            nxt = seq[ell]
            v = pull.act(net.a(nxt, net.n(nxt)))
            entries.append(MatchEntry(ell, CircleArc(u, v), r[ell]))
            u = v
            residual = ccw_dist(u, O.right)
            if residual < residual_target:
                break
    return MatchingTable(i, tuple(entries), residual)


@dataclass(frozen=True)
class MatchTrace:
    index: int
    ell: int
    r: int
    anomalies: tuple = ()


def trace_matching(net: NetData, x, cap: int = 200) -> MatchTrace:
    """Direct simulation of the x_k, y_k giant steps until f(x_l) = y_l.

    Independent of ``matching_sets``. Anomalies record steps where x_k left O_{i_k} or
    y_k left R_{n_{i_k}}(v_{rho(i_k)}), either of which would contradict the index bookkeeping.
    """
    fmap = base_map(net)
    eps = match_eps(net.prec)
    limit = horizon_bits(net.prec)
    with mp.workprec(net.prec):
        x = circle_point(x)
        i = net.overlap_of(x)
        if i is None:
            raise AlphaOutsideOverlap(f"{mp.nstr(x, 17)} lies in no overlap interval")
        xk, yk = x, net.T(i - 1).act(x)
        growth = [0.0, float(mp.log(net.T(i - 1).derivative(x), 2))]
        idx, r = i, 0
        anomalies = []
        for ell in range(1, cap + 1):
            n = net.n(idx)
            if not net.O(idx).contains(xk, net.eps):
                anomalies.append(("x", ell - 1))
            if not net.R(rho(idx), n).contains(yk, net.eps):
                anomalies.append(("y", ell - 1))
            for _ in range(n - 1):
                for slot, pt in enumerate((xk, yk)):
                    img, _, d = fmap.step(pt)
                    growth[slot] += float(mp.log(d, 2))
                    if slot == 0:
                        xk = img
                    else:
                        yk = img
            if max(growth) > limit:
                raise PrecisionExhausted(f"matching trace for {mp.nstr(x, 17)} left the precision horizon at l = {ell}")
            r += n - 1
            if angle_gap(fmap.step(xk)[0], yk) < eps:
                return MatchTrace(i, ell, r, tuple(anomalies))
            idx = cyc(theta(net, idx) + 1)
    raise Unresolved(f"no matching within {cap} giant steps")


def matching_index(net: NetData, x, cap: int = 200) -> int:
    return trace_matching(net, x, cap).ell


# --- collision audit -----------------------------------------------------------


@dataclass(frozen=True)
class CollisionEvent:
    j: int  # step at which the f_alpha-orbit entered D
    ell: int
    r: int
    form: Optional[int]  # 1, 2, 3, or None when no form matches
    anomalies: tuple = ()  # index-bookkeeping anomalies from the matching trace

    @property
    def anomalous(self) -> bool:
        return self.form is None or bool(self.anomalies)


def collision_audit(fmap: BoundaryMap, x, steps: int, cap: int = 200) -> list:
    """Check every entry z of the f_alpha-orbit of x into D against the three collision forms.

    With l the matching index of z and r = r_l, the forms compare f^{r+1}(z) with
    f_alpha^{r+1}(z), f(f_alpha^r(z)) and f^2(f_alpha^{r-1}(z)). The orbit of x itself is a
    numerical pseudo-orbit; each entry point is then checked from its computed value.
    """
    if fmap.deformation is None:
        raise ValueError("collision audit needs a deformed map")
    net = fmap.net
    f = base_map(net)
    eps = match_eps(net.prec)
    events = []
    with mp.workprec(net.prec):
        path = orbit(fmap, x, steps, strict=False).points
        for j, z in enumerate(path[:-1]):
            if not fmap.in_differing(z):
                continue
            tr = trace_matching(net, z, cap)
            r = tr.r
            target = iterate(f, z, r + 1)
            fa = orbit(fmap, z, r + 1).points
            candidates = (fa[r + 1], f(fa[r]), f(f(fa[r - 1])) if r >= 1 else None)
            form = None
            for k, c in enumerate(candidates, start=1):
                if c is not None and angle_gap(c, target) < eps:
                    form = k
                    break
            events.append(CollisionEvent(j, tr.ell, r, form, tr.anomalies))
    return events


# --- plotting ---------------------------------------------------------------


def plot_rows(fmap: BoundaryMap, samples: int) -> list:
    """Rows (x, f(x), branch, generator): uniform samples, every point of W, and both one-sided values at every cut."""
    rows = []
    with mp.workprec(fmap.prec):
        for k in range(samples):
            x = tau_fraction(k, samples)
            b = fmap.branch_index(x)
            g = fmap.branches[b][1]
            rows.append((x, fmap.net.T(g).act(x), b, g))
        cuts = set()
        for b, (arc, g) in enumerate(fmap.branches):
            T = fmap.net.T(g)
            rows.append((arc.left, T.act(arc.left), b, g))
            rows.append((arc.right, T.act(arc.right), b, g))
            cuts.add(arc.left)
        for w in fmap.net.W:
            if w not in cuts:
                b = fmap.branch_index(w)
                g = fmap.branches[b][1]
                rows.append((w, fmap.net.T(g).act(w), b, g))
    # At a cut, the left limit (previous branch) precedes the value.
    rows.sort(key=lambda row: (row[0], row[2] == fmap.branch_index(row[0])))
    return rows


def tau_fraction(k: int, samples: int):
    return circle_point(2 * mp.pi * k / samples)


def write_plot_csv(fmap: BoundaryMap, samples: int, target) -> int:
    """Write plot rows to a path or an open text file; returns the row count."""
    rows = plot_rows(fmap, samples)

    def emit(fh):
        w = csv.writer(fh)
        w.writerow(["x_angle", "f_angle", "branch_index", "generator"])
        for x, y, b, g in rows:
            w.writerow([mp.nstr(x, 17), mp.nstr(y, 17), b, g])

    if hasattr(target, "write"):
        emit(target)
    else:
        with open(target, "w", newline="") as fh:
            emit(fh)
    return len(rows)
