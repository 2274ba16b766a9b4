"""Vertex fans, the endpoint set W, the partition P and the L/R/A/O interval families."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache

from mpmath import mp, mpf

from .errors import FanCountMismatch, GluingFailure, IndexOutOfRange
from .geometry import CircleArc, Geodesic, MoebiusMap, angle_gap, ccw_dist, circle_point, tau
from .group import FundamentalDomain, cyc


def scaled_eps(prec: int, base: float):
    """Tolerance for decisions at ``prec`` bits: ``base`` at machine precision, 2^(-prec/2) beyond."""
    if prec <= 64:
        return mpf(base)
    return min(mpf(base), mpf(2) ** (-(prec // 2)))


@dataclass(frozen=True)
class VertexFan:
    index: int
    stabilizer: MoebiusMap
    geodesics: tuple
    endpoints: tuple  # a_i^1 .. a_i^{2n_i}, counter-clockwise

    @property
    def n(self) -> int:
        return len(self.endpoints) // 2

    def a(self, k: int):
        """a_i^k with k read modulo 2n_i (so a^0 = a^{2n})."""
        return self.endpoints[(k - 1) % len(self.endpoints)]


class Locator:
    """Find which of the left-closed arcs between sorted cut points contains an angle."""

    def __init__(self, cuts, eps, labels=None):
        pairs = sorted(zip(cuts, labels if labels is not None else range(len(cuts))))
        self.cuts = [c for c, _ in pairs]
        self.labels = [lab for _, lab in pairs]
        self.eps = eps

    def position(self, x) -> int:
        # Points within eps below a cut snap onto that cut (left-closed convention).
        xs = x + self.eps
        if xs >= tau():
            xs -= tau()
        j = bisect_right(self.cuts, xs) - 1
        return j if j >= 0 else len(self.cuts) - 1

    def __call__(self, x):
        return self.labels[self.position(x)]

    def distance_to_cut(self, x):
        j = self.position(x)
        left = self.cuts[j]
        right = self.cuts[(j + 1) % len(self.cuts)]
        return min(angle_gap(x, left), angle_gap(x, right))


@dataclass(frozen=True)
class NetData:
    domain: FundamentalDomain
    fans: tuple
    W: tuple
    cells: tuple
    gluing_residual: mpf = mpf(0)  # worst gluing-identity gap before endpoints were merged
    cell_locator: Locator = field(compare=False, repr=False, default=None)
    branch_locator: Locator = field(compare=False, repr=False, default=None)
    cache: dict = field(compare=False, repr=False, default_factory=dict)  # derived maps, filled lazily

    def __post_init__(self):
        eps = self.eps
        object.__setattr__(self, "cell_locator", Locator(self.W, eps))
        starts = [self.a(i, 1) for i in range(1, 5)]
        object.__setattr__(self, "branch_locator", Locator(starts, eps, labels=[1, 2, 3, 4]))

    @property
    def prec(self) -> int:
        return self.domain.prec

    @property
    def eps(self):
        return scaled_eps(self.prec, self.domain.tol.point)

    def fan(self, i: int) -> VertexFan:
        return self.fans[cyc(i) - 1]

    def n(self, i: int) -> int:
        return self.fan(i).n

    def a(self, i: int, k: int):
        return self.fan(i).a(k)

    def T(self, i: int) -> MoebiusMap:
        return self.domain.T(i)

    def L(self, i: int, j: int) -> CircleArc:
        n = self.n(i)
        if not 1 <= j <= n:
            raise IndexOutOfRange(f"L_{j}(v_{i}) needs 1 <= j <= {n}")
        return CircleArc(self.a(i, 2 * n - j), self.a(i, 2 * n - j + 1))

    def R(self, i: int, j: int) -> CircleArc:
        n = self.n(i)
        if not 1 <= j <= n:
            raise IndexOutOfRange(f"R_{j}(v_{i}) needs 1 <= j <= {n}")
        return CircleArc(self.a(i, j - 1), self.a(i, j))

    def O(self, i: int) -> CircleArc:
        n = self.n(i)
        return CircleArc(self.a(i, n), self.a(i, n + 1))

    def A(self, i: int) -> CircleArc:
        n = self.n(i)
        return CircleArc(self.a(i, 2 * n - 1), self.a(i + 1, self.n(i + 1)))

    def branch_arc(self, i: int) -> CircleArc:
        """[a_i^1, a_i^{n_i}), where f acts by T_{i-1}."""
        return CircleArc(self.a(i, 1), self.a(i, self.n(i)))

    def cell_index(self, x) -> int:
        return self.cell_locator(x)

    def branch_of(self, x) -> int:
        with mp.workprec(self.prec):
            return self.branch_locator(circle_point(x))

    def overlap_of(self, x):
        """Index i with x in O_i, or None."""
        with mp.workprec(self.prec):
            for i in range(1, 5):
                if self.O(i).contains(x, self.eps):
                    return i
        return None

    def w_index(self, x, tol=None):
        """Index of the W point within ``tol`` of x, or None."""
        tol = self.eps if tol is None else tol
        j = self.cell_locator(x)
        for k in (j, (j + 1) % len(self.W)):
            if angle_gap(self.W[k], x) <= tol:
                return k
        return None


def _dedupe(points, tol):
    out = []
    for p in sorted(points):
        if out and angle_gap(out[-1], p) <= tol:
            continue
        out.append(p)
    if len(out) > 1 and angle_gap(out[0], out[-1]) <= tol:
        out.pop()
    return out


def _fan(fd: FundamentalDomain, i: int, tol) -> VertexFan:
    stab = fd.stabilizer(i)
    left_side, right_side = fd.side(i - 1), fd.side(i)
    geos = []
    for g in (left_side, right_side):
        power = MoebiusMap.identity()
        for _ in range(fd.vertex_order(i)):
            img = Geodesic(power.act(g.start), power.act(g.end))
            if all(img.endpoint_distance(h) > tol for h in geos):
                geos.append(img)
            power = stab @ power
    n = fd.n_at(i)
    if len(geos) != n:
        raise FanCountMismatch(f"vertex v_{i}: {len(geos)} net geodesics, expected {n}")
    a1 = left_side.start  # end of g(l_i) beyond v_{i-1}
    ends = [t for g in geos for t in (g.start, g.end)]
    ends.sort(key=lambda t: ccw_dist(a1 - tol, t))
    return VertexFan(index=i, stabilizer=stab, geodesics=tuple(geos), endpoints=tuple(ends))


def build_net(fd: FundamentalDomain) -> NetData:
    return _build_net_cached(fd)


@lru_cache(maxsize=64)
def _build_net_cached(fd: FundamentalDomain) -> NetData:
    tol = mpf(fd.tol.point)
    with mp.workprec(fd.prec):
        fans = [_fan(fd, i, tol) for i in range(1, 5)]
        W = _dedupe([t for fan in fans for t in fan.endpoints], tol)
        expected = sum(2 * f.n for f in fans) - 8
        if len(W) != expected:
            raise GluingFailure(f"|W| = {len(W)}, expected {expected}")

        # Gluing identities on the raw fans, before endpoints are merged.
        gluing = mpf(0)
        for i in range(1, 5):
            f, g = fans[i - 1], fans[i % 4]
            gap = max(angle_gap(f.a(f.n), g.a(1)), angle_gap(f.a(2 * f.n), g.a(g.n + 1)))
            if gap > tol:
                raise GluingFailure(f"gluing identities fail between v_{i} and v_{cyc(i + 1)}")
            gluing = max(gluing, gap)

        # Replace every fan endpoint by its shared W representative.
        def canon(t):
            return min(W, key=lambda w: angle_gap(w, t))

        fans = [
            VertexFan(f.index, f.stabilizer, f.geodesics, tuple(canon(t) for t in f.endpoints)) for f in fans
        ]
        cells = tuple(CircleArc(W[k], W[(k + 1) % len(W)]) for k in range(len(W)))
        net = NetData(domain=fd, fans=tuple(fans), W=tuple(W), cells=cells, gluing_residual=gluing)
        for i in range(1, 5):
            # O_{i+1} must be the rightmost piece of L_1(v_i) for A_i to be one arc.
            if not net.L(i, 1).contains(net.a(i + 1, net.n(i + 1)), tol):
                raise GluingFailure(f"O_{cyc(i + 1)} is not a rightmost subarc of L_1(v_{i})")
    return net


def interval_L(net: NetData, i: int, j: int) -> CircleArc:
    return net.L(i, j)


def interval_R(net: NetData, i: int, j: int) -> CircleArc:
    return net.R(i, j)


def overlap(net: NetData, i: int) -> CircleArc:
    return net.O(i)


def a_region(net: NetData, i: int) -> CircleArc:
    return net.A(i)


def branch_of(net: NetData, x) -> int:
    return net.branch_of(x)


def net_to_dict(net: NetData) -> dict:
    return {
        "endpoints": {str(f.index): [float(t) for t in f.endpoints] for f in net.fans},
        "W": [float(t) for t in net.W],
        "cells": [[float(c.left), float(c.right)] for c in net.cells],
    }
