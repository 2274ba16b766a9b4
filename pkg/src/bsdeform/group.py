"""Signature admissibility, the Bowen-Series quadrilateral and its side pairings."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Optional, Sequence

from mpmath import mp, mpc, mpf

from .config import DEFAULT_TOL, Tolerances
from .errors import InvalidOrder, PlacementFailure, SignatureRejected
from .geometry import (
    Geodesic,
    MoebiusMap,
    angle_at,
    direction_at,
    elliptic_about,
    angle_gap,
    geodesic_between,
    geodesic_intersection,
    geodesic_through,
    hyperbolic_midpoint,
    isometric_circle,
)

SIGMA = {1: 2, 2: 1, 3: 4, 4: 3}
RHO = {1: 3, 2: 2, 3: 1, 4: 4}  # rho(i) = sigma(i) + 1 (mod 4)


def cyc(i: int) -> int:
    """Representative of i mod 4 in 1..4."""
    return (i - 1) % 4 + 1


def sigma(i: int) -> int:
    return SIGMA[cyc(i)]


def rho(i: int) -> int:
    return RHO[cyc(i)]


class Verdict(str, enum.Enum):
    IN_E = "InE"
    EXTENSION_IMPOSSIBLE = "ExtensionImpossible"
    NOT_HYPERBOLIC = "NotHyperbolic"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class Signature:
    m1: int
    m2: int
    m3: int

    def __iter__(self):
        return iter((self.m1, self.m2, self.m3))

    @property
    def n(self) -> tuple:
        """Fan sizes (n1, n2, n3, n4)."""
        return (self.m3, self.m2 // 2, self.m3, self.m1 // 2)

    def __str__(self):
        return f"({self.m1},{self.m2},{self.m3})"


@dataclass(frozen=True)
class SignatureVerdict:
    verdict: Verdict
    canonical: Optional[Signature] = None

    @property
    def admissible(self) -> bool:
        return self.verdict is Verdict.IN_E

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict.value}
        if self.canonical is not None:
            out["canonical"] = list(self.canonical)
        return out


def classify_signature(m1: int, m2: int, m3: int) -> SignatureVerdict:
    ms = (m1, m2, m3)
    for m in ms:
        if not isinstance(m, int) or isinstance(m, bool):
            raise InvalidOrder(f"cone orders must be integers, got {m!r}")
        if m < 2:
            raise InvalidOrder(f"cone orders must be >= 2, got {m}")
    if sum(Fraction(1, m) for m in ms) >= 1:
        return SignatureVerdict(Verdict.NOT_HYPERBOLIC)
    odd = [m for m in ms if m % 2]
    if len(odd) >= 2:
        return SignatureVerdict(Verdict.EXTENSION_IMPOSSIBLE)
    if odd:
        rest = list(ms)
        rest.remove(odd[0])
        if 2 in rest:
            # an angle-pi vertex at v2 or v4
            return SignatureVerdict(Verdict.DEGENERATE)
        return SignatureVerdict(Verdict.IN_E, Signature(rest[0], rest[1], odd[0]))
    if 2 in ms:
        rest = list(ms)
        rest.remove(2)
        return SignatureVerdict(Verdict.IN_E, Signature(rest[0], rest[1], 2))
    return SignatureVerdict(Verdict.IN_E, Signature(*ms))


def admissible_signature(m1: int, m2: int, m3: int) -> Signature:
    """Canonical signature, or SignatureRejected."""
    v = classify_signature(m1, m2, m3)
    if not v.admissible:
        raise SignatureRejected(v.verdict.value, (m1, m2, m3))
    return v.canonical


# --- the quadrilateral ------------------------------------------------------


@dataclass(frozen=True)
class FundamentalDomain:
    """Quadrilateral v1..v4 (counter-clockwise) with side pairings T1..T4.

    Side r_i runs from v_i to v_{i+1}; T_i carries r_i onto r_{sigma(i)}.
    """

    signature: Signature
    prec: int
    vertices: tuple
    generators: tuple
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    @property
    def n(self) -> tuple:
        return self.signature.n

    def n_at(self, i: int) -> int:
        return self.n[cyc(i) - 1]

    def v(self, i: int):
        return self.vertices[cyc(i) - 1]

    def T(self, i: int) -> MoebiusMap:
        return self.generators[cyc(i) - 1]

    def side(self, i: int) -> Geodesic:
        """g(r_i), endpoints ordered (beyond v_i, beyond v_{i+1})."""
        with mp.workprec(self.prec):
            return geodesic_between(self.v(i), self.v(i + 1))

    def stabilizer(self, i: int) -> MoebiusMap:
        """Generator of the rotation subgroup fixing v_i."""
        i = cyc(i)
        with mp.workprec(self.prec):
            if i == 1:
                return self.T(2) @ self.T(4)
            if i == 3:
                return self.T(4) @ self.T(2)
            return self.T(i)

    def vertex_order(self, i: int) -> int:
        """Order of the stabilizer of v_i."""
        m1, m2, m3 = self.signature
        return {1: m3, 2: m2, 3: m3, 4: m1}[cyc(i)]

    def interior_angle(self, i: int):
        with mp.workprec(self.prec):
            return angle_at(self.v(i), self.v(i - 1), self.v(i + 1))


def _v1_for_height(d, a4, a2):
    """Apex v1 of the triangle with v4 = 0, v2 = i tanh(d/2) and given base angles."""
    v2 = mpc(0, mp.tanh(d / 2))
    from_v4 = geodesic_through(mpc(0), mp.pi / 2 - a4)
    from_v2 = geodesic_through(v2, -mp.pi / 2 + a2)
    v1 = geodesic_intersection(from_v4, from_v2)
    if v1 is None or v1.real <= 0:
        return v2, None
    return v2, v1


def _solve_triangle(sig: Signature, max_iter: int = 200):
    """Bisect the length of v2v4 so the apex angle equals pi/m3."""
    # one bisection step per bit at extended precision
    max_iter = max(max_iter, mp.prec + 16)
    a4, a2, a1 = mp.pi / sig.m1, mp.pi / sig.m2, mp.pi / sig.m3

    def excess(d):
        v2, v1 = _v1_for_height(d, a4, a2)
        if v1 is None:
            return -1
        return angle_at(v1, mpc(0), v2) - a1

    lo, hi = mpf("1e-3"), mpf(1)
    while excess(hi) > 0:
        hi *= 2
        if hi > 200:
            raise PlacementFailure(f"no admissible triangle for {sig}")
    if excess(lo) <= 0:
        raise PlacementFailure(f"apex angle too small at the lower bracket for {sig}")
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < mpf(2) ** (-mp.prec + 8):
            break
    v2, v1 = _v1_for_height(lo, a4, a2)
    if v1 is None:
        raise PlacementFailure(f"bisection did not converge for {sig}")
    return mpc(0), v2, v1


def _pick_rotation(centre, order, src: Geodesic, dst: Geodesic):
    best = None
    for sign in (1, -1):
        T = elliptic_about(centre, sign * 2 * mp.pi / order)
        img = (T.act(src.start), T.act(src.end))
        gap = max(angle_gap(img[0], dst.start), angle_gap(img[1], dst.end))
        if best is None or gap < best[0]:
            best = (gap, T)
    return best


@lru_cache(maxsize=64)
def _build_cached(sig: Signature, prec: int, tol: Tolerances) -> FundamentalDomain:
    with mp.workprec(prec + 32):
        v4, v2, v1 = _solve_triangle(sig)
        v3 = -mp.conj(v1)
        # Centre the disk where the two diagonals cross.
        foot = hyperbolic_midpoint(v1, v3)
        recentre = MoebiusMap.translation_to(foot).inverse()
        v1, v2, v3, v4 = (recentre(z) for z in (v1, v2, v3, v4))
        v1, v3 = mpc(v1.real, 0), mpc(v3.real, 0)
        v2, v4 = mpc(0, v2.imag), mpc(0, v4.imag)
        verts = (v1, v2, v3, v4)

        gap2, T2 = _pick_rotation(v2, sig.m2, geodesic_between(v2, v3), geodesic_between(v2, v1))
        gap4, T4 = _pick_rotation(v4, sig.m1, geodesic_between(v4, v1), geodesic_between(v4, v3))
        if max(gap2, gap4) > tol.geo:
            raise PlacementFailure(f"no rotation sign pairs the sides for {sig}")
        gens = (T2.inverse(), T2, T4.inverse(), T4)

    with mp.workprec(prec):
        fd = FundamentalDomain(
            signature=sig,
            prec=prec,
            vertices=tuple(+z for z in verts),
            generators=tuple(MoebiusMap(+g.a, +g.b) for g in gens),
            tol=tol,
        )
        for i in range(1, 5):
            gap = isometric_circle(fd.T(i)).endpoint_distance(fd.side(i))
            if gap > tol.geo:
                raise PlacementFailure(f"side r_{i} misses the isometric circle of T_{i} by {mp.nstr(gap, 5)}")
    return fd


def build_domain(sig, prec: int = 256, tol: Tolerances = DEFAULT_TOL) -> FundamentalDomain:
    """Construct the quadrilateral for an admissible signature.

    Two mirror copies of the (pi/m1, pi/m2, pi/m3) triangle glued along the
    vertical diagonal v2 v4; the origin sits where the diagonals cross.
    """
    if not isinstance(sig, Signature):
        sig = admissible_signature(*sig)
    else:
        check = classify_signature(*sig)
        if not check.admissible or check.canonical != sig:
            raise SignatureRejected(check.verdict.value, tuple(sig))
    return _build_cached(sig, int(prec), tol)


# --- relations --------------------------------------------------------------


@dataclass(frozen=True)
class RelationReport:
    residuals: dict
    vertex_residuals: dict
    isometric_gaps: dict
    tol: float

    @property
    def max_residual(self):
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return all(r < self.tol for r in self.residuals.values()) and all(
            r < self.tol for r in self.vertex_residuals.values()
        )

    def failures(self) -> list:
        bad = [k for k, r in self.residuals.items() if r >= self.tol]
        bad += [k for k, r in self.vertex_residuals.items() if r >= self.tol]
        return bad


def verify_relations(fd: FundamentalDomain, tol: float = 1e-9) -> RelationReport:
    res, vres, iso = {}, {}, {}
    m1, m2, m3 = fd.signature
    with mp.workprec(fd.prec):
        for i in range(1, 5):
            res[f"T{sigma(i)}T{i}"] = float((fd.T(sigma(i)) @ fd.T(i)).identity_residual())
            res[f"T{rho(i)}T{cyc(i - 1)}"] = float((fd.T(rho(i)) @ fd.T(i - 1)).identity_residual())
            vres[f"T{cyc(i - 1)}(v{i})=v{rho(i)}"] = float(abs(fd.T(i - 1)(fd.v(i)) - fd.v(rho(i))))
            vres[f"T{i}(v{i})=v{rho(i)}"] = float(abs(fd.T(i)(fd.v(i)) - fd.v(rho(i))))
            iso[i] = float(isometric_circle(fd.T(i)).endpoint_distance(fd.side(i)))
        res["(T2T4)^m3"] = float(((fd.T(2) @ fd.T(4)) ** m3).identity_residual())
        res["T2^m2"] = float((fd.T(2) ** m2).identity_residual())
        res["T4^m1"] = float((fd.T(4) ** m1).identity_residual())
    return RelationReport(res, vres, iso, tol)


# --- words ------------------------------------------------------------------

GroupWord = tuple


def parse_word(text) -> GroupWord:
    """Parse "4,4,2" (or a sequence of ints) into a word; leftmost letter is outermost."""
    if isinstance(text, str):
        parts = [p for p in text.replace(" ", "").split(",") if p]
        letters = tuple(int(p) for p in parts)
    else:
        letters = tuple(int(p) for p in text)
    for c in letters:
        if c not in (1, 2, 3, 4):
            raise ValueError(f"generator index {c} not in 1..4")
    return letters


def word_to_map(fd: FundamentalDomain, word: Sequence[int]) -> MoebiusMap:
    word = parse_word(word)
    with mp.workprec(fd.prec):
        return reduce(lambda acc, c: acc @ fd.T(c), word, MoebiusMap.identity())


# --- serialisation ----------------------------------------------------------


def domain_to_dict(fd: FundamentalDomain) -> dict:
    return {
        "signature": list(fd.signature),
        "n": list(fd.n),
        "precision": fd.prec,
        "vertices": [[float(z.real), float(z.imag)] for z in fd.vertices],
        "generators": [g.to_floats() for g in fd.generators],
    }


def domain_from_dict(data: dict, prec: Optional[int] = None) -> FundamentalDomain:
    sig = Signature(*data["signature"])
    prec = int(prec or data.get("precision", 53))
    with mp.workprec(prec):
        verts = tuple(mpc(re, im) for re, im in data["vertices"])
        gens = tuple(MoebiusMap.normalized(mpc(ar, ai), mpc(br, bi)) for ar, ai, br, bi in data["generators"])
    return FundamentalDomain(signature=sig, prec=prec, vertices=verts, generators=gens)


def vertex_directions(fd: FundamentalDomain, i: int):
    """Tangent directions at v_i towards v_{i-1} and v_{i+1}."""
    with mp.workprec(fd.prec):
        return direction_at(fd.v(i), fd.v(i - 1)), direction_at(fd.v(i), fd.v(i + 1))
