"""Hyperbolic geometry in the open unit disk.

Circle points are plain angles (mpmath ``mpf`` normalised to [0, 2pi)); disk
points are ``mpc`` values.  Every function computes at the *current* mpmath
working precision, so callers that care wrap work in ``mp.workprec(bits)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .config import DEFAULT_TOL
from .errors import CoincidentPoints, FixesOrigin, NotHyperbolic

CirclePoint = mpf
DiskPoint = mpc


def tau():
    return 2 * mp.pi


def circle_point(theta) -> CirclePoint:
    """Normalise an angle into [0, 2pi)."""
    t = mpf(theta)
    two_pi = tau()
    t = t - two_pi * mp.floor(t / two_pi)
    if t >= two_pi:  # floor rounding at the top edge
        t -= two_pi
    return t


def ccw_dist(start, end):
    """Counter-clockwise angular distance from ``start`` to ``end`` in [0, 2pi)."""
    return circle_point(end - start)


def angle_gap(s, t):
    """Unsigned distance between two circle points, in [0, pi]."""
    d = ccw_dist(s, t)
    return min(d, tau() - d)


def points_close(s, t, tol: float = DEFAULT_TOL.point) -> bool:
    return angle_gap(s, t) <= tol


def on_circle(theta) -> mpc:
    return mp.expj(theta)


def disk_point(re, im=0) -> DiskPoint:
    z = mpc(re, im)
    if abs(z) >= 1:
        raise ValueError(f"{z} is not inside the unit disk")
    return z


# --- arcs -------------------------------------------------------------------


@dataclass(frozen=True)
class CircleArc:
    """Left-closed, right-open arc traversed counter-clockwise from ``left``.

    ``left == right`` denotes the full circle unless ``empty`` is set.
    """

    left: mpf
    right: mpf
    empty: bool = False

    @property
    def length(self):
        if self.empty:
            return mpf(0)
        d = ccw_dist(self.left, self.right)
        return d if d > 0 else tau()

    def contains(self, theta, tol: float = DEFAULT_TOL.point) -> bool:
        # Shift by tol: grace at the left endpoint, none at the right.
        if self.empty:
            return False
        return ccw_dist(self.left - tol, theta) < self.length

    def closure_contains(self, theta, tol: float = DEFAULT_TOL.point) -> bool:
        if self.empty:
            return points_close(self.left, theta, tol)
        return ccw_dist(self.left - tol, theta) <= self.length + 2 * tol

    def contains_arc(self, other: "CircleArc", tol: float = DEFAULT_TOL.point) -> bool:
        if other.empty:
            return True
        start = ccw_dist(self.left, other.left)
        if start > self.length + tol and angle_gap(self.left, other.left) > tol:
            return False
        if angle_gap(self.left, other.left) <= tol:
            start = mpf(0)
        return start + other.length <= self.length + tol

    def same_as(self, other: "CircleArc", tol: float = DEFAULT_TOL.point) -> bool:
        if self.empty or other.empty:
            return self.empty == other.empty
        return points_close(self.left, other.left, tol) and points_close(self.right, other.right, tol)

    def point_at(self, fraction):
        """Point at the given fraction of the arc length from ``left``."""
        return circle_point(self.left + fraction * self.length)

    def __iter__(self):
        yield self.left
        yield self.right


def arc_contains(arc: CircleArc, p, tol: float = DEFAULT_TOL.point) -> bool:
    return arc.contains(p, tol)


def arcs_cover(arcs, tol: float = DEFAULT_TOL.point):
    """Return the uncovered gaps (as arcs longer than ``tol``) of a union of arcs."""
    two_pi = tau()
    spans = []
    for arc in arcs:
        if arc.empty:
            continue
        s = circle_point(arc.left)
        spans.append((s, s + arc.length))
        spans.append((s - two_pi, s - two_pi + arc.length))
    spans.sort()
    gaps = []
    reach = mpf(0)
    for s, e in spans:
        if e <= reach:
            continue
        if s > reach + tol and reach < two_pi:
            gaps.append(CircleArc(circle_point(reach), circle_point(min(s, two_pi))))
        reach = max(reach, e)
        if reach >= two_pi:
            break
    if reach < two_pi - tol:
        gaps.append(CircleArc(circle_point(reach), mpf(0)))
    return gaps


# --- Moebius maps -----------------------------------------------------------


class MapKind(str, enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class MoebiusMap:
    """Disk isometry z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1."""

    a: mpc
    b: mpc

    @classmethod
    def normalized(cls, a, b) -> "MoebiusMap":
        a, b = mpc(a), mpc(b)
        det = abs(a) ** 2 - abs(b) ** 2
        if det <= 0:
            raise ValueError("not a disk isometry (|a|^2 - |b|^2 <= 0)")
        s = mp.sqrt(det)
        return cls(a / s, b / s)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(mpc(1), mpc(0))

    @classmethod
    def rotation(cls, angle) -> "MoebiusMap":
        return cls(mp.expj(mpf(angle) / 2), mpc(0))

    @classmethod
    def translation_to(cls, c) -> "MoebiusMap":
        """The standard isometry z -> (z + c) / (1 + conj(c) z) sending 0 to c."""
        c = mpc(c)
        s = mp.sqrt(1 - abs(c) ** 2)
        return cls(1 / s, c / s)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        a = self.a * other.a + self.b * mp.conj(other.b)
        b = self.a * other.b + self.b * mp.conj(other.a)
        return MoebiusMap.normalized(a, b)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(mp.conj(self.a), -self.b)

    def __pow__(self, k: int) -> "MoebiusMap":
        base = self if k >= 0 else self.inverse()
        out = MoebiusMap.identity()
        for _ in range(abs(k)):
            out = base @ out
        return out

    def __call__(self, z):
        return (self.a * z + self.b) / (mp.conj(self.b) * z + mp.conj(self.a))

    def act(self, theta):
        """Boundary action on an angle; computed in angle space so |image| = 1 exactly."""
        w = self.a * mp.expj(theta) + self.b
        return circle_point(2 * mp.arg(w) - theta)

    def derivative(self, theta):
        """|M'| at the boundary point ``theta``."""
        return 1 / abs(self.a * mp.expj(theta) + self.b) ** 2

    @property
    def trace(self):
        return 2 * self.a.real

    @property
    def det_defect(self):
        return abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1)

    def identity_residual(self):
        """Distance to +-I in the projective group (max entry deviation)."""
        return min(abs(self.a - 1), abs(self.a + 1)) + abs(self.b)

    def is_identity(self, tol: float = DEFAULT_TOL.mat) -> bool:
        return self.identity_residual() < tol

    def to_floats(self):
        return [float(self.a.real), float(self.a.imag), float(self.b.real), float(self.b.imag)]


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    return m1 @ m2


def apply_boundary(m: MoebiusMap, p):
    return m.act(p)


def elliptic_about(c, angle) -> MoebiusMap:
    """Rotation through ``angle`` about the disk point ``c``."""
    move = MoebiusMap.translation_to(c)
    return move @ MoebiusMap.rotation(angle) @ move.inverse()


def classify(m: MoebiusMap, tol: float = DEFAULT_TOL.trace) -> MapKind:
    t = abs(m.trace)
    if abs(t - 2) <= tol:
        if abs(m.b) <= tol:
            return MapKind.IDENTITY
        return MapKind.PARABOLIC
    return MapKind.ELLIPTIC if t < 2 else MapKind.HYPERBOLIC


def fixed_points_on_circle(m: MoebiusMap, tol: float = DEFAULT_TOL.trace):
    """Return (attracting, repelling) boundary fixed points of a hyperbolic map."""
    if classify(m, tol) is not MapKind.HYPERBOLIC:
        raise NotHyperbolic(f"trace {mp.nstr(m.trace, 12)} is not hyperbolic")
    re, im = m.a.real, m.a.imag
    root = mp.sqrt(re * re - 1)
    cb = mp.conj(m.b)
    z1 = (mpc(0, im) + root) / cb
    z2 = (mpc(0, im) - root) / cb
    t1, t2 = circle_point(mp.arg(z1)), circle_point(mp.arg(z2))
    if m.derivative(t1) < 1:
        return t1, t2
    return t2, t1


# --- geodesics --------------------------------------------------------------


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic given by its two ideal endpoints (angles)."""

    start: mpf
    end: mpf

    def __post_init__(self):
        if angle_gap(self.start, self.end) == 0:
            raise CoincidentPoints("geodesic endpoints coincide")

    @property
    def is_diameter(self) -> bool:
        return abs(angle_gap(self.start, self.end) - mp.pi) < mpf(2) ** (-mp.prec // 2)

    @property
    def center(self):
        half = ccw_dist(self.start, self.end) / 2
        return mp.expj(self.start + half) / mp.cos(half)

    @property
    def radius(self):
        return abs(mp.tan(ccw_dist(self.start, self.end) / 2))

    def endpoint_distance(self, other: "Geodesic"):
        """Max endpoint-angle gap between two geodesics, ignoring orientation."""
        same = max(angle_gap(self.start, other.start), angle_gap(self.end, other.end))
        swapped = max(angle_gap(self.start, other.end), angle_gap(self.end, other.start))
        return min(same, swapped)

    def key(self, tol: float = DEFAULT_TOL.point):
        """Hashable orientation-free key, quantised at ``tol``."""
        q = sorted(int(mp.nint(circle_point(t) / tol)) % int(mp.nint(tau() / tol)) for t in (self.start, self.end))
        return tuple(q)


def _to_origin(p):
    return MoebiusMap.translation_to(p).inverse()


def geodesic_between(p, q) -> Geodesic:
    """Geodesic through p and q; endpoints ordered (beyond p, beyond q)."""
    p, q = mpc(p), mpc(q)
    if abs(p - q) == 0:
        raise CoincidentPoints("p == q")
    move = MoebiusMap.translation_to(p)
    w = move.inverse()(q)
    u = mp.arg(w)
    return Geodesic(move.act(u + mp.pi), move.act(u))


def geodesic_through(p, direction) -> Geodesic:
    """Geodesic through p whose tangent at p points along angle ``direction``.

    Endpoints ordered (behind, ahead).  Translations from 0 have real positive
    derivative, so Euclidean directions at p are preserved.
    """
    move = MoebiusMap.translation_to(p)
    return Geodesic(move.act(direction + mp.pi), move.act(direction))


def isometric_circle(m: MoebiusMap, tol: float = DEFAULT_TOL.mat) -> Geodesic:
    if abs(m.b) <= tol:
        raise FixesOrigin("map fixes the origin; isometric circle undefined")
    center = -mp.conj(m.a) / mp.conj(m.b)
    # The circle |z - center| = 1/|b| is orthogonal to the unit circle, so its
    # endpoints sit at arg(center) -/+ acos(1/|center|).
    phi = mp.arg(center)
    half = mp.acos(1 / abs(center))
    return Geodesic(circle_point(phi - half), circle_point(phi + half))


def isometric_circle_center_radius(m: MoebiusMap):
    if abs(m.b) == 0:
        raise FixesOrigin("map fixes the origin; isometric circle undefined")
    return -mp.conj(m.a) / mp.conj(m.b), 1 / abs(m.b)


def hyperbolic_distance(p, q):
    w = _to_origin(p)(q)
    return 2 * mp.atanh(abs(w))


def hyperbolic_midpoint(p, q):
    move = MoebiusMap.translation_to(p)
    w = move.inverse()(q)
    r = abs(w)
    return move(mp.tanh(mp.atanh(r) / 2) * w / r)


def direction_at(z, w):
    """Angle of the tangent at z of the geodesic ray from z towards w."""
    return mp.arg(_to_origin(z)(w))


def angle_at(vertex, p, q):
    """Interior angle at ``vertex`` between geodesic rays towards p and q, in [0, pi]."""
    d = ccw_dist(direction_at(vertex, p), direction_at(vertex, q))
    return min(d, tau() - d)


def geodesic_intersection(g1: Geodesic, g2: Geodesic):
    """Intersection point inside the disk of two geodesics, or None."""
    # Send a point of g1 to the origin and rotate g1 onto the real axis.
    if g1.is_diameter:
        base = mpc(0)
    else:
        c = g1.center
        base = c / abs(c) * (abs(c) - g1.radius)
    move = MoebiusMap.translation_to(base)
    back = move.inverse()
    s = back.act(g1.start)
    rot = MoebiusMap.rotation(-s)
    frame = rot @ back
    e1, e2 = frame.act(g2.start), frame.act(g2.end)
    if abs(angle_gap(e1, e2) - mp.pi) < mpf(2) ** (-mp.prec // 2):
        # g2 is a diameter in this frame; it meets the real axis at 0 unless it is the axis
        x = mpf(0) if angle_gap(e1, 0) > 0 and angle_gap(e1, mp.pi) > 0 else None
    else:
        half = ccw_dist(e1, e2) / 2
        cen = mp.expj(e1 + half) / mp.cos(half)
        rad = abs(mp.tan(half))
        disc = rad**2 - cen.imag**2
        if disc < 0:
            return None
        x = None
        for cand in (cen.real - mp.sqrt(disc), cen.real + mp.sqrt(disc)):
            if abs(cand) < 1:
                x = cand
                break
    if x is None:
        return None
    return frame.inverse()(mpc(x))
