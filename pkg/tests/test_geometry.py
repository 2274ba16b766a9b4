import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpc, mpf

from bsdeform.errors import CoincidentPoints, FixesOrigin, NotHyperbolic
from bsdeform.geometry import (
    CircleArc,
    MapKind,
    MoebiusMap,
    angle_gap,
    apply_boundary,
    arc_contains,
    arcs_cover,
    circle_point,
    classify,
    compose,
    elliptic_about,
    fixed_points_on_circle,
    geodesic_between,
    geodesic_intersection,
    hyperbolic_distance,
    isometric_circle,
    isometric_circle_center_radius,
)

angles = st.floats(min_value=0, max_value=2 * math.pi, exclude_max=True, allow_nan=False)
stretch = st.floats(min_value=0.0, max_value=2.5, allow_nan=False)
disk_coord = st.floats(min_value=-0.6, max_value=0.6, allow_nan=False)


@st.composite
def maps(draw):
    t, phi, psi = draw(stretch), draw(angles), draw(angles)
    return MoebiusMap.normalized(mp.cosh(t) * mp.expj(phi), mp.sinh(t) * mp.expj(psi))


@st.composite
def maps_moving_origin(draw):
    t, phi, psi = draw(st.floats(min_value=0.05, max_value=2.5)), draw(angles), draw(angles)
    return MoebiusMap.normalized(mp.cosh(t) * mp.expj(phi), mp.sinh(t) * mp.expj(psi))


def test_compose_with_identity_is_noop():
    m = MoebiusMap.normalized(mpc(1.2, 0.3), mpc(0.5, -0.4))
    out = compose(m, MoebiusMap.identity())
    assert abs(out.a - m.a) < 1e-12 and abs(out.b - m.b) < 1e-12


def test_rotations_about_origin_add():
    r = compose(elliptic_about(0, 0.7), elliptic_about(0, 1.1))
    assert (r @ elliptic_about(0, 1.8).inverse()).is_identity()


def test_composition_is_renormalised():
    m = MoebiusMap.normalized(mpc(3, 1), mpc(2, 1.5))
    for _ in range(40):
        m = m @ m.inverse() @ m
    assert m.det_defect < 1e-12


def test_apply_boundary_identity_and_rotation():
    assert angle_gap(apply_boundary(MoebiusMap.identity(), 1.3), 1.3) < 1e-15
    assert angle_gap(apply_boundary(elliptic_about(0, 0.5), 6.0), circle_point(6.5)) < 1e-15


def test_elliptic_about_centre_is_pure_rotation():
    m = elliptic_about(0, 0.9)
    assert abs(m.b) == 0


def test_elliptic_full_turn_is_identity_up_to_sign():
    assert elliptic_about(mpc(0.3, -0.2), 2 * mp.pi).is_identity()


def test_elliptic_fixes_its_centre():
    c = mpc(0.2, 0.45)
    assert abs(elliptic_about(c, 1.0)(c) - c) < 1e-14


def test_classify_kinds():
    assert classify(MoebiusMap.identity()) is MapKind.IDENTITY
    assert classify(elliptic_about(mpc(0.1, 0.1), 0.4)) is MapKind.ELLIPTIC
    assert classify(MoebiusMap.normalized(2, mp.sqrt(3))) is MapKind.HYPERBOLIC
    parabolic = MoebiusMap.normalized(mpc(1, 0.5), mpc(0, 0.5))
    assert classify(parabolic) is MapKind.PARABOLIC


def test_fixed_points_reject_elliptic():
    with pytest.raises(NotHyperbolic):
        fixed_points_on_circle(elliptic_about(mpc(0.2, 0), 1.0))


def test_fixed_points_are_fixed_and_swap_under_inverse():
    m = MoebiusMap.normalized(mpc(1.5, 0.4), mpc(0.9, -0.7))
    att, rep = fixed_points_on_circle(m)
    assert angle_gap(m.act(att), att) < 1e-12 and angle_gap(m.act(rep), rep) < 1e-12
    assert m.derivative(att) < 1 < m.derivative(rep)
    att_i, rep_i = fixed_points_on_circle(m.inverse())
    assert angle_gap(att_i, rep) < 1e-12 and angle_gap(rep_i, att) < 1e-12


def test_isometric_circle_of_rotation_fails():
    with pytest.raises(FixesOrigin):
        isometric_circle(elliptic_about(0, 1.0))


def test_isometric_circle_is_where_map_is_euclidean_isometry():
    m = MoebiusMap.normalized(mpc(1.3, 0.2), mpc(0.6, 0.5))
    g = isometric_circle(m)
    for t in (g.start, g.end):
        assert abs(m.derivative(t) - 1) < 1e-12


def test_geodesic_between_orders_endpoints():
    p, q = mpc(0, -0.3), mpc(0, 0.5)
    g = geodesic_between(p, q)
    assert angle_gap(g.start, 3 * mp.pi / 2) < 1e-12 and angle_gap(g.end, mp.pi / 2) < 1e-12
    assert g.is_diameter
    h = geodesic_between(q, p)
    assert angle_gap(h.start, g.end) < 1e-12 and angle_gap(h.end, g.start) < 1e-12


def test_geodesic_between_coincident_points():
    with pytest.raises(CoincidentPoints):
        geodesic_between(mpc(0.1, 0.1), mpc(0.1, 0.1))


def test_geodesic_intersection_on_a_crossing():
    p = mpc(0.1, 0.2)
    g1 = geodesic_between(p, mpc(-0.4, 0.3))
    g2 = geodesic_between(p, mpc(0.3, -0.5))
    assert hyperbolic_distance(geodesic_intersection(g1, g2), p) < 1e-10


def test_arc_membership_is_left_closed_right_open():
    arc = CircleArc(mpf(1), mpf(2))
    assert arc_contains(arc, 1)
    assert not arc_contains(arc, 2)
    wrap = CircleArc(mpf(6), mpf(0.5))
    assert arc_contains(wrap, 0.1) and arc_contains(wrap, 6.2) and not arc_contains(wrap, 1)


def test_arcs_cover_reports_gap():
    gaps = arcs_cover([CircleArc(mpf(0), mpf(2)), CircleArc(mpf(2.5), mpf(0))])
    assert len(gaps) == 1
    assert abs(gaps[0].left - 2) < 1e-12 and abs(gaps[0].right - 2.5) < 1e-12
    assert arcs_cover([CircleArc(mpf(0), mpf(3)), CircleArc(mpf(3), mpf(0))]) == []


# --- properties ----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(maps(), maps(), maps(), angles)
def test_composition_is_associative_on_the_boundary(m1, m2, m3, t):
    left = ((m1 @ m2) @ m3).act(t)
    right = (m1 @ (m2 @ m3)).act(t)
    assert angle_gap(left, right) < 1e-9


@settings(max_examples=100, deadline=None)
@given(maps(), angles)
def test_inverse_round_trip(m, t):
    assert angle_gap(m.inverse().act(m.act(t)), circle_point(t)) < 1e-9


@settings(max_examples=1000, deadline=None)
@given(maps_moving_origin())
def test_isometric_circle_is_orthogonal_to_the_boundary(m):
    centre, radius = isometric_circle_center_radius(m)
    assert abs(abs(centre) ** 2 - radius**2 - 1) < 1e-9 * max(1, radius**2)


@settings(max_examples=100, deadline=None)
@given(maps(), maps())
def test_classification_is_conjugation_invariant(m, g):
    # stay clear of the parabolic threshold, where the verdict is tolerance-limited
    if abs(abs(m.trace) - 2) < 1e-6:
        return
    assert classify(g @ m @ g.inverse()) is classify(m)


@settings(max_examples=100, deadline=None)
@given(st.lists(angles, min_size=1, max_size=8, unique=True), angles)
def test_arcs_between_sorted_cuts_partition_the_circle(cuts, t):
    cuts = sorted(circle_point(c) for c in cuts)
    if any(angle_gap(a, b) < 1e-6 for a, b in zip(cuts, cuts[1:] + cuts[:1])) and len(cuts) > 1:
        return
    arcs = [CircleArc(cuts[k], cuts[(k + 1) % len(cuts)]) for k in range(len(cuts))]
    assert sum(arc.contains(t, 0) for arc in arcs) == 1


@settings(max_examples=50, deadline=None)
@given(disk_coord, disk_coord, angles)
def test_elliptic_rotation_angle_matches(x, y, phi):
    c = mpc(x, y)
    m = elliptic_about(c, phi)
    # derivative at the fixed point is e^{i phi}
    h = mpf("1e-20")
    with mp.workprec(200):
        d = (m(c + h) - m(c)) / h
    assert abs(d - mp.expj(phi)) < 1e-8
