import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from minend import hyp2
from minend.errors import (
    AsymptoticGeodesics,
    CoincidentPoints,
    DegenerateSpacing,
    IntersectingGeodesics,
    OutsideDisk,
)

from curves import equidistant, geodesic_samples, horocycle

radii = st.floats(0.0, 0.95)
angles = st.floats(0.0, 2 * math.pi)
disk_points = st.builds(lambda r, t: r * cmath.exp(1j * t), radii, angles)


@st.composite
def geodesics(draw):
    a = draw(angles)
    gap = draw(st.floats(0.05, 2 * math.pi - 0.05))
    return hyp2.Geodesic(hyp2.IdealPoint(a), hyp2.IdealPoint(a + gap))


REAL = hyp2.Geodesic(hyp2.IdealPoint(math.pi), hyp2.IdealPoint(0.0))


# --- types -----------------------------------------------------------------

def test_disk_point_rejects_boundary():
    with pytest.raises(OutsideDisk):
        hyp2.DiskPoint(1.0)
    with pytest.raises(OutsideDisk):
        hyp2.DiskPoint(1 - 1e-13)
    hyp2.DiskPoint(0.999)


def test_ideal_point_normalization_idempotent():
    p = hyp2.IdealPoint(-0.5)
    assert 0 <= p.theta < 2 * math.pi
    assert hyp2.IdealPoint(p.theta).theta == p.theta


def test_geodesic_needs_distinct_endpoints():
    with pytest.raises(CoincidentPoints):
        hyp2.Geodesic(hyp2.IdealPoint(1.0), hyp2.IdealPoint(1.0))


def test_polyline_invariants():
    with pytest.raises(ValueError):
        hyp2.Polyline((0j,))
    with pytest.raises(CoincidentPoints):
        hyp2.Polyline((0j, 0j))


# --- metric ----------------------------------------------------------------

def test_dist_examples():
    assert hyp2.dist(0, 0) == 0.0
    # integrate the conformal factor along the radius as an independent oracle
    length, _ = quad(lambda r: 2.0 / (1.0 - r * r), 0.0, 0.5, epsabs=1e-14)
    assert hyp2.dist(0, 0.5) == pytest.approx(length, abs=1e-12)
    assert hyp2.dist(0, 0.5) == pytest.approx(1.0986122886681098, abs=1e-12)


def test_conformal_factor_examples():
    assert hyp2.conformal_factor(0) == 2.0
    assert hyp2.conformal_factor(0.5) == pytest.approx(8.0 / 3.0, abs=1e-15)
    r = np.linspace(0, 0.99, 50)
    assert np.all(np.diff([hyp2.conformal_factor(x) for x in r]) > 0)


@given(disk_points, disk_points)
def test_dist_symmetric(p, q):
    assert hyp2.dist(p, q) == pytest.approx(hyp2.dist(q, p), abs=1e-12)
    assert hyp2.dist(p, q) >= 0


@given(disk_points, disk_points, disk_points)
def test_triangle_inequality(p, q, r):
    assert hyp2.dist(p, r) <= hyp2.dist(p, q) + hyp2.dist(q, r) + 1e-12


# --- geodesics -------------------------------------------------------------

def test_geodesic_between_examples():
    g = hyp2.geodesic_between(hyp2.IdealPoint(0.0), hyp2.IdealPoint(math.pi))
    assert g.is_diameter
    g = hyp2.geodesic_between(0j, 0.5j)
    assert {round(g.a.theta, 12), round(g.b.theta, 12)} == {
        round(math.pi / 2, 12), round(3 * math.pi / 2, 12)}
    g = hyp2.geodesic_between(hyp2.DiskPoint(0.5), hyp2.DiskPoint(0.5j))
    c, r = g.circle()
    # incidence and orthogonality of the supporting circle
    assert abs(abs(0.5 - c) - r) < 1e-12
    assert abs(abs(0.5j - c) - r) < 1e-12
    assert g.orthogonality_residual() < 1e-12
    assert hyp2.point_on_geodesic_residual(g, 0.5) < 1e-12


def test_geodesic_between_coincident():
    with pytest.raises(CoincidentPoints):
        hyp2.geodesic_between(0.3j, 0.3j)


@given(disk_points, disk_points)
def test_constructed_geodesics_orthogonal(p, q):
    if abs(p - q) < 1e-6:
        return
    g = hyp2.geodesic_between(hyp2.DiskPoint(p), hyp2.DiskPoint(q))
    assert g.orthogonality_residual() < 1e-12
    assert hyp2.point_on_geodesic_residual(g, p) < 1e-9
    assert hyp2.point_on_geodesic_residual(g, q) < 1e-9


def test_common_perpendicular_symmetric_pair():
    g1 = hyp2.Geodesic(hyp2.IdealPoint(-math.pi / 6), hyp2.IdealPoint(math.pi / 6))
    g2 = hyp2.Geodesic(hyp2.IdealPoint(math.pi - math.pi / 6), hyp2.IdealPoint(math.pi + math.pi / 6))
    perp = hyp2.common_perpendicular(g1, g2)
    ends = sorted([perp.geodesic.a.theta, perp.geodesic.b.theta])
    assert ends[0] == pytest.approx(0.0, abs=1e-12)
    assert ends[1] == pytest.approx(math.pi, abs=1e-12)


def test_common_perpendicular_errors():
    d1 = hyp2.Geodesic(hyp2.IdealPoint(0.0), hyp2.IdealPoint(math.pi))
    d2 = hyp2.Geodesic(hyp2.IdealPoint(math.pi / 2), hyp2.IdealPoint(3 * math.pi / 2))
    with pytest.raises(IntersectingGeodesics):
        hyp2.common_perpendicular(d1, d2)
    g = hyp2.Geodesic(hyp2.IdealPoint(0.0), hyp2.IdealPoint(1.0))
    h = hyp2.Geodesic(hyp2.IdealPoint(1.0), hyp2.IdealPoint(2.0))
    with pytest.raises(AsymptoticGeodesics):
        hyp2.common_perpendicular(g, h)


@given(angles, st.floats(0.2, 2.0), st.floats(0.2, 1.5), st.floats(0.2, 2.0))
def test_common_perpendicular_orthogonal(a, w1, gap, w2):
    if w1 + gap + w2 > 2 * math.pi - 0.2:
        return
    g1 = hyp2.Geodesic(hyp2.IdealPoint(a), hyp2.IdealPoint(a + w1))
    g2 = hyp2.Geodesic(hyp2.IdealPoint(a + w1 + gap), hyp2.IdealPoint(a + w1 + gap + w2))
    perp = hyp2.common_perpendicular(g1, g2)
    # angle measured independently from the tangent directions at each foot
    assert abs(hyp2.intersection_angle(perp.geodesic, g1, perp.foot1) - math.pi / 2) < 1e-10
    assert abs(hyp2.intersection_angle(perp.geodesic, g2, perp.foot2) - math.pi / 2) < 1e-10
    assert hyp2.point_on_geodesic_residual(g1, perp.foot1) < 1e-10
    assert hyp2.point_on_geodesic_residual(perp.geodesic, perp.foot2) < 1e-10


# --- isometries ------------------------------------------------------------

def test_reflect_real_diameter_is_conjugation():
    p = 0.3 + 0.4j
    assert hyp2.reflect(p, REAL).z == pytest.approx(p.conjugate(), abs=1e-15)


@given(disk_points, geodesics())
def test_reflect_involution(p, g):
    q = hyp2.reflect(hyp2.reflect(p, g), g)
    assert abs(q.z - p) < 1e-12


@given(disk_points, geodesics(), st.floats(-3, 3))
def test_reflect_preserves_distance_to_geodesic_points(p, g, s):
    q = hyp2.translate(g, s, hyp2.from_standard(g, 0.0))
    d0 = hyp2.dist(p, q)
    d1 = hyp2.dist(hyp2.reflect(p, g), q)
    assert abs(d0 - d1) <= 1e-10 * max(1.0, d0)


@given(disk_points, geodesics())
def test_reflect_flips_side(p, g):
    s0 = hyp2.signed_dist_to_geodesic(p, g).value
    s1 = hyp2.signed_dist_to_geodesic(hyp2.reflect(p, g), g).value
    assert s1 == pytest.approx(-s0, abs=1e-9)


def test_translate_examples():
    p = 0.2 + 0.1j
    assert abs(hyp2.translate(REAL, 0.0, p).z - p) < 1e-15
    for s in (0.3, 1.0, 2.5):
        z = hyp2.translate(REAL, s, 0.0).z
        assert z == pytest.approx(math.tanh(s / 2), abs=1e-15)
        assert hyp2.dist(0.0, z) == pytest.approx(s, abs=1e-12)


@given(geodesics(), st.floats(-3, 3), st.floats(-3, 3), disk_points)
def test_translate_group_law(g, s, t, p):
    a = hyp2.translate(g, s, hyp2.translate(g, t, p))
    b = hyp2.translate(g, s + t, p)
    assert hyp2.dist(a, b) < 1e-8


@given(geodesics(), st.floats(-2, 2), disk_points, disk_points)
def test_translate_is_isometry(g, s, p, q):
    d0 = hyp2.dist(p, q)
    d1 = hyp2.dist(hyp2.translate(g, s, p), hyp2.translate(g, s, q))
    assert abs(d0 - d1) <= 1e-10 * max(1.0, d0) + 1e-10


def test_parallel_transport_along_diameter():
    # along the real diameter the transported direction keeps its angle
    v = cmath.exp(0.3j)
    w = hyp2.parallel_transport(0.0, 0.5, v)
    assert w == pytest.approx(v, abs=1e-14)


# --- distances and curvature -----------------------------------------------

def test_signed_distance_examples():
    assert hyp2.signed_dist_to_geodesic(0.3, REAL).value == pytest.approx(0.0, abs=1e-15)
    sd = hyp2.signed_dist_to_geodesic(0.5j, REAL)
    assert sd.value == pytest.approx(2 * math.atanh(0.5), abs=1e-12)
    assert abs(sd.foot.z) < 1e-15
    assert hyp2.signed_dist_to_geodesic(-0.5j, REAL).value < 0


@given(disk_points, geodesics())
def test_signed_distance_is_infimum(p, g):
    sd = hyp2.signed_dist_to_geodesic(p, g)
    assert hyp2.dist(p, sd.foot) == pytest.approx(abs(sd.value), abs=1e-9)
    # nearby points of g are no closer than the foot
    for s in (-0.1, 0.1):
        q = hyp2.translate(g, s, sd.foot)
        assert hyp2.dist(p, q) >= abs(sd.value) - 1e-12


def test_vectorized_distances_match_scalar(rng):
    z = 0.8 * (rng.random(20) * np.exp(2j * np.pi * rng.random(20)))
    g = hyp2.Geodesic(hyp2.IdealPoint(0.4), hyp2.IdealPoint(2.9))
    sd, feet = hyp2.signed_distances(z, g)
    for zi, si, fi in zip(z, sd, feet):
        ref = hyp2.signed_dist_to_geodesic(zi, g)
        assert si == pytest.approx(ref.value, abs=1e-12)
        assert abs(fi - ref.foot.z) < 1e-12


def test_curvature_of_geodesic_samples():
    g = hyp2.Geodesic(hyp2.IdealPoint(0.7), hyp2.IdealPoint(3.1))
    k = hyp2.discrete_curvature(geodesic_samples(g, 0.01))
    assert np.max(np.abs(k)) < 1e-6


def test_curvature_of_horocycle_and_equidistant():
    k = hyp2.discrete_curvature(horocycle(0.005))
    assert np.max(np.abs(np.abs(k) - 1.0)) < 1e-3
    k = hyp2.discrete_curvature(equidistant(0.7, 0.005))
    assert np.max(np.abs(np.abs(k) - math.tanh(0.7))) < 1e-3


def test_curvature_second_order():
    errs = [np.max(np.abs(np.abs(hyp2.discrete_curvature(horocycle(h))) - 1)) for h in (0.02, 0.01)]
    assert errs[0] / errs[1] >= 3.5
    errs = [np.max(np.abs(np.abs(hyp2.discrete_curvature(equidistant(0.7, h))) - math.tanh(0.7)))
            for h in (0.02, 0.01)]
    assert errs[0] / errs[1] >= 3.5


def test_curvature_sign_follows_left_normal():
    # equidistant above the real diameter traversed left to right bends right
    k = hyp2.discrete_curvature(equidistant(0.7, 0.01))
    assert np.all(k < 0)
    k2 = hyp2.discrete_curvature(equidistant(0.7, 0.01)[::-1])
    assert np.all(k2 > 0)


def test_curvature_degenerate_spacing():
    with pytest.raises(DegenerateSpacing):
        hyp2.discrete_curvature([0.0, 0.01])
    with pytest.raises(DegenerateSpacing):
        hyp2.discrete_curvature([0.0, 0.2, 0.4])
