import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from minend import analyze, hyp2
from minend import reconstruct as rc
from minend import sinhgordon as sg
from minend.errors import CurvatureHypothesisViolated, InsufficientSpan, TailNotConverged

from curves import equidistant, geodesic_samples

REAL = hyp2.Geodesic(hyp2.IdealPoint(math.pi), hyp2.IdealPoint(0.0))
IMAG = hyp2.Geodesic(hyp2.IdealPoint(-math.pi / 2), hyp2.IdealPoint(math.pi / 2))


def ray(angle=0.0, start=0.0, length=20.0, spacing=0.05):
    s = start + np.arange(0.0, length, spacing)
    return np.tanh(s / 2) * np.exp(1j * angle)


@pytest.fixture(scope="module")
def model_end():
    g = sg.make_grid((-4, 4), (0, 6), 0.05)
    f = sg.solve(g, sg.bump_condition(g))
    return rc.develop(f)


# --- verdicts and reports --------------------------------------------------

def test_verdict_serializes_plain_types():
    v = analyze.Verdict("x", np.True_, {"a": np.float64(1.5), "b": [np.int64(2)], "c": np.bool_(0)})
    out = json.dumps(v.as_dict())
    assert json.loads(out) == {"passed": True, "metrics": {"a": 1.5, "b": [2], "c": False}}


def test_end_report_checks_point_count():
    pts = [hyp2.IdealPoint(0.0), hyp2.IdealPoint(1.0)]
    rep = analyze.EndReport(0, 1.0, pts, {}, {})
    assert rep.distinct == [True, True]
    with pytest.raises(ValueError):
        analyze.EndReport(1, 1.0, pts, {}, {})


def test_consecutive_distinct():
    pts = [hyp2.IdealPoint(t) for t in (0.0, 0.0005, 3.0, 2 * math.pi - 0.0002)]
    assert analyze.consecutive_distinct(pts) == [False, True, True, False]


# --- ideal endpoints -------------------------------------------------------

def test_tail_ideal_point_of_rays():
    for a in (0.3, 2.0, -1.0):
        p, spread = analyze.tail_ideal_point(ray(a))
        assert hyp2.angular_separation(p.theta, a) < 1e-9
        assert spread < 1e-9


def test_tail_ideal_point_needs_convergence():
    t = np.linspace(0, 1.5, 40)
    with pytest.raises(TailNotConverged):
        analyze.tail_ideal_point(0.5 * np.exp(1j * t))
    with pytest.raises(TailNotConverged):
        analyze.tail_ideal_point([0.1])


def test_model_end_has_two_distinct_ideal_points(model_end):
    est = analyze.asymptotic_points([model_end])
    assert len(est.points) == 2
    assert all(analyze.consecutive_distinct(est.points))
    assert est.cross_level < 1e-2


def test_ideal_points_stable_under_level_choice(model_end):
    a = analyze.asymptotic_points([model_end], levels=(-1, -2))
    b = analyze.asymptotic_points([model_end], levels=(-3, -5))
    for p, q in zip(a.points, b.points):
        assert hyp2.angular_separation(p.theta, q.theta) < 2e-2


# --- convergence to a geodesic ---------------------------------------------

def test_c1_trivial_sequence():
    c = geodesic_samples(REAL, 0.05, 100)
    v = analyze.c1_convergence_report([c, c, c], REAL)
    assert v.passed
    assert max(v.metrics["distance"]) < 1e-12


def test_c1_equidistant_sequence():
    curves = [equidistant(1.0 / n, 0.05, 100) for n in (1, 2, 5, 10, 50, 200)]
    v = analyze.c1_convergence_report(curves, REAL, slack=1e-9)
    assert v.passed
    assert v.metrics["distance"][-1] == pytest.approx(1 / 200, rel=1e-9)
    assert np.all(np.diff(v.metrics["distance"]) < 0)
    # end vertices use one-sided chords, so the angle there is O(kappa * spacing)
    assert np.all(np.diff(v.metrics["angle"]) < 0)
    assert v.metrics["angle"][-1] < 1e-3


def test_c1_fails_for_transversal_curves():
    curves = []
    for n in (1, 2, 4, 8, 16, 32):
        g = hyp2.Geodesic(hyp2.IdealPoint(math.pi / 6), hyp2.IdealPoint(math.pi + math.pi / 6))
        curves.append(geodesic_samples(g, 0.5 / (10 * n), 21))
    v = analyze.c1_convergence_report(curves, REAL)
    assert v.metrics["band_ok"]
    assert not v.metrics["tangent_ok"] and not v.passed
    assert v.metrics["angle"][-1] == pytest.approx(math.pi / 6, abs=1e-3)


def test_tangent_angles_on_equidistant():
    z = equidistant(0.7, 0.02, 101)
    a = analyze.tangent_angles(z, REAL)
    assert np.max(a[1:-1]) < 1e-12
    assert a[0] == pytest.approx(0.5 * math.tanh(0.7) * 0.02, rel=1e-2)


# --- graph and asymptote checks --------------------------------------------

def test_graph_check_geodesic_ray():
    v = analyze.horizontal_graph_check(ray(0.0, start=0.1), IMAG, k_bound=0.5)
    assert v.passed
    assert v.metrics["max_count"] == 1 and v.metrics["n_levels"] == 64


def test_graph_check_rejects_large_curvature():
    # hyperbolic circle with curvature coth r = 1.2
    r = math.atanh(1 / 1.2)
    t = np.linspace(0, 1.0, 60)
    arc = math.tanh(r / 2) * np.exp(1j * t)
    with pytest.raises(CurvatureHypothesisViolated):
        analyze.horizontal_graph_check(arc, REAL, k_bound=0.5)
    with pytest.raises(ValueError):
        analyze.horizontal_graph_check(arc, REAL, k_bound=1.0)


def test_graph_check_counts_recrossing():
    # a circle of radius 2 (curvature coth 2, just above horocycle curvature)
    # leaves the real diameter and returns to it
    t = np.linspace(1e-3, math.pi - 1e-3, 400)
    arc = math.tanh(1.0) * np.exp(1j * t)
    v = analyze.horizontal_graph_check(arc, REAL, k_bound=0.5, enforce_hypothesis=False)
    assert not v.passed
    assert v.metrics["max_count"] == 2
    assert v.metrics["k_max"] == pytest.approx(1 / math.tanh(2.0), rel=1e-3)


def test_count_crossings_flags_tangency():
    sd = np.array([0.0, 0.5, 1.0, 0.5, 0.0])
    seglen = np.full(4, 1.0)
    count, amb, _ = analyze.count_crossings(sd, seglen, 1.0)
    assert count == 0 and amb == 1
    count, amb, sine = analyze.count_crossings(sd, seglen, 0.75)
    assert (count, amb) == (2, 0) and sine == pytest.approx(0.5)


def test_unique_asymptote_geodesic_ray():
    v = analyze.unique_asymptote_check(ray(0.4), k_bound=0.5)
    assert v.passed
    assert v.metrics["tail_spread"] < 1e-9
    assert v.metrics["ideal_angle"] == pytest.approx(0.4)


def test_unique_asymptote_equidistant_ray():
    z = equidistant(0.5, 0.05, 800)[400:]
    v = analyze.unique_asymptote_check(z, k_bound=0.5)
    assert v.passed
    assert hyp2.angular_separation(v.metrics["ideal_angle"], 0.0) < 1e-2


def test_unique_asymptote_spiral_is_gated():
    t = np.linspace(0, 12 * math.pi, 20000)
    spiral = (0.9 - 0.8 * t / t[-1]) * np.exp(1j * t * (1 + t / t[-1]))
    with pytest.raises(CurvatureHypothesisViolated):
        analyze.unique_asymptote_check(spiral, k_bound=0.9)


def test_unique_asymptote_length_floor():
    with pytest.raises(ValueError):
        analyze.unique_asymptote_check(ray(0.0, length=5.0), k_bound=0.5)


def test_properness(model_end):
    assert analyze.properness_check(model_end).passed
    z = np.tile(np.concatenate([ray(0.0, length=1.0)[::-1], ray(0.0, length=1.0)[1:3]]), (4, 1))
    assert not analyze.properness_check(SimpleNamespace(z=z)).passed


# --- decay fit -------------------------------------------------------------

def test_decay_fit_exact_data():
    r = np.linspace(2, 20, 50)
    out = analyze.curvature_decay_fit(np.column_stack([r, 3 * np.exp(-0.5 * r)]))
    assert out["c1_fit"] == pytest.approx(0.5, abs=1e-6)
    assert out["c2_fit"] == pytest.approx(3.0, rel=1e-6)
    assert out["r2"] > 0.999999 and not out["no_decay"]


def test_decay_fit_noisy_data(rng):
    r = np.linspace(2, 40, 60)
    for _ in range(200):
        k = 3 * np.exp(-0.5 * r) * rng.uniform(0.9, 1.1, r.size)
        out = analyze.curvature_decay_fit(np.column_stack([r, k]))
        assert abs(out["c1_fit"] - 0.5) < 0.025


def test_decay_fit_constant_data():
    r = np.linspace(2, 20, 50)
    out = analyze.curvature_decay_fit(np.column_stack([r, np.full_like(r, 0.3)]))
    assert out["c1_fit"] == pytest.approx(0.0, abs=1e-12)
    assert out["no_decay"] and out["r2"] == 1.0


def test_decay_fit_span_requirements():
    r = np.linspace(10, 20, 50)
    with pytest.raises(InsufficientSpan):
        analyze.curvature_decay_fit(np.column_stack([r, np.exp(-r)]))
    r = np.linspace(1, 20, 5)
    with pytest.raises(InsufficientSpan):
        analyze.curvature_decay_fit(np.column_stack([r, np.exp(-r)]))
    r = np.linspace(5, 100, 400)
    # values under the floor are dropped before the span test
    with pytest.raises(InsufficientSpan):
        analyze.curvature_decay_fit(np.column_stack([r, np.exp(-2 * r)]))
