import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import solve_ivp

from minend import sinhgordon as sg
from minend.errors import DegenerateExtent, NotConverged


def ode_profile(v, w0=0.2):
    # decaying branch of w'' = 2 sinh 2w: the first integral gives w' = -2 sinh w
    sol = solve_ivp(lambda t, y: -2 * np.sinh(y), (0, float(v.max())), [w0],
                    t_eval=v, rtol=1e-12, atol=1e-14)
    return sol.y[0]


@pytest.fixture(scope="module")
def calibration():
    out = {}
    for h in (0.1, 0.05):
        g = sg.make_grid((-5, 5), (0, 10), h)
        out[h] = sg.solve(g, sg.BoundaryCondition(bottom=0.2))
    return out


def test_make_grid_examples():
    g = sg.make_grid((0, 10), (0, 10), 0.1)
    assert (g.nu, g.nv) == (101, 101)
    g = sg.make_grid((0, 3), (0, 12), 0.25)
    assert (g.nu, g.nv) == (13, 49)
    with pytest.raises(DegenerateExtent):
        sg.make_grid((0, 1), (0, 1), 0.0)
    with pytest.raises(DegenerateExtent):
        sg.make_grid((0, 1), (0, 1), -0.1)
    with pytest.raises(DegenerateExtent):
        sg.make_grid((0, 1), (0, 1), 0.5)
    with pytest.raises(DegenerateExtent):
        sg.make_grid((1, 1), (0, 1), 0.01)


def test_boundary_condition_validation():
    with pytest.raises(ValueError):
        sg.BoundaryCondition(bottom=5.5)
    with pytest.raises(ValueError):
        sg.BoundaryCondition(top=float("nan"))
    with pytest.raises(ValueError):
        sg.BoundaryCondition(physical=("front",))


def test_zero_data_gives_zero_field():
    g = sg.make_grid((0, 2), (0, 2), 0.1)
    f = sg.solve(g, sg.BoundaryCondition())
    assert f.converged and np.all(f.values == 0)
    assert sg.residual_sup(f) == 0


def test_center_column_matches_ode(calibration):
    f = calibration[0.05]
    assert f.residual_sup < 1e-8
    ic = f.grid.nu // 2
    assert np.max(np.abs(f.values[:, ic] - ode_profile(f.grid.v))) < 1e-4


def test_large_boundary_data():
    g = sg.make_grid((0, 2), (0, 2), 0.1)
    for sign in (1, -1):
        bc = sg.BoundaryCondition(sign * 5.0, sign * 5.0, sign * 5.0, sign * 5.0)
        f = sg.solve(g, bc)
        assert f.converged
        assert sg.residual_sup(f) < 1e-8
        assert np.all(np.abs(f.values) <= 5.0)


def test_residual_examples():
    g = sg.make_grid((0, 1), (0, 1), 0.1)
    f = sg.OmegaField(g, np.zeros((g.nv, g.nu)))
    assert sg.residual_sup(f) == 0
    eps = 1e-3
    vals = np.zeros((g.nv, g.nu))
    vals[1:-1, 1:-1] = eps
    # nodes two steps from the edge see a flat neighbourhood
    r = sg.residual_field(sg.OmegaField(g, vals))
    assert np.abs(r[1:-1, 1:-1]) == pytest.approx(2 * math.sinh(2 * eps), rel=1e-12)
    assert 2 * math.sinh(2 * eps) == pytest.approx(4 * eps, rel=1e-5)


def test_residual_of_sampled_exact_solution():
    # the closed-form decaying profile leaves only truncation error, O(h^2)
    def exact(U, V):
        return 2 * np.arctanh(math.tanh(0.1) * np.exp(-2 * V))

    res = [sg.field_from_function(sg.make_grid((0, 1), (0, 4), h), exact).residual_sup
           for h in (0.02, 0.01)]
    assert res[0] < 2e-4
    assert res[0] / res[1] == pytest.approx(4, rel=0.05)


def test_solution_is_deterministic():
    g = sg.make_grid((0, 2), (0, 2), 0.1)
    bc = sg.BoundaryCondition(bottom=0.3, left=0.1)
    a, b = sg.solve(g, bc), sg.solve(g, bc)
    assert np.array_equal(a.values, b.values)


@settings(max_examples=10)
@given(arrays(float, 4 * 12, elements=st.floats(0, 2)))
def test_maximum_principle(data):
    g = sg.make_grid((0, 1.1), (0, 1.1), 0.1)
    b, t, le, r = data.reshape(4, 12)
    f = sg.solve(g, sg.BoundaryCondition(b, t, le, r))
    assert np.all(f.values >= -1e-14)
    assert np.max(f.values) <= np.max(data) + 1e-14


def test_symmetric_data_gives_symmetric_field():
    g = sg.make_grid((-2, 2), (0, 3), 0.1)
    prof = 0.5 * np.exp(-g.u ** 2)
    f = sg.solve(g, sg.BoundaryCondition(bottom=prof))
    assert np.max(np.abs(f.values - f.values[:, ::-1])) < 1e-10


def test_second_order_refinement():
    cols = []
    for h in (0.2, 0.1, 0.05):
        g = sg.make_grid((-4, 4), (0, 4), h)
        f = sg.solve(g, sg.BoundaryCondition(bottom=0.2))
        step = int(round(0.2 / h))
        cols.append(f.values[::step, g.nu // 2])
    e1 = np.max(np.abs(cols[0] - cols[1]))
    e2 = np.max(np.abs(cols[1] - cols[2]))
    assert e1 / e2 >= 3.5


def test_bump_condition_vanishes_at_corners():
    g = sg.make_grid((-4, 4), (0, 6), 0.04)
    bc = sg.bump_condition(g, 0.2)
    assert bc.bottom[0] == pytest.approx(0, abs=1e-17)
    assert bc.bottom[g.nu // 2] == pytest.approx(0.2)


def test_boundary_distance():
    g = sg.make_grid((0, 4), (0, 4), 0.5)
    d = sg.boundary_distance(g, ("bottom",))
    assert np.allclose(d, g.mesh()[1])
    d2 = sg.boundary_distance(g, ("bottom", "left"))
    assert d2[3, 1] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        sg.boundary_distance(g, ())


def test_decay_report_zero_field():
    g = sg.make_grid((0, 4), (0, 4), 0.1)
    rep = sg.decay_report(sg.solve(g, sg.BoundaryCondition()))
    assert rep["K0_fit"] == 0 and rep["delta_fit"] == 0 and rep["monotone_ok"]


def test_decay_report_needs_convergence():
    g = sg.make_grid((0, 4), (0, 4), 0.1)
    with pytest.raises(NotConverged):
        sg.decay_report(sg.field_from_function(g, lambda U, V: 0 * U))


def test_decay_report_stable_under_refinement(calibration):
    a = sg.decay_report(calibration[0.1])
    b = sg.decay_report(calibration[0.05])
    assert a["monotone_ok"] and b["monotone_ok"]
    assert abs(a["K0_fit"] - b["K0_fit"]) < 0.05 * b["K0_fit"]
    assert abs(a["delta_fit"] - b["delta_fit"]) < 0.05 * b["delta_fit"]


def test_decay_report_flags_growing_field():
    g = sg.make_grid((0, 4), (0, 8), 0.1)
    f = sg.field_from_function(g, lambda U, V: 0.01 * V)
    f.converged = True
    assert not sg.decay_report(f)["monotone_ok"]


def test_field_csv_round_trip(tmp_path):
    g = sg.make_grid((-1, 1), (0, 2), 0.1)
    f = sg.solve(g, sg.bump_condition(g))
    path = tmp_path / "field.csv"
    sg.write_field_csv(path, f)
    lines = path.read_text().splitlines()
    assert lines[0] == "# format_version=1"
    assert lines[1] == "nu,nv,u0,v0,du,dv"
    back = sg.read_field_csv(path)
    assert np.array_equal(back.values, f.values)
    assert (back.grid.nu, back.grid.nv) == (g.nu, g.nv)
    assert back.residual_sup == pytest.approx(f.residual_sup, abs=1e-15)
