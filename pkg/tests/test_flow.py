import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discaction.errors import StepRejection
from discaction.flow import (area_ratios, flow_jacobian, integrate_orbit, propagate,
                             time_one_map)
from discaction.hamiltonians import (FourierMode, PerturbedRadial, RadialPoly, RotationFamily)

PERT = PerturbedRadial(RadialPoly((0.0, 4.0, -4.0)), (FourierMode(0.05, 2, 1),))


@settings(max_examples=25, deadline=None)
@given(rho=st.floats(-2, 2), r=st.floats(0, 1), th=st.floats(0, 2 * np.pi))
def test_rotation_time_one_map_is_rigid(rho, r, th):
    z = np.array([r * np.cos(th), r * np.sin(th)])
    a = 2 * np.pi * rho
    expect = np.array([np.cos(a) * z[0] - np.sin(a) * z[1], np.sin(a) * z[0] + np.cos(a) * z[1]])
    assert time_one_map(RotationFamily(rho), z) == pytest.approx(expect, abs=1e-10)


def test_radial_angular_speed_convention(quad):
    # theta' = -2 g'(s): on s = 0.25, g' = 4 - 8 s = 2, so theta advances by -4 per unit time
    tr = integrate_orbit(quad, (0.5, 0.0))
    assert tr.angle_lift[-1] - tr.angle_lift[0] == pytest.approx(-4.0, abs=1e-10)


def test_jacobian_determinant_and_fd():
    z = np.array([0.3, -0.4])
    J = flow_jacobian(PERT, z)
    assert J.det == pytest.approx(1.0, abs=1e-9)
    h = 1e-6
    cols = [(time_one_map(PERT, z + h * e) - time_one_map(PERT, z - h * e)) / (2 * h)
            for e in np.eye(2)]
    assert J.matrix == pytest.approx(np.column_stack(cols), abs=1e-6)


def test_area_ratios_of_sampled_discs():
    rng = np.random.default_rng(0)
    c = rng.uniform(-0.6, 0.6, (10, 2))
    t = 2 * np.pi * np.arange(1024) / 1024
    circ = 0.05 * np.column_stack([np.cos(t), np.sin(t)])
    assert np.allclose(area_ratios(PERT, c[:, None, :] + circ[None]), 1.0, atol=1e-8)


def test_area_ratios_triangles_approach_det():
    c = np.array([[0.3, 0.1]])
    errs = [abs(area_ratios(PERT, c[:, None] + h * np.array([[0, 0], [1, 0], [0, 1]]))[0] - 1)
            for h in (1e-4, 1e-5)]
    assert errs[1] < errs[0] / 5


def test_propagate_snapshots_and_action(quad):
    res = propagate(quad, np.array([[0.5, 0.0]]), 3.0, 3000, action=True, jacobian=True,
                    record_every_unit=True)
    assert res.snapshot_points.shape == (4, 1, 2)
    assert res.snapshot_jacobian.shape == (4, 1, 2, 2)
    assert res.snapshot_action[-1, 0] == pytest.approx(res.action[0])
    # sigma is additive along orbits for an autonomous flow: sigma_3 = 3 sigma_1 on circles
    assert res.snapshot_action[3, 0] == pytest.approx(3 * res.snapshot_action[1, 0])
    with pytest.raises(ValueError):
        propagate(quad, [0.1, 0.1], 1.5, 300, record_every_unit=True)


def test_multiple_extra_integrands():
    H = RotationFamily(0.5)
    res = propagate(H, np.array([[0.5, 0.0], [0.0, 0.2]]), 1.0, 500,
                    extra=lambda t, x, y, vx, vy: np.stack([np.ones_like(x), x * vy - y * vx]),
                    n_extra=2)
    assert res.extra.shape == (2, 2)
    assert res.extra[0] == pytest.approx([1.0, 1.0])


def test_step_count_guard_and_escape():
    with pytest.raises(ValueError):
        propagate(RotationFamily(0.1), [0.1, 0.1], 1.0, 50)
    steep = RadialPoly((0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 50.0))
    with pytest.raises(StepRejection):
        propagate(steep, [2.0, 0.0], 1.0, 200)
    res = propagate(steep, [[2.0, 0.0], [0.1, 0.0]], 1.0, 200, mask_escapes=True)
    assert res.escaped.tolist() == [True, False]


def test_integrate_orbit_refinement():
    tr = integrate_orbit(PERT, (0.4, 0.2), steps=200, refine_tol=1e-10)
    assert tr.error_estimate <= 1e-10
    assert tr.endpoint == pytest.approx(time_one_map(PERT, (0.4, 0.2)), abs=1e-9)
    with pytest.raises(StepRejection):
        integrate_orbit(PERT, (0.4, 0.2), steps=200, refine_tol=0.0, max_levels=1)


def test_orbit_through_origin_has_no_lift():
    tr = integrate_orbit(RotationFamily(0.3), (0.0, 0.0), steps=200)
    assert tr.angle_lift is None and tr.closing_gap == 0.0
