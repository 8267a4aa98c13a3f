import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discaction.errors import IndeterminateCase, RootIsolationFailure
from discaction.hamiltonians import RadialPoly, RadialStaircase, RotationFamily, zero_hamiltonian
from discaction.radial import (circle_orbit_check, monotonicity_check_radial, radial_sweep,
                               resonant_levels, rotation_spectral_invariants, solve_slope,
                               staircase_gap_certificate, subadditivity_check_rotations,
                               tangent_curve, tangent_spectrum, write_sweep_csv)


def _quad_oracle():
    # 4(1 - 2s) = -pi k  =>  s = (4 + pi k) / 8 ; intercept g - s g' = 4 s^2
    out = []
    for k in (-1, 0, 1):
        s = (4 + np.pi * k) / 8
        out.append(4 * s * s)
    return sorted(out)


def test_tangent_spectrum_of_quadratic(quad):
    ts = tangent_spectrum(quad)
    assert [lv.value for lv in ts.levels] == pytest.approx(_quad_oracle(), abs=1e-12)
    assert ts.origin_value == 0.0
    assert ts.values[0] == 0.0


def test_circle_orbits_reproduce_tangent_values(quad):
    rows = circle_orbit_check(quad)
    assert len(rows) == 3
    assert max(r["abs_err"] for r in rows) <= 1e-6


def test_full_twist_shifts_slope_index(quad):
    base = tangent_spectrum(quad)
    twisted = RadialPoly(tuple(np.add(quad.coeffs, (np.pi, -np.pi, 0.0))))  # g + pi (1 - s)
    ts = tangent_spectrum(twisted)
    ks0 = sorted(lv.k for lv in base.levels)
    ks1 = sorted(lv.k for lv in ts.levels)
    # adding pi(1 - s) lowers g' by pi, so the level with index k moves to k + 1
    common = set(ks0) & {k - 1 for k in ks1}
    assert len(common) == len(ks0)


def test_solve_slope_cases():
    g = RadialPoly((0.0, 4.0, -4.0)).profile
    roots = solve_slope(g, 0.0)
    assert [r.s for r in roots] == pytest.approx([0.5])
    flat = RotationFamily(0.5).profile
    runs = solve_slope(flat, -np.pi * 0.5)
    assert runs and runs[0].is_run and runs[0].s == 0.0 and runs[0].s_hi == 1.0
    assert solve_slope(g, 100.0) == []
    # tangency: g' = 4 - 8 s + 8 (s - 1/2)^2 touches 2 at s = 1/2
    roots = solve_slope(_tangent_profile, 2.0)
    assert any(abs(r.s - 0.5) < 1e-5 for r in roots)


def _tangent_profile(s, nu=0):
    # g(s) = 2 s + (8/3)(s - 1/2)^3, g' = 2 + 8 (s - 1/2)^2
    s = np.asarray(s, dtype=float)
    if nu == 0:
        return 2 * s + 8 / 3 * (s - 0.5) ** 3
    if nu == 1:
        return 2 + 8 * (s - 0.5) ** 2
    return 16 * (s - 0.5)


def test_root_isolation_failure():
    # g' = sin(2 pi 6000 s) + 0.5 has 12000 sign changes on [0, 1]
    wild = lambda s, nu=0: np.sin(2 * np.pi * 6000 * np.asarray(s, dtype=float)) + 0.5  # noqa: E731
    with pytest.raises(RootIsolationFailure):
        solve_slope(wild, 0.0)
    calm = lambda s, nu=0: np.sin(2 * np.pi * 3 * np.asarray(s, dtype=float))  # noqa: E731
    assert len(solve_slope(calm, 0.5)) == 6


def test_resonant_levels_quadratic(quad):
    lv = resonant_levels(quad, 16)
    assert all(abs(4 * (1 - 2 * d["s"]) + np.pi * d["p"] / d["q"]) < 1e-9 for d in lv)
    assert all(d["mean_action"] == pytest.approx(4 * d["s"] ** 2) for d in lv)
    assert max(d["mean_action"] for d in lv) > 3.9


def test_staircase_gap():
    for lam in np.linspace(0, -2, 9):
        cert = staircase_gap_certificate(lam, 0.1, 1.0)
        assert cert.gap_holds
        assert cert.min_positive == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(rho=st.floats(-3, 3))
def test_rotation_invariant_properties(rho):
    inv = rotation_spectral_invariants(rho)
    dual = rotation_spectral_invariants(-rho)
    assert inv.c_plus == -dual.c_minus
    assert inv.c_minus <= 0 <= inv.c_plus
    assert inv.gamma <= np.pi + 1e-15
    assert inv.c_plus == pytest.approx(min(max(np.pi * rho, 0), np.pi))
    assert len(inv.derivation) >= 3


@pytest.mark.parametrize("rho,cp,cm", [(0.5, np.pi / 2, 0.0), (2.0, np.pi, 0.0), (-0.5, 0.0, -np.pi / 2),
                                       (-2.0, 0.0, -np.pi)])
def test_rotation_invariant_examples(rho, cp, cm):
    inv = rotation_spectral_invariants(rho)
    assert (inv.c_plus, inv.c_minus) == pytest.approx((cp, cm))


@pytest.mark.parametrize("a,b", [(0.4, 0.4), (0.9, 0.9), (-0.5, 0.5)])
def test_subadditivity(a, b):
    assert subadditivity_check_rotations(a, b)


def test_monotonicity():
    r = monotonicity_check_radial(RotationFamily(0.6), RotationFamily(0.4))
    assert r.consistent
    st_ = RadialStaircase(0.0, 0.1, 1.0)
    r2 = monotonicity_check_radial(st_, zero_hamiltonian())
    assert r2.consistent and r2.bound_1 == ("lower", 1.0)
    assert monotonicity_check_radial(RotationFamily(0.3), RotationFamily(0.3)).consistent
    with pytest.raises(IndeterminateCase):
        monotonicity_check_radial(RadialPoly((0.0, 4.0, -4.0)), zero_hamiltonian())
    with pytest.raises(ValueError):
        monotonicity_check_radial(RotationFamily(0.1), RotationFamily(0.4))


def test_sweep_csv(tmp_path):
    rows = radial_sweep([({"rho": 0.5}, RotationFamily(1.0)), ({"c": 4}, RadialPoly((0.0, 4.0, -4.0)))])
    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path)
    read = list(csv.DictReader(open(path)))
    assert len(read) == len(rows) >= 4
    assert max(float(r["abs_err"]) for r in read) < 1e-6
    curve = tangent_curve(RadialPoly((0.0, 4.0, -4.0)), 11)
    assert curve.shape == (11, 4)
    assert curve[:, 3] == pytest.approx(4 * curve[:, 0] ** 2)
