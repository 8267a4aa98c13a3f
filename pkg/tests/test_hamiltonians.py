import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discaction.errors import BoundaryViolation, InvalidShape
from discaction.hamiltonians import (FourierMode, LinearCombination, Mollified, PerturbedRadial,
                                     PrecomposedRotation, RadialHamiltonian, RadialPoly,
                                     RadialStaircase,
                                     RotationFamily, build_mollified, build_staircase, describe,
                                     evaluate, from_dict, grad_bound_outside_disc,
                                     hamiltonian_vector_field, hofer_norm, is_identically_zero,
                                     mollifier_diagnostics, negate, precompose_rotation,
                                     sup_outside_disc, to_dict, zero_hamiltonian)

FAMILIES = [
    RotationFamily(0.37),
    RadialPoly((0.0, 4.0, -4.0)),
    RadialPoly((1.0, -3.0, 0.5, 1.5)),
    RadialStaircase(-0.5, 0.1, 1.0),
    PerturbedRadial(RadialPoly((0.0, 4.0, -4.0)), (FourierMode(0.05, 2, 1), FourierMode(0.03, 1))),
    PerturbedRadial(RotationFamily(0.5), (FourierMode(0.05, 3, 0, 0.3),)),
    LinearCombination((RotationFamily(0.2), RadialPoly((0.0, 1.0, -1.0))), (1.0, 2.0)),
    PrecomposedRotation(PerturbedRadial(RadialPoly((0.0, 4.0, -4.0)), (FourierMode(0.05, 2, 1),)), 1),
]


def _fd_jet(H, t, x, y, h=1e-5):
    g = lambda a, b: H.jet(t, a, b, 1)  # noqa: E731
    v = H.jet(t, x, y, 2)
    fx = (H.value(t, x + h, y) - H.value(t, x - h, y)) / (2 * h)
    fy = (H.value(t, x, y + h) - H.value(t, x, y - h)) / (2 * h)
    hxx = (g(x + h, y)[1] - g(x - h, y)[1]) / (2 * h)
    hxy = (g(x, y + h)[1] - g(x, y - h)[1]) / (2 * h)
    hyy = (g(x, y + h)[2] - g(x, y - h)[2]) / (2 * h)
    return v, (fx, fy, hxx, hxy, hyy)


@pytest.mark.parametrize("H", FAMILIES, ids=describe)
def test_jet_matches_finite_differences(H, rng):
    r = np.sqrt(rng.uniform(0, 0.95, 40))
    th = rng.uniform(0, 2 * np.pi, 40)
    x, y = r * np.cos(th), r * np.sin(th)
    t = 0.3
    v, fd = _fd_jet(H, t, x, y)
    for a, b in zip(v[1:], fd):
        # central differences with h = 1e-5: truncation ~ h^2 |H''''|, large on the staircase bump
        assert np.allclose(a, b, atol=1e-6 * max(1.0, np.abs(b).max()), rtol=1e-4)


@pytest.mark.parametrize("H", FAMILIES, ids=describe)
def test_vanishes_on_boundary_and_roundtrips(H):
    assert H.vanishes_on_boundary()
    H2 = from_dict(to_dict(H))
    assert H2.to_dict() == H.to_dict()
    z = np.array([[0.3, -0.2], [0.1, 0.7]])
    assert np.allclose(evaluate(H2, 0.4, z), evaluate(H, 0.4, z))


def test_vector_field_convention():
    # rotation by 2 pi rho per unit time, counter-clockwise for rho > 0
    X = hamiltonian_vector_field(RotationFamily(0.25), 0.0, (1.0, 0.0))
    assert X == pytest.approx([0.0, 2 * np.pi * 0.25])


def test_radial_poly_projection_and_zero():
    H = RadialPoly((1.0, 2.0))
    assert sum(H.coeffs) == pytest.approx(0.0)
    assert is_identically_zero(zero_hamiltonian())
    assert not is_identically_zero(RotationFamily(0.1))
    assert is_identically_zero(LinearCombination((RotationFamily(0.3), RotationFamily(-0.3))))


def test_perturbation_envelope_must_vanish():
    with pytest.raises(BoundaryViolation):
        PerturbedRadial(RotationFamily(0.1), (FourierMode(0.1, 1),), (1.0, 0.0))


def test_staircase_shape_validation():
    with pytest.raises(ValueError):
        RadialStaircase(0.5, 0.1, 1.0)
    with pytest.raises(InvalidShape):
        build_staircase(-0.2, 0.1, 1.0, bump_lo=0.5, bump_hi=0.95)
    G = build_staircase(-0.2, 0.1, 1.0)
    s = np.linspace(0, 1, 2001)
    g = G.profile(s)
    assert g[0] == pytest.approx(-0.2) and g[-1] == pytest.approx(0.0, abs=1e-12)
    assert g.max() == pytest.approx(1.0, abs=1e-3)


def test_mollified_agrees_inside_and_is_compact():
    H = PerturbedRadial(RadialPoly((0.0, 4.0, -4.0)), (FourierMode(0.05, 2, 1),))
    Hn = build_mollified(H, 8, refined=True)
    u = np.linspace(-0.9, 0.9, 41)
    assert np.allclose(Hn.value(0.2, u, 0.3 * u), H.value(0.2, u, 0.3 * u))
    th = np.linspace(0, 2 * np.pi, 50)
    R = Hn.support_radius + 1e-9
    assert np.all(Hn.value(0.2, R * np.cos(th), R * np.sin(th)) == 0)


class _Const(RadialHamiltonian):
    """Constant 1: does not vanish on the boundary."""

    def profile(self, s, nu=0):
        s = np.asarray(s, dtype=float)
        return np.ones_like(s) if nu == 0 else np.zeros_like(s)


def test_mollify_requires_boundary_vanishing():
    assert not _Const().vanishes_on_boundary()
    with pytest.raises(BoundaryViolation):
        build_mollified(_Const(), 4)
    with pytest.raises(ValueError):
        Mollified(RotationFamily(0.1), 0)


def test_mollifier_sup_and_gradient():
    H = RotationFamily(0.5)
    sups = [sup_outside_disc(build_mollified(H, n)) for n in (4, 16, 64)]
    assert sups[0] > sups[1] > sups[2] > 0
    g4 = grad_bound_outside_disc(build_mollified(H, 4))
    g64 = grad_bound_outside_disc(build_mollified(H, 64))
    assert g64 <= 2 * g4
    with pytest.raises(TypeError):
        grad_bound_outside_disc(H)


def test_mollifier_diagnostics_oracle():
    d = mollifier_diagnostics(RotationFamily(0.5), (16, 64))
    for row in d["rows"]:
        oracle = 2 * np.pi * 0.5 * d["plain_profile_sup"] / row["n"]
        assert row["sup_outside"] == pytest.approx(oracle, rel=2.0 / row["n"])
        assert row["support_leak"] == 0.0


def test_hofer_norms():
    H = RotationFamily(0.5)
    assert hofer_norm(H) == pytest.approx(np.pi * 0.5, rel=1e-9)
    assert hofer_norm(RadialPoly((0.0, 4.0, -4.0))) == pytest.approx(1.0, rel=1e-6)
    Hn = build_mollified(H, 16)
    assert hofer_norm(Hn, "annulus:16") == pytest.approx(sup_outside_disc(Hn), rel=1e-3)
    assert hofer_norm(Hn, "plane") >= hofer_norm(H) - 1e-12


def test_negate_and_precompose():
    assert negate(RotationFamily(0.3)) == RotationFamily(-0.3)
    assert negate(RadialPoly((0.0, 4.0, -4.0))).coeffs == pytest.approx((0.0, -4.0, 4.0))
    P = PerturbedRadial(RotationFamily(0.3), (FourierMode(0.05, 2, 1),))
    with pytest.raises(NotImplementedError):
        negate(P)
    assert precompose_rotation(RotationFamily(0.3), 1) == RotationFamily(-0.7)
    Q = precompose_rotation(RadialPoly((0.0, 4.0, -4.0)), 1)
    s = np.linspace(0, 1, 11)
    assert np.allclose(Q.profile(s), 4 * s * (1 - s) - np.pi * (1 - s))
    assert precompose_rotation(P, 0) is P
    assert isinstance(precompose_rotation(P, 2), PrecomposedRotation)


@settings(max_examples=30, deadline=None)
@given(c=st.lists(st.floats(-5, 5), min_size=1, max_size=5))
def test_radial_poly_always_vanishes_on_boundary(c):
    assert abs(RadialPoly(tuple(c)).profile(np.array(1.0))) < 1e-12


def test_from_dict_unknown_kind():
    with pytest.raises(ValueError):
        from_dict({"kind": "nope"})
