import numpy as np
import pytest

from psicontour.contour import ContourMap
from psicontour.geometry import DeformationParams, DomainError
from psicontour.inputs import gaussian_extension, gaussian_input, resolvent_input, sine_input
from psicontour.quadrature import QuadratureSpec
from psicontour.symbols import constant, monomial, resolvent
from psicontour.verify import (
    CornerDomain,
    check_decay_envelope,
    check_deformation_invariance,
    check_gaussian_bound,
    check_holomorphy,
    check_phase_bounds,
    check_stokes_residual,
    gaussian_wedge_samples,
    hand_phase_example,
    run_all,
)


def test_deformation_invariance(params1):
    rep = check_deformation_invariance(resolvent(1), resolvent_input(1), params1, [0.0], 0.5, 1.0)
    assert rep.passed, rep.detail
    assert rep.details["relative_difference"] < 1e-9


def test_deformation_invariance_complex(params1):
    rep = check_deformation_invariance(monomial([1]), sine_input(), params1, [0.02j], 0.5, 1.0)
    assert rep.passed, rep.detail


def test_corner_domain_validation():
    with pytest.raises(ValueError):
        CornerDomain(1.0, 0.5, 1.0, 40.0, 2.0)
    with pytest.raises(ValueError):
        CornerDomain(0.5, 1.0, 1.0, 3.0, 2.0)


@pytest.mark.slow
def test_stokes_residual(params1):
    Q = CornerDomain(0.5, 1.0, 1.0, 40.0, 2.0)
    rep = check_stokes_residual(resolvent(1), resolvent_input(1), params1, [0.0], Q, QuadratureSpec())
    assert rep.passed, rep.detail


@pytest.mark.parametrize("fixture", ["params1", "params2"])
def test_phase_bounds(fixture, request):
    params = request.getfixturevalue(fixture)
    rep = check_phase_bounds(params, count=20000, seed=3)
    assert rep.passed, rep.detail


def test_hand_phase_example(params1):
    a, b = hand_phase_example(params1)
    assert a == pytest.approx(-1.4)
    assert b == pytest.approx(-0.4)


def test_gaussian_bound():
    z = gaussian_wedge_samples(20000, n=2, seed=5)
    assert check_gaussian_bound(z, 1.0).passed
    rep = check_gaussian_bound(np.array([[10 + 2j]]), 1.0)
    assert rep.passed
    assert rep.details["min_exponent_gap"] > 40


def test_gaussian_bound_detects_wide_aperture():
    z = np.array([[1.0 + 0.8j]])
    assert not check_gaussian_bound(z, 1.0, aperture=0.9).passed
    with pytest.raises(DomainError):
        check_gaussian_bound(z, 1.0)


def test_holomorphy_accepts_entire_function():
    re = np.linspace(-0.6, 0.6, 41)
    im = np.linspace(-0.08, 0.08, 17)
    F = gaussian_extension((re[:, None] + 1j * im[None, :])[..., None])
    rep = check_holomorphy(F, re, im)
    assert rep.passed, rep.detail


def test_holomorphy_rejects_conjugate():
    re = np.linspace(-0.6, 0.6, 41)
    im = np.linspace(-0.08, 0.08, 17)
    Z = re[:, None] + 1j * im[None, :]
    rep = check_holomorphy(np.conj(Z), re, im, tol=1e-4)
    assert not rep.passed
    assert rep.details["max_morera"] >= 100 * 1e-4


def test_decay_envelope(params1):
    rep = check_decay_envelope(constant(1.0), gaussian_input(1), params1, None, [0.05j], samples=1000)
    assert rep.passed, rep.detail


def test_run_all_reports_sorted(params1):
    reps = run_all(constant(1.0), gaussian_input(1), params1, x=0.0, count=2000, stokes_rho=None)
    names = [r.name for r in reps]
    assert names == sorted(names)
    assert all(r.passed for r in reps), [r.detail for r in reps if not r.passed]
