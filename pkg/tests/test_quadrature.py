import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import spherical_in

from psicontour.contour import ContourMap
from psicontour.inputs import gaussian_input, resolvent_input, sine_input, zero_input
from psicontour.quadrature import (
    ContourQuadrature,
    DecayError,
    QuadratureSpec,
    RegularizationSchedule,
    algebraic_truncation,
    choose_truncation,
    composite_rule,
    direct_sum,
    exp_legendre_moments,
    gauss_legendre,
    gaussian_truncation,
    graded_breaks,
    integrate_contour,
    regularized_limit,
    tensor_grid,
)
from psicontour.symbols import constant, monomial, resolvent


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(8)
    for k in range(16):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(w, x**k) == pytest.approx(exact, abs=1e-14)


def test_composite_rule_reproduces_box_length():
    nodes, w = composite_rule([0.0, 0.3, 1.0, 2.5], 16)
    assert np.all(w > 0)
    assert np.all((nodes > 0) & (nodes < 2.5))
    assert abs(np.sum(w) - 2.5) < 1e-12


def test_tensor_grid_box_volume():
    g = tensor_grid((-1.5, 1.5), (-10, 10), n=2, order=8)
    assert abs(np.sum(g.y_weights) - 9.0) < 1e-12
    assert abs(np.sum(g.xi_weights) - 400.0 / (2 * np.pi) ** 2) < 1e-12
    assert np.all(g.y_weights > 0) and np.all(g.xi_weights > 0)


def test_graded_breaks_contain_center_and_grow():
    b = graded_breaks(-1.0, 1.0, 0.2, 1e-4, 0.25)
    assert 0.2 in b
    assert b[0] == -1.0 and b[-1] == 1.0
    assert np.all(np.diff(b) > 0) and np.max(np.diff(b)) <= 0.25 + 1e-12
    assert np.min(np.diff(b)) == pytest.approx(1e-4)


def _moments_mp(z, m):
    import mpmath as mp

    mp.mp.dps = 40
    zz = mp.mpc(z)
    return np.array([complex(2 * mp.sqrt(mp.pi / (2 * zz)) * mp.besseli(k + mp.mpf(1) / 2, zz)) for k in range(m)])


@pytest.mark.parametrize("r", [1e-3, 0.5, 1.9, 2.01, 3.0, 7.5, 15.9, 16.0, 40.0, 300.0])
def test_moments_match_spherical_bessel(r):
    m = 16
    for ph in np.linspace(0, np.pi, 7):
        z = r * np.exp(1j * ph)
        M = exp_legendre_moments(np.array([z]), m)[0]
        ref = _moments_mp(z, m)
        assert np.max(np.abs(M - ref)) < 1e-12 * np.max(np.abs(ref))


def test_moments_at_zero():
    M = exp_legendre_moments(np.array([0.0]), 5)[0]
    assert np.allclose(M, [2, 0, 0, 0, 0], atol=1e-15)


def test_moments_real_argument_scipy():
    z = np.array([0.5, 3.0, 10.0])
    M = exp_legendre_moments(z, 6)
    ref = 2 * np.stack([spherical_in(k, z) for k in range(6)], -1)
    assert np.allclose(M, ref, rtol=1e-11, atol=1e-14)


def test_choose_truncation_example():
    rho = choose_truncation(0, 1.0, 0.09, 0.0, 1e-10)
    assert rho == pytest.approx(math.log(1e10) / 0.09, rel=1e-8)
    assert abs(rho - 256) < 1


def test_choose_truncation_errors_without_margin():
    with pytest.raises(DecayError):
        choose_truncation(0, 1.0, 0.09, 0.09, 1e-10)


def test_choose_truncation_monotone_in_order():
    assert choose_truncation(-2, 1.0, 0.09, 0.0, 1e-10) < choose_truncation(0, 1.0, 0.09, 0.0, 1e-10)
    assert choose_truncation(0, 1.0, 0.09, 0.0, 1e-10, n=2) > choose_truncation(0, 1.0, 0.09, 0.0, 1e-10)


def test_gaussian_and_algebraic_truncation():
    r = gaussian_truncation(0.5, 0, 1e-12)
    assert math.exp(-0.5 * (0.5 * r) ** 2) == pytest.approx(1e-12, rel=1e-6)
    r = algebraic_truncation(-3, 1e-8, n=1)
    assert r ** (-2) / 2 == pytest.approx(1e-8)
    with pytest.raises(DecayError):
        algebraic_truncation(-1, 1e-8, n=1)


def test_schedule_defaults_and_validation():
    s = RegularizationSchedule()
    assert s.lambda_values == tuple(0.5 * 2.0 ** -k for k in range(7))
    with pytest.raises(ValueError):
        RegularizationSchedule((0.1, 0.2, 0.05))
    with pytest.raises(ValueError):
        RegularizationSchedule((0.5, 0.25))


def test_regularized_limit_constant():
    r = regularized_limit([2.0 + 1j] * 5)
    assert r.value == 2.0 + 1j and r.error == 0 and not r.diverging


def test_regularized_limit_quadratic_in_lambda_is_exact():
    lam = np.array(RegularizationSchedule().lambda_values)
    r = regularized_limit(3.0 - 2.0 * lam**2, lam)
    assert abs(r.value - 3.0) < 1e-13


def test_regularized_limit_flags_divergence():
    lam = np.array(RegularizationSchedule().lambda_values)
    r = regularized_limit(1.0 / lam, lam)
    assert r.diverging and not r.monotone


def test_regularized_limit_no_richardson_returns_last():
    r = regularized_limit([1.0, 0.5, 0.25], richardson=False)
    assert r.value == 0.25 and r.error == 0


def test_zero_input_gives_zero(params1):
    v = integrate_contour(ContourMap(params1), constant(1.0), zero_input(1), [0.1 + 0.02j], 1.0)
    assert v == 0


def test_regularized_matches_direct_sum(params1):
    c = ContourMap(params1)
    u = gaussian_input(1)
    lam = 0.1
    for x in (0.0, 0.25):
        v = integrate_contour(c, constant(1.0), u, [x], 0.0, lam)
        g = tensor_grid((-1.5, 1.5), (-120, 120), n=1, order=16, y_panel=0.25, xi_panel=0.5)
        ref = direct_sum(constant(1.0), u, np.array([x]), g, lam)
        assert abs(v - ref) < 1e-10 * abs(ref)


def test_deformed_integrand_obeys_envelope(params1):
    # t = 1, lambda = 0 is finite for |Im x| < delta' and equals the exact extension
    v = integrate_contour(ContourMap(params1), constant(1.0), gaussian_input(1), [0.1 + 0.08j], 1.0)
    assert abs(v - np.exp(-(0.1 + 0.08j) ** 2)) < 1e-9


def test_contour_without_margin_raises(params1):
    with pytest.raises(DecayError):
        integrate_contour(ContourMap(params1), constant(1.0), gaussian_input(1), [0.1 + 0.1j], 1.0)


def test_convergence_with_order(params1):
    c = ContourMap(params1)
    x = [0.3 + 0.05j]
    exact = np.exp(-(0.3 + 0.05j) ** 2)
    errs = [abs(integrate_contour(c, constant(1.0), gaussian_input(1), x, 1.0, spec=QuadratureSpec(order=m)) - exact)
            for m in (6, 8, 10)]
    assert errs[2] < errs[1] < errs[0]


def test_summation_is_partition_independent(params1):
    q = ContourQuadrature(ContourMap(params1))
    pts = np.array([[0.1 + 0.02j], [0.1 - 0.03j], [-0.2 + 0.01j]])
    together, _ = q.evaluate(monomial([1]), sine_input(), pts, 1.0)
    again, _ = q.evaluate(monomial([1]), sine_input(), pts, 1.0)
    assert np.array_equal(together, again)
    # points with equal Re x are summed in the same order whether grouped or not
    pair, _ = q.evaluate(monomial([1]), sine_input(), pts[:2], 1.0)
    assert np.array_equal(pair, together[:2])
    alone = [q.evaluate(monomial([1]), sine_input(), pts[i:i + 1], 1.0)[0][0] for i in range(3)]
    assert np.max(np.abs(together - np.array(alone))) < 1e-14


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_linear_in_u_and_p(a, b):
    from psicontour.geometry import DeformationParams

    params = DeformationParams(1.0, 0.6, 0.8, 0.1, 0.09, 0.5, 2.0)
    q = ContourQuadrature(ContourMap(params))
    x = np.array([[0.2 + 0.03j]])
    u1, u2 = gaussian_input(1), resolvent_input(1)
    p1, p2 = resolvent(1), constant(1.0)
    lhs = q.evaluate(p1, u1.scaled(a) + u2.scaled(b), x, 1.0)[0][0]
    rhs = a * q.evaluate(p1, u1, x, 1.0)[0][0] + b * q.evaluate(p1, u2, x, 1.0)[0][0]
    scale = max(abs(a), abs(b), 1e-3) * max(abs(q.evaluate(p1, u1, x, 1.0)[0][0]), 1e-3)
    assert abs(lhs - rhs) < 1e-12 * max(scale, abs(lhs))
    lhs = q.evaluate(p1.__mul__(constant(a)) + p2.__mul__(constant(b)), u1, x, 1.0)[0][0]
    rhs = a * q.evaluate(p1, u1, x, 1.0)[0][0] + b * q.evaluate(p2, u1, x, 1.0)[0][0]
    assert abs(lhs - rhs) < 1e-12 * max(abs(a) + abs(b), 1e-3)


def test_gaussian_bound_at_evaluated_nodes(params1):
    c = ContourMap(params1)
    rng = np.random.default_rng(3)
    y = rng.uniform(-1.5, 1.5, (20000, 1))
    xi = rng.choice([-1, 1], (20000, 1)) * rng.uniform(0, 300, (20000, 1))
    _, z = c.components(c.t0(), y, xi)
    lam = 0.3
    lhs = np.real(-(lam**2) * np.sum(z * z, axis=-1))
    rhs = -0.5 * lam**2 * np.sum(z.real**2, axis=-1)
    assert np.all(lhs <= rhs + 1e-12)


def test_n3_not_implemented():
    from psicontour.geometry import DeformationParams

    params = DeformationParams(1.0, 0.6, 0.8, 0.1, 0.09, 0.5, 2.0, dimension=3)
    with pytest.raises(NotImplementedError):
        integrate_contour(ContourMap(params), constant(1.0, 3), gaussian_input(3), [0.0, 0.0, 0.0], 1.0)


def test_regularized_values_match_heat_smoothing_oracle(params1):
    # e^{-lam^2 xi^2} in frequency is a Gaussian convolution in space; near the
    # edge of the bump the difference sequence is not monotone for this schedule
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    x = 0.59

    def smoothed(lam):
        def g(s):
            bump = mp.e ** (-1 / (1 - s * s)) if abs(s) < 1 else mp.mpf(0)
            return bump * mp.e ** (-((x - s) ** 2) / (4 * lam * lam)) / (2 * lam * mp.sqrt(mp.pi))

        return float(mp.quad(g, mp.linspace(-1, 1, 41)))

    lams = RegularizationSchedule().lambda_values
    q = ContourQuadrature(ContourMap(params1), QuadratureSpec())
    vals = np.array([q.evaluate(resolvent(1), resolvent_input(1), [[x]], 0.0, lam)[0][0] for lam in lams])
    ref = np.array([smoothed(mp.mpf(lam)) for lam in lams])
    assert np.max(np.abs(vals - ref)) < 1e-8
    assert np.max(np.abs(np.diff(vals) - np.diff(ref))) < 1e-10
    d = np.abs(np.diff(ref))
    assert d[2] > d[1]
