import numpy as np
import pytest

from psicontour.evaluator import (
    extend,
    extend_tube,
    kernel_K,
    kernel_values,
    op_deformed,
    op_distribution,
    op_standard,
    tube_params,
)
from psicontour.geometry import Ball, DeformationParams, DomainError, TubeDomain
from psicontour.inputs import (
    CompactDistribution,
    DiracTerm,
    gaussian_extension,
    gaussian_input,
    resolvent_input,
    sine_input,
    standard_bump,
    zero_input,
)
from psicontour.quadrature import DecayError, QuadratureSpec
from psicontour.symbols import constant, modulated, monomial, resolvent

E2 = 0.5 * np.exp(-2.0)


def test_op_standard_identity():
    r = op_standard(constant(1.0), gaussian_input(1), [0.3])
    assert abs(r.value - np.exp(-0.09)) < 1e-8
    assert not r.diverging


def test_op_standard_derivative_oracle():
    r = op_standard(monomial([1]), sine_input(), [0.0])
    assert abs(r.value - (-1j)) < 1e-8


def test_op_standard_resolvent_oracle():
    r = op_standard(resolvent(1), resolvent_input(1), [0.0])
    assert r.direct
    assert abs(r.value - np.exp(-1.0)) < 1e-8


def test_op_standard_rejects_complex_point():
    with pytest.raises(DomainError):
        op_standard(constant(1.0), gaussian_input(1), [0.1j])


@pytest.mark.parametrize("t", [0.25, 0.5, 0.75, 1.0])
def test_real_slice_consistency(params1, t):
    for p, u in [(resolvent(1), resolvent_input(1)), (monomial([1]), sine_input())]:
        ref = op_standard(p, u, [0.2]).value
        v, _ = op_deformed(p, u, params1, t, [0.2])
        assert abs(v - ref) < 1e-8 * max(1.0, abs(ref))


def test_op_deformed_identity_extension(params1):
    x = 0.1 + 0.05j
    v, d = op_deformed(constant(1.0), gaussian_input(1), params1, 1.0, [x])
    assert abs(v - np.exp(-x * x)) < 1e-10
    assert d.decay_margin == pytest.approx(0.04)


def test_op_deformed_zero_input(params1):
    assert op_deformed(constant(1.0), zero_input(1), params1, 1.0, [0.1 + 0.05j])[0] == 0


def test_op_deformed_preconditions(params1):
    with pytest.raises(DomainError):
        op_deformed(constant(1.0), gaussian_input(1), params1, 1.0, [0.65])
    with pytest.raises(DomainError):
        op_deformed(constant(1.0), gaussian_input(1), params1, 0.5, [0.05j])
    with pytest.raises(DomainError):
        op_deformed(resolvent(1), gaussian_input(1), params1.__class__(**{**params1.as_dict(), "epsilon": 1.5,
                                                                             "delta_prime": 0.09}), 1.0, [0.0])


def test_extend_derivative_extension(params1):
    xs = np.array([[0.1 + 0.03j], [-0.3 - 0.05j]])
    res = extend(monomial([1]), sine_input(), params1, xs)
    exact = -1j * np.cos(xs[:, 0])
    assert np.max(np.abs(res.values - exact)) < 1e-9
    assert np.all(res.err_estimate < 1e-6)
    assert res.lam_history == ["lambda=0 direct"] * 2


def test_extend_modulated_symbol(params1):
    # p = exp(x) zeta: Op(p)u = exp(x) (-i u')
    p = modulated(monomial([1]), "exp", [1.0])
    x = np.array([[0.2 + 0.04j]])
    res = extend(p, sine_input(), params1, x, estimate_error=False)
    assert abs(res.values[0] - np.exp(x[0, 0]) * (-1j) * np.cos(x[0, 0])) < 1e-9
    assert np.isnan(res.err_estimate[0])


def test_extend_real_grid_matches_reference(params1):
    xs = np.array([[-0.4], [0.0], [0.35]])
    res = extend(resolvent(1), resolvent_input(1), params1, xs, estimate_error=False)
    ref = [op_standard(resolvent(1), resolvent_input(1), x).value for x in xs]
    assert np.max(np.abs(res.values - ref)) < 1e-8


def test_extend_reports_bad_points_and_continues(params1):
    xs = np.array([[0.1 + 0.02j], [0.7], [0.1 + 0.095j]])
    res = extend(constant(1.0), gaussian_input(1), params1, xs, estimate_error=False)
    assert set(res.errors) == {1, 2}
    assert np.isnan(res.values[1]) and np.isnan(res.values[2])
    assert abs(res.values[0] - gaussian_extension(xs[0])) < 1e-10


def test_extend_threads_reproducible(params1):
    xs = (np.linspace(-0.5, 0.5, 3)[:, None] + 1j * np.linspace(-0.05, 0.05, 2)[None, :]).reshape(-1, 1)
    a = extend(constant(1.0), gaussian_input(1), params1, xs, threads=2, estimate_error=False)
    b = extend(constant(1.0), gaussian_input(1), params1, xs, threads=2, estimate_error=False)
    c = extend(constant(1.0), gaussian_input(1), params1, xs, threads=1, estimate_error=False)
    assert np.array_equal(a.values, b.values)
    assert np.max(np.abs(a.values - c.values)) < 1e-14


def test_kernel_examples(params1):
    assert abs(kernel_K(resolvent(1), params1, None, [0.0], [2.0]) - E2) < 1e-10
    x = 0.1 + 0.05j
    assert abs(kernel_K(resolvent(1), params1, None, [x], [2.0]) - 0.5 * np.exp(x - 2)) < 1e-10


def test_kernel_vanishes_where_chi_is_one(params1):
    assert kernel_K(resolvent(1), params1, None, [0.1 + 0.05j], [0.3]) == 0
    assert kernel_K(resolvent(1), params1, None, [0.0], [0.92]) == 0


def test_kernel_decay_margin_error(params1):
    with pytest.raises(DecayError):
        kernel_K(resolvent(1), params1, None, [0.1j], [2.0])


def test_kernel_t_invariance(params1):
    a = kernel_K(resolvent(1), params1, None, [0.1], [1.5], t=0.5)
    b = kernel_K(resolvent(1), params1, None, [0.1], [1.5], t=1.0)
    assert abs(a - b) < 1e-9 * abs(b)


def test_kernel_decay_in_y(params1):
    ys = np.linspace(3, 30, 28)[:, None]
    K = kernel_values(resolvent(1), params1, None, [0.0], ys)
    assert np.max(np.abs(K - 0.5 * np.exp(-ys[:, 0]))) < 1e-14
    for N in (2, 4, 8):
        weighted = np.abs(K) * (1 + ys[:, 0] ** 2) ** (N / 2)
        assert weighted[-1] < weighted[0]


def test_kernel_n2(params2):
    # fundamental solution of 1 - Laplace in the plane: K0(|x - y|) / (2 pi)
    from scipy.special import k0

    y = np.array([1.6, 0.5])
    x = np.array([0.1, -0.2])
    v = kernel_K(resolvent(2), params2, None, x, y, spec=QuadratureSpec.coarse(order=12, n_theta=48))
    ref = k0(np.linalg.norm(x - y)) / (2 * np.pi)
    assert abs(v - ref) < 1e-6 * ref


@pytest.mark.parametrize("x", [0.0, 0.3, -0.3])
def test_distribution_dirac(params1, x):
    d = CompactDistribution(None, (DiracTerm((2.0,)),), 1)
    v = op_distribution(resolvent(1), d, params1, [x])
    assert abs(v - 0.5 * np.exp(-abs(x - 2))) < 1e-9


def test_distribution_dirac_derivative(params1):
    d = CompactDistribution(None, (DiracTerm((2.0,), (1,), 1.0),), 1)
    assert abs(op_distribution(resolvent(1), d, params1, [0.0]) - E2) < 1e-7


def test_distribution_smooth_only_equals_op_deformed(params1):
    u = resolvent_input(1)
    d = CompactDistribution(u, (), 1)
    x = [0.2 + 0.03j]
    v = op_distribution(resolvent(1), d, params1, x)
    ref, _ = op_deformed(resolvent(1), u, params1, 1.0, x)
    exact = standard_bump(np.array(x))
    assert abs(v - exact) < 1e-10
    assert abs(ref - exact) < 1e-8
    assert abs(v - ref) < 1e-8


def test_distribution_smooth_beyond_cutoff(params1):
    # gaussian input supported up to 1.5 > r: the (1 - chi) part goes through the kernel
    u = gaussian_input(1)
    d = CompactDistribution(u, (), 1)
    v = op_distribution(constant(1.0) * resolvent(1), d, params1, [0.1])
    ref = op_standard(resolvent(1), u, [0.1]).value
    assert abs(v - ref) < 1e-7


def test_distribution_linearity(params1):
    d1 = CompactDistribution(resolvent_input(1), (DiracTerm((2.0,)),), 1)
    d2 = CompactDistribution(None, (DiracTerm((-1.5,), (1,), 2.0),), 1)
    both = CompactDistribution(resolvent_input(1), d1.diracs + d2.scaled(3 - 1j).diracs, 1)
    x = [0.05 + 0.02j]
    lhs = op_distribution(resolvent(1), both, params1, x)
    rhs = op_distribution(resolvent(1), d1, params1, x) + (3 - 1j) * op_distribution(resolvent(1), d2, params1, x)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))


def test_distribution_rejects_dirac_inside(params1):
    d = CompactDistribution(None, (DiracTerm((0.5,)),), 1)
    with pytest.raises(ValueError):
        op_distribution(resolvent(1), d, params1, [0.0])


def test_tube_examples():
    U = TubeDomain.interval(-1.0, 1.0, 0.5)
    v, _, choice = extend_tube(constant(1.0), gaussian_input(1), U, 0.5, [0.4j])
    assert abs(v - np.exp(0.16)) < 1e-9
    assert choice.params.delta_prime > 0.4
    with pytest.raises(DomainError, match="point outside guaranteed domain"):
        extend_tube(constant(1.0), gaussian_input(1), U, 0.5, [0.9 + 0.2j])


def test_tube_real_point_matches_reference():
    U = TubeDomain.interval(-1.0, 1.0, 0.5)
    v, _, _ = extend_tube(monomial([1]), sine_input(), U, 0.5, [0.2])
    assert abs(v - op_standard(monomial([1]), sine_input(), [0.2]).value) < 1e-8


def test_tube_translation_off_origin():
    # p = 1 and an entire-on-the-plateau input: value is the extension at x
    U = TubeDomain.interval(-0.5, 1.0, 0.5)
    x = 0.3 + 0.2j
    u = gaussian_input(1, plateau=1.6, outer=2.0)
    v, _, choice = extend_tube(constant(1.0), u, U, 0.5, [x])
    assert abs(v - np.exp(-x * x)) < 1e-9
    assert choice.center[0] == pytest.approx(0.3)


def test_tube_params_shrink():
    U = TubeDomain((Ball((0.0,), 1.0),))
    c = tube_params(U, 0.5, np.array([0.45j]))
    assert c.shrink < 0.5
    assert 0.45 < c.params.delta_prime < 0.5 * (1 - c.shrink)
    assert c.params.slope < 0.5


def test_bump_extension_closed_form():
    w = np.array([[0.3 + 0.05j]])
    assert standard_bump(w)[0] == pytest.approx(np.exp(-1 / (1 - (0.3 + 0.05j) ** 2)))


def test_radial_partition_sums_to_full(params1):
    spec = QuadratureSpec()
    x = [0.1 + 0.04j]
    full, d = op_deformed(resolvent(1), resolvent_input(1), params1, 1.0, x, spec)
    cuts = [0.0, 3.0, 20.0, d.rho_max]
    parts = [
        op_deformed(resolvent(1), resolvent_input(1), params1, 1.0, x, spec.with_(rho_window=(a, b), rho_max=d.rho_max))[0]
        for a, b in zip(cuts[:-1], cuts[1:])
    ]
    assert abs(sum(parts) - full) < 1e-12
