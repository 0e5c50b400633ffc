import numpy as np
import pytest

from psicontour.geometry import DomainError, Wedge
from psicontour.symbols import (
    AnalyticSymbol,
    bracket,
    bracket_power,
    check_real_symbol_estimate,
    check_wedge_bound,
    constant,
    eval_symbol,
    holomorphy_residual,
    modulated,
    monomial,
    resolvent,
    symbol_from_spec,
    wedge_samples,
)


def test_eval_examples():
    x = np.array([0.1 + 0.02j])
    assert eval_symbol(constant(1.0), x, [5 + 1j]) == 1
    assert eval_symbol(monomial([1]), x, [3 + 1j]) == 3 + 1j
    assert eval_symbol(resolvent(1), x, [10.0]) == pytest.approx(1 / 101)


def test_eval_rejects_outside_wedge():
    with pytest.raises(DomainError):
        eval_symbol(resolvent(1), [0.0], [1 + 2j])
    with pytest.raises(DomainError):
        eval_symbol(resolvent(1), [0.0], [10 + 1j], Wedge(1.5, 2.0))


def test_eval_rejects_x_outside_polydisc():
    p = AnalyticSymbol(lambda x, z: np.ones(z.shape[:-1]), 0.0, 1, "c", np.inf, 0.5, 0.1)
    with pytest.raises(DomainError):
        eval_symbol(p, [0.6], [3.0])
    with pytest.raises(DomainError):
        eval_symbol(p, [0.1 + 0.2j], [3.0])


def test_bracket():
    assert bracket(np.array([3.0, 4.0])) == pytest.approx(np.sqrt(26))


def test_real_slice_agrees_with_eval(rng):
    p = modulated(resolvent(2), "exp", [0.3, -0.2])
    x = rng.uniform(-0.5, 0.5, (50, 2))
    xi = rng.uniform(-20, 20, (50, 2))
    assert np.array_equal(eval_symbol(p, x, xi), p(x, xi))


@pytest.mark.parametrize("p", [constant(2.0, 2), monomial([1, 2]), resolvent(2), bracket_power(1.5, 2),
                               modulated(resolvent(2), "poly", terms=[(1.0, (1, 0)), (2.0, (0, 0))])])
def test_library_holomorphic_on_wedge(p, rng):
    _, zeta = wedge_samples(2, 0.5, 2.0, 200.0, 1000, rng)
    x = rng.uniform(-0.3, 0.3, (1000, 2)) + 1j * rng.uniform(-0.05, 0.05, (1000, 2))
    assert np.max(holomorphy_residual(p, x, zeta)) < 1e-6


def test_library_orders():
    assert constant(3.0).order == 0
    assert constant(3.0).wedge_constant == 3.0
    assert monomial([2, 1]).order == 3
    assert resolvent(1).order == -2
    assert (resolvent(1) * monomial([1])).order == -1


def test_product_and_sum_evaluate_pointwise():
    z = np.array([[4 + 1j]])
    x = np.zeros((1, 1))
    assert (resolvent(1) * monomial([1]))(x, z) == pytest.approx((4 + 1j) / (1 + (4 + 1j) ** 2))
    assert (resolvent(1) + constant(1.0))(x, z) == pytest.approx(1 / (1 + (4 + 1j) ** 2) + 1)


def test_real_estimate_constant_and_identity():
    r = check_real_symbol_estimate(constant(1.0), cap=2)
    assert r.passed and r.details["sup"] <= 1 + 1e-12
    r = check_real_symbol_estimate(monomial([1]), cap=1)
    assert r.passed
    assert max(r.details["decade_sups"]["alpha=(1,),beta=(0,)"]) == pytest.approx(1.0, rel=1e-6)


def test_real_estimate_flags_gaussian_growth():
    p = AnalyticSymbol(lambda x, z: np.exp(z[..., 0] ** 2) * np.ones(x.shape[:-1]), 0.0, 1, "exp(xi^2)")
    r = check_real_symbol_estimate(p, cap=0, decades=5)
    assert not r.passed


def test_real_estimate_resolvent():
    assert check_real_symbol_estimate(resolvent(1), cap=3).passed


def test_wedge_bound_constant_symbol():
    r = check_wedge_bound(constant(1.0))
    assert r.passed and r.details["constant"] == pytest.approx(1.0)


def test_wedge_bound_resolvent_against_lower_bound():
    r = check_wedge_bound(resolvent(1), epsilon=0.5, R=2.0, count=20000)
    assert r.passed
    # |1 + z^2| >= Re(1 + z^2) = 1 + a^2 (1 - tau^2) >= 1 + 0.75 a^2 on the wedge, so
    # <a>^2 / |1 + z^2| <= (1 + a^2) / (1 + 0.75 a^2) < 4/3
    assert 0.99 < r.details["constant"] < 4.0 / 3.0


def test_wedge_bound_flags_exponential():
    p = AnalyticSymbol(lambda x, z: np.exp(1j * z[..., 0]) * np.ones(x.shape[:-1]), 0.0, 1, "exp(i zeta)")
    r = check_wedge_bound(p, one_sided="negative")
    assert not r.passed


def test_symbol_from_spec_roundtrip():
    for spec in [{"kind": "constant", "params": {"c": [1.0, 2.0]}}, {"kind": "monomial", "params": {"alpha": [1]}},
                 {"kind": "resolvent"}, {"kind": "bracket_power", "params": {"d": -1}},
                 {"kind": "modulated", "params": {"base": {"kind": "resolvent"}, "factor": "exp", "k": [1.0]}}]:
        p = symbol_from_spec(spec, 1)
        assert np.isfinite(p(np.zeros((1, 1)), np.array([[3.0 + 0.5j]]))).all()
    with pytest.raises(ValueError):
        symbol_from_spec({"kind": "nope"})
