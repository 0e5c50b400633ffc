"""Symbols holomorphic in x on a polydisc and in the frequency on a wedge.

Every symbol is a vectorized callable ``p(x, zeta)`` taking complex arrays of
shape (..., n). The library covers negative, zero and positive orders and
x-dependence; each entry has a closed form for ``Op(p)`` on suitable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from .geometry import DomainError, Wedge, wedge_contains
from .reports import CheckReport


def bracket(xi):
    """Japanese bracket ``(1 + |xi|^2)^(1/2)`` over the last axis (real part only)."""
    xi = np.asarray(xi)
    re = np.real(xi)
    return np.sqrt(1.0 + np.sum(re * re, axis=-1))


@dataclass(frozen=True)
class AnalyticSymbol:
    """An order-``order`` symbol with declared holomorphy data.

    ``epsilon_max`` is the (open) wedge aperture on which ``func`` is the
    holomorphic extension; ``x_radius``/``x_imag_radius`` bound the polydisc
    ``B(0, r0) + i B(0, delta0)`` for the x-variable.
    """

    func: Callable
    order: float
    dimension: int = 1
    name: str = "symbol"
    epsilon_max: float = np.inf
    x_radius: float = np.inf
    x_imag_radius: float = np.inf
    wedge_constant: float | None = None
    spec: dict = field(default_factory=dict, compare=False)

    def __call__(self, x, zeta):
        return self.func(np.asarray(x, dtype=complex), np.asarray(zeta, dtype=complex))

    def x_independent(self):
        return bool(self.spec.get("x_independent", False))

    def __mul__(self, other):
        if isinstance(other, AnalyticSymbol):
            f, g = self.func, other.func
            return AnalyticSymbol(
                lambda x, z: f(x, z) * g(x, z),
                self.order + other.order,
                self.dimension,
                f"({self.name})*({other.name})",
                min(self.epsilon_max, other.epsilon_max),
                min(self.x_radius, other.x_radius),
                min(self.x_imag_radius, other.x_imag_radius),
                None,
                {"kind": "product", "factors": [self.spec, other.spec]},
            )
        c = complex(other)
        f = self.func
        wc = None if self.wedge_constant is None else abs(c) * self.wedge_constant
        return AnalyticSymbol(
            lambda x, z: c * f(x, z), self.order, self.dimension, f"{c}*({self.name})",
            self.epsilon_max, self.x_radius, self.x_imag_radius, wc,
            {"kind": "scaled", "factor": [c.real, c.imag], "base": self.spec},
        )

    __rmul__ = __mul__

    def __add__(self, other):
        f, g = self.func, other.func
        return AnalyticSymbol(
            lambda x, z: f(x, z) + g(x, z),
            max(self.order, other.order),
            self.dimension,
            f"{self.name}+{other.name}",
            min(self.epsilon_max, other.epsilon_max),
            min(self.x_radius, other.x_radius),
            min(self.x_imag_radius, other.x_imag_radius),
            None,
            {"kind": "sum", "terms": [self.spec, other.spec]},
        )


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def constant(c=1.0, n=1):
    c = complex(c)
    return AnalyticSymbol(
        lambda x, z: np.full(np.broadcast_shapes(x.shape, z.shape)[:-1], c),
        0.0, n, f"const({c:g})", np.inf, np.inf, np.inf, abs(c),
        {"kind": "constant", "params": {"c": [c.real, c.imag]}, "x_independent": True},
    )


def monomial(alpha, n=None):
    """``zeta^alpha`` for a multi-index ``alpha``."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    n = len(alpha) if n is None else n
    if len(alpha) != n:
        raise ValueError("multi-index length must equal the dimension")

    def f(x, z):
        out = np.ones(np.broadcast_shapes(x.shape, z.shape)[:-1], dtype=complex)
        for j, a in enumerate(alpha):
            if a:
                out = out * z[..., j] ** a
        return out

    return AnalyticSymbol(
        f, float(sum(alpha)), n, f"zeta^{alpha}", np.inf, np.inf, np.inf, None,
        {"kind": "monomial", "params": {"alpha": list(alpha)}, "x_independent": True},
    )


def resolvent(n=1):
    """``(1 + zeta.zeta)^(-1)``; pole-free on any wedge of aperture < 1."""

    def f(x, z):
        return 1.0 / (1.0 + _dot(z, z)) * np.ones(x.shape[:-1])

    return AnalyticSymbol(
        f, -2.0, n, "resolvent", 1.0, np.inf, np.inf, None,
        {"kind": "resolvent", "params": {}, "x_independent": True},
    )


def bracket_power(d, n=1):
    """``(1 + zeta.zeta)^(d/2)`` with the principal branch.

    On a wedge of aperture < 1 the base has positive real part, so the
    principal power is holomorphic there.
    """
    d = float(d)

    def f(x, z):
        return (1.0 + _dot(z, z)) ** (0.5 * d) * np.ones(x.shape[:-1])

    return AnalyticSymbol(
        f, d, n, f"bracket^{d:g}", 1.0, np.inf, np.inf, None,
        {"kind": "bracket_power", "params": {"d": d}, "x_independent": True},
    )


def modulated(base: AnalyticSymbol, factor="exp", k=None, terms=None):
    """``a(x) * base(x, zeta)`` with ``a`` entire.

    ``factor="exp"``: ``a(x) = exp(k.x)``. ``factor="poly"``: ``a(x) =
    sum c * x^beta`` over ``terms = [(c, beta), ...]``.
    """
    n = base.dimension
    if factor == "exp":
        kv = np.asarray(k if k is not None else [1.0] * n, dtype=complex)

        def a(x):
            return np.exp(_dot(x, kv))

        params = {"factor": "exp", "k": [complex(v).real for v in kv]}
    elif factor == "poly":
        tl = [(complex(c), tuple(int(b) for b in beta)) for c, beta in (terms or [(1.0, (0,) * n)])]

        def a(x):
            out = np.zeros(x.shape[:-1], dtype=complex)
            for c, beta in tl:
                term = np.full(x.shape[:-1], c)
                for j, b in enumerate(beta):
                    if b:
                        term = term * x[..., j] ** b
                out = out + term
            return out

        params = {"factor": "poly", "terms": [[c.real, list(b)] for c, b in tl]}
    else:
        raise ValueError(f"unknown modulation factor {factor!r}")
    g = base.func
    params["base"] = base.spec
    return AnalyticSymbol(
        lambda x, z: a(x) * g(x, z), base.order, n, f"{factor}(x)*{base.name}",
        base.epsilon_max, base.x_radius, base.x_imag_radius, None,
        {"kind": "modulated", "params": params, "x_independent": False},
    )


def symbol_from_spec(spec, n=1):
    """Build a library symbol from ``{"kind": ..., "params": {...}}``."""
    kind = spec.get("kind")
    params = spec.get("params", {}) or {}
    if kind == "constant":
        c = params.get("c", 1.0)
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        return constant(c, n)
    if kind == "monomial":
        return monomial(params.get("alpha", [1] * n), n)
    if kind == "resolvent":
        return resolvent(n)
    if kind == "bracket_power":
        return bracket_power(params["d"], n)
    if kind == "modulated":
        base = symbol_from_spec(params.get("base", {"kind": "constant"}), n)
        return modulated(base, params.get("factor", "exp"), params.get("k"), params.get("terms"))
    raise ValueError(f"unknown symbol kind {kind!r}")


def eval_symbol(p: AnalyticSymbol, x, zeta, wedge: Wedge | None = None):
    """Evaluate ``p`` with domain checks.

    ``zeta`` must be real or lie in ``wedge`` (default: the aperture declared by
    the symbol, truncation 0); ``x`` must lie in the declared polydisc.
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    if np.any(np.linalg.norm(x.real, axis=-1) >= p.x_radius) or np.any(
        np.linalg.norm(x.imag, axis=-1) >= p.x_imag_radius
    ):
        raise DomainError("x outside the symbol's polydisc of holomorphy")
    real = np.all(zeta.imag == 0, axis=-1)
    if wedge is None:
        eps = p.epsilon_max
        inside = np.linalg.norm(zeta.imag, axis=-1) < eps * np.linalg.norm(zeta.real, axis=-1)
    else:
        if wedge.epsilon > p.epsilon_max:
            raise DomainError(
                f"wedge aperture {wedge.epsilon} exceeds the symbol's holomorphy aperture {p.epsilon_max}"
            )
        inside = wedge_contains(wedge, zeta)
    if not np.all(real | inside):
        raise DomainError("zeta is neither real nor inside the wedge of holomorphy")
    return p(x, zeta)


def holomorphy_residual(p: AnalyticSymbol, x, zeta, rel_step=1e-5):
    """Discrete Cauchy-Riemann residual ``max_j |d p / d conj(zeta_j)| / |p|``."""
    x = np.asarray(x, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    n = zeta.shape[-1]
    f0 = np.abs(p(x, zeta))
    h = rel_step * np.maximum(np.linalg.norm(zeta, axis=-1), 1.0)
    worst = np.zeros(zeta.shape[:-1])
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        hj = h[..., None] * e
        da = (p(x, zeta + hj) - p(x, zeta - hj)) / (2 * h)
        db = (p(x, zeta + 1j * hj) - p(x, zeta - 1j * hj)) / (2 * h)
        worst = np.maximum(worst, np.abs(0.5 * (da + 1j * db)) / np.maximum(f0, 1e-300))
    return worst


# --------------------------------------------------------------------------
# sampled symbol estimates


def _multi_indices(n, cap):
    for tot in range(cap + 1):
        for a in product(range(tot + 1), repeat=n):
            if sum(a) == tot:
                yield a


def _diff_weights(k):
    return [(-1) ** m * math.comb(k, m) for m in range(k + 1)], [k / 2 - m for m in range(k + 1)]


def _mixed_derivative(f, x, xi, beta, alpha, hx, hxi):
    """Nested central differences ``d_x^beta d_xi^alpha f`` at real points.

    ``hx`` and ``hxi`` are scalars or arrays over the leading axes of ``x``.
    """
    n = x.shape[-1]
    hx = np.broadcast_to(np.asarray(hx, dtype=float), x.shape[:-1])
    hxi = np.broadcast_to(np.asarray(hxi, dtype=float), xi.shape[:-1])
    stencils = []
    for j in range(n):
        if beta[j]:
            w, o = _diff_weights(beta[j])
            stencils.append(("x", j, w, o, beta[j]))
        if alpha[j]:
            w, o = _diff_weights(alpha[j])
            stencils.append(("xi", j, w, o, alpha[j]))
    if not stencils:
        return f(x, xi)
    total = 0.0
    for combo in product(*[range(len(s[2])) for s in stencils]):
        dx = np.zeros_like(x)
        dxi = np.zeros_like(xi)
        coef = 1.0
        for (var, j, w, o, k), m in zip(stencils, combo):
            coef = coef * w[m]
            if var == "x":
                dx[..., j] += o[m] * hx
            else:
                dxi[..., j] += o[m] * hxi
        total = total + coef * f(x + dx, xi + dxi)
    scale = 1.0
    for var, j, w, o, k in stencils:
        scale = scale * (hx if var == "x" else hxi) ** k
    return total / scale


def _decade_directions(n, per_decade, rng):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    v = rng.standard_normal((per_decade, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _growth_flag(decade_sups, start=4, tol=0.05):
    sups = np.asarray(decade_sups, dtype=float)
    if not np.all(np.isfinite(sups)):
        return True
    for k in range(start + 1, len(sups)):
        if sups[k] > (1 + tol) * np.max(sups[start:k]) and sups[k] > 1e-300:
            return True
    return False


def check_real_symbol_estimate(p: AnalyticSymbol, cap=3, x_samples=None, decades=11,
                               per_decade=8, seed=0):
    """Sampled sup of ``<xi>^(|alpha|-d) |d_x^beta d_xi^alpha p|`` per dyadic decade.

    A (alpha, beta) pair is flagged when a decade beyond k = 4 exceeds every
    earlier decade (from k = 4 on) by more than 5%, or when a value is not
    finite. Heuristic: a finite sample can never prove the estimate.
    """
    rng = np.random.default_rng(seed)
    n = p.dimension
    if x_samples is None:
        x_samples = np.linspace(-0.5, 0.5, 3)[:, None] * np.ones(n)
    x_samples = np.asarray(x_samples, dtype=float).reshape(-1, n)
    dirs = _decade_directions(n, per_decade, rng)
    f = lambda xx, zz: p(xx.astype(complex), zz.astype(complex))  # noqa: E731
    sups = {}
    violations = []
    worst = 0.0
    count = 0
    with np.errstate(all="ignore"):
        for alpha in _multi_indices(n, cap):
            for beta in _multi_indices(n, cap - sum(alpha)):
                if any(beta) and p.x_independent():
                    # exactly zero; differencing would only measure rounding noise
                    sups[f"alpha={alpha},beta={beta}"] = [0.0] * decades
                    continue
                per = []
                for k in range(decades):
                    mags = np.geomspace(2.0**k, 2.0 ** (k + 1), 4)
                    xi = (mags[:, None, None] * dirs[None, :, :]).reshape(-1, n)
                    X = np.repeat(x_samples, len(xi), axis=0)
                    XI = np.tile(xi, (len(x_samples), 1))
                    br = bracket(XI)
                    val = _mixed_derivative(f, X, XI, beta, alpha, 1e-3, 1e-4 * br)
                    w = br ** (sum(alpha) - p.order) * np.abs(val)
                    count += w.size
                    per.append(float(np.max(w)) if np.all(np.isfinite(w)) else np.inf)
                key = f"alpha={alpha},beta={beta}"
                sups[key] = per
                if _growth_flag(per):
                    violations.append(key)
                worst = max(worst, max(per))
    return CheckReport(
        name=f"real_symbol_estimate[{p.name}]",
        passed=not violations,
        margin=0.0 if not violations else -1.0,
        samples=count,
        location=violations[:1] or None,
        seed=seed,
        details={"decade_sups": sups, "violations": violations, "sup": worst},
    )


def wedge_samples(n, epsilon, R, s_max, count, rng, one_sided=None):
    """Points ``s * omega * (1 + i tau)`` with ``|tau| < epsilon`` and ``R <= s <= s_max``."""
    s = np.exp(rng.uniform(np.log(R * (1 + 1e-12)), np.log(s_max), count))
    tau = rng.uniform(-1.0, 1.0, count) * epsilon * (1 - 1e-9)
    if one_sided == "negative":
        tau = -np.abs(tau)
    elif one_sided == "positive":
        tau = np.abs(tau)
    if n == 1:
        omega = rng.choice([-1.0, 1.0], size=(count, 1))
    else:
        omega = rng.standard_normal((count, n))
        omega /= np.linalg.norm(omega, axis=1, keepdims=True)
    return s, omega * (s * (1 + 1j * tau))[:, None]


def check_wedge_bound(p: AnalyticSymbol, K=None, epsilon=0.5, R=2.0, s_max=2.0**11,
                      count=4000, seed=0, one_sided=None):
    """Sampled ``sup <Re zeta>^(-d) |p(x, zeta)|`` over ``K x W_epsilon``.

    Returns a report whose ``details["constant"]`` is the empirical constant;
    fails when per-decade sups keep growing (same heuristic as the real check).
    """
    rng = np.random.default_rng(seed)
    n = p.dimension
    if K is None:
        K = np.zeros((1, n), dtype=complex)
    K = np.asarray(K, dtype=complex).reshape(-1, n)
    s, zeta = wedge_samples(n, epsilon, R, s_max, count, rng, one_sided)
    vals = []
    with np.errstate(all="ignore"):
        for x in K:
            v = np.abs(p(np.broadcast_to(x, zeta.shape), zeta)) * bracket(zeta.real) ** (-p.order)
            vals.append(v)
    v = np.max(np.array(vals), axis=0)
    edges = 2.0 ** np.arange(math.floor(math.log2(R)), math.ceil(math.log2(s_max)) + 1)
    per = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (s >= lo) & (s < hi)
        if np.any(m):
            per.append(float(np.max(v[m])) if np.all(np.isfinite(v[m])) else np.inf)
    grows = _growth_flag(per, start=min(4, max(len(per) - 3, 0)))
    const = float(np.max(v)) if np.all(np.isfinite(v)) else np.inf
    imax = int(np.argmax(np.where(np.isfinite(v), v, np.inf)))
    return CheckReport(
        name=f"wedge_bound[{p.name}]",
        passed=not grows,
        margin=0.0 if not grows else -1.0,
        samples=int(v.size * len(K)),
        location=zeta[imax].tolist(),
        seed=seed,
        details={"constant": const, "decade_sups": per, "epsilon": epsilon, "R": R},
    )
