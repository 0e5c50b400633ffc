"""Evaluation of Op(p)u on the real axis, on deformed contours, and its holomorphic extension."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contour import ContourMap
from .cutoffs import SmoothBump, default_cutoffs
from .geometry import DeformationParams, DomainError, TubeDomain, validate_params
from .inputs import CompactDistribution, TestFunction
from .quadrature import (
    TWO_PI,
    ContourQuadrature,
    DecayError,
    QuadratureSpec,
    RegularizationSchedule,
    _directions,
    choose_truncation,
    composite_rule,
    exp_legendre_moments,
    gauss_legendre,
    legendre_transform,
    refine,
    regularized_limit,
)


def _point(x, n):
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if x.shape != (n,):
        raise ValueError(f"expected a point of dimension {n}, got shape {x.shape}")
    return x


def reference_params(n=1, R=2.0):
    """A parameter set used only for its frequency cutoff when t = 0 (no deformation)."""
    return DeformationParams(r=1.0, r_prime=0.6, r_dprime=0.8, delta=0.1, delta_prime=0.09,
                             epsilon=0.5, R=R, dimension=n)


# ---------------------------------------------------------------------------
# real-axis reference
# ---------------------------------------------------------------------------


@dataclass
class StandardResult:
    value: complex
    error: float
    lambdas: list
    values: list
    diverging: bool = False
    monotone: bool = True
    direct: bool = False

    def __complex__(self):
        return complex(self.value)


def op_standard(p, u: TestFunction, x, schedule: RegularizationSchedule | None = None,
                spec: QuadratureSpec | None = None, params: DeformationParams | None = None,
                depth=3):
    """Reference value of ``Op(p)u(x)`` at a real point from the undeformed double integral.

    Orders ``d < -n`` are integrated directly; otherwise the Gaussian
    regularizer ``exp(-lambda^2 xi.xi)`` is applied over ``schedule`` and
    the values extrapolated to lambda = 0.
    """
    n = u.dimension
    x = _point(x, n)
    if np.any(x.imag != 0):
        raise DomainError("op_standard needs a real point")
    cmap = ContourMap(params or reference_params(n))
    q = ContourQuadrature(cmap, spec)
    if p.order < -n:
        v, _ = q.evaluate(p, u, x[None, :], 0.0, 0.0)
        return StandardResult(complex(v[0]), 0.0, [0.0], [complex(v[0])], direct=True)
    sched = schedule or RegularizationSchedule()
    vals = [complex(q.evaluate(p, u, x[None, :], 0.0, lam)[0][0]) for lam in sched.lambda_values]
    lim = regularized_limit(vals, sched.lambda_values, sched.richardson, depth)
    return StandardResult(lim.value, lim.error, list(sched.lambda_values), vals, lim.diverging, lim.monotone)


# ---------------------------------------------------------------------------
# deformed evaluation and extension
# ---------------------------------------------------------------------------


def _check_point(p, params, t, x):
    r_lim = min(params.r_prime, params.r0, p.x_radius)
    d_lim = min(t * params.delta_prime, params.delta0, p.x_imag_radius)
    re, im = float(np.linalg.norm(x.real)), float(np.linalg.norm(x.imag))
    if not re < r_lim:
        raise DomainError(f"|Re x| = {re:.6g} >= min(r', r0) = {r_lim:.6g}")
    if not im < d_lim:
        raise DomainError(f"|Im x| = {im:.6g} >= min(t*delta', delta0) = {d_lim:.6g}")


def _check_input(u, params, radius=None):
    radius = params.r if radius is None else radius
    if u.ext_radius < radius or u.ext_imag_radius < params.delta_prime:
        raise DomainError(
            f"input extension is only declared on B(0,{u.ext_radius})+iB(0,{u.ext_imag_radius}); "
            f"need radius {radius}, delta' = {params.delta_prime}"
        )


def _check_symbol(p, params):
    if p.epsilon_max < params.epsilon:
        raise DomainError(
            f"symbol holomorphic only on the wedge of aperture {p.epsilon_max} < epsilon = {params.epsilon}"
        )


def op_deformed(p, u: TestFunction, params: DeformationParams, t, x, spec: QuadratureSpec | None = None,
                _ext_radius=None):
    """``Op(p)u(x)`` as the integral over the deformed contour C(t), without regularization."""
    validate_params(params)
    n = params.dimension
    x = _point(x, n)
    _check_point(p, params, t, x)
    _check_input(u, params, _ext_radius)
    _check_symbol(p, params)
    cmap = ContourMap(params)
    v, d = ContourQuadrature(cmap, spec).evaluate(p, u, x[None, :], t, 0.0)
    return complex(v[0]), d[0]


@dataclass
class ExtensionResult:
    """Values on a grid of complex points with per-point diagnostics.

    Points that violate a precondition get ``nan`` and an entry in ``errors``.
    """

    points: np.ndarray
    values: np.ndarray
    decay_margin: np.ndarray
    rho_max: np.ndarray
    err_estimate: np.ndarray
    lam_history: list
    errors: dict = field(default_factory=dict)
    t0: float = 1.0
    params: dict = field(default_factory=dict)

    @property
    def ok(self):
        return np.isfinite(self.values)


def _partition(points, threads):
    """Split point indices into ``threads`` buckets, keeping equal ``Re x`` together."""
    groups = {}
    for i, x in enumerate(points):
        groups.setdefault(tuple(np.round(x.real, 15)), []).append(i)
    buckets = [[] for _ in range(max(1, threads))]
    for k, idx in enumerate(groups.values()):
        buckets[k % len(buckets)].extend(idx)
    return [b for b in buckets if b]


def extend(p, u: TestFunction, params: DeformationParams, x_grid, spec: QuadratureSpec | None = None,
           threads=1, estimate_error=True):
    """The holomorphic extension of ``Op(p)u`` on ``x_grid`` via the contour C(1).

    The error estimate is the difference to a run with four fewer nodes per
    panel (``estimate_error``); it is ``nan`` otherwise.
    """
    validate_params(params)
    _check_input(u, params)
    _check_symbol(p, params)
    n = params.dimension
    pts = np.asarray(x_grid, dtype=complex).reshape(-1, n)
    spec = spec or QuadratureSpec()
    cmap = ContourMap(params)
    N = pts.shape[0]
    values = np.full(N, np.nan + 0j)
    margin = np.full(N, np.nan)
    rho = np.full(N, np.nan)
    err = np.full(N, np.nan)
    errors = {}
    good = []
    for i, x in enumerate(pts):
        try:
            _check_point(p, params, 1.0, x)
            good.append(i)
        except DomainError as e:
            errors[i] = str(e)
    good = np.array(good, dtype=int)

    def work(idx, sp):
        return ContourQuadrature(cmap, sp).evaluate(p, u, pts[idx], 1.0, 0.0)

    def run(sp):
        out = {}
        buckets = _partition(pts[good], threads) if good.size else []
        buckets = [good[b] for b in buckets]
        if threads > 1 and len(buckets) > 1:
            with ThreadPoolExecutor(threads) as ex:
                res = list(ex.map(lambda b: work(b, sp), buckets))
        else:
            res = [work(b, sp) for b in buckets]
        for b, (v, d) in zip(buckets, res):
            for j, i in enumerate(b):
                out[i] = (v[j], d[j])
        return out

    main = run(spec)
    for i, (v, d) in main.items():
        values[i] = v
        margin[i] = d.decay_margin
        rho[i] = d.rho_max
    if estimate_error and good.size:
        coarse = run(spec.with_(order=max(4, spec.order - 4)))
        for i, (v, _) in coarse.items():
            err[i] = abs(v - values[i])
    return ExtensionResult(pts, values, margin, rho, err, ["lambda=0 direct"] * N, errors,
                           cmap.t0(), params.as_dict())


# ---------------------------------------------------------------------------
# the distribution kernel
# ---------------------------------------------------------------------------


def kernel_values(p, params: DeformationParams, chi: SmoothBump | None, x, Y, t=1.0,
                  spec: QuadratureSpec | None = None):
    """``K(x, y) = (1 - chi(y)) int_{C_y(t)} exp(i (x - y).zeta) p(x, zeta) dzeta`` for rows of ``Y``.

    The frequency contour at fixed ``y`` deforms only ``zeta``; its decay
    margin is ``t delta' (1 - chi1(y)) - |Im x|``. Points with ``chi(y) = 1``
    give exactly 0; any other point without positive margin raises.
    """
    sp = spec or QuadratureSpec()
    n = params.dimension
    cmap = ContourMap(params)
    if chi is None:
        chi = default_cutoffs(params)[2]
    x = _point(x, n)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    out = np.zeros(Y.shape[0], dtype=complex)
    weight = 1.0 - chi.value(Y)
    live = weight > 0
    if not np.any(live):
        return out
    Yl, wl = Y[live], weight[live]
    im = float(np.linalg.norm(x.imag))
    margins = t * params.delta_prime * (1.0 - cmap.chi1.value(Yl)) - im
    if np.any(margins <= 0):
        bad = Yl[np.argmin(margins)]
        raise DecayError(
            f"kernel decay margin t*delta'(1-chi1(y)) - |Im x| = {margins.min():.6g} <= 0 at y = {bad.tolist()}"
        )
    m_min = float(margins.min())
    rho_max = max(choose_truncation(p.order, t, params.delta_prime, t * params.delta_prime - m_min,
                                    sp.tol * m_min, n), cmap.chi2.outer_radius)
    if sp.rho_max is not None:
        rho_max = sp.rho_max
    # the core is undeformed near 0, so resolve the oscillation exp(i (x - y).xi) there
    dist = float(np.max(np.linalg.norm(x.real - Yl, axis=-1)))
    q = ContourQuadrature(cmap, sp.with_(core_panel=min(sp.core_panel, sp.order / (2.0 * max(dist, 1e-300)))))
    core, edges = q.radial_layout(rho_max, 0.0)
    m = sp.order
    rc, wc = composite_rule(core, m)
    s, _ = gauss_legendre(m)
    mid = 0.5 * (edges[1:] + edges[:-1])
    h = 0.5 * (edges[1:] - edges[:-1])
    rt = mid[:, None] + h[:, None] * s[None, :]
    T = legendre_transform(m)
    omegas, womega = _directions(n, sp.n_theta)
    norm = TWO_PI ** (-n)
    acc = np.zeros((Yl.shape[0], len(omegas)), dtype=complex)
    for k, om in enumerate(omegas):
        Yb = Yl[:, None, :]
        # core
        xi = rc[None, :, None] * om
        zeta, detD = cmap.kernel_contour(Yb, t, xi)
        f = p(x, zeta) * detD * np.exp(1j * np.sum((x - Yb) * zeta, axis=-1))
        acc[:, k] += np.sum(f * (wc * rc ** (n - 1))[None, :], axis=-1)
        if len(edges) < 2:
            continue
        # tail: zeta = rho * kappa exactly, detD constant
        z_ref, d_ref = cmap.kernel_contour(Yl, t, cmap.chi2.outer_radius * om[None, :])
        kappa = z_ref / cmap.chi2.outer_radius
        zt = rt[None, :, :, None] * kappa[:, None, None, :]
        beta = (d_ref[:, None, None] * rt[None] ** (n - 1) * p(x, zt)) @ T.T
        c = 1j * np.sum(kappa * (x - Yl), axis=-1)
        keep = (c[:, None] * edges[None, :-1]).real > -60.0
        M = exp_legendre_moments(np.where(keep, c[:, None] * h[None, :], 0.0), m)
        with np.errstate(under="ignore"):
            ph = np.exp(np.where(keep, c[:, None] * mid[None, :], -np.inf))
        acc[:, k] += np.sum(np.sum(M * beta, axis=-1) * h[None, :] * ph, axis=-1)
    out[live] = wl * norm * (acc @ womega)
    return out


def kernel_K(p, params: DeformationParams, chi: SmoothBump | None, x, y, t=1.0,
             spec: QuadratureSpec | None = None):
    """The distribution kernel at a single (x, y)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return complex(kernel_values(p, params, chi, x, y[None, :], t, spec)[0])


def _kernel_derivative(p, params, chi, x, a, gamma, step=1e-4, spec=None):
    """``d_y^gamma K(x, y)`` at ``y = a`` by centred differences (step ``step`` per order)."""
    a = np.asarray(a, dtype=float)
    n = a.size
    offsets = [np.zeros(n)]
    coefs = [1.0]
    for j, g in enumerate(gamma):
        if g == 0:
            continue
        e = np.zeros(n)
        e[j] = step
        new_o, new_c = [], []
        for o, c in zip(offsets, coefs):
            for k in range(g + 1):
                new_o.append(o + (0.5 * g - k) * e)
                new_c.append(c * (-1) ** k * math.comb(g, k) / step**g)
        offsets, coefs = new_o, new_c
    vals = kernel_values(p, params, chi, x, a[None, :] + np.array(offsets), spec=spec)
    return complex(np.sum(np.array(coefs) * vals))


def op_distribution(p, dist: CompactDistribution, params: DeformationParams, x,
                    spec: QuadratureSpec | None = None, step=1e-4):
    """``Op(p)u(x)`` for a compactly supported distribution ``u``.

    The smooth part is split with the cutoff ``chi``: ``chi * u`` goes through
    the deformed contour, ``(1 - chi) u`` is paired with the kernel K.
    Dirac terms contribute ``c (-1)^|gamma| d_y^gamma K(x, a)``.
    """
    validate_params(params)
    n = params.dimension
    x = _point(x, n)
    _, _, chi = default_cutoffs(params)
    dist.check_extension_claim(params.r)
    total = 0.0 + 0.0j
    if dist.smooth is not None:
        u = dist.smooth
        # the contour leaves the real y-axis only on the support of chi1
        cmap = ContourMap(params)
        total += op_deformed(p, u.times_cutoff(chi), params, 1.0, x, spec,
                             _ext_radius=cmap.chi1.outer_radius)[0]
        if u.support_radius > chi.inner_radius:
            total += _smooth_kernel_pairing(p, params, chi, x, u, spec)
    for d in dist.diracs:
        if len(d.point) != n:
            raise ValueError("Dirac point dimension differs from the parameter dimension")
        sign = (-1) ** sum(d.gamma)
        if sum(d.gamma) == 0:
            k = kernel_K(p, params, chi, x, d.point, spec=spec)
        else:
            k = _kernel_derivative(p, params, chi, x, d.point, d.gamma, step, spec)
        total += d.coef * sign * k
    return complex(total)


def _smooth_kernel_pairing(p, params, chi, x, u, spec):
    """``int K(x, y) u(y) dy`` over the region where ``chi < 1``."""
    sp = spec or QuadratureSpec()
    n = params.dimension
    lo, hi = chi.inner_radius, u.support_radius
    radii = sorted({lo, chi.outer_radius, hi, *[b for b in u.breaks if lo < b < hi]})
    radii = [r for r in radii if lo <= r <= hi]
    br = refine(radii, sp.y_panel / 2)
    if n == 1:
        r, wr = composite_rule(br, sp.order)
        Y = np.concatenate([r, -r])[:, None]
        W = np.concatenate([wr, wr])
    elif n == 2:
        r, wr = composite_rule(br, sp.order)
        th = TWO_PI * np.arange(sp.n_theta) / sp.n_theta
        Y = (r[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None]).reshape(-1, 2)
        W = (wr[:, None] * r[:, None] * np.full(sp.n_theta, TWO_PI / sp.n_theta)[None]).ravel()
    else:
        raise NotImplementedError("kernel pairing is implemented for n = 1 and n = 2")
    uy = u.real(Y)
    keep = uy != 0
    if not np.any(keep):
        return 0.0
    K = kernel_values(p, params, chi, x, Y[keep], spec=spec)
    return complex(np.sum(K * uy[keep] * W[keep]))


# ---------------------------------------------------------------------------
# tube domains
# ---------------------------------------------------------------------------


@dataclass
class TubeChoice:
    shrink: float
    params: DeformationParams
    center: np.ndarray


def tube_params(U: TubeDomain, epsilon, x, R=2.0, shrink=0.5):
    """Per-point parameters for the translation argument.

    ``r = dist(Re x, boundary)``, ``r' = s r`` with ``s`` halved from
    ``shrink`` until ``epsilon (1 - s) r - |Im x|`` is at least half of its
    limit ``epsilon r - |Im x|``; then ``delta'`` is the midpoint between
    ``|Im x|`` and ``epsilon (r - r')``.
    """
    n = U.dimension
    x = _point(x, n)
    D = U.dist_to_boundary(x.real)
    b = float(np.linalg.norm(x.imag))
    if not b < epsilon * D:
        raise DomainError(
            f"point outside guaranteed domain: |Im z| = {b:.6g} >= epsilon*dist(Re z, dU) = {epsilon * D:.6g}"
        )
    s = shrink
    while epsilon * (1.0 - s) * D - b < 0.5 * (epsilon * D - b):
        s *= 0.5
    rp = s * D
    dp = b + 0.5 * (epsilon * (D - rp) - b)
    rdp = rp + 0.5 * (dp / epsilon + (D - rp))
    params = DeformationParams(r=D, r_prime=rp, r_dprime=rdp, delta=dp, delta_prime=dp,
                               epsilon=epsilon, R=R, dimension=n)
    return TubeChoice(s, validate_params(params), x.real.copy())


def extend_tube(p, u: TestFunction, U: TubeDomain, epsilon, x, spec: QuadratureSpec | None = None, R=2.0):
    """Extension into ``{|Im z| < epsilon dist(Re z, boundary of U)}`` by translating ``Re x`` to 0."""
    n = U.dimension
    x = _point(x, n)
    choice = tube_params(U, epsilon, x, R)
    a = choice.center
    ue, ur = u.ext, u.real
    shifted = TestFunction(
        lambda y: ur(y + a), lambda w: ue(w + a), n, u.support_radius + float(np.linalg.norm(a)),
        max(u.ext_radius - float(np.linalg.norm(a)), 0.0), u.ext_imag_radius,
        u.breaks if not np.any(a) else (), f"{u.name}(.+a)",
    )
    if shifted.ext_radius < choice.params.r:
        raise DomainError(
            f"input extension radius {u.ext_radius} does not cover B(Re x, {choice.params.r})"
        )
    f = p.func
    from .symbols import AnalyticSymbol

    ps = AnalyticSymbol(lambda xx, z: f(xx + a, z), p.order, n, p.name, p.epsilon_max,
                        np.inf, np.inf, p.wedge_constant, dict(p.spec))
    value, diag = op_deformed(ps, shifted, choice.params, 1.0, 1j * x.imag, spec)
    return value, diag, choice
