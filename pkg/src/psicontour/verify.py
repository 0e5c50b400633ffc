"""Numerical checks of the inequalities, invariances and vanishing statements behind the extension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import ContourMap, phase_exponent
from .geometry import DeformationParams, DomainError, validate_params
from .quadrature import (
    TWO_PI,
    ContourQuadrature,
    QuadratureSpec,
    composite_rule,
    gauss_legendre,
    refine,
)
from .reports import CheckReport
from .symbols import bracket


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------------------
# deformation invariance
# ---------------------------------------------------------------------------


def check_deformation_invariance(p, u, params: DeformationParams, x, t1, t2,
                                 spec: QuadratureSpec | None = None, tol=1e-6):
    """``|I(t2) - I(t1)| / max |I|`` for the two contour integrals at ``x``."""
    validate_params(params)
    n = params.dimension
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if not np.linalg.norm(x.real) < params.r_prime:
        raise DomainError(f"|Re x| must be below r' = {params.r_prime}")
    if not np.linalg.norm(x.imag) < min(t1, t2) * params.delta_prime:
        raise DomainError("|Im x| must be below min(t1, t2) delta' for both contours to converge")
    q = ContourQuadrature(ContourMap(params), spec)
    v1 = complex(q.evaluate(p, u, x[None, :], t1, 0.0)[0][0])
    v2 = v1 if t1 == t2 else complex(q.evaluate(p, u, x[None, :], t2, 0.0)[0][0])
    diff = abs(v2 - v1) / max(abs(v1), abs(v2), 1e-300) if t1 != t2 else 0.0
    return CheckReport(
        "deformation_invariance", diff < tol, tol - diff, 2, x.tolist(), None, tol,
        {"I_t1": v1, "I_t2": v2, "t1": t1, "t2": t2, "n": n, "relative_difference": diff},
    )


# ---------------------------------------------------------------------------
# Stokes residual on Q(rho)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CornerDomain:
    """``(t1, t2) x y_box x {2R < |xi| < rho}``."""

    t1: float
    t2: float
    y_box: float
    rho: float
    R: float

    def __post_init__(self):
        if not self.t2 > self.t1:
            raise ValueError("need t2 > t1")
        if not self.rho > 2 * self.R:
            raise ValueError("need rho > 2R")


def _face_integral(cmap, p, u, x, radius, t1, t2, spec, t_nodes=16):
    """Integral of the pulled-back form over ``(t1, t2) x R^n x {|xi| = radius}``.

    Returns (value, sup |integrand|, integral of |integrand|). The sphere is
    oriented as the boundary of the ball; in dimension one this is the sign
    of omega.
    """
    n = cmap.n
    sp = spec or QuadratureSpec()
    s, w = gauss_legendre(t_nodes)
    tt = 0.5 * (t1 + t2) + 0.5 * (t2 - t1) * s
    wt = 0.5 * (t2 - t1) * w
    # same breakpoints as the contour engine, cutoff transitions split
    radii = ContourQuadrature(cmap, sp)._radii(u)
    br = refine(sorted({-u.support_radius, u.support_radius, *[sg * r for r in radii for sg in (-1, 1)]}),
                sp.y_panel / 2)
    y1, wy1 = composite_rule(br, sp.order)
    if n == 1:
        Y, WY = y1[:, None], wy1
        om = np.array([[1.0], [-1.0]])
        wom = np.array([1.0, 1.0])
    elif n == 2:
        Y = np.stack(np.meshgrid(y1, y1, indexing="ij"), -1).reshape(-1, 2)
        WY = np.outer(wy1, wy1).ravel()
        th = TWO_PI * np.arange(sp.n_theta) / sp.n_theta
        om = np.stack([np.cos(th), np.sin(th)], -1)
        wom = np.full(sp.n_theta, TWO_PI / sp.n_theta)
    else:
        raise NotImplementedError("face integrals are implemented for n = 1 and n = 2")
    inside = np.linalg.norm(Y, axis=-1) < u.support_radius
    Y, WY = Y[inside], WY[inside]
    shape = (tt.size, Y.shape[0], om.shape[0])
    T = np.broadcast_to(tt[:, None, None], shape)
    Yb = np.broadcast_to(Y[None, :, None, :], shape + (n,))
    Om = np.broadcast_to(om[None, None, :, :], shape + (n,))
    face = cmap.sphere_face(radius, T, Yb, Om)
    g = np.exp(1j * np.sum(face.zeta * (x - face.w), axis=-1)) * p(x, face.zeta) * u(face.w) * face.det
    g = g * TWO_PI ** (-n)
    W = wt[:, None, None] * WY[None, :, None] * wom[None, None, :]
    return complex(np.sum(g * W)), float(np.max(np.abs(g))), float(np.sum(np.abs(g) * W))


def check_stokes_residual(p, u, params: DeformationParams, x, Q: CornerDomain,
                          spec: QuadratureSpec | None = None, tol=1e-5, ratio_rhos=(20.0, 40.0, 80.0),
                          ratio_tol=0.05):
    """Sum of the boundary faces of ``Q(rho)``; expected 0.

    Faces: ``t = t2`` minus ``t = t1`` over the annulus, ``(-1)^(n+1)`` times
    the two sphere faces (outer minus inner), and the y-box faces where the
    integrand vanishes by compact support. Also reports the inner sphere
    face (exactly 0) and a ratio test of the outer face against
    ``exp(-rho t1 delta') <rho>^(d+n)``.
    """
    validate_params(params)
    n = params.dimension
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if np.any(x.imag != 0) or not np.linalg.norm(x.real) < params.r_prime:
        raise DomainError("the Stokes check needs a real point with |x| < r'")
    if Q.y_box < u.support_radius:
        raise DomainError("the y-box must contain the support of u")
    cmap = ContourMap(params)
    sp = spec or QuadratureSpec()
    inner = 2.0 * params.R
    ann = sp.with_(rho_window=(inner, Q.rho), rho_max=Q.rho)
    q = ContourQuadrature(cmap, ann)
    I1 = complex(q.evaluate(p, u, x[None, :], Q.t1, 0.0)[0][0])
    I2 = complex(q.evaluate(p, u, x[None, :], Q.t2, 0.0)[0][0])
    phi_in, sup_in, _ = _face_integral(cmap, p, u, x, inner, Q.t1, Q.t2, sp)
    phi_out, sup_out, mass_out = _face_integral(cmap, p, u, x, Q.rho, Q.t1, Q.t2, sp)
    sign = (-1) ** (n + 1)
    total = I2 - I1 + sign * (phi_out - phi_in)
    scale = max(abs(I1), abs(I2), abs(phi_out), abs(phi_in))
    resid = abs(total) / scale
    # ratio test of the outer face envelope
    d = p.order
    env = {}
    for r in ratio_rhos:
        _, sup_r, mass_r = _face_integral(cmap, p, u, x, r, Q.t1, Q.t2, sp)
        env[r] = (sup_r, mass_r)

    def bound(r):
        return np.exp(-r * Q.t1 * params.delta_prime) * (1 + r * r) ** (0.5 * (d + n))

    r0 = ratio_rhos[0]
    C = env[r0][0] / bound(r0)
    ratio_ok = all(env[r][0] <= C * bound(r) * (1 + ratio_tol) for r in ratio_rhos[1:])
    step = np.log(2.0) / (Q.t1 * params.delta_prime)
    _, _, mass_step = _face_integral(cmap, p, u, x, Q.rho + step, Q.t1, Q.t2, sp)
    halves = mass_step <= 0.5 * mass_out
    inner_zero = sup_in == 0.0
    passed = resid < tol and inner_zero and ratio_ok and halves
    return CheckReport(
        "stokes_residual", bool(passed), tol - resid, 5, x.tolist(), None, tol,
        {
            "total": total, "relative_residual": resid, "face_t1": I1, "face_t2": I2,
            "face_rho": phi_out, "face_2R": phi_in, "face_2R_sup": sup_in, "face_2R_zero": inner_zero,
            "face_y_box": 0.0, "envelope_constant": C,
            "envelope": {str(r): {"sup": s, "mass": m, "bound": C * bound(r)} for r, (s, m) in env.items()},
            "ratio_test": ratio_ok, "mass_rho": mass_out, "mass_rho_plus": mass_step,
            "mass_halves": halves, "rho": Q.rho, "t1": Q.t1, "t2": Q.t2,
        },
    )


# ---------------------------------------------------------------------------
# pointwise inequalities
# ---------------------------------------------------------------------------


def _unit_vectors(rng, k, n):
    v = rng.normal(size=(k, n))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def phase_samples(params: DeformationParams, count, seed=0, rho_range=None):
    """Random ``(t, y, xi, x)`` with ``chi2(xi) = 0`` and ``|Re x| < r'``."""
    rng = np.random.default_rng(seed)
    n = params.dimension
    lo, hi = rho_range or (4.0 * params.R, 400.0 * params.R)
    t = rng.uniform(0.0, 1.0, count)
    y = _unit_vectors(rng, count, n) * rng.uniform(0.0, 1.5 * params.r, count)[:, None]
    xi = _unit_vectors(rng, count, n) * np.exp(rng.uniform(np.log(lo), np.log(hi), count))[:, None]
    xr = _unit_vectors(rng, count, n) * (params.r_prime * rng.uniform(0.0, 1.0, count) ** (1 / n))[:, None]
    xim = _unit_vectors(rng, count, n) * rng.uniform(0.0, 1.5 * params.delta_prime, count)[:, None]
    return t, y, xi, xr + 1j * xim


def check_phase_bounds(params: DeformationParams, cmap: ContourMap | None = None, count=100_000,
                       seed=0, tol=1e-12):
    """Both phase estimates at random samples.

    Full contour: ``Re(i (x - w).zeta) <= -|xi| (t delta' - |Im x|)``.
    Frequency-only contour: ``Re(i (x - y).zeta) <= -|xi| (t delta' (1 - chi1(y)) - |Im x|)``.
    Margins are divided by ``<xi>`` so the tolerance is relative to the size of the phase.
    """
    cmap = cmap or ContourMap(params)
    t, y, xi, x = phase_samples(params, count, seed)
    nxi = np.linalg.norm(xi, axis=-1)
    im = np.linalg.norm(x.imag, axis=-1)
    dp = params.delta_prime
    w, zeta = cmap.components(t, y, xi)
    actual1 = np.real(1j * np.sum((x - w) * zeta, axis=-1))
    bound1 = -nxi * (t * dp - im)
    zk, _ = cmap.kernel_contour(y, t, xi)
    actual2 = np.real(1j * np.sum((x - y) * zk, axis=-1))
    bound2 = -nxi * (t * dp * (1.0 - cmap.chi1.value(y)) - im)
    m1 = (bound1 - actual1) / bracket(xi)
    m2 = (bound2 - actual2) / bracket(xi)
    worst1, worst2 = int(np.argmin(m1)), int(np.argmin(m2))
    margin = float(min(m1[worst1], m2[worst2]))
    loc = (t[worst1], y[worst1].tolist(), xi[worst1].tolist(), x[worst1].tolist()) if m1[worst1] <= m2[worst2] \
        else (t[worst2], y[worst2].tolist(), xi[worst2].tolist(), x[worst2].tolist())
    return CheckReport(
        "phase_bounds", margin >= -tol, margin + tol, 2 * count, loc, seed, tol,
        {
            "full_contour_min_margin": float(m1[worst1]), "kernel_min_margin": float(m2[worst2]),
            "full_contour_violations": int(np.sum(m1 < -tol)), "kernel_violations": int(np.sum(m2 < -tol)),
            "dimension": params.dimension,
        },
    )


def hand_phase_example(params: DeformationParams):
    """The worked point ``x = 0.2 + 0.05i, y = 0, xi = 10, t = 1`` in one dimension."""
    cmap = ContourMap(params)
    pt = cmap.deform(1.0, np.array([0.0]), np.array([10.0]))
    x = np.array([0.2 + 0.05j])
    return float(phase_exponent(x, pt)), float(-10.0 * (params.delta_prime - 0.05))


def gaussian_wedge_samples(count, n=1, seed=0, aperture=0.5, rho_max=1e3):
    """Random ``zeta`` with ``|Im zeta| < aperture |Re zeta|``."""
    rng = np.random.default_rng(seed)
    re = _unit_vectors(rng, count, n) * np.exp(rng.uniform(np.log(1e-2), np.log(rho_max), count))[:, None]
    frac = rng.uniform(0.0, 1.0, count) * aperture
    im = _unit_vectors(rng, count, n) * (frac * np.linalg.norm(re, axis=-1))[:, None]
    return re + 1j * im


def check_gaussian_bound(zeta, lam=1.0, tol=0.0, aperture=0.5):
    """``|exp(-lam^2 zeta.zeta)| <= exp(-lam^2 |Re zeta|^2 / 2)``, compared in the exponent."""
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    lam = np.broadcast_to(np.asarray(lam, dtype=float), zeta.shape[:-1])
    re = np.linalg.norm(zeta.real, axis=-1)
    im = np.linalg.norm(zeta.imag, axis=-1)
    if np.any(im >= aperture * re):
        raise DomainError("samples must satisfy |Im zeta| < |Re zeta| / 2")
    lhs = np.real(-(lam**2) * np.sum(zeta * zeta, axis=-1))
    rhs = -0.5 * lam**2 * re**2
    m = rhs - lhs
    k = int(np.argmin(m))
    margin = float(m[k])
    return CheckReport(
        "gaussian_bound", margin >= -tol, margin + tol, int(zeta.shape[0]), zeta[k].tolist(), None, tol,
        {"violations": int(np.sum(m < -tol)), "min_exponent_gap": margin},
    )


# ---------------------------------------------------------------------------
# holomorphy of sampled values
# ---------------------------------------------------------------------------


def check_holomorphy(values, re_axis, im_axis, tol=1e-4):
    """Morera and Cauchy-Riemann residuals of values on a rectangular complex grid.

    ``values[i, j]`` sits at ``re_axis[i] + 1j * im_axis[j]``. For each grid
    cell the closed contour integral is taken with the trapezoid rule on its
    four edges and normalized by the cell perimeter times ``max |values|``.
    """
    F = np.asarray(values, dtype=complex)
    xr = np.asarray(re_axis, dtype=float)
    yi = np.asarray(im_axis, dtype=float)
    if F.shape != (xr.size, yi.size) or xr.size < 2 or yi.size < 2:
        raise ValueError("values must have shape (len(re_axis), len(im_axis)), both at least 2")
    Z = xr[:, None] + 1j * yi[None, :]
    a, b, c, d = F[:-1, :-1], F[1:, :-1], F[1:, 1:], F[:-1, 1:]
    za, zb, zc, zd = Z[:-1, :-1], Z[1:, :-1], Z[1:, 1:], Z[:-1, 1:]
    loop = 0.5 * ((a + b) * (zb - za) + (b + c) * (zc - zb) + (c + d) * (zd - zc) + (d + a) * (za - zd))
    per = 2.0 * (np.abs(zb - za) + np.abs(zd - za))
    scale = max(float(np.max(np.abs(F))), 1e-300)
    morera = np.abs(loop) / (per * scale)
    hx = (zb - za).real
    hy = (zd - za).imag
    fx = 0.5 * ((b - a) + (c - d)) / hx
    fy = 0.5 * ((d - a) + (c - b)) / hy
    cr = np.abs(fx + 1j * fy) / (np.abs(fx) + np.abs(fy) + 1e-300)
    k = np.unravel_index(int(np.argmax(morera)), morera.shape)
    worst = float(morera[k])
    return CheckReport(
        "holomorphy_morera", worst < tol, tol - worst, int(morera.size),
        complex(Z[k] + 0.5 * (hx[k] + 1j * hy[k])), None, tol,
        {"max_morera": worst, "max_cauchy_riemann": float(np.max(cr)), "morera": morera},
    )


# ---------------------------------------------------------------------------
# decay envelope of the integrand
# ---------------------------------------------------------------------------


def contour_integrand(cmap: ContourMap, p, u, x, t, y, xi):
    """``G_x(sigma) det d_(y,xi) sigma`` at real ``(y, xi)``."""
    w, zeta = cmap.components(t, y, xi)
    det = cmap.det_fixed_t(t, y, xi)
    return np.exp(1j * np.sum(zeta * (x - w), axis=-1)) * p(x, zeta) * u(w) * det


def check_decay_envelope(p, u, params: DeformationParams, cmap: ContourMap | None, x, t=1.0,
                         samples=4000, seed=0, rho_ref=50.0, rho_test=(50.0, 200.0), tol=1e-6):
    """Fit ``C`` in ``|integrand| <= C exp(-|xi| m) <xi>^d`` on ``|xi| <= rho_ref``, test beyond.

    ``m = t delta' - |Im x|``. The fit and test sets share their (y, direction)
    samples and differ only in ``|xi|``. Also checks that the integrand is
    exactly 0 for y outside the support of u, and the doubling form of the
    envelope: the sampled maximum at ``2|xi|`` is at most the maximum at
    ``|xi|`` times ``exp(-|xi| m) (<2 xi>/<xi>)^d``.
    """
    cmap = cmap or ContourMap(params)
    n = params.dimension
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    m = t * params.delta_prime - float(np.linalg.norm(x.imag))
    if not m > 0:
        raise DomainError("no decay margin")
    rng = np.random.default_rng(seed)
    d = p.order
    y = _unit_vectors(rng, samples, n) * (u.support_radius * rng.uniform(0, 1, samples) ** (1 / n))[:, None]
    om = _unit_vectors(rng, samples, n)

    def env(r):
        return np.exp(-r * m) * (1.0 + r * r) ** (0.5 * d)

    r_fit = rng.uniform(0.0, rho_ref, samples)
    r_tst = rng.uniform(*rho_test, samples)
    g_fit = np.abs(contour_integrand(cmap, p, u, x, t, y, om * r_fit[:, None]))
    g_tst = np.abs(contour_integrand(cmap, p, u, x, t, y, om * r_tst[:, None]))
    C = float(np.max(g_fit / env(r_fit)))
    ratio = g_tst / (C * env(r_tst))
    worst = float(np.max(ratio))
    # doubling form, on a fixed radius pair in the tail
    r1 = 0.5 * (rho_test[0] + rho_test[1]) / 2
    e1 = float(np.max(np.abs(contour_integrand(cmap, p, u, x, t, y, om * r1))))
    e2 = float(np.max(np.abs(contour_integrand(cmap, p, u, x, t, y, om * 2 * r1))))
    dbl_bound = e1 * env(2 * r1) / env(r1)
    dbl_ok = e2 <= dbl_bound * (1 + tol)
    # support indicator
    y_out = _unit_vectors(rng, 256, n) * rng.uniform(u.support_radius, 2 * u.support_radius + 1, 256)[:, None]
    g_out = contour_integrand(cmap, p, u, x, t, y_out, _unit_vectors(rng, 256, n) * 30.0)
    support_ok = bool(np.all(g_out == 0))
    passed = worst <= 1 + tol and dbl_ok and support_ok
    return CheckReport(
        "decay_envelope", bool(passed), 1 + tol - worst, 2 * samples, x.tolist(), seed, tol,
        {"constant": C, "max_ratio_test": worst, "doubling_ok": bool(dbl_ok), "doubling": [e1, e2, dbl_bound],
         "support_zero": support_ok, "margin": m, "rho_ref": rho_ref, "rho_test": list(rho_test)},
    )


def run_all(p, u, params: DeformationParams, x=0.0, seed=0, spec: QuadratureSpec | None = None,
            count=100_000, stokes_rho=40.0):
    """The default battery for one configuration, reports sorted by name.

    The Stokes residual runs for real ``x`` in one dimension unless ``stokes_rho`` is None.
    """
    n = params.dimension
    x = np.atleast_1d(np.asarray(x, dtype=complex)) * np.ones(n)
    reports = [
        check_deformation_invariance(p, u, params, x, 0.5, 1.0, spec),
        check_phase_bounds(params, count=count, seed=seed),
        check_gaussian_bound(gaussian_wedge_samples(count // 10, n, seed),
                             lam=np.random.default_rng(seed).uniform(0.01, 2.0, count // 10)),
        check_decay_envelope(p, u, params, None, x, seed=seed),
    ]
    if stokes_rho is not None and n == 1 and np.all(x.imag == 0):
        reports.append(check_stokes_residual(
            p, u, params, x, CornerDomain(0.5, 1.0, u.support_radius, stokes_rho, params.R), spec))
    for r in reports:
        r.seed = seed if r.seed is None else r.seed
    return sorted(reports, key=lambda r: r.name)
