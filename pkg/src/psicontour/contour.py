"""The deformation of R^n x R^n into C^n x C^n and its derivatives.

All maps are vectorized: ``y`` and ``xi`` have shape (..., n) and broadcast
against each other; ``t`` is a scalar or broadcastable array.

Singular unit vectors ``y/|y|`` and ``xi/|xi|`` are set to zero wherever their
multiplying cutoff coefficient (``1 - chi1(y)`` resp. ``1 - chi2(xi)``)
vanishes. Both plateaus contain a neighbourhood of the origin, so this never
hides a genuine singularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoffs import SmoothBump, default_cutoffs
from .geometry import DeformationParams


@dataclass
class ContourPoint:
    w: np.ndarray
    zeta: np.ndarray
    det: np.ndarray


def _unit(v, coef):
    nv = np.sqrt(np.sum(v * v, axis=-1))
    safe = np.where(coef > 0, nv, 1.0)
    inv = np.where(coef > 0, 1.0 / safe, 0.0)
    return v * inv[..., None], nv, inv


def sphere_frame(omega):
    """Tangent vectors ``e_1..e_{n-1}`` with ``det[omega, e_1, ...] = +1``.

    Returns shape (..., n, n-1). For n = 1 the frame is empty and the point
    orientation of S^0 is carried by :func:`sphere_orientation`.
    """
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[-1]
    flat = omega.reshape(-1, n)
    frames = np.empty((flat.shape[0], n, n - 1))
    for k, om in enumerate(flat):
        # Householder reflection mapping e_1 to omega; its columns 2..n span the tangent space.
        e1 = np.zeros(n)
        e1[0] = 1.0
        v = om - e1
        if np.linalg.norm(v) < 1e-14:
            H = np.eye(n)
        else:
            v = v / np.linalg.norm(v)
            H = np.eye(n) - 2.0 * np.outer(v, v)
        T = H[:, 1:]
        if n > 1 and np.linalg.det(np.column_stack([om, T])) < 0:
            T = T.copy()
            T[:, 0] = -T[:, 0]
        frames[k] = T
    return frames.reshape(omega.shape[:-1] + (n, n - 1))


def sphere_orientation(omega):
    """+1 for n >= 2 (frames are positively oriented); ``omega`` itself for n = 1."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape[-1] == 1:
        return omega[..., 0]
    return np.ones(omega.shape[:-1])


class ContourMap:
    """Homotopy ``sigma(t, y, xi)`` bending the real cycle into the wedge."""

    def __init__(self, params: DeformationParams, chi1: SmoothBump | None = None,
                 chi2: SmoothBump | None = None):
        d1, d2, _ = default_cutoffs(params)
        self.params = params
        self.chi1 = chi1 or d1
        self.chi2 = chi2 or d2
        self.n = params.dimension
        self.k0 = params.delta_prime / (params.r_dprime - params.r_prime)

    # -- building blocks -------------------------------------------------

    def _pieces(self, y, xi):
        y = np.asarray(y, dtype=float)
        xi = np.asarray(xi, dtype=float)
        c1 = self.chi1.value(y)
        c2 = self.chi2.value(xi)
        om1 = 1.0 - c1
        om2 = 1.0 - c2
        yh, ny, inv_ny = _unit(y, om1)
        xh, nx, inv_nx = _unit(xi, om2)
        return y, xi, c1, om1, c2, om2, yh, ny, inv_ny, xh, nx, inv_nx

    def s_eta(self, y, xi):
        """The deformation amplitudes ``s(y, xi)`` and ``eta(y, xi)``."""
        c1 = self.chi1.value(y)
        om2 = 1.0 - self.chi2.value(xi)
        dp = self.params.delta_prime
        return dp * c1 * om2, self.k0 * (1.0 - c1) * om2

    def components(self, t, y, xi):
        """``(w, zeta)`` without derivatives."""
        y, xi, c1, om1, c2, om2, yh, ny, _, xh, nx, _ = self._pieces(y, xi)
        t = np.asarray(t, dtype=float)
        s = self.params.delta_prime * c1 * om2
        eta = self.k0 * om1 * om2
        w = y - 1j * (t * s)[..., None] * xh
        zeta = xi - 1j * (t * eta * nx)[..., None] * yh
        return w, zeta

    def blocks(self, t, y, xi):
        """The four n x n blocks ``A, B, C, D`` of the fixed-t Jacobian.

        Entry (i, j) of each block is the derivative with respect to the i-th
        variable of the j-th component: ``A`` = d w / d y, ``B`` = d w / d xi,
        ``C`` = d zeta / d y, ``D`` = d zeta / d xi, each indexed
        (variable, component).
        """
        y, xi, c1, om1, c2, om2, yh, ny, inv_ny, xh, nx, inv_nx = self._pieces(y, xi)
        g1 = self.chi1.gradient(y)
        g2 = self.chi2.gradient(xi)
        t = np.asarray(t, dtype=float)[..., None, None]
        dp, k0 = self.params.delta_prime, self.k0
        n = self.n
        eye = np.eye(n)
        shape = np.broadcast_shapes(y.shape[:-1], xi.shape[:-1], t.shape[:-2])
        # d_{y_i} s
        ds_y = dp * om2[..., None] * g1
        A = eye - 1j * t * xh[..., None, :] * ds_y[..., :, None]
        # d_{xi_i} (s xi_j/|xi|)
        proj_x = (eye - xh[..., :, None] * xh[..., None, :]) * inv_nx[..., None, None]
        dsx = dp * c1[..., None, None] * (
            -g2[..., :, None] * xh[..., None, :] + om2[..., None, None] * proj_x
        )
        B = -1j * t * dsx
        # d_{y_i} (eta y_j/|y|)
        proj_y = (eye - yh[..., :, None] * yh[..., None, :]) * inv_ny[..., None, None]
        dey = k0 * om2[..., None, None] * (
            -g1[..., :, None] * yh[..., None, :] + om1[..., None, None] * proj_y
        )
        C = -1j * t * nx[..., None, None] * dey
        # d_{xi_i} (eta |xi|)
        dex = k0 * om1[..., None] * (-g2 * nx[..., None] + om2[..., None] * xh)
        D = eye - 1j * t * yh[..., None, :] * dex[..., :, None]
        return tuple(np.broadcast_to(M, shape + (n, n)) for M in (A, B, C, D))

    def jacobian_fixed_t(self, t, y, xi):
        """Jacobian of ``(y, xi) -> (w, zeta)`` at fixed t and its determinant.

        Block rows are the components (w, zeta), block columns the variables
        (y, xi); each block is transposed from its (variable, component)
        indexing so the matrix is the ordinary Jacobian, shape (..., 2n, 2n).
        """
        A, B, C, D = self.blocks(t, y, xi)
        sw = lambda M: np.swapaxes(M, -1, -2)  # noqa: E731
        M = np.concatenate(
            [np.concatenate([sw(A), sw(B)], axis=-1), np.concatenate([sw(C), sw(D)], axis=-1)],
            axis=-2,
        )
        return M, _det(M)

    def det_fixed_t(self, t, y, xi):
        """``det d_(y,xi) sigma`` without assembling the 2n x 2n matrix.

        Uses ``det [[A, C], [B, D]] = det A det(D - B A^-1 C)``; ``A`` is the
        identity plus a rank-one term whose coefficient is purely imaginary,
        so it is always invertible.
        """
        A, B, C, D = self.blocks(t, y, xi)
        if self.n == 1:
            return A[..., 0, 0] * D[..., 0, 0] - B[..., 0, 0] * C[..., 0, 0]
        if self.n == 2:
            dA = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
            adj = np.stack(
                [np.stack([A[..., 1, 1], -A[..., 0, 1]], -1), np.stack([-A[..., 1, 0], A[..., 0, 0]], -1)], -2
            )
            S = dA[..., None, None] * D - B @ adj @ C
            return (S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]) / dA
        return self.jacobian_fixed_t(t, y, xi)[1]

    def deform(self, t, y, xi):
        w, zeta = self.components(t, y, xi)
        _, det = self.jacobian_fixed_t(t, y, xi)
        return ContourPoint(w, zeta, det)

    def t_derivative(self, y, xi):
        """``d sigma / dt`` as (dw/dt, dzeta/dt); independent of t."""
        y, xi, c1, om1, c2, om2, yh, ny, _, xh, nx, _ = self._pieces(y, xi)
        s = self.params.delta_prime * c1 * om2
        eta = self.k0 * om1 * om2
        return -1j * s[..., None] * xh, -1j * (eta * nx)[..., None] * yh

    def jacobian_full(self, t, y, xi):
        """Complex Jacobian of ``(t, y, xi) -> (w, zeta)``, shape (..., 2n, 2n+1).

        Rows are the components (w_1..w_n, zeta_1..zeta_n), columns the
        variables (t, y_1..y_n, xi_1..xi_n).
        """
        A, B, C, D = self.blocks(t, y, xi)
        wt, zt = self.t_derivative(y, xi)
        sw = lambda M: np.swapaxes(M, -1, -2)  # noqa: E731
        top = np.concatenate([wt[..., :, None], sw(A), sw(B)], axis=-1)
        bot = np.concatenate([zt[..., :, None], sw(C), sw(D)], axis=-1)
        return np.concatenate([top, bot], axis=-2)

    def jacobian_rank_full(self, t, y, xi, rtol=1e-8):
        J = self.jacobian_full(t, y, xi)
        sv = np.linalg.svd(J, compute_uv=False)
        return np.sum(sv > rtol * sv[..., :1], axis=-1)

    # -- frequency-only and boundary deformations ---------------------------

    def kernel_contour(self, y, t, xi):
        """The frequency-only deformation at fixed ``y``: returns ``(zeta, det dzeta/dxi)``."""
        _, zeta = self.components(t, y, xi)
        _, _, _, D = self.blocks(t, y, xi)
        return zeta, _det(D)

    def sphere_face(self, radius, t, y, omega):
        """Pullback density of ``dw ^ dzeta`` on ``{|xi| = radius}`` in (t, y, omega).

        Columns: d/dt, d/dy_1..d/dy_n, then ``radius * d/dxi . e_k`` for a
        positively oriented tangent frame of S^{n-1}; multiplied by the S^0
        orientation in dimension one.
        """
        omega = np.asarray(omega, dtype=float)
        xi = radius * omega
        w, zeta = self.components(t, y, xi)
        A, B, C, D = self.blocks(t, y, xi)
        wt, zt = self.t_derivative(y, xi)
        sw = lambda M: np.swapaxes(M, -1, -2)  # noqa: E731
        frame = sphere_frame(omega)
        cols_w = [wt[..., :, None], sw(A)]
        cols_z = [zt[..., :, None], sw(C)]
        if self.n > 1:
            cols_w.append(radius * sw(B) @ frame)
            cols_z.append(radius * sw(D) @ frame)
        top = np.concatenate(cols_w, axis=-1)
        bot = np.concatenate(cols_z, axis=-1)
        M = np.concatenate([top, bot], axis=-2)
        return ContourPoint(w, zeta, _det(M) * sphere_orientation(omega))

    def boundary_map(self, rho, t, y, omega):
        """Closed-form sphere deformation for ``rho`` beyond the support of ``chi2``.

        ``(y - i t delta' chi1(y) omega, rho [omega - i t k0 (1 - chi1(y)) y/|y|])``
        together with the same pullback density as :meth:`sphere_face`.
        """
        if not rho >= self.chi2.outer_radius:
            raise ValueError("boundary_map needs rho beyond the support of chi2")
        y = np.asarray(y, dtype=float)
        omega = np.asarray(omega, dtype=float)
        c1 = self.chi1.value(y)
        om1 = 1.0 - c1
        yh, _, _ = _unit(y, om1)
        t_ = np.asarray(t, dtype=float)[..., None]
        w = y - 1j * t_ * self.params.delta_prime * c1[..., None] * omega
        zeta = rho * (omega - 1j * t_ * self.k0 * om1[..., None] * yh)
        face = self.sphere_face(rho, t, y, omega)
        return ContourPoint(w, zeta, face.det)

    # -- diagnostics -------------------------------------------------------

    def t0(self, target=0.5, margin=0.05):
        """Largest t <= 1 keeping the frequency contour in the wedge of aperture ``target``."""
        return float(min(1.0, target * (1.0 - margin) / self.k0))


def _det(M):
    n = M.shape[-1]
    if n == 1:
        return M[..., 0, 0]
    if n == 2:
        return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    return np.linalg.det(M)


def phase_exponent(x, pt: ContourPoint):
    """``Re(i (x - w) . zeta)`` (bilinear dot product, no conjugation)."""
    x = np.asarray(x, dtype=complex)
    return np.real(1j * np.sum((x - pt.w) * pt.zeta, axis=-1))


def deform(c: ContourMap, t, y, xi):
    return c.deform(t, y, xi)


def jacobian_fixed_t(c: ContourMap, t, y, xi):
    return c.jacobian_fixed_t(t, y, xi)


def jacobian_rank_full(c: ContourMap, t, y, xi):
    return c.jacobian_rank_full(t, y, xi)


def kernel_contour(c: ContourMap, y, t, xi):
    return c.kernel_contour(y, t, xi)[0]


def boundary_map(c: ContourMap, rho, t, y, omega):
    return c.boundary_map(rho, t, y, omega)
