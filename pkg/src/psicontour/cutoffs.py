"""Radial C-infinity cutoffs with an exact plateau and exact compact support."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def transition(s):
    """Smooth step: 0 for s <= 0, 1 for s >= 1, exp-type in between.

    ``h(s) = g(s) / (g(s) + g(1 - s))`` with ``g(s) = exp(-1/s)``; written as a
    logistic of ``1/s - 1/(1-s)`` so neither branch underflows to 0/0.
    """
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = s.reshape(-1)
    out = np.where(s >= 1.0, 1.0, 0.0)
    mid = (s > 0.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        with np.errstate(over="ignore"):
            out[mid] = 1.0 / (1.0 + np.exp(1.0 / sm - 1.0 / (1.0 - sm)))
    return out.reshape(shape)


def transition_derivative(s):
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = s.reshape(-1)
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        h = transition(sm)
        out[mid] = h * (1.0 - h) * (1.0 / sm**2 + 1.0 / (1.0 - sm) ** 2)
    return out.reshape(shape)


@dataclass(frozen=True)
class SmoothBump:
    """Equal to 1 on the closed inner ball, 0 outside the open outer ball."""

    inner_radius: float
    outer_radius: float
    center: tuple = (0.0,)
    profile: str = "exp"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError(
                f"need 0 < inner_radius < outer_radius, got {self.inner_radius}, {self.outer_radius}"
            )
        if self.profile != "exp":
            raise ValueError(f"unknown bump profile {self.profile!r}")

    @property
    def dimension(self):
        return len(self.center)

    def _radial(self, y):
        y = np.asarray(y, dtype=float)
        d = y - np.asarray(self.center)
        return d, np.sqrt(np.sum(d * d, axis=-1))

    def _s(self, rad):
        return (self.outer_radius - rad) / (self.outer_radius - self.inner_radius)

    def value(self, y):
        """Bump value at points ``y`` of shape (..., n)."""
        _, rad = self._radial(y)
        return transition(self._s(rad))

    def gradient(self, y):
        """Gradient of :meth:`value`, shape (..., n)."""
        d, rad = self._radial(y)
        dh = transition_derivative(self._s(rad))
        safe = np.where(rad > 0, rad, 1.0)
        coef = np.where(rad > 0, -dh / (self.outer_radius - self.inner_radius) / safe, 0.0)
        return coef[..., None] * d

    def __call__(self, y):
        return self.value(y)


def bump_value(b: SmoothBump, y):
    return b.value(y)


def bump_gradient(b: SmoothBump, y):
    return b.gradient(y)


def default_cutoffs(params, chi2_factors=(2.0, 4.0)):
    """The three cutoffs used by the deformation for a parameter set.

    Returns ``(chi1, chi2, chi)``. The spatial cutoff ``chi1`` is 1 on the ball
    of radius r'' and supported in radius ``(r'' + r)/2``; ``chi`` equals 1 on
    that support and vanishes outside radius r. ``chi2`` is 1 on ``|xi| <= 2R``
    and 0 beyond ``4R`` (factors configurable).
    """
    n = params.dimension
    zero = (0.0,) * n
    r_mid = 0.5 * (params.r_dprime + params.r)
    chi1 = SmoothBump(params.r_dprime, r_mid, zero)
    chi = SmoothBump(0.5 * (r_mid + params.r), params.r, zero)
    lo, hi = chi2_factors
    chi2 = SmoothBump(lo * params.R, hi * params.R, zero)
    return chi1, chi2, chi
