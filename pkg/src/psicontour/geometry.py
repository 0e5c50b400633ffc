"""Balls, frequency wedges, tube domains and the deformation parameter set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Raised when a parameter set violates one or more ordering constraints.

    The individual violations are kept in ``violations`` so callers (and the
    CLI) can report every failed inequality, not only the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(ValueError):
    """A point lies outside the domain where an operation is defined."""


def _vec(a):
    return np.atleast_1d(np.asarray(a))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in _vec(self.center)))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    @property
    def dimension(self):
        return len(self.center)

    def contains(self, x):
        return np.linalg.norm(_vec(x) - np.asarray(self.center)) < self.radius

    def dist_to_boundary(self, x):
        """Signed distance from ``x`` to the sphere, positive inside."""
        return self.radius - float(np.linalg.norm(_vec(x) - np.asarray(self.center)))


@dataclass(frozen=True)
class Wedge:
    """The truncated cone ``|Im z| < epsilon |Re z|, |Re z| > R`` in C^n."""

    epsilon: float
    R: float
    dimension: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("wedge aperture epsilon must be positive")
        if not self.R > 0:
            raise ValueError("wedge truncation radius R must be positive")


def wedge_contains(w: Wedge, zeta):
    """Membership test; vectorized over leading axes of ``zeta`` (last axis = n)."""
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.ndim == 0:
        zeta = zeta[None]
    re = np.linalg.norm(zeta.real, axis=-1)
    im = np.linalg.norm(zeta.imag, axis=-1)
    return (im < w.epsilon * re) & (re > w.R)


@dataclass(frozen=True)
class DeformationParams:
    """Radii, imaginary shifts and wedge data driving the contour deformation.

    ``r_prime < r_dprime < r`` are the real radii (target ball, plateau of the
    spatial cutoff, holomorphy radius of the input); ``delta_prime <= delta``
    are the imaginary radii; ``r0, delta0`` describe the polydisc on which the
    symbol is holomorphic in x.
    """

    r: float
    r_prime: float
    r_dprime: float
    delta: float
    delta_prime: float
    epsilon: float
    R: float
    r0: float = np.inf
    delta0: float = np.inf
    dimension: int = 1

    @property
    def slope(self):
        """Largest imaginary-to-real ratio of the frequency deformation."""
        return self.delta_prime / (self.r_dprime - self.r_prime)

    @property
    def wedge(self):
        return Wedge(self.epsilon, self.R, self.dimension)

    @property
    def wedge_margin(self):
        return self.epsilon - self.slope

    @property
    def real_radius(self):
        return min(self.r_prime, self.r0)

    @property
    def imag_radius(self):
        return min(self.delta_prime, self.delta0)

    def as_dict(self):
        return {
            "r": self.r, "r_prime": self.r_prime, "r_dprime": self.r_dprime,
            "delta": self.delta, "delta_prime": self.delta_prime,
            "epsilon": self.epsilon, "R": self.R,
            "r0": self.r0, "delta0": self.delta0, "dimension": self.dimension,
        }


def param_violations(p: DeformationParams):
    """List every violated constraint of ``p``; empty when the set is admissible."""
    out = []
    for name in ("r", "r_prime", "r_dprime", "delta", "delta_prime", "epsilon", "R", "r0", "delta0"):
        if not getattr(p, name) > 0:
            out.append(f"{name} > 0 fails ({name} = {getattr(p, name)})")
    if p.dimension < 1:
        out.append(f"dimension >= 1 fails (dimension = {p.dimension})")
    if not p.r > p.r_dprime:
        out.append(f"r > r'' fails (r = {p.r}, r'' = {p.r_dprime})")
    if not p.r_dprime > p.r_prime:
        out.append(f"r'' > r' fails (r'' = {p.r_dprime}, r' = {p.r_prime})")
    if not p.delta >= p.delta_prime:
        out.append(f"delta >= delta' fails (delta = {p.delta}, delta' = {p.delta_prime})")
    if p.r_dprime > p.r_prime and p.delta_prime > 0:
        ratio = p.slope
        if not ratio < p.epsilon:
            out.append(f"delta'/(r''-r') = {ratio:.6g} >= epsilon = {p.epsilon:.6g}")
        if p.r > p.r_prime and not p.delta_prime / (p.r - p.r_prime) < p.epsilon:
            out.append(f"delta'/(r-r') = {p.delta_prime / (p.r - p.r_prime):.6g} >= epsilon")
    return out


def validate_params(p: DeformationParams) -> DeformationParams:
    """Return ``p`` unchanged, or raise :class:`ParameterError` listing violations."""
    v = param_violations(p)
    if v:
        raise ParameterError(v)
    return p


@dataclass(frozen=True)
class TubeDomain:
    """Tube over an open base set given as a finite union of balls.

    ``epsilon`` fixes the height profile ``epsilon * dist(Re z, boundary)``.
    For a union the distance is the max over member balls, which is a lower
    bound of the true distance to the union's boundary.
    """

    balls: tuple = field(default_factory=tuple)
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.balls:
            raise ValueError("tube base needs at least one ball")
        dims = {b.dimension for b in self.balls}
        if len(dims) != 1:
            raise ValueError("all base balls must share a dimension")

    @classmethod
    def interval(cls, a, b, epsilon=1.0):
        return cls((Ball((0.5 * (a + b),), 0.5 * (b - a)),), epsilon)

    @property
    def dimension(self):
        return self.balls[0].dimension

    def in_base(self, x):
        return any(b.contains(x) for b in self.balls)

    def dist_to_boundary(self, x):
        if not self.in_base(x):
            raise DomainError(f"point {np.asarray(x).tolist()} is outside the tube base")
        return max(b.dist_to_boundary(x) for b in self.balls)

    def host_ball(self, x):
        """The member ball realising the distance bound at ``x``."""
        return max(self.balls, key=lambda b: b.dist_to_boundary(x))

    def height(self, x):
        return self.epsilon * self.dist_to_boundary(x)

    def contains(self, z):
        z = _vec(z).astype(complex)
        if not self.in_base(z.real):
            return False
        return np.linalg.norm(z.imag) < self.height(z.real)


def tube_height(t: TubeDomain, x, epsilon=None):
    """``epsilon * dist(x, boundary of base)``; raises DomainError off the base."""
    eps = t.epsilon if epsilon is None else epsilon
    return eps * t.dist_to_boundary(x)
