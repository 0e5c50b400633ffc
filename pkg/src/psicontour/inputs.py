"""Input functions and compactly supported distributions, with closed-form oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cutoffs import SmoothBump


@dataclass(frozen=True)
class TestFunction:
    """A compactly supported smooth input together with its holomorphic extension.

    ``real`` is evaluated at real points (shape (..., n)); ``ext`` at complex
    points of ``B(0, ext_radius) + i B(0, ext_imag_radius)``, where it must
    agree with ``real`` on the real slice. ``support_radius`` bounds the
    support; ``breaks`` lists radii where the function changes character
    (cutoff plateaus), used to align quadrature panels.
    """

    __test__ = False  # not a pytest class

    real: Callable
    ext: Callable
    dimension: int = 1
    support_radius: float = 1.0
    ext_radius: float = 1.0
    ext_imag_radius: float = np.inf
    breaks: tuple = ()
    name: str = "u"
    spec: dict = field(default_factory=dict, compare=False)

    def __call__(self, w):
        """Evaluate at real or complex points, using the extension off the real slice."""
        w = np.asarray(w, dtype=complex)
        out = np.asarray(self.real(w.real), dtype=complex)
        cplx = np.any(w.imag != 0, axis=-1)
        if np.any(cplx):
            out = out.copy()
            out[cplx] = self.ext(w[cplx])
        return out

    def scaled(self, c):
        c = complex(c)
        f, g = self.real, self.ext
        return TestFunction(lambda y: c * f(y), lambda w: c * g(w), self.dimension,
                            self.support_radius, self.ext_radius, self.ext_imag_radius,
                            self.breaks, f"{c}*{self.name}", {"kind": "scaled", "base": self.spec})

    def __add__(self, other):
        f, g, F, G = self.real, self.ext, other.real, other.ext
        return TestFunction(
            lambda y: f(y) + F(y), lambda w: g(w) + G(w), self.dimension,
            max(self.support_radius, other.support_radius),
            min(self.ext_radius, other.ext_radius),
            min(self.ext_imag_radius, other.ext_imag_radius),
            tuple(sorted(set(self.breaks) | set(other.breaks))),
            f"{self.name}+{other.name}", {"kind": "sum"},
        )

    def times_cutoff(self, chi: SmoothBump):
        """``chi * u``; the extension is unchanged on chi's plateau only."""
        f, g = self.real, self.ext
        return TestFunction(
            lambda y: chi.value(y) * f(y), g, self.dimension,
            min(self.support_radius, chi.outer_radius), min(self.ext_radius, chi.inner_radius),
            self.ext_imag_radius,
            tuple(sorted(set(self.breaks) | {chi.inner_radius, chi.outer_radius})),
            f"chi*{self.name}", {"kind": "cutoff", "base": self.spec},
        )


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def gaussian_input(n=1, plateau=1.0, outer=1.5):
    """``u(y) = chi(|y|) exp(-y.y)``; its extension on the plateau is ``exp(-w.w)``."""
    chi = SmoothBump(plateau, outer, (0.0,) * n)
    return TestFunction(
        lambda y: chi.value(y) * np.exp(-_dot(y, y)),
        lambda w: np.exp(-_dot(w, w)),
        n, outer, plateau, np.inf, (plateau, outer), "gaussian",
        {"kind": "gaussian", "params": {"plateau": plateau, "outer": outer}},
    )


def gaussian_extension(x):
    x = np.asarray(x, dtype=complex)
    return np.exp(-_dot(x, x))


def sine_input(plateau=1.0, outer=1.5):
    """``u(y) = chi(y) sin(y)`` in one dimension; ``-i u'(0) = -i``."""
    chi = SmoothBump(plateau, outer, (0.0,))
    return TestFunction(
        lambda y: chi.value(y) * np.sin(y[..., 0]),
        lambda w: np.sin(w[..., 0]),
        1, outer, plateau, np.inf, (plateau, outer), "sine",
        {"kind": "sine", "params": {"plateau": plateau, "outer": outer}},
    )


def standard_bump(w):
    """``exp(-1/(1 - w.w))`` inside the unit ball, 0 outside (complex-evaluable)."""
    w = np.asarray(w, dtype=complex)
    q = _dot(w, w)
    inside = np.linalg.norm(w.real, axis=-1) < 1.0
    out = np.zeros(q.shape, dtype=complex)
    qi = q[inside]
    out[inside] = np.exp(-1.0 / (1.0 - qi))
    return out


def bump_minus_laplacian(w):
    """``f - Laplace f`` for the standard bump ``f``, via ``q = w.w``.

    With ``g(q) = -1/(1-q)``: ``Laplace f = f (2n g' + 4 q (g'' + g'^2))``.
    """
    w = np.asarray(w, dtype=complex)
    n = w.shape[-1]
    q = _dot(w, w)
    inside = np.linalg.norm(w.real, axis=-1) < 1.0
    out = np.zeros(q.shape, dtype=complex)
    qi = q[inside]
    a = 1.0 - qi
    f = np.exp(-1.0 / a)
    g1 = -1.0 / a**2
    g2 = -2.0 / a**3
    out[inside] = f * (1.0 - (2 * n * g1 + 4 * qi * (g2 + g1 * g1)))
    return out


def resolvent_input(n=1, ext_imag_radius=0.1):
    """``u = f - Laplace f`` with ``f`` the standard bump, so ``(1 + |D|^2)^(-1) u = f``."""
    return TestFunction(
        lambda y: bump_minus_laplacian(y).real,
        bump_minus_laplacian,
        n, 1.0, 1.0, ext_imag_radius, (1.0,), "bump_resolvent",
        {"kind": "bump_resolvent", "params": {"ext_imag_radius": ext_imag_radius}},
    )


def zero_input(n=1):
    return TestFunction(
        lambda y: np.zeros(np.shape(y)[:-1]), lambda w: np.zeros(np.shape(w)[:-1], dtype=complex),
        n, 1.0, np.inf, np.inf, (), "zero", {"kind": "zero"},
    )


def input_from_spec(spec, n=1):
    kind = spec.get("kind")
    params = spec.get("params", {}) or {}
    if kind == "gaussian":
        return gaussian_input(n, params.get("plateau", 1.0), params.get("outer", 1.5))
    if kind == "sine":
        if n != 1:
            raise ValueError("the sine input is one-dimensional")
        return sine_input(params.get("plateau", 1.0), params.get("outer", 1.5))
    if kind == "bump_resolvent":
        return resolvent_input(n, params.get("ext_imag_radius", 0.1))
    if kind == "zero":
        return zero_input(n)
    raise ValueError(f"unknown input kind {kind!r}")


@dataclass(frozen=True)
class DiracTerm:
    """``coef * d^gamma delta_point``; pairs with a test function as ``coef (-1)^|gamma| d^gamma phi(point)``."""

    point: tuple
    gamma: tuple = (0,)
    coef: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in np.atleast_1d(self.point)))
        object.__setattr__(self, "gamma", tuple(int(v) for v in np.atleast_1d(self.gamma)))
        if len(self.gamma) != len(self.point):
            raise ValueError("multi-index and point dimension differ")


@dataclass(frozen=True)
class CompactDistribution:
    smooth: TestFunction | None = None
    diracs: tuple = ()
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "diracs", tuple(self.diracs))

    def check_extension_claim(self, r):
        """Dirac points must avoid B(0, r) when the extension hypothesis is claimed there."""
        bad = [d for d in self.diracs if np.linalg.norm(d.point) < r]
        if bad:
            raise ValueError(f"Dirac terms inside B(0, {r}): {[d.point for d in bad]}")

    def scaled(self, c):
        return CompactDistribution(
            None if self.smooth is None else self.smooth.scaled(c),
            tuple(DiracTerm(d.point, d.gamma, c * d.coef) for d in self.diracs),
            self.dimension,
        )


def distribution_from_spec(spec, n=1):
    smooth = spec.get("smooth")
    diracs = tuple(
        DiracTerm(d["point"], d.get("gamma", [0] * n),
                  complex(*d["coef"]) if isinstance(d.get("coef"), list) else complex(d.get("coef", 1.0)))
        for d in spec.get("diracs", [])
    )
    return CompactDistribution(None if smooth is None else input_from_spec(smooth, n), diracs, n)
