"""Algebraic polynomials on [-1, 1] and trigonometric polynomials on the circle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as cheb

INTERVAL_NODES = 4097
CIRCLE_NODES = 8192
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class UniPoly:
    """Real polynomial ``sum_j coeffs[j] t^j``."""

    coeffs: tuple

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros_like(t)
        for a in reversed(self.coeffs):
            acc = acc * t + a
        return acc

    def scaled(self, c: float) -> "UniPoly":
        return UniPoly(tuple(c * a for a in self.coeffs))

    @classmethod
    def chebyshev(cls, n: int) -> "UniPoly":
        from .bounds import cheb_T_coeffs
        return cls(tuple(cheb_T_coeffs(n)))


def deriv_uni(p: UniPoly, k: int = 1) -> UniPoly:
    """Exact k-th derivative."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    c = list(p.coeffs)
    for _ in range(k):
        c = [j * c[j] for j in range(1, len(c))] or [0.0]
    return UniPoly(tuple(c))


def _golden_max(f, a: float, b: float, iters: int = 80) -> tuple[float, float]:
    # maximize f on [a, b], assumed unimodal there
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(a), abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def sup_abs(f, nodes, periodic: float | None = None, top: int = 5) -> tuple[float, float]:
    """``max |f|`` by a grid pass over sorted ``nodes`` plus golden refinement.

    ``f`` must be vectorized. Each of the ``top`` best nodes is refined on the
    bracket formed by its neighbours (wrapping around when ``periodic`` gives
    the period). Returns ``(argmax, max)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    vals = np.abs(f(nodes))
    best = int(np.argmax(vals))
    arg, val = float(nodes[best]), float(vals[best])
    g = lambda s: float(np.abs(f(np.array([s])))[0])  # noqa: E731
    N = len(nodes)
    for i in np.argsort(-vals, kind="stable")[:top]:
        if periodic is None:
            a = nodes[max(i - 1, 0)]
            b = nodes[min(i + 1, N - 1)]
        else:
            a = nodes[i - 1] - (periodic if i == 0 else 0.0)
            b = nodes[(i + 1) % N] + (periodic if i == N - 1 else 0.0)
        s, v = _golden_max(g, float(a), float(b))
        if v > val:
            arg, val = s, v
    return arg, val


def interval_nodes(count: int = INTERVAL_NODES) -> np.ndarray:
    """Chebyshev extreme points in increasing order, endpoints included."""
    return np.cos(np.pi * np.arange(count - 1, -1, -1) / (count - 1))


def sup_norm_interval(p: UniPoly) -> float:
    """``max_{[-1, 1]} |p|``.

    Evaluates through the Chebyshev expansion (Clenshaw), which stays
    accurate at degrees where power-basis Horner loses digits to cancellation.
    """
    c = cheb.poly2cheb(np.array(p.coeffs))
    return sup_abs(lambda t: cheb.chebval(t, c), interval_nodes())[1]


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """``T(t) = sum_{k=-n}^{n} c_k e^{ikt}`` with ``c`` indexed from ``-n``.

    ``n`` is the declared degree; trailing zero coefficients are allowed.
    """

    n: int
    c: tuple

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if self.n < 0 or c.shape != (2 * self.n + 1,):
            raise ValueError(f"degree {self.n} needs {2 * self.n + 1} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "c", tuple(complex(v) for v in c))

    @cached_property
    def coeffs(self) -> np.ndarray:
        return np.array(self.c)

    @cached_property
    def is_real(self) -> bool:
        c = self.coeffs
        return bool(np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-14 * max(1, np.abs(c).max())))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        ks = np.arange(-self.n, self.n + 1)
        vals = np.exp(1j * np.multiply.outer(t, ks)) @ self.coeffs
        return vals.real if self.is_real else vals

    def deriv(self) -> "TrigPoly":
        ks = np.arange(-self.n, self.n + 1)
        return TrigPoly(self.n, tuple(1j * ks * self.coeffs))

    def scaled(self, s) -> "TrigPoly":
        return TrigPoly(self.n, tuple(s * self.coeffs))

    @classmethod
    def random_real(cls, n: int, rng=None) -> "TrigPoly":
        rng = np.random.default_rng(rng)
        pos = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c0 = rng.standard_normal()
        return cls(n, tuple(np.concatenate([np.conj(pos[::-1]), [c0], pos])))


def circle_nodes(count: int = CIRCLE_NODES) -> np.ndarray:
    return 2 * np.pi * np.arange(count) / count


def sup_norm_circle(T: TrigPoly) -> float:
    """``sup_t |T(t)|``."""
    return sup_abs(T, circle_nodes(), periodic=2 * np.pi)[1]


def szego_sides(T: TrigPoly, grid=None) -> tuple[float, float]:
    """``(max_t n^2 T(t)^2 + T'(t)^2, n^2)`` for a real ``T``, on a uniform grid."""
    if not T.is_real:
        raise ValueError("Szego's inequality needs a real trigonometric polynomial")
    t = circle_nodes() if grid is None else np.asarray(grid, dtype=float)
    n = T.n
    v, d = T(t), T.deriv()(t)
    return float(np.max(n * n * v * v + d * d)), float(n * n)


def szego_margin(T: TrigPoly, grid=None) -> float:
    """``min_t (n^2 - n^2 T(t)^2 - T'(t)^2)`` for a real ``T`` with ``sup |T| <= 1``.

    Uses the declared degree ``n``; ``grid`` defaults to 8192 uniform points.
    """
    lhs, rhs = szego_sides(T, grid)
    return rhs - lhs


def efet_sides(T: TrigPoly, omegas=None) -> tuple[float, float]:
    """``(max_w sup_t |T'(t) cos w + n T(t) sin w|, n sup|T|)``.

    ``omegas`` defaults to 64 uniform angles in ``[0, 2 pi)``.
    """
    n = T.n
    om = np.linspace(0, 2 * np.pi, 64, endpoint=False) if omegas is None else np.asarray(omegas)
    ks = np.arange(-n, n + 1)
    lhs = 0.0
    for w in om:
        S = TrigPoly(n, tuple(T.coeffs * (1j * ks * math.cos(w) + n * math.sin(w))))
        lhs = max(lhs, sup_norm_circle(S))
    return float(lhs), float(n * sup_norm_circle(T))


def efet_margin(T: TrigPoly, omegas=None) -> float:
    """``min_w (n sup|T| - sup_t |T'(t) cos w + n T(t) sin w|)``."""
    lhs, rhs = efet_sides(T, omegas)
    return rhs - lhs
