"""l_p geometry on K^n and the product space H x C with the max norm."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


class ExponentError(ValueError):
    """Exponent outside its admissible range."""


def parse_exponent(p) -> float:
    """Accept a number or the strings ``"inf"``/``"infinity"``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return INF
        p = float(s)
    p = float(p)
    if not p >= 1:
        raise ExponentError(f"exponent must lie in [1, inf], got {p}")
    return p


def dual_exponent(p: float) -> float:
    """Conjugate exponent with 1/p + 1/p' = 1."""
    p = parse_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def format_exponent(p: float) -> str:
    return "inf" if p == INF else repr(float(p))


def lp_norm(x, p) -> float:
    """``(sum |x_i|^p)^(1/p)``, ``max |x_i|`` for p = inf."""
    a = np.abs(np.asarray(x))
    if a.size == 0:
        return 0.0
    if p == INF:
        return float(a.max())
    big = a.max()
    if big == 0:
        return 0.0
    if p == 1:
        return float(a.sum())
    return float(big * np.sum((a / big) ** p) ** (1.0 / p))


def _phase(g):
    a = np.abs(g)
    out = np.ones_like(g)
    nz = a > 0
    out[nz] = g[nz] / a[nz]
    return out


def dual_attainer(g, p) -> tuple[np.ndarray, float]:
    """Point of the unit l_p ball maximizing ``Re sum_i g_i conj(x_i)``.

    Returns ``(x, ||g||_{p'})``. Ties for p = 1 go to the lowest index.
    """
    g = np.asarray(g)
    if not np.any(g != 0):
        raise ExponentError("dual_attainer needs a nonzero vector")
    p = parse_exponent(p)
    if np.iscomplexobj(g):
        g = g.astype(np.complex128)
    else:
        g = g.astype(np.float64)
    a = np.abs(g)
    ph = _phase(g)
    if p == 1:
        j = int(np.argmax(a))
        x = np.zeros_like(g)
        x[j] = ph[j]
        return x, float(a[j])
    if p == INF:
        return ph, float(a.sum())
    q = dual_exponent(p)
    scale = a.max()
    w = (a / scale) ** (q - 1)
    x = ph * w / lp_norm(w, p)
    return x, lp_norm(g, q)


@dataclass(frozen=True)
class SpaceDesc:
    """A finite-dimensional normed space over R or C.

    ``kind="lp"``: l_p^n. ``kind="hxc"``: l_2^n x K with norm
    ``max(||x||_2, |z|)``; vectors are stored as ``(x_1..x_n, z)``.
    """

    kind: str
    n: int
    p: float = 2.0
    field: str = "real"

    def __post_init__(self):
        if self.kind not in ("lp", "hxc"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field {self.field!r}")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "p", parse_exponent(self.p) if self.kind == "lp" else 2.0)

    @classmethod
    def lp(cls, n: int, p=2.0, field: str = "real") -> "SpaceDesc":
        return cls("lp", n, p, field)

    @classmethod
    def hilbert_times_c(cls, n: int, field: str = "complex") -> "SpaceDesc":
        return cls("hxc", n, 2.0, field)

    @property
    def coords(self) -> int:
        return self.n + 1 if self.kind == "hxc" else self.n

    @property
    def dtype(self):
        return np.complex128 if self.field == "complex" else np.float64

    def norm(self, x) -> float:
        x = np.asarray(x)
        if self.kind == "hxc":
            return max(lp_norm(x[:-1], 2), float(abs(x[-1])))
        return lp_norm(x, self.p)

    def dual_norm(self, g) -> float:
        """``sup |sum g_i x_i|`` over the unit ball."""
        g = np.asarray(g)
        if self.kind == "hxc":
            return lp_norm(g[:-1], 2) + float(abs(g[-1]))
        return lp_norm(g, dual_exponent(self.p))

    def maximize_linear(self, g) -> np.ndarray:
        """Unit vector ``x`` with ``sum g_i x_i = dual_norm(g)`` (real, nonnegative)."""
        g = np.asarray(g, dtype=self.dtype)
        if not np.any(g != 0):
            x = np.zeros(self.coords, dtype=self.dtype)
            x[0] = 1
            return x
        if self.kind == "hxc":
            x = np.empty(self.coords, dtype=self.dtype)
            gh = g[:-1]
            nh = lp_norm(gh, 2)
            if nh > 0:
                x[:-1] = np.conj(gh) / nh
            else:
                x[:-1] = 0
                x[0] = 1
            x[-1] = np.conj(_phase(g[-1:]))[0]
            return x
        x, _ = dual_attainer(g, self.p)
        return np.conj(x)

    def sample_sphere(self, rng) -> np.ndarray:
        """Random unit vector; deterministic for a given generator state."""
        rng = np.random.default_rng(rng)
        k = self.coords
        v = rng.standard_normal(k)
        if self.field == "complex":
            v = v + 1j * rng.standard_normal(k)
        if self.kind == "hxc":
            return v / max(lp_norm(v[:-1], 2), abs(v[-1]))
        return v / lp_norm(v, self.p)

    def describe(self) -> str:
        if self.kind == "hxc":
            return f"H x C(n={self.n}, {self.field})"
        return f"l_{format_exponent(self.p)}^{self.n}({self.field})"


def rademacher_average(vectors, p, power: float) -> float:
    """``(2^-m sum_eps ||sum eps_i x_i||_p^power)^(1/power)``; power=inf gives the max."""
    xs = np.asarray(vectors)
    m = xs.shape[0]
    norms = [lp_norm(np.tensordot(np.array(eps), xs, axes=1), p)
             for eps in itertools.product((1.0, -1.0), repeat=m)]
    norms = np.array(norms)
    if power == INF:
        return float(norms.max())
    big = norms.max()
    if big == 0:
        return 0.0
    return float(big * np.mean((norms / big) ** power) ** (1.0 / power))


def ww_sides(vectors, p, lam) -> tuple[float, float]:
    """Both sides of the Rademacher l_p inequality.

    ``(E ||sum r_i x_i||_p^{lam'})^{1/lam'} <= (sum ||x_i||_p^lam)^{1/lam}``
    for ``1 <= lam <= min(p, p')``. For two vectors this is the generalized
    Clarkson inequality. Returns ``(lhs, rhs)``.
    """
    p = parse_exponent(p)
    lam = parse_exponent(lam)
    cap = min(p, dual_exponent(p))
    if lam > cap * (1 + 1e-12):
        raise ExponentError(f"lambda={lam} exceeds min(p, p')={cap}")
    xs = np.asarray(vectors)
    lhs = rademacher_average(xs, p, dual_exponent(lam))
    sizes = np.array([lp_norm(x, p) for x in xs])
    big = sizes.max()
    rhs = 0.0 if big == 0 else float(big * np.sum((sizes / big) ** lam) ** (1.0 / lam))
    return lhs, rhs


def ww_margin(vectors, p, lam) -> float:
    """RHS minus LHS of :func:`ww_sides`."""
    lhs, rhs = ww_sides(vectors, p, lam)
    return rhs - lhs
