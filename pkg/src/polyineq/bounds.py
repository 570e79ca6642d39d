"""Closed-form constants: Chebyshev data, Bernstein/Markov constants, polarization bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .lp import INF, ExponentError, dual_exponent, format_exponent, parse_exponent

S_WINDOW = 1e-6  # |t| <= 1 - S_WINDOW for S-branch derivatives


class BoundError(ValueError):
    """Parameters outside the range where a bound is defined."""


@dataclass(frozen=True)
class BoundSpec:
    """One named constant with the parameters it was evaluated at.

    ``anchor`` is a short label of the result the constant comes from.
    ``sharp`` marks constants that are known to be attained.
    """

    name: str
    value: float
    anchor: str
    m: int | None = None
    k: int | None = None
    n: int | None = None
    p: float | None = None
    r: float | None = None
    field: str | None = None
    sharp: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise BoundError(f"{self.name}: non-finite value")

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["p"] is not None:
            d["p"] = format_exponent(d["p"])
        return d

    def csv_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            return format_exponent(v) if isinstance(v, float) and v == INF else str(v)
        return [self.name, fmt(self.m), fmt(self.k),
                "" if self.p is None else format_exponent(self.p),
                fmt(self.r), repr(float(self.value)), self.anchor]


CSV_HEADER = ["name", "m", "k", "p", "r", "value", "anchor"]


def _pow0(base: float, e: float) -> float:
    # 0^0 = 1 convention (k = m)
    return 1.0 if base == 0 and e == 0 else base**e


# -- Chebyshev -------------------------------------------------------------------

def cheb_T_coeffs(n: int) -> list[int]:
    """Ascending integer power coefficients of ``T_n``."""
    if n < 0:
        raise BoundError("n must be nonnegative")
    prev, cur = [1], [0, 1]
    if n == 0:
        return prev
    for _ in range(n - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def cheb_deriv_eval(kind: str, n: int, k: int, t: float) -> float:
    """``k``-th derivative of ``cos(n arccos t)`` (kind "T") or ``sin(n arccos t)`` ("S").

    Values for ``k >= 2`` follow from the k-times differentiated Chebyshev
    equation ``(1-t^2) y'' - t y' + n^2 y = 0``.
    """
    if kind not in ("T", "S"):
        raise BoundError(f"kind must be 'T' or 'S', got {kind!r}")
    if n < 0 or k < 0:
        raise BoundError("n and k must be nonnegative")
    if not abs(t) <= 1 - S_WINDOW:
        raise BoundError(f"|t| must be at most 1 - {S_WINDOW:g}, got {t}")
    th = math.acos(t)
    s = math.sin(th)
    if kind == "T":
        y0, y1 = math.cos(n * th), n * math.sin(n * th) / s
    else:
        y0, y1 = math.sin(n * th), -n * math.cos(n * th) / s
    if k == 0:
        return y0
    w = 1.0 - t * t
    for j in range(k - 1):
        y0, y1 = y1, ((2 * j + 1) * t * y1 - (n * n - j * j) * y0) / w
    return y1


def markov_factor(n: int, k: int) -> int:
    """``T_n^{(k)}(1) = prod_{j<k} (n^2 - j^2) / (2j + 1)``, exactly."""
    if n < 0 or not 0 <= k <= n:
        raise BoundError(f"need 0 <= k <= n, got n={n}, k={k}")
    val = Fraction(1)
    for j in range(k):
        val *= Fraction(n * n - j * j, 2 * j + 1)
    assert val.denominator == 1
    return int(val)


def m_k_value(n: int, k: int, t: float) -> float:
    """Envelope ``(T_n^{(k)}(t))^2 + (S_n^{(k)}(t))^2``."""
    return cheb_deriv_eval("T", n, k, t) ** 2 + cheb_deriv_eval("S", n, k, t) ** 2


# -- L_p constants -----------------------------------------------------------------

def lambda_exponent(m: int, p) -> float:
    """``p`` on ``[1, m']``, ``m'`` on ``[m', m]``, ``p'`` on ``[m, inf]``."""
    if m < 2:
        raise BoundError("lambda needs m >= 2")
    p = parse_exponent(p)
    mp = m / (m - 1)
    if p <= mp:
        return p
    if p <= m:
        return mp
    return dual_exponent(p)


def _check_mk(m: int, k: int) -> None:
    if m < 1 or not 1 <= k <= m:
        raise BoundError(f"need 1 <= k <= m, got m={m}, k={k}")


def _check_r(r: float) -> None:
    if not 0 <= r < 1:
        raise BoundError(f"r must lie in [0, 1), got {r}")


def bernstein_bound_lp(m: int, k: int, p, r: float) -> float:
    """``k! / (1 - r^lam)^(k/lam)``: the factor in front of ``||P||`` at ``||x|| = r``."""
    _check_mk(m, k)
    _check_r(r)
    lam = lambda_exponent(max(m, 2), p)
    return math.factorial(k) / (1 - r**lam) ** (k / lam)


def markov_const_lp(m: int, k: int, p, field: str = "complex") -> float:
    """``C_{k,m} = k! m^{m/lam} / ((m-k)^{(m-k)/lam} k^{k/lam})``.

    Over the reals the constant is multiplied by ``2^(m-1)``.
    """
    _check_mk(m, k)
    if field not in ("real", "complex"):
        raise BoundError(f"unknown field {field!r}")
    lam = lambda_exponent(max(m, 2), p)
    c = math.factorial(k) * m ** (m / lam) / (_pow0(m - k, (m - k) / lam) * k ** (k / lam))
    return c * 2 ** (m - 1) if field == "real" else c


def real_banach_bounds(m: int, k: int, r) -> tuple[float, float]:
    """Bounds on ``||D^k P(x)||`` (polynomial, multilinear) on real Banach spaces.

    ``r`` is ``||x||`` for the Bernstein-type bounds, or the string
    ``"markov"`` for the uniform bounds on the closed ball.
    """
    _check_mk(m, k)
    c = math.comb(m, k)
    if r == "markov":
        base = m ** (m / 2) / _pow0(m - k, (m - k) / 2)
        return (c * math.factorial(k) * base / k ** (k / 2),
                c * base * k ** (k / 2))
    r = float(r)
    _check_r(r)
    den = (1 - r * r) ** (k / 2)
    return c * math.factorial(k) / den, c * k**k / den


def firstgen_bound(n: int, px: float, r: float) -> float:
    """``min(n sqrt(1 - P(x)^2) / sqrt(1 - r^2), n^2)`` for ``||P|| <= 1``."""
    _check_r(r)
    if abs(px) > 1:
        raise BoundError(f"|P(x)| = {abs(px)} exceeds 1: the instance is not normalized")
    return min(n * math.sqrt(1 - px * px) / math.sqrt(1 - r * r), float(n * n))


def hilbert_pointwise_bound(n: int, k: int, r: float) -> float:
    """``sqrt(M_k(r))``, the pointwise bound on ``||D^k P(x)||`` at ``||x|| = r``."""
    if not 0 <= r <= 1 - S_WINDOW:
        raise BoundError(f"r must lie in [0, 1 - {S_WINDOW:g}], got {r}")
    return math.sqrt(m_k_value(n, k, r))


# -- Gamma ---------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x: float) -> float:
    """Lanczos approximation (g = 7) of the gamma function for ``x > 0``.

    Arguments below 1/2 are shifted up by ``Gamma(x) = Gamma(x + 1) / x``.
    """
    x = float(x)
    if not x > 0:
        raise BoundError(f"gamma_fn needs x > 0, got {x}")
    if x > 171.6:
        raise BoundError("gamma_fn overflows binary64 beyond x = 171.6")
    if x < 0.5:
        return gamma_fn(x + 1) / x
    z = x - 1
    a = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        a += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * a * math.exp((z + 0.5) * math.log(t) - t)


# -- polarization constants ------------------------------------------------------------

def _is_pow2(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


def polarization_bounds(m: int, p, field: str | None = None) -> list[BoundSpec]:
    """Every available upper bound on the polarization constant of ``l_p`` in degree ``m``.

    ``field`` restricts to bounds valid over that field; ``None`` returns all,
    each tagged with the field it holds for ("any" when both).
    """
    if m < 2:
        raise BoundError("polarization constants need m >= 2")
    p = parse_exponent(p)
    if field not in (None, "real", "complex"):
        raise BoundError(f"unknown field {field!r}")
    want = (lambda f: True) if field is None else (lambda f: f in ("any", field))
    out = []
    lam = lambda_exponent(m, p)
    mp = m / (m - 1)
    if want("any"):
        out.append(BoundSpec("polar_main", m ** (m / lam) / math.factorial(m),
                             "L_p polarization estimate", m=m, p=p, field="any",
                             sharp=p <= mp))
    if want("any") and p != INF and p >= m >= 3:
        g = gamma_fn((p + 1) / 2) / math.sqrt(math.pi)
        out.append(BoundSpec("polar_gamma",
                             (2 * m) ** (m / 2) / math.factorial(m) * g ** (m / p),
                             "gamma-function estimate for p >= m >= 3", m=m, p=p, field="any"))
    if want("complex") and p == INF:
        out.append(BoundSpec("polar_harris_linf",
                             m ** (m / 2) * (m + 1) ** ((m + 1) / 2)
                             / (2**m * math.factorial(m)),
                             "complex l_inf estimate", m=m, p=p, field="complex"))
    if want("complex") and _is_pow2(m):
        e = 1.0 if p == INF else abs(p - 2) / p
        out.append(BoundSpec("polar_harris_pow2", (m**m / math.factorial(m)) ** e,
                             "complex estimate for m a power of two", m=m, p=p,
                             field="complex"))
    if m == 2 and p <= 2 and want("any"):
        out.append(BoundSpec("polar_m2_exact", 2 ** ((2 - p) / p),
                             "degree-two constant, 1 <= p <= 2", m=m, p=p, field="any",
                             sharp=True))
    if m == 2 and p >= 2 and want("real"):
        val = 2.0 if p == INF else 2 ** ((p - 2) / p)
        out.append(BoundSpec("polar_m2_real", val, "real degree-two constant, p >= 2",
                             m=m, p=p, field="real", sharp=True))
    return out


def constants_table(ms, ks, ps, rs=(), field: str = "complex") -> list[BoundSpec]:
    """Rows for the ``constants`` command over the given parameter grids.

    For each ``(m, p)``: the Markov constants for every admissible ``k``, the
    Bernstein factors at each ``r``, and the polarization bounds.
    """
    rows = []
    for m in ms:
        for p in ps:
            p = parse_exponent(p)
            for k in ks:
                if not 1 <= k <= m:
                    continue
                rows.append(BoundSpec("markov_const_lp", markov_const_lp(m, k, p, field),
                                      "L_p Markov constant", m=m, k=k, p=p, field=field,
                                      sharp=field == "complex" and p <= m / max(m - 1, 1)))
                for r in rs:
                    rows.append(BoundSpec("bernstein_bound_lp", bernstein_bound_lp(m, k, p, r),
                                          "L_p Bernstein factor", m=m, k=k, p=p, r=float(r),
                                          field=field))
            if m >= 2:
                rows.extend(polarization_bounds(m, p, field))
    return rows


__all__ = [
    "BoundError", "BoundSpec", "CSV_HEADER", "ExponentError", "bernstein_bound_lp",
    "cheb_T_coeffs", "cheb_deriv_eval", "constants_table", "firstgen_bound", "gamma_fn",
    "hilbert_pointwise_bound", "lambda_exponent", "m_k_value", "markov_const_lp",
    "markov_factor", "polarization_bounds", "real_banach_bounds",
]
