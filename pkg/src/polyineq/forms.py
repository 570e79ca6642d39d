"""Symmetric multilinear forms, homogeneous and general polynomials.

A :class:`SymmetricForm` stores one coefficient per orbit of index tuples,
keyed by the sorted 1-based tuple ``(i_1 <= ... <= i_m)``. The same object is
used as its associated homogeneous polynomial ``x -> L(x, ..., x)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import kernels

FIELDS = ("real", "complex")
MAX_ORDER = 6
MAX_DIM = 8
# bilinear and linear forms are cheap, so they get a larger cap
MAX_DIM_LOW_ORDER = 16


class FormError(ValueError):
    """Invalid form, polynomial or argument shape."""


def canonical_keys(order: int, dim: int) -> list[tuple[int, ...]]:
    """All sorted 1-based index tuples of length ``order`` over ``1..dim``."""
    return list(itertools.combinations_with_replacement(range(1, dim + 1), order))


def orbit_size(key: Sequence[int]) -> int:
    """Number of distinct permutations of ``key``: m! / prod(multiplicities!)."""
    counts = np.bincount(np.asarray(key, dtype=int)) if len(key) else np.zeros(1, int)
    out = math.factorial(len(key))
    for c in counts:
        out //= math.factorial(int(c))
    return out


def _check_field(fld: str) -> None:
    if fld not in FIELDS:
        raise FormError(f"unknown field {fld!r}")


def _check_caps(order: int, dim: int) -> None:
    if order < 0 or dim < 1:
        raise FormError(f"need order >= 0 and dim >= 1, got order={order}, dim={dim}")
    if order > MAX_ORDER:
        raise FormError(f"order {order} exceeds the cap {MAX_ORDER}")
    cap = MAX_DIM_LOW_ORDER if order <= 2 else MAX_DIM
    if dim > cap:
        raise FormError(f"dim {dim} exceeds the cap {cap} for order {order}")


def _as_vector(x, dim: int) -> np.ndarray:
    v = np.asarray(x)
    if v.ndim != 1 or v.shape[0] != dim:
        raise FormError(f"expected a vector of length {dim}, got shape {v.shape}")
    if np.iscomplexobj(v):
        return v.astype(np.complex128)
    return v.astype(np.float64)


@dataclass(frozen=True, eq=False)
class SymmetricForm:
    """Symmetric ``order``-linear form on K^dim.

    Parameters
    ----------
    order, dim : int
    field : {"real", "complex"}
    coeffs : mapping
        Sorted 1-based index tuple -> coefficient. Missing keys are zero.
    """

    order: int
    dim: int
    field: str = "real"
    coeffs: Mapping[tuple[int, ...], complex] = dc_field(default_factory=dict)

    def __post_init__(self):
        _check_field(self.field)
        _check_caps(self.order, self.dim)
        clean = {}
        for key, val in dict(self.coeffs).items():
            key = tuple(int(i) for i in key)
            if len(key) != self.order:
                raise FormError(f"key {key} has length {len(key)}, expected {self.order}")
            if any(b < a for a, b in zip(key, key[1:])):
                raise FormError(f"key {key} is not sorted")
            if key and (key[0] < 1 or key[-1] > self.dim):
                raise FormError(f"key {key} out of range 1..{self.dim}")
            if self.field == "real":
                if np.iscomplexobj(val) and complex(val).imag != 0:
                    raise FormError("complex coefficient in a real form")
                val = float(np.real(val))
            else:
                val = complex(val)
            if val != 0:
                clean[key] = val
        object.__setattr__(self, "coeffs", clean)

    # construction helpers ------------------------------------------------

    @classmethod
    def from_tensor(cls, tensor, field: str | None = None) -> "SymmetricForm":
        """Form from a dense array of shape ``(dim,) * order``.

        Only the sorted-index entries are read; the caller is responsible for
        symmetry.
        """
        arr = np.asarray(tensor)
        order = arr.ndim
        dim = arr.shape[0] if order else 1
        if field is None:
            field = "complex" if np.iscomplexobj(arr) else "real"
        coeffs = {}
        for key in canonical_keys(order, dim):
            val = arr[tuple(i - 1 for i in key)]
            if val != 0:
                coeffs[key] = val
        return cls(order, dim, field, coeffs)

    @classmethod
    def from_vector(cls, order: int, dim: int, field: str, values) -> "SymmetricForm":
        """Inverse of :meth:`to_vector` (coefficients in canonical key order)."""
        keys = canonical_keys(order, dim)
        values = np.asarray(values)
        if values.shape != (len(keys),):
            raise FormError(f"expected {len(keys)} coefficients, got {values.shape}")
        return cls(order, dim, field, dict(zip(keys, values.tolist())))

    @classmethod
    def random(cls, order: int, dim: int, field: str = "real", rng=None) -> "SymmetricForm":
        """Independent standard normal coefficients on the canonical keys."""
        rng = np.random.default_rng(rng)
        nkeys = math.comb(dim + order - 1, order)
        vals = rng.standard_normal(nkeys)
        if field == "complex":
            vals = vals + 1j * rng.standard_normal(nkeys)
        return cls.from_vector(order, dim, field, vals)

    @classmethod
    def constant(cls, value, dim: int, field: str = "real") -> "SymmetricForm":
        return cls(0, dim, field, {(): value})

    # views ----------------------------------------------------------------

    @property
    def dtype(self):
        return np.complex128 if self.field == "complex" else np.float64

    def to_vector(self) -> np.ndarray:
        keys = canonical_keys(self.order, self.dim)
        return np.array([self.coeffs.get(k, 0) for k in keys], dtype=self.dtype)

    @cached_property
    def tensor(self) -> np.ndarray:
        """Dense flat tensor of length ``dim**order`` (read only)."""
        n, m = self.dim, self.order
        flat = np.zeros(n**m, dtype=self.dtype)
        strides = n ** np.arange(m - 1, -1, -1)
        for key, val in self.coeffs.items():
            idx0 = np.array(key) - 1
            for perm in set(itertools.permutations(idx0)):
                flat[int(np.dot(perm, strides)) if m else 0] = val
        flat.setflags(write=False)
        return flat

    def dense(self) -> np.ndarray:
        return self.tensor.reshape((self.dim,) * self.order)

    def with_field(self, field: str) -> "SymmetricForm":
        return SymmetricForm(self.order, self.dim, field, self.coeffs)

    def scaled(self, c) -> "SymmetricForm":
        return SymmetricForm(self.order, self.dim, self.field,
                             {k: c * v for k, v in self.coeffs.items()})

    def max_abs_diff(self, other: "SymmetricForm") -> float:
        if (self.order, self.dim) != (other.order, other.dim):
            raise FormError("forms have different shapes")
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) for k in keys),
                   default=0.0)

    def __call__(self, *args):
        return eval_multilinear(self, args)

    def __repr__(self):
        return (f"SymmetricForm(order={self.order}, dim={self.dim}, field={self.field!r}, "
                f"nnz={len(self.coeffs)})")


@dataclass(frozen=True, eq=False)
class GeneralPoly:
    """Polynomial ``P_0 + P_1 + ... + P_n`` with ``parts[k]`` of order ``k``.

    ``None`` entries are zero parts.
    """

    parts: tuple
    dim: int
    field: str = "real"

    def __post_init__(self):
        _check_field(self.field)
        parts = tuple(self.parts)
        if not parts:
            raise FormError("a polynomial needs at least the constant part")
        for k, part in enumerate(parts):
            if part is None:
                continue
            if part.order != k or part.dim != self.dim:
                raise FormError(f"part {k} has order {part.order} and dim {part.dim}")
            if part.field == "complex" and self.field == "real":
                raise FormError("complex part in a real polynomial")
        object.__setattr__(self, "parts", parts)

    @property
    def degree(self) -> int:
        return len(self.parts) - 1

    @classmethod
    def from_homogeneous(cls, form: SymmetricForm) -> "GeneralPoly":
        parts = [None] * form.order + [form]
        return cls(tuple(parts), form.dim, form.field)

    @classmethod
    def random(cls, degree: int, dim: int, field: str = "real", rng=None) -> "GeneralPoly":
        rng = np.random.default_rng(rng)
        parts = tuple(SymmetricForm.random(k, dim, field, rng) for k in range(degree + 1))
        return cls(parts, dim, field)

    def present(self):
        """Yield ``(k, part)`` for the nonzero parts."""
        for k, part in enumerate(self.parts):
            if part is not None:
                yield k, part

    def scaled(self, c) -> "GeneralPoly":
        return GeneralPoly(tuple(None if p is None else p.scaled(c) for p in self.parts),
                           self.dim, self.field)

    def with_field(self, field: str) -> "GeneralPoly":
        return GeneralPoly(tuple(None if p is None else p.with_field(field) for p in self.parts),
                           self.dim, field)

    def __call__(self, x):
        return eval_general(self, x)

    def gradient(self, x) -> np.ndarray:
        """Coefficient vector of ``DP(x)``, so that ``DP(x)y = gradient(x) @ y``."""
        x = _as_vector(x, self.dim)
        g = np.zeros(self.dim, dtype=np.result_type(x.dtype, _dtype_of(self)))
        for k, part in self.present():
            if k == 0:
                continue
            g = g + k * kernels.contract_tail(part.tensor, self.dim, np.tile(x, (k - 1, 1)))
        return g


def _dtype_of(P) -> type:
    return np.complex128 if P.field == "complex" else np.float64


@dataclass(frozen=True, eq=False)
class MonomialPoly:
    """Homogeneous polynomial as ``sum_alpha c_alpha x^alpha`` (exponent tuples)."""

    degree: int
    dim: int
    field: str = "real"
    coeffs: Mapping[tuple[int, ...], complex] = dc_field(default_factory=dict)

    def __post_init__(self):
        _check_field(self.field)
        clean = {}
        for alpha, c in dict(self.coeffs).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.dim or min(alpha, default=0) < 0:
                raise FormError(f"bad exponent {alpha}")
            if sum(alpha) != self.degree:
                raise FormError(f"exponent {alpha} has total degree {sum(alpha)}, "
                                f"expected {self.degree} (mixed degrees)")
            c = complex(c) if self.field == "complex" else float(np.real(c))
            if c != 0:
                clean[alpha] = c
        object.__setattr__(self, "coeffs", clean)

    def __call__(self, x):
        x = np.asarray(x)
        total = 0
        for alpha, c in self.coeffs.items():
            total = total + c * np.prod(x ** np.array(alpha))
        return total

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts)
        if not self.coeffs:
            return np.zeros(pts.shape[0])
        alphas = np.array(list(self.coeffs.keys()))
        cs = np.array(list(self.coeffs.values()))
        out = np.zeros(pts.shape[0], dtype=np.result_type(pts.dtype, cs.dtype))
        for chunk in range(0, pts.shape[0], 4096):
            blk = pts[chunk:chunk + 4096]
            mons = np.prod(blk[:, None, :] ** alphas[None, :, :], axis=2)
            out[chunk:chunk + 4096] = mons @ cs
        return out


# -- operations ------------------------------------------------------------

def eval_multilinear(L: SymmetricForm, args) -> complex:
    """``L(x_1, ..., x_m)``; real forms accept complex arguments."""
    args = list(args)
    if len(args) != L.order:
        raise FormError(f"form of order {L.order} got {len(args)} arguments")
    if L.order == 0:
        return L.tensor[0]
    # real forms extend to complex arguments through the same contraction
    xs = np.stack([_as_vector(a, L.dim) for a in args])
    val = kernels.contract_all(L.tensor, L.dim, xs)
    return val.item()


def eval_poly(P: SymmetricForm, x) -> complex:
    """``P(x) = L(x, ..., x)``."""
    x = _as_vector(x, P.dim)
    return eval_multilinear(P, [x] * P.order)


def eval_general(P: GeneralPoly, x) -> complex:
    x = _as_vector(x, P.dim)
    return sum((eval_poly(part, x) for _, part in P.present()), 0.0)


def polarize(P) -> SymmetricForm:
    """Recover the symmetric form of a homogeneous polynomial from its values.

    Uses the sign-pattern average
    ``L(x_1..x_m) = (2^m m!)^-1 sum_eps eps_1...eps_m P(sum eps_i x_i)``
    evaluated at basis vectors; ``P`` is only ever evaluated, never read.
    Accepts a :class:`SymmetricForm` or a :class:`MonomialPoly`.
    """
    if isinstance(P, SymmetricForm):
        m, n, fld = P.order, P.dim, P.field
        evaluate = lambda pts: kernels.eval_batch(P.tensor, n, m, pts)  # noqa: E731
    elif isinstance(P, MonomialPoly):
        m, n, fld = P.degree, P.dim, P.field
        evaluate = P.eval_many
    else:
        raise FormError(f"cannot polarize {type(P).__name__}")
    keys = canonical_keys(m, n)
    if m == 0:
        return SymmetricForm(0, n, fld, {(): evaluate(np.zeros((1, n)))[0]})
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=m)))  # (2^m, m)
    sign_prod = signs.prod(axis=1)
    key_idx = np.array(keys) - 1  # (K, m)
    # points[k, s] = sum_i signs[s, i] * e_{key_idx[k, i]}
    nk, ns = len(keys), len(signs)
    pts = np.zeros((nk, ns, n))
    rows, cols = np.arange(nk)[:, None], np.arange(ns)[None, :]
    for i in range(m):
        pts[rows, cols, key_idx[:, i][:, None]] += signs[None, :, i]
    vals = evaluate(pts.reshape(-1, n)).reshape(nk, ns)
    coeffs = (vals @ sign_prod) / (2**m * math.factorial(m))
    return SymmetricForm(m, n, fld, dict(zip(keys, coeffs.tolist())))


def frechet_form(P: SymmetricForm, x, k: int) -> SymmetricForm:
    """The k-form ``y -> D^k P(x)(y_1..y_k) / k! = C(m,k) L(x^{m-k}, y_1..y_k)``.

    Multiply by ``k!`` (see :func:`derivative_form`) to get ``D^k P(x)`` itself.
    """
    m = P.order
    if not 0 <= k <= m:
        raise FormError(f"derivative order k={k} out of range 0..{m}")
    x = _as_vector(x, P.dim)
    rest = kernels.contract_tail(P.tensor, P.dim, np.tile(x, (m - k, 1)))
    dense = math.comb(m, k) * rest.reshape((P.dim,) * k)
    fld = "complex" if (P.field == "complex" or np.iscomplexobj(x)) else "real"
    return SymmetricForm.from_tensor(dense, fld)


def derivative_form(P, x, k: int) -> SymmetricForm:
    """``D^k P(x)`` as a symmetric k-form, for homogeneous or general ``P``."""
    if isinstance(P, SymmetricForm):
        return frechet_form(P, x, k).scaled(math.factorial(k))
    x = _as_vector(x, P.dim)
    fld = "complex" if (P.field == "complex" or np.iscomplexobj(x)) else "real"
    acc = np.zeros((P.dim,) * k, dtype=np.complex128 if fld == "complex" else np.float64)
    for j, part in P.present():
        if j >= k:
            acc = acc + math.factorial(k) * frechet_form(part, x, k).dense()
    return SymmetricForm.from_tensor(acc, fld)


def euler_remainder(P: GeneralPoly, x) -> complex:
    """``S(x) = n P(x) - DP(x) x`` with ``n = P.degree``."""
    x = _as_vector(x, P.dim)
    n = P.degree
    total = 0.0
    for k, part in P.present():
        total = total + (n - k) * eval_poly(part, x)
    return total


def complexify(L):
    """Complex extension of a real form or polynomial (coefficients unchanged)."""
    if L.field != "real":
        raise FormError("input is already complex")
    return L.with_field("complex")


def extension_formula(L: SymmetricForm, x, y) -> complex:
    """Value of the complex extension at ``x + iy`` from real evaluations of ``L``.

    ``sum_k (-1)^k C(m,2k) L(x^{m-2k} y^{2k}) + i sum_k (-1)^k C(m,2k+1) L(x^{m-2k-1} y^{2k+1})``.
    """
    if L.field != "real":
        raise FormError("extension formula applies to real forms")
    x = _as_vector(x, L.dim)
    y = _as_vector(y, L.dim)
    m = L.order
    re = sum((-1) ** k * math.comb(m, 2 * k) * L(*([x] * (m - 2 * k) + [y] * (2 * k)))
             for k in range(m // 2 + 1))
    im = sum((-1) ** k * math.comb(m, 2 * k + 1) * L(*([x] * (m - 2 * k - 1) + [y] * (2 * k + 1)))
             for k in range((m - 1) // 2 + 1))
    return complex(re, im)


def _exponent(key: tuple[int, ...], dim: int) -> tuple[int, ...]:
    alpha = [0] * dim
    for i in key:
        alpha[i - 1] += 1
    return tuple(alpha)


def _key(alpha: Sequence[int]) -> tuple[int, ...]:
    return tuple(i + 1 for i, a in enumerate(alpha) for _ in range(a))


def to_monomials(P: SymmetricForm) -> MonomialPoly:
    """``c_alpha = (m! / alpha!) L[idx(alpha)]``."""
    coeffs = {_exponent(k, P.dim): orbit_size(k) * v for k, v in P.coeffs.items()}
    return MonomialPoly(P.order, P.dim, P.field, coeffs)


def from_monomials(Q: MonomialPoly) -> SymmetricForm:
    """Inverse of :func:`to_monomials`."""
    coeffs = {}
    for alpha, c in Q.coeffs.items():
        key = _key(alpha)
        coeffs[key] = c / orbit_size(key)
    return SymmetricForm(Q.degree, Q.dim, Q.field, coeffs)
