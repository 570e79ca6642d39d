"""Sup norms of polynomials and multilinear forms over unit balls.

Every reported value is ``|f(witness)|`` recomputed at a feasible witness, so
it is a certified lower bound on the true supremum. Global optimality is
pursued by multi-start search with counter-based restart seeds.

Engines
-------
ALS
    Cyclic slot-wise maximization for multilinear forms. Each slot problem is
    linear and solved exactly by a dual attainer.
projected-gradient
    Polynomials (and mixed "block" objectives such as ``L(x^{m-k}, y^k)``).
    Unit-sphere points are parametrized scale-free as ``y / N(y)`` and
    ``log |h|^2`` is maximized with L-BFGS. At ``p = 1`` or ``p = inf`` the
    norm is smoothed (``p = 1.0625`` / ``64``), the result is pulled back to
    the true sphere and polished by exact one-dimensional moves.
grid-oracle
    Exhaustive angular grid plus nested zoomed refinement, for ``n <= 3`` real or
    ``n <= 2`` complex. Shares no code with the optimizers beyond evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import minimize

from . import kernels
from .forms import (
    FormError,
    GeneralPoly,
    MonomialPoly,
    SymmetricForm,
    canonical_keys,
    derivative_form,
    from_monomials,
)
from .jsonio import vector_to_json
from .lp import INF, SpaceDesc, dual_exponent, lp_norm

METHODS = ("ALS", "projected-gradient", "grid-oracle", "closed-form")
SMOOTH_P1 = 1.0625
SMOOTH_PINF = 64.0

# salts for the restart seed streams, one per engine
_SALT_ALS, _SALT_POLY, _SALT_BLOCK, _SALT_SEARCH = 1, 2, 3, 4


@dataclass(frozen=True)
class OptimizerOptions:
    """Multi-start settings.

    Restart ``i`` of an engine with salt ``s`` draws from
    ``numpy.random.default_rng([seed, s, i])``, so any subset of restarts can
    be reproduced independently of the others.
    """

    restarts: int = 32
    max_iter: int = 500
    tol: float = 1e-12
    seed: int = 42

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise ValueError("restarts and max_iter must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def doubled(self) -> "OptimizerOptions":
        return replace(self, restarts=2 * self.restarts)

    def rng(self, salt: int, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt, index])


@dataclass
class NormEstimate:
    """A certified lower bound on a sup norm.

    ``witness`` is one vector for polynomials and a list of vectors (one per
    slot or block) for multilinear and mixed objectives.
    """

    value: float
    witness: object
    method: str
    restarts: int
    converged: bool

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, (list, tuple)) or (isinstance(w, np.ndarray) and w.ndim == 2):
            wj = [vector_to_json(v) for v in w]
        else:
            wj = vector_to_json(w)
        return {"method": self.method, "value": float(self.value), "witness": wj,
                "restarts": int(self.restarts), "converged": bool(self.converged)}


# -- input normalization --------------------------------------------------

def _check_space(space: SpaceDesc, dim: int) -> None:
    if space.coords != dim:
        raise FormError(f"form has dim {dim} but the space has {space.coords} coordinates")
    if space.kind == "hxc" and space.field != "complex":
        raise FormError("H x C norms are supported over the complex field only")


def _lift(form: SymmetricForm, space: SpaceDesc) -> SymmetricForm:
    if form.field == "complex" and space.field == "real":
        raise FormError("complex form on a real space")
    if form.field != space.field:
        return form.with_field(space.field)
    return form


def _unit(space: SpaceDesc, i: int = 0) -> np.ndarray:
    e = np.zeros(space.coords, dtype=space.dtype)
    e[i] = 1
    return e


def _as_poly(P):
    """Split input into ``(homogeneous form or None, general poly or None)``."""
    if isinstance(P, MonomialPoly):
        return from_monomials(P), None
    if isinstance(P, SymmetricForm):
        return P, None
    if isinstance(P, GeneralPoly):
        present = [(k, part) for k, part in P.present() if part.coeffs]
        if len(present) == 1 and present[0][0] > 0:
            return present[0][1], None
        return None, P
    raise FormError(f"unsupported polynomial type {type(P).__name__}")


# -- multilinear norms (ALS) -------------------------------------------------

def multilinear_norm(L: SymmetricForm, space: SpaceDesc, opts: OptimizerOptions | None = None,
                     extra_starts=()) -> NormEstimate:
    """``sup |L(x_1, ..., x_m)|`` over the product of unit balls.

    Parameters
    ----------
    extra_starts : sequence of (m, n) arrays
        Additional starting configurations, run after the random restarts.
    """
    opts = opts or OptimizerOptions()
    _check_space(space, L.dim)
    L = _lift(L, space)
    m, c = L.order, space.coords
    if not L.coeffs:
        return NormEstimate(0.0, [_unit(space)] * m, "closed-form", 0, True)
    if m == 0:
        return NormEstimate(abs(L.tensor[0]), [], "closed-form", 0, True)
    t = L.tensor
    kind = 1 if space.kind == "hxc" else 0
    starts = [np.stack([space.sample_sphere(opts.rng(_SALT_ALS, i)) for _ in range(m)])
              for i in range(opts.restarts)]
    starts += [np.asarray(s, dtype=space.dtype).reshape(m, c) for s in extra_starts]
    best = None
    for x0 in starts:
        x, _, _, _, conv = kernels.als_run(t, c, m, x0.astype(space.dtype), kind, space.p,
                                           opts.max_iter, opts.tol)
        val = abs(kernels.contract_all(t, c, x))
        if best is None or val > best[0]:
            best = (val, x, conv)
    val, x, conv = best
    return NormEstimate(float(val), [v.copy() for v in x], "ALS", len(starts), bool(conv))


# -- block objectives --------------------------------------------------------

class _Problem:
    """``h(X) = sum_terms coef * T(X_1^{a_1}, ..., X_B^{a_B})`` on B unit balls.

    ``radial`` marks a real non-homogeneous objective whose maximum may sit
    inside the ball (single block only).
    """

    def __init__(self, terms, nblocks: int, space: SpaceDesc, radial: bool = False):
        self.space = space
        self.c = space.coords
        self.B = nblocks
        self.dtype = space.dtype
        self.terms = [(coef, np.ascontiguousarray(t, dtype=self.dtype), tuple(exps))
                      for coef, t, exps in terms]
        self.radial = radial
        self.degs = [max(e[b] for _, _, e in self.terms) for b in range(nblocks)]
        if space.kind == "hxc":
            self.groups = [(0, space.n, 2.0), (space.n, space.n + 1, 2.0)]
        else:
            self.groups = [(0, self.c, space.p)]

    # evaluation
    def value(self, X) -> complex:
        h = 0.0
        for coef, t, exps in self.terms:
            vecs = [X[b] for b, a in enumerate(exps) for _ in range(a)]
            if not vecs:
                h = h + coef * t[0]
            else:
                h = h + coef * kernels.contract_all(t, self.c, np.array(vecs))
        return h

    def value_and_grad(self, X):
        h = 0.0
        G = np.zeros((self.B, self.c), dtype=self.dtype)
        for coef, t, exps in self.terms:
            vecs = [(b, X[b]) for b, a in enumerate(exps) for _ in range(a)]
            if not vecs:
                h = h + coef * t[0]
                continue
            hv = 0.0
            for b, a in enumerate(exps):
                if a == 0:
                    continue
                j = next(i for i, (bb, _) in enumerate(vecs) if bb == b)
                rest = [v for i, (_, v) in enumerate(vecs) if i != j]
                r = kernels.contract_tail(t, self.c, np.array(rest) if rest
                                          else np.zeros((0, self.c), dtype=self.dtype))
                G[b] += coef * a * r
                hv = r @ X[b]
            h = h + coef * hv
        return h, G

    def values(self, Xs) -> np.ndarray:
        """Batch of ``h`` at ``Xs`` with shape (K, B, c)."""
        Xs = np.asarray(Xs, dtype=self.dtype)
        out = np.zeros(Xs.shape[0], dtype=self.dtype)
        for coef, t, exps in self.terms:
            idx = [b for b, a in enumerate(exps) for _ in range(a)]
            if not idx:
                out += coef * t[0]
                continue
            out += coef * kernels.contract_tail_batch(t, self.c, Xs[:, idx, :])[:, 0]
        return out

    # geometry
    def normalize(self, X) -> np.ndarray:
        X = np.array(X, dtype=self.dtype)
        for b in range(self.B):
            for lo, hi, p in self.groups:
                nrm = lp_norm(X[b, lo:hi], p)
                if nrm > 0:
                    X[b, lo:hi] /= nrm
        return X


def _smooth_p(p: float) -> float:
    if p == 1:
        return SMOOTH_P1
    if p == INF:
        return SMOOTH_PINF
    return p


class _Ascent:
    """L-BFGS on ``-log |h|^2`` in scale-free sphere coordinates."""

    def __init__(self, prob: _Problem):
        self.prob = prob
        self.cplx = prob.dtype == np.complex128
        self.sgroups = [(lo, hi, _smooth_p(p)) for lo, hi, p in prob.groups]

    def pack(self, Y, s=None) -> np.ndarray:
        v = Y.ravel()
        v = np.concatenate([v.real, v.imag]) if self.cplx else v.astype(float)
        return np.append(v, s) if self.prob.radial else v

    def unpack(self, v):
        P = self.prob
        s = None
        if P.radial:
            v, s = v[:-1], v[-1]
        size = P.B * P.c
        Y = v[:size] + 1j * v[size:] if self.cplx else v
        return Y.reshape(P.B, P.c), s

    def to_point(self, Y, s, groups):
        X = np.array(Y, dtype=self.prob.dtype)
        norms = []
        for b in range(self.prob.B):
            for lo, hi, p in groups:
                nrm = lp_norm(X[b, lo:hi], p)
                norms.append(nrm)
                X[b, lo:hi] /= nrm
        if s is not None:
            X = X * math.sin(s) ** 2
        return X, norms

    def objective(self, v):
        Y, s = self.unpack(v)
        U, norms = self.to_point(Y, None, self.sgroups)
        rho = math.sin(s) ** 2 if s is not None else 1.0
        h, G = self.prob.value_and_grad(U * rho if s is not None else U)
        a2 = abs(h) ** 2
        if a2 < 1e-300 or not np.isfinite(a2):
            return 1e3, np.zeros_like(v)
        Gx = 2 * np.conj(G / h) if self.cplx else 2 * G / h
        Gy = np.zeros_like(Y, dtype=self.prob.dtype)
        k = 0
        for b in range(self.prob.B):
            Gu = rho * Gx[b]
            for lo, hi, p in self.sgroups:
                u = U[b, lo:hi]
                au = np.abs(u)
                ph = np.ones_like(u)
                nz = au > 0
                ph[nz] = u[nz] / au[nz]
                dN = au ** (p - 1) * ph
                g = Gu[lo:hi]
                Gy[b, lo:hi] = (g - np.real(np.vdot(u, g)) * dN) / norms[k]
                k += 1
        flat = Gy.ravel()
        grad = np.concatenate([flat.real, flat.imag]) if self.cplx else flat.real.copy()
        if s is not None:
            ds = np.real(np.vdot(U[0], Gx[0])) * 2 * math.sin(s) * math.cos(s)
            grad = np.append(grad, ds)
        return -math.log(a2), -grad

    def run(self, Y0, s0, max_iter):
        res = minimize(self.objective, self.pack(Y0, s0), jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-11,
                                "maxcor": 20})
        Y, s = self.unpack(res.x)
        return Y, s, bool(res.success)


# -- exact one-dimensional maximization --------------------------------------

def _max_interval(phi, lo: float, hi: float, deg: int, t0: float):
    """Maximize ``|phi(t)|`` on ``[lo, hi]`` for a polynomial ``phi`` of degree ``<= deg``.

    ``phi`` maps an array of ``t`` to values. Interpolates at Chebyshev nodes
    and takes the roots of ``d/dt |phi|^2``; candidates are re-evaluated
    directly. Returns ``(t, |phi(t)|)``, never worse than ``t0``.
    """
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    cand = [lo, hi, t0]
    if deg > 0 and half > 0:
        u = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
        vals = phi(mid + half * u)
        coef = np.linalg.solve(cheb.chebvander(u, deg), vals)
        sq = cheb.chebmul(coef, np.conj(coef)).real
        der = cheb.chebder(sq)
        if np.any(der != 0):
            r = cheb.chebroots(cheb.chebtrim(der, 0)) if len(der) > 1 else []
            for z in np.atleast_1d(r):
                if abs(z.imag) < 1e-7 and -1 <= z.real <= 1:
                    cand.append(mid + half * z.real)
    cand = np.array(cand)
    vals = np.abs(phi(cand))
    j = int(np.argmax(vals))
    if vals[j] <= vals[2]:
        return t0, float(vals[2])
    return float(cand[j]), float(vals[j])


def _max_circle(phi, deg: int, th0: float):
    """Maximize ``|phi(e^{i theta})|`` for ``phi(w) = sum_{k=0}^{deg} c_k w^k``."""
    cand = [th0] + list(np.linspace(0, 2 * np.pi, 16, endpoint=False))
    if deg > 0:
        N = deg + 1
        w = np.exp(2j * np.pi * np.arange(N) / N)
        c = np.fft.fft(phi(w)) / N
        b = np.convolve(c, np.conj(c[::-1]))  # b[j + deg] = sum_k c_k conj(c_{k-j})
        js = np.arange(-deg, deg + 1)
        q = js * b
        if np.any(np.abs(q) > 1e-300):
            cand += list(np.angle(np.roots(q[::-1])))
    cand = np.array(cand)
    vals = np.abs(phi(np.exp(1j * cand)))
    j = int(np.argmax(vals))
    if vals[j] <= vals[0]:
        return th0, float(vals[0])
    return float(cand[j]), float(vals[j])


def _polish(prob: _Problem, X, max_sweeps: int = 60):
    """Exact coordinate moves on the true l_1 or l_inf ball. Returns (X, converged)."""
    p = prob.space.p
    cplx = prob.dtype == np.complex128
    best = abs(prob.value(X))
    c = prob.c

    def line(b, build):
        def phi(ts):
            ts = np.atleast_1d(ts)
            Xs = np.repeat(X[None], len(ts), axis=0)
            build(Xs[:, b, :], ts)
            return prob.values(Xs)
        return phi

    for _ in range(max_sweeps):
        start = best
        for b in range(prob.B):
            d = prob.degs[b]
            if d == 0:
                continue
            if p == INF:
                for i in range(c):
                    if cplx:
                        def build(rows, ts, i=i):
                            rows[:, i] = ts
                        th0 = float(np.angle(X[b, i]))
                        th, val = _max_circle(line(b, build), d, th0)
                        if val > best:
                            X[b, i], best = np.exp(1j * th), val
                    else:
                        def build(rows, ts, i=i):
                            rows[:, i] = ts
                        t, val = _max_interval(line(b, build), -1.0, 1.0, d, float(X[b, i]))
                        if val > best:
                            X[b, i], best = t, val
                continue
            # p == 1
            for i, j in itertools.combinations(range(c), 2):
                tot = abs(X[b, i]) + abs(X[b, j])
                if tot == 0:
                    continue
                if cplx:
                    pats = [(_ph(X[b, i]), _ph(X[b, j]))]
                else:
                    pats = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                for si, sj in pats:
                    def build(rows, ts, i=i, j=j, si=si, sj=sj, tot=tot):
                        rows[:, i] = si * ts
                        rows[:, j] = sj * (tot - ts)
                    a0 = abs(X[b, i]) if (cplx or (np.sign(X[b, i]) in (0, si) and
                                                   np.sign(X[b, j]) in (0, sj))) else 0.0
                    t, val = _max_interval(line(b, build), 0.0, tot, d, a0)
                    if val > best:
                        X[b, i], X[b, j], best = si * t, sj * (tot - t), val
            if cplx:
                for i in range(c):
                    r = abs(X[b, i])
                    if r == 0:
                        continue

                    def build(rows, ts, i=i, r=r):
                        rows[:, i] = r * ts
                    th, val = _max_circle(line(b, build), d, float(np.angle(X[b, i])))
                    if val > best:
                        X[b, i], best = r * np.exp(1j * th), val
            if prob.radial:
                nrm = lp_norm(X[b], 1)
                if nrm > 0:
                    base = X[b].copy()

                    def build(rows, ts, base=base):
                        rows[:] = ts[:, None] * base[None, :]
                    t, val = _max_interval(line(b, build), -1 / nrm, 1 / nrm, d, 1.0)
                    if val > best:
                        X[b], best = t * base, val
        if best <= start * (1 + 1e-14):
            return X, True
    return X, False


def _ph(z):
    a = abs(z)
    return z / a if a > 0 else 1.0


def _optimize(prob: _Problem, opts: OptimizerOptions, salt: int, extra_starts=()):
    """Multi-start driver; returns ``(value, X, starts, converged)``."""
    space = prob.space
    asc = _Ascent(prob)
    true_groups = prob.groups
    needs_polish = space.kind == "lp" and space.p in (1.0, INF)
    starts = []
    for i in range(opts.restarts):
        rng = opts.rng(salt, i)
        Y = np.stack([space.sample_sphere(rng) for _ in range(prob.B)])
        s = float(rng.uniform(0.2, 0.5 * np.pi)) if prob.radial else None
        starts.append((Y, s))
    for X0 in extra_starts:
        X0 = np.asarray(X0, dtype=prob.dtype).reshape(prob.B, prob.c)
        s = None
        if prob.radial:
            r = min(space.norm(X0[0]), 1.0)
            s = math.asin(math.sqrt(r)) if r > 0 else 0.5 * np.pi
            if r == 0:
                continue
        if not all(np.any(x != 0) for x in X0):
            continue
        starts.append((X0, s))
    best = None
    for Y0, s0 in starts:
        Y, s, ok = asc.run(Y0, s0, opts.max_iter)
        X, _ = asc.to_point(Y, s, true_groups)
        if needs_polish:
            X, ok2 = _polish(prob, X)
            ok = ok and ok2
        if not prob.radial:
            X = prob.normalize(X)
        val = abs(prob.value(X))
        if best is None or val > best[0]:
            best = (val, X, ok)
    return best[0], best[1], len(starts), best[2]


# -- polynomial norms ----------------------------------------------------------

def poly_norm(P, space: SpaceDesc, opts: OptimizerOptions | None = None,
              extra_starts=()) -> NormEstimate:
    """``sup |P(x)|`` over the unit ball of ``space``.

    ``P`` may be a homogeneous :class:`SymmetricForm`, a
    :class:`MonomialPoly` or a :class:`GeneralPoly`. For homogeneous ``P`` the
    witness has unit norm; a real non-homogeneous ``P`` may peak inside the
    ball, and its witness then has norm below one.
    """
    opts = opts or OptimizerOptions()
    form, gen = _as_poly(P)
    if form is not None:
        _check_space(space, form.dim)
        form = _lift(form, space)
        if not form.coeffs:
            return NormEstimate(0.0, _unit(space), "closed-form", 0, True)
        if form.order == 0:
            return NormEstimate(abs(form.tensor[0]), _unit(space), "closed-form", 0, True)
        prob = _Problem([(1.0, form.tensor, (form.order,))], 1, space)
    else:
        _check_space(space, gen.dim)
        parts = [(k, _lift(part, space)) for k, part in gen.present() if part.coeffs]
        if not parts:
            return NormEstimate(0.0, _unit(space), "closed-form", 0, True)
        if all(k == 0 for k, _ in parts):
            return NormEstimate(abs(parts[0][1].tensor[0]), _unit(space), "closed-form", 0, True)
        radial = space.field == "real"
        prob = _Problem([(1.0, part.tensor, (k,)) for k, part in parts], 1, space, radial)
    val, X, used, conv = _optimize(prob, opts, _SALT_POLY,
                                   [np.asarray(s)[None] for s in extra_starts])
    return NormEstimate(float(val), X[0].copy(), "projected-gradient", used, conv)


def derivative_norms(P: SymmetricForm, x, k: int, space: SpaceDesc,
                     opts: OptimizerOptions | None = None):
    """Norms of ``D^k P(x)`` as a k-homogeneous polynomial and as a k-linear form.

    Returns ``(poly_estimate, multilinear_estimate)``. The multilinear search
    is seeded with the diagonal of the polynomial witness, so the first value
    never exceeds the second.
    """
    opts = opts or OptimizerOptions()
    form, _ = _as_poly(P)
    if form is None:
        raise FormError("derivative_norms expects a homogeneous polynomial")
    if not 1 <= k <= form.order:
        raise FormError(f"derivative order k={k} out of range 1..{form.order}")
    F = derivative_form(_lift(form, space), np.asarray(x, dtype=space.dtype), k)
    pn = poly_norm(F, space, opts)
    mn = multilinear_norm(F, space, opts, extra_starts=[np.tile(pn.witness, (k, 1))])
    return pn, mn


def derivative_sup_norm(P: SymmetricForm, k: int, space: SpaceDesc,
                        opts: OptimizerOptions | None = None, kind: str = "poly",
                        extra_starts=()) -> NormEstimate:
    """Sup over the unit ball of ``x`` of the norm of ``D^k P(x)``.

    ``kind="poly"``: ``sup_{x, y} |D^k P(x) y^k| = k! C(m,k) sup |L(x^{m-k}, y^k)|``.
    ``kind="multilinear"``: ``sup |D^k P(x)(y_1..y_k)|`` with ``k`` free directions.
    The witness lists ``x`` first, then the direction blocks.
    """
    opts = opts or OptimizerOptions()
    form, _ = _as_poly(P)
    if form is None:
        raise FormError("derivative_sup_norm expects a homogeneous polynomial")
    m = form.order
    if not 1 <= k <= m:
        raise FormError(f"derivative order k={k} out of range 1..{m}")
    _check_space(space, form.dim)
    form = _lift(form, space)
    if kind == "poly":
        coef, exps = math.factorial(k) * math.comb(m, k), (m - k, k)
    elif kind == "multilinear":
        coef, exps = math.factorial(m) // math.factorial(m - k), (m - k,) + (1,) * k
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if m == k:
        exps = exps[1:]
    if not form.coeffs:
        return NormEstimate(0.0, [_unit(space)] * len(exps), "closed-form", 0, True)
    prob = _Problem([(float(coef), form.tensor, exps)], len(exps), space)
    val, X, used, conv = _optimize(prob, opts, _SALT_BLOCK, extra_starts)
    return NormEstimate(float(val), [v.copy() for v in X], "projected-gradient", used, conv)


# -- grid oracle ---------------------------------------------------------------

GRID_CAP = 2_000_000
ZOOM_PASSES = 3


def _sphere_dirs(params, n):
    # angular coordinates -> Euclidean unit directions in R^n
    if n == 1:
        return np.ones((params.shape[0], 1))
    if n == 2:
        th = params[:, 0]
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    th, ph = params[:, 0], params[:, 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)


def _to_lp(d, p):
    if p == INF:
        nrm = np.abs(d).max(axis=1)
    else:
        a = np.abs(d)
        big = a.max(axis=1)
        nrm = big * np.sum((a / big[:, None]) ** p, axis=1) ** (1 / p)
    return d / nrm[:, None]


def _slot_params(space):
    """Per-slot angular box and a decoder to unit vectors."""
    n, p = space.n, space.p
    if space.field == "real":
        boxes = {1: [], 2: [(0.0, 2 * np.pi)], 3: [(0.0, np.pi), (0.0, 2 * np.pi)]}[n]

        def dec(prm, signed=True):
            return _to_lp(_sphere_dirs(prm, n), p)
        return boxes, dec
    # complex, up to a unit factor per slot
    if n == 1:
        return [], lambda prm, signed=True: np.ones((prm.shape[0], 1), dtype=complex)
    boxes = [(0.0, 0.5 * np.pi), (0.0, 2 * np.pi)]

    def dec(prm, signed=True):
        d = np.stack([np.cos(prm[:, 0]) + 0j, np.sin(prm[:, 0]) * np.exp(1j * prm[:, 1])], axis=1)
        return _to_lp(d, p)
    return boxes, dec


def _grid_points(boxes, res):
    axes = [np.linspace(lo, hi, res) for lo, hi in boxes]
    if not axes:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _chunked(f, prm, size=200_000):
    return np.concatenate([f(prm[i:i + size]) for i in range(0, max(len(prm), 1), size)])


def grid_oracle(P, space: SpaceDesc, resolution: int = 201) -> NormEstimate:
    """Brute-force sup norm on a parametrized sphere grid.

    Supports polynomials (homogeneous or general) and symmetric forms passed
    as ``("multilinear", form)``. Real spaces need ``n <= 3``, complex ones
    ``n <= 2``. The grid is coarsened when the point count would exceed
    ``GRID_CAP``; ``ZOOM_PASSES`` nested zooms around the five best points follow.
    """
    if space.kind != "lp":
        raise FormError("grid oracle supports l_p spaces only")
    limit = 3 if space.field == "real" else 2
    if space.n > limit:
        raise FormError(f"grid oracle needs n <= {limit} for {space.field} spaces, got {space.n}")
    multilinear = isinstance(P, tuple) and P and P[0] == "multilinear"
    slot_boxes, dec = _slot_params(space)
    n, dt = space.n, space.dtype
    if multilinear:
        L = _lift(P[1], space)
        _check_space(space, L.dim)
        m = L.order
        if not L.coeffs:
            return NormEstimate(0.0, [_unit(space)] * m, "closed-form", 0, True)
        q = dual_exponent(space.p)
        nb = len(slot_boxes)
        boxes = slot_boxes * (m - 1)

        def decode(prm):
            return [dec(prm[:, s * nb:(s + 1) * nb]) for s in range(m - 1)]

        def f(prm):
            xs = np.stack(decode(prm), axis=1) if m > 1 else np.zeros((len(prm), 0, n), dt)
            g = kernels.contract_tail_batch(L.tensor, n, xs)
            return _row_norms(g, q)

        def witness(prm):
            xs = [v[0] for v in decode(prm[None])]
            g = kernels.contract_tail(L.tensor, n, np.array(xs) if xs else np.zeros((0, n), dt))
            xs.append(space.maximize_linear(g))
            return xs, abs(kernels.contract_all(L.tensor, n, np.array(xs)))
    else:
        form, gen = _as_poly(P)
        parts = ([(form.order, _lift(form, space))] if form is not None else
                 [(k, _lift(part, space)) for k, part in gen.present() if part.coeffs])
        _check_space(space, (form or gen).dim)
        if not parts:
            return NormEstimate(0.0, _unit(space), "closed-form", 0, True)
        homog = len({k for k, _ in parts}) == 1
        boxes = list(slot_boxes)
        extra = None
        if not homog and space.field == "real":
            extra = "radius"
            boxes.append((-1.0, 1.0))
        elif not homog and space.field == "complex":
            extra = "phase"
            boxes.append((0.0, 2 * np.pi))
        nb = len(slot_boxes)

        def decode(prm):
            x = dec(prm[:, :nb]).astype(dt)
            if extra == "radius":
                x = x * prm[:, nb:nb + 1]
            elif extra == "phase":
                x = x * np.exp(1j * prm[:, nb:nb + 1])
            return x

        def f(prm):
            x = decode(prm)
            tot = np.zeros(len(x), dtype=dt)
            for k, part in parts:
                tot = tot + kernels.eval_batch(part.tensor, n, k, x)
            return np.abs(tot)

        def witness(prm):
            x = decode(prm[None])[0]
            tot = sum(kernels.eval_batch(part.tensor, n, k, x[None])[0] for k, part in parts)
            return x, abs(tot)

    dims = len(boxes)
    res = resolution
    while dims and res ** dims > GRID_CAP:
        res -= 1
    prm = _grid_points(boxes, res)
    vals = _chunked(f, prm)
    # zoom: nested +-1 cell boxes around the five best points; kinks of the
    # l_1 / l_inf spheres need more than one pass to reach 1e-6 accuracy
    top = np.argsort(-vals, kind="stable")[:5]
    cands = [(float(vals[i]), prm[i]) for i in top]
    if dims:
        steps = np.array([(hi - lo) / (res - 1) for lo, hi in boxes])
        zres = res
        while zres ** dims > GRID_CAP // 20:
            zres -= 1
        centers = [prm[i] for i in top]
        for _ in range(ZOOM_PASSES):
            found = []
            for ctr in centers:
                zb = [(max(c - s, lo), min(c + s, hi)) for c, s, (lo, hi) in zip(ctr, steps, boxes)]
                zp = _grid_points(zb, zres)
                zv = _chunked(f, zp)
                j = int(np.argmax(zv))
                found.append((float(zv[j]), zp[j]))
            cands += found
            centers = [q for _, q in found]
            steps = 2 * steps / (zres - 1)
    best_prm = max(cands, key=lambda t: t[0])[1]
    w, val = witness(best_prm)
    return NormEstimate(float(val), w, "grid-oracle", 1, True)


def _row_norms(g, q):
    a = np.abs(g)
    if q == INF:
        return a.max(axis=1)
    if q == 1:
        return a.sum(axis=1)
    big = a.max(axis=1)
    safe = np.where(big > 0, big, 1.0)
    return big * np.sum((a / safe[:, None]) ** q, axis=1) ** (1 / q)


# -- polarization ratio search --------------------------------------------------

@dataclass
class RatioResult:
    """Best ``||L|| / ||L^||`` found, with its form and both certified norms."""

    ratio: float
    form: SymmetricForm
    multilinear: NormEstimate
    poly: NormEstimate


def polarization_ratio(L: SymmetricForm, space: SpaceDesc, opts: OptimizerOptions) -> RatioResult:
    """``||L|| / ||L^||`` with cross-seeded searches.

    The polynomial search also starts from every slot of the multilinear
    witness, and the multilinear search from the diagonal of the polynomial
    witness, so the ratio never drops below one through a missed optimum.
    """
    ml = multilinear_norm(L, space, opts)
    pn = poly_norm(L, space, opts, extra_starts=list(ml.witness))
    ml2 = multilinear_norm(L, space, replace(opts, restarts=1),
                           extra_starts=[np.tile(pn.witness, (L.order, 1))])
    if ml2.value > ml.value:
        ml = replace(ml2, restarts=ml.restarts + ml2.restarts)
    ratio = ml.value / pn.value if pn.value > 0 else 0.0
    return RatioResult(float(ratio), L, ml, pn)


def polarization_ratio_search(m: int, space: SpaceDesc, opts: OptimizerOptions | None = None,
                              n_random: int = 8, climb_steps: int = 40) -> RatioResult:
    """Empirical lower bound on the polarization constant of ``space`` in degree ``m``.

    Candidates are every single-monomial form and ``n_random`` Gaussian forms,
    followed by a seeded perturbation hill climb from the best three. The
    final three candidates are re-evaluated with doubled restarts.
    """
    opts = opts or OptimizerOptions()
    if m < 2:
        raise FormError("polarization constants need m >= 2")
    n = space.coords
    keys = canonical_keys(m, n)
    cheap = replace(opts, restarts=max(4, opts.restarts // 4))
    rng = opts.rng(_SALT_SEARCH, 0)

    def make(vec):
        return SymmetricForm.from_vector(m, n, space.field, vec)

    def randvec():
        v = rng.standard_normal(len(keys))
        if space.field == "complex":
            v = v + 1j * rng.standard_normal(len(keys))
        return v

    pool = []
    for i in range(len(keys)):
        v = np.zeros(len(keys), dtype=space.dtype)
        v[i] = 1
        pool.append(v)
    pool += [randvec() for _ in range(n_random)]
    scored = [(polarization_ratio(make(v), space, cheap).ratio, i, v) for i, v in enumerate(pool)]
    scored.sort(key=lambda t: (-t[0], t[1]))
    finalists = []
    for r0, i0, v0 in scored[:3]:
        cur_r, cur = r0, v0
        sigma = 0.3
        for _ in range(climb_steps):
            trial = cur + sigma * randvec() * np.max(np.abs(cur))
            r = polarization_ratio(make(trial), space, cheap).ratio
            if r > cur_r:
                cur_r, cur = r, trial
            else:
                sigma *= 0.85
        finalists.append(cur)
    best = None
    for v in finalists + [scored[0][2]]:
        res = polarization_ratio(make(v), space, opts.doubled())
        if best is None or res.ratio > best.ratio:
            best = res
    return best
