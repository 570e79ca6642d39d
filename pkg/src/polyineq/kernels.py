"""Hot tensor kernels.

A symmetric form of order ``m`` on ``n`` coordinates is held densely as a flat
array of length ``n**m`` (C order). Every kernel exists twice: a numba
``@njit`` version and a numpy version with identical contraction order. The
module-level names point at the numba version unless it is disabled, see
:mod:`polyineq._accel`, except :func:`contract_tail_batch`, which always uses
numpy because it is faster there.
"""

import numpy as np

from ._accel import NUMBA_AVAILABLE, jit


def _contract_tail_py(t, n, x):
    # contract the trailing axes of t with x[-1], x[-2], ..., x[0]
    cur = t
    size = t.shape[0]
    for s in range(x.shape[0] - 1, -1, -1):
        size = size // n
        nxt = np.zeros(size, dtype=cur.dtype)
        for i in range(size):
            acc = cur[i * n] * x[s, 0]
            for j in range(1, n):
                acc += cur[i * n + j] * x[s, j]
            nxt[i] = acc
        cur = nxt
    return cur


def _contract_tail_batch_py(t, n, xs):
    npts = xs.shape[0]
    q = xs.shape[1]
    out_size = t.shape[0] // n**q
    out = np.zeros((npts, out_size), dtype=t.dtype)
    buf = np.zeros(t.shape[0] // n, dtype=t.dtype)
    buf2 = np.zeros(t.shape[0] // n, dtype=t.dtype)
    for k in range(npts):
        cur = t
        size = t.shape[0]
        use_first = True
        for s in range(q - 1, -1, -1):
            size = size // n
            dst = buf if use_first else buf2
            for i in range(size):
                acc = cur[i * n] * xs[k, s, 0]
                for j in range(1, n):
                    acc += cur[i * n + j] * xs[k, s, j]
                dst[i] = acc
            cur = dst
            use_first = not use_first
        if q == 0:
            out[k, :] = t
        else:
            out[k, :] = cur[:out_size]
    return out


def _contract_tail_np(t, n, x):
    cur = t
    for s in range(x.shape[0] - 1, -1, -1):
        cur = cur.reshape(-1, n) @ x[s]
    return cur


def _contract_tail_batch_np(t, n, xs):
    npts, q = xs.shape[0], xs.shape[1]
    if q == 0:
        return np.broadcast_to(t, (npts, t.shape[0])).copy()
    cur = (t.reshape(-1, n) @ xs[:, q - 1, :].T).T  # (npts, n**(m-1))
    for s in range(q - 2, -1, -1):
        cur = np.einsum("kij,kj->ki", cur.reshape(npts, -1, n), xs[:, s, :])
    return np.ascontiguousarray(cur)


_contract_tail_nb = jit(_contract_tail_py)
_contract_tail_batch_nb = jit(_contract_tail_batch_py)

numpy_impl = {"contract_tail": _contract_tail_np, "contract_tail_batch": _contract_tail_batch_np}
numba_impl = (
    {"contract_tail": _contract_tail_nb, "contract_tail_batch": _contract_tail_batch_nb}
    if NUMBA_AVAILABLE
    else None
)

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"
_impl = numba_impl if NUMBA_AVAILABLE else numpy_impl


def _common(t, x):
    dt = np.result_type(t.dtype, x.dtype, np.float64)
    return np.ascontiguousarray(t, dtype=dt), np.ascontiguousarray(x, dtype=dt)


def contract_tail(t, n, x):
    """Contract the last ``len(x)`` axes of the flat tensor ``t`` with the rows of ``x``.

    Returns the flat remaining tensor of length ``n**(m - len(x))``.
    """
    t, x = _common(t, np.atleast_2d(x) if len(x) else np.zeros((0, n)))
    if x.shape[0] == 0:
        return t.copy()
    return _impl["contract_tail"](t, n, x)


def contract_tail_batch(t, n, xs):
    """Batched :func:`contract_tail`; ``xs`` has shape ``(npts, q, n)``."""
    t, xs = _common(t, xs)
    # the vectorized numpy version beats the compiled loop at every batch size
    # measured (benchmarks/bench_kernels.py), so both backends use it
    return numpy_impl["contract_tail_batch"](t, n, xs)


def contract_all(t, n, x):
    """Full contraction ``T(x_1, ..., x_m)`` as a scalar."""
    return contract_tail(t, n, x)[0]


def eval_batch(t, n, m, pts):
    """Evaluate the homogeneous polynomial ``T(x, ..., x)`` at each row of ``pts``."""
    pts = np.asarray(pts)
    if m == 0:
        return np.full(pts.shape[0], t[0], dtype=np.result_type(t.dtype, pts.dtype))
    xs = np.repeat(pts[:, None, :], m, axis=1)
    return contract_tail_batch(t, n, xs)[:, 0]


# -- alternating maximization of |L(x_1..x_m)| ------------------------------
# space kind 0: l_p (p may be inf), kind 1: l_2^n x K with the max norm

def _maxlin_py(g, kind, p):
    # unit-ball maximizer of Re sum g_i x_i, and the maximum (the dual norm of g)
    k = g.shape[0]
    x = np.zeros_like(g)
    a = np.abs(g)
    if kind == 1:
        nh = 0.0
        for i in range(k - 1):
            nh += a[i] * a[i]
        nh = np.sqrt(nh)
        if nh > 0:
            for i in range(k - 1):
                x[i] = np.conj(g[i]) / nh
        else:
            x[0] = 1.0
        if a[k - 1] > 0:
            x[k - 1] = np.conj(g[k - 1]) / a[k - 1]
        else:
            x[k - 1] = 1.0
        return x, nh + a[k - 1]
    big = a.max()
    if big == 0:
        x[0] = 1.0
        return x, 0.0
    if p == 1.0:
        j = np.argmax(a)
        x[j] = np.conj(g[j]) / a[j]
        return x, a[j]
    if p == np.inf:
        s = 0.0
        for i in range(k):
            if a[i] > 0:
                x[i] = np.conj(g[i]) / a[i]
            else:
                x[i] = 1.0
            s += a[i]
        return x, s
    q = p / (p - 1.0)
    sw = 0.0
    sq = 0.0
    for i in range(k):
        sw += (a[i] / big) ** ((q - 1.0) * p)
        sq += (a[i] / big) ** q
    nw = sw ** (1.0 / p)
    for i in range(k):
        if a[i] > 0:
            x[i] = np.conj(g[i]) / a[i] * (a[i] / big) ** (q - 1.0) / nw
    return x, big * sq ** (1.0 / q)


def _make_als(contract, maxlin):
    def als(t, n, m, x0, kind, p, max_iter, tol):
        x = x0.copy()
        hist = np.zeros(max_iter * m)
        others = np.empty((m - 1, n), dtype=x.dtype)
        val = 0.0
        done = 0
        conv = False
        for it in range(max_iter):
            old = val
            for j in range(m):
                r = 0
                for s in range(m):
                    if s != j:
                        others[r, :] = x[s, :]
                        r += 1
                g = contract(t, n, others)
                xj, val = maxlin(g, kind, p)
                x[j, :] = xj
                hist[it * m + j] = val
            done = it + 1
            if val - old <= tol * max(1.0, val):
                conv = True
                break
        return x, val, done, hist[: done * m], conv

    return als


numpy_impl["als"] = _make_als(_contract_tail_np, _maxlin_py)
if NUMBA_AVAILABLE:
    numba_impl["als"] = jit(_make_als(_contract_tail_nb, jit(_maxlin_py)))


def als_run(t, n, m, x0, kind, p, max_iter, tol):
    """Cyclic slot-wise maximization of ``|T(x_1, ..., x_m)|`` from ``x0`` (m, n).

    Each slot update is exact (the slot objective is linear), so the
    recorded objective history is nondecreasing. Returns
    ``(x, value, sweeps, history, converged)``.
    """
    t, x0 = _common(t, np.asarray(x0))
    return _impl["als"](t, n, m, x0, int(kind), float(p), int(max_iter), float(tol))
