import os
import subprocess
import sys

import numpy as np
import pytest

from polyineq import kernels
from polyineq._accel import ENV_FLAG, NUMBA_AVAILABLE
from polyineq.forms import SymmetricForm

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba disabled")


def _case(m, n, cplx, seed):
    L = SymmetricForm.random(m, n, "complex" if cplx else "real", seed)
    r = np.random.default_rng(seed)
    x = r.standard_normal((m, n)) + (1j * r.standard_normal((m, n)) if cplx else 0)
    return L.tensor, x


@needs_numba
@pytest.mark.parametrize("m,n,cplx", [(1, 3, False), (3, 2, True), (4, 4, False), (2, 8, True)])
def test_backends_agree(m, n, cplx):
    t, x = _case(m, n, cplx, 11)
    t, x = kernels._common(t, x)
    a = kernels.numba_impl["contract_tail"](t, n, x[1:])
    b = kernels.numpy_impl["contract_tail"](t, n, x[1:])
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
    xs = np.stack([x, x[::-1]])
    a = kernels.numba_impl["contract_tail_batch"](t, n, xs)
    b = kernels.numpy_impl["contract_tail_batch"](t, n, xs)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


@needs_numba
def test_als_backends_agree():
    t, x = _case(3, 3, False, 3)
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    t, x = kernels._common(t, x)
    a = kernels.numba_impl["als"](t, 3, 3, x, 0, 2.0, 200, 1e-12)
    b = kernels.numpy_impl["als"](t, 3, 3, x, 0, 2.0, 200, 1e-12)
    assert a[1] == pytest.approx(b[1], rel=1e-12)
    np.testing.assert_allclose(a[3], b[3], rtol=1e-10)


def test_contract_all_brute_force():
    L = SymmetricForm.random(3, 3, "real", 4)
    x = np.random.default_rng(0).standard_normal((3, 3))
    dense = L.dense()
    assert kernels.contract_all(L.tensor, 3, x) == pytest.approx(
        np.einsum("ijk,i,j,k->", dense, *x), rel=1e-13)


def test_eval_batch_matches_loop():
    L = SymmetricForm.random(3, 2, "complex", 9)
    pts = np.random.default_rng(1).standard_normal((5, 2))
    vals = kernels.eval_batch(L.tensor, 2, 3, pts)
    for v, x in zip(vals, pts):
        assert v == pytest.approx(L(x, x, x), rel=1e-13)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, np.inf])
def test_als_history_monotone(p):
    L = SymmetricForm.random(4, 3, "real", 2)
    x0 = np.random.default_rng(5).standard_normal((4, 3))
    x0 /= np.abs(x0).max(axis=1, keepdims=True) if p == np.inf else \
        (np.sum(np.abs(x0) ** p, axis=1, keepdims=True) ** (1 / p))
    _, val, sweeps, hist, _ = kernels.als_run(L.tensor, 3, 4, x0, 0, p, 300, 1e-13)
    assert np.all(np.diff(hist) >= -1e-12 * max(1, abs(val)))
    assert hist[-1] == pytest.approx(val)


def test_numpy_fallback_subprocess():
    code = ("from polyineq import kernels; from polyineq.norms import multilinear_norm;"
            "from polyineq.forms import SymmetricForm; from polyineq.lp import SpaceDesc;"
            "L = SymmetricForm(2, 2, 'real', {(1, 2): 0.5});"
            "print(kernels.BACKEND, multilinear_norm(L, SpaceDesc.lp(2, 1.0)).value)")
    env = dict(os.environ, **{ENV_FLAG: "1"})
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out[0] == "numpy"
    assert float(out[1]) == pytest.approx(0.5, abs=1e-12)


def test_forms_suite_without_numba():
    env = dict(os.environ, **{ENV_FLAG: "1"})
    here = os.path.dirname(__file__)
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                          os.path.join(here, "test_forms.py"),
                          os.path.join(here, "test_kernels.py"),
                          "-k", "not subprocess and not without_numba"],
                         env=env, capture_output=True, text=True)
    assert res.returncode == 0, res.stdout[-2000:]
