"""Acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py -s`` to see a PASS/FAIL line per
criterion.
"""

import itertools
import json
import math

import mpmath
import numpy as np
import pytest
import sympy

from polyineq import audit, bounds, cli
from polyineq.audit import CHECKS, Instance, SuiteConfig, run_check, run_one, run_suite
from polyineq.forms import (
    SymmetricForm,
    complexify,
    derivative_form,
    eval_poly,
    extension_formula,
    polarize,
    to_monomials,
)
from polyineq.lp import INF, SpaceDesc
from polyineq.norms import (
    OptimizerOptions,
    polarization_ratio,
    polarization_ratio_search,
    poly_norm,
)

pytestmark = pytest.mark.slow

OPTS = OptimizerOptions()
P_CHOICES = (1.0, 1.5, 2.0, 3.0, INF)


def verdict(n, ok, detail):
    print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _cli_json(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_criterion_01_k21(capsys):
    code1, ex = _cli_json(["extremal", "--case", "EX2", "--p", "1"], capsys)
    code2, se = _cli_json(["search-k", "--m", "2", "--p", "1", "--dim", "2"], capsys)
    ok = code1 == 0 and code2 == 0 and all(abs(r - 2) <= 1e-3 for r in (ex["ratio"], se["ratio"]))
    verdict(1, ok, f"extremal ratio {ex['ratio']!r}, search ratio {se['ratio']!r}")


def test_criterion_02_sharp_lp_constant():
    res = polarization_ratio_search(3, SpaceDesc.lp(3, 1.0), OPTS)
    main = next(s for s in bounds.polarization_bounds(3, 1.0) if s.name == "polar_main")
    ok = res.ratio >= 4.5 - 1e-2 and main.value == 4.5
    verdict(2, ok, f"empirical ratio {res.ratio!r}, main bound {main.value!r}")


@pytest.mark.parametrize("m,k,p", [(3, 1, 1.0), (3, 2, 1.2), (4, 2, 1.0)])
def test_criterion_03_markov_sharpness(m, k, p):
    res = audit.extremal_gallery("EX1", {"m": m, "k": k, "p": p}, OPTS)
    L, x, y = res.instance["form"], res.instance["x"], res.instance["y"]
    val = abs(derivative_form(L, x.astype(complex), k)(*([y.astype(complex)] * k)))
    target = bounds.markov_const_lp(m, k, p) * m ** (-m / p)
    err = abs(val - target)
    verdict(3, err <= 1e-9, f"(m,k,p)=({m},{k},{p}): |value - C_km ||L^||| = {err:.3g}")


def test_criterion_04_banach():
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(100):
        m, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        field = ("real", "complex")[i % 2]
        L = SymmetricForm.random(m, n, field, rng)
        res = polarization_ratio(L, SpaceDesc.lp(n, 2.0, field), OPTS)
        worst = max(worst, abs(res.multilinear.value - res.poly.value) / res.poly.value)
    verdict(4, worst <= 1e-4, f"max relative gap {worst:.3g} over 100 forms")


def test_criterion_05_k44():
    gamma = next(s for s in bounds.polarization_bounds(4, 4.0) if s.name == "polar_gamma")
    res = polarization_ratio_search(4, SpaceDesc.lp(4, 4.0), OPTS)
    ok = abs(gamma.value - 2) <= 1e-12 and res.ratio <= 2 + 1e-3
    verdict(5, ok, f"gamma bound {gamma.value!r}, empirical ratio {res.ratio!r}")


def test_criterion_06_harris_linf():
    spec = next(s for s in bounds.polarization_bounds(2, INF, "complex")
                if s.name == "polar_harris_linf")
    err = abs(spec.value - 3 * math.sqrt(3) / 4)
    verdict(6, err <= 1e-12, f"bound {spec.value!r}, error {err:.3g}")


def test_criterion_07_polarization_round_trip():
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(500):
        m, n = int(rng.integers(1, 6)), int(rng.integers(1, 5))
        L = SymmetricForm.random(m, n, ("real", "complex")[i % 2], rng)
        worst = max(worst, polarize(L).max_abs_diff(L))
    verdict(7, worst <= 1e-12, f"max coefficient error {worst:.3g} over 500 forms")


def _mp_value(mono, x):
    return mpmath.fsum(c * mpmath.fprod(xi ** a for xi, a in zip(x, alpha))
                       for alpha, c in mono.coeffs.items())


def _mixed_difference(mono, x, ys, h):
    # sum over subsets S of (-1)^(k-|S|) P(x + h sum_S y) / h^k, error O(h)
    k = len(ys)
    total = mpmath.mpf(0)
    for bits in itertools.product((0, 1), repeat=k):
        pt = [xi + h * sum(b * y[j] for b, y in zip(bits, ys)) for j, xi in enumerate(x)]
        total += (-1) ** (k - sum(bits)) * _mp_value(mono, pt)
    return total / h ** k


def test_criterion_08_frechet_vs_finite_differences():
    rng = np.random.default_rng(8)
    worst = 0.0
    with mpmath.workdps(100):
        h = mpmath.mpf(10) ** -20
        for _ in range(200):
            m, n = int(rng.integers(1, 5)), int(rng.integers(1, 4))
            k = int(rng.integers(1, min(3, m) + 1))
            L = SymmetricForm.random(m, n, "real", rng)
            x = rng.uniform(-1, 1, n)
            ys = [rng.uniform(-1, 1, n) for _ in range(k)]
            got = derivative_form(L, x, k)(*ys)
            mono = to_monomials(L)
            ref = float(_mixed_difference(mono, [mpmath.mpf(v) for v in x],
                                          [[mpmath.mpf(v) for v in y] for y in ys], h))
            worst = max(worst, abs(got - ref) / max(abs(ref), 1e-12))
    verdict(8, worst <= 1e-6, f"max relative error {worst:.3g} over 200 cases")


def test_criterion_09_chebyshev_exact():
    t = sympy.Symbol("t")
    mismatches = 0
    for n in range(1, 31):
        P = sympy.Poly(sympy.chebyshevt(n, t), t)
        for k in range(1, n + 1):
            P = P.diff(t)
            mismatches += bounds.markov_factor(n, k) != int(P.eval(1))
    ok = mismatches == 0 and bounds.markov_factor(4, 1) == 16 and bounds.markov_factor(4, 2) == 80
    verdict(9, ok, f"{mismatches} mismatches for n <= 30; T_4: 16, 80")


def test_criterion_10_full_audit(full_audit):
    code, lines, _ = full_audit
    summary = lines[-1]["summary"]
    rep = run_suite(SuiteConfig(("U7", "C1", "C2"), 200, seed=42, opts=OPTS))
    mins = {row.check_id: row.min_margin for row in rep.summary}
    ok = (code == 0 and summary["failures"] == 0
          and summary["records"] == 20 * len(audit.CHECK_IDS)
          and all(v >= -1e-9 for v in mins.values()))
    detail = ", ".join(f"{k} min {v:.3g}" for k, v in mins.items())
    verdict(10, ok, f"full suite {summary['records']} records, {summary['failures']} failures; "
                    f"{detail}")


def test_criterion_11_complexification():
    rng = np.random.default_rng(11)
    worst_lo = worst_hi = worst_ext = -np.inf
    for i in range(100):
        m, n = int(rng.integers(1, 5)), int(rng.integers(2, 4))
        p = P_CHOICES[i % len(P_CHOICES)]
        L = SymmetricForm.random(m, n, "real", rng)
        real = poly_norm(L, SpaceDesc.lp(n, p), OPTS.doubled())
        cplx = poly_norm(complexify(L), SpaceDesc.lp(n, p, "complex"), OPTS.doubled(),
                         extra_starts=[real.witness.astype(complex)])
        worst_lo = max(worst_lo, real.value - cplx.value)
        worst_hi = max(worst_hi, cplx.value - 2 ** (m - 1) * real.value)
        x, y = SpaceDesc.lp(n, 2.0).sample_sphere(rng), SpaceDesc.lp(n, 2.0).sample_sphere(rng)
        x, y = 0.6 * x, 0.6 * y
        worst_ext = max(worst_ext, abs(extension_formula(L, x, y) - eval_poly(complexify(L),
                                                                              x + 1j * y)))
    ok = worst_lo <= 1e-6 and worst_hi <= 1e-6 and worst_ext <= 1e-12
    verdict(11, ok, f"max(||P|| - ||P~||) {worst_lo:.3g}, max(||P~|| - 2^(m-1)||P||) "
                    f"{worst_hi:.3g}, extension error {worst_ext:.3g}")


def test_criterion_12_hilbert_pointwise():
    mins = {}
    for cid in ("Q1", "Q2", "H3"):
        mins[cid] = min(run_one(cid, i, 12, OPTS).margin for i in range(100))
    ok = all(v >= -1e-6 for v in mins.values())
    verdict(12, ok, ", ".join(f"{k} min margin {v:.3g}" for k, v in mins.items()))


def test_criterion_13_hxc_bernstein():
    rng = np.random.default_rng(13)
    space = SpaceDesc.hilbert_times_c(2)
    worst = np.inf
    for i in range(50):
        m = int(rng.integers(2, 5))
        L = SymmetricForm.random(m, 3, "complex", rng)
        inst = Instance({"m": m, "n": 2, "space": "hxc", "field": "complex"},
                        {"L": L, "space": space})
        worst = min(worst, run_check(CHECKS["Q3"], inst, OPTS, i).margin)
    verdict(13, worst >= -1e-6, f"min(m||L^|| - ||DL^||) {worst:.3g} over 50 forms")
