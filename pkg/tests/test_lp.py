import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyineq.lp import (
    INF,
    ExponentError,
    SpaceDesc,
    dual_attainer,
    dual_exponent,
    format_exponent,
    lp_norm,
    parse_exponent,
    rademacher_average,
    ww_margin,
    ww_sides,
)

exponents = st.one_of(st.sampled_from([1.0, 2.0, INF]), st.floats(1.0, 12.0))


def test_parse_and_format():
    assert parse_exponent("inf") == INF
    assert parse_exponent("Infinity") == INF
    assert parse_exponent("1.5") == 1.5
    assert format_exponent(INF) == "inf"
    with pytest.raises(ExponentError):
        parse_exponent(0.5)
    with pytest.raises(ValueError):
        parse_exponent("abc")


def test_dual_exponent():
    assert dual_exponent(1.0) == INF
    assert dual_exponent(INF) == 1.0
    assert dual_exponent(2.0) == 2.0
    assert abs(dual_exponent(3.0) - 1.5) < 1e-15


def test_lp_norm_values():
    x = np.array([3.0, -4.0])
    assert lp_norm(x, 2) == pytest.approx(5.0, abs=1e-15)
    assert lp_norm(x, 1) == 7.0
    assert lp_norm(x, INF) == 4.0
    assert lp_norm(np.array([3 + 4j]), 3) == pytest.approx(5.0, abs=1e-14)
    # no overflow on huge entries
    assert lp_norm(np.array([1e300, 1e300]), 2) == pytest.approx(math.sqrt(2) * 1e300)


@given(exponents, st.integers(0, 10**6), st.booleans())
def test_dual_attainer_attains(p, seed, cplx):
    r = np.random.default_rng(seed)
    g = r.standard_normal(4) + (1j * r.standard_normal(4) if cplx else 0)
    x, val = dual_attainer(g, p)
    assert lp_norm(x, p) == pytest.approx(1.0, abs=1e-12)
    assert np.real(np.vdot(x, g)) == pytest.approx(val, rel=1e-12)
    assert val == pytest.approx(lp_norm(g, dual_exponent(p)), rel=1e-12)


@given(exponents, st.integers(0, 10**6))
def test_holder(p, seed):
    r = np.random.default_rng(seed)
    x, y = r.standard_normal(5), r.standard_normal(5)
    assert abs(x @ y) <= lp_norm(x, p) * lp_norm(y, dual_exponent(p)) * (1 + 1e-12)


def test_space_hxc():
    s = SpaceDesc.hilbert_times_c(2)
    assert s.coords == 3
    v = np.array([3.0, 4.0, 2.0])
    assert s.norm(v) == pytest.approx(5.0)
    assert s.dual_norm(v) == pytest.approx(7.0)
    x = s.maximize_linear(np.array([1.0, 1.0, -1.0j]))
    assert s.norm(x) == pytest.approx(1.0)
    assert np.sum(np.array([1.0, 1.0, -1.0j]) * x) == pytest.approx(math.sqrt(2) + 1)


@given(st.sampled_from(["lp", "hxc"]), exponents, st.integers(0, 10**6))
def test_sample_sphere_unit(kind, p, seed):
    s = SpaceDesc("lp", 3, p, "complex") if kind == "lp" else SpaceDesc.hilbert_times_c(2)
    v = s.sample_sphere(np.random.default_rng(seed))
    assert s.norm(v) == pytest.approx(1.0, abs=1e-12)
    w = s.sample_sphere(np.random.default_rng(seed))
    assert np.array_equal(v, w)


def test_rademacher_average_definition():
    xs = np.array([[1.0, 0.0], [0.0, 2.0]])
    norms = [lp_norm(a * xs[0] + b * xs[1], 3) for a, b in itertools.product((1, -1), repeat=2)]
    assert rademacher_average(xs, 3, 2) == pytest.approx(math.sqrt(np.mean(np.square(norms))))
    assert rademacher_average(xs, 3, INF) == pytest.approx(max(norms))


@given(st.floats(1.0, 8.0), st.floats(0.0, 1.0), st.integers(2, 5), st.integers(0, 10**6))
def test_ww_inequality_holds(p, t, count, seed):
    lam = 1 + t * (min(p, dual_exponent(p)) - 1)
    xs = np.random.default_rng(seed).standard_normal((count, 3))
    lhs, rhs = ww_sides(xs, p, lam)
    assert rhs - lhs >= -1e-9 * max(1, rhs)
    assert ww_margin(xs, p, lam) == pytest.approx(rhs - lhs)


def test_clarkson_p2_is_parallelogram():
    # at p = lam = 2 the two-vector inequality is the parallelogram identity
    xs = np.array([[1.0, 2.0], [-3.0, 0.5]])
    lhs, rhs = ww_sides(xs, 2, 2)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_ww_lambda_range():
    with pytest.raises(ExponentError):
        ww_sides(np.eye(2), 3, 2)
