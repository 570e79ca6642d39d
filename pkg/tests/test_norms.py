import numpy as np
import pytest

from polyineq.forms import (
    FormError,
    GeneralPoly,
    MonomialPoly,
    SymmetricForm,
    eval_general,
    frechet_form,
)
from polyineq.lp import INF, SpaceDesc, dual_exponent, lp_norm
from polyineq.norms import (
    NormEstimate,
    OptimizerOptions,
    derivative_norms,
    derivative_sup_norm,
    grid_oracle,
    multilinear_norm,
    polarization_ratio,
    polarization_ratio_search,
    poly_norm,
)

FAST = OptimizerOptions(restarts=12)
PS = [1.0, 1.5, 2.0, 3.0, INF]


def test_spec_examples():
    L = SymmetricForm(2, 2, "real", {(1, 2): 0.5})
    assert multilinear_norm(L, SpaceDesc.lp(2, 1.0)).value == pytest.approx(0.5, abs=1e-12)
    P = SymmetricForm(3, 3, "real", {(1, 2, 3): 1 / 6})
    est = poly_norm(P, SpaceDesc.lp(3, 1.0))
    assert est.value == pytest.approx(1 / 27, abs=1e-12)
    pn, mn = derivative_norms(P, np.array([0.5, 0.5, 0.0]), 1, SpaceDesc.lp(3, 1.0))
    assert pn.value == pytest.approx(0.25, abs=1e-12)
    assert mn.value == pytest.approx(0.25, abs=1e-12)


def test_monomial_input():
    P = MonomialPoly(2, 2, "real", {(1, 1): 1.0})
    assert poly_norm(P, SpaceDesc.lp(2, INF)).value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_quadratic_p2_matches_linear_algebra(field, rng):
    for _ in range(4):
        L = SymmetricForm.random(2, 4, field, rng)
        A = L.dense()
        space = SpaceDesc.lp(4, 2.0, field)
        if field == "real":
            expected = np.abs(np.linalg.eigvalsh(A)).max()
        else:
            # sup |x^T A x| over the complex sphere is the top singular value (Takagi)
            expected = np.linalg.svd(A, compute_uv=False)[0]
        assert poly_norm(L, space, FAST).value == pytest.approx(expected, rel=1e-9)
        sv = np.linalg.svd(A, compute_uv=False)[0]
        assert multilinear_norm(L, space, FAST).value == pytest.approx(sv, rel=1e-9)


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("field", ["real", "complex"])
def test_affine_closed_form(p, field, rng):
    # |a + b.x| peaks at a boundary point: |a| + ||b||_{p'}
    P = GeneralPoly.random(1, 3, field, rng)
    a, b = P.parts[0].tensor[0], P.parts[1].tensor
    expected = abs(a) + lp_norm(b, dual_exponent(p))
    assert poly_norm(P, SpaceDesc.lp(3, p, field), FAST).value == pytest.approx(expected, rel=1e-9)


def test_real_general_interior_maximum():
    # 1 - 1.5|x|^2 on the Euclidean ball: |P| is largest at the origin
    P = GeneralPoly((SymmetricForm.constant(1.0, 2), None,
                     SymmetricForm(2, 2, "real", {(1, 1): -1.5, (2, 2): -1.5})), 2)
    est = poly_norm(P, SpaceDesc.lp(2, 2.0), FAST)
    assert est.value == pytest.approx(1.0, abs=1e-9)
    assert lp_norm(est.witness, 2) < 1 - 1e-3


@pytest.mark.parametrize("p", PS)
def test_witness_invariants(p, rng):
    for field in ("real", "complex"):
        L = SymmetricForm.random(3, 3, field, rng)
        space = SpaceDesc.lp(3, p, field)
        est = poly_norm(L, space, FAST)
        assert isinstance(est, NormEstimate)
        assert lp_norm(est.witness, p) == pytest.approx(1.0, abs=1e-10)
        assert abs(L(*[est.witness] * 3)) == pytest.approx(est.value, abs=1e-12)
        ml = multilinear_norm(L, space, FAST)
        for w in ml.witness:
            assert lp_norm(w, p) == pytest.approx(1.0, abs=1e-10)
        assert abs(L(*ml.witness)) == pytest.approx(ml.value, abs=1e-12)
        assert ml.value >= est.value - 1e-9
        d = est.to_dict()
        assert set(d) == {"method", "value", "witness", "restarts", "converged"}


def test_grid_oracle_agreement(rng):
    worst = 0.0
    for i in range(50):
        m = int(rng.integers(1, 4))
        field = "real" if i % 2 == 0 else "complex"
        n = int(rng.integers(1, 4 if field == "real" else 3))
        p = PS[i % len(PS)]
        L = SymmetricForm.random(m, n, field, rng)
        space = SpaceDesc.lp(n, p, field)
        opt = poly_norm(L, space, FAST).value
        grid = grid_oracle(L, space, resolution=101).value
        worst = max(worst, abs(opt - grid) / max(opt, 1e-12))
        assert grid <= opt * (1 + 1e-9)
    assert worst <= 1e-3


def test_grid_oracle_multilinear_and_general(rng):
    L = SymmetricForm.random(2, 2, "real", rng)
    space = SpaceDesc.lp(2, 1.5)
    a = multilinear_norm(L, space, FAST).value
    b = grid_oracle(("multilinear", L), space).value
    assert b == pytest.approx(a, rel=1e-6)
    P = GeneralPoly.random(3, 2, "real", rng)
    a = poly_norm(P, space, FAST).value
    b = grid_oracle(P, space).value
    assert b == pytest.approx(a, rel=1e-6)


def test_grid_oracle_limits():
    with pytest.raises(FormError):
        grid_oracle(SymmetricForm.random(2, 4, "real", 0), SpaceDesc.lp(4, 2.0))
    with pytest.raises(FormError):
        grid_oracle(SymmetricForm.random(2, 3, "complex", 0), SpaceDesc.lp(3, 2.0, "complex"))


def test_ball_nesting_monotone(rng):
    for _ in range(3):
        L = SymmetricForm.random(3, 3, "real", rng)
        vals = [poly_norm(L, SpaceDesc.lp(3, p), FAST).value for p in PS]
        assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))


def test_derivative_norm_order(rng):
    for p in PS:
        L = SymmetricForm.random(3, 3, "real", rng)
        space = SpaceDesc.lp(3, p)
        x = 0.6 * space.sample_sphere(rng)
        for k in (1, 2, 3):
            pn, mn = derivative_norms(L, x, k, space, FAST)
            assert pn.value <= mn.value + 1e-9


def test_derivative_sup_norm_examples():
    # P(u) = u1 u2 u3 on l_1: sup |DP(x) y| = C_{1,3} / 27 = 0.25
    P = SymmetricForm(3, 3, "real", {(1, 2, 3): 1 / 6})
    est = derivative_sup_norm(P, 1, SpaceDesc.lp(3, 1.0, "complex"), FAST)
    assert est.value == pytest.approx(0.25, abs=1e-9)
    # k = m: D^m P = m! L, independent of x
    L = SymmetricForm.random(2, 2, "real", 1)
    d = derivative_sup_norm(L, 2, SpaceDesc.lp(2, 2.0), FAST)
    assert d.value == pytest.approx(2 * np.abs(np.linalg.eigvalsh(L.dense())).max(), rel=1e-9)
    assert len(d.witness) == 1


def test_zero_form_convention():
    Z = SymmetricForm(2, 3, "real")
    est = poly_norm(Z, SpaceDesc.lp(3, 2.0))
    assert est.value == 0 and est.converged
    np.testing.assert_array_equal(est.witness, [1, 0, 0])
    assert multilinear_norm(Z, SpaceDesc.lp(3, 2.0)).value == 0


def test_field_and_dimension_errors():
    L = SymmetricForm.random(2, 2, "complex", 0)
    with pytest.raises(FormError):
        poly_norm(L, SpaceDesc.lp(2, 2.0, "real"))
    with pytest.raises(FormError):
        poly_norm(L, SpaceDesc.lp(3, 2.0, "complex"))
    with pytest.raises(FormError):
        poly_norm(SymmetricForm.random(2, 3, "real", 0), SpaceDesc.hilbert_times_c(2, "real"))


def test_deterministic():
    L = SymmetricForm.random(3, 3, "complex", 8)
    space = SpaceDesc.lp(3, 1.5, "complex")
    a = poly_norm(L, space, FAST)
    b = poly_norm(L, space, FAST)
    assert a.value == b.value
    np.testing.assert_array_equal(a.witness, b.witness)


def test_hxc_norm_equals_general_poly_norm(rng):
    # L^(x, z) = z^m P(x / z): sup over H x C equals the norm of P on the ball of H
    L = SymmetricForm.random(3, 3, "complex", rng)
    space = SpaceDesc.hilbert_times_c(2)
    val = poly_norm(L, space, FAST).value
    parts = []
    for k in range(4):
        # coefficient of z^(3-k): C(3,k) L(x^k, e_z^(3-k)) restricted to H
        e = np.zeros(3, complex)
        e[2] = 1
        F = frechet_form(L, e, k)  # C(3,k) L(e^(3-k), .)
        sub = {key: v for key, v in F.coeffs.items() if all(i <= 2 for i in key)}
        parts.append(SymmetricForm(k, 2, "complex", sub))
    P = GeneralPoly(tuple(parts), 2, "complex")
    ref = poly_norm(P, SpaceDesc.lp(2, 2.0, "complex"), FAST).value
    assert val == pytest.approx(ref, rel=1e-8)
    x = rng.standard_normal(2) * 0.3
    assert eval_general(P, x.astype(complex)) == pytest.approx(L(*[np.r_[x, 1.0]] * 3))


def test_polarization_ratio_cross_seeded(rng):
    L = SymmetricForm.random(3, 2, "real", rng)
    res = polarization_ratio(L, SpaceDesc.lp(2, 2.0), FAST)
    assert res.ratio == pytest.approx(1.0, abs=1e-9)


def test_search_m2_p1():
    res = polarization_ratio_search(2, SpaceDesc.lp(2, 1.0), OptimizerOptions(restarts=16),
                                    n_random=4, climb_steps=10)
    assert res.ratio == pytest.approx(2.0, abs=1e-3)
