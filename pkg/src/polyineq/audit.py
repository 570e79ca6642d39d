"""Inequality audits: instance generators, the check registry, the extremal gallery, reports.

Every check turns one random (or constructed) instance into an
:class:`AuditRecord` holding both sides of an inequality. Norms computed by
:mod:`polyineq.norms` are lower bounds, so a computed norm on the left makes
the margin conservative. When a computed norm sits on the right, the check
runs the optimizer with doubled restarts and uses the looser tolerance
``TOL_COMPUTED``.

Tolerances are absolute for values of size at most one and relative beyond
that: a record passes when ``margin >= -tol * max(1, |rhs|)``, and the
effective threshold is what the record stores.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import chebyshev as cheb

from . import bounds
from .bounds import BoundError
from .forms import FormError, GeneralPoly, SymmetricForm, derivative_form, euler_remainder
from .jsonio import vector_to_json
from .lp import INF, SpaceDesc, dual_exponent, format_exponent, lp_norm, ww_sides
from .norms import (
    OptimizerOptions,
    derivative_norms,
    derivative_sup_norm,
    multilinear_norm,
    polarization_ratio,
    poly_norm,
)
from .univariate import (
    TrigPoly,
    UniPoly,
    deriv_uni,
    efet_sides,
    interval_nodes,
    sup_abs,
    sup_norm_circle,
    sup_norm_interval,
    szego_sides,
)

TOL_CLOSED = 1e-9
TOL_COMPUTED = 1e-6
RADII = (0.0, 0.3, 0.6, 0.9)
P_GRID = (1.0, 1.5, 2.0, 3.0, INF)
PREMISE_NODES = 4097
DEFAULT_INSTANCES = 20


class AuditError(ValueError):
    """Unknown check or gallery case, or parameters outside a case's range."""


# -- records ---------------------------------------------------------------------

@dataclass(frozen=True)
class AuditRecord:
    """One evaluated inequality ``lhs <= rhs`` (kind "le") or ``lhs == rhs`` (kind "eq").

    ``margin`` is ``rhs - lhs`` for "le" and ``-|rhs - lhs|`` for "eq";
    ``passed`` is ``margin >= -tolerance``.
    """

    check_id: str
    index: int
    instance: dict
    lhs: float
    rhs: float
    margin: float
    passed: bool
    tolerance: float
    methods: tuple = ()
    kind: str = "le"
    note: str = ""

    def to_dict(self) -> dict:
        return {"checkId": self.check_id, "index": self.index, "instance": self.instance,
                "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "pass": self.passed,
                "tolerance": self.tolerance, "methods": list(self.methods), "kind": self.kind,
                "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "AuditRecord":
        return cls(d["checkId"], d["index"], d["instance"], d["lhs"], d["rhs"], d["margin"],
                   d["pass"], d["tolerance"], tuple(d["methods"]), d["kind"], d["note"])


def make_record(check_id: str, index: int, instance: dict, lhs: float, rhs: float, tol: float,
                methods=(), kind: str = "le", note: str = "") -> AuditRecord:
    lhs, rhs = float(lhs), float(rhs)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return _flagged(check_id, index, instance, f"non-finite side: lhs={lhs}, rhs={rhs}",
                        tol, methods, kind)
    margin = rhs - lhs if kind == "le" else -abs(rhs - lhs)
    eff = tol * max(1.0, abs(rhs))
    return AuditRecord(check_id, index, instance, lhs, rhs, margin, margin >= -eff, eff,
                       tuple(methods), kind, note)


def _flagged(check_id, index, instance, why, tol, methods=(), kind="le", lhs=1.0, rhs=0.0):
    # inconsistent instance: a failing record instead of an exception
    margin = rhs - lhs if kind == "le" else -abs(rhs - lhs)
    return AuditRecord(check_id, index, instance, float(lhs), float(rhs), float(margin), False,
                       float(tol), tuple(methods), kind, f"flagged: {why}")


class _Inconsistent(Exception):
    def __init__(self, why, lhs=1.0, rhs=0.0):
        super().__init__(why)
        self.lhs, self.rhs = lhs, rhs


# -- instance generation ------------------------------------------------------------

GEN_KINDS = ("random-form", "random-unipoly-normalized", "random-trig-normalized",
             "random-generalpoly-normalized", "gallery")


def _random_unipoly(n: int, rng) -> UniPoly:
    # Gaussian Chebyshev coefficients keep random instances away from the
    # power-basis regime where high-degree terms dominate
    c = rng.standard_normal(n + 1)
    p = UniPoly(tuple(cheb.cheb2poly(c)))
    return p.scaled(1.0 / sup_norm_interval(p))


def _random_trig(n: int, real: bool, rng) -> TrigPoly:
    if real:
        T = TrigPoly.random_real(n, rng)
    else:
        T = TrigPoly(n, tuple(rng.standard_normal(2 * n + 1) + 1j * rng.standard_normal(2 * n + 1)))
    return T.scaled(1.0 / sup_norm_circle(T))


def _normalized_general(degree, dim, p, field, rng, opts, points=()):
    P = GeneralPoly.random(degree, dim, field, rng)
    space = SpaceDesc.lp(dim, p, field)
    est = poly_norm(P, space, opts.doubled())
    # fold in the sampled points so |P(x)| <= 1 holds exactly where checks evaluate
    nu = max([est.value] + [abs(P(x)) for x in points])
    return P.scaled(1.0 / nu), replace(est, value=est.value / nu)


def gen_instance(kind: str, params: dict, seed, opts: OptimizerOptions | None = None):
    """Deterministic random instance of ``kind``.

    ``seed`` is an int or a ``numpy.random.Generator``. Normalized kinds are
    rescaled by their computed sup norm; a general polynomial additionally
    folds ``params["points"]`` into the scale.
    """
    rng = np.random.default_rng(seed)
    if kind == "random-form":
        return SymmetricForm.random(params["m"], params["n"], params.get("field", "real"), rng)
    if kind == "random-unipoly-normalized":
        return _random_unipoly(params["n"], rng)
    if kind == "random-trig-normalized":
        return _random_trig(params["n"], params.get("real", True), rng)
    if kind == "random-generalpoly-normalized":
        return _normalized_general(params["degree"], params["dim"], params.get("p", 2.0),
                                   params.get("field", "real"), rng,
                                   opts or OptimizerOptions(), params.get("points", ()))[0]
    if kind == "gallery":
        prm = dict(params)
        return extremal_gallery(prm.pop("case"), prm, opts).instance
    raise AuditError(f"unknown instance kind {kind!r}; expected one of {', '.join(GEN_KINDS)}")


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def _point(space: SpaceDesc, rng, r: float) -> np.ndarray:
    return r * space.sample_sphere(rng)


def _p_json(p: float):
    return format_exponent(p) if p == INF else float(p)


@dataclass
class Instance:
    """Check input: a JSON-ready descriptor plus the objects the check consumes."""

    desc: dict
    data: dict = field(default_factory=dict)


# -- univariate checks ------------------------------------------------------------------

def _gen_uni_point(rng, index, opts):
    n = int(rng.integers(1, 9))
    r = RADII[index % len(RADII)]
    t = r * _pick(rng, (-1.0, 1.0))
    return Instance({"n": n, "t": t, "r": r}, {"p": _random_unipoly(n, rng)})


def _u1(inst, opts):
    p, t, n = inst.data["p"], inst.desc["t"], inst.desc["n"]
    return abs(float(deriv_uni(p)(t))), n / math.sqrt(1 - t * t), ("closed-form",)


def _gen_uni(rng, index, opts):
    n = int(rng.integers(1, 9))
    return Instance({"n": n}, {"p": _random_unipoly(n, rng)})


def _u2(inst, opts):
    n = inst.desc["n"]
    return sup_norm_interval(deriv_uni(inst.data["p"])), n * n, ("grid-refined",)


def _gen_u3(rng, index, opts):
    n = int(rng.integers(1, 9))
    return Instance({"n": n}, {"p": _random_unipoly(n - 1, rng)})


def _u3(inst, opts):
    p, n = inst.data["p"], inst.desc["n"]
    c = cheb.poly2cheb(np.array(p.coeffs))
    weighted = sup_abs(lambda t: cheb.chebval(t, c) * np.sqrt(np.clip(1 - t * t, 0, None)),
                       interval_nodes())[1]
    return sup_norm_interval(p), n * weighted, ("grid-refined",)


def _gen_u4(rng, index, opts):
    inst = _gen_uni(rng, index, opts)
    inst.desc["k"] = int(rng.integers(1, inst.desc["n"] + 1))
    return inst


def _u4(inst, opts):
    n, k = inst.desc["n"], inst.desc["k"]
    return (sup_norm_interval(deriv_uni(inst.data["p"], k)), bounds.markov_factor(n, k),
            ("grid-refined",))


def _gen_u5(rng, index, opts):
    inst = _gen_uni_point(rng, index, opts)
    inst.desc["k"] = int(rng.integers(1, inst.desc["n"] + 1))
    return inst


def _u5(inst, opts):
    n, k, t = inst.desc["n"], inst.desc["k"], inst.desc["t"]
    val = float(deriv_uni(inst.data["p"], k)(t))
    return val * val, bounds.m_k_value(n, k, t), ("closed-form",)


def _gen_u6(rng, index, opts):
    n = int(rng.integers(2, 9))
    k = int(rng.integers(1, n))
    c = rng.standard_normal(n - k + 1)
    p = UniPoly(tuple(cheb.cheb2poly(c)))
    edge = 1 - bounds.S_WINDOW
    ts = np.clip(interval_nodes(PREMISE_NODES), -edge, edge)
    env = np.array([bounds.m_k_value(n, k, float(t)) for t in ts])
    ratio = float(np.max(p(ts) ** 2 / env))
    return Instance({"n": n, "k": k, "premise_nodes": PREMISE_NODES},
                    {"p": p.scaled(1.0 / math.sqrt(ratio))})


def _u6(inst, opts):
    n, k = inst.desc["n"], inst.desc["k"]
    return (sup_norm_interval(inst.data["p"]), bounds.markov_factor(n, k),
            ("grid-refined",), f"premise |p|^2 <= M_k checked on {PREMISE_NODES} nodes")


def _gen_trig(real):
    def gen(rng, index, opts):
        n = int(rng.integers(1, 9))
        return Instance({"n": n, "field": "real" if real else "complex"},
                        {"T": _random_trig(n, real, rng)})
    return gen


def _u7(inst, opts):
    return (*szego_sides(inst.data["T"]), ("grid",))


def _u8(inst, opts):
    return (*efet_sides(inst.data["T"]), ("grid-refined",))


# -- Hilbert-space and real Banach pointwise checks ------------------------------------------

def _gen_general_point(p_choices=(2.0,), fields=("real",), radii=RADII, unit=False):
    def gen(rng, index, opts):
        degree = int(rng.integers(1, 5))
        dim = int(rng.integers(1, 4))
        p = float(_pick(rng, p_choices))
        fld = _pick(rng, fields)
        space = SpaceDesc.lp(dim, p, fld)
        r = 1.0 if unit else radii[index % len(radii)]
        x = _point(space, rng, r)
        y = space.sample_sphere(rng)
        P, est = _normalized_general(degree, dim, p, fld, rng, opts, points=[x])
        desc = {"degree": degree, "n": dim, "p": _p_json(p), "field": fld, "r": r,
                "x": vector_to_json(x)}
        return Instance(desc, {"P": P, "x": x, "y": y, "space": space, "norm": est.value})
    return gen


def _h1(inst, opts):
    P, x = inst.data["P"], inst.data["x"]
    n, r = P.degree, inst.desc["r"]
    lhs = lp_norm(P.gradient(x), 2)
    return lhs, min(n / math.sqrt(1 - r * r), n * n), ("closed-form", "projected-gradient")


def _h2(inst, opts):
    P, x, y = inst.data["P"], inst.data["x"], inst.data["y"]
    n, r = P.degree, inst.desc["r"]
    px = float(np.real(P(x)))
    if abs(px) > 1:
        raise _Inconsistent(f"|P(x)| = {abs(px)} exceeds the norm certificate", abs(px), 1.0)
    ip = float(np.dot(x, y))
    lhs = abs(float(P.gradient(x) @ y))
    rhs = n * math.sqrt((1 - r * r + ip * ip) / (1 - r * r) * (1 - px * px))
    return lhs, rhs, ("closed-form", "projected-gradient")


def _gen_with_k(base):
    def gen(rng, index, opts):
        inst = base(rng, index, opts)
        inst.desc["k"] = int(rng.integers(1, inst.data["P"].degree + 1))
        return inst
    return gen


def _h3(inst, opts):
    P, x, k, space = inst.data["P"], inst.data["x"], inst.desc["k"], inst.data["space"]
    F = derivative_form(P, x, k)
    est = multilinear_norm(F, space, opts)
    return est.value ** 2, bounds.m_k_value(P.degree, k, inst.desc["r"]), (est.method,)


def _h4(inst, opts):
    P, x, k, space = inst.data["P"], inst.data["x"], inst.desc["k"], inst.data["space"]
    F = derivative_form(P, x, k)
    est = poly_norm(F, space, opts)
    return est.value, bounds.markov_factor(P.degree, k), (est.method,)


def _b1(inst, opts):
    P, x, space = inst.data["P"], inst.data["x"], inst.data["space"]
    n, r = P.degree, inst.desc["r"]
    px = float(np.real(P(x)))
    try:
        rhs = bounds.firstgen_bound(n, px, r)
    except BoundError as exc:
        raise _Inconsistent(str(exc), abs(px), 1.0) from None
    return space.dual_norm(P.gradient(x)), rhs, ("closed-form", "projected-gradient")


def _gen_form_point(fields=("real",), p_choices=P_GRID, radii=RADII, ms=(2, 3, 4), dims=(2, 3)):
    def gen(rng, index, opts):
        m = int(_pick(rng, ms))
        n = int(_pick(rng, dims))
        k = int(rng.integers(1, m + 1))
        p = float(_pick(rng, p_choices))
        fld = _pick(rng, fields)
        space = SpaceDesc.lp(n, p, fld)
        r = radii[index % len(radii)] if radii else None
        x = _point(space, rng, r) if radii else None
        L = SymmetricForm.random(m, n, fld, rng)
        desc = {"m": m, "k": k, "n": n, "p": _p_json(p), "field": fld}
        if radii:
            desc.update(r=r, x=vector_to_json(x))
        return Instance(desc, {"L": L, "x": x, "space": space})
    return gen


def _form_norm(inst, opts, extra=()):
    est = poly_norm(inst.data["L"], inst.data["space"], opts.doubled(), extra_starts=extra)
    if est.value <= 0:
        raise _Inconsistent("zero polynomial norm", 1.0, 0.0)
    return est


def _worse(a, b):
    # (lhs, rhs, tag) pairs of two "le" inequalities; keep the smaller margin
    return a if a[1] - a[0] <= b[1] - b[0] else b


def _b2(inst, opts):
    L, x, space = inst.data["L"], inst.data["x"], inst.data["space"]
    m, k, r = inst.desc["m"], inst.desc["k"], inst.desc["r"]
    nrm = _form_norm(inst, opts).value
    pn, mn = derivative_norms(L, x, k, space, opts)
    ca, cb = bounds.real_banach_bounds(m, k, r)
    lhs, rhs, tag = _worse((pn.value, ca * nrm, "a"), (mn.value, cb * nrm, "b"))
    return lhs, rhs, (pn.method, mn.method), f"binding part ({tag})"


def _b3(inst, opts):
    L, space = inst.data["L"], inst.data["space"]
    m, k = inst.desc["m"], inst.desc["k"]
    nrm = _form_norm(inst, opts).value
    ca, cb = bounds.real_banach_bounds(m, k, "markov")
    dp = derivative_sup_norm(L, k, space, opts, kind="poly")
    dm = derivative_sup_norm(L, k, space, opts, kind="multilinear")
    lhs, rhs, tag = _worse((dp.value, ca * nrm, "a"), (dm.value, cb * nrm, "b"))
    return lhs, rhs, (dp.method,), f"binding part ({tag})"


def _l1(inst, opts):
    L, x, space = inst.data["L"], inst.data["x"], inst.data["space"]
    m, k, r = inst.desc["m"], inst.desc["k"], inst.desc["r"]
    nrm = _form_norm(inst, opts).value
    est = poly_norm(derivative_form(L, x, k), space, opts)
    return est.value, bounds.bernstein_bound_lp(m, k, space.p, r) * nrm, (est.method,)


def _markov_lp(field):
    def check(inst, opts):
        L, space = inst.data["L"], inst.data["space"]
        m, k = inst.desc["m"], inst.desc["k"]
        nrm = _form_norm(inst, opts).value
        est = derivative_sup_norm(L, k, space, opts, kind="poly")
        return est.value, bounds.markov_const_lp(m, k, space.p, field) * nrm, (est.method,)
    return check


# -- Clarkson / Rademacher ----------------------------------------------------------------

def _gen_ww(counts):
    def gen(rng, index, opts):
        count = int(_pick(rng, counts))
        n = int(rng.integers(1, 7))
        p = float(_pick(rng, P_GRID)) if index % 2 == 0 else float(rng.uniform(1, 6))
        q = dual_exponent(p)
        cap = min(p, q)
        lam = float(rng.uniform(1, cap)) if cap > 1 else 1.0
        fld = _pick(rng, ("real", "complex"))
        xs = rng.standard_normal((count, n))
        if fld == "complex":
            xs = xs + 1j * rng.standard_normal((count, n))
        xs = xs * rng.uniform(0.1, 2.0, size=(count, 1))
        desc = {"count": count, "n": n, "p": _p_json(p), "lambda": lam, "field": fld}
        return Instance(desc, {"xs": xs, "p": p, "lam": lam})
    return gen


def _ww(inst, opts):
    lhs, rhs = ww_sides(inst.data["xs"], inst.data["p"], inst.data["lam"])
    return lhs, rhs, ("closed-form",)


# -- complexification -------------------------------------------------------------------

def _c3(inst, opts):
    L, space = inst.data["L"], inst.data["space"]
    m = inst.desc["m"]
    real = _form_norm(inst, opts)
    cspace = SpaceDesc.lp(space.coords, space.p, "complex")
    cplx = poly_norm(L.with_field("complex"), cspace, opts.doubled(),
                     extra_starts=[real.witness.astype(complex)])
    lhs, rhs, tag = _worse((real.value, cplx.value, "lower"),
                           (cplx.value, 2 ** (m - 1) * real.value, "upper"))
    return lhs, rhs, (real.method, cplx.method), f"binding side ({tag})"


# -- polarization ----------------------------------------------------------------------------

def _p1(inst, opts):
    L, space = inst.data["L"], inst.data["space"]
    m = inst.desc["m"]
    res = polarization_ratio(L, space, opts.doubled())
    specs = bounds.polarization_bounds(m, space.p, space.field)
    best = min(specs, key=lambda s: s.value)
    return res.ratio, best.value, (res.multilinear.method, res.poly.method), f"bound {best.name}"


def _gen_p2(rng, index, opts):
    m = int(_pick(rng, (3, 4)))
    n = int(_pick(rng, (2, 3)))
    p = m + (0.0, 0.5, 1.0, 2.0, 4.0)[index % 5]
    fld = _pick(rng, ("real", "complex"))
    L = SymmetricForm.random(m, n, fld, rng)
    return Instance({"m": m, "n": n, "p": p, "field": fld},
                    {"L": L, "space": SpaceDesc.lp(n, p, fld)})


def _p2(inst, opts):
    L, space = inst.data["L"], inst.data["space"]
    res = polarization_ratio(L, space, opts.doubled())
    spec = next(s for s in bounds.polarization_bounds(inst.desc["m"], space.p)
                if s.name == "polar_gamma")
    return res.ratio, spec.value, (res.multilinear.method, res.poly.method)


def _p3(inst, opts):
    res = polarization_ratio(inst.data["L"], inst.data["space"], opts.doubled())
    return res.multilinear.value, res.poly.value, (res.multilinear.method, res.poly.method)


# -- Hilbert space identities -------------------------------------------------------------------

def _q1(inst, opts):
    P, x = inst.data["P"], inst.data["x"]
    n = P.degree
    g = P.gradient(x)
    px, dx = P(x), g @ x
    val = n * n * abs(px) ** 2 - abs(dx) ** 2 + lp_norm(g, 2) ** 2
    return math.sqrt(max(val, 0.0)), n * inst.data["norm"], ("closed-form", "projected-gradient")


def _q2(inst, opts):
    P, x = inst.data["P"], inst.data["x"]
    n = P.degree
    lhs = abs(euler_remainder(P, x)) + lp_norm(P.gradient(x), 2)
    return lhs, n * inst.data["norm"], ("closed-form", "projected-gradient")


def _gen_hxc(rng, index, opts):
    m = int(rng.integers(2, 5))
    h = int(_pick(rng, (1, 2)))
    space = SpaceDesc.hilbert_times_c(h)
    L = SymmetricForm.random(m, h + 1, "complex", rng)
    return Instance({"m": m, "n": h, "space": "hxc", "field": "complex"},
                    {"L": L, "space": space})


def _q3(inst, opts):
    L, space = inst.data["L"], inst.data["space"]
    m = inst.desc["m"]
    d = derivative_sup_norm(L, 1, space, opts.doubled())
    # ||DL^|| = m ||L^|| is attained, so both blocks of the derivative witness
    # are candidate maximizers of |L^|
    nrm = _form_norm(inst, opts, extra=list(d.witness))
    return d.value, m * nrm.value, (d.method, nrm.method)


def _q4(inst, opts):
    L, space = inst.data["L"], inst.data["space"]
    m = inst.desc["m"]
    res = polarization_ratio(L, space, opts.doubled())
    d = derivative_sup_norm(L, 1, space, opts.doubled())
    ml, pn = res.multilinear.value, res.poly.value
    eff = TOL_COMPUTED * max(1.0, pn)
    equal = abs(ml - pn) <= eff
    bern = d.value <= m * pn + TOL_COMPUTED * max(1.0, m * pn)
    if equal != bern:
        raise _Inconsistent(f"||L|| = ||L^|| is {equal} but ||DL^|| <= m||L^|| is {bern}", ml, pn)
    return ml, pn, (res.multilinear.method, res.poly.method), f"||DL^|| / m = {d.value / m!r}"


def _gen_e1(rng, index, opts):
    N = 1 + index % 9
    return Instance({"N": N, "n": N, "p": 2.0, "field": "real"}, {"L": _truncated_diag(N)})


def _truncated_diag(N: int) -> SymmetricForm:
    return SymmetricForm(2, N, "real", {(j, j): j / (j + 1) for j in range(1, N + 1)})


def _e1(inst, opts):
    N = inst.desc["N"]
    est = multilinear_norm(inst.data["L"], SpaceDesc.lp(N, 2.0), opts)
    return est.value, N / (N + 1), (est.method,)


# -- registry ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckDef:
    """A registry entry: how to draw an instance and evaluate both sides.

    ``evaluate`` returns ``(lhs, rhs, methods)`` with an optional note.
    """

    check_id: str
    statement: str
    anchor: str
    tol: float
    generate: object
    evaluate: object
    kind: str = "le"


def _def(cid, statement, anchor, tol, gen, ev, kind="le"):
    return CheckDef(cid, statement, anchor, tol, gen, ev, kind)


_HILB = _gen_general_point()
_REAL_LP = _gen_general_point(p_choices=P_GRID)
_REAL_LP_BALL = _gen_general_point(p_choices=P_GRID, radii=RADII + (1.0,))
_Q1 = _gen_general_point(fields=("real", "complex"), unit=True)
_Q2 = _gen_general_point(fields=("complex",))
_FORM_REAL_PT = _gen_form_point()
_FORM_CPLX_PT = _gen_form_point(fields=("complex",), p_choices=(1.0, 1.2, 1.5, 2.0, 3.0, 4.0))
_FORMS = _gen_form_point(fields=("real", "complex"), radii=())
_FORM_REAL = _gen_form_point(radii=())
_FORM_CPLX = _gen_form_point(fields=("complex",), radii=())
_FORM_P2 = _gen_form_point(fields=("real", "complex"), p_choices=(2.0,), radii=(), dims=(2, 3, 4))

CHECKS = {d.check_id: d for d in [
    _def("U1", "|p'(t)| <= n / sqrt(1 - t^2)", "Bernstein pointwise", TOL_CLOSED,
         _gen_uni_point, _u1),
    _def("U2", "||p'|| <= n^2", "A. A. Markov", TOL_CLOSED, _gen_uni, _u2),
    _def("U3", "||p|| <= n ||p(t) sqrt(1 - t^2)|| for deg p <= n - 1", "Schur", TOL_CLOSED,
         _gen_u3, _u3),
    _def("U4", "||p^(k)|| <= T_n^(k)(1)", "V. A. Markov", TOL_CLOSED, _gen_u4, _u4),
    _def("U5", "|p^(k)(t)|^2 <= M_k(t)", "Schaeffer-Duffin", TOL_CLOSED, _gen_u5, _u5),
    _def("U6", "deg p <= n - k and |p|^2 <= M_k imply ||p|| <= T_n^(k)(1)",
         "Schaeffer-Duffin converse", TOL_CLOSED, _gen_u6, _u6),
    _def("U7", "n^2 T^2 + T'^2 <= n^2 for real T", "Szego", TOL_CLOSED, _gen_trig(True), _u7),
    _def("U8", "|T'(t) cos w + n T(t) sin w| <= n ||T||", "Bernstein for trig polynomials",
         TOL_CLOSED, _gen_trig(False), _u8),
    _def("H1", "||grad P(x)||_2 <= min(n / sqrt(1 - |x|^2), n^2)", "Kellogg", TOL_COMPUTED,
         _HILB, _h1),
    _def("H2", "|DP(x)y| <= n [(1 - |x|^2 + <x,y>^2) / (1 - |x|^2) (1 - P(x)^2)]^(1/2)",
         "Harris, real Hilbert space", TOL_COMPUTED, _HILB, _h2),
    _def("H3", "||D^k P(x)||^2 <= M_k(|x|)", "Hilbert pointwise k-th derivative", TOL_COMPUTED,
         _gen_with_k(_HILB), _h3),
    _def("H4", "||D^k P^(x)|| <= T_n^(k)(1) on the ball", "V. A. Markov on real spaces",
         TOL_COMPUTED, _gen_with_k(_REAL_LP_BALL), _h4),
    _def("B1", "||DP(x)|| <= min(n sqrt(1 - P(x)^2) / sqrt(1 - |x|^2), n^2)",
         "first derivative on real Banach spaces", TOL_COMPUTED, _REAL_LP, _b1),
    _def("B2", "||D^k L^(x)||, ||D^k L(x)|| <= C(m,k) {k!, k^k} / (1 - |x|^2)^(k/2) ||L^||",
         "homogeneous Bernstein, real Banach", TOL_COMPUTED, _FORM_REAL_PT, _b2),
    _def("B3", "sup_x ||D^k L^(x)|| <= C(m,k) k! m^(m/2) / ((m-k)^((m-k)/2) k^(k/2)) ||L^||",
         "homogeneous Markov, real Banach", TOL_COMPUTED, _FORM_REAL, _b3),
    _def("L1", "||D^k L^(x)|| <= k! / (1 - |x|^lam)^(k/lam) ||L^||", "complex L_p Bernstein",
         TOL_COMPUTED, _FORM_CPLX_PT, _l1),
    _def("L2", "sup_x ||D^k L^(x)|| <= C_{k,m} ||L^||", "complex L_p Markov", TOL_COMPUTED,
         _FORM_CPLX, _markov_lp("complex")),
    _def("L3", "sup_x ||D^k L^(x)|| <= 2^(m-1) C_{k,m} ||L^||", "real L_p Markov", TOL_COMPUTED,
         _FORM_REAL, _markov_lp("real")),
    _def("C1", "two-vector Rademacher average <= (|x1|^lam + |x2|^lam)^(1/lam)",
         "generalized Clarkson", TOL_CLOSED, _gen_ww((2,)), _ww),
    _def("C2", "(E ||sum r_i x_i||^lam')^(1/lam') <= (sum ||x_i||^lam)^(1/lam)",
         "Rademacher L_p inequality", TOL_CLOSED, _gen_ww((2, 3, 4, 5)), _ww),
    _def("C3", "||P|| <= ||P~|| <= 2^(m-1) ||P||", "complexification", TOL_COMPUTED,
         _FORM_REAL, _c3),
    _def("P1", "||L|| / ||L^|| <= min polarization bound", "polarization constants",
         TOL_COMPUTED, _FORMS, _p1),
    _def("P2", "||L|| / ||L^|| <= gamma-function bound for p >= m >= 3", "gamma-function bound",
         TOL_COMPUTED, _gen_p2, _p2),
    _def("P3", "||L|| = ||L^|| at p = 2", "Banach", TOL_COMPUTED, _FORM_P2, _p3, kind="eq"),
    _def("Q1", "(n^2 |P(x)|^2 - |DP(x)x|^2 + ||DP(x)||^2)^(1/2) <= n ||P||, |x| = 1",
         "Hilbert space, unit vectors", TOL_COMPUTED, _Q1, _q1),
    _def("Q2", "|nP(x) - DP(x)x| + ||DP(x)|| <= n ||P||", "Harris, complex Hilbert space",
         TOL_COMPUTED, _Q2, _q2),
    _def("Q3", "||DL^|| <= m ||L^|| on H x C", "H x C with the sup norm", TOL_COMPUTED,
         _gen_hxc, _q3),
    _def("Q4", "||L|| = ||L^|| iff ||DL^|| <= m ||L^||, at p = 2", "Bernstein and Banach",
         TOL_COMPUTED, _FORM_P2, _q4, kind="eq"),
    _def("E1", "truncated sum j/(j+1) x_j y_j has norm N/(N+1)", "non-attaining bilinear form",
         TOL_COMPUTED, _gen_e1, _e1, kind="eq"),
]}

CHECK_IDS = tuple(CHECKS)


def instance_seed(seed: int, check_id: str, index: int) -> int:
    """Per-record seed, independent of which other checks or instances run."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(check_id.encode()), int(index)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def run_check(defn: CheckDef, instance: Instance, opts: OptimizerOptions, index: int = 0,
              seed: int | None = None) -> AuditRecord:
    """Evaluate one instance. Inconsistent instances give a failing flagged record."""
    desc = dict(instance.desc)
    if seed is not None:
        desc["seed"] = seed
    try:
        out = defn.evaluate(instance, opts)
    except _Inconsistent as exc:
        return _flagged(defn.check_id, index, desc, str(exc), defn.tol, kind=defn.kind,
                        lhs=exc.lhs, rhs=exc.rhs)
    except (BoundError, FormError, FloatingPointError) as exc:
        return _flagged(defn.check_id, index, desc, str(exc), defn.tol, kind=defn.kind)
    lhs, rhs, methods = out[:3]
    note = out[3] if len(out) > 3 else ""
    return make_record(defn.check_id, index, desc, lhs, rhs, defn.tol, methods, defn.kind, note)


# -- suites ------------------------------------------------------------------------------------

@dataclass
class SuiteConfig:
    """Which checks to run, how many instances each, and the seeds.

    ``counts`` overrides ``instances`` per check id.
    """

    checks: tuple = CHECK_IDS
    instances: int = DEFAULT_INSTANCES
    counts: dict = field(default_factory=dict)
    seed: int = 42
    opts: OptimizerOptions = field(default_factory=OptimizerOptions)

    def __post_init__(self):
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise AuditError(f"unknown check id(s): {', '.join(unknown)}")
        if self.instances < 0 or any(v < 0 for v in self.counts.values()):
            raise AuditError("instance counts must be nonnegative")


SUITES = {"full": CHECK_IDS, "univariate": tuple(c for c in CHECK_IDS if c[0] == "U"),
          "quick": ("U1", "U2", "U4", "U7", "C1", "C2", "H1", "E1")}


@dataclass
class SummaryRow:
    check_id: str
    count: int
    min_margin: float | None
    failures: int


@dataclass
class Report:
    records: list
    summary: list

    @property
    def failures(self) -> int:
        return sum(row.failures for row in self.summary)


def summarize(records) -> list[SummaryRow]:
    rows: dict[str, SummaryRow] = {}
    for rec in records:
        row = rows.setdefault(rec.check_id, SummaryRow(rec.check_id, 0, None, 0))
        row.count += 1
        row.min_margin = rec.margin if row.min_margin is None else min(row.min_margin, rec.margin)
        row.failures += 0 if rec.passed else 1
    return list(rows.values())


def run_one(check_id: str, index: int, seed: int, opts: OptimizerOptions) -> AuditRecord:
    """Instance ``index`` of ``check_id`` under suite seed ``seed``."""
    defn = CHECKS[check_id]
    s = instance_seed(seed, check_id, index)
    local = replace(opts, seed=s)
    inst = defn.generate(np.random.default_rng(s), index, local)
    return run_check(defn, inst, local, index, s)


def run_suite(config: SuiteConfig, progress=None) -> Report:
    """Run every configured check; records are ordered by (check, index).

    ``progress``, when given, is called with each finished record.
    """
    records = []
    for cid in config.checks:
        for i in range(config.counts.get(cid, config.instances)):
            rec = run_one(cid, i, config.seed, config.opts)
            records.append(rec)
            if progress is not None:
                progress(rec)
    return Report(records, summarize(records))


# -- report emitters ------------------------------------------------------------------------

SUMMARY_HEADER = ["checkId", "count", "minMargin", "failures"]


def _summary_dict(report: Report) -> dict:
    return {"summary": {"records": len(report.records), "failures": report.failures,
                        "checks": [{"checkId": r.check_id, "count": r.count,
                                    "minMargin": r.min_margin, "failures": r.failures}
                                   for r in report.summary]}}


def to_jsonl(report: Report) -> str:
    lines = [json.dumps(rec.to_dict(), allow_nan=False) for rec in report.records]
    lines.append(json.dumps(_summary_dict(report), allow_nan=False))
    return "\n".join(lines) + "\n"


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in report.summary:
        w.writerow([r.check_id, r.count, "" if r.min_margin is None else repr(r.min_margin),
                    r.failures])
    return buf.getvalue()


def read_jsonl(text: str) -> Report:
    """Inverse of :func:`to_jsonl`."""
    records = []
    for line in text.splitlines():
        d = json.loads(line)
        if "summary" not in d:
            records.append(AuditRecord.from_dict(d))
    return Report(records, summarize(records))


# -- extremal gallery -------------------------------------------------------------------------

GALLERY = ("EX1", "EX2", "EX3", "EX4", "EX5")


@dataclass
class GalleryResult:
    """A constructed extremal instance, its closed-form values and the checked records."""

    case: str
    params: dict
    instance: dict
    expected: dict
    records: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


def _need(params, key, default=None):
    if key in params and params[key] is not None:
        return params[key]
    if default is None:
        raise AuditError(f"missing parameter {key!r}")
    return default


def _ex1(params, opts):
    m, k = int(_need(params, "m", 3)), int(_need(params, "k", 1))
    p = float(_need(params, "p", 1.0))
    if not 1 <= k <= m or m < 2:
        raise AuditError(f"EX1 needs m >= 2 and 1 <= k <= m, got m={m}, k={k}")
    mp = m / (m - 1)
    if not 1 <= p <= mp + 1e-12:
        raise AuditError(f"EX1 needs 1 <= p <= m' = {mp:g}, got p={p}")
    fld = params.get("field") or "complex"
    L = SymmetricForm(m, m, fld, {tuple(range(1, m + 1)): 1.0 / math.factorial(m)})
    space = SpaceDesc.lp(m, p, fld)
    x = np.zeros(m)
    if m > k:
        x[: m - k] = (m - k) ** (-1 / p)
    y = np.zeros(m)
    y[m - k:] = k ** (-1 / p)
    norm_exp = m ** (-m / p)
    C = bounds.markov_const_lp(m, k, p, "complex")
    D = derivative_form(L, x.astype(space.dtype), k)
    val = abs(D(*([y.astype(space.dtype)] * k)))
    est = poly_norm(L, space, opts.doubled())
    desc = {"case": "EX1", "m": m, "k": k, "n": m, "p": _p_json(p), "field": fld}
    records = [
        make_record("EX1", 0, {**desc, "quantity": "|D^k L^(x) y^k| vs C_{k,m} ||L^||"},
                    val, C * norm_exp, TOL_CLOSED, ("closed-form",), "eq"),
        make_record("EX1", 1, {**desc, "quantity": "||L^||"}, est.value, norm_exp, TOL_COMPUTED,
                    (est.method,), "eq"),
    ]
    inst = {"form": L, "space": space, "x": x, "y": y}
    return desc, inst, {"poly_norm": norm_exp, "derivative_value": C * norm_exp,
                        "C_km": C}, records


def _ratio_case(case, L, space, expected, desc, opts):
    res = polarization_ratio(L, space, opts.doubled())
    rec = make_record(case, 0, {**desc, "quantity": "||L|| / ||L^||"}, res.ratio, expected,
                      TOL_CLOSED, (res.multilinear.method, res.poly.method), "eq")
    return desc, {"form": L, "space": space, "ratio": res}, {"ratio": expected}, [rec]


def _ex2(params, opts):
    p = float(_need(params, "p", 1.0))
    if not 1 <= p <= 2:
        raise AuditError(f"EX2 needs 1 <= p <= 2, got p={p}")
    fld = params.get("field") or "real"
    L = SymmetricForm(2, 2, fld, {(1, 2): 0.5})
    desc = {"case": "EX2", "m": 2, "n": 2, "p": _p_json(p), "field": fld}
    return _ratio_case("EX2", L, SpaceDesc.lp(2, p, fld), 2 ** ((2 - p) / p), desc, opts)


def _ex3(params, opts):
    p = float(_need(params, "p", 4.0))
    if not p >= 2:
        raise AuditError(f"EX3 needs p >= 2, got p={p}")
    if (params.get("field") or "real") != "real":
        raise AuditError("EX3 is a real-space example")
    L = SymmetricForm(2, 2, "real", {(1, 1): 1.0, (2, 2): -1.0})
    expected = 2.0 if p == INF else 2 ** ((p - 2) / p)
    desc = {"case": "EX3", "m": 2, "n": 2, "p": _p_json(p), "field": "real"}
    return _ratio_case("EX3", L, SpaceDesc.lp(2, p, "real"), expected, desc, opts)


def _ex4(params, opts):
    N = int(_need(params, "N", 9))
    if not 1 <= N <= 16:
        raise AuditError(f"EX4 needs 1 <= N <= 16, got N={N}")
    L = _truncated_diag(N)
    est = multilinear_norm(L, SpaceDesc.lp(N, 2.0), opts)
    desc = {"case": "EX4", "N": N, "n": N, "p": 2.0, "field": "real"}
    rec = make_record("EX4", 0, {**desc, "quantity": "||L||"}, est.value, N / (N + 1),
                      TOL_COMPUTED, (est.method,), "eq")
    return desc, {"form": L, "norm": est}, {"norm": N / (N + 1)}, [rec]


def _ex5(params, opts):
    n, k = int(_need(params, "n", 4)), int(_need(params, "k", 1))
    if not 0 <= k <= n or n > 30:
        raise AuditError(f"EX5 needs 0 <= k <= n <= 30, got n={n}, k={k}")
    T = UniPoly.chebyshev(n)
    expected = bounds.markov_factor(n, k)
    val = sup_norm_interval(deriv_uni(T, k))
    desc = {"case": "EX5", "n": n, "k": k}
    rec = make_record("EX5", 0, {**desc, "quantity": "||T_n^(k)||"}, val, expected, TOL_CLOSED,
                      ("grid-refined",), "eq")
    return desc, {"poly": T}, {"markov_factor": expected}, [rec]


_GALLERY_FNS = {"EX1": _ex1, "EX2": _ex2, "EX3": _ex3, "EX4": _ex4, "EX5": _ex5}


def extremal_gallery(case: str, params: dict | None = None,
                     opts: OptimizerOptions | None = None) -> GalleryResult:
    """Build a gallery case and check it against its closed-form values.

    Parameters: EX1 ``m, k, p, field``; EX2 ``p, field``; EX3 ``p``; EX4 ``N``;
    EX5 ``n, k``. Missing parameters take the defaults EX1 (3, 1, 1), EX2 p=1,
    EX3 p=4, EX4 N=9, EX5 (4, 1).
    """
    fn = _GALLERY_FNS.get(case)
    if fn is None:
        raise AuditError(f"unknown gallery case {case!r}; expected one of {', '.join(GALLERY)}")
    params = dict(params or {})
    desc, inst, expected, records = fn(params, opts or OptimizerOptions())
    return GalleryResult(case, desc, inst, expected, records)
