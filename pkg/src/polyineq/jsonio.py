"""JSON encodings of forms, polynomials and vectors.

Tensor::

    {"field": "real"|"complex", "order": m, "dim": n,
     "coeffs": [{"idx": [i1, ..., im], "value": v | {"re": a, "im": b}}, ...]}

with 1-based sorted ``idx``. A general polynomial is
``{"degree": n, "parts": [tensor | null, ...]}`` and a homogeneous polynomial in
monomial form is ``{"field": f, "degree": m, "dim": n, "monomials":
[{"alpha": [a1, ..., an], "value": v}, ...]}``; vectors are flat arrays,
complex entries as ``[re, im]`` pairs. ``{"coeffs": [...]}`` is a univariate
polynomial and ``{"n": n, "c": [[re, im], ...]}`` a trigonometric one.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .forms import FormError, GeneralPoly, MonomialPoly, SymmetricForm
from .univariate import TrigPoly, UniPoly


class InputError(ValueError):
    """Malformed JSON input."""


def _num(v, what="value") -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{what} must be a number, got {v!r}")
    if not math.isfinite(v):
        raise InputError(f"{what} must be finite")
    return float(v)


def _scalar_in(v, field: str):
    if isinstance(v, dict):
        if set(v) != {"re", "im"}:
            raise InputError(f"complex scalar needs exactly 're' and 'im', got {sorted(v)}")
        z = complex(_num(v["re"], "re"), _num(v["im"], "im"))
        if field == "real" and z.imag != 0:
            raise InputError("complex coefficient in a real tensor")
        return z if field == "complex" else z.real
    return _num(v)


def _scalar_out(v, field: str):
    if field == "complex":
        z = complex(v)
        return {"re": z.real, "im": z.imag}
    return float(np.real(v))


def form_to_json(L: SymmetricForm) -> dict:
    keys = sorted(L.coeffs)
    return {"field": L.field, "order": L.order, "dim": L.dim,
            "coeffs": [{"idx": list(k), "value": _scalar_out(L.coeffs[k], L.field)} for k in keys]}


def form_from_json(d) -> SymmetricForm:
    if not isinstance(d, dict):
        raise InputError("tensor must be a JSON object")
    missing = {"field", "order", "dim", "coeffs"} - set(d)
    if missing:
        raise InputError(f"tensor is missing {sorted(missing)}")
    field = d["field"]
    if field not in ("real", "complex"):
        raise InputError(f"field must be 'real' or 'complex', got {field!r}")
    order, dim = d["order"], d["dim"]
    if not (isinstance(order, int) and isinstance(dim, int)) or order < 0 or dim < 1:
        raise InputError("order must be a nonnegative integer and dim a positive integer")
    if not isinstance(d["coeffs"], list):
        raise InputError("coeffs must be a list")
    coeffs = {}
    for entry in d["coeffs"]:
        if not isinstance(entry, dict) or set(entry) != {"idx", "value"}:
            raise InputError("each coefficient needs exactly 'idx' and 'value'")
        idx = entry["idx"]
        if not isinstance(idx, list) or not all(isinstance(i, int) and not isinstance(i, bool)
                                                for i in idx):
            raise InputError(f"idx must be a list of integers, got {idx!r}")
        key = tuple(idx)
        if key in coeffs:
            raise InputError(f"duplicate idx {idx}")
        coeffs[key] = _scalar_in(entry["value"], field)
    try:
        return SymmetricForm(order, dim, field, coeffs)
    except FormError as exc:
        raise InputError(str(exc)) from None


def general_to_json(P: GeneralPoly) -> dict:
    return {"degree": P.degree,
            "parts": [None if part is None else form_to_json(part) for part in P.parts]}


def general_from_json(d) -> GeneralPoly:
    if not isinstance(d, dict) or set(d) != {"degree", "parts"}:
        raise InputError("general polynomial needs exactly 'degree' and 'parts'")
    parts = d["parts"]
    if not isinstance(parts, list) or len(parts) != d["degree"] + 1:
        raise InputError("parts must list degree + 1 entries")
    forms = [None if p is None else form_from_json(p) for p in parts]
    present = [f for f in forms if f is not None]
    if not present:
        raise InputError("a polynomial needs at least one part")
    dim = present[0].dim
    field = "complex" if any(f.field == "complex" for f in present) else "real"
    try:
        return GeneralPoly(tuple(None if f is None else f.with_field(field) for f in forms),
                           dim, field)
    except FormError as exc:
        raise InputError(str(exc)) from None


def monomial_to_json(P: MonomialPoly) -> dict:
    return {"field": P.field, "degree": P.degree, "dim": P.dim,
            "monomials": [{"alpha": list(a), "value": _scalar_out(c, P.field)}
                          for a, c in sorted(P.coeffs.items())]}


def monomial_from_json(d) -> MonomialPoly:
    if not isinstance(d, dict) or set(d) != {"field", "degree", "dim", "monomials"}:
        raise InputError("monomial polynomial needs exactly 'field', 'degree', 'dim', 'monomials'")
    field = d["field"]
    if field not in ("real", "complex"):
        raise InputError(f"field must be 'real' or 'complex', got {field!r}")
    if not isinstance(d["monomials"], list):
        raise InputError("monomials must be a list")
    coeffs = {}
    for entry in d["monomials"]:
        if not isinstance(entry, dict) or set(entry) != {"alpha", "value"}:
            raise InputError("each monomial needs exactly 'alpha' and 'value'")
        alpha = entry["alpha"]
        if not isinstance(alpha, list) or not all(isinstance(a, int) and not isinstance(a, bool)
                                                  for a in alpha):
            raise InputError(f"alpha must be a list of integers, got {alpha!r}")
        if tuple(alpha) in coeffs:
            raise InputError(f"duplicate alpha {alpha}")
        coeffs[tuple(alpha)] = _scalar_in(entry["value"], field)
    try:
        return MonomialPoly(d["degree"], d["dim"], field, coeffs)
    except (FormError, TypeError) as exc:
        raise InputError(str(exc)) from None


def poly_from_json(d):
    """Tensor, monomial or general polynomial, whichever ``d`` encodes."""
    if isinstance(d, dict) and "parts" in d:
        return general_from_json(d)
    if isinstance(d, dict) and "monomials" in d:
        return monomial_from_json(d)
    return form_from_json(d)


def vector_to_json(v) -> list:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return [[float(z.real), float(z.imag)] for z in v]
    return [float(z) for z in v]


def vector_from_json(d) -> np.ndarray:
    if not isinstance(d, list) or not d:
        raise InputError("vector must be a nonempty list")
    if all(isinstance(e, list) for e in d):
        if not all(len(e) == 2 for e in d):
            raise InputError("complex entries must be [re, im] pairs")
        return np.array([complex(_num(a), _num(b)) for a, b in d])
    return np.array([_num(e) for e in d])


def unipoly_to_json(p: UniPoly) -> dict:
    return {"coeffs": list(p.coeffs)}


def unipoly_from_json(d) -> UniPoly:
    if not isinstance(d, dict) or set(d) != {"coeffs"} or not isinstance(d["coeffs"], list):
        raise InputError("univariate polynomial needs exactly a 'coeffs' list")
    return UniPoly(tuple(_num(a) for a in d["coeffs"]))


def trig_to_json(T: TrigPoly) -> dict:
    return {"n": T.n, "c": [[z.real, z.imag] for z in T.c]}


def trig_from_json(d) -> TrigPoly:
    if not isinstance(d, dict) or set(d) != {"n", "c"}:
        raise InputError("trigonometric polynomial needs exactly 'n' and 'c'")
    n = d["n"]
    if not isinstance(n, int) or n < 0:
        raise InputError("n must be a nonnegative integer")
    c = vector_from_json(d["c"]) if d["c"] else np.zeros(0)
    if c.shape != (2 * n + 1,):
        raise InputError(f"degree {n} needs {2 * n + 1} coefficients")
    return TrigPoly(n, tuple(complex(z) for z in c))


def load(path: str):
    """Read a JSON file, mapping I/O and syntax failures to :class:`InputError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
