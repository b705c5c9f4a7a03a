"""JSON (de)serialization for sequences, sets, polynomials, GAPs and certificates.

Scalars are strings such as "3", "-2/5" or "1/2+3/4*i"; plain JSON numbers
are accepted on input (floats are read through their decimal text).
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from lolab.algebra import ChowRepresentation, SparsePoly, Variety
from lolab.anticoncentration import FinitePointSet, SubspaceSet, VectorSequence
from lolab.decoupling import StructureCertificate
from lolab.exactmath import GR, as_scalar, format_scalar, parse_scalar
from lolab.gap import SymmetricGAP


def load_json(source):
    """Path, JSON text or an already-parsed object."""
    if isinstance(source, (dict, list)):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        return json.loads(Path(source).read_text())
    return json.loads(source)


def scalar_from_json(x) -> GR:
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return GR(x)
    if isinstance(x, float):
        return GR(Fraction(repr(x)))
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return GR(scalar_from_json(x[0]).re, scalar_from_json(x[1]).re)
    raise TypeError(f"cannot read scalar from {x!r}")


def scalar_to_json(x) -> str:
    return format_scalar(as_scalar(x))


def vector_from_json(v) -> tuple:
    return tuple(scalar_from_json(x) for x in v)


def vector_to_json(v) -> list:
    return [scalar_to_json(x) for x in v]


# sequences and sets ---------------------------------------------------------------


def sequence_from_json(obj) -> VectorSequence:
    obj = load_json(obj)
    vecs = [vector_from_json(v) for v in obj["vectors"]]
    k = obj.get("k", len(vecs[0]) if vecs else 0)
    return VectorSequence(int(k), vecs)


def sequence_to_json(A: VectorSequence) -> dict:
    return {"k": A.k, "vectors": [vector_to_json(v) for v in A.vectors]}


def polynomial_from_json(obj) -> SparsePoly:
    obj = load_json(obj)
    nvars = int(obj["nvars"])
    terms = {}
    for t in obj["terms"]:
        exps = tuple(int(e) for e in t["exps"])
        if len(exps) != nvars:
            raise ValueError("exponent vector length must equal nvars")
        terms[exps] = terms.get(exps, GR(0)) + scalar_from_json(t["coef"])
    return SparsePoly(nvars, terms)


def polynomial_to_json(f: SparsePoly) -> dict:
    return {
        "nvars": f.nvars,
        "terms": [{"exps": list(e), "coef": scalar_to_json(c)} for e, c in f.sorted_terms()],
    }


def variety_from_json(obj) -> Variety:
    obj = load_json(obj)
    polys = tuple(polynomial_from_json(p) for p in obj.get("polynomials", ()))
    k = int(obj.get("k", polys[0].nvars if polys else 0))
    return Variety(k, polys, obj.get("dim"), obj.get("degree"), obj.get("irreducible"), obj.get("name"))


def variety_to_json(S: Variety) -> dict:
    out = {"k": S.k, "polynomials": [polynomial_to_json(p) for p in S.polynomials]}
    for key in ("dim", "degree", "irreducible", "name"):
        if getattr(S, key) is not None:
            out[key] = getattr(S, key)
    return out


def set_from_json(obj, k: int | None = None):
    """Membership set: {"type": "finite"|"subspace"|"variety", ...}."""
    obj = load_json(obj)
    kind = obj.get("type", "variety" if "polynomials" in obj else "finite")
    if kind == "finite":
        pts = [vector_from_json(p) for p in obj.get("points", ())]
        return FinitePointSet(pts, obj.get("k", k))
    if kind == "subspace":
        basis = [vector_from_json(b) for b in obj.get("basis", ())]
        return SubspaceSet(basis, int(obj.get("k", k if k is not None else len(basis[0]))))
    if kind == "variety":
        return variety_from_json(obj)
    raise ValueError(f"unknown set type {kind!r}")


# GAPs, Chow representations, certificates ---------------------------------------


def gap_from_json(obj) -> SymmetricGAP:
    obj = load_json(obj)
    return SymmetricGAP([vector_from_json(v) for v in obj["generators"]], [int(q) for q in obj["radii"]])


def gap_to_json(Q: SymmetricGAP) -> dict:
    return {"generators": [vector_to_json(v) for v in Q.generators], "radii": list(Q.radii)}


def chow_from_json(obj) -> ChowRepresentation:
    """Either {"n", "forms", "f"} or {"n", "products": [[{"coeffs", "const"}, ...], ...]}."""
    obj = load_json(obj)
    n = int(obj["n"])
    if "products" in obj:
        products = [
            [([scalar_from_json(c) for c in fac["coeffs"]], scalar_from_json(fac.get("const", 0))) for fac in prod]
            for prod in obj["products"]
        ]
        return ChowRepresentation.from_products(n, products)
    forms = [vector_from_json(L) for L in obj["forms"]]
    return ChowRepresentation(n, forms, polynomial_from_json(obj["f"]), obj.get("degree"), obj.get("chow_rank"))


def chow_to_json(R: ChowRepresentation) -> dict:
    out = {"n": R.n, "forms": [vector_to_json(L) for L in R.forms], "f": polynomial_to_json(R.f)}
    if R.degree is not None:
        out["degree"] = R.degree
    if R.chow_rank is not None:
        out["chow_rank"] = R.chow_rank
    return out


def certificate_from_json(obj) -> StructureCertificate:
    """{"U", "W", "S_prime" (variety in W-coordinates), "indices", "delta", "C", "C1",
    optional "witness" and "translates"}."""
    obj = load_json(obj)
    return StructureCertificate(
        U=[vector_from_json(v) for v in obj.get("U", ())],
        W=[vector_from_json(v) for v in obj.get("W", ())],
        S_prime=variety_from_json(obj["S_prime"]),
        indices=[int(i) for i in obj["indices"]],
        delta=_rational(obj["delta"]),
        C=_rational(obj["C"]),
        C1=_rational(obj["C1"]),
        witness=[vector_from_json(v) for v in obj.get("witness", ())],
        translates=[vector_from_json(v) for v in obj.get("translates", ())],
    )


def _rational(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def to_jsonable(v):
    """Recursively convert exact values for json.dumps."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, GR):
        return format_scalar(v)
    if isinstance(v, SparsePoly):
        return polynomial_to_json(v)
    if isinstance(v, dict):
        return {str(k): to_jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        return [to_jsonable(x) for x in v]
    if isinstance(v, float) and v == float("inf"):
        return "inf"
    return v


def dumps(v) -> str:
    return json.dumps(to_jsonable(v), indent=2)
