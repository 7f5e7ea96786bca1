"""Job descriptions: the JSON schema for formula/curve/block jobs and the
builtin registry used by the CLI, the service and the experiment bundle.

A formula job document looks like

    {
      "formula": "exists y. x = y^2",
      "vars": ["x"],
      "params": [],
      "f_num": "x", "f_den": "1",
      "g_num": "1", "g_den": "1",
      "psi": 1, "chi": 0
    }

chi is an integer index against the canonical generator or the string
"legendre"; psi is an integer twist reduced through Z -> F_q.  A curve job
carries {"kind": "curve", "lhs": "y^2", "rhs": "x^3 - x"}; a block job
carries {"kind": "block", "vars": [...], "equations": [...],
"witnesses": [{"z": "z", "h": "z^2 - x"}], ...} plus optional beta fields
(f_num/f_den/g_num/g_den/psi/chi) for character weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .decomp import ExistentialBlock
from .expsum import SumSpec
from .ringlang import (
    Formula, RationalMap, Term, build_irreducibility_formula, free_variables,
    parse_formula, parse_term,
)

__all__ = ["JobSpec", "load_job", "resolve_job", "builtin_names", "BUILTIN_JOBS"]


@dataclass(frozen=True)
class JobSpec:
    kind: str  # "formula" | "curve" | "block"
    name: str = ""
    # formula jobs
    spec: Optional[SumSpec] = None
    # curve jobs
    curve_lhs: Optional[Term] = None
    curve_rhs: Optional[Term] = None
    # block jobs (beta weight described by spec.f/g/psi/chi when present)
    block: Optional[ExistentialBlock] = None


def _formula_job(doc: dict, name: str = "") -> JobSpec:
    params = tuple(doc.get("params", ()))
    formula = doc["formula"]
    if isinstance(formula, str):
        phi = parse_formula(formula, doc.get("vars"), params)
    else:
        phi = formula
    variables = tuple(doc.get("vars") or
                      [v for v in free_variables(phi) if v not in params])
    f = RationalMap(parse_term(str(doc.get("f_num", "0"))),
                    parse_term(str(doc.get("f_den", "1"))))
    g = RationalMap(parse_term(str(doc.get("g_num", "1"))),
                    parse_term(str(doc.get("g_den", "1"))))
    chi = doc.get("chi", 0)
    if chi != "legendre":
        chi = int(chi)
    spec = SumSpec(phi, variables, params, f, g, int(doc.get("psi", 1)), chi)
    return JobSpec("formula", name, spec=spec)


def _curve_job(doc: dict, name: str = "") -> JobSpec:
    lhs = parse_term(str(doc["lhs"]))
    rhs = parse_term(str(doc["rhs"]))
    if len(lhs.used_vars()) > 1 or len(rhs.used_vars()) > 1:
        raise ValueError("curve jobs need single-variable sides")
    return JobSpec("curve", name, curve_lhs=lhs, curve_rhs=rhs)


def _block_job(doc: dict, name: str = "") -> JobSpec:
    variables = tuple(doc["vars"])
    params = tuple(doc.get("params", ()))
    equations = tuple(parse_term(str(t)) for t in doc.get("equations", ()))
    witnesses = tuple((parse_term(str(w["h"])), str(w["z"]))
                      for w in doc.get("witnesses", ()))
    block = ExistentialBlock(variables, params, equations, witnesses)
    f = RationalMap(parse_term(str(doc.get("f_num", "0"))),
                    parse_term(str(doc.get("f_den", "1"))))
    g = RationalMap(parse_term(str(doc.get("g_num", "1"))),
                    parse_term(str(doc.get("g_den", "1"))))
    chi = doc.get("chi", 0)
    if chi != "legendre":
        chi = int(chi)
    spec = SumSpec(block.to_formula(), variables, params, f, g,
                   int(doc.get("psi", 1)), chi)
    return JobSpec("block", name, spec=spec, block=block)


def resolve_job(doc: Union[dict, str], name: str = "") -> JobSpec:
    """Resolve a job document (dict) or builtin name into a JobSpec."""
    if isinstance(doc, str):
        try:
            return BUILTIN_JOBS[doc]()
        except KeyError:
            raise ValueError(f"unknown builtin job {doc!r}; known: {builtin_names()}") from None
    kind = doc.get("kind", "formula")
    if kind == "formula":
        return _formula_job(doc, name)
    if kind == "curve":
        return _curve_job(doc, name)
    if kind == "block":
        return _block_job(doc, name)
    raise ValueError(f"unknown job kind {kind!r}")


def load_job(source: Union[str, Path, dict]) -> JobSpec:
    """Load a job from a builtin name, a JSON file path, or a parsed dict."""
    if isinstance(source, dict):
        return resolve_job(source)
    text = str(source)
    if text in BUILTIN_JOBS:
        return resolve_job(text)
    path = Path(text)
    if not path.exists():
        raise ValueError(f"{text!r} is neither a builtin job nor an existing file")
    doc = json.loads(path.read_text())
    return resolve_job(doc, name=path.stem)


# ---------------------------------------------------------------------------
# Builtins
# ---------------------------------------------------------------------------

def _b_squares():
    return _formula_job({"formula": "exists y. x = y^2", "vars": ["x"],
                         "f_num": "x"}, "squares")


def _b_nonsquares():
    return _formula_job({"formula": "!(exists y. x = y^2)", "vars": ["x"],
                         "f_num": "x"}, "nonsquares")


def _b_cubes():
    return _formula_job({"formula": "exists y. x = y^3", "vars": ["x"],
                         "f_num": "x"}, "cubes")


def _b_conic():
    return _formula_job({"formula": "exists y. x^2 + 1 = y^2", "vars": ["x"],
                         "g_num": "x^2 + 1", "chi": "legendre"}, "conic")


def _b_discriminant():
    return _formula_job({"formula": "forall t. t^2 + a*t + b != 0",
                         "vars": ["a", "b"], "g_num": "a^2 - 4*b",
                         "chi": "legendre"}, "discriminant")


def _b_irreducible_quadratics():
    # root-free criterion; equivalent to irreducibility in degree 2
    return _formula_job({"formula": "forall t. t^2 + a1*t + a0 != 0",
                         "vars": ["a0", "a1"]}, "irreducible_quadratics")


def _b_irreducible_quadratics_pairs():
    phi = build_irreducibility_formula(2)
    return JobSpec("formula", "irreducible_quadratics_pairs",
                   spec=SumSpec(phi, ("a0", "a1")))


def _b_elliptic():
    return _curve_job({"lhs": "y^2", "rhs": "x^3 - x"}, "elliptic")


def _b_block_squares():
    return _block_job({"vars": ["x"], "witnesses": [{"z": "z", "h": "z^2 - x"}]},
                      "block_squares")


def _b_block_squares_weighted():
    return _block_job({"vars": ["x"], "witnesses": [{"z": "z", "h": "z^2 - x"}],
                       "f_num": "x"}, "block_squares_weighted")


def _b_block_conic():
    return _block_job({"vars": ["x"],
                       "witnesses": [{"z": "z", "h": "x^2 - z^2 + 1"}]},
                      "block_conic")


def _b_block_k2():
    return _block_job({"vars": ["x"],
                       "witnesses": [{"z": "z1", "h": "z1^2 - x"},
                                     {"z": "z2", "h": "z2^3 - x - 1"}]},
                      "block_k2")


BUILTIN_JOBS = {
    "squares": _b_squares,
    "nonsquares": _b_nonsquares,
    "cubes": _b_cubes,
    "conic": _b_conic,
    "discriminant": _b_discriminant,
    "irreducible_quadratics": _b_irreducible_quadratics,
    "irreducible_quadratics_pairs": _b_irreducible_quadratics_pairs,
    "elliptic": _b_elliptic,
    "block_squares": _b_block_squares,
    "block_squares_weighted": _b_block_squares_weighted,
    "block_conic": _b_block_conic,
    "block_k2": _b_block_k2,
}


def builtin_names() -> list[str]:
    return sorted(BUILTIN_JOBS)
