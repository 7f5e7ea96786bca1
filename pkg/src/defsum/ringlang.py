"""Terms (integer polynomials) and first-order formulas over the ring language.

Grammar (concrete syntax):

    formula   :=  iff
    iff       :=  implies ( '<->' implies )*
    implies   :=  or ( '->' implies )?            # right-associative
    or        :=  and ( '|' and )*                # flattened n-ary
    and       :=  unary ( '&' unary )*            # flattened n-ary
    unary     :=  '!' unary | quantified | primary
    quantified:=  ('exists' | 'forall') NAME '.' formula
    primary   :=  comparison | '(' formula ')'
    comparison:=  term ('=' | '!=') term
    term      :=  product (('+' | '-') product)*
    product   :=  factor ('*' factor)*
    factor    :=  '-' factor | base ('^' NAT)?
    base      :=  NAT | NAME | '(' term ')'

Precedence ! > & > | > -> > <->; '!=' parses as Not(Atom).  Integer literals
in decimal, arbitrary precision.  Quantifier bodies extend as far right as
possible.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Term", "Atom", "Not", "And", "Or", "Implies", "Iff", "Exists", "Forall",
    "Formula", "ParseError", "EvaluationError", "parse_formula", "parse_term",
    "desugar", "to_text", "term_text", "free_variables", "formula_size",
    "quantifier_depth", "build_irreducibility_formula", "RationalMap",
]


class ParseError(ValueError):
    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)
        self.line = line
        self.col = col


class EvaluationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """Sparse integer polynomial: sorted tuple of (exponent-vector, coeff)."""

    vars: tuple[str, ...]
    monomials: tuple[tuple[tuple[int, ...], int], ...]

    @staticmethod
    def _make(variables, mapping):
        """Canonical form: zero coefficients dropped, unused variables dropped,
        variables sorted by name (so structural equality is representation-free)."""
        variables = tuple(variables)
        mono = {e: c for e, c in mapping.items() if c != 0}
        used = [i for i in range(len(variables))
                if any(e[i] for e in mono)]
        order = sorted(used, key=lambda i: variables[i])
        new_vars = tuple(variables[i] for i in order)
        out = {}
        for e, c in mono.items():
            key = tuple(e[i] for i in order)
            out[key] = c
        return Term(new_vars, tuple(sorted(out.items())))

    @staticmethod
    def constant(c: int) -> "Term":
        return Term._make((), {(): c})

    @staticmethod
    def variable(name: str) -> "Term":
        return Term._make((name,), {(1,): 1})

    def _aligned(self, other):
        if self.vars == other.vars:
            return self.vars, dict(self.monomials), dict(other.monomials)
        merged = list(self.vars)
        for v in other.vars:
            if v not in merged:
                merged.append(v)

        def remap(term):
            idx = [merged.index(v) for v in term.vars]
            out = {}
            for exps, c in term.monomials:
                vec = [0] * len(merged)
                for i, e in zip(idx, exps):
                    vec[i] = e
                key = tuple(vec)
                out[key] = out.get(key, 0) + c
            return out

        return tuple(merged), remap(self), remap(other)

    def __add__(self, other):
        other = _coerce(other)
        vs, a, b = self._aligned(other)
        for e, c in b.items():
            a[e] = a.get(e, 0) + c
        return Term._make(vs, a)

    __radd__ = __add__

    def __neg__(self):
        return Term(self.vars, tuple((e, -c) for e, c in self.monomials))

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        vs, a, b = self._aligned(other)
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                key = tuple(x + y for x, y in zip(ea, eb)) if ea else eb
                out[key] = out.get(key, 0) + ca * cb
        return Term._make(vs, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent on a term")
        result = Term.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    @property
    def is_constant(self) -> bool:
        return all(not any(e) for e, _ in self.monomials)

    def constant_value(self) -> int:
        if not self.is_constant:
            raise ValueError("term is not constant")
        return sum(c for _, c in self.monomials)

    def used_vars(self) -> tuple[str, ...]:
        used = set()
        for exps, _ in self.monomials:
            for v, e in zip(self.vars, exps):
                if e:
                    used.add(v)
        return tuple(v for v in self.vars if v in used)

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.monomials), default=0)

    def evaluate(self, ctx, env) -> int:
        """Value in ctx with coefficients reduced through Z -> F_q."""
        acc = 0
        for exps, c in self.monomials:
            val = ctx.from_int(c)
            if val == 0:
                continue
            for name, e in zip(self.vars, exps):
                if not e:
                    continue
                try:
                    x = env[name]
                except KeyError:
                    raise EvaluationError(f"no assignment for variable '{name}'") from None
                val = ctx.mul(val, ctx.pow_(x, e))
                if val == 0:
                    break
            acc = ctx.add(acc, val)
        return acc

    def __str__(self):
        return term_text(self)


def _coerce(x) -> Term:
    if isinstance(x, Term):
        return x
    if isinstance(x, int):
        return Term.constant(x)
    raise TypeError(f"cannot use {type(x).__name__} as a term")


def term_text(t: Term) -> str:
    if not t.monomials:
        return "0"
    ordered = sorted(t.monomials, key=lambda mc: (-sum(mc[0]), tuple(-e for e in mc[0])))
    parts = []
    for exps, c in ordered:
        factors = []
        for v, e in zip(t.vars, exps):
            if e == 1:
                factors.append(v)
            elif e > 1:
                factors.append(f"{v}^{e}")
        if not factors:
            body = str(abs(c))
        elif abs(c) == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(abs(c))] + factors)
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


@dataclass(frozen=True)
class RationalMap:
    """f = num/den as a rational function; den nonzero as a polynomial."""

    num: Term
    den: Term

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("zero denominator in rational map")

    @staticmethod
    def of(num, den=None) -> "RationalMap":
        return RationalMap(_coerce(num), _coerce(1 if den is None else den))


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    a: "Formula"
    b: "Formula"


@dataclass(frozen=True)
class Iff:
    a: "Formula"
    b: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    child: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    child: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Iff, Exists, Forall]


def free_variables(phi: Formula) -> tuple[str, ...]:
    """Unbound variable names in first-occurrence order."""
    seen: list[str] = []

    def walk(node, bound):
        if isinstance(node, Atom):
            for t in (node.lhs, node.rhs):
                for v in t.used_vars():
                    if v not in bound and v not in seen:
                        seen.append(v)
        elif isinstance(node, Not):
            walk(node.child, bound)
        elif isinstance(node, (And, Or)):
            for c in node.children:
                walk(c, bound)
        elif isinstance(node, (Implies, Iff)):
            walk(node.a, bound)
            walk(node.b, bound)
        elif isinstance(node, (Exists, Forall)):
            walk(node.child, bound | {node.var})
        else:
            raise TypeError(f"not a formula node: {node!r}")

    walk(phi, frozenset())
    return tuple(seen)


def formula_size(phi: Formula) -> int:
    if isinstance(phi, Atom):
        return 1
    if isinstance(phi, Not):
        return 1 + formula_size(phi.child)
    if isinstance(phi, (And, Or)):
        return 1 + sum(formula_size(c) for c in phi.children)
    if isinstance(phi, (Implies, Iff)):
        return 1 + formula_size(phi.a) + formula_size(phi.b)
    return 1 + formula_size(phi.child)


def quantifier_depth(phi: Formula) -> int:
    if isinstance(phi, Atom):
        return 0
    if isinstance(phi, Not):
        return quantifier_depth(phi.child)
    if isinstance(phi, (And, Or)):
        return max((quantifier_depth(c) for c in phi.children), default=0)
    if isinstance(phi, (Implies, Iff)):
        return max(quantifier_depth(phi.a), quantifier_depth(phi.b))
    return 1 + quantifier_depth(phi.child)


def bound_variables(phi: Formula) -> tuple[str, ...]:
    out: list[str] = []

    def walk(node):
        if isinstance(node, (Exists, Forall)):
            out.append(node.var)
            walk(node.child)
        elif isinstance(node, Not):
            walk(node.child)
        elif isinstance(node, (And, Or)):
            for c in node.children:
                walk(c)
        elif isinstance(node, (Implies, Iff)):
            walk(node.a)
            walk(node.b)

    walk(phi)
    return tuple(out)


def desugar(phi: Formula) -> Formula:
    """Rewrite -> and <-> through their abbreviations; flatten And/Or chains."""
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, Not):
        return Not(desugar(phi.child))
    if isinstance(phi, And):
        kids = []
        for c in phi.children:
            d = desugar(c)
            kids.extend(d.children if isinstance(d, And) else [d])
        return And(tuple(kids))
    if isinstance(phi, Or):
        kids = []
        for c in phi.children:
            d = desugar(c)
            kids.extend(d.children if isinstance(d, Or) else [d])
        return Or(tuple(kids))
    if isinstance(phi, Implies):
        return desugar(Or((Not(phi.a), phi.b)))
    if isinstance(phi, Iff):
        return desugar(And((Implies(phi.a, phi.b), Implies(phi.b, phi.a))))
    if isinstance(phi, Exists):
        return Exists(phi.var, desugar(phi.child))
    if isinstance(phi, Forall):
        return Forall(phi.var, desugar(phi.child))
    raise TypeError(f"not a formula node: {phi!r}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><->|->|!=|[()+\-*^=!&|.]))"
)

_KEYWORDS = {"exists", "forall"}


def _linecol(text: str, pos: int) -> tuple[int, int]:
    return text.count("\n", 0, pos) + 1, pos - text.rfind("\n", 0, pos)


class _Tokenizer:
    def __init__(self, text: str):
        self.tokens = []
        pos, n = 0, len(text)
        while pos < n:
            while pos < n and text[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = _TOKEN_RE.match(text, pos)
            if not m:
                line, col = _linecol(text, pos)
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            value = m.group(kind)
            if kind == "name" and value in _KEYWORDS:
                kind = value
            line, col = _linecol(text, pos)
            self.tokens.append((kind, value, line, col))
            pos = m.end()
        line, col = _linecol(text, n)
        self.tokens.append(("eof", "", line, col))


class _Parser:
    def __init__(self, text: str):
        self.toks = _Tokenizer(text).tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind and t[1] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", t[2], t[3])
        return t

    def error(self, msg):
        t = self.peek()
        raise ParseError(msg + (f", found {t[1]!r}" if t[1] else " at end of input"), t[2], t[3])

    # formulas ---------------------------------------------------------------

    def formula(self):
        node = self.implies_level()
        while self.peek()[1] == "<->":
            self.next()
            node = Iff(node, self.implies_level())
        return node

    def implies_level(self):
        node = self.or_level()
        if self.peek()[1] == "->":
            self.next()
            return Implies(node, self.implies_level())
        return node

    def or_level(self):
        kids = [self.and_level()]
        while self.peek()[1] == "|":
            self.next()
            kids.append(self.and_level())
        return kids[0] if len(kids) == 1 else Or(tuple(kids))

    def and_level(self):
        kids = [self.unary_level()]
        while self.peek()[1] == "&":
            self.next()
            kids.append(self.unary_level())
        return kids[0] if len(kids) == 1 else And(tuple(kids))

    def unary_level(self):
        t = self.peek()
        if t[1] == "!":
            self.next()
            return Not(self.unary_level())
        if t[0] in ("exists", "forall"):
            self.next()
            name = self.expect("name")[1]
            self.expect(".")
            body = self.formula()
            return (Exists if t[0] == "exists" else Forall)(name, body)
        return self.primary()

    def primary(self):
        mark = self.i
        try:
            return self.comparison()
        except ParseError:
            self.i = mark
        if self.peek()[1] == "(":
            self.next()
            node = self.formula()
            self.expect(")")
            return node
        self.error("expected a comparison or a parenthesized formula")

    def comparison(self):
        lhs = self.term()
        t = self.next()
        if t[1] == "=":
            return Atom(lhs, self.term())
        if t[1] == "!=":
            return Not(Atom(lhs, self.term()))
        raise ParseError("expected '=' or '!='", t[2], t[3])

    # terms --------------------------------------------------------------------

    def term(self):
        node = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.product()
            node = node + rhs if op == "+" else node - rhs
        return node

    def product(self):
        node = self.factor()
        while self.peek()[1] == "*":
            self.next()
            node = node * self.factor()
        return node

    def factor(self):
        t = self.peek()
        if t[1] == "-":
            self.next()
            return -self.factor()
        node = self.term_base()
        if self.peek()[1] == "^":
            self.next()
            e = self.expect("int")
            node = node ** int(e[1])
        return node

    def term_base(self):
        t = self.next()
        if t[0] == "int":
            return Term.constant(int(t[1]))
        if t[0] == "name":
            return Term.variable(t[1])
        if t[1] == "(":
            node = self.term()
            self.expect(")")
            return node
        raise ParseError("expected an integer, a variable or '('", t[2], t[3])


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    tok = p.peek()
    if tok[0] != "eof":
        raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2], tok[3])
    return t


def parse_formula(text: str, free_vars=None, params=()) -> Formula:
    """Parse text into a Formula and validate variable declarations.

    With free_vars=None, free variables are inferred by first occurrence
    (a warning is issued).  Quantified names must not collide with declared
    names or with an enclosing quantifier.
    """
    p = _Parser(text)
    phi = p.formula()
    tok = p.peek()
    if tok[0] != "eof":
        raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2], tok[3])

    params = tuple(params)
    inferred = free_variables(phi)
    if free_vars is None:
        free_vars = tuple(v for v in inferred if v not in params)
        if free_vars:
            warnings.warn(
                f"free variables inferred by first occurrence: {free_vars}",
                stacklevel=2,
            )
    free_vars = tuple(free_vars)
    if set(free_vars) & set(params):
        raise ParseError("declared variables and parameters must be disjoint")
    declared = set(free_vars) | set(params)
    undeclared = [v for v in inferred if v not in declared]
    if undeclared:
        raise ParseError(f"unbound variable(s) {undeclared} not declared")

    bound = bound_variables(phi)
    dups = [v for i, v in enumerate(bound) if v in bound[:i]]
    if dups:
        raise ParseError(f"quantifier variable(s) {sorted(set(dups))} bound more than once")
    clashes = sorted(set(bound) & declared)
    if clashes:
        raise ParseError(f"quantifier rebinds declared name(s) {clashes}")

    # nested rebinding along a path is covered by the global duplicate check
    return phi


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "not": 5, "atom": 6, "quant": 1}


def _render(phi: Formula, parent_prec: int) -> str:
    if isinstance(phi, Atom):
        return f"{term_text(phi.lhs)} = {term_text(phi.rhs)}"
    if isinstance(phi, Not):
        if isinstance(phi.child, Atom):
            return f"{term_text(phi.child.lhs)} != {term_text(phi.child.rhs)}"
        return f"!{_render(phi.child, _PREC['not'])}"
    if isinstance(phi, And):
        body = " & ".join(_render(c, _PREC["and"]) for c in phi.children)
        return _wrap(body, _PREC["and"], parent_prec)
    if isinstance(phi, Or):
        body = " | ".join(_render(c, _PREC["or"]) for c in phi.children)
        return _wrap(body, _PREC["or"], parent_prec)
    if isinstance(phi, Implies):
        body = f"{_render(phi.a, _PREC['implies'] + 1)} -> {_render(phi.b, _PREC['implies'])}"
        return _wrap(body, _PREC["implies"], parent_prec)
    if isinstance(phi, Iff):
        body = f"{_render(phi.a, _PREC['iff'] + 1)} <-> {_render(phi.b, _PREC['iff'] + 1)}"
        return _wrap(body, _PREC["iff"], parent_prec)
    kw = "exists" if isinstance(phi, Exists) else "forall"
    body = f"{kw} {phi.var}. {_render(phi.child, 0)}"
    return _wrap(body, _PREC["quant"], parent_prec)


def _wrap(body: str, prec: int, parent_prec: int) -> str:
    return f"({body})" if prec < parent_prec else body


def to_text(phi: Formula) -> str:
    return _render(phi, 0)


# ---------------------------------------------------------------------------
# Irreducibility formulas
# ---------------------------------------------------------------------------

def build_irreducibility_formula(n: int, monic: bool = True) -> Formula:
    """Formula in a_0..a_{n-1} (monic) or a_0..a_n, true iff the polynomial
    of degree n with those coefficients is irreducible.

    Built as the conjunction over splits j + k = n (j, k >= 1) of the negated
    existential coefficient-matching systems for a factorization into factors
    of degree j and k.  Guarded at n <= 6: formula size grows combinatorially.
    """
    if not 2 <= n <= 6:
        raise ValueError("irreducibility formula supported for 2 <= n <= 6")
    a = [Term.variable(f"a{i}") for i in range(n + 1 if not monic else n)]

    def factor_block(j: int, k: int) -> Formula:
        u = [Term.variable(f"u{i}") for i in range(j)]
        v = [Term.variable(f"v{i}") for i in range(k)]
        if monic:
            ucoef = u + [Term.constant(1)]
            vcoef = v + [Term.constant(1)]
        else:
            # leading coefficients free but nonzero
            u_lead = Term.variable(f"u{j}")
            v_lead = Term.variable(f"v{k}")
            ucoef = u + [u_lead]
            vcoef = v + [v_lead]
        eqs = []
        top = n if not monic else n - 1
        for d in range(top + 1):
            conv = Term.constant(0)
            for i in range(max(0, d - k), min(j, d) + 1):
                conv = conv + ucoef[i] * vcoef[d - i]
            eqs.append(Atom(conv, a[d] if d < len(a) else Term.constant(1)))
        body: Formula = And(tuple(eqs)) if len(eqs) > 1 else eqs[0]
        if not monic:
            body = And((body, Not(Atom(ucoef[-1], Term.constant(0))),
                        Not(Atom(vcoef[-1], Term.constant(0)))))
        witnesses = [f"u{i}" for i in range(j)] + [f"v{i}" for i in range(k)]
        if not monic:
            witnesses += [f"u{j}", f"v{k}"]
        for w in reversed(witnesses):
            body = Exists(w, body)
        return Not(body)

    blocks = [factor_block(j, n - j) for j in range(1, n // 2 + 1)]
    phi: Formula = And(tuple(blocks)) if len(blocks) > 1 else blocks[0]
    if not monic:
        phi = And((Not(Atom(a[n], Term.constant(0))), phi))
    return phi
