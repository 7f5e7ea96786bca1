"""Satisfaction and enumeration of definable sets by exhaustive quantifier search.

Two evaluation paths exist on purpose: `satisfies` walks the AST directly and
is the semantic reference; `compile_formula` generates a fast evaluator
(python source for prime fields and table-backed extensions, closures
otherwise).  The test suite checks the two agree exhaustively on the formula
corpus, and enumeration always uses the compiled path.

Budgets are a precondition: the estimated cost q^(n + depth) * |phi| is
checked before any work starts.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .gf import FieldCtx, make_extension
from .ringlang import (
    And, Atom, Exists, Forall, Formula, Iff, Implies, Not, Or, Term,
    EvaluationError, formula_size, quantifier_depth,
)

DEFAULT_BUDGET = 10 ** 8
_N_CHUNKS = 16


class BudgetExceeded(RuntimeError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"estimated cost {estimate} exceeds budget {budget}")
        self.estimate = estimate
        self.budget = budget


def satisfies_cost(phi: Formula, q: int) -> int:
    return formula_size(phi) * q ** quantifier_depth(phi)


def enumeration_cost(phi: Formula, q: int, n: int) -> int:
    return formula_size(phi) * q ** (n + quantifier_depth(phi))


def check_budget(estimate: int, budget: int) -> int:
    if estimate > budget:
        raise BudgetExceeded(estimate, budget)
    return estimate


# ---------------------------------------------------------------------------
# Reference interpreter
# ---------------------------------------------------------------------------

def eval_reference(phi: Formula, ctx: FieldCtx, env: dict) -> bool:
    """Direct inductive satisfaction; quantifiers range over ctx elements only."""
    if isinstance(phi, Atom):
        return phi.lhs.evaluate(ctx, env) == phi.rhs.evaluate(ctx, env)
    if isinstance(phi, Not):
        return not eval_reference(phi.child, ctx, env)
    if isinstance(phi, And):
        return all(eval_reference(c, ctx, env) for c in phi.children)
    if isinstance(phi, Or):
        return any(eval_reference(c, ctx, env) for c in phi.children)
    if isinstance(phi, Implies):
        return (not eval_reference(phi.a, ctx, env)) or eval_reference(phi.b, ctx, env)
    if isinstance(phi, Iff):
        return eval_reference(phi.a, ctx, env) == eval_reference(phi.b, ctx, env)
    if isinstance(phi, Exists):
        for v in ctx.elements():
            env[phi.var] = v
            if eval_reference(phi.child, ctx, env):
                del env[phi.var]
                return True
        env.pop(phi.var, None)
        return False
    if isinstance(phi, Forall):
        for v in ctx.elements():
            env[phi.var] = v
            if not eval_reference(phi.child, ctx, env):
                del env[phi.var]
                return False
        env.pop(phi.var, None)
        return True
    raise TypeError(f"not a formula node: {phi!r}")


def satisfies(phi: Formula, ctx: FieldCtx, assignment: Mapping[str, int], *,
              budget: int = DEFAULT_BUDGET) -> bool:
    check_budget(satisfies_cost(phi, ctx.q), budget)
    return eval_reference(phi, ctx, dict(assignment))


# ---------------------------------------------------------------------------
# Compiled evaluator
# ---------------------------------------------------------------------------

_compiled_cache: dict = {}


def compile_formula(phi: Formula, ctx: FieldCtx, arg_names: Sequence[str]):
    """Callable taking one int per name in arg_names, returning bool."""
    key = (phi, ctx.p, ctx.nu, tuple(arg_names))
    fn = _compiled_cache.get(key)
    if fn is None:
        fn = _build_formula_fn(phi, ctx, tuple(arg_names))
        _compiled_cache[key] = fn
    return fn


def compile_term(term: Term, ctx: FieldCtx, arg_names: Sequence[str]):
    """Callable taking one int per name in arg_names, returning an element."""
    key = ("term", term, ctx.p, ctx.nu, tuple(arg_names))
    fn = _compiled_cache.get(key)
    if fn is None:
        fn = _build_term_fn(term, ctx, tuple(arg_names))
        _compiled_cache[key] = fn
    return fn


def _sym_table(arg_names):
    return {name: f"a{i}" for i, name in enumerate(arg_names)}


def _int_term_expr(term: Term, sym: dict, p: int) -> Optional[str]:
    parts = []
    for exps, c in term.monomials:
        c %= p
        if c == 0:
            continue
        factors = []
        for v, e in zip(term.vars, exps):
            if e == 0:
                continue
            s = sym[v]
            factors.append(s if e == 1 else (f"{s}*{s}" if e == 2 else f"{s}**{e}"))
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    return " + ".join(parts) if parts else None


def _tab_term_expr(term: Term, sym: dict, ctx: FieldCtx) -> str:
    monos = []
    for exps, c in term.monomials:
        ce = ctx.from_int(c)
        if ce == 0:
            continue
        expr = None
        for v, e in zip(term.vars, exps):
            if e == 0:
                continue
            s = sym[v]
            fe = s
            for _ in range(e - 1):
                fe = f"M[{fe}*Q+{s}]"
            expr = fe if expr is None else f"M[{expr}*Q+{fe}]"
        if expr is None:
            expr = str(ce)
        elif ce != 1:
            expr = f"M[{ce}*Q+{expr}]"
        monos.append(expr)
    if not monos:
        return "0"
    acc = monos[0]
    for m in monos[1:]:
        acc = f"A[{acc}*Q+{m}]"
    return acc


def _univariate_horner(term: Term, p: int):
    """Dense Horner evaluator for a one-variable term; keeps ints below p^2."""
    var = term.used_vars()[0]
    deg = term.degree()
    coeffs = [0] * (deg + 1)
    vi = term.vars.index(var)
    for exps, c in term.monomials:
        coeffs[exps[vi] if term.vars else 0] += c
    desc = [c % p for c in reversed(coeffs)]

    def f(x):
        acc = 0
        for c in desc:
            acc = (acc * x + c) % p
        return acc

    return f


class _SourceGen:
    def __init__(self, ctx: FieldCtx, sym: dict):
        self.ctx = ctx
        self.sym = dict(sym)
        self.counter = 0
        self.tabled = ctx.nu > 1
        self.helpers: dict = {}

    def fresh(self) -> str:
        self.counter += 1
        return f"b{self.counter}"

    def add_helper(self, fn) -> str:
        name = f"T{len(self.helpers)}"
        self.helpers[name] = fn
        return name

    def atom(self, node: Atom) -> str:
        diff = node.lhs - node.rhs
        if self.tabled:
            if diff.is_constant:
                return "True" if self.ctx.from_int(diff.constant_value()) == 0 else "False"
            return f"({_tab_term_expr(diff, self.sym, self.ctx)}) == 0"
        expr = _int_term_expr(diff, self.sym, self.ctx.p)
        if expr is None:
            return "True"
        if diff.is_constant:
            return "True" if diff.constant_value() % self.ctx.p == 0 else "False"
        if len(diff.used_vars()) == 1 and diff.degree() >= 8:
            name = self.add_helper(_univariate_horner(diff, self.ctx.p))
            return f"{name}({self.sym[diff.used_vars()[0]]}) == 0"
        return f"({expr}) % P == 0"

    def emit(self, node: Formula) -> str:
        if isinstance(node, Atom):
            return self.atom(node)
        if isinstance(node, Not):
            return f"(not {self.emit(node.child)})"
        if isinstance(node, And):
            return "(" + " and ".join(self.emit(c) for c in node.children) + ")"
        if isinstance(node, Or):
            return "(" + " or ".join(self.emit(c) for c in node.children) + ")"
        if isinstance(node, Implies):
            return f"((not {self.emit(node.a)}) or {self.emit(node.b)})"
        if isinstance(node, Iff):
            return f"(({self.emit(node.a)}) == ({self.emit(node.b)}))"
        if isinstance(node, (Exists, Forall)):
            b = self.fresh()
            saved = self.sym.get(node.var)
            self.sym[node.var] = b
            body = self.emit(node.child)
            if saved is None:
                del self.sym[node.var]
            else:
                self.sym[node.var] = saved
            head = "any" if isinstance(node, Exists) else "all"
            return f"{head}({body} for {b} in R)"
        raise TypeError(f"not a formula node: {node!r}")


def _exec_fn(src: str, ns: dict):
    exec(src, ns)
    return ns["_f"]


def _build_formula_fn(phi: Formula, ctx: FieldCtx, arg_names: tuple):
    if ctx.nu == 1 or ctx.q <= 1024:
        sym = _sym_table(arg_names)
        gen = _SourceGen(ctx, sym)
        expr = gen.emit(phi)
        args = ", ".join(sym[n] for n in arg_names)
        src = f"def _f({args}):\n    return {expr}\n"
        ns = {"R": range(ctx.q)}
        ns.update(gen.helpers)
        if gen.tabled:
            ns.update({"M": ctx._mul_t(), "A": ctx._add_t(), "Q": ctx.q})
        else:
            ns["P"] = ctx.p
        return _exec_fn(src, ns)
    return _closure_formula_fn(phi, ctx, arg_names)


def _build_term_fn(term: Term, ctx: FieldCtx, arg_names: tuple):
    if ctx.nu == 1 and len(term.used_vars()) == 1 and term.degree() >= 8:
        horner = _univariate_horner(term, ctx.p)
        idx = arg_names.index(term.used_vars()[0])
        if idx == 0 and len(arg_names) == 1:
            return horner
        return lambda *args: horner(args[idx])
    if ctx.nu == 1 or ctx.q <= 1024:
        sym = _sym_table(arg_names)
        if ctx.nu == 1:
            expr = _int_term_expr(term, sym, ctx.p)
            body = "0" if expr is None else f"({expr}) % P"
        else:
            body = _tab_term_expr(term, sym, ctx)
        args = ", ".join(sym[n] for n in arg_names)
        src = f"def _f({args}):\n    return {body}\n"
        ns = {"P": ctx.p}
        if ctx.nu > 1:
            ns.update({"M": ctx._mul_t(), "A": ctx._add_t(), "Q": ctx.q})
        return _exec_fn(src, ns)
    slots = {n: i for i, n in enumerate(arg_names)}
    node = _closure_term(term, ctx, slots)

    def top(*args):
        return node(list(args))

    return top


# closure fallback for large extension fields ------------------------------

def _closure_term(term: Term, ctx: FieldCtx, slots: dict):
    monos = []
    for exps, c in term.monomials:
        ce = ctx.from_int(c)
        if ce == 0:
            continue
        powers = tuple((slots[v], e) for v, e in zip(term.vars, exps) if e)
        monos.append((ce, powers))
    mul, add, pw = ctx.mul, ctx.add, ctx.pow_

    def f(env):
        acc = 0
        for ce, powers in monos:
            v = ce
            for idx, e in powers:
                v = mul(v, pw(env[idx], e))
                if v == 0:
                    break
            acc = add(acc, v)
        return acc

    return f


def _closure_formula_fn(phi: Formula, ctx: FieldCtx, arg_names: tuple):
    slots: dict = {n: i for i, n in enumerate(arg_names)}
    nslots = [len(arg_names)]
    elements = range(ctx.q)

    def build(node, slots):
        if isinstance(node, Atom):
            t = _closure_term(node.lhs - node.rhs, ctx, slots)
            return lambda env: t(env) == 0
        if isinstance(node, Not):
            c = build(node.child, slots)
            return lambda env: not c(env)
        if isinstance(node, And):
            kids = [build(c, slots) for c in node.children]
            return lambda env: all(k(env) for k in kids)
        if isinstance(node, Or):
            kids = [build(c, slots) for c in node.children]
            return lambda env: any(k(env) for k in kids)
        if isinstance(node, Implies):
            fa, fb = build(node.a, slots), build(node.b, slots)
            return lambda env: (not fa(env)) or fb(env)
        if isinstance(node, Iff):
            fa, fb = build(node.a, slots), build(node.b, slots)
            return lambda env: fa(env) == fb(env)
        if isinstance(node, (Exists, Forall)):
            idx = nslots[0]
            nslots[0] += 1
            inner = build(node.child, {**slots, node.var: idx})
            if isinstance(node, Exists):
                def ex(env):
                    for v in elements:
                        env[idx] = v
                        if inner(env):
                            return True
                    return False
                return ex

            def fa_(env):
                for v in elements:
                    env[idx] = v
                    if not inner(env):
                        return False
                return True
            return fa_
        raise TypeError(f"not a formula node: {node!r}")

    root = build(phi, slots)
    total = nslots[0]
    nargs = len(arg_names)

    def top(*args):
        env = list(args) + [0] * (total - nargs)
        return root(env)

    return top


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DefinableSetResult:
    points: Optional[tuple]
    count: int
    cost: int


def chunk_bounds(q: int, n_chunks: int = _N_CHUNKS) -> list[tuple[int, int]]:
    """Fixed partition of range(q); depends only on q, never on worker count."""
    n_chunks = min(q, n_chunks) or 1
    bounds = [q * i // n_chunks for i in range(n_chunks + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(n_chunks) if bounds[i] < bounds[i + 1]]


def _enum_chunk(phi, p, nu, arg_names, y, n, lo, hi, materialize):
    ctx = make_extension(p, nu)
    fn = compile_formula(phi, ctx, arg_names)
    q = ctx.q
    pts = [] if materialize else None
    cnt = 0
    if n == 1:
        for x0 in range(lo, hi):
            if fn(x0, *y):
                cnt += 1
                if materialize:
                    pts.append((x0,))
    else:
        rest = range(q)
        for x0 in range(lo, hi):
            for tail in itertools.product(rest, repeat=n - 1):
                if fn(x0, *tail, *y):
                    cnt += 1
                    if materialize:
                        pts.append((x0,) + tail)
    return cnt, pts


def _scan(phi: Formula, ctx: FieldCtx, variables, params, y, budget, workers, materialize):
    variables = tuple(variables)
    params = tuple(params)
    y = tuple(y)
    if len(y) != len(params):
        raise ValueError(f"parameter tuple {y} does not match declared params {params}")
    n = len(variables)
    est = check_budget(enumeration_cost(phi, ctx.q, n), budget)
    arg_names = variables + params
    if n == 0:
        fn = compile_formula(phi, ctx, arg_names)
        ok = bool(fn(*y))
        return ((() ,) if ok else ()) if materialize else None, (1 if ok else 0), est
    tasks = [(phi, ctx.p, ctx.nu, arg_names, y, n, lo, hi, materialize)
             for lo, hi in chunk_bounds(ctx.q)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_enum_chunk_star, tasks))
    else:
        results = [_enum_chunk(*t) for t in tasks]
    count = sum(c for c, _ in results)
    points = None
    if materialize:
        points = tuple(pt for _, chunk in results for pt in chunk)
    return points, count, est


def _enum_chunk_star(args):
    return _enum_chunk(*args)


def enumerate_set(phi: Formula, ctx: FieldCtx, variables: Sequence[str], *,
                  params: Sequence[str] = (), y: Sequence[int] = (),
                  budget: int = DEFAULT_BUDGET, workers: int = 1) -> DefinableSetResult:
    points, count, est = _scan(phi, ctx, variables, params, y, budget, workers, True)
    return DefinableSetResult(points, count, est)


def count(phi: Formula, ctx: FieldCtx, variables: Sequence[str], *,
          params: Sequence[str] = (), y: Sequence[int] = (),
          budget: int = DEFAULT_BUDGET, workers: int = 1) -> int:
    _, cnt, _ = _scan(phi, ctx, variables, params, y, budget, workers, False)
    return cnt


def count_report(phi: Formula, ctx: FieldCtx, variables: Sequence[str], *,
                 params: Sequence[str] = (), y: Sequence[int] = (),
                 budget: int = DEFAULT_BUDGET, workers: int = 1) -> DefinableSetResult:
    _, cnt, est = _scan(phi, ctx, variables, params, y, budget, workers, False)
    return DefinableSetResult(None, cnt, est)
