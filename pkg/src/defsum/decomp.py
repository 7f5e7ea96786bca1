"""Fiber multiplicities, distinct-tuple fiber powers and the inclusion-exclusion
collapse of sums over existential blocks, verified against direct enumeration.

An existential block is a conjunction of equations f_i(x, y) = 0 together with
witness constraints h_j(x, y, z_j) = 0, one witness variable per constraint
(cross-coupled witness variables are rejected: each h_j may mention only x, y
and its own z_j, so fibers factor as a product of per-witness root counts).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .defset import DEFAULT_BUDGET, check_budget, compile_formula, compile_term
from .gf import FieldCtx
from .ringlang import And, Atom, Exists, Formula, Term

__all__ = [
    "ExistentialBlock", "FiberData", "ReductionReport", "falling_factorial",
    "inclusion_exclusion_total", "forward_triangular", "fiber_multiplicities",
    "fiber_power_sum", "verify_reduction",
]


def falling_factorial(i: int, j: int) -> int:
    """(i)_j = i (i-1) ... (i-j+1); exact, (i)_0 = 1."""
    if not 0 <= j <= i:
        raise ValueError(f"need 0 <= j <= i, got ({i}, {j})")
    out = 1
    for k in range(j):
        out *= i - k
    return out


def inclusion_exclusion_total(ys: Sequence[Fraction]) -> Fraction:
    """sum_j (-1)^(j+1) y_j / j! in exact rational arithmetic."""
    if not ys:
        raise ValueError("need e >= 1 values")
    total = Fraction(0)
    for j, yj in enumerate(ys, start=1):
        total += Fraction((-1) ** (j + 1), math.factorial(j)) * Fraction(yj)
    return total


def forward_triangular(xs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """y_j = sum_{i=j}^{e} (i)_j x_i for j = 1..e; the exact triangular system."""
    e = len(xs)
    ys = []
    for j in range(1, e + 1):
        ys.append(sum((Fraction(falling_factorial(i, j)) * Fraction(xs[i - 1])
                       for i in range(j, e + 1)), Fraction(0)))
    return tuple(ys)


@dataclass(frozen=True)
class ExistentialBlock:
    variables: tuple[str, ...]
    params: tuple[str, ...]
    equations: tuple[Term, ...]
    witnesses: tuple[tuple[Term, str], ...]  # (h_j, z_j)

    def __post_init__(self):
        names = set(self.variables) | set(self.params)
        zs = [z for _, z in self.witnesses]
        if len(set(zs)) != len(zs):
            raise ValueError("witness variables must be distinct")
        if set(zs) & names:
            raise ValueError("witness variables must be fresh")
        for eq in self.equations:
            extra = set(eq.used_vars()) - names
            if extra:
                raise ValueError(f"equation uses undeclared variables {sorted(extra)}")
        for h, z in self.witnesses:
            extra = set(h.used_vars()) - names - {z}
            if extra:
                raise ValueError(
                    f"witness constraint for {z} is cross-coupled (uses {sorted(extra)})")

    @property
    def k(self) -> int:
        return len(self.witnesses)

    def to_formula(self) -> Formula:
        """The block as a first-order formula (equations and an exists-prefix)."""
        eqs: list[Formula] = [Atom(t, Term.constant(0)) for t in self.equations]
        if self.witnesses:
            hs: list[Formula] = [Atom(h, Term.constant(0)) for h, _ in self.witnesses]
            body: Formula = And(tuple(hs)) if len(hs) > 1 else hs[0]
            for _, z in reversed(self.witnesses):
                body = Exists(z, body)
            eqs.append(body)
        if not eqs:
            eqs.append(Atom(Term.constant(0), Term.constant(0)))
        return And(tuple(eqs)) if len(eqs) > 1 else eqs[0]


@dataclass(frozen=True)
class FiberData:
    e: int
    fibers: dict  # x-tuple -> witness count (>= 1 entries only)


@dataclass(frozen=True)
class ReductionReport:
    equal: bool
    lhs: object
    rhs: object
    e: int


def _block_cost(block: ExistentialBlock, q: int) -> int:
    n = len(block.variables)
    return q ** n * (max(block.k, 1) * q + len(block.equations) + 1)


def fiber_multiplicities(block: ExistentialBlock, ctx: FieldCtx,
                         y: Sequence[int] = (), *,
                         budget: int = DEFAULT_BUDGET) -> FiberData:
    """Witness counts per x satisfying the equations; e is the max observed.

    Since each h_j constrains only its own z_j, the fiber over x is the product
    of the per-constraint root sets; its size is the product of root counts.
    """
    y = tuple(y)
    if len(y) != len(block.params):
        raise ValueError("parameter tuple does not match block params")
    check_budget(_block_cost(block, ctx.q), budget)
    args = block.variables + block.params
    n = len(block.variables)
    eq_fns = [compile_term(t, ctx, args) for t in block.equations]
    wit_fns = [(compile_term(h, ctx, args + (z,)), z) for h, z in block.witnesses]
    q = ctx.q
    fibers: dict = {}
    e = 0
    for x in itertools.product(range(q), repeat=n):
        xt = x + y
        if any(f(*xt) != 0 for f in eq_fns):
            continue
        m = 1
        for hf, _ in wit_fns:
            roots = 0
            for z in range(q):
                if hf(*xt, z) == 0:
                    roots += 1
            m *= roots
            if m == 0:
                break
        if m >= 1:
            fibers[x] = m
            if m > e:
                e = m
    return FiberData(e, fibers)


def fiber_power_sum(block: ExistentialBlock, ctx: FieldCtx, y: Sequence[int],
                    beta: Optional[Callable], j: int, *,
                    budget: int = DEFAULT_BUDGET,
                    fibers: Optional[FiberData] = None):
    """Sum of beta(x) over ordered j-tuples of distinct witness tuples above x.

    Computed fiber-wise as sum_x (m_x)_j beta(x); beta None means the exact
    counting weight 1.
    """
    if j < 1:
        raise ValueError("fiber power index must be >= 1")
    data = fibers if fibers is not None else fiber_multiplicities(block, ctx, y, budget=budget)
    if beta is None:
        return sum(falling_factorial(m, j) if m >= j else 0
                   for m in data.fibers.values())
    total = 0j
    for x, m in sorted(data.fibers.items()):
        if m >= j:
            total += falling_factorial(m, j) * beta(x)
    return total


def fiber_power_sum_literal(block: ExistentialBlock, ctx: FieldCtx, y: Sequence[int],
                            beta: Optional[Callable], j: int, *,
                            budget: int = DEFAULT_BUDGET):
    """Same sum by literal enumeration of ordered distinct witness tuples.

    Independent oracle for fiber_power_sum; cost grows like |fiber|^j, use on
    small instances only.
    """
    y = tuple(y)
    check_budget(_block_cost(block, ctx.q) * ctx.q ** (j - 1), budget)
    args = block.variables + block.params
    n = len(block.variables)
    eq_fns = [compile_term(t, ctx, args) for t in block.equations]
    wit_fns = [(compile_term(h, ctx, args + (z,)), z) for h, z in block.witnesses]
    q = ctx.q
    total = 0 if beta is None else 0j
    for x in itertools.product(range(q), repeat=n):
        xt = x + y
        if any(f(*xt) != 0 for f in eq_fns):
            continue
        per_witness_roots = []
        for hf, _ in wit_fns:
            per_witness_roots.append([z for z in range(q) if hf(*xt, z) == 0])
        fiber = list(itertools.product(*per_witness_roots)) if wit_fns else [()]
        if not fiber:
            continue
        weight = 1 if beta is None else beta(x)
        for combo in itertools.permutations(fiber, j):
            total += weight
    return total


def verify_reduction(block: ExistentialBlock, ctx: FieldCtx,
                     y: Sequence[int] = (), beta: Optional[Callable] = None, *,
                     budget: int = DEFAULT_BUDGET) -> ReductionReport:
    """Check the collapse identity: the direct sum of beta over the block's
    definable set equals sum_i (-1)^(i+1)/i! times the i-th fiber power sum.

    The left side is evaluated through the generic quantifier-search path on
    the block's formula; the right side through fiber counting.  Exact when
    beta is None (counting); complex beta compared at 1e-9 relative tolerance.
    """
    from . import defset  # local import to keep module load cheap

    y = tuple(y)
    phi = block.to_formula()
    res = defset.enumerate_set(phi, ctx, block.variables, params=block.params,
                               y=y, budget=budget)
    data = fiber_multiplicities(block, ctx, y, budget=budget)
    if beta is None:
        lhs = res.count
        rhs = Fraction(0)
        for i in range(1, data.e + 1):
            rhs += Fraction((-1) ** (i + 1), math.factorial(i)) * \
                fiber_power_sum(block, ctx, y, None, i, fibers=data)
        equal = Fraction(lhs) == rhs
        return ReductionReport(equal, lhs, rhs, data.e)
    lhs = sum(beta(x) for x in res.points)
    rhs = 0j
    for i in range(1, data.e + 1):
        rhs += ((-1) ** (i + 1) / math.factorial(i)) * \
            fiber_power_sum(block, ctx, y, beta, i, fibers=data)
    equal = abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))
    return ReductionReport(equal, lhs, rhs, data.e)
