"""Exponential sums over definable sets, companion sums over extensions, twists.

Summation skips poles of f and g (the points where a denominator vanishes),
matching the strengthened formula phi & f2(x) != 0 & g2(x) != 0; the skipped
count is reported separately.  chi(0) = 0 (nontrivial chi) still applies at
pole-free points where g vanishes.

Floating point reproducibility: every sum is accumulated over a fixed
partition of the outer enumeration axis (depending only on q) and the chunk
partials are reduced pairwise in index order, so results are bit-identical
across runs and worker counts.
"""

from __future__ import annotations

import functools
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .characters import AdditiveCharacter, MultiplicativeCharacter, legendre_index, unit_roots
from .defset import (
    DEFAULT_BUDGET, check_budget, chunk_bounds, compile_formula, compile_term,
    enumeration_cost,
)
from .gf import FieldCtx, make_extension, subfield_embedding
from .ringlang import Formula, RationalMap, Term

__all__ = ["SumSpec", "SumReport", "TwistScanReport", "sum_over", "companion_sum", "twist_scan"]


@dataclass(frozen=True)
class SumSpec:
    """A sum job: formula, phase f = f1/f2, twist g = g1/g2, character selectors.

    psi_a and chi are field-independent integers (reduced through Z -> F_q),
    so one spec can be evaluated across a whole prime scan; chi may also be
    the string "legendre".
    """

    phi: Formula
    variables: tuple[str, ...]
    params: tuple[str, ...] = ()
    f: RationalMap = RationalMap.of(Term.constant(0))
    g: RationalMap = RationalMap.of(Term.constant(1))
    psi_a: int = 1
    chi: object = 0

    def chi_key(self):
        return self.chi if self.chi == "legendre" else int(self.chi)


@dataclass(frozen=True)
class SumReport:
    value: complex
    count: int
    poles: int
    trivial_bound: int
    ratio_sqrtq: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TwistScanReport:
    exceptions: tuple
    bound: float
    count: int
    observed_D: float
    zero_twist_abs: float
    max_ok_abs: float


def _pairwise_sum(vals):
    vals = list(vals)
    if not vals:
        return 0j
    while len(vals) > 1:
        vals = [vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i]
                for i in range(0, len(vals), 2)]
    return vals[0]


@functools.lru_cache(maxsize=None)
def _char_values(p: int, nu: int, a_int: int, chi_key):
    ctx = make_extension(p, nu)
    psi = AdditiveCharacter(ctx, ctx.from_int(a_int)).values()
    m = legendre_index(ctx) if chi_key == "legendre" else int(chi_key)
    chi = MultiplicativeCharacter(ctx, m).values()
    return psi, chi, m


def _term_const(term: Term, ctx: FieldCtx):
    return ctx.from_int(term.constant_value()) if term.is_constant else None


def _sum_chunk(spec: SumSpec, p: int, nu: int, y: tuple, lo: int, hi: int):
    ctx = make_extension(p, nu)
    args = spec.variables + spec.params
    sat = compile_formula(spec.phi, ctx, args)
    f1 = compile_term(spec.f.num, ctx, args)
    f2 = compile_term(spec.f.den, ctx, args)
    g1 = compile_term(spec.g.num, ctx, args)
    g2 = compile_term(spec.g.den, ctx, args)
    f2c = _term_const(spec.f.den, ctx)
    g2c = _term_const(spec.g.den, ctx)
    psi_vals, chi_vals, _ = _char_values(p, nu, spec.psi_a, spec.chi_key())
    inv = ctx.inv_table()
    mul = ctx.mul
    one = ctx.from_int(1)

    total = 0j
    cnt = 0
    poles = 0
    n = len(spec.variables)
    tails = [()] if n == 1 else None
    for x0 in range(lo, hi):
        it = tails if tails is not None else itertools.product(range(ctx.q), repeat=n - 1)
        for tail in it:
            xt = (x0,) + tail + y
            if not sat(*xt):
                continue
            fd = f2c if f2c is not None else f2(*xt)
            gd = g2c if g2c is not None else g2(*xt)
            if fd == 0 or gd == 0:
                poles += 1
                continue
            fv = f1(*xt)
            if fd != one:
                fv = mul(fv, inv[fd])
            gv = g1(*xt)
            if gd != one:
                gv = mul(gv, inv[gd])
            total += psi_vals[fv] * chi_vals[gv]
            cnt += 1
    return total, cnt, poles


def _sum_chunk_star(a):
    return _sum_chunk(*a)


def _reduce_chunks(results, ctx, echo):
    value = _pairwise_sum([r[0] for r in results])
    cnt = sum(r[1] for r in results)
    poles = sum(r[2] for r in results)
    ratio = abs(value) * math.sqrt(ctx.q) / max(cnt, 1)
    return SumReport(value, cnt, poles, cnt, ratio, echo)


def sum_over(spec: SumSpec, ctx: FieldCtx, y: Sequence[int] = (), *,
             budget: int = DEFAULT_BUDGET, workers: int = 1) -> SumReport:
    """S(y, phi, F_q) = sum over pole-free satisfying x of psi(f(x)) chi(g(x))."""
    y = tuple(y)
    if len(y) != len(spec.params):
        raise ValueError("parameter tuple does not match declared params")
    if len(spec.variables) == 0:
        raise ValueError("sum requires at least one variable")
    check_budget(enumeration_cost(spec.phi, ctx.q, len(spec.variables)), budget)
    tasks = [(spec, ctx.p, ctx.nu, y, lo, hi) for lo, hi in chunk_bounds(ctx.q)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sum_chunk_star, tasks))
    else:
        results = [_sum_chunk(*t) for t in tasks]
    echo = {"p": ctx.p, "nu": ctx.nu, "y": y, "a": spec.psi_a, "chi": spec.chi_key()}
    return _reduce_chunks(results, ctx, echo)


# ---------------------------------------------------------------------------
# Companion sums over F_{q^nu}
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _subfield_maps(p: int, d: int, rel: int):
    base = make_extension(p, d)
    big = make_extension(p, d * rel)
    fwd, back = subfield_embedding(base, big)
    return fwd, back


def _companion_chunk(spec: SumSpec, p: int, d: int, rel: int, y: tuple, lo: int, hi: int):
    base = make_extension(p, d)
    big = make_extension(p, d * rel)
    _, back = _subfield_maps(p, d, rel)
    args = spec.variables + spec.params
    sat = compile_formula(spec.phi, big, args)
    f1 = compile_term(spec.f.num, big, args)
    f2 = compile_term(spec.f.den, big, args)
    g1 = compile_term(spec.g.num, big, args)
    g2 = compile_term(spec.g.den, big, args)
    f2c = _term_const(spec.f.den, big)
    g2c = _term_const(spec.g.den, big)
    psi_vals, chi_vals, _ = _char_values(p, d, spec.psi_a, spec.chi_key())
    inv = big.inv_table()
    mul = big.mul
    one = big.from_int(1)
    qbase = base.q
    norm_exp = (big.q - 1) // (qbase - 1)

    def rel_trace(x):
        acc = x
        t = x
        for _ in range(rel - 1):
            t = big.pow_(t, qbase)
            acc = big.add(acc, t)
        return acc

    total = 0j
    cnt = 0
    poles = 0
    n = len(spec.variables)
    tails = [()] if n == 1 else None
    for x0 in range(lo, hi):
        it = tails if tails is not None else itertools.product(range(big.q), repeat=n - 1)
        for tail in it:
            xt = (x0,) + tail + y
            if not sat(*xt):
                continue
            fd = f2c if f2c is not None else f2(*xt)
            gd = g2c if g2c is not None else g2(*xt)
            if fd == 0 or gd == 0:
                poles += 1
                continue
            fv = f1(*xt)
            if fd != one:
                fv = mul(fv, inv[fd])
            gv = g1(*xt)
            if gd != one:
                gv = mul(gv, inv[gd])
            t = back[rel_trace(fv)]
            nm = back[big.pow_(gv, norm_exp)] if gv else 0
            total += psi_vals[t] * chi_vals[nm]
            cnt += 1
    return total, cnt, poles


def _companion_chunk_star(a):
    return _companion_chunk(*a)


def companion_sum(spec: SumSpec, ctx: FieldCtx, nu: int, y: Sequence[int] = (), *,
                  budget: int = DEFAULT_BUDGET, workers: int = 1) -> SumReport:
    """Same sum over F_{q^nu}, with f composed with the relative trace and g
    with the relative norm before applying the base-field characters."""
    if nu < 1:
        raise ValueError("companion degree must be >= 1")
    y = tuple(y)
    if len(y) != len(spec.params):
        raise ValueError("parameter tuple does not match declared params")
    big = make_extension(ctx.p, ctx.nu * nu)
    check_budget(enumeration_cost(spec.phi, big.q, len(spec.variables)), budget)
    tasks = [(spec, ctx.p, ctx.nu, nu, y, lo, hi) for lo, hi in chunk_bounds(big.q)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_companion_chunk_star, tasks))
    else:
        results = [_companion_chunk(*t) for t in tasks]
    echo = {"p": ctx.p, "nu": ctx.nu, "companion_nu": nu, "y": y,
            "a": spec.psi_a, "chi": spec.chi_key()}
    return _reduce_chunks(results, big, echo)


# ---------------------------------------------------------------------------
# Twist scan
# ---------------------------------------------------------------------------

def _twist_chunk(points, weights, p, n, lo, hi, bound):
    roots = unit_roots(p)
    exceptions = []
    max_ok = 0.0
    zero_abs = None
    for h0 in range(lo, hi):
        for hrest in itertools.product(range(p), repeat=n - 1):
            h = (h0,) + hrest
            parts = []
            for x, w in zip(points, weights):
                phase = 0
                for hi_, xi in zip(h, x):
                    phase += hi_ * xi
                parts.append(w * roots[phase % p])
            s = _pairwise_sum(parts)
            m = abs(s)
            if all(c == 0 for c in h):
                zero_abs = m
            if m > bound:
                exceptions.append(h)
            elif m > max_ok:
                max_ok = m
    return exceptions, max_ok, zero_abs


def _twist_chunk_star(a):
    return _twist_chunk(*a)


def twist_scan(spec: SumSpec, ctx: FieldCtx, *, threshold: float = 3.0,
               budget: int = DEFAULT_BUDGET, workers: int = 1) -> TwistScanReport:
    """Scan all additive twists h: phase f + h.x, with psi(x) = e(Tr x / p).

    Returns the h whose |S_h| exceeds threshold * (1 + count / sqrt(p)), for
    comparison with the expected O(p^(n-1)) exception count.
    """
    if ctx.nu != 1:
        raise ValueError("twist scan runs over prime fields")
    if spec.params:
        raise ValueError("twist scan requires a formula without parameters")
    p = ctx.p
    n = len(spec.variables)
    est = enumeration_cost(spec.phi, p, n) + p ** (2 * n)
    check_budget(est, budget)

    args = spec.variables
    sat = compile_formula(spec.phi, ctx, args)
    f1 = compile_term(spec.f.num, ctx, args)
    f2 = compile_term(spec.f.den, ctx, args)
    g1 = compile_term(spec.g.num, ctx, args)
    g2 = compile_term(spec.g.den, ctx, args)
    psi_vals, chi_vals, _ = _char_values(p, 1, 1, spec.chi_key())
    inv = ctx.inv_table()
    one = 1 % p

    points = []
    weights = []
    for x in itertools.product(range(p), repeat=n):
        if not sat(*x):
            continue
        fd, gd = f2(*x), g2(*x)
        if fd == 0 or gd == 0:
            continue
        fv = f1(*x)
        if fd != one:
            fv = fv * inv[fd] % p
        gv = g1(*x)
        if gd != one:
            gv = gv * inv[gd] % p
        points.append(x)
        weights.append(psi_vals[fv] * chi_vals[gv])

    count = len(points)
    bound = threshold * (1.0 + count / math.sqrt(p))
    tasks = [(points, weights, p, n, lo, hi, bound) for lo, hi in chunk_bounds(p)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_twist_chunk_star, tasks))
    else:
        results = [_twist_chunk(*t) for t in tasks]
    exceptions = tuple(h for exc, _, _ in results for h in exc)
    max_ok = max((m for _, m, _ in results), default=0.0)
    zero_abs = next((z for _, _, z in results if z is not None), 0.0)
    observed_D = len(exceptions) / p ** (n - 1)
    return TwistScanReport(exceptions, bound, count, observed_D, zero_abs, max_ok)
