"""Additive and multiplicative characters of finite fields as unit complex numbers.

Conventions: e(z) = exp(2*pi*i*z); psi_a(x) = e(Tr(a*x)/p), trivial iff a = 0;
chi_m(g^k) = e(m*k/(q-1)) against the canonical generator g, trivial iff
m == 0 mod (q-1).  The nontrivial chi is extended by chi(0) = 0; the trivial
one by chi(0) = 1.

Values come from precomputed tables of the roots of unity e(k/L) for
L in {p, q-1} to avoid accumulation drift.
"""

from __future__ import annotations

import cmath
import functools
import math

from .gf import FieldCtx

__all__ = [
    "AdditiveCharacter", "MultiplicativeCharacter", "character_order",
    "legendre_index", "unit_roots",
]


_QUARTER = (1 + 0j, 1j, -1 + 0j, -1j)


@functools.lru_cache(maxsize=None)
def unit_roots(L: int) -> tuple[complex, ...]:
    """(e(0/L), e(1/L), ..., e((L-1)/L)); quarter-turn values are exact."""
    out = []
    for k in range(L):
        if (4 * k) % L == 0:
            out.append(_QUARTER[(4 * k) // L % 4])
        else:
            out.append(cmath.exp(2j * math.pi * k / L))
    return tuple(out)


class AdditiveCharacter:
    """psi_a on F_q; a is an element encoding of the twist parameter."""

    def __init__(self, ctx: FieldCtx, a: int):
        if not 0 <= a < ctx.q:
            raise ValueError(f"twist parameter {a} outside field of size {ctx.q}")
        self.ctx = ctx
        self.a = a
        self._values = None

    @property
    def is_trivial(self) -> bool:
        return self.a == 0

    def values(self) -> list[complex]:
        """Value table indexed by element encoding."""
        if self._values is None:
            ctx = self.ctx
            roots = unit_roots(ctx.p)
            tr = ctx.trace_table()
            if self.a == ctx.from_int(1):
                self._values = [roots[tr[x]] for x in ctx.elements()]
            else:
                a = self.a
                self._values = [roots[tr[ctx.mul(a, x)]] for x in ctx.elements()]
        return self._values

    def __call__(self, x: int) -> complex:
        return self.values()[x]


class MultiplicativeCharacter:
    """chi_m on F_q, indexed against the canonical generator."""

    def __init__(self, ctx: FieldCtx, m: int):
        self.ctx = ctx
        self.m = m % (ctx.q - 1) if ctx.q > 2 else 0
        self._values = None

    @property
    def is_trivial(self) -> bool:
        return self.m == 0

    @property
    def order(self) -> int:
        return (self.ctx.q - 1) // math.gcd(self.m, self.ctx.q - 1)

    def values(self) -> list[complex]:
        if self._values is None:
            ctx = self.ctx
            if self.m == 0:
                self._values = [complex(1.0)] * ctx.q
            else:
                L = ctx.q - 1
                roots = unit_roots(L)
                dl = ctx._dlog_table()
                m = self.m
                vals = [complex(0.0)] * ctx.q
                for x in range(1, ctx.q):
                    vals[x] = roots[m * dl[x] % L]
                self._values = vals
        return self._values

    def __call__(self, x: int) -> complex:
        return self.values()[x]


def character_order(chi: MultiplicativeCharacter) -> int:
    return chi.order


def legendre_index(ctx: FieldCtx) -> int:
    """Index of the quadratic character (order 2); q must be odd."""
    if ctx.q % 2 == 0:
        raise ValueError("no quadratic character in characteristic 2")
    return (ctx.q - 1) // 2
