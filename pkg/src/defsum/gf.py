"""Arithmetic for F_p and F_{p^nu}: construction, enumeration, trace, norm, dlog.

Elements are plain ints in [0, q) encoding coefficient vectors in the power
basis of the modulus, little-endian base p (for nu=1 the int is the residue
itself).  This keeps tuples of points hashable and enumeration equal to
range(q).

Modulus and generator selection is deterministic (lex-smallest modulus,
smallest generator in enumeration order) so character values and every
reported sum are reproducible bit-for-bit across runs.
"""

from __future__ import annotations

import functools
import math

DEFAULT_FIELD_BUDGET = 1 << 24  # largest q a context may be built for (dlog table size)
TABLE_MAX = 1024                # largest q for which flat mul/add tables are built

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 2^32 (bases 2, 7, 61)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 7, 61):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _factor(n: int) -> list[int]:
    """Distinct prime factors by trial division (n <= 2^24 here)."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# Polynomial helpers over F_p (coefficient tuples, little-endian, no class)
# ---------------------------------------------------------------------------

def _ptrim(a):
    i = len(a)
    while i > 0 and a[i - 1] == 0:
        i -= 1
    return a[:i]


def _pmulmod(a, b, f, p):
    """a*b mod f over F_p; f monic, little-endian with leading 1."""
    n = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, n - 1, -1):
        top = prod[k]
        if top:
            prod[k] = 0
            for i in range(n):
                prod[k - n + i] = (prod[k - n + i] - top * f[i]) % p
    return _ptrim(tuple(prod))


def _ppowmod(a, e, f, p):
    r = (1,)
    base = a
    while e:
        if e & 1:
            r = _pmulmod(r, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return r


def _pmod(a, b, p):
    """a mod b over F_p, b nonzero."""
    a = list(_ptrim(a))
    b = _ptrim(b)
    db = len(b) - 1
    inv_lead = pow(b[-1], p - 2, p)
    while a and len(a) - 1 >= db:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - db
        for i in range(db + 1):
            a[shift + i] = (a[shift + i] - c * b[i]) % p
        a = list(_ptrim(tuple(a)))
    return _ptrim(tuple(a))


def _pgcd(a, b, p):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _peval(poly, x, p):
    acc = 0
    for c in reversed(poly):
        acc = (acc * x + c) % p
    return acc


def _is_irreducible(f, p):
    """f monic little-endian with leading 1, degree >= 2.

    Degree 2-3: root search.  Degree 4: root search plus trial division by
    the monic irreducible quadratics.  Degree >= 5: order checks (Rabin).
    """
    n = len(f) - 1
    if n in (2, 3):
        return all(_peval(f, x, p) != 0 for x in range(p))
    if n == 4:
        if any(_peval(f, x, p) == 0 for x in range(p)):
            return False
        for b in range(p):
            for c in range(p):
                quad = (c, b, 1)
                if any(_peval(quad, x, p) == 0 for x in range(p)):
                    continue
                if not _pmod(f, quad, p):
                    return False
        return True
    x = (0, 1)
    if _ppowmod(x, p ** n, f, p) != x:
        return False
    for r in _factor(n):
        xpr = _ppowmod(x, p ** (n // r), f, p)
        d = list(xpr) + [0] * max(0, 2 - len(xpr))
        d[1] = (d[1] - 1) % p
        g = _pgcd(_ptrim(tuple(d)), f, p)
        if len(g) - 1 >= 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Field context
# ---------------------------------------------------------------------------

class FieldCtx:
    """Immutable field F_{p^nu}; lazy internal tables, safe for concurrent reads."""

    def __init__(self, p: int, nu: int, modulus: tuple[int, ...], generator: int):
        self.p = p
        self.nu = nu
        self.q = p ** nu
        self.modulus = modulus  # little-endian incl leading 1; () for nu == 1
        self.generator = generator
        self._dlog = None
        self._gpow = None
        self._mul_table = None
        self._add_table = None
        self._inv_table = None
        self._trace_table = None
        self._frob_basis = None  # decoded images of basis under x -> x^p

    def __reduce__(self):
        return (make_extension, (self.p, self.nu))

    def __repr__(self):
        if self.nu == 1:
            return f"FieldCtx(F_{self.p})"
        return f"FieldCtx(F_{self.p}^{self.nu}, modulus={self.modulus})"

    # -- encoding ----------------------------------------------------------

    def decode(self, x: int) -> tuple[int, ...]:
        if self.nu == 1:
            return (x,)
        p = self.p
        out = []
        for _ in range(self.nu):
            x, r = divmod(x, p)
            out.append(r)
        return tuple(out)

    def encode(self, digits) -> int:
        acc = 0
        for d in reversed(tuple(digits)):
            acc = acc * self.p + (d % self.p)
        return acc

    def from_int(self, c: int) -> int:
        """Canonical map Z -> F_q (image of the integer c)."""
        return c % self.p

    def element_str(self, x: int) -> str:
        if self.nu == 1:
            return str(x)
        digits = self.decode(x)
        parts = []
        for i, d in enumerate(digits):
            if d == 0:
                continue
            if i == 0:
                parts.append(str(d))
            else:
                base = "T" if i == 1 else f"T^{i}"
                parts.append(base if d == 1 else f"{d}*{base}")
        return "+".join(parts) if parts else "0"

    # -- arithmetic ----------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.nu == 1:
            return (a + b) % self.p
        t = self._add_t()
        if t is not None:
            return t[a * self.q + b]
        da, db = self.decode(a), self.decode(b)
        return self.encode((x + y) % self.p for x, y in zip(da, db))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def neg(self, a: int) -> int:
        if self.nu == 1:
            return (-a) % self.p
        return self.encode((-d) % self.p for d in self.decode(a))

    def mul(self, a: int, b: int) -> int:
        if self.nu == 1:
            return a * b % self.p
        t = self._mul_t()
        if t is not None:
            return t[a * self.q + b]
        return self.encode(_pmulmod(self.decode(a), self.decode(b), self.modulus, self.p) + (0,) * self.nu)

    def pow_(self, a: int, e: int) -> int:
        if e < 0:
            raise FieldError("negative exponent")
        if self.nu == 1:
            return pow(a, e, self.p)
        r = self.from_int(1)
        base = a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("division by zero in field")
        if self.nu == 1:
            return pow(a, self.p - 2, self.p)
        return self.pow_(a, self.q - 2)

    def scalar_mul(self, c: int, a: int) -> int:
        c %= self.p
        if self.nu == 1:
            return c * a % self.p
        return self.encode(c * d % self.p for d in self.decode(a))

    # -- structure maps ------------------------------------------------------

    def _frobenius_basis(self):
        if self._frob_basis is None:
            imgs = []
            for i in range(self.nu):
                e = self.encode((0,) * i + (1,))
                imgs.append(self.decode(self.pow_(e, self.p)))
            self._frob_basis = tuple(imgs)
        return self._frob_basis

    def frobenius(self, x: int) -> int:
        if self.nu == 1:
            return x
        digits = self.decode(x)
        basis = self._frobenius_basis()
        p = self.p
        out = [0] * self.nu
        for c, img in zip(digits, basis):
            if c:
                for j in range(self.nu):
                    out[j] = (out[j] + c * img[j]) % p
        return self.encode(out)

    def trace(self, x: int) -> int:
        """Trace down to the prime subfield, as an integer in [0, p)."""
        if self.nu == 1:
            return x
        acc = x
        t = x
        for _ in range(self.nu - 1):
            t = self.frobenius(t)
            acc = self.add(acc, t)
        digits = self.decode(acc)
        if any(digits[1:]):
            raise FieldError("trace escaped the prime subfield")
        return digits[0]

    def norm(self, x: int) -> int:
        """Norm down to the prime subfield, as an integer in [0, p); N(0)=0."""
        if self.nu == 1:
            return x
        if x == 0:
            return 0
        acc = x
        t = x
        for _ in range(self.nu - 1):
            t = self.frobenius(t)
            acc = self.mul(acc, t)
        digits = self.decode(acc)
        if any(digits[1:]):
            raise FieldError("norm escaped the prime subfield")
        return digits[0]

    def elements(self):
        """All q elements, zero first, in stable coefficient-lex order."""
        return range(self.q)

    # -- discrete log ----------------------------------------------------------

    def _dlog_table(self):
        if self._dlog is None:
            if self.q > DEFAULT_FIELD_BUDGET:
                raise FieldError(f"dlog table budget exceeded for q={self.q}")
            table = [0] * self.q
            gpow = [0] * (self.q - 1)
            cur = self.from_int(1)
            for k in range(self.q - 1):
                table[cur] = k
                gpow[k] = cur
                cur = self.mul(cur, self.generator)
            self._dlog = table
            self._gpow = gpow
        return self._dlog

    def dlog(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("dlog of zero")
        return self._dlog_table()[x]

    def gen_pow(self, k: int) -> int:
        self._dlog_table()
        return self._gpow[k % (self.q - 1)]

    # -- lazy tables -------------------------------------------------------------

    def _mul_t(self):
        if self.q > TABLE_MAX or self.nu == 1:
            return None
        if self._mul_table is None:
            q, f, p = self.q, self.modulus, self.p
            dec = [self.decode(i) for i in range(q)]
            tab = [0] * (q * q)
            for a in range(q):
                da = dec[a]
                row = a * q
                for b in range(a, q):
                    v = self.encode(_pmulmod(da, dec[b], f, p) + (0,) * self.nu)
                    tab[row + b] = v
                    tab[b * q + a] = v
            self._mul_table = tab
        return self._mul_table

    def _add_t(self):
        if self.q > TABLE_MAX or self.nu == 1:
            return None
        if self._add_table is None:
            q, p = self.q, self.p
            dec = [self.decode(i) for i in range(q)]
            tab = [0] * (q * q)
            for a in range(q):
                da = dec[a]
                row = a * q
                for b in range(q):
                    tab[row + b] = self.encode((x + y) % p for x, y in zip(da, dec[b]))
            self._add_table = tab
        return self._add_table

    def inv_table(self):
        if self._inv_table is None:
            tab = [0] * self.q
            for a in range(1, self.q):
                tab[a] = self.inv(a)
            self._inv_table = tab
        return self._inv_table

    def trace_table(self):
        if self._trace_table is None:
            if self.nu == 1:
                self._trace_table = list(range(self.p))
            else:
                self._trace_table = [self.trace(x) for x in range(self.q)]
        return self._trace_table


def _find_modulus(p: int, nu: int) -> tuple[int, ...]:
    # lex-smallest (compared low-degree-first) monic irreducible of degree nu
    for k in range(p ** nu):
        digits = []
        t = k
        for _ in range(nu):
            t, r = divmod(t, p)
            digits.append(r)
        cand = tuple(digits) + (1,)
        if _is_irreducible(cand, p):
            return cand
    raise FieldError(f"no irreducible modulus found for p={p}, nu={nu}")  # unreachable


def _find_generator(ctx: FieldCtx) -> int:
    q = ctx.q
    if q == 2:
        return 1
    factors = _factor(q - 1)
    for cand in range(2, q):
        if all(ctx.pow_(cand, (q - 1) // r) != ctx.from_int(1) for r in factors):
            return cand
    raise FieldError("no generator found")  # unreachable for a true field


@functools.lru_cache(maxsize=None)
def make_extension(p: int, nu: int = 1, budget: int = DEFAULT_FIELD_BUDGET) -> FieldCtx:
    """Build F_{p^nu} with deterministic modulus and generator."""
    if not isinstance(p, int) or p < 2 or p >= 1 << 32 or not is_prime(p):
        raise FieldError(f"p={p} is not a prime below 2^32")
    if not 1 <= nu <= 12:
        raise FieldError(f"extension degree {nu} out of range [1, 12]")
    q = p ** nu
    if q > budget:
        raise FieldError(f"q={q} exceeds field budget {budget}")
    modulus = () if nu == 1 else _find_modulus(p, nu)
    ctx = FieldCtx(p, nu, modulus, 0)
    ctx.generator = _find_generator(ctx)
    return ctx


def subfield_embedding(base: FieldCtx, big: FieldCtx) -> tuple[list[int], dict[int, int]]:
    """Embed base = F_q into big = F_{q^t} (same p, base.nu | big.nu).

    Returns (forward, backward): forward[b] is the image in big of base element
    b; backward maps every image back.  The embedding sends the base power
    basis to powers of the lex-smallest root of the base modulus in big.
    """
    if base.p != big.p or big.nu % base.nu != 0:
        raise FieldError("not a subfield pair")
    if base.nu == 1:
        fwd = [big.from_int(c) for c in range(base.p)]
        return fwd, {v: c for c, v in enumerate(fwd)}
    if (base.p, base.nu) == (big.p, big.nu):
        fwd = list(range(base.q))
        return fwd, {v: v for v in fwd}
    root = None
    mod = base.modulus
    for x in big.elements():
        acc = big.from_int(0)
        for c in reversed(mod):
            acc = big.add(big.mul(acc, x), big.from_int(c))
        if acc == 0:
            root = x
            break
    if root is None:
        raise FieldError("base modulus has no root in the extension")
    powers = [big.from_int(1)]
    for _ in range(base.nu - 1):
        powers.append(big.mul(powers[-1], root))
    fwd = [0] * base.q
    for b in range(base.q):
        digits = base.decode(b)
        acc = big.from_int(0)
        for c, pw in zip(digits, powers):
            acc = big.add(acc, big.scalar_mul(c, pw))
        fwd[b] = acc
    back = {v: b for b, v in enumerate(fwd)}
    if len(back) != base.q:
        raise FieldError("embedding is not injective")
    return fwd, back
