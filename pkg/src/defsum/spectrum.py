"""Exact minimal recurrences of companion sequences, root weights, zeta series,
and density fitting across primes.

Counting sequences are handled in exact rational arithmetic (Berlekamp-Massey
over Q); character-sum sequences get a least-squares Hankel fit and are
flagged "numeric" - no exactness is claimed for those.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .defset import DEFAULT_BUDGET, count as defset_count
from .gf import make_extension
from .ringlang import Formula, Term

__all__ = [
    "CompanionSequence", "Recurrence", "WeilSpectrum", "ZetaFunction",
    "DensityEstimate", "RecurrenceError", "min_recurrence", "predict_next",
    "classify_weights", "zeta_series", "density_fit", "plane_curve_counts",
]


class RecurrenceError(ValueError):
    pass


@dataclass(frozen=True)
class CompanionSequence:
    q: int
    values: tuple
    kind: str = "exact"  # "exact" integer counts | "numeric" complex sums


@dataclass(frozen=True)
class Recurrence:
    order: int
    char_poly: tuple  # monic, descending: (1, c1, ..., cL); S_n = -(c1 S_{n-1} + ... + cL S_{n-L})
    kind: str = "exact"

    def step(self, window: Sequence) -> object:
        """Next value from the last `order` values (most recent last)."""
        if len(window) < self.order:
            raise RecurrenceError("window shorter than recurrence order")
        acc = 0
        for i in range(1, self.order + 1):
            acc -= self.char_poly[i] * window[len(window) - i]
        return acc

    def annihilates(self, values: Sequence) -> bool:
        L = self.order
        for n in range(L, len(values)):
            acc = values[n]
            for i in range(1, L + 1):
                acc += self.char_poly[i] * values[n - i]
            if self.kind == "exact":
                if acc != 0:
                    return False
            elif abs(acc) > 1e-6 * (1 + max(abs(v) for v in values)):
                return False
        return True


def _berlekamp_massey(seq: list[Fraction]) -> tuple[list[Fraction], int]:
    C = [Fraction(1)]
    B = [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for n in range(len(seq)):
        d = seq[n]
        for i in range(1, L + 1):
            d += C[i] * seq[n - i]
        if d == 0:
            m += 1
            continue
        coef = d / b
        if 2 * L <= n:
            T = list(C)
            while len(C) < len(B) + m:
                C.append(Fraction(0))
            for i in range(len(B)):
                C[i + m] -= coef * B[i]
            L = n + 1 - L
            B, b, m = T, d, 1
        else:
            while len(C) < len(B) + m:
                C.append(Fraction(0))
            for i in range(len(B)):
                C[i + m] -= coef * B[i]
            m += 1
    return C[:L + 1] + [Fraction(0)] * (L + 1 - len(C)), L


def min_recurrence(seq: CompanionSequence) -> Recurrence:
    """Minimal linear recurrence annihilating the sequence.

    Exact sequences must supply N >= 2L terms or the fit is refused; the
    returned recurrence is re-verified by annihilation over all terms.
    """
    values = seq.values
    if seq.kind == "exact":
        fr = [Fraction(v) for v in values]
        C, L = _berlekamp_massey(fr)
        if 2 * L > len(values):
            raise RecurrenceError(
                f"no recurrence of order <= N/2 fits ({L} > {len(values)}/2); supply more terms")
        rec = Recurrence(L, tuple(C), "exact")
        if not rec.annihilates(fr):
            raise RecurrenceError("recovered recurrence fails annihilation")
        return rec
    # numeric Hankel fit
    vals = np.asarray(values, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(vals))))
    N = len(vals)
    for L in range(0, N // 2 + 1):
        if L == 0:
            if np.allclose(vals, 0, atol=1e-9 * scale):
                return Recurrence(0, (1.0,), "numeric")
            continue
        rows = N - L
        A = np.array([[vals[n - i] for i in range(1, L + 1)] for n in range(L, N)])
        rhs = np.array([vals[n] for n in range(L, N)])
        coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        resid = A @ coef - rhs
        if rows >= L and np.max(np.abs(resid)) <= 1e-8 * scale:
            char = (1.0,) + tuple(-complex(c) for c in coef)
            return Recurrence(L, char, "numeric")
    raise RecurrenceError("no numeric recurrence of order <= N/2 within tolerance")


def predict_next(seq_values: Sequence, rec: Recurrence):
    """Recurrence-predicted next value after the supplied prefix."""
    out = rec.step(list(seq_values))
    if rec.kind == "exact" and isinstance(out, Fraction) and out.denominator == 1:
        return int(out)
    return out


# ---------------------------------------------------------------------------
# Weil weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeilSpectrum:
    roots: tuple            # ((complex value, multiplicity), ...)
    weights: tuple          # per root: int weight or None if unclassifiable
    signs: tuple            # per root: +1 when forced real-positive q^{w/2}, else None
    max_weight: Optional[int]
    residual: float


def _polish_root(coeffs: list[complex], r: complex) -> complex:
    # a few Newton steps on the monic polynomial
    for _ in range(40):
        f = 0j
        df = 0j
        for c in coeffs:
            df = df * r + f
            f = f * r + c
        if df == 0:
            break
        step = f / df
        r -= step
        if abs(step) < 1e-14 * max(1.0, abs(r)):
            break
    return r


def classify_weights(rec: Recurrence, q: int, *, weight_tol: float = 0.05) -> WeilSpectrum:
    """Numeric roots of the characteristic polynomial, each assigned the integer
    weight w minimizing |2 log_q |root| - w|; flagged None past weight_tol."""
    if rec.order == 0:
        return WeilSpectrum((), (), (), None, 0.0)
    coeffs = [complex(c) for c in rec.char_poly]
    raw = np.roots(np.array(coeffs, dtype=complex))
    polished = [_polish_root(coeffs, complex(r)) for r in raw]
    residual = 0.0
    for r in polished:
        f = 0j
        for c in coeffs:
            f = f * r + c
        residual = max(residual, abs(f))
    # cluster equal roots
    clusters: list[list[complex]] = []
    for r in sorted(polished, key=lambda z: (round(z.real, 9), round(z.imag, 9))):
        for cl in clusters:
            if abs(cl[0] - r) <= 1e-7 * max(1.0, abs(cl[0])):
                cl.append(r)
                break
        else:
            clusters.append([r])
    roots = []
    weights = []
    signs = []
    for cl in clusters:
        val = sum(cl) / len(cl)
        roots.append((val, len(cl)))
        if abs(val) == 0:
            weights.append(None)
            signs.append(None)
            continue
        wf = 2 * math.log(abs(val)) / math.log(q)
        w = round(wf)
        if abs(wf - w) > weight_tol or w < 0:
            weights.append(None)
            signs.append(None)
            continue
        weights.append(w)
        target = q ** (w / 2)
        if abs(val.imag) <= 1e-7 * target and abs(val.real - target) <= 1e-6 * target:
            signs.append(1)
        else:
            signs.append(None)
    max_w = max((w for w in weights if w is not None), default=None)
    return WeilSpectrum(tuple(roots), tuple(weights), tuple(signs), max_w, residual)


# ---------------------------------------------------------------------------
# Zeta generating function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZetaFunction:
    num: tuple  # ascending Fraction coefficients, num[0] == den[0]
    den: tuple

    def integer_coeffs(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        lcm = 1
        for c in self.num + self.den:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        num = tuple(int(c * lcm) for c in self.num)
        den = tuple(int(c * lcm) for c in self.den)
        g = 0
        for c in num + den:
            g = math.gcd(g, c)
        if g > 1:
            num = tuple(c // g for c in num)
            den = tuple(c // g for c in den)
        if den[0] < 0:
            num = tuple(-c for c in num)
            den = tuple(-c for c in den)
        return num, den


def _series_exp(a: list[Fraction], N: int) -> list[Fraction]:
    """exp of a power series with a[0] = 0, to order N (inclusive)."""
    z = [Fraction(0)] * (N + 1)
    z[0] = Fraction(1)
    for n in range(1, N + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            acc += k * a[k] * z[n - k]
        z[n] = acc / n
    return z


def _series_log(r: list[Fraction], N: int) -> list[Fraction]:
    """log of a power series with r[0] = 1, to order N (constant term 0)."""
    out = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        acc = n * (r[n] if n < len(r) else Fraction(0))
        for k in range(1, n):
            acc -= k * out[k] * (r[n - k] if n - k < len(r) else Fraction(0))
        out[n] = acc / n
    return out


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> Optional[list[Fraction]]:
    """Solve A x = b over Q; None if inconsistent or underdetermined."""
    rows = [row[:] + [b[i]] for i, row in enumerate(A)]
    ncols = len(A[0]) if A else 0
    rank = 0
    pivots = []
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][col]
        rows[rank] = [c / pv for c in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [c - f * d for c, d in zip(rows[r], rows[rank])]
        pivots.append(col)
        rank += 1
    for r in range(rank, len(rows)):
        if rows[r][-1] != 0:
            return None  # inconsistent
    if rank < ncols:
        return None  # underdetermined; caller wants a forced solution
    x = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        x[col] = rows[i][-1]
    return x


def zeta_series(seq: CompanionSequence, rec: Recurrence) -> ZetaFunction:
    """The rational function Z with log Z(T) = sum S_nu T^nu / nu, found as the
    minimal-degree Pade form of the exact exp series and re-verified by exact
    log expansion."""
    if seq.kind != "exact":
        raise RecurrenceError("zeta series requires an exact counting sequence")
    if not rec.annihilates([Fraction(v) for v in seq.values]):
        raise RecurrenceError("recurrence does not annihilate the sequence")
    N = len(seq.values)
    a = [Fraction(0)] + [Fraction(v, k) for k, v in enumerate(seq.values, start=1)]
    z = _series_exp(a, N)
    for total in range(0, N):
        for dq in range(0, total + 1):
            dp = total - dq
            if N - dp < dq:  # not enough equations to pin the denominator
                continue
            if dq == 0:
                qs = [Fraction(1)]
            else:
                A = [[z[k - i] if k - i >= 0 else Fraction(0) for i in range(1, dq + 1)]
                     for k in range(dp + 1, N + 1)]
                b = [-z[k] for k in range(dp + 1, N + 1)]
                sol = _solve_exact(A, b)
                if sol is None:
                    continue
                qs = [Fraction(1)] + sol
            ps = []
            for k in range(dp + 1):
                acc = Fraction(0)
                for i in range(len(qs)):
                    if k - i >= 0:
                        acc += qs[i] * z[k - i]
                ps.append(acc)
            # verify the full congruence Q z = P mod T^{N+1}
            ok = True
            for k in range(N + 1):
                acc = Fraction(0)
                for i in range(len(qs)):
                    if k - i >= 0:
                        acc += qs[i] * z[k - i]
                if acc != (ps[k] if k <= dp else Fraction(0)):
                    ok = False
                    break
            if not ok:
                continue
            logs = [x - y for x, y in zip(_series_log(ps, N), _series_log(qs, N))]
            if logs == a[:N + 1]:
                return ZetaFunction(tuple(ps), tuple(qs))
    raise RecurrenceError("no rational zeta form matches the series")


# ---------------------------------------------------------------------------
# Density fitting across primes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityEstimate:
    delta: int
    mu: Fraction
    C: float
    support: tuple
    records: tuple  # (p, count, delta_p, mu_p)
    unclustered: tuple = ()


def density_fit(phi: Formula, variables: Sequence[str], primes: Sequence[int], *,
                params: Sequence[str] = (), policy: str = "none",
                budget: int = DEFAULT_BUDGET, workers: int = 1,
                max_denominator: int = 64,
                window: float = 3.0) -> list[DensityEstimate]:
    """Fit |phi(F_p)| ~ mu p^delta across a prime scan.

    Per prime, delta_p = round(log count / log p) is recorded; the family
    exponent is anchored at the largest prime with a nonempty set (small
    primes routinely misreport the exponent).  mu is the rational with
    denominator <= max_denominator minimizing the worst normalized error
    |count - mu p^delta| / p^(delta - 1/2); primes further than
    window / sqrt(p) from mu are reported unclustered.
    """
    if policy != "none":
        raise ValueError("only the parameter-free policy (policy='none') is supported")
    if params:
        raise ValueError("density_fit with parameters is not supported; bind them first")
    variables = tuple(variables)
    recs = []
    for p in sorted(primes):
        ctx = make_extension(p)
        n = defset_count(phi, ctx, variables, budget=budget, workers=workers)
        delta_p = round(math.log(n) / math.log(p)) if n >= 1 else 0
        recs.append((p, n, delta_p))

    out: list[DensityEstimate] = []
    zero = [(p, n, d, 0.0) for p, n, d in recs if n == 0]
    if zero:
        out.append(DensityEstimate(0, Fraction(0), 0.0,
                                   tuple(p for p, *_ in zero), tuple(zero)))
    pos = [(p, n, d) for p, n, d in recs if n >= 1]
    if not pos:
        return out
    delta = pos[-1][2]  # anchored at the largest sampled prime
    remaining = [(p, n, d, n / p ** delta) for p, n, d in pos]
    tight = 1.0  # core window for cluster formation; `window` only re-attaches

    def norm_err(cand, rec):
        p, n, _, _ = rec
        return abs(n - cand * p ** delta) / p ** (delta - 0.5)

    clusters: list[list] = []  # [mu, records]
    while remaining:
        candidates = set()
        for p, n, d, mu_p in remaining:
            for b in range(1, max_denominator + 1):
                candidates.add(Fraction(round(mu_p * b), b))
            fr = Fraction(n, p ** delta)
            if fr.denominator <= max_denominator:
                candidates.add(fr)

        def coverage(cand):
            return [r for r in remaining if norm_err(cand, r) <= tight]

        # rank by coverage, then by complexity-penalized error: at desk-scale
        # prime ranges distance alone cannot separate 1/2 from nearby
        # large-denominator fractions
        def rank(cand):
            covered = coverage(cand)
            worst = max((norm_err(cand, r) for r in covered), default=math.inf)
            return (-len(covered), worst * cand.denominator, cand.denominator, abs(cand))

        best = min(candidates, key=rank)
        inside = coverage(best)
        if not inside:
            break
        clusters.append([best, inside])
        remaining = [r for r in remaining if r not in inside]

    # stragglers join the nearest cluster within the loose window
    unattached = []
    for r in remaining:
        viable = [cl for cl in clusters if norm_err(cl[0], r) <= window]
        if viable:
            min(viable, key=lambda cl: norm_err(cl[0], r))[1].append(r)
        else:
            unattached.append(r)
    for mu, recs in clusters:
        recs.sort()
        C = max(norm_err(mu, r) for r in recs)
        out.append(DensityEstimate(delta, mu, float(C),
                                   tuple(r[0] for r in recs), tuple(recs)))
    if unattached:
        out.append(DensityEstimate(delta, Fraction(0), math.inf, (),
                                   (), tuple(unattached)))
    return out


# ---------------------------------------------------------------------------
# Plane curve counting (value histogram)
# ---------------------------------------------------------------------------

def plane_curve_counts(lhs: Term, rhs: Term, p: int, nu_list: Sequence[int]) -> list[int]:
    """Counts of {(x, y): lhs(y) = rhs(x)} over F_{p^nu} for each nu.

    Direct enumeration in O(q) per field: histogram the lhs values over y,
    then sum histogram hits of rhs over x.  Each side must use at most one
    variable.
    """
    from .defset import compile_term  # local import to avoid cycle at startup

    lv = lhs.used_vars()
    rv = rhs.used_vars()
    if len(lv) > 1 or len(rv) > 1:
        raise ValueError("plane curve counting needs single-variable sides")
    counts = []
    for nu in nu_list:
        ctx = make_extension(p, nu)
        lf = compile_term(lhs, ctx, lv or ("_",))
        rf = compile_term(rhs, ctx, rv or ("_",))
        hist: dict = {}
        for yv in range(ctx.q):
            key = lf(yv)
            hist[key] = hist.get(key, 0) + 1
        total = 0
        for xv in range(ctx.q):
            total += hist.get(rf(xv), 0)
        counts.append(total)
    return counts
