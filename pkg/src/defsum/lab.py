"""Experiment harness: one-variable sums, interval detection, equidistribution,
the Kloosterman subsum study, twist scans, and the bundled example suite.

Every experiment emits an ExperimentReport with machine-readable records (CSV)
plus a summary; per-prime records are computed independently and merged in
prime order, so reports are byte-identical across worker counts.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import decomp, defset, jobs, spectrum
from .characters import unit_roots
from .defset import DEFAULT_BUDGET, BudgetExceeded, check_budget
from .expsum import SumSpec, _pairwise_sum, sum_over, twist_scan
from .gf import make_extension
from .ringlang import Atom, Formula, RationalMap, Term, desugar, parse_formula

__all__ = [
    "ExperimentReport", "IntervalVerdict", "primes_upto", "primes_in_range",
    "is_interval", "interval_geometric_magnitude", "star_discrepancy",
    "interval_experiment", "synthetic_interval_experiment", "equidist_report",
    "kloosterman_experiment", "twist_experiment", "run_paper_examples",
    "FORMULA_CORPUS", "block_corpus",
]


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i:: i] = bytearray(len(sieve[i * i:: i]))
    return [i for i in range(2, n + 1) if sieve[i]]


def primes_in_range(lo: int, hi: int) -> list[int]:
    return [p for p in primes_upto(hi) if p >= lo]


def _parallel_map(fn, items, workers):
    items = list(items)
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    s = str(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


@dataclass
class ExperimentReport:
    name: str
    columns: tuple
    records: list
    summary: dict = field(default_factory=dict)
    passed: bool = True
    failures: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for rec in self.records:
            lines.append(",".join(_fmt(v) for v in rec))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "records": [[None if v is None else (str(v) if isinstance(v, Fraction) else v)
                         for v in rec] for rec in self.records],
            "summary": {k: (str(v) if isinstance(v, Fraction) else v)
                        for k, v in self.summary.items()},
            "passed": self.passed,
            "failures": list(self.failures),
        }


# ---------------------------------------------------------------------------
# Intervals mod p
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalVerdict:
    is_interval: bool
    a: Optional[int] = None
    b: Optional[int] = None
    plain: bool = False
    progression: Optional[tuple] = None  # (start, step, length)


def is_interval(points: Sequence[int], p: int) -> IntervalVerdict:
    """Detect cyclic intervals: integer endpoints a <= b whose residues give
    exactly the set.  Wrapping sets get a negative left endpoint."""
    pts = sorted(set(points))
    k = len(pts)
    if k == 0:
        return IntervalVerdict(False)
    if k == p:
        return IntervalVerdict(True, 0, p - 1, True)
    gaps = [(pts[i + 1] - pts[i], i) for i in range(k - 1)]
    gaps.append((pts[0] + p - pts[-1], k - 1))
    big = [(g, i) for g, i in gaps if g > 1]
    if len(big) != 1:
        return IntervalVerdict(False)
    _, gap_idx = big[0]
    start = pts[(gap_idx + 1) % k]
    if start + k - 1 <= p - 1:
        return IntervalVerdict(True, start, start + k - 1, True)
    return IntervalVerdict(True, start - p, start - p + k - 1, False)


def is_interval_brute(points: Sequence[int], p: int) -> bool:
    """Independent check: try every cyclic window of the right length."""
    pts = set(points)
    k = len(pts)
    if k == 0:
        return False
    for start in range(p):
        if all((start + i) % p in pts for i in range(k)):
            return True
    return False


def detect_progression(points: Sequence[int], p: int) -> Optional[tuple]:
    """Arithmetic-progression structure {a, a+s, ..., a+(k-1)s} mod p, p not
    dividing s; smallest step returned.  O(p^2), opt-in."""
    pts = set(points)
    if not pts:
        return None
    for s in range(1, p):
        sinv = pow(s, p - 2, p)
        scaled = [(x * sinv) % p for x in pts]
        v = is_interval(scaled, p)
        if v.is_interval:
            return ((v.a % p) * s % p, s, len(pts))
    return None


def interval_geometric_magnitude(n: int, p: int) -> float:
    """|sin(pi n / p) / sin(pi / p)|: the magnitude a length-n interval's
    additive sum must have."""
    if not 0 <= n <= p:
        raise ValueError("interval length out of range")
    if n in (0, p):
        return 0.0
    return abs(math.sin(math.pi * n / p) / math.sin(math.pi / p))


def star_discrepancy(points: Sequence[int], p: int) -> float:
    """Star discrepancy of the fractional parts {x/p}, exhaustive formula."""
    u = sorted(x / p for x in points)
    N = len(u)
    if N == 0:
        return 1.0
    d = 0.0
    for i, ui in enumerate(u, start=1):
        d = max(d, i / N - ui, ui - (i - 1) / N)
    return d


# ---------------------------------------------------------------------------
# Interval / equidistribution experiments
# ---------------------------------------------------------------------------

_INTERVAL_COLS = ("p", "count", "is_interval", "plain", "a", "b",
                  "abs_sum", "interval_magnitude", "ratio_sqrtp")


def _interval_record(args):
    spec, p, budget = args
    ctx = make_extension(p)
    res = defset.enumerate_set(spec.phi, ctx, spec.variables, budget=budget)
    pts = [x[0] for x in res.points]
    roots = unit_roots(p)
    s = _pairwise_sum([roots[x] for x in pts])
    v = is_interval(pts, p)
    return (p, res.count, v.is_interval, v.plain, v.a, v.b,
            abs(s), interval_geometric_magnitude(res.count, p),
            abs(s) / math.sqrt(p))


def interval_experiment(spec: SumSpec, primes: Sequence[int], *,
                        budget: int = DEFAULT_BUDGET, workers: int = 1,
                        max_interval_flags: Optional[int] = None) -> ExperimentReport:
    if len(spec.variables) != 1 or spec.params:
        raise ValueError("interval experiment needs one variable, no parameters")
    recs = _parallel_map(_interval_record,
                         [(spec, p, budget) for p in sorted(primes)], workers)
    flagged = [r[0] for r in recs if r[2]]
    passed = True
    failures = []
    if max_interval_flags is not None and len(flagged) > max_interval_flags:
        passed = False
        failures.append(f"{len(flagged)} primes flagged as intervals, "
                        f"allowed {max_interval_flags}: {flagged}")
    return ExperimentReport("interval", _INTERVAL_COLS, recs,
                            {"flagged": flagged}, passed, failures)


def interval_formula(length: int, start: int = 0, var: str = "x") -> Formula:
    """(x - start)(x - start - 1)...(x - start - length + 1) = 0."""
    if length < 1:
        raise ValueError("interval length must be >= 1")
    x = Term.variable(var)
    prod = Term.constant(1)
    for i in range(start, start + length):
        prod = prod * (x - Term.constant(i))
    return Atom(prod, Term.constant(0))


_SYNTH_COLS = ("p", "length", "count", "abs_sum", "sine_ratio", "match_1e9",
               "exceeds_quarter_p")


def _synthetic_record(args):
    p, budget = args
    length = p // 3
    phi = interval_formula(length)
    ctx = make_extension(p)
    res = defset.enumerate_set(phi, ctx, ("x",), budget=budget)
    roots = unit_roots(p)
    s = _pairwise_sum([roots[x[0]] for x in res.points])
    ratio = interval_geometric_magnitude(length, p)
    match = abs(abs(s) - ratio) <= 1e-9
    exceeds = abs(s) > 0.25 * p
    return (p, length, res.count, abs(s), ratio, match, exceeds)


def synthetic_interval_experiment(primes: Sequence[int], *,
                                  budget: int = DEFAULT_BUDGET,
                                  workers: int = 1) -> ExperimentReport:
    """Length floor(p/3) interval formulas: the additive sum must hit the
    geometric sine ratio exactly and grow linearly in p."""
    primes = [p for p in sorted(primes) if p >= 5]
    recs = _parallel_map(_synthetic_record, [(p, budget) for p in primes], workers)
    failures = []
    for r in recs:
        if not r[5]:
            failures.append(f"p={r[0]}: |S|={r[3]} vs sine ratio {r[4]}")
        if r[0] >= 100 and not r[6]:
            failures.append(f"p={r[0]}: |S|={r[3]} below 0.25p")
    return ExperimentReport("interval-synthetic", _SYNTH_COLS, recs,
                            {}, not failures, failures)


def equidist_report(spec: SumSpec, p: int, H: int, *,
                    budget: int = DEFAULT_BUDGET) -> ExperimentReport:
    """Weyl sums W_h for h = 1..H over the definable set, plus the star
    discrepancy of the fractional parts."""
    if len(spec.variables) != 1 or spec.params:
        raise ValueError("equidistribution report needs one variable, no parameters")
    ctx = make_extension(p)
    res = defset.enumerate_set(spec.phi, ctx, spec.variables, budget=budget)
    pts = [x[0] for x in res.points]
    roots = unit_roots(p)
    recs = []
    for h in range(1, H + 1):
        w = _pairwise_sum([roots[h * x % p] for x in pts])
        recs.append((h, abs(w), abs(w) / max(res.count, 1)))
    disc = star_discrepancy(pts, p)
    return ExperimentReport("equidist", ("h", "W_abs", "W_ratio"), recs,
                            {"p": p, "count": res.count, "discrepancy": disc})


# ---------------------------------------------------------------------------
# Kloosterman subsums
# ---------------------------------------------------------------------------

def _poly_has_root(coeffs_desc, p) -> bool:
    for r in range(p):
        acc = 0
        for c in coeffs_desc:
            acc = (acc * r + c) % p
        if acc == 0:
            return True
    return False


def _product_one_tuples(p: int, n: int):
    """All (a_0,...,a_{n-1}) in (F_p^x)^n with product 1, lex in the first n-1."""
    if n == 2:
        for a0 in range(1, p):
            yield (a0, pow(a0, p - 2, p))
        return
    for head in itertools.product(range(1, p), repeat=n - 1):
        prod = 1
        for a in head:
            prod = prod * a % p
        yield head + (pow(prod, p - 2, p),)


def _norm_one_degree_count(p: int, n: int) -> int:
    """Elements of F_{p^n} of norm 1 over F_p and of degree exactly n,
    via a vectorized Frobenius scan of the whole extension field."""
    ctx = make_extension(p, n)
    q = ctx.q
    idx = np.arange(q, dtype=np.int64)
    D = np.empty((q, n), dtype=np.int64)
    t = idx.copy()
    for i in range(n):
        D[:, i] = t % p
        t //= p
    basis = np.array([ctx.decode(ctx.pow_(ctx.encode((0,) * i + (1,)), p))
                      for i in range(n)], dtype=np.int64)
    red = np.array([ctx.decode(ctx.pow_(ctx.encode((0, 1)), n + i))
                    for i in range(n - 1)], dtype=np.int64)

    def frob(M):
        return (M @ basis) % p

    def vmul(A, B):
        C = np.zeros((q, 2 * n - 1), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                C[:, i + j] += A[:, i] * B[:, j]
        C %= p
        out = C[:, :n].copy()
        for k in range(n, 2 * n - 1):
            out += C[:, k:k + 1] * red[k - n]
        return out % p

    F = frob(D)
    degree_n = np.any(F != D, axis=1)  # valid for prime n: proper subfield is F_p
    nm = vmul(D, F)
    Fi = F
    for _ in range(n - 2):
        Fi = frob(Fi)
        nm = vmul(nm, Fi)
    one = np.zeros(n, dtype=np.int64)
    one[0] = 1
    norm_one = np.all(nm == one, axis=1)
    return int(np.count_nonzero(norm_one & degree_n))


_KLOOS_COLS = ("p", "K_re", "K_im", "K_abs", "deligne_bound", "deligne_ok",
               "Kstar_re", "Kstar_im", "Kstar_abs", "Kstar_ratio", "Kstar_points",
               "irr_norm_one", "norm_one_degree_n", "identity_ok")


def _kloos_record(args):
    n, p, constant_one = args
    roots = unit_roots(p)
    k_terms = []
    kstar_terms = []
    kstar_points = 0
    for a in _product_one_tuples(p, n):
        phase = sum(a) % p
        k_terms.append(roots[phase])
        if constant_one:
            coeffs_desc = [1] + [a[i] for i in range(n - 1, 0, -1)] + [1]
        else:
            coeffs_desc = [1] + [a[i] for i in range(n - 1, -1, -1)]
        if not _poly_has_root(coeffs_desc, p):
            kstar_terms.append(roots[phase])
            kstar_points += 1
    K = _pairwise_sum(k_terms)
    Kstar = _pairwise_sum(kstar_terms)
    deligne = (n + 1) * p ** (n / 2)
    a0 = (-1) ** n % p
    irr = 0
    for tail in itertools.product(range(p), repeat=n - 1):
        coeffs_desc = [1] + [tail[i] for i in range(n - 2, -1, -1)] + [a0]
        if not _poly_has_root(coeffs_desc, p):
            irr += 1
    norm_deg = _norm_one_degree_count(p, n)
    return (p, K.real, K.imag, abs(K), deligne, abs(K) <= deligne + 1e-9,
            Kstar.real, Kstar.imag, abs(Kstar), abs(Kstar) / p ** (n - 0.5),
            kstar_points, irr, norm_deg, irr * n == norm_deg)


def kloosterman_experiment(n: int, primes: Sequence[int], *,
                           constant_one: bool = False,
                           ratio_bound: Optional[float] = None,
                           budget: int = DEFAULT_BUDGET,
                           workers: int = 1) -> ExperimentReport:
    """Hyper-Kloosterman sums K_{n,p}, the irreducible-polynomial subsums
    K*_{n,p}, and the exact norm-one degree-n count comparison.

    The summation polynomial carries constant term a_0 by default; the
    constant_one flag switches to the constant-term-1 reading.  The
    irreducible count compared with the extension field fixes the constant
    term to (-1)^n, which is exactly the norm-one condition on roots.
    """
    if n not in (2, 3):
        raise ValueError("kloosterman experiment supports n in {2, 3}")
    primes = [p for p in sorted(primes) if p > 2]
    for p in primes:
        check_budget(p ** n + p ** (n - 1) * p, budget)
    recs = _parallel_map(_kloos_record,
                         [(n, p, constant_one) for p in primes], workers)
    failures = []
    for r in recs:
        if not r[5]:
            failures.append(f"p={r[0]}: |K|={r[3]} above {r[4]}")
        if not r[13]:
            failures.append(f"p={r[0]}: irreducible count {r[11]} != {r[12]}/{n}")
        if ratio_bound is not None and r[9] > ratio_bound:
            failures.append(f"p={r[0]}: |K*| ratio {r[9]} above {ratio_bound}")
    summary = {"n": n, "constant_one": constant_one,
               "max_kstar_ratio": max((r[9] for r in recs), default=0.0)}
    return ExperimentReport("kloosterman", _KLOOS_COLS, recs, summary,
                            not failures, failures)


# ---------------------------------------------------------------------------
# Twist experiment across primes
# ---------------------------------------------------------------------------

_TWIST_COLS = ("p", "count", "exceptions", "nonzero_exceptions", "observed_D",
               "bound", "zero_twist_abs", "max_ok_abs")


def _twist_record(args):
    spec, p, threshold, budget = args
    ctx = make_extension(p)
    rep = twist_scan(spec, ctx, threshold=threshold, budget=budget, workers=1)
    nonzero = [h for h in rep.exceptions if any(c != 0 for c in h)]
    return (p, rep.count, len(rep.exceptions), len(nonzero), rep.observed_D,
            rep.bound, rep.zero_twist_abs, rep.max_ok_abs)


def twist_experiment(spec: SumSpec, primes: Sequence[int], *,
                     threshold: float = 3.0, budget: int = DEFAULT_BUDGET,
                     workers: int = 1) -> ExperimentReport:
    recs = _parallel_map(_twist_record,
                         [(spec, p, threshold, budget) for p in sorted(primes)],
                         workers)
    failures = [f"p={r[0]}: {r[3]} nonzero twist exceptions" for r in recs if r[3]]
    return ExperimentReport("twists", _TWIST_COLS, recs,
                            {"threshold": threshold}, not failures, failures)


# ---------------------------------------------------------------------------
# Formula and block corpus
# ---------------------------------------------------------------------------

FORMULA_CORPUS = [
    ("exists y. x = y^2", ("x",)),
    ("!(exists y. x = y^2)", ("x",)),
    ("exists y. x^2 + 1 = y^2", ("x",)),
    ("forall t. t^2 + a*t + b != 0", ("a", "b")),
    ("x != 0 -> (exists y. x*y = 1)", ("x",)),
    ("(exists y. x = y^2) <-> (exists z. w = z^2)", ("x", "w")),
    ("forall u. exists v. u + v = x", ("x",)),
    ("exists u. u^2 = x & u != 1", ("x",)),
    ("1 = 0", ()),
    ("exists y. y^2 = a0 + a1", ("a0", "a1")),
    ("(x = 0 | x = 1) -> x^2 = x", ("x",)),
]


def corpus_formulas() -> list[tuple[Formula, tuple]]:
    return [(parse_formula(text, vars_), vars_) for text, vars_ in FORMULA_CORPUS]


def block_corpus() -> list[decomp.ExistentialBlock]:
    t = Term.variable
    c = Term.constant

    def blk(variables, equations=(), witnesses=(), params=()):
        return decomp.ExistentialBlock(tuple(variables), tuple(params),
                                       tuple(equations), tuple(witnesses))

    x, x1, x2, y0 = t("x"), t("x1"), t("x2"), t("y0")
    z, z1, z2 = t("z"), t("z1"), t("z2")
    return [
        blk(["x"], witnesses=[(z * z - x, "z")]),
        blk(["x"], witnesses=[(x * x - z * z + c(1), "z")]),
        blk(["x"], witnesses=[(z ** 3 - x, "z")]),
        blk(["x"], witnesses=[(z * z + z - x, "z")]),
        blk(["x"], witnesses=[(z ** 4 - x, "z")]),
        blk(["x"], witnesses=[(z1 * z1 - x, "z1"), (z2 ** 3 - x - c(1), "z2")]),
        blk(["x"], equations=[x * x - c(1)]),
        blk(["x1", "x2"], equations=[x1 + x2 - c(1)], witnesses=[(z * z - x1, "z")]),
        blk(["x1", "x2"], witnesses=[(z * z - x1 * x2, "z")]),
        blk(["x"], witnesses=[(z * z - (x ** 3 - x), "z")]),
        blk(["x"], witnesses=[(x * z - c(1), "z")]),
        blk(["x"], params=["y0"], witnesses=[(z * z - x - y0, "z")]),
    ]


# ---------------------------------------------------------------------------
# Property scans (characters, trace/norm, desugar)
# ---------------------------------------------------------------------------

def prime_powers_upto(n: int) -> list[tuple[int, int]]:
    out = []
    for p in primes_upto(n):
        nu = 1
        while p ** nu <= n:
            out.append((p, nu))
            nu += 1
    return sorted(out, key=lambda t: t[0] ** t[1])


def character_property_scan(q_max: int = 121, *, orth_tol: float = 1e-9,
                            gauss_tol: float = 1e-6) -> tuple[bool, dict]:
    """Orthogonality of psi_a and chi_m and the sqrt(q) Gauss modulus, for all
    characters of all fields with q <= q_max."""
    max_orth = 0.0
    max_gauss = 0.0
    for p, nu in prime_powers_upto(q_max):
        ctx = make_extension(p, nu)
        q = ctx.q
        L = q - 1
        tr = ctx.trace_table()
        gpow = [ctx.gen_pow(k) for k in range(L)]
        trg = np.array([tr[g] for g in gpow], dtype=np.int64)
        roots_p = np.asarray(unit_roots(p), dtype=complex)
        # psi orthogonality, every a != 0 (a = g^i)
        jdx = (np.arange(L)[:, None] + np.arange(L)[None, :]) % L
        V = roots_p[trg[jdx]]  # V[i, j] = psi_{g^i}(g^j)
        sums = V.sum(axis=1) + 1.0
        max_orth = max(max_orth, float(np.max(np.abs(sums))) if L else 0.0)
        # chi orthogonality, every m != 0
        if L > 1:
            roots_L = np.asarray(unit_roots(L), dtype=complex)
            for m in range(1, L):
                s = roots_L[(m * np.arange(L)) % L].sum()
                max_orth = max(max_orth, abs(s))
        # Gauss modulus for all m != 0, a != 0
        if L > 1:
            F = np.fft.fft(V, axis=1)  # F[i, m] = sum_j psi_{g^i}(g^j) e(-mj/L)
            mags = np.abs(F[:, 1:])
            max_gauss = max(max_gauss, float(np.max(np.abs(mags - math.sqrt(q)))))
    ok = max_orth <= orth_tol and max_gauss <= gauss_tol
    return ok, {"max_orthogonality_error": max_orth, "max_gauss_error": max_gauss}


def trace_norm_scan(q_max: int = 729) -> tuple[bool, dict]:
    """Trace surjectivity (q/p per value), norm kernel size (q-1)/(p-1),
    Frobenius fixed field, and generator order, exhaustively."""
    failures = []
    for p, nu in prime_powers_upto(q_max):
        if nu == 1:
            continue
        ctx = make_extension(p, nu)
        q = ctx.q
        tr_hist: dict = {}
        nm_hist: dict = {}
        fixed = 0
        for x in ctx.elements():
            tr_hist[ctx.trace(x)] = tr_hist.get(ctx.trace(x), 0) + 1
            if x:
                nm_hist[ctx.norm(x)] = nm_hist.get(ctx.norm(x), 0) + 1
            if ctx.frobenius(x) == x:
                fixed += 1
        if sorted(tr_hist) != list(range(p)) or set(tr_hist.values()) != {q // p}:
            failures.append(f"trace histogram wrong for q={q}")
        if sorted(nm_hist) != list(range(1, p)) or set(nm_hist.values()) != {(q - 1) // (p - 1)}:
            failures.append(f"norm histogram wrong for q={q}")
        if fixed != p:
            failures.append(f"Frobenius fixes {fixed} != {p} points for q={q}")
        if ctx.pow_(ctx.generator, q - 1) != ctx.from_int(1):
            failures.append(f"generator order wrong for q={q}")
    return not failures, {"failures": failures}


def desugar_equivalence_scan(p_max: int = 13) -> tuple[bool, dict]:
    """satisfies(phi) == satisfies(desugar(phi)) for the corpus, exhaustively."""
    bad = []
    for (text, _), (phi, vars_) in zip(FORMULA_CORPUS, corpus_formulas()):
        d = desugar(phi)
        for p in primes_upto(p_max):
            ctx = make_extension(p)
            for vals in itertools.product(range(p), repeat=len(vars_)):
                env = dict(zip(vars_, vals))
                if defset.eval_reference(phi, ctx, dict(env)) != \
                        defset.eval_reference(d, ctx, dict(env)):
                    bad.append((text, p, vals))
    return not bad, {"mismatches": bad}


# ---------------------------------------------------------------------------
# Bundled example suite
# ---------------------------------------------------------------------------

def _beta_from_spec(spec: SumSpec, ctx, y: tuple = ()):
    """Character weight beta(x) = psi(f(x)) chi(g(x)) as a tuple callback."""
    from .expsum import _char_values
    psi_vals, chi_vals, _ = _char_values(ctx.p, ctx.nu, spec.psi_a, spec.chi_key())
    args = spec.variables + spec.params
    f1 = defset.compile_term(spec.f.num, ctx, args)
    g1 = defset.compile_term(spec.g.num, ctx, args)

    def beta(x):
        return psi_vals[f1(*x, *y)] * chi_vals[g1(*x, *y)]

    return beta


def _chk_squares_count(quick, budget, workers):
    pmax = 19 if quick else 499
    phi = jobs.resolve_job("squares").spec.phi
    for p in primes_in_range(3, pmax):
        got = defset.count(phi, make_extension(p), ("x",), budget=budget)
        if got != (p + 1) // 2:
            return False, f"count {got} != {(p + 1) // 2} at p={p}"
    for q, (pp, nn) in {25: (5, 2), 49: (7, 2), 121: (11, 2)}.items():
        if quick and q > 25:
            continue
        got = defset.count(phi, make_extension(pp, nn), ("x",), budget=budget)
        if got != (q + 1) // 2:
            return False, f"count {got} != {(q + 1) // 2} at q={q}"
    return True, f"(q+1)/2 verified through p<={pmax} and prime squares"


def _chk_gauss_identity(quick, budget, workers):
    pmax = 19 if quick else 499
    spec = jobs.resolve_job("squares").spec
    worst = 0.0
    for p in primes_in_range(3, pmax):
        rep = sum_over(spec, make_extension(p), budget=budget)
        err = abs(abs(2 * rep.value - 1) - math.sqrt(p))
        worst = max(worst, err)
        if err > 1e-6:
            return False, f"|2S-1| off sqrt(p) by {err} at p={p}"
    return True, f"max |2S-1|-sqrt(p) deviation {worst:.3g}"


def _chk_degenerate_multiplicative(quick, budget, workers):
    pmax_c = 31 if quick else 199
    pmax_d = 19 if quick else 61
    conic = jobs.resolve_job("conic").spec
    for p in primes_in_range(3, pmax_c):
        if p % 4 != 3:
            continue
        ctx = make_extension(p)
        rep = sum_over(conic, ctx, budget=budget)
        if rep.value != complex(rep.count):
            return False, f"conic sum {rep.value} != count {rep.count} at p={p}"
    disc = jobs.resolve_job("discriminant").spec
    for p in primes_in_range(3, pmax_d):
        ctx = make_extension(p)
        rep = sum_over(disc, ctx, budget=budget)
        expect = -p * (p - 1) // 2
        if rep.value != complex(expect) or rep.count != p * (p - 1) // 2:
            return False, f"discriminant sum {rep.value} != {expect} at p={p}"
    return True, "no-cancellation identities exact on both families"


def _chk_reduction_identity(quick, budget, workers):
    pmax = 11 if quick else 31
    blocks = block_corpus()
    for p in primes_upto(pmax):
        ctx = make_extension(p)
        for i, blk in enumerate(blocks):
            ys = [()] if not blk.params else [(v,) for v in (0, 1, p - 1)]
            for y in ys:
                rep = decomp.verify_reduction(blk, ctx, y, budget=budget)
                if not rep.equal:
                    return False, f"block {i} counting mismatch at p={p}, y={y}"
                beta = _beta_from_spec(
                    SumSpec(blk.to_formula(), blk.variables, blk.params,
                            RationalMap.of(Term.variable(blk.variables[0]))), ctx, y)
                rep = decomp.verify_reduction(blk, ctx, y, beta, budget=budget)
                if not rep.equal:
                    return False, f"block {i} character mismatch at p={p}, y={y}"
    return True, f"{len(blocks)} blocks verified for p<={pmax}, counting and character weights"


def _chk_triangular_lemma(quick, budget, workers):
    trials = 100 if quick else 1000
    rng = random.Random(20240901)
    for e in range(1, 9):
        for _ in range(trials):
            xs = [Fraction(rng.randint(-50, 50), rng.randint(1, 12)) for _ in range(e)]
            ys = decomp.forward_triangular(xs)
            if decomp.inclusion_exclusion_total(ys) != sum(xs, Fraction(0)):
                return False, f"round-trip failed at e={e}"
    return True, f"{trials} exact round-trips per e <= 8"


def _chk_weil_spectrum(quick, budget, workers):
    counts = spectrum.plane_curve_counts(Term.variable("y") ** 2,
                                         Term.variable("x") ** 3 - Term.variable("x"),
                                         5, range(1, 7))
    seq = spectrum.CompanionSequence(5, tuple(counts))
    rec = spectrum.min_recurrence(seq)
    want = (Fraction(1), Fraction(-3), Fraction(-5), Fraction(-25))
    if rec.order != 3 or tuple(rec.char_poly) != want:
        return False, f"recurrence {rec.char_poly} (order {rec.order})"
    spec = spectrum.classify_weights(rec, 5)
    if sorted(w for w in spec.weights) != [1, 1, 2]:
        return False, f"weights {spec.weights}"
    for k in (4, 5):
        if spectrum.predict_next(counts[:k], rec) != counts[k]:
            return False, f"prediction at nu={k + 1} missed {counts[k]}"
    zf = spectrum.zeta_series(seq, rec)
    if zf.integer_coeffs() != ((1, 2, 5), (1, -5)):
        return False, f"zeta {zf.integer_coeffs()}"
    return True, f"counts {counts}; charpoly T^3-3T^2-5T-25; weights (2,1,1); zeta (1+2T+5T^2)/(1-5T)"


def _chk_density_pairs(quick, budget, workers):
    pmax = 31 if quick else 97
    primes = primes_in_range(5, pmax)
    cases = [("squares", 1), ("nonsquares", 1),
             ("irreducible_quadratics", 2), ("discriminant", 2)]
    for name, delta in cases:
        spec = jobs.resolve_job(name).spec
        est = spectrum.density_fit(spec.phi, spec.variables, primes, budget=budget)
        est = [e for e in est if e.support]
        if len(est) != 1:
            return False, f"{name}: {len(est)} clusters"
        e = est[0]
        if (e.delta, e.mu) != (delta, Fraction(1, 2)) or e.C > 2 or e.unclustered:
            return False, f"{name}: cluster ({e.delta},{e.mu}) C={e.C}"
    return True, f"clusters (1,1/2),(1,1/2),(2,1/2),(2,1/2) with C<=2 over 5..{pmax}"


def _chk_kloosterman(quick, budget, workers):
    p2 = 47 if quick else 199
    p3 = 13 if quick else 61
    r2 = kloosterman_experiment(2, primes_in_range(3, p2), ratio_bound=3.0,
                                budget=budget, workers=workers)
    if not r2.passed:
        return False, "; ".join(r2.failures[:3])
    r3 = kloosterman_experiment(3, primes_in_range(3, p3), ratio_bound=3.0,
                                budget=budget, workers=workers)
    if not r3.passed:
        return False, "; ".join(r3.failures[:3])
    return True, (f"n=2 max ratio {r2.summary['max_kstar_ratio']:.3f}, "
                  f"n=3 max ratio {r3.summary['max_kstar_ratio']:.3f}")


def _chk_intervals(quick, budget, workers):
    pmax = 97 if quick else 499
    spec = jobs.resolve_job("squares").spec
    rep = interval_experiment(spec, primes_in_range(5, pmax), budget=budget,
                              workers=workers, max_interval_flags=2)
    if not rep.passed:
        return False, "; ".join(rep.failures)
    synth = synthetic_interval_experiment(primes_in_range(5, pmax),
                                          budget=budget, workers=workers)
    if not synth.passed:
        return False, "; ".join(synth.failures[:3])
    return True, f"squares interval flags: {rep.summary['flagged']}; synthetic sums exact"


def _chk_twists(quick, budget, workers):
    pmax = 31 if quick else 199
    spec = jobs.resolve_job("squares").spec
    spec = SumSpec(spec.phi, spec.variables)  # f = 0: pure twist scan
    rep = twist_experiment(spec, primes_in_range(3, pmax), threshold=3.0,
                           budget=budget, workers=workers)
    if not rep.passed:
        return False, "; ".join(rep.failures[:3])
    return True, f"zero nonzero-twist exceptions through p<={pmax}"


def _chk_properties(quick, budget, workers):
    qc = 25 if quick else 121
    qt = 121 if quick else 729
    ok, info = character_property_scan(qc)
    if not ok:
        return False, f"character properties: {info}"
    ok, info = trace_norm_scan(qt)
    if not ok:
        return False, f"trace/norm: {info}"
    ok, info = desugar_equivalence_scan(7 if quick else 13)
    if not ok:
        return False, f"desugar: {info}"
    spec = jobs.resolve_job("squares").spec
    texts = [interval_experiment(spec, primes_in_range(5, 31), budget=budget,
                                 workers=w).to_csv() for w in (1, 2, 8)]
    if len(set(texts)) != 1:
        return False, "interval CSV differs across worker counts"
    return True, "orthogonality, gauss modulus, trace/norm, desugar, worker determinism"


_CHECKS = [
    ("squares-count", _chk_squares_count),
    ("gauss-identity", _chk_gauss_identity),
    ("degenerate-multiplicative", _chk_degenerate_multiplicative),
    ("reduction-identity", _chk_reduction_identity),
    ("triangular-lemma", _chk_triangular_lemma),
    ("weil-spectrum", _chk_weil_spectrum),
    ("density-pairs", _chk_density_pairs),
    ("kloosterman", _chk_kloosterman),
    ("intervals", _chk_intervals),
    ("twist-scan", _chk_twists),
    ("property-suites", _chk_properties),
]


def run_paper_examples(*, quick: bool = False, budget: int = DEFAULT_BUDGET,
                       workers: int = 1) -> ExperimentReport:
    """Run the bundled example suite; one record per check."""
    if budget <= 0:
        raise BudgetExceeded(1, budget)
    recs = []
    failures = []
    for name, fn in _CHECKS:
        ok, detail = fn(quick, budget, workers)
        recs.append((name, ok, detail))
        if not ok:
            failures.append(f"{name}: {detail}")
    return ExperimentReport("paper-examples", ("check", "passed", "detail"),
                            recs, {"quick": quick}, not failures, failures)
