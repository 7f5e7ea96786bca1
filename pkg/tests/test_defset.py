import itertools

import pytest

from defsum import gf
from defsum.defset import (
    BudgetExceeded, chunk_bounds, compile_formula, count, count_report,
    enumerate_set, eval_reference, satisfies,
)
from defsum.lab import FORMULA_CORPUS, corpus_formulas
from defsum.ringlang import And, Atom, Not, Term, parse_formula


def squares():
    return parse_formula("exists y. x = y^2", ["x"])


def test_satisfies_examples():
    assert satisfies(squares(), gf.make_extension(5), {"x": 4})
    assert not satisfies(squares(), gf.make_extension(7), {"x": 3})
    # quadratic with a root: forall fails (t=2 kills x^2+1 over F_5)
    phi = parse_formula("forall t. a0 + a1*t + a2*t^2 != 0", ["a0", "a1", "a2"])
    assert not satisfies(phi, gf.make_extension(5), {"a0": 1, "a1": 0, "a2": 1})


def test_enumerate_examples():
    res = enumerate_set(squares(), gf.make_extension(5), ["x"])
    assert res.points == ((0,), (1,), (4,)) and res.count == 3
    res = enumerate_set(squares(), gf.make_extension(7), ["x"])
    assert res.points == ((0,), (1,), (2,), (4,)) and res.count == 4
    res = enumerate_set(Atom(Term.constant(1), Term.constant(0)),
                        gf.make_extension(5), ["x"])
    assert res.points == () and res.count == 0


def test_count_examples():
    disc = parse_formula("forall t. t^2 + a*t + b != 0", ["a", "b"])
    assert count(disc, gf.make_extension(5), ["a", "b"]) == 10
    # irreducible quadratics with a0*a1 = 1 over F_5: exactly (1,1) and (3,2)
    from defsum.ringlang import build_irreducibility_formula
    phi = And((build_irreducibility_formula(2),
               Atom(Term.variable("a0") * Term.variable("a1"), Term.constant(1))))
    res = enumerate_set(phi, gf.make_extension(5), ["a0", "a1"])
    assert res.points == ((1, 1), (3, 2))
    assert count(squares(), gf.make_extension(5, 2), ["x"]) == 13


def test_parameters():
    phi = parse_formula("exists z. z^2 = x + y0", ["x"], params=["y0"])
    ctx = gf.make_extension(7)
    c0 = count(phi, ctx, ["x"], params=["y0"], y=(0,))
    assert c0 == 4
    with pytest.raises(ValueError):
        count(phi, ctx, ["x"], params=["y0"], y=())


def test_sentence_counting():
    phi = parse_formula("exists x. x^2 = 2", [])
    assert count(phi, gf.make_extension(7), []) == 1
    assert count(phi, gf.make_extension(5), []) == 0


def test_budget_is_a_precondition():
    with pytest.raises(BudgetExceeded) as ei:
        count(squares(), gf.make_extension(499), ["x"], budget=0)
    assert ei.value.estimate > 0
    with pytest.raises(BudgetExceeded):
        satisfies(squares(), gf.make_extension(499), {"x": 1}, budget=3)
    # cost is reported deterministically
    rep = count_report(squares(), gf.make_extension(13), ["x"])
    assert rep.cost == 2 * 13 ** 2


def test_complementation_exact():
    for text, vars_ in FORMULA_CORPUS:
        if not vars_:
            continue
        phi = parse_formula(text, vars_)
        for p in (3, 5, 7):
            ctx = gf.make_extension(p)
            n = len(vars_)
            assert count(phi, ctx, vars_) + count(Not(phi), ctx, vars_) == p ** n


def test_monotone_consistency():
    ctx = gf.make_extension(11)
    phi = squares()
    extra = parse_formula("x != 1", ["x"])
    assert count(And((phi, extra)), ctx, ["x"]) <= count(phi, ctx, ["x"])


def test_compiled_matches_reference_exhaustively():
    for (text, vars_), (phi, _) in zip(FORMULA_CORPUS, corpus_formulas()):
        for p in (2, 3, 5, 7, 11, 13):
            ctx = gf.make_extension(p)
            fn = compile_formula(phi, ctx, vars_)
            for vals in itertools.product(range(p), repeat=len(vars_)):
                assert fn(*vals) == eval_reference(phi, ctx, dict(zip(vars_, vals))), \
                    (text, p, vals)


def test_compiled_matches_reference_extension_fields():
    phi = squares()
    for p, nu in [(2, 2), (3, 2), (5, 2)]:
        ctx = gf.make_extension(p, nu)
        fn = compile_formula(phi, ctx, ("x",))
        for x in ctx.elements():
            assert fn(x) == eval_reference(phi, ctx, {"x": x})


def test_closure_path_matches_table_path():
    # force the closure fallback by exceeding the table size artificially:
    # F_3^7 = 2187 > 1024 uses closures; compare with reference on a sample
    ctx = gf.make_extension(3, 7)
    phi = squares()
    fn = compile_formula(phi, ctx, ("x",))
    for x in range(0, 2187, 97):
        assert fn(x) == eval_reference(phi, ctx, {"x": x})


def test_chunk_bounds_fixed_partition():
    assert chunk_bounds(5) == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    bounds = chunk_bounds(499)
    assert bounds[0][0] == 0 and bounds[-1][1] == 499
    assert sum(hi - lo for lo, hi in bounds) == 499


def test_partition_count_invariance():
    phi = squares()
    ctx = gf.make_extension(31)
    base = enumerate_set(phi, ctx, ["x"]).points
    from defsum.defset import _enum_chunk
    for n_chunks in (1, 3, 7, 31):
        pts = []
        for lo, hi in chunk_bounds(31, n_chunks):
            _, chunk = _enum_chunk(phi, 31, 1, ("x",), (), 1, lo, hi, True)
            pts.extend(chunk)
        assert tuple(pts) == base


def test_workers_identical_results():
    phi = parse_formula("exists y. x1 + x2 = y^2", ["x1", "x2"])
    ctx = gf.make_extension(11)
    r1 = enumerate_set(phi, ctx, ["x1", "x2"], workers=1)
    r2 = enumerate_set(phi, ctx, ["x1", "x2"], workers=2)
    assert r1.points == r2.points and r1.count == r2.count


def test_high_degree_univariate_horner_path():
    from defsum.lab import interval_formula
    p = 101
    phi = interval_formula(33)
    ctx = gf.make_extension(p)
    res = enumerate_set(phi, ctx, ["x"])
    assert res.points == tuple((i,) for i in range(33))
