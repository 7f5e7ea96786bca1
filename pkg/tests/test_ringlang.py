import random

import pytest

from defsum import defset, gf
from defsum.ringlang import (
    And, Atom, Exists, Forall, Iff, Implies, Not, Or, ParseError, Term,
    build_irreducibility_formula, desugar, free_variables, parse_formula,
    parse_term, term_text, to_text,
)


def test_parse_squares_shape():
    phi = parse_formula("exists y. x = y^2", ["x"])
    assert isinstance(phi, Exists) and phi.var == "y"
    assert isinstance(phi.child, Atom)
    assert phi.child.lhs == Term.variable("x")
    assert phi.child.rhs == Term.variable("y") ** 2


def test_parse_trivial_atom():
    phi = parse_formula("1 = 0", [])
    assert phi == Atom(Term.constant(1), Term.constant(0))


def test_parse_universal_with_neq():
    phi = parse_formula("forall t. a0 + a1*t + a2*t^2 != 0", ["a0", "a1", "a2"])
    assert isinstance(phi, Forall) and isinstance(phi.child, Not)
    assert isinstance(phi.child.child, Atom)


def test_precedence_and_flattening():
    phi = parse_formula("x = 0 & x = 1 & x = 2 | x = 3", ["x"])
    assert isinstance(phi, Or) and len(phi.children) == 2
    assert isinstance(phi.children[0], And) and len(phi.children[0].children) == 3
    # -> binds looser than |, right-associative
    phi = parse_formula("x = 0 -> x = 1 -> x = 2", ["x"])
    assert isinstance(phi, Implies) and isinstance(phi.b, Implies)
    phi = parse_formula("x = 0 <-> x = 1 -> x = 2", ["x"])
    assert isinstance(phi, Iff)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as ei:
        parse_formula("exists y. x = y^", ["x"])
    assert "line 1" in str(ei.value)
    with pytest.raises(ParseError):
        parse_formula("x = $", ["x"])


def test_unbound_and_rebound_rejected():
    with pytest.raises(ParseError, match="unbound"):
        parse_formula("x = y", ["x"])
    with pytest.raises(ParseError, match="bound more than once"):
        parse_formula("exists y. (exists y. x = y)", ["x"])
    with pytest.raises(ParseError, match="rebinds"):
        parse_formula("exists x. x = 0", ["x"])
    with pytest.raises(ParseError, match="disjoint"):
        parse_formula("x = y", ["x", "y"], params=["y"])


def test_free_variable_inference_warns():
    with pytest.warns(UserWarning):
        phi = parse_formula("exists y. x = y^2", None)
    assert free_variables(phi) == ("x",)


def test_desugar_implies_and_iff():
    a = Atom(Term.variable("x"), Term.constant(0))
    b = Atom(Term.variable("x"), Term.constant(1))
    assert desugar(Implies(a, b)) == Or((Not(a), b))
    assert desugar(a) == a
    d = desugar(Iff(a, b))
    assert d == And((Or((Not(a), b)), Or((Not(b), a))))


def test_desugar_flattens():
    a, b, c = (Atom(Term.variable("x"), Term.constant(i)) for i in range(3))
    nested = And((a, And((b, c))))
    assert desugar(nested) == And((a, b, c))


def test_desugar_preserves_satisfaction_small():
    phi = parse_formula("(x = 0 | x = 1) -> x^2 = x", ["x"])
    d = desugar(phi)
    for p in (2, 3, 5, 7):
        ctx = gf.make_extension(p)
        for x in range(p):
            assert defset.eval_reference(phi, ctx, {"x": x}) == \
                defset.eval_reference(d, ctx, {"x": x})


def test_roundtrip_corpus():
    from defsum.lab import FORMULA_CORPUS
    for text, vars_ in FORMULA_CORPUS:
        phi = parse_formula(text, vars_)
        assert parse_formula(to_text(phi), vars_) == phi


def test_term_arithmetic_and_eval():
    ctx = gf.make_extension(5)
    t = parse_term("x^2 + 1")
    assert t.evaluate(ctx, {"x": 2}) == 0
    assert parse_term("7").evaluate(ctx, {}) == 2
    ctx9 = gf.make_extension(3, 2)
    alpha = ctx9.generator
    xy = parse_term("x*y")
    assert xy.evaluate(ctx9, {"x": alpha, "y": alpha}) == ctx9.mul(alpha, alpha)


def test_term_eval_is_ring_hom():
    rng = random.Random(11)
    ctx = gf.make_extension(13)
    names = ("x", "y")
    for _ in range(50):
        def rand_term():
            t = Term.constant(rng.randint(-9, 9))
            for _ in range(rng.randint(1, 4)):
                f = Term.variable(rng.choice(names)) ** rng.randint(0, 3)
                t = t + Term.constant(rng.randint(-5, 5)) * f
            return t
        t1, t2 = rand_term(), rand_term()
        env = {"x": rng.randrange(13), "y": rng.randrange(13)}
        assert (t1 + t2).evaluate(ctx, env) == ctx.add(t1.evaluate(ctx, env), t2.evaluate(ctx, env))
        assert (t1 * t2).evaluate(ctx, env) == ctx.mul(t1.evaluate(ctx, env), t2.evaluate(ctx, env))


def test_term_missing_assignment():
    from defsum.ringlang import EvaluationError
    with pytest.raises(EvaluationError):
        parse_term("x + y").evaluate(gf.make_extension(5), {"x": 1})


def test_big_coefficients_survive():
    t = parse_term("x") - Term.constant(10 ** 40)
    assert t.evaluate(gf.make_extension(7), {"x": 3}) == (3 - 10 ** 40) % 7


def test_term_text_roundtrip():
    for text in ("x^2 + 1", "a0 + a1*t + a2*t^2", "x*y - 3", "-x + 2", "0"):
        t = parse_term(text)
        assert parse_term(term_text(t)) == t


def test_irreducibility_formula_quadratic():
    phi = build_irreducibility_formula(2)
    ctx5 = gf.make_extension(5)
    assert defset.satisfies(phi, ctx5, {"a0": 1, "a1": 1})       # X^2+X+1, disc -3=2
    assert not defset.satisfies(phi, ctx5, {"a0": 4, "a1": 0})   # X^2+4 has root 1
    for p in (2, 3, 5, 7):
        ctx = gf.make_extension(p)
        for a0 in range(p):
            for a1 in range(p):
                brute = all((r * r + a1 * r + a0) % p for r in range(p))
                assert defset.satisfies(phi, ctx, {"a0": a0, "a1": a1}) == brute


def _brute_irreducible(p, coeffs_asc):
    """Trial factorization of a monic polynomial over F_p (oracle)."""
    n = len(coeffs_asc)

    def poly_eval(cs, x):
        acc = 0
        for c in reversed(cs):
            acc = (acc * x + c) % p
        return acc
    full = list(coeffs_asc) + [1]
    if any(poly_eval(full, x) == 0 for x in range(p)):
        return False
    if n <= 3:
        return True
    # degree 4..6: also exclude factorizations into two irreducible pieces >= 2
    import itertools
    for j in range(2, n // 2 + 1):
        for u in itertools.product(range(p), repeat=j):
            for v in itertools.product(range(p), repeat=n - j):
                prod = [0] * (n + 1)
                uu = list(u) + [1]
                vv = list(v) + [1]
                for i, a in enumerate(uu):
                    for k, b in enumerate(vv):
                        prod[i + k] = (prod[i + k] + a * b) % p
                if prod[:-1] == [c % p for c in coeffs_asc]:
                    return False
    return True


def test_irreducibility_formula_cubic():
    phi = build_irreducibility_formula(3)
    ctx2 = gf.make_extension(2)
    assert defset.satisfies(phi, ctx2, {"a0": 1, "a1": 1, "a2": 0})  # X^3+X+1
    for p in (2, 3):
        ctx = gf.make_extension(p)
        for a0 in range(p):
            for a1 in range(p):
                for a2 in range(p):
                    want = _brute_irreducible(p, (a0, a1, a2))
                    env = {"a0": a0, "a1": a1, "a2": a2}
                    assert defset.satisfies(phi, ctx, env, budget=10 ** 9) == want


def test_irreducibility_formula_quartic_spotcheck():
    phi = build_irreducibility_formula(4)
    ctx = gf.make_extension(2)
    # X^4+X+1 irreducible over F_2; X^4+X^2+1 = (X^2+X+1)^2 is not
    assert defset.satisfies(phi, ctx, {"a0": 1, "a1": 1, "a2": 0, "a3": 0}, budget=10 ** 9)
    assert not defset.satisfies(phi, ctx, {"a0": 1, "a1": 0, "a2": 1, "a3": 0}, budget=10 ** 9)


def test_irreducibility_formula_guard():
    with pytest.raises(ValueError):
        build_irreducibility_formula(7)
    with pytest.raises(ValueError):
        build_irreducibility_formula(1)
