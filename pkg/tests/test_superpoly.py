import random

import pytest

from supercohom.scalars import QQ, PrimeField
from supercohom.superpoly import (MIXED, PolySyntaxError, SuperPolynomial, VariableContext, enumerate_monomials,
                                  format_poly, parse_poly, random_poly)

CTX = VariableContext(("x", "y"), ("X", "Y", "Z"), (1, 1), (-1, -1, 2))


def P(text, ctx=CTX, field=QQ):
    return parse_poly(text, ctx, field)


def split_parity(f):
    """Even and odd parts of a polynomial."""
    ev = {m: c for m, c in f.terms.items() if bin(m[1]).count("1") % 2 == 0}
    od = {m: c for m, c in f.terms.items() if bin(m[1]).count("1") % 2 == 1}
    return SuperPolynomial(f.ctx, ev, f.field), SuperPolynomial(f.ctx, od, f.field)


def test_odd_variables_anticommute():
    assert P("X*Y") == -P("Y*X")
    assert (P("X") * P("X")).is_zero()
    assert P("x*X") == P("X*x")


def test_left_odd_derivative():
    # d/dY (X Y) = -X : Y has to hop over X first
    assert P("X*Y").partial("Y") == -P("X")
    assert P("X*Y").partial("X") == P("Y")
    assert P("x^3*Y").partial("x") == P("3*x^2*Y")


def test_parity_and_grade():
    f = P("x*X + Y*y")
    assert f.parity() == 1
    assert f.grade() == 0
    assert P("x + X").parity() == MIXED
    assert P("x + y^2").grade() == MIXED
    assert SuperPolynomial(CTX).parity() == 0


def test_parse_format_roundtrip():
    for text in ["x^2*X - 1/2*y*Y*Z", "3", "-X*Y*Z", "x*y + -y"]:
        f = P(text)
        assert P(format_poly(f)) == f


def test_parse_stacked_signs():
    assert P("x + -y") == P("x - y")
    assert P("x - -y") == P("x + y")


def test_parse_errors():
    with pytest.raises(PolySyntaxError):
        P("x + q")
    with pytest.raises(PolySyntaxError):
        P("(x + y)")


def test_context_validation():
    with pytest.raises(ValueError):
        VariableContext(("x",), ("x",), (1,), (1,))
    with pytest.raises(ValueError):
        VariableContext(("x",), ("X",), (1, 2), (1,))


def test_enumerate_monomials_counts():
    ctx = VariableContext(("x", "y"), ("X", "Y"), (1, 1), (1, 1))
    # grade 2 in 2|2 variables: x^2, xy, y^2 (even), xX, xY, yX, yY (odd), XY (even)
    mons = enumerate_monomials(ctx, 2)
    assert len(mons) == 8
    assert len(enumerate_monomials(ctx, 2, parity=1)) == 4


def test_prime_field_coefficients():
    F = PrimeField(7)
    f = P("3*x*X", field=F) * P("5*y", field=F)
    assert f == P("1*x*y*X", field=F)


# randomized sign laws ---------------------------------------------------------

N_CASES = 1000


def _cases(seed):
    rng = random.Random(seed)
    for _ in range(N_CASES):
        f = random_poly(CTX, rng, n_terms=3, max_exp=2, parity=rng.randint(0, 1))
        g = random_poly(CTX, rng, n_terms=3, max_exp=2)
        yield rng, f, g


def _derivative_of_product(f, g, var):
    """Leibniz rule with the sign of a (possibly odd) derivation hopping over f."""
    if var in CTX.even_names:
        return f.partial(var) * g + f * g.partial(var)
    fe, fo = split_parity(f)
    out = f.partial(var) * g
    out = out + fe * g.partial(var) - fo * g.partial(var)
    return out


def test_leibniz_rule_randomized():
    names = CTX.even_names + CTX.odd_names
    count = 0
    for rng, f, g in _cases(1):
        var = rng.choice(names)
        assert (f * g).partial(var) == _derivative_of_product(f, g, var)
        count += 1
    assert count == N_CASES


def test_derivatives_supercommute_randomized():
    names = CTX.even_names + CTX.odd_names
    for rng, f, _ in _cases(2):
        a, b = rng.choice(names), rng.choice(names)
        both_odd = a in CTX.odd_names and b in CTX.odd_names
        lhs = f.partial(a).partial(b)
        rhs = f.partial(b).partial(a)
        assert lhs == (-rhs if both_odd else rhs)


def test_product_supercommutes_randomized():
    for rng, f, g in _cases(3):
        _, go = split_parity(g)
        fe, fo = split_parity(f)
        assert fe * g == g * fe
        assert fo * go == -(go * fo)


def test_parity_and_grade_additive_randomized():
    rng = random.Random(4)
    checked = 0
    while checked < 300:
        f = random_poly(CTX, rng, n_terms=1, max_exp=2)
        g = random_poly(CTX, rng, n_terms=1, max_exp=2)
        h = f * g
        if f.is_zero() or g.is_zero() or h.is_zero():
            continue
        assert h.parity() == (f.parity() + g.parity()) % 2
        assert h.grade() == f.grade() + g.grade()
        checked += 1


def test_euler_operator_measures_grade():
    f = P("x^2*X - 3*x*y*Y + y*X*Y*Z")
    # weighted Euler operator with the grading weights multiplies by the grade
    assert f.euler(CTX.even_grades, CTX.odd_grades) == f.scale(f.grade())
