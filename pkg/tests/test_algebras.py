import itertools
import random
from fractions import Fraction

import pytest

from refdata import graded_family, sb3_elements, sle2_slice, sm1_slice
from supercohom.algebras import (CustomAlgebra, Family, OutOfRangeError, UsageError, build_slice, enumerate_basis,
                                 find_internal_grading_element, parse_custom_table, verify_algebra)
from supercohom.linalg import Echelon
from supercohom.scalars import QQ, PrimeField
from supercohom.superpoly import MIXED

P46337 = PrimeField(46337)

# (kind, params, slice window) covering every family
CORPUS = [
    ("W", (1, 1), -1, 2), ("W", (2, 0), -1, 1), ("S", (2, 1), -1, 1), ("Po", (2, 0), -1, 2),
    ("H", (2, 1), -1, 1), ("K", (1, 1), -2, 2), ("B", (1,), -1, 3), ("Le", (1,), -1, 3),
    ("B", (2,), -1, 1), ("SB", (1,), -1, 3), ("SLe", (1,), -1, 3), ("SB", (2,), -2, 1),
    ("M", (1,), -1, 2), ("SM", (1,), -1, 3),
]


def corpus_family(kind, params, field=QQ):
    return Family.create(kind, *params, field=field)


# bracket ---------------------------------------------------------------------

def test_b1_bracket_of_even_elements():
    fam = graded_family("B", 1)
    P = fam.parse_payload
    for i, j in [(2, 1), (3, 0), (1, 4)]:
        got = fam.bracket(P(f"x^{i}*X"), P(f"x^{j}*X"))
        expect = P(f"{i - j}*x^{i + j - 1}*X") if i != j else fam.zero()
        assert got == expect


def test_sle2_bracket_with_o1():
    fam = graded_family("SLe", 2)
    P = fam.parse_payload
    for i, j in [(1, 1), (2, 0), (0, 3), (2, 1)]:
        E = P(f"{j}*x^{i}*y^{max(j - 1, 0)}*X - {i}*x^{max(i - 1, 0)}*y^{j}*Y")
        assert fam.bracket(P("X*Y"), P(f"x^{i}*y^{j}")) == -E


def test_poisson_pair():
    fam = Family.create("Po", 2, 0)
    P = fam.parse_payload
    assert fam.bracket(P("p"), P("q")) == P("1")


def test_m1_row_six():
    fam = graded_family("M", 1)
    P = fam.parse_payload
    assert fam.bracket(P("x*X"), P("x^2")) == P("2*x^2")


def test_mixed_parity_rejected():
    fam = graded_family("B", 1)
    with pytest.raises(UsageError):
        fam.bracket(fam.parse_payload("x + X"), fam.parse_payload("x"))


# constraint operator -------------------------------------------------------------

def test_laplacian_examples():
    fam = graded_family("SB", 1)
    P = fam.parse_payload
    assert fam.constraint_operator(P("x*X")) == P("1")
    assert fam.constraint_operator(P("x^2*X")) == P("2*x")


def test_sm1_constraint_kills_powers_of_x():
    fam = graded_family("SM", 1)
    for i in range(5):
        assert fam.constraint_operator(fam.parse_payload(f"x^{i}")).is_zero()


def test_constraint_operator_needs_special_family():
    fam = graded_family("B", 1)
    with pytest.raises(UsageError):
        fam.constraint_operator(fam.parse_payload("x"))


# bases --------------------------------------------------------------------------

def test_b1_grade_zero_basis():
    fam = graded_family("B", 1)
    got = {(fam.format_payload(b.payload), b.parity) for b in enumerate_basis(fam, 0)}
    assert got == {("xX", 0), ("1", 1)}


def test_sle1_low_grades():
    fam = graded_family("SLe", 1)
    assert enumerate_basis(fam, 0) == []
    assert [fam.format_payload(b.payload) for b in enumerate_basis(fam, -1)] == ["X"]


def test_quotients_drop_the_center():
    le = graded_family("B", 1).quotient_center()
    assert le.kind == "Le"
    assert all(fam_text != "1" for fam_text in (le.format_payload(b.payload) for b in enumerate_basis(le, 0)))
    h = Family.create("Po", 2, 0).quotient_center()
    assert h.bracket(h.parse_payload("p"), h.parse_payload("q")).is_zero()
    # in B(1) the pair {X, x} lands on the constant; Le(1) drops it
    b = graded_family("B", 1)
    assert not b.bracket(b.parse_payload("X"), b.parse_payload("x")).is_zero()
    assert le.bracket(le.parse_payload("X"), le.parse_payload("x")).is_zero()


def test_quotient_center_needs_a_center():
    with pytest.raises(UsageError):
        graded_family("M", 1).quotient_center()


def test_signature_checked():
    with pytest.raises(ValueError):
        Family.create("B", 1, even_names=["x", "y"])


def test_element_parity_flips_for_odd_brackets():
    b = graded_family("B", 1)
    assert b.element_parity(b.parse_payload("x*X")) == 0
    assert b.element_parity(b.parse_payload("x")) == 1
    po = Family.create("Po", 2, 0)
    assert po.element_parity(po.parse_payload("p")) == 0


# SB(3) basis and commutator table --------------------------------------------------

def sb3_families(fam, depth=6):
    E1, E2, E3, O1, O2 = sb3_elements(fam)
    by_grade = {}

    def add(p):
        if p is not None and not p.is_zero():
            by_grade.setdefault(fam.element_grade(p), []).append(p)

    add(E1())
    for i, j, k in itertools.product(range(depth + 1), repeat=3):
        if i + j + k <= depth:
            for f in (E2, E3, O1, O2):
                add(f(i, j, k))
    return by_grade


def rank_of(fam, payloads):
    ech = Echelon(fam.field)
    for p in payloads:
        ech.add(fam.coords(p))
    return ech


def test_sb3_basis_matches_the_five_families():
    fam = graded_family("SB", 3)
    listed = sb3_families(fam)
    dims = []
    for g in range(-3, 3):
        computed = [p for p, _ in fam.basis(g)]
        ech = rank_of(fam, computed)
        assert all(ech.contains(fam.coords(p)) for p in listed[g])
        assert rank_of(fam, listed[g]).rank == ech.rank == len(computed)
        dims.append(len(computed))
    assert dims == [1, 3, 9, 19, 33, 51]


def lin(fam, *pairs):
    out = fam.zero()
    for c, p in pairs:
        if p is not None and c:
            out = out + p.scale(fam.field(Fraction(c)))
    return out


def sb3_rules(fam):
    E1, E2, E3, O1, O2 = sb3_elements(fam)
    L = lambda *pairs: lin(fam, *pairs)  # noqa: E731
    return {
        1: (E2, E2, lambda i, j, k, l, m, n: L((n * i - l * k, E2(i + l - 1, j + m, k + n - 1)))),
        2: (E2, E3, lambda i, j, k, l, m, n: None if n + k == 1 else L(
            (Fraction(n * k * j - m * k * k + m * k, n + k - 1), E2(i + l, j + m - 1, k + n - 1)),
            (Fraction(n * n * i - n * l * k - n * i, n + k - 1), E3(i + l - 1, j + m, k + n - 1)))),
        3: (E3, E3, lambda i, j, k, l, m, n: L((n * j - m * k, E3(i + l, j + m - 1, k + n - 1)))),
        4: (E2, O1, lambda i, j, k, l, m, n: L((n * i - l * k, O1(i + l - 1, j + m, k + n - 1)))),
        5: (E3, O1, lambda i, j, k, l, m, n: L((n * j - m * k, O1(i + l, j + m - 1, k + n - 1)))),
        7: (E2, O2, lambda i, j, k, l, m, n: L((n * i - l * k, O2(i + l - 1, j + m, k + n - 1)))),
        8: (E3, O2, lambda i, j, k, l, m, n: L((n * j - m * k, O2(i + l, j + m - 1, k + n - 1)))),
        9: (O1, O2, lambda i, j, k, l, m, n: None if n + k == 0 else L(
            (Fraction(n * j - m * k, n + k), E2(i + l, j + m - 1, k + n)),
            (Fraction(-n * i + l * k, n + k), E3(i + l - 1, j + m, k + n)))),
    }


@pytest.mark.parametrize("row", [1, 2, 3, 4, 5, 7, 8, 9])
def test_sb3_commutator_rows(row):
    fam = graded_family("SB", 3)
    fa, fb, rhs = sb3_rules(fam)[row]
    rng = random.Random(row)
    checked = 0
    while checked < 20:
        idx = [rng.randint(0, 3) for _ in range(6)]
        a, b = fa(*idx[:3]), fb(*idx[3:])
        expect = rhs(*idx)
        if a is None or b is None or a.is_zero() or b.is_zero() or expect is None:
            continue
        assert fam.bracket(a, b) == expect, idx
        checked += 1


def test_sb3_row_six():
    fam = graded_family("SB", 3)
    E1, _, _, O1, O2 = sb3_elements(fam)
    for ijk in [(1, 0, 0), (0, 2, 1), (1, 1, 1), (2, 0, 3), (0, 0, 4)]:
        assert fam.bracket(E1(), O2(*ijk)) == -O1(*ijk)


# slices ---------------------------------------------------------------------------

def test_sm1_o1_with_o2():
    sl = sm1_slice(6)
    fam = sl.family
    for i in range(4):
        Ei = fam.parse_payload(f"{i}*x^{i - 1}*T + {2 - i}*x^{i}*X" if i else "2*X")
        assert fam.bracket(fam.parse_payload("T*X"), fam.parse_payload(f"x^{i}")) == Ei


def test_even_self_brackets_vanish():
    for kind, params, lo, hi in CORPUS:
        sl = build_slice(corpus_family(kind, params), lo, hi)
        for b in sl.basis:
            if b.parity == 0 and (b.id, b.id) not in sl.flagged:
                assert sl.bracket_ids(b.id, b.id) == ()


def test_out_of_range_products_are_flagged():
    sl = build_slice(graded_family("B", 1), -1, 2)
    top = sl.ids_of_grade(2)
    assert sl.flagged
    with pytest.raises(OutOfRangeError):
        sl.bracket_ids(top[0], top[1])


def test_override_must_span():
    fam = graded_family("B", 1)
    with pytest.raises(Exception):
        build_slice(fam, -1, 1, basis_override={0: [fam.parse_payload("x*X")]})


# internal grading element --------------------------------------------------------

def acts_as_grade(sl, elt):
    F = sl.field
    for b in sl.basis:
        acc = {}
        for i, c in elt.coeffs.items():
            if (i, b.id) in sl.flagged:
                continue
            for k, v in sl.bracket_ids(i, b.id):
                acc[k] = F.add(acc.get(k, F.zero), F.mul(c, v))
        acc = {k: v for k, v in acc.items() if not F.is_zero(v)}
        want = {b.id: F(b.grade)} if b.grade else {}
        if acc != want:
            return False
    return True


def test_b1_has_a_grading_element():
    sl = build_slice(graded_family("B", 1), -1, 3)
    elt = find_internal_grading_element(sl)
    assert elt is not None and acts_as_grade(sl, elt)
    # a multiple of xX
    assert sl.family.format_payload(elt.payload) in ("xX", "-xX")


def test_special_families_have_none():
    assert find_internal_grading_element(build_slice(graded_family("SB", 1), -1, 3)) is None


def test_abelian_has_none():
    alg = CustomAlgebra(["a"], [0], [0], {})
    assert find_internal_grading_element(build_slice(alg)) is None


# verify_algebra ---------------------------------------------------------------------

@pytest.mark.parametrize("kind,params,lo,hi", CORPUS)
def test_families_pass_verification(kind, params, lo, hi):
    sl = build_slice(corpus_family(kind, params), lo, hi)
    rep = verify_algebra(sl)
    assert rep.ok, str(rep)
    assert rep.checked_pairs > 0


def test_graded_slices_pass_verification():
    assert verify_algebra(sm1_slice(6), recompute=False).ok


def test_sle2_slice_passes_verification():
    sl = sle2_slice()
    sub = build_slice(sl.family, -2, 3)
    assert verify_algebra(sub).ok


def test_corrupted_table_is_caught():
    sl = build_slice(graded_family("B", 1), -1, 3)
    (i, j), terms = next(((k, v) for k, v in sl.table.items() if v))
    k, c = terms[0]
    sl.table[(i, j)] = ((k, sl.field.add(c, sl.field.one)),) + tuple(terms[1:])
    rep = verify_algebra(sl, recompute=False)
    assert not rep.ok
    assert rep.violations[0][1]


def test_custom_abelian_and_parse():
    alg = parse_custom_table("element 0 even 0 a\nelement 1 odd 1 b\n")
    assert verify_algebra(build_slice(alg)).ok
    heis = parse_custom_table("""
        element 0 even 1 p
        element 1 even 1 q
        element 2 even 2 z
        [0, 1] = 1 2   # [p, q] = z
    """)
    sl = build_slice(heis)
    assert sl.bracket_ids(1, 0) == ((2, QQ(-1)),)
    assert verify_algebra(sl).ok


def test_custom_parse_errors():
    with pytest.raises(UsageError):
        parse_custom_table("element 0 sideways 0\n")
    with pytest.raises(UsageError):
        parse_custom_table("element 0 even 0\n[0, 0] = 1\n")
    with pytest.raises(UsageError):
        parse_custom_table("element 1 even 0\n")
    with pytest.raises(UsageError):
        CustomAlgebra(["a", "b"], [0, 0], [0, 0], {(0, 1): {0: 1}, (1, 0): {0: 1}})


def test_custom_jacobi_violation():
    # [a,b]=b, [a,c]=c, [b,c]=a fails Jacobi
    alg = CustomAlgebra(["a", "b", "c"], [0, 0, 0], [0, 0, 0],
                        {(0, 1): {1: 1}, (0, 2): {2: 1}, (1, 2): {0: 1}})
    rep = verify_algebra(build_slice(alg))
    assert not rep.ok and rep.violations[0][0] == "Jacobi"


# properties -------------------------------------------------------------------------

def random_element(fam, grade, rng):
    basis = fam.basis(grade)
    if not basis:
        return None
    par = rng.choice([p for _, p in basis])
    out = fam.zero()
    for p, q in basis:
        if q == par:
            out = out + p.scale(fam.field(rng.randint(-3, 3)))
    return None if out.is_zero() else out


@pytest.mark.parametrize("kind,params,lo,hi", CORPUS)
def test_bracket_parity_and_constraint_closure(kind, params, lo, hi):
    fam = corpus_family(kind, params)
    rng = random.Random(hash(kind) & 0xffff)
    shift = 1 if fam.odd_bracket else 0
    special = kind in ("S", "SB", "SLe", "SM")
    for _ in range(40):
        f = random_element(fam, rng.randint(lo, hi), rng)
        g = random_element(fam, rng.randint(lo, hi), rng)
        if f is None or g is None:
            continue
        h = fam.bracket(f, g)
        if h.is_zero():
            continue
        assert h.parity() == (f.parity() + g.parity() + shift) % 2
        assert h.parity() != MIXED
        if special:
            assert fam.constraint_operator(h).is_zero()


@pytest.mark.parametrize("kind,params,lo,hi", CORPUS)
def test_dimensions_agree_mod_p(kind, params, lo, hi):
    a, b = corpus_family(kind, params), corpus_family(kind, params, P46337)
    for g in range(lo, hi + 1):
        assert [q for _, q in a.basis(g)] == [q for _, q in b.basis(g)]


@pytest.mark.parametrize("kind,params,lo,hi", CORPUS)
def test_table_reduces_mod_p(kind, params, lo, hi):
    sq = build_slice(corpus_family(kind, params), lo, hi)
    sp = build_slice(corpus_family(kind, params, P46337), lo, hi)
    assert sq.flagged == sp.flagged
    for key in set(sq.table) | set(sp.table):
        red = {k: P46337(c) for k, c in sq.table.get(key, ())}
        red = {k: c for k, c in red.items() if c}
        assert red == dict(sp.table.get(key, ()))
