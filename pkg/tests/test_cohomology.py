import random

import pytest
import sympy

from refdata import (A5_0, A5_0_ALSO_1, A5_0_ALSO_4, A5_0_PAYLOAD, B1_A3, B1_B3, LE1_A2, LE1_B3, M1_A3,
                       SB1_FORMS, graded_family, graded_slice, sle2_slice)
from supercohom.algebras import CustomAlgebra, Family, UsageError, build_slice
from supercohom.cochains import (TRIVIAL_MODULE as T, Cochain, ModuleSpec, apply_coboundary, apply_differential,
                                 cochain_basis, differential_matrix, parse_cochain)
from supercohom.cohomology import (alternative_forms, class_match, compute_cohomology, is_closed, is_coboundary,
                                   is_cocycle, is_exact, scan, window_for)
from supercohom.linalg import kernel_basis
from supercohom.scalars import PrimeField

P46337 = PrimeField(46337)


def sympy_rank(M):
    if not M.rows or not M.cols:
        return 0
    dense = [[sympy.Rational(int(M.data[i].get(j, 0).numerator), int(M.data[i].get(j, 0).denominator))
              if j in M.data[i] else 0 for j in range(M.cols)] for i in range(M.rows)]
    return sympy.Matrix(dense).rank()


# dimensions ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def sle2_k5():
    sl = sle2_slice()
    return compute_cohomology(sl.family, T, 5, 0, slice=sl)


def test_sle2_degree_five(sle2_k5):
    r = sle2_k5
    assert (r.even_dim, r.odd_dim) == (0, 1)
    sl = r.slice
    a5 = parse_cochain(A5_0, sl)
    assert class_match(sl, T, r.representatives[0], a5) is not None
    assert is_cocycle(sl, T, a5) and not is_coboundary(sl, T, a5)[0]


def test_sle2_cochain_space_sizes(sle2_k5):
    # C^4 has the 246 even / 245 odd coboundary parameters t_1..t_n
    sl = sle2_k5.slice
    assert len(cochain_basis(sl, T, 4, 0, 0)) == 246
    assert len(cochain_basis(sl, T, 4, 0, 1)) == 245


def test_sle2_printed_forms(sle2_k5):
    sl = sle2_k5.slice
    a5 = parse_cochain(A5_0, sl)
    assert parse_cochain(A5_0_PAYLOAD, sl) == a5
    also1 = parse_cochain(A5_0_ALSO_1, sl)
    ok, cert = is_coboundary(sl, T, also1 - a5)
    assert ok and apply_differential(sl, T, cert) == also1 - a5
    # form (4) is the negative of the class in these conventions
    assert class_match(sl, T, parse_cochain(A5_0_ALSO_4, sl), a5) == -1


def test_sle2_alternative_forms(sle2_k5):
    forms = alternative_forms(sle2_k5, 0)
    assert len(forms) >= 2
    rep = sle2_k5.representatives[0]
    for f in forms:
        assert is_cocycle(f.slice, T, f)
        assert class_match(f.slice, T, f, rep) is not None


def test_m1_degree_three():
    sl = graded_slice("M", 1)
    r = compute_cohomology(sl.family, T, 3, 0, slice=sl)
    assert r.dim == 1
    forms = [parse_cochain(f, sl) for f in M1_A3]
    for f in forms:
        assert is_cocycle(sl, T, f)
        assert class_match(sl, T, f, forms[0]) is not None
    assert class_match(sl, T, forms[0], r.representatives[0]) is not None
    assert len(alternative_forms(r, 0)) >= 2


def test_le1_degree_two():
    sl = graded_slice("Le", 1)
    r = compute_cohomology(sl.family, T, 2, 0, slice=sl)
    assert r.dim == 1
    assert class_match(sl, T, r.representatives[0], parse_cochain(LE1_A2, sl)) is not None


def test_b1_degree_three():
    sl = graded_slice("B", 1)
    r = compute_cohomology(sl.family, T, 3, 0, slice=sl)
    # a3 has only even arguments, b3 one odd argument
    assert (r.even_dim, r.odd_dim) == (1, 1)
    printed = [parse_cochain(B1_A3, sl), parse_cochain(B1_B3, sl)]
    # the two printed classes and the computed ones span the same quotient
    for p in printed:
        assert is_cocycle(sl, T, p) and not is_coboundary(sl, T, p)[0]
    assert class_match(sl, T, printed[0], printed[1]) is None
    assert {str(c) for c in r.representatives} == {B1_A3, B1_B3}


def test_le1_b3_is_a_class():
    sl = graded_slice("Le", 1)
    C = parse_cochain(LE1_B3, sl)
    assert is_cocycle(sl, T, C) and not is_coboundary(sl, T, C)[0]


def test_zero_result_has_no_alternatives():
    sl = graded_slice("B", 1)
    r = compute_cohomology(sl.family, T, 2, 1, slice=sl)
    assert r.dim == 0 and alternative_forms(r, 0) == []


@pytest.mark.parametrize("kind,k,g", [("B", 3, 0), ("SB", 3, 1), ("SM", 2, 0), ("Le", 3, 0), ("M", 2, 0)])
def test_dimension_formula_against_sympy(kind, k, g):
    sl = graded_slice(kind, 1)
    r = compute_cohomology(sl.family, T, k, g, slice=sl)
    for p, got in ((0, r.even_dim), (1, r.odd_dim)):
        Z = differential_matrix(sl, T, k, g, p)
        b = differential_matrix(sl, T, k - 1, g, p)
        assert got == Z.cols - sympy_rank(Z) - sympy_rank(b)


# cocycle and coboundary tests ---------------------------------------------------------

def test_is_cocycle_examples():
    sb = graded_slice("SB", 1)
    assert is_cocycle(sb, T, parse_cochain(SB1_FORMS["a3_3"], sb))
    assert not is_cocycle(sb, T, parse_cochain("C(X,x,x)", sb))
    b = graded_slice("B", 1)
    assert is_cocycle(b, T, parse_cochain(B1_A3, b))


def test_boundaries_are_coboundaries():
    sl = graded_slice("SB", 1)
    rng = random.Random(2)
    hits = 0
    for k in (1, 2, 3):
        for g in (-1, 0, 1):
            for p in (0, 1):
                keys = cochain_basis(sl, T, k + 1, g, p)
                if not keys:
                    continue
                Tk = Cochain(sl, T, k + 1, {rng.choice(keys): 1, rng.choice(keys): 2})
                C = apply_differential(sl, T, Tk)
                if C.is_zero():
                    continue
                ok, cert = is_coboundary(sl, T, C)
                assert ok and apply_differential(sl, T, cert) == C
                hits += 1
    assert hits > 3


def test_exactness_of_genuine_cochains():
    sl = graded_slice("B", 1)
    keys = cochain_basis(sl, T, 1, 0, 0)
    t = Cochain(sl, T, 1, {keys[0]: 1})
    dt = apply_coboundary(sl, T, t)
    assert is_closed(sl, T, dt)
    ok, cert = is_exact(sl, T, dt)
    assert ok and apply_coboundary(sl, T, cert) == dt


def test_cochain_representation_has_equal_dims():
    for kind in ("B", "M", "SB"):
        sl = graded_slice(kind, 1)
        for k in (1, 2, 3):
            for g in (-1, 0, 1):
                a = compute_cohomology(sl.family, T, k, g, slice=sl)
                b = compute_cohomology(sl.family, T, k, g, slice=sl, representation="cochain")
                assert (a.even_dim, a.odd_dim) == (b.even_dim, b.odd_dim)
                for C in b.representatives:
                    assert is_closed(sl, T, C) and not is_exact(sl, T, C)[0]


def test_representatives_are_nontrivial_and_normalized():
    sl = graded_slice("SB", 1)
    for k, g in [(1, -1), (3, 1), (2, -1)]:
        r = compute_cohomology(sl.family, T, k, g, slice=sl)
        assert len(r.representatives) == r.dim
        for C in r.representatives:
            assert is_cocycle(sl, T, C) and not is_coboundary(sl, T, C)[0]
            first = C.sorted_items()[0][1]
            assert first == 1


# scans and invariants ------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["B", "Le", "M"])
def test_internal_grading_kills_nonzero_grades(kind):
    fam = graded_family(kind, 1)
    table = scan(fam, T, range(0, 5), [g for g in range(-3, 4) if g])
    assert table.nonzero() == []


def test_sb1_scan_cells():
    table = scan(graded_family("SB", 1), T, [1, 3], [-1, 1])
    assert table.dims()[(1, -1)] == (1, 0)
    assert sum(table.dims()[(3, 1)]) == 1


def test_sm1_degree_two_vanishes():
    table = scan(graded_family("SM", 1), T, [2], [0])
    assert table.dims()[(2, 0)] == (0, 0)


def test_scan_with_processes_matches_serial():
    fam = graded_family("B", 1)
    a = scan(fam, T, [2, 3], [0, 1])
    b = scan(fam, T, [2, 3], [0, 1], threads=2)
    assert a.dims() == b.dims()
    assert [[str(c) for c in r.representatives] for r in a.cells.values()] == \
        [[str(c) for c in r.representatives] for r in b.cells.values()]


def test_center_wedge_status_is_reported():
    from supercohom.cochains import wedge
    sl = graded_slice("SB", 1)
    one = parse_cochain("C(1)", sl)
    r = compute_cohomology(sl.family, T, 1, -1, slice=sl)
    w = wedge(r.representatives[0], one)
    assert is_cocycle(sl, T, w)
    assert is_coboundary(sl, T, w)[0] is False


@pytest.mark.parametrize("kind,k,g", [("B", 3, 0), ("SB", 3, 1), ("SB", 1, -1), ("M", 3, 0), ("SM", 1, -1),
                                      ("Le", 2, 0)])
def test_field_independence(kind, k, g):
    a = compute_cohomology(graded_family(kind, 1), T, k, g)
    b = compute_cohomology(graded_family(kind, 1, P46337), T, k, g)
    assert (a.even_dim, a.odd_dim) == (b.even_dim, b.odd_dim)


def test_results_are_deterministic():
    fam = graded_family("M", 1)
    a = compute_cohomology(fam, T, 3, 0)
    b = compute_cohomology(graded_family("M", 1), T, 3, 0)
    assert [str(c) for c in a.representatives] == [str(c) for c in b.representatives]


# windows and errors --------------------------------------------------------------------

def test_window_formula():
    fam = graded_family("B", 1)
    assert window_for(fam, T, 3, 0) == (-1, 3)
    assert window_for(Family.create("W", 0, 2), T, 3, 0) == (None, None)
    with pytest.raises(UsageError):
        window_for(fam, ModuleSpec("Adjoint"), 2, 0)


def test_negative_degree_rejected():
    with pytest.raises(UsageError):
        compute_cohomology(graded_family("B", 1), T, -1, 0)


def test_adjoint_on_finite_algebra():
    # a 2-dim non-abelian algebra [a, b] = b: H^0(ad) is the center, which is zero
    alg = CustomAlgebra(["a", "b"], [0, 0], [0, 0], {(0, 1): {1: 1}})
    sl = build_slice(alg)
    r = compute_cohomology(alg, ModuleSpec("Adjoint"), 0, 0, slice=sl)
    assert r.dim == 0
    # trivial coefficients: H^1 = (g/[g,g])^* is one-dimensional
    assert compute_cohomology(alg, T, 1, 0, slice=sl).dim == 1


def test_sl2_cohomology():
    # sl(2) via its structure constants: H^1 = H^2 = 0, H^3 = 1 (trivial coefficients)
    alg = CustomAlgebra(["e", "h", "f"], [0, 0, 0], [0, 0, 0],
                        {(1, 0): {0: 2}, (1, 2): {2: -2}, (0, 2): {1: 1}})
    sl = build_slice(alg)
    dims = [compute_cohomology(alg, T, k, 0, slice=sl).dim for k in range(4)]
    assert dims == [1, 0, 0, 1]


def test_genuine_cocycle_kernel_matches():
    sl = graded_slice("SB", 1)
    M = differential_matrix(sl, T, 3, 1, 0)
    a31 = parse_cochain(SB1_FORMS["a3_1"], sl)
    # the printed form kills every coboundary: it lies in ker(d^2 transposed)
    b = differential_matrix(sl, T, 2, 1, 0)
    assert b.transpose().matvec(a31.vector(b.row_keys)) == {}
    assert any(True for _ in kernel_basis(b.transpose()))
    assert M.cols == len(cochain_basis(sl, T, 3, 1, 0))
