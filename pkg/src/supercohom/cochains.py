"""Cochain complexes of a graded Lie superalgebra slice.

Coordinates.  A cochain C in C^k is determined by its values on canonical
argument tuples; ``x_K = C(K)`` are its *value coordinates*.  The coboundary
map d^k is assembled in these coordinates from

    (dC)(a_0..a_k) = sum_i  e_i (-1)^{p(a_i) p(C)} a_i . C(a_0..^a_i..a_k)
                   - sum_{i<j} e_ij C([a_i, a_j], a_0..^a_i..^a_j..a_k)

where e_i (e_ij) is the super sign of moving a_i (then a_j) to the front.
This is the matrix behind "x = b t" (coboundaries) and "Z x = 0" (cocycle
equations).

Notation.  An expression ``sum c_K C(K)`` such as ``C(X,1,x^2) - C(X,x,x)``
is read the way the cohomology tables print it: as the linear form
x -> sum c_K x_K on value coordinates, equivalently the element
sum c_K b_K1 ^ ... ^ b_Kk of the super exterior algebra of A (odd elements
commute, so ``C(TX, TX)`` is a genuine square).  Its differential is the
transpose of the coboundary map, a cocycle is an expression annihilating
all coboundaries, and a coboundary is a combination of rows of d^k.  The
resulting quotient is dual to Z^k/B^k and has the same dimension.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple

from .algebras import AlgebraSlice, OutOfRangeError, UsageError
from .linalg import ExactMatrix, InternalConsistencyError

TRIVIAL, ADJOINT, COADJOINT = "Trivial", "Adjoint", "Coadjoint"


class WindowError(OutOfRangeError):
    """The slice does not cover the argument grades a cochain space needs."""


@dataclass(frozen=True)
class ModuleSpec:
    kind: str = TRIVIAL

    def __post_init__(self):
        if self.kind not in (TRIVIAL, ADJOINT, COADJOINT):
            raise UsageError(f"unknown module type {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ModuleSpec":
        t = text.strip().lower()
        for k in (TRIVIAL, ADJOINT, COADJOINT):
            if t == k.lower():
                return cls(k)
        raise UsageError(f"unknown module type {text!r}")

    @property
    def trivial(self) -> bool:
        return self.kind == TRIVIAL

    def check(self, sl: AlgebraSlice):
        if not self.trivial and not sl.family.finite:
            raise UsageError(f"{self.kind} module needs a finite-dimensional algebra; "
                             f"{sl.family.label} is infinite-dimensional")

    def dim(self, sl: AlgebraSlice) -> int:
        return 1 if self.trivial else len(sl.basis)

    def parity(self, sl: AlgebraSlice, m: int) -> int:
        return 0 if self.trivial else sl.basis[m].parity

    def grade(self, sl: AlgebraSlice, m: int) -> int:
        if self.trivial:
            return 0
        g = sl.basis[m].grade
        return g if self.kind == ADJOINT else -g

    def name(self, sl: AlgebraSlice, m: int, style="payload", latex=False) -> str:
        if self.trivial:
            return ""
        b = sl.basis[m]
        if style == "payload" and b.payload is not None:
            base = sl.family.format_payload(b.payload, latex=latex)
        else:
            base = b.name
        return base if self.kind == ADJOINT else (f"{base}^*" if not latex else f"{base}^{{*}}")


TRIVIAL_MODULE = ModuleSpec(TRIVIAL)


class CochainKey(NamedTuple):
    args: tuple
    m: int = 0


class SliceData:
    """Per-slice lookup tables shared by all cochain computations."""

    def __init__(self, sl: AlgebraSlice):
        self.slice = sl
        n = len(sl.basis)
        self.n = n
        self.par = [b.parity for b in sl.basis]
        self.grade = [b.grade for b in sl.basis]
        # canonical position: evens before odds, then by id
        self.ck = [self.par[i] * n + i for i in range(n)]
        self.evens = [i for i in range(n) if not self.par[i]]
        self.odds = [i for i in range(n) if self.par[i]]
        self._rev = None
        self._coad = None

    def canonicalize(self, args):
        """(sign, canonical tuple) or None when an even id repeats."""
        par, ck = self.par, self.ck
        sign = 1
        n = len(args)
        for i in range(n):
            a = args[i]
            for j in range(i + 1, n):
                b = args[j]
                if ck[a] > ck[b]:
                    if not (par[a] and par[b]):
                        sign = -sign
                elif a == b and not par[a]:
                    return None
        return sign, tuple(sorted(args, key=ck.__getitem__))

    def insert(self, b: int, rest: tuple):
        """Canonicalize (b,) + rest for an already canonical ``rest``."""
        par, ck = self.par, self.ck
        pb = par[b]
        cb = ck[b]
        sign = 1
        pos = 0
        for l in rest:
            cl = ck[l]
            if cl < cb:
                if not (pb and par[l]):
                    sign = -sign
                pos += 1
            elif cl == cb:
                if not pb:
                    return None
                break
            else:
                break
        return sign, rest[:pos] + (b,) + rest[pos:]

    def reverse_table(self):
        """b -> list of (i, j, c) over canonical pairs i <= j with c^b_ij != 0."""
        if self._rev is None:
            rev = {}
            ck = self.ck
            for (i, j), terms in self.slice.table.items():
                if ck[i] > ck[j]:
                    continue
                for b, c in terms:
                    rev.setdefault(b, []).append((i, j, c))
            self._rev = rev
        return self._rev

    def coadjoint_into(self):
        """(a, target l) -> list of (source m, coeff) with a . mu_m = sum coeff mu_l."""
        if self._coad is None:
            F = self.slice.field
            out = {}
            par = self.par
            # a . mu_l = sum_b -(-1)^{p(a)p(l)} c^l_{ab} mu_b
            for (a, b), terms in self.slice.table.items():
                for l, c in terms:
                    s = F(1) if par[a] and par[l] else F(-1)
                    out.setdefault((a, b), []).append((l, F.mul(s, c)))
            self._coad = out
        return self._coad


def slice_data(sl: AlgebraSlice) -> SliceData:
    d = sl.__dict__.get("_cochain_data")
    if d is None:
        d = SliceData(sl)
        sl.__dict__["_cochain_data"] = d
    return d


def canonicalize(sl: AlgebraSlice, args):
    """Canonical (sign, key args) for a tuple of basis ids, or None (repeated even id)."""
    return slice_data(sl).canonicalize(tuple(args))


# ---------------------------------------------------------------------------
# module actions


def module_action(sl: AlgebraSlice, module: ModuleSpec, a: int, m: int) -> dict:
    """a . e_m as {index: coeff}."""
    if module.trivial:
        return {}
    module.check(sl)
    F = sl.field
    if module.kind == ADJOINT:
        return dict(sl.bracket_ids(a, m))
    out = {}
    s = F(1) if sl.basis[a].parity and sl.basis[m].parity else F(-1)
    for b in range(len(sl.basis)):
        for l, c in sl.bracket_ids(a, b):
            if l == m:
                out[b] = F.add(out.get(b, F.zero), F.mul(s, c))
    return {k: v for k, v in out.items() if not F.is_zero(v)}


def _action_into(sl: AlgebraSlice, module: ModuleSpec):
    """(a, target m) -> list of (source m', coeff) with a . e_m' having coeff at e_m."""
    data = slice_data(sl)
    if module.kind == ADJOINT:
        cache = sl.__dict__.setdefault("_adj_into", None)
        if cache is None:
            cache = {}
            for (a, m2), terms in sl.table.items():
                for m, c in terms:
                    cache.setdefault((a, m), []).append((m2, c))
            sl.__dict__["_adj_into"] = cache
        return cache
    return data.coadjoint_into()


# ---------------------------------------------------------------------------
# bases and windows


def required_window(sl: AlgebraSlice, module: ModuleSpec, k: int, g: int):
    """Argument grade range [lo, hi] needed for C^k_g."""
    gmin = sl.min_grade
    fam = sl.family
    top = 0
    if not module.trivial:
        top = max((module.grade(sl, m) for m in range(module.dim(sl))), default=0)
    hi = g + top - (k - 1) * gmin
    if fam.kind == "Custom" or fam.finite:
        hi = min(hi, sl.hi)
    return gmin, hi


def check_window(sl: AlgebraSlice, module: ModuleSpec, k: int, g: int) -> None:
    if k == 0:
        return
    lo, hi = required_window(sl, module, k, g)
    if sl.lo > lo or sl.hi < hi:
        raise WindowError(f"C^{k}_{g} needs argument grades [{lo}, {hi}], "
                          f"slice covers [{sl.lo}, {sl.hi}]")


def cochain_basis(sl: AlgebraSlice, module: ModuleSpec, k: int, g: int, parity: int,
                  check: bool = True) -> list:
    """Canonical keys of C^k with grade g and the given parity, in sorted order."""
    module.check(sl)
    if check:
        check_window(sl, module, k, g)
    data = slice_data(sl)
    out = []
    for m in range(module.dim(sl)):
        pm = module.parity(sl, m)
        target = g + module.grade(sl, m)
        for args in _arg_tuples(data, k, target, (parity - pm) & 1):
            out.append(CochainKey(args, m))
    out.sort()
    return out


def _arg_tuples(data: SliceData, k: int, total: int, n_odd_parity: int):
    grade = data.grade
    evens, odds = data.evens, data.odds
    gmin_e = [grade[i] for i in evens]
    gmin_o = [grade[i] for i in odds]
    gmax_e = max(gmin_e, default=0)
    gmax_o = max(gmin_o, default=0)
    results = []

    def odd_multisets(start, r, rem, acc):
        if r == 0:
            if rem == 0:
                yield tuple(acc)
            return
        for idx in range(start, len(odds)):
            gi = gmin_o[idx]
            if r * gi > rem:
                break  # grades are sorted within the block
            if gi + (r - 1) * gmax_o < rem:
                continue
            acc.append(odds[idx])
            yield from odd_multisets(idx, r - 1, rem - gi, acc)
            acc.pop()

    for n_odd in range(k + 1):
        if n_odd % 2 != n_odd_parity:
            continue
        n_even = k - n_odd
        if n_even > len(evens) or (n_odd and not odds):
            continue
        for eargs, rem in _bounded_even(evens, gmin_e, gmax_e, n_even, total, n_odd, gmin_o, gmax_o):
            if n_odd == 0:
                if rem == 0:
                    results.append(eargs)
                continue
            for oargs in odd_multisets(0, n_odd, rem, []):
                results.append(eargs + oargs)
    return results


def _bounded_even(evens, ge, gmax_e, r_total, total, n_odd, go, gmax_o):
    """Strictly increasing even tuples whose grade sum leaves a feasible remainder."""
    omin = go[0] * n_odd if (n_odd and go) else 0
    omax = gmax_o * n_odd if n_odd else 0
    out = []
    acc = []

    def rec(start, r, rem):
        if r == 0:
            if omin <= rem <= omax:
                out.append((tuple(acc), rem))
            return
        for idx in range(start, len(evens) - r + 1):
            gi = ge[idx]
            # the remaining r - 1 evens have grade >= gi
            if gi * r + omin > rem:
                break
            if gi + (r - 1) * gmax_e + omax < rem:
                continue
            acc.append(evens[idx])
            rec(idx + 1, r - 1, rem - gi)
            acc.pop()

    rec(0, r_total, total)
    return out


# ---------------------------------------------------------------------------
# differential


def _row(sl: AlgebraSlice, module: ModuleSpec, key: CochainKey, into=None) -> dict:
    """Row of the coboundary map at a canonical key: {lower key: coefficient}."""
    F = sl.field
    data = slice_data(sl)
    par = data.par
    flagged = sl.flagged
    table = sl.table
    A, m = key
    n = len(A)
    row = {}
    pre = [0] * (n + 1)
    for i in range(n):
        pre[i + 1] = pre[i] + par[A[i]]

    def put(col_key, coef):
        v = F.add(row.get(col_key, F.zero), coef)
        if F.is_zero(v):
            row.pop(col_key, None)
        else:
            row[col_key] = v

    for i in range(n):
        ai = A[i]
        pi = par[ai]
        eps_i = -1 if (i + pi * pre[i]) & 1 else 1
        rest_i = A[:i] + A[i + 1:]
        if into is not None:
            n_odd_rest = pre[n] - pi
            for m2, c in into.get((ai, m), ()):
                pc = (n_odd_rest + module.parity(sl, m2)) & 1
                s = eps_i * (-1 if pi and pc else 1)
                put(CochainKey(rest_i, m2), c if s > 0 else F.neg(c))
        for j in range(i + 1, n):
            aj = A[j]
            if (ai, aj) in flagged:
                raise WindowError(f"bracket of {sl.basis[ai].name} and {sl.basis[aj].name} "
                                  "is outside the slice")
            terms = table.get((ai, aj))
            if not terms:
                continue
            pj = par[aj]
            eps_ij = eps_i * (-1 if ((j - 1) + pj * (pre[j] - pi)) & 1 else 1)
            rest = rest_i[:j - 1] + rest_i[j:]
            for b, c in terms:
                r = data.insert(b, rest)
                if r is None:
                    continue
                s, args = r
                s = -eps_ij * s
                put(CochainKey(args, m), c if s > 0 else F.neg(c))
    return row


def differential_matrix(sl: AlgebraSlice, module: ModuleSpec, k: int, g: int, parity: int,
                        src=None, dst=None) -> ExactMatrix:
    """d^k : C^k_(g, parity) -> C^{k+1}_(g, parity) in value coordinates.

    Rows are indexed by the C^{k+1} keys (``M.row_keys``), columns by the C^k
    keys (``M.col_keys``).
    """
    F = sl.field
    if src is None:
        src = cochain_basis(sl, module, k, g, parity)
    if dst is None:
        dst = cochain_basis(sl, module, k + 1, g, parity)
    col_index = {key: i for i, key in enumerate(src)}
    into = None if module.trivial else _action_into(sl, module)
    rows = []
    for key in dst:
        row = {}
        for ck, v in _row(sl, module, key, into).items():
            c = col_index.get(ck)
            if c is None:
                raise InternalConsistencyError(f"differential produced {ck} outside C^{k}")
            row[c] = v
        rows.append(row)
    M = ExactMatrix(len(dst), len(src), F, rows)
    M.row_keys = dst
    M.col_keys = src
    return M


# ---------------------------------------------------------------------------
# cochains


class Cochain:
    """A homogeneous expression sum c_K C(K) over canonical keys."""

    def __init__(self, sl: AlgebraSlice, module: ModuleSpec, degree: int, coeffs: dict | None = None):
        self.slice = sl
        self.module = module
        self.degree = degree
        F = sl.field
        self.coeffs = {}
        for key, c in (coeffs or {}).items():
            if not isinstance(key, CochainKey):
                key = CochainKey(tuple(key[0]), key[1]) if len(key) == 2 and isinstance(key[0], tuple) \
                    else CochainKey(tuple(key), 0)
            if len(key.args) != degree:
                raise UsageError(f"key {key} has the wrong degree for a {degree}-cochain")
            c = F(c) if not isinstance(c, int) else F(c)
            if not F.is_zero(c):
                self.coeffs[key] = F.add(self.coeffs.get(key, F.zero), c)
        self.coeffs = {k: v for k, v in self.coeffs.items() if not F.is_zero(v)}
        self._homogeneity()

    @classmethod
    def from_args(cls, sl, module, terms, degree=None):
        """Build from (coeff, args[, m]) with arbitrary argument order."""
        F = sl.field
        data = slice_data(sl)
        acc = {}
        for t in terms:
            c, args = t[0], tuple(t[1])
            m = t[2] if len(t) > 2 else 0
            if degree is None:
                degree = len(args)
            r = data.canonicalize(args)
            if r is None:
                continue
            s, key = r
            c = F(c)
            if s < 0:
                c = F.neg(c)
            k = CochainKey(key, m)
            acc[k] = F.add(acc.get(k, F.zero), c)
        return cls(sl, module, degree if degree is not None else 0, acc)

    def _homogeneity(self):
        sl, mod = self.slice, self.module
        gs, ps = set(), set()
        for key in self.coeffs:
            gs.add(sum(sl.basis[i].grade for i in key.args) - mod.grade(sl, key.m))
            ps.add((sum(sl.basis[i].parity for i in key.args) + mod.parity(sl, key.m)) & 1)
        if len(gs) > 1 or len(ps) > 1:
            raise UsageError("cochain is not homogeneous in grade and parity")
        self.grade = gs.pop() if gs else None
        self.parity = ps.pop() if ps else None

    @property
    def field(self):
        return self.slice.field

    def is_zero(self):
        return not self.coeffs

    def _like(self, coeffs):
        c = Cochain.__new__(Cochain)
        c.slice, c.module, c.degree = self.slice, self.module, self.degree
        c.coeffs = coeffs
        c._homogeneity()
        return c

    def __add__(self, other):
        self._compatible(other)
        F = self.field
        out = dict(self.coeffs)
        F.axpy(out, F.one, other.coeffs)
        return self._like(out)

    def __sub__(self, other):
        self._compatible(other)
        F = self.field
        out = dict(self.coeffs)
        F.axpy(out, F.neg(F.one), other.coeffs)
        return self._like(out)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        F = self.field
        c = F(c)
        if F.is_zero(c):
            return self._like({})
        return self._like({k: F.mul(c, v) for k, v in self.coeffs.items()})

    def _compatible(self, other):
        if other.slice is not self.slice or other.module != self.module or other.degree != self.degree:
            raise UsageError("cochains from different complexes")

    def __eq__(self, other):
        return (isinstance(other, Cochain) and self.degree == other.degree
                and self.module == other.module and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.degree, frozenset(self.coeffs.items())))

    def vector(self, keys) -> dict:
        """Coordinates against an ordered key list."""
        idx = {k: i for i, k in enumerate(keys)}
        out = {}
        for k, v in self.coeffs.items():
            if k not in idx:
                raise WindowError(f"cochain term {k} is not in the given basis")
            out[idx[k]] = v
        return out

    @classmethod
    def from_vector(cls, sl, module, degree, keys, vec: dict):
        c = cls.__new__(cls)
        c.slice, c.module, c.degree = sl, module, degree
        c.coeffs = {keys[i]: v for i, v in vec.items() if not sl.field.is_zero(v)}
        c._homogeneity()
        return c

    def sorted_items(self):
        return sorted(self.coeffs.items())

    def to_text(self, style: str = "payload", latex: bool = False) -> str:
        return format_cochain(self, style=style, latex=latex)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Cochain({self.to_text()!r})"


def apply_differential(sl: AlgebraSlice, module: ModuleSpec, C: Cochain) -> Cochain:
    """Differential of an expression in table notation (degree k -> k - 1).

    This is the transpose of the coboundary map: each C(K) is sent to the row
    of d^{k-1} at K.  No basis is enumerated and no matrix is built.
    """
    F = sl.field
    k = C.degree
    if k == 0 or C.is_zero():
        return Cochain(sl, module, max(k - 1, 0), {})
    into = None if module.trivial else _action_into(sl, module)
    out = {}
    for key, coef in C.coeffs.items():
        F.axpy(out, coef, _row(sl, module, key, into))
    res = Cochain.__new__(Cochain)
    res.slice, res.module, res.degree = sl, module, k - 1
    res.coeffs = out
    res._homogeneity()
    return res


def wedge(C1: Cochain, C2: Cochain) -> Cochain:
    """Exterior product of table-notation expressions (trivial module only).

    ``C(a) ^ C(b) = C(a, b)``, reordered with the super sign; odd arguments
    may repeat, so ``C(TX) ^ C(TX) = C(TX, TX)``.
    """
    if not (C1.module.trivial and C2.module.trivial):
        raise UsageError("wedge product is defined for the trivial module only")
    if C1.slice is not C2.slice:
        raise UsageError("cochains from different slices")
    sl = C1.slice
    F = sl.field
    data = slice_data(sl)
    out = {}
    for k1, a in C1.coeffs.items():
        for k2, b in C2.coeffs.items():
            r = data.canonicalize(k1.args + k2.args)
            if r is None:
                continue
            s, args = r
            v = F.mul(a, b)
            key = CochainKey(args, 0)
            w = F.add(out.get(key, F.zero), v if s > 0 else F.neg(v))
            if F.is_zero(w):
                out.pop(key, None)
            else:
                out[key] = w
    res = Cochain.__new__(Cochain)
    res.slice, res.module, res.degree = sl, C1.module, C1.degree + C2.degree
    res.coeffs = out
    res._homogeneity()
    return res


# ---------------------------------------------------------------------------
# genuine cochains: the same coordinates read as values C(K)


def apply_coboundary(sl: AlgebraSlice, module: ModuleSpec, C: Cochain) -> Cochain:
    """dC for a cochain given by its values (degree k -> k + 1)."""
    if C.is_zero():
        return Cochain(sl, module, C.degree + 1, {})
    k, g, parity = C.degree, C.grade, C.parity
    src = cochain_basis(sl, module, k, g, parity)
    M = differential_matrix(sl, module, k, g, parity, src=src)
    return Cochain.from_vector(sl, module, k + 1, M.row_keys, M.matvec(C.vector(src)))


def _odd_weight(sl: AlgebraSlice, args: tuple) -> int:
    # product of multiplicity factorials of repeated (odd) arguments
    w, run = 1, 1
    for a, b in zip(args, args[1:]):
        run = run + 1 if a == b else 1
        w *= run
    return w


def cup(C1: Cochain, C2: Cochain) -> Cochain:
    """Product of cochains given by values (trivial module only).

    Values are converted to coefficients of exterior monomials in the dual
    basis (dividing by the factorials of repeated odd arguments), multiplied
    there, and converted back.  The coboundary is a derivation of this
    product, so it descends to cohomology.
    """
    if not (C1.module.trivial and C2.module.trivial):
        raise UsageError("cup product is defined for the trivial module only")
    if C1.slice is not C2.slice:
        raise UsageError("cochains from different slices")
    sl = C1.slice
    F = sl.field

    def mono(C):
        return {k: F.div(v, F(_odd_weight(sl, k.args))) for k, v in C.coeffs.items()}

    m1, m2 = C1._like(mono(C1)), C2._like(mono(C2))
    prod = wedge(m1, m2)
    return prod._like({k: F.mul(v, F(_odd_weight(sl, k.args))) for k, v in prod.coeffs.items()})


# ---------------------------------------------------------------------------
# text forms


def _arg_text(sl, i, style, latex):
    b = sl.basis[i]
    if style == "payload" and b.payload is not None:
        return sl.family.format_payload(b.payload, latex=latex)
    return b.name


def format_key(sl: AlgebraSlice, module: ModuleSpec, key: CochainKey, style="payload",
               latex=False) -> str:
    args = ",".join(_arg_text(sl, i, style, latex) for i in key.args)
    if not module.trivial:
        args += " | " + module.name(sl, key.m, style=style, latex=latex)
    if latex:
        return f"C\\left({args}\\right)"
    return f"C({args})"


def format_cochain(C: Cochain, style: str = "payload", latex: bool = False) -> str:
    F = C.field
    if not C.coeffs:
        return "0"
    parts = []
    for key, c in C.sorted_items():
        s = F.format(c)
        neg = s.startswith("-")
        mag = s[1:] if neg else s
        body = format_key(C.slice, C.module, key, style=style, latex=latex)
        if mag != "1":
            if latex and "/" in mag:
                n, d = mag.split("/")
                mag = f"\\frac{{{n}}}{{{d}}}"
            body = f"{mag}{'' if latex else '*'}{body}" if not latex else f"{mag}\\,{body}"
        parts.append((neg, body))
    text = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        text += (" - " if neg else " + ") + body
    return text


def _split_top(text: str, sep: str) -> list:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def _resolve_arg(sl: AlgebraSlice, text: str) -> dict:
    """An argument as {basis id: coeff}: a name, a basis payload, or any
    grade-homogeneous element of the slice (expanded linearly)."""
    t = text.strip()
    for b in sl.basis:
        if b.name == t:
            return {b.id: sl.field.one}
    fam = sl.family
    if fam.kind == "Custom":
        raise UsageError(f"unknown basis element {t!r}")
    try:
        p = fam.parse_payload(t)
    except Exception as exc:
        raise UsageError(f"cannot read cochain argument {t!r}: {exc}") from None
    lookup = sl.__dict__.get("_payload_ids")
    if lookup is None:
        lookup = {fam.format_payload(b.payload): b.id for b in sl.basis}
        sl.__dict__["_payload_ids"] = lookup
    i = lookup.get(fam.format_payload(p))
    if i is not None:
        return {i: sl.field.one}
    try:
        coords = sl.expand(p)
    except Exception as exc:
        raise UsageError(f"{t!r} is not an element of the slice: {exc}") from None
    if not coords:
        raise UsageError(f"cochain argument {t!r} is zero in the algebra")
    return coords


def _expand_args(F, parts: list) -> list:
    """Multilinear expansion of a list of {id: coeff} into (coeff, ids)."""
    out = [(F.one, ())]
    for part in parts:
        out = [(F.mul(c, a), ids + (i,)) for c, ids in out for i, a in part.items()]
    return out


_TERM = re.compile(r"\s*([+-])?\s*([0-9]+(?:/[0-9]+)?)?\s*\*?\s*C\s*\(")


def parse_cochain(text: str, sl: AlgebraSlice, module: ModuleSpec = TRIVIAL_MODULE) -> Cochain:
    """Read ``C(X,1,x^2) - C(X,x,x)``, ``-1/2*C(...)``; args are names or payloads."""
    F = sl.field
    t = text.replace("−", "-").strip()
    if t == "0":
        raise UsageError("the zero cochain has no degree; construct it directly")
    pos = 0
    terms = []
    while pos < len(t):
        m = _TERM.match(t, pos)
        if not m:
            raise UsageError(f"cannot parse cochain near {t[pos:pos + 20]!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = F.parse(m.group(2)) if m.group(2) else F.one
        if sign < 0:
            coef = F.neg(coef)
        depth = 1
        i = m.end()
        while i < len(t) and depth:
            if t[i] == "(":
                depth += 1
            elif t[i] == ")":
                depth -= 1
            i += 1
        if depth:
            raise UsageError("unbalanced parentheses in cochain")
        inner = t[m.end():i - 1]
        mod_idx = 0
        if "|" in inner:
            inner, mtxt = inner.rsplit("|", 1)
            mtxt = mtxt.strip()
            dual = mtxt.endswith("^*")
            if dual:
                mtxt = mtxt[:-2]
            mparts = _resolve_arg(sl, mtxt)
            if len(mparts) != 1:
                raise UsageError(f"module element {mtxt!r} must be a single basis element")
            (mod_idx, mc), = mparts.items()
            coef = F.mul(coef, mc)
        parts = [_resolve_arg(sl, a) for a in _split_top(inner, ",")] if inner.strip() else []
        for c, args in _expand_args(F, parts):
            terms.append((F.mul(coef, c), args, mod_idx))
        pos = i
        while pos < len(t) and t[pos].isspace():
            pos += 1
    if not terms:
        raise UsageError("empty cochain")
    degree = len(terms[0][1])
    if any(len(a) != degree for _, a, _ in terms):
        raise UsageError("cochain terms have different degrees")
    return Cochain.from_args(sl, module, terms, degree)


__all__ = [
    "ADJOINT", "COADJOINT", "TRIVIAL", "TRIVIAL_MODULE", "Cochain", "CochainKey", "ModuleSpec",
    "WindowError", "apply_coboundary", "apply_differential", "cup", "canonicalize", "check_window", "cochain_basis",
    "differential_matrix", "format_cochain", "format_key", "module_action",
    "parse_cochain", "required_window", "wedge",
]
