"""Superpolynomials: polynomials in even variables tensored with a Grassmann
algebra in odd variables.

A monomial is a pair ``(exps, mask)``: a tuple of non-negative exponents for the
even variables and an integer whose bit ``i`` is set iff the ``i``-th odd
variable is present.  Odd factors are implicitly ordered by variable index, so
``X_i X_j`` with ``i < j`` is the canonical form and any other product picks up
the sign of the sorting permutation.

Odd derivatives are *left* derivatives: ``d/dX_i`` first moves ``X_i`` to the
front of the monomial, then removes it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .scalars import QQ, Field

Monomial = tuple  # (exps: tuple[int, ...], mask: int)

MIXED = "mixed"


def popcount(n: int) -> int:
    return bin(n).count("1")


def odd_sign(m1: int, m2: int) -> int:
    """Sign of reordering X_{m1} X_{m2} into canonical order (masks disjoint)."""
    s = 0
    while m2:
        low = m2 & -m2
        # factors of m1 with larger index must hop over this factor of m2
        s += popcount(m1 & ~((low << 1) - 1))
        m2 ^= low
    return -1 if s & 1 else 1


def mono_mul(m1: Monomial, m2: Monomial):
    """Product of two monomials as ``(sign, monomial)``, or ``None`` if zero."""
    e1, o1 = m1
    e2, o2 = m2
    if o1 & o2:
        return None
    return odd_sign(o1, o2), (tuple(a + b for a, b in zip(e1, e2)), o1 | o2)


@dataclass(frozen=True)
class VariableContext:
    even_names: tuple
    odd_names: tuple
    even_grades: tuple
    odd_grades: tuple

    def __post_init__(self):
        object.__setattr__(self, "even_names", tuple(self.even_names))
        object.__setattr__(self, "odd_names", tuple(self.odd_names))
        object.__setattr__(self, "even_grades", tuple(int(g) for g in self.even_grades))
        object.__setattr__(self, "odd_grades", tuple(int(g) for g in self.odd_grades))
        names = self.even_names + self.odd_names
        if len(set(names)) != len(names):
            raise ValueError(f"variable names are not unique: {names}")
        if len(self.even_grades) != len(self.even_names):
            raise ValueError("even grading length does not match even variables")
        if len(self.odd_grades) != len(self.odd_names):
            raise ValueError("odd grading length does not match odd variables")
        for name, g in zip(self.even_names, self.even_grades):
            if g < 1:
                raise ValueError(f"even variable {name} has grade {g}; even grades must be >= 1")

    @property
    def n_even(self) -> int:
        return len(self.even_names)

    @property
    def n_odd(self) -> int:
        return len(self.odd_names)

    def one(self) -> Monomial:
        return ((0,) * self.n_even, 0)

    def even_var(self, i: int) -> Monomial:
        e = [0] * self.n_even
        e[i] = 1
        return (tuple(e), 0)

    def odd_var(self, i: int) -> Monomial:
        return ((0,) * self.n_even, 1 << i)

    def mono_grade(self, m: Monomial) -> int:
        exps, mask = m
        g = sum(e * w for e, w in zip(exps, self.even_grades))
        i = 0
        while mask:
            if mask & 1:
                g += self.odd_grades[i]
            mask >>= 1
            i += 1
        return g

    def min_odd_grade_sum(self) -> int:
        return sum(g for g in self.odd_grades if g < 0)


def mono_sort_key(m: Monomial):
    exps, mask = m
    return (sum(exps) + popcount(mask), exps, mask)


class SuperPolynomial:
    """Finite sum of monomials with nonzero field coefficients."""

    __slots__ = ("ctx", "field", "terms")

    def __init__(self, ctx: VariableContext, terms=None, field: Field = QQ):
        self.ctx = ctx
        self.field = field
        self.terms = {}
        if terms:
            for m, c in dict(terms).items():
                c = field(c)
                if not field.is_zero(c):
                    self.terms[m] = c

    # construction helpers
    @classmethod
    def _raw(cls, ctx, field, terms):
        p = cls.__new__(cls)
        p.ctx = ctx
        p.field = field
        p.terms = terms
        return p

    @classmethod
    def monomial(cls, ctx, m: Monomial, coeff=1, field: Field = QQ):
        return cls(ctx, {m: coeff}, field)

    @classmethod
    def constant(cls, ctx, c=1, field: Field = QQ):
        return cls(ctx, {ctx.one(): c}, field)

    @classmethod
    def var(cls, ctx, name: str, field: Field = QQ):
        if name in ctx.even_names:
            return cls(ctx, {ctx.even_var(ctx.even_names.index(name)): 1}, field)
        if name in ctx.odd_names:
            return cls(ctx, {ctx.odd_var(ctx.odd_names.index(name)): 1}, field)
        raise KeyError(name)

    def zero_like(self):
        return SuperPolynomial._raw(self.ctx, self.field, {})

    def copy(self):
        return SuperPolynomial._raw(self.ctx, self.field, dict(self.terms))

    # ring operations
    def _check(self, other):
        if self.ctx != other.ctx:
            raise ValueError("superpolynomials over different variable contexts")
        if self.field != other.field:
            raise ValueError("superpolynomials over different fields")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        self.field.axpy(out, self.field.one, other.terms)
        return SuperPolynomial._raw(self.ctx, self.field, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        self.field.axpy(out, self.field(-1), other.terms)
        return SuperPolynomial._raw(self.ctx, self.field, out)

    def __neg__(self):
        F = self.field
        return SuperPolynomial._raw(self.ctx, F, {m: F.neg(c) for m, c in self.terms.items()})

    def scale(self, c):
        F = self.field
        c = F(c)
        if F.is_zero(c):
            return self.zero_like()
        return SuperPolynomial._raw(self.ctx, F, {m: F.mul(c, v) for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, SuperPolynomial):
            return self.scale(other)
        self._check(other)
        F = self.field
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = mono_mul(m1, m2)
                if r is None:
                    continue
                s, m = r
                c = F.mul(c1, c2)
                if s < 0:
                    c = F.neg(c)
                F.axpy(out, F.one, {m: c})
        return SuperPolynomial._raw(self.ctx, F, out)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, SuperPolynomial):
            if other == 0:
                return not self.terms
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # derivatives
    def partial_even(self, i: int) -> "SuperPolynomial":
        F = self.field
        out = {}
        for (exps, mask), c in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            ne = exps[:i] + (e - 1,) + exps[i + 1:]
            out[(ne, mask)] = F.mul(F(e), c)
        out = {m: c for m, c in out.items() if not F.is_zero(c)}
        return SuperPolynomial._raw(self.ctx, F, out)

    def partial_odd(self, i: int) -> "SuperPolynomial":
        F = self.field
        bit = 1 << i
        below = bit - 1
        out = {}
        for (exps, mask), c in self.terms.items():
            if not mask & bit:
                continue
            out[(exps, mask ^ bit)] = F.neg(c) if popcount(mask & below) & 1 else c
        return SuperPolynomial._raw(self.ctx, F, out)

    def partial(self, name: str) -> "SuperPolynomial":
        if name in self.ctx.even_names:
            return self.partial_even(self.ctx.even_names.index(name))
        return self.partial_odd(self.ctx.odd_names.index(name))

    # parity and grade
    def parity(self):
        """0 (even), 1 (odd), ``MIXED``; the zero polynomial counts as even."""
        ps = {popcount(mask) & 1 for (_, mask) in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else MIXED

    def grade(self):
        gs = {self.ctx.mono_grade(m) for m in self.terms}
        if not gs:
            return 0
        return gs.pop() if len(gs) == 1 else MIXED

    def euler(self, even_weights: Sequence, odd_weights: Sequence) -> "SuperPolynomial":
        """Weighted Euler operator: sum_v w_v * v * d/dv."""
        F = self.field
        out = {}
        for (exps, mask), c in self.terms.items():
            w = sum(a * b for a, b in zip(exps, even_weights))
            for i, wi in enumerate(odd_weights):
                if mask >> i & 1:
                    w += wi
            if w:
                out[(exps, mask)] = F.mul(F(w), c)
        out = {m: c for m, c in out.items() if not F.is_zero(c)}
        return SuperPolynomial._raw(self.ctx, F, out)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: mono_sort_key(t[0]))

    def __repr__(self):
        return f"SuperPolynomial({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def enumerate_monomials(ctx: VariableContext, grade: int, parity=None) -> list:
    """All monomials of the given grade (and parity, if given), sorted."""
    out = []
    for mask in range(1 << ctx.n_odd):
        if parity is not None and popcount(mask) % 2 != parity:
            continue
        rest = grade - ctx.mono_grade(((0,) * ctx.n_even, mask))
        if rest < 0:
            continue
        for exps in _even_exponents(ctx.even_grades, rest):
            out.append((exps, mask))
    out.sort(key=mono_sort_key)
    return out


def _even_exponents(grades: tuple, total: int):
    if not grades:
        if total == 0:
            yield ()
        return
    g0 = grades[0]
    for e in range(total // g0 + 1):
        for tail in _even_exponents(grades[1:], total - e * g0):
            yield (e,) + tail


# text form -------------------------------------------------------------------

def _compact(ctx: VariableContext) -> bool:
    return all(len(n) == 1 for n in ctx.even_names + ctx.odd_names)


def format_monomial(ctx: VariableContext, m: Monomial, compact=None) -> str:
    exps, mask = m
    parts = []
    for name, e in zip(ctx.even_names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    for i, name in enumerate(ctx.odd_names):
        if mask >> i & 1:
            parts.append(name)
    if not parts:
        return "1"
    if compact is None:
        compact = _compact(ctx)
    if compact:
        return "".join(parts)
    return "*".join(parts)


def format_poly(f: SuperPolynomial, latex=False) -> str:
    if not f.terms:
        return "0"
    F = f.field
    out = []
    for m, c in f.sorted_terms():
        s = F.format(c)
        neg = s.startswith("-")
        if neg:
            s = s[1:]
        mono = format_monomial(f.ctx, m)
        if latex:
            mono = re.sub(r"\^(\d+)", r"^{\1}", mono)
            if "/" in s:
                a, b = s.split("/")
                s = f"\\frac{{{a}}}{{{b}}}"
        if mono == "1":
            body = s
        elif s == "1":
            body = mono
        else:
            body = f"{s}{'' if latex or _compact(f.ctx) else '*'}{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


class PolySyntaxError(ValueError):
    pass


def parse_poly(text: str, ctx: VariableContext, field: Field = QQ) -> SuperPolynomial:
    """Parse e.g. ``3x^2T - x^3X``, ``2*x*y*X + 1/2``, ``x^3 y X Z``.

    Juxtaposed odd factors multiply in the written order, so ``Y X`` is ``-XY``.
    """
    names = sorted(ctx.even_names + ctx.odd_names, key=len, reverse=True)
    tokens = _tokenize(text, names)
    pos = 0
    result = {}

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    sign = 1
    first = True
    while pos < len(tokens) or first:
        first = False
        tok = peek()
        while tok in ("+", "-"):
            # "a + -b" reads as "a - b"
            if tok == "-":
                sign = -sign
            pos += 1
            tok = peek()
        coeff = field(sign)
        term_mono = ctx.one()
        seen_factor = False
        while True:
            tok = peek()
            if tok is None or tok in ("+", "-"):
                break
            if tok == "*":
                pos += 1
                continue
            if tok[0].isdigit():
                pos += 1
                num = int(tok)
                den = 1
                if peek() == "/":
                    pos += 1
                    d = peek()
                    if d is None or not d[0].isdigit():
                        raise PolySyntaxError(f"bad fraction in {text!r}")
                    den = int(d)
                    pos += 1
                coeff = field.mul(coeff, field.from_fraction(num, den))
                seen_factor = True
                continue
            if tok in ctx.even_names or tok in ctx.odd_names:
                pos += 1
                power = 1
                if peek() == "^":
                    pos += 1
                    d = peek()
                    if d is None or not d.isdigit():
                        raise PolySyntaxError(f"bad exponent in {text!r}")
                    power = int(d)
                    pos += 1
                if tok in ctx.even_names:
                    i = ctx.even_names.index(tok)
                    e = list(term_mono[0])
                    e[i] += power
                    term_mono = (tuple(e), term_mono[1])
                else:
                    if power > 1:
                        term_mono = None
                        power = 0
                    for _ in range(power):
                        if term_mono is None:
                            break
                        r = mono_mul(term_mono, ctx.odd_var(ctx.odd_names.index(tok)))
                        if r is None:
                            term_mono = None
                        else:
                            if r[0] < 0:
                                coeff = field.neg(coeff)
                            term_mono = r[1]
                    if term_mono is None:
                        # nilpotent factor; consume the rest of the term
                        while peek() is not None and peek() not in ("+", "-"):
                            pos += 1
                        break
                seen_factor = True
                continue
            raise PolySyntaxError(f"unexpected token {tok!r} in {text!r}")
        if not seen_factor:
            raise PolySyntaxError(f"empty term in {text!r}")
        if term_mono is not None:
            field.axpy(result, field.one, {term_mono: coeff})
        sign = 1
    return SuperPolynomial._raw(ctx, field, result)


def _tokenize(text: str, names: Iterable[str]) -> list:
    text = text.replace("−", "-")
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            toks.append(ch)
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(text[i:j])
            i = j
            continue
        for n in names:
            if text.startswith(n, i):
                toks.append(n)
                i += len(n)
                break
        else:
            raise PolySyntaxError(f"unknown symbol at {text[i:]!r}")
    if "(" in toks or ")" in toks:
        raise PolySyntaxError("parentheses are not supported in polynomial literals")
    return toks


def standard_names(prefix: str, n: int, single=("x", "y", "z")) -> list:
    if prefix == "x" and n <= 3:
        return list(single[:n])
    if prefix == "X" and n <= 3:
        return [s.upper() for s in single[:n]]
    if n == 1:
        return [prefix]
    return [f"{prefix}{i + 1}" for i in range(n)]


def random_poly(ctx: VariableContext, rng, field: Field = QQ, n_terms=4, max_exp=2, parity=None):
    """Random superpolynomial for property tests."""
    terms = {}
    for _ in range(n_terms):
        exps = tuple(rng.randint(0, max_exp) for _ in range(ctx.n_even))
        mask = rng.randrange(1 << ctx.n_odd) if ctx.n_odd else 0
        if parity is not None and popcount(mask) % 2 != parity:
            if ctx.n_odd == 0:
                if parity == 1:
                    continue
            else:
                mask ^= 1
        c = rng.randint(-5, 5)
        if c:
            field.axpy(terms, field.one, {(exps, mask): field(c)})
    return SuperPolynomial._raw(ctx, field, terms)

