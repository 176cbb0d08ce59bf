"""Lie superalgebras of formal vector fields and their grade slices.

Families with a bracket on generating functions (Po, H, K, B, Le, SB, SLe, M,
SM) carry a :class:`~supercohom.superpoly.SuperPolynomial` as element payload;
W and S carry a :class:`VectorField`.  For the odd brackets (B, Le, SB, SLe, M,
SM) the parity of an element is opposite to the parity of its generating
function.

Element grades are generating-function grades minus the grade shift of the
bracket, so that ``grade([a, b]) == grade(a) + grade(b)`` always holds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd

from .linalg import Echelon, InternalConsistencyError, NotInSpan, SpanSolver, _kernel_from_rref
from .scalars import QQ, Field
from .superpoly import (
    MIXED,
    SuperPolynomial,
    VariableContext,
    enumerate_monomials,
    format_monomial,
    format_poly,
    mono_sort_key,
    parse_poly,
    popcount,
)

FAMILIES = ("W", "S", "Po", "H", "K", "B", "Le", "SB", "SLe", "M", "SM", "Custom")
VECTOR_FIELD_KINDS = {"W", "S"}
ODD_BRACKET_KINDS = {"B", "Le", "SB", "SLe", "M", "SM"}
SPECIAL_KINDS = {"S", "SB", "SLe", "SM"}
QUOTIENTS = {"B": "Le", "SB": "SLe", "Po": "H"}
QUOTIENT_KINDS = set(QUOTIENTS.values())


class UsageError(ValueError):
    pass


class OutOfRangeError(LookupError):
    """A bracket or cochain needs grades outside the built slice."""


# ---------------------------------------------------------------------------
# vector fields


class VectorField:
    """sum_u comps[u] * d/du over even variables then odd variables."""

    __slots__ = ("ctx", "field", "comps")

    def __init__(self, ctx: VariableContext, comps, field: Field = QQ):
        self.ctx = ctx
        self.field = field
        comps = tuple(comps)
        if len(comps) != ctx.n_even + ctx.n_odd:
            raise ValueError("wrong number of vector field components")
        self.comps = comps

    @classmethod
    def basis_field(cls, ctx, field, var_index: int, mono, coeff=1):
        comps = [SuperPolynomial._raw(ctx, field, {}) for _ in range(ctx.n_even + ctx.n_odd)]
        comps[var_index] = SuperPolynomial(ctx, {mono: coeff}, field)
        return cls(ctx, comps, field)

    def var_parity(self, u: int) -> int:
        return 0 if u < self.ctx.n_even else 1

    def var_grade(self, u: int) -> int:
        n = self.ctx.n_even
        return self.ctx.even_grades[u] if u < n else self.ctx.odd_grades[u - n]

    def partial(self, u: int, h: SuperPolynomial) -> SuperPolynomial:
        n = self.ctx.n_even
        return h.partial_even(u) if u < n else h.partial_odd(u - n)

    def apply(self, h: SuperPolynomial) -> SuperPolynomial:
        out = h.zero_like()
        for u, f in enumerate(self.comps):
            if f:
                out = out + f * self.partial(u, h)
        return out

    def parity(self):
        ps = set()
        for u, f in enumerate(self.comps):
            for (_, mask) in f.terms:
                ps.add((popcount(mask) + self.var_parity(u)) & 1)
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else MIXED

    def grade(self):
        gs = set()
        for u, f in enumerate(self.comps):
            for m in f.terms:
                gs.add(self.ctx.mono_grade(m) - self.var_grade(u))
        if not gs:
            return 0
        return gs.pop() if len(gs) == 1 else MIXED

    def coords(self) -> dict:
        out = {}
        for u, f in enumerate(self.comps):
            for m, c in f.terms.items():
                out[(u, m)] = c
        return out

    @classmethod
    def from_coords(cls, ctx, field, coords: dict):
        comps = [dict() for _ in range(ctx.n_even + ctx.n_odd)]
        for (u, m), c in coords.items():
            comps[u][m] = c
        return cls(ctx, [SuperPolynomial._raw(ctx, field, d) for d in comps], field)

    def __add__(self, other):
        return VectorField(self.ctx, [a + b for a, b in zip(self.comps, other.comps)], self.field)

    def __sub__(self, other):
        return VectorField(self.ctx, [a - b for a, b in zip(self.comps, other.comps)], self.field)

    def __neg__(self):
        return VectorField(self.ctx, [-a for a in self.comps], self.field)

    def scale(self, c):
        return VectorField(self.ctx, [a.scale(c) for a in self.comps], self.field)

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def __bool__(self):
        return any(self.comps)

    def is_zero(self):
        return not any(self.comps)

    def __str__(self):
        return format_vector_field(self)

    def __repr__(self):
        return f"VectorField({format_vector_field(self)!r})"


def format_vector_field(v: VectorField, latex=False) -> str:
    names = v.ctx.even_names + v.ctx.odd_names
    parts = []
    for u, f in enumerate(v.comps):
        if not f:
            continue
        d = f"\\partial_{{{names[u]}}}" if latex else f"d_{names[u]}"
        body = format_poly(f, latex=latex)
        if len(f.terms) > 1:
            body = f"({body})"
        parts.append(d if body == "1" else f"{body}*{d}" if not latex else f"{body}\\,{d}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


def parse_vector_field(text: str, ctx: VariableContext, field: Field = QQ) -> VectorField:
    """Parse ``(x^2 + X)*d_x - X*d_Y``: terms ``poly*d_var`` joined by + or -."""
    names = ctx.even_names + ctx.odd_names
    comps = [SuperPolynomial._raw(ctx, field, {}) for _ in names]
    pattern = re.compile(r"(?:\((?P<paren>[^()]*)\)|(?P<plain>[^()]*?))\s*\*?\s*d_(?P<var>\w+)")
    rest = text.replace("−", "-").strip()
    pos = 0
    sign = 1
    while pos < len(rest):
        while pos < len(rest) and rest[pos].isspace():
            pos += 1
        if pos < len(rest) and rest[pos] in "+-":
            sign = -1 if rest[pos] == "-" else 1
            pos += 1
        m = pattern.match(rest, pos)
        if not m:
            raise ValueError(f"cannot parse vector field {text!r}")
        var = m.group("var")
        if var not in names:
            raise ValueError(f"unknown variable d_{var}")
        body = m.group("paren") if m.group("paren") is not None else (m.group("plain") or "").strip()
        poly = parse_poly(body, ctx, field) if body else SuperPolynomial.constant(ctx, 1, field)
        u = names.index(var)
        comps[u] = comps[u] + poly.scale(sign)
        sign = 1
        pos = m.end()
    return VectorField(ctx, comps, field)


# ---------------------------------------------------------------------------
# families


def standard_variables(kind: str, n: int, m: int):
    """Default variable names and standard gradings (all 1, t and T grade 2)."""
    def seq(prefix, count, singles):
        if count <= len(singles):
            return list(singles[:count])
        return [f"{prefix}{i + 1}" for i in range(count)]

    if kind in ("W", "S"):
        even = seq("x", n, "xyz")
        odd = seq("X", m, "XYZ")
        return even, odd, [1] * n, [1] * m
    if kind in ("Po", "H", "K"):
        if n == 1:
            ps, qs = ["p"], ["q"]
        else:
            ps = [f"p{i + 1}" for i in range(n)]
            qs = [f"q{i + 1}" for i in range(n)]
        odd = seq("X", m, "XYZ")
        even = ps + qs
        eg = [1] * (2 * n)
        if kind == "K":
            even = ["t"] + even
            eg = [2] + eg
        return even, odd, eg, [1] * m
    if kind in ("B", "Le", "SB", "SLe"):
        return seq("x", n, "xyz"), seq("X", n, "XYZ"), [1] * n, [1] * n
    if kind in ("M", "SM"):
        return seq("x", n, "xyz"), ["T"] + seq("X", n, "XYZ"), [1] * n, [2] + [1] * n
    raise UsageError(f"no standard variables for {kind}")


def signature(kind: str, params) -> tuple:
    """Normalize conventional parameters: Po(2n|m) -> (n, m), K(2n+1|m) -> (n, m)."""
    params = [int(p) for p in params]
    if kind in ("W", "S"):
        if len(params) != 2:
            raise UsageError(f"{kind} takes (n, m)")
        return params[0], params[1]
    if kind in ("Po", "H"):
        if len(params) != 2 or params[0] % 2:
            raise UsageError(f"{kind}(2n|m) takes an even first parameter")
        return params[0] // 2, params[1]
    if kind == "K":
        if len(params) != 2 or params[0] % 2 != 1:
            raise UsageError("K(2n+1|m) takes an odd first parameter")
        return (params[0] - 1) // 2, params[1]
    if kind in ("B", "Le", "SB", "SLe", "M", "SM"):
        if len(params) != 1:
            raise UsageError(f"{kind}(n) takes one parameter")
        return params[0], 0
    raise UsageError(f"unknown algebra family {kind!r}")


@dataclass
class BasisElement:
    id: int
    payload: object
    parity: int
    grade: int
    name: str

    def __repr__(self):
        return f"BasisElement({self.id}, {self.name}={self.payload})"


class Family:
    """An algebra family with concrete variables, grading and coefficient field."""

    def __init__(self, kind: str, n: int = 0, m: int = 0, ctx: VariableContext | None = None,
                 field: Field = QQ):
        if kind not in FAMILIES or kind == "Custom":
            raise UsageError(f"unknown family {kind!r}")
        self.kind = kind
        self.n = n
        self.m = m
        self.field = field
        if ctx is None:
            e, o, eg, og = standard_variables(kind, n, m)
            ctx = VariableContext(e, o, eg, og)
        self.ctx = ctx
        self._check_signature()
        self.shift = self._grade_shift()
        self._basis_cache = {}

    @classmethod
    def create(cls, kind: str, *params, even_names=None, odd_names=None, even_grades=None,
               odd_grades=None, field: Field = QQ) -> "Family":
        n, m = signature(kind, params)
        e, o, eg, og = standard_variables(kind, n, m)
        ctx = VariableContext(even_names or e, odd_names or o,
                              eg if even_grades is None else even_grades,
                              og if odd_grades is None else odd_grades)
        return cls(kind, n, m, ctx, field)

    # structure -------------------------------------------------------------
    @property
    def is_vector_field(self) -> bool:
        return self.kind in VECTOR_FIELD_KINDS

    @property
    def odd_bracket(self) -> bool:
        return self.kind in ODD_BRACKET_KINDS

    @property
    def is_special(self) -> bool:
        return self.kind in SPECIAL_KINDS

    @property
    def is_quotient(self) -> bool:
        return self.kind in QUOTIENT_KINDS

    @property
    def finite(self) -> bool:
        return self.ctx.n_even == 0

    @property
    def label(self) -> str:
        if self.kind in ("W", "S"):
            return f"{self.kind}({self.n}|{self.m})"
        if self.kind in ("Po", "H"):
            return f"{self.kind}({2 * self.n}|{self.m})"
        if self.kind == "K":
            return f"K({2 * self.n + 1}|{self.m})"
        return f"{self.kind}({self.n})"

    def _check_signature(self):
        ne, no = self.ctx.n_even, self.ctx.n_odd
        k, n, m = self.kind, self.n, self.m
        expected = {
            "W": (n, m), "S": (n, m), "Po": (2 * n, m), "H": (2 * n, m),
            "K": (2 * n + 1, m), "B": (n, n), "Le": (n, n), "SB": (n, n), "SLe": (n, n),
            "M": (n, n + 1), "SM": (n, n + 1),
        }[k]
        if (ne, no) != expected:
            raise UsageError(f"{self.label} needs {expected[0]} even and {expected[1]} odd "
                             f"variables, got {ne} and {no}")

    def _grade_shift(self) -> int:
        c = self.ctx
        eg, og = c.even_grades, c.odd_grades
        k, n = self.kind, self.n
        if k in ("W", "S"):
            return 0
        shifts = set()
        if k in ("Po", "H"):
            shifts |= {eg[i] + eg[n + i] for i in range(n)}
            shifts |= {2 * g for g in og}
        elif k == "K":
            shifts.add(eg[0])
            shifts |= {eg[1 + i] + eg[1 + n + i] for i in range(n)}
            shifts |= {2 * g for g in og}
        elif k in ("B", "Le", "SB", "SLe"):
            shifts |= {eg[i] + og[i] for i in range(n)}
        elif k in ("M", "SM"):
            shifts.add(og[0])
            shifts |= {eg[i] + og[1 + i] for i in range(n)}
        if len(shifts) > 1:
            raise UsageError(f"grading is not compatible with the {self.label} bracket "
                             f"(bracket shifts {sorted(shifts)})")
        return shifts.pop() if shifts else 0

    def with_field(self, field: Field) -> "Family":
        return Family(self.kind, self.n, self.m, self.ctx, field)

    def __repr__(self):
        return f"Family({self.label}, field={self.field!r})"

    # payloads ---------------------------------------------------------------
    def zero(self):
        if self.is_vector_field:
            return VectorField(self.ctx, [SuperPolynomial._raw(self.ctx, self.field, {})
                                          for _ in range(self.ctx.n_even + self.ctx.n_odd)],
                               self.field)
        return SuperPolynomial._raw(self.ctx, self.field, {})

    def coords(self, payload) -> dict:
        if self.is_vector_field:
            return payload.coords()
        return dict(payload.terms)

    def from_coords(self, coords: dict):
        if self.is_vector_field:
            return VectorField.from_coords(self.ctx, self.field, coords)
        return SuperPolynomial._raw(self.ctx, self.field, dict(coords))

    def parse_payload(self, text: str):
        if self.is_vector_field:
            return parse_vector_field(text, self.ctx, self.field)
        return parse_poly(text, self.ctx, self.field)

    def format_payload(self, payload, latex=False) -> str:
        if self.is_vector_field:
            return format_vector_field(payload, latex=latex)
        return format_poly(payload, latex=latex)

    def element_parity(self, payload):
        p = payload.parity()
        if p == MIXED:
            return MIXED
        if self.odd_bracket:
            return 1 - p
        return p

    def element_grade(self, payload):
        g = payload.grade()
        if g == MIXED or self.is_vector_field:
            return g
        return g - self.shift

    # brackets ---------------------------------------------------------------
    def _delta(self, f: SuperPolynomial) -> SuperPolynomial:
        """delta(f) = 2 f - E(f) with the family's Euler weights."""
        c = self.ctx
        if self.kind == "K":
            ew = [0] + [1] * (2 * self.n)
            ow = [1] * c.n_odd
        else:  # M, SM: weights on x_i and X_i, not on T
            ew = [1] * c.n_even
            ow = [0] + [1] * self.n
        return f.scale(2) - f.euler(ew, ow)

    def poisson(self, f, g) -> SuperPolynomial:
        n = self.n
        off = 1 if self.kind == "K" else 0
        F = self.field
        out = f.zero_like()
        for i in range(n):
            p, q = off + i, off + n + i
            out = out + f.partial_even(p) * g.partial_even(q) - f.partial_even(q) * g.partial_even(p)
        odd = f.zero_like()
        for k in range(self.ctx.n_odd):
            odd = odd + f.partial_odd(k) * g.partial_odd(k)
        if odd:
            s = F(-1) if f.parity() == 0 else F(1)
            out = out + odd.scale(s)
        return out

    def buttin(self, f, g) -> SuperPolynomial:
        off = 1 if self.kind in ("M", "SM") else 0
        out = f.zero_like()
        pf = f.parity()
        for i in range(self.n):
            a = f.partial_even(i) * g.partial_odd(off + i)
            b = f.partial_odd(off + i) * g.partial_even(i)
            out = out + a + (b if pf == 0 else -b)
        return out

    def bracket(self, f, g):
        """Bracket of two parity-homogeneous payloads."""
        pf, pg = f.parity(), g.parity()
        if pf == MIXED or pg == MIXED:
            raise UsageError("bracket of a parity-inhomogeneous element")
        k = self.kind
        if k in ("W", "S"):
            comps = []
            pd1 = self.element_parity(f)
            pd2 = self.element_parity(g)
            sign = -1 if pd1 == 1 and pd2 == 1 else 1
            for u in range(len(f.comps)):
                a = f.apply(g.comps[u])
                b = g.apply(f.comps[u])
                comps.append(a - b if sign == 1 else a + b)
            return VectorField(self.ctx, comps, self.field)
        if k in ("Po", "H"):
            out = self.poisson(f, g)
        elif k == "K":
            out = self._delta(f) * g.partial_even(0) - f.partial_even(0) * self._delta(g) \
                - self.poisson(f, g)
        elif k in ("B", "Le", "SB", "SLe"):
            out = self.buttin(f, g)
        elif k in ("M", "SM"):
            a = self._delta(f) * g.partial_odd(0)
            b = f.partial_odd(0) * self._delta(g)
            out = a + (b if pf == 0 else -b) - self.buttin(f, g)
        else:
            raise UsageError(f"no bracket for {k}")
        if self.is_quotient:
            out = self.drop_center(out)
        return out

    def drop_center(self, f: SuperPolynomial) -> SuperPolynomial:
        one = self.ctx.one()
        if one in f.terms:
            terms = dict(f.terms)
            del terms[one]
            return SuperPolynomial._raw(f.ctx, f.field, terms)
        return f

    # constraints ------------------------------------------------------------
    def constraint_operator(self, payload):
        """Image under the defining constraint of a special family."""
        k = self.kind
        if k == "S":
            v = payload
            n = self.ctx.n_even
            F = v.field
            out = SuperPolynomial._raw(self.ctx, F, {})
            for u, f in enumerate(v.comps):
                if not f:
                    continue
                if u < n:
                    out = out + f.partial_even(u)
                else:
                    d = f.partial_odd(u - n)
                    # (-1)^{p(g_k)} applied monomial by monomial
                    terms = {}
                    for m, c in d.terms.items():
                        terms[m] = c if (popcount(m[1]) & 1) else F.neg(c)
                    out = out + SuperPolynomial._raw(self.ctx, F, terms)
            return out
        if k in ("SB", "SLe"):
            return self.laplacian(payload)
        if k == "SM":
            f = payload
            dT = f.partial_odd(0)
            ew = [1] * self.ctx.n_even
            ow = [0] + [1] * self.n
            return dT - dT.euler(ew, ow) - self.laplacian(f)
        raise UsageError(f"{self.label} has no constraint operator")

    def laplacian(self, f: SuperPolynomial) -> SuperPolynomial:
        off = 1 if self.kind in ("M", "SM") else 0
        out = f.zero_like()
        for i in range(self.n):
            out = out + f.partial_odd(off + i).partial_even(i)
        return out

    def quotient_center(self) -> "Family":
        if self.kind not in QUOTIENTS:
            raise UsageError(f"{self.label} has no distinguished center to factor out")
        return Family(QUOTIENTS[self.kind], self.n, self.m, self.ctx, self.field)

    # bases ------------------------------------------------------------------
    def candidates(self, grade: int) -> list:
        """Monomial payloads of the unconstrained space at an element grade."""
        c = self.ctx
        F = self.field
        out = []
        if self.is_vector_field:
            nv = c.n_even + c.n_odd
            for u in range(nv):
                gu = c.even_grades[u] if u < c.n_even else c.odd_grades[u - c.n_even]
                for m in enumerate_monomials(c, grade + gu):
                    out.append(VectorField.basis_field(c, F, u, m))
            return out
        for m in enumerate_monomials(c, grade + self.shift):
            out.append(SuperPolynomial._raw(c, F, {m: F.one}))
        return out

    def min_grade_bound(self) -> int:
        """A lower bound for element grades (exact up to empty components)."""
        c = self.ctx
        low = c.min_odd_grade_sum()
        if self.is_vector_field:
            grades = list(c.even_grades) + list(c.odd_grades)
            return low - max(grades) if grades else 0
        return low - self.shift

    def max_grade_bound(self):
        """Upper bound for finite algebras, None otherwise."""
        if not self.finite:
            return None
        c = self.ctx
        high = sum(g for g in c.odd_grades if g > 0)
        if self.is_vector_field:
            grades = list(c.odd_grades)
            return high - min(grades) if grades else 0
        return high - self.shift

    def basis(self, grade: int) -> list:
        """Basis payloads of one grade: list of (payload, parity), even first."""
        if grade in self._basis_cache:
            return self._basis_cache[grade]
        cands = self.candidates(grade)
        by_par = {0: [], 1: []}
        for p in cands:
            by_par[self.element_parity(p)].append(p)
        out = []
        for par in (0, 1):
            group = by_par[par]
            if self.is_quotient:
                one = self.ctx.one()
                group = [p for p in group if one not in p.terms]
            if self.is_special and group:
                group = self._constraint_kernel(group)
            out.extend((p, par) for p in group)
        self._basis_cache[grade] = out
        return out

    def _constraint_kernel(self, group: list) -> list:
        """Kernel of the constraint on span(group), computed over Q, primitive integral."""
        atoms = {}
        cols = []
        for p in group:
            img = self.constraint_operator(_to_rational(p, self))
            cols.append({atoms.setdefault(a, len(atoms)): v for a, v in self_coords(img).items()})
        # rows of the constraint matrix = image atoms
        rows = [dict() for _ in range(len(atoms))]
        for j, col in enumerate(cols):
            for i, v in col.items():
                rows[i][j] = v
        ech = Echelon(QQ)
        for r in rows:
            if r:
                ech.add(r)
        ech.back_substitute()
        kernel = _kernel_from_rref(ech, len(group), QQ)
        kernel.sort(key=lambda v: max(v))
        result = []
        F = self.field
        for vec in kernel:
            vec = primitive_integral(vec)
            coords = {}
            for j, c in vec.items():
                for a, v in self.coords(group[j]).items():
                    coords[a] = c  # candidates are single monomials with coefficient 1
            payload = self.from_coords({a: F(int(c)) for a, c in coords.items()})
            result.append(payload)
        if F != QQ:
            # dimension must not jump modulo p
            rows_p = [{j: F(v) for j, v in r.items()} for r in rows]
            ech_p = Echelon(F)
            for r in rows_p:
                r = {j: v for j, v in r.items() if not F.is_zero(v)}
                if r:
                    ech_p.add(r)
            if len(group) - ech_p.rank != len(result):
                raise UsageError(f"constraint kernel dimension differs modulo {F.characteristic}; "
                                 "use a larger prime")
        return result

    def __eq__(self, other):
        return (isinstance(other, Family) and self.kind == other.kind and self.n == other.n
                and self.m == other.m and self.ctx == other.ctx and self.field == other.field)

    def __hash__(self):
        return hash((self.kind, self.n, self.m, self.ctx, self.field))


def self_coords(p) -> dict:
    return dict(p.terms) if isinstance(p, SuperPolynomial) else p.coords()


def _to_rational(p, fam: Family):
    """Monomial candidates always have coefficient 1; rebuild them over Q."""
    if fam.field == QQ:
        return p
    if isinstance(p, SuperPolynomial):
        return SuperPolynomial._raw(p.ctx, QQ, {m: QQ.one for m in p.terms})
    return VectorField.from_coords(p.ctx, QQ, {a: QQ.one for a in p.coords()})


def primitive_integral(vec: dict) -> dict:
    """Scale a rational vector to coprime integers, first entry (by index) positive."""
    fr = {k: Fraction(int(v.numerator), int(v.denominator)) for k, v in vec.items()}
    den = 1
    for v in fr.values():
        den = den * v.denominator // gcd(den, v.denominator)
    ints = {k: int(v * den) for k, v in fr.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    ints = {k: v // g for k, v in ints.items()}
    if ints[min(ints)] < 0:
        ints = {k: -v for k, v in ints.items()}
    return {k: Fraction(v) for k, v in ints.items()}


# ---------------------------------------------------------------------------
# custom finite-dimensional algebras


class CustomAlgebra:
    """A finite-dimensional superalgebra given by its structure constants."""

    kind = "Custom"
    finite = True
    is_quotient = False

    def __init__(self, names, parities, grades, table: dict, field: Field = QQ):
        self.names = list(names)
        self.parities = [int(p) for p in parities]
        self.grades = [int(g) for g in grades]
        self.field = field
        n = len(self.names)
        full = {}
        for (i, j), terms in table.items():
            if not (0 <= i < n and 0 <= j < n):
                raise UsageError(f"bracket index out of range: [{i}, {j}]")
            terms = {k: field(c) for k, c in dict(terms).items() if not field.is_zero(field(c))}
            full[(i, j)] = terms
            s = -1 if self.parities[i] and self.parities[j] else 1
            mirrored = {k: field.mul(field(-s), c) for k, c in terms.items()}
            if (j, i) in table:
                given = {k: field(c) for k, c in dict(table[(j, i)]).items()
                         if not field.is_zero(field(c))}
                if given != mirrored:
                    raise UsageError(f"[{i},{j}] and [{j},{i}] violate super skew-symmetry")
            full[(j, i)] = mirrored
        self.table = {k: v for k, v in full.items() if v}
        self.label = "Custom"

    def with_field(self, field: Field) -> "CustomAlgebra":
        tab = {k: {kk: field(vv) for kk, vv in v.items()} for k, v in self.table.items()}
        return CustomAlgebra(self.names, self.parities, self.grades, tab, field)

    def __repr__(self):
        return f"CustomAlgebra(dim={len(self.names)})"


def parse_custom_table(text: str, field: Field = QQ) -> CustomAlgebra:
    """Structure-constant text format.

    ``element <index> <even|odd> <grade> [name]`` declares a basis element;
    ``[i, j] = c k; c' k'; ...`` gives ``[b_i, b_j] = c b_k + c' b_k' + ...``.
    Unlisted brackets are zero; ``[j, i]`` is filled in by skew-symmetry.
    ``#`` starts a comment.
    """
    elements = {}
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("element"):
            parts = line.split()
            if len(parts) not in (4, 5):
                raise UsageError(f"line {lineno}: expected 'element <i> <even|odd> <grade> [name]'")
            idx = int(parts[1])
            par = {"even": 0, "odd": 1, "0": 0, "1": 1}.get(parts[2].lower())
            if par is None:
                raise UsageError(f"line {lineno}: parity must be even or odd")
            name = parts[4] if len(parts) == 5 else f"{'EO'[par]}{idx}"
            elements[idx] = (name, par, int(parts[3]))
            continue
        m = re.match(r"^\[\s*(\d+)\s*,\s*(\d+)\s*\]\s*=\s*(.*)$", line)
        if not m:
            raise UsageError(f"line {lineno}: cannot parse {raw!r}")
        i, j = int(m.group(1)), int(m.group(2))
        terms = {}
        rhs = m.group(3).strip()
        if rhs and rhs != "0":
            for part in rhs.split(";"):
                part = part.strip()
                if not part:
                    continue
                bits = part.split()
                if len(bits) != 2:
                    raise UsageError(f"line {lineno}: expected 'coefficient index', got {part!r}")
                c = field.parse(bits[0])
                k = int(bits[1])
                terms[k] = field.add(terms.get(k, field.zero), c)
        table[(i, j)] = terms
    n = len(elements)
    if sorted(elements) != list(range(n)):
        raise UsageError("element indices must be 0..dim-1")
    names = [elements[i][0] for i in range(n)]
    pars = [elements[i][1] for i in range(n)]
    grades = [elements[i][2] for i in range(n)]
    return CustomAlgebra(names, pars, grades, table, field)


# ---------------------------------------------------------------------------
# slices


@dataclass
class AlgebraSlice:
    family: object
    lo: int
    hi: int
    basis: list
    table: dict  # (i, j) -> tuple of (k, coeff)
    flagged: set = dc_field(default_factory=set)
    by_grade: dict = dc_field(default_factory=dict)
    min_grade: int = 0
    max_grade: int | None = None

    @property
    def field(self) -> Field:
        return self.family.field

    def __len__(self):
        return len(self.basis)

    def bracket_ids(self, i: int, j: int):
        """Structure constants of [b_i, b_j] as a tuple of (k, c)."""
        if (i, j) in self.flagged:
            raise OutOfRangeError(f"[{self.basis[i].name}, {self.basis[j].name}] lands outside "
                                  f"grades [{self.lo}, {self.hi}]")
        return self.table.get((i, j), ())

    def ids_of_grade(self, g: int) -> list:
        return self.by_grade.get(g, [])

    def grades(self) -> list:
        return sorted(g for g, ids in self.by_grade.items() if ids)

    def contains_grade(self, g: int) -> bool:
        return self.empty_grade(g) or self.lo <= g <= self.hi

    def empty_grade(self, g: int) -> bool:
        """Grades outside the algebra's support: nothing lives there."""
        return g < self.min_grade or (self.max_grade is not None and g > self.max_grade)

    def element(self, name_or_id):
        if isinstance(name_or_id, int):
            return self.basis[name_or_id]
        for b in self.basis:
            if b.name == name_or_id:
                return b
        raise KeyError(name_or_id)

    def expand(self, payload) -> dict:
        """Coordinates {id: coeff} of a payload in the slice basis."""
        fam = self.family
        if fam.kind == "Custom":
            raise UsageError("custom algebras have no payloads")
        if payload.is_zero():
            return {}
        g = fam.element_grade(payload)
        if g == MIXED:
            raise UsageError("payload is not grade-homogeneous")
        if not (self.lo <= g <= self.hi):
            raise OutOfRangeError(f"grade {g} outside slice [{self.lo}, {self.hi}]")
        solver = self._solver(g)
        try:
            loc = solver.coords(fam.coords(payload))
        except NotInSpan:
            raise InternalConsistencyError(f"{fam.format_payload(payload)} is not in the span of "
                                           f"the grade-{g} basis") from None
        ids = self.by_grade[g]
        return {ids[i]: c for i, c in loc.items()}

    def _solver(self, g: int) -> SpanSolver:
        cache = self.__dict__.setdefault("_solvers", {})
        if g not in cache:
            fam = self.family
            ids = self.by_grade.get(g, [])
            atoms = {}
            vecs = []
            for i in ids:
                vecs.append({atoms.setdefault(a, len(atoms)): v
                             for a, v in fam.coords(self.basis[i].payload).items()})
            s = SpanSolver(vecs, fam.field)
            s.atoms = atoms
            cache[g] = _AtomSolver(s, atoms)
        return cache[g]


class _AtomSolver:
    def __init__(self, solver: SpanSolver, atoms: dict):
        self.solver = solver
        self.atoms = atoms

    def coords(self, coords: dict) -> dict:
        vec = {}
        for a, v in coords.items():
            idx = self.atoms.get(a)
            if idx is None:
                raise NotInSpan(f"atom {a} not in span")
            vec[idx] = v
        return self.solver.coords(vec)


def _element_name(par: int, g: int, i: int) -> str:
    return f"{'EO'[par]}_{{{g},{i}}}"


def enumerate_basis(family: Family, grade: int) -> list:
    """Basis elements of one grade (ids local to this call)."""
    out = []
    counts = [0, 0]
    for idx, (p, par) in enumerate(family.basis(grade)):
        out.append(BasisElement(idx, p, par, grade, _element_name(par, grade, counts[par])))
        counts[par] += 1
    return out


def actual_min_grade(family: Family, search: int = 64) -> int:
    """Smallest grade with a nonzero homogeneous component."""
    g0 = family.min_grade_bound()
    top = family.max_grade_bound()
    stop = g0 + search if top is None else top
    for g in range(g0, stop + 1):
        if family.basis(g):
            return g
    raise UsageError(f"{family.label} has no elements in grades [{g0}, {stop}]")


def build_slice(family, lo: int | None = None, hi: int | None = None, basis_override=None,
                names=None) -> AlgebraSlice:
    """Basis for every grade in [lo, hi] and the exact structure constants.

    ``basis_override`` maps a grade to a list of payloads replacing the
    computed basis of that grade (checked to span the same space); ``names``
    optionally maps a payload's text form to a display name.
    """
    if isinstance(family, CustomAlgebra):
        return _custom_slice(family)
    if family.finite:
        lo_f = family.min_grade_bound()
        hi_f = family.max_grade_bound()
        lo = lo_f if lo is None else lo
        hi = hi_f if hi is None else hi
    gmin = actual_min_grade(family)
    if lo is None:
        lo = gmin
    if hi is None:
        raise UsageError("infinite-dimensional family needs an upper grade")
    if lo > hi:
        raise UsageError(f"empty grade range [{lo}, {hi}]")
    basis = []
    by_grade = {}
    for g in range(lo, hi + 1):
        elems = family.basis(g)
        if basis_override is not None and g in basis_override:
            elems = _check_override(family, g, elems, basis_override[g])
        ids = []
        counts = [0, 0]
        for p, par in elems:
            name = None
            if names is not None:
                name = names.get(family.format_payload(p))
            if name is None:
                name = _element_name(par, g, counts[par])
            counts[par] += 1
            bid = len(basis)
            basis.append(BasisElement(bid, p, par, g, name))
            ids.append(bid)
        by_grade[g] = ids
    top = None
    if family.finite:
        top = max(g for g in range(gmin, family.max_grade_bound() + 1) if family.basis(g))
    sl = AlgebraSlice(family, lo, hi, basis, {}, set(), by_grade, min_grade=gmin, max_grade=top)
    _fill_table(sl)
    return sl


def _check_override(family: Family, g: int, computed: list, payloads: list) -> list:
    F = family.field
    out = []
    for p in payloads:
        par = family.element_parity(p)
        if par == MIXED:
            raise UsageError(f"override element {family.format_payload(p)} has mixed parity")
        if family.element_grade(p) != g:
            raise UsageError(f"override element {family.format_payload(p)} is not of grade {g}")
        if family.is_special and not family.constraint_operator(p).is_zero():
            raise UsageError(f"override element {family.format_payload(p)} violates the constraint")
        out.append((p, par))
    if len(out) != len(computed):
        raise UsageError(f"grade {g}: override has {len(out)} elements, component has "
                         f"dimension {len(computed)}")
    atoms = {}
    vecs = []
    for p, _ in computed:
        vecs.append({atoms.setdefault(a, len(atoms)): v for a, v in family.coords(p).items()})
    ech = Echelon(F)
    for v in vecs:
        ech.add(v)
    probe = Echelon(F)
    for p, _ in out:
        vec = {}
        for a, v in family.coords(p).items():
            if a not in atoms:
                raise UsageError(f"override element {family.format_payload(p)} is outside the algebra")
            vec[atoms[a]] = v
        if not ech.contains(vec):
            raise UsageError(f"override element {family.format_payload(p)} is outside the algebra")
        if not probe.add(vec):
            raise UsageError(f"grade {g}: override elements are linearly dependent")
    out.sort(key=lambda t: t[1])
    return out


def _fill_table(sl: AlgebraSlice) -> None:
    fam = sl.family
    F = fam.field
    basis = sl.basis
    n = len(basis)
    for i in range(n):
        bi = basis[i]
        for j in range(i, n):
            bj = basis[j]
            g = bi.grade + bj.grade
            if not sl.contains_grade(g):
                sl.flagged.add((i, j))
                sl.flagged.add((j, i))
                continue
            if sl.empty_grade(g):
                # nothing lives there; the bracket must vanish
                if not fam.bracket(bi.payload, bj.payload).is_zero():
                    raise InternalConsistencyError(
                        f"[{bi.name}, {bj.name}] is nonzero in an empty grade {g}")
                continue
            res = fam.bracket(bi.payload, bj.payload)
            if res.is_zero():
                continue
            coords = sl.expand(res)
            if not coords:
                continue
            terms = tuple(sorted(coords.items()))
            sl.table[(i, j)] = terms
            if i != j:
                s = -1 if bi.parity and bj.parity else 1
                sl.table[(j, i)] = tuple((k, F.mul(F(-s), c)) for k, c in terms)


def _custom_slice(alg: CustomAlgebra) -> AlgebraSlice:
    basis = []
    by_grade = {}
    for i, (nm, p, g) in enumerate(zip(alg.names, alg.parities, alg.grades)):
        basis.append(BasisElement(i, None, p, g, nm))
        by_grade.setdefault(g, []).append(i)
    table = {k: tuple(sorted(v.items())) for k, v in alg.table.items()}
    lo = min(alg.grades) if alg.grades else 0
    hi = max(alg.grades) if alg.grades else 0
    return AlgebraSlice(alg, lo, hi, basis, table, set(), by_grade, min_grade=lo, max_grade=hi)


# ---------------------------------------------------------------------------
# checks


@dataclass
class GradingElement:
    coeffs: dict  # basis id -> coefficient
    payload: object = None


def find_internal_grading_element(sl: AlgebraSlice):
    """A grade-0 even element a0 with [a0, b] = grade(b) b for every basis b, or None."""
    F = sl.field
    cands = [i for i in sl.ids_of_grade(0) if sl.basis[i].parity == 0]
    if not cands:
        return None
    nc = len(cands)
    # unknowns: alpha_c (columns 0..nc-1) plus the constant column nc
    ech = Echelon(F)
    for b in sl.basis:
        if not sl.contains_grade(b.grade):
            continue
        eqs = {}
        for ci, c in enumerate(cands):
            for k, v in sl.bracket_ids(c, b.id):
                eqs.setdefault(k, {})[ci] = v
        rhs = F(b.grade)
        eqs.setdefault(b.id, {})
        for k, row in eqs.items():
            r = {c: v for c, v in row.items() if not F.is_zero(v)}
            target = rhs if k == b.id else F.zero
            if not F.is_zero(target):
                r[nc] = F.neg(target)
            if r:
                ech.add(r)
    if nc in ech.pivots:
        return None  # inconsistent system
    ech.back_substitute()
    # particular solution: free unknowns set to zero
    alpha = {}
    for p, row in ech.pivots.items():
        c = row.get(nc)
        if c is not None and not F.is_zero(c):
            alpha[cands[p]] = F.neg(c)
    if not alpha:
        return None  # only a0 = 0 works: every grade in the slice is zero
    payload = None
    if sl.family.kind != "Custom":
        payload = sl.family.zero()
        for i, c in alpha.items():
            payload = payload + sl.basis[i].payload.scale(c)
    return GradingElement(alpha, payload)


@dataclass
class VerificationReport:
    ok: bool = True
    checked_pairs: int = 0
    checked_triples: int = 0
    violations: list = dc_field(default_factory=list)

    def fail(self, kind: str, witness, detail=""):
        self.ok = False
        self.violations.append((kind, witness, detail))

    def __str__(self):
        if self.ok:
            return (f"ok: {self.checked_pairs} pairs, {self.checked_triples} triples")
        lines = [f"{len(self.violations)} violation(s):"]
        for kind, w, d in self.violations[:20]:
            lines.append(f"  {kind} at {w} {d}")
        return "\n".join(lines)


def _combine(F, acc: dict, factor, terms):
    for k, c in terms:
        v = F.add(acc.get(k, F.zero), F.mul(factor, c))
        if F.is_zero(v):
            acc.pop(k, None)
        else:
            acc[k] = v


def verify_algebra(sl: AlgebraSlice, recompute: bool = True, max_violations: int = 50,
                   jacobi: bool = True) -> VerificationReport:
    """Super skew-symmetry, grade additivity, parity and the super Jacobi identity."""
    F = sl.field
    rep = VerificationReport()
    basis = sl.basis
    n = len(basis)
    fam = sl.family
    for i in range(n):
        for j in range(n):
            if (i, j) in sl.flagged:
                continue
            rep.checked_pairs += 1
            tij = dict(sl.table.get((i, j), ()))
            tji = dict(sl.table.get((j, i), ()))
            s = -1 if basis[i].parity and basis[j].parity else 1
            expect = {k: F.mul(F(-s), c) for k, c in tij.items()}
            if expect != tji:
                rep.fail("skew-symmetry", (basis[i].name, basis[j].name))
            for k in tij:
                if basis[k].grade != basis[i].grade + basis[j].grade:
                    rep.fail("grade additivity", (basis[i].name, basis[j].name, basis[k].name))
                if basis[k].parity != (basis[i].parity + basis[j].parity) & 1:
                    rep.fail("parity", (basis[i].name, basis[j].name, basis[k].name))
            if recompute and fam.kind != "Custom" and j < i:
                direct = fam.bracket(basis[i].payload, basis[j].payload)
                got = sl.expand(direct) if not direct.is_zero() else {}
                if got != tij:
                    rep.fail("table mismatch", (basis[i].name, basis[j].name))
            if len(rep.violations) >= max_violations:
                return rep
    if not jacobi:
        return rep

    def br(i, j):
        return sl.table.get((i, j), ())

    for u in range(n):
        for v in range(u, n):
            if (u, v) in sl.flagged:
                continue
            uv = br(u, v)
            for w in range(v, n):
                if (v, w) in sl.flagged or (u, w) in sl.flagged:
                    continue
                g = basis[u].grade + basis[v].grade + basis[w].grade
                if not sl.contains_grade(g):
                    continue
                rep.checked_triples += 1
                lhs = {}
                for k, c in br(v, w):
                    _combine(F, lhs, c, br(u, k))
                rhs = {}
                for k, c in uv:
                    _combine(F, rhs, c, br(k, w))
                s = F(-1) if basis[u].parity and basis[v].parity else F.one
                for k, c in br(u, w):
                    _combine(F, rhs, F.mul(s, c), br(v, k))
                if lhs != rhs:
                    rep.fail("Jacobi", (basis[u].name, basis[v].name, basis[w].name))
                    if len(rep.violations) >= max_violations:
                        return rep
    return rep


def format_element(sl: AlgebraSlice, i: int, latex=False) -> str:
    b = sl.basis[i]
    if b.payload is None:
        return b.name
    return sl.family.format_payload(b.payload, latex=latex)


__all__ = [
    "AlgebraSlice", "BasisElement", "CustomAlgebra", "Family", "GradingElement",
    "OutOfRangeError", "UsageError", "VectorField", "VerificationReport",
    "actual_min_grade", "build_slice", "enumerate_basis", "find_internal_grading_element",
    "format_element", "format_monomial", "mono_sort_key", "parse_custom_table",
    "parse_vector_field", "primitive_integral", "standard_variables", "verify_algebra",
]
