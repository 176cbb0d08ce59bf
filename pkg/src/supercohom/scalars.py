"""Exact coefficient fields.

Two fields are supported: the rationals (backed by ``gmpy2.mpq``) and prime
fields Z/p with p >= 5.  Higher layers never touch the raw representation
directly; they go through a :class:`Field` object, so every algorithm in the
package runs unchanged over either field.

Raw values are ``mpq`` for Q and plain ``int`` residues in ``[0, p)`` for Z/p.
:class:`FieldElement` wraps a raw value together with its field for the
public, checked API.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpq

__all__ = [
    "FieldArithmeticError",
    "FieldMismatchError",
    "ScalarSyntaxError",
    "Field",
    "Rationals",
    "PrimeField",
    "QQ",
    "field_from_spec",
    "FieldElement",
    "field_arith",
    "parse_scalar",
    "format_scalar",
]


class FieldArithmeticError(ZeroDivisionError):
    """Division by zero (or inversion of zero) in a coefficient field."""


class FieldMismatchError(ValueError):
    """Operands from two different fields were combined."""


class ScalarSyntaxError(ValueError):
    """A scalar literal does not match ``[-]digits[/digits]``."""


_LITERAL = re.compile(r"^\s*([+-]?)\s*(\d+)\s*(?:/\s*(\d+))?\s*$")


class Field:
    """Uniform operation table for one coefficient field."""

    name = "?"
    characteristic = 0

    # subclasses provide: __call__, add, sub, mul, neg, inv, is_zero, format,
    # axpy (in-place sparse row update) and spec()

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def eq(self, a, b):
        return a == b

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def parse(self, text: str):
        m = _LITERAL.match(text.replace("−", "-"))
        if not m:
            raise ScalarSyntaxError(f"malformed scalar literal {text!r}")
        sign, num, den = m.groups()
        n = int(num)
        d = int(den) if den is not None else 1
        if sign == "-":
            n = -n
        if d == 0:
            raise FieldArithmeticError(f"zero denominator in {text!r}")
        return self.from_fraction(n, d)

    def from_fraction(self, n: int, d: int):
        return self.div(self(n), self(d))

    def element(self, value) -> "FieldElement":
        return FieldElement(self, self(value))


class Rationals(Field):
    name = "Q"
    characteristic = 0

    def __call__(self, value):
        if isinstance(value, Fraction):
            return mpq(value.numerator, value.denominator)
        if isinstance(value, str):
            return self.parse(value)
        return mpq(value)

    def from_fraction(self, n, d):
        if d == 0:
            raise FieldArithmeticError("zero denominator")
        return mpq(n, d)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if not a:
            raise FieldArithmeticError("inverse of zero in Q")
        return 1 / a

    def div(self, a, b):
        if not b:
            raise FieldArithmeticError("division by zero in Q")
        return a / b

    def is_zero(self, a):
        return not a

    def format(self, a) -> str:
        a = mpq(a)
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def axpy(self, target: dict, factor, source: dict) -> None:
        """target += factor * source, dropping zeros."""
        for c, v in source.items():
            w = target.get(c)
            if w is None:
                w = factor * v
                if w:
                    target[c] = w
            else:
                w = w + factor * v
                if w:
                    target[c] = w
                else:
                    del target[c]

    def spec(self) -> str:
        return "Q"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "QQ"


class PrimeField(Field):
    def __init__(self, p: int):
        p = int(p)
        if p <= 3:
            raise ValueError(f"characteristic {p} is not supported (need a prime >= 5)")
        if not gmpy2.is_prime(p):
            raise ValueError(f"{p} is not prime")
        if p >= 2**63:
            raise ValueError(f"modulus {p} does not fit in a machine word")
        self.p = p
        self.characteristic = p
        self.name = f"Zp({p})"

    def __call__(self, value):
        if isinstance(value, str):
            return self.parse(value)
        if isinstance(value, Fraction):
            return self.from_fraction(value.numerator, value.denominator)
        if isinstance(value, type(mpq(0))):
            return self.from_fraction(int(value.numerator), int(value.denominator))
        return int(value) % self.p

    def from_fraction(self, n, d):
        d %= self.p
        if d == 0:
            raise FieldArithmeticError(f"denominator not invertible mod {self.p}")
        return n * pow(d, -1, self.p) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def neg(self, a):
        return -a % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise FieldArithmeticError(f"inverse of zero mod {self.p}")
        return pow(a, -1, self.p)

    def is_zero(self, a):
        return a == 0

    def format(self, a) -> str:
        return str(a)

    def axpy(self, target: dict, factor, source: dict) -> None:
        p = self.p
        for c, v in source.items():
            w = (target.get(c, 0) + factor * v) % p
            if w:
                target[c] = w
            else:
                target.pop(c, None)

    def spec(self) -> str:
        return f"Zp {self.p}"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Zp", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"


QQ = Rationals()


def field_from_spec(text: str) -> Field:
    """Parse ``Q`` or ``Zp <p>`` (also ``Zp(p)``, ``Z_p p``)."""
    t = text.strip()
    if t.upper() in ("Q", "QQ", "RATIONALS"):
        return QQ
    m = re.match(r"^Z_?p\s*\(?\s*(\d+)\s*\)?$", t, re.IGNORECASE)
    if m:
        return PrimeField(int(m.group(1)))
    raise ValueError(f"unknown field {text!r}")


@dataclass(frozen=True)
class FieldElement:
    """A checked scalar: raw value plus the field it lives in."""

    field: Field
    value: object

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(f"{self.field!r} vs {other.field!r}")
            return other.value
        if isinstance(other, int):
            return self.field(other)
        raise TypeError(f"cannot combine a field element with {type(other).__name__}")

    def __add__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.sub(self.value, b))

    def __rsub__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.sub(b, self.value))

    def __mul__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        return FieldElement(self.field, self.field.div(self.value, b))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def inv(self):
        return FieldElement(self.field, self.field.inv(self.value))

    def is_zero(self):
        return self.field.is_zero(self.value)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == self.field(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __str__(self):
        return self.field.format(self.value)

    def __repr__(self):
        return f"FieldElement({self.field!r}, {self})"


def field_arith(op: str, a: FieldElement, b: FieldElement | None = None):
    """Single entry point for the field operations by name."""
    if b is not None and a.field != b.field:
        raise FieldMismatchError(f"{a.field!r} vs {b.field!r}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inv()
    if op == "is_zero":
        return a.is_zero()
    if op == "eq":
        return a == b
    raise ValueError(f"unknown field operation {op!r}")


def parse_scalar(text: str, field: Field) -> FieldElement:
    return FieldElement(field, field.parse(text))


def format_scalar(a: FieldElement) -> str:
    return a.field.format(a.value)
