"""Discretely valued fields with exact arithmetic.

Two backends share one interface:

* :class:`PAdicField` -- the rationals with the ``p``-adic valuation.  Scalars
  are :class:`fractions.Fraction` instances.
* :class:`LaurentField` -- rational functions ``Q(t)`` with the ``t``-adic
  valuation.  Scalars are :class:`RationalFunction` instances.

Everything above this module only talks to a field object, never to the
concrete scalar type.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import flint

from .errors import (
    DivisionByZero,
    NegativeValuation,
    ParseError,
    UnsupportedEnumeration,
)

__all__ = [
    "INF",
    "FieldSpec",
    "PAdicField",
    "LaurentField",
    "RationalFunction",
    "field_from_json",
    "is_prime",
    "frac_part",
    "ceil_q",
    "floor_q",
]


@total_ordering
class _Infinity:
    """The valuation of zero.  Absorbs addition and dominates every number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("toricbt.inf")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ValueError("inf - inf is undefined")
        return self


INF = _Infinity()


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def floor_q(x) -> int:
    return math.floor(Fraction(x))


def ceil_q(x) -> int:
    return math.ceil(Fraction(x))


def frac_part(x) -> Fraction:
    """Fractional part in ``[0, 1)``."""
    x = Fraction(x)
    return x - math.floor(x)


def parse_fraction(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text!r}") from exc


# ---------------------------------------------------------------------------
# rational functions over Q
# ---------------------------------------------------------------------------

def _to_fmpq(q) -> flint.fmpq:
    q = Fraction(q)
    return flint.fmpq(q.numerator, q.denominator)


def _fraction(c: flint.fmpq) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def _poly(coeffs) -> flint.fmpq_poly:
    return flint.fmpq_poly([_to_fmpq(c) for c in coeffs])


def _low_degree(p: flint.fmpq_poly) -> int:
    for i, c in enumerate(p.coeffs()):
        if c != 0:
            return i
    raise ValueError("zero polynomial has no lowest term")


_ONE_POLY = flint.fmpq_poly([1])


class RationalFunction:
    """An element of ``Q(t)`` kept as ``num/den`` with ``gcd = 1`` and ``den`` monic."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        if not isinstance(num, flint.fmpq_poly):
            num = _poly([num])
        if den is None or (isinstance(den, flint.fmpq_poly) and den == _ONE_POLY):
            # polynomials are already reduced
            self.num = num
            self.den = _ONE_POLY
            self._hash = None
            return
        if not isinstance(den, flint.fmpq_poly):
            den = _poly([den])
        if den == 0:
            raise DivisionByZero("rational function with zero denominator")
        if num == 0:
            den = flint.fmpq_poly([1])
        else:
            g = num.gcd(den)
            if g.degree() > 0:
                num = divmod(num, g)[0]
                den = divmod(den, g)[0]
        lc = den[den.degree()]
        if lc != 1:
            num = num / lc
            den = den / lc
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _coerce(cls, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction)):
            return cls(_poly([other]))
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num == 0

    def key(self):
        return (
            tuple(_fraction(c) for c in self.num.coeffs()),
            tuple(_fraction(c) for c in self.den.coeffs()),
        )

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            if self.den.degree() == 0 and self.num.degree() <= 0:
                self._hash = hash(self.constant_value())
            else:
                self._hash = hash(self.key())
        return self._hash

    def constant_value(self) -> Fraction:
        """Value of a constant function; raises for non-constants."""
        if self.den.degree() != 0 or self.num.degree() > 0:
            raise ValueError("not a constant")
        return _fraction(self.num[0]) if self.num != 0 else Fraction(0)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num == 0:
            raise DivisionByZero("division by zero")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(flint.fmpq_poly([1])) / (self ** (-k))
        return RationalFunction(self.num ** k, self.den ** k)

    def __repr__(self):
        return f"RationalFunction({LaurentField().format(self)!r})"


# ---------------------------------------------------------------------------
# field specifications
# ---------------------------------------------------------------------------

class FieldSpec:
    """Interface of a discretely valued field ``K`` with valuation ring ``O``.

    Subclasses provide the scalar type, the valuation, the uniformizer and
    canonical representatives of ``K / pi^a O``.
    """

    name = "abstract"

    # construction ---------------------------------------------------------
    def coerce(self, x):
        raise NotImplementedError

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    # arithmetic -----------------------------------------------------------
    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def div(self, a, b):
        if self.is_zero(b):
            raise DivisionByZero("division by zero in K")
        return a / b

    def is_zero(self, a) -> bool:
        return a == 0

    # valuation ------------------------------------------------------------
    def val(self, a):
        raise NotImplementedError

    def uniformizer_pow(self, k: int):
        raise NotImplementedError

    def residue(self, a):
        raise NotImplementedError

    def truncate(self, a, k: int):
        """Canonical representative of the class of ``a`` in ``K / pi^k O``.

        The representative is zero or has valuation ``< k``; two elements
        differ by an element of ``pi^k O`` iff their representatives agree.
        """
        raise NotImplementedError

    def residue_lifts(self):
        """Lifts to ``O`` of all residue classes, zero first."""
        raise UnsupportedEnumeration(f"{self.name}: residue field is infinite")

    # serialization --------------------------------------------------------
    def parse(self, text):
        raise NotImplementedError

    def format(self, a) -> str:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PAdicField(FieldSpec):
    """``Q`` with the ``p``-adic valuation; residue field ``F_p``."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"p must be a prime, got {self.p!r}")

    @property
    def name(self):
        return f"Q_{self.p}"

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return self.parse(x)
        raise TypeError(f"cannot coerce {x!r} into {self.name}")

    def _vint(self, n: int) -> int:
        k = 0
        while n % self.p == 0:
            n //= self.p
            k += 1
        return k

    def val(self, a):
        a = Fraction(a)
        if a == 0:
            return INF
        return self._vint(a.numerator) - self._vint(a.denominator)

    def uniformizer_pow(self, k: int):
        return Fraction(self.p) ** k

    def residue(self, a) -> int:
        a = Fraction(a)
        if a == 0:
            return 0
        if self.val(a) < 0:
            raise NegativeValuation(f"residue of {a} with valuation {self.val(a)}")
        return a.numerator * pow(a.denominator, -1, self.p) % self.p

    def truncate(self, a, k: int):
        a = Fraction(a)
        if a == 0:
            return a
        m = self.val(a)
        if m >= k:
            return Fraction(0)
        unit = a / Fraction(self.p) ** m
        mod = self.p ** (k - m)
        digits = unit.numerator * pow(unit.denominator, -1, mod) % mod
        return Fraction(digits) * Fraction(self.p) ** m

    def residue_lifts(self):
        return [Fraction(i) for i in range(self.p)]

    def parse(self, text):
        return parse_fraction(text)

    def format(self, a) -> str:
        return str(Fraction(a))

    def to_json(self) -> dict:
        return {"backend": "padic", "p": self.p}


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


class _ExprParser:
    """Recursive-descent parser for rational expressions in one variable."""

    def __init__(self, text: str, var: str):
        self.var = var
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character in {text!r} at {pos}")
            pos = m.end()
            num, name, op = m.groups()
            if num is not None:
                self.tokens.append(("num", int(num)))
            elif name is not None:
                if name != var:
                    raise ParseError(f"unknown symbol {name!r} (expected {var!r})")
                self.tokens.append(("var", name))
            else:
                self.tokens.append(("op", "^" if op == "**" else op))
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> RationalFunction:
        if not self.tokens:
            raise ParseError("empty expression")
        value = self.expr()
        if self.i != len(self.tokens):
            raise ParseError(f"trailing tokens in expression: {self.tokens[self.i:]}")
        return value

    def expr(self):
        value = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while True:
            tok = self.peek()
            if tok in (("op", "*"), ("op", "/")):
                self.take()
                rhs = self.unary()
                value = value * rhs if tok[1] == "*" else value / rhs
            elif tok[0] in ("num", "var") or tok == ("op", "("):
                value = value * self.unary()  # implicit product, e.g. "3t"
            else:
                return value

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, exp = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer literal")
            return base ** (sign * exp)
        return base

    def atom(self):
        kind, value = self.take()
        if kind == "num":
            return RationalFunction(_poly([value]))
        if kind == "var":
            return RationalFunction(flint.fmpq_poly([0, 1]))
        if (kind, value) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("unbalanced parentheses")
            return inner
        raise ParseError(f"unexpected token {value!r}")


def _format_int_poly(coeffs, var: str) -> str:
    terms = []
    for deg in range(len(coeffs) - 1, -1, -1):
        c = coeffs[deg]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if deg == 0:
            body = str(mag)
        else:
            mono = var if deg == 1 else f"{var}^{deg}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += sign + body
    return out


@dataclass(frozen=True)
class LaurentField(FieldSpec):
    """``Q(t)`` with the ``t``-adic valuation; residue field ``Q``."""

    var: str = "t"

    @property
    def name(self):
        return f"Q(({self.var}))"

    def coerce(self, x):
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, (int, Fraction)):
            return RationalFunction(_poly([x]))
        if isinstance(x, str):
            return self.parse(x)
        raise TypeError(f"cannot coerce {x!r} into {self.name}")

    def val(self, a):
        a = self.coerce(a)
        if a.num == 0:
            return INF
        return _low_degree(a.num) - _low_degree(a.den)

    def uniformizer_pow(self, k: int):
        if k >= 0:
            return RationalFunction(flint.fmpq_poly([0] * k + [1]))
        return RationalFunction(flint.fmpq_poly([1]), flint.fmpq_poly([0] * (-k) + [1]))

    def residue(self, a) -> Fraction:
        a = self.coerce(a)
        v = self.val(a)
        if v is INF or v > 0:
            return Fraction(0)
        if v < 0:
            raise NegativeValuation(f"residue of element with valuation {v}")
        return _fraction(a.num(0)) / _fraction(a.den(0))

    def _series(self, a: RationalFunction, upto: int):
        """Laurent coefficients ``{k: c_k}`` of ``a`` for ``val(a) <= k < upto``."""
        e = _low_degree(a.den)
        num = [_fraction(c) for c in a.num.coeffs()]
        den = [_fraction(c) for c in a.den.coeffs()][e:]
        # a = t^{-e} * num / den with den(0) != 0
        n_terms = upto + e
        out = {}
        if n_terms <= 0:
            return out
        inv0 = 1 / den[0]
        q = []
        for k in range(n_terms):
            acc = num[k] if k < len(num) else Fraction(0)
            for j in range(1, min(k, len(den) - 1) + 1):
                acc -= den[j] * q[k - j]
            q.append(acc * inv0)
        for k, c in enumerate(q):
            if c != 0:
                out[k - e] = c
        return out

    def truncate(self, a, k: int):
        a = self.coerce(a)
        if a.num == 0:
            return a
        if self.val(a) >= k:
            return self.zero
        coeffs = self._series(a, k)
        low = min(coeffs)
        shift = max(0, -low)
        poly = [Fraction(0)] * (k + shift)
        for deg, c in coeffs.items():
            poly[deg + shift] = c
        num = _poly(poly)
        den = flint.fmpq_poly([0] * shift + [1])
        return RationalFunction(num, den)

    def parse(self, text):
        if isinstance(text, (int, Fraction)):
            return self.coerce(text)
        return _ExprParser(str(text), self.var).parse()

    def format(self, a) -> str:
        a = self.coerce(a)
        num = [_fraction(c) for c in a.num.coeffs()] or [Fraction(0)]
        den = [_fraction(c) for c in a.den.coeffs()]
        lcm = 1
        for c in num + den:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        inum = [int(c * lcm) for c in num]
        iden = [int(c * lcm) for c in den]
        g = 0
        for c in inum + iden:
            g = math.gcd(g, c)
        g = g or 1
        inum = [c // g for c in inum]
        iden = [c // g for c in iden]
        return f"({_format_int_poly(inum, self.var)})/({_format_int_poly(iden, self.var)})"

    def to_json(self) -> dict:
        return {"backend": "laurent"}


def field_from_json(obj) -> FieldSpec:
    if not isinstance(obj, dict) or "backend" not in obj:
        raise ParseError(f"field spec must be an object with 'backend': {obj!r}")
    backend = obj["backend"]
    if backend == "padic":
        try:
            return PAdicField(int(obj["p"]))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad p-adic field spec {obj!r}: {exc}") from exc
    if backend == "laurent":
        return LaurentField(obj.get("var", "t"))
    raise ParseError(f"unknown field backend {backend!r}")
