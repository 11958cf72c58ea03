"""Exact scalar arithmetic for the engine.

Two scalar domains live here:

* ``Coefficient`` -- an element of the fraction field of multivariate
  polynomials over the rationals in the declared constant parameters
  (``mu``, ``c1`` ... ``c8``, ansatz unknowns).  Stored in reduced canonical
  form: numerator and denominator coprime expanded polynomials, denominator
  with positive leading coefficient.
* ``AffineExp`` -- an exponent that is an affine rational combination of
  parameters (``mu``, ``mu - 1``, ``-4/3``).  These appear as powers of an
  undifferentiated dependent variable.

The polynomial gcd / reduction work is delegated to sympy; everything the
rest of the engine sees is immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy

from .errors import UnsupportedOperationError

__all__ = ["ConstParam", "Coefficient", "AffineExp"]


@lru_cache(maxsize=None)
def _sym(name: str) -> sympy.Symbol:
    return sympy.Symbol(name)


@dataclass(frozen=True)
class ConstParam:
    """A named constant parameter of the session (never an integration variable)."""

    name: str

    @property
    def symbol(self) -> sympy.Symbol:
        return _sym(self.name)

    def __str__(self) -> str:
        return self.name


def _canonical_pair(expr):
    """Reduce a sympy scalar to a canonical (num, den) polynomial pair."""
    expr = sympy.together(expr)
    num, den = sympy.fraction(sympy.cancel(expr))
    num = sympy.expand(num)
    den = sympy.expand(den)
    if den.is_zero:
        raise ZeroDivisionError("zero denominator in coefficient")
    if _leading_sign(den) < 0:
        num, den = sympy.expand(-num), sympy.expand(-den)
    return num, den


def _leading_sign(poly_expr) -> int:
    syms = sorted(poly_expr.free_symbols, key=str)
    if not syms:
        return 1 if poly_expr >= 0 else -1
    lc = sympy.Poly(poly_expr, *[_sym(str(s)) for s in syms]).LC()
    return 1 if lc >= 0 else -1


class Coefficient:
    """Element of Q(params), immutable, with exact arithmetic."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, value=0, den=None):
        needs_canon = False
        if isinstance(value, Coefficient):
            num, d = value.num, value.den
        elif isinstance(value, Fraction):
            num, d = sympy.Integer(value.numerator), sympy.Integer(value.denominator)
        elif isinstance(value, int):
            num, d = sympy.Integer(value), sympy.Integer(1)
        elif isinstance(value, ConstParam):
            num, d = value.symbol, sympy.Integer(1)
        elif isinstance(value, str):
            num, d = _sym(value), sympy.Integer(1)
        else:
            num, d = sympy.sympify(value), sympy.Integer(1)
            needs_canon = True
        if den is not None:
            other = Coefficient(den)
            num, d = num * other.den, d * other.num
            needs_canon = True
        if needs_canon:
            num, d = _canonical_pair(num / d)
        self.num = num
        self.den = d
        self._hash = None

    @classmethod
    def _raw(cls, num, den) -> "Coefficient":
        c = object.__new__(cls)
        c.num = num
        c.den = den
        c._hash = None
        return c

    @classmethod
    def zero(cls) -> "Coefficient":
        return _C_ZERO

    @classmethod
    def one(cls) -> "Coefficient":
        return _C_ONE

    # -- predicates ------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.num.is_zero is True

    @property
    def is_one(self) -> bool:
        return self.num == 1 and self.den == 1

    @property
    def is_rational(self) -> bool:
        return self.num.is_Rational and self.den.is_Rational

    def free_params(self) -> set:
        return {str(s) for s in self.num.free_symbols | self.den.free_symbols}

    def leading_sign(self) -> int:
        if self.is_zero:
            return 0
        return _leading_sign(self.num)

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Coefficient):
            return other
        if isinstance(other, (int, Fraction, ConstParam)):
            return Coefficient(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == 1 and other.den == 1:
            return Coefficient._raw(sympy.expand(self.num + other.num), sympy.Integer(1))
        num = self.num * other.den + other.num * self.den
        den = self.den * other.den
        return Coefficient._raw(*_canonical_pair(num / den))

    __radd__ = __add__

    def __neg__(self):
        return Coefficient._raw(sympy.expand(-self.num), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return _C_ZERO
        if self.den == 1 and other.den == 1:
            return Coefficient._raw(sympy.expand(self.num * other.num), sympy.Integer(1))
        num = self.num * other.num
        den = self.den * other.den
        return Coefficient._raw(*_canonical_pair(num / den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by zero coefficient")
        return Coefficient._raw(*_canonical_pair((self.num * other.den) / (self.den * other.num)))

    def __rtruediv__(self, other):
        return Coefficient(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise UnsupportedOperationError("coefficient powers must be integers")
        if k == 0:
            return _C_ONE
        if k < 0:
            return _C_ONE / (self ** (-k))
        return Coefficient._raw(sympy.expand(self.num ** k), sympy.expand(self.den ** k))

    def inverse(self):
        return _C_ONE / self

    def diff(self, param) -> "Coefficient":
        name = param.name if isinstance(param, ConstParam) else str(param)
        return Coefficient._raw(*_canonical_pair(sympy.diff(self.as_sympy(), _sym(name))))

    def subs_params(self, mapping) -> "Coefficient":
        """Substitute parameters by coefficients; mapping keys are names."""
        sub = {_sym(k): (v.as_sympy() if isinstance(v, Coefficient) else sympy.sympify(v))
               for k, v in mapping.items()}
        return Coefficient._raw(*_canonical_pair(self.as_sympy().subs(sub)))

    def evalf(self, param_values) -> float:
        sub = {_sym(k): v for k, v in param_values.items()}
        num = self.num.subs(sub)
        den = self.den.subs(sub)
        if num.free_symbols or den.free_symbols:
            missing = sorted(str(s) for s in (num.free_symbols | den.free_symbols))
            from .errors import UnboundAtomError

            raise UnboundAtomError(f"unbound parameters in coefficient: {missing}")
        return float(num) / float(den)

    # -- comparison / hashing -------------------------------------------
    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- conversion / display -------------------------------------------
    def as_sympy(self):
        return self.num / self.den

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise UnsupportedOperationError("coefficient is not a plain rational")
        r = sympy.Rational(self.num, self.den)
        return Fraction(int(r.p), int(r.q))

    def __repr__(self):
        return f"Coefficient({self})"

    def __str__(self):
        num, den = sympy.factor(self.num), sympy.factor(self.den)
        s_num = str(num).replace("**", "^")
        if self.den == 1:
            return s_num
        s_den = str(den).replace("**", "^")
        if not num.is_Atom and not num.is_Rational:
            s_num = f"({s_num})"
        if not den.is_Atom:
            s_den = f"({s_den})"
        return f"{s_num}/{s_den}"

    def latex(self) -> str:
        if self.den == 1:
            return sympy.latex(sympy.factor(self.num))
        return sympy.latex(sympy.factor(self.num) / sympy.factor(self.den))


_C_ZERO = Coefficient._raw(sympy.Integer(0), sympy.Integer(1))
_C_ONE = Coefficient._raw(sympy.Integer(1), sympy.Integer(1))


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise UnsupportedOperationError(f"exponent component must be rational, got {x!r}")


@dataclass(frozen=True)
class AffineExp:
    """Exponent of the form const + sum(coeff_i * param_i), all rational."""

    const: Fraction
    params: tuple  # sorted tuple of (name, Fraction)

    @classmethod
    def make(cls, const=0, params=()) -> "AffineExp":
        items = {}
        for name, c in params:
            c = _frac(c)
            if c:
                items[name] = items.get(name, Fraction(0)) + c
        cleaned = tuple(sorted((n, c) for n, c in items.items() if c))
        return cls(_frac(const), cleaned)

    @classmethod
    def integer(cls, k: int) -> "AffineExp":
        return cls(Fraction(k), ())

    @classmethod
    def param(cls, name: str) -> "AffineExp":
        return cls(Fraction(0), ((name, Fraction(1)),))

    @property
    def is_zero(self) -> bool:
        return not self.params and self.const == 0

    @property
    def is_constant(self) -> bool:
        return not self.params

    @property
    def is_integer(self) -> bool:
        return not self.params and self.const.denominator == 1

    def as_int(self) -> int:
        if not self.is_integer:
            raise UnsupportedOperationError(f"exponent {self} is not a plain integer")
        return int(self.const)

    def __add__(self, other):
        if isinstance(other, int):
            other = AffineExp.integer(other)
        return AffineExp.make(self.const + other.const, self.params + other.params)

    def __sub__(self, other):
        if isinstance(other, int):
            other = AffineExp.integer(other)
        return self + (-other)

    def __neg__(self):
        return AffineExp.make(-self.const, tuple((n, -c) for n, c in self.params))

    def scale(self, k) -> "AffineExp":
        k = _frac(k)
        return AffineExp.make(self.const * k, tuple((n, c * k) for n, c in self.params))

    def to_coefficient(self) -> Coefficient:
        c = Coefficient(self.const)
        for name, f in self.params:
            c = c + Coefficient(f) * Coefficient(name)
        return c

    def evalf(self, param_values) -> float:
        total = float(self.const)
        for name, c in self.params:
            if name not in param_values:
                from .errors import UnboundAtomError

                raise UnboundAtomError(f"unbound parameter in exponent: {name}")
            total += float(c) * param_values[name]
        return total

    def sort_key(self):
        return (self.params, self.const)

    def __str__(self):
        parts = []
        for name, c in self.params:
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{c}*{name}")
        if self.const or not parts:
            parts.append(str(self.const))
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else f"+{p}"
        return out
