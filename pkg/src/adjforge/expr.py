"""Canonical symbolic expressions on jet space.

An expression is a finite sum of terms ``coeff * eps^k * monomial`` where

* ``coeff`` is an exact rational function of the declared parameters,
* ``eps`` is the distinguished small parameter, truncated at the
  expression's ``order`` (terms with ``k >= order`` do not exist),
* the monomial is a product of powers of *atoms*: independent variables,
  jet coordinates (a dependent variable or one of its partial derivatives,
  with sorted multi-index so ``u_tx`` and ``u_xt`` are the same atom), and
  applications of function symbols ``F, F', F'', ...`` to an
  undifferentiated dependent variable.

Powers of derivative coordinates, independent variables and function atoms
are integers; an undifferentiated dependent variable may in addition carry
an affine-parameter exponent such as ``mu + 1`` or ``-4/3``.

Expressions are immutable and canonical: equal values have equal
representations, so structural equality decides semantic equality within
the representable class.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .coeff import AffineExp, Coefficient, ConstParam
from .errors import ConfigurationError, UnboundAtomError, UnsupportedOperationError

__all__ = [
    "BaseVar",
    "JetCoord",
    "FuncAtom",
    "func_atom",
    "Monomial",
    "Term",
    "Expr",
    "Names",
    "normalize",
    "equals",
]

U, V, AUX = "u", "v", "aux"
_FAMILY_RANK = {U: 0, V: 1, AUX: 2}

ABSTRACT, EXP = "abstract", "exp"


@dataclass(frozen=True)
class BaseVar:
    """Independent variable x^index."""

    index: int

    def sort_key(self):
        return (0, self.index, 0, 0, ())


@dataclass(frozen=True)
class JetCoord:
    """Dependent-variable coordinate u^sigma differentiated along ``multi``.

    ``multi`` is a sorted tuple of independent-variable indices; the empty
    tuple is the variable itself.
    """

    family: str
    sigma: int
    multi: tuple = ()

    def __post_init__(self):
        if self.family not in _FAMILY_RANK:
            raise ConfigurationError(f"unknown variable family {self.family!r}")
        if tuple(sorted(self.multi)) != tuple(self.multi):
            object.__setattr__(self, "multi", tuple(sorted(self.multi)))

    @property
    def order(self) -> int:
        return len(self.multi)

    def derive(self, i: int) -> "JetCoord":
        return JetCoord(self.family, self.sigma, tuple(sorted(self.multi + (i,))))

    def contains(self, other: "JetCoord") -> bool:
        """True if self is ``other`` differentiated further (same variable)."""
        if (self.family, self.sigma) != (other.family, other.sigma):
            return False
        counts = {}
        for i in self.multi:
            counts[i] = counts.get(i, 0) + 1
        for i in other.multi:
            counts[i] = counts.get(i, 0) - 1
            if counts[i] < 0:
                return False
        return True

    def minus(self, other: "JetCoord") -> tuple:
        """Multi-index difference self - other (assumes ``contains``)."""
        residue = list(self.multi)
        for i in other.multi:
            residue.remove(i)
        return tuple(residue)

    def sort_key(self):
        return (1, _FAMILY_RANK[self.family], self.sigma, len(self.multi), self.multi)


@dataclass(frozen=True)
class FuncAtom:
    """k-th derivative of a function symbol applied to u^sigma.

    ``rule`` fixes the differentiation behaviour: ``abstract`` keeps
    ``F, F', F''`` as distinct atoms; ``exp`` satisfies ``F' = F`` (so the
    derivative order is canonically zero).
    """

    symbol: str
    sigma: int
    dorder: int = 0
    rule: str = ABSTRACT

    def sort_key(self):
        return (2, self.symbol, self.sigma, self.dorder, ())

    @property
    def argument(self) -> JetCoord:
        return JetCoord(U, self.sigma)


def func_atom(symbol, sigma, dorder=0, rule=ABSTRACT) -> FuncAtom:
    if rule == EXP:
        dorder = 0
    elif rule != ABSTRACT:
        raise ConfigurationError(f"unknown function rule {rule!r}")
    return FuncAtom(symbol, sigma, dorder, rule)


Atom = (BaseVar, JetCoord, FuncAtom)


def _as_affine(exp) -> AffineExp:
    if isinstance(exp, AffineExp):
        return exp
    if isinstance(exp, int):
        return AffineExp.integer(exp)
    if isinstance(exp, Fraction):
        return AffineExp.make(exp)
    raise UnsupportedOperationError(f"unsupported exponent {exp!r}")


def _check_exponent(atom, exp: AffineExp):
    if exp.is_integer:
        return
    if isinstance(atom, JetCoord) and atom.order == 0:
        return
    raise UnsupportedOperationError(
        f"non-integer exponent {exp} only allowed on an undifferentiated "
        f"dependent variable, not on {atom!r}"
    )


class Monomial:
    """Product of atom powers; immutable, sorted by the canonical atom order."""

    __slots__ = ("entries", "_key", "_hash")

    def __init__(self, entries=()):
        items = []
        for atom, exp in entries:
            exp = _as_affine(exp)
            if exp.is_zero:
                continue
            _check_exponent(atom, exp)
            items.append((atom, exp))
        items.sort(key=lambda p: p[0].sort_key())
        self.entries = tuple(items)
        self._key = tuple((a.sort_key(), e.sort_key()) for a, e in self.entries)
        self._hash = hash(self._key)

    @classmethod
    def one(cls) -> "Monomial":
        return _MONO_ONE

    @classmethod
    def from_dict(cls, d) -> "Monomial":
        return cls(tuple(d.items()))

    @property
    def is_one(self) -> bool:
        return not self.entries

    def atoms(self):
        return [a for a, _ in self.entries]

    def get(self, atom) -> AffineExp:
        for a, e in self.entries:
            if a == atom:
                return e
        return AffineExp.integer(0)

    def mul(self, other: "Monomial") -> "Monomial":
        d = {a: e for a, e in self.entries}
        for a, e in other.entries:
            if a in d:
                d[a] = d[a] + e
            else:
                d[a] = e
        return Monomial(tuple(d.items()))

    def pow(self, k: int) -> "Monomial":
        if k == 0:
            return _MONO_ONE
        return Monomial(tuple((a, e.scale(k)) for a, e in self.entries))

    def without(self, atom) -> "Monomial":
        return Monomial(tuple((a, e) for a, e in self.entries if a != atom))

    def sort_key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, Monomial) and self.entries == other.entries

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Monomial(%s)" % ", ".join(f"{a!r}^{e}" for a, e in self.entries)


_MONO_ONE = Monomial()


class Term(NamedTuple):
    coeff: Coefficient
    eps_power: int
    monomial: Monomial


class Expr:
    """Truncated canonical sum of terms; all operations are pure."""

    __slots__ = ("_terms", "order", "_hash")

    def __init__(self, terms, order: int):
        if order < 1:
            raise ConfigurationError("truncation order must be >= 1")
        merged = {}
        for coeff, eps, mono in terms:
            if eps >= order or eps < 0:
                if eps < 0:
                    raise ConfigurationError("negative eps power")
                continue
            key = (eps, mono)
            if key in merged:
                merged[key] = merged[key] + coeff
            else:
                merged[key] = Coefficient(coeff)
        cleaned = [
            (c, eps, mono) for (eps, mono), c in merged.items() if not c.is_zero
        ]
        cleaned.sort(key=lambda t: (t[1], t[2].sort_key()))
        self._terms = tuple(cleaned)
        self.order = order
        self._hash = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, order: int) -> "Expr":
        return cls((), order)

    @classmethod
    def one(cls, order: int) -> "Expr":
        return cls.const(1, order)

    @classmethod
    def const(cls, c, order: int) -> "Expr":
        return cls(((Coefficient(c), 0, _MONO_ONE),), order)

    @classmethod
    def eps(cls, order: int, power: int = 1) -> "Expr":
        return cls(((Coefficient(1), power, _MONO_ONE),), order)

    @classmethod
    def atom(cls, a, order: int, exp=1) -> "Expr":
        return cls(((Coefficient(1), 0, Monomial(((a, _as_affine(exp)),))),), order)

    # -- inspection ---------------------------------------------------------
    def terms(self):
        return [Term(c, e, m) for c, e, m in self._terms]

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_coefficient(self) -> bool:
        if self.is_zero:
            return True
        return len(self._terms) == 1 and self._terms[0][1] == 0 and self._terms[0][2].is_one

    def as_coefficient(self) -> Coefficient:
        if self.is_zero:
            return Coefficient(0)
        if not self.is_coefficient:
            raise UnsupportedOperationError("expression is not a pure coefficient")
        return self._terms[0][0]

    def atoms(self) -> set:
        out = set()
        for _, _, mono in self._terms:
            out.update(mono.atoms())
        return out

    def jet_coords(self, family=None) -> set:
        return {
            a
            for a in self.atoms()
            if isinstance(a, JetCoord) and (family is None or a.family == family)
        }

    def func_atoms(self) -> set:
        return {a for a in self.atoms() if isinstance(a, FuncAtom)}

    def max_jet_order(self, family=None) -> int:
        coords = self.jet_coords(family)
        return max((c.order for c in coords), default=0)

    def max_eps_power(self) -> int:
        return max((e for _, e, _ in self._terms), default=0)

    def eps_part(self, k: int) -> "Expr":
        """Coefficient of eps^k, as an eps-free expression of the same order."""
        return Expr(
            tuple((c, 0, m) for c, e, m in self._terms if e == k), self.order
        )

    def free_params(self) -> set:
        out = set()
        for c, _, mono in self._terms:
            out.update(c.free_params())
            for _, exp in mono.entries:
                out.update(name for name, _ in exp.params)
        return out

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Expr):
            return other
        if isinstance(other, (int, Fraction, Coefficient, ConstParam)):
            return Expr.const(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        order = min(self.order, other.order)
        return Expr(self._terms + other._terms, order)

    __radd__ = __add__

    def __neg__(self):
        return Expr(tuple((-c, e, m) for c, e, m in self._terms), self.order)

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
        order = min(self.order, other.order)
        out = []
        for c1, e1, m1 in self._terms:
            for c2, e2, m2 in other._terms:
                eps = e1 + e2
                if eps >= order:
                    continue
                out.append((c1 * c2, eps, m1.mul(m2)))
        return Expr(tuple(out), order)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise UnsupportedOperationError("expression powers must be integers")
        if k == 0:
            return Expr.one(self.order)
        if k < 0:
            return _invert_single_term(self) ** (-k)
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Coefficient, ConstParam)):
            c = Coefficient(other)
            if c.is_zero:
                raise ZeroDivisionError("division by zero")
            inv = c.inverse()
            return Expr(tuple((co * inv, e, m) for co, e, m in self._terms), self.order)
        if isinstance(other, Expr):
            if other.is_coefficient:
                return self / other.as_coefficient()
            raise UnsupportedOperationError(
                "only division by a coefficient is supported; use negative powers "
                "for monomial inverses"
            )
        return NotImplemented

    def __rtruediv__(self, other):
        num = self._coerce(other)
        if num is NotImplemented:
            return NotImplemented
        return num / self

    # -- truncation ---------------------------------------------------------
    def truncate(self, order: int) -> "Expr":
        """Drop all terms with eps power >= order; result carries that order."""
        if order < 1:
            raise ConfigurationError("truncation order must be >= 1")
        return Expr(self._terms, order)

    def at_order(self, order: int) -> "Expr":
        """Reinterpret at a different truncation order.

        Lowering truncates.  Raising keeps the present terms and is only
        sound when the caller knows none were previously dropped (for
        instance eps-free building blocks).
        """
        if order == self.order:
            return self
        return Expr(self._terms, order)

    # -- parameter substitution / mapping ------------------------------------
    def map_coeffs(self, fn) -> "Expr":
        return Expr(tuple((fn(c), e, m) for c, e, m in self._terms), self.order)

    def subs_params(self, mapping) -> "Expr":
        """Substitute coefficient parameters (name -> Coefficient/int/Fraction).

        Parameters appearing in exponents cannot be substituted.
        """
        mapping = {k: Coefficient(v) for k, v in mapping.items()}
        for _, _, mono in self._terms:
            for _, exp in mono.entries:
                for name, _ in exp.params:
                    if name in mapping:
                        raise UnsupportedOperationError(
                            f"parameter {name} occurs in an exponent; "
                            "cannot substitute it"
                        )
        return self.map_coeffs(lambda c: c.subs_params(mapping))

    # -- numeric evaluation ---------------------------------------------------
    def evaluate(self, assignment, eps_value: float = 0.0) -> float:
        """Evaluate at a point; assignment maps atoms and parameter names to floats."""
        params = {k: float(v) for k, v in assignment.items() if isinstance(k, str)}
        total = 0.0
        for c, e, mono in self._terms:
            val = c.evalf(params) * (eps_value ** e)
            for atom, exp in mono.entries:
                if atom not in assignment:
                    raise UnboundAtomError(f"no value assigned to atom {atom!r}")
                val *= float(assignment[atom]) ** exp.evalf(params)
            total += val
        return total

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction, Coefficient)):
                return self == Expr.const(other, self.order)
            return NotImplemented
        return self.order == other.order and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.order, self._terms))
        return self._hash

    def __repr__(self):
        from .render import render_text

        return f"<Expr[{self.order}] {render_text(self)}>"

    def __str__(self):
        from .render import render_text

        return render_text(self)


def _invert_single_term(e: Expr) -> Expr:
    if len(e._terms) != 1:
        raise UnsupportedOperationError("only single-term expressions are invertible")
    c, eps, mono = e._terms[0]
    if eps != 0:
        raise UnsupportedOperationError("cannot invert a term containing eps")
    inv_mono = mono.pow(-1)
    return Expr(((c.inverse(), 0, inv_mono),), e.order)


def invert_term(e: Expr) -> Expr:
    """Inverse of a single-term, eps-free expression (internal helper)."""
    return _invert_single_term(e)


def normalize(x, order: int = 2) -> Expr:
    """Coerce a value into canonical expression form.

    Expressions are canonical by construction, so this is the identity on
    ``Expr`` (hence idempotent); scalars and atoms are lifted.
    """
    if isinstance(x, Expr):
        return x
    if isinstance(x, Atom):
        return Expr.atom(x, order)
    if isinstance(x, (int, Fraction, Coefficient, ConstParam)):
        return Expr.const(x, order)
    raise UnsupportedOperationError(f"cannot normalize {x!r}")


def equals(a: Expr, b: Expr) -> bool:
    """Canonical equality; truncation orders must agree."""
    if a.order != b.order:
        raise ConfigurationError(
            f"cannot compare expressions with truncation orders {a.order} and {b.order}"
        )
    return a._terms == b._terms


@dataclass(frozen=True)
class Names:
    """Printable names for the variables of a session."""

    independents: tuple
    dependents: tuple
    adjoints: tuple = ()
    auxiliaries: tuple = ()

    def __post_init__(self):
        if not self.adjoints:
            if len(self.dependents) == 1:
                adj = ("v",)
            else:
                adj = tuple(f"v{i + 1}" for i in range(len(self.dependents)))
            object.__setattr__(self, "adjoints", adj)
        seen = set()
        for n in (
            list(self.independents)
            + list(self.dependents)
            + list(self.adjoints)
            + list(self.auxiliaries)
        ):
            if n in seen:
                raise ConfigurationError(f"duplicate variable name {n!r}")
            seen.add(n)

    @property
    def n(self) -> int:
        return len(self.independents)

    @property
    def m(self) -> int:
        return len(self.dependents)

    def independent_index(self, name: str) -> int:
        return self.independents.index(name)

    def of_family(self, family: str) -> tuple:
        return {U: self.dependents, V: self.adjoints, AUX: self.auxiliaries}[family]

    def base_name(self, family: str, sigma: int) -> str:
        names = self.of_family(family)
        if sigma >= len(names):
            raise ConfigurationError(f"no declared name for {family}^{sigma}")
        return names[sigma]
