"""Differential operators on jet space.

Total derivatives, single-coordinate partial derivatives, the variational
(Euler) derivative, prolongation coefficients of point generators,
dependent-variable substitution, and rewriting on the solution manifold of
a system given in solved form.

The Euler operator runs over the *distinct* canonical coordinates (mixed
derivatives are stored once, with sorted multi-index); together with plain
single-coordinate partials this is the unique convention under which the
variational derivative annihilates every total divergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

from .coeff import Coefficient
from .errors import ConfigurationError, UnsupportedOperationError
from .expr import (
    U,
    BaseVar,
    Expr,
    FuncAtom,
    JetCoord,
    Monomial,
    func_atom,
)

__all__ = [
    "total_derivative",
    "total_derivative_multi",
    "partial_jet",
    "variational_derivative",
    "substitute_dependent",
    "SolvedForm",
    "Reducer",
    "reduce_on_manifold",
    "prolong_coefficients",
    "apply_prolonged",
]


def _atom_total_derivative(atom, i: int, order: int) -> Expr:
    if isinstance(atom, BaseVar):
        return Expr.one(order) if atom.index == i else Expr.zero(order)
    if isinstance(atom, JetCoord):
        return Expr.atom(atom.derive(i), order)
    if isinstance(atom, FuncAtom):
        fprime = func_atom(atom.symbol, atom.sigma, atom.dorder + 1, atom.rule)
        u_i = JetCoord(U, atom.sigma, (i,))
        return Expr(
            ((Coefficient(1), 0, Monomial(((fprime, 1), (u_i, 1)))),), order
        )
    raise TypeError(f"not an atom: {atom!r}")


def total_derivative(e: Expr, i: int) -> Expr:
    """Total derivative D_i, with the function-atom chain rule F(u) -> F'(u) u_i."""
    parts = []
    for coeff, eps, mono in e._terms:
        for atom, exp in mono.entries:
            datom = _atom_total_derivative(atom, i, e.order)
            if datom.is_zero:
                continue
            lowered = mono.without(atom).mul(Monomial(((atom, exp - 1),)))
            factor = Expr(((coeff * exp.to_coefficient(), eps, lowered),), e.order)
            parts.append(factor * datom)
    total = Expr.zero(e.order)
    for p in parts:
        total = total + p
    return total


def total_derivative_multi(e: Expr, multi) -> Expr:
    for i in multi:
        e = total_derivative(e, i)
    return e


def partial_jet(e: Expr, c) -> Expr:
    """Partial derivative with respect to one canonical coordinate.

    ``c`` may be a jet coordinate, an independent variable or a function
    atom.  Jet coordinates of order zero chain through function atoms
    (``d F(u)/d u = F'(u)``); all other coordinates are treated as
    independent symbols.
    """
    parts = []
    for coeff, eps, mono in e._terms:
        for atom, exp in mono.entries:
            if atom == c:
                lowered = mono.without(atom).mul(Monomial(((atom, exp - 1),)))
                parts.append(
                    Expr(((coeff * exp.to_coefficient(), eps, lowered),), e.order)
                )
            elif (
                isinstance(atom, FuncAtom)
                and isinstance(c, JetCoord)
                and c.family == U
                and c.order == 0
                and atom.sigma == c.sigma
            ):
                fprime = func_atom(atom.symbol, atom.sigma, atom.dorder + 1, atom.rule)
                lowered = mono.without(atom).mul(
                    Monomial(((atom, exp - 1), (fprime, 1)))
                )
                parts.append(
                    Expr(((coeff * exp.to_coefficient(), eps, lowered),), e.order)
                )
    total = Expr.zero(e.order)
    for p in parts:
        total = total + p
    return total


def variational_derivative(e: Expr, family: str, sigma: int) -> Expr:
    """Euler operator: sum over distinct coordinates of (-1)^|J| D_J d/du_J."""
    coords = {c for c in e.jet_coords(family) if c.sigma == sigma}
    coords.add(JetCoord(family, sigma))
    total = Expr.zero(e.order)
    for c in sorted(coords, key=lambda c: c.sort_key()):
        contrib = partial_jet(e, c)
        if contrib.is_zero:
            continue
        contrib = total_derivative_multi(contrib, c.multi)
        if len(c.multi) % 2:
            contrib = -contrib
        total = total + contrib
    return total


def _substitute_atom(e: Expr, atom, replacement: Expr) -> Expr:
    """Replace every occurrence of ``atom^k`` by ``replacement^k``."""
    out = Expr.zero(e.order)
    for coeff, eps, mono in e._terms:
        exp = mono.get(atom)
        if exp.is_zero:
            out = out + Expr(((coeff, eps, mono),), e.order)
            continue
        if not exp.is_integer:
            raise UnsupportedOperationError(
                f"cannot substitute into symbolic power {atom!r}^{exp}"
            )
        k = exp.as_int()
        rest = Expr(((coeff, eps, mono.without(atom)),), e.order)
        out = out + rest * replacement ** k
    return out


def substitute_dependent(e: Expr, family: str, sigma: int, s: Expr) -> Expr:
    """Replace each coordinate of variable (family, sigma) by the matching
    total derivative of ``s`` (``v_J -> D_J(s)``)."""
    for c in s.jet_coords(family):
        if c.sigma == sigma:
            raise UnsupportedOperationError(
                "substitution target appears in its own replacement"
            )
    s = s.at_order(e.order) if s.order > e.order else s
    if s.order < e.order:
        raise ConfigurationError(
            "replacement expression has lower truncation order than the target"
        )
    cache = {(): s}

    def derived(multi):
        if multi in cache:
            return cache[multi]
        prev = derived(multi[:-1])
        val = total_derivative(prev, multi[-1])
        cache[multi] = val
        return val

    coords = sorted(
        (c for c in e.jet_coords(family) if c.sigma == sigma),
        key=lambda c: c.sort_key(),
    )
    for c in coords:
        e = _substitute_atom(e, c, derived(c.multi))
    return e


@dataclass(frozen=True)
class SolvedForm:
    """One equation in solved form: ``leading = rhs`` on the manifold.

    The right-hand side may not contain the leading coordinate or any
    coordinate obtained from it by further differentiation.
    """

    leading: JetCoord
    rhs: Expr

    def __post_init__(self):
        for c in self.rhs.jet_coords(self.leading.family):
            if c.contains(self.leading):
                raise ConfigurationError(
                    f"solved-form rhs contains {c!r} which derives from the "
                    f"leading coordinate {self.leading!r}"
                )


class Reducer:
    """Rewrites expressions to normal form on the solution manifold.

    Every coordinate equal to, or obtained by differentiating, a leading
    coordinate is repeatedly replaced by the corresponding total derivative
    of the solved right-hand side.
    """

    _MAX_PASSES = 20000

    def __init__(self, solved_forms):
        self.solved_forms = tuple(solved_forms)
        seen = set()
        for sf in self.solved_forms:
            key = (sf.leading.family, sf.leading.sigma, sf.leading.multi)
            if key in seen:
                raise ConfigurationError(
                    f"duplicate leading coordinate {sf.leading!r}"
                )
            seen.add(key)
        self._cache = {}
        self._busy = set()

    def _match(self, coord: JetCoord):
        for idx, sf in enumerate(self.solved_forms):
            if coord.contains(sf.leading):
                return idx, coord.minus(sf.leading)
        return None

    def _derived_rhs(self, idx: int, extra: tuple, order: int) -> Expr:
        key = (idx, extra, order)
        if key in self._cache:
            return self._cache[key]
        if key in self._busy:
            raise ConfigurationError("circular solved forms")
        self._busy.add(key)
        try:
            if not extra:
                rhs = self.solved_forms[idx].rhs
                if rhs.order < order:
                    raise ConfigurationError(
                        "solved form was built at truncation order "
                        f"{rhs.order} but the reduction runs at {order}"
                    )
                val = self.reduce(rhs.truncate(order))
            else:
                prev = self._derived_rhs(idx, extra[:-1], order)
                val = self.reduce(total_derivative(prev, extra[-1]))
        finally:
            self._busy.discard(key)
        self._cache[key] = val
        return val

    def reduce(self, e: Expr) -> Expr:
        for _ in range(self._MAX_PASSES):
            target = None
            for c in sorted(e.jet_coords(), key=lambda c: c.sort_key()):
                m = self._match(c)
                if m is not None:
                    target = (c, m)
                    break
            if target is None:
                return e
            c, (idx, extra) = target
            replacement = self._derived_rhs(idx, tuple(sorted(extra)), e.order)
            e = _substitute_atom(e, c, replacement)
        raise ConfigurationError("manifold reduction did not terminate")


def reduce_on_manifold(e: Expr, solved_forms) -> Expr:
    return Reducer(solved_forms).reduce(e)


def prolong_coefficients(xi, eta, k: int, order: int | None = None):
    """Prolongation coefficients of a point generator up to derivative order k.

    ``xi`` lists the coefficients of d/dx^i, ``eta`` the coefficients of
    d/du^sigma; both may carry eps parts.  Returns a map from jet
    coordinates (1 <= |J| <= k) to their coefficients, built from the
    recursion ``zeta_{J,i} = D_i(zeta_J) - (D_i xi^j) u_{J,j}``.
    """
    if k < 1:
        raise ValueError("prolongation order must be >= 1")
    n = len(xi)
    if order is None:
        order = min([x.order for x in xi] + [h.order for h in eta])
    dxi = {(i, j): total_derivative(xi[j], i) for i in range(n) for j in range(n)}
    zeta = {}
    for sigma, eta_s in enumerate(eta):
        for i in range(n):
            z = total_derivative(eta_s, i)
            for j in range(n):
                z = z - dxi[(i, j)] * Expr.atom(JetCoord(U, sigma, (j,)), order)
            zeta[JetCoord(U, sigma, (i,))] = z
        for level in range(2, k + 1):
            for multi in combinations_with_replacement(range(n), level):
                coord = JetCoord(U, sigma, multi)
                parent = JetCoord(U, sigma, multi[:-1])
                i = multi[-1]
                z = total_derivative(zeta[parent], i)
                for j in range(n):
                    z = z - dxi[(i, j)] * Expr.atom(
                        JetCoord(U, sigma, parent.multi + (j,)), order
                    )
                zeta[coord] = z
    return zeta


def apply_prolonged(xi, eta, zeta, e: Expr) -> Expr:
    """Apply a prolonged generator: xi^i d/dx^i + eta d/du + zeta_J d/du_J."""
    total = Expr.zero(e.order)
    for i, x in enumerate(xi):
        p = partial_jet(e, BaseVar(i))
        if not p.is_zero:
            total = total + x * p
    for sigma, h in enumerate(eta):
        p = partial_jet(e, JetCoord(U, sigma))
        if not p.is_zero:
            total = total + h * p
    for coord in sorted(e.jet_coords(U), key=lambda c: c.sort_key()):
        if coord.order == 0:
            continue
        if coord not in zeta:
            raise ValueError(
                f"prolongation order too low: no coefficient for {coord!r}"
            )
        p = partial_jet(e, coord)
        if not p.is_zero:
            total = total + zeta[coord] * p
    return total
