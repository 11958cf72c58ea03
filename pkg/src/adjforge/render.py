"""Renderers: plain text (round-trips through the shared grammar), LaTeX,
and a JSON term-list dump with stable field names."""

from __future__ import annotations

import json

from .coeff import AffineExp
from .expr import AUX, BaseVar, Expr, FuncAtom, JetCoord, Names, EXP

__all__ = ["render_text", "render_latex", "expr_to_json", "render_json"]

_DEF_FAMILY_LETTER = {"u": "u", "v": "v", AUX: "w"}


def _default_name(family: str, sigma: int) -> str:
    letter = _DEF_FAMILY_LETTER[family]
    return letter if sigma == 0 else f"{letter}{sigma + 1}"


def _indep_name(names, i: int) -> str:
    if names is not None and i < len(names.independents):
        return names.independents[i]
    return f"x{i + 1}"


def _base_name(names, family: str, sigma: int) -> str:
    if names is not None:
        try:
            return names.base_name(family, sigma)
        except Exception:
            pass
    return _default_name(family, sigma)


def _display_key(atom):
    if isinstance(atom, BaseVar):
        return (0, atom.index, 0, ())
    if isinstance(atom, JetCoord):
        if atom.order == 0:
            return (1, 0 if atom.family == "u" else 1, atom.sigma, ())
        return (3, 0 if atom.family == "u" else 1, atom.order, atom.multi, atom.sigma)
    return (2, atom.symbol, atom.sigma, atom.dorder)


def _exp_text(exp: AffineExp) -> str:
    if exp.is_integer and exp.as_int() == 1:
        return ""
    s = str(exp)
    if exp.is_integer and exp.as_int() > 0:
        return f"^{s}"
    return f"^({s})"


def _atom_text(atom, names) -> str:
    if isinstance(atom, BaseVar):
        return _indep_name(names, atom.index)
    if isinstance(atom, JetCoord):
        base = _base_name(names, atom.family, atom.sigma)
        if atom.order == 0:
            return base
        parts = [_indep_name(names, i) for i in atom.multi]
        if all(len(p) == 1 for p in parts) and "_" not in base:
            return base + "_" + "".join(parts)
        return base + "[" + ",".join(parts) + "]"
    if isinstance(atom, FuncAtom):
        arg = _base_name(names, "u", atom.sigma)
        return atom.symbol + "'" * atom.dorder + f"({arg})"
    raise TypeError(f"not an atom: {atom!r}")


def render_text(e: Expr, names: Names | None = None) -> str:
    if e.is_zero:
        return "0"
    pieces = []
    for coeff, eps, mono in e._terms:
        factors = []
        for atom, exp in sorted(mono.entries, key=lambda p: _display_key(p[0])):
            factors.append(_atom_text(atom, names) + _exp_text(exp))
        if eps:
            factors.insert(0, "eps" if eps == 1 else f"eps^{eps}")
        cs = str(coeff)
        negative = cs.startswith("-")
        if negative:
            cs = cs[1:]
        if not factors:
            body = cs
        elif cs == "1":
            body = "*".join(factors)
        else:
            if "+" in cs or ("-" in cs[1:]):
                cs = f"({cs})"
            body = cs + "*" + "*".join(factors)
        pieces.append(("-" if negative else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def _exp_latex(exp: AffineExp) -> str:
    if exp.is_integer and exp.as_int() == 1:
        return ""
    return "^{%s}" % exp.to_coefficient().latex()


def _atom_latex(atom, names) -> str:
    if isinstance(atom, BaseVar):
        return _indep_name(names, atom.index)
    if isinstance(atom, JetCoord):
        base = _base_name(names, atom.family, atom.sigma)
        if atom.order == 0:
            return base
        sub = "".join(_indep_name(names, i) for i in atom.multi)
        return f"{base}_{{{sub}}}"
    if isinstance(atom, FuncAtom):
        arg = _base_name(names, "u", atom.sigma)
        if atom.rule == EXP:
            return f"e^{{{arg}}}"
        return atom.symbol + "'" * atom.dorder + f"({arg})"
    raise TypeError(f"not an atom: {atom!r}")


def render_latex(e: Expr, names: Names | None = None) -> str:
    if e.is_zero:
        return "0"
    pieces = []
    for coeff, eps, mono in e._terms:
        factors = []
        for atom, exp in sorted(mono.entries, key=lambda p: _display_key(p[0])):
            factors.append(_atom_latex(atom, names) + _exp_latex(exp))
        if eps:
            factors.insert(0, r"\epsilon" if eps == 1 else r"\epsilon^{%d}" % eps)
        cs = coeff.latex()
        negative = cs.startswith("-")
        if negative:
            cs = cs[1:]
        if not factors:
            body = cs
        elif cs == "1":
            body = " ".join(factors)
        else:
            if "+" in cs or ("-" in cs[1:]):
                cs = r"\left(%s\right)" % cs
            body = cs + " " + " ".join(factors)
        pieces.append(("-" if negative else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def _atom_json(atom, exp: AffineExp, names):
    entry = {"exp": str(exp)}
    if isinstance(atom, BaseVar):
        entry.update(kind="independent", name=_indep_name(names, atom.index))
    elif isinstance(atom, JetCoord):
        entry.update(
            kind="jet",
            family=atom.family,
            name=_base_name(names, atom.family, atom.sigma),
            derivs=[_indep_name(names, i) for i in atom.multi],
        )
    else:
        entry.update(
            kind="func",
            symbol=atom.symbol,
            argument=_base_name(names, "u", atom.sigma),
            derivative_order=atom.dorder,
            rule=atom.rule,
        )
    return entry


def expr_to_json(e: Expr, names: Names | None = None) -> dict:
    terms = []
    for coeff, eps, mono in e._terms:
        terms.append(
            {
                "coeff_num": str(coeff.num),
                "coeff_den": str(coeff.den),
                "eps_power": eps,
                "atoms": [_atom_json(a, x, names) for a, x in mono.entries],
            }
        )
    return {"truncation_order": e.order, "terms": terms}


def render_json(e: Expr, names: Names | None = None) -> str:
    return json.dumps(expr_to_json(e, names), sort_keys=True)
