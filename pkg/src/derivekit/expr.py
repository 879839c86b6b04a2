"""Immutable symbolic expression trees with a deterministic canonical text form.

Every other layer of the package manipulates these trees or their renderings.
The invariants that matter:

* Trees are values. Constructors (:func:`sym`, :func:`integer`, :func:`rational`,
  :func:`add`, :func:`mul`, :func:`ncmul`, :func:`power`, :func:`func`) always
  return a canonical tree: nested sums/products are flattened, identity
  elements dropped, and commutative children sorted by a total order on their
  renderings (length first, then lexicographic).
* ``render_text`` is deterministic and injective on canonical trees; the text
  form re-parses to a structurally identical tree (see :mod:`derivekit.parser`).
* Non-commutative products (the ``@`` operator) never reorder their children.
* Numeric leaves are exact integers and rationals only.  There are no floats.

The grammar for the text form is documented in ``docs/grammar.md``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator

# Node kinds.
SYMBOL = "symbol"
INTEGER = "integer"
RATIONAL = "rational"
SUM = "sum"
PRODUCT = "product"
NCPRODUCT = "ncproduct"
POWER = "power"
FUNC = "func"
PLACEHOLDER_KIND = "placeholder"

# Rendering precedence, loosest binding first.
_PREC_SUM = 1
_PREC_NCPROD = 2
_PREC_PRODUCT = 3
_PREC_POWER = 4
_PREC_ATOM = 5

_PRECEDENCE = {
    SUM: _PREC_SUM,
    NCPRODUCT: _PREC_NCPROD,
    PRODUCT: _PREC_PRODUCT,
    POWER: _PREC_POWER,
    SYMBOL: _PREC_ATOM,
    INTEGER: _PREC_ATOM,
    RATIONAL: _PREC_ATOM,
    FUNC: _PREC_ATOM,
    PLACEHOLDER_KIND: _PREC_ATOM,
}

# LaTeX spellings for common symbol name stems.
_LATEX_NAMES = {
    "hbar": r"\hbar",
    "ħ": r"\hbar",
    "alpha": r"\alpha",
    "beta": r"\beta",
    "gamma": r"\gamma",
    "delta": r"\delta",
    "epsilon": r"\epsilon",
    "theta": r"\theta",
    "lambda": r"\lambda",
    "mu": r"\mu",
    "nu": r"\nu",
    "pi": r"\pi",
    "rho": r"\rho",
    "sigma": r"\sigma",
    "tau": r"\tau",
    "phi": r"\phi",
    "chi": r"\chi",
    "psi": r"\psi",
    "omega": r"\omega",
    "ω": r"\omega",
    "Gamma": r"\Gamma",
    "Delta": r"\Delta",
    "Lambda": r"\Lambda",
    "Sigma": r"\Sigma",
    "Phi": r"\Phi",
    "Psi": r"\Psi",
    "Omega": r"\Omega",
    "Ω": r"\Omega",
}

DAGGER = "†"
SUM_FUNC = "Sum"


class ExpressionError(ValueError):
    """Raised for structurally invalid expression constructions."""


@dataclass(frozen=True)
class Expression:
    """One node of a canonical expression tree.

    Instances should be built through the module-level constructors, which
    enforce canonical form; the raw dataclass constructor performs no
    normalisation.
    """

    kind: str
    children: tuple["Expression", ...] = ()
    name: str = ""
    numerator: int = 0
    denominator: int = 1

    @cached_property
    def render_text(self) -> str:
        """Canonical text rendering. Re-parseable and byte-deterministic."""
        return _render_text(self)

    @cached_property
    def render_latex(self) -> str:
        """LaTeX rendering. One-way; not designed to be parsed back."""
        return _render_latex(self)

    @cached_property
    def has_placeholder(self) -> bool:
        if self.kind == PLACEHOLDER_KIND:
            return True
        return any(c.has_placeholder for c in self.children)

    @cached_property
    def node_count(self) -> int:
        return 1 + sum(c.node_count for c in self.children)

    @cached_property
    def symbols(self) -> frozenset[str]:
        """Names of all symbol leaves; numerals and the placeholder excluded."""
        if self.kind == SYMBOL:
            return frozenset((self.name,))
        if not self.children:
            return frozenset()
        out: set[str] = set()
        for c in self.children:
            out |= c.symbols
        return frozenset(out)

    @cached_property
    def subexpression_renders(self) -> frozenset[str]:
        """Text renderings of every distinct subtree, including the tree itself."""
        out = {self.render_text}
        for c in self.children:
            out |= c.subexpression_renders
        return frozenset(out)

    def walk(self) -> Iterator["Expression"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def is_numeric(self) -> bool:
        return self.kind in (INTEGER, RATIONAL)

    def as_fraction(self) -> Fraction:
        if self.kind == INTEGER:
            return Fraction(self.numerator)
        if self.kind == RATIONAL:
            return Fraction(self.numerator, self.denominator)
        raise ExpressionError(f"not a numeric leaf: {self.render_text}")

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render_text

    def __repr__(self) -> str:  # pragma: no cover - convenience
        return f"Expression({self.render_text!r})"


PLACEHOLDER = Expression(PLACEHOLDER_KIND)

_ZERO = Expression(INTEGER, numerator=0)
_ONE = Expression(INTEGER, numerator=1)


def sym(name: str) -> Expression:
    """A symbol leaf. Names may use word characters plus a trailing dagger."""
    if not name:
        raise ExpressionError("symbol name must be non-empty")
    return Expression(SYMBOL, name=name)


def integer(value: int) -> Expression:
    return Expression(INTEGER, numerator=int(value))


def rational(num: int, den: int = 1) -> Expression:
    """An exact rational leaf, reduced; integral values collapse to integers."""
    if den == 0:
        raise ExpressionError("zero denominator")
    f = Fraction(num, den)
    if f.denominator == 1:
        return integer(f.numerator)
    return Expression(RATIONAL, numerator=f.numerator, denominator=f.denominator)


def from_fraction(f: Fraction) -> Expression:
    return rational(f.numerator, f.denominator)


def _sort_key(e: Expression) -> tuple[int, str]:
    r = e.render_text
    return (len(r), r)


def add(*terms: Expression) -> Expression:
    """Commutative sum. Flattens, drops zero terms, sorts children."""
    flat: list[Expression] = []
    for t in terms:
        if t.kind == SUM:
            flat.extend(t.children)
        elif t.kind == INTEGER and t.numerator == 0:
            continue
        else:
            flat.append(t)
    if not flat:
        return _ZERO
    if len(flat) == 1:
        return flat[0]
    return Expression(SUM, children=tuple(sorted(flat, key=_sort_key)))


def mul(*factors: Expression) -> Expression:
    """Commutative product. Flattens, drops unit factors, annihilates on zero."""
    flat: list[Expression] = []
    for f in factors:
        if f.kind == PRODUCT:
            flat.extend(f.children)
        elif f.kind == INTEGER and f.numerator == 0:
            return _ZERO
        elif f.kind == INTEGER and f.numerator == 1:
            continue
        else:
            flat.append(f)
    if not flat:
        return _ONE
    if len(flat) == 1:
        return flat[0]
    return Expression(PRODUCT, children=tuple(sorted(flat, key=_sort_key)))


def ncmul(*factors: Expression) -> Expression:
    """Non-commutative product. Child order is preserved under all operations."""
    flat: list[Expression] = []
    for f in factors:
        if f.kind == NCPRODUCT:
            flat.extend(f.children)
        elif f.kind == INTEGER and f.numerator == 0:
            return _ZERO
        elif f.kind == INTEGER and f.numerator == 1:
            continue
        else:
            flat.append(f)
    if not flat:
        return _ONE
    if len(flat) == 1:
        return flat[0]
    return Expression(NCPRODUCT, children=tuple(flat))


def power(base: Expression, exponent: Expression) -> Expression:
    """Power node. Exponents one and zero collapse; no numeric folding otherwise."""
    if exponent.kind == INTEGER and exponent.numerator == 1:
        return base
    if exponent.kind == INTEGER and exponent.numerator == 0:
        return _ONE
    if base.kind == INTEGER and base.numerator == 1:
        return _ONE
    return Expression(POWER, children=(base, exponent))


def func(name: str, *args: Expression) -> Expression:
    """Function application, e.g. ``Sum(body, index)``. Argument order is fixed."""
    if not name or not args:
        raise ExpressionError("function application needs a name and arguments")
    return Expression(FUNC, children=tuple(args), name=name)


def negate(e: Expression) -> Expression:
    if e.kind == INTEGER:
        return integer(-e.numerator)
    if e.kind == RATIONAL:
        return rational(-e.numerator, e.denominator)
    return mul(integer(-1), e)


def substitute(e: Expression, target: Expression, replacement: Expression) -> Expression:
    """Replace every subtree rendering-equal to ``target`` by ``replacement``.

    Matched subtrees are not descended into; untouched branches are rebuilt
    canonically so the result is again in canonical form.
    """
    if e.render_text == target.render_text:
        return replacement
    if not e.children:
        return e
    new_children = tuple(substitute(c, target, replacement) for c in e.children)
    if all(n is o for n, o in zip(new_children, e.children)):
        return e
    return rebuild(e, new_children)


def rebuild(e: Expression, children: tuple[Expression, ...]) -> Expression:
    """Reassemble a node of the same kind from new children, re-canonicalising."""
    if e.kind == SUM:
        return add(*children)
    if e.kind == PRODUCT:
        return mul(*children)
    if e.kind == NCPRODUCT:
        return ncmul(*children)
    if e.kind == POWER:
        return power(children[0], children[1])
    if e.kind == FUNC:
        return func(e.name, *children)
    return e


def subexpressions(e: Expression) -> frozenset[Expression]:
    """Every distinct subtree of ``e``, including ``e`` itself and all leaves."""
    seen: dict[str, Expression] = {}
    for node in e.walk():
        seen.setdefault(node.render_text, node)
    return frozenset(seen.values())


def symbols_of(e: Expression) -> frozenset[str]:
    """Symbol names occurring in ``e``; numeric leaves and ``?`` contribute nothing."""
    return e.symbols


def evaluate_numeric(e: Expression, env: dict[str, Fraction]) -> Fraction:
    """Evaluate with exact rational values bound to every symbol.

    Supports the arithmetic fragment (sums, products, integer powers).
    Placeholders and function applications are not evaluable and raise
    :class:`ExpressionError`; non-commutative products are evaluated as
    ordinary products since the bound values are scalars.
    """
    if e.kind == SYMBOL:
        try:
            return env[e.name]
        except KeyError:
            raise ExpressionError(f"unbound symbol {e.name!r}") from None
    if e.kind in (INTEGER, RATIONAL):
        return e.as_fraction()
    if e.kind == SUM:
        total = Fraction(0)
        for c in e.children:
            total += evaluate_numeric(c, env)
        return total
    if e.kind in (PRODUCT, NCPRODUCT):
        total = Fraction(1)
        for c in e.children:
            total *= evaluate_numeric(c, env)
        return total
    if e.kind == POWER:
        base = evaluate_numeric(e.children[0], env)
        exp = e.children[1]
        if not exp.is_numeric():
            raise ExpressionError("non-numeric exponent")
        ef = exp.as_fraction()
        if ef.denominator != 1:
            raise ExpressionError("fractional exponent")
        if base == 0 and ef < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return base ** int(ef)
    raise ExpressionError(f"cannot evaluate node kind {e.kind!r}")


# --- text rendering -------------------------------------------------------


def _wrap(child: Expression, parent_prec: int, *, force_neg: bool = False) -> str:
    r = child.render_text
    if _PRECEDENCE[child.kind] < parent_prec:
        return f"({r})"
    if force_neg and r.startswith("-"):
        return f"({r})"
    return r


def _render_text(e: Expression) -> str:
    if e.kind == SYMBOL:
        return e.name
    if e.kind == PLACEHOLDER_KIND:
        return "?"
    if e.kind == INTEGER:
        return str(e.numerator)
    if e.kind == RATIONAL:
        return f"{e.numerator}/{e.denominator}"
    if e.kind == SUM:
        return " + ".join(c.render_text for c in e.children)
    if e.kind == PRODUCT:
        return "*".join(_wrap(c, _PREC_PRODUCT) for c in e.children)
    if e.kind == NCPRODUCT:
        return "@".join(_wrap(c, _PREC_NCPROD) for c in e.children)
    if e.kind == POWER:
        base, exp = e.children
        # Powers are right-associative; a power base must be parenthesised, as
        # must negative numeral bases, or the text form would re-parse differently.
        bs = _wrap(base, _PREC_POWER, force_neg=True)
        if base.kind == POWER:
            bs = f"({base.render_text})"
        es = _wrap(exp, _PREC_POWER, force_neg=True)
        return f"{bs}**{es}"
    if e.kind == FUNC:
        args = ", ".join(c.render_text for c in e.children)
        return f"{e.name}({args})"
    raise ExpressionError(f"unknown node kind {e.kind!r}")


# --- LaTeX rendering ------------------------------------------------------


def _latex_symbol(name: str) -> str:
    dagger = name.endswith(DAGGER)
    if dagger:
        name = name[: -len(DAGGER)]
    stem, _, sub = name.partition("_")
    out = _LATEX_NAMES.get(stem, stem)
    if dagger:
        out = f"{out}^{{\\dagger}}"
    if sub:
        out = f"{out}_{{{sub}}}"
    return out


def _latex_wrap(child: Expression, parent_prec: int) -> str:
    r = child.render_latex
    if _PRECEDENCE[child.kind] < parent_prec or r.startswith("-"):
        return f"\\left({r}\\right)"
    return r


def _render_latex(e: Expression) -> str:
    if e.kind == SYMBOL:
        return _latex_symbol(e.name)
    if e.kind == PLACEHOLDER_KIND:
        return "?"
    if e.kind == INTEGER:
        return str(e.numerator)
    if e.kind == RATIONAL:
        num = e.numerator
        if num < 0:
            return f"-\\frac{{{-num}}}{{{e.denominator}}}"
        return f"\\frac{{{num}}}{{{e.denominator}}}"
    if e.kind == SUM:
        return " + ".join(c.render_latex for c in e.children)
    if e.kind == PRODUCT:
        return " ".join(_latex_wrap(c, _PREC_PRODUCT) for c in e.children)
    if e.kind == NCPRODUCT:
        return " ".join(_latex_wrap(c, _PREC_NCPROD) for c in e.children)
    if e.kind == POWER:
        base, exp = e.children
        bs = _latex_wrap(base, _PREC_POWER)
        if base.kind in (POWER, FUNC):
            bs = f"\\left({base.render_latex}\\right)"
        return f"{bs}^{{{exp.render_latex}}}"
    if e.kind == FUNC:
        if e.name == SUM_FUNC and len(e.children) == 2:
            body, index = e.children
            return f"\\sum_{{{index.render_latex}}}\\left({body.render_latex}\\right)"
        args = ", ".join(c.render_latex for c in e.children)
        return f"{e.name}\\left({args}\\right)"
    raise ExpressionError(f"unknown node kind {e.kind!r}")
