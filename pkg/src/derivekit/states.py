"""Equation states and non-state arguments.

A state is an ``(LHS, RHS)`` pair of expression trees plus a left-hand-side
index and a role tag.  States are compared by their canonical text rendering
``lhs^(k) = rhs``; the index suffix is omitted when the index is zero, and a
compound left-hand side is parenthesised so the rendering stays unambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

from .expr import Expression, symbols_of
from .parser import ParseError, parse


class StateType(str, Enum):
    INTEGRATIVE = "integrative"
    CONSEQUENT = "consequent"
    TERMINAL = "terminal"
    DUMMY = "dummy"


class ActionType(str, Enum):
    SELF_STATE = "self-state"
    SYMBOL_STATE = "symbol-state"
    EQUATION_STATE = "equation-state"


_ATOMIC_KINDS = {"symbol", "integer", "rational", "func", "placeholder"}
_INDEX_SUFFIX = re.compile(r"^(.*)\^\((\d+)\)$")


@dataclass(frozen=True)
class EquationState:
    """One equational state; immutable and safe to share between workers."""

    lhs: Expression
    rhs: Expression
    lhs_index: int = 0
    state_type: StateType = StateType.CONSEQUENT

    @cached_property
    def lhs_text(self) -> str:
        base = self.lhs.render_text
        if self.lhs.kind not in _ATOMIC_KINDS:
            base = f"({base})"
        if self.lhs_index > 0:
            return f"{base}^({self.lhs_index})"
        return base

    @cached_property
    def render_text(self) -> str:
        return f"{self.lhs_text} = {self.rhs.render_text}"

    @cached_property
    def render_base(self) -> str:
        """Rendering with the LHS index stripped; used for up-to-index equality."""
        base = self.lhs.render_text
        if self.lhs.kind not in _ATOMIC_KINDS:
            base = f"({base})"
        return f"{base} = {self.rhs.render_text}"

    @cached_property
    def render_latex(self) -> str:
        base = self.lhs.render_latex
        if self.lhs.kind not in _ATOMIC_KINDS:
            base = f"\\left({base}\\right)"
        if self.lhs_index > 0:
            base = f"{base}^{{({self.lhs_index})}}"
        return f"{base} = {self.rhs.render_latex}"

    @cached_property
    def tree_text(self) -> str:
        """Prefix/structural rendering of both trees; the dataset tree column."""
        return f"Eq({_tree(self.lhs)}, {_tree(self.rhs)})"

    @cached_property
    def symbols(self) -> frozenset[str]:
        return symbols_of(self.lhs) | symbols_of(self.rhs)

    @cached_property
    def subexpression_renders(self) -> frozenset[str]:
        return self.lhs.subexpression_renders | self.rhs.subexpression_renders

    @property
    def has_placeholder(self) -> bool:
        return self.lhs.has_placeholder or self.rhs.has_placeholder

    def with_type(self, state_type: StateType) -> "EquationState":
        if state_type == self.state_type:
            return self
        return replace(self, state_type=state_type)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.render_text


def _tree(e: Expression) -> str:
    k = e.kind
    if k == "symbol":
        return f"Sym('{e.name}')"
    if k == "integer":
        return f"Int({e.numerator})"
    if k == "rational":
        return f"Rat({e.numerator}, {e.denominator})"
    if k == "placeholder":
        return "Hole()"
    heads = {
        "sum": "Add",
        "product": "Mul",
        "ncproduct": "NcMul",
        "power": "Pow",
    }
    if k == "func":
        inner = ", ".join(_tree(c) for c in e.children)
        return f"App('{e.name}', {inner})"
    inner = ", ".join(_tree(c) for c in e.children)
    return f"{heads[k]}({inner})"


class StateSyntaxError(ValueError):
    pass


def parse_state(text: str, state_type: StateType = StateType.CONSEQUENT) -> EquationState:
    """Parse ``lhs = rhs`` (optionally ``lhs^(k) = rhs``) into a state.

    Raises :class:`StateSyntaxError` on malformed input; expression syntax
    errors propagate with their positions attached.
    """
    if " = " not in text:
        raise StateSyntaxError(f"expected 'lhs = rhs' in {text!r}")
    lhs_text, _, rhs_text = text.partition(" = ")
    lhs_text = lhs_text.strip()
    rhs_text = rhs_text.strip()
    index = 0
    m = _INDEX_SUFFIX.match(lhs_text)
    if m is not None:
        lhs_text, index = m.group(1), int(m.group(2))
    try:
        lhs = parse(lhs_text)
        rhs = parse(rhs_text)
    except ParseError as err:
        raise StateSyntaxError(f"bad state {text!r}: {err}") from err
    return EquationState(lhs, rhs, index, state_type)


# --- non-state arguments ----------------------------------------------------

NSA_NONE = "none"
NSA_SYMBOL = "symbol"
NSA_EQUATION = "equation"

_CATEGORY_TO_NSA = {
    ActionType.SELF_STATE: NSA_NONE,
    ActionType.SYMBOL_STATE: NSA_SYMBOL,
    ActionType.EQUATION_STATE: NSA_EQUATION,
}


@dataclass(frozen=True)
class NSA:
    """An action's second argument: nothing, a symbol name, or an equation."""

    variant: str = NSA_NONE
    symbol: str = ""
    equation: EquationState | None = None

    @cached_property
    def render(self) -> str:
        if self.variant == NSA_SYMBOL:
            return self.symbol
        if self.variant == NSA_EQUATION:
            assert self.equation is not None
            return self.equation.render_text
        return ""

    def matches(self, category: ActionType) -> bool:
        return _CATEGORY_TO_NSA[category] == self.variant


NONE_NSA = NSA()


def symbol_nsa(name: str) -> NSA:
    return NSA(NSA_SYMBOL, symbol=name)


def equation_nsa(state: EquationState) -> NSA:
    return NSA(NSA_EQUATION, equation=state)
