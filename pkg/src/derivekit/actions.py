"""The typed action system: named transformations (state, NSA) -> state.

Actions fall into three categories keyed by the kind of non-state argument
they accept: self-state (no argument), symbol-state (a symbol), and
equation-state (an equation 2-tuple).  The engine enforces three rules
centrally in :func:`apply`:

* an action given an inapplicable input returns the input state unchanged,
  so the system is total and never raises during search;
* whenever a transformation changes the right-hand side, the left-hand-side
  index is incremented, so successive states keep distinct left-hand sides
  (``remove_index`` and ``consider_kb_equation`` manage the index themselves);
* transformations are pure, so repeated application is byte-identical.

Arithmetic actions refuse to touch states containing the placeholder ``?``:
the neutral start state is transformable only by ``consider_kb_equation``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import expr as ex
from .expr import Expression, add, integer, mul, ncmul, power, rational, func
from .states import ActionType, EquationState, NSA, StateType

# A transform inspects a state and returns replacement (lhs, rhs) trees, or
# None when it does not apply.  Index bookkeeping happens in apply().
Transform = Callable[[EquationState, NSA], Optional[tuple[Expression, Expression]]]


@dataclass(frozen=True)
class Action:
    name: str
    category: ActionType
    transform: Transform
    description: str = ""

    def __str__(self) -> str:  # pragma: no cover - convenience
        return f"{self.name} [{self.category.value}]"


class NSAMismatchError(TypeError):
    """An NSA variant that does not match the action category; a programming
    error, rejected before the transform runs."""


def apply(action: Action, state: EquationState, nsa: NSA) -> EquationState:
    """Apply ``action`` to ``state``; total, deterministic, convention-abiding."""
    if not nsa.matches(action.category):
        raise NSAMismatchError(
            f"action {action.name!r} ({action.category.value}) given NSA "
            f"variant {nsa.variant!r}"
        )
    if action.name == "consider_kb_equation":
        eq = nsa.equation
        assert eq is not None
        out = EquationState(eq.lhs, eq.rhs, 0, StateType.INTEGRATIVE)
        return state if out.render_text == state.render_text else out
    if action.name == "remove_index":
        if state.lhs_index == 0:
            return state
        return EquationState(state.lhs, state.rhs, 0, StateType.CONSEQUENT)
    result = action.transform(state, nsa)
    if result is None:
        return state
    new_lhs, new_rhs = result
    rhs_changed = new_rhs.render_text != state.rhs.render_text
    index = state.lhs_index + 1 if rhs_changed else state.lhs_index
    out = EquationState(new_lhs, new_rhs, index, StateType.CONSEQUENT)
    if out.render_text == state.render_text:
        return state
    return out


# apply() is pure, so results can be memoised on the rendered inputs.  The
# search re-applies identical triples constantly while sliding a unit along
# a derivation; a per-process cache turns those into lookups.
_APPLY_CACHE: dict[tuple[str, str, str], EquationState] = {}
_APPLY_CACHE_LIMIT = 400_000


def apply_cached(action: Action, state: EquationState, nsa: NSA) -> EquationState:
    key = (action.name, state.render_text, nsa.render)
    hit = _APPLY_CACHE.get(key)
    if hit is not None:
        return hit
    out = apply(action, state, nsa)
    if len(_APPLY_CACHE) >= _APPLY_CACHE_LIMIT:
        _APPLY_CACHE.clear()
    _APPLY_CACHE[key] = out
    return out


# --- structural rewrites used by the self-state actions ---------------------


def expand(e: Expression) -> Expression:
    """Distribute (non-)commutative products over sums, recursively, until no
    product has a sum child.  Powers and function bodies are left alone."""
    if not e.children:
        return e
    children = tuple(expand(c) for c in e.children)
    if any(n is not o for n, o in zip(children, e.children)):
        e = ex.rebuild(e, children)
    if e.kind not in ("product", "ncproduct"):
        return e
    kids = e.children
    for idx, c in enumerate(kids):
        if c.kind == "sum":
            rest_before = kids[:idx]
            rest_after = kids[idx + 1 :]
            make = mul if e.kind == "product" else ncmul
            terms = [make(*rest_before, t, *rest_after) for t in c.children]
            return expand(add(*terms))
    return e


def _term_factors(t: Expression) -> list[Expression]:
    if t.kind == "product":
        return list(t.children)
    return [t]


def factor_common(e: Expression) -> Expression | None:
    """Pull the common factors out of a sum: ``a*b + a*c -> a*(b + c)``.

    Works on commutative factor multisets; bails out (returns None) when the
    sum has a non-commutative term or there is nothing common.
    """
    if e.kind != "sum":
        return None
    term_factor_lists = []
    for t in e.children:
        if t.kind == "ncproduct" or any(c.kind == "ncproduct" for c in t.children):
            return None
        term_factor_lists.append(_term_factors(t))
    common: dict[str, int] = {}
    for f in term_factor_lists[0]:
        common[f.render_text] = common.get(f.render_text, 0) + 1
    for factors in term_factor_lists[1:]:
        counts: dict[str, int] = {}
        for f in factors:
            counts[f.render_text] = counts.get(f.render_text, 0) + 1
        common = {
            r: min(n, counts.get(r, 0)) for r, n in common.items() if counts.get(r, 0)
        }
        if not common:
            return None
    by_render = {f.render_text: f for fl in term_factor_lists for f in fl}
    pulled = []
    for r, n in sorted(common.items()):
        pulled.extend([by_render[r]] * n)
    cofactor_terms = []
    for factors in term_factor_lists:
        remaining = list(factors)
        for p in pulled:
            remaining.remove(next(f for f in remaining if f.render_text == p.render_text))
        cofactor_terms.append(mul(*remaining) if remaining else integer(1))
    return mul(*pulled, add(*cofactor_terms))


def fold_rationals(e: Expression) -> Expression:
    """Fold numeric leaves inside sums and products into single exact
    rationals, and evaluate small integral powers of numerals."""
    if not e.children:
        return e
    children = tuple(fold_rationals(c) for c in e.children)
    if any(n is not o for n, o in zip(children, e.children)):
        e = ex.rebuild(e, children)
    if e.kind == "sum":
        total = None
        rest = []
        for c in e.children:
            if c.is_numeric():
                total = c.as_fraction() if total is None else total + c.as_fraction()
            else:
                rest.append(c)
        if total is None:
            return e
        return add(*rest, ex.from_fraction(total))
    if e.kind == "product":
        total = None
        rest = []
        for c in e.children:
            if c.is_numeric():
                total = c.as_fraction() if total is None else total * c.as_fraction()
            else:
                rest.append(c)
        if total is None:
            return e
        return mul(ex.from_fraction(total), *rest)
    if e.kind == "power":
        base, exp = e.children
        if base.is_numeric() and exp.kind == "integer" and abs(exp.numerator) <= 8:
            b = base.as_fraction()
            if b != 0 or exp.numerator >= 0:
                return ex.from_fraction(b ** exp.numerator)
    return e


# --- the builtin action set --------------------------------------------------


def _no_placeholder(*states: EquationState) -> bool:
    return not any(s.has_placeholder for s in states)


def _self(fn):
    def transform(s: EquationState, nsa: NSA):
        if not _no_placeholder(s):
            return None
        return fn(s)

    return transform


def _expand_rhs(s: EquationState):
    new = expand(s.rhs)
    if new.render_text == s.rhs.render_text:
        return None
    return s.lhs, new


def _factor_rhs(s: EquationState):
    new = factor_common(s.rhs)
    if new is None or new.render_text == s.rhs.render_text:
        return None
    return s.lhs, new


def _simplify_rationals(s: EquationState):
    new = fold_rationals(s.rhs)
    if new.render_text == s.rhs.render_text:
        return None
    return s.lhs, new


def _swap_sides(s: EquationState):
    return s.rhs, s.lhs


def _divide_rhs_by_2(s: EquationState):
    return s.lhs, mul(s.rhs, rational(1, 2))


def _multiply_rhs_by_2(s: EquationState):
    return s.lhs, mul(s.rhs, integer(2))


def _symbolic(fn):
    def transform(s: EquationState, nsa: NSA):
        if not _no_placeholder(s):
            return None
        return fn(s, ex.sym(nsa.symbol))

    return transform


def _divide_rhs_by_symbol(s: EquationState, x: Expression):
    return s.lhs, mul(s.rhs, power(x, integer(-1)))


def _multiply_rhs_by_symbol(s: EquationState, x: Expression):
    return s.lhs, mul(s.rhs, x)


def _add_symbol_both_sides(s: EquationState, x: Expression):
    return add(s.lhs, x), add(s.rhs, x)


def _subtract_symbol_both_sides(s: EquationState, x: Expression):
    return add(s.lhs, ex.negate(x)), add(s.rhs, ex.negate(x))


def _sum_over_symbol(s: EquationState, x: Expression):
    return s.lhs, func(ex.SUM_FUNC, s.rhs, x)


def _substitute_index_symbol(s: EquationState, x: Expression):
    # Rename the index of every summation in the RHS, provided the new index
    # does not already occur in the body (no capture).
    if ex.SUM_FUNC + "(" not in s.rhs.render_text:
        return None
    changed = False

    def rename(e: Expression) -> Expression:
        nonlocal changed
        if not e.children:
            return e
        kids = tuple(rename(c) for c in e.children)
        if any(n is not o for n, o in zip(kids, e.children)):
            e = ex.rebuild(e, kids)
        if (
            e.kind == "func"
            and e.name == ex.SUM_FUNC
            and len(e.children) == 2
            and e.children[1].kind == "symbol"
            and e.children[1].render_text != x.render_text
            and x.render_text not in e.children[0].subexpression_renders
        ):
            changed = True
            body = ex.substitute(e.children[0], e.children[1], x)
            return func(ex.SUM_FUNC, body, x)
        return e

    new = rename(s.rhs)
    if not changed:
        return None
    return s.lhs, new


def _equational(fn):
    def transform(s: EquationState, nsa: NSA):
        eq = nsa.equation
        assert eq is not None
        if not _no_placeholder(s, eq):
            return None
        return fn(s, eq)

    return transform


def _substitute_equation(s: EquationState, eq: EquationState):
    lhs_r, rhs_r = eq.lhs.render_text, eq.rhs.render_text
    if lhs_r == rhs_r:
        return None
    if lhs_r in s.rhs.subexpression_renders:
        new = ex.substitute(s.rhs, eq.lhs, eq.rhs)
    elif rhs_r in s.rhs.subexpression_renders:
        new = ex.substitute(s.rhs, eq.rhs, eq.lhs)
    else:
        return None
    if new.render_text == s.rhs.render_text:
        return None
    return s.lhs, new


def _add_equation_rhs(s: EquationState, eq: EquationState):
    return s.lhs, add(s.rhs, eq.rhs)


def _subtract_equation_rhs(s: EquationState, eq: EquationState):
    return s.lhs, add(s.rhs, ex.negate(eq.rhs))


def _divide_rhs_by_equation_rhs(s: EquationState, eq: EquationState):
    if eq.rhs.kind == "integer" and eq.rhs.numerator == 0:
        return None
    return s.lhs, mul(s.rhs, power(eq.rhs, integer(-1)))


def _unreachable(s: EquationState, nsa: NSA):  # pragma: no cover
    raise AssertionError("handled directly in apply()")


_SELF = ActionType.SELF_STATE
_SYM = ActionType.SYMBOL_STATE
_EQ = ActionType.EQUATION_STATE

_BUILTINS: tuple[Action, ...] = (
    Action("expand_rhs", _SELF, _self(_expand_rhs),
           "distribute products over sums in the RHS"),
    Action("factor_rhs_common_term", _SELF, _self(_factor_rhs),
           "pull common factors out of an RHS sum"),
    Action("simplify_rationals", _SELF, _self(_simplify_rationals),
           "fold numeric constants in the RHS"),
    Action("remove_index", _SELF, _unreachable,
           "reset the LHS index to zero"),
    Action("swap_sides", _SELF, _self(_swap_sides),
           "exchange LHS and RHS"),
    Action("divide_rhs_by_2", _SELF, _self(_divide_rhs_by_2),
           "multiply the RHS by 1/2"),
    Action("multiply_rhs_by_2", _SELF, _self(_multiply_rhs_by_2),
           "multiply the RHS by 2"),
    Action("divide_rhs_by_symbol", _SYM, _symbolic(_divide_rhs_by_symbol),
           "multiply the RHS by the reciprocal of a symbol"),
    Action("multiply_rhs_by_symbol", _SYM, _symbolic(_multiply_rhs_by_symbol),
           "multiply the RHS by a symbol"),
    Action("add_symbol_to_both_sides", _SYM, _symbolic(_add_symbol_both_sides),
           "add a symbol to both sides"),
    Action("subtract_symbol_from_both_sides", _SYM, _symbolic(_subtract_symbol_both_sides),
           "subtract a symbol from both sides"),
    Action("sum_over_symbol", _SYM, _symbolic(_sum_over_symbol),
           "wrap the RHS in a summation over a symbol"),
    Action("substitute_index_symbol", _SYM, _symbolic(_substitute_index_symbol),
           "rename the index of RHS summations"),
    Action("consider_kb_equation", _EQ, _unreachable,
           "restart from a knowledge-base equation"),
    Action("substitute_equation", _EQ, _equational(_substitute_equation),
           "rewrite RHS occurrences of one side of an equation by the other"),
    Action("add_equation_rhs", _EQ, _equational(_add_equation_rhs),
           "add an equation's RHS to the state RHS"),
    Action("subtract_equation_rhs", _EQ, _equational(_subtract_equation_rhs),
           "subtract an equation's RHS from the state RHS"),
    Action("divide_rhs_by_equation_rhs", _EQ, _equational(_divide_rhs_by_equation_rhs),
           "divide the state RHS by an equation's RHS"),
)

_BY_NAME = {a.name: a for a in _BUILTINS}
assert len(_BY_NAME) == len(_BUILTINS), "action names must be unique"


def builtin_action_set() -> tuple[Action, ...]:
    """The canonical action set, covering all three categories."""
    return _BUILTINS


def action_by_name(name: str) -> Action:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown action {name!r}") from None


def consider_kb_equation(state: EquationState, eq: EquationState) -> EquationState:
    """Shortcut for applying the knowledge-base consideration action."""
    from .states import equation_nsa

    return apply(_BY_NAME["consider_kb_equation"], state, equation_nsa(eq))


def remove_index(state: EquationState) -> EquationState:
    from .states import NONE_NSA

    return apply(_BY_NAME["remove_index"], state, NONE_NSA)
