"""Knowledge-base assembly for a derivation unit.

The combined knowledge base has an equation pool (requisite equations plus
the state history before the hidden state, deduplicated up to the LHS index)
and a symbol pool (every non-numeric symbol of the pooled equations, plus
the symmetric difference of the unit endpoints' symbol sets, which guides
the search toward symbols that must appear or disappear).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .states import (
    ActionType,
    EquationState,
    NSA,
    NONE_NSA,
    StateType,
    equation_nsa,
    parse_state,
    symbol_nsa,
)


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable pools; safe to share across parallel search workers."""

    equations: tuple[EquationState, ...]  # R: requisite + history, deduplicated
    symbols: tuple[str, ...]  # L, sorted for deterministic enumeration

    @property
    def size(self) -> int:
        return len(self.equations) + len(self.symbols)


def dedupe_equations(eqs: Iterable[EquationState]) -> tuple[EquationState, ...]:
    """Drop later equations whose rendering, index stripped, repeats an
    earlier one."""
    seen: set[str] = set()
    out: list[EquationState] = []
    for e in eqs:
        key = e.render_base
        if key not in seen:
            seen.add(key)
            out.append(e)
    return tuple(out)


def build(
    requisite: Sequence[EquationState],
    history: Sequence[EquationState],
    s_prev: EquationState,
    s_next: EquationState,
) -> KnowledgeBase:
    """Assemble the knowledge base for one unit.

    ``history`` is every state before the hidden one, in sequence order.
    The symbol pool is the union of the pooled equations' symbols with the
    symmetric difference of the endpoint symbol sets.
    """
    equations = dedupe_equations([*requisite, *history])
    symbols: set[str] = set()
    for e in equations:
        symbols |= e.symbols
    symbols |= s_prev.symbols ^ s_next.symbols
    return KnowledgeBase(equations=equations, symbols=tuple(sorted(symbols)))


def nsa_candidates(kb: KnowledgeBase, category: ActionType) -> list[NSA]:
    """The NSAs an action of the given category may draw from the pool."""
    if category == ActionType.SELF_STATE:
        return [NONE_NSA]
    if category == ActionType.SYMBOL_STATE:
        return [symbol_nsa(s) for s in kb.symbols]
    return [equation_nsa(e) for e in kb.equations]


class KBFileError(ValueError):
    pass


def load_kb_file(path: str | Path) -> tuple[EquationState, ...]:
    """Read requisite equations, one ``LHS = RHS`` per line.

    Blank lines and ``#`` comments are skipped.  Malformed lines report
    their line number.
    """
    out: list[EquationState] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            out.append(parse_state(stripped, StateType.INTEGRATIVE))
        except ValueError as err:
            raise KBFileError(f"{path}:{lineno}: {err}") from err
    return tuple(out)


def save_kb_file(path: str | Path, equations: Sequence[EquationState]) -> None:
    lines = [e.render_base for e in equations]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
