"""Derivation dataset records and tab-separated on-disk format.

Each record stores ten features of one state: three string renderings with
their character counts (LaTeX, text, structural tree), the action and
non-state argument that produced the state, and the state/action category
tags.  Files are UTF-8 TSV with a fixed header; tabs, newlines and
backslashes inside fields are backslash-escaped.

Loaded strings are kept verbatim.  Parsing them back into expression trees
is best-effort: sequences whose text column all parses are "native" and can
be replayed, searched, and evaluated; anything else remains opaque but still
supports the string-level operations (census, similarity).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .actions import remove_index
from .expr import PLACEHOLDER, sym
from .states import ActionType, EquationState, StateType, parse_state

HEADER = (
    "latex_len",
    "latex_str",
    "text_len",
    "text_str",
    "tree_len",
    "tree_str",
    "action_name",
    "nsa_text",
    "state_type",
    "action_type",
)

CONSIDER_ACTION = "consider_kb_equation"

_STATE_TYPES = {t.value for t in StateType if t != StateType.DUMMY}
_ACTION_TYPES = {t.value for t in ActionType}


class DataFormatError(ValueError):
    """Malformed dataset content; carries the offending row when known."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


@dataclass(frozen=True)
class DerivationRecord:
    latex_len: int
    latex_str: str
    text_len: int
    text_str: str
    tree_len: int
    tree_str: str
    action_name: str
    nsa_text: str
    state_type: str
    action_type: str

    def validate(self, row: int | None = None) -> None:
        for length, s, label in (
            (self.latex_len, self.latex_str, "latex"),
            (self.text_len, self.text_str, "text"),
            (self.tree_len, self.tree_str, "tree"),
        ):
            if length != len(s):
                raise DataFormatError(
                    f"{label} length column says {length}, string has {len(s)}", row
                )
        if self.state_type not in _STATE_TYPES:
            raise DataFormatError(f"unknown state type {self.state_type!r}", row)
        if self.action_type not in _ACTION_TYPES:
            raise DataFormatError(f"unknown action type {self.action_type!r}", row)


def record_for_state(
    state: EquationState, action_name: str, nsa_text: str, action_type: str
) -> DerivationRecord:
    latex = state.render_latex
    text = state.render_text
    tree = state.tree_text
    return DerivationRecord(
        latex_len=len(latex),
        latex_str=latex,
        text_len=len(text),
        text_str=text,
        tree_len=len(tree),
        tree_str=tree,
        action_name=action_name,
        nsa_text=nsa_text,
        state_type=state.state_type.value,
        action_type=action_type,
    )


DUMMY_HEAD = EquationState(sym("x"), PLACEHOLDER, 0, StateType.DUMMY)


@dataclass(frozen=True)
class DerivationSequence:
    """The stored records plus the two dummy endpoint states.

    The head dummy is the neutral state ``(x, ?)``.  The tail dummy mirrors
    the final state with its LHS index stripped, so it is reachable from the
    final state by ``remove_index`` yet renders differently whenever the
    final state carries an index.  For opaque sequences the tail strings are
    synthesised from the final record by the same index-stripping rule.
    """

    records: tuple[DerivationRecord, ...]

    @cached_property
    def states(self) -> tuple[EquationState, ...] | None:
        """Parsed states for all records, or None when any record is opaque."""
        out: list[EquationState] = []
        for rec in self.records:
            try:
                st = parse_state(rec.text_str, StateType(rec.state_type))
            except ValueError:
                return None
            if st.render_text != rec.text_str:
                return None
            out.append(st)
        return tuple(out)

    @property
    def native(self) -> bool:
        return self.states is not None

    @cached_property
    def dummy_head(self) -> EquationState:
        return DUMMY_HEAD

    @cached_property
    def dummy_tail(self) -> EquationState | None:
        states = self.states
        if not states:
            return None
        return remove_index(states[-1]).with_type(StateType.DUMMY)

    def final_text_pair(self) -> tuple[str, str]:
        """Text renderings of the final stored state and the tail dummy."""
        if not self.records:
            raise DataFormatError("empty sequence has no final state")
        last = self.records[-1].text_str
        if self.native:
            tail = self.dummy_tail
            assert tail is not None
            return last, tail.render_text
        return last, strip_index_marker(last)

    def padded_length(self) -> int:
        return len(self.records) + 2


def strip_index_marker(state_text: str) -> str:
    """Drop a ``^(k)`` marker from the LHS segment of a rendered state.

    Used to synthesise the tail dummy for opaque sequences; renderings
    without a recognisable marker are returned unchanged.
    """
    lhs, sep, rhs = state_text.partition(" = ")
    if not sep:
        return state_text
    import re

    m = re.match(r"^(.*)\^\((\d+)\)$", lhs)
    if m is None:
        return state_text
    return f"{m.group(1)}{sep}{rhs}"


# --- TSV serialisation ------------------------------------------------------

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(s: str) -> str:
    if not any(c in s for c in "\\\t\n\r"):
        return s
    return "".join(_ESCAPES.get(c, c) for c in s)


def unescape_field(s: str, row: int | None = None) -> str:
    if "\\" not in s:
        return s
    out: list[str] = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\":
            if i + 1 >= len(s):
                raise DataFormatError("dangling escape at end of field", row)
            key = s[i + 1]
            if key not in _UNESCAPES:
                raise DataFormatError(f"unknown escape \\{key}", row)
            out.append(_UNESCAPES[key])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def save(seq: DerivationSequence, path: str | Path) -> None:
    """Write the records as TSV. Dummies are regenerated on load, not stored."""
    lines = ["\t".join(HEADER)]
    for rec in seq.records:
        lines.append(
            "\t".join(
                escape_field(str(v))
                for v in (
                    rec.latex_len,
                    rec.latex_str,
                    rec.text_len,
                    rec.text_str,
                    rec.tree_len,
                    rec.tree_str,
                    rec.action_name,
                    rec.nsa_text,
                    rec.state_type,
                    rec.action_type,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load(path: str | Path) -> DerivationSequence:
    """Read a TSV dataset; malformed rows are reported with their number."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as err:
        raise DataFormatError(f"cannot read {p}: {err}") from err
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataFormatError("empty file, expected a header row")
    header = tuple(lines[0].split("\t"))
    if header != HEADER:
        raise DataFormatError(
            f"bad header: expected {list(HEADER)}, got {list(header)}", row=1
        )
    records: list[DerivationRecord] = []
    for row, line in enumerate(lines[1:], 2):
        cols = line.split("\t")
        if len(cols) != len(HEADER):
            raise DataFormatError(
                f"expected {len(HEADER)} columns, got {len(cols)}", row
            )
        cols = [unescape_field(c, row) for c in cols]
        try:
            rec = DerivationRecord(
                latex_len=int(cols[0]),
                latex_str=cols[1],
                text_len=int(cols[2]),
                text_str=cols[3],
                tree_len=int(cols[4]),
                tree_str=cols[5],
                action_name=cols[6],
                nsa_text=cols[7],
                state_type=cols[8],
                action_type=cols[9],
            )
        except ValueError as err:
            raise DataFormatError(f"bad length column: {err}", row) from err
        rec.validate(row)
        records.append(rec)
    return DerivationSequence(records=tuple(records))


# --- categorisation and census ----------------------------------------------


def categorize(records: Sequence[DerivationRecord]) -> list[str]:
    """Recompute each record's state type from the action column and order.

    A state formed by the knowledge-base consideration action is integrative,
    whatever its position.  A non-integrative state directly preceding an
    integrative one is terminal, even when it also follows an integrative
    state; the remainder are consequent.
    """
    n = len(records)
    integrative = [r.action_name == CONSIDER_ACTION for r in records]
    out: list[str] = []
    for i in range(n):
        if integrative[i]:
            out.append(StateType.INTEGRATIVE.value)
        elif i + 1 < n and integrative[i + 1]:
            out.append(StateType.TERMINAL.value)
        else:
            out.append(StateType.CONSEQUENT.value)
    return out


def retag(seq: DerivationSequence) -> DerivationSequence:
    """A copy of the sequence with state types recomputed by :func:`categorize`."""
    tags = categorize(seq.records)
    recs = tuple(
        replace(r, state_type=t) for r, t in zip(seq.records, tags)
    )
    return DerivationSequence(records=recs)


@dataclass(frozen=True)
class Census:
    total: int
    by_state_type: dict[str, int]
    by_cell: dict[tuple[str, str], int]
    text_len: tuple[int, float, int]  # min, mean, max
    latex_len: tuple[int, float, int]

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "state_types": dict(sorted(self.by_state_type.items())),
            "cells": {
                f"{s}/{a}": n for (s, a), n in sorted(self.by_cell.items())
            },
            "text_len": {
                "min": self.text_len[0],
                "mean": self.text_len[1],
                "max": self.text_len[2],
            },
            "latex_len": {
                "min": self.latex_len[0],
                "mean": self.latex_len[1],
                "max": self.latex_len[2],
            },
        }


def census(seq: DerivationSequence) -> Census:
    recs = seq.records
    if not recs:
        return Census(0, {}, {}, (0, 0.0, 0), (0, 0.0, 0))
    by_state: dict[str, int] = {}
    by_cell: dict[tuple[str, str], int] = {}
    for r in recs:
        by_state[r.state_type] = by_state.get(r.state_type, 0) + 1
        key = (r.state_type, r.action_type)
        by_cell[key] = by_cell.get(key, 0) + 1
    text_lens = [r.text_len for r in recs]
    latex_lens = [r.latex_len for r in recs]
    return Census(
        total=len(recs),
        by_state_type=by_state,
        by_cell=by_cell,
        text_len=(min(text_lens), sum(text_lens) / len(recs), max(text_lens)),
        latex_len=(min(latex_lens), sum(latex_lens) / len(recs), max(latex_lens)),
    )


def validate(seq: DerivationSequence) -> list[str]:
    """Consistency findings for a loaded sequence; empty means clean."""
    problems: list[str] = []
    computed = categorize(seq.records)
    for i, (rec, tag) in enumerate(zip(seq.records, computed), 1):
        if rec.state_type != tag:
            problems.append(
                f"row {i + 1}: stored state type {rec.state_type!r}, "
                f"recomputed {tag!r}"
            )
    if seq.records and seq.records[0].action_name != CONSIDER_ACTION:
        problems.append("first record is not a knowledge-base consideration")
    return problems
