"""Synthetic derivation generator.

Forward-walks the action engine from seed equations, recording every state
with the action and argument that produced it, so the resulting sequence is
replayable ground truth for end-to-end reconstruction tests.  The first step
always considers a seed equation (nothing else applies to the neutral start
state), and later steps choose uniformly among acceptable (action, argument)
pairs, with a configurable probability of branching to a fresh seed equation.

A candidate step is rejected when it

* returns the state unchanged (no-ops never advance a derivation),
* renders longer than the configured cap (keeps search spaces bounded),
* produces a left-hand side already used in the walk (each state keeps a
  distinct LHS; fresh considerations and index bumps guarantee this for the
  accepted steps),
* commutes with the previous step, i.e. applying the two steps in either
  order yields the same state: such pairs make the hidden state between
  them genuinely ambiguous, and the walk is meant to be reconstructable.

Arguments are drawn from the requisite pool plus the history excluding the
immediately preceding state, which is exactly what a reconstructing search
is given, so every recorded transition is replayable from its unit's
knowledge base.  Walks that stall or end awkwardly restart deterministically
from a reseeded generator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .actions import Action, apply, builtin_action_set, remove_index
from .dataset import (
    CONSIDER_ACTION,
    DUMMY_HEAD,
    DerivationRecord,
    DerivationSequence,
    record_for_state,
    retag,
)
from .kb import dedupe_equations
from .states import (
    ActionType,
    EquationState,
    NSA,
    NONE_NSA,
    StateType,
    equation_nsa,
    symbol_nsa,
)

DEFAULT_MAX_RENDER_LEN = 100


class GenerationStalled(RuntimeError):
    """No acceptable step exists; reports the state the walk stalled at."""

    def __init__(self, step: int, state: EquationState):
        super().__init__(
            f"walk stalled at step {step}: no acceptable action from "
            f"{state.render_text!r}"
        )
        self.step = step
        self.state = state


@dataclass(frozen=True)
class GenConfig:
    seed_equations: tuple[EquationState, ...]
    length: int = 20
    branch_p: float = 0.2
    rng_seed: int = 0
    # None: scale with walk length, long walks need room to avoid stalling.
    max_render_len: int | None = None
    max_attempts: int = 20

    def __post_init__(self):
        if self.length < 3:
            raise ValueError("walk length must be at least 3")
        if not self.seed_equations:
            raise ValueError("at least one seed equation required")
        if not 0.0 <= self.branch_p <= 1.0:
            raise ValueError("branch probability must be in [0, 1]")

    @property
    def render_cap(self) -> int:
        if self.max_render_len is not None:
            return self.max_render_len
        return max(DEFAULT_MAX_RENDER_LEN, 40 + 2 * self.length)


def _walk_actions() -> tuple[Action, ...]:
    # remove_index is reserved for the tail dummy: mid-walk it would recreate
    # an already-used LHS on the next index bump.
    return tuple(a for a in builtin_action_set() if a.name != "remove_index")


def _nsa_pool(
    action: Action,
    requisite: tuple[EquationState, ...],
    history: list[EquationState],
) -> list[NSA]:
    pool_eqs = dedupe_equations([*requisite, *history[:-1]])
    if action.category == ActionType.SELF_STATE:
        return [NONE_NSA]
    if action.category == ActionType.SYMBOL_STATE:
        symbols: set[str] = set()
        for e in pool_eqs:
            symbols |= e.symbols
        return [symbol_nsa(s) for s in sorted(symbols)]
    return [equation_nsa(e) for e in pool_eqs]


def _generate_once(cfg: GenConfig, rng: random.Random) -> DerivationSequence:
    actions = _walk_actions()
    consider = next(a for a in actions if a.name == CONSIDER_ACTION)
    others = [a for a in actions if a.name != CONSIDER_ACTION]

    states: list[EquationState] = []
    records: list[DerivationRecord] = []
    used_lhs = {DUMMY_HEAD.lhs_text}
    used_base = {DUMMY_HEAD.render_base}
    prev_step: tuple[Action, NSA] | None = None
    cur = DUMMY_HEAD
    # Summation-index renames compose transitively: a rename directly after a
    # rename (or after introducing the summation) leaves the intermediate
    # genuinely underdetermined, so such unit shapes are not walked.
    rename_family = {"substitute_index_symbol", "sum_over_symbol"}

    for step in range(cfg.length):
        fresh_seeds = [
            e for e in cfg.seed_equations
            if EquationState(e.lhs, e.rhs, 0, StateType.INTEGRATIVE).lhs_text
            not in used_lhs
        ]
        want_branch = step == 0 or (fresh_seeds and rng.random() < cfg.branch_p)
        chosen: tuple[Action, NSA, EquationState] | None = None

        if want_branch and fresh_seeds:
            eq = rng.choice(fresh_seeds)
            nsa = equation_nsa(eq)
            out = apply(consider, cur, nsa)
            if (
                out.render_text != cur.render_text
                and out.lhs_text not in used_lhs
                and len(out.render_text) <= cfg.render_cap
            ):
                chosen = (consider, nsa, out)

        if chosen is None and step > 0:
            pairs = [
                (a, nsa) for a in others for nsa in _nsa_pool(a, cfg.seed_equations, states)
            ]
            rng.shuffle(pairs)
            for a, nsa in pairs:
                if (
                    a.name == "substitute_index_symbol"
                    and prev_step is not None
                    and prev_step[0].name in rename_family
                ):
                    continue
                out = apply(a, cur, nsa)
                if out.render_text == cur.render_text:
                    continue
                if len(out.render_text) > cfg.render_cap:
                    continue
                if out.lhs_text in used_lhs or out.render_base in used_base:
                    continue
                if prev_step is not None and _commutes(prev_step, (a, nsa), states, out):
                    continue
                chosen = (a, nsa, out)
                break

        if chosen is None:
            raise GenerationStalled(step, cur)

        action, nsa, out = chosen
        used_lhs.add(out.lhs_text)
        used_base.add(out.render_base)
        states.append(out)
        records.append(
            record_for_state(out, action.name, nsa.render, action.category.value)
        )
        prev_step = (action, nsa)
        cur = out

    tail = remove_index(states[-1])
    if (
        tail.render_text != states[-1].render_text
        and tail.render_text in {s.render_text for s in states}
    ):
        raise GenerationStalled(cfg.length, states[-1])
    return retag(DerivationSequence(records=tuple(records)))


def _commutes(
    prev_step: tuple[Action, NSA],
    step: tuple[Action, NSA],
    states: list[EquationState],
    out: EquationState,
) -> bool:
    """Whether swapping the last two steps reproduces the same end state."""
    if len(states) < 2:
        base = DUMMY_HEAD if len(states) == 1 else None
        if base is None:
            return False
    else:
        base = states[-2]
    a_prev, nsa_prev = prev_step
    a, nsa = step
    alt_mid = apply(a, base, nsa)
    if alt_mid.render_text == base.render_text:
        return False
    alt_end = apply(a_prev, alt_mid, nsa_prev)
    return alt_end.render_text == out.render_text


def generate(cfg: GenConfig) -> DerivationSequence:
    """Deterministic in the seed: identical configs give identical sequences.

    Retries with reseeded randomness when a walk stalls; raises
    :class:`GenerationStalled` only after ``max_attempts`` dead ends.
    """
    last_err: GenerationStalled | None = None
    for attempt in range(cfg.max_attempts):
        rng = random.Random(f"{cfg.rng_seed}:{attempt}")
        try:
            return _generate_once(cfg, rng)
        except GenerationStalled as err:
            last_err = err
    assert last_err is not None
    raise last_err


def replay(seq: DerivationSequence, strict: bool = True) -> list[str]:
    """Re-apply the recorded actions from the neutral start state.

    Returns findings (empty when every recorded state is reproduced
    exactly); with ``strict`` a finding raises instead.
    """
    from .actions import action_by_name
    from .states import parse_state

    findings: list[str] = []
    cur = DUMMY_HEAD
    for i, rec in enumerate(seq.records, 1):
        action = action_by_name(rec.action_name)
        if action.category == ActionType.SELF_STATE:
            nsa = NONE_NSA
        elif action.category == ActionType.SYMBOL_STATE:
            nsa = symbol_nsa(rec.nsa_text)
        else:
            nsa = equation_nsa(parse_state(rec.nsa_text))
        cur = apply(action, cur, nsa)
        if cur.render_text != rec.text_str:
            msg = (
                f"step {i}: replay produced {cur.render_text!r}, "
                f"recorded {rec.text_str!r}"
            )
            if strict:
                raise AssertionError(msg)
            findings.append(msg)
    return findings


def audit_conventions(seq: DerivationSequence) -> list[str]:
    """Check the stored-tuple, distinct-LHS, and no-op-step rules over a
    recorded walk; returns findings, empty when clean."""
    findings: list[str] = []
    states = seq.states
    if states is None:
        return ["sequence is not natively parseable"]
    seen_lhs: dict[str, int] = {}
    prev_render = DUMMY_HEAD.render_text
    for i, (st, rec) in enumerate(zip(states, seq.records), 1):
        lhs = st.lhs_text
        if lhs in seen_lhs and rec.action_name != "remove_index":
            findings.append(
                f"step {i}: LHS {lhs!r} repeats step {seen_lhs[lhs]} and was "
                f"not produced by remove_index"
            )
        seen_lhs.setdefault(lhs, i)
        if st.render_text == prev_render:
            findings.append(f"step {i}: recorded step is a no-op")
        prev_render = st.render_text
    return findings
