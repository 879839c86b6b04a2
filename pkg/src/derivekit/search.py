"""Reconstruction of a hidden intermediate state between two known states.

Candidates for the hidden state are produced by applying every action with
every matching knowledge-base argument to the earlier state; a second round
of applications produces candidate endpoints.  Paths are ordered by a
heuristic comparing the candidate intermediate against the later state, and
expanded in that order.  The first endpoint whose distance to the later
state is zero ends the search; otherwise every endpoint is compared and the
path with the smallest endpoint distance wins, with a total deterministic
tie-break (heuristic value, then action names and argument renderings), so
results never depend on scheduling.

The heuristic is a squared norm of three weighted components:

* ``x``: how many of the later state's symbols are missing from the candidate;
* ``y``: the best Levenshtein distance between small subexpression renderings
  (both at most ``subexpr_threshold`` characters) drawn one from each state;
* ``z``: the same over large subexpressions (both above the threshold).

``y`` and ``z`` fall back to the Levenshtein distance between the whole
state renderings when no qualifying pair exists.  The heuristic always uses
Levenshtein, independent of the measure used for endpoint comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .actions import Action, apply_cached
from .kb import KnowledgeBase, nsa_candidates
from .metrics import Measure, levenshtein
from .states import EquationState, NSA, NONE_NSA

DEFAULT_SUBEXPR_THRESHOLD = 100


@dataclass(frozen=True)
class HeuristicParams:
    """Weights and the small/large subexpression threshold (characters)."""

    n1: int = 10
    n2: int = 10
    n3: int = 10
    subexpr_threshold: int = DEFAULT_SUBEXPR_THRESHOLD

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3) < 0 or self.subexpr_threshold < 0:
            raise ValueError("heuristic parameters must be non-negative")


@dataclass(frozen=True)
class DerivationUnit:
    """Three consecutive states with the middle one hidden.

    ``hidden_truth`` is present only during evaluation.  A unit whose
    endpoints render identically is degenerate: reconstruction still runs,
    but the flag is surfaced in reports.
    """

    s_prev: EquationState
    s_next: EquationState
    hidden_truth: EquationState | None = None

    @property
    def degenerate(self) -> bool:
        return self.s_prev.render_text == self.s_next.render_text


@dataclass(frozen=True)
class CandidatePath:
    """One expanded path: the actions taken and the states they produced."""

    steps: tuple[tuple[str, str], ...]  # (action name, NSA rendering) per hop
    states: tuple[EquationState, ...]  # produced states, one per hop
    heuristic_value: int

    @property
    def c_mid(self) -> EquationState:
        return self.states[0]

    @property
    def c_end(self) -> EquationState:
        return self.states[-1]

    @property
    def first_action(self) -> tuple[str, str]:
        return self.steps[0]

    @property
    def second_action(self) -> tuple[str, str]:
        return self.steps[1]


@dataclass(frozen=True)
class ReconstructionResult:
    reconstruction: EquationState
    path: CandidatePath
    end_distance: float | int
    early_stopped: bool
    n_candidates: int
    n_paths: int
    degenerate: bool

    def as_report(self) -> dict:
        return {
            "reconstruction": self.reconstruction.render_text,
            "steps": [list(s) for s in self.path.steps],
            "states": [s.render_text for s in self.path.states],
            "heuristic": self.path.heuristic_value,
            "end_distance": self.end_distance,
            "early_stopped": self.early_stopped,
            "candidates": self.n_candidates,
            "paths": self.n_paths,
            "degenerate": self.degenerate,
        }


def generate_candidates(
    s_prev: EquationState, actions: Sequence[Action], kb: KnowledgeBase
) -> list[tuple[Action, NSA, EquationState]]:
    """All (action, argument, result) triples from one application round.

    Enumeration is sorted by action name and then argument rendering, which
    fixes the tie-break order everywhere downstream.  Applications that
    return the input unchanged are kept, but only the first such no-op
    survives as the single representative of "do nothing".
    """
    out: list[tuple[Action, NSA, EquationState]] = []
    prev_render = s_prev.render_text
    noop_seen = False
    for action in sorted(actions, key=lambda a: a.name):
        nsas = sorted(nsa_candidates(kb, action.category), key=lambda n: n.render)
        for nsa in nsas:
            result = apply_cached(action, s_prev, nsa)
            if result.render_text == prev_render:
                if noop_seen:
                    continue
                noop_seen = True
            out.append((action, nsa, result))
    return out


def _min_pair_distance(a_renders: list[str], b_renders: list[str]) -> int:
    if not a_renders or not b_renders:
        raise ValueError("empty rendering pool")
    common = set(a_renders) & set(b_renders)
    if common:
        return 0
    best: int | None = None
    b_sorted = sorted(b_renders, key=len)
    b_lens = [len(s) for s in b_sorted]
    for sa in sorted(a_renders, key=len):
        la = len(sa)
        for sb, lb in zip(b_sorted, b_lens):
            gap = lb - la if lb > la else la - lb
            if best is not None and gap >= best:
                if lb > la:
                    break  # later strings are even longer
                continue
            d = levenshtein(sa, sb)
            if best is None or d < best:
                best = d
                if best == 1:
                    return 1  # 0 is impossible past the intersection check
    assert best is not None
    return best


def heuristic_components(
    c: EquationState, s_next: EquationState, threshold: int = DEFAULT_SUBEXPR_THRESHOLD
) -> tuple[int, int, int]:
    """The (x, y, z) triple described in the module docstring."""
    x = len(s_next.symbols - c.symbols)
    c_subs = c.subexpression_renders
    s_subs = s_next.subexpression_renders
    small_c = [r for r in c_subs if len(r) <= threshold]
    small_s = [r for r in s_subs if len(r) <= threshold]
    large_c = [r for r in c_subs if len(r) > threshold]
    large_s = [r for r in s_subs if len(r) > threshold]
    whole: int | None = None

    def whole_distance() -> int:
        nonlocal whole
        if whole is None:
            whole = levenshtein(c.render_text, s_next.render_text)
        return whole

    if small_c and small_s:
        y = _min_pair_distance(small_c, small_s)
    else:
        y = whole_distance()
    if large_c and large_s:
        z = _min_pair_distance(large_c, large_s)
    else:
        z = whole_distance()
    return x, y, z


def heuristic(
    c: EquationState, s_next: EquationState, params: HeuristicParams
) -> int:
    """Squared norm of the weighted component vector; zero iff every
    weighted component vanishes, which for identical states always holds."""
    x, y, z = heuristic_components(c, s_next, params.subexpr_threshold)
    return (params.n1 * x) ** 2 + (params.n2 * y) ** 2 + (params.n3 * z) ** 2


@dataclass
class _PathEntry:
    key: tuple
    steps: tuple[tuple[str, str], ...]
    states: tuple[EquationState, ...]
    heuristic_value: int
    end_render: str


def reconstruct(
    unit: DerivationUnit,
    actions: Sequence[Action],
    kb: KnowledgeBase,
    measure: Measure,
    params: HeuristicParams = HeuristicParams(),
    intermediates: int = 1,
) -> ReconstructionResult:
    """Solve one unit: return the best candidate for the hidden state.

    ``intermediates`` is the number of hidden states bridged; the default
    single-intermediate (two-hop) search is the supported configuration, and
    larger values reuse the same machinery without optimisation.
    """
    if not actions:
        raise ValueError("empty action set")
    if intermediates < 1:
        raise ValueError("need at least one intermediate state")
    target = unit.s_next
    target_render = target.render_text
    # For every measure configuration in practical use, distance zero means
    # the renderings are identical, so an exact-endpoint path can be hunted
    # by string equality and pruned hard; distances are only computed when
    # no exact endpoint exists anywhere.
    fast_zero = measure.zero_iff_equal

    first_round = generate_candidates(unit.s_prev, actions, kb)
    n_candidates = len(first_round)
    groups: dict[str, tuple[Action, NSA, EquationState]] = {}
    for a, nsa, mid in first_round:
        groups.setdefault(mid.render_text, (a, nsa, mid))
    scored = [
        (heuristic(mid, unit.s_next, params), a.name, nsa.render, a, nsa, mid)
        for a, nsa, mid in groups.values()
    ]
    scored.sort(key=lambda t: t[:3])

    sorted_actions = sorted(actions, key=lambda a: a.name)
    nsas_by_action = {
        a.name: sorted(nsa_candidates(kb, a.category), key=lambda n: n.render)
        for a in sorted_actions
    }
    n_paths = 0

    # Last-hop pruning for the exact-endpoint hunt.  Every action that
    # changes a state either bumps the LHS index by one, resets it to zero
    # (knowledge-base consideration, index removal), or is a no-op, so a
    # candidate one hop from the end can only reach the target exactly when
    # the index arithmetic works out; anything else is skipped unseen.
    consider_hits = [
        nsa
        for nsa in nsas_by_action.get("consider_kb_equation", [])
        if nsa.equation is not None
        and EquationState(nsa.equation.lhs, nsa.equation.rhs, 0).render_text
        == target_render
    ]
    have_remove = "remove_index" in nsas_by_action

    def last_hop_zero(c: EquationState) -> tuple[str, str, EquationState] | None:
        """First (action name, NSA render, end) reaching the target exactly,
        scanning in tie-break order; None when none can."""
        nonlocal n_paths
        if c.render_text == target_render:
            # Any action no-ops somewhere; find the first actual no-op.
            for a in sorted_actions:
                for nsa in nsas_by_action[a.name]:
                    n_paths += 1
                    nxt = apply_cached(a, c, nsa)
                    if nxt.render_text == target_render:
                        return (a.name, nsa.render, nxt)
            return None
        bump_ok = target.lhs_index == c.lhs_index + 1
        for a in sorted_actions:
            name = a.name
            if name == "consider_kb_equation":
                for nsa in consider_hits:
                    n_paths += 1
                    nxt = apply_cached(a, c, nsa)
                    if nxt.render_text == target_render:
                        return (name, nsa.render, nxt)
                continue
            if name == "remove_index":
                if (
                    have_remove
                    and target.lhs_index == 0
                    and c.lhs_index > 0
                    and c.render_base == target_render
                ):
                    n_paths += 1
                    nxt = apply_cached(a, c, NONE_NSA)
                    if nxt.render_text == target_render:
                        return (name, "", nxt)
                continue
            if not bump_ok:
                continue
            for nsa in nsas_by_action[name]:
                n_paths += 1
                nxt = apply_cached(a, c, nsa)
                if nxt.render_text == target_render:
                    return (name, nsa.render, nxt)
        return None

    def hunt(
        state: EquationState,
        steps: tuple[tuple[str, str], ...],
        states: tuple[EquationState, ...],
        hops_left: int,
    ) -> tuple[tuple[tuple[str, str], ...], tuple[EquationState, ...]] | None:
        if hops_left == 1:
            found = last_hop_zero(state)
            if found is None:
                return None
            name, nsa_render, end = found
            return steps + ((name, nsa_render),), states + (end,)
        seen: set[str] = set()
        for a in sorted_actions:
            for nsa in nsas_by_action[a.name]:
                nxt = apply_cached(a, state, nsa)
                if nxt.render_text in seen:
                    continue
                seen.add(nxt.render_text)
                got = hunt(
                    nxt,
                    steps + ((a.name, nsa.render),),
                    states + (nxt,),
                    hops_left - 1,
                )
                if got is not None:
                    return got
        return None

    winner: _PathEntry | None = None
    if fast_zero:
        for h_val, a1_name, nsa1_render, _a1, _nsa1, mid in scored:
            got = hunt(mid, ((a1_name, nsa1_render),), (mid,), intermediates)
            if got is not None:
                steps, path_states = got
                key = (h_val, a1_name, nsa1_render) + tuple(
                    x for s in steps[1:] for x in s
                )
                winner = _PathEntry(key, steps, path_states, h_val, target_render)
                break

    if winner is not None:
        end_distance: float | int = 0
        early = True
    else:
        # Full expansion: collect every path, early-stopping on a zero
        # endpoint distance, otherwise taking the argmin over endpoint
        # distances with the deterministic tie-break key.
        entries: list[_PathEntry] = []
        hit: _PathEntry | None = None

        def expand(
            state: EquationState,
            steps: tuple[tuple[str, str], ...],
            states: tuple[EquationState, ...],
            h_val: int,
            key: tuple,
            hops_left: int,
        ) -> _PathEntry | None:
            nonlocal n_paths
            seen: set[str] = set()
            for a in sorted_actions:
                for nsa in nsas_by_action[a.name]:
                    nxt = apply_cached(a, state, nsa)
                    r = nxt.render_text
                    if r in seen:
                        continue
                    seen.add(r)
                    step_key = key + (a.name, nsa.render)
                    new_steps = steps + ((a.name, nsa.render),)
                    new_states = states + (nxt,)
                    if hops_left == 1:
                        n_paths += 1
                        entry = _PathEntry(step_key, new_steps, new_states, h_val, r)
                        if measure.distance(r, target_render) == 0:
                            return entry
                        entries.append(entry)
                    else:
                        found = expand(
                            nxt, new_steps, new_states, h_val, step_key, hops_left - 1
                        )
                        if found is not None:
                            return found
            return None

        for h_val, a1_name, nsa1_render, _a1, _nsa1, mid in scored:
            key = (h_val, a1_name, nsa1_render)
            hit = expand(
                mid, ((a1_name, nsa1_render),), (mid,), h_val, key, intermediates
            )
            if hit is not None:
                break

        if hit is not None:
            winner = hit
            end_distance = 0
            early = True
        else:
            dist_cache: dict[str, float | int] = {}

            def end_distance_of(e: _PathEntry) -> float | int:
                d = dist_cache.get(e.end_render)
                if d is None:
                    d = measure.distance(e.end_render, target_render)
                    dist_cache[e.end_render] = d
                return d

            winner = min(entries, key=lambda e: (end_distance_of(e),) + e.key)
            end_distance = end_distance_of(winner)
            early = False

    path = CandidatePath(
        steps=winner.steps,
        states=winner.states,
        heuristic_value=winner.heuristic_value,
    )
    return ReconstructionResult(
        reconstruction=path.states[0],
        path=path,
        end_distance=end_distance,
        early_stopped=early,
        n_candidates=n_candidates,
        n_paths=n_paths,
        degenerate=unit.degenerate,
    )


def zero_end_mids(
    unit: DerivationUnit,
    actions: Sequence[Action],
    kb: KnowledgeBase,
    limit: int = 2,
) -> list[str]:
    """Renderings of distinct intermediates from which some second action
    reaches the later state exactly.  Stops once ``limit`` distinct hits are
    found; used to diagnose reconstruction failures, not in the search."""
    target = unit.s_next.render_text
    sorted_actions = sorted(actions, key=lambda a: a.name)
    nsas_by_action = {
        a.name: sorted(nsa_candidates(kb, a.category), key=lambda n: n.render)
        for a in sorted_actions
    }
    hits: list[str] = []
    seen_mids: set[str] = set()
    for a1, nsa1, mid in generate_candidates(unit.s_prev, actions, kb):
        r = mid.render_text
        if r in seen_mids:
            continue
        seen_mids.add(r)
        for a in sorted_actions:
            found = False
            for nsa in nsas_by_action[a.name]:
                if apply_cached(a, mid, nsa).render_text == target:
                    hits.append(r)
                    found = True
                    break
            if found:
                break
        if len(hits) >= limit:
            break
    return hits
