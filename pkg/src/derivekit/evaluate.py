"""Evaluation harness: sliding-unit reconstruction over a whole sequence.

A padded sequence of N states yields N - 2 fully independent unit
reconstructions.  Each unit sees the requisite equations plus the state
history before its hidden state as knowledge base.  A reconstruction counts
as a success at tolerance level eta when its distance to the hidden truth is
at most ``eta * epsilon_low``, where ``epsilon_low`` is the distance between
the final stored state and the tail dummy; eta = 0 is exact string matching.

Results aggregate overall and per (state type, action type) cell, the action
being the one that directly produced the hidden state.  Failures at exact
matching are classified into three kinds:

* ``terminal-state``: the later endpoint is integrative, so any first action
  followed by a knowledge-base consideration reproduces it, and the unit
  carries no signal about the hidden state;
* ``repeating-equation``: the later endpoint repeats an equation already in
  the history (up to the LHS index), so the search short-circuits through a
  consideration of the repeat;
* ``multiple-pathways``: several paths reach the later endpoint exactly and
  an alternative intermediate won the tie-break.

Units are embarrassingly parallel; outcomes are aggregated in unit order so
reports are byte-identical regardless of worker count.
"""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass

from .actions import Action, action_by_name, builtin_action_set
from .dataset import DerivationSequence
from .kb import build as build_kb
from .metrics import Measure
from .search import DerivationUnit, HeuristicParams, reconstruct
from .states import EquationState, StateType

FAILURE_TERMINAL = "terminal-state"
FAILURE_REPEAT = "repeating-equation"
FAILURE_MULTIPATH = "multiple-pathways"


class EvaluationError(ValueError):
    pass


def epsilon_low(
    seq: DerivationSequence,
    measure: Measure,
    tail_text: str | None = None,
) -> float | int:
    """Distance between the final stored state and the tail dummy.

    ``tail_text`` overrides the synthesised tail rendering, for ingested
    datasets that publish their own padding state.
    """
    if not seq.records:
        raise EvaluationError("sequence too short: no stored states")
    last, tail = seq.final_text_pair()
    if tail_text is not None:
        tail = tail_text
    return measure.distance(tail, last)


@dataclass(frozen=True)
class EvalConfig:
    measure: Measure = Measure()
    etas: tuple[int, ...] = (0, 1)
    params: HeuristicParams = HeuristicParams()
    jobs: int = 1
    action_names: tuple[str, ...] | None = None  # None: the builtin set

    def actions(self) -> tuple[Action, ...]:
        if self.action_names is None:
            return builtin_action_set()
        return tuple(action_by_name(n) for n in self.action_names)


@dataclass(frozen=True)
class UnitOutcome:
    unit: int
    state_type: str
    action_type: str
    action_name: str
    next_integrative: bool
    distance: float | int
    failure_class: str | None
    truth: str
    reconstruction: str
    first_step: tuple[str, str]
    second_step: tuple[str, str]
    end_distance: float | int
    heuristic_value: int
    early_stopped: bool

    def success(self, eta: float, eps_low: float | int) -> bool:
        return self.distance <= eta * eps_low


@dataclass(frozen=True)
class EvalReport:
    measure: str
    epsilon_low: float | int
    etas: tuple[float, ...]
    outcomes: tuple[UnitOutcome, ...]
    mode: str = "reconstruction"

    @property
    def total(self) -> int:
        return len(self.outcomes)

    def successes(self, eta: float) -> int:
        e = self.epsilon_low
        return sum(1 for o in self.outcomes if o.success(eta, e))

    def accuracy(self, eta: float) -> float:
        if not self.outcomes:
            return 0.0
        return self.successes(eta) / self.total

    def cells(self, eta: float) -> dict[tuple[str, str], tuple[int, int]]:
        """(successes, count) per (state type, action type)."""
        out: dict[tuple[str, str], list[int]] = {}
        e = self.epsilon_low
        for o in self.outcomes:
            cell = out.setdefault((o.state_type, o.action_type), [0, 0])
            cell[1] += 1
            if o.success(eta, e):
                cell[0] += 1
        return {k: (v[0], v[1]) for k, v in out.items()}

    def to_dict(self) -> dict:
        per_eta = {}
        for eta in self.etas:
            per_eta[str(eta)] = {
                "successes": self.successes(eta),
                "total": self.total,
                "accuracy": self.accuracy(eta),
                "cells": {
                    f"{s}/{a}": {"successes": w, "count": n, "accuracy": w / n}
                    for (s, a), (w, n) in sorted(self.cells(eta).items())
                },
            }
        return {
            "mode": self.mode,
            "measure": self.measure,
            "epsilon_low": self.epsilon_low,
            "etas": list(self.etas),
            "results": per_eta,
            "units": [
                {
                    "unit": o.unit,
                    "state_type": o.state_type,
                    "action_type": o.action_type,
                    "action_name": o.action_name,
                    "next_integrative": o.next_integrative,
                    "distance": o.distance,
                    "failure_class": o.failure_class,
                    "truth": o.truth,
                    "reconstruction": o.reconstruction,
                    "first_step": list(o.first_step),
                    "second_step": list(o.second_step),
                    "end_distance": o.end_distance,
                    "heuristic": o.heuristic_value,
                    "early_stopped": o.early_stopped,
                }
                for o in self.outcomes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        outcomes = tuple(
            UnitOutcome(
                unit=u["unit"],
                state_type=u["state_type"],
                action_type=u["action_type"],
                action_name=u["action_name"],
                next_integrative=u["next_integrative"],
                distance=u["distance"],
                failure_class=u["failure_class"],
                truth=u["truth"],
                reconstruction=u["reconstruction"],
                first_step=tuple(u["first_step"]),
                second_step=tuple(u["second_step"]),
                end_distance=u["end_distance"],
                heuristic_value=u["heuristic"],
                early_stopped=u["early_stopped"],
            )
            for u in d["units"]
        )
        return cls(
            measure=d["measure"],
            epsilon_low=d["epsilon_low"],
            etas=tuple(d["etas"]),
            outcomes=outcomes,
            mode=d["mode"],
        )

    @classmethod
    def from_json(cls, s: str) -> "EvalReport":
        return cls.from_dict(json.loads(s))


def render_report(report: EvalReport, fmt: str = "table") -> str:
    """Serialise a report: an aligned table for humans, or compact JSON."""
    if fmt == "json":
        return report.to_json()
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"mode: {report.mode}",
        f"measure: {report.measure}",
        f"epsilon_low: {report.epsilon_low}",
        f"units: {report.total}",
    ]
    state_types = ["integrative", "consequent", "terminal"]
    action_types = ["self-state", "symbol-state", "equation-state"]
    for eta in report.etas:
        lines.append("")
        lines.append(
            f"eta={eta}  accuracy {report.accuracy(eta):.3f} "
            f"({report.successes(eta)}/{report.total})"
        )
        cells = report.cells(eta)
        header = f"  {'state type':<12}" + "".join(f"{a:>16}" for a in action_types)
        lines.append(header)
        for st in state_types:
            row = f"  {st:<12}"
            for at in action_types:
                if (st, at) in cells:
                    w, n = cells[(st, at)]
                    row += f"{w / n:>10.3f} {f'({n})':>5}"
                else:
                    row += f"{'-':>16}"
            lines.append(row)
    return "\n".join(lines) + "\n"


# --- unit execution ----------------------------------------------------------


@dataclass(frozen=True)
class _UnitContext:
    states: tuple[EquationState, ...]  # dummy head + stored states + dummy tail
    requisite: tuple[EquationState, ...]
    action_types: tuple[str, ...]  # per stored state
    action_names: tuple[str, ...]
    state_types: tuple[str, ...]
    cfg: EvalConfig


def _unit_context(
    seq: DerivationSequence, requisite: tuple[EquationState, ...], cfg: EvalConfig
) -> _UnitContext:
    states = seq.states
    if states is None:
        raise EvaluationError(
            "sequence is not natively parseable; reconstruction-level "
            "evaluation needs states in the package grammar (string-level "
            "operations such as the census and epsilon_low remain available)"
        )
    tail = seq.dummy_tail
    assert tail is not None
    return _UnitContext(
        states=(seq.dummy_head, *states, tail),
        requisite=requisite,
        action_types=tuple(r.action_type for r in seq.records),
        action_names=tuple(r.action_name for r in seq.records),
        state_types=tuple(r.state_type for r in seq.records),
        cfg=cfg,
    )


def run_unit(ctx: _UnitContext, i: int) -> UnitOutcome:
    """Reconstruct hidden state i (1-based over the stored states)."""
    cfg = ctx.cfg
    s_prev = ctx.states[i - 1]
    truth = ctx.states[i]
    s_next = ctx.states[i + 1]
    history = ctx.states[:i]
    kb = build_kb(ctx.requisite, history, s_prev, s_next)
    unit = DerivationUnit(s_prev=s_prev, s_next=s_next, hidden_truth=truth)
    res = reconstruct(unit, cfg.actions(), kb, cfg.measure, cfg.params)
    distance = cfg.measure.distance(res.reconstruction.render_text, truth.render_text)

    n_records = len(ctx.action_names)
    next_integrative = i < n_records and ctx.state_types[i] == StateType.INTEGRATIVE.value
    failure: str | None = None
    if distance != 0:
        if next_integrative:
            failure = FAILURE_TERMINAL
        else:
            history_bases = {h.render_base for h in history}
            if s_next.render_base in history_bases:
                failure = FAILURE_REPEAT
            else:
                failure = FAILURE_MULTIPATH
    steps = res.path.steps
    return UnitOutcome(
        unit=i,
        state_type=ctx.state_types[i - 1],
        action_type=ctx.action_types[i - 1],
        action_name=ctx.action_names[i - 1],
        next_integrative=next_integrative,
        distance=distance,
        failure_class=failure,
        truth=truth.render_text,
        reconstruction=res.reconstruction.render_text,
        first_step=steps[0],
        second_step=steps[1] if len(steps) > 1 else ("", ""),
        end_distance=res.end_distance,
        heuristic_value=res.path.heuristic_value,
        early_stopped=res.early_stopped,
    )


_WORKER_CTX: _UnitContext | None = None


def _init_worker(ctx: _UnitContext) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker(i: int) -> UnitOutcome:
    assert _WORKER_CTX is not None
    return run_unit(_WORKER_CTX, i)


def evaluate(
    seq: DerivationSequence,
    requisite: tuple[EquationState, ...],
    cfg: EvalConfig,
    tail_text: str | None = None,
) -> EvalReport:
    """Run every unit reconstruction and aggregate a report.

    The report is independent of ``cfg.jobs``: outcomes are collected in
    unit order and every unit computation is pure.
    """
    ctx = _unit_context(seq, requisite, cfg)
    eps = epsilon_low(seq, cfg.measure, tail_text=tail_text)
    indices = list(range(1, len(seq.records) + 1))
    if cfg.jobs > 1 and len(indices) > 1:
        with multiprocessing.Pool(
            processes=cfg.jobs, initializer=_init_worker, initargs=(ctx,)
        ) as pool:
            outcomes = pool.map(_worker, indices, chunksize=8)
    else:
        outcomes = [run_unit(ctx, i) for i in indices]
    return EvalReport(
        measure=cfg.measure.kind,
        epsilon_low=eps,
        etas=tuple(cfg.etas),
        outcomes=tuple(outcomes),
    )
