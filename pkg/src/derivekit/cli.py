"""Command-line interface.

Subcommands: ``dataset`` (stats, validate), ``metrics``, ``actions``,
``reconstruct``, ``evaluate``, ``generate``.  stdout carries payload only
and identical invocations are byte-identical; diagnostics go to stderr.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

Every flag can also be supplied through ``--config FILE`` as ``key=value``
lines (keys are the long option names, dashes or underscores); command-line
values win over config values.  ``DERIVEKIT_JOBS`` sets the default worker
count for ``--jobs``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .actions import builtin_action_set
from .dataset import (
    DataFormatError,
    DerivationSequence,
    census,
    load,
    save,
    validate,
)
from .evaluate import (
    EvalConfig,
    EvaluationError,
    epsilon_low,
    evaluate,
    render_report,
)
from .kb import KBFileError, load_kb_file
from .metrics import MEASURE_ALIASES, Measure
from .search import DerivationUnit, HeuristicParams, reconstruct
from .states import StateSyntaxError
from .generate import GenConfig, GenerationStalled, generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise DataFormatError(f"cannot read config {path}: {err}") from err
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, _, value = stripped.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


class _Options:
    """Layered option lookup: command line, then config file, then default."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.config = _read_config(self.args["config"]) if self.args.get("config") else {}

    def get(self, key: str, default=None, cast=None):
        value = self.args.get(key)
        if value is None:
            raw = self.config.get(key)
            if raw is None:
                return default
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw) if cast else raw
        return value

    def get_list(self, key: str, default, cast):
        value = self.args.get(key)
        if value:
            return [cast(v) for v in value]
        raw = self.config.get(key)
        if raw is not None:
            return [cast(v) for v in raw.split(",")]
        return list(default)


def _default_jobs() -> int:
    raw = os.environ.get("DERIVEKIT_JOBS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _measure_from(opts: _Options) -> Measure:
    name = opts.get("measure", "damerau_levenshtein")
    jw_p = opts.get("jw_p", 0.1, float)
    osa_flag = bool(opts.get("damerau_osa", False, bool))
    try:
        return Measure.from_name(name, jw_p=jw_p, damerau_osa=osa_flag)
    except ValueError as err:
        raise UsageError(str(err)) from err


def _params_from(opts: _Options) -> HeuristicParams:
    try:
        return HeuristicParams(
            n1=opts.get("n1", 10, int),
            n2=opts.get("n2", 10, int),
            n3=opts.get("n3", 10, int),
            subexpr_threshold=opts.get("threshold", 100, int),
        )
    except ValueError as err:
        raise UsageError(str(err)) from err


def _load_dataset(path: str) -> DerivationSequence:
    return load(path)


def _load_requisite(opts: _Options) -> tuple:
    kb_path = opts.get("kb")
    if not kb_path:
        return ()
    return load_kb_file(kb_path)


def build_parser() -> _Parser:
    p = _Parser(prog="derivekit", description=__doc__)
    p.add_argument("--version", action="version", version=f"derivekit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value file mirroring these flags")

    d = sub.add_parser("dataset", help="inspect or validate a dataset file")
    dsub = d.add_subparsers(dest="dataset_command", required=True)
    for name in ("stats", "validate"):
        sp = dsub.add_parser(name)
        sp.add_argument("file")
        sp.add_argument("--report", choices=("table", "json"))
        common(sp)

    m = sub.add_parser("metrics", help="string distances and epsilon_low")
    m.add_argument("--a")
    m.add_argument("--b")
    m.add_argument("--dataset", help="compute epsilon_low for this dataset instead")
    m.add_argument("--tail-text", help="override the tail dummy rendering")
    m.add_argument("--measure", choices=sorted(MEASURE_ALIASES))
    m.add_argument("--jw-p", type=float, dest="jw_p")
    m.add_argument("--damerau-osa", action="store_const", const=True, dest="damerau_osa")
    common(m)

    a = sub.add_parser("actions", help="the builtin action set")
    asub = a.add_subparsers(dest="actions_command", required=True)
    al = asub.add_parser("list")
    al.add_argument("--report", choices=("table", "json"))
    common(al)

    r = sub.add_parser("reconstruct", help="reconstruct one hidden state")
    r.add_argument("--dataset", required=True)
    r.add_argument("--kb")
    r.add_argument("--unit", type=int, required=True, help="1-based unit position")
    r.add_argument("--measure", choices=sorted(MEASURE_ALIASES))
    r.add_argument("--jw-p", type=float, dest="jw_p")
    r.add_argument("--damerau-osa", action="store_const", const=True, dest="damerau_osa")
    r.add_argument("--n1", type=int)
    r.add_argument("--n2", type=int)
    r.add_argument("--n3", type=int)
    r.add_argument("--threshold", type=int)
    r.add_argument("--intermediates", type=int, help="hidden states to bridge (default 1)")
    common(r)

    e = sub.add_parser("evaluate", help="run every unit reconstruction")
    e.add_argument("--dataset", required=True)
    e.add_argument("--kb")
    e.add_argument("--measure", choices=sorted(MEASURE_ALIASES))
    e.add_argument("--jw-p", type=float, dest="jw_p")
    e.add_argument("--damerau-osa", action="store_const", const=True, dest="damerau_osa")
    e.add_argument("--eta", type=int, action="append",
                   help="tolerance multiplier; repeatable (default 0 and 1)")
    e.add_argument("--eta-real", type=float, action="append", dest="eta_real",
                   help="non-integer tolerance multiplier, for exploration only")
    e.add_argument("--n1", type=int)
    e.add_argument("--n2", type=int)
    e.add_argument("--n3", type=int)
    e.add_argument("--threshold", type=int)
    e.add_argument("--jobs", type=int)
    e.add_argument("--report", choices=("table", "json"))
    e.add_argument("--figures", help="directory for rendered figure files")
    common(e)

    g = sub.add_parser("generate", help="generate a synthetic derivation")
    g.add_argument("--seed-eqs", dest="seed_eqs", required=True,
                   help="requisite equation file, one LHS = RHS per line")
    g.add_argument("--length", type=int)
    g.add_argument("--branch-p", type=float, dest="branch_p")
    g.add_argument("--rng", type=int)
    g.add_argument("--max-render-len", type=int, dest="max_render_len")
    g.add_argument("--out", required=True)
    common(g)

    return p


def _cmd_dataset(opts: _Options) -> int:
    seq = _load_dataset(opts.args["file"])
    if opts.args["dataset_command"] == "stats":
        c = census(seq)
        payload = c.as_dict()
        payload["native"] = seq.native
        if opts.get("report", "table") == "json":
            print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
        else:
            print(f"records: {c.total}")
            print(f"native: {seq.native}")
            for st, n in sorted(c.by_state_type.items()):
                print(f"  {st}: {n}")
            print("cells (state type x action type):")
            for (st, at), n in sorted(c.by_cell.items()):
                print(f"  {st}/{at}: {n}")
            tmin, tmean, tmax = c.text_len
            lmin, lmean, lmax = c.latex_len
            print(f"text length min/mean/max: {tmin}/{tmean:.1f}/{tmax}")
            print(f"latex length min/mean/max: {lmin}/{lmean:.1f}/{lmax}")
        return EXIT_OK
    problems = validate(seq)
    for pr in problems:
        print(pr)
    if problems:
        print(f"{len(problems)} problem(s)")
        return EXIT_DATA
    print("ok")
    return EXIT_OK


def _cmd_metrics(opts: _Options) -> int:
    measure = _measure_from(opts)
    dataset = opts.get("dataset")
    if dataset:
        seq = _load_dataset(dataset)
        value = epsilon_low(seq, measure, tail_text=opts.get("tail_text"))
        print(value)
        return EXIT_OK
    a, b = opts.get("a"), opts.get("b")
    if a is None or b is None:
        raise UsageError("metrics needs --a and --b, or --dataset")
    print(measure.distance(a, b))
    return EXIT_OK


def _cmd_actions(opts: _Options) -> int:
    acts = builtin_action_set()
    if opts.get("report", "table") == "json":
        payload = [
            {"name": a.name, "category": a.category.value, "description": a.description}
            for a in sorted(acts, key=lambda a: a.name)
        ]
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    else:
        for a in sorted(acts, key=lambda a: (a.category.value, a.name)):
            print(f"{a.name:<32} {a.category.value:<15} {a.description}")
    return EXIT_OK


def _cmd_reconstruct(opts: _Options) -> int:
    from .kb import build as build_kb

    seq = _load_dataset(opts.args["dataset"])
    states = seq.states
    if states is None:
        raise EvaluationError("dataset is not natively parseable")
    tail = seq.dummy_tail
    assert tail is not None
    all_states = (seq.dummy_head, *states, tail)
    i = opts.args["unit"]
    if not 1 <= i <= len(seq.records):
        raise UsageError(f"unit must be in 1..{len(seq.records)}")
    requisite = _load_requisite(opts)
    s_prev, truth, s_next = all_states[i - 1], all_states[i], all_states[i + 1]
    kb = build_kb(requisite, all_states[:i], s_prev, s_next)
    unit = DerivationUnit(s_prev=s_prev, s_next=s_next, hidden_truth=truth)
    res = reconstruct(
        unit,
        builtin_action_set(),
        kb,
        _measure_from(opts),
        _params_from(opts),
        intermediates=opts.get("intermediates", 1, int),
    )
    payload = res.as_report()
    payload["unit"] = i
    payload["truth"] = truth.render_text
    payload["match"] = res.reconstruction.render_text == truth.render_text
    print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    return EXIT_OK


def _cmd_evaluate(opts: _Options) -> int:
    seq = _load_dataset(opts.args["dataset"])
    requisite = _load_requisite(opts)
    etas = opts.get_list("eta", (0, 1), int)
    etas_real = opts.get_list("eta_real", (), float)
    cfg = EvalConfig(
        measure=_measure_from(opts),
        etas=tuple(etas) + tuple(etas_real),
        params=_params_from(opts),
        jobs=opts.get("jobs", _default_jobs(), int),
    )
    report = evaluate(seq, requisite, cfg)
    fmt = opts.get("report", "table")
    out = render_report(report, fmt)
    print(out, end="" if out.endswith("\n") else "\n")
    figures_dir = opts.get("figures")
    if figures_dir:
        from .figures import render_figures

        written = render_figures(report, figures_dir)
        print(f"wrote {len(written)} figure(s) to {figures_dir}", file=sys.stderr)
    return EXIT_OK


def _cmd_generate(opts: _Options) -> int:
    requisite = load_kb_file(opts.args["seed_eqs"])
    cfg = GenConfig(
        seed_equations=tuple(requisite),
        length=opts.get("length", 20, int),
        branch_p=opts.get("branch_p", 0.2, float),
        rng_seed=opts.get("rng", 0, int),
        max_render_len=opts.get("max_render_len", 100, int),
    )
    seq = generate(cfg)
    out_path = opts.args["out"]
    save(seq, out_path)
    c = census(seq)
    print(
        json.dumps(
            {
                "out": out_path,
                "records": c.total,
                "state_types": dict(sorted(c.by_state_type.items())),
            },
            sort_keys=True,
            separators=(",", ":"),
        )
    )
    return EXIT_OK


_COMMANDS = {
    "dataset": _cmd_dataset,
    "metrics": _cmd_metrics,
    "actions": _cmd_actions,
    "reconstruct": _cmd_reconstruct,
    "evaluate": _cmd_evaluate,
    "generate": _cmd_generate,
}

_DATA_ERRORS = (
    DataFormatError,
    KBFileError,
    EvaluationError,
    StateSyntaxError,
    GenerationStalled,
    FileNotFoundError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = _Options(args)
        return _COMMANDS[args.command](opts)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:  # pragma: no cover - shell plumbing
        return EXIT_OK
    except Exception as err:  # pragma: no cover - defensive
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
