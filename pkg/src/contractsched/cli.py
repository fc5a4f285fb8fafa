"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import advisor, bounds, harness, querygames
from .errors import ContractSchedError, ProtocolError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _write(path: str | None, text: str):
    if path:
        Path(path).write_text(text)


def _plot(kind: str, obj, path: str):
    from . import plotting
    getattr(plotting, kind)(obj, path)
    print(f"figure written to {path}")


def cmd_bounds(a) -> int:
    rep = bounds.bounds_report(a.k, a.H, a.r, a.p, a.f)
    d = rep.to_dict()
    width = max(len(key) for key in d)
    for key, val in d.items():
        if key != "notes" and val is not None:
            print(f"{key:<{width}}  {val:.12g}" if isinstance(val, float) else
                  f"{key:<{width}}  {val}")
    for note in rep.notes:
        print(f"note: {note}")
    _write(a.out, json.dumps(d, indent=2))
    return EXIT_OK


def cmd_schedule(a) -> int:
    if a.mode == "rft":
        ms = advisor.build_rft_schedule(a.r, a.p, a.f, a.horizon or 400)
        d = ms.to_dict()
        d.update({"mode": "rft", "r": a.r, "p": a.p, "f": a.f,
                  "b": bounds.rft_optimal_value(a.r, a.p, a.f).base})
        text = json.dumps(d, indent=2)
        if a.csv:
            rows = ["member,j,length,completion_time"]
            for i, s in enumerate(ms.processors):
                for j, (x, t) in enumerate(zip(s.lengths, s.completion_times())):
                    rows.append(f"{i},{j},{float(x)!r},{float(t)!r}")
            _write(a.csv, "\n".join(rows) + "\n")
    else:
        horizon = a.horizon or advisor.DEFAULT_HORIZON
        if a.mode == "untrusted":
            plan = advisor.build_pareto_schedule(a.r, a.k, horizon)
        elif a.mode == "noisy":
            plan = advisor.build_noisy_schedule(a.k, a.H, horizon)
        else:
            plan = advisor.build_robust_noisy_schedule(a.k, a.H, a.r, horizon)
        text = plan.to_json()
        if a.csv:
            _write(a.csv, plan.contract_table())
    print(text)
    _write(a.out, text)
    return EXIT_OK


def cmd_simulate(a) -> int:
    cfg = harness.SimulationConfig(
        a.scenario, k=a.k, H=a.H, r=a.r, p=a.p, f=a.f, t_grid=a.t_grid,
        fillers=a.fillers, seeds=a.seed or [0], horizon=a.horizon, tolerance=a.tolerance)
    run = harness.run_scenario(cfg)
    print(run.to_text())
    _write(a.out, run.to_json())
    if a.csv and run.records:
        keys = list(run.records[0])
        for rec in run.records:
            keys += [k for k in rec if k not in keys]
        with open(a.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            w.writerows(run.records)
    if a.plot:
        _plot("plot_simulation", run, a.plot)
    return EXIT_OK if run.passed else EXIT_FAIL


def cmd_game(a) -> int:
    n = a.n if a.n is not None else 2 ** a.k
    if a.replay:
        return _replay(n, a)
    if a.mode == "adversarial":
        outcome = querygames.play_against_adversary(n, a.k, a.H)
        transcript = outcome.transcript
        print(f"output {outcome.output}; survivors {outcome.survivors} "
              f"(required {outcome.required}); forced rank {outcome.forced_rank}; "
              f"cyclic rank {outcome.cyclic_rank}")
        ok = outcome.survivors_ok
    else:
        if a.target is None:
            raise harness.ConfigError(f"--target is required for mode {a.mode}")
        if a.mode == "truthful":
            ch = querygames.AdviceChannel.truthful(a.target)
        elif a.mode == "scripted":
            ch = querygames.AdviceChannel.scripted(a.target, a.lies or [], a.H)
        else:
            ch = querygames.AdviceChannel.random(a.target, a.k, a.H, a.seed)
        j, transcript = querygames.solve_min_cyclic(n, ch, a.k, a.H)
        rank = querygames.cyclic_rank(j, a.target, n)
        guarantee = querygames.min_cyclic_guarantee(n, a.k, a.H) - 1
        print(f"output {j}; A[{j}] = {rank}; lies used {ch.lies_used}; guarantee {guarantee}")
        ok = ch.lies_used > a.H or rank <= guarantee
    sys.stdout.write(transcript.to_jsonl())
    _write(a.out, transcript.to_jsonl())
    return EXIT_OK if ok else EXIT_FAIL


def _replay(n: int, a) -> int:
    transcript = querygames.QueryTranscript.from_jsonl(Path(a.replay).read_text())
    solver = querygames.MinCyclicSolver(n, a.k, a.H)
    if len(transcript.records) != a.k:
        print(f"replay: transcript has {len(transcript.records)} queries, expected {a.k}")
        return EXIT_FAIL
    answers: tuple[bool, ...] = ()
    for i, rec in enumerate(transcript.records):
        expected = solver.query(answers)
        if rec.query != expected:
            print(f"replay: query {i} was {rec.query}, solver asks {expected}")
            return EXIT_FAIL
        answers += (rec.answer,)
    try:
        out = solver.output(answers)
    except ProtocolError as exc:
        print(f"replay: {exc}")
        return EXIT_FAIL
    if transcript.output is not None and transcript.output != out:
        print(f"replay: recorded output {transcript.output}, solver outputs {out}")
        return EXIT_FAIL
    print(f"replay ok: output {out}")
    return EXIT_OK


def cmd_verify(a) -> int:
    rep = harness.verify_theorems(a.level, a.tags)
    print(rep.to_text())
    _write(a.out, json.dumps(rep.to_dict(), indent=2))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_table(a) -> int:
    table = harness.compare_bounds_table(a.k_range, a.tau, a.r)
    print(table.to_text())
    _write(a.csv, table.to_csv())
    _write(a.out, json.dumps(table.to_dict(), indent=2))
    if a.plot:
        _plot("plot_bounds_table", table, a.plot)
    return EXIT_OK if table.passed else EXIT_FAIL


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="contractsched",
                                     description="Contract scheduling with advice.")
    parser.add_argument("--config", help="JSON file with default values for the subcommand")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", help="write the JSON report to this file")
        subs[name] = p
        return p

    def game_params(p, k_default=0):
        p.add_argument("--k", type=int, default=k_default, help="advice bits / queries")
        p.add_argument("--H", type=int, default=0, help="maximum number of wrong answers")

    p = add("bounds", cmd_bounds, "closed-form bounds")
    game_params(p)
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--p", type=int)
    p.add_argument("--f", type=int)

    p = add("schedule", cmd_schedule, "build a schedule")
    p.add_argument("--mode", choices=advisor.MODES + ("rft",), default="untrusted")
    game_params(p)
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--p", type=int)
    p.add_argument("--f", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--csv", help="per-member contract table")

    p = add("simulate", cmd_simulate, "run a simulation scenario")
    p.add_argument("--scenario", choices=harness.SCENARIOS, required=False, default="pareto")
    game_params(p)
    p.add_argument("--r", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--f", type=int)
    p.add_argument("--seed", type=int, action="append")
    p.add_argument("--t-grid", type=int, default=1000)
    p.add_argument("--fillers", type=int, default=100)
    p.add_argument("--horizon", type=int)
    p.add_argument("--tolerance", type=float, default=harness.DEFAULT_TOLERANCE)
    p.add_argument("--csv", help="per-probe records")
    p.add_argument("--plot", help="figure path (needs matplotlib)")

    p = add("game", cmd_game, "play one MinCyclic game")
    p.add_argument("--n", type=int, help="array size (default 2**k)")
    game_params(p, k_default=3)
    p.add_argument("--mode", choices=("truthful", "scripted", "random", "adversarial"),
                   default="truthful")
    p.add_argument("--target", type=int)
    p.add_argument("--lies", type=int, nargs="*", help="scripted lie positions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay", help="JSONL transcript to re-check")

    p = add("verify", cmd_verify, "run the theorem suites")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--tags", nargs="*", choices=harness.THEOREM_TAGS)

    p = add("table", cmd_table, "compare noisy bounds across k")
    p.add_argument("--k-range", type=int, nargs="+", default=[0, 8, 16, 32, 64])
    p.add_argument("--tau", type=float, nargs="+", default=[0.125, 0.25])
    p.add_argument("--r", type=float)
    p.add_argument("--csv")
    p.add_argument("--plot")
    return parser, subs


def main(argv: list[str] | None = None) -> int:
    parser, subs = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.config:
            conf = json.loads(Path(args.config).read_text())
            if not isinstance(conf, dict):
                raise harness.ConfigError("config file must hold a JSON object")
            conf = {key.replace("-", "_"): val for key, val in conf.items()}
            subs[args.command].set_defaults(**conf)
            args = parser.parse_args(argv)
        return args.func(args)
    except AssertionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ContractSchedError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
