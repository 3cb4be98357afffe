"""Command line: ``python -m loadbal <subcommand>``.

Exit codes: 0 success, 1 check failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..graph import GraphError, build_named, save_graph
from ..schedule import ScheduleError
from ..spectral import SpectralError, check_goodness, check_smoothing, goodness_windows, spectral_report
from ..spectral import schedule_lambda
from .config import ConfigError, ExperimentConfig, load_config
from .experiment import build_model, run_experiment, run_sweep, write_outputs
from .suites import SUITES, run_suites

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="loadbal", description="Discrete load balancing experiments.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-graph", help="write an edge-list file for a named family")
    g.add_argument("family")
    g.add_argument("params", nargs="*", help="key=value family parameters")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--out")
    r.add_argument("--multiplier", type=float)

    s = sub.add_parser("spectral", help="print the spectral report of a config's schedule")
    s.add_argument("--config", required=True)
    s.add_argument("--multiplier", type=float)

    m = sub.add_parser("smoothing", help="check (K, eps)-smoothing of the first T rounds")
    m.add_argument("--config", required=True)
    m.add_argument("--t", type=int, required=True)
    m.add_argument("--eps", type=float, required=True)
    m.add_argument("--K", type=float)

    o = sub.add_parser("goodness", help="sample the global and local window events")
    o.add_argument("--config", required=True)
    o.add_argument("--tau-g", type=int, nargs="+")
    o.add_argument("--tau-l", type=int, nargs="+")
    o.add_argument("--starts", type=int, nargs="+", default=[0])
    o.add_argument("--realizations", type=int, default=1)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--suite", action="append", help=f"one of: {', '.join(SUITES)} (repeatable)")

    w = sub.add_parser("sweep", help="run a config grid {base, grid}")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--seed", type=int)
    w.add_argument("--trials", type=int)
    return p


def _read_config(path: str, overrides: dict) -> ExperimentConfig:
    p = Path(path)
    doc = json.loads(p.read_text())
    for k, val in overrides.items():
        if val is not None:
            if k == "multiplier":
                rounds = doc.get("rounds", {"kind": "tau_spectral"})
                rounds = {"kind": rounds} if isinstance(rounds, str) else dict(rounds)
                rounds["multiplier"] = val
                doc["rounds"] = rounds
            else:
                doc[k] = val
    return load_config(json.dumps(doc), str(p.parent))


def _cmd_gen_graph(a) -> int:
    params = {}
    for item in a.params:
        if "=" not in item:
            raise ConfigError([f"parameter {item!r} is not key=value"])
        k, val = item.split("=", 1)
        params[k] = int(val)
    if a.seed is not None:
        params["seed"] = a.seed
    g = build_named(a.family, **params)
    Path(a.out).write_text(save_graph(g))
    print(json.dumps({"n": g.n, "m": g.m, "out": a.out}))
    return EXIT_OK


def _cmd_run(a) -> int:
    cfg = _read_config(a.config, {"seed": a.seed, "trials": a.trials, "multiplier": a.multiplier})
    out = a.out or cfg.out_dir
    if out is None:
        raise ConfigError(["no output directory (use --out or output.dir)"])
    res = run_experiment(cfg)
    write_outputs(res, out)
    s = res["summary_obj"]
    print(json.dumps({"out": str(out), "rounds": s["rounds"], "quantiles": s["quantiles"]}))
    return EXIT_OK


def _cmd_spectral(a) -> int:
    cfg = _read_config(a.config, {"multiplier": a.multiplier})
    model, _, K = build_model(cfg)
    rep = spectral_report(model, K, cfg.rounds.multiplier, cfg.rounds.measure_rounds)
    d = rep.to_dict()
    d.pop("diffusion_p")
    print(json.dumps(d))
    return EXIT_OK


def _cmd_smoothing(a) -> int:
    cfg = _read_config(a.config, {})
    model, _, K = build_model(cfg)
    K = a.K if a.K is not None else K
    res = check_smoothing(model, a.t, K, a.eps)
    print(json.dumps({"t": a.t, "K": K, "eps": a.eps, "passed": res.passed, "worst_disc": res.worst_disc}))
    return EXIT_OK if res.passed else EXIT_CHECK


def _cmd_goodness(a) -> int:
    cfg = _read_config(a.config, {})
    model, _, _ = build_model(cfg)
    tg, tl = a.tau_g, a.tau_l
    if tg is None or tl is None:
        g = model.graph
        if model.kind == "circuit":
            dg, dl = goodness_windows("circuit", g.n, model.period, schedule_lambda(model))
        else:
            dg, dl = goodness_windows(model.kind, g.n, g.max_degree, schedule_lambda(model), model.p_min())
        tg = tg or [dg]
        tl = tl or [dl]
    seeds = [cfg.model.seed + i for i in range(a.realizations)] if model.randomized else None
    rep = check_goodness(model, tg, tl, a.starts, seeds)
    out = rep.to_dict()
    out.update({"windows_global": rep.windows_global, "windows_local": rep.windows_local,
                "pass_global": rep.pass_global, "pass_local": rep.pass_local})
    print(json.dumps(out))
    return EXIT_OK


def _cmd_verify(a) -> int:
    try:
        results = run_suites(a.suite)
    except KeyError as exc:
        raise ConfigError([str(exc.args[0])]) from None
    ok = True
    for r in results:
        ok &= r.passed
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} {json.dumps(r.detail, default=str)}")
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_sweep(a) -> int:
    p = Path(a.config)
    doc = json.loads(p.read_text())
    ov = {k: v for k, v in (("seed", a.seed), ("trials", a.trials)) if v is not None}
    try:
        res = run_sweep(doc, a.out, str(p.parent), ov)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([str(exc)]) from None
    print(json.dumps({"runs": len(res["runs"]), "out": a.out}))
    return EXIT_OK


COMMANDS = {
    "gen-graph": _cmd_gen_graph, "run": _cmd_run, "spectral": _cmd_spectral,
    "smoothing": _cmd_smoothing, "goodness": _cmd_goodness, "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    try:
        a = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[a.cmd](a)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GraphError, ScheduleError, SpectralError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
