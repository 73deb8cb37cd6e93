"""Command line entry point: ``nalab {sweep,run,oracle,drift,evaluate}``.

Every option can also come from the environment as ``NALAB_<OPTION>``
(upper case, dashes become underscores), e.g. ``NALAB_TRIALS=20``.
Precedence: command line, then environment, then ``--config`` file.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from contextlib import ExitStack
from pathlib import Path

from .evolution import (
    ConfigError,
    RunConfig,
    SuccessMode,
    exhaustive_best,
    genotype_values,
    run,
)
from .fitness import FitnessEvaluator, fitness_values
from .harness import (
    DEFAULT_R_VALUES,
    EvalLog,
    HarnessError,
    SweepSpec,
    config_for,
    emit_table,
    estimate_drift,
    format_drift,
    read_trajectories,
    run_trials,
    summarize,
    trial_seed,
    write_trajectory,
)
from .mutation import Kind, MutationOperator
from .network import BiasMode, Genotype, GenotypeError, NetworkTopology, OutputMode
from .problems import PROBLEM_NAMES, ProblemError, custom_from_degrees, make_problem

ENV_PREFIX = "NALAB_"


def _r_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad r list {text!r}") from None


def _key_value(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key} needs a number") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).lower() in ("1", "true", "yes", "on")


def _add_model_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--problem", default="half",
                   help=f"one of {', '.join(PROBLEM_NAMES)}, or 'custom' with --config")
    g.add_argument("--neurons", type=int, default=1, help="hidden neurons N")
    g.add_argument("--output-mode", choices=[m.value for m in OutputMode], default="or")
    g.add_argument("--bias", choices=[m.value for m in BiasMode], default="variable")
    g.add_argument("--input-dim", type=int, default=None,
                   help="input dimension D (defaults to the problem's)")
    g.add_argument("--mutation", choices=[k.value for k in Kind], default="harmonic")
    g.add_argument("--mutation-param", type=_key_value, action="append", default=[],
                   metavar="KEY=VALUE", help="e.g. shape=1.5, scale=0.1, mean=0.2")
    g.add_argument("--selection", type=float, default=None,
                   help="per-component selection probability (default 1/(2N))")
    g.add_argument("--resample-void", type=_bool, nargs="?", const=True, default=False)
    g.add_argument("--cutoff-factor", type=float, default=100.0)
    g.add_argument("--stagnation-cutoff", type=int, default=None)
    g.add_argument("--max-steps", type=int, default=None)
    g.add_argument("--success", choices=[m.value for m in SuccessMode], default="auto")
    g.add_argument("--threshold", type=float, default=None,
                   help="fitness that counts as success")
    g.add_argument("--seed", type=int, default=0, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nalab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="JSON file with option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="seeded trials over a list of r values")
    _add_model_options(sp)
    sp.add_argument("--r-list", type=_r_list, default=list(DEFAULT_R_VALUES))
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--processes", type=int, default=1)
    sp.add_argument("--format", choices=["csv", "markdown"], default="csv")
    sp.add_argument("--out", default=None, help="table path (stdout if omitted)")
    sp.add_argument("--stats-include-timeouts", type=_bool, nargs="?", const=True, default=False)
    sp.add_argument("--dump-trajectories", default=None, metavar="PATH")
    sp.add_argument("--dump-eval-log", default=None, metavar="PATH")

    rp = sub.add_parser("run", help="one trial, printed as JSON")
    _add_model_options(rp)
    rp.add_argument("--r", type=int, default=120)
    rp.add_argument("--trial", type=int, default=0, help="trial index for seed derivation")
    rp.add_argument("--dump-trajectories", default=None, metavar="PATH")
    rp.add_argument("--dump-eval-log", default=None, metavar="PATH")

    op = sub.add_parser("oracle", help="exhaustive best fitness on a small grid")
    _add_model_options(op)
    op.add_argument("--r", type=int, default=24)
    op.add_argument("--show", type=int, default=10, help="argmax genotypes to list")

    dp = sub.add_parser("drift", help="empirical multiplicative drift")
    _add_model_options(dp)
    dp.add_argument("dumps", nargs="*", help="trajectory dumps; runs fresh trials if none")
    dp.add_argument("--r", type=int, default=120)
    dp.add_argument("--trials", type=int, default=100)
    dp.add_argument("--buckets", type=lambda s: [float(x) for x in s.split(",")], default=None,
                    help="comma-separated increasing edges for g = 1 - f")
    dp.add_argument("--out", default=None)

    ep = sub.add_parser("evaluate", help="fitness of one genotype")
    _add_model_options(ep)
    ep.add_argument("--r", type=int, default=120)
    ep.add_argument("genotype", nargs="+", help="components, e.g. 30 60")
    return parser


def _apply_defaults(parser: argparse.ArgumentParser, defaults: dict) -> None:
    for action in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        known = {a.dest for a in action._actions}
        action.set_defaults(**{k: v for k, v in defaults.items() if k in known})


def _env_defaults(parser: argparse.ArgumentParser) -> dict:
    out = {}
    for sub in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        for a in sub._actions:
            key = ENV_PREFIX + a.dest.upper()
            if a.dest in ("help", "dumps", "genotype") or key not in os.environ:
                continue
            raw = os.environ[key]
            value = raw
            if a.dest == "mutation_param":
                value = [_key_value(x) for x in raw.split(",") if x]
            elif a.type is not None:
                value = a.type(raw)
            out[a.dest] = value
    return out


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    out = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest == "r_list" and isinstance(value, str):
            value = _r_list(value)
        if dest == "mutation_param" and isinstance(value, dict):
            value = [(k, float(v)) for k, v in value.items()]
        out[dest] = value
    return out


def _problem(args):
    if args.problem == "custom":
        spec = getattr(args, "custom", None)
        if not spec or "arcs" not in spec:
            raise ConfigError("problem 'custom' needs a config entry custom.arcs")
        return custom_from_degrees(spec["arcs"], spec.get("min_length_degrees"),
                                   name=spec.get("name", "custom"))
    return make_problem(args.problem)


def _topology(args, problem) -> NetworkTopology:
    dim = args.input_dim or getattr(problem, "dim", 2)
    try:
        return NetworkTopology(args.neurons, OutputMode(args.output_mode),
                               BiasMode(args.bias), input_dim=dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _template(args, r: int = 120) -> RunConfig:
    problem = _problem(args)
    topo = _topology(args, problem)
    mutation = MutationOperator(Kind(args.mutation), dict(args.mutation_param),
                                selection=args.selection, resample_void=args.resample_void)
    return RunConfig(problem, topo, r, mutation, seed=args.seed, max_steps=args.max_steps,
                     stagnation_cutoff=args.stagnation_cutoff, cutoff_factor=args.cutoff_factor,
                     success_mode=SuccessMode(args.success), threshold=args.threshold)


def _describe(cfg: RunConfig) -> str:
    t = cfg.topology
    return (f"problem={cfg.problem.name} r={cfg.r} N={t.hidden_count} D={t.input_dim} "
            f"output={t.output_mode.value} bias={t.bias_mode.value} "
            f"mutation={cfg.mutation.kind.value}")


def cmd_sweep(args, out) -> int:
    template = _template(args)
    spec = SweepSpec(template, args.r_list, args.trials, args.seed,
                     args.stats_include_timeouts, args.processes)
    rows = []
    with ExitStack() as stack:
        traj = stack.enter_context(open(args.dump_trajectories, "w")) if args.dump_trajectories else None
        elog = stack.enter_context(open(args.dump_eval_log, "w")) if args.dump_eval_log else None
        for r in spec.r_values:
            if traj is None and elog is None:
                recs = run_trials(template, r, spec.trials, spec.master_seed, spec.processes)
            else:
                recs = []
                for i in range(spec.trials):
                    cfg = config_for(template, r, trial_seed(spec.master_seed, i))
                    log = None
                    if elog is not None:
                        log = EvalLog(elog)
                        log.header(f"trial {i} {_describe(cfg)}")
                    rec = run(cfg, record_trajectory=traj is not None, on_evaluate=log)
                    if traj is not None:
                        write_trajectory(traj, rec, f"trial {i} {_describe(cfg)}")
                    recs.append(rec)
            rows.append(summarize(recs, r, spec.include_timeouts))
    text = emit_table(rows, args.format, args.out)
    if args.out is None:
        out.write(text)
    return 0


def cmd_run(args, out) -> int:
    cfg = _template(args, args.r)
    cfg = config_for(cfg, cfg.r, trial_seed(args.seed, args.trial))
    with ExitStack() as stack:
        log = None
        if args.dump_eval_log:
            log = EvalLog(stack.enter_context(open(args.dump_eval_log, "w")))
            log.header(_describe(cfg))
        rec = run(cfg, record_trajectory=bool(args.dump_trajectories), on_evaluate=log)
        if args.dump_trajectories:
            with open(args.dump_trajectories, "w") as fh:
                write_trajectory(fh, rec, _describe(cfg))
    out.write(json.dumps(rec.as_dict()) + "\n")
    return 0


def cmd_oracle(args, out) -> int:
    cfg = _template(args, args.r)
    best, argmax = exhaustive_best(cfg.problem, cfg.topology, cfg.r)
    out.write(json.dumps({"r": cfg.r, "best_fitness": best, "argmax_count": len(argmax),
                          "argmax": [list(g) for g in argmax[: args.show]]}) + "\n")
    return 0


def cmd_drift(args, out) -> int:
    if args.dumps:
        traces = []
        for path in args.dumps:
            traces.extend(read_trajectories(Path(path).read_text()))
    else:
        cfg = _template(args, args.r)
        traces = [run(config_for(cfg, cfg.r, trial_seed(args.seed, i)), record_trajectory=True)
                  for i in range(args.trials)]
    text = format_drift(estimate_drift(traces, args.buckets))
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return 0


def cmd_evaluate(args, out) -> int:
    cfg = _template(args, args.r)
    if cfg.mutation.continuous:
        values = [float(x) for x in args.genotype]
        f = fitness_values(values, cfg.topology, cfg.problem)
    else:
        g = Genotype.from_line(" ".join(args.genotype)).validate(cfg.topology, cfg.r)
        f = FitnessEvaluator(cfg.problem, cfg.topology, cfg.r)(g.components)
        values = genotype_values(g.components, cfg.topology, cfg.r)
    out.write(json.dumps({"fitness": f, "values": values}) + "\n")
    return 0


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"nalab: warning: {message}", file=sys.stderr)


COMMANDS = {"sweep": cmd_sweep, "run": cmd_run, "oracle": cmd_oracle,
            "drift": cmd_drift, "evaluate": cmd_evaluate}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        defaults = _load_config(pre.config) if pre.config else {}
        defaults.update(_env_defaults(parser))
        _apply_defaults(parser, defaults)
        args = parser.parse_args(argv)
        if "custom" in defaults:
            args.custom = defaults["custom"]
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return COMMANDS[args.command](args, out)
    except (ConfigError, ProblemError, GenotypeError, HarnessError, OSError,
            argparse.ArgumentTypeError, ValueError) as exc:
        print(f"nalab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
