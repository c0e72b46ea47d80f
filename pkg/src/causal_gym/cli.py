"""Command-line front end: train, evaluate, oracle, render-trace, aggregate."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import harness, oracle, training
from .harness import RunConfig, config_from_dict, load_config
from .tabular import Setting


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in ("seeds", "trace_trials"):
            parser.add_argument(flag, type=lambda s: [int(v) for v in s.split(",")])
        elif f.type in ("int", int):
            parser.add_argument(flag, type=int)
        elif f.type in ("float", float, "float | None"):
            parser.add_argument(flag, type=float)
        else:
            parser.add_argument(flag, type=str)


def _build_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        data.update(dataclasses.asdict(load_config(args.config)))
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    try:
        return config_from_dict(data)
    except (ValueError, TypeError) as exc:
        raise SystemExit(f"invalid configuration: {exc}")


def cmd_train(args: argparse.Namespace) -> None:
    config = _build_config(args)
    run_dir = Path(config.out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    harness.save_config(config, run_dir / "config.json")
    net_config = config.net_config()
    weights = config.loss_weights()

    for seed in config.seeds:
        seed_dir = run_dir / f"seed_{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)

        def env_factory(widx: int):
            env = config.make_env()
            if config.trace_trials and widx == 0:
                env = harness.TraceRecordingEnv(
                    env, config.trace_trials, seed_dir / "traces"
                )
            return env

        result = training.train(
            env_factory, net_config, weights,
            n_trials=config.trials, seed=seed, n_workers=config.workers,
            lr=config.lr, beta1=config.beta1, beta2=config.beta2,
            eps=config.adam_eps, clip_norm=config.clip_norm,
        )
        harness.write_curve_csv(seed_dir / "curve.csv", result.curve)
        harness.save_checkpoint(result.params, seed_dir / "checkpoint.bin")
        rewards = [r for _, r in result.curve]
        tail = np.mean(rewards[-min(len(rewards), 1000):])
        print(f"seed {seed}: {len(rewards)} trials, trailing-1000 mean {tail:.4f}")


def cmd_evaluate(args: argparse.Namespace) -> None:
    config = _build_config(args)
    params = harness.load_checkpoint(args.checkpoint)
    rng = np.random.default_rng(args.eval_seed)
    mean, se = training.evaluate(
        lambda _w: config.make_env(), params, config.net_config(),
        n_trials=args.n_trials, rng=rng, mode=args.mode,
    )
    print(f"mean_reward,{mean:.6f}\nse,{se:.6f}")


def cmd_oracle(args: argparse.Namespace) -> None:
    chosen = args.setting
    if chosen is None and not args.config:
        args.setting = "confounded"  # placeholder so the config validates
    config = _build_config(args)
    params = config.tabular_params()
    settings = (
        [Setting(chosen)]
        if chosen
        else [Setting.CONFOUNDED, Setting.OBSERVATIONAL, Setting.OFFPOLICY, Setting.ONPOLICY]
    )
    print("setting,accuracy,se")
    for setting in settings:
        rng = np.random.default_rng(args.eval_seed)
        acc, se = oracle.bayes_accuracy(params, setting, args.n_trials, rng)
        print(f"{setting.value},{acc:.6f},{se:.6f}")


def cmd_render_trace(args: argparse.Namespace) -> None:
    written = harness.render_trace(args.run_dir, args.trial, args.out)
    for p in written:
        print(p)


def cmd_aggregate(args: argparse.Namespace) -> None:
    paths = [Path(p) for p in args.curves]
    if len(paths) == 1 and paths[0].is_dir():
        paths = sorted(paths[0].glob("seed_*/curve.csv"))
    if not paths:
        raise SystemExit("no curve files found")
    curves = []
    for p in paths:
        trials, _, smooth = harness.read_curve_csv(p)
        curves.append((trials, smooth))
    rows = harness.aggregate_curves(curves)
    harness.write_aggregate_csv(args.out, rows)
    if args.svg:
        harness.write_curve_svg(args.svg, rows, title=args.title)
    print(f"aggregated {len(curves)} runs -> {args.out}")


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="causal-gym",
        description="Meta-RL causal learning workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run training and write curves")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="evaluate a checkpoint")
    _add_config_flags(p_eval)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--n-trials", type=int, default=1000)
    p_eval.add_argument("--mode", choices=("sample", "argmax"), default="sample")
    p_eval.add_argument("--eval-seed", type=int, default=0)
    p_eval.set_defaults(func=cmd_evaluate)

    p_oracle = sub.add_parser("oracle", help="print exact-Bayes accuracy ceilings")
    _add_config_flags(p_oracle)
    p_oracle.add_argument("--n-trials", type=int, default=10000)
    p_oracle.add_argument("--eval-seed", type=int, default=0)
    p_oracle.set_defaults(func=cmd_oracle)

    p_trace = sub.add_parser("render-trace", help="expand a recorded trial to PPM frames")
    p_trace.add_argument("run_dir")
    p_trace.add_argument("trial", type=int)
    p_trace.add_argument("--out")
    p_trace.set_defaults(func=cmd_render_trace)

    p_agg = sub.add_parser("aggregate", help="combine run curves into mean +/- SE")
    p_agg.add_argument("curves", nargs="+", help="curve CSVs or a run directory")
    p_agg.add_argument("--out", required=True)
    p_agg.add_argument("--svg")
    p_agg.add_argument("--title", default="")
    p_agg.set_defaults(func=cmd_aggregate)

    args = parser.parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main(sys.argv[1:])
