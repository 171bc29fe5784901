"""Command-line interface.

Subcommands:

* ``simulate``   - build the game instance and write training plays (from
                   the change heuristic), test plays (from the learned
                   policies), the frozen game, and the policy file.
* ``fit``        - maximum-likelihood fit of a regret-form model to a
                   dataset, from a unit-lambda start.
* ``combine``    - run one combination method (direct | pool | mix) on the
                   trial's regret model and a dataset.
* ``evaluate``   - log score of a saved model on a dataset, optionally the
                   score ratio against a second model.
* ``experiment`` - run one experiment suite and emit CSVs.

All stochastic stages derive their streams from the config's master seed
(overridable with --seed) and a trial index of 0, so every command is
reproducible. Exit status is 0 on success; failures print a stage-tagged
message and exit nonzero.
"""

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .combine import direct_update, fit_regret_gmm_ml, mixing_data, opinion_pool, score_ratio
from .datasets import PlayDataset
from .experiment import (
    ExperimentConfig,
    SUITES,
    emit_results,
    load_config,
    run_suite,
)
from .game import (
    Temperatures,
    build_game_instance,
    build_regret_gmm,
    load_game_fixture,
    save_game_fixture,
)
from .heuristic import sample_heuristic
from .model import load_model, log_score, save_model
from .rl import run_rl, sample_sim_data
from .seeding import stage_seed


def _load_cfg(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, master_seed=args.seed)
    return cfg


def _trial0_instance(cfg):
    graph, companies, _, _, _ = load_game_fixture(cfg.fixture_path())
    return build_game_instance(
        graph, companies, stage_seed(cfg.master_seed, 0, "coeffs")
    )


def _trial0_regret_model(cfg, inst):
    rng = np.random.default_rng(stage_seed(cfg.master_seed, 0, "temps"))
    lo, hi = cfg.temperature_range
    temps = Temperatures.from_temps(rng.uniform(lo, hi, size=inst.n))
    return build_regret_gmm(inst, temps)


def _cmd_simulate(args):
    import os

    cfg = _load_cfg(args)
    os.makedirs(args.out, exist_ok=True)
    inst = _trial0_instance(cfg)
    train = sample_heuristic(
        inst, cfg.heuristic, cfg.train_size, stage_seed(cfg.master_seed, 0, "train")
    )
    rl_cfg = replace(cfg.rl, seed=stage_seed(cfg.master_seed, 0, "rl"))
    policy, _ = run_rl(inst, cfg.heuristic, rl_cfg)
    test = sample_sim_data(
        inst, policy, cfg.test_size, stage_seed(cfg.master_seed, 0, "test")
    )
    save_game_fixture(inst, os.path.join(args.out, "game.json"))
    train.save_csv(os.path.join(args.out, "train.csv"))
    test.save_csv(os.path.join(args.out, "test.csv"))
    policy.save(os.path.join(args.out, "policy.json"))
    print(f"simulate: wrote game.json, train.csv ({len(train)} plays), "
          f"test.csv ({len(test)} plays), policy.json to {args.out}")
    return 0


def _cmd_fit(args):
    import os

    cfg = _load_cfg(args)
    data = PlayDataset.load_csv(args.data)
    inst = _trial0_instance(cfg)
    base = _trial0_regret_model(cfg, inst)
    init = base.with_lambda(np.ones(inst.n))
    fitted = fit_regret_gmm_ml(init, data, cfg.fit)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "fitted_model.json")
    save_model(fitted, out_path)
    print(f"fit: lambda = {[round(float(x), 6) for x in fitted.lam]}")
    print(f"fit: training log score = {log_score(fitted, data)!r}")
    print(f"fit: wrote {out_path}")
    return 0


def _cmd_combine(args):
    import os

    cfg = _load_cfg(args)
    data = PlayDataset.load_csv(args.data)
    inst = _trial0_instance(cfg)
    base = _trial0_regret_model(cfg, inst)
    if args.method == "direct":
        model = direct_update(base, data, cfg.fit)
        extra = {"method": "direct"}
    elif args.method == "pool":
        pooled = opinion_pool(base, data, cfg.fit, cfg.pool_learning_rate)
        model = pooled.to_gmm()
        extra = {"method": "pool", "pool_weight": pooled.weight}
    else:
        model = mixing_data(
            base, data, cfg.fit, stage_seed(cfg.master_seed, 0, "mix")
        )
        extra = {"method": "mix"}
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"{args.method}_model.json")
    save_model(model, out_path, extra=extra)
    print(f"combine: method={args.method} training log score = {log_score(model, data)!r}")
    print(f"combine: wrote {out_path}")
    return 0


def _cmd_evaluate(args):
    model = load_model(args.model)
    data = PlayDataset.load_csv(args.data)
    score = log_score(model, data)
    print(f"evaluate: log score = {score!r} over {len(data)} plays")
    if args.base:
        base = load_model(args.base)
        r = score_ratio(base, model, data)
        print(f"evaluate: base log score = {log_score(base, data)!r}")
        print(f"evaluate: score ratio R = {r!r} (R > 1 favors --model)")
    return 0


def _cmd_experiment(args):
    cfg = _load_cfg(args)
    if args.suite:
        cfg = replace(cfg, suite=args.suite)
    result = run_suite(cfg)
    paths = emit_results(result, args.out)
    n_rows = sum(len(t.rows) for t in result.trials)
    print(f"experiment: suite={cfg.suite} trials={cfg.trials} rows={n_rows}")
    for kind, path in paths.items():
        print(f"experiment: wrote {kind}: {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gmmcombine",
        description="Graphical multiagent models: simulation, fitting, "
        "knowledge combination, and experiment suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="experiment config JSON", default=None)
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        if out:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="build the game and sample datasets")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="ML-fit a regret model to a dataset")
    common(p)
    p.add_argument("--data", required=True, help="training dataset CSV")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("combine", help="combine the regret model with data")
    common(p)
    p.add_argument("--method", required=True, choices=("direct", "pool", "mix"))
    p.add_argument("--data", required=True, help="training dataset CSV")
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("evaluate", help="log score of a saved model on data")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--base", default=None, help="baseline model JSON for the ratio")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="run an experiment suite")
    common(p)
    p.add_argument("--suite", choices=SUITES, default=None)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"gmmcombine {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
