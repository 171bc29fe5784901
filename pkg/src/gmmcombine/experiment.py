"""Experiment orchestration: trial protocol, suites, and CSV emission.

A trial builds a game instance with freshly drawn coefficients, a regret
model with uniformly drawn temperatures, training plays from the change
heuristic, a reinforcement-learning run standing in for actual behavior,
and test plays from the learned policies. The combination methods are then
scored on the test set against the regret and heuristic baselines via the
score ratio. Five suites rearrange this pipeline:

* ``baseline``   - the plain protocol above;
* ``simg``       - additionally fits a reference model to plays drawn from
                   the learning process itself and compares everything to it;
* ``rho``        - truncates the training data to a fraction rho;
* ``delta``      - degrades the regret model's lambda away from the fitted
                   reference by a factor (1 + delta);
* ``cross``      - runs a second pipeline from a constant-rate heuristic and
                   scores models across matched and mismatched test sets.

Every random stream derives from (master seed, trial, stage tag), so suites
are pure functions of their configuration, trial by trial.
"""

import importlib.resources
import json
import math
import platform
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .combine import FitConfig, direct_update, fit_regret_gmm_ml, mixing_data, opinion_pool
from .game import Temperatures, build_game_instance, build_regret_gmm, load_game_fixture
from .heuristic import HeuristicSpec, build_heuristic_gmm, sample_heuristic
from .model import log_score
from .rl import RlConfig, run_rl, sample_sim_data
from .seeding import stage_seed

SUITES = ("baseline", "simg", "rho", "delta", "cross")

DEFAULT_RHO = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
DEFAULT_DELTA = (0.0, 0.25, 0.5, 0.75, 1.0)

METHODS = ("direct", "pool", "mix")
BASELINES = ("regret", "heuristic")


def default_fixture_path():
    return str(importlib.resources.files("gmmcombine") / "fixtures" / "partnership10.json")


@dataclass
class ExperimentConfig:
    fixture: str = "default"
    trials: int = 20
    train_size: int = 500
    test_size: int = 500
    master_seed: int = 7
    suite: str = "baseline"
    heuristic: HeuristicSpec = field(default_factory=HeuristicSpec)
    temperature_range: tuple = (0.5, 2.0)
    pool_learning_rate: float = 0.05
    fit: FitConfig = field(default_factory=FitConfig)
    rl: RlConfig = field(default_factory=RlConfig)
    rho_list: tuple = DEFAULT_RHO
    delta_list: tuple = DEFAULT_DELTA

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.train_size < 1 or self.test_size < 1:
            raise ValueError("train_size and test_size must be >= 1")
        if self.suite not in SUITES:
            raise ValueError(f"suite must be one of {SUITES}, got {self.suite!r}")
        lo, hi = self.temperature_range
        if not 0 < lo <= hi:
            raise ValueError(f"temperature_range {self.temperature_range} invalid")
        if self.pool_learning_rate <= 0:
            raise ValueError("pool_learning_rate must be positive")
        self.rho_list = tuple(float(r) for r in self.rho_list)
        if any(not 0.0 < r <= 1.0 for r in self.rho_list):
            raise ValueError(f"rho values must lie in (0, 1], got {self.rho_list}")
        self.delta_list = tuple(float(d) for d in self.delta_list)
        if any(d < 0.0 for d in self.delta_list):
            raise ValueError(f"delta values must be >= 0, got {self.delta_list}")
        self.temperature_range = (float(lo), float(hi))

    def fixture_path(self):
        return default_fixture_path() if self.fixture == "default" else self.fixture

    def to_dict(self):
        return {
            "fixture": self.fixture,
            "trials": self.trials,
            "train_size": self.train_size,
            "test_size": self.test_size,
            "master_seed": self.master_seed,
            "suite": self.suite,
            "heuristic": self.heuristic.to_dict(),
            "temperature_range": list(self.temperature_range),
            "pool_learning_rate": self.pool_learning_rate,
            "fit": self.fit.to_dict(),
            "rl": self.rl.to_dict(),
            "rho_list": list(self.rho_list),
            "delta_list": list(self.delta_list),
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def config_from_dict(doc, where="config"):
    """Validated config with defaults applied; unknown keys are rejected."""
    known = {
        "fixture", "trials", "train_size", "test_size", "master_seed", "suite",
        "heuristic", "temperature_range", "pool_learning_rate", "fit", "rl",
        "rho_list", "delta_list",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = dict(doc)
    try:
        if "heuristic" in kwargs:
            kwargs["heuristic"] = HeuristicSpec.from_dict(kwargs["heuristic"])
        if "fit" in kwargs:
            kwargs["fit"] = FitConfig.from_dict(kwargs["fit"])
        if "rl" in kwargs:
            kwargs["rl"] = RlConfig.from_dict(kwargs["rl"])
        if "temperature_range" in kwargs:
            kwargs["temperature_range"] = tuple(kwargs["temperature_range"])
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: {exc}") from exc


def load_config(path):
    """Parse and validate an experiment config file."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(doc, where=str(path))


@dataclass
class TrialResult:
    trial: int
    seeds: dict
    scores: dict
    rows: list
    wall_time: float


@dataclass
class SuiteResult:
    suite: str
    config: ExperimentConfig
    trials: list
    key_columns: tuple
    failures: list = field(default_factory=list)

    def all_rows(self):
        for tr in sorted(self.trials, key=lambda t: t.trial):
            yield from tr.rows


class _TrialContext:
    """Everything one trial shares across suites, built from derived seeds."""

    def __init__(self, cfg, trial, graph, companies):
        ms = cfg.master_seed
        self.cfg = cfg
        self.trial = trial
        self.seeds = {
            stage: stage_seed(ms, trial, stage)
            for stage in ("coeffs", "temps", "train", "rl", "test", "mix")
        }
        self.inst = build_game_instance(graph, companies, self.seeds["coeffs"])
        lo, hi = cfg.temperature_range
        rng = np.random.default_rng(self.seeds["temps"])
        self.temps = Temperatures.from_temps(rng.uniform(lo, hi, size=graph.n))
        self.regret_model = build_regret_gmm(self.inst, self.temps)
        self.heuristic_model = build_heuristic_gmm(self.inst, cfg.heuristic)
        self.train = sample_heuristic(
            self.inst, cfg.heuristic, cfg.train_size, self.seeds["train"]
        )
        rl_cfg = replace(cfg.rl, seed=self.seeds["rl"])
        self.policy, _ = run_rl(self.inst, cfg.heuristic, rl_cfg)
        self.test = sample_sim_data(
            self.inst, self.policy, cfg.test_size, self.seeds["test"]
        )

    def stage_seed(self, stage):
        seed = stage_seed(self.cfg.master_seed, self.trial, stage)
        self.seeds[stage] = seed
        return seed


def _combine_all(regret_model, train, cfg, mix_seed):
    return {
        "direct": direct_update(regret_model, train, cfg.fit),
        "pool": opinion_pool(regret_model, train, cfg.fit, cfg.pool_learning_rate),
        "mix": mixing_data(regret_model, train, cfg.fit, mix_seed),
    }


def _ratio_row(scores, method, baseline, extra=None):
    row = dict(extra or {})
    row.update(
        method=method,
        baseline=baseline,
        score_base=scores[baseline],
        score_combined=scores[method],
        R=scores[baseline] / scores[method],
    )
    return row


def _load_fixture_for(cfg):
    graph, companies, _, _, _ = load_game_fixture(cfg.fixture_path())
    return graph, companies


def run_trial(cfg, trial_index, _fixture=None):
    """One trial of the plain protocol; deterministic in (config, trial)."""
    t0 = time.perf_counter()
    graph, companies = _fixture or _load_fixture_for(cfg)
    ctx = _TrialContext(cfg, trial_index, graph, companies)
    combined = _combine_all(ctx.regret_model, ctx.train, cfg, ctx.seeds["mix"])
    models = {
        "regret": ctx.regret_model,
        "heuristic": ctx.heuristic_model,
        **combined,
    }
    scores = {label: log_score(model, ctx.test) for label, model in models.items()}
    rows = [
        _ratio_row(scores, method, baseline, {"trial": trial_index})
        for method in METHODS
        for baseline in BASELINES
    ]
    return TrialResult(
        trial=trial_index,
        seeds=ctx.seeds,
        scores=scores,
        rows=rows,
        wall_time=time.perf_counter() - t0,
    )


def run_baseline(cfg):
    fixture = _load_fixture_for(cfg)
    trials = [run_trial(cfg, t, _fixture=fixture) for t in range(cfg.trials)]
    return SuiteResult("baseline", cfg, trials, ("trial", "method", "baseline"))


def _fit_sim_reference(ctx):
    """Regret model fitted to plays drawn from the learning process itself."""
    sim_train = sample_sim_data(
        ctx.inst, ctx.policy, ctx.cfg.train_size, ctx.stage_seed("simdata")
    )
    init = ctx.regret_model.with_lambda(np.ones(ctx.inst.n))
    return fit_regret_gmm_ml(init, sim_train, ctx.cfg.fit)


def run_simg_comparison(cfg):
    """Compare every model against the reference fitted to simulation plays.

    Rows carry R = Score(model) / Score(reference): near 1 means the model
    matches the reference's predictive performance, above 1 means it beats it.
    """
    fixture = _load_fixture_for(cfg)
    trials = []
    for t in range(cfg.trials):
        t0 = time.perf_counter()
        ctx = _TrialContext(cfg, t, *fixture)
        sim_fit = _fit_sim_reference(ctx)
        combined = _combine_all(ctx.regret_model, ctx.train, cfg, ctx.seeds["mix"])
        models = {
            "regret": ctx.regret_model,
            "heuristic": ctx.heuristic_model,
            **combined,
            "simfit": sim_fit,
        }
        scores = {label: log_score(model, ctx.test) for label, model in models.items()}
        rows = [
            _ratio_row(scores, "simfit", baseline, {"trial": t})
            for baseline in ("regret", "heuristic", "direct", "pool", "mix")
        ]
        trials.append(
            TrialResult(t, ctx.seeds, scores, rows, time.perf_counter() - t0)
        )
    return SuiteResult("simg", cfg, trials, ("trial", "method", "baseline"))


def sweep_availability(cfg, rho_list=None):
    """Rerun the combination step on truncated training data, per rho."""
    rho_list = cfg.rho_list if rho_list is None else tuple(rho_list)
    if any(not 0.0 < r <= 1.0 for r in rho_list):
        raise ValueError(f"rho values must lie in (0, 1], got {rho_list}")
    fixture = _load_fixture_for(cfg)
    trials = []
    failures = []
    for t in range(cfg.trials):
        t0 = time.perf_counter()
        ctx = _TrialContext(cfg, t, *fixture)
        base_scores = {
            "regret": log_score(ctx.regret_model, ctx.test),
            "heuristic": log_score(ctx.heuristic_model, ctx.test),
        }
        recorded = dict(base_scores)
        rows = []
        for rho in rho_list:
            keep = math.ceil(rho * len(ctx.train))
            if keep < 2:
                failures.append(
                    {"trial": t, "rho": rho, "reason": f"{keep} profiles after truncation"}
                )
                continue
            truncated = ctx.train[:keep]
            combined = _combine_all(ctx.regret_model, truncated, cfg, ctx.seeds["mix"])
            point = dict(base_scores)
            point.update(
                {label: log_score(model, ctx.test) for label, model in combined.items()}
            )
            for label in METHODS:
                recorded[f"{label}@rho={rho!r}"] = point[label]
            rows.extend(
                _ratio_row(point, method, baseline, {"trial": t, "rho": rho})
                for method in METHODS
                for baseline in BASELINES
            )
        trials.append(TrialResult(t, ctx.seeds, recorded, rows, time.perf_counter() - t0))
    return SuiteResult(
        "rho", cfg, trials, ("trial", "rho", "method", "baseline"), failures
    )


def sweep_inaccuracy(cfg, delta_list=None):
    """Degrade the regret model's lambda away from the fitted reference.

    For each delta the regret model is rebuilt with lambda set to
    (1 + delta) times the reference lambda, then combined and scored
    against both baselines.
    """
    delta_list = cfg.delta_list if delta_list is None else tuple(delta_list)
    if any(d < 0.0 for d in delta_list):
        raise ValueError(f"delta values must be >= 0, got {delta_list}")
    fixture = _load_fixture_for(cfg)
    trials = []
    for t in range(cfg.trials):
        t0 = time.perf_counter()
        ctx = _TrialContext(cfg, t, *fixture)
        sim_fit = _fit_sim_reference(ctx)
        heuristic_score = log_score(ctx.heuristic_model, ctx.test)
        recorded = {"heuristic": heuristic_score}
        rows = []
        for delta in delta_list:
            degraded = sim_fit.with_lambda((1.0 + delta) * sim_fit.lam)
            combined = _combine_all(degraded, ctx.train, cfg, ctx.seeds["mix"])
            point = {
                "regret": log_score(degraded, ctx.test),
                "heuristic": heuristic_score,
            }
            point.update(
                {label: log_score(model, ctx.test) for label, model in combined.items()}
            )
            for label in ("regret",) + METHODS:
                recorded[f"{label}@delta={delta!r}"] = point[label]
            rows.extend(
                _ratio_row(point, method, baseline, {"trial": t, "delta": delta})
                for method in METHODS
                for baseline in BASELINES
            )
        trials.append(TrialResult(t, ctx.seeds, recorded, rows, time.perf_counter() - t0))
    return SuiteResult("delta", cfg, trials, ("trial", "delta", "method", "baseline"))


ALT_HEURISTIC = HeuristicSpec(mode="constant", p=0.05)


def cross_input_experiment(cfg):
    """Score models built from two different input pipelines on both test sets.

    The main pipeline uses the configured heuristic; the alternate pipeline
    uses a constant 5% change rate. Each comparison row pits the
    matched-input model against the mismatched-input model on one test set,
    so R > 1 means matching the input to the test environment helped.
    """
    fixture = _load_fixture_for(cfg)
    trials = []
    for t in range(cfg.trials):
        t0 = time.perf_counter()
        ctx = _TrialContext(cfg, t, *fixture)
        alt_train = sample_heuristic(
            ctx.inst, ALT_HEURISTIC, cfg.train_size, ctx.stage_seed("train-alt")
        )
        alt_rl = replace(cfg.rl, seed=ctx.stage_seed("rl-alt"))
        alt_policy, _ = run_rl(ctx.inst, ALT_HEURISTIC, alt_rl)
        alt_test = sample_sim_data(
            ctx.inst, alt_policy, cfg.test_size, ctx.stage_seed("test-alt")
        )
        models = {"heuristic(main)": ctx.heuristic_model,
                  "heuristic(alt)": build_heuristic_gmm(ctx.inst, ALT_HEURISTIC)}
        for label, model in _combine_all(
            ctx.regret_model, ctx.train, cfg, ctx.seeds["mix"]
        ).items():
            models[f"{label}(main)"] = model
        for label, model in _combine_all(
            ctx.regret_model, alt_train, cfg, ctx.stage_seed("mix-alt")
        ).items():
            models[f"{label}(alt)"] = model
        scores = {}
        for label, model in models.items():
            scores[f"{label}|main"] = log_score(model, ctx.test)
            scores[f"{label}|alt"] = log_score(model, alt_test)
        rows = []
        for family in ("heuristic",) + METHODS:
            for test_set in ("main", "alt"):
                matched = f"{family}({test_set})"
                other = "alt" if test_set == "main" else "main"
                mismatched = f"{family}({other})"
                point = {
                    matched: scores[f"{matched}|{test_set}"],
                    mismatched: scores[f"{mismatched}|{test_set}"],
                }
                rows.append(
                    _ratio_row(
                        point, matched, mismatched, {"trial": t, "test_set": test_set}
                    )
                )
        trials.append(TrialResult(t, ctx.seeds, scores, rows, time.perf_counter() - t0))
    return SuiteResult(
        "cross", cfg, trials, ("trial", "test_set", "method", "baseline")
    )


def run_suite(cfg):
    """Dispatch on cfg.suite."""
    runner = {
        "baseline": run_baseline,
        "simg": run_simg_comparison,
        "rho": sweep_availability,
        "delta": sweep_inaccuracy,
        "cross": cross_input_experiment,
    }[cfg.suite]
    return runner(cfg)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(row.get(col, "")) for col in header) for row in rows)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_results(result, out_dir):
    """Write trials.csv, summary.csv, and manifest.json for a suite run.

    The summary aggregates over trials per remaining key columns; every R in
    trials.csv equals score_base / score_combined of the same row, and the
    whole emission is byte-stable for a fixed configuration.
    """
    import os

    rows = list(result.all_rows())
    if not rows:
        raise ValueError("no results to emit")
    os.makedirs(out_dir, exist_ok=True)
    value_columns = ("score_base", "score_combined", "R")
    header = list(result.key_columns) + list(value_columns)
    trials_path = os.path.join(out_dir, "trials.csv")
    _write_csv(trials_path, header, rows)

    group_cols = [c for c in result.key_columns if c != "trial"]
    groups = {}
    for row in rows:
        key = tuple(row[c] for c in group_cols)
        groups.setdefault(key, []).append(row)
    summary_rows = []
    for key in sorted(groups, key=lambda k: tuple(map(str, k))):
        bucket = groups[key]
        srow = dict(zip(group_cols, key))
        srow["trials"] = len(bucket)
        for col in value_columns:
            vals = np.array([b[col] for b in bucket], dtype=np.float64)
            srow[f"{col}_mean"] = float(vals.mean())
            srow[f"{col}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        summary_rows.append(srow)
    summary_header = group_cols + ["trials"] + [
        f"{col}_{stat}" for col in value_columns for stat in ("mean", "std")
    ]
    _write_csv(os.path.join(out_dir, "summary.csv"), summary_header, summary_rows)

    manifest = {
        "suite": result.suite,
        "config": result.config.to_dict(),
        "trial_seeds": {str(tr.trial): tr.seeds for tr in result.trials},
        "failures": result.failures,
        "versions": {
            "gmmcombine": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "kernel_backend": BACKEND,
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {
        "trials": trials_path,
        "summary": os.path.join(out_dir, "summary.csv"),
        "manifest": os.path.join(out_dir, "manifest.json"),
    }


def summarize_ratios(result):
    """Mean R per (non-trial key columns) as a dict; convenience for tests."""
    groups = {}
    for row in result.all_rows():
        key = tuple(row[c] for c in result.key_columns if c != "trial")
        groups.setdefault(key, []).append(row["R"])
    return {key: float(np.mean(vals)) for key, vals in groups.items()}
