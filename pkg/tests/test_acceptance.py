"""Acceptance gate: every shipped guarantee at its stated tolerance.

Each criterion prints one PASS/FAIL line (run with ``pytest -s`` to see them
live). The full experiment protocol (criterion 5) runs once in a
module-scoped fixture and is shared by its sub-checks.
"""

import time

import numpy as np
import pytest

from gmmcombine.combine import FitConfig, fit_regret_gmm_ml, pool_weight_gradient, regret_loglik_gradient
from gmmcombine.experiment import (
    ExperimentConfig,
    cross_input_experiment,
    emit_results,
    run_baseline,
    summarize_ratios,
    sweep_availability,
    sweep_inaccuracy,
)
from gmmcombine.game import Temperatures, build_regret_gmm
from gmmcombine.heuristic import HeuristicSpec
from gmmcombine.combine import PooledModel
from gmmcombine.model import (
    expectation_of_statistic,
    joint_probability,
    log_partition,
    log_score,
    marginal,
    sample_profiles,
)
from gmmcombine.rl import RlConfig, heuristic_policy, run_rl

from conftest import (
    brute_force_expectation,
    brute_force_marginal,
    brute_force_probability,
    brute_force_weights,
    chain_model,
)
from test_combine import _fd_lambda_gradient, _random_regret_model, recovery_lambda


def _criterion(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}{(' — ' + detail) if detail else ''}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def protocol_results():
    """The full default protocol: baseline, rho, delta, and cross suites."""
    cfg = ExperimentConfig()
    t0 = time.perf_counter()
    results = {
        "baseline": summarize_ratios(run_baseline(cfg)),
        "rho": summarize_ratios(sweep_availability(cfg)),
        "delta": summarize_ratios(sweep_inaccuracy(cfg)),
        "cross": summarize_ratios(cross_input_experiment(cfg)),
    }
    results["elapsed"] = time.perf_counter() - t0
    results["cfg"] = cfg
    return results


def test_oracle_equivalence(small_instance):
    t0 = time.perf_counter()
    models = [chain_model(n, seed=s) for n in (2, 3, 4) for s in (None, 1, 2)]
    models.append(build_regret_gmm(small_instance, Temperatures(np.full(4, 0.01))))
    ok = True
    for model in models:
        profiles, weights = brute_force_weights(model)
        z = sum(weights)
        ok &= abs(log_partition(model) - np.log(z)) <= 1e-10 * abs(np.log(z)) + 1e-12
        for profile in (profiles[0], profiles[-1], profiles[len(profiles) // 2]):
            exact = brute_force_probability(model, profile)
            ok &= abs(joint_probability(model, profile) - exact) <= 1e-10 * exact
        for agent in range(model.n):
            bf = brute_force_marginal(model, agent)
            ok &= np.max(np.abs(marginal(model, agent) - bf)) <= 1e-10
            f = lambda cfg: sum(cfg.values())
            ex = brute_force_expectation(model, f, agent)
            ok &= abs(expectation_of_statistic(model, f, agent) - ex) <= 1e-10 * abs(ex)
    elapsed = time.perf_counter() - t0
    _criterion(
        "oracle-equivalence", ok and elapsed < 1.0, f"{len(models)} models, {elapsed:.2f}s"
    )


def test_gradient_correctness(small_instance):
    t0 = time.perf_counter()
    ok = True
    for seed in range(10):
        model = _random_regret_model(seed, n=2 + seed % 3)
        data = sample_profiles(model, 40, seed=seed + 500)
        grad = regret_loglik_gradient(model, data)
        fd = _fd_lambda_gradient(model, data)
        scale = np.maximum(np.abs(fd), 1e-8 / 1e-5)
        ok &= np.max(np.abs(grad - fd) / scale) < 1e-5

    g1 = build_regret_gmm(small_instance, Temperatures(np.full(4, 0.01)))
    g2 = g1.with_lambda(np.full(4, 0.002))
    data = sample_profiles(g1, 100, seed=3)
    h = 1e-6
    for w in (0.25, 0.5, 0.8):
        f_hi = log_score(PooledModel(g1, g2, w + h), data) / len(data)
        f_lo = log_score(PooledModel(g1, g2, w - h), data) / len(data)
        fd_w = (f_hi - f_lo) / (2 * h)
        grad_w = pool_weight_gradient(g1, g2, data, w)
        ok &= abs(grad_w - fd_w) <= 1e-5 * max(abs(fd_w), 1e-3)
    elapsed = time.perf_counter() - t0
    _criterion("gradient-correctness", ok and elapsed < 5.0, f"{elapsed:.2f}s")


def test_normalization_and_sampling(default_instance, small_instance):
    t0 = time.perf_counter()
    ok = True
    for n in range(1, 11):
        model = chain_model(n, seed=n)
        ok &= abs(np.exp(model.profile_log_probs()).sum() - 1.0) <= 1e-10
    big = build_regret_gmm(default_instance, Temperatures(np.full(10, 0.001)))
    ok &= abs(np.exp(big.profile_log_probs()).sum() - 1.0) <= 1e-10

    model = build_regret_gmm(small_instance, Temperatures(np.full(4, 0.005)))
    draws = sample_profiles(model, 100_000, seed=2024)
    counts = np.bincount(model.dataset_indices(draws), minlength=16)
    err = np.max(np.abs(counts / counts.sum() - np.exp(model.profile_log_probs())))
    ok &= err < 0.01
    elapsed = time.perf_counter() - t0
    _criterion(
        "normalization-and-sampling",
        ok and elapsed < 10.0,
        f"max sampling error {err:.4f}, {elapsed:.2f}s",
    )


def test_parameter_recovery(small_instance):
    t0 = time.perf_counter()
    true_lam = recovery_lambda(small_instance)
    truth = build_regret_gmm(small_instance, Temperatures(true_lam))
    data = sample_profiles(truth, 10_000, seed=42)
    fitted = fit_regret_gmm_ml(truth.with_lambda(0.5 * true_lam), data, FitConfig())
    rel = np.max(np.abs(fitted.lam - true_lam) / true_lam)
    elapsed = time.perf_counter() - t0
    _criterion(
        "parameter-recovery",
        rel < 0.15 and elapsed < 30.0,
        f"max relative error {rel:.3f}, {elapsed:.1f}s",
    )


def test_protocol_gains_over_baselines(protocol_results):
    m = protocol_results["baseline"]
    ratios = {
        (method, baseline): m[(method, baseline)]
        for method in ("direct", "pool", "mix")
        for baseline in ("regret", "heuristic")
    }
    ok = all(v > 1.0 for v in ratios.values())
    detail = ", ".join(f"{k[0]}/{k[1]}={v:.4f}" for k, v in sorted(ratios.items()))
    _criterion("protocol-(a)-combined-beats-baselines", ok, detail)


def test_protocol_method_ordering(protocol_results):
    m = protocol_results["baseline"]
    ok = True
    details = []
    for baseline in ("regret", "heuristic"):
        mix, direct, pool = (
            m[("mix", baseline)],
            m[("direct", baseline)],
            m[("pool", baseline)],
        )
        ok &= mix >= direct >= pool
        details.append(f"vs {baseline}: mix={mix:.4f} >= direct={direct:.4f} >= pool={pool:.4f}")
    _criterion("protocol-(b)-method-ordering", ok, "; ".join(details))


def test_protocol_rho_stability(protocol_results):
    m = protocol_results["rho"]
    ok = True
    details = []
    for baseline in ("regret", "heuristic"):
        r02 = m[(0.2, "mix", baseline)]
        r10 = m[(1.0, "mix", baseline)]
        r002 = m[(0.02, "mix", baseline)]
        ok &= abs(r02 - r10) <= 0.1 * r10
        ok &= r002 < r10
        details.append(f"vs {baseline}: R(0.2)={r02:.3f} R(1.0)={r10:.3f} R(0.02)={r002:.3f}")
    _criterion("protocol-(c)-rho-stability", ok, "; ".join(details))


def test_protocol_delta_monotonicity(protocol_results):
    m = protocol_results["delta"]
    ok = True
    details = []
    for method in ("direct", "pool", "mix"):
        seq = [m[(d, method, "regret")] for d in (0.0, 0.5, 1.0)]
        ok &= seq[0] <= seq[1] <= seq[2]
        details.append(f"{method}: {seq[0]:.3f} <= {seq[1]:.3f} <= {seq[2]:.3f}")
    _criterion("protocol-(d)-delta-monotonicity", ok, "; ".join(details))


def test_protocol_cross_input(protocol_results):
    m = protocol_results["cross"]
    ok = all(v > 1.0 for v in m.values())
    details = ", ".join(
        f"{key[1]} on {key[0]}: {v:.3f}" for key, v in sorted(m.items())
    )
    _criterion("protocol-(e)-cross-input", ok, details)


def test_protocol_runtime(protocol_results):
    elapsed = protocol_results["elapsed"]
    _criterion("protocol-runtime", elapsed < 600.0, f"{elapsed:.0f}s for all four suites")


def test_determinism(tmp_path):
    cfg = ExperimentConfig(
        trials=3,
        train_size=60,
        test_size=60,
        master_seed=77,
        rl=RlConfig(iterations=8, plays_per_iteration=12),
        fit=FitConfig(max_iterations=500),
    )
    a = emit_results(run_baseline(cfg), tmp_path / "a")
    b = emit_results(run_baseline(cfg), tmp_path / "b")
    ok = all(
        open(a[k], "rb").read() == open(b[k], "rb").read()
        for k in ("trials", "summary", "manifest")
    )
    _criterion("determinism", ok, "byte-identical trials/summary/manifest")


def test_rl_sanity(default_instance):
    spec = HeuristicSpec()
    frozen, _ = run_rl(
        default_instance, spec, RlConfig(gamma=0.0, iterations=10, plays_per_iteration=20, seed=1)
    )
    init = heuristic_policy(default_instance, spec)
    ok = all(np.array_equal(a, b) for a, b in zip(frozen.tables, init.tables))

    defaults, _ = run_rl(default_instance, spec, RlConfig(seed=2))
    for table in defaults.tables:
        ok &= bool(np.all(np.abs(table.sum(axis=1) - 1.0) <= 1e-9))
        ok &= bool(np.all((table >= 0.0) & (table <= 1.0)))
    _criterion("rl-sanity", ok, "gamma=0 freeze and row stochasticity")
