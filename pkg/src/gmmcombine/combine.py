"""Combining a regret-form model with observed play data.

Three methods produce a single predictive model from a model/data pair:

* direct update: refit the regret model's lambda by maximum likelihood on
  the data, starting from its current values;
* opinion pool: fit a second regret model to half the data, then take the
  weighted geometric mean of the two distributions, learning the weight on
  the held-out half;
* mixing data: sample plays from the model, mix them half/half with the
  observed plays, and fit a fresh regret model to the mixture.

The shared fitting engine is monotone gradient ascent on the mean
log-likelihood with backtracking (and step re-expansion), exact gradients by
enumeration, and a positivity floor on lambda. Predictive quality is
compared via the ratio of log scores.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Gmm, log_score, sample_profiles, subconfig_indices

STEP_GROWTH = 2.0
STEP_SHRINK = 0.5
MIN_STEP_FACTOR = 2.0**-60
MAX_STEP_FACTOR = 2.0**30


class FitError(RuntimeError):
    """Fit diverged; carries the accepted-iteration trace."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass
class FitConfig:
    learning_rate: float = 0.05
    gradient_tolerance: float = 1e-6
    max_iterations: int = 10_000
    lambda_floor: float = 1e-6

    def __post_init__(self):
        if (
            self.learning_rate <= 0
            or self.gradient_tolerance <= 0
            or self.lambda_floor <= 0
        ):
            raise ValueError("fit parameters must be strictly positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @classmethod
    def from_dict(cls, doc):
        known = {"learning_rate", "gradient_tolerance", "max_iterations", "lambda_floor"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"fit: unknown keys {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self):
        return {
            "learning_rate": self.learning_rate,
            "gradient_tolerance": self.gradient_tolerance,
            "max_iterations": self.max_iterations,
            "lambda_floor": self.lambda_floor,
        }


class _RegretObjective:
    """Mean log-likelihood of a dataset under a regret family, as f(lambda).

    Precomputes the per-agent regret statistics over all enumerated profiles
    and the data's mean regrets; each evaluation is then one moments call.
    """

    def __init__(self, model, data):
        if model.form != "regret":
            raise ValueError("gradient requires parametric form")
        if len(data) == 0:
            raise ValueError("fitting requires a non-empty dataset")
        n, P = model.n, model.num_profiles
        stats = np.empty((n, P), dtype=np.float64)
        for i in range(n):
            sub = subconfig_indices(model.action_counts, model.potentials[i].members)
            stats[i] = model.regrets[i].reshape(-1)[sub]
        self.stats = np.ascontiguousarray(stats)
        idx = model.dataset_indices(data)
        self.data_mean = self.stats[:, idx].mean(axis=1)
        self.size = len(data)

    def value_and_grad(self, lam):
        logz, mu = _kernels.log_linear_moments(
            self.stats, np.ascontiguousarray(-lam)
        )
        value = -float(lam @ self.data_mean) - logz
        return value, np.asarray(mu) - self.data_mean


def regret_loglik_gradient(model, data):
    """Total log-likelihood gradient in lambda, one entry per agent.

    Entry i is (sum over plays of -regret_i) plus |data| times the model's
    expected regret_i; zero exactly when the data's mean regret matches the
    model's expectation.
    """
    obj = _RegretObjective(model, data)
    _, mean_grad = obj.value_and_grad(model.lam)
    return mean_grad * obj.size


def _ascend(value_and_grad, x0, project, cfg, context):
    """Projected gradient ascent with a backtracking/expanding line search.

    Each iteration starts from the previously accepted step, halves it until
    the objective improves, then doubles it while the objective keeps
    improving, so the step recovers immediately after a badly scaled
    stretch. Only improving steps are accepted, making the objective trace
    non-decreasing. Stops when the projected gradient's sup-norm falls below
    the tolerance, no improving step exists, or the iteration cap is hit.
    Returns (x, trace).
    """
    x = project(np.asarray(x0, dtype=np.float64))
    f, g = value_and_grad(x)
    if math.isnan(f):
        raise FitError(f"{context}: objective is NaN at the initial point", [])
    step = cfg.learning_rate
    min_step = cfg.learning_rate * MIN_STEP_FACTOR
    max_step = cfg.learning_rate * MAX_STEP_FACTOR
    trace = [(0, f)]
    for it in range(1, cfg.max_iterations + 1):
        g_proj = _projected_gradient(x, g, project)
        if np.max(np.abs(g_proj)) < cfg.gradient_tolerance:
            break
        accepted = False
        while step >= min_step:
            candidate = project(x + step * g)
            f2, g2 = value_and_grad(candidate)
            if math.isnan(f2):
                raise FitError(f"{context}: objective became NaN", trace)
            if f2 >= f and not np.array_equal(candidate, x):
                accepted = True
                break
            step *= STEP_SHRINK
        if not accepted:
            break
        while step * STEP_GROWTH <= max_step:
            bigger = project(x + (step * STEP_GROWTH) * g)
            f3, g3 = value_and_grad(bigger)
            if math.isnan(f3) or f3 <= f2 or np.array_equal(bigger, x):
                break
            candidate, f2, g2 = bigger, f3, g3
            step *= STEP_GROWTH
        x, f, g = candidate, f2, g2
        trace.append((it, f))
    return x, trace


def _projected_gradient(x, g, project):
    """Zero out gradient components that point outside the feasible box."""
    eps = 1e-12
    blocked_low = (x <= project(x - eps) + eps / 2) & (g < 0)
    blocked_high = (x >= project(x + eps) - eps / 2) & (g > 0)
    out = g.copy()
    out[blocked_low | blocked_high] = 0.0
    return out


def fit_regret_gmm_ml(init, data, cfg):
    """Maximum-likelihood lambda for a regret-form model on a dataset.

    Gradient ascent on the mean log-likelihood from the initial lambda,
    keeping every entry at or above the positivity floor. The returned
    model's likelihood is never below the initial model's.
    """
    obj = _RegretObjective(init, data)

    def project(lam):
        return np.maximum(lam, cfg.lambda_floor)

    lam, _ = _ascend(obj.value_and_grad, init.lam, project, cfg, "regret fit")
    return init.with_lambda(lam)


def direct_update(g1, data, cfg):
    """Refit the model's lambda on the data, starting from its current values."""
    return fit_regret_gmm_ml(g1, data, cfg)


class PooledModel:
    """Weighted geometric mean of two distributions on the same outcome space.

    Probability proportional to Pr1(s)^w * Pr2(s)^(1-w); supports the same
    scoring operations as a plain model.
    """

    def __init__(self, g1, g2, weight):
        if g1.graph != g2.graph or g1.action_counts != g2.action_counts:
            raise ValueError("pooled models must share graph and action domains")
        if not 0.0 <= weight <= 1.0:
            raise ValueError(f"pool weight {weight} outside [0, 1]")
        self.g1 = g1
        self.g2 = g2
        self.weight = float(weight)
        self._log_probs = None

    @property
    def graph(self):
        return self.g1.graph

    @property
    def n(self):
        return self.g1.n

    @property
    def action_counts(self):
        return self.g1.action_counts

    def dataset_indices(self, data):
        return self.g1.dataset_indices(data)

    def profile_index(self, profile):
        return self.g1.profile_index(profile)

    def profile_log_probs(self):
        if self._log_probs is None:
            w = self.weight
            v = w * self.g1.profile_log_probs() + (1 - w) * self.g2.profile_log_probs()
            logz = float(_kernels.logsumexp(np.ascontiguousarray(v)))
            self._log_probs = v - logz
        return self._log_probs

    def to_gmm(self):
        """Equivalent single model with potentials pot1^w * pot2^(1-w)."""
        from .model import LocalPotential

        w = self.weight
        potentials = []
        for p1, p2 in zip(self.g1.potentials, self.g2.potentials):
            if p1.members != p2.members:
                raise ValueError("component potentials have mismatched scopes")
            potentials.append(
                LocalPotential(p1.owner, p1.members, p1.table**w * p2.table ** (1 - w))
            )
        return Gmm(self.graph, potentials, action_counts=self.action_counts)


def pool_probability(pool, profile):
    """Exact probability of one profile under the pooled distribution."""
    return float(np.exp(pool.profile_log_probs()[pool.profile_index(profile)]))


def pool_weight_gradient(g1, g2, data, w):
    """d/dw of the pool's mean held-out log-likelihood at weight w."""
    lp1 = g1.profile_log_probs()
    lp2 = g2.profile_log_probs()
    idx = g1.dataset_indices(data)
    diff_data = float(np.mean(lp1[idx] - lp2[idx]))
    stats = np.ascontiguousarray(np.vstack([lp1, lp2]))
    _, means = _kernels.log_linear_moments(
        stats, np.ascontiguousarray([w, 1.0 - w])
    )
    return diff_data - float(means[0] - means[1])


def learn_pool_weight(g1, g2, heldout, beta=0.05, cfg=None):
    """Pool weight maximizing held-out likelihood, by ascent from w = 0.5."""
    if len(heldout) == 0:
        raise ValueError("learning the pool weight requires held-out data")
    cfg = cfg or FitConfig()
    lp1 = g1.profile_log_probs()
    lp2 = g2.profile_log_probs()
    idx = g1.dataset_indices(heldout)
    mean1 = float(np.mean(lp1[idx]))
    mean2 = float(np.mean(lp2[idx]))
    stats = np.ascontiguousarray(np.vstack([lp1, lp2]))

    def value_and_grad(x):
        w = float(x[0])
        logz, means = _kernels.log_linear_moments(
            stats, np.ascontiguousarray([w, 1.0 - w])
        )
        value = w * mean1 + (1 - w) * mean2 - logz
        grad = (mean1 - mean2) - float(means[0] - means[1])
        return value, np.array([grad])

    step_cfg = FitConfig(
        learning_rate=beta,
        gradient_tolerance=cfg.gradient_tolerance,
        max_iterations=cfg.max_iterations,
        lambda_floor=cfg.lambda_floor,
    )
    w, _ = _ascend(
        value_and_grad,
        np.array([0.5]),
        lambda x: np.clip(x, 0.0, 1.0),
        step_cfg,
        "pool weight",
    )
    return float(w[0])


def opinion_pool(g1, data, fit_cfg, beta=0.05):
    """Pool of g1 with a regret model fit to half the data.

    The first (ceiling) half fits the second component from a unit-lambda
    start over g1's regret tables; the remaining half tunes the weight.
    """
    m = len(data)
    if m < 2:
        raise ValueError("dataset too small to split for the opinion pool")
    cut = (m + 1) // 2
    fit_half = data[:cut]
    heldout = data[cut:]
    init = g1.with_lambda(np.ones(g1.n))
    g2 = fit_regret_gmm_ml(init, fit_half, fit_cfg)
    w = learn_pool_weight(g1, g2, heldout, beta=beta, cfg=fit_cfg)
    return PooledModel(g1, g2, w)


def mixing_data(g1, data, fit_cfg, seed):
    """Fit a fresh regret model to a half/half mix of data and model samples.

    Draws |data| plays from g1, builds a mixture of ceil(|data|/2) observed
    plays and floor(|data|/2) sampled plays (each picked uniformly without
    replacement), and fits from a unit-lambda start.
    """
    m = len(data)
    if m < 2:
        raise ValueError("dataset too small to mix")
    rng = np.random.default_rng(seed)
    model_plays = sample_profiles(g1, m, rng)
    n_data = (m + 1) // 2
    n_model = m - n_data
    pick_data = rng.choice(m, size=n_data, replace=False)
    pick_model = rng.choice(m, size=n_model, replace=False)
    mixed = data[np.sort(pick_data)].concat(model_plays[np.sort(pick_model)])
    init = g1.with_lambda(np.ones(g1.n))
    return fit_regret_gmm_ml(init, mixed, fit_cfg)


def score_ratio(base, combined, test):
    """Ratio Score(base) / Score(combined) on a test set.

    Both scores are negative, so values above 1 mean the combined model
    assigns the test data higher likelihood than the base model.
    """
    score_base = log_score(base, test)
    score_combined = log_score(combined, test)
    if score_base == 0.0 or score_combined == 0.0:
        raise ValueError("score ratio undefined for a zero log score")
    return score_base / score_combined
