"""Neighborhood-factored joint distributions over agent actions.

A model assigns each agent a strictly positive potential over the action
configuration of its neighborhood (the agent plus its graph neighbors); the
joint probability of a full action profile is the normalized product of the
per-agent potentials. Everything here uses exact enumeration of the outcome
space, capped at 20 agents, with log-space accumulation for stability.

Conventions used throughout the package:

* Actions are 1-based integers (the shipped domain is binary: 1 = retain,
  2 = upgrade), though any per-agent action count >= 2 is supported.
* A strategy profile is a length-n integer vector of actions.
* Enumerated outcomes are indexed in ``itertools.product`` order over agents
  0..n-1, i.e. agent 0 is the most significant digit.
* A neighborhood configuration is indexed the same way over the sorted
  member list of the neighborhood.
"""

import itertools
import threading

import numpy as np

from . import _kernels

MAX_EXACT_AGENTS = 20

PROB_FLOOR = 1e-300


class ModelTooLargeError(ValueError):
    """Raised when an operation would enumerate more than 2**20-scale outcomes."""


class InteractionGraph:
    """Undirected interaction graph over agents 0..n-1.

    Edges are unordered pairs without self-loops or duplicates. The
    neighborhood of agent i always includes i itself.
    """

    def __init__(self, n, edges):
        if n < 1:
            raise ValueError("agent count must be positive")
        seen = set()
        normalized = []
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on agent {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references agents outside [0, {n})")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
            normalized.append(pair)
        self.n = int(n)
        self.edges = tuple(sorted(normalized))
        adj = [set() for _ in range(n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        self._partners = tuple(tuple(sorted(s)) for s in adj)

    def partners(self, i):
        """Sorted neighbors of agent i, excluding i."""
        return self._partners[i]

    def neighborhood(self, i):
        """Sorted neighbors of agent i, including i."""
        return tuple(sorted(self._partners[i] + (i,)))

    def has_edge(self, i, j):
        return (min(i, j), max(i, j)) in set(self.edges)

    def __eq__(self, other):
        return (
            isinstance(other, InteractionGraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"InteractionGraph(n={self.n}, edges={list(self.edges)})"


def config_index(actions, counts):
    """Index of a 1-based action tuple in product-order enumeration."""
    idx = 0
    for a, k in zip(actions, counts):
        if not 1 <= a <= k:
            raise ValueError(f"action {a} outside domain 1..{k}")
        idx = idx * k + (a - 1)
    return idx


def enumerate_configs(counts):
    """All 1-based action tuples for the given per-position counts, in index order."""
    return itertools.product(*(range(1, k + 1) for k in counts))


def subconfig_indices(counts, members):
    """Map every full-profile index to the index of its restriction to ``members``.

    Returns an int64 array of length prod(counts); entry p is the
    configuration index (over the members' own domains, in member order) of
    profile p restricted to the members.
    """
    counts = tuple(int(k) for k in counts)
    total = int(np.prod(counts))
    if total > 2**MAX_EXACT_AGENTS:
        raise ModelTooLargeError("model too large for exact inference")
    idx = np.arange(total, dtype=np.int64)
    # stride of agent j in the full index:
    strides = np.ones(len(counts), dtype=np.int64)
    for j in range(len(counts) - 2, -1, -1):
        strides[j] = strides[j + 1] * counts[j + 1]
    out = np.zeros(total, dtype=np.int64)
    for m in members:
        digit = (idx // strides[m]) % counts[m]
        out = out * counts[m] + digit
    return out


class LocalPotential:
    """Strictly positive potential of one agent over its neighborhood configs.

    ``table`` has one axis per neighborhood member (sorted ascending, owner
    included), with axis length equal to that member's action count.
    """

    def __init__(self, owner, members, table):
        members = tuple(members)
        if owner not in members:
            raise ValueError(f"owner {owner} not in members {members}")
        if tuple(sorted(members)) != members:
            raise ValueError("members must be sorted ascending")
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != len(members):
            raise ValueError(
                f"table rank {table.ndim} does not cover the {len(members)} members"
            )
        if not np.all(np.isfinite(table)) or np.any(table <= 0.0):
            raise ValueError(f"potential of agent {owner} must be strictly positive")
        self.owner = int(owner)
        self.members = members
        self.table = table

    def value(self, profile):
        """Potential value at the neighborhood restriction of a full profile."""
        profile = np.asarray(profile)
        return float(self.table[tuple(int(profile[m]) - 1 for m in self.members)])


class Gmm:
    """Joint action distribution factored over graph neighborhoods.

    ``form`` is either "table" (potentials given directly) or "regret"
    (potentials exp(-lambda_i * regret_i) derived from stored per-agent
    regret tables; ``with_lambda`` re-parameterizes without recomputing the
    regrets). Instances are immutable; the enumerated outcome table is
    computed lazily once and cached.
    """

    def __init__(self, graph, potentials, action_counts=None, regrets=None, lam=None):
        self.graph = graph
        n = graph.n
        if action_counts is None:
            action_counts = (2,) * n
        self.action_counts = tuple(int(k) for k in action_counts)
        if len(self.action_counts) != n or any(k < 2 for k in self.action_counts):
            raise ValueError("need one action count >= 2 per agent")
        if n > MAX_EXACT_AGENTS:
            raise ModelTooLargeError("model too large for exact inference")
        potentials = tuple(potentials)
        if len(potentials) != n:
            raise ValueError("need exactly one potential per agent")
        for i, pot in enumerate(potentials):
            if pot.owner != i:
                raise ValueError(f"potential {i} owned by agent {pot.owner}")
            expected = tuple(self.action_counts[m] for m in pot.members)
            if pot.table.shape != expected:
                raise ValueError(
                    f"agent {i} table shape {pot.table.shape} != domain {expected}"
                )
        self.potentials = potentials
        if regrets is not None:
            self.form = "regret"
            self.regrets = tuple(np.asarray(r, dtype=np.float64) for r in regrets)
            self.lam = np.asarray(lam, dtype=np.float64)
            if self.lam.shape != (n,) or np.any(self.lam <= 0.0):
                raise ValueError("lambda must be strictly positive, one per agent")
        else:
            self.form = "table"
            self.regrets = None
            self.lam = None
        self._cache = None
        self._lock = threading.Lock()

    @classmethod
    def from_regrets(cls, graph, regret_tables, lam, action_counts=None):
        """Regret-form model: potential_i = exp(-lambda_i * regret_i)."""
        lam = np.asarray(lam, dtype=np.float64)
        if lam.shape != (graph.n,):
            raise ValueError("need one lambda per agent")
        if np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
            raise ValueError("lambda must be strictly positive and finite")
        potentials = []
        for i, table in enumerate(regret_tables):
            table = np.asarray(table, dtype=np.float64)
            if np.any(table < 0.0):
                raise ValueError(f"regret table of agent {i} has negative entries")
            members = graph.neighborhood(i)
            # The stored linear table is clamped away from zero; inference
            # never uses it for regret models (log potentials come straight
            # from -lambda * regret), so the clamp only protects exports.
            linear = np.maximum(np.exp(-lam[i] * table), PROB_FLOOR)
            potentials.append(LocalPotential(i, members, linear))
        return cls(
            graph,
            potentials,
            action_counts=action_counts,
            regrets=regret_tables,
            lam=lam,
        )

    def with_lambda(self, lam):
        """Clone of a regret-form model at a different lambda vector."""
        if self.form != "regret":
            raise ValueError("with_lambda requires a regret-form model")
        return Gmm.from_regrets(
            self.graph, self.regrets, lam, action_counts=self.action_counts
        )

    @property
    def n(self):
        return self.graph.n

    @property
    def num_profiles(self):
        return int(np.prod(self.action_counts))

    def log_potential_matrix(self):
        """Per-agent log potentials over all enumerated profiles, shape (n, P)."""
        P = self.num_profiles
        out = np.empty((self.n, P), dtype=np.float64)
        for i, pot in enumerate(self.potentials):
            if self.form == "regret":
                flat = -self.lam[i] * self.regrets[i].reshape(-1)
            else:
                flat = np.log(pot.table.reshape(-1))
            out[i] = flat[subconfig_indices(self.action_counts, pot.members)]
        return out

    def _table(self):
        cache = self._cache
        if cache is None:
            with self._lock:
                cache = self._cache
                if cache is None:
                    logpots = np.ascontiguousarray(self.log_potential_matrix())
                    logw = np.asarray(_kernels.sum_rows(logpots))
                    logz = float(_kernels.logsumexp(np.ascontiguousarray(logw)))
                    probs = np.exp(logw - logz)
                    cache = {"logw": logw, "logz": logz, "probs": probs}
                    self._cache = cache
        return cache

    def profile_index(self, profile):
        profile = np.asarray(profile)
        if profile.shape != (self.n,):
            raise ValueError(f"profile length {profile.shape} != {self.n} agents")
        return config_index(tuple(int(a) for a in profile), self.action_counts)

    def dataset_indices(self, data):
        """Profile indices for every row of a dataset, shape (m,)."""
        acts = data.actions
        if acts.shape[1] != self.n:
            raise ValueError("dataset agent count does not match model")
        counts = np.asarray(self.action_counts, dtype=np.int64)
        if np.any(acts < 1) or np.any(acts > counts[None, :]):
            raise ValueError("dataset contains actions outside the model domain")
        idx = np.zeros(acts.shape[0], dtype=np.int64)
        for j in range(self.n):
            idx = idx * counts[j] + (acts[:, j] - 1)
        return idx

    def profile_log_probs(self):
        """Log probability of every enumerated profile, shape (P,)."""
        table = self._table()
        return table["logw"] - table["logz"]


def joint_probability(model, profile):
    """Exact probability of one strategy profile under the model."""
    table = model._table()
    return float(table["probs"][model.profile_index(profile)])


def log_partition(model):
    """Log of the sum over all profiles of the potential product."""
    return model._table()["logz"]


def log_score(model, data):
    """Sum of log model probabilities of the observed profiles (<= 0).

    Probabilities are floored at 1e-300 before the log, so the score is
    always finite.
    """
    if len(data) == 0:
        raise ValueError("log_score requires a non-empty dataset")
    lp = model.profile_log_probs()[model.dataset_indices(data)]
    return float(np.sum(np.maximum(lp, np.log(PROB_FLOOR))))


def sample_profiles(model, count, seed):
    """Draw i.i.d. profiles from the exact joint distribution.

    Deterministic for a given seed; ``seed`` may be an int or a Generator.
    """
    from .datasets import PlayDataset

    if count < 1:
        raise ValueError("sample count must be positive")
    table = model._table()
    probs = table["probs"]
    rng = np.random.default_rng(seed)
    idx = rng.choice(probs.size, size=count, p=probs / probs.sum())
    return PlayDataset(_decode_indices(idx, model.action_counts))


def _decode_indices(idx, counts):
    """Profile-index array -> (m, n) matrix of 1-based actions."""
    idx = np.asarray(idx, dtype=np.int64)
    n = len(counts)
    out = np.empty((idx.size, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[:, j] = idx % counts[j] + 1
        idx = idx // counts[j]
    return out


def marginal(model, agent):
    """Exact marginal action distribution of one agent."""
    if not 0 <= agent < model.n:
        raise ValueError(f"agent {agent} outside [0, {model.n})")
    probs = model._table()["probs"].reshape(model.action_counts)
    axes = tuple(j for j in range(model.n) if j != agent)
    return probs.sum(axis=axes)

def neighborhood_marginal(model, agent):
    """Exact joint distribution of the sorted neighborhood of one agent.

    Flat array indexed by neighborhood configuration (member order).
    """
    members = model.graph.neighborhood(agent)
    sub = subconfig_indices(model.action_counts, members)
    size = int(np.prod([model.action_counts[m] for m in members]))
    return np.bincount(sub, weights=model._table()["probs"], minlength=size)


def expectation_of_statistic(model, f, agent):
    """Exact expectation of f(neighborhood configuration) for one agent.

    ``f`` receives a dict mapping each member of the agent's neighborhood
    (including the agent) to its 1-based action.
    """
    members = model.graph.neighborhood(agent)
    weights = neighborhood_marginal(model, agent)
    counts = tuple(model.action_counts[m] for m in members)
    total = 0.0
    for pos, config in enumerate(enumerate_configs(counts)):
        total += weights[pos] * float(f(dict(zip(members, config))))
    return total


def save_model(model, path, include_tables=True, extra=None):
    """Write a model as JSON: form tag, lambdas, and (optionally) tables.

    Regret-form models store their regret tables and lambda vector, which is
    enough to reconstruct them exactly; table-form models store the potential
    tables themselves.
    """
    import json

    doc = {
        "form": model.form,
        "n": model.n,
        "edges": [list(e) for e in model.graph.edges],
        "action_counts": list(model.action_counts),
    }
    if model.form == "regret":
        doc["lambda"] = [float(x) for x in model.lam]
        doc["regrets"] = [r.tolist() for r in model.regrets]
        if include_tables:
            doc["tables"] = [p.table.tolist() for p in model.potentials]
    else:
        doc["tables"] = [p.table.tolist() for p in model.potentials]
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    """Reconstruct a model written by ``save_model``."""
    import json

    with open(path) as fh:
        doc = json.load(fh)
    graph = InteractionGraph(doc["n"], [tuple(e) for e in doc["edges"]])
    counts = tuple(doc["action_counts"])
    if doc["form"] == "regret":
        regrets = [np.asarray(r, dtype=np.float64) for r in doc["regrets"]]
        return Gmm.from_regrets(
            graph, regrets, np.asarray(doc["lambda"]), action_counts=counts
        )
    potentials = [
        LocalPotential(i, graph.neighborhood(i), np.asarray(t, dtype=np.float64))
        for i, t in enumerate(doc["tables"])
    ]
    return Gmm(graph, potentials, action_counts=counts)
