"""Independent per-agent reinforcement learning over partner configurations.

Each agent treats the joint actions of its partners as a state and learns a
stochastic policy over its own two actions. Agents never observe the state
before acting, so plays are drawn from the policy's state-averaged marginal
(states weighted uniformly). After a batch of plays, the mean-reward table
is updated and each visited state's policy row is blended toward the greedy
row. Runs start from the change-heuristic policy and execute a fixed number
of iterations for reproducibility.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .datasets import PlayDataset
from .game import payoff_tables
from .heuristic import change_probabilities

ROW_SUM_TOL = 1e-9


@dataclass
class RlConfig:
    gamma: float = 0.2
    iterations: int = 40
    plays_per_iteration: int = 50
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma={self.gamma} outside [0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.plays_per_iteration < 1:
            raise ValueError("plays_per_iteration must be >= 1")

    @classmethod
    def from_dict(cls, doc):
        known = {"gamma", "iterations", "plays_per_iteration", "seed"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"rl: unknown keys {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self):
        doc = {
            "gamma": self.gamma,
            "iterations": self.iterations,
            "plays_per_iteration": self.plays_per_iteration,
        }
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc


class Policy:
    """Per-agent conditional action distributions, one row per partner state.

    States index the joint actions of the agent's sorted partners (first
    partner most significant); rows hold (P[retain], P[upgrade]).
    """

    def __init__(self, graph, tables):
        tables = tuple(np.asarray(t, dtype=np.float64) for t in tables)
        if len(tables) != graph.n:
            raise ValueError("need one table per agent")
        for i, t in enumerate(tables):
            expected = (2 ** len(graph.partners(i)), 2)
            if t.shape != expected:
                raise ValueError(f"agent {i}: table shape {t.shape} != {expected}")
            if np.any(t < 0) or np.any(t > 1):
                raise ValueError(f"agent {i}: probabilities outside [0, 1]")
            if np.any(np.abs(t.sum(axis=1) - 1.0) > ROW_SUM_TOL):
                raise ValueError(f"agent {i}: rows do not sum to 1")
        self.graph = graph
        self.tables = tables

    def copy(self):
        return Policy(self.graph, tuple(t.copy() for t in self.tables))

    def save(self, path):
        doc = {
            "state_order": "sorted partner ids, first partner most significant",
            "agents": [
                {
                    "agent": i,
                    "partners": list(self.graph.partners(i)),
                    "rows": [[float(p) for p in row] for row in self.tables[i]],
                }
                for i in range(self.graph.n)
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path, graph):
        with open(path) as fh:
            doc = json.load(fh)
        tables = [None] * graph.n
        for entry in doc["agents"]:
            i = entry["agent"]
            if tuple(entry["partners"]) != graph.partners(i):
                raise ValueError(f"agent {i}: partner list does not match the graph")
            tables[i] = np.asarray(entry["rows"], dtype=np.float64)
        return cls(graph, tables)


@dataclass
class QTable:
    """Running mean reward and visit count per (state, action) cell."""

    means: tuple = field(default_factory=tuple)
    counts: tuple = field(default_factory=tuple)

    @classmethod
    def empty(cls, graph):
        means, counts = [], []
        for i in range(graph.n):
            states = 2 ** len(graph.partners(i))
            means.append(np.zeros((states, 2)))
            counts.append(np.zeros((states, 2), dtype=np.int64))
        return cls(tuple(means), tuple(counts))

    def credit(self, agent, state, action_digit, reward):
        c = self.counts[agent][state, action_digit] + 1
        self.counts[agent][state, action_digit] = c
        mean = self.means[agent][state, action_digit]
        self.means[agent][state, action_digit] = mean + (reward - mean) / c


def heuristic_policy(inst, spec):
    """Policy with every row set to the heuristic change probabilities."""
    probs = change_probabilities(inst, spec)
    tables = []
    for i in range(inst.n):
        states = 2 ** len(inst.graph.partners(i))
        tables.append(np.tile([1.0 - probs[i], probs[i]], (states, 1)))
    return Policy(inst.graph, tables)


def marginal_action_prob(policy, i):
    """State-averaged action distribution of agent i (states uniform)."""
    return policy.tables[i].mean(axis=0)


def _partner_state(graph, i, actions):
    """Index of the partner configuration realized in a joint play."""
    state = 0
    for j in graph.partners(i):
        state = state * 2 + (actions[j] - 1)
    return state


def _neighborhood_config_index(graph, i, actions):
    idx = 0
    for m in graph.neighborhood(i):
        idx = idx * 2 + (actions[m] - 1)
    return idx


def rl_iteration(inst, policy, q, cfg, rng, trace=None):
    """One improvement round: a batch of joint plays, then a policy blend.

    Every agent draws its action from its state-averaged marginal; realized
    payoffs are credited to the (action, partner state) cell; each state
    visited in this batch has its policy row moved toward the greedy row by
    gamma. Rows of unvisited states are left unchanged. Mutates and returns
    (policy, q).
    """
    graph = inst.graph
    n = inst.n
    pay = payoff_tables(inst)
    flat_pay = [t.reshape(-1) for t in pay]
    marginals = np.array([marginal_action_prob(policy, i) for i in range(n)])
    visited = [set() for _ in range(n)]

    for _ in range(cfg.plays_per_iteration):
        uniforms = rng.random(n)
        actions = np.where(uniforms < marginals[:, 1], 2, 1)
        for i in range(n):
            state = _partner_state(graph, i, actions)
            reward = flat_pay[i][_neighborhood_config_index(graph, i, actions)]
            q.credit(i, state, actions[i] - 1, reward)
            visited[i].add(state)
            if trace is not None:
                trace.append((i, state, int(actions[i] - 1), float(reward)))

    for i in range(n):
        table = policy.tables[i]
        for state in sorted(visited[i]):
            tried = np.nonzero(q.counts[i][state] > 0)[0]
            values = q.means[i][state, tried]
            best_value = values.max()
            candidates = tried[values == best_value]
            if len(candidates) > 1:
                row_probs = table[state, candidates]
                candidates = candidates[row_probs == row_probs.max()]
            best = int(candidates[0])
            greedy = np.zeros(2)
            greedy[best] = 1.0
            table[state] = table[state] * (1.0 - cfg.gamma) + greedy * cfg.gamma
    return policy, q


def run_rl(inst, spec, cfg, payoff_log=None):
    """Full learning run from the heuristic start; returns (Policy, QTable).

    Deterministic for a given cfg.seed. When ``payoff_log`` is a list, the
    mean realized payoff of each iteration is appended to it.
    """
    policy = heuristic_policy(inst, spec)
    q = QTable.empty(inst.graph)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.iterations):
        trace = [] if payoff_log is not None else None
        rl_iteration(inst, policy, q, cfg, rng, trace=trace)
        if payoff_log is not None:
            payoff_log.append(float(np.mean([r for (_, _, _, r) in trace])))
    return policy, q


def sample_sim_data(inst, policy, count, seed):
    """Joint plays from the converged policy's per-agent marginals.

    Agents do not observe partners before acting, so draws are independent
    across agents given the marginals. Deterministic for a given seed.
    """
    if count < 1:
        raise ValueError("sample count must be positive")
    upgrade = np.array(
        [marginal_action_prob(policy, i)[1] for i in range(inst.n)]
    )
    rng = np.random.default_rng(seed)
    uniforms = rng.random((count, inst.n))
    return PlayDataset(np.where(uniforms < upgrade[None, :], 2, 1))
