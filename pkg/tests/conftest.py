"""Shared fixtures: small hand-built models and an independent oracle.

The brute-force oracle enumerates profiles with itertools and evaluates
potentials entry by entry in plain Python floats, staying independent of the
vectorized inference path it is used to check.
"""

import itertools

import numpy as np
import pytest

from gmmcombine.experiment import default_fixture_path
from gmmcombine.game import build_game_instance, load_game_fixture, top_size_subgame
from gmmcombine.model import Gmm, InteractionGraph, LocalPotential


def brute_force_weights(model):
    """(profiles, weights): potential products for every profile, by direct loops."""
    profiles = list(
        itertools.product(*(range(1, k + 1) for k in model.action_counts))
    )
    weights = []
    for profile in profiles:
        w = 1.0
        for pot in model.potentials:
            w *= pot.value(np.asarray(profile))
        weights.append(w)
    return profiles, weights


def brute_force_probability(model, profile):
    profiles, weights = brute_force_weights(model)
    z = sum(weights)
    return weights[profiles.index(tuple(int(a) for a in profile))] / z


def brute_force_marginal(model, agent):
    profiles, weights = brute_force_weights(model)
    z = sum(weights)
    out = np.zeros(model.action_counts[agent])
    for profile, w in zip(profiles, weights):
        out[profile[agent] - 1] += w / z
    return out


def brute_force_expectation(model, f, agent):
    members = model.graph.neighborhood(agent)
    profiles, weights = brute_force_weights(model)
    z = sum(weights)
    total = 0.0
    for profile, w in zip(profiles, weights):
        total += (w / z) * f({m: profile[m] for m in members})
    return total


def chain_model(n=3, seed=None):
    """Binary chain with potentials over full neighborhoods.

    Uniform tables when seed is None, otherwise seeded positive random tables.
    """
    graph = InteractionGraph(n, [(i, i + 1) for i in range(n - 1)])
    rng = np.random.default_rng(seed) if seed is not None else None
    pots = []
    for i in range(n):
        members = graph.neighborhood(i)
        shape = (2,) * len(members)
        table = np.ones(shape) if rng is None else rng.uniform(0.2, 3.0, size=shape)
        pots.append(LocalPotential(i, members, table))
    return Gmm(graph, pots)


@pytest.fixture(scope="session")
def default_fixture():
    graph, companies, seed, _, _ = load_game_fixture(default_fixture_path())
    return graph, companies, seed


@pytest.fixture(scope="session")
def default_instance(default_fixture):
    graph, companies, seed = default_fixture
    return build_game_instance(graph, companies, seed)


@pytest.fixture(scope="session")
def small_instance(default_fixture):
    """Four largest companies of the default fixture, induced subgraph."""
    graph, companies, _ = default_fixture
    sub_graph, sub_companies = top_size_subgame(graph, companies, 4)
    return build_game_instance(sub_graph, sub_companies, 914)
