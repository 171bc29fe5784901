"""Partnership game: hand-evaluated payoffs, regrets, and the regret model."""

import numpy as np
import pytest

from gmmcombine.experiment import default_fixture_path
from gmmcombine.game import (
    CompanyParams,
    GameInstance,
    Temperatures,
    build_game_instance,
    build_regret_gmm,
    flexibility,
    instance_from_fixture,
    load_game_fixture,
    pair_weight,
    payoff,
    regret,
    regret_tables,
    save_game_fixture,
    top_size_subgame,
)
from gmmcombine.model import InteractionGraph, enumerate_configs, joint_probability


def _pair_instance(z=(2.0, 3.0), sectors=("commerce", "content"), y_pair=1.0, y_flex=(0.0, 0.0), ch=(0.5, 0.5)):
    graph = InteractionGraph(2, [(0, 1)])
    companies = [
        CompanyParams(0, z[0], sectors[0], ch[0]),
        CompanyParams(1, z[1], sectors[1], ch[1]),
    ]
    return GameInstance(graph, companies, {(0, 1): y_pair}, np.array(y_flex))


def test_company_validation_lists_fields():
    with pytest.raises(ValueError, match="size"):
        CompanyParams(0, 1000.0, "commerce", 0.5)
    with pytest.raises(ValueError, match="sector"):
        CompanyParams(0, 10.0, "finance", 0.5)
    with pytest.raises(ValueError, match="change_coeff"):
        CompanyParams(0, 10.0, "commerce", 1.5)


def test_build_instance_deterministic(default_fixture):
    graph, companies, _ = default_fixture
    a = build_game_instance(graph, companies, 123)
    b = build_game_instance(graph, companies, 123)
    assert a.pair_coeffs == b.pair_coeffs
    assert a.flex_coeffs == pytest.approx(b.flex_coeffs)
    assert all(0.0 <= y <= 1.0 for y in a.pair_coeffs.values())
    assert np.all((a.flex_coeffs >= 0) & (a.flex_coeffs <= 1))


def test_edgeless_graph_zero_payoffs():
    graph = InteractionGraph(2, [])
    companies = [CompanyParams(0, 5, "commerce", 0.3), CompanyParams(1, 7, "content", 0.9)]
    inst = build_game_instance(graph, companies, 1)
    assert inst.pair_coeffs == {}
    for s in (1, 2):
        assert payoff(inst, 0, {0: s}) == 0.0
        assert regret(inst, 0, {0: s}) == 0.0


def test_pair_weight_hand_values():
    inst = _pair_instance()
    # disagreement: exponent zero
    assert pair_weight(inst, 0, 1, 1, 2) == pytest.approx(5.0)
    # same sector, y = 0: unit factor
    same = _pair_instance(sectors=("commerce", "commerce"), y_pair=0.0)
    assert pair_weight(same, 0, 1, 2, 2) == pytest.approx(5.0)
    # different sectors, agreement, y = 1: divisor 5
    assert pair_weight(inst, 0, 1, 2, 2) == pytest.approx(5.0 * (1 + 1 / 5))
    # same sector divisor is 3: strictly larger weight
    same_y = _pair_instance(sectors=("content", "content"), y_pair=1.0)
    assert pair_weight(same_y, 0, 1, 2, 2) == pytest.approx(5.0 * (1 + 1 / 3))
    assert pair_weight(same_y, 0, 1, 2, 2) > pair_weight(inst, 0, 1, 2, 2)
    with pytest.raises(ValueError):
        pair_weight(inst, 0, 0, 1, 1)


def test_flexibility_piecewise():
    assert flexibility(0.9, 2) == pytest.approx(0.1)
    assert flexibility(0.5, 2) == pytest.approx(0.0)
    assert flexibility(0.0, 1) == pytest.approx(0.0)
    assert flexibility(0.2, 1) == pytest.approx(0.3)
    assert flexibility(0.75, 2) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        flexibility(1.2, 1)
    with pytest.raises(ValueError):
        flexibility(0.5, 3)


def test_payoff_composition():
    inst = _pair_instance()
    # y_flex = 0: payoff equals the pair weight
    assert payoff(inst, 0, {0: 2, 1: 2}) == pytest.approx(6.0)
    boosted = _pair_instance(y_flex=(1.0, 0.0), ch=(0.9, 0.5))
    assert payoff(boosted, 0, {0: 2, 1: 2}) == pytest.approx((1 + 0.1) * 6.0)
    with pytest.raises(ValueError):
        payoff(inst, 0, {0: 1})


def test_regret_brute_force_two_agents():
    inst = _pair_instance(y_flex=(0.7, 0.3), ch=(0.8, 0.2))
    for s0 in (1, 2):
        for s1 in (1, 2):
            cfg = {0: s0, 1: s1}
            current = payoff(inst, 0, cfg)
            best = max(payoff(inst, 0, {0: a, 1: s1}) for a in (1, 2))
            assert regret(inst, 0, cfg) == pytest.approx(best - current)
            assert regret(inst, 0, cfg) >= 0.0


def test_best_response_existence(default_instance):
    tables = regret_tables(default_instance)
    for i in range(default_instance.n):
        members = default_instance.graph.neighborhood(i)
        axis = members.index(i)
        assert np.all(tables[i].min(axis=axis) == pytest.approx(0.0))
        assert np.all(tables[i] >= 0.0)


def test_payoff_determinism(default_instance):
    members = default_instance.graph.neighborhood(0)
    cfg = {m: 1 + (m % 2) for m in members}
    assert payoff(default_instance, 0, cfg) == payoff(default_instance, 0, cfg)


def test_regret_gmm_forms(small_instance):
    uniform = build_regret_gmm(
        small_instance, Temperatures.from_temps(np.full(4, 1e9))
    )
    for profile in enumerate_configs((2, 2, 2, 2)):
        assert joint_probability(uniform, profile) == pytest.approx(2.0**-4, abs=1e-6)
    with pytest.raises(ValueError):
        Temperatures(np.array([1.0, -1.0, 1.0, 1.0]))


def test_single_entry_regret_potential():
    from gmmcombine.model import Gmm

    graph = InteractionGraph(1, [])
    model = Gmm.from_regrets(graph, [np.array([1.0, 0.0])], np.array([1.0]))
    assert model.potentials[0].table[0] == pytest.approx(np.exp(-1.0))


def test_monotone_likelihood_in_regret():
    # two isolated agents: potentials depend only on own action
    graph = InteractionGraph(2, [])
    regrets = [np.array([0.0, 2.0]), np.array([0.0, 0.0])]
    from gmmcombine.model import Gmm

    model = Gmm.from_regrets(graph, regrets, np.array([1.0, 1.0]))
    # profiles (1, x) and (2, x) differ only in agent 0's regret
    assert joint_probability(model, [1, 1]) > joint_probability(model, [2, 1])
    assert joint_probability(model, [1, 2]) > joint_probability(model, [2, 2])


def test_fixture_loading_and_round_trip(tmp_path, default_fixture):
    graph, companies, seed = default_fixture
    assert graph.n == 10
    degrees = [len(graph.partners(i)) for i in range(10)]
    assert all(2 <= d <= 5 for d in degrees)
    inst = build_game_instance(graph, companies, seed)
    path = tmp_path / "game.json"
    save_game_fixture(inst, path)
    reloaded = instance_from_fixture(path)
    assert reloaded.pair_coeffs == inst.pair_coeffs
    assert reloaded.flex_coeffs == pytest.approx(inst.flex_coeffs)

    direct = instance_from_fixture(default_fixture_path())
    assert direct.graph == graph


def test_top_size_subgame(default_fixture):
    graph, companies, _ = default_fixture
    sub_graph, sub_companies = top_size_subgame(graph, companies, 4)
    assert sub_graph.n == 4
    assert [c.id for c in sub_companies] == [0, 1, 2, 3]
    sizes = [c.size for c in sub_companies]
    assert sizes == sorted(sizes, reverse=True)
    assert len(sub_graph.edges) >= 3


def test_subgame_regrets_not_constant(small_instance):
    # identifiability of the 4-agent fixture: every agent's regret varies
    for table in regret_tables(small_instance):
        assert np.ptp(table) > 1e-6
