"""The technology-partnership game: payoffs, regrets, and the regret model.

Each company decides whether to retain (1) or upgrade (2) its technology.
Pairwise partnership weights grow with combined company size and are boosted
when the pair agrees on an action, more strongly so for same-sector pairs;
a per-company flexibility term then scales the total. An agent's regret at a
neighborhood configuration is the payoff it forgoes by not playing its best
response, and the regret model turns those regrets into potentials
exp(-lambda_i * regret_i).
"""

import json
from dataclasses import dataclass

import numpy as np

from .model import Gmm, InteractionGraph, enumerate_configs

SECTORS = ("commerce", "infrastructure", "content")

RETAIN, UPGRADE = 1, 2


@dataclass(frozen=True)
class CompanyParams:
    """Static description of one company.

    ``size`` must stay below 1000 so the size-based change heuristic keeps a
    positive probability; ``change_coeff`` measures intrinsic adaptability.
    """

    id: int
    size: float
    sector: str
    change_coeff: float

    def __post_init__(self):
        problems = []
        if not 0 < self.size < 1000:
            problems.append(f"size={self.size} outside (0, 1000)")
        if self.sector not in SECTORS:
            problems.append(f"sector={self.sector!r} not one of {SECTORS}")
        if not 0 <= self.change_coeff <= 1:
            problems.append(f"change_coeff={self.change_coeff} outside [0, 1]")
        if problems:
            raise ValueError(f"company {self.id}: " + "; ".join(problems))


@dataclass(frozen=True)
class Temperatures:
    """Per-agent temperatures T_i > 0, carried as lambda_i = 1/T_i."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.float64)
        if np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
            raise ValueError("temperatures must be strictly positive and finite")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_temps(cls, temps):
        return cls(1.0 / np.asarray(temps, dtype=np.float64))

    @property
    def temps(self):
        return 1.0 / self.lam


class GameInstance:
    """A partnership game with frozen random coefficients.

    The pairwise strength coefficients y_ij and the per-agent flexibility
    coefficients y_i are drawn once (uniformly from [0, 1]) when the
    instance is built; payoffs are deterministic thereafter.
    """

    def __init__(self, graph, companies, pair_coeffs, flex_coeffs, seed=None):
        companies = tuple(sorted(companies, key=lambda c: c.id))
        if tuple(c.id for c in companies) != tuple(range(graph.n)):
            raise ValueError("companies must cover agent ids 0..n-1 exactly once")
        self.graph = graph
        self.companies = companies
        self.pair_coeffs = {}
        for (i, j), y in pair_coeffs.items():
            key = (min(i, j), max(i, j))
            if key not in set(graph.edges):
                raise ValueError(f"pair coefficient for non-edge {key}")
            if not 0.0 <= y <= 1.0:
                raise ValueError(f"pair coefficient {key} = {y} outside [0, 1]")
            self.pair_coeffs[key] = float(y)
        if set(self.pair_coeffs) != set(graph.edges):
            raise ValueError("need exactly one pair coefficient per edge")
        flex = np.asarray(flex_coeffs, dtype=np.float64)
        if flex.shape != (graph.n,) or np.any(flex < 0) or np.any(flex > 1):
            raise ValueError("need one flexibility coefficient in [0, 1] per agent")
        self.flex_coeffs = flex
        self.seed = seed
        self._payoff_tables = None

    @property
    def n(self):
        return self.graph.n

    def company(self, i):
        return self.companies[i]


def build_game_instance(graph, companies, seed):
    """Draw the random coefficients once and freeze them.

    Pair coefficients are drawn in sorted edge order, then the per-agent
    flexibility coefficients in agent order, so the draw is reproducible.
    """
    rng = np.random.default_rng(seed)
    pair = {edge: float(rng.uniform()) for edge in graph.edges}
    flex = rng.uniform(size=graph.n)
    return GameInstance(graph, companies, pair, flex, seed=seed)


def pair_weight(inst, i, j, s_i, s_j):
    """Partnership strength of edge (i, j) under the two actions.

    (z_i + z_j) * (1 + y_ij / d)^same_action, where d is 3 for same-sector
    pairs and 5 otherwise.
    """
    key = (min(i, j), max(i, j))
    if key not in inst.pair_coeffs:
        raise ValueError(f"({i}, {j}) is not an edge")
    ci, cj = inst.company(i), inst.company(j)
    same_action = 1 if s_i == s_j else 0
    same_sector = 1 if ci.sector == cj.sector else 0
    divisor = 2**same_sector + 4 ** (1 - same_sector)
    base = ci.size + cj.size
    return base * (1.0 + inst.pair_coeffs[key] / divisor) ** same_action


def flexibility(ch, s):
    """Alignment of an action with a company's change coefficient.

    Piecewise: s/2 - ch when that is below 0.5, otherwise 0.5 - s/2 + ch.
    Positive when an adaptable company upgrades or a rigid one retains.
    """
    if not 0 <= ch <= 1:
        raise ValueError(f"change coefficient {ch} outside [0, 1]")
    if s not in (RETAIN, UPGRADE):
        raise ValueError(f"action {s} not in {{1, 2}}")
    half = s / 2.0
    if half - ch < 0.5:
        return half - ch
    return 0.5 - half + ch


def _check_neighborhood_config(inst, i, config):
    members = inst.graph.neighborhood(i)
    if set(config) != set(members):
        raise ValueError(
            f"configuration keys {sorted(config)} must cover exactly "
            f"the neighborhood {list(members)} of agent {i}"
        )
    return members


def payoff(inst, i, config):
    """Payoff of agent i at a neighborhood configuration.

    ``config`` maps each member of i's neighborhood (including i) to its
    action. The pairwise weights are summed over partners only.
    """
    _check_neighborhood_config(inst, i, config)
    c = inst.company(i)
    s_i = config[i]
    total = 0.0
    for j in inst.graph.partners(i):
        total += pair_weight(inst, i, j, s_i, config[j])
    return (1.0 + inst.flex_coeffs[i] * flexibility(c.change_coeff, s_i)) * total


def regret(inst, i, config):
    """Payoff agent i forgoes by not best-responding to its partners (>= 0)."""
    _check_neighborhood_config(inst, i, config)
    current = payoff(inst, i, config)
    best = current
    for alt in (RETAIN, UPGRADE):
        if alt == config[i]:
            continue
        flipped = dict(config)
        flipped[i] = alt
        best = max(best, payoff(inst, i, flipped))
    return best - current


def payoff_tables(inst):
    """Per-agent payoff over every neighborhood configuration.

    Tables have one axis per sorted neighborhood member; computed once per
    instance and cached (instances are immutable).
    """
    if inst._payoff_tables is None:
        tables = []
        for i in range(inst.n):
            members = inst.graph.neighborhood(i)
            shape = (2,) * len(members)
            table = np.empty(shape, dtype=np.float64)
            for config in enumerate_configs(shape):
                table[tuple(a - 1 for a in config)] = payoff(
                    inst, i, dict(zip(members, config))
                )
            tables.append(table)
        inst._payoff_tables = tuple(tables)
    return inst._payoff_tables


def regret_tables(inst):
    """Per-agent regret over every neighborhood configuration."""
    out = []
    for i in range(inst.n):
        members = inst.graph.neighborhood(i)
        axis = members.index(i)
        pay = payoff_tables(inst)[i]
        out.append(pay.max(axis=axis, keepdims=True) - pay)
    return tuple(out)


def build_regret_gmm(inst, temps):
    """Regret-form model over the game: potential_i = exp(-regret_i / T_i)."""
    return Gmm.from_regrets(inst.graph, regret_tables(inst), temps.lam)


def save_game_fixture(inst, path, note=None):
    """Write a game instance (with its frozen coefficients) as JSON."""
    doc = {
        "n": inst.n,
        "edges": [list(e) for e in inst.graph.edges],
        "companies": [
            {
                "id": c.id,
                "size": c.size,
                "sector": c.sector,
                "change_coeff": c.change_coeff,
            }
            for c in inst.companies
        ],
        "coeff_seed": inst.seed,
        "pair_coeffs": {f"{i},{j}": y for (i, j), y in sorted(inst.pair_coeffs.items())},
        "flex_coeffs": [float(y) for y in inst.flex_coeffs],
    }
    if note:
        doc["note"] = note
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_game_fixture(path):
    """Load a fixture file into (graph, companies, coeff_seed, explicit coeffs).

    Explicit ``pair_coeffs``/``flex_coeffs`` entries, when present, override
    the seeded draw (used for bit-exact test fixtures); otherwise the
    returned coefficient slots are None and the caller draws from the seed.
    """
    with open(path) as fh:
        doc = json.load(fh)
    known = {"n", "edges", "companies", "coeff_seed", "pair_coeffs", "flex_coeffs", "note"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown fixture keys {sorted(unknown)}")
    graph = InteractionGraph(doc["n"], [tuple(e) for e in doc["edges"]])
    companies = [
        CompanyParams(
            id=c["id"],
            size=c["size"],
            sector=c["sector"],
            change_coeff=c["change_coeff"],
        )
        for c in doc["companies"]
    ]
    pair = None
    if "pair_coeffs" in doc:
        pair = {}
        for key, y in doc["pair_coeffs"].items():
            i, j = (int(x) for x in key.split(","))
            pair[(i, j)] = float(y)
    flex = doc.get("flex_coeffs")
    return graph, companies, doc.get("coeff_seed"), pair, flex


def instance_from_fixture(path, seed=None):
    """Build a GameInstance from a fixture file.

    Explicit coefficients in the file win; otherwise coefficients are drawn
    from ``seed`` (falling back to the file's ``coeff_seed``).
    """
    graph, companies, coeff_seed, pair, flex = load_game_fixture(path)
    if pair is not None and flex is not None:
        return GameInstance(graph, companies, pair, flex, seed=coeff_seed)
    use_seed = seed if seed is not None else coeff_seed
    if use_seed is None:
        raise ValueError(f"{path}: fixture has neither coefficients nor a seed")
    return build_game_instance(graph, companies, use_seed)


def induced_subgame(graph, companies, agent_ids):
    """Subgraph and re-indexed companies induced by a subset of agents."""
    agent_ids = sorted(agent_ids)
    remap = {old: new for new, old in enumerate(agent_ids)}
    edges = [
        (remap[i], remap[j])
        for (i, j) in graph.edges
        if i in remap and j in remap
    ]
    sub_companies = [
        CompanyParams(
            id=remap[c.id],
            size=c.size,
            sector=c.sector,
            change_coeff=c.change_coeff,
        )
        for c in companies
        if c.id in remap
    ]
    return InteractionGraph(len(agent_ids), edges), sub_companies


def top_size_subgame(graph, companies, k=4):
    """The k largest companies and their induced subgraph."""
    ranked = sorted(companies, key=lambda c: (-c.size, c.id))
    return induced_subgame(graph, companies, [c.id for c in ranked[:k]])
