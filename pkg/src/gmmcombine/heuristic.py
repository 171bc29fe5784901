"""Rule-based behavior: the size/degree change heuristic and its model.

Under the default rule a company upgrades with probability
0.5 * (1 - 1e-3)^|N_i| * (1 - 1e-3 * z_i), where |N_i| counts the company
itself plus its partners: bigger and better-connected companies are less
likely to change. A constant-rate variant is available for cross-input
experiments. Agents act independently, so the induced model has per-agent
potentials equal to the action probabilities themselves and a partition
function of exactly 1.
"""

from dataclasses import dataclass

import numpy as np

from .datasets import PlayDataset
from .model import Gmm, LocalPotential

DENSITY_DECAY = 1.0 - 1e-3
SIZE_SLOPE = 1e-3


@dataclass(frozen=True)
class HeuristicSpec:
    """Either the size/degree rule ("pchange") or a constant rate."""

    mode: str = "pchange"
    p: float | None = None

    def __post_init__(self):
        if self.mode == "pchange":
            if self.p is not None:
                raise ValueError("pchange mode takes no probability parameter")
        elif self.mode == "constant":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ValueError(f"constant mode needs p strictly inside (0, 1), got {self.p}")
        else:
            raise ValueError(f"unknown heuristic mode {self.mode!r}")

    @classmethod
    def from_dict(cls, doc):
        known = {"mode", "p"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"heuristic: unknown keys {sorted(unknown)}")
        return cls(mode=doc.get("mode", "pchange"), p=doc.get("p"))

    def to_dict(self):
        if self.mode == "constant":
            return {"mode": "constant", "p": self.p}
        return {"mode": "pchange"}


def p_change(inst, i, spec):
    """Probability that agent i upgrades under the heuristic."""
    if spec.mode == "constant":
        return spec.p
    z = inst.company(i).size
    if z >= 1000:
        raise ValueError(f"company {i} size {z} >= 1000 gives a non-positive probability")
    neighborhood_size = len(inst.graph.neighborhood(i))
    return 0.5 * DENSITY_DECAY**neighborhood_size * (1.0 - SIZE_SLOPE * z)


def change_probabilities(inst, spec):
    """Vector of upgrade probabilities, one per agent."""
    return np.array([p_change(inst, i, spec) for i in range(inst.n)])


def build_heuristic_gmm(inst, spec):
    """Model whose joint is the product of independent per-agent choices.

    Each potential depends only on the owner's action (constant across
    partner actions), storing (1 - p, p); the partition function is 1.
    """
    probs = change_probabilities(inst, spec)
    potentials = []
    for i in range(inst.n):
        members = inst.graph.neighborhood(i)
        own = np.array([1.0 - probs[i], probs[i]])
        shape = [1] * len(members)
        shape[members.index(i)] = 2
        table = np.broadcast_to(own.reshape(shape), (2,) * len(members)).copy()
        potentials.append(LocalPotential(i, members, table))
    return Gmm(inst.graph, potentials)


def sample_heuristic(inst, spec, count, seed):
    """Joint plays with every agent upgrading independently at its own rate.

    Distributed identically to sampling the built model; deterministic for a
    given seed.
    """
    if count < 1:
        raise ValueError("sample count must be positive")
    probs = change_probabilities(inst, spec)
    rng = np.random.default_rng(seed)
    uniforms = rng.random((count, inst.n))
    return PlayDataset(np.where(uniforms < probs[None, :], 2, 1))
