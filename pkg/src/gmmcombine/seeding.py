"""Counter-based derivation of per-trial, per-stage random streams.

Each (master seed, trial, stage name) triple maps to an independent
``numpy`` Generator through a SeedSequence spawn key, so adding new stages
or trials never reshuffles existing streams.
"""

import zlib

import numpy as np


def stage_seed_sequence(master_seed, trial, stage):
    code = zlib.crc32(stage.encode("utf-8"))
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(trial, code))


def stage_rng(master_seed, trial, stage):
    """Generator for one (trial, stage) slot of the experiment."""
    return np.random.default_rng(stage_seed_sequence(master_seed, trial, stage))


def stage_seed(master_seed, trial, stage):
    """A plain integer seed derived for one (trial, stage) slot."""
    return int(stage_rng(master_seed, trial, stage).integers(2**63))
