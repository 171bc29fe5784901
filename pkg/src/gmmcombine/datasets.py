"""Ordered collections of strategy profiles, with the shared CSV format.

The on-disk format is a CSV with header ``agent_0,...,agent_{n-1}``, one row
per profile, cells holding the 1-based action values, ``\\n`` newlines.
"""

import numpy as np


class PlayDataset:
    """Ordered multiset of strategy profiles (one row per joint play)."""

    def __init__(self, actions):
        actions = np.asarray(actions, dtype=np.int64)
        if actions.ndim != 2:
            raise ValueError("dataset must be a 2-D (plays x agents) array")
        if actions.shape[1] < 1:
            raise ValueError("dataset must cover at least one agent")
        if actions.size and actions.min() < 1:
            raise ValueError("actions are 1-based; found a value below 1")
        self.actions = actions

    @property
    def n(self):
        return self.actions.shape[1]

    def __len__(self):
        return self.actions.shape[0]

    def __getitem__(self, rows):
        """Row-sliced copy (keeps the 2-D shape)."""
        picked = self.actions[rows]
        if picked.ndim == 1:
            picked = picked[None, :]
        return PlayDataset(picked.copy())

    def __iter__(self):
        return iter(self.actions)

    def __eq__(self, other):
        return isinstance(other, PlayDataset) and np.array_equal(
            self.actions, other.actions
        )

    def __repr__(self):
        return f"PlayDataset({len(self)} plays, {self.n} agents)"

    def concat(self, other):
        if other.n != self.n:
            raise ValueError("agent counts differ")
        return PlayDataset(np.vstack([self.actions, other.actions]))

    def save_csv(self, path):
        header = ",".join(f"agent_{j}" for j in range(self.n))
        lines = [header]
        lines.extend(",".join(str(int(a)) for a in row) for row in self.actions)
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load_csv(cls, path):
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if not lines:
            raise ValueError(f"{path}: empty dataset file")
        header = lines[0].split(",")
        n = len(header)
        if header != [f"agent_{j}" for j in range(n)]:
            raise ValueError(f"{path}: malformed header {header!r}")
        rows = []
        for ln in lines[1:]:
            cells = ln.split(",")
            if len(cells) != n:
                raise ValueError(f"{path}: row has {len(cells)} cells, expected {n}")
            rows.append([int(c) for c in cells])
        return cls(np.asarray(rows, dtype=np.int64).reshape(len(rows), n))
