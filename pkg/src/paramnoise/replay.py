"""Transition storage and online observation normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    state: np.ndarray
    action: object  # int for discrete, np.ndarray for continuous
    reward: float
    next_state: np.ndarray
    done: bool
    head_mask: np.ndarray | None = None  # bootstrapped DQN only


class ReplayBuffer:
    """Ring buffer with FIFO eviction and uniform sampling.

    Storage is column-oriented (one preallocated array per field, shaped and
    typed from the first transition added) so sampling a minibatch is a
    single fancy-indexing gather per field."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._size = 0
        self._next = 0
        self._cols: dict[str, np.ndarray] | None = None

    def __len__(self) -> int:
        return self._size

    def _allocate(self, t: Transition) -> None:
        cap = self.capacity
        state = np.asarray(t.state, dtype=np.float64)
        action = np.asarray(t.action)
        cols = {
            "state": np.empty((cap, *state.shape)),
            "action": np.empty((cap, *action.shape), dtype=action.dtype),
            "reward": np.empty(cap),
            "next_state": np.empty((cap, *state.shape)),
            "done": np.empty(cap),
        }
        if t.head_mask is not None:
            mask = np.asarray(t.head_mask)
            cols["head_mask"] = np.empty((cap, *mask.shape), dtype=mask.dtype)
        self._cols = cols

    def add(self, transition: Transition) -> None:
        if self._cols is None:
            self._allocate(transition)
        i = self._next
        cols = self._cols
        cols["state"][i] = transition.state
        cols["action"][i] = transition.action
        cols["reward"][i] = transition.reward
        cols["next_state"][i] = transition.next_state
        cols["done"][i] = float(transition.done)
        if "head_mask" in cols:
            cols["head_mask"][i] = transition.head_mask
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        return rng.integers(self._size, size=batch_size)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        cols = self._cols
        has_mask = "head_mask" in cols if cols else False
        return [Transition(cols["state"][i].copy(),
                           cols["action"][i].item() if cols["action"].ndim == 1
                           else cols["action"][i].copy(),
                           float(cols["reward"][i]),
                           cols["next_state"][i].copy(),
                           bool(cols["done"][i]),
                           cols["head_mask"][i].copy() if has_mask else None)
                for i in self._indices(batch_size, rng)]

    def sample_arrays(self, batch_size: int, rng: np.random.Generator):
        """Stacked (states, actions, rewards, next_states, dones, head_masks)
        for vectorized training updates."""
        idx = self._indices(batch_size, rng)
        cols = self._cols
        masks = cols["head_mask"][idx] if "head_mask" in cols else None
        return (cols["state"][idx], cols["action"][idx], cols["reward"][idx],
                cols["next_state"][idx], cols["done"][idx], masks)

    def state_batch(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        return self._cols["state"][self._indices(batch_size, rng)]


class OnlineNormalizer:
    """Welford running mean/variance per observation dimension.
    normalize(x) = (x - mean) / sqrt(var + 1e-8)."""

    def __init__(self, dim: int):
        self.dim = dim
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def update(self, x) -> None:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        for row in x:
            self.count += 1
            delta = row - self.mean
            self.mean += delta / self.count
            self.m2 += delta * (row - self.mean)

    @property
    def var(self) -> np.ndarray:
        if self.count < 2:
            return np.ones(self.dim)
        return self.m2 / self.count

    def normalize(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.count == 0:
            return x.copy()
        return (x - self.mean) / np.sqrt(self.var + 1e-8)
