"""Brute-force maximum-likelihood retrieval over the list of stored messages.

Under uniformly drawn messages and an erasure channel every stored message
that agrees with the probe on its nonzero segments is equally likely, so the
candidate list below is the exact support of the ML posterior.
"""

from __future__ import annotations

import numpy as np

from .network import erase_segments

__all__ = ["MessageStore", "oracle_retrieve", "oracle_success", "oracle_error_rate"]


class MessageStore:
    """The stored messages as an ``(M, chi)`` integer array."""

    def __init__(self, messages):
        messages = np.atleast_2d(np.asarray(messages))
        if messages.ndim != 2 or not np.issubdtype(messages.dtype, np.integer):
            raise ValueError("messages must be a 2-D integer array")
        # column-major: a probe only ever reads a handful of columns
        self.messages = np.asfortranarray(messages)

    def __len__(self):
        return self.messages.shape[0]

    def __getitem__(self, i):
        return self.messages[i]

    def candidates(self, probe) -> np.ndarray:
        """Row indices of every message consistent with ``probe``."""
        probe = np.asarray(probe)
        known = np.flatnonzero(probe)
        if known.size == 0:
            raise ValueError("probe has no nonzero segment")
        match = np.all(self.messages[:, known] == probe[known], axis=1)
        return np.flatnonzero(match)


def oracle_retrieve(store: MessageStore, probe) -> list[np.ndarray]:
    return [store[i] for i in store.candidates(probe)]


def oracle_success(
    store: MessageStore,
    probe,
    original,
    ambiguity: str = "strict",
    rng: np.random.Generator | None = None,
) -> bool:
    """Whether ML retrieval recovers ``original`` from ``probe``.

    ``strict`` counts any ambiguity as an error; ``random`` picks one of the
    consistent messages uniformly (needs ``rng``).
    """
    hits = store.candidates(probe)
    if hits.size == 0:
        return False
    if ambiguity == "strict":
        return hits.size == 1 and np.array_equal(store[hits[0]], original)
    if ambiguity == "random":
        pick = hits[rng.integers(hits.size)]
        return np.array_equal(store[pick], original)
    raise ValueError(f"unknown ambiguity mode {ambiguity!r}")


def oracle_error_rate(
    store: MessageStore,
    trials: int,
    erasures: int,
    rng: np.random.Generator,
    ambiguity: str = "strict",
) -> float:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    errors = 0
    for _ in range(trials):
        original = store[rng.integers(len(store))]
        probe = erase_segments(original, erasures, rng)
        errors += not oracle_success(store, probe, original, ambiguity, rng)
    return errors / trials
