"""Dynamic rules: the score of every fanal given the current activity.

All three rules return a float64 array indexed by flat fanal index.  SUM-OF-SUM
and SUM-OF-MAX produce integer values (exact in float64 up to 2**53); the
normalised rule produces sums of ``1/k`` terms, so every score comparison in
the package goes through :data:`TIE_TOL`.

Passing ``at`` restricts the computation to the given flat indices and
returns scores for those fanals only, in the same order.
"""

from __future__ import annotations

import numpy as np

from .network import Network

__all__ = ["TIE_TOL", "score_sos", "score_norm", "score_som", "RULES", "score"]

TIE_TOL = 1e-9


def _active_rows(network: Network, at):
    idx = network.active_indices()
    rows = network.weights[idx]
    if at is not None:
        rows = rows[:, at]
    return idx, rows


def _memory(network: Network, gamma: float, at) -> np.ndarray:
    v = network.activity if at is None else network.activity[at]
    return gamma * v.astype(np.float64)


def score_sos(network: Network, gamma: float = 1.0, at=None) -> np.ndarray:
    """Count of active fanals connected to each fanal, plus ``gamma * v``."""
    _, rows = _active_rows(network, at)
    counts = np.add.reduce(rows, axis=0, dtype=np.int64)
    return counts + _memory(network, gamma, at)


def score_norm(network: Network, gamma: float = 1.0, at=None) -> np.ndarray:
    """Like SUM-OF-SUM, but each cluster's contribution is divided by its
    number of active fanals, so a cluster contributes at most 1."""
    idx, rows = _active_rows(network, at)
    if idx.size == 0:
        return _memory(network, gamma, at)
    clusters = network.cluster_of[idx]
    per_cluster = np.bincount(clusters)
    weight = 1.0 / per_cluster[clusters]
    return weight @ rows + _memory(network, gamma, at)


def score_som(network: Network, gamma: float = 1.0, at=None) -> np.ndarray:
    """Number of clusters holding at least one active fanal connected to each
    fanal, plus ``gamma * v``."""
    idx, rows = _active_rows(network, at)
    if idx.size == 0:
        return _memory(network, gamma, at)
    clusters = network.cluster_of[idx]
    starts = np.flatnonzero(np.r_[True, clusters[1:] != clusters[:-1]])
    if starts.size != idx.size:
        rows = np.logical_or.reduceat(rows, starts, axis=0)
    counts = np.add.reduce(rows, axis=0, dtype=np.int64)
    return counts + _memory(network, gamma, at)


RULES = {"SOS": score_sos, "NORM": score_norm, "SOM": score_som}


def score(rule: str, network: Network, gamma: float = 1.0, at=None) -> np.ndarray:
    try:
        fn = RULES[rule.upper()]
    except KeyError:
        raise ValueError(f"unknown dynamic rule {rule!r}; expected one of {sorted(RULES)}") from None
    return fn(network, gamma, at)
