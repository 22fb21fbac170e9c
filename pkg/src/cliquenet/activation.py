"""Activation rules: elect the next set of active fanals from a score map.

``GWsTA`` keeps every fanal whose score reaches the ``alpha``-th highest score
(counted with multiplicity); ``alpha=1`` is plain GWTA.  ``GLsKO`` runs GWTA
once and locks every other fanal out, then repeatedly kicks out the active
fanals holding the ``beta`` lowest distinct nonzero scores.

Each ``apply_*`` function mutates ``network.activity`` (and, for GLsKO,
``network.thresholds``) in place and returns the threshold it used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import TIE_TOL
from .network import Network

__all__ = [
    "GwstaParams",
    "GlskoParams",
    "gwsta_threshold",
    "apply_gwsta",
    "apply_glsko_phase1",
    "apply_glsko_phase2",
    "distinct_values",
]


@dataclass(frozen=True)
class GwstaParams:
    alpha: int = 1

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError(f"alpha must be a positive integer, got {self.alpha}")


@dataclass(frozen=True)
class GlskoParams:
    beta: int = 1
    mu: int | None = None

    def __post_init__(self):
        if int(self.beta) != self.beta or self.beta < 1:
            raise ValueError(f"beta must be a positive integer, got {self.beta}")
        if self.mu is not None and (int(self.mu) != self.mu or self.mu < 1):
            raise ValueError(f"mu must be a positive integer or None, got {self.mu}")


def gwsta_threshold(scores, alpha: int) -> float:
    """Smallest of the ``alpha`` largest scores, duplicates counted."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.size
    if alpha < 1 or alpha > n:
        raise ValueError(f"alpha={alpha} must lie in [1, {n}]")
    return float(np.partition(scores, n - alpha)[n - alpha])


def apply_gwsta(network: Network, scores, params: GwstaParams | int) -> float:
    alpha = params.alpha if isinstance(params, GwstaParams) else params
    scores = np.asarray(scores, dtype=np.float64)
    theta = gwsta_threshold(scores, alpha)
    # The lockout guard compares theta, not the fanal's own score, to sigma.
    network.activity[:] = (scores >= theta - TIE_TOL) & (theta >= network.thresholds)
    return theta


def apply_glsko_phase1(network: Network, scores) -> float:
    theta = apply_gwsta(network, scores, 1)
    network.thresholds[~network.activity] = np.inf
    return theta


def distinct_values(values, tol: float = TIE_TOL) -> np.ndarray:
    """Sorted distinct values, merging neighbours closer than ``tol``."""
    u = np.unique(np.asarray(values, dtype=np.float64))
    if u.size < 2:
        return u
    keep = np.r_[True, np.diff(u) > tol]
    return u[keep]


def apply_glsko_phase2(
    network: Network,
    scores,
    params: GlskoParams,
    rng: np.random.Generator | None = None,
) -> float:
    """Kick the lowest-scoring active fanals out and lock them out for good.

    Active fanals with a zero score are always removed.  Among the rest, the
    losers are those whose score is one of the ``beta`` lowest distinct
    values; all of them go when ``mu`` is unset, otherwise the ``mu`` lowest
    (ties broken at random) go.  Returns the loser threshold, or 0.0 when no
    active fanal had a nonzero score.
    """
    act = network.active_indices()
    if act.size == 0:
        raise ValueError("GLsKO phase 2 needs at least one active fanal")
    scores = np.asarray(scores, dtype=np.float64)
    s = scores[act]

    zero = s <= TIE_TOL
    if zero.any():
        _kick(network, act[zero])
        act, s = act[~zero], s[~zero]
    if act.size == 0:
        return 0.0

    levels = distinct_values(s)
    theta = float(levels[min(params.beta, levels.size) - 1])
    is_loser = s <= theta + TIE_TOL
    losers = act[is_loser]
    if params.mu is None or params.mu >= losers.size:
        _kick(network, losers)
        return theta

    if rng is None:
        raise ValueError("a random generator is required when mu is set")
    level = np.searchsorted(levels, s[is_loser] - TIE_TOL)
    order = np.lexsort((rng.random(losers.size), level))
    _kick(network, losers[order[: params.mu]])
    return theta


def _kick(network: Network, idx) -> None:
    network.activity[idx] = False
    network.thresholds[idx] = np.inf
