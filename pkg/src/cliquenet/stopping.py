"""Stopping criteria for the iterative retrieval loop.

Every check is a pure function of a :class:`RunState` snapshot taken before
the next activation step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import TIE_TOL

__all__ = [
    "Status",
    "RunState",
    "check_iter",
    "check_conv",
    "check_eqsc",
    "check_clq",
    "is_clique",
]


class Status(enum.Enum):
    CONVERGED = "Converged"
    EQUAL_SCORES = "EqualScores"
    CLIQUE_FOUND = "CliqueFound"
    MAX_ITERATIONS = "MaxIterations"
    FAILED = "Failed"

    def __str__(self):
        return self.value


@dataclass
class RunState:
    """``active_now``/``active_prev`` are sorted flat index arrays and
    ``scores`` holds the scores of ``active_now`` in the same order."""

    iteration: int
    active_now: np.ndarray
    active_prev: np.ndarray
    scores: np.ndarray
    gamma: float = 1.0


def check_iter(state: RunState, max_iters: int) -> Status | None:
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    return Status.MAX_ITERATIONS if state.iteration >= max_iters else None


def check_conv(state: RunState) -> Status | None:
    if np.array_equal(state.active_now, state.active_prev):
        return Status.CONVERGED
    return None


def _all_equal(scores) -> bool:
    scores = np.asarray(scores, dtype=np.float64)
    return scores.size > 0 and float(scores.max() - scores.min()) <= TIE_TOL


def check_eqsc(state: RunState) -> Status | None:
    return Status.EQUAL_SCORES if _all_equal(state.scores) else None


def check_clq(state: RunState, weights: np.ndarray | None = None) -> Status | None:
    """Equal active scores ``rho`` with ``|V_a| == rho - (gamma - 1)``.

    Only meaningful for counting rules (SOS, SOM).  With ``weights`` given
    (strict mode) the active set must also be pairwise connected.
    """
    if not _all_equal(state.scores):
        return None
    rho = float(state.scores[0])
    if abs(state.active_now.size - (rho - (state.gamma - 1))) > TIE_TOL:
        return None
    if weights is not None and not is_clique(weights, state.active_now):
        return None
    return Status.CLIQUE_FOUND


def is_clique(weights: np.ndarray, idx) -> bool:
    idx = np.asarray(idx)
    sub = weights[np.ix_(idx, idx)]
    return int(np.count_nonzero(sub)) == idx.size * (idx.size - 1)
