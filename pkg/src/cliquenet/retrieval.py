"""The retrieval loop: probe insertion, a first activation phase, then
activation/scoring rounds until a stopping criterion fires.

Criteria are checked *before* each second-phase activation, so a clique that
the first phase already isolated is recognised without a further step.  The
first phase counts as iteration 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .activation import (
    GlskoParams,
    GwstaParams,
    apply_glsko_phase1,
    apply_glsko_phase2,
    apply_gwsta,
)
from .dynamics import RULES, TIE_TOL
from .network import Network, NetworkShape, insert_probe, reset_state
from .stopping import (
    RunState,
    Status,
    check_clq,
    check_conv,
    check_eqsc,
    check_iter,
)

__all__ = [
    "CRITERIA",
    "RetrievalConfig",
    "RetrievalResult",
    "Ambiguous",
    "retrieve",
    "settle",
    "result_to_message",
]

# Checked in this order; the first one that fires names the status.
CRITERIA = ("CLQ", "EQSC", "CONV", "ITER")


@dataclass(frozen=True)
class RetrievalConfig:
    """One combination of dynamic rule, activation rule and stopping criteria.

    ``activation`` is a :class:`GwstaParams` (``alpha=1`` gives GWTA) or a
    :class:`GlskoParams`.  ``criteria`` is any non-empty subset of
    ``{"ITER", "CONV", "EQSC", "CLQ"}``; ITER uses ``max_iters``.
    """

    dynamic: str = "SOM"
    activation: GwstaParams | GlskoParams = field(default_factory=GwstaParams)
    criteria: frozenset = frozenset({"CONV", "ITER"})
    max_iters: int | None = 30
    gamma: float = 1.0
    seed: int = 0
    strict_clique: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dynamic", self.dynamic.upper())
        crit = frozenset(c.upper() for c in self.criteria)
        object.__setattr__(self, "criteria", crit)
        if self.dynamic not in RULES:
            raise ValueError(f"unknown dynamic rule {self.dynamic!r}")
        if not isinstance(self.activation, (GwstaParams, GlskoParams)):
            raise TypeError("activation must be GwstaParams or GlskoParams")
        if not crit:
            raise ValueError("at least one stopping criterion is required")
        unknown = crit - set(CRITERIA)
        if unknown:
            raise ValueError(f"unknown stopping criteria {sorted(unknown)}")
        if "ITER" in crit and (self.max_iters is None or self.max_iters < 1):
            raise ValueError("ITER needs max_iters >= 1")
        if self.glsko:
            if "CONV" in crit:
                warnings.warn(
                    "CONV never fires under GLsKO (the active set shrinks every round)",
                    stacklevel=3,
                )
        elif "ITER" not in crit:
            raise ValueError("GWsTA must be combined with the ITER criterion")
        if "CLQ" in crit and self.dynamic == "NORM":
            raise ValueError("CLQ needs a counting rule (SOS or SOM), not NORM")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def glsko(self) -> bool:
        return isinstance(self.activation, GlskoParams)


class RetrievalResult(NamedTuple):
    active: np.ndarray
    actives_by_cluster: tuple
    iterations: int
    status: Status

    @property
    def ambiguous(self) -> bool:
        return any(len(c) > 1 for c in self.actives_by_cluster)


class Ambiguous(NamedTuple):
    actives_by_cluster: tuple


def _result(network: Network, iterations: int, status: Status) -> RetrievalResult:
    act = network.active_indices()
    ell = network.shape.ell
    by_cluster = [[] for _ in range(network.shape.chi)]
    for i in act:
        c, j = divmod(int(i), ell)
        by_cluster[c].append(j + 1)
    return RetrievalResult(act, tuple(tuple(c) for c in by_cluster), iterations, status)


def retrieve(
    network: Network,
    probe,
    config: RetrievalConfig,
    rng: np.random.Generator | None = None,
) -> RetrievalResult:
    """Run a full retrieval from ``probe``; the network's state is reset first.

    ``rng`` defaults to a generator seeded from ``config.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    reset_state(network)
    insert_probe(network, probe)
    prev = network.active_indices()
    scores = RULES[config.dynamic](network, config.gamma)
    if config.glsko:
        theta = apply_glsko_phase1(network, scores)
    else:
        theta = apply_gwsta(network, scores, config.activation)
    if theta <= TIE_TOL:
        # a zero threshold switches on every unlocked fanal
        return _result(network, 1, Status.FAILED)
    return settle(network, config, rng, iteration=1, previous=prev)


def settle(
    network: Network,
    config: RetrievalConfig,
    rng: np.random.Generator,
    iteration: int = 1,
    previous=None,
) -> RetrievalResult:
    """Run the second-phase loop from the network's current state."""
    score_fn = RULES[config.dynamic]
    strict = network.weights if config.strict_clique else None
    prev = np.asarray(previous if previous is not None else [], dtype=np.intp)
    t = iteration
    while True:
        act = network.active_indices()
        if act.size == 0:
            return _result(network, t, Status.FAILED)
        if config.glsko:
            # everything outside the active set is locked out; only active
            # scores can influence the next step
            scores = np.zeros(network.n)
            scores[act] = score_fn(network, config.gamma, at=act)
        else:
            scores = score_fn(network, config.gamma)
        state = RunState(t, act, prev, scores[act], config.gamma)
        status = _first_stop(state, config, strict)
        if status is not None:
            return _result(network, t, status)
        prev = act
        if config.glsko:
            apply_glsko_phase2(network, scores, config.activation, rng)
        else:
            theta = apply_gwsta(network, scores, config.activation)
            if theta <= TIE_TOL:
                return _result(network, t + 1, Status.FAILED)
        t += 1


def _first_stop(state: RunState, config: RetrievalConfig, strict) -> Status | None:
    crit = config.criteria
    for name in CRITERIA:
        if name not in crit:
            continue
        if name == "CLQ":
            status = check_clq(state, strict)
        elif name == "EQSC":
            status = check_eqsc(state)
        elif name == "CONV":
            status = check_conv(state)
        else:
            status = check_iter(state, config.max_iters)
        if status is not None:
            return status
    return None


def result_to_message(result: RetrievalResult, shape: NetworkShape):
    """Decode a result into a message, or :class:`Ambiguous` when some
    cluster holds several fanals or nothing is active."""
    clusters = result.actives_by_cluster
    if len(clusters) != shape.chi:
        raise ValueError("result does not match shape")
    if result.ambiguous or not any(clusters):
        return Ambiguous(clusters)
    return np.array([c[0] if c else 0 for c in clusters], dtype=np.int64)
