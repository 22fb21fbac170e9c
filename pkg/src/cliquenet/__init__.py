"""Sparse associative memories built from cliques in clustered binary networks."""

from .activation import (
    GlskoParams,
    GwstaParams,
    apply_glsko_phase1,
    apply_glsko_phase2,
    apply_gwsta,
    gwsta_threshold,
)
from .dynamics import score, score_norm, score_som, score_sos
from .network import (
    FanalId,
    Network,
    NetworkShape,
    erase_segments,
    insert_probe,
    load_snapshot,
    message_fanals,
    new_network,
    reset_state,
    save_snapshot,
    store,
    store_many,
)
from .oracle import MessageStore, oracle_error_rate, oracle_retrieve
from .retrieval import Ambiguous, RetrievalConfig, RetrievalResult, result_to_message, retrieve
from .stopping import Status

__version__ = "0.1.0"
