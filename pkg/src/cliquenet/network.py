"""Clustered binary networks that store sparse messages as cliques.

A network has ``chi`` clusters of ``ell`` fanals each.  Fanals are addressed
as ``(cluster, index)`` pairs, both 1-based, at the API boundary and by a flat
0-based index ``(cluster - 1) * ell + (index - 1)`` internally.

Messages are length-``chi`` integer vectors over ``[0, ell]``; a zero segment
marks a cluster that is not part of the message (or has been erased).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "NetworkShape",
    "FanalId",
    "Network",
    "new_network",
    "as_message",
    "message_order",
    "message_fanals",
    "message_indices",
    "store",
    "store_many",
    "erase_segments",
    "insert_probe",
    "reset_state",
    "save_snapshot",
    "load_snapshot",
]


@dataclass(frozen=True)
class NetworkShape:
    """Number of clusters ``chi`` and fanals per cluster ``ell``."""

    chi: int
    ell: int

    def __post_init__(self):
        if int(self.chi) != self.chi or int(self.ell) != self.ell:
            raise ValueError("chi and ell must be integers")
        if self.chi < 2:
            raise ValueError(f"need at least 2 clusters, got chi={self.chi}")
        if self.ell < 1:
            raise ValueError(f"need at least 1 fanal per cluster, got ell={self.ell}")

    @property
    def n(self) -> int:
        return self.chi * self.ell

    def flat(self, fanal: FanalId | tuple[int, int]) -> int:
        cluster, index = fanal
        if not (1 <= cluster <= self.chi and 1 <= index <= self.ell):
            raise ValueError(f"fanal {tuple(fanal)} outside shape {self}")
        return (cluster - 1) * self.ell + (index - 1)

    def fanal(self, flat: int) -> FanalId:
        if not 0 <= flat < self.n:
            raise ValueError(f"flat index {flat} outside [0, {self.n})")
        cluster, index = divmod(int(flat), self.ell)
        return FanalId(cluster + 1, index + 1)


class FanalId(NamedTuple):
    cluster: int
    index: int


@dataclass
class Network:
    """Weight matrix plus the per-fanal retrieval state.

    ``weights`` is a dense symmetric boolean ``n x n`` matrix with no edges
    inside a cluster.  ``activity`` holds the binary states ``v`` and
    ``thresholds`` the activation thresholds ``sigma``; ``np.inf`` is the
    lockout value.
    """

    shape: NetworkShape
    weights: np.ndarray
    activity: np.ndarray
    thresholds: np.ndarray
    cluster_of: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.shape.n

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(self.activity)

    def active_fanals(self) -> set[FanalId]:
        return {self.shape.fanal(i) for i in self.active_indices()}

    def edge_count(self) -> int:
        return int(np.count_nonzero(self.weights)) // 2

    def connected(self, a, b) -> bool:
        return bool(self.weights[self.shape.flat(a), self.shape.flat(b)])

    def fork(self) -> Network:
        """Share the weights, copy the mutable retrieval state."""
        return Network(
            self.shape,
            self.weights,
            self.activity.copy(),
            self.thresholds.copy(),
            self.cluster_of,
        )


def new_network(shape: NetworkShape | tuple[int, int]) -> Network:
    if not isinstance(shape, NetworkShape):
        shape = NetworkShape(*shape)
    n = shape.n
    return Network(
        shape=shape,
        weights=np.zeros((n, n), dtype=bool),
        activity=np.zeros(n, dtype=bool),
        thresholds=np.zeros(n, dtype=np.float64),
        cluster_of=np.arange(n) // shape.ell,
    )


def as_message(shape: NetworkShape, m: Iterable[int]) -> np.ndarray:
    """Validate ``m`` against ``shape`` and return it as an integer array."""
    arr = np.asarray(m)
    if arr.ndim != 1 or arr.shape[0] != shape.chi:
        raise ValueError(f"message must have {shape.chi} segments, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("message segments must be integers")
    arr = arr.astype(np.int64)
    bad = (arr < 0) | (arr > shape.ell)
    if bad.any():
        pos = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"segment {pos + 1} has value {arr[pos]}, outside [0, {shape.ell}]"
        )
    return arr


def message_order(m) -> int:
    return int(np.count_nonzero(m))


def message_indices(shape: NetworkShape, m) -> np.ndarray:
    """Flat indices of the fanals selected by ``m``, in cluster order."""
    arr = as_message(shape, m)
    clusters = np.flatnonzero(arr)
    return clusters * shape.ell + (arr[clusters] - 1)


def message_fanals(shape: NetworkShape, m) -> set[FanalId]:
    arr = as_message(shape, m)
    return {FanalId(int(i) + 1, int(arr[i])) for i in np.flatnonzero(arr)}


def store(network: Network, m) -> int:
    """Store ``m`` as a clique and return the number of new edges."""
    idx = message_indices(network.shape, m)
    if idx.size < 2:
        raise ValueError(f"cannot store a message of order {idx.size}; need at least 2")
    block = np.ix_(idx, idx)
    before = int(np.count_nonzero(network.weights[block]))
    network.weights[block] = True
    network.weights[idx, idx] = False
    return (idx.size * (idx.size - 1) - before) // 2


def store_many(network: Network, messages: np.ndarray, chunk: int = 20000) -> None:
    """Store every row of ``messages``; rows must all share one order.

    This is the bulk path used by the benchmark: it writes the same edges as
    calling :func:`store` per row but skips the per-message edge accounting.
    """
    messages = np.asarray(messages)
    if messages.ndim != 2 or messages.shape[1] != network.shape.chi:
        raise ValueError("messages must be an (M, chi) array")
    if messages.size == 0:
        return
    if messages.min() < 0 or messages.max() > network.shape.ell:
        raise ValueError("segment values outside [0, ell]")
    orders = np.count_nonzero(messages, axis=1)
    if orders.min() != orders.max():
        for row in messages:
            store(network, row)
        return
    c = int(orders[0])
    if c < 2:
        raise ValueError(f"cannot store messages of order {c}; need at least 2")
    ell = network.shape.ell
    w = network.weights
    a, b = np.triu_indices(c, k=1)
    for lo in range(0, messages.shape[0], chunk):
        part = messages[lo : lo + chunk]
        rows, cols = np.nonzero(part)
        flat = (cols * ell + part[rows, cols] - 1).reshape(part.shape[0], c)
        src = flat[:, a].ravel()
        dst = flat[:, b].ravel()
        w[src, dst] = True
        w[dst, src] = True


def erase_segments(m, k: int, rng: np.random.Generator) -> np.ndarray:
    """Return a copy of ``m`` with ``k`` random nonzero segments zeroed."""
    out = np.array(m, dtype=np.int64, copy=True)
    nonzero = np.flatnonzero(out)
    if k < 0 or k > nonzero.size:
        raise ValueError(f"cannot erase {k} segments from a message of order {nonzero.size}")
    if k:
        out[rng.choice(nonzero, size=k, replace=False)] = 0
    return out


def insert_probe(network: Network, probe) -> None:
    idx = message_indices(network.shape, probe)
    network.activity[:] = False
    network.activity[idx] = True


def reset_state(network: Network) -> None:
    network.activity[:] = False
    network.thresholds[:] = 0.0


# Binary snapshot: "GBNN", u32 version, u32 chi, u32 ell, then for every
# fanal a (0-based) the bits of columns a+1 .. n-1, packed LSB-first into
# little-endian u64 words; each row is padded to a whole number of words.
_MAGIC = b"GBNN"
_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def save_snapshot(network: Network, path) -> None:
    n = network.n
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, network.shape.chi, network.shape.ell))
        for a in range(n):
            row = network.weights[a, a + 1 :]
            nwords = -(-row.size // 64)
            padded = np.zeros(nwords * 64, dtype=bool)
            padded[: row.size] = row
            fh.write(np.packbits(padded, bitorder="little").tobytes())


def load_snapshot(path) -> Network:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, version, chi, ell = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    network = new_network(NetworkShape(chi, ell))
    n = network.n
    offset = _HEADER.size
    for a in range(n):
        width = n - a - 1
        nbytes = -(-width // 64) * 8
        chunk = np.frombuffer(data, dtype=np.uint8, count=nbytes, offset=offset)
        offset += nbytes
        network.weights[a, a + 1 :] = np.unpackbits(chunk, bitorder="little")[:width]
    if offset != len(data):
        raise ValueError("snapshot has trailing bytes")
    network.weights |= network.weights.T
    return network
