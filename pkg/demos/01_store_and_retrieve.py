"""Store a handful of sparse messages and recover one from a partial probe.

Run:  python demos/01_store_and_retrieve.py
"""

import numpy as np

from cliquenet import GlskoParams, GwstaParams, RetrievalConfig, new_network, result_to_message, retrieve, store

# Six clusters of twelve fanals. A message picks one fanal in some clusters
# and leaves the others silent (0).
net = new_network((6, 12))
messages = [
    [7, 1, 5, 11, 0, 0],
    [0, 1, 8, 0, 10, 12],
    [3, 0, 0, 2, 9, 4],
]
for m in messages:
    added = store(net, m)
    print(f"stored {m}: {added} new edges")

print(f"\n{net.edge_count()} edges in a graph of {net.n} fanals")

# Erase the first two symbols of the first message and ask the network.
probe = [0, 0, 5, 11, 0, 0]
config = RetrievalConfig("SOM", GwstaParams(4), frozenset({"CONV", "ITER"}), max_iters=10)
result = retrieve(net, probe, config)

print(f"\nprobe      {probe}")
print(f"recovered  {result_to_message(result, net.shape).tolist()}")
print(f"status {result.status.value} after {result.iterations} iteration(s)")

# The same probe with the kick-out rule settles on the same clique.
kick = RetrievalConfig("SOM", GlskoParams(1, 1), frozenset({"EQSC"}))
result = retrieve(net, probe, kick, np.random.default_rng(0))
print(f"kick-out   {result_to_message(result, net.shape).tolist()} ({result.status.value})")
