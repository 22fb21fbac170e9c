"""Does the cheap clique stop ever certify something that is not a clique?

The clique stop only looks at scores and the number of active fanals.
The strict variant also checks every edge.  Count how often the two
disagree on random probes of a moderately loaded network.
"""

import numpy as np

from cliquenet import GlskoParams, RetrievalConfig, erase_segments, new_network, retrieve, store
from cliquenet.bench import sample_messages
from cliquenet.stopping import Status, is_clique

rng = np.random.default_rng(3)
net = new_network((16, 8))
messages = sample_messages(net.shape, 5, 900, rng)
for m in messages:
    store(net, m)

config = RetrievalConfig("SOM", GlskoParams(1, 1), frozenset({"CLQ"}))
certified = false_cert = 0
for _ in range(2000):
    m = messages[rng.integers(len(messages))]
    result = retrieve(net, erase_segments(m, 2, rng), config, rng)
    if result.status is Status.CLIQUE_FOUND:
        certified += 1
        false_cert += not is_clique(net.weights, result.active)

print(f"{certified} runs stopped on the clique test, {false_cert} of them not a clique")
