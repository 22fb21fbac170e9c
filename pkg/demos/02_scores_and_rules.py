"""How the three scoring rules disagree on a tiny hand-built network.

Fanal P hears one active fanal in each of three clusters.  Fanal Q hears
three actives crowded into one cluster plus one more elsewhere.  Summing
counts favours Q; counting clusters favours P.
"""

from cliquenet import new_network, score_norm, score_som, score_sos

net = new_network((5, 3))
x1, x2, x3, y, z = (1, 1), (1, 2), (1, 3), (2, 1), (3, 1)
P, Q = (4, 1), (5, 1)


def link(a, b):
    i, j = net.shape.flat(a), net.shape.flat(b)
    net.weights[i, j] = net.weights[j, i] = True


for f in (x1, x2, x3, y, z):
    net.activity[net.shape.flat(f)] = True
for f in (x1, y, z):
    link(P, f)
for f in (x1, x2, x3, y):
    link(Q, f)

p, q = net.shape.flat(P), net.shape.flat(Q)
for name, fn in (("SOS", score_sos), ("NORM", score_norm), ("SOM", score_som)):
    s = fn(net, gamma=0)
    print(f"{name:5s} P={s[p]:.3f}  Q={s[q]:.3f}")

# Only SOM ranks P first, and P is the fanal consistent with one symbol per
# cluster.  That is why SOM never drops a correct fanal.
