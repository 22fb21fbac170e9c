import numpy as np
import pytest

from cliquenet import new_network


def connect(net, a, b):
    i, j = net.shape.flat(a), net.shape.flat(b)
    net.weights[i, j] = net.weights[j, i] = True


def activate(net, *fanals):
    for f in fanals:
        net.activity[net.shape.flat(f)] = True


@pytest.fixture
def two_score_net():
    """Fanal P sees one active fanal in each of three clusters; fanal Q sees
    the three actives of cluster 1 plus one active in cluster 2.

    Returns the network and the flat indices of P and Q.
    """
    net = new_network((5, 3))
    x1, x2, x3, y, z = (1, 1), (1, 2), (1, 3), (2, 1), (3, 1)
    P, Q = (4, 1), (5, 1)
    activate(net, x1, x2, x3, y, z)
    for f in (x1, y, z):
        connect(net, P, f)
    for f in (x1, x2, x3, y):
        connect(net, Q, f)
    return net, net.shape.flat(P), net.shape.flat(Q)


# Each labelled fanal gets its own cluster; index 2 of every cluster stays idle.
SPURIOUS_LABELS = "abdefgh"


@pytest.fixture
def spurious_net():
    """Searched clique abdg, spurious clique bdh, and an isolated pair e-f.

    Returns the network (all seven labelled fanals active) and a
    label -> flat index map.
    """
    net = new_network((7, 2))
    fan = {lab: (k + 1, 1) for k, lab in enumerate(SPURIOUS_LABELS)}
    for clique in ("abdg", "bdh", "ef"):
        for i, u in enumerate(clique):
            for v in clique[i + 1:]:
                connect(net, fan[u], fan[v])
    activate(net, *fan.values())
    return net, {lab: net.shape.flat(f) for lab, f in fan.items()}


def naive_scores(weights, activity, cluster_of, rule, gamma):
    """Direct triple loop over (fanal, cluster, fanal-in-cluster)."""
    n = len(activity)
    clusters = sorted(set(cluster_of.tolist()))
    out = np.zeros(n)
    for f in range(n):
        total = gamma * activity[f]
        for c in clusters:
            members = [g for g in range(n) if cluster_of[g] == c]
            hits = [int(weights[f, g] and activity[g]) for g in members]
            n_active = sum(int(activity[g]) for g in members)
            if rule == "SOS":
                total += sum(hits)
            elif rule == "SOM":
                total += max(hits)
            else:
                total += sum(hits) / n_active if n_active else 0.0
        out[f] = total
    return out


def random_network(rng, chi, ell, n_messages, c, p_active):
    from cliquenet import store

    net = new_network((chi, ell))
    for _ in range(n_messages):
        m = np.zeros(chi, dtype=int)
        cl = rng.choice(chi, size=c, replace=False)
        m[cl] = rng.integers(1, ell + 1, size=c)
        store(net, m)
    net.activity[:] = rng.random(net.n) < p_active
    return net


# -- acceptance reporting -----------------------------------------------------

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(label, passed, detail=""):
        _VERDICTS.append((label, bool(passed), detail))
        assert passed, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _VERDICTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}  {detail}")
