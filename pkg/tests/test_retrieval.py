import numpy as np
import pytest

from cliquenet import (
    Ambiguous,
    GlskoParams,
    GwstaParams,
    NetworkShape,
    RetrievalConfig,
    Status,
    apply_gwsta,
    erase_segments,
    new_network,
    result_to_message,
    retrieve,
    score_som,
    store,
)
from cliquenet.network import message_indices
from cliquenet.retrieval import settle
from cliquenet.stopping import is_clique

from conftest import naive_scores, random_network

A = [7, 1, 5, 11, 0, 0]
B = [0, 1, 8, 0, 10, 12]


def gwsta(alpha, criteria=("CONV", "ITER"), max_iters=30, dynamic="SOM", gamma=1.0):
    return RetrievalConfig(dynamic, GwstaParams(alpha), frozenset(criteria), max_iters, gamma)


def glsko(beta=1, mu=1, criteria=("EQSC",), dynamic="SOM", gamma=1.0, max_iters=30):
    return RetrievalConfig(dynamic, GlskoParams(beta, mu), frozenset(criteria), max_iters, gamma)


@pytest.fixture
def two_message_net():
    net = new_network((6, 12))
    store(net, A)
    store(net, B)
    return net


@pytest.mark.parametrize("config", [gwsta(4, ("EQSC", "ITER")), gwsta(4), glsko(), glsko(mu=None), glsko(criteria=("CLQ",))])
def test_two_message_probe(two_message_net, config):
    result = retrieve(two_message_net, [0, 0, 5, 11, 0, 0], config)
    assert {(c + 1, j) for c, js in enumerate(result.actives_by_cluster) for j in js} == {
        (1, 7), (2, 1), (3, 5), (4, 11)
    }
    assert not result.ambiguous
    assert result_to_message(result, two_message_net.shape).tolist() == A


def test_unerased_probe_returns_its_clique():
    rng = np.random.default_rng(4)
    net = new_network((4, 8))
    msgs = [rng.integers(1, 9, size=4) for _ in range(5)]
    for m in msgs:
        store(net, m)
    for m in msgs:
        result = retrieve(net, m, gwsta(4, ("EQSC", "ITER")))
        assert result.status is Status.EQUAL_SCORES
        assert result.iterations == 1
        assert np.array_equal(result.active, message_indices(net.shape, m))
        assert not result.ambiguous


def test_gwta_loses_the_searched_clique(spurious_net):
    net, lab = spurious_net
    apply_gwsta(net, score_som(net, 1), 1)
    assert set(net.active_indices()) == {lab["b"], lab["d"]}


def test_glsko_clq_recovers_maximal_clique_for_every_seed(spurious_net):
    net, lab = spurious_net
    want = sorted(lab[x] for x in "abdg")
    start = net.activity.copy()
    for seed in range(300):
        net.activity[:] = start
        net.thresholds[:] = np.where(start, 0.0, np.inf)
        result = settle(net, glsko(criteria=("CLQ",)), np.random.default_rng(seed))
        assert result.status is Status.CLIQUE_FOUND
        assert result.active.tolist() == want


def test_clique_found_need_not_be_stored():
    net = new_network((3, 1))
    for m in ([1, 1, 0], [0, 1, 1], [1, 0, 1]):
        store(net, m)
    result = retrieve(net, [1, 1, 0], glsko(criteria=("CLQ",)))
    assert result.status is Status.CLIQUE_FOUND
    assert result.active.tolist() == [0, 1, 2]
    assert is_clique(net.weights, result.active)


def test_flood_fails():
    net = new_network((5, 4))
    store(net, [1, 1, 0, 0, 0])
    result = retrieve(net, [1, 0, 0, 0, 0], gwsta(5))
    assert result.status is Status.FAILED


def test_glsko_empty_run_fails():
    # equal active scores and no EQSC: phase 2 kicks everyone out
    net = new_network((3, 2))
    store(net, [1, 1, 1])
    with pytest.warns(UserWarning):
        config = glsko(mu=None, criteria=("CONV",))
    result = retrieve(net, [1, 1, 0], config)
    assert result.status is Status.FAILED
    assert result.active.size == 0


def test_result_to_message():
    shape = NetworkShape(6, 12)
    net = new_network(shape)
    store(net, [0, 10, 7, 0, 12, 11])
    result = retrieve(net, [0, 10, 7, 0, 12, 0], gwsta(4, ("EQSC", "ITER")))
    assert result_to_message(result, shape).tolist() == [0, 10, 7, 0, 12, 11]

    from cliquenet.retrieval import RetrievalResult

    amb = RetrievalResult(np.array([28, 32]), ((), (), (5, 9), (), (), ()), 1, Status.CONVERGED)
    assert amb.ambiguous
    assert isinstance(result_to_message(amb, shape), Ambiguous)
    empty = RetrievalResult(np.array([], dtype=int), ((),) * 6, 1, Status.FAILED)
    assert isinstance(result_to_message(empty, shape), Ambiguous)


def test_config_validation():
    with pytest.raises(ValueError):
        gwsta(12, ("CONV",))
    with pytest.raises(ValueError):
        glsko(criteria=("CLQ",), dynamic="NORM")
    with pytest.raises(ValueError):
        RetrievalConfig("SOM", GwstaParams(1), frozenset(), 30)
    with pytest.raises(ValueError):
        gwsta(1, ("ITER",), max_iters=0)
    with pytest.raises(ValueError):
        gwsta(1, ("ITER", "WAIT"))
    with pytest.warns(UserWarning):
        glsko(criteria=("CONV", "EQSC"))


def _naive_gwsta_retrieve(net, probe, alpha, rule, gamma, max_iters):
    """Straight transcription of the loop with loops and sorted lists."""
    w, cl = net.weights, net.cluster_of
    v = np.zeros(net.n, dtype=bool)
    v[message_indices(net.shape, probe)] = True

    def activate(v):
        s = naive_scores(w, v, cl, rule, gamma)
        theta = sorted(s, reverse=True)[alpha - 1]
        return np.array([x >= theta - 1e-9 for x in s]), theta

    prev = v
    v, theta = activate(v)
    if theta <= 1e-9:
        return None, 1
    t = 1
    while True:
        if list(np.flatnonzero(v)) == list(np.flatnonzero(prev)):
            return v, t
        if t >= max_iters:
            return v, t
        prev = v
        v, theta = activate(v)
        if theta <= 1e-9:
            return None, t + 1
        t += 1


@pytest.mark.parametrize("rule", ["SOS", "SOM", "NORM"])
def test_gwsta_matches_naive_loop(rule):
    rng = np.random.default_rng({"SOS": 1, "SOM": 2, "NORM": 3}[rule])
    for _ in range(25):
        chi, ell, c = 5, 4, 3
        net = random_network(rng, chi, ell, int(rng.integers(3, 15)), c, 0)
        m = np.zeros(chi, dtype=int)
        m[rng.choice(chi, size=c, replace=False)] = rng.integers(1, ell + 1, size=c)
        store(net, m)
        probe = erase_segments(m, 1, rng)
        alpha = int(rng.integers(1, c + 1))
        gamma = float(rng.choice([0, 1, 3]))
        result = retrieve(net, probe, gwsta(alpha, dynamic=rule, gamma=gamma, max_iters=8))
        want, t = _naive_gwsta_retrieve(net, probe, alpha, rule, gamma, 8)
        assert result.iterations == t
        if want is None:
            assert result.status is Status.FAILED
        else:
            assert result.active.tolist() == np.flatnonzero(want).tolist()


def test_determinism_and_iter_liveness():
    rng = np.random.default_rng(8)
    net = random_network(rng, 8, 6, 40, 4, 0)
    configs = [
        gwsta(1), gwsta(4), gwsta(4, dynamic="SOS", max_iters=5),
        gwsta(4, ("EQSC", "ITER"), dynamic="NORM", max_iters=3),
        glsko(), glsko(beta=2, mu=None), glsko(criteria=("CLQ", "ITER")),
    ]
    for _ in range(30):
        m = np.zeros(8, dtype=int)
        m[rng.choice(8, size=4, replace=False)] = rng.integers(1, 7, size=4)
        probe = erase_segments(m, 2, rng)
        for cfg in configs:
            a = retrieve(net, probe, cfg, np.random.default_rng(3))
            b = retrieve(net, probe, cfg, np.random.default_rng(3))
            assert a.status == b.status and a.iterations == b.iterations
            assert np.array_equal(a.active, b.active)
            if "ITER" in cfg.criteria:
                assert a.iterations <= cfg.max_iters


def test_glsko_terminates_within_phase1_count():
    rng = np.random.default_rng(9)
    net = random_network(rng, 10, 4, 120, 4, 0)
    for _ in range(40):
        m = np.zeros(10, dtype=int)
        m[rng.choice(10, size=4, replace=False)] = rng.integers(1, 5, size=4)
        store(net, m)
        probe = erase_segments(m, 2, rng)
        net_probe = retrieve(net, probe, gwsta(1, ("ITER",), max_iters=1))
        phase1 = net_probe.active.size
        result = retrieve(net, probe, glsko(), rng)
        assert result.iterations <= phase1


def test_zero_erasure_never_loses_correct_fanals():
    rng = np.random.default_rng(12)
    net = random_network(rng, 10, 4, 60, 5, 0)
    for _ in range(60):
        m = np.zeros(10, dtype=int)
        m[rng.choice(10, size=5, replace=False)] = rng.integers(1, 5, size=5)
        store(net, m)
        result = retrieve(net, m, gwsta(5, ("EQSC", "CONV", "ITER")))
        assert set(message_indices(net.shape, m)) <= set(result.active.tolist())


def test_retrieve_resets_previous_lockouts(two_message_net):
    two_message_net.thresholds[:] = np.inf
    result = retrieve(two_message_net, [0, 0, 5, 11, 0, 0], glsko())
    assert result_to_message(result, two_message_net.shape).tolist() == A


def test_clique_stop_can_settle_on_another_stored_message():
    net = new_network((4, 4))
    for m in ([3, 1, 2, 4], [1, 3, 3, 2], [4, 4, 2, 2], [4, 4, 4, 3]):
        store(net, m)
    probe = [4, 4, 0, 0]
    found = {
        tuple(result_to_message(retrieve(net, probe, glsko(criteria=("CLQ",)), np.random.default_rng(s)), net.shape))
        for s in range(20)
    }
    assert (4, 4, 2, 2) in found
    # the winner-take-all rule keeps both candidates instead
    wide = retrieve(net, probe, gwsta(1))
    assert set(message_indices(net.shape, [4, 4, 4, 3])) <= set(wide.active.tolist())
