import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from pbitnet import NodeStreams, PslNetwork, Schedule, correlation, pbit_update, run, step_async
from pbitnet import sweep_topological, synapse_input
from pbitnet.errors import InputDomainError, ValidationError
from pbitnet.psl import SampleTrace


def freq_plus(I, n, seed):
    rng = np.random.default_rng(seed)
    return sum(pbit_update(I, rng) == 1 for _ in range(n)) / n


def test_pbit_symmetric():
    n = 40_000
    assert abs(freq_plus(0.0, n, 1) - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_pbit_saturates():
    rng = np.random.default_rng(0)
    assert all(pbit_update(20.0, rng) == 1 for _ in range(10_000))


def test_pbit_closed_form_probability():
    # e^(2*2.3026) = 100.0..., so P(+1) = 100/101
    p = (1 + math.tanh(2.3026)) / 2
    assert p == pytest.approx(100.0 / 101.0, abs=1e-5)
    assert p == pytest.approx(0.99010, abs=1e-5)
    n = 200_000
    assert abs(freq_plus(2.3026, n, 5) - p) <= 4 * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_pbit_rejects_nonfinite(bad):
    with pytest.raises(InputDomainError):
        pbit_update(bad, np.random.default_rng(0))


def test_sgn_zero_is_plus():
    class Fixed:
        def random(self):
            return 0.5  # u = 0 exactly

    assert pbit_update(0.0, Fixed()) == 1


@settings(max_examples=8, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 2**32))
def test_pbit_frequency_property(I, seed):
    n = 100_000
    p = (1 + math.tanh(I)) / 2
    assert abs(freq_plus(I, n, seed) - p) <= 4 * math.sqrt(max(p * (1 - p), 1e-12) / n) + 1e-12


def _net(h, edges, I0=1.0, names=None):
    n = len(h)
    J = sp.lil_matrix((n, n))
    for (i, j), w in edges.items():
        J[i, j] = w
    return PslNetwork(names=names or tuple(f"n{k}" for k in range(n)), J=J, h=h, I0=I0)


def test_synapse_examples():
    assert synapse_input(_net([0.0], {}), 0, [1]) == 0.0
    assert synapse_input(_net([1.0], {}, I0=2.0), 0, [-1]) == 2.0
    net = _net([0.0, 0.0, 0.0], {(2, 0): 2.3026, (2, 1): 2.3026})
    assert synapse_input(net, 2, [1, 1, -1]) == pytest.approx(4.6052, abs=1e-12)
    assert synapse_input(net, "n2", [1, -1, 1]) == pytest.approx(0.0, abs=1e-12)


def test_network_validation():
    with pytest.raises(ValidationError):
        _net([0.0, 0.0], {(0, 0): 1.0})
    with pytest.raises(ValidationError):
        _net([0.0, 0.0], {(0, 1): 1.0, (1, 0): 1.0})
    with pytest.raises(ValidationError):
        PslNetwork(names=("a", "b"), J=sp.csr_matrix(np.array([[0, 0], [1.0, 0]])), h=[0, 0], parent_order=(1, 0))
    net = _net([0.0, 0.0, 0.0], {(1, 0): 1.0, (2, 1): 1.0})
    assert net.parent_order == (0, 1, 2)
    with pytest.raises(ValueError):
        net.h[0] = 3.0


def test_sweep_single_node(single_node):
    streams = NodeStreams(3, 1)
    n = 20_000
    plus = sum(sweep_topological(single_node, [1], streams)[0] == 1 for _ in range(n))
    assert abs(plus / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_sweep_copy_chain(chain3):
    trace = run(chain3.network, "sweep", 100_000, seed=2)
    agree = np.mean(trace.column("A0") == trace.column("A1"))
    assert agree >= 0.99


def test_run_matches_reference_sweeps(chain3):
    net = chain3.network
    trace = run(net, "sweep", 500, burn_in=7, seed=11)
    streams = NodeStreams(11, net.n_nodes)
    m = np.ones(net.n_nodes, dtype=np.int8)
    for _ in range(7):
        m = sweep_topological(net, m, streams)
    ref = []
    for _ in range(500):
        m = sweep_topological(net, m, streams)
        ref.append(m.copy())
    np.testing.assert_array_equal(trace.states, np.array(ref))


@pytest.mark.parametrize("propagate", [True, False])
def test_run_matches_reference_async(propagate):
    from pbitnet import build_family_tree, compile_network

    net = compile_network(build_family_tree()).network
    trace = run(net, "async", 300, burn_in=5, seed=4, propagate=propagate)
    streams = NodeStreams(4, net.n_nodes)
    m = np.ones(net.n_nodes, dtype=np.int8)
    snaps = []
    for k in range(305 * net.n_nodes):
        m = step_async(net, m, streams, propagate=propagate)
        if (k + 1) % net.n_nodes == 0:
            snaps.append(m.copy())
    np.testing.assert_array_equal(trace.states, np.array(snaps[5:]))


def test_async_single_node_matches_sweep(single_node):
    a = run(single_node, "async", 50_000, seed=1)
    b = run(single_node, "sweep", 50_000, seed=2)
    pa, pb = np.mean(a.states == 1), np.mean(b.states == 1)
    assert abs(pa - pb) <= 4 * math.sqrt(0.5 / 50_000)


def test_async_chain_correlations(chain3):
    from pbitnet import exact_correlation, exact_joint

    d = exact_joint(chain3.network)
    trace = run(chain3.network, "async", 200_000, burn_in=100, seed=9)
    for a, b in [("A0", "A1"), ("A1", "A2"), ("A0", "A2")]:
        assert abs(correlation(trace, a, b) - exact_correlation(d, a, b)) < 0.03


def test_lagged_async_loses_parent_child_correlation(chain3):
    # Without settling, a child only sees its parent's value half the time.
    trace = run(chain3.network, "async", 100_000, burn_in=100, seed=9, propagate=False)
    c = correlation(trace, "A0", "A1")
    assert c == pytest.approx(0.5 * (1 - 2e-4), abs=0.02)


def test_run_determinism_and_seed_sensitivity(chain3):
    for sched in Schedule:
        a = run(chain3.network, sched, 2000, burn_in=3, seed=5)
        b = run(chain3.network, sched, 2000, burn_in=3, seed=5)
        c = run(chain3.network, sched, 2000, burn_in=3, seed=6)
        assert a.to_bytes() == b.to_bytes()
        assert a.to_bytes() != c.to_bytes()
        assert len(a) == 2000


def test_run_rejects_zero_samples(chain3):
    with pytest.raises(InputDomainError):
        run(chain3.network, "sweep", 0)


def test_adding_a_node_keeps_existing_streams():
    small = _net([0.0, 0.0], {})
    big = _net([0.0, 0.0, 0.0], {})
    a = run(small, "sweep", 1000, seed=8).states
    b = run(big, "sweep", 1000, seed=8).states[:, :2]
    np.testing.assert_array_equal(a, b)


def test_correlation_contract():
    rng = np.random.default_rng(0)
    T = 100_000
    states = np.where(rng.random((T, 2)) < 0.5, 1, -1).astype(np.int8)
    trace = SampleTrace(states=states, names=("x", "y"), schedule=Schedule.TOPOLOGICAL_SWEEP, seed=0, burn_in=0)
    assert correlation(trace, "x", "x") == 1.0
    assert correlation(trace, 0, 1) == correlation(trace, 1, 0)
    assert abs(correlation(trace, 0, 1)) <= 3 / math.sqrt(T)
    empty = SampleTrace(states=states[:0], names=("x", "y"), schedule=Schedule.TOPOLOGICAL_SWEEP, seed=0,
                        burn_in=0)
    with pytest.raises(InputDomainError):
        correlation(empty, 0, 1)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.lists(st.sampled_from([-1, 1]), min_size=3, max_size=3), min_size=1, max_size=50))
def test_correlation_symmetric(rows):
    states = np.array(rows, dtype=np.int8)
    trace = SampleTrace(states=states, names=("a", "b", "c"), schedule=Schedule.RANDOM_ASYNC, seed=0, burn_in=0)
    for i in range(3):
        assert correlation(trace, i, i) == 1.0
        for j in range(3):
            assert correlation(trace, i, j) == correlation(trace, j, i)
