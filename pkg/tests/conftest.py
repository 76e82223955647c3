import numpy as np
import pytest
import scipy.sparse as sp

from pbitnet import BayesNet, CptNode, PslNetwork, compile_network


def chain_bn(n=3, eps=1e-4, root_p=0.5):
    nodes = [CptNode("A0", (), {(): root_p})]
    for k in range(1, n):
        nodes.append(CptNode(f"A{k}", (f"A{k-1}",), {(1,): 1 - eps, (-1,): eps}))
    return BayesNet(tuple(nodes))


def and_bn(eps=1e-4):
    return BayesNet((
        CptNode("P", (), {(): 0.6}),
        CptNode("Q", (), {(): 0.3}),
        CptNode("Y", ("P", "Q"), {(1, 1): 1 - eps, (-1, 1): eps, (1, -1): eps, (-1, -1): eps}),
    ))


def random_bn(seed, n_nodes, max_parents=2):
    rng = np.random.default_rng(seed)
    nodes = []
    for k in range(n_nodes):
        n_par = int(rng.integers(0, min(k, max_parents) + 1))
        parents = tuple(f"N{p}" for p in sorted(rng.choice(k, size=n_par, replace=False))) if n_par else ()
        if n_par == 0:
            table = {(): float(rng.uniform(0.05, 0.95))}
        elif n_par == 1:
            table = {(1,): float(rng.uniform(0.02, 0.98)), (-1,): float(rng.uniform(0.02, 0.98))}
        else:
            table = {c: float(rng.uniform(0.02, 0.98)) for c in ((1, 1), (-1, 1), (1, -1), (-1, -1))}
        nodes.append(CptNode(f"N{k}", parents, table))
    return BayesNet(tuple(nodes))


@pytest.fixture
def chain3():
    return compile_network(chain_bn(3))


@pytest.fixture
def single_node():
    return PslNetwork(names=("a",), J=sp.csr_matrix((1, 1)), h=[0.0])


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
