"""Brute-force exact inference by enumerating every bipolar configuration.

States are enumerated in ``itertools.product((-1, 1), repeat=n)`` order, so
state ``k`` assigns node ``i`` the value +1 iff bit ``n-1-i`` of ``k`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compiler import BayesNet, combinations
from .errors import CapacityError, InputDomainError
from .psl import PslNetwork, SampleTrace

MAX_NODES = 20


def enumerate_states(n: int) -> np.ndarray:
    k = np.arange(1 << n, dtype=np.int64)[:, None]
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]
    return (2 * ((k >> shifts) & 1) - 1).astype(np.int8)


def state_index(states: np.ndarray) -> np.ndarray:
    n = states.shape[1]
    bits = (np.asarray(states) > 0).astype(np.int64)
    return bits @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    names: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (1 << len(self.names),):
            raise InputDomainError("probability vector does not match the state space")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "probabilities", p)

    @property
    def n_nodes(self):
        return len(self.names)

    def __getitem__(self, state) -> float:
        return float(self.probabilities[state_index(np.asarray(state).reshape(1, -1))[0]])

    def as_dict(self) -> dict:
        states = enumerate_states(self.n_nodes)
        return {tuple(int(v) for v in s): float(p) for s, p in zip(states, self.probabilities)}

    def index(self, node) -> int:
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.n_nodes:
                raise InputDomainError(f"node index {node} out of range")
            return int(node)
        try:
            return self.names.index(node)
        except ValueError:
            raise InputDomainError(f"unknown node {node!r}") from None

    def marginal(self, keep) -> "JointDistribution":
        keep = [self.index(k) for k in keep]
        states = enumerate_states(self.n_nodes)[:, keep]
        p = np.bincount(state_index(states), weights=self.probabilities, minlength=1 << len(keep))
        return JointDistribution(tuple(self.names[k] for k in keep), p)

    def mean(self, i) -> float:
        col = enumerate_states(self.n_nodes)[:, self.index(i)]
        return float(np.dot(self.probabilities, col))


def _check_size(n):
    if n > MAX_NODES:
        raise CapacityError(f"{n} nodes exceed the enumeration bound of {MAX_NODES}")


def _joint_bn(bn: BayesNet) -> JointDistribution:
    n = len(bn.nodes)
    _check_size(n)
    states = enumerate_states(n)
    index = {nm: i for i, nm in enumerate(bn.names)}
    p = np.ones(states.shape[0])
    for i, node in enumerate(bn.nodes):
        cols = [index[q] for q in node.parents]
        p_plus = np.empty(states.shape[0])
        for combo in combinations(len(cols)):
            mask = np.all(states[:, cols] == np.array(combo, dtype=np.int8), axis=1) if cols else slice(None)
            p_plus[mask] = node.table[combo]
        p *= np.where(states[:, i] > 0, p_plus, 1.0 - p_plus)
    return JointDistribution(bn.names, p)


def _joint_network(net: PslNetwork) -> JointDistribution:
    n = net.n_nodes
    _check_size(n)
    states = enumerate_states(n)
    x = states.astype(float)
    drive = net.I0 * (np.asarray(net.h)[None, :] + x @ net.J.T.toarray())
    p = np.prod((1.0 + x * np.tanh(drive)) / 2.0, axis=1)
    full = JointDistribution(net.names, p)
    regular = net.regular_nodes()
    if len(regular) == n:
        return full
    return full.marginal(regular)


def exact_joint(model) -> JointDistribution:
    """Exact joint of a BayesNet or a compiled PslNetwork (aux nodes summed out).

    For a network each node contributes its p-bit law ``(1 + m tanh I) / 2``.
    """
    if isinstance(model, BayesNet):
        return _joint_bn(model)
    if isinstance(model, PslNetwork):
        return _joint_network(model)
    if hasattr(model, "network") and isinstance(model.network, PslNetwork):
        return _joint_network(model.network)
    raise InputDomainError(f"cannot enumerate a {type(model).__name__}")


def exact_correlation(d: JointDistribution, i, j) -> float:
    states = enumerate_states(d.n_nodes)
    a, b = d.index(i), d.index(j)
    if a == b:
        return 1.0
    prod = states[:, a].astype(np.int64) * states[:, b]
    return float(np.dot(d.probabilities, prod))


def total_variation(p: JointDistribution, q: JointDistribution) -> float:
    if p.names != q.names:
        raise InputDomainError("distributions are over different state spaces")
    return 0.5 * float(np.sum(np.abs(p.probabilities - q.probabilities)))


def empirical_joint(trace: SampleTrace, nodes=None) -> JointDistribution:
    """Histogram of recorded snapshots, optionally restricted to ``nodes``."""
    if len(trace) == 0:
        raise InputDomainError("empty trace")
    cols = list(range(len(trace.names))) if nodes is None else [trace.index(k) for k in nodes]
    _check_size(len(cols))
    counts = np.bincount(state_index(trace.states[:, cols]), minlength=1 << len(cols))
    return JointDistribution(tuple(trace.names[c] for c in cols), counts / len(trace))
