"""Probabilistic Spin Logic networks: p-bits coupled through a directed synapse.

A p-bit outputs ``m = sgn(rand(-1, 1) + tanh(I))`` and its input is
``I = I0 * (h_i + sum_j J_ij m_j)``.  Networks here are compiled from Bayesian
networks, so the coupling graph is acyclic and one sweep in topological order
draws an exact ancestral sample.
"""

from __future__ import annotations

import enum
import graphlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import _sampling
from ._sampling import NodeStreams  # noqa: F401  (re-exported)
from .errors import InputDomainError, ValidationError

REGULAR = "regular"
AUXILIARY = "auxiliary"


class Schedule(str, enum.Enum):
    TOPOLOGICAL_SWEEP = "sweep"
    RANDOM_ASYNC = "async"


@dataclass(frozen=True, eq=False)
class PslNetwork:
    """Immutable p-bit network. ``J[i, j]`` is the weight from node j into node i."""

    names: tuple
    J: sp.csr_matrix
    h: np.ndarray
    I0: float = 1.0
    node_kind: tuple = None
    parent_order: tuple = None
    _parents: list = field(init=False, repr=False)
    _children: list = field(init=False, repr=False)

    def __post_init__(self):
        names = tuple(str(x) for x in self.names)
        n = len(names)
        if len(set(names)) != n:
            raise ValidationError("node names must be unique")
        J = sp.csr_matrix(self.J, dtype=float) if n else sp.csr_matrix((0, 0))
        if J.shape != (n, n):
            raise ValidationError(f"J has shape {J.shape}, expected {(n, n)}")
        J.eliminate_zeros()
        J.sort_indices()
        h = np.array(self.h, dtype=float).reshape(n)
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(J.data)) and math.isfinite(self.I0)):
            raise ValidationError("network parameters must be finite")
        if self.I0 <= 0:
            raise ValidationError("I0 must be positive")
        if J.diagonal().any():
            raise ValidationError("self-coupling J_ii must be zero")
        kind = tuple(self.node_kind) if self.node_kind is not None else (REGULAR,) * n
        if len(kind) != n or any(k not in (REGULAR, AUXILIARY) for k in kind):
            raise ValidationError("node_kind must tag every node regular or auxiliary")

        parents = [J.indices[J.indptr[i]:J.indptr[i + 1]].tolist() for i in range(n)]
        children = [[] for _ in range(n)]
        for i, ps in enumerate(parents):
            for p in ps:
                children[p].append(i)
        if self.parent_order is None:
            try:
                order = tuple(graphlib.TopologicalSorter({i: ps for i, ps in enumerate(parents)}).static_order())
            except graphlib.CycleError as exc:
                raise ValidationError("coupling graph has a cycle") from exc
        else:
            order = tuple(int(x) for x in self.parent_order)
            if sorted(order) != list(range(n)):
                raise ValidationError("parent_order must be a permutation of the nodes")
            pos = {v: k for k, v in enumerate(order)}
            for i, ps in enumerate(parents):
                if any(pos[p] >= pos[i] for p in ps):
                    raise ValidationError(f"parent_order is not topological at node {names[i]!r}")
        h.setflags(write=False)
        J.data.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "I0", float(self.I0))
        object.__setattr__(self, "node_kind", kind)
        object.__setattr__(self, "parent_order", order)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    def index(self, node) -> int:
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.n_nodes:
                raise InputDomainError(f"node index {node} out of range")
            return int(node)
        try:
            return self.names.index(node)
        except ValueError:
            raise InputDomainError(f"unknown node {node!r}") from None

    def parents(self, node) -> list:
        return list(self._parents[self.index(node)])

    def children(self, node) -> list:
        return list(self._children[self.index(node)])

    def weight(self, to, frm) -> float:
        return float(self.J[self.index(to), self.index(frm)])

    def regular_nodes(self) -> list:
        return [i for i, k in enumerate(self.node_kind) if k == REGULAR]

    def _drive(self) -> _sampling.Drive:
        return _sampling.Drive(
            par_ptr=self.J.indptr.astype(np.int64),
            par_idx=self.J.indices.astype(np.int64),
            par_w=np.asarray(self.J.data, dtype=float),
            bias=np.asarray(self.h, dtype=float),
            gain=self.I0,
            level=1.0,
        )


def _uniform_pm1(rng) -> float:
    return 2.0 * rng.random() - 1.0


def pbit_update(I: float, rng: np.random.Generator) -> int:
    """Draw one p-bit output: +1 with probability (1 + tanh I) / 2."""
    I = float(I)
    if not math.isfinite(I):
        raise InputDomainError(f"p-bit input must be finite, got {I}")
    return 1 if _uniform_pm1(rng) + math.tanh(I) >= 0.0 else -1


def synapse_input(net: PslNetwork, i, s) -> float:
    i = net.index(i)
    m = np.asarray(s)
    lo, hi = net.J.indptr[i], net.J.indptr[i + 1]
    acc = net.h[i] + float(np.dot(net.J.data[lo:hi], m[net.J.indices[lo:hi]]))
    return net.I0 * acc


def _check_state(net, s):
    m = np.array(s, dtype=np.int8).reshape(-1)
    if m.shape[0] != net.n_nodes or not np.all(np.abs(m) == 1):
        raise InputDomainError("state must hold one bipolar value (+1/-1) per node")
    return m


def _as_streams(net, rng):
    if isinstance(rng, NodeStreams):
        return rng
    if isinstance(rng, (int, np.integer)):
        return NodeStreams(int(rng), net.n_nodes)
    raise InputDomainError("rng must be a NodeStreams instance or an integer seed")


def sweep_topological(net: PslNetwork, s, rng) -> np.ndarray:
    """Update every node once, parents before children."""
    streams = _as_streams(net, rng)
    m = _check_state(net, s)
    for i in net.parent_order:
        m[i] = pbit_update(synapse_input(net, i, m), streams.node(i))
    return m


def step_async(net: PslNetwork, s, rng, *, propagate: bool = True) -> np.ndarray:
    """One clockless event: a uniformly chosen node redraws its output.

    With ``propagate`` the node's descendants respond before the next event,
    i.e. interconnect delays are negligible next to the p-bit fluctuation
    time.  ``propagate=False`` updates the chosen node alone, which lets
    children lag behind their parents.
    """
    streams = _as_streams(net, rng)
    m = _check_state(net, s)
    k = streams.pick(net.n_nodes)
    if propagate:
        ptr, idx = _sampling.update_lists(net.n_nodes, net.parent_order, net._children, True)
        targets = idx[ptr[k]:ptr[k + 1]]
    else:
        targets = [k]
    for i in targets:
        m[i] = pbit_update(synapse_input(net, i, m), streams.node(i))
    return m


@dataclass(frozen=True, eq=False)
class SampleTrace:
    states: np.ndarray
    names: tuple
    schedule: Schedule
    seed: int
    burn_in: int
    propagate: bool = True

    def __len__(self):
        return self.states.shape[0]

    def index(self, node) -> int:
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < len(self.names):
                raise InputDomainError(f"node index {node} out of range")
            return int(node)
        try:
            return self.names.index(node)
        except ValueError:
            raise InputDomainError(f"unknown node {node!r}") from None

    def column(self, node) -> np.ndarray:
        return self.states[:, self.index(node)]

    def to_bytes(self) -> bytes:
        return self.states.tobytes()


def run(net: PslNetwork, schedule=Schedule.TOPOLOGICAL_SWEEP, n_samples: int = 1, burn_in: int = 0,
        seed: int = 0, *, propagate: bool = True, initial: Sequence[int] | None = None) -> SampleTrace:
    """Sample the network.

    One snapshot is recorded per full sweep, or per ``n_nodes`` asynchronous
    events, so counts are comparable between schedules.
    """
    schedule = Schedule(schedule)
    if int(n_samples) < 1:
        raise InputDomainError("n_samples must be at least 1")
    if int(burn_in) < 0:
        raise InputDomainError("burn_in must be non-negative")
    n = net.n_nodes
    if n == 0:
        raise InputDomainError("cannot sample an empty network")
    streams = NodeStreams(seed, n)
    sweep = schedule is Schedule.TOPOLOGICAL_SWEEP
    ptr, idx = _sampling.update_lists(n, net.parent_order, net._children, propagate or sweep)
    record_every = 1 if sweep else n
    m0 = np.ones(n, dtype=np.int8) if initial is None else _check_state(net, initial)
    drive = net._drive()
    if burn_in:
        _, m0 = _sampling.sample(drive, ptr, idx, streams, m0, int(burn_in), record_every, sweep)
    states, _ = _sampling.sample(drive, ptr, idx, streams, m0, int(n_samples), record_every, sweep)
    return SampleTrace(states=states, names=net.names, schedule=schedule, seed=int(seed),
                       burn_in=int(burn_in), propagate=propagate)


def correlation(trace: SampleTrace, i, j) -> float:
    """Time-averaged product of two bipolar node outputs."""
    if len(trace) == 0:
        raise InputDomainError("correlation of an empty trace")
    a = trace.column(i).astype(np.int64)
    b = trace.column(j).astype(np.int64)
    return float(np.dot(a, b)) / len(trace)


def correlation_matrix(trace: SampleTrace) -> np.ndarray:
    if len(trace) == 0:
        raise InputDomainError("correlation of an empty trace")
    x = trace.states.astype(np.float64)
    return (x.T @ x) / len(trace)
