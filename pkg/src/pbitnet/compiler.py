"""Compile conditional probability tables into p-bit biases and couplings.

Every CPT row must satisfy ``I0 * (h + sum_j J_j m_j) = atanh(2P - 1)``.
Zero- and one-parent nodes always have an exact solution.  A two-parent node
has four rows for three unknowns; when they are inconsistent an auxiliary
AND p-bit ``X`` is added and the child gains a fourth weight ``J_iX``.
"""

from __future__ import annotations

import graphlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    BadProbabilityError,
    CycleError,
    DuplicateNodeError,
    IncompleteCptError,
    InputDomainError,
    UnknownParentError,
    UnsupportedArityError,
    ValidationError,
)
from .psl import AUXILIARY, REGULAR, PslNetwork

DEFAULT_EPSILON = 1e-4
CONSISTENCY_TOL = 1e-9
AUX_GAIN = 7.5
AUX_PREFIX = "aux_"

# Parent combinations (m1, m2) in the order of the s, t, u, v table entries.
TWO_PARENT_ROWS = ((1, 1), (-1, 1), (1, -1), (-1, -1))


def combinations(n_parents: int):
    """Parent value tuples in canonical order: ``()``, ``(+1,), (-1,)``, or s, t, u, v."""
    if n_parents == 0:
        return [()]
    if n_parents == 1:
        return [(1,), (-1,)]
    if n_parents == 2:
        return list(TWO_PARENT_ROWS)
    return list(itertools.product((1, -1), repeat=n_parents))


@dataclass(frozen=True)
class CptNode:
    """``table`` maps a tuple of parent values to P(node = +1)."""

    name: str
    parents: tuple = ()
    table: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        table = {tuple(int(v) for v in k): float(p) for k, p in dict(self.table).items()}
        object.__setattr__(self, "table", table)
        if len(self.parents) > 2:
            raise UnsupportedArityError(
                f"{len(self.parents)} parents is not supported (at most 2)", node=self.name)
        if len(set(self.parents)) != len(self.parents):
            raise ValidationError("repeated parent", node=self.name)
        expected = set(combinations(len(self.parents)))
        if set(table) != expected:
            raise IncompleteCptError(
                f"table needs exactly the combinations {sorted(expected)}", node=self.name)
        for k, p in table.items():
            if not (0.0 <= p <= 1.0):
                raise BadProbabilityError(f"probability {p} for {k} outside [0, 1]", node=self.name)

    def prob(self, parent_values) -> float:
        return self.table[tuple(int(v) for v in parent_values)]


@dataclass(frozen=True)
class BayesNet:
    nodes: tuple

    def __post_init__(self):
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        seen = set()
        for node in nodes:
            if node.name in seen:
                raise DuplicateNodeError("duplicate node", node=node.name)
            seen.add(node.name)
        for node in nodes:
            for p in node.parents:
                if p not in seen:
                    raise UnknownParentError(f"unknown parent {p!r}", node=node.name)
        try:
            order = tuple(graphlib.TopologicalSorter({n.name: n.parents for n in nodes}).static_order())
        except graphlib.CycleError as exc:
            raise CycleError(f"cycle through {exc.args[1]}") from exc
        object.__setattr__(self, "_order", order)

    @property
    def names(self) -> tuple:
        return tuple(n.name for n in self.nodes)

    def node(self, name) -> CptNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise InputDomainError(f"unknown node {name!r}")

    def topological_order(self) -> tuple:
        return self._order

    def edges(self) -> set:
        return {(p, n.name) for n in self.nodes for p in n.parents}

    def __eq__(self, other):
        if not isinstance(other, BayesNet):
            return NotImplemented
        return self.nodes == other.nodes


def clamp_probability(p: float, eps: float = DEFAULT_EPSILON) -> float:
    if not (0.0 < eps < 0.5):
        raise InputDomainError(f"epsilon must lie in (0, 0.5), got {eps}")
    if not (0.0 <= p <= 1.0):
        raise InputDomainError(f"probability {p} outside [0, 1]")
    return min(max(p, eps), 1.0 - eps)


def _atanh_2p(p, I0):
    if I0 <= 0:
        raise InputDomainError("I0 must be positive")
    if not (0.0 < p < 1.0):
        raise InputDomainError(f"probability {p} must be clamped away from 0 and 1")
    return math.atanh(2.0 * p - 1.0) / I0


def compile_zero_parent(p: float, I0: float = 1.0) -> float:
    return _atanh_2p(p, I0)


def compile_one_parent(q: float, r: float, I0: float = 1.0):
    """Bias and weight reproducing P(+1 | parent=+1) = q and P(+1 | parent=-1) = r."""
    bq, br = _atanh_2p(q, I0), _atanh_2p(r, I0)
    return (bq + br) / 2.0, (bq - br) / 2.0


@dataclass(frozen=True)
class TwoParentSolution:
    h: float
    J1: float
    J2: float
    J_aux: float | None = None
    residual: float = 0.0

    @property
    def needs_aux(self) -> bool:
        return self.J_aux is not None


def and_column():
    return tuple(1 if (m1 == 1 and m2 == 1) else -1 for m1, m2 in TWO_PARENT_ROWS)


def compile_two_parent(s, t, u, v, I0: float = 1.0, tol: float = CONSISTENCY_TOL) -> TwoParentSolution:
    """Solve the four s, t, u, v rows for (h, J1, J2), adding J_iX if they disagree.

    The rows are orthogonal in (1, m1, m2), so the least-squares solution is
    a set of signed averages; the remaining direction ``b_s - b_t - b_u + b_v``
    is the consistency residual.  The AND column has overlap 2 with that
    direction, which is why the augmented 4x4 system is always invertible.
    """
    b = np.array([_atanh_2p(x, I0) for x in (s, t, u, v)])
    residual = b[0] - b[1] - b[2] + b[3]
    J_aux = None
    if abs(residual) > tol:
        J_aux = residual / 2.0
        b = b - J_aux * np.array(and_column())
    h = (b[0] + b[1] + b[2] + b[3]) / 4.0
    J1 = (b[0] - b[1] + b[2] - b[3]) / 4.0
    J2 = (b[0] + b[1] - b[2] - b[3]) / 4.0
    return TwoParentSolution(float(h), float(J1), float(J2), None if J_aux is None else float(J_aux),
                             float(residual))


def synthesize_and_node(gain: float = AUX_GAIN):
    """(h_X, J_X1, J_X2) so that tanh(h_X + J_X1 m1 + J_X2 m2) ~ AND(m1, m2)."""
    if gain <= 0:
        raise InputDomainError("AND gain must be positive")
    return -gain, gain, gain


@dataclass(frozen=True)
class CompileResult:
    network: PslNetwork
    aux_map: dict
    epsilon: float
    bn: BayesNet

    def clamped_table(self, name) -> dict:
        node = self.bn.node(name)
        return {k: clamp_probability(p, self.epsilon) for k, p in node.table.items()}

    def reconstruct(self, name) -> dict:
        """Reconstructed CPT keyed in the BN's own parent order."""
        return reconstruct_cpt(self.network, name, parents=self.bn.node(name).parents)


def compile_network(bn: BayesNet, I0: float = 1.0, eps: float = DEFAULT_EPSILON,
                    aux_gain: float = AUX_GAIN) -> CompileResult:
    """Translate every CPT; aux nodes are appended after the BN nodes and
    scheduled right before their child."""
    if I0 <= 0:
        raise InputDomainError("I0 must be positive")
    clamp_probability(0.5, eps)
    names = list(bn.names)
    index = {nm: i for i, nm in enumerate(names)}
    h = [0.0] * len(names)
    kind = [REGULAR] * len(names)
    entries = []
    aux_map = {}
    for node in bn.nodes:
        if len(node.parents) > 2:
            raise UnsupportedArityError(f"{len(node.parents)} parents is not supported", node=node.name)
        i = index[node.name]
        tab = {k: clamp_probability(p, eps) for k, p in node.table.items()}
        if not node.parents:
            h[i] = compile_zero_parent(tab[()], I0)
        elif len(node.parents) == 1:
            h[i], J = compile_one_parent(tab[(1,)], tab[(-1,)], I0)
            entries.append((i, index[node.parents[0]], J))
        else:
            sol = compile_two_parent(*(tab[k] for k in TWO_PARENT_ROWS), I0=I0)
            p1, p2 = index[node.parents[0]], index[node.parents[1]]
            h[i] = sol.h
            entries += [(i, p1, sol.J1), (i, p2, sol.J2)]
            if sol.needs_aux:
                x = len(names)
                names.append(AUX_PREFIX + node.name)
                hx, jx1, jx2 = synthesize_and_node(aux_gain)
                h.append(hx / I0)
                kind.append(AUXILIARY)
                entries += [(x, p1, jx1 / I0), (x, p2, jx2 / I0), (i, x, sol.J_aux)]
                aux_map[node.name] = x

    n = len(names)
    rows, cols, vals = zip(*entries) if entries else ((), (), ())
    J = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    order = []
    child_aux = {index[c]: x for c, x in aux_map.items()}
    for name in bn.topological_order():
        i = index[name]
        if i in child_aux:
            order.append(child_aux[i])
        order.append(i)
    net = PslNetwork(names=tuple(names), J=J, h=np.array(h), I0=I0, node_kind=tuple(kind),
                     parent_order=tuple(order))
    return CompileResult(network=net, aux_map=aux_map, epsilon=eps, bn=bn)


def reconstruct_cpt(net: PslNetwork, node, parents=None) -> dict:
    """P(node = +1) for each combination of its regular parents.

    Combinations follow ``parents`` (names or indices) when given, otherwise
    ascending node index.  An auxiliary parent is replaced by its
    deterministic value ``sgn(h_X + J_X1 m1 + J_X2 m2)``.
    """
    i = net.index(node)
    inputs = net.parents(i)
    aux = [p for p in inputs if net.node_kind[p] == AUXILIARY]
    regular = [p for p in inputs if net.node_kind[p] != AUXILIARY]
    if parents is not None:
        wanted = [net.index(p) for p in parents]
        # a parent may carry zero weight, which the sparse matrix does not store
        if not set(regular) <= set(wanted) or len(set(wanted)) != len(wanted):
            raise ValidationError("parent list does not match the compiled couplings", node=net.names[i])
        regular = wanted
    for x in aux:
        if not set(net.parents(x)) <= set(regular):
            raise ValidationError("auxiliary node must be driven by the child's parents", node=net.names[i])
    table = {}
    for combo in combinations(len(regular)):
        m = np.zeros(net.n_nodes)
        m[regular] = combo
        for x in aux:
            arg = net.h[x] + sum(net.weight(x, p) * m[p] for p in net.parents(x))
            m[x] = 1.0 if arg >= 0 else -1.0
        arg = net.I0 * (net.h[i] + sum(net.weight(i, p) * m[p] for p in inputs))
        table[combo] = (1.0 + math.tanh(arg)) / 2.0
    return table
