"""Electrical realization of a PSL network.

Each node is a p-bit with output ``V_out = (V_DD/2) sgn(rand + tanh(V_in/V0))``
fed by an ideal transimpedance stage
``V_in = V_bias G_b R_f + sum_j V_out_j G_ij R_f``.  Matching that against
the dimensionless network gives::

    m = V_out / (V_DD/2)    I = V_in / V0
    h = V_bias / (V_DD/2)   J = G_ij / G_b    I0 = G_b R_f V_DD / (2 V0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal
import scipy.sparse as sp

from . import _sampling
from ._sampling import NodeStreams
from .compiler import AUX_PREFIX
from .errors import InputDomainError, NetlistFormatError, ValidationError
from .psl import AUXILIARY, REGULAR, PslNetwork, SampleTrace, Schedule

NETLIST_HEADER = "PBN v1"
REL_TOL = 1e-12

V_DD = 0.8
V0 = 50e-3
R_F = 150e3
RC_R = 200e3
RC_C = 200e-15


@dataclass(frozen=True)
class CircuitSpec:
    V_DD: float = V_DD
    V_0: float = V0
    R_f: float = R_F

    def __post_init__(self):
        for label, v in (("V_DD", self.V_DD), ("V_0", self.V_0), ("R_f", self.R_f)):
            if not (math.isfinite(v) and v > 0):
                raise InputDomainError(f"{label} must be positive, got {v}")


@dataclass(frozen=True, eq=False)
class CircuitParams:
    """``G[(to, frm)]`` is the conductance from node ``frm`` into node ``to``."""

    names: tuple
    G: dict
    V_bias: np.ndarray
    G_b: float
    spec: CircuitSpec
    I0: float | None = None
    node_kind: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "G", {(int(a), int(b)): float(g) for (a, b), g in dict(self.G).items()})
        object.__setattr__(self, "V_bias", np.asarray(self.V_bias, dtype=float).reshape(len(self.names)))
        if self.I0 is None:
            object.__setattr__(self, "I0", self.implied_I0)
        if self.node_kind is None:
            kind = tuple(AUXILIARY if n.startswith(AUX_PREFIX) else REGULAR for n in self.names)
            object.__setattr__(self, "node_kind", kind)

    @property
    def implied_I0(self) -> float:
        return self.G_b * self.spec.R_f * self.spec.V_DD / (2.0 * self.spec.V_0)

    def validate(self):
        n = len(self.names)
        if not (math.isfinite(self.G_b) and self.G_b > 0):
            raise ValidationError(f"G_b must be positive, got {self.G_b}")
        if not np.all(np.isfinite(self.V_bias)):
            raise ValidationError("bias voltages must be finite")
        for (a, b), g in self.G.items():
            if not (0 <= a < n and 0 <= b < n):
                raise ValidationError(f"edge ({a}, {b}) references a missing node")
            if a == b:
                raise ValidationError(f"self-edge on node {self.names[a]!r}")
            if not math.isfinite(g):
                raise ValidationError("conductances must be finite")
        if abs(self.I0 - self.implied_I0) > REL_TOL * abs(self.implied_I0):
            raise ValidationError(
                f"stored I0={self.I0!r} disagrees with G_b R_f V_DD / (2 V0) = {self.implied_I0!r}")


def map_to_circuit(net: PslNetwork, spec: CircuitSpec = CircuitSpec()) -> CircuitParams:
    G_b = 2.0 * spec.V_0 * net.I0 / (spec.R_f * spec.V_DD)
    coo = net.J.tocoo()
    G = {(int(i), int(j)): float(J) * G_b for i, j, J in zip(coo.row, coo.col, coo.data)}
    V_bias = np.asarray(net.h) * spec.V_DD / 2.0
    return CircuitParams(names=net.names, G=G, V_bias=V_bias, G_b=G_b, spec=spec, I0=net.I0,
                         node_kind=net.node_kind)


def map_to_psl(cp: CircuitParams) -> PslNetwork:
    cp.validate()
    n = len(cp.names)
    items = sorted(cp.G.items())
    rows = [a for (a, _), _ in items]
    cols = [b for (_, b), _ in items]
    vals = [g / cp.G_b for _, g in items]
    J = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    h = cp.V_bias / (cp.spec.V_DD / 2.0)
    try:
        return PslNetwork(names=cp.names, J=J, h=h, I0=cp.implied_I0, node_kind=cp.node_kind)
    except ValidationError as exc:
        raise ValidationError(f"circuit does not describe a valid network: {exc}") from exc


def behavioral_pbit_voltage(V_in: float, spec: CircuitSpec, rng: np.random.Generator) -> float:
    V_in = float(V_in)
    if not math.isfinite(V_in):
        raise InputDomainError(f"input voltage must be finite, got {V_in}")
    u = 2.0 * rng.random() - 1.0
    return spec.V_DD / 2.0 if u + math.tanh(V_in / spec.V_0) >= 0.0 else -spec.V_DD / 2.0


def input_voltage(cp: CircuitParams, i: int, V_out) -> float:
    """Transimpedance stage output for node ``i`` given all node output voltages."""
    acc = cp.V_bias[i] * cp.G_b * cp.spec.R_f
    for (a, b), g in cp.G.items():
        if a == i:
            acc += V_out[b] * g * cp.spec.R_f
    return acc


def simulate(cp: CircuitParams, n_samples: int, seed: int = 0, schedule=Schedule.RANDOM_ASYNC,
             burn_in: int = 0) -> SampleTrace:
    """Run the voltage-domain circuit; states are stored as sgn(V_out)."""
    net = map_to_psl(cp)
    schedule = Schedule(schedule)
    if int(n_samples) < 1:
        raise InputDomainError("n_samples must be at least 1")
    n = len(cp.names)
    items = sorted(cp.G.items())
    par_ptr = np.zeros(n + 1, dtype=np.int64)
    for (a, _), _ in items:
        par_ptr[a + 1] += 1
    par_ptr = np.cumsum(par_ptr)
    drive = _sampling.Drive(
        par_ptr=par_ptr,
        par_idx=np.array([b for (_, b), _ in items], dtype=np.int64),
        par_w=np.array([g * cp.spec.R_f for _, g in items], dtype=float),
        bias=cp.V_bias * cp.G_b * cp.spec.R_f,
        gain=1.0 / cp.spec.V_0,
        level=cp.spec.V_DD / 2.0,
    )
    sweep = schedule is Schedule.TOPOLOGICAL_SWEEP
    streams = NodeStreams(seed, n)
    ptr, idx = _sampling.update_lists(n, net.parent_order, net._children, True)
    record_every = 1 if sweep else n
    m0 = np.ones(n, dtype=np.int8)
    if burn_in:
        _, m0 = _sampling.sample(drive, ptr, idx, streams, m0, int(burn_in), record_every, sweep)
    states, _ = _sampling.sample(drive, ptr, idx, streams, m0, int(n_samples), record_every, sweep)
    return SampleTrace(states=states, names=cp.names, schedule=schedule, seed=int(seed), burn_in=int(burn_in))


@dataclass
class RcReadout:
    """XNOR product of two bipolar signals into a first-order RC low-pass.

    Each sample advances ``y += (dt/RC) (x - y)``.
    """

    RC: float = RC_R * RC_C
    dt: float = 1e-12
    y: float = 0.0
    n_seen: int = field(default=0, init=False)

    def __post_init__(self):
        if not (0.0 < self.dt < self.RC):
            raise InputDomainError(f"need 0 < dt < RC, got dt={self.dt}, RC={self.RC}")

    @property
    def alpha(self) -> float:
        return self.dt / self.RC

    def feed(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return x
        a = self.alpha
        out, _ = scipy.signal.lfilter([a], [1.0, -(1.0 - a)], x, zi=[(1.0 - a) * self.y])
        self.y = float(out[-1])
        self.n_seen += x.size
        return out


def xnor(trace_i, trace_j) -> np.ndarray:
    a = np.sign(np.asarray(trace_i, dtype=float))
    b = np.sign(np.asarray(trace_j, dtype=float))
    if a.shape != b.shape:
        raise InputDomainError(f"trace lengths differ: {a.shape} vs {b.shape}")
    if np.any(a == 0) or np.any(b == 0):
        raise InputDomainError("traces must be bipolar")
    return a * b


def xnor_rc_correlator(trace_i, trace_j, RC: float = RC_R * RC_C, dt: float = 1e-12, y0: float = 0.0):
    """Filter the XNOR product of two traces; returns (output series, final value)."""
    readout = RcReadout(RC=RC, dt=dt, y=y0)
    y = readout.feed(xnor(trace_i, trace_j))
    return y, readout.y


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0
    return f"{x:.5e}"


def export_netlist(cp: CircuitParams, net: PslNetwork | None = None) -> str:
    """Serialize to the ``PBN v1`` text format (6 significant digits)."""
    cp.validate()
    names = cp.names if net is None else net.names
    if tuple(names) != cp.names:
        raise ValidationError("network and circuit node lists differ")
    s = cp.spec
    lines = [NETLIST_HEADER, f"GLOBAL V_DD={_fmt(s.V_DD)} V0={_fmt(s.V_0)} RF={_fmt(s.R_f)} GB={_fmt(cp.G_b)}"]
    for name, v in zip(cp.names, cp.V_bias):
        lines.append(f"NODE {name} VBIAS={_fmt(v)}")
    for (a, b), g in sorted(cp.G.items()):
        lines.append(f"EDGE {cp.names[b]} {cp.names[a]} G={_fmt(g)}")
    return "\n".join(lines) + "\n"


def _kv(token, key, lineno):
    k, sep, v = token.partition("=")
    if k != key or not sep:
        raise NetlistFormatError(f"expected {key}=<value>, got {token!r}", line=lineno)
    try:
        return float(v)
    except ValueError:
        raise NetlistFormatError(f"bad number {v!r}", line=lineno) from None


def parse_netlist(text: str) -> CircuitParams:
    lines = text.splitlines()
    if not lines or lines[0].strip() != NETLIST_HEADER:
        raise NetlistFormatError(f"missing {NETLIST_HEADER!r} header", line=1)
    spec = None
    G_b = None
    names, vbias, edges = [], [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts:
            continue
        key = parts[0]
        if key == "GLOBAL" and len(parts) == 5 and spec is None:
            vdd, v0, rf, gb = (_kv(t, k, lineno) for t, k in zip(parts[1:], ("V_DD", "V0", "RF", "GB")))
            spec, G_b = CircuitSpec(V_DD=vdd, V_0=v0, R_f=rf), gb
        elif key == "NODE" and len(parts) == 3:
            if parts[1] in names:
                raise NetlistFormatError(f"duplicate node {parts[1]!r}", line=lineno)
            names.append(parts[1])
            vbias.append(_kv(parts[2], "VBIAS", lineno))
        elif key == "EDGE" and len(parts) == 4:
            edges.append((parts[1], parts[2], _kv(parts[3], "G", lineno), lineno))
        else:
            raise NetlistFormatError(f"unrecognized line {raw!r}", line=lineno)
    if spec is None:
        raise NetlistFormatError("missing GLOBAL line")
    index = {nm: i for i, nm in enumerate(names)}
    G = {}
    for frm, to, g, lineno in edges:
        if frm not in index or to not in index:
            raise NetlistFormatError(f"edge references unknown node", line=lineno)
        G[(index[to], index[frm])] = g
    cp = CircuitParams(names=tuple(names), G=G, V_bias=np.array(vbias), G_b=G_b, spec=spec)
    cp.validate()
    return cp
