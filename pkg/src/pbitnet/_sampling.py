"""Shared sampling engine for the dimensionless and voltage-domain p-bit networks.

A node's input is ``gain * (bias_i + sum_j w_ij * level * m_j)`` and its output
is ``sgn(2u - 1 + tanh(input))`` with ``u`` uniform on [0, 1).  The PSL network
uses ``gain=I0, level=1``; the circuit uses ``gain=1/V0, level=V_DD/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

SCHEDULER_KEY = 1
NODE_KEY = 0
_CHUNK_STEPS = 1 << 20


class NodeStreams:
    """One root seed split into independent per-node Philox streams.

    Node ``i`` always gets the stream keyed ``(0, i)`` and the async scheduler
    gets ``(1,)``, so adding nodes never reshuffles existing streams.
    """

    def __init__(self, seed: int, n_nodes: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self._nodes = [
            np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed, spawn_key=(NODE_KEY, i))))
            for i in range(n_nodes)
        ]
        self.scheduler = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(self.seed, spawn_key=(SCHEDULER_KEY,)))
        )

    def __len__(self):
        return len(self._nodes)

    def node(self, i: int) -> np.random.Generator:
        return self._nodes[i]

    def pick(self, n: int) -> int:
        return min(int(self.scheduler.random() * n), n - 1)

    def pick_many(self, n: int, size: int) -> np.ndarray:
        return np.minimum((self.scheduler.random(size) * n).astype(np.int64), n - 1)


@dataclass(frozen=True)
class Drive:
    """Flattened parent lists plus the electrical or dimensionless scaling."""

    par_ptr: np.ndarray
    par_idx: np.ndarray
    par_w: np.ndarray
    bias: np.ndarray
    gain: float
    level: float


def update_lists(n, parent_order, children, propagate):
    """Per-choice node update sequences in CSR form.

    Entry ``k < n`` is what a clockless event at node ``k`` touches: ``k``
    alone, or ``k`` followed by its descendants in topological order when the
    outputs settle with zero interconnect delay.  Entry ``n`` is a full sweep.
    """
    rank = np.empty(n, dtype=np.int64)
    rank[list(parent_order)] = np.arange(n)
    lists = []
    for k in range(n):
        if not propagate:
            lists.append([k])
            continue
        seen = {k}
        stack = [k]
        while stack:
            for c in children[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        lists.append(sorted(seen, key=lambda x: rank[x]))
    lists.append(list(parent_order))
    ptr = np.zeros(n + 2, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in lists])
    idx = np.array([i for x in lists for i in x], dtype=np.int64)
    return ptr, idx


@numba.njit(cache=True)
def _kernel(m, choices, upd_ptr, upd_idx, par_ptr, par_idx, par_w, bias, gain, level,
            uniforms, cursor, record_every, out, n_records):
    rec = 0
    for s in range(choices.shape[0]):
        k = choices[s]
        for p in range(upd_ptr[k], upd_ptr[k + 1]):
            i = upd_idx[p]
            acc = bias[i]
            for q in range(par_ptr[i], par_ptr[i + 1]):
                acc += par_w[q] * (level * m[par_idx[q]])
            u = 2.0 * uniforms[i, cursor[i]] - 1.0
            cursor[i] += 1
            m[i] = 1 if u + np.tanh(gain * acc) >= 0.0 else -1
        if (s + 1) % record_every == 0 and rec < n_records:
            out[rec, :] = m
            rec += 1


def sample(drive, upd_ptr, upd_idx, streams, m0, n_records, record_every, sweep):
    """Advance ``m0`` and return ``n_records`` snapshots as an int8 array."""
    n = m0.shape[0]
    m = m0.astype(np.int8).copy()
    out = np.empty((n_records, n), dtype=np.int8)
    per_choice = np.zeros((n + 1, n), dtype=np.int64)
    for k in range(n + 1):
        per_choice[k, upd_idx[upd_ptr[k]:upd_ptr[k + 1]]] = 1
    chunk_records = max(1, _CHUNK_STEPS // (record_every * max(n, 1)))
    done = 0
    while done < n_records:
        nrec = min(chunk_records, n_records - done)
        steps = nrec * record_every
        if sweep:
            choices = np.full(steps, n, dtype=np.int64)
        else:
            choices = streams.pick_many(n, steps)
        counts = np.bincount(choices, minlength=n + 1) @ per_choice
        uniforms = np.zeros((n, max(1, int(counts.max(initial=0)))))
        for i in range(n):
            uniforms[i, :counts[i]] = streams.node(i).random(counts[i])
        cursor = np.zeros(n, dtype=np.int64)
        _kernel(m, choices, upd_ptr, upd_idx, drive.par_ptr, drive.par_idx, drive.par_w,
                drive.bias, float(drive.gain), float(drive.level), uniforms, cursor,
                record_every, out[done:done + nrec], nrec)
        done += nrec
    return out, m
