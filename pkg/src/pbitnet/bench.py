"""End-to-end relatedness runs: exact oracle vs PSL sampler vs behavioral circuit."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field

from . import circuit
from .compiler import DEFAULT_EPSILON, BayesNet, compile_network
from .errors import InputDomainError
from .oracle import exact_correlation, exact_joint
from .psl import Schedule, correlation, run

log = logging.getLogger(__name__)

METHODS = ("exact", "psl", "circuit")
DEFAULT_PAIRS = (("C1", "C2"), ("C1", "F1"), ("C1", "FF1"), ("F1", "F2"), ("M1", "M2"))
REPORT_COLUMNS = ("pair", "exact", "psl", "circuit", "n", "seed")


def pair_label(a, b) -> str:
    return f"{a}-{b}"


@dataclass
class RunReport:
    pairs: list
    values: dict
    n_samples: int
    seed: int
    schedule: str
    wall_clock: dict = field(default_factory=dict)

    def value(self, method, a, b) -> float:
        return self.values[method][pair_label(a, b)]

    def rows(self) -> list:
        out = []
        for a, b in self.pairs:
            label = pair_label(a, b)
            row = {"pair": label}
            for m in METHODS:
                row[m] = round(self.values[m][label], 6) if m in self.values else None
            row["n"] = self.n_samples
            row["seed"] = self.seed
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in self.rows():
            w.writerow(["" if row[c] is None else (f"{row[c]:.6f}" if c in METHODS else row[c])
                        for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"columns": list(REPORT_COLUMNS), "rows": self.rows()}, indent=2) + "\n"


def relatedness_table(bn: BayesNet, methods=METHODS, n_samples: int = 1_000_000, seed: int = 0,
                      pairs=DEFAULT_PAIRS, schedule=Schedule.TOPOLOGICAL_SWEEP, I0: float = 1.0,
                      eps: float = DEFAULT_EPSILON, spec: circuit.CircuitSpec = circuit.CircuitSpec(),
                      RC: float = circuit.RC_R * circuit.RC_C, dt: float = 1e-12,
                      burn_in: int = 1000) -> RunReport:
    """Pairwise correlations by each requested method.

    ``exact`` enumerates the BN itself, ``psl`` samples the compiled network
    under ``schedule``, and ``circuit`` runs the clockless voltage-domain
    circuit and reads each pair through an XNOR gate and RC filter.
    """
    methods = tuple(methods)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise InputDomainError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
    for a, b in pairs:
        for nm in (a, b):
            if nm not in bn.names:
                raise InputDomainError(f"pair node {nm!r} is not in the network")
    compiled = compile_network(bn, I0=I0, eps=eps)
    values, clock = {}, {}
    for method in METHODS:
        if method not in methods:
            continue
        t0 = time.perf_counter()
        if method == "exact":
            d = exact_joint(bn)
            values[method] = {pair_label(a, b): exact_correlation(d, a, b) for a, b in pairs}
        elif method == "psl":
            trace = run(compiled.network, schedule, n_samples, burn_in=burn_in, seed=seed)
            values[method] = {pair_label(a, b): correlation(trace, a, b) for a, b in pairs}
        else:
            if n_samples * dt < 10 * RC:
                log.warning("circuit run spans %.1f RC time constants; the RC readout has not settled",
                            n_samples * dt / RC)
            cp = circuit.map_to_circuit(compiled.network, spec)
            trace = circuit.simulate(cp, n_samples, seed=seed, schedule=Schedule.RANDOM_ASYNC, burn_in=burn_in)
            values[method] = {
                pair_label(a, b): circuit.xnor_rc_correlator(trace.column(a), trace.column(b), RC=RC, dt=dt)[1]
                for a, b in pairs
            }
        clock[method] = time.perf_counter() - t0
        log.info("%s finished in %.2f s", method, clock[method])
    return RunReport(pairs=list(pairs), values=values, n_samples=int(n_samples), seed=int(seed),
                     schedule=Schedule(schedule).value, wall_clock=clock)
