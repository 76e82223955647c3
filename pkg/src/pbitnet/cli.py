"""Command-line front end.

    pbitnet relatedness --scenario double-cousins --samples 1000000 --seed 7
    pbitnet netlist --bn tree.bn --out tree.pbn
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import circuit, sllg
from .bench import METHODS, relatedness_table
from .bnfile import format_bn, load_bn
from .compiler import DEFAULT_EPSILON, compile_network
from .errors import PbitError
from .family import EPS_ONE_PARENT, EPS_TWO_PARENT, Kind, Scenario, build_family_tree
from .oracle import exact_correlation, exact_joint
from .psl import Schedule, correlation_matrix, run

log = logging.getLogger("pbitnet")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--schedule", choices=[s.value for s in Schedule], default=Schedule.TOPOLOGICAL_SWEEP.value)
    p.add_argument("--scenario", choices=[k.value for k in Kind if k is not Kind.CUSTOM],
                   default=Kind.DOUBLE_COUSINS.value)
    p.add_argument("--epsilon1", type=float, default=EPS_ONE_PARENT, help="one-parent (grandparent link) epsilon")
    p.add_argument("--epsilon2", type=float, default=EPS_TWO_PARENT, help="two-parent (child) epsilon")
    p.add_argument("--bn", type=Path, help="BN description file; overrides --scenario")
    p.add_argument("--I0", type=float, default=1.0)
    p.add_argument("--clamp", type=float, default=DEFAULT_EPSILON, help="probability clamp used when compiling")
    p.add_argument("--out", type=Path, help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="pbitnet", description="Bayesian networks on p-bit circuits")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("compile", parents=[common], help="CPTs to PSL biases and couplings")

    p = sub.add_parser("sample", parents=[common], help="sample the compiled network, report correlations")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--trace", type=Path, help="also write the raw bipolar trace as CSV")
    p.add_argument("--lagged", action="store_true",
                   help="async only: update the chosen node alone, without settling its descendants")

    sub.add_parser("exact", parents=[common], help="exact pairwise correlations by enumeration")

    p = sub.add_parser("relatedness", parents=[common], help="exact / psl / circuit comparison table")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--rc", type=float, default=circuit.RC_R * circuit.RC_C, help="RC time constant, s")
    p.add_argument("--dt", type=float, default=1e-12, help="circuit sample period, s")

    p = sub.add_parser("netlist", parents=[common], help="export the PBN v1 netlist")
    p.add_argument("--vdd", type=float, default=circuit.V_DD)
    p.add_argument("--v0", type=float, default=circuit.V0)
    p.add_argument("--rf", type=float, default=circuit.R_F)

    p = sub.add_parser("device-sweep", parents=[common], help="sLLG p-bit response vs spin current")
    p.add_argument("--i-max", type=float, default=4e-4, help="sweep spans [-i-max, +i-max] amperes")
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--t-avg", type=float, default=1e-6, help="averaging time per point, s")
    p.add_argument("--temperature", type=float, default=300.0)

    p = sub.add_parser("trajectory", parents=[common], help="sLLG magnetization trajectory as CSV")
    p.add_argument("--current", type=float, default=0.0, help="spin current I_S, A")
    p.add_argument("--duration", type=float, default=1e-9)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--temperature", type=float, default=300.0)
    return parser


def _bn(args):
    if args.bn is not None:
        return load_bn(args.bn)
    return build_family_tree(Scenario(args.scenario, args.epsilon1, args.epsilon2))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(args, header, rows) -> str:
    if args.format == "json":
        return json.dumps({"columns": list(header), "rows": [dict(zip(header, r)) for r in rows]}, indent=2) + "\n"
    return _csv(header, rows)


def _pairs(names):
    return [(i, j) for i in range(len(names)) for j in range(i + 1, len(names))]


def cmd_compile(args) -> str:
    res = compile_network(_bn(args), I0=args.I0, eps=args.clamp)
    net = res.network
    coo = net.J.tocoo()
    edges = sorted((int(i), int(j), float(v)) for i, j, v in zip(coo.row, coo.col, coo.data))
    if args.format == "json":
        doc = {
            "I0": net.I0,
            "epsilon": res.epsilon,
            "nodes": [{"name": n, "kind": k, "h": float(h)} for n, k, h in zip(net.names, net.node_kind, net.h)],
            "edges": [{"from": net.names[j], "to": net.names[i], "J": v} for i, j, v in edges],
            "parent_order": [net.names[i] for i in net.parent_order],
            "aux": {c: net.names[x] for c, x in res.aux_map.items()},
        }
        return json.dumps(doc, indent=2) + "\n"
    rows = [("bias", n, "", f"{h:.9g}") for n, h in zip(net.names, net.h)]
    rows += [("coupling", net.names[i], net.names[j], f"{v:.9g}") for i, j, v in edges]
    return _csv(("kind", "node", "source", "value"), rows)


def cmd_sample(args) -> str:
    net = compile_network(_bn(args), I0=args.I0, eps=args.clamp).network
    trace = run(net, args.schedule, args.samples, burn_in=args.burn_in, seed=args.seed, propagate=not args.lagged)
    if args.trace is not None:
        np.savetxt(args.trace, trace.states, fmt="%d", delimiter=",", header=",".join(net.names), comments="")
    c = correlation_matrix(trace)
    names = net.names
    rows = [(names[i], names[j], f"{c[i, j]:.6f}", args.samples, args.seed, args.schedule)
            for i, j in _pairs(names) if net.node_kind[i] == net.node_kind[j] == "regular"]
    return _table(args, ("node_i", "node_j", "correlation", "n", "seed", "schedule"), rows)


def cmd_exact(args) -> str:
    bn = _bn(args)
    d = exact_joint(bn)
    rows = [(d.names[i], d.names[j], f"{exact_correlation(d, i, j):.9f}") for i, j in _pairs(d.names)]
    return _table(args, ("node_i", "node_j", "exact"), rows)


def cmd_relatedness(args) -> str:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report = relatedness_table(_bn(args), methods=methods, n_samples=args.samples, seed=args.seed,
                               schedule=args.schedule, I0=args.I0, eps=args.clamp, RC=args.rc, dt=args.dt,
                               burn_in=args.burn_in)
    for method, secs in report.wall_clock.items():
        log.info("wall-clock %s: %.2f s", method, secs)
    return report.to_json() if args.format == "json" else report.to_csv()


def cmd_netlist(args) -> str:
    net = compile_network(_bn(args), I0=args.I0, eps=args.clamp).network
    cp = circuit.map_to_circuit(net, circuit.CircuitSpec(V_DD=args.vdd, V_0=args.v0, R_f=args.rf))
    return circuit.export_netlist(cp, net)


def cmd_device_sweep(args) -> str:
    params = sllg.MagnetParams(temperature=args.temperature)
    currents = np.linspace(-args.i_max, args.i_max, args.points)
    res = sllg.sigmoid_response(params, currents, T_avg=args.t_avg, seed=args.seed)
    if args.format == "json":
        doc = {
            "columns": ["I_S", "avg_sgn_mz"],
            "rows": [{"I_S": float(i), "avg_sgn_mz": round(float(r), 6)} for i, r in zip(currents, res.response)],
            "I_scale": res.I_scale,
            "r_squared": res.r_squared,
            "low_flip_warning": res.low_flip_warning,
        }
        return json.dumps(doc, indent=2) + "\n"
    return _csv(("I_S", "avg_sgn_mz"), [(f"{i:.6e}", f"{r:.6f}") for i, r in zip(currents, res.response)])


def cmd_trajectory(args) -> str:
    params = sllg.MagnetParams(temperature=args.temperature)
    tr = sllg.run_trajectory(params, args.current, args.duration, seed=args.seed, record_every=args.record_every)
    rows = [(f"{t:.6e}", f"{x:.9f}", f"{y:.9f}", f"{z:.9f}") for t, (x, y, z) in zip(tr.time, tr.m)]
    return _csv(("time_s", "m_x", "m_y", "m_z"), rows)


COMMANDS = {
    "compile": cmd_compile,
    "sample": cmd_sample,
    "exact": cmd_exact,
    "relatedness": cmd_relatedness,
    "netlist": cmd_netlist,
    "device-sweep": cmd_device_sweep,
    "trajectory": cmd_trajectory,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = COMMANDS[args.command](args)
        if args.out is None:
            sys.stdout.write(text)
        else:
            args.out.write_text(text)
    except PbitError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return exc.exit_status
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "E_IO", "message": str(exc)}) + "\n")
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
