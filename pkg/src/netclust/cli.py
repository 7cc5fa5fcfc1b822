"""Command-line front end: ``netclust <command> ...``.

Exit codes: 0 success (or "is AEP"), 1 "not AEP", 2 any error.
The environment variable NETCLUST_TOL overrides the default tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io
from .errors import H2UndefinedError, InputError, IntegrationError
from .graph import DAMPER, SPRING
from .h2 import build_report, reduction_error_formula
from .partition import (DEFAULT_ENUMERATION_CAP, DEFAULT_TOL, check_aep_definition,
                        check_aep_subspace, enumerate_aeps, synthesize_aep_graph)
from .reduction import assemble_first_order, reduce_first_order
from .second_order import assemble_second_order, build_report_second_order, reduce_second_order
from .simulate import Signal, compare, dissipation_residual, integrate

KIND_CHOICES = ("damper", "spring", "all", "joint")


def default_tol() -> float:
    raw = os.environ.get("NETCLUST_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise InputError(f"NETCLUST_TOL={raw!r} is not a number") from None


def _kinds(kind: str):
    return {"damper": [DAMPER], "spring": [SPRING], "all": [None], "joint": [DAMPER, SPRING]}[kind]


def _kind_name(kind):
    return "all" if kind is None else kind


def _load(args, need_partition=False):
    g = io.read_network(args.network)
    part = None
    if getattr(args, "partition", None):
        part = io.read_partition(args.partition, g.n)
    elif need_partition:
        raise InputError("a partition file is required")
    return g, part


def cmd_check_aep(args) -> int:
    g, part = _load(args, need_partition=True)
    tol = args.tol if args.tol is not None else default_tol()
    out, verdict = {}, True
    for kind in _kinds(args.kind):
        d = check_aep_definition(g, part, kind, tol)
        s = check_aep_subspace(g, part, kind, tol)
        out[_kind_name(kind)] = {"definition": d.to_dict(), "subspace": s.to_dict()}
        verdict = verdict and d.verdict and s.verdict
    out["aep"] = verdict
    sys.stdout.write(io.dumps(out))
    return 0 if verdict else 1


def cmd_reduce(args) -> int:
    g, part = _load(args, need_partition=True)
    red = reduce_first_order(g, part)
    mapping = {
        "order": args.order,
        "vertex_to_cell": [int(c) + 1 for c in part.labels],
        "edge_map": [None if j is None else j + 1 for j in red.edge_map],
    }
    network = io.network_to_dict(red.reduced)
    if args.out:
        io.write_json(network, args.out)
    if args.mapping:
        io.write_json(mapping, args.mapping)
    if not args.out:
        sys.stdout.write(io.dumps({"network": network, "mapping": mapping}))
    elif not args.mapping:
        sys.stdout.write(io.dumps(mapping))
    return 0


def cmd_h2(args) -> int:
    g, part = _load(args)
    tol = default_tol()
    if args.order == 1:
        rep = build_report(g, part, oracle=args.oracle, tol=tol)
    else:
        rep = build_report_second_order(g, part, oracle=args.oracle, tol=tol)
    sys.stdout.write(io.dumps(rep.to_dict()))
    return 0


def cmd_enumerate(args) -> int:
    g = io.read_network(args.network)
    tol = default_tol()
    kinds = _kinds(args.kind)
    found = enumerate_aeps(g, kinds[0], tol, max_n=args.max_n)
    for kind in kinds[1:]:
        found = [p for p in found if check_aep_definition(g, p, kind, tol).verdict]
    rows = [{"cells": io.partition_to_dict(p)["cells"], "error_formula": reduction_error_formula(g, p)}
            for p in found]
    rows.sort(key=lambda r: r["error_formula"])     # stable: ties keep canonical order
    sys.stdout.write(io.dumps({"kind": args.kind, "count": len(rows), "partitions": rows}))
    return 0


def _parse_signal(text: str) -> Signal:
    if text == "zero":
        return Signal("zero")
    kind, _, ch = text.partition(":")
    if kind not in ("impulse", "step") or not ch.isdigit() or int(ch) < 1:
        raise InputError(f"--input must be zero, impulse:J or step:J (J >= 1), got {text!r}")
    return Signal(kind, int(ch) - 1)


def cmd_simulate(args) -> int:
    g, part = _load(args)
    signal = _parse_signal(args.input)
    model = assemble_first_order(g) if args.order == 1 else assemble_second_order(g)
    x0 = None
    if args.x0:
        x0 = np.array([float(v) for v in args.x0.split(",")])
    full = integrate(model, signal, x0, args.t_end, args.dt)
    if args.out_csv:
        full.to_csv(args.out_csv)
    summary = {"full": _summary(full, signal)}
    if part is not None:
        if args.order == 1:
            red = reduce_first_order(g, part)
            rmodel = assemble_first_order(red.reduced)
            rx0 = None if x0 is None else red.W.T @ x0
        else:
            rmodel, red = reduce_second_order(g, part)
            rx0 = None
            if x0 is not None:
                q, p = model.split(x0)
                rx0 = np.concatenate([red.channel_alignment(SPRING).T @ q, red.W.T @ p])
        rtraj = integrate(rmodel, signal, rx0, args.t_end, args.dt)
        if args.out_csv_reduced:
            rtraj.to_csv(args.out_csv_reduced)
        summary["reduced"] = _summary(rtraj, signal)
        summary["comparison"] = compare(full, rtraj, red.channel_alignment(DAMPER))
    sys.stdout.write(io.dumps(summary))
    return 0


def _summary(traj, signal):
    out = {
        "signal": traj.signal,
        "steps": len(traj.t) - 1,
        "energy_initial": float(traj.energy[0]),
        "energy_final": float(traj.energy[-1]),
        "output_energy": float(np.trapezoid(np.sum(traj.outputs ** 2, axis=1), traj.t)),
    }
    if signal.kind in ("zero", "impulse"):
        out["dissipation_residual"] = dissipation_residual(traj)
    return out


def cmd_synth(args) -> int:
    spec = io.read_quotient(args.quotient)
    g, part = synthesize_aep_graph(spec)
    network, partition = io.network_to_dict(g), io.partition_to_dict(part)
    if args.out:
        io.write_json(network, args.out)
    if args.out_partition:
        io.write_json(partition, args.out_partition)
    if not (args.out and args.out_partition):
        sys.stdout.write(io.dumps({"network": network, "partition": partition}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netclust", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-aep", help="test a partition for almost equitability")
    p.add_argument("network")
    p.add_argument("partition")
    p.add_argument("--kind", choices=KIND_CHOICES, default="damper")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_check_aep)

    p = sub.add_parser("reduce", help="cluster a network by a partition")
    p.add_argument("network")
    p.add_argument("partition")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--out", help="reduced network file (default: stdout)")
    p.add_argument("--mapping", help="vertex/edge mapping file")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("h2", help="closed-form H2 norms and reduction error")
    p.add_argument("network")
    p.add_argument("partition", nargs="?")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--oracle", action="store_true", help="also compute numerical cross-checks")
    p.set_defaults(func=cmd_h2)

    p = sub.add_parser("enumerate", help="list every AEP, ranked by reduction error")
    p.add_argument("network")
    p.add_argument("--kind", choices=KIND_CHOICES, default="damper")
    p.add_argument("--max-n", type=int, default=DEFAULT_ENUMERATION_CAP)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("simulate", help="RK4 simulation of the full (and reduced) model",
                       description="An impulse on input J is applied as a jump of the "
                                   "initial state by column J of the input matrix.")
    p.add_argument("network")
    p.add_argument("partition", nargs="?")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--input", default="zero", help="zero | impulse:J | step:J")
    p.add_argument("--x0", help="comma-separated initial state")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out-csv")
    p.add_argument("--out-csv-reduced")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", help="build a network with a known AEP from a quotient recipe")
    p.add_argument("quotient")
    p.add_argument("--out")
    p.add_argument("--out-partition")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, H2UndefinedError, IntegrationError, OSError) as exc:
        print(f"netclust {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
