"""Command-line interface.

Subcommands: verify, project, consistency, join, oracle, dpg-demo, ap.
Every command prints one JSON report to stdout.  Exit codes: 0 on success
or a passing check, 1 on a verification/consistency failure, 2 on
malformed input (the message names the offending field).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io
from .dpg import random_system, system_join
from .errors import DocumentError, OrderViolationError, PqkError
from .almost_periodic import inner_product, limit_equal, promote
from .gaussian import (
    chain_consistency,
    oracle_report,
    project_state,
    trace,
)
from .systems import (
    ASSUMPTION_TITLES,
    OrderEdge,
    check_assumptions,
    compose_witnesses,
)


def _print(report: dict) -> None:
    print(json.dumps(report, sort_keys=True, indent=2))


def _load_system(path: str) -> io.LoadedSystem:
    return io.document_to_system(io.load_json(path))


def _load_state(path: str, system: io.LoadedSystem, expected_label: str | None):
    doc = io.load_json(path)
    label = doc.get("label")
    if not isinstance(label, str) or label not in system.labels:
        raise DocumentError(f"state.label: unknown label {label!r}")
    if expected_label is not None and label != expected_label:
        raise DocumentError(
            f"state.label: state lives on {label!r}, expected {expected_label!r}"
        )
    return io.document_to_state(doc, system.labels[label].dim)


def _require_label(system: io.LoadedSystem, name: str, field: str) -> None:
    if name not in system.labels:
        raise DocumentError(f"{field}: unknown label {name!r}")


def cmd_verify(args) -> int:
    system = _load_system(args.system)
    family = dict(system.labels)
    report = check_assumptions(family, system.order, io.default_probes(system))
    failures = [
        {
            "assumption": inst.assumption,
            "anchor": f"Assumption {inst.assumption} "
            f"({ASSUMPTION_TITLES.get(inst.assumption, 'unlisted check')})",
            "subject": inst.subject,
            "detail": inst.detail,
        }
        for inst in report.failures()
    ]
    out = {
        "command": "verify",
        "passed": report.passed,
        "checked": len(report.instances),
        "instances": [
            {
                "assumption": inst.assumption,
                "subject": inst.subject,
                "passed": inst.passed,
                "detail": inst.detail,
            }
            for inst in report.instances
        ],
        "failures": failures,
    }
    if args.report:
        io.dump_json(out, args.report)
    _print(out)
    return 0 if report.passed else 1


def _witness_for(system: io.LoadedSystem, upper: str, lower: str):
    """Direct witness, or one composed along a path of declared relations."""
    if system.has_relation(upper, lower):
        return system.find_witness(upper, lower)
    frontier = [upper]
    paths = {upper: None}
    while frontier:
        current = frontier.pop(0)
        for edge in system.order:
            if edge.upper != current or edge.lower in paths:
                continue
            paths[edge.lower] = (current, edge.witness)
            if edge.lower == lower:
                witness = None
                node = lower
                while paths[node] is not None:
                    parent, step = paths[node]
                    witness = (
                        step if witness is None else compose_witnesses(step, witness)
                    )
                    node = parent
                return witness
            frontier.append(edge.lower)
    raise OrderViolationError(f"no witnessed relation {upper} >= {lower}")


def cmd_project(args) -> int:
    system = _load_system(args.system)
    _require_label(system, args.src, "--from")
    _require_label(system, args.dest, "--to")
    label, state = _load_state(args.state, system, args.src)
    try:
        witness = _witness_for(system, args.src, args.dest)
        projected = project_state(
            state, system.labels[args.src], system.labels[args.dest], witness
        )
    except OrderViolationError as exc:
        _print(
            {
                "command": "project",
                "passed": False,
                "error": "OrderViolation",
                "detail": str(exc),
            }
        )
        return 1
    io.dump_json(io.state_to_document(projected, args.dest), args.out)
    _print(
        {
            "command": "project",
            "passed": True,
            "from": args.src,
            "to": args.dest,
            "trace_drift": projected.trace_drift,
            "trace": trace(projected),
            "out": args.out,
        }
    )
    return 0


def cmd_consistency(args) -> int:
    system = _load_system(args.system)
    chain = args.chain.split(",")
    if len(chain) != 3:
        raise DocumentError("--chain: expected three comma-separated labels")
    top, mid, bot = chain
    for name in chain:
        _require_label(system, name, "--chain")
    label, state = _load_state(args.state, system, top)
    try:
        report = chain_consistency(
            state,
            system.labels[top],
            system.labels[mid],
            system.labels[bot],
            _witness_for(system, top, mid),
            _witness_for(system, mid, bot),
            _witness_for(system, top, bot),
            tol=args.tol,
        )
    except OrderViolationError as exc:
        _print(
            {
                "command": "consistency",
                "passed": False,
                "error": "OrderViolation",
                "detail": str(exc),
            }
        )
        return 1
    _print(
        {
            "command": "consistency",
            "chain": chain,
            "hs_distance": report.distance,
            "tol": report.tol,
            "passed": report.passed,
        }
    )
    return 0 if report.passed else 1


def cmd_join(args) -> int:
    system = _load_system(args.system)
    names = args.labels.split(",")
    if len(names) != 2:
        raise DocumentError("--labels: expected two comma-separated labels")
    for name in names:
        _require_label(system, name, "--labels")
    a, b = names
    join_name = f"j({a}+{b})"
    if join_name in system.dlabels:
        raise DocumentError(f"--labels: label {join_name!r} already present")
    result = system_join(system.dlabels[a], system.dlabels[b], join_name)

    words = dict(system.words)
    known = {w: eid for eid, w in words.items()}
    counter = len(words)
    for e in result.label.graph.edges:
        if e not in known:
            eid = f"e{counter}"
            while eid in words:
                counter += 1
                eid = f"e{counter}"
            words[eid] = e
            known[e] = eid
            counter += 1

    order = list(system.order)
    order.append(OrderEdge(join_name, a, result.witness_a))
    order.append(OrderEdge(join_name, b, result.witness_b))
    for part, witness in ((a, result.witness_a), (b, result.witness_b)):
        for edge in system.order:
            if edge.upper == part:
                order.append(
                    OrderEdge(
                        join_name,
                        edge.lower,
                        compose_witnesses(witness, edge.witness),
                    )
                )
    seen = set()
    unique = []
    for edge in order:
        if (edge.upper, edge.lower) not in seen:
            seen.add((edge.upper, edge.lower))
            unique.append(edge)

    dlabels = dict(system.dlabels)
    dlabels[join_name] = result.label
    merged = io.LoadedSystem(
        atoms=system.atoms,
        words=words,
        faces={},
        dlabels=dlabels,
        labels={},
        order=tuple(unique),
    )
    io.dump_json(io.system_to_document(merged), args.out)
    _print(
        {
            "command": "join",
            "label": join_name,
            "edges": len(result.label.graph.edges),
            "span_dim": result.span_dim,
            "out": args.out,
        }
    )
    return 0


def cmd_oracle(args) -> int:
    system = _load_system(args.system)
    _require_label(system, args.src, "--from")
    _require_label(system, args.dest, "--to")
    label, state = _load_state(args.state, system, args.src)
    try:
        witness = _witness_for(system, args.src, args.dest)
        report = oracle_report(
            state,
            system.labels[args.src],
            system.labels[args.dest],
            witness,
            grid_points=args.grid,
            extent=args.extent,
        )
    except OrderViolationError as exc:
        _print(
            {
                "command": "oracle",
                "passed": False,
                "error": "OrderViolation",
                "detail": str(exc),
            }
        )
        return 1
    passed = report.max_rel_error <= args.tol
    _print(
        {
            "command": "oracle",
            "from": args.src,
            "to": args.dest,
            "grid": args.grid,
            "extent": args.extent,
            "max_rel_error": report.max_rel_error,
            "tol": args.tol,
            "passed": passed,
        }
    )
    return 0 if passed else 1


def cmd_dpg_demo(args) -> int:
    seed = args.seed
    env_seed = os.environ.get("PQK_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise DocumentError(f"PQK_SEED: not an integer ({env_seed!r})") from exc
    system = random_system(args.edges, args.depth, seed)
    io.dump_json(io.system_to_document(system), args.out)
    _print(
        {
            "command": "dpg-demo",
            "edges": args.edges,
            "depth": args.depth,
            "seed": seed,
            "labels": sorted(system.labels),
            "out": args.out,
        }
    )
    return 0


def cmd_ap(args) -> int:
    docs = [io.load_json(path) for path in args.inputs]
    if args.op == "inner":
        if len(docs) != 2:
            raise DocumentError("--in: inner expects two vector files")
        v, w = (io.document_to_ap(d) for d in docs)
        value = inner_product(v, w)
        _print(
            {
                "command": "ap",
                "op": "inner",
                "value": {"re": io.rat_to_json(value.re), "im": io.rat_to_json(value.im)},
                "value_float": [float(value.re), float(value.im)],
            }
        )
        return 0
    if args.op == "promote":
        if len(docs) != 2:
            raise DocumentError("--in: promote expects a vector and a projection")
        v = io.document_to_ap(docs[0])
        p = io.document_to_projection(docs[1])
        out_vec = promote(v, p)
        report = {
            "command": "ap",
            "op": "promote",
            "result": io.ap_to_document(out_vec),
        }
        if args.out:
            io.dump_json(io.ap_to_document(out_vec), args.out)
            report["out"] = args.out
        _print(report)
        return 0
    if args.op == "limit-equal":
        if len(docs) != 4:
            raise DocumentError(
                "--in: limit-equal expects two vectors and two projections"
            )
        v = io.document_to_ap(docs[0])
        w = io.document_to_ap(docs[1])
        pv = io.document_to_projection(docs[2])
        pw = io.document_to_projection(docs[3])
        equal = limit_equal(v, w, pv, pw)
        _print({"command": "ap", "op": "limit-equal", "passed": equal})
        return 0 if equal else 1
    raise DocumentError(f"--op: unknown operation {args.op!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqk",
        description="Reduced quantum systems: verify, project, and audit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the assumption audit on a system file")
    p.add_argument("system")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("project", help="project a state onto a subsystem")
    p.add_argument("--system", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("consistency", help="check two-path projection agreement")
    p.add_argument("--system", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--chain", required=True, help="top,mid,bottom label ids")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("join", help="add the join of two labels to a system file")
    p.add_argument("--system", required=True)
    p.add_argument("--labels", required=True, help="two comma-separated label ids")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("oracle", help="compare closed-form projection to quadrature")
    p.add_argument("--system", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--from", dest="src", required=True)
    p.add_argument("--to", dest="dest", required=True)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--extent", type=float, default=8.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dpg-demo", help="emit a seeded random DPG system file")
    p.add_argument("--edges", type=int, default=3)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dpg_demo)

    p = sub.add_parser("ap", help="almost-periodic vector operations")
    p.add_argument("--op", required=True, choices=["inner", "promote", "limit-equal"])
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ap)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DocumentError as exc:
        print(json.dumps({"error": "DocumentError", "detail": str(exc)}))
        return 2
    except PqkError as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
