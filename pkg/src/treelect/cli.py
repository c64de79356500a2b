"""Command-line front end: generate trees, build advice, elect, verify.

Exit code 0 means every verification requested by the subcommand passed.
Randomness is always seeded (--seed); thread count comes from the
TREELECT_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import bounded, families, harness, unbounded
from .tree import (
    AdviceAssignment,
    diameter_and_center,
    follow_path,
    read_advice_file,
    read_tree_file,
    write_advice_file,
    write_tree_file,
)


def _load_tree(path):
    with open(path) as fh:
        return read_tree_file(fh)


def _cmd_gen(args) -> int:
    import random

    rng = random.Random(args.seed)
    if args.kind == "random":
        tree = (
            harness.random_tree(args.nodes, rng)
            if args.diameter is None
            else harness.random_tree_with_diameter(args.nodes, args.diameter, rng)
        )
    elif args.kind == "line-family":
        params = families.LineFamilyParams(args.nodes, args.diameter, args.tau)
        fam = families.build_line_family(params)
        tree = fam.member(tuple(args.member), args.side) if args.member else fam.base
    else:  # general-family
        params = families.GeneralFamilyParams(
            args.diameter, args.tau, args.k1, args.k2, args.z, args.z_prime, args.regime
        )
        fam = families.build_general_family(params)
        tree = fam.member(tuple(args.member), args.side) if args.member else fam.base
    with open(args.out, "w") as fh:
        write_tree_file(tree, fh)
    info = diameter_and_center(tree)
    print(f"wrote {tree.n} nodes, diameter {info.diameter}, root {info.root}")
    return 0


def _cmd_advise(args) -> int:
    tree = _load_tree(args.tree)
    if args.scheme == "unbounded":
        advice = unbounded.advice_unbounded(tree, args.tau)
    elif args.scheme == "bounded":
        advice = bounded.bounded_valency_advice(
            tree, args.tau, args.alphabet, args.ratio, args.k
        )
    else:  # colored-map: the ball-distinguishing exhaustive fallback
        advice = bounded.bounded_valency_advice(tree, args.tau, args.alphabet, 0.5)
    with open(args.out, "w") as fh:
        write_advice_file(advice, fh)
    print(f"size {advice.size}, valency {advice.valency}")
    return 0


def _cmd_elect(args) -> int:
    tree = _load_tree(args.tree)
    with open(args.advice) as fh:
        advice = read_advice_file(fh)
    params = None
    if args.scheme == "bounded":
        params = bounded.SchemeParams.for_tree(
            tree, args.tau, args.alphabet, args.ratio, args.k
        )
    outcome = harness.run_election(tree, advice, args.scheme, args.tau, params)
    report = {
        "n": tree.n,
        "elected": outcome.elected,
        "all_simple": outcome.all_simple,
        "common_endpoint": outcome.common_endpoint,
        "equals_root": outcome.equals_root,
        "advice_size": outcome.advice_size,
        "advice_valency": outcome.advice_valency,
        "node_errors": outcome.errors,
        "wall_time": round(outcome.wall_time, 6),
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({**report, "outputs": {v: list(c) for v, c in outcome.outputs.items()}}, fh)
    print(json.dumps(report))
    return 0 if outcome.ok else 1


def _cmd_verify(args) -> int:
    tree = _load_tree(args.tree)
    with open(args.outputs) as fh:
        data = json.load(fh)
    outputs = {int(v): tuple(code) for v, code in data["outputs"].items()}
    all_simple, common, elected = harness.verify_outputs(tree, outputs)
    ok = all_simple and common
    print(json.dumps({"all_simple": all_simple, "common_endpoint": common, "elected": elected}))
    return 0 if ok else 1


def _cmd_xi(args) -> int:
    tree = _load_tree(args.tree)
    if tree.n > args.max_n:
        print(f"refusing: n={tree.n} above --max-n {args.max_n}", file=sys.stderr)
        return 2
    cert = bounded.election_index(tree, args.alphabet, args.tau_max)
    if cert is None:
        print(json.dumps({"found": False, "tau_max": args.tau_max}))
        return 1
    print(json.dumps({"found": True, "tau": cert.tau, "leader": cert.leader}))
    return 0


def _cmd_betas(args) -> int:
    writer = csv.writer(sys.stdout if args.out is None else open(args.out, "w", newline=""))
    writer.writerow(["c", "lambda", "beta1", "beta2", "gap"])
    for i in range(1, args.c_grid + 1):
        c = i / (args.c_grid + 1)
        pair = bounded.solve_betas(c, args.alphabet)
        writer.writerow([f"{c:.6f}", args.alphabet, pair.beta1, pair.beta2, pair.gap])
    return 0


def _cmd_sweep(args) -> int:
    with open(args.spec) as fh:
        raw = json.load(fh)
    spec = harness.SweepSpec(
        scheme=raw.get("scheme", "unbounded"),
        generator=raw.get("generator", "random"),
        sizes=tuple(raw["sizes"]),
        diameters=tuple(raw.get("diameters", ())),
        taus=tuple(raw.get("taus", ())),
        trees_per_cell=raw.get("trees_per_cell", 1),
        seed=raw.get("seed", 0),
        alphabet=raw.get("lambda", 2),
        ratio=raw.get("ratio", 0.8),
    )
    records = harness.sweep(spec)
    with (open(args.out, "w", newline="") if args.out else sys.stdout) as fh:
        harness.write_records_csv(records, fh)
    return 0 if all(r.ok for r in records) else 1


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treelect", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a tree file")
    g.add_argument("kind", choices=["random", "line-family", "general-family"])
    g.add_argument("--nodes", type=int, default=50)
    g.add_argument("--diameter", type=int, default=None)
    g.add_argument("--tau", type=int, default=1)
    g.add_argument("--k1", type=int, default=1)
    g.add_argument("--k2", type=int, default=2)
    g.add_argument("--z", type=int, default=3)
    g.add_argument("--z-prime", type=int, default=0)
    g.add_argument("--regime", default="large")
    g.add_argument("--member", type=int, nargs="*", default=None,
                   help="swap descriptor; omit for the base tree")
    g.add_argument("--side", choices=["x", "y"], default="x")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=_cmd_gen)

    a = sub.add_parser("advise", help="construct advice for a tree")
    a.add_argument("--scheme", choices=list(harness.SCHEMES), required=True)
    a.add_argument("--tree", required=True)
    a.add_argument("--tau", type=int, required=True)
    a.add_argument("--lambda", dest="alphabet", type=int, default=2)
    a.add_argument("--c", dest="ratio", type=float, default=0.8)
    a.add_argument("--k", type=int, default=None)
    a.add_argument("--out", required=True)
    a.set_defaults(fn=_cmd_advise)

    e = sub.add_parser("elect", help="run election and verify the outputs")
    e.add_argument("--scheme", choices=list(harness.SCHEMES), required=True)
    e.add_argument("--tree", required=True)
    e.add_argument("--advice", required=True)
    e.add_argument("--tau", type=int, required=True)
    e.add_argument("--lambda", dest="alphabet", type=int, default=2)
    e.add_argument("--c", dest="ratio", type=float, default=0.8)
    e.add_argument("--k", type=int, default=None)
    e.add_argument("--out", default=None, help="write full outputs as JSON")
    e.set_defaults(fn=_cmd_elect)

    v = sub.add_parser("verify", help="check an outputs file against a tree")
    v.add_argument("--tree", required=True)
    v.add_argument("--outputs", required=True)
    v.set_defaults(fn=_cmd_verify)

    x = sub.add_parser("xi", help="brute-force election index (tiny trees)")
    x.add_argument("--tree", required=True)
    x.add_argument("--lambda", dest="alphabet", type=int, default=2)
    x.add_argument("--tau-max", type=int, default=4)
    x.add_argument("--max-n", type=int, default=12)
    x.set_defaults(fn=_cmd_xi)

    b = sub.add_parser("betas", help="solve the beta fixed points over a c grid")
    b.add_argument("--lambda", dest="alphabet", type=int, default=2)
    b.add_argument("--c-grid", type=int, default=99)
    b.add_argument("--out", default=None)
    b.set_defaults(fn=_cmd_betas)

    s = sub.add_parser("sweep", help="run an experiment grid from a JSON spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=_cmd_sweep)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
