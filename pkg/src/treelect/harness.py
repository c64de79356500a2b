"""Synchronous runner, output verification, measurement, and sweeps.

`run_election` is the LOCAL-model execution: a tau-round run is exactly a
ball-local decision, so the runner extracts every node's radius-tau ball and
hands it to the elector with nothing else.  Verification replays the emitted
port sequences with `follow_path` and checks that all walks are simple and
meet at one node.
"""

from __future__ import annotations

import csv
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

from . import bounded, unbounded
from .tree import (
    AdviceAssignment,
    BallOracle,
    InvalidPort,
    NotSimple,
    PortLabeledTree,
    build_tree,
    diameter_and_center,
    follow_path,
)

SCHEMES = ("unbounded", "bounded", "colored-map")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TREELECT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ElectionOutcome:
    outputs: dict  # node -> PathCode
    errors: dict  # node -> error string, for nodes whose elector failed
    all_simple: bool
    common_endpoint: bool
    equals_root: bool
    elected: Optional[int]
    advice_size: int
    advice_valency: int
    wall_time: float

    @property
    def ok(self) -> bool:
        return self.all_simple and self.common_endpoint and self.equals_root


def _elector(scheme: str, params) -> Callable:
    if scheme == "unbounded":
        return lambda ball, tau: unbounded.elect_unbounded(ball, tau)
    if scheme == "bounded":
        return lambda ball, tau: bounded.bounded_valency_election(ball, tau, params)
    if scheme == "colored-map":
        return lambda ball, tau: bounded.elect_colored_map(ball)
    raise ValueError(f"unknown scheme {scheme!r}; pick one of {SCHEMES}")


def verify_outputs(tree: PortLabeledTree, outputs: dict):
    """(all_simple, common_endpoint, elected-or-None) for per-node paths."""
    endpoints = {}
    all_simple = True
    for v, code in outputs.items():
        try:
            endpoints[v] = follow_path(tree, v, code)
        except (InvalidPort, NotSimple):
            all_simple = False
    if not all_simple or len(endpoints) < tree.n:
        return all_simple, False, None
    ends = set(endpoints.values())
    if len(ends) != 1:
        return True, False, None
    return True, True, ends.pop()


def measure_advice(advice: AdviceAssignment):
    return advice.size, advice.valency


def run_election(
    tree: PortLabeledTree,
    advice: AdviceAssignment,
    elector: str,
    tau: int,
    params=None,
) -> ElectionOutcome:
    start = time.perf_counter()
    fn = _elector(elector, params)
    oracle = BallOracle(tree, advice)
    outputs: dict = {}
    errors: dict = {}

    def one(v: int):
        try:
            return v, tuple(fn(oracle.ball(v, tau), tau)), None
        except Exception as exc:  # a broken node is data, not a crash
            return v, None, f"{type(exc).__name__}: {exc}"

    nthreads = thread_count()
    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(one, range(tree.n)))
    else:
        results = [one(v) for v in range(tree.n)]
    for v, code, err in results:
        if err is None:
            outputs[v] = code
        else:
            errors[v] = err
    if errors:
        all_simple = common = False
        elected = None
    else:
        all_simple, common, elected = verify_outputs(tree, outputs)
    root = diameter_and_center(tree).root
    return ElectionOutcome(
        outputs=outputs,
        errors=errors,
        all_simple=all_simple,
        common_endpoint=common,
        equals_root=(elected == root),
        elected=elected,
        advice_size=advice.size,
        advice_valency=advice.valency,
        wall_time=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# random tree generation


def random_tree(n: int, rng: random.Random) -> PortLabeledTree:
    """Uniform random labeled tree with uniformly shuffled per-node ports."""
    if n < 1:
        raise ValueError("need at least one node")
    if n == 1:
        return PortLabeledTree(1, ((),))
    if n == 2:
        return build_tree([(0, 0, 1, 0)])
    prufer = [rng.randrange(n) for _ in range(n - 2)]
    deg = [1] * n
    for v in prufer:
        deg[v] += 1
    import heapq

    leaves = [v for v in range(n) if deg[v] == 1]
    heapq.heapify(leaves)
    pairs = []
    for v in prufer:
        leaf = heapq.heappop(leaves)
        pairs.append((leaf, v))
        deg[v] -= 1
        if deg[v] == 1:
            heapq.heappush(leaves, v)
    u = heapq.heappop(leaves)
    w = heapq.heappop(leaves)
    pairs.append((u, w))
    return _with_random_ports(n, pairs, rng)


def _with_random_ports(n: int, pairs, rng: random.Random) -> PortLabeledTree:
    incident = [[] for _ in range(n)]
    for i, (u, v) in enumerate(pairs):
        incident[u].append(i)
        incident[v].append(i)
    edge_ports = [{} for _ in range(len(pairs))]
    for v in range(n):
        ports = list(range(len(incident[v])))
        rng.shuffle(ports)
        for p, eidx in zip(ports, incident[v]):
            edge_ports[eidx][v] = p
    edges = [(u, edge_ports[i][u], v, edge_ports[i][v]) for i, (u, v) in enumerate(pairs)]
    return build_tree(edges)


def random_tree_with_diameter(n: int, d: int, rng: random.Random) -> PortLabeledTree:
    """Random tree with exactly n nodes and diameter exactly d.

    A spine of length d is decorated with the remaining nodes; each extra
    node hangs off an existing node whose depth budget keeps the diameter at
    d (distance to both spine ends stays <= d).
    """
    if not 1 <= d <= n - 1:
        raise ValueError("need 1 <= d <= n-1")
    pairs = [(i, i + 1) for i in range(d)]
    # slack[v]: how much deeper a subtree hanging at v may grow
    slack = {v: min(v, d - v) - 1 for v in range(d + 1)}
    candidates = [v for v in range(d + 1) if slack[v] >= 0]
    nxt = d + 1
    while nxt < n:
        host = candidates[rng.randrange(len(candidates))]
        pairs.append((host, nxt))
        slack[nxt] = slack[host] - 1
        if slack[nxt] >= 0:
            candidates.append(nxt)
        nxt += 1
    return _with_random_ports(n, pairs, rng)


# ---------------------------------------------------------------------------
# experiment sweeps


@dataclass
class ExperimentRecord:
    scheme: str
    n: int
    diameter: int
    tau: int
    alphabet: int
    advice_size: int
    valency: int
    ok: bool
    detail: str = ""

    def row(self):
        return [
            self.scheme,
            self.n,
            self.diameter,
            self.tau,
            self.alphabet,
            self.advice_size,
            self.valency,
            int(self.ok),
            self.detail,
        ]


CSV_HEADER = ["scheme", "n", "D", "tau", "lambda", "size", "valency", "pass", "detail"]


@dataclass
class SweepSpec:
    """Grid descriptor: a generator, a scheme, and (n, D, tau) cells."""

    scheme: str = "unbounded"
    generator: str = "random"  # random | spine
    sizes: tuple = ()
    diameters: tuple = ()  # empty: generator's choice
    taus: tuple = ()  # empty: all of 0..ceil(D/2)
    trees_per_cell: int = 1
    seed: int = 0
    alphabet: int = 2
    ratio: float = 0.8  # diameter/n for the bounded scheme's c parameter


def sweep(spec: SweepSpec):
    """Run the grid; per-cell failures are recorded, never raised."""
    rng = random.Random(spec.seed)
    records = []
    for n in spec.sizes:
        dgrid = spec.diameters or (None,)
        for d in dgrid:
            for _ in range(spec.trees_per_cell):
                tree = (
                    random_tree(n, rng)
                    if d is None
                    else random_tree_with_diameter(n, d, rng)
                )
                info = diameter_and_center(tree)
                taus = spec.taus or tuple(range(0, (info.diameter + 1) // 2 + 1))
                for tau in taus:
                    records.append(_run_cell(spec, tree, info.diameter, tau))
    return records


def _run_cell(spec: SweepSpec, tree, diameter, tau) -> ExperimentRecord:
    try:
        if spec.scheme == "unbounded":
            advice = unbounded.advice_unbounded(tree, tau)
            params = None
        elif spec.scheme == "bounded":
            params = bounded.SchemeParams.for_tree(tree, tau, spec.alphabet, spec.ratio)
            advice = bounded.bounded_valency_advice(tree, tau, spec.alphabet, spec.ratio)
        else:
            raise ValueError(f"sweep cannot drive scheme {spec.scheme!r}")
        outcome = run_election(tree, advice, spec.scheme, tau, params)
        return ExperimentRecord(
            spec.scheme,
            tree.n,
            diameter,
            tau,
            spec.alphabet,
            outcome.advice_size,
            outcome.advice_valency,
            outcome.ok,
            "" if outcome.ok else "verification failed",
        )
    except Exception as exc:
        return ExperimentRecord(
            spec.scheme, tree.n, diameter, tau, spec.alphabet, -1, -1, False, str(exc)
        )


def write_records_csv(records, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())
