"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Criteria 3 (ratio band) and 6 (beta gap targets) run at their stated
tolerances and fail deliberately against this codebase; the assertion
messages carry the analysis.  Everything else must be green.
"""

import itertools
import math
import random
import time

import pytest

from treelect.bounded import (
    SchemeParams,
    bounded_valency_advice,
    bounded_valency_election,
    election_index,
    solve_betas,
)
from treelect.codec import decode_sequence, encode_sequence, insert_separators
from treelect.families import LineFamilyParams, build_line_family, pigeonhole_check
from treelect.families import GeneralFamilyParams, build_general_family, witness_coloring
from treelect.bounded import colored_map_advice, elect_colored_map
from treelect.harness import random_tree, random_tree_with_diameter
from treelect.tree import (
    BallOracle,
    build_tree,
    diameter_and_center,
    extract_ball,
    follow_path,
)
from treelect.unbounded import advice_unbounded, elect_unbounded


def report(num, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[criterion {num}] {tag} {detail}")
    return ok


# ---------------------------------------------------------------------------


def test_criterion_1_codec_exactness():
    start = time.time()
    ok = encode_sequence((3, 5), 2) == "1111011011"
    for lam in (2, 3, 4, 5):
        for length in range(4):
            for seq in itertools.product(range(5), repeat=length):
                ok &= decode_sequence(encode_sequence(seq, lam), lam) == seq
    rng = random.Random(160)
    for _ in range(4000):
        lam = rng.choice((2, 3, 4, 5))
        seq = tuple(rng.randrange(2**16) for _ in range(rng.randrange(9)))
        ok &= decode_sequence(encode_sequence(seq, lam), lam) == seq
    took = time.time() - start
    assert report(1, ok and took < 10, f"({took:.1f}s)")


def test_criterion_2_unbounded_correctness():
    start = time.time()
    rng = random.Random(20)
    sizes = [2 + int(298 * rng.random() ** 3) for _ in range(1910)]
    sizes += [rng.randint(100, 200) for _ in range(60)]
    sizes += [rng.randint(250, 300) for _ in range(30)]
    failures = 0
    trees = 0
    for n in sizes:
        tree = random_tree(n, rng)
        trees += 1
        info = diameter_and_center(tree)
        for tau in range(0, (info.diameter + 1) // 2 + 1):
            advice = advice_unbounded(tree, tau)
            oracle = BallOracle(tree, advice)
            outputs = {}
            for v in range(tree.n):
                ball = oracle.ball(v, tau)
                out = outputs.get(ball)
                if out is None:
                    out = elect_unbounded(ball, tau)
                    outputs[ball] = out
                try:
                    if follow_path(tree, v, out) != info.root:
                        failures += 1
                except Exception:
                    failures += 1
    took = time.time() - start
    assert report(
        2, failures == 0 and took < 300,
        f"({trees} trees, {failures} failures, {took:.0f}s)",
    )


def test_criterion_3_size_bound_band():
    rng = random.Random(3)
    ratios = {}
    tau0 = {}
    for n in (64, 128, 256, 512):
        for d in (-(-n // 8), -(-n // 4), -(-n // 2)):
            tree = random_tree_with_diameter(n, d, rng)
            for tau in sorted({1, d // 8, d // 4} - {0}):
                if tau >= (d + 1) // 2:
                    continue
                size = advice_unbounded(tree, tau).size
                denom = max(
                    1.0, (d - 2 * tau) / tau * math.log2((n - 2 * tau) / (d - 2 * tau))
                )
                ratios[(n, d, tau)] = size / denom
            tau0[(n, d)] = advice_unbounded(tree, 0).size / (d * math.log2(n / d))
    spread = max(ratios.values()) / min(ratios.values())
    zero_ok = all(0.25 <= r <= 4 for r in tau0.values())
    ok = spread <= 4 and zero_ok
    report(3, ok, f"(tau>0 spread {spread:.2f}x, tau=0 ratios "
                  f"{min(tau0.values()):.2f}..{max(tau0.values()):.2f})")
    assert ok, (
        f"ratio band spread {spread:.2f} exceeds 4: the packed record's "
        "constant 5-symbol header dominates the cells whose normalizer is "
        "~3, while the tau=1 cells sit near 0.56; without the additive "
        "header the spread is ~3.1, so the band target cannot be met."
    )


def pipeline_corpus(seed=4):
    rng = random.Random(seed)
    plan = [1500] * 42 + [2000] * 3 + [2500] * 2 + [3000, 4000, 5000]
    for n in plan:
        d = math.ceil(0.8 * n)
        yield random_tree_with_diameter(n, d, rng)


def test_criterion_4_marker_pipeline():
    start = time.time()
    k = 4
    c = 0.8
    beta2 = solve_betas(c, 2).beta2
    gamma = (k + 1) / (k - 3)
    failures = []
    count = 0
    for tree in pipeline_corpus():
        count += 1
        info = diameter_and_center(tree)
        tau = int(gamma * int(beta2 * info.diameter))
        assert tau >= 149
        params = SchemeParams.for_tree(tree, tau, 2, c, k)
        advice = bounded_valency_advice(tree, tau, 2, c, k)
        if advice.size != 1 or advice.valency > 2:
            failures.append((tree.n, "advice shape"))
            continue
        oracle = BallOracle(tree, advice)
        for v in range(tree.n):
            out = bounded_valency_election(oracle.ball(v, tau), tau, params)
            if follow_path(tree, v, out) != info.root:
                failures.append((tree.n, v))
                break
    took = time.time() - start
    assert report(
        4, not failures and count >= 50 and took < 600,
        f"({count} trees, {len(failures)} failures, {took:.0f}s)",
    )


def test_criterion_5_lemma_assertions():
    # the pipeline raises on any violation of the disjointness or length
    # claims; criterion 4's corpus must never trigger them, and a marker-rich
    # tree (k=8 window geometry) must satisfy the two length bounds directly
    from treelect.bounded import (
        _first_kind_paths,
        _rooted,
        marking,
        coding_payload,
    )

    fired = []
    for tree in itertools.islice(pipeline_corpus(seed=4), 10):
        info = diameter_and_center(tree)
        tau = int((5 / 1) * int(solve_betas(0.8, 2).beta2 * info.diameter))
        try:
            bounded_valency_advice(tree, tau, 2, 0.8, 4)
        except Exception as exc:
            fired.append(str(exc))

    k = 8
    tau = k * (k - 2) * (2 * k + 10) + k + 1
    h = tau + 18
    edges = []
    nxt = 1
    for b in range(2):
        prev = 0
        for depth in range(1, h + 1):
            edges.append((prev, b if prev == 0 else 0, nxt, 1 if depth < h else 0))
            prev = nxt
            nxt += 1
    tree = build_tree(edges)
    params = SchemeParams.for_tree(tree, tau, 2, tree.n and min(0.95, 2 * h / tree.n), k)
    marks = marking(tree, params)
    _, parent, depth, children, port_up, _ = _rooted(tree, params.root)
    length_ok = True
    for path in _first_kind_paths(marks, children, params):
        u = path[0]
        ports = []
        v = u
        while v != params.root:
            ports.append(port_up[v])
            v = parent[v]
        code = encode_sequence(tuple(ports), 2)
        length_ok &= len(code) <= params.tau_prime + 1
        length_ok &= len(insert_separators(code, k)) <= params.capacity
    try:
        coding_payload(tree, marks, params)
    except Exception as exc:
        fired.append(str(exc))
    assert report(5, not fired and length_ok, f"(assertion trips: {fired})")


def test_criterion_6_beta_numerics():
    grid = [i / 100 for i in range(1, 100)]
    max_gap = {}
    all_below = True
    for lam in (2, 3, 4, 5, 6):
        gaps = []
        for c in grid:
            pair = solve_betas(c, lam)
            gaps.append(pair.gap)
            if pair.gap >= 0.125:
                all_below = False
        max_gap[lam] = (max(gaps), grid[gaps.index(max(gaps))])
    mono = all(
        max_gap[a][0] >= max_gap[b][0] - 1e-12 for a, b in zip((2, 3, 4, 5), (3, 4, 5, 6))
    )
    peak, at = max_gap[2]
    headline = abs(peak - 0.1208) <= 0.01 and abs(at - 0.8) <= 0.05
    ok = headline and all_below and mono
    report(6, ok, f"(lam=2 max gap {peak:.4f} at c={at:.2f}; all<1/8: {all_below}; "
                  f"monotone in lam: {mono})")
    assert ok, (
        f"the fixed-point equations give max gap {peak:.4f} at c={at:.2f} and "
        "many grid points above 1/8; the target 0.1208 near c=0.8 is not "
        "attainable from them (beta1 tends to 0 as c approaches 1 while "
        "beta2 stays near 0.45, and the +1 term alone forces beta2 >= 1/3)."
    )


def _oracle_balls_equal(tree, advice, u, v, tau):
    """Definition-level ball equality: lockstep descent by ports."""
    def eq(a, fa, b, fb, t):
        if advice[a] != advice[b] or tree.degree(a) != tree.degree(b):
            return False
        if t == 0:
            return True
        for p in range(tree.degree(a)):
            if p == fa:
                if p != fb:
                    return False
                continue
            if p == fb:
                return False
            wa, wb = tree.nbr[a][p], tree.nbr[b][p]
            qa, qb = tree.port_to(wa, a), tree.port_to(wb, b)
            if t == 1:
                if advice[wa] != advice[wb] or tree.degree(wa) != tree.degree(wb):
                    return False
                if tree.degree(wa) == 1 and qa != qb:
                    return False
            else:
                if qa != qb or not eq(wa, qa, wb, qb, t - 1):
                    return False
        return True

    return eq(u, -1, v, -1, tau)


def _oracle_min_index(tree, lam, tau_max):
    """Independent minimum-election-time search, straight off the definition."""
    n = tree.n
    paths = []
    for leader in range(n):
        order, parent, _ = tree.bfs(leader)
        per = [()] * n
        for v in order[1:]:
            per[v] = (tree.port_to(v, parent[v]),) + per[parent[v]]
        paths.append(per)
    for tau in range(tau_max + 1):
        for colors in itertools.product(range(lam), repeat=n):
            advice = [str(c) for c in colors]
            pairs = [
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if _oracle_balls_equal(tree, advice, u, v, tau)
            ]
            for leader in range(n):
                per = paths[leader]
                if all(per[u] == per[v] for u, v in pairs):
                    ends = {follow_path(tree, v, per[v]) for v in range(n)}
                    if ends == {leader}:
                        return tau
    return None


def _all_shapes(limit):
    """Edge lists of all unlabeled trees with <= limit nodes (AHU-deduped
    Prufer enumeration)."""
    import heapq

    out = {1: [[]], 2: [[(0, 1)]]}
    for n in range(3, limit + 1):
        seen = {}
        for prufer in itertools.product(range(n), repeat=n - 2):
            degs = [1] * n
            for v in prufer:
                degs[v] += 1
            avail = [v for v in range(n) if degs[v] == 1]
            heapq.heapify(avail)
            pairs = []
            for v in prufer:
                leaf = heapq.heappop(avail)
                pairs.append((leaf, v))
                degs[v] -= 1
                if degs[v] == 1:
                    heapq.heappush(avail, v)
            pairs.append((heapq.heappop(avail), heapq.heappop(avail)))
            adj = [[] for _ in range(n)]
            for u, v in pairs:
                adj[u].append(v)
                adj[v].append(u)

            def ahu(v, p):
                return "(" + "".join(sorted(ahu(w, v) for w in adj[v] if w != p)) + ")"

            key = min(ahu(r, -1) for r in range(n))
            if key not in seen:
                seen[key] = pairs
        out[n] = list(seen.values())
    return out


def _ports_for(pairs, n, rng):
    incident = [[] for _ in range(n)]
    for i, (u, v) in enumerate(pairs):
        incident[u].append(i)
        incident[v].append(i)
    ports = [{} for _ in range(len(pairs))]
    for v in range(n):
        ids = list(range(len(incident[v])))
        rng.shuffle(ids)
        for p, e in zip(ids, incident[v]):
            ports[e][v] = p
    return build_tree([(u, ports[i][u], v, ports[i][v]) for i, (u, v) in enumerate(pairs)])


def test_criterion_7_election_index_oracle():
    start = time.time()
    shapes = _all_shapes(8)
    counts = {n: len(shadow) for n, shadow in shapes.items()}
    assert [counts[n] for n in range(1, 9)] == [1, 1, 1, 2, 3, 6, 11, 23]
    rng = random.Random(77)
    agreements = 0
    for n in range(1, 9):
        for pairs in shapes[n]:
            for _ in range(2):
                tree = (
                    build_tree([])
                    if n == 1
                    else _ports_for(pairs, n, rng)
                )
                d_half = (diameter_and_center(tree).diameter + 1) // 2
                mine = election_index(tree, 2, d_half)
                theirs = _oracle_min_index(tree, 2, d_half)
                assert mine is not None and mine.tau == theirs, (n, pairs)
                agreements += 1

    # existence claim: some tree needs more than one round under any binary
    # advice; found by searching a caterpillar family with five same-port
    # leaves (n = 12)
    witness = None
    for bits in itertools.product((0, 1), repeat=5):
        r1, r2, r3, r4, s5 = bits
        rs = [r1, r2, r3, r4]
        edges = []
        for i in range(4):
            pv = s5 if i == 3 else (1 - rs[i + 1])
            edges.append((i, rs[i], i + 1, pv))
        for i in range(5):
            edges.append((i, 2, 5 + i, 0))
        edges.append((0, 1 - r1, 10, 0))
        edges.append((4, 1 - s5, 11, 0))
        tree = build_tree(edges)
        if election_index(tree, 2, 1) is None:
            witness = tree
            break
    took = time.time() - start
    assert report(
        7, witness is not None and took < 900,
        f"({agreements} agreement checks; xi2>1 witness with n=12; {took:.0f}s)",
    )


def test_criterion_8_pigeonhole_witness():
    start = time.time()
    params = LineFamilyParams(12, 4, 1)
    assert params.z >= 5 and (params.diameter + 1) // 2 - params.tau == 1
    family = build_line_family(params)
    w = pigeonhole_check(family, advice_bits=0, lam=2, tau=1)
    ok = w is not None
    if ok:
        ta = family.member(w.descriptor_a, "x")
        tb = family.member(w.descriptor_b, "x")
        ball_a = extract_ball(ta, {v: w.advice_a.get(v, "") for v in range(ta.n)}, w.observer, 1)
        ball_b = extract_ball(tb, {v: w.advice_b.get(v, "") for v in range(tb.n)}, w.observer, 1)
        ok = ball_a == ball_b and w.path_a != w.path_b
    took = time.time() - start
    assert report(8, ok and took < 60, f"({took:.1f}s)")


def test_criterion_9_witness_colorings():
    cases = [
        GeneralFamilyParams(40, 8, 2, 2, 3, 1, "small"),
        GeneralFamilyParams(40, 8, 1, 2, 3, 0, "medium"),
        GeneralFamilyParams(40, 8, 1, 2, 3, 0, "large"),
    ]
    ok = True
    details = []
    for params in cases:
        family = build_general_family(params)
        member = family.member(tuple(2 % params.z for _ in family.x_positions), "x")
        assert params.tau > 2 and member.n <= 2000
        coloring = witness_coloring(family)
        advice = colored_map_advice(member, coloring, params.tau)
        info = diameter_and_center(member)
        oracle = BallOracle(member, advice)
        fails = 0
        for v in range(member.n):
            out = elect_colored_map(oracle.ball(v, params.tau))
            if follow_path(member, v, out) != info.root:
                fails += 1
        ok &= fails == 0 and advice.valency <= params.lam
        details.append(f"{params.regime}: n={member.n} fails={fails}")
    assert report(9, ok, "(" + "; ".join(details) + ")")
