"""Election with advice of constant valency.

Four layers live here:

* a brute-force computation of the election index: the least time at which
  some advice assignment with at most `lam` distinct strings permits correct
  election (equal balls must get equal outputs, all outputs simple paths to
  one common node);
* the colored-map scheme: every node's advice encodes its own color plus the
  canonical colored map of the whole tree, so a node that can pin down its
  position on the map reads off its path to the root;
* the constant-size marker pipeline for large diameter: five marker types
  written as (2k+9)-node bit patterns, payload pieces between markers that
  concatenate to the coded root path of each segment top, and the matching
  ball-local decoder with the black/red splice;
* the beta_1/beta_2 fixed-point solver behind the large-diameter thresholds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .codec import (
    Malformed,
    decode_count_prefixed,
    decode_sequence,
    encode_sequence,
    insert_separators,
)
from .tree import (
    AdviceAssignment,
    BallOracle,
    LabeledBall,
    PortLabeledTree,
    ball_nodes,
    build_tree,
    diameter_and_center,
)


class InvalidLambda(ValueError):
    pass


class IdentificationFailure(ValueError):
    pass


class Ambiguous(ValueError):
    pass


class OverlapViolation(ValueError):
    pass


class CapacityExceeded(ValueError):
    pass


class NoDistinguishingColoring(ValueError):
    pass


class FallbackTooLarge(ValueError):
    pass


class NoRoot(ValueError):
    pass


# ---------------------------------------------------------------------------
# election index (brute force over colorings; certificate returned)


@dataclass(frozen=True)
class ElectionCertificate:
    tau: int
    coloring: tuple  # color index per node
    leader: int
    outputs: dict  # LabeledBall -> PathCode


def _all_root_paths(tree: PortLabeledTree):
    """paths[leader][v] = port path v -> leader, for every pair."""
    paths = []
    for leader in range(tree.n):
        order, parent, _ = tree.bfs(leader)
        per = [()] * tree.n
        for v in order[1:]:
            per[v] = (tree.port_to(v, parent[v]),) + per[parent[v]]
        paths.append(per)
    return paths


def election_index(tree: PortLabeledTree, lam: int, tau_max: int):
    """Smallest tau <= tau_max admitting lam-valent advice, or None.

    Exhaustive: lam**n colorings per tau, in lexicographic order; the search
    is meant for n <= 12.  Advice content beyond the equality pattern of the
    strings cannot matter, so colorings stand in for concrete strings.
    """
    if lam < 2:
        raise InvalidLambda("valency bound must be at least 2")
    n = tree.n
    paths = _all_root_paths(tree)
    table = [str(i) for i in range(min(lam, 10))]
    if lam > 10:
        raise InvalidLambda("alphabets beyond 10 symbols are not supported")
    for tau in range(tau_max + 1):
        for colors in itertools.product(range(lam), repeat=n):
            advice = {v: table[colors[v]] for v in range(n)}
            oracle = BallOracle(tree, advice)
            balls = [oracle.ball(v, tau) for v in range(n)]
            groups: dict = {}
            for v, b in enumerate(balls):
                groups.setdefault(b, []).append(v)
            members = [g for g in groups.values() if len(g) > 1]
            for leader in range(n):
                per = paths[leader]
                if all(
                    all(per[v] == per[g[0]] for v in g[1:]) for g in members
                ):
                    outputs = {b: per[g[0]] for b, g in groups.items()}
                    return ElectionCertificate(tau, colors, leader, outputs)
    return None


# ---------------------------------------------------------------------------
# colored-map scheme


def _serialize_colored_map(tree: PortLabeledTree, colors, root: int) -> tuple:
    """Canonical integer serialization of the colored port-labeled tree.

    Preorder from the root, children in port order: for each node its color,
    degree and child count, then per child the two ports followed by the
    child's serialization.  Ports make this unique without any search.
    """
    out = []
    stack = [("node", root, None)]
    while stack:
        item = stack.pop()
        if item[0] == "ports":
            out.append(item[1])
            out.append(item[2])
            continue
        _, v, pv = item
        kids = [(p, u) for p, u in enumerate(tree.nbr[v]) if u != pv]
        out.extend((colors[v], tree.degree(v), len(kids)))
        for p, u in reversed(kids):
            stack.append(("node", u, v))
            stack.append(("ports", p, tree.port_to(u, v)))
    return tuple(out)


def _parse_colored_map(seq):
    """Inverse of _serialize_colored_map; returns (tree, colors, root=0)."""
    pos = 0
    edges = []
    colors = []

    def node_block(parent, port_parent, port_here):
        nonlocal pos
        my_id = len(colors)
        colors.append(seq[pos])
        nkids = seq[pos + 2]  # the degree at pos+1 is implied by the edges
        pos += 3
        if parent is not None:
            edges.append((parent, port_parent, my_id, port_here))
        return my_id, nkids

    root_id, nkids = node_block(None, None, None)
    stack = [[root_id, nkids]]
    while stack:
        if stack[-1][1] == 0:
            stack.pop()
            continue
        stack[-1][1] -= 1
        parent = stack[-1][0]
        p, q = seq[pos], seq[pos + 1]
        pos += 2
        child, ck = node_block(parent, p, q)
        stack.append([child, ck])
    if pos != len(seq):
        raise Malformed("trailing data after colored map")
    if len(colors) == 1:
        return PortLabeledTree(1, ((),)), colors, 0
    return build_tree(edges), colors, 0


def colored_map_advice(tree: PortLabeledTree, coloring, tau: int) -> AdviceAssignment:
    """Advice (own color, canonical colored map) for every node.

    The map component is identical everywhere, so the valency equals the
    number of used colors.  Raises IdentificationFailure unless every pair of
    nodes with equal radius-tau balls shares its port path to the root.
    """
    colors = [coloring[v] for v in range(tree.n)]
    lam = max(2, max(colors) + 1)
    info = diameter_and_center(tree)
    serial = _serialize_colored_map(tree, colors, info.root)
    # binary codec regardless of lam: the strings stay decodable ball-locally
    per_color = {c: encode_sequence((c,) + serial, 2) for c in set(colors)}
    per = {v: per_color[colors[v]] for v in range(tree.n)}
    advice = AdviceAssignment(lam, per)
    oracle = BallOracle(tree, advice)
    groups: dict = {}
    for v in range(tree.n):
        groups.setdefault(oracle.ball(v, tau), []).append(v)
    order, parent, _ = tree.bfs(info.root)
    up = [()] * tree.n
    for v in order[1:]:
        up[v] = (tree.port_to(v, parent[v]),) + up[parent[v]]
    for group in groups.values():
        want = up[group[0]]
        for v in group[1:]:
            if up[v] != want:
                raise IdentificationFailure(
                    f"nodes {group[0]} and {v} see equal balls but need "
                    f"different root paths"
                )
    return advice


@lru_cache(maxsize=32)
def _map_analysis(map_advice: str, radius: int):
    """Decoded map plus ball -> root-path table for elect_colored_map."""
    seq = decode_sequence(map_advice)
    serial = tuple(seq[1:])
    tree, colors, root = _parse_colored_map(serial)
    per_color = {c: encode_sequence((c,) + serial, 2) for c in set(colors)}
    advice = {v: per_color[colors[v]] for v in range(tree.n)}
    oracle = BallOracle(tree, advice)
    order, parent, _ = tree.bfs(root)
    up = [()] * tree.n
    for v in order[1:]:
        up[v] = (tree.port_to(v, parent[v]),) + up[parent[v]]
    table: dict = {}
    for v in range(tree.n):
        table.setdefault(oracle.ball(v, radius), set()).add(up[v])
    return table


def elect_colored_map(ball: LabeledBall):
    """Locate the observed ball on the decoded map and output its root path."""
    me = ball.root[0]
    table = _map_analysis(me, ball.radius)
    hit = table.get(ball)
    if hit is None:
        raise Malformed("observed ball matches no position on the map")
    if len(hit) != 1:
        raise Ambiguous("map positions matching this ball disagree on the path")
    return next(iter(hit))


# ---------------------------------------------------------------------------
# beta fixed points


@dataclass(frozen=True)
class BetaPair:
    c: float
    lam: int
    beta1: float
    beta2: float
    residual1: float
    residual2: float
    roots1: int  # number of fixed points found in (0, 1/2)
    roots2: int

    @property
    def gap(self) -> float:
        return self.beta2 - self.beta1


def _roots(fn, grid: int = 20000, tol: float = 1e-12):
    lo, hi = 1e-9, 0.5 - 1e-9
    xs = [lo + (hi - lo) * i / grid for i in range(grid + 1)]
    vals = []
    for x in xs:
        try:
            vals.append(fn(x))
        except (ValueError, ZeroDivisionError):
            vals.append(math.nan)
    roots = []
    for i in range(grid):
        fa, fb = vals[i], vals[i + 1]
        if math.isnan(fa) or math.isnan(fb) or fa * fb > 0:
            continue
        a, b, va = xs[i], xs[i + 1], fa
        for _ in range(200):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            vm = fn(m)
            if vm == 0:
                a = b = m
                break
            if va * vm < 0:
                b = m
            else:
                a, va = m, vm
        roots.append(0.5 * (a + b))
    return roots


def solve_betas(c: float, lam: int) -> BetaPair:
    """Fixed points of the two large-diameter threshold equations.

    beta1 solves  b = (1-2b)/2 * log_lam((1/2 - bc)/(c/2 - bc + eps))
    beta2 solves  b = 2(1/2 - b + 2 eps)(log_lam((1 - c/2 + eps)/(c/2 - bc)) + 1)
    with eps = (1-c)/200.  Bracketing + bisection on (0, 1/2); if several
    fixed points exist the smallest is kept for beta1 and the largest for
    beta2, and the counts are reported.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if lam < 2:
        raise InvalidLambda("lam must be at least 2")
    eps = (1 - c) / 200
    ln_lam = math.log(lam)

    def f1(b):
        num = 0.5 - b * c
        den = c / 2 - b * c + eps
        if num <= 0 or den <= 0:
            raise ValueError
        return (1 - 2 * b) / 2 * (math.log(num / den) / ln_lam) - b

    def f2(b):
        num = 1 - c / 2 + eps
        den = c / 2 - b * c
        if num <= 0 or den <= 0:
            raise ValueError
        return 2 * (0.5 - b + 2 * eps) * (math.log(num / den) / ln_lam + 1) - b

    r1 = _roots(f1)
    r2 = _roots(f2)
    if not r1 or not r2:
        raise NoRoot(f"no fixed point bracketed for c={c}, lam={lam}")
    b1, b2 = min(r1), max(r2)
    return BetaPair(c, lam, b1, b2, abs(f1(b1)), abs(f2(b2)), len(r1), len(r2))


# ---------------------------------------------------------------------------
# scheme parameters


@dataclass(frozen=True)
class SchemeParams:
    lam: int
    tau: int
    c: float
    k: Optional[int]
    tau_prime: int
    root: int
    diameter: int

    @property
    def eps(self) -> float:
        return (1 - self.c) / 200

    @property
    def stride(self) -> int:
        return self.tau // self.k

    @property
    def seg_len(self) -> int:
        """Length of a full segment between green/blue anchors."""
        return (self.k - 2) * self.stride

    @property
    def marker_len(self) -> int:
        return 2 * self.k + 9

    @property
    def piece_len(self) -> int:
        return self.stride - 2 * self.k - 9

    @property
    def capacity(self) -> int:
        return (self.k - 2) * self.piece_len

    @property
    def threshold(self) -> int:
        k = self.k
        return k * (k - 2) * (2 * k + 10) + k + 1

    def pipeline_active(self, n: int) -> bool:
        return (
            self.k is not None
            and self.k > 3
            and self.tau >= self.threshold
            and n >= 200 / (1 - self.c)
        )

    @classmethod
    def for_tree(
        cls,
        tree: PortLabeledTree,
        tau: int,
        lam: int = 2,
        c: float = 0.8,
        k: Optional[int] = None,
    ) -> "SchemeParams":
        info = diameter_and_center(tree)
        tau_prime = int(solve_betas(c, lam).beta2 * info.diameter)
        if k is None and tau_prime >= 1:
            gamma = tau / tau_prime
            if gamma > 1:
                # smallest k > 3 with (k+1)/(k-3) <= gamma
                kk = 4
                while (kk + 1) / (kk - 3) > gamma and kk < 10_000:
                    kk += 1
                k = kk if (kk + 1) / (kk - 3) <= gamma else None
        return cls(lam, tau, c, k, tau_prime, info.root, info.diameter)


# ---------------------------------------------------------------------------
# marking


WHITE, GREEN, BLUE, RED, BLACK = "white", "green", "blue", "red", "black"

_TYPE_CODE = {
    WHITE: "10100",
    GREEN: "10000",
    BLUE: "11000",
    RED: "11100",
    BLACK: "11110",
}


def _rooted(tree: PortLabeledTree, root: int):
    order, parent, depth = tree.bfs(root)
    children = [[] for _ in range(tree.n)]
    for v in order[1:]:
        children[parent[v]].append(v)
    for v in range(tree.n):
        children[v].sort(key=lambda u: tree.port_to(v, u))
    port_up = [0] * tree.n
    for v in order[1:]:
        port_up[v] = tree.port_to(v, parent[v])
    # DFS preorder with children in port order = lexicographic order of
    # root-path port sequences; used as the id-independent tie-break rank
    rank = [0] * tree.n
    idx = 0
    stack = [root]
    while stack:
        v = stack.pop()
        rank[v] = idx
        idx += 1
        stack.extend(reversed(children[v]))
    return order, parent, depth, children, port_up, rank


def marking(tree: PortLabeledTree, params: SchemeParams) -> dict:
    """Marker assignment: white root, green/blue anchors, red/black beacons.

    Ties among deepest pending nodes break by the lexicographically smallest
    root-path port sequence, so the result is independent of node ids.
    """
    import heapq

    root = params.root
    tau, k = params.tau, params.k
    s = params.seg_len
    stride = params.stride
    order, parent, depth, children, port_up, rank = _rooted(tree, root)
    marks: dict = {root: WHITE}
    heap = []
    pending = set()
    for v in range(tree.n):
        if v != root and not children[v]:
            heapq.heappush(heap, (-depth[v], rank[v], v))
            pending.add(v)
    while heap:
        _, _, v = heapq.heappop(heap)
        pending.discard(v)
        if depth[v] <= tau:
            continue  # the white root is an ancestor within tau
        anc = v
        near_anchor = False
        for _ in range(s - 1):
            if anc == root:
                break
            anc = parent[anc]
            if marks.get(anc) in (GREEN, BLUE):
                near_anchor = True
                break
        if near_anchor:
            continue
        u = v
        for _ in range(s):
            u = parent[u]  # depth(v) > tau > s, so this never passes the root
        marks[u] = BLUE
        if children[v]:
            marks[v] = GREEN
        if u not in pending:
            heapq.heappush(heap, (-depth[u], rank[u], u))
            pending.add(u)

    for path in _first_kind_paths(marks, children, params):
        for i in range(1, k - 2):
            w = path[i * stride]
            prev = marks.get(w)
            if prev not in (None, RED):
                raise OverlapViolation(f"red stride position already {prev}")
            marks[w] = RED
    for path in _second_kind_paths(marks, children, params):
        end = len(path) - 1
        for i in range(1, (end // stride) + 1):
            w = path[i * stride]
            if marks.get(w) == RED:
                continue
            if end - i * stride < 2 * k + 10:
                continue
            prev = marks.get(w)
            if prev not in (None, BLACK):
                raise OverlapViolation(f"black stride position already {prev}")
            marks[w] = BLACK
    return marks


def _first_kind_paths(marks: dict, children, params: SchemeParams):
    """Paths of exactly seg_len edges: green/blue top, green or leaf end,
    no anchor strictly inside (all interior marked nodes are red)."""
    s = params.seg_len
    out = []
    for top, mark in list(marks.items()):
        if mark not in (GREEN, BLUE):
            continue
        stack = [[top]]
        while stack:
            path = stack.pop()
            v = path[-1]
            if len(path) == s + 1:
                if marks.get(v) == GREEN or not children[v]:
                    out.append(path)
                continue
            if len(path) > 1 and marks.get(v) in (GREEN, BLUE):
                continue
            for u in children[v]:
                stack.append(path + [u])
    return out


def _second_kind_paths(marks: dict, children, params: SchemeParams):
    """Paths shorter than seg_len: green/blue top, blue or leaf end, no
    green/blue strictly inside (an inner anchor owns its own territory)."""
    s = params.seg_len
    out = []
    for top, mark in list(marks.items()):
        if mark not in (GREEN, BLUE):
            continue
        stack = [[top]]
        while stack:
            path = stack.pop()
            v = path[-1]
            if len(path) > 1 and marks.get(v) == BLUE:
                if len(path) <= s:
                    out.append(path)
                continue
            if len(path) > 1 and marks.get(v) == GREEN:
                continue
            if len(path) == s + 1:
                continue
            if not children[v]:
                if 1 < len(path) <= s:
                    out.append(path)
                continue
            for u in children[v]:
                stack.append(path + [u])
    return out


# ---------------------------------------------------------------------------
# marker bit patterns


def marker_pattern(kind: str, k: int) -> str:
    return "0" + "1" * (k + 1) + _TYPE_CODE[kind] + "1" * (k + 1) + "0"


def detect_marker(window, k: int):
    """(kind, 'start'|'end') if the 2k+9 symbols form a marker, else None.

    'start' means the window's first symbol is the root-ward end (the window
    reads in written order); 'end' means the window is reversed.
    """
    s = "".join(window)
    if len(s) != 2 * k + 9:
        return None
    for kind in _TYPE_CODE:
        pat = marker_pattern(kind, k)
        if s == pat:
            return kind, "start"
        if s == pat[::-1]:
            return kind, "end"
    return None


def assign_marker_bits(tree: PortLabeledTree, marks: dict, params: SchemeParams):
    """Write each marker's (2k+9)-symbol pattern below its node.

    Returns (bits, owner): per-node single symbols and the marked node each
    written node belongs to.  Overlap between different markers raises
    OverlapViolation (the disjointness claim is asserted, not assumed).
    """
    k = params.k
    mlen = params.marker_len
    root = params.root
    _, parent, depth, children, _, _ = _rooted(tree, root)
    bits: dict = {}
    owner: dict = {}

    def write(node, sym, who):
        old = owner.get(node)
        if old is not None and old != who:
            raise OverlapViolation(f"node {node} claimed by {old} and {who}")
        if node in bits and bits[node] != sym:
            raise OverlapViolation(f"conflicting symbols at node {node}")
        owner[node] = who
        bits[node] = sym

    # white: written from the root down every branch; the symbol depends on
    # the offset only, so branching cannot conflict
    wpat = marker_pattern(WHITE, k)
    stack = [root]
    while stack:
        v = stack.pop()
        if depth[v] <= 2 * k + 8:
            write(v, wpat[depth[v]], ("white", root))
            stack.extend(children[v])

    fpaths = _first_kind_paths(marks, children, params)
    spaths = _second_kind_paths(marks, children, params)
    for path in fpaths:
        for idx, v in enumerate(path):
            kind = marks.get(v)
            if kind in (GREEN, BLUE) and idx == 0 or kind == RED:
                pat = marker_pattern(kind, k)
                if idx + mlen > len(path):
                    raise OverlapViolation("marker does not fit on its path")
                for off in range(mlen):
                    write(path[idx + off], pat[off], (kind, v))
    for path in spaths:
        for idx, v in enumerate(path):
            if marks.get(v) == BLACK and v in _blacks_with_room(path, marks):
                pat = marker_pattern(BLACK, k)
                if idx + mlen > len(path):
                    raise OverlapViolation("black marker does not fit")
                for off in range(mlen):
                    write(path[idx + off], pat[off], (BLACK, v))
    return bits, owner


def _blacks_with_room(path, marks):
    return {v for v in path if marks.get(v) == BLACK}


def coding_payload(
    tree: PortLabeledTree,
    marks: dict,
    params: SchemeParams,
    bits_owner=None,
) -> AdviceAssignment:
    """Full one-symbol-per-node advice: markers, payload pieces, filler.

    Payload of a first-kind path with top u: the separator-protected coding
    of (count, ports of u -> root), zero-padded to (k-2) pieces of piece_len
    symbols, written top-down on the path's non-marker nodes.  A second-kind
    path repeats the tail pieces between its black markers in reversed piece
    order.  Everything else gets symbol 0.
    """
    if bits_owner is None:
        bits_owner = assign_marker_bits(tree, marks, params)
    bits, owner = bits_owner
    k = params.k
    piece = params.piece_len
    cap = params.capacity
    root = params.root
    _, parent, depth, children, port_up, _ = _rooted(tree, root)

    def root_code(u):
        ports = []
        v = u
        while v != root:
            ports.append(port_up[v])
            v = parent[v]
        sigma = tuple(ports)
        bare = insert_separators(encode_sequence(sigma, params.lam), k)
        if len(bare) > cap:
            raise CapacityExceeded(
                f"coded root path of length {len(bare)} exceeds capacity {cap}"
            )
        mine = insert_separators(
            encode_sequence((len(sigma),) + sigma, params.lam), k
        )
        if len(mine) > cap:
            raise CapacityExceeded(
                f"count-prefixed payload of length {len(mine)} exceeds {cap}"
            )
        return mine + "0" * (cap - len(mine))

    payload: dict = {}

    def put(node, sym, why):
        if node in owner:
            raise OverlapViolation(f"payload written into marker node {node}")
        if payload.get(node, sym) != sym:
            raise OverlapViolation(f"conflicting payload at node {node} ({why})")
        payload[node] = sym

    for path in _first_kind_paths(marks, children, params):
        u = path[0]
        s_pad = root_code(u)
        slots = [v for v in path[:-1] if v not in owner]
        if len(slots) != cap:
            raise OverlapViolation(
                f"first-kind path carries {len(slots)} slots, expected {cap}"
            )
        for v, sym in zip(slots, s_pad):
            put(v, sym, "first-kind")
    for path in _second_kind_paths(marks, children, params):
        u = path[0]
        blacks = [i for i, v in enumerate(path) if marks.get(v) == BLACK and v in owner]
        if len(blacks) < 2:
            continue
        s_pad = root_code(u)
        for gap in range(len(blacks) - 1):
            lo = blacks[gap] + params.marker_len
            hi = blacks[gap + 1]
            slots = [v for v in path[lo:hi] if v not in owner]
            if len(slots) != piece:
                raise OverlapViolation(
                    f"black gap carries {len(slots)} slots, expected {piece}"
                )
            pidx = k - 2 - gap  # 1-indexed piece number written in this gap
            chunk = s_pad[(pidx - 1) * piece : pidx * piece]
            for v, sym in zip(slots, chunk):
                put(v, sym, "second-kind")

    per = {}
    for v in range(tree.n):
        per[v] = bits.get(v) or payload.get(v, "0")
    return AdviceAssignment(max(2, params.lam), per)


def write_marker_file(marks: dict, fh) -> None:
    """Line-based '<node id> <marker>' serialization of a MarkerMap."""
    for v in sorted(marks):
        fh.write(f"{v} {marks[v]}\n")


def read_marker_file(fh) -> dict:
    out = {}
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        v, mark = line.split()
        if mark not in _TYPE_CODE:
            raise ValueError(f"unknown marker {mark!r}")
        out[int(v)] = mark
    return out


def write_coloring_file(colors, fh) -> None:
    """Line-based '<node id> <color index>' serialization of a node coloring."""
    for v in sorted(colors):
        fh.write(f"{v} {colors[v]}\n")


def read_coloring_file(fh) -> dict:
    out = {}
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if line:
            v, c = line.split()
            out[int(v)] = int(c)
    return out


# ---------------------------------------------------------------------------
# pipeline decoding (ball side)


def _find_marker_segments(nodes, k: int):
    """All (2k+9)-node chains among ball views whose advice forms a marker.

    Returns a list of (nodes, kind) with nodes ordered root-end first.  Both
    orientations share the run structure 0 1^{k+1} <5 symbols> 1^{k+1} 0, so
    scanning forward from every 0-advice node finds every marker twice and
    the type code fixes the root direction (no type code is a palindrome).
    """
    mlen = 2 * k + 9
    segs = []
    seen = set()
    starts = []
    started = set()
    for nd in nodes:
        if nd.advice != "1":
            continue
        for _, nb in nd.neighbors():
            if nb.advice == "0" and id(nb) not in started:
                started.add(id(nb))
                starts.append(nb)
    for start in starts:
        stack = [(start, [start])]
        while stack:
            cur, chain = stack.pop()
            pos = len(chain)  # next symbol index to fill
            if pos == mlen:
                got = detect_marker([nd.advice for nd in chain], k)
                if got is None:
                    continue
                kind, orient = got
                ordered = chain if orient == "start" else chain[::-1]
                key = (id(ordered[0]), id(ordered[-1]))
                if key not in seen:
                    seen.add(key)
                    segs.append((ordered, kind))
                continue
            if pos <= k + 1 or k + 6 < pos <= 2 * k + 7:
                want = "1"
            elif pos == 2 * k + 8:
                want = "0"
            else:
                want = None  # the five type symbols are free
            for _, nb in cur.neighbors():
                if len(chain) > 1 and nb is chain[-2]:
                    continue
                if want is not None and nb.advice != want:
                    continue
                stack.append((nb, chain + [nb]))
    return segs


def _step(node, port):
    """Neighbor of a ball node through the given port, or None."""
    if node.port_up == port and node.parent is not None:
        return node.parent
    for p, child in node.children:
        if p == port:
            return child
    return None


def _splice(center, u, sigma):
    """Output path from the ball's center given sigma = ports(u -> root).

    Walks sigma from u while it retraces the u-to-center path (ball parent
    links lead to the center); the walk leaves that path at the last common
    node m, and the output is ports(center -> m) + the rest of sigma.
    """
    seq = [u]
    while seq[-1] is not center:
        seq.append(seq[-1].parent)
    j = 0
    idx = 0  # seq[idx] is the current walk position
    while j < len(sigma) and idx + 1 < len(seq):
        if _step(seq[idx], sigma[j]) is not seq[idx + 1]:
            break
        idx += 1
        j += 1
    m = seq[idx]
    return m.path() + tuple(sigma[j:])


def _decode_padded(s_pad: str, params: SchemeParams):
    from .codec import remove_separators

    try:
        stripped = remove_separators(s_pad, params.k)
        return decode_count_prefixed(stripped, params.lam)
    except Malformed:
        return None


def _piece_runs(useg, heads, count, params: SchemeParams, need_end: bool):
    """Payload pieces below a green/blue segment, walking away from the root.

    From the segment's far end, alternately read piece_len payload symbols
    and jump over a red marker, `count` pieces in total.  With need_end the
    run must additionally finish at a green marker head or at a leaf (this
    is the full first-kind path of the decoding's second case).  Returns the
    list of complete piece runs found (each a list of piece strings).
    """
    piece = params.piece_len
    results = []
    stack = [(useg[-1], useg[-2], [])]
    while stack:
        cur, prev, collected = stack.pop()
        if len(collected) == count and not need_end:
            results.append(collected)
            continue
        walks = [(cur, prev, [])]
        while walks:
            node, frm, text = walks.pop()
            if len(text) == piece:
                last_gap = len(collected) == count - 1
                for _, nb in node.neighbors():
                    if nb is frm:
                        continue
                    if need_end and last_gap:
                        is_green_head = any(
                            kind2 == GREEN and seg2[0] is nb
                            for seg2, kind2 in heads.get(id(nb), ())
                        )
                        if is_green_head or (not nb.frontier and nb.degree == 1):
                            results.append(collected + ["".join(text)])
                        continue
                    for seg2, kind2 in heads.get(id(nb), ()):
                        if kind2 == RED and seg2[0] is nb:
                            stack.append(
                                (seg2[-1], seg2[-2], collected + ["".join(text)])
                            )
                continue
            for _, nb in node.neighbors():
                if nb is frm:
                    continue
                walks.append((nb, node, text + [nb.advice]))
    return results


def decode_payload(ball: LabeledBall, params: SchemeParams):
    """Ball-local election for the marker pipeline.

    Case 1: a white marker is visible; output the visible path to its root
    end.  Case 2: a full first-kind path is visible; decode its payload and
    splice.  Case 3: climb to the nearest green/blue ancestor through black
    markers and combine the black gaps (reversed piece order) with the
    leading gaps of the ancestor's red-striped path.
    """
    nodes = ball_nodes(ball)
    try:
        return _decode_payload(nodes, params)
    finally:
        # the view graph is cyclic (parent <-> children); break the cycles
        # so plain reference counting frees it without collector pressure
        for nd in nodes:
            nd.children.clear()
            nd.parent = None


def _decode_payload(nodes, params: SchemeParams):
    k = params.k
    center = nodes[0]
    segs = _find_marker_segments(nodes, k)
    whites = [seg for seg, kind in segs if kind == WHITE]
    if whites:
        best = min(whites, key=lambda seg: seg[0].path())
        return best[0].path()

    heads: dict = {}
    for seg, kind in segs:
        heads.setdefault(id(seg[0]), []).append((seg, kind))
    candidates = [seg for seg, kind in segs if kind in (GREEN, BLUE)]
    candidates.sort(key=lambda seg: seg[0].path())

    for useg in candidates:
        for pieces in _piece_runs(useg, heads, k - 2, params, need_end=True):
            sigma = _decode_padded("".join(pieces), params)
            if sigma is not None:
                return _splice(center, useg[0], sigma)

    for useg in candidates:
        out = _case3(center, useg, heads, params)
        if out is not None:
            return out
    raise Malformed("no marker structure usable from this ball")


def _case3(center, useg, heads, params: SchemeParams):
    k = params.k
    piece = params.piece_len
    u = useg[0]
    path_nodes = [center]  # center .. u, following u's port path in the ball
    for port in u.path():
        nxt = _step(path_nodes[-1], port)
        if nxt is None:
            return None
        path_nodes.append(nxt)
    pos = {id(nd): i for i, nd in enumerate(path_nodes)}
    blacks = []
    for nd in path_nodes[:-1]:
        for seg, kind in heads.get(id(nd), ()):
            if kind != BLACK:
                continue
            tail = pos.get(id(seg[-1]))
            head = pos[id(seg[0])]
            # the marker must point its root end toward u along this path
            if tail is None or head > tail:
                blacks.append(seg)
    if not blacks:
        return None
    blacks.sort(key=lambda seg: -pos[id(seg[0])])  # nearest u first
    h = len(blacks)
    tail_pieces = []
    for gap in range(h - 1):
        a = pos[id(blacks[gap][-1])]  # lower end of the higher marker
        b = pos[id(blacks[gap + 1][0])]  # upper end of the lower marker
        if a <= b:
            return None
        between = path_nodes[b + 1 : a]
        if len(between) != piece:
            return None
        between.reverse()  # top-down: u-ward symbols first
        tail_pieces.append("".join(nd.advice for nd in between))
    runs = _piece_runs(useg, heads, k - h - 1, params, need_end=False)
    if not runs:
        return None
    runs.sort()
    pieces = runs[0] + tail_pieces[::-1]
    if len(pieces) != k - 2:
        return None
    sigma = _decode_padded("".join(pieces), params)
    if sigma is None:
        return None
    return _splice(center, u, sigma)


# ---------------------------------------------------------------------------
# wrappers

FALLBACK_CAP = 12


def bounded_valency_advice(
    tree: PortLabeledTree,
    tau: int,
    lam: int = 2,
    c: float = 0.8,
    k: Optional[int] = None,
) -> AdviceAssignment:
    """Constant-valency advice: marker pipeline when the thresholds hold,
    else exhaustive search for a ball-distinguishing coloring."""
    params = SchemeParams.for_tree(tree, tau, lam, c, k)
    if params.pipeline_active(tree.n):
        marks = marking(tree, params)
        return coding_payload(tree, marks, params)
    if tree.n > FALLBACK_CAP:
        raise FallbackTooLarge(
            f"n={tree.n} exceeds the exhaustive fallback cap {FALLBACK_CAP}"
        )
    for colors in itertools.product(range(lam), repeat=tree.n):
        advice = {v: str(colors[v]) for v in range(tree.n)}
        oracle = BallOracle(tree, advice)
        balls = [oracle.ball(v, tau) for v in range(tree.n)]
        if len(set(balls)) == tree.n:
            return colored_map_advice(tree, list(colors), tau)
    raise NoDistinguishingColoring(
        f"no {lam}-coloring distinguishes all radius-{tau} balls"
    )


def bounded_valency_election(ball: LabeledBall, tau: int, params: SchemeParams):
    """Route to the pipeline decoder or the colored-map elector by the shape
    of the advice (single symbols are the pipeline's)."""
    if len(ball.root[0]) == 1:
        return decode_payload(ball, params)
    return elect_colored_map(ball)
