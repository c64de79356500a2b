"""Leader election with advice of unbounded valency.

Advice side: the tree is rooted at the elected node (central node, or the
tie-broken endpoint of the central edge).  Each node gets a packed record
(m1, m2, m3, c):

* m1 is 3 at the root and (depth-1) mod 3 elsewhere, so any node can tell
  which neighbor is its parent;
* m2 flags depths that are positive multiples of floor(tau/2);
* m3 flags depths at least ceil(D/2) - tau;
* the c fields of each upward segment between consecutive m2-flagged depths
  concatenate (bottom-up) to the coded port path from a reference node w to
  the root, split into floor(tau/2) pieces of nearly equal length.

Election side: a node that sees the root outputs the visible path; otherwise
it reads one full upward segment from its ball, decodes the coded path, and
splices it onto the visible prefix.  Small regimes short-circuit: D <= 2 or
tau >= ceil(D/2) use the 1-symbol root marker, and tau <= 1 simply hands
every node its own coded path.
"""

from __future__ import annotations

from functools import lru_cache

from .codec import (
    Malformed,
    UnboundedAdviceRecord,
    decode_sequence,
    encode_sequence,
    pack_record,
    unpack_record,
)

# advice strings repeat across the balls of one tree; unpacking is cached
_unpack = lru_cache(maxsize=1 << 16)(unpack_record)
from .tree import (
    AdviceAssignment,
    LabeledBall,
    PortLabeledTree,
    diameter_and_center,
)


def _split_pieces(s: str, parts: int) -> list:
    """Split s into `parts` pieces with lengths differing by at most one.

    The first len(s) % parts pieces take the longer length; when s is shorter
    than `parts`, trailing pieces are empty.
    """
    base, extra = divmod(len(s), parts)
    out = []
    pos = 0
    for i in range(parts):
        ln = base + (1 if i < extra else 0)
        out.append(s[pos : pos + ln])
        pos += ln
    return out


def _root_codes(tree: PortLabeledTree, root: int):
    """parent, depth arrays plus per-node port toward the parent."""
    order, parent, depth = tree.bfs(root)
    port_up = [0] * tree.n
    for v in order:
        if v != root:
            port_up[v] = tree.port_to(v, parent[v])
    return order, parent, depth, port_up


def _path_to_root(v: int, root: int, parent, port_up) -> tuple:
    ports = []
    while v != root:
        ports.append(port_up[v])
        v = parent[v]
    return tuple(ports)


def advice_unbounded(tree: PortLabeledTree, tau: int) -> AdviceAssignment:
    """Advice construction for election in time tau (all tau handled)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    info = diameter_and_center(tree)
    d_half = (info.diameter + 1) // 2
    root = info.root
    if info.diameter <= 2 or tau >= d_half:
        per = {v: "1" if v == root else "0" for v in range(tree.n)}
        return AdviceAssignment(2, per)
    order, parent, depth, port_up = _root_codes(tree, root)
    if tau <= 1:
        per = {}
        for v in range(tree.n):
            code = encode_sequence(_path_to_root(v, root, parent, port_up))
            per[v] = pack_record(UnboundedAdviceRecord(0, 0, 0, code))
        return AdviceAssignment(2, per)

    q = tau // 2
    thresh = d_half - tau  # m3 depth threshold, always >= 1 here
    m1 = [0] * tree.n
    m2 = [0] * tree.n
    m3 = [0] * tree.n
    for v in range(tree.n):
        d = depth[v]
        m1[v] = 3 if v == root else (d - 1) % 3
        m2[v] = 1 if d > 0 and d % q == 0 else 0
        m3[v] = 1 if d >= thresh else 0

    c: dict = {}
    anc_at_thresh: dict = {}  # memo: node -> its ancestor at depth `thresh`
    for u0 in order:
        d = depth[u0]
        if d < 2 * q or d % q:
            continue
        # the segment from u0 up to the node q steps above it
        seg = [u0]
        for _ in range(q):
            seg.append(parent[seg[-1]])
        top = seg[-1]
        if m3[top]:
            w = anc_at_thresh.get(top)
            if w is None:
                w = top
                while depth[w] > thresh:
                    w = parent[w]
                anc_at_thresh[top] = w
        else:
            w = top
        code = encode_sequence(_path_to_root(w, root, parent, port_up))
        for i, piece in enumerate(_split_pieces(code, q), start=1):
            prev = c.setdefault(seg[i], piece)
            if prev != piece:
                raise AssertionError("conflicting segment pieces (bug)")

    per = {}
    for v in range(tree.n):
        rec = UnboundedAdviceRecord(m1[v], m2[v], m3[v], c.get(v, "0"))
        per[v] = pack_record(rec)
    return AdviceAssignment(2, per)


def _find_advice(rec, target: str):
    """Port path from the ball's center to a node carrying `target`, walking
    the canonical record tuples directly (no view materialization)."""
    stack = [(rec, None)]
    while stack:
        node, chain = stack.pop()
        if node[0] == target:
            ports = []
            while chain is not None:
                ports.append(chain[0])
                chain = chain[1]
            ports.reverse()
            return tuple(ports)
        kids = node[2]
        if kids:
            for p, _, sub in kids:
                stack.append((sub, (p, chain)))
    return None


def _find_root_mark(rec):
    """Port path to the node whose packed record has m1 = 3, if visible."""
    stack = [(rec, None)]
    while stack:
        node, chain = stack.pop()
        if _unpack(node[0]).m1 == 3:
            ports = []
            while chain is not None:
                ports.append(chain[0])
                chain = chain[1]
            ports.reverse()
            return tuple(ports)
        kids = node[2]
        if kids:
            for p, _, sub in kids:
                stack.append((sub, (p, chain)))
    return None


def elect_unbounded(ball: LabeledBall, tau: int) -> tuple:
    """Election from a ball produced under advice_unbounded with the same tau.

    Returns the port path from the ball's center to the elected node.  Works
    on the canonical ball records: the ball is rooted at the center, so the
    upward walk toward the root is one descending record path.
    """
    rec = ball.root
    if len(rec[0]) == 1:
        # 1-symbol regime: walk toward the unique node marked 1
        if rec[0] == "1":
            return ()
        path = _find_advice(rec, "1")
        if path is not None:
            return path
        if tau == 0 and rec[1] == 1:
            return (0,)  # leaf of a diameter <= 2 tree
        raise Malformed("size-1 advice but no marked node visible")

    mine = _unpack(rec[0])
    if tau <= 1:
        return decode_sequence(mine.c)

    path = _find_root_mark(rec)
    if path is not None:
        return path
    # upward walk v_0 .. v_tau via the m1 recurrence; in the center-rooted
    # record tree every step of the walk is a child step
    walk = [mine]
    ports = []
    cur = rec
    for _ in range(tau):
        want = (_unpack(cur[0]).m1 - 1) % 3
        nxt = None
        for p, _, sub in cur[2] or ():
            if _unpack(sub[0]).m1 == want:
                nxt = sub
                ports.append(p)
                break
        if nxt is None:
            raise Malformed("upward m1 chain broken")
        walk.append(_unpack(nxt[0]))
        cur = nxt
    q = tau // 2
    j = next(
        (i for i in range(len(walk) - q) if walk[i].m2 and walk[i + q].m2),
        None,
    )
    if j is None:
        raise Malformed("no full upward segment visible")
    coded = "".join(walk[j + i].c for i in range(1, q + 1))
    if walk[j + q].m3 == 0:
        w_idx = j + q
    else:
        w_idx = max(i for i, r in enumerate(walk) if r.m3)
    return tuple(ports[:w_idx]) + decode_sequence(coded)
