"""Port-labeled anonymous trees and labeled balls.

The tree model: nodes carry no identifiers visible to algorithms; every node
numbers its incident edges with local ports 0..d-1, and the two endpoints of
an edge carry unrelated port numbers.  Integer node ids exist only so the
oracle side (advice construction, verification) can address nodes; everything
an election algorithm consumes is a `LabeledBall`, which is id-free.

A labeled ball of radius tau around v is the port-labeled subtree induced by
the nodes at distance <= tau, each labeled with its advice string, plus the
degrees of the nodes at distance exactly tau.  Canonical form: every ball
node is a tuple ``(advice, degree, children)`` where children is a tuple of
``(port_here, port_at_child, child)`` sorted by ``port_here``.  For a
frontier node (distance exactly tau) children is ``None`` and the connecting
edge's far-end port is hidden -- with one normalization: a degree-1 frontier
node hides nothing (its only port is necessarily 0), so it is represented
exactly like a fully explored leaf.  Two balls are equal iff their radii and
canonical forms are equal; ports totally order children, so no isomorphism
search is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence


class TreeError(ValueError):
    """Base class for tree construction/usage errors."""


class DuplicatePort(TreeError):
    pass


class PortGap(TreeError):
    """Some node's ports are not exactly {0..d-1}."""


class NotATree(TreeError):
    pass


class AsymmetricEdge(TreeError):
    pass


class InvalidPort(TreeError):
    pass


class NotSimple(TreeError):
    pass


class RadiusMismatch(TreeError):
    pass


PathCode = tuple  # sequence of outgoing port numbers


@dataclass(frozen=True)
class PortLabeledTree:
    """Validated port-labeled tree.

    ``nbr[v][p]`` is the neighbor reached from v through port p; because the
    ports at v are exactly 0..deg(v)-1, indexing by port is total.
    """

    n: int
    nbr: tuple

    @property
    def node_count(self) -> int:
        return self.n

    def degree(self, v: int) -> int:
        return len(self.nbr[v])

    def neighbors(self, v: int):
        return self.nbr[v]

    def port_to(self, u: int, v: int) -> int:
        """Port at u of the edge (u, v); raises if not adjacent."""
        for p, w in enumerate(self.nbr[u]):
            if w == v:
                return p
        raise InvalidPort(f"{u} and {v} are not adjacent")

    def edges(self) -> Iterator[tuple]:
        for u in range(self.n):
            for p, v in enumerate(self.nbr[u]):
                if u < v:
                    yield (u, p, v, self.port_to(v, u))

    def bfs(self, root: int):
        """Return (order, parent, depth) arrays for the tree rooted at root."""
        parent = [-1] * self.n
        depth = [0] * self.n
        order = [root]
        seen = [False] * self.n
        seen[root] = True
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            for v in self.nbr[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    depth[v] = depth[u] + 1
                    order.append(v)
        return order, parent, depth


def build_tree(edge_list: Iterable) -> PortLabeledTree:
    """Build and validate a tree from (u, port_u, v, port_v) tuples."""
    edges = list(edge_list)
    ids = set()
    for u, pu, v, pv in edges:
        ids.add(u)
        ids.add(v)
    n = (max(ids) + 1) if ids else 1
    if ids and (min(ids) < 0 or ids != set(range(n))):
        raise NotATree(f"node ids must be 0..{n - 1} with no gaps")
    if len(edges) != n - 1:
        raise NotATree(f"{len(edges)} edges for {n} nodes")
    ports: list = [dict() for _ in range(n)]
    for u, pu, v, pv in edges:
        if u == v:
            raise NotATree(f"self-loop at {u}")
        for a, pa, b in ((u, pu, v), (v, pv, u)):
            if pa < 0:
                raise InvalidPort(f"negative port {pa} at node {a}")
            if pa in ports[a]:
                raise DuplicatePort(f"port {pa} used twice at node {a}")
            ports[a][pa] = b
    nbr = []
    for v in range(n):
        d = len(ports[v])
        if set(ports[v]) != set(range(d)):
            raise PortGap(f"ports at node {v} are {sorted(ports[v])}, not 0..{d - 1}")
        nbr.append(tuple(ports[v][p] for p in range(d)))
    # connectivity: n-1 symmetric edges without duplicates + all reached
    tree = PortLabeledTree(n, tuple(nbr))
    order, _, _ = tree.bfs(0)
    if len(order) != n:
        raise NotATree("graph is not connected")
    return tree


def relabel(tree: PortLabeledTree, perm: Sequence) -> PortLabeledTree:
    """New tree with node ids permuted (perm[old] = new); ports unchanged."""
    nbr: list = [None] * tree.n
    for v in range(tree.n):
        nbr[perm[v]] = tuple(perm[u] for u in tree.nbr[v])
    return PortLabeledTree(tree.n, tuple(nbr))


# ---------------------------------------------------------------------------
# advice assignments


@dataclass(frozen=True)
class AdviceAssignment:
    """Mapping node -> string over the digits 0..alphabet_size-1.

    `size` and `valency` are recomputed on access, never cached, so they can
    not go stale relative to `per_node`.
    """

    alphabet_size: int
    per_node: dict

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("advice alphabet needs at least two symbols")
        for v, s in self.per_node.items():
            for ch in s:
                if not ("0" <= ch <= "9") or int(ch) >= self.alphabet_size:
                    raise ValueError(f"symbol {ch!r} at node {v} outside alphabet")

    def __getitem__(self, v: int) -> str:
        return self.per_node[v]

    @property
    def size(self) -> int:
        return max((len(s) for s in self.per_node.values()), default=0)

    @property
    def valency(self) -> int:
        return len(set(self.per_node.values()))


# ---------------------------------------------------------------------------
# distances, center, paths


@dataclass(frozen=True)
class CenterInfo:
    diameter: int
    center: tuple  # (v,) for even diameter, (u, v) for the central edge
    root: int


def _farthest(tree: PortLabeledTree, src: int):
    order, parent, depth = tree.bfs(src)
    far = max(order, key=lambda v: (depth[v], v))
    return far, parent, depth


def _ball_key(rec) -> tuple:
    """Flatten a canonical ball record into a tuple of strings (comparable)."""
    out = []

    def emit(r):
        adv, deg, children = r
        out.append(adv)
        out.append(str(deg))
        if children is None:
            out.append("#")
            return
        out.append(str(len(children)))
        for p, q, child in children:
            out.append(str(p))
            out.append("?" if q is None else str(q))
            emit(child)

    emit(rec)
    return tuple(out)


def diameter_and_center(tree: PortLabeledTree) -> CenterInfo:
    """Diameter, central node/edge, and the root the schemes elect.

    For odd diameter the root is the endpoint of the central edge whose
    radius-1 ball under empty advice has the lexicographically smaller
    canonical serialization, falling back to the endpoint with the smaller
    port on the central edge (and, between automorphic endpoints, the
    smaller id -- observationally irrelevant).
    """
    if tree.n == 1:
        return CenterInfo(0, (0,), 0)
    a, _, _ = _farthest(tree, 0)
    b, parent, depth = _farthest(tree, a)
    d = depth[b]
    path = [b]
    while path[-1] != a:
        path.append(parent[path[-1]])
    # path runs b .. a and has d+1 nodes
    if d % 2 == 0:
        c = path[d // 2]
        return CenterInfo(d, (c,), c)
    u, v = path[(d - 1) // 2], path[(d + 1) // 2]
    empty = AdviceAssignment(2, {w: "" for w in range(tree.n)})
    ku = _ball_key(extract_ball(tree, empty, u, 1).root)
    kv = _ball_key(extract_ball(tree, empty, v, 1).root)
    if ku != kv:
        root = u if ku < kv else v
    else:
        pu, pv = tree.port_to(u, v), tree.port_to(v, u)
        if pu != pv:
            root = u if pu < pv else v
        else:
            root = min(u, v)
    return CenterInfo(d, (u, v) if u < v else (v, u), root)


def path_ports(tree: PortLabeledTree, u: int, v: int) -> PathCode:
    """Outgoing ports along the unique simple path u -> v; () when u == v."""
    if u == v:
        return ()
    _, parent, _ = tree.bfs(v)
    ports = []
    w = u
    while w != v:
        nxt = parent[w]
        ports.append(tree.port_to(w, nxt))
        w = nxt
    return tuple(ports)


def follow_path(tree: PortLabeledTree, start: int, code: Sequence) -> int:
    """Endpoint of the walk taking code[i] as the outgoing port at step i."""
    visited = {start}
    v = start
    for p in code:
        if not 0 <= p < tree.degree(v):
            raise InvalidPort(f"port {p} invalid at a degree-{tree.degree(v)} node")
        v = tree.nbr[v][p]
        if v in visited:
            raise NotSimple("walk revisits a node")
        visited.add(v)
    return v


# ---------------------------------------------------------------------------
# labeled balls


@dataclass(frozen=True)
class LabeledBall:
    radius: int
    root: tuple  # canonical record (advice, degree, children)

    def __hash__(self):
        return hash((self.radius, self.root))


def balls_equal(b1: LabeledBall, b2: LabeledBall) -> bool:
    if b1.radius != b2.radius:
        raise RadiusMismatch(f"radii {b1.radius} != {b2.radius}")
    return b1.root == b2.root


class BallOracle:
    """Extracts labeled balls for one (tree, advice) pair with sharing.

    Records are memoized per directed edge and clamped remaining depth, so
    sweeping many centers and radii over the same tree costs far less than
    building each ball from scratch.  Equal subtree views share the same
    tuple object, which also makes equality checks between balls fast.
    """

    def __init__(self, tree: PortLabeledTree, advice=None):
        self.tree = tree
        if advice is None:
            self.adv = [""] * tree.n
        elif isinstance(advice, AdviceAssignment):
            self.adv = [advice.per_node[v] for v in range(tree.n)]
        else:
            self.adv = [advice[v] for v in range(tree.n)]
        self._memo: dict = {}
        self._hdir = self._directed_heights()

    def _directed_heights(self) -> dict:
        """H[(u, v)] = height, from v, of the component at v without edge uv."""
        tree = self.tree
        order, parent, _ = tree.bfs(0)
        h: dict = {}
        for u in reversed(order):  # leaves first: fill h[(parent, u)]
            p = parent[u]
            if p >= 0:
                kids = [h[(u, w)] for w in tree.nbr[u] if w != p]
                h[(p, u)] = 1 + max(kids) if kids else 0
        for u in order:  # root first: fill h[(child, u)] via top-two arms
            p = parent[u]
            arms = [(x, 1 + h[(u, x)]) for x in tree.nbr[u] if x != p]
            if p >= 0:
                arms.append((p, 1 + h[(u, p)]))
            best1 = best2 = 0
            who1 = None
            for x, val in arms:
                if val > best1:
                    best1, best2, who1 = val, best1, x
                elif val > best2:
                    best2 = val
            for w in tree.nbr[u]:
                if w != p:
                    h[(w, u)] = best1 if who1 != w else best2
        return h

    def _entry_height(self, come_from: Optional[int], v: int) -> int:
        if come_from is None:
            return max((1 + self._hdir[(v, w)] for w in self.tree.nbr[v]), default=0)
        return self._hdir[(come_from, v)]

    def _rec(self, v: int, come_from: Optional[int], t: int) -> tuple:
        t = min(t, self._entry_height(come_from, v))
        key = (v, come_from, t)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        tree, adv = self.tree, self.adv
        # iterative post-order to keep deep paths off the Python stack
        stack = [(v, come_from, t, False)]
        while stack:
            node, src, rem, expanded = stack.pop()
            rem = min(rem, self._entry_height(src, node))
            k = (node, src, rem)
            if k in self._memo:
                continue
            deg = tree.degree(node)
            if rem == 0:
                hidden = deg - (0 if src is None else 1)
                self._memo[k] = (adv[node], deg, () if hidden == 0 else None)
                continue
            if not expanded:
                stack.append((node, src, rem, True))
                for u in tree.nbr[node]:
                    if u != src:
                        stack.append((u, node, rem - 1, False))
                continue
            children = []
            for p, u in enumerate(tree.nbr[node]):
                if u == src:
                    continue
                tu = min(rem - 1, self._entry_height(node, u))
                child = self._memo[(u, node, tu)]
                q = tree.port_to(u, node) if child[2] is not None else None
                if q is None and tree.degree(u) == 1:
                    q = 0  # a degree-1 frontier node's only port is forced
                children.append((p, q, child))
            self._memo[k] = (adv[node], deg, tuple(children))
        return self._memo[(v, come_from, t)]

    def ball(self, v: int, tau: int) -> LabeledBall:
        if tau < 0:
            raise ValueError("radius must be nonnegative")
        return LabeledBall(tau, self._rec(v, None, tau))


def extract_ball(tree: PortLabeledTree, advice, v: int, tau: int) -> LabeledBall:
    return BallOracle(tree, advice).ball(v, tau)


# ---------------------------------------------------------------------------
# ball walking helpers (used by electors; everything here is id-free)


@dataclass(eq=False, slots=True)
class BallNode:
    """Mutable view node used to navigate a canonical ball.

    Identity-based equality: views form a doubly linked tree, so structural
    comparison would recurse forever.  Center-to-node port paths are walked
    on demand instead of being stored (they would cost quadratic memory).
    """

    advice: str
    degree: int
    frontier: bool
    parent: Optional["BallNode"]
    port_up: Optional[int]  # port here toward parent (None when hidden)
    port_in: Optional[int]  # port at the parent toward here (None at center)
    children: list = field(default_factory=list)  # (port_here, BallNode)

    def neighbors(self):
        out = []
        if self.parent is not None:
            out.append((self.port_up, self.parent))
        out.extend(self.children)
        return out

    def path(self) -> tuple:
        """Ports from the ball's center to this node."""
        ports = []
        node = self
        while node.parent is not None:
            ports.append(node.port_in)
            node = node.parent
        ports.reverse()
        return tuple(ports)


def ball_nodes(ball: LabeledBall) -> list:
    """All nodes of a ball as linked BallNode views, center first (BFS)."""
    adv, deg, children = ball.root
    make = BallNode
    root = make(adv, deg, children is None, None, None, None)
    out = [root]
    pending = [(root, children)]
    while pending:
        nxt = []
        for view, ch in pending:
            if not ch:
                continue
            kids = view.children
            for p, q, sub in ch:
                sub_ch = sub[2]
                child = make(sub[0], sub[1], sub_ch is None, view, q, p)
                kids.append((p, child))
                out.append(child)
                if sub_ch:
                    nxt.append((child, sub_ch))
        pending = nxt
    return out


# ---------------------------------------------------------------------------
# file formats

TREE_FORMAT_DOC = """\
Tree file: 'n <count>' on the first line, then one line per edge
'<u> <port_u> <v> <port_v>'.  Comments start with '#'.
Advice file: 'lambda <k>' on the first line, then '<id> <symbols>' per node,
with '-' standing for the empty string.
"""


def write_tree_file(tree: PortLabeledTree, fh) -> None:
    fh.write(f"n {tree.n}\n")
    for u, pu, v, pv in tree.edges():
        fh.write(f"{u} {pu} {v} {pv}\n")


def read_tree_file(fh) -> PortLabeledTree:
    n = None
    edges = []
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            tag, val = line.split()
            if tag != "n":
                raise NotATree("tree file must start with 'n <count>'")
            n = int(val)
            continue
        u, pu, v, pv = (int(x) for x in line.split())
        edges.append((u, pu, v, pv))
    if n is None:
        raise NotATree("empty tree file")
    tree = build_tree(edges)
    if tree.n != n:
        raise NotATree(f"declared {n} nodes, found {tree.n}")
    return tree


def write_advice_file(advice: AdviceAssignment, fh) -> None:
    fh.write(f"lambda {advice.alphabet_size}\n")
    for v in sorted(advice.per_node):
        s = advice.per_node[v]
        fh.write(f"{v} {s if s else '-'}\n")


def read_advice_file(fh) -> AdviceAssignment:
    lam = None
    per_node = {}
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if lam is None:
            tag, val = line.split()
            if tag != "lambda":
                raise ValueError("advice file must start with 'lambda <k>'")
            lam = int(val)
            continue
        v, s = line.split()
        per_node[int(v)] = "" if s == "-" else s
    if lam is None:
        raise ValueError("empty advice file")
    return AdviceAssignment(lam, per_node)
