"""Adversarial tree families behind the advice-size lower bounds.

Two generators: the line-based family (a path with leaf tufts near both
ends, members obtained by swapping the root-ward port with a leaf port at
each tuft position), and the general star-of-paths construction (k1 groups
of k2 paths hanging from a common root, decorated with white/grey/black/
dotted leaves; members swap ports at the white positions of half the paths).

Families are combinatorially huge, so members are materialized lazily from
swap descriptors.  The witness colorings certify that the election index of
every member is at most tau: feeding them to the colored-map scheme must
succeed, which is the executable form of the certification claims at desk
scale.  The pigeonhole checker realizes the counting core of the lower
bounds on tiny instances: it exhibits two members whose observer sees equal
balls yet needs different outputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

from .tree import (
    AdviceAssignment,
    BallOracle,
    PortLabeledTree,
    build_tree,
    diameter_and_center,
    path_ports,
)


class BadParams(ValueError):
    pass


class RegimeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SwapPosition:
    node: int
    fixed_port: int  # the port being traded away (0 on the x side, 1 on y)
    partners: tuple  # partner ports; index 0 is the identity swap


@dataclass
class TreeFamily:
    base: PortLabeledTree
    z: int
    x_positions: tuple  # SwapPosition per swapped node, descriptor order
    y_positions: tuple
    observers: tuple
    meta: dict  # node -> role tuple, identical across members
    params: object = None

    def side_count(self, side: str = "x") -> int:
        positions = self.x_positions if side == "x" else self.y_positions
        return self.z ** len(positions)

    def member(self, descriptor, side: str = "x") -> PortLabeledTree:
        """Materialize the member for a swap descriptor (ints below z)."""
        positions = self.x_positions if side == "x" else self.y_positions
        if len(descriptor) != len(positions):
            raise BadParams(
                f"descriptor length {len(descriptor)} != {len(positions)}"
            )
        nbr = [list(row) for row in self.base.nbr]
        for idx, pos in zip(descriptor, positions):
            if not 0 <= idx < self.z:
                raise BadParams(f"swap index {idx} outside 0..{self.z - 1}")
            partner = pos.partners[idx]
            a, b = pos.fixed_port, partner
            if a != b:
                nbr[pos.node][a], nbr[pos.node][b] = nbr[pos.node][b], nbr[pos.node][a]
        return PortLabeledTree(self.base.n, tuple(tuple(row) for row in nbr))

    def descriptors(self, side: str = "x"):
        positions = self.x_positions if side == "x" else self.y_positions
        return itertools.product(range(self.z), repeat=len(positions))


# ---------------------------------------------------------------------------
# line family


@dataclass(frozen=True)
class LineFamilyParams:
    n_prime: int
    diameter: int
    tau: int

    def __post_init__(self):
        if not self.n_prime > self.diameter >= 3:
            raise BadParams("need n' > D >= 3")
        if not 0 <= self.tau < (self.diameter + 1) // 2:
            raise BadParams("need 0 <= tau < ceil(D/2)")

    @property
    def z(self) -> int:
        d_half = (self.diameter + 1) // 2
        return -(-(self.n_prime - 2 * self.tau) // (2 * (d_half - self.tau)))


def build_line_family(params: LineFamilyParams) -> TreeFamily:
    """Path v_0..v_D with z-1 leaves on v_i and v_{D-i} for tau <= i < ceil(D/2).

    Ports along the path are 0 toward v_D and 1 toward v_0 at every interior
    node; endpoint path-edges take the smallest free port.  Members T_x swap
    0 with a leaf port at each left-side tuft, members T_y swap 1 likewise on
    the right side; index 0 of a descriptor is always the identity.
    """
    d = params.diameter
    tau = params.tau
    z = params.z
    d_half = (d + 1) // 2
    tuft = set(range(tau, d_half)) | {d - i for i in range(tau, d_half)}
    edges = []
    meta = {i: ("spine", i) for i in range(d + 1)}
    nxt = d + 1

    def leaf_ports(i):
        # interior tuft nodes carry their leaves at ports 2..z
        if 0 < i < d:
            return list(range(2, z + 1))
        # an endpoint's path edge takes port 0, so its leaves fill 1..z-1
        # (ports must stay gap-free); only reachable when tau = 0
        return list(range(1, z))

    for i in range(d):
        pv = 1 if i + 1 < d else 0  # v_d is an endpoint: its path port is 0
        edges.append((i, 0, i + 1, pv))
    for i in sorted(tuft):
        for port in leaf_ports(i):
            edges.append((i, port, nxt, 0))
            meta[nxt] = ("leaf", i)
            nxt += 1

    base = build_tree(edges)
    x_pos = []
    for k in range(1, d_half - tau + 1):
        node = tau + k - 1
        partners = (0,) + tuple(leaf_ports(node))
        x_pos.append(SwapPosition(node, 0, partners[:z]))
    y_pos = []
    for k in range(1, d_half - tau + 1):
        node = d - tau - k + 1
        root_ward = 1 if node < d else 0
        partners = (root_ward,) + tuple(leaf_ports(node))
        y_pos.append(SwapPosition(node, root_ward, partners[:z]))
    return TreeFamily(
        base=base,
        z=z,
        x_positions=tuple(x_pos),
        y_positions=tuple(y_pos),
        observers=(0, d),
        meta=meta,
        params=params,
    )


# ---------------------------------------------------------------------------
# general family


@dataclass(frozen=True)
class GeneralFamilyParams:
    diameter: int  # even by construction; odd adds one edge to the first path
    tau: int
    k1: int
    k2: int
    z: int
    z_prime: int
    regime: str  # small | medium | large
    lam: int = 2

    def __post_init__(self):
        if self.regime not in ("small", "medium", "large"):
            raise BadParams(f"unknown regime {self.regime!r}")
        if self.k2 % 2:
            raise BadParams("k2 must be even")
        if self.tau < 5:
            raise BadParams(
                "tau must be at least 5 so the grey/black/dotted strides do "
                "not collide (they sit at residues 3, 2, 1 mod tau-2)"
            )
        if self.diameter < 2 * (self.tau + 2):
            raise BadParams("diameter too small for the attachment layout")
        if self.z < 1 or self.z_prime < 0 or self.k1 < 1:
            raise BadParams("counts must be positive")
        if self.regime == "medium" and (self.k1 != 1 or self.z_prime != 0):
            raise BadParams("medium regime fixes k1=1 and z'=0")
        if self.regime == "large" and (self.k1, self.k2, self.z_prime) != (1, 2, 0):
            raise BadParams("large regime fixes k1=1, k2=2, z'=0")

    @property
    def gamma(self) -> int:
        return self.diameter // (2 * (self.tau - 1))

    @property
    def y(self) -> int:
        return (self.diameter // 2) - self.tau - 1

    @property
    def log_d(self) -> int:
        return int(math.log2(self.diameter))

    def node_bound(self, exact: bool = True) -> int:
        """Upper bound on the member size.

        With exact=False this is the source bound, whose stride-row count
        gamma = floor(D / (2 (tau-1))) undercounts the rows the construction
        actually fills at small scale; exact=True substitutes the true
        maximum row count, which the generated trees always respect.
        """
        half = self.diameter // 2
        rows = self.gamma
        if exact:
            rows = max(
                (half - 1 - off) // (self.tau - 2) for off in (1, 2, 3)
            )
        return math.ceil(
            self.k1
            * self.k2
            * (
                self.tau
                + 1
                + self.z * (half - self.tau - 1)
                + (self.z_prime + self.log_d + (self.k1 - 1) / 2) * rows
            )
        )


def build_general_family(params: GeneralFamilyParams) -> TreeFamily:
    """Root with k1*k2 paths of length D/2 plus the four leaf decorations.

    Node indexing inside each path counts from the far endpoint v(0); port 0
    points toward the root on every path edge.  White tufts (z-1 leaves) sit
    at positions tau+1 .. D/2-1, grey/black/dotted leaves at the prescribed
    stride positions.  Swap positions are the white nodes of the first half
    of the paths (x side) and of the second half (w side).
    """
    d_even = params.diameter - (params.diameter % 2)
    half = d_even // 2
    tau = params.tau
    z, zp, k1, k2 = params.z, params.z_prime, params.k1, params.k2
    logd = params.log_d
    edges = []
    meta = {0: ("root",)}
    nxt = 1
    path_nodes = {}

    grey_pos = {q * (tau - 2) + 3 for q in range(1, half) if q * (tau - 2) + 3 <= half - 1}
    black_pos = {q * (tau - 2) + 2 for q in range(1, half) if q * (tau - 2) + 2 <= half - 1}
    dot_pos = {q * (tau - 2) + 1 for q in range(1, half) if q * (tau - 2) + 1 <= half - 1}

    for i in range(1, k1 + 1):
        for j in range(1, k2 + 1):
            ids = []
            for l in range(half):
                ids.append(nxt)
                meta[nxt] = ("path", i, j, l)
                nxt += 1
            path_nodes[(i, j)] = ids
            for l in range(half - 1):
                # port 0 at v(l) toward v(l+1) (root-ward), 1 back
                edges.append((ids[l], 0, ids[l + 1], 1))
            root_port = (i - 1) * k2 + (j - 1)
            edges.append((ids[half - 1], 0, 0, root_port))

    def attach(host, ports, role):
        nonlocal nxt
        for idx, port in enumerate(ports, start=1):
            edges.append((host, port, nxt, 0))
            meta[nxt] = role + (idx,)
            nxt += 1

    for i in range(1, k1 + 1):
        for j in range(1, k2 + 1):
            ids = path_nodes[(i, j)]
            for l in range(tau + 1, half):
                attach(ids[l], range(2, z + 1), ("white", i, j, l))
            for l in grey_pos:
                attach(ids[l], range(z + 1, z + 1 + logd), ("grey", i, j, l))
            for l in black_pos:
                if i == 1:
                    continue
                lo = 2 if l == tau else z + 1
                attach(ids[l], range(lo, lo + i - 1), ("black", i, j, l))
            for l in dot_pos:
                if zp == 0:
                    continue
                lo = 2 if l == tau - 1 else z + 1
                attach(ids[l], range(lo, lo + zp), ("dotted", i, j, l))

    if params.diameter % 2:
        far = path_nodes[(1, 1)][0]
        edges.append((far, 1, nxt, 0))
        meta[nxt] = ("spine-extension",)
        nxt += 1

    base = build_tree(edges)
    x_pos, y_pos = [], []
    for i in range(1, k1 + 1):
        for j in range(1, k2 + 1):
            bucket = x_pos if j <= k2 // 2 else y_pos
            ids = path_nodes[(i, j)]
            for k in range(1, params.y + 1):
                node = ids[tau + k]
                partners = (0,) + tuple(range(2, z + 1))
                bucket.append(SwapPosition(node, 0, partners))
    observers = tuple(path_nodes[(i, j)][0] for i in range(1, k1 + 1) for j in range(1, k2 + 1))
    return TreeFamily(
        base=base,
        z=z,
        x_positions=tuple(x_pos),
        y_positions=tuple(y_pos),
        observers=observers,
        meta=meta,
        params=params,
    )


# ---------------------------------------------------------------------------
# witness colorings (election-index certificates)


def _bits_msb_first(value: int, width: int):
    return [(value >> (width - 1 - b)) & 1 for b in range(width)]


def _color_string(index: int, length: int, lam: int):
    digits = []
    v = index
    for _ in range(length):
        digits.append(v % lam)
        v //= lam
    if v:
        raise RegimeMismatch(
            f"{lam}^{length} strings cannot distinguish index {index}"
        )
    return list(reversed(digits))


def witness_coloring(family: TreeFamily) -> dict:
    """Node coloring certifying election in time tau on every member.

    The coloring only reads node roles, which the swaps never move, so one
    coloring serves the whole family.  Regimes: small identifies a path by
    its dotted string, medium by a color string written along the path
    itself, large by coloring the two paths with different colors; grey
    leaves always spell the host's distance to the root in binary.
    """
    params = family.params
    if not isinstance(params, GeneralFamilyParams):
        raise RegimeMismatch("witness colorings exist for the general family")
    if params.tau <= 2:
        raise RegimeMismatch("the constructions need tau > 2")
    lam = params.lam
    if params.regime == "small" and lam ** params.z_prime < params.k2:
        raise RegimeMismatch("z' too small to name all paths in a group")
    if params.regime == "medium" and lam ** (params.tau - 2) < params.k2:
        raise RegimeMismatch("tau too small to name all paths")
    half = (params.diameter - params.diameter % 2) // 2
    colors = {v: 0 for v in range(family.base.n)}
    for v, role in family.meta.items():
        kind = role[0]
        if kind == "grey":
            _, i, j, l, idx = role
            dist = half - l
            bits = _bits_msb_first(dist, params.log_d)
            colors[v] = bits[idx - 1]
        elif kind == "dotted" and params.regime == "small":
            _, i, j, l, idx = role
            s_j = _color_string(j - 1, params.z_prime, lam)
            colors[v] = s_j[idx - 1]
        elif kind == "path":
            _, i, j, l = role
            if params.regime == "medium":
                if l >= 3:
                    s_j = _color_string(j - 1, params.tau - 2, lam)
                    colors[v] = s_j[(l - 3) % (params.tau - 2)]
            elif params.regime == "large":
                colors[v] = 0 if j == 1 else 1
    return colors


def write_family_descriptor(params, fh) -> None:
    """Family descriptor file: the regime tag (or 'line') and one
    '<field> <value>' line per parameter.  Members are addressed elsewhere
    by their swap sequence rendered as comma-separated integers."""
    if isinstance(params, LineFamilyParams):
        fh.write("family line\n")
        fh.write(f"n_prime {params.n_prime}\n")
        fh.write(f"diameter {params.diameter}\n")
        fh.write(f"tau {params.tau}\n")
        return
    fh.write(f"family general\nregime {params.regime}\n")
    for field_name in ("diameter", "tau", "k1", "k2", "z", "z_prime", "lam"):
        fh.write(f"{field_name} {getattr(params, field_name)}\n")


def read_family_descriptor(fh):
    fields = {}
    for raw in fh:
        line = raw.split("#", 1)[0].strip()
        if line:
            key, val = line.split(None, 1)
            fields[key] = val
    kind = fields.pop("family", None)
    if kind == "line":
        return LineFamilyParams(
            int(fields["n_prime"]), int(fields["diameter"]), int(fields["tau"])
        )
    if kind == "general":
        return GeneralFamilyParams(
            int(fields["diameter"]),
            int(fields["tau"]),
            int(fields["k1"]),
            int(fields["k2"]),
            int(fields["z"]),
            int(fields["z_prime"]),
            fields["regime"],
            int(fields.get("lam", 2)),
        )
    raise BadParams("descriptor must declare 'family line' or 'family general'")


def parse_member_descriptor(text: str) -> tuple:
    """Swap sequence rendered as comma-separated integers."""
    text = text.strip()
    return tuple(int(x) for x in text.split(",")) if text else ()


# ---------------------------------------------------------------------------
# the pigeonhole witness search


@dataclass(frozen=True)
class PigeonholeWitness:
    descriptor_a: tuple
    descriptor_b: tuple
    advice_a: dict
    advice_b: dict
    observer: int
    path_a: tuple
    path_b: tuple


def _short_strings(lam: int, max_len: int):
    out = [""]
    for length in range(1, max_len + 1):
        out.extend(
            "".join(str(d) for d in digits)
            for digits in itertools.product(range(lam), repeat=length)
        )
    return out


def pigeonhole_check(
    family: TreeFamily,
    advice_bits: int,
    lam: int,
    tau: int,
    member_cap: int = 64,
) -> Optional[PigeonholeWitness]:
    """Look for two members and advice choices with equal observer balls but
    different true root paths.  None means the caps were exhausted, which is
    a bound, not a refutation."""
    members = list(itertools.islice(family.descriptors("x"), member_cap))
    strings = _short_strings(lam, advice_bits)
    trees = {}
    roots = {}
    for desc in members:
        t = family.member(desc, "x")
        trees[desc] = t
        roots[desc] = diameter_and_center(t).root

    for obs in family.observers:
        order, _, depth = family.base.bfs(obs)
        zone = tuple(v for v in order if depth[v] <= tau)
        assignments = list(itertools.product(strings, repeat=len(zone)))
        for ia, desc_a in enumerate(members):
            for desc_b in members[ia + 1 :]:
                for adv_a in assignments:
                    for adv_b in assignments:
                        full_a = {v: "" for v in range(family.base.n)}
                        full_b = dict(full_a)
                        full_a.update(zip(zone, adv_a))
                        full_b.update(zip(zone, adv_b))
                        ball_a = BallOracle(trees[desc_a], full_a).ball(obs, tau)
                        ball_b = BallOracle(trees[desc_b], full_b).ball(obs, tau)
                        if ball_a != ball_b:
                            continue
                        pa = path_ports(trees[desc_a], obs, roots[desc_a])
                        pb = path_ports(trees[desc_b], obs, roots[desc_b])
                        if pa != pb:
                            return PigeonholeWitness(
                                desc_a, desc_b, dict(zip(zone, adv_a)),
                                dict(zip(zone, adv_b)), obs, pa, pb,
                            )
    return None
