"""Unit-disk graph model, neighbor tables and CDS predicates."""

from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class UdgSnapshot:
    """Node positions plus a transmission range; edges are derived.

    Two nodes are adjacent iff their Euclidean distance is strictly smaller
    than ``range_r``.
    """

    positions: Mapping[int, tuple[float, float]]
    range_r: float
    adjacency: Mapping[int, frozenset[int]] = field(repr=False)

    @property
    def node_ids(self) -> list[int]:
        return sorted(self.positions)

    def __len__(self) -> int:
        return len(self.positions)

    def neighbors(self, u: int) -> frozenset[int]:
        return self.adjacency[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in self.node_ids for v in sorted(self.adjacency[u]) if u < v]

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def is_connected(self) -> bool:
        return induces_connected(self, self.positions)


def build_udg(positions: Mapping[int, tuple[float, float]] | Iterable[tuple[int, float, float]],
              range_r: float) -> UdgSnapshot:
    if not isinstance(positions, Mapping):
        pos: dict[int, tuple[float, float]] = {}
        for node, x, y in positions:
            if node in pos:
                raise GraphError(f"duplicate node id {node}")
            pos[node] = (x, y)
        positions = pos
    if not positions:
        raise GraphError("a snapshot needs at least one node")
    if not (range_r > 0 and math.isfinite(range_r)):
        raise GraphError(f"range must be positive, got {range_r}")
    pos = {}
    for node, (x, y) in positions.items():
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GraphError(f"node {node} has a non-finite coordinate")
        pos[int(node)] = (float(x), float(y))

    ids = sorted(pos)
    adj: dict[int, set[int]] = {u: set() for u in ids}
    r2 = range_r * range_r
    for i, u in enumerate(ids):
        ux, uy = pos[u]
        for v in ids[i + 1:]:
            vx, vy = pos[v]
            dx, dy = ux - vx, uy - vy
            if dx * dx + dy * dy < r2:
                adj[u].add(v)
                adj[v].add(u)
    return UdgSnapshot(pos, float(range_r), {u: frozenset(s) for u, s in adj.items()})


@dataclass(frozen=True)
class NeighborTable:
    """Per-node 1-hop (open and closed) and strict 2-hop neighbor sets."""

    n1_open: Mapping[int, frozenset[int]]
    n2: Mapping[int, frozenset[int]]

    def n1_closed(self, u: int) -> frozenset[int]:
        return self.n1_open[u] | {u}

    def degree(self, u: int) -> int:
        return len(self.n1_open[u])

    @property
    def node_ids(self) -> list[int]:
        return sorted(self.n1_open)

    @classmethod
    def from_adjacency(cls, adjacency: Mapping[int, Iterable[int]]) -> "NeighborTable":
        n1 = {u: frozenset(vs) for u, vs in adjacency.items()}
        for u, vs in n1.items():
            if u in vs:
                raise GraphError(f"self loop at {u}")
            for v in vs:
                if u not in n1.get(v, ()):
                    raise GraphError(f"asymmetric link {u}->{v}")
        n2 = {}
        for u, vs in n1.items():
            two = set()
            for v in vs:
                two |= n1[v]
            two -= vs
            two.discard(u)
            n2[u] = frozenset(two)
        return cls(n1, n2)


def neighbor_tables(g: UdgSnapshot) -> NeighborTable:
    return NeighborTable.from_adjacency(g.adjacency)


def is_dominating(g: UdgSnapshot | NeighborTable, s: Iterable[int]) -> bool:
    adj = _adjacency(g)
    s = set(s)
    return all(u in s or not s.isdisjoint(adj[u]) for u in adj)


def induces_connected(g: UdgSnapshot | NeighborTable, s: Iterable[int]) -> bool:
    """Connectivity of the subgraph induced by ``s``; empty and singleton sets count."""
    adj = _adjacency(g)
    s = set(s)
    if len(s) <= 1:
        return True
    start = next(iter(s))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in s and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(s)


def is_cds(g: UdgSnapshot | NeighborTable, s: Iterable[int]) -> bool:
    s = set(s)
    return is_dominating(g, s) and induces_connected(g, s)


def brute_force_min_cds(g: UdgSnapshot | NeighborTable, max_nodes: int = 12) -> frozenset[int]:
    """Exact minimum CDS by search over increasing cardinality.

    Within one cardinality subsets are visited in lexicographic id order, so
    the lexicographically smallest optimum is returned.
    """
    adj = _adjacency(g)
    ids = sorted(adj)
    if len(ids) > max_nodes:
        raise GraphError(f"{len(ids)} nodes exceeds the brute-force cap of {max_nodes}")
    if not induces_connected(g, ids):
        raise GraphError("graph is disconnected; no CDS exists")

    closed = {u: adj[u] | {u} for u in ids}
    everyone = frozenset(ids)
    max_closed = max(len(c) for c in closed.values())
    # k nodes dominate at most k * max_closed nodes
    k0 = max(1, math.ceil(len(ids) / max_closed))
    for k in range(k0, len(ids) + 1):
        for combo in itertools.combinations(ids, k):
            covered = frozenset().union(*(closed[u] for u in combo))
            if covered == everyone and induces_connected(g, combo):
                return frozenset(combo)
    raise AssertionError("unreachable: the full node set is a CDS")


def random_connected_udg(n: int, area: tuple[float, float] = (1000.0, 1000.0),
                         range_r: float = 250.0, seed: int = 0,
                         max_attempts: int = 1000) -> UdgSnapshot:
    """Uniform placement in ``area`` (width, height), resampled until connected."""
    if n < 1:
        raise GraphError("need at least one node")
    width, height = area
    rng = random.Random(seed)
    for _ in range(max_attempts):
        pos = {i: (rng.uniform(0.0, width), rng.uniform(0.0, height)) for i in range(1, n + 1)}
        g = build_udg(pos, range_r)
        if g.is_connected():
            return g
    raise GraphError(f"no connected placement of {n} nodes after {max_attempts} attempts")


def dumps(g: UdgSnapshot) -> str:
    lines = [f"{len(g)} {g.range_r!r}"]
    lines += [f"{u} {g.positions[u][0]!r} {g.positions[u][1]!r}" for u in g.node_ids]
    return "\n".join(lines) + "\n"


def loads(text: str) -> UdgSnapshot:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise GraphError("missing 'n R' header")
    n, range_r = int(rows[0][0]), float(rows[0][1])
    body = rows[1:]
    if len(body) != n:
        raise GraphError(f"header announces {n} nodes, found {len(body)}")
    triples = []
    for row in body:
        if len(row) != 3:
            raise GraphError(f"malformed node line: {' '.join(row)}")
        triples.append((int(row[0]), float(row[1]), float(row[2])))
    return build_udg(triples, range_r)


def _adjacency(g: UdgSnapshot | NeighborTable) -> Mapping[int, frozenset[int]]:
    return g.adjacency if isinstance(g, UdgSnapshot) else g.n1_open
