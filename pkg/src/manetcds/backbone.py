"""CDS construction: greedy MPR selection, marking, priority pruning, baselines.

Every decision that needs to rank nodes goes through a *key function* that
maps :class:`NodeAttributes` to a tuple; a smaller tuple means higher
priority.  The energy-aware key orders by residual energy (desc), speed
(asc), degree (desc) and finally id (asc), which makes it a strict total
order over distinct nodes.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .netgraph import GraphError, NeighborTable, induces_connected, is_cds

log = logging.getLogger(__name__)


class Color(enum.Enum):
    WHITE = "white"
    GRAY = "gray"
    BLACK = "black"


class Algorithm(str, enum.Enum):
    EAS_CDS = "EAS_CDS"
    ADJIH_MPR_CDS = "ADJIH_MPR_CDS"
    WU_EMPR = "WU_EMPR"
    CHEN_DEMPR = "CHEN_DEMPR"
    MIN_VELOCITY = "MIN_VELOCITY"

    @classmethod
    def parse(cls, tag: "str | Algorithm") -> "Algorithm":
        try:
            return cls(str(tag).upper() if not isinstance(tag, cls) else tag)
        except ValueError:
            raise ValueError(f"unknown algorithm tag {tag!r}") from None


@dataclass(frozen=True)
class NodeAttributes:
    id: int
    energy: float
    speed: float
    degree: int

    def __post_init__(self):
        if self.energy < 0 or self.speed < 0 or self.degree < 0:
            raise ValueError(f"negative attribute on node {self.id}")


Attrs = Mapping[int, NodeAttributes]
KeyFunc = Callable[[NodeAttributes], tuple]
Coloring = dict[int, Color]


def energy_key(a: NodeAttributes) -> tuple:
    return (-a.energy, a.speed, -a.degree, a.id)


def velocity_key(a: NodeAttributes) -> tuple:
    return (a.speed, -a.degree, a.id)


def degree_key(a: NodeAttributes) -> tuple:
    return (-a.degree, a.id)


def id_key(a: NodeAttributes) -> tuple:
    return (a.id,)


def priority_less(a: NodeAttributes, b: NodeAttributes, key: KeyFunc = energy_key) -> bool:
    """True iff ``a`` ranks strictly below ``b``."""
    return key(a) > key(b)


def make_attributes(tables: NeighborTable, energy: Mapping[int, float],
                    speed: Mapping[int, float]) -> dict[int, NodeAttributes]:
    return {u: NodeAttributes(u, float(energy[u]), float(speed[u]), tables.degree(u))
            for u in tables.node_ids}


@dataclass(frozen=True)
class BackboneResult:
    algorithm: str
    colors: Mapping[int, Color]
    mprs: Mapping[int, frozenset[int]] = field(default_factory=dict)
    timestamp: float = 0.0
    restored: int = 0  # nodes re-added by the connectivity safety check

    @property
    def black(self) -> frozenset[int]:
        return frozenset(u for u, c in self.colors.items() if c is Color.BLACK)

    def to_text(self, seed: int) -> str:
        members = " ".join(str(u) for u in sorted(self.black))
        return f"{self.algorithm} {seed} {len(self.colors)} {len(self.black)} {members}".rstrip()


# -- MPR selection ---------------------------------------------------------

def greedy_mpr(u: int, tables: NeighborTable, attrs: Attrs, key: KeyFunc = energy_key,
               preselected: Iterable[int] = (), coverage_first: bool = True) -> frozenset[int]:
    """Select multipoint relays of ``u`` among its 1-hop neighbors.

    Neighbors that are the only route to some 2-hop node go in first.  The
    rest are added one at a time: with ``coverage_first`` the neighbor
    covering the most uncovered 2-hop nodes wins (ties by priority);
    otherwise the highest-priority neighbor that covers anything wins.
    ``preselected`` neighbors are in the set from the start.
    """
    n1 = tables.n1_open[u]
    n2 = tables.n2[u]
    reach = {v: tables.n1_open[v] & n2 for v in n1}
    mpr = set(preselected)
    if not mpr <= n1:
        raise GraphError(f"preselected relays of {u} are not all neighbors")
    uncovered = set(n2)
    for v in mpr:
        uncovered -= reach[v]

    for x in sorted(uncovered):
        coverers = [v for v in n1 if x in reach[v]]
        if not coverers:
            raise GraphError(f"2-hop node {x} of {u} has no covering neighbor")
        if len(coverers) == 1:
            mpr.add(coverers[0])
    for v in mpr:
        uncovered -= reach[v]

    while uncovered:
        candidates = [v for v in n1 if v not in mpr and reach[v] & uncovered]
        if coverage_first:
            best = min(candidates, key=lambda v: (-len(reach[v] & uncovered), key(attrs[v])))
        else:
            best = min(candidates, key=lambda v: key(attrs[v]))
        mpr.add(best)
        uncovered -= reach[best]
    return frozenset(mpr)


def all_mprs(tables: NeighborTable, attrs: Attrs, key: KeyFunc = energy_key,
             coverage_first: bool = True) -> dict[int, frozenset[int]]:
    return {u: greedy_mpr(u, tables, attrs, key, coverage_first=coverage_first)
            for u in tables.node_ids}


def color_from_black(tables: NeighborTable, black: Iterable[int]) -> Coloring:
    black = set(black)
    colors = {}
    for u in tables.node_ids:
        if u in black:
            colors[u] = Color.BLACK
        elif black & tables.n1_open[u]:
            colors[u] = Color.GRAY
        else:
            colors[u] = Color.WHITE
    return colors


def black_of(coloring: Mapping[int, Color]) -> set[int]:
    return {u for u, c in coloring.items() if c is Color.BLACK}


def mark_from_mprs(tables: NeighborTable, assignment: Mapping[int, Iterable[int]],
                   attrs: Attrs, key: KeyFunc = energy_key) -> Coloring:
    black = set().union(*assignment.values()) if assignment else set()
    if not black and tables.node_ids:
        # all MPR sets empty: every node sees the whole graph in one hop
        black = {min(tables.node_ids, key=lambda u: key(attrs[u]))}
    return color_from_black(tables, black)


# -- pruning ---------------------------------------------------------------

def _ascending_priority(nodes: Iterable[int], attrs: Attrs, key: KeyFunc) -> list[int]:
    return sorted(nodes, key=lambda u: key(attrs[u]), reverse=True)


def prune_rule1(tables: NeighborTable, coloring: Mapping[int, Color], attrs: Attrs,
                key: KeyFunc = energy_key) -> Coloring:
    """Unmark v when a higher-priority marked u has N[v] contained in N[u]."""
    black = black_of(coloring)
    for v in _ascending_priority(black, attrs, key):
        closed_v = tables.n1_closed(v)
        for u in tables.n1_open[v] & black:
            if closed_v <= tables.n1_closed(u) and priority_less(attrs[v], attrs[u], key):
                black.discard(v)
                break
    return color_from_black(tables, black)


def rule2_removable(v: int, u: int, w: int, tables: NeighborTable, attrs: Attrs,
                    key: KeyFunc = energy_key) -> bool:
    """Whether marked neighbors u and w let v drop out (open neighborhoods)."""
    nv, nu, nw = tables.n1_open[v], tables.n1_open[u], tables.n1_open[w]
    if not nv <= nu | nw:
        return False
    u_covered = nu <= nv | nw
    w_covered = nw <= nu | nv
    if not u_covered and not w_covered:
        return True
    if u_covered and not w_covered:
        return priority_less(attrs[v], attrs[u], key)
    if w_covered and not u_covered:
        return priority_less(attrs[v], attrs[w], key)
    kv = key(attrs[v])
    return kv > key(attrs[u]) and kv > key(attrs[w])


def _rule2_pass(tables: NeighborTable, black: set[int], attrs: Attrs, key: KeyFunc) -> set[int]:
    black = set(black)
    for v in _ascending_priority(sorted(black), attrs, key):
        marked = sorted(tables.n1_open[v] & black)
        if any(rule2_removable(v, u, w, tables, attrs, key)
               for u, w in itertools.combinations(marked, 2)):
            black.discard(v)
    return black


def prune_rule2(tables: NeighborTable, coloring: Mapping[int, Color], attrs: Attrs,
                key: KeyFunc = energy_key) -> Coloring:
    """Unmark v when two marked neighbors jointly cover its open neighborhood.

    Ends with the connectivity safety check (see :func:`restore_if_broken`).
    """
    before = black_of(coloring)
    black = _rule2_pass(tables, before, attrs, key)
    colors, _ = restore_if_broken(tables, color_from_black(tables, black), before - black,
                                  attrs, key)
    return colors


def restore_if_broken(tables: NeighborTable, coloring: Mapping[int, Color],
                      pool: Iterable[int], attrs: Attrs,
                      key: KeyFunc = energy_key) -> tuple[Coloring, int]:
    """Re-add nodes in descending priority until the Black set is a CDS again.

    ``pool`` is tried first, then every remaining node.  Returns the
    repaired coloring and how many nodes were re-added.
    """
    black = black_of(coloring)
    if is_cds(tables, black) or not induces_connected(tables, tables.node_ids):
        return dict(coloring), 0
    by_rank = lambda u: key(attrs[u])  # noqa: E731
    pool = sorted(set(pool) - black, key=by_rank)
    rest = sorted(set(tables.node_ids) - black - set(pool), key=by_rank)
    added = 0
    for u in pool + rest:
        black.add(u)
        added += 1
        if is_cds(tables, black):
            break
    log.warning("connectivity safety restore re-added %d node(s)", added)
    return color_from_black(tables, black), added


# -- algorithms ------------------------------------------------------------

def _require_connected(tables: NeighborTable) -> None:
    if not tables.node_ids:
        raise GraphError("empty graph")
    if not induces_connected(tables, tables.node_ids):
        raise GraphError("backbone construction needs a connected graph")


def _marking_pipeline(tables: NeighborTable, attrs: Attrs, key: KeyFunc, label: str,
                      coverage_first: bool, timestamp: float) -> BackboneResult:
    _require_connected(tables)
    mprs = all_mprs(tables, attrs, key, coverage_first)
    marked = mark_from_mprs(tables, mprs, attrs, key)
    after1 = prune_rule1(tables, marked, attrs, key)
    black1 = black_of(after1)
    black2 = _rule2_pass(tables, black1, attrs, key)
    colors, restored = restore_if_broken(tables, color_from_black(tables, black2),
                                         black1 - black2, attrs, key)
    return BackboneResult(label, colors, mprs, timestamp, restored)


def eas_cds(tables: NeighborTable, attrs: Attrs, timestamp: float = 0.0) -> BackboneResult:
    """Energy-aware stable CDS: greedy MPRs, marking, then Rules 1 and 2."""
    return _marking_pipeline(tables, attrs, energy_key, Algorithm.EAS_CDS.value,
                             coverage_first=True, timestamp=timestamp)


def _free_neighbors(v: int, tables: NeighborTable, attrs: Attrs, key: KeyFunc) -> set[int]:
    # u is free for v unless v is u's top-ranked neighbor
    free = set()
    for u in tables.n1_open[v]:
        top = min(tables.n1_open[u], key=lambda x: key(attrs[x]))
        if top != v:
            free.add(u)
    return free


def _has_unconnected_pair(v: int, tables: NeighborTable) -> bool:
    nbrs = sorted(tables.n1_open[v])
    return any(b not in tables.n1_open[a] for a, b in itertools.combinations(nbrs, 2))


def _selector_rule_cds(tables: NeighborTable, attrs: Attrs, key: KeyFunc,
                       free_seeding: bool, need_unconnected: bool):
    """Rule 1: v outranks its whole neighborhood; Rule 2: v relays for its top neighbor."""
    mprs = {}
    for u in tables.node_ids:
        seed = _free_neighbors(u, tables, attrs, key) if free_seeding else ()
        mprs[u] = greedy_mpr(u, tables, attrs, key, preselected=seed)
    black = set()
    for v in tables.node_ids:
        nbrs = tables.n1_open[v]
        if not nbrs:
            continue
        top = min(nbrs, key=lambda x: key(attrs[x]))
        if key(attrs[v]) < key(attrs[top]):
            if not need_unconnected or _has_unconnected_pair(v, tables):
                black.add(v)
        if v in mprs[top]:
            black.add(v)
    return mprs, black


def baseline_cds(algorithm: str | Algorithm, tables: NeighborTable, attrs: Attrs,
                 timestamp: float = 0.0) -> BackboneResult:
    algorithm = Algorithm.parse(algorithm)
    if algorithm is Algorithm.EAS_CDS:
        return eas_cds(tables, attrs, timestamp)
    if algorithm is Algorithm.MIN_VELOCITY:
        return _marking_pipeline(tables, attrs, velocity_key, algorithm.value,
                                 coverage_first=True, timestamp=timestamp)
    _require_connected(tables)
    if algorithm is Algorithm.ADJIH_MPR_CDS:
        key, free, strict = id_key, False, False
    elif algorithm is Algorithm.WU_EMPR:
        key, free, strict = id_key, True, True
    else:
        key, free, strict = degree_key, True, True
    mprs, black = _selector_rule_cds(tables, attrs, key, free, strict)
    if not black:
        black = {min(tables.node_ids, key=lambda u: key(attrs[u]))}
    pool = set().union(*mprs.values())
    colors, restored = restore_if_broken(tables, color_from_black(tables, black), pool, attrs, key)
    return BackboneResult(algorithm.value, colors, mprs, timestamp, restored)


def build_backbone(algorithm: str | Algorithm, tables: NeighborTable, attrs: Attrs,
                   timestamp: float = 0.0) -> BackboneResult:
    return baseline_cds(algorithm, tables, attrs, timestamp)
