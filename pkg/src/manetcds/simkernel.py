"""Discrete-event MANET simulation over a periodically rebuilt backbone.

One run places nodes, moves them by random waypoint, exchanges hello
messages, rebuilds the backbone, and pushes CBR traffic whose routes are
found by RREQ flooding restricted to backbone (Black) nodes.  The MAC is
idealized: a transmission succeeds iff the receiver is in range at send
time.  The run stops at the first battery depletion.
"""

from __future__ import annotations

import heapq
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .backbone import Algorithm, BackboneResult, Color, NodeAttributes, build_backbone
from .config import ScenarioConfig
from .mobility_energy import (Activity, EnergyLedger, WaypointState, advance_position, charge,
                              current_speed, initial_state, packet_airtime)
from .netgraph import GraphError, NeighborTable, UdgSnapshot, build_udg, neighbor_tables, \
    random_connected_udg

log = logging.getLogger(__name__)

# same-instant ordering: mobility, then hellos, then backbone, then traffic
_TICK, _HELLO, _BACKBONE, _PACKET = range(4)


@dataclass(frozen=True)
class HelloMessage:
    sender: int
    energy: float
    speed: float
    neighbors: tuple[int, ...]


@dataclass(frozen=True)
class RouteRequest:
    source: int
    destination: int
    broadcast_id: int
    hop_count: int = 0
    reverse_path: tuple[int, ...] = ()


@dataclass(frozen=True)
class Discovery:
    path: tuple[int, ...] | None
    transmissions: int
    request: RouteRequest

    @property
    def ok(self) -> bool:
        return self.path is not None


@dataclass
class MetricsRecord:
    algorithm: str
    mode: str
    n: int
    v_max: float
    seed: int
    cds_size_mean: float = 0.0
    lifetime_s: float = 0.0
    rreq_total: int = 0
    sent: int = 0
    delivered: int = 0
    discoveries: int = 0
    failed_discoveries: int = 0
    restores: int = 0
    stale_backbones: int = 0
    error: str | None = None

    @property
    def pdr(self) -> float:
        return self.delivered / self.sent if self.sent else 0.0

    @property
    def sort_key(self) -> tuple:
        return (self.algorithm, self.mode, self.n, self.v_max, self.seed)


@dataclass
class World:
    """Mutable state of one simulation; single writer."""

    nodes: list[int]
    mobility: dict[int, WaypointState]
    ledger: EnergyLedger
    range_r: float
    mode: str = "cds"
    config: ScenarioConfig = field(default_factory=ScenarioConfig)
    rngs: dict[int, random.Random] = field(default_factory=dict)
    now: float = 0.0
    # hello-learned state
    known_n1: dict[int, frozenset[int]] = field(default_factory=dict)
    known_n2: dict[int, frozenset[int]] = field(default_factory=dict)
    inbox: dict[int, dict[int, HelloMessage]] = field(default_factory=dict)
    tables: NeighborTable | None = None
    attrs: dict[int, NodeAttributes] = field(default_factory=dict)
    backbone: BackboneResult | None = None
    routes: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    broadcast_ids: dict[int, int] = field(default_factory=dict)
    # counters
    rreq_total: int = 0
    sent: int = 0
    delivered: int = 0
    discoveries: int = 0
    failed_discoveries: int = 0
    stale_backbones: int = 0
    restores: int = 0
    cds_sizes: list[int] = field(default_factory=list)
    trace: Callable[[str], None] | None = None
    _snapshot: UdgSnapshot | None = field(default=None, repr=False)

    def position(self, u: int) -> tuple[float, float]:
        return self.mobility[u].position

    def snapshot(self) -> UdgSnapshot:
        if self._snapshot is None:
            self._snapshot = build_udg({u: self.position(u) for u in self.nodes}, self.range_r)
        return self._snapshot

    def moved(self) -> None:
        self._snapshot = None

    def in_range(self, a: int, b: int) -> bool:
        (ax, ay), (bx, by) = self.position(a), self.position(b)
        return math.hypot(ax - bx, ay - by) < self.range_r

    def airtime(self, nbytes: int) -> float:
        return packet_airtime(nbytes, self.ledger)

    def is_black(self, u: int) -> bool:
        return self.backbone is not None and self.backbone.colors.get(u) is Color.BLACK

    def log(self, kind: str, node, details: str = "") -> None:
        if self.trace is not None:
            self.trace(f"{self.now:.6f} {kind} {node} {details}".rstrip())

    def spend(self, node: int, activity: Activity, seconds: float) -> None:
        for dead, t in charge(self.ledger, node, activity, seconds, self.now):
            self.log("death", dead, f"at={t:.6f}")


def static_world(g: UdgSnapshot, energy: dict[int, float], config: ScenarioConfig | None = None,
                 mode: str = "cds") -> World:
    """A world whose nodes never move; handy for protocol-level checks."""
    config = config or ScenarioConfig()
    mob = {u: WaypointState(g.positions[u], g.positions[u], 0.0, math.inf, config.area, 0.0,
                            config.pause, True) for u in g.node_ids}
    ledger = EnergyLedger(dict(energy), config.tx_w, config.rx_w, config.idle_w, config.bitrate)
    return World(g.node_ids, mob, ledger, g.range_r, mode, config)


def _broadcast(world: World, sender: int, nbytes: int, g: UdgSnapshot) -> frozenset[int]:
    t = world.airtime(nbytes)
    world.spend(sender, Activity.TX, t)
    receivers = g.neighbors(sender)
    for v in receivers:
        world.spend(v, Activity.RX, t)
    return receivers


def _unicast(world: World, a: int, b: int, nbytes: int) -> None:
    t = world.airtime(nbytes)
    world.spend(a, Activity.TX, t)
    world.spend(b, Activity.RX, t)


def hello_round(world: World) -> NeighborTable:
    """Every node broadcasts one hello carrying its energy, speed and known neighbors.

    A receiver learns its 1-hop set from the senders it hears and its 2-hop
    set from the neighbor lists they carry, so 2-hop knowledge is complete
    after two rounds on a static topology.  The returned table (and
    ``world.tables``) is the steady-state view on the current topology.
    """
    g = world.snapshot()
    cfg = world.config
    messages = {}
    for u in world.nodes:
        nbrs = tuple(sorted(world.known_n1.get(u, ())))
        messages[u] = HelloMessage(u, world.ledger.residual[u], current_speed(world.mobility[u]), nbrs)
    inbox: dict[int, dict[int, HelloMessage]] = {u: {} for u in world.nodes}
    for u in world.nodes:
        msg = messages[u]
        size = cfg.hello_size + cfg.hello_per_neighbor * len(msg.neighbors)
        for v in _broadcast(world, u, size, g):
            inbox[v][u] = msg
    world.inbox = inbox
    for v, heard in inbox.items():
        n1 = frozenset(heard)
        two = set()
        for msg in heard.values():
            two.update(msg.neighbors)
        world.known_n1[v] = n1
        world.known_n2[v] = frozenset(two - n1 - {v})
    world.tables = neighbor_tables(g)
    world.attrs = {u: NodeAttributes(u, messages[u].energy, messages[u].speed, g.degree(u))
                   for u in world.nodes}
    world.log("hello", "*", f"nodes={len(world.nodes)}")
    return world.tables


def recompute_backbone(world: World, algorithm: str | Algorithm) -> BackboneResult | None:
    if world.tables is None:
        hello_round(world)
    try:
        result = build_backbone(algorithm, world.tables, world.attrs, world.now)
    except GraphError as exc:
        world.stale_backbones += 1
        world.log("backbone", "*", f"stale reason={exc}")
        log.debug("keeping previous backbone at t=%.1f: %s", world.now, exc)
        return world.backbone
    world.restores += result.restored
    world.backbone = result
    world.cds_sizes.append(len(result.black))
    if world.mode == "cds":
        for pair, path in list(world.routes.items()):
            if any(not world.is_black(u) for u in path[1:-1]):
                del world.routes[pair]
    world.log("backbone", "*", f"size={len(result.black)}")
    return result


def route_discovery(world: World, source: int, destination: int, ttl: int | None = None) -> Discovery:
    """Flood one RREQ and return the first-arrival path plus the transmission count.

    In ``cds`` mode only Black nodes rebroadcast (the source always
    transmits); in ``flooding`` mode every node does.  Each node transmits
    a given request at most once.
    """
    if source == destination:
        raise ValueError("source and destination must differ")
    g = world.snapshot()
    ttl = len(world.nodes) if ttl is None else ttl
    bid = world.broadcast_ids.get(source, 0) + 1
    world.broadcast_ids[source] = bid
    relays_all = world.mode == "flooding"
    size = world.config.control_size

    parent = {source: None}
    hops = {source: 0}
    queue = deque([source])
    transmissions = 0
    while queue:
        u = queue.popleft()
        transmissions += 1
        world.log("rreq", u, f"src={source} dst={destination} bid={bid} hops={hops[u]}")
        for v in sorted(_broadcast(world, u, size, g)):
            if v in parent:
                continue
            parent[v] = u
            hops[v] = hops[u] + 1
            if hops[v] < ttl and (relays_all or world.is_black(v)):
                queue.append(v)
    world.rreq_total += transmissions
    world.discoveries += 1

    if destination not in parent:
        world.failed_discoveries += 1
        world.log("rreq_fail", source, f"dst={destination} bid={bid}")
        return Discovery(None, transmissions, RouteRequest(source, destination, bid))
    path = [destination]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    for a, b in zip(reversed(path[1:]), reversed(path[:-1])):
        _unicast(world, a, b, size)  # RREP along the reverse path
    req = RouteRequest(source, destination, bid, len(path) - 1, tuple(path[:-1]))
    world.log("rrep", destination, f"path={'-'.join(map(str, path))}")
    return Discovery(tuple(path), transmissions, req)


def send_packet(world: World, source: int, destination: int) -> bool:
    """Emit one CBR packet; discovers a route on demand.  Returns delivery."""
    world.sent += 1
    path = world.routes.get((source, destination))
    if path is None:
        found = route_discovery(world, source, destination)
        if not found.ok:
            return False
        path = found.path
        world.routes[(source, destination)] = path
    nbytes = world.config.packet_size
    t = world.airtime(nbytes)
    for a, b in zip(path, path[1:]):
        world.spend(a, Activity.TX, t)
        if not world.in_range(a, b):
            del world.routes[(source, destination)]
            world.log("drop", a, f"next={b} src={source} dst={destination}")
            return False
        world.spend(b, Activity.RX, t)
    world.delivered += 1
    return True


def cbr_traffic(world: World, flows: list[tuple[int, int]], packets_per_flow: int) -> tuple[int, int]:
    """Send ``packets_per_flow`` packets round-robin over ``flows`` on a frozen world.

    Returns (sent, delivered) for this batch.
    """
    sent0, delivered0 = world.sent, world.delivered
    for _ in range(packets_per_flow):
        for s, d in flows:
            send_packet(world, s, d)
    return world.sent - sent0, world.delivered - delivered0


def _pick_flows(nodes: list[int], count: int, rng: random.Random) -> list[tuple[int, int]]:
    if len(nodes) < 2:
        return []
    sources = rng.sample(nodes, min(count, len(nodes)))
    flows = []
    for s in sources:
        d = rng.choice([u for u in nodes if u != s])
        flows.append((s, d))
    return flows


def run_simulation(config: ScenarioConfig, algorithm: str | Algorithm, seed: int, *,
                   n: int | None = None, v_max: float | None = None, mode: str | None = None,
                   trace: Callable[[str], None] | None = None) -> MetricsRecord:
    """One seeded run.  Randomness is split into independent named streams so
    that runs differing only in algorithm or mode see the same placement,
    energies, trajectories and flows."""
    algorithm = Algorithm.parse(algorithm).value
    n = config.nodes[0] if n is None else n
    v_max = config.v_max[0] if v_max is None else v_max
    mode = config.modes[0] if mode is None else mode
    if mode not in ("cds", "flooding"):
        raise ValueError(f"unknown mode {mode!r}")
    if n < 1 or v_max < 0:
        raise ValueError("invalid node count or speed")

    placement = random_connected_udg(n, config.area, config.range_r,
                                     seed=_stream_seed(seed, n, "placement"))
    energy_rng = random.Random(_stream_seed(seed, n, "energy"))
    lo, hi = config.energy_range
    ledger = EnergyLedger({u: energy_rng.uniform(lo, hi) for u in placement.node_ids},
                          config.tx_w, config.rx_w, config.idle_w, config.bitrate)
    mobility = {u: initial_state(placement.positions[u], config.area, v_max, config.pause)
                for u in placement.node_ids}
    rngs = {u: random.Random(_stream_seed(seed, n, f"mobility:{u}")) for u in placement.node_ids}
    world = World(placement.node_ids, mobility, ledger, config.range_r, mode, config, rngs, trace=trace)
    flows = _pick_flows(world.nodes, config.flows, random.Random(_stream_seed(seed, n, "flows")))
    flow_rng = random.Random(_stream_seed(seed, n, "offsets"))

    events: list = []
    seq = 0

    def schedule(t, prio, kind, data=None):
        nonlocal seq
        seq += 1
        heapq.heappush(events, (t, prio, seq, kind, data))

    duration = config.duration
    schedule(config.tick, _TICK, "tick", 1)
    schedule(0.0, _HELLO, "hello", 0)
    first_backbone = config.hello_interval
    schedule(first_backbone, _BACKBONE, "backbone", 0)
    period = 1.0 / config.packet_rate
    for i, (s, d) in enumerate(flows):
        start = first_backbone + flow_rng.uniform(0.0, period)
        schedule(start, _PACKET, "packet", (i, start, 0))

    idle_since = 0.0
    end = duration
    while events:
        t, _, _, kind, data = events[0]
        if t > duration:
            break
        heapq.heappop(events)
        world.now = t
        if kind == "tick":
            dt = t - idle_since
            for u in world.nodes:
                world.mobility[u] = advance_position(world.mobility[u], dt, world.rngs[u])
                world.spend(u, Activity.IDLE, dt)
            idle_since = t
            world.moved()
            schedule((data + 1) * config.tick, _TICK, "tick", data + 1)
        elif kind == "hello":
            hello_round(world)
            schedule((data + 1) * config.hello_interval, _HELLO, "hello", data + 1)
        elif kind == "backbone":
            recompute_backbone(world, algorithm)
            schedule(first_backbone + (data + 1) * config.recompute_interval, _BACKBONE,
                     "backbone", data + 1)
        elif kind == "packet":
            i, start, k = data
            s, d = flows[i]
            world.log("cbr", s, f"dst={d} seq={k}")
            send_packet(world, s, d)
            schedule(start + (k + 1) * period, _PACKET, "packet", (i, start, k + 1))
        if world.ledger.deaths:
            end = world.ledger.first_death
            break
    if not world.ledger.deaths and idle_since < duration:
        world.now = duration
        for u in world.nodes:
            world.spend(u, Activity.IDLE, duration - idle_since)
        if world.ledger.deaths:
            end = world.ledger.first_death

    sizes = world.cds_sizes
    return MetricsRecord(
        algorithm=algorithm, mode=mode, n=n, v_max=float(v_max), seed=seed,
        cds_size_mean=sum(sizes) / len(sizes) if sizes else 0.0,
        lifetime_s=min(end, duration), rreq_total=world.rreq_total,
        sent=world.sent, delivered=world.delivered, discoveries=world.discoveries,
        failed_discoveries=world.failed_discoveries, restores=world.restores,
        stale_backbones=world.stale_backbones,
    )


def _stream_seed(seed: int, n: int, name: str) -> str:
    return f"{seed}:{n}:{name}"
