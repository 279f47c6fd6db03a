"""Random-waypoint mobility and a per-node energy ledger."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field, replace

PAUSE_TIME = 100.0


@dataclass(frozen=True)
class WaypointState:
    position: tuple[float, float]
    waypoint: tuple[float, float]
    speed: float = 0.0
    pause_left: float = 0.0
    area: tuple[float, float] = (1000.0, 1000.0)
    v_max: float = 5.0
    pause_time: float = PAUSE_TIME
    started: bool = False  # False until the first waypoint draw


def initial_state(position, area=(1000.0, 1000.0), v_max=5.0, pause_time=PAUSE_TIME) -> WaypointState:
    return WaypointState(tuple(position), tuple(position), 0.0, 0.0, tuple(area), v_max, pause_time)


def _draw_leg(state: WaypointState, rng: random.Random) -> WaypointState:
    w, h = state.area
    waypoint = (rng.uniform(0.0, w), rng.uniform(0.0, h))
    return replace(state, waypoint=waypoint, speed=rng.uniform(0.0, state.v_max),
                   pause_left=0.0, started=True)


def advance_position(state: WaypointState, dt: float, rng: random.Random) -> WaypointState:
    """Move ``state`` forward by ``dt`` seconds.

    Arrival at a waypoint starts a pause; when the pause runs out a new
    waypoint and speed are drawn from ``rng``.  Leftover time carries over
    across arrivals and pauses.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if not state.started:
        state = _draw_leg(state, rng)
    left = dt
    while left > 0:
        if state.pause_left > 0:
            if left < state.pause_left:
                return replace(state, pause_left=state.pause_left - left)
            left -= state.pause_left
            state = _draw_leg(replace(state, pause_left=0.0), rng)
            continue
        if state.speed <= 0:
            return state
        (x, y), (wx, wy) = state.position, state.waypoint
        dist = math.hypot(wx - x, wy - y)
        travel = state.speed * left
        if travel < dist:
            f = travel / dist
            return replace(state, position=(x + (wx - x) * f, y + (wy - y) * f))
        left -= dist / state.speed
        state = replace(state, position=state.waypoint, pause_left=state.pause_time)
    return state


def current_speed(state: WaypointState) -> float:
    if not state.started or state.pause_left > 0:
        return 0.0
    return state.speed


class Activity(enum.Enum):
    TX = "tx"
    RX = "rx"
    IDLE = "idle"


@dataclass
class EnergyLedger:
    residual: dict[int, float]
    tx_w: float = 1.4
    rx_w: float = 1.0
    idle_w: float = 0.013
    bitrate: float = 2e6
    deaths: dict[int, float] = field(default_factory=dict)
    initial: dict[int, float] = field(default_factory=dict)
    drawn: dict[int, float] = field(default_factory=dict)  # J requested, before clamping

    def __post_init__(self):
        if not self.initial:
            self.initial = dict(self.residual)
        for u in self.residual:
            self.drawn.setdefault(u, 0.0)

    def rating(self, activity: Activity) -> float:
        if activity is Activity.TX:
            return self.tx_w
        if activity is Activity.RX:
            return self.rx_w
        if activity is Activity.IDLE:
            return self.idle_w
        raise ValueError(f"unknown activity {activity!r}")

    @property
    def first_death(self) -> float | None:
        return min(self.deaths.values()) if self.deaths else None


def random_ledger(nodes, rng: random.Random, low: float = 1.0, high: float = 15.0, **ratings) -> EnergyLedger:
    return EnergyLedger({u: rng.uniform(low, high) for u in nodes}, **ratings)


def charge(ledger: EnergyLedger, node: int, activity: Activity, duration: float,
           now: float = 0.0) -> list[tuple[int, float]]:
    """Drain ``rating * duration`` joules from ``node``; returns new death events.

    Residual energy is clamped at zero.  The death timestamp is the instant
    inside ``[now, now + duration]`` at which the battery ran out.
    """
    if not isinstance(activity, Activity):
        raise ValueError(f"unknown activity {activity!r}")
    if duration < 0:
        raise ValueError("duration must be non-negative")
    watts = ledger.rating(activity)
    cost = watts * duration
    ledger.drawn[node] += cost
    before = ledger.residual[node]
    if cost < before:
        ledger.residual[node] = before - cost
        return []
    ledger.residual[node] = 0.0
    if node in ledger.deaths:
        return []
    t = now + (before / watts if watts > 0 else 0.0)
    ledger.deaths[node] = t
    return [(node, t)]


def packet_airtime(nbytes: int, ledger: EnergyLedger | float) -> float:
    bitrate = ledger.bitrate if isinstance(ledger, EnergyLedger) else float(ledger)
    if nbytes <= 0:
        raise ValueError("packet size must be positive")
    return nbytes * 8 / bitrate
