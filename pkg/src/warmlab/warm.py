"""Discrete-event simulation of the reinforcement process on a graph.

Every vertex carries an independent Poisson clock with rate
``lambda_v = q**depth``.  When the clock of ``v`` fires, one edge incident
to ``v`` is selected with probability proportional to ``tally**alpha``
(ties on the cumulative boundary resolve to the lower local index, exactly
as in the single urn) and its tally increases by one.

Per-vertex randomness comes from substreams derived as
``hash(seed, purpose, vertex)``, so enlarging the graph or the horizon
never perturbs the draws of existing vertices.  Clock arrivals are drawn
lazily from a priority queue, keeping memory linear in the vertex count.
"""

from __future__ import annotations

import heapq
import io
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .graph import edge_str, vertex_str
from .rng import UniformStream
from .urn import select_weighted


class ChronologyTie(RuntimeError):
    """Two firings share an exact time stamp; the replica is an RNG fault."""


@dataclass(frozen=True)
class WarmConfig:
    graph: object
    alpha: float
    horizon: float
    seed: int
    record_uniforms: bool = True
    event_cap: int = 1_000_000

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.event_cap < 1:
            raise ValueError("event_cap must be positive")


@dataclass(frozen=True)
class FiringEvent:
    vertex: object
    k: int  # firing ordinal at this vertex, 1-based
    time: float
    edge_index: int  # local index of the reinforced edge
    uniform: float


@dataclass
class WarmTrajectory:
    config: WarmConfig
    events: list[FiringEvent]
    final_tallies: dict
    cap_hit: bool
    _vertex_times: dict = field(default_factory=dict, repr=False)
    _vertex_uniforms: dict = field(default_factory=dict, repr=False)
    _edge_times: dict = field(default_factory=dict, repr=False)
    _indexed: bool = field(default=False, repr=False)

    # -- lazy indexes ---------------------------------------------------
    def _build_index(self):
        if self._indexed:
            return
        incid = {}
        vt: dict = {}
        vu: dict = {}
        et: dict = {e: [] for e in self.final_tallies}
        for ev in self.events:
            if ev.vertex not in incid:
                incid[ev.vertex] = self.config.graph.incident(ev.vertex)
            vt.setdefault(ev.vertex, []).append(ev.time)
            vu.setdefault(ev.vertex, []).append(ev.uniform)
            et[incid[ev.vertex][ev.edge_index]].append(ev.time)
        self._vertex_times = vt
        self._vertex_uniforms = vu
        self._edge_times = et
        self._indexed = True

    def vertex_times(self, v) -> list[float]:
        if not self.config.graph.is_vertex(v):
            raise KeyError(f"unknown vertex {v!r}")
        self._build_index()
        return self._vertex_times.get(v, [])

    def vertex_uniforms(self, v) -> list[float]:
        if not self.config.graph.is_vertex(v):
            raise KeyError(f"unknown vertex {v!r}")
        self._build_index()
        return self._vertex_uniforms.get(v, [])

    def edge_times(self, e) -> list[float]:
        if e not in self.final_tallies:
            raise KeyError(f"unknown edge {e!r}")
        self._build_index()
        return self._edge_times[e]


def simulate(config: WarmConfig) -> WarmTrajectory:
    """Run one trajectory up to the horizon (or the event-count cap).

    Firings are processed in global chronological order.  An exact time tie
    between two firings is a measure-zero RNG fault and aborts the replica.
    Hitting the event cap is reported through ``cap_hit``, never silent.
    """
    g = config.graph
    alpha = config.alpha
    tallies = {e: 1 for e in g.edges()}
    incident = {}
    clock = {}
    choice = {}
    counts = {}
    heap = []
    for v in g.vertices():
        vs = vertex_str(v)
        clock[v] = UniformStream(config.seed, "clock", vs)
        choice[v] = UniformStream(config.seed, "choice", vs)
        incident[v] = g.incident(v)
        counts[v] = 0
        t = clock[v].exponential() / g.rate(v)
        heapq.heappush(heap, (t, vs, v))

    events: list[FiringEvent] = []
    cap_hit = False
    last_t = -1.0
    while heap:
        t, vs, v = heap[0]
        if t > config.horizon:
            break
        if len(events) >= config.event_cap:
            cap_hit = True
            break
        heapq.heapreplace(
            heap, (t + clock[v].exponential() / g.rate(v), vs, v)
        )
        if t == last_t:
            raise ChronologyTie(f"coincident firings at t={t!r}")
        last_t = t
        counts[v] += 1
        u = choice[v].uniform()
        edges = incident[v]
        i = select_weighted([tallies[e] ** alpha for e in edges], u)
        tallies[edges[i]] += 1
        events.append(
            FiringEvent(
                vertex=v,
                k=counts[v],
                time=t,
                edge_index=i,
                uniform=u if config.record_uniforms else float("nan"),
            )
        )
    return WarmTrajectory(
        config=config, events=events, final_tallies=tallies, cap_hit=cap_hit
    )


def firing_count(traj: WarmTrajectory, v, t: float) -> int:
    """Number of firings of ``v`` up to and including time ``t``."""
    if t > traj.config.horizon:
        raise ValueError("t exceeds the simulated horizon")
    return bisect_right(traj.vertex_times(v), t)


def tally_at(traj: WarmTrajectory, e, t: float) -> int:
    """Edge tally at time ``t``, reconstructed by replay (tally_0 = 1)."""
    if t > traj.config.horizon:
        raise ValueError("t exceeds the simulated horizon")
    return 1 + bisect_right(traj.edge_times(e), t)


def linear_rate(traj: WarmTrajectory, e, window: tuple[float, float]) -> float:
    """Reinforcements of ``e`` per unit time over ``window``."""
    t_a, t_b = window
    if not t_a < t_b:
        raise ValueError("window must satisfy t_a < t_b")
    if t_b > traj.config.horizon:
        raise ValueError("window exceeds the simulated horizon")
    return (tally_at(traj, e, t_b) - tally_at(traj, e, t_a)) / (t_b - t_a)


@dataclass(frozen=True)
class SurvivalStat:
    rate: float
    lam: float
    threshold: float
    surviving: bool


def classify_surviving(traj: WarmTrajectory, eps: float) -> dict:
    """Finite-horizon survival proxy for every edge.

    An edge is flagged surviving when its reinforcement rate over the
    trailing half of the horizon reaches ``eps * lambda / 4`` -- half the
    asymptotic per-vertex bound, with the late window chosen because finite
    horizons fluctuate below the liminf.  Raw rates are reported alongside
    so callers can re-threshold.  ``lambda`` is the rate of the deeper
    (child-side) endpoint; for spine edges both endpoints are roots of
    rate 1.
    """
    g = traj.config.graph
    T = traj.config.horizon
    out = {}
    for e in traj.final_tallies:
        lam = g.rate(e[1])
        rate = linear_rate(traj, e, (T / 2.0, T))
        thr = eps * lam / 4.0
        out[e] = SurvivalStat(
            rate=rate, lam=lam, threshold=thr, surviving=rate >= thr
        )
    return out


# --------------------------------------------------------------------------
# serialisation


def events_to_csv(traj: WarmTrajectory) -> str:
    buf = io.StringIO()
    buf.write("time,vertex,k,edge_index,uniform\n")
    for ev in traj.events:
        buf.write(
            f"{ev.time!r},{vertex_str(ev.vertex)},{ev.k},"
            f"{ev.edge_index},{ev.uniform!r}\n"
        )
    return buf.getvalue()


def tallies_to_csv(traj: WarmTrajectory) -> str:
    buf = io.StringIO()
    buf.write("edge,tally\n")
    for e in sorted(traj.final_tallies, key=edge_str):
        buf.write(f"{edge_str(e)},{traj.final_tallies[e]}\n")
    return buf.getvalue()


def conservation_ok(traj: WarmTrajectory) -> bool:
    """Sum of final tallies equals edge count plus event count."""
    total = sum(traj.final_tallies.values())
    return total == len(traj.final_tallies) + len(traj.events)
