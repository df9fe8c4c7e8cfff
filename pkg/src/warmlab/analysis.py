"""Post-hoc evaluation of named per-vertex events on recorded trajectories.

All conditions quantify over every firing index (or all times), so a finite
trajectory can *refute* them but can confirm them only provisionally.
Verdicts are therefore three-valued in effect: a :class:`Verdict` carries
the boolean outcome over the realized data plus a ``limited`` flag meaning
"data ran out before the condition was fully checked".  Aggregators count
only decided verdicts and report the undecided fraction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import vertex_str
from .params import ParamSet, vertex_times
from .rng import FixedStream
from .urn import dominance_event_from_trace, initial_state, run_sequential
from .warm import WarmTrajectory


@dataclass(frozen=True)
class Verdict:
    value: bool
    limited: bool

    @property
    def decided(self) -> bool:
        return not self.limited

    def as_dict(self) -> dict:
        return {"value": self.value, "limited": self.limited}


def v_and(*verdicts: Verdict) -> Verdict:
    """Conjunction with honest limitation: a decided False decides the
    conjunction; otherwise the conjunction is limited if any input is."""
    if any((not v.value) and v.decided for v in verdicts):
        return Verdict(False, False)
    value = all(v.value for v in verdicts)
    limited = any(v.limited for v in verdicts)
    return Verdict(value, limited)


# --------------------------------------------------------------------------
# Clock regularity


def check_time_regular(traj: WarmTrajectory, v, eps: float) -> Verdict:
    """Realized firing times of ``v`` must satisfy
    ``eps * k / lam < T_k < k / (eps * lam)`` for every k.

    A future firing index can already be refuted when the vertex failed to
    fire ``k`` times by ``k/(eps*lam) <= horizon``.  A True verdict is
    always horizon-limited (unseen indices remain).
    """
    g = traj.config.graph
    lam = g.rate(v)
    times = traj.vertex_times(v)
    for k, t in enumerate(times, start=1):
        if not (eps * k / lam < t < k / (eps * lam)):
            return Verdict(False, False)
    k_next = len(times) + 1
    if k_next / (eps * lam) <= traj.config.horizon:
        return Verdict(False, False)  # should have fired k_next times by now
    return Verdict(True, True)


def check_time_good(traj: WarmTrajectory, v, eps: float) -> Verdict:
    """All children of ``v`` are time-regular.  Vacuous (and limited) for
    vertices whose children lie beyond the truncation depth."""
    children = traj.config.graph.children(v)
    if not children:
        return Verdict(True, True)
    return v_and(*(check_time_regular(traj, c, eps) for c in children))


# --------------------------------------------------------------------------
# Uniform-variable (urn) conditions


@dataclass(frozen=True)
class PolyaVerdicts:
    regular: Verdict
    non_disturbing: Verdict
    well_behaved: Verdict
    p_children: tuple[int, ...]
    checked_uniforms: int

    @property
    def good(self) -> Verdict:
        return v_and(self.regular, self.non_disturbing, self.well_behaved)


def check_polya_conditions(uniforms, p: ParamSet) -> PolyaVerdicts:
    """Evaluate the three uniform-variable conditions of one vertex.

    * regular: the offline urn on the first ``M`` uniforms, started from
      ``(m, 1, ..., 1)``, keeps every competitor at or below ``2m - 1``
      selections and puts at least five at exactly ``m - 1``.  The
      exactly-``m-1`` colours are the vertex's P-children.
    * non-disturbing: for each firing index ``j`` in ``M+1..mprime`` the
      uniform stays below ``1 - n * ((2m + j*q/eps^2) / (j/2))**alpha``.
      When that bound is not positive the condition is unsatisfiable at
      ``j`` and the verdict is False for any uniform, not clamped.
    * well behaved: for every ``j > mprime``, at most ``delta0 * j`` of the
      uniforms with index in ``mprime+1..j`` reach ``1 - delta0/2``.

    Only realized indices are checked; the verdicts carry the horizon flag
    and the number of uniforms actually inspected.
    """
    us = np.asarray(uniforms, dtype=float)
    k = us.size

    if k >= p.M:
        trace = run_sequential(
            initial_state(p.m, p.n), p.alpha, p.M, FixedStream(us[: p.M])
        )
        counts = trace.selection_counts()
        p_children = tuple(
            i for i in range(1, p.n + 1) if counts[i] == p.m - 1
        )
        regular = Verdict(dominance_event_from_trace(trace, p.m), False)
    else:
        p_children = ()
        regular = Verdict(False, True)

    non_disturbing = Verdict(True, k < p.mprime)
    for j in range(p.M + 1, min(p.mprime, k) + 1):
        bound = 1.0 - p.n * (
            (2.0 * p.m + j * p.q / p.eps**2) / (j / 2.0)
        ) ** p.alpha
        if us[j - 1] > bound:
            non_disturbing = Verdict(False, False)
            break

    well_behaved = Verdict(True, True)
    high = 0
    for j in range(p.mprime + 1, k + 1):
        if us[j - 1] >= 1.0 - p.delta0 / 2.0:
            high += 1
        if high > p.delta0 * j:
            well_behaved = Verdict(False, False)
            break

    return PolyaVerdicts(
        regular=regular,
        non_disturbing=non_disturbing,
        well_behaved=well_behaved,
        p_children=p_children,
        checked_uniforms=int(k),
    )


# --------------------------------------------------------------------------
# Parent behaviour


@dataclass(frozen=True)
class ParentVerdicts:
    nurturing: Verdict
    non_disturbing: Verdict

    @property
    def good(self) -> Verdict:
        return v_and(self.nurturing, self.non_disturbing)


def _parent_edge_choices(traj: WarmTrajectory, v):
    """Times at which the parent of ``v`` reinforced the edge to ``v``."""
    g = traj.config.graph
    parent = g.parent(v)
    if parent is None:
        raise ValueError("v must not be the root")
    edge = (parent, v)
    idx = g.incident(parent).index(edge)
    return [
        ev.time
        for ev in traj.events
        if ev.vertex == parent and ev.edge_index == idx
    ], parent


def check_parent(traj: WarmTrajectory, v, p: ParamSet) -> ParentVerdicts:
    """Nurturing: the parent reinforces the edge to ``v`` exactly ``m - 1``
    times by ``t0(v)``.  Non-disturbing: it never does between ``t0(v)``
    and ``t1(v)``."""
    g = traj.config.graph
    tv = vertex_times(p, g.rate(v))
    choices, _ = _parent_edge_choices(traj, v)
    horizon = traj.config.horizon

    early = sum(1 for t in choices if t <= tv.t0)
    if early > p.m - 1:
        # overshoot refutes nurturing regardless of horizon
        nurturing = Verdict(False, False)
    else:
        nurturing = Verdict(early == p.m - 1, horizon < tv.t0)

    mid = sum(1 for t in choices if tv.t0 < t <= tv.t1)
    if mid > 0:
        non_disturbing = Verdict(False, False)
    else:
        non_disturbing = Verdict(True, horizon < tv.t1)
    return ParentVerdicts(nurturing=nurturing, non_disturbing=non_disturbing)


def check_spark(traj: WarmTrajectory, v, p: ParamSet) -> Verdict:
    """Local ignition event seeding reinforced growth at ``v``.

    Requires depth(v) >= 2.  Conjunction of: silence of every neighbour of
    the parent through ``t0(v)`` and time-regularity of ``v``; exactly
    ``m - 1`` firings of the parent by ``t0(v)`` followed by silence until
    ``t1(v)``; and all those firings reinforcing the edge to ``v``.
    """
    g = traj.config.graph
    parent = g.parent(v)
    if parent is None or g.parent(parent) is None:
        raise ValueError("spark event needs depth(v) >= 2")
    tv = vertex_times(p, g.rate(v))
    horizon = traj.config.horizon
    # The event quantifies over [0, t1(v)] plus regularity of v's realized
    # firings, so it is decided once the horizon covers t1(v).
    limited = horizon < tv.t1

    # Bullet 1: neighbours of the parent silent through t0(v), v regular.
    neigh = set()
    for a, b in g.incident(parent):
        neigh.add(b if a == parent else a)
    for u in neigh:
        times = traj.vertex_times(u)
        if times and times[0] <= tv.t0:
            return Verdict(False, False)
    reg = check_time_regular(traj, v, p.eps)
    if reg.decided and not reg.value:
        return Verdict(False, False)

    # Bullet 2: parent fires exactly m-1 times by t0, then rests to t1.
    pt = traj.vertex_times(parent)
    early = sum(1 for t in pt if t <= tv.t0)
    if early > p.m - 1:
        return Verdict(False, False)
    if horizon >= tv.t0 and early != p.m - 1:
        return Verdict(False, False)
    if any(tv.t0 < t <= tv.t1 for t in pt):
        return Verdict(False, False)

    # Bullet 3: each early firing reinforced the edge to v.
    choices, _ = _parent_edge_choices(traj, v)
    early_on_edge = sum(1 for t in choices if t <= tv.t0)
    if early_on_edge != early:
        return Verdict(False, False)

    return Verdict(True, limited)


# --------------------------------------------------------------------------
# Disconnection event


@dataclass(frozen=True)
class DisconnectReport:
    e1: bool
    e2: bool
    final_tally: int
    violated: bool


def check_disconnect(traj: WarmTrajectory, v) -> DisconnectReport:
    """Uniform-variable conditions forcing the edge to the last child of
    ``v`` to stay unreinforced, evaluated over the realized firings.

    ``violated`` (both conditions hold yet the edge was reinforced) must be
    False on every trajectory: the step-by-step induction behind the
    conditions holds pathwise, so this is assertable per replica.
    """
    g = traj.config.graph
    if g.parent(v) is None:
        raise ValueError("v must not be the root")
    children = g.children(v)
    if not children:
        raise ValueError("v has no children within the truncation depth")
    last = children[-1]
    alpha = traj.config.alpha
    n = len(children)

    e1 = True
    for j0, u in enumerate(traj.vertex_uniforms(v)):
        w = (1.0 + j0 / n) ** alpha
        if not u <= w / (1.0 + w):
            e1 = False
            break
    e2 = True
    for j0, u in enumerate(traj.vertex_uniforms(last)):
        w = (1.0 + j0 / n) ** alpha
        if not u >= 1.0 / (1.0 + w):
            e2 = False
            break
    tally = traj.final_tallies[(v, last)]
    return DisconnectReport(
        e1=e1, e2=e2, final_tally=tally, violated=e1 and e2 and tally > 1
    )


# --------------------------------------------------------------------------
# Goodness report and crystallisation tree


@dataclass(frozen=True)
class VertexGoodness:
    vertex: object
    time_regular: Verdict
    time_good: Verdict
    polya_regular: Verdict
    polya_non_disturbing: Verdict
    polya_well_behaved: Verdict
    p_children: tuple[int, ...]
    checked_uniforms: int

    @property
    def polya_good(self) -> Verdict:
        return v_and(
            self.polya_regular,
            self.polya_non_disturbing,
            self.polya_well_behaved,
        )

    @property
    def tree_good(self) -> Verdict:
        return v_and(self.time_good, self.polya_good)

    def as_dict(self) -> dict:
        return {
            "vertex": vertex_str(self.vertex),
            "time_regular": self.time_regular.as_dict(),
            "time_good": self.time_good.as_dict(),
            "polya_regular": self.polya_regular.as_dict(),
            "polya_non_disturbing": self.polya_non_disturbing.as_dict(),
            "polya_well_behaved": self.polya_well_behaved.as_dict(),
            "polya_good": self.polya_good.as_dict(),
            "tree_good": self.tree_good.as_dict(),
            "p_children": list(self.p_children),
            "checked_uniforms": self.checked_uniforms,
        }


@dataclass
class GoodnessReport:
    params: ParamSet
    per_vertex: dict

    def __getitem__(self, v) -> VertexGoodness:
        return self.per_vertex[v]

    def __contains__(self, v) -> bool:
        return v in self.per_vertex

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": json.loads(self.params.to_json()),
                "vertices": [
                    g.as_dict()
                    for _, g in sorted(
                        self.per_vertex.items(), key=lambda kv: vertex_str(kv[0])
                    )
                ],
            },
            sort_keys=True,
        )


def analyse_trajectory(traj: WarmTrajectory, p: ParamSet) -> GoodnessReport:
    """Goodness ledger for every non-root vertex of a tree trajectory.

    The urn conditions are evaluated on the vertex's recorded uniforms
    exactly as standalone urns (not on the realized tallies), matching the
    decoupled definition of P-children.
    """
    g = traj.config.graph
    if getattr(g, "n", None) != p.n:
        raise ValueError(
            f"graph arity {getattr(g, 'n', None)} != ParamSet n {p.n}"
        )
    per_vertex = {}
    for v in g.vertices():
        if g.parent(v) is None:
            continue
        pol = check_polya_conditions(traj.vertex_uniforms(v), p)
        per_vertex[v] = VertexGoodness(
            vertex=v,
            time_regular=check_time_regular(traj, v, p.eps),
            time_good=check_time_good(traj, v, p.eps),
            polya_regular=pol.regular,
            polya_non_disturbing=pol.non_disturbing,
            polya_well_behaved=pol.well_behaved,
            p_children=pol.p_children,
            checked_uniforms=pol.checked_uniforms,
        )
    return GoodnessReport(params=p, per_vertex=per_vertex)


@dataclass
class CrystalTree:
    """Recursive closure of tree-good P-children rooted at one vertex.

    ``offspring_counts`` maps each node to the number of children appended
    below it; nodes in ``censored`` had undecided P-children or children
    outside the report, so their counts are floor estimates and are
    excluded from offspring statistics.  Empty when the root itself is not
    (decidedly) tree-good.
    """

    root: object
    nodes: set
    edges: set
    offspring_counts: dict
    censored: set

    def is_empty(self) -> bool:
        return not self.nodes

    def to_json(self) -> str:
        return json.dumps(
            {
                "root": vertex_str(self.root),
                "nodes": sorted(vertex_str(v) for v in self.nodes),
                "edges": sorted(
                    [vertex_str(a), vertex_str(b)] for a, b in self.edges
                ),
                "offspring_counts": {
                    vertex_str(v): c
                    for v, c in sorted(
                        self.offspring_counts.items(),
                        key=lambda kv: vertex_str(kv[0]),
                    )
                },
                "censored": sorted(vertex_str(v) for v in self.censored),
            },
            sort_keys=True,
        )


def _child_vertex(graph, v, colour: int):
    children = graph.children(v)
    if colour - 1 < len(children):
        return children[colour - 1]
    return None


def build_crystal_tree(report: GoodnessReport, graph, root) -> CrystalTree:
    """Breadth-first closure: start at ``root`` if decidedly tree-good,
    then append every decidedly tree-good P-child, recursively."""
    if root not in report:
        raise KeyError(f"goodness report does not cover {vertex_str(root)}")
    tg = report[root].tree_good
    if not (tg.value and tg.decided):
        return CrystalTree(
            root=root, nodes=set(), edges=set(), offspring_counts={}, censored=set()
        )
    nodes = {root}
    edges = set()
    offspring = {}
    censored = set()
    queue = [root]
    while queue:
        v = queue.pop(0)
        info = report[v]
        count = 0
        if info.polya_regular.limited:
            censored.add(v)
        for colour in info.p_children:
            child = _child_vertex(graph, v, colour)
            if child is None or child not in report:
                censored.add(v)
                continue
            ctg = report[child].tree_good
            if ctg.limited:
                censored.add(v)
            elif ctg.value:
                nodes.add(child)
                edges.add((v, child))
                offspring[v] = offspring.get(v, 0)
                count += 1
                queue.append(child)
        offspring[v] = count
    return CrystalTree(
        root=root,
        nodes=nodes,
        edges=edges,
        offspring_counts=offspring,
        censored=censored,
    )


@dataclass(frozen=True)
class GwStats:
    histogram: dict
    observations: int
    mean: float | None
    ci_low: float | None
    ci_high: float | None
    supercritical: bool
    note: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "observations": self.observations,
                "mean": self.mean,
                "ci_low": self.ci_low,
                "ci_high": self.ci_high,
                "supercritical": self.supercritical,
                "note": self.note,
            },
            sort_keys=True,
        )


def gw_statistics(trees) -> GwStats:
    """Pooled offspring distribution over uncensored crystal nodes.

    The supercriticality flag requires the lower confidence bound of the
    mean offspring number to exceed 1.
    """
    counts = []
    for t in trees:
        for v, c in t.offspring_counts.items():
            if v not in t.censored:
                counts.append(c)
    if not counts:
        return GwStats(
            histogram={},
            observations=0,
            mean=None,
            ci_low=None,
            ci_high=None,
            supercritical=False,
            note="no data",
        )
    arr = np.asarray(counts, dtype=float)
    hist: dict = {}
    for c in counts:
        hist[c] = hist.get(c, 0) + 1
    mean = float(arr.mean())
    if arr.size > 1:
        half = 1.959963984540054 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    else:
        half = float("inf")
    return GwStats(
        histogram=hist,
        observations=int(arr.size),
        mean=mean,
        ci_low=mean - half,
        ci_high=mean + half,
        supercritical=(mean - half) > 1.0,
        note="",
    )


def gw_to_csv(stats: GwStats) -> str:
    lines = ["offspring,count"]
    lines.extend(f"{k},{v}" for k, v in sorted(stats.histogram.items()))
    return "\n".join(lines) + "\n"
