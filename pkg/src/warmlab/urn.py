"""Single nonlinear Polya urn: sequential engine, exponential race, events.

Colours are indexed ``0..n`` with colour 0 the head-start colour (initial
tally ``m``) and colours ``1..n`` the competitors (initial tally 1 each).
Selection weights are ``tally**alpha``.

Two engines produce the same law:

* :func:`run_sequential` applies the cumulative-weight rule step by step,
  one uniform per selection.

* :func:`run_rubin` realises the race between arrival series: colour 0
  arrives at the partial sums of ``xi_j / j**alpha`` for ``j >= m`` and each
  competitor ``k`` at the partial sums of ``eta_{j,k} / j**alpha`` for
  ``j >= 1``.  The infinite winner series is never summed; it is bracketed
  by ``[partial, partial + tail_allowance]`` and the bracket is tightened
  until every comparison the outcome needs is resolved (or a cap is hit,
  which yields an undecided outcome rather than a guess).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .rng import UniformStream


class UndecidedOutcome(ValueError):
    """Raised when an event is evaluated on an unresolved outcome."""


class EventTie(RuntimeError):
    """Two race arrivals coincide exactly; the replica cannot be ordered."""


@dataclass(frozen=True)
class UrnState:
    tallies: tuple[int, ...]
    step: int = 0

    def __post_init__(self):
        if any(t < 1 for t in self.tallies):
            raise ValueError("every tally must be >= 1")

    @property
    def colours(self) -> int:
        return len(self.tallies)


def initial_state(m: int, n: int) -> UrnState:
    """Head-start state ``(m, 1, ..., 1)`` with ``n`` competitors."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    return UrnState(tallies=(m,) + (1,) * n)


@dataclass(frozen=True)
class UrnTrace:
    initial: UrnState
    choices: tuple[int, ...]
    uniforms_consumed: int

    def final_state(self) -> UrnState:
        tallies = list(self.initial.tallies)
        for c in self.choices:
            tallies[c] += 1
        return UrnState(tuple(tallies), self.initial.step + len(self.choices))

    def selection_counts(self) -> list[int]:
        counts = [0] * self.initial.colours
        for c in self.choices:
            counts[c] += 1
        return counts

    def to_json(self) -> str:
        return json.dumps(
            {
                "initial": list(self.initial.tallies),
                "choices": list(self.choices),
                "uniforms_consumed": self.uniforms_consumed,
            },
            sort_keys=True,
        )


def select_weighted(weights, u: float) -> int:
    """Index ``i`` with ``sum_{i'<i} w < u * sum(w) <= sum_{i'<=i} w``.

    A ``u`` landing exactly on a cumulative boundary resolves to the lower
    index.  Shared by the urn and the tree simulator so both apply the
    selection rule through one code path.
    """
    total = 0.0
    for w in weights:
        total += w
    target = u * total
    cum = 0.0
    last = len(weights) - 1
    for i, w in enumerate(weights):
        cum += w
        if cum >= target:
            return i
    return last  # float round-off guard; u <= 1 makes this unreachable


def select_colour(state: UrnState, u: float, alpha: float) -> int:
    """One selection from ``state`` driven by the uniform ``u``."""
    if not (0.0 < u <= 1.0):
        raise ValueError("u must lie in (0, 1]")
    return select_weighted([t**alpha for t in state.tallies], u)


def run_sequential(
    initial: UrnState, alpha: float, steps: int, stream: UniformStream
) -> UrnTrace:
    """Apply the selection rule ``steps`` times, consuming one uniform each.

    Stream exhaustion (for finite replay streams) is a hard error.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    us = stream.uniforms(steps)
    tallies = list(initial.tallies)
    weights = [t**alpha for t in tallies]
    choices = []
    for u in us:
        i = select_weighted(weights, float(u))
        choices.append(i)
        tallies[i] += 1
        weights[i] = tallies[i] ** alpha
    return UrnTrace(
        initial=initial, choices=tuple(choices), uniforms_consumed=steps
    )


# --------------------------------------------------------------------------
# Exponential-embedding race


def tail_allowance(alpha: float, last_index: int, kappa: float) -> float:
    """Deterministic bound used for the winner-series bracket.

    The undrawn tail has mean ``sum_{j>L} j**-alpha <= L**(1-alpha)/(alpha-1)``;
    inflating by ``kappa`` bounds the probability that the tail exceeds the
    allowance by ``1/kappa`` (Markov).
    """
    return kappa * last_index ** (1.0 - alpha) / (alpha - 1.0)


@dataclass
class RubinClocks:
    """Partial arrival sums of one race replica.

    ``z_partial[k-1, r-1]`` is competitor ``k``'s ``r``-th arrival time;
    ``s_partial[r-1]`` is colour 0's ``r``-th arrival time (stored for the
    first ``len(s_partial)`` arrivals only).  ``s_bracket`` encloses the full
    winner series: the lower end is the drawn partial sum, the upper end
    adds the deterministic tail allowance for ``truncation_index``.
    """

    alpha: float
    m: int
    n: int
    s_partial: np.ndarray
    z_partial: np.ndarray
    s_bracket: tuple[float, float]
    truncation_index: int
    kappa: float
    cap_hit: bool


def _bracket_sides(values: np.ndarray, lo: float, hi: float):
    """-1 below the bracket (< S a.s.), +1 above (> S up to the Markov
    failure mass), 0 ambiguous."""
    side = np.zeros(values.shape, dtype=np.int8)
    side[values <= lo] = -1
    side[values >= hi] = 1
    return side


def run_rubin(
    alpha: float,
    m: int,
    n: int,
    stream: UniformStream,
    r_max: int | None = None,
    kappa: float = 20.0,
    j_initial: int | None = None,
    cap_factor: int = 2**20,
) -> RubinClocks:
    """Draw one race replica and tighten the winner bracket until decided.

    Competitor arrivals are drawn first (a fixed ``r_max * n`` block, row
    per arrival index), then winner gaps are drawn in doubling blocks, so
    enlarging the truncation never changes earlier variates.  The bracket is
    extended until the three comparison columns (arrival counts ``m-1``,
    ``m`` and ``2m``) are resolved for every competitor, or the total number
    of drawn winner terms reaches ``cap_factor * m``.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1 (the race series diverges)")
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if r_max is None:
        r_max = 2 * m
    if r_max < 2 * m:
        raise ValueError("r_max must cover 2m competitor arrivals")
    if j_initial is None:
        j_initial = max(4 * m, r_max, 8)

    # Competitor arrival matrix: eta[j-1, k-1] drawn j-major.
    eta = stream.exponentials(r_max * n).reshape(r_max, n)
    inv_j = (np.arange(1, r_max + 1, dtype=float) ** alpha) ** -1.0
    z_partial = np.cumsum(eta * inv_j[:, None], axis=0).T.copy()

    # Winner partial sums, drawn in doubling blocks.
    count = 0
    lo = 0.0
    s_partial = np.empty(r_max, dtype=float)
    cap = cap_factor * m
    need = [r for r in (m - 1, m, 2 * m) if r >= 1]
    watched = z_partial[:, [r - 1 for r in need]]

    block = j_initial
    cap_hit = False
    while True:
        block = min(block, cap - count)
        gaps = stream.exponentials(block)
        js = np.arange(m + count, m + count + block, dtype=float)
        terms = gaps / js**alpha
        csum = lo + np.cumsum(terms)
        take = min(r_max - count, block)
        if take > 0:
            s_partial[count : count + take] = csum[:take]
        lo = float(csum[-1])
        count += block
        last_index = m + count - 1
        hi = lo + tail_allowance(alpha, last_index, kappa)
        ambiguous = (watched > lo) & (watched < hi)
        if not ambiguous.any():
            break
        if count >= cap:
            cap_hit = True
            break
        block = count  # double the truncation

    return RubinClocks(
        alpha=alpha,
        m=m,
        n=n,
        s_partial=s_partial[: min(count, r_max)].copy(),
        z_partial=z_partial,
        s_bracket=(lo, hi),
        truncation_index=m + count - 1,
        kappa=kappa,
        cap_hit=cap_hit,
    )


@dataclass(frozen=True)
class PolyaOutcome:
    """Race verdict: which comparisons against the winner series resolved.

    ``exact_m_minus_1`` holds the competitors whose selection count is
    exactly ``m - 1``; ``only_zero_exceeds`` says no competitor was selected
    more than ``2m - 1`` times.  Both are trustworthy only when ``decided``.
    """

    only_zero_exceeds: bool
    exact_m_minus_1: frozenset[int]
    decided: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "only_zero_exceeds": self.only_zero_exceeds,
                "exact_m_minus_1": sorted(self.exact_m_minus_1),
                "decided": self.decided,
            },
            sort_keys=True,
        )


def evaluate_outcome(clocks: RubinClocks, m: int) -> PolyaOutcome:
    """Resolve selection-count events against the winner bracket.

    Competitor ``k`` is selected exactly ``m - 1`` times iff its arrival
    ``m - 1`` precedes the winner series total and arrival ``m`` does not;
    it stays within ``2m - 1`` selections iff arrival ``2m`` lands above.
    Any comparison falling inside the bracket leaves the outcome undecided.
    """
    if 2 * m > clocks.z_partial.shape[1]:
        raise ValueError("clocks do not cover 2m competitor arrivals")
    lo, hi = clocks.s_bracket
    z = clocks.z_partial
    n = clocks.n

    if m >= 2:
        side_a = _bracket_sides(z[:, m - 2], lo, hi)
    else:
        side_a = np.full(n, -1, dtype=np.int8)  # empty sum: 0 < S always
    side_b = _bracket_sides(z[:, m - 1], lo, hi)
    side_c = _bracket_sides(z[:, 2 * m - 1], lo, hi)

    member = (side_a == -1) & (side_b == 1)
    non_member = (side_a == 1) | (side_b == -1)
    member_decided = member | non_member

    if (side_c == -1).any():
        only_zero = False
        only_zero_decided = True
    elif (side_c == 1).all():
        only_zero = True
        only_zero_decided = True
    else:
        only_zero = False
        only_zero_decided = False

    decided = bool(member_decided.all() and only_zero_decided)
    exact = frozenset(int(k + 1) for k in np.flatnonzero(member))
    return PolyaOutcome(
        only_zero_exceeds=only_zero, exact_m_minus_1=exact, decided=decided
    )


def dominance_event(outcome: PolyaOutcome, min_exact: int = 5) -> bool:
    """Joint event: no competitor exceeds ``2m - 1`` selections and at
    least ``min_exact`` competitors sit at exactly ``m - 1``."""
    if not outcome.decided:
        raise UndecidedOutcome("outcome is undecided; cannot evaluate event")
    return outcome.only_zero_exceeds and len(outcome.exact_m_minus_1) >= min_exact


def dominance_event_from_trace(
    trace: UrnTrace, m: int, min_exact: int = 5
) -> bool:
    """Same joint event read off a finite sequential trace.

    The trace must start from the head-start state ``(m, 1, ..., 1)``.
    """
    tallies = trace.initial.tallies
    if tallies[0] != m or any(t != 1 for t in tallies[1:]):
        raise ValueError("trace must start from the (m, 1, ..., 1) state")
    counts = trace.selection_counts()
    rivals = counts[1:]
    only_zero = all(c <= 2 * m - 1 for c in rivals)
    exact = sum(1 for c in rivals if c == m - 1)
    return only_zero and exact >= min_exact


def first_event_colours(clocks: RubinClocks, count: int) -> list[int]:
    """Colours of the first ``count`` race arrivals, in time order.

    Requires the clocks to store at least ``count`` arrivals per colour.
    Exact arrival ties cannot be ordered and raise :class:`EventTie`.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if clocks.s_partial.shape[0] < count or clocks.z_partial.shape[1] < count:
        raise ValueError(
            f"clocks store too few arrivals for the first {count} events"
        )
    times = [(float(clocks.s_partial[r]), 0) for r in range(count)]
    for k in range(clocks.n):
        times.extend(
            (float(clocks.z_partial[k, r]), k + 1) for r in range(count)
        )
    times.sort()
    for (t1, _), (t2, _) in zip(times[:count], times[1 : count + 1]):
        if t1 == t2:
            raise EventTie(f"exact arrival tie at t={t1!r}")
    return [colour for _, colour in times[:count]]
