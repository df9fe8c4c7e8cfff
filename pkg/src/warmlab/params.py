"""Parameter ledger for the urn race and the tree reinforcement process.

A :class:`ParamSet` owns every scalar knob of the model:

``alpha``   reinforcement exponent (> 1),
``m``       head start of the dominant colour / target child tally,
``n``       number of competitor colours = tree arity,
``M``       urn step budget of the regularity check,
``eps``     time-regularity slack in (0, 1),
``q``       per-generation firing-rate decay in (0, 1),
``delta0``  late-time dominance slack in (0, 1/2),
``c1``      confidence constant of the winner-sum interval,
``mprime``  extended step budget ``ceil(M / (eps^2 q))``,
``s_minus`` / ``s_plus``  endpoints of the winner-sum confidence interval.

The derived quantities are computed here; :func:`validate` re-checks every
inter-parameter constraint and reports violations by name instead of
raising, so sweeps can triage bad cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

_INT_FIELDS = {"m", "n", "M", "mprime"}


@dataclass(frozen=True)
class ParamSet:
    alpha: float
    m: int
    n: int
    M: int
    eps: float
    q: float
    delta0: float
    c1: float
    mprime: int
    s_minus: float
    s_plus: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def to_config(self) -> str:
        """Flat ``key = value`` text, one field per line."""
        lines = [f"{k} = {v!r}" for k, v in sorted(asdict(self).items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "ParamSet":
        fields = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            fields[key] = int(value) if key in _INT_FIELDS else float(value)
        missing = {f.name for f in cls.__dataclass_fields__.values()} - set(fields)  # type: ignore[attr-defined]
        if missing:
            raise ValueError(f"missing keys: {sorted(missing)}")
        return cls(**fields)


@dataclass(frozen=True)
class VertexTimes:
    """Quiet/active time marks of a vertex with firing rate ``lam``.

    ``t0 * lam == eps`` and ``t1 * lam == M / eps`` hold exactly, so the
    marks are rate-invariant: a regular vertex stays silent before ``t0``
    and has fired at least ``M`` times by ``t1``.
    """

    t0: float
    t1: float


def vertex_times(p: ParamSet, lam: float) -> VertexTimes:
    if lam <= 0:
        raise ValueError("firing rate must be positive")
    return VertexTimes(t0=p.eps / lam, t1=p.M / (p.eps * lam))


def dominance_margin(alpha: float, delta: float) -> float:
    """``(3 d / (1 - 2 d))**alpha - d / 2``; negative iff the slack works."""
    return (3.0 * delta / (1.0 - 2.0 * delta)) ** alpha - delta / 2.0


def derive_delta0(alpha: float, safety: float = 0.99) -> float:
    """Largest valid dominance slack, shrunk by ``safety``.

    The constraint ``(3 d/(1-2 d))**alpha <= d/2`` has a unique crossing on
    (0, 1/2) because the ratio of the two sides is strictly increasing in
    ``d`` for ``alpha > 1``.  We bisect for the crossing and return
    ``safety`` times it, which makes the inequality strict and the output
    deterministic.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dominance_margin(alpha, mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return safety * lo


def derive_s_bounds(alpha: float, m: int, c1: float) -> tuple[float, float]:
    """Confidence-interval endpoints for the winner's arrival-series sum.

    ``s_pm = 1/((alpha-1) m^(alpha-1)) +- c1 / m^(alpha-1/2)``.  Rejects
    combinations where the lower endpoint is not positive (``m`` too small
    for the given ``c1``).
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if m < 1:
        raise ValueError("m must be a positive integer")
    centre = 1.0 / ((alpha - 1.0) * m ** (alpha - 1.0))
    half = c1 / m ** (alpha - 0.5)
    s_minus = centre - half
    s_plus = centre + half
    if s_minus <= 0.0:
        raise ValueError(
            f"s_minus = {s_minus:.6g} <= 0: m={m} is too small for c1={c1} "
            f"(need c1/sqrt(m) < 1/(alpha-1))"
        )
    return s_minus, s_plus


def derive_n(alpha: float, m: int, p_lower: float) -> int:
    """Competitor count ``ceil(100 m^alpha / p_lower)``.

    ``p_lower`` is an externally supplied estimate of the probability that a
    competitor's (m-1)-term arrival sum falls below ``s_minus``; it is kept
    as an explicit input so this module stays free of randomness.
    """
    if not (0.0 < p_lower <= 1.0):
        raise ValueError("p_lower must lie in (0, 1]")
    return math.ceil(100.0 * m**alpha / p_lower)


def build_params(
    alpha: float,
    m: int,
    n: int,
    M: int,
    eps: float,
    q: float,
    c1: float = 6.0,
) -> ParamSet:
    """Assemble a ParamSet, computing every derived field."""
    delta0 = derive_delta0(alpha)
    s_minus, s_plus = derive_s_bounds(alpha, m, c1)
    mprime = math.ceil(M / (eps * eps * q))
    return ParamSet(
        alpha=float(alpha),
        m=int(m),
        n=int(n),
        M=int(M),
        eps=float(eps),
        q=float(q),
        delta0=float(delta0),
        c1=float(c1),
        mprime=int(mprime),
        s_minus=float(s_minus),
        s_plus=float(s_plus),
    )


def validate(p: ParamSet) -> list[str]:
    """Return the names of all violated constraints (empty list = ok).

    Validation never raises; boundary cases count as violations because
    every inter-parameter inequality is strict.
    """
    bad: list[str] = []
    if not p.alpha > 1.0:
        bad.append("alpha_range")
    if p.m < 1:
        bad.append("m_range")
    if p.n < 1:
        bad.append("n_range")
    if p.M < 1:
        bad.append("M_range")
    if not (0.0 < p.eps < 1.0):
        bad.append("eps_range")
    if not (0.0 < p.q < 1.0):
        bad.append("q_range")
    if not (0.0 < p.delta0 < 0.5):
        bad.append("delta0_range")
    if p.c1 <= 0.0:
        bad.append("c1_range")

    # Strict inequalities between parameters; guard against range failures
    # above so the arithmetic below cannot blow up.
    if "alpha_range" not in bad and "delta0_range" not in bad:
        if not dominance_margin(p.alpha, p.delta0) < 0.0:
            bad.append("delta0_strict")
    if not p.M > 4 * p.m * p.n:
        bad.append("M_gt_4mn")
    if "eps_range" not in bad and "q_range" not in bad:
        if not p.q < min(p.eps**2 / p.M, p.delta0 * p.eps**2 / p.n):
            bad.append("q_upper_bound")
        if p.mprime != math.ceil(p.M / (p.eps * p.eps * p.q)):
            bad.append("mprime_formula")
    if "alpha_range" not in bad and "m_range" not in bad:
        try:
            sm, sp = derive_s_bounds(p.alpha, p.m, p.c1)
        except ValueError:
            bad.append("s_bounds")
        else:
            if not (
                math.isclose(sm, p.s_minus, rel_tol=1e-12, abs_tol=1e-300)
                and math.isclose(sp, p.s_plus, rel_tol=1e-12, abs_tol=1e-300)
            ):
                bad.append("s_bounds")
    return bad
