"""Simulation laboratory for alpha-power reinforcement processes.

warmlab simulates two coupled families of stochastic processes:

* single nonlinear Polya urns with selection weights ``tally**alpha``,
  driven either sequentially by uniform variables or by the Rubin
  exponential-embedding race, and

* WARM reinforcement processes on rooted n-ary trees (and finitely-joined
  chains of such trees), where every vertex carries a Poisson clock and each
  firing reinforces one incident edge with probability proportional to
  ``tally**alpha``.

On top of the engines sits a Monte Carlo harness that estimates event
probabilities with Wilson confidence intervals, evaluates the per-vertex
goodness ledger on recorded trajectories, extracts crystallisation trees
with Galton-Watson offspring statistics, and verifies the quantitative
urn-race inequalities at desk scale.  Every run is reproducible from a
single 64-bit seed.
"""

__version__ = "0.1.0"

from . import analysis, graph, montecarlo, params, rng, urn, warm

__all__ = [
    "analysis",
    "graph",
    "montecarlo",
    "params",
    "rng",
    "urn",
    "warm",
    "__version__",
]
