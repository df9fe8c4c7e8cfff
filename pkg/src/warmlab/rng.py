"""Deterministic seed hierarchy and uniform/exponential streams.

Every random quantity in the package is drawn from a :class:`UniformStream`.
Streams are derived from a base seed plus a tuple of string/int labels via
SHA-256, so adding a new consumer (a vertex, a replica, a diagnostic) never
perturbs the draws seen by existing consumers.  Exponential variates are
produced as ``-log(U)`` from the same stream, which keeps the sequential urn
engine and the exponential-embedding engine reproducible from one seed.
"""

from __future__ import annotations

import hashlib

import numpy as np


class StreamExhausted(RuntimeError):
    """Raised when a finite stream runs out of variates."""


def derive_seed(base: int, *labels) -> int:
    """Derive a 128-bit child seed from a base seed and a label path."""
    h = hashlib.sha256()
    h.update(str(int(base)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(repr(lab).encode())
    return int.from_bytes(h.digest()[:16], "big")


class UniformStream:
    """Infinite stream of i.i.d. uniforms on (0, 1] backed by PCG64.

    Uniforms live on the half-open interval (0, 1] so that the cumulative
    selection rule ``sum_{i'<i} w < u*W <= sum_{i'<=i} w`` always has a
    solution and ``-log(u)`` is finite.
    """

    def __init__(self, seed: int, *labels):
        self.seed = derive_seed(seed, *labels) if labels else int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self.consumed = 0

    def spawn(self, *labels) -> "UniformStream":
        """Child stream; independent of this stream's consumption state."""
        return UniformStream(self.seed, *labels)

    def uniform(self) -> float:
        self.consumed += 1
        # random() is [0, 1); flip to (0, 1].
        return 1.0 - self._gen.random()

    def uniforms(self, k: int) -> np.ndarray:
        self.consumed += k
        return 1.0 - self._gen.random(k)

    def exponential(self) -> float:
        return -float(np.log(self.uniform()))

    def exponentials(self, k: int) -> np.ndarray:
        return -np.log(self.uniforms(k))


class FixedStream(UniformStream):
    """Finite stream replaying a given sequence of uniforms.

    Used to re-run urn engines on recorded variates.  Exhaustion is a hard
    error: silently recycling variates would corrupt event evaluations.
    """

    def __init__(self, values):
        self.values = np.asarray(list(values), dtype=float)
        if self.values.size and (self.values.min() <= 0.0 or self.values.max() > 1.0):
            raise ValueError("uniform values must lie in (0, 1]")
        self.seed = None
        self.consumed = 0

    def spawn(self, *labels):  # pragma: no cover - defensive
        raise TypeError("FixedStream cannot spawn substreams")

    def uniform(self) -> float:
        if self.consumed >= self.values.size:
            raise StreamExhausted(
                f"stream of {self.values.size} uniforms exhausted"
            )
        v = float(self.values[self.consumed])
        self.consumed += 1
        return v

    def uniforms(self, k: int) -> np.ndarray:
        if self.consumed + k > self.values.size:
            raise StreamExhausted(
                f"requested {k} uniforms, only "
                f"{self.values.size - self.consumed} left"
            )
        out = self.values[self.consumed : self.consumed + k].copy()
        self.consumed += k
        return out
