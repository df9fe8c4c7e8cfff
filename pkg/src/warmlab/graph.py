"""Rooted n-ary trees, rate assignment, and finitely-joined tree chains.

Vertices are addressed by label strings over the digits ``1..n``; the root
is the empty label and the depth of a vertex is the length of its label.
Firing rates decay geometrically with depth: ``lambda_v = q**depth``,
evaluated by repeated multiplication in a fixed order so the value is
reproducible bit for bit.

A :class:`CompositeGraph` chains several trees along a spine of roots
(consecutive roots joined by one edge), the standard way to glue
per-parameter tree examples into a single unbounded-degree graph.  Each
block root touches only its own children plus one or two spine edges, so
every block is finitely joined to the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

_ALPHABET = "123456789"

# Vertex ids: str label for TreeGraph, (block, label) for CompositeGraph.
# Edge ids: (parent_side_vertex, child_side_vertex); spine edges are ordered
# by block index.


def _rate_table(q: float, depth: int) -> list[float]:
    rates = [1.0]
    lam = 1.0
    for _ in range(depth):
        lam *= q
        rates.append(lam)
    return rates


@dataclass(frozen=True)
class TreeGraph:
    n: int
    depth: int
    q: float
    _rates: list[float] = field(repr=False, default_factory=list)

    def __post_init__(self):
        object.__setattr__(self, "_rates", _rate_table(self.q, self.depth))

    # -- vertex set ---------------------------------------------------
    def vertices(self) -> list[str]:
        out = [""]
        frontier = [""]
        for _ in range(self.depth):
            frontier = [v + c for v in frontier for c in _ALPHABET[: self.n]]
            out.extend(frontier)
        return out

    def is_vertex(self, v: str) -> bool:
        return (
            isinstance(v, str)
            and len(v) <= self.depth
            and all(c in _ALPHABET[: self.n] for c in v)
        )

    def vertex_count(self) -> int:
        return sum(self.n**d for d in range(self.depth + 1))

    # -- structure ----------------------------------------------------
    def parent(self, v: str) -> str | None:
        return v[:-1] if v else None

    def children(self, v: str) -> list[str]:
        if len(v) >= self.depth:
            return []
        return [v + c for c in _ALPHABET[: self.n]]

    def rate(self, v: str) -> float:
        return self._rates[len(v)]

    def incident(self, v: str) -> list[tuple]:
        """Incident edges in local-index order: parent edge first (index 0)
        for non-root vertices, then children in label order."""
        if not self.is_vertex(v):
            raise KeyError(f"unknown vertex {v!r}")
        edges = []
        if v:
            edges.append((self.parent(v), v))
        edges.extend((v, c) for c in self.children(v))
        return edges

    def edges(self) -> list[tuple]:
        return [(self.parent(v), v) for v in self.vertices() if v]

    def to_adjacency_text(self) -> str:
        lines = []
        for v in self.vertices():
            parent = self.parent(v)
            cols = [vertex_str(v), repr(self.rate(v))]
            cols.append(vertex_str(parent) if parent is not None else "-")
            cols.extend(vertex_str(c) for c in self.children(v))
            lines.append(" ".join(cols))
        return "\n".join(lines) + "\n"


def build_tree(n: int, depth: int, q: float) -> TreeGraph:
    """Complete n-ary tree truncated at ``depth``, root rate 1."""
    if n < 1 or n > 9:
        raise ValueError("arity must be in 1..9 (single-digit labels)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie in (0, 1)")
    return TreeGraph(n=n, depth=depth, q=q)


def spark_vertices(
    n: int, depth: int, count: int, with_anchors: bool = False
):
    """Designated vertices whose surrounding balls are pairwise disjoint.

    The ``k``-th vertex is ``'1' + '2'*(k-1) + '111'``; disjointness of the
    subtrees below ``'1' + '2'*(k-1) + '1'`` makes events attached to these
    vertices independent.  With ``with_anchors`` each entry also carries the
    anchor descendant ``v + str(n) + '111'`` (through the last child), the
    vertex at which seeded growth is started.  Labels that would exceed the
    truncation depth raise instead of being substituted.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if n < 2:
        raise ValueError("spark labels need arity >= 2")
    out = []
    for k in range(1, count + 1):
        v = "1" + "2" * (k - 1) + "111"
        if len(v) > depth:
            raise ValueError(
                f"spark vertex {k} needs depth {len(v)}, tree has {depth}"
            )
        if with_anchors:
            z = v + str(n) + "111"
            if len(z) > depth:
                raise ValueError(
                    f"anchor of spark vertex {k} needs depth {len(z)}, "
                    f"tree has {depth}"
                )
            out.append((v, z))
        else:
            out.append(v)
    return out


@dataclass(frozen=True)
class CompositeGraph:
    blocks: tuple[TreeGraph, ...]

    def block_count(self) -> int:
        return len(self.blocks)

    def vertices(self) -> list[tuple]:
        return [
            (j, v)
            for j, block in enumerate(self.blocks)
            for v in block.vertices()
        ]

    def is_vertex(self, v) -> bool:
        if not (isinstance(v, tuple) and len(v) == 2):
            return False
        j, label = v
        return (
            isinstance(j, int)
            and 0 <= j < len(self.blocks)
            and self.blocks[j].is_vertex(label)
        )

    def vertex_count(self) -> int:
        return sum(b.vertex_count() for b in self.blocks)

    def rate(self, v) -> float:
        j, label = v
        return self.blocks[j].rate(label)

    def parent(self, v):
        j, label = v
        return (j, label[:-1]) if label else None

    def children(self, v) -> list:
        j, label = v
        return [(j, c) for c in self.blocks[j].children(label)]

    def spine_edges(self) -> list[tuple]:
        return [
            ((j, ""), (j + 1, "")) for j in range(len(self.blocks) - 1)
        ]

    def incident(self, v) -> list[tuple]:
        """Local-index order: parent edge (non-roots), the children, then
        for block roots the spine edges (previous block, then next)."""
        if not self.is_vertex(v):
            raise KeyError(f"unknown vertex {v!r}")
        j, label = v
        edges = []
        if label:
            edges.append((self.parent(v), v))
        edges.extend((v, c) for c in self.children(v))
        if not label:
            if j > 0:
                edges.append(((j - 1, ""), (j, "")))
            if j < len(self.blocks) - 1:
                edges.append(((j, ""), (j + 1, "")))
        return edges

    def edges(self) -> list[tuple]:
        out = []
        for j, block in enumerate(self.blocks):
            out.extend(((j, a), (j, b)) for a, b in block.edges())
        out.extend(self.spine_edges())
        return out

    def to_adjacency_text(self) -> str:
        lines = []
        for v in self.vertices():
            parent = self.parent(v)
            cols = [vertex_str(v), repr(self.rate(v))]
            cols.append(vertex_str(parent) if parent is not None else "-")
            rest = [e[0] if e[1] == v else e[1] for e in self.incident(v)]
            cols.extend(
                vertex_str(u)
                for u in rest
                if parent is None or u != parent
            )
            lines.append(" ".join(cols))
        return "\n".join(lines) + "\n"


def build_composite(blocks) -> CompositeGraph:
    """Chain of trees ``(n_j, q_j, D_j)`` joined root to root."""
    specs = list(blocks)
    if not specs:
        raise ValueError("need at least one block")
    trees = tuple(build_tree(n, d, q) for n, q, d in specs)
    return CompositeGraph(blocks=trees)


def neighbours(graph, v) -> list[tuple]:
    """Ordered incident-edge list of ``v``; position = local edge index."""
    return graph.incident(v)


def vertex_str(v) -> str:
    """Printable vertex id: '.' for the root label."""
    if isinstance(v, tuple):
        j, label = v
        return f"{j}.{label or '.'}"
    return v or "."


def edge_str(e) -> str:
    a, b = e
    return f"{vertex_str(a)}-{vertex_str(b)}"
