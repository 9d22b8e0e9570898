"""Random DAG generation: the wiring backbone of every network.

Nodes are numbered 1..n and every edge (i, j) satisfies i < j, so the
graph is acyclic by construction and node order is a valid topological
order. Node 1 is the designated initial node; it is the only node allowed
to have no in-edges.

Randomness comes from numpy's PCG64 generator seeded with the 64-bit seed
stored on the spec, drawing one uniform variate per candidate pair in
lexicographic (i, j) order. That rule is part of the on-disk contract:
the same (n, p, seed) triple regenerates the same edge set anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphSpec",
    "generate_random_dag",
    "in_neighbors",
    "out_neighbors",
    "degree_histogram",
    "graph_to_text",
    "graph_from_text",
]


@dataclass(frozen=True)
class GraphSpec:
    """An immutable sampled DAG plus the parameters that produced it.

    ``repaired_edges`` records the edges added by orphan repair (a subset
    of ``edges``); it is bookkeeping only and is not serialized.
    """

    node_count: int
    connection_probability: float
    seed: int
    edges: frozenset[tuple[int, int]]
    repaired_edges: frozenset[tuple[int, int]] = field(default=frozenset())

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 1:
            raise ValueError(f"node_count must be positive, got {n}")
        if not (0.0 < self.connection_probability <= 1.0):
            raise ValueError(
                f"connection_probability must be in (0, 1], got {self.connection_probability}"
            )
        for i, j in self.edges:
            if not (1 <= i < j <= n):
                raise ValueError(f"edge ({i}, {j}) violates 1 <= i < j <= {n}")
        if not self.repaired_edges <= self.edges:
            raise ValueError("repaired_edges must be a subset of edges")


def generate_random_dag(n: int, p: float, seed: int) -> GraphSpec:
    """Sample a DAG on nodes 1..n: each pair i < j is wired with probability p.

    After sampling, any node j >= 2 left without an in-edge receives the
    edge (1, j) so that every non-initial node has at least one input.
    Deterministic for a given (n, p, seed).
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got n={n}")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must be in (0, 1], got {p}")

    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(1, n) for j in range(i + 1, n + 1)]
    draws = rng.random(len(pairs))
    edges = {pair for pair, u in zip(pairs, draws) if u < p}

    covered = {j for _, j in edges}
    repaired = {(1, j) for j in range(2, n + 1) if j not in covered}
    edges |= repaired

    return GraphSpec(
        node_count=n,
        connection_probability=float(p),
        seed=int(seed),
        edges=frozenset(edges),
        repaired_edges=frozenset(repaired),
    )


def in_neighbors(g: GraphSpec, i: int) -> set[int]:
    """Indices of nodes with an edge into node i (empty for the initial node)."""
    if not (1 <= i <= g.node_count):
        raise ValueError(f"node index {i} out of range 1..{g.node_count}")
    return {k for k, j in g.edges if j == i}


def out_neighbors(g: GraphSpec, i: int) -> set[int]:
    """Indices of nodes that node i feeds into."""
    if not (1 <= i <= g.node_count):
        raise ValueError(f"node index {i} out of range 1..{g.node_count}")
    return {j for k, j in g.edges if k == i}


def degree_histogram(g: GraphSpec) -> tuple[np.ndarray, np.ndarray]:
    """Histograms of in-degree and out-degree over the range 0..n-1.

    Entry d of each array counts the nodes with that degree, so the
    degree-weighted sum of either histogram equals the edge count.
    """
    n = g.node_count
    indeg = np.zeros(n, dtype=np.int64)
    outdeg = np.zeros(n, dtype=np.int64)
    for i, j in g.edges:
        outdeg[i - 1] += 1
        indeg[j - 1] += 1
    in_counts = np.bincount(indeg, minlength=n)
    out_counts = np.bincount(outdeg, minlength=n)
    return in_counts, out_counts


def graph_to_text(g: GraphSpec) -> str:
    """Serialize to the text format: header ``n p seed``, then sorted ``i j`` lines."""
    lines = [f"{g.node_count} {g.connection_probability!r} {g.seed}"]
    lines.extend(f"{i} {j}" for i, j in sorted(g.edges))
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> GraphSpec:
    """Parse the text format produced by :func:`graph_to_text`.

    Repair bookkeeping is not stored in the format, so ``repaired_edges``
    comes back empty.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty graph text")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"bad header {lines[0]!r}: expected 'n p seed'")
    n, p, seed = int(head[0]), float(head[1]), int(head[2])
    edges = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.add((int(parts[0]), int(parts[1])))
    return GraphSpec(node_count=n, connection_probability=p, seed=seed, edges=frozenset(edges))
