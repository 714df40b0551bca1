"""Directed acyclic graphs with a source and a sink, and path distributions on them.

Edge weights are always handled in the log domain.  A weight of exactly zero
is represented by ``MASKED`` (``-inf``), which drops out of every log-sum-exp
without perturbing the other terms.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadEndpoints,
    CycleDetected,
    InvalidPath,
    NumericalDegeneracy,
    TooManyPaths,
    UnreachableEdge,
)

MASKED = -np.inf
DEFAULT_PATH_CAP = 10**6


def _readonly(a, dtype=None):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


def _lse(x):
    m = x.max(axis=-1)
    shift = np.where(np.isfinite(m), m, 0.0)
    return shift + np.log(np.exp(x - shift[..., None]).sum(axis=-1))


def logsumexp(x):
    """Log-sum-exp over the last axis.

    Rows made only of ``-inf`` return ``-inf`` (an empty sum of weights).
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return _lse(x)


@dataclass(frozen=True)
class Path:
    """An s->d path given by its ordered edge ids."""

    edges: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(int(e) for e in self.edges))

    @cached_property
    def incidence(self) -> frozenset[int]:
        return frozenset(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __len__(self):
        return len(self.edges)

    def __contains__(self, edge):
        return edge in self.incidence

    def __repr__(self):
        return f"Path{self.edges}"


@dataclass(frozen=True, eq=False)
class Dag:
    """A validated DAG.  Build it with :func:`build_dag`, not directly."""

    vertex_count: int
    tails: np.ndarray
    heads: np.ndarray
    source: int
    sink: int
    order: np.ndarray
    topo_label: np.ndarray
    max_path_length: int
    in_edges: tuple[np.ndarray, ...] = field(repr=False)
    out_edges: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def edge_count(self) -> int:
        return len(self.tails)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    def _level_plan(self, edges_at, other_end, rank):
        """Group vertices by ``rank``; no edge joins two vertices of equal rank.

        Each group carries padded (vertex, slot) matrices of incident edges and
        their far endpoints; padding points at edge id E, whose log-weight the
        caller sets to -inf.
        """
        plan = []
        for level in range(1, int(rank.max()) + 1):
            verts = np.flatnonzero(rank == level)
            verts = verts[[len(edges_at[v]) > 0 for v in verts]]
            if not len(verts):
                continue
            width = max(len(edges_at[v]) for v in verts)
            eidx = np.full((len(verts), width), self.edge_count, dtype=np.intp)
            for i, v in enumerate(verts):
                eidx[i, : len(edges_at[v])] = edges_at[v]
            ends = np.where(eidx < self.edge_count, other_end[np.minimum(eidx, self.edge_count - 1)], 0)
            plan.append((verts, eidx, ends))
        return plan

    @cached_property
    def _forward_plan(self):
        depth = np.zeros(self.vertex_count, dtype=np.intp)
        for u in self.order.tolist():
            for e in self.out_edges[u].tolist():
                depth[self.heads[e]] = max(depth[self.heads[e]], depth[u] + 1)
        return self._level_plan(self.in_edges, self.tails, depth)

    @cached_property
    def _backward_plan(self):
        height = np.zeros(self.vertex_count, dtype=np.intp)
        for u in self.order[::-1].tolist():
            for e in self.out_edges[u].tolist():
                height[u] = max(height[u], height[self.heads[e]] + 1)
        return self._level_plan(self.out_edges, self.heads, height)

    @cached_property
    def _min_plan(self):
        return [
            (u, self.out_edges[u], self.heads[self.out_edges[u]])
            for u in self.order[::-1].tolist()
            if len(self.out_edges[u])
        ]

    @cached_property
    def reach(self) -> np.ndarray:
        """``reach[u, v]`` is True iff v is reachable from u (reflexive)."""
        r = np.eye(self.vertex_count, dtype=bool)
        for u in self.order[::-1].tolist():
            for v in self.heads[self.out_edges[u]].tolist():
                r[u] |= r[v]
        r.flags.writeable = False
        return r

    @cached_property
    def cooccur(self) -> np.ndarray:
        """``cooccur[a, b]`` is True iff distinct edges a, b lie on a common s->d path."""
        t, h = self.tails, self.heads
        c = self.reach[h[:, None], t[None, :]] | self.reach[h[None, :], t[:, None]]
        np.fill_diagonal(c, False)
        c.flags.writeable = False
        return c

    def check_path(self, path: Path | Sequence[int]) -> Path:
        """Return ``path`` as a :class:`Path`, raising InvalidPath if it is not an s->d path."""
        if not isinstance(path, Path):
            path = Path(tuple(path))
        edges = path.edges
        if not edges:
            raise InvalidPath("empty path")
        if any(e < 0 or e >= self.edge_count for e in edges):
            raise InvalidPath(f"edge id out of range in {edges}")
        if self.tails[edges[0]] != self.source or self.heads[edges[-1]] != self.sink:
            raise InvalidPath(f"{edges} does not run from source to sink")
        for a, b in zip(edges, edges[1:]):
            if self.heads[a] != self.tails[b]:
                raise InvalidPath(f"edges {a} and {b} are not contiguous")
        return path


def build_dag(vertex_count: int, edge_list: Iterable[tuple[int, int]], source: int, sink: int) -> Dag:
    """Validate an edge list and return a topologically labeled :class:`Dag`.

    Parallel edges are allowed.  Every edge must lie on some source->sink path.
    """
    edge_list = [(int(a), int(b)) for a, b in edge_list]
    if vertex_count < 2:
        raise ValueError("need at least two vertices")
    if not edge_list:
        raise ValueError("edge list is empty")
    if source == sink:
        raise BadEndpoints("source and sink must differ")
    for v in (source, sink):
        if not 0 <= v < vertex_count:
            raise ValueError(f"vertex {v} out of range")
    for a, b in edge_list:
        if not (0 <= a < vertex_count and 0 <= b < vertex_count):
            raise ValueError(f"edge ({a}, {b}) references an unknown vertex")

    tails = np.array([a for a, _ in edge_list], dtype=np.intp)
    heads = np.array([b for _, b in edge_list], dtype=np.intp)
    ins = [[] for _ in range(vertex_count)]
    outs = [[] for _ in range(vertex_count)]
    for e, (a, b) in enumerate(edge_list):
        outs[a].append(e)
        ins[b].append(e)

    # Kahn's algorithm; the heap makes the order independent of insertion order.
    indeg = [len(x) for x in ins]
    heap = [v for v in range(vertex_count) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for e in outs[u]:
            v = edge_list[e][1]
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != vertex_count:
        raise CycleDetected("edge list contains a directed cycle")
    for a, b in edge_list:
        if b == source:
            raise BadEndpoints(f"edge ({a}, {b}) enters the source")
        if a == sink:
            raise BadEndpoints(f"edge ({a}, {b}) leaves the sink")

    from_source = np.zeros(vertex_count, dtype=bool)
    from_source[source] = True
    for u in order:
        if from_source[u]:
            from_source[heads[outs[u]]] = True
    to_sink = np.zeros(vertex_count, dtype=bool)
    to_sink[sink] = True
    for u in reversed(order):
        if any(to_sink[heads[e]] for e in outs[u]):
            to_sink[u] = True
    for e in range(len(edge_list)):
        if not (from_source[tails[e]] and to_sink[heads[e]]):
            raise UnreachableEdge(f"edge {e} {edge_list[e]} is not on any source->sink path")

    longest = np.full(vertex_count, -1, dtype=np.int64)
    longest[source] = 0
    for u in order:
        if longest[u] < 0:
            continue
        for e in outs[u]:
            longest[heads[e]] = max(longest[heads[e]], longest[u] + 1)

    label = np.empty(vertex_count, dtype=np.intp)
    label[order] = np.arange(vertex_count)
    return Dag(
        vertex_count=vertex_count,
        tails=_readonly(tails),
        heads=_readonly(heads),
        source=source,
        sink=sink,
        order=_readonly(order, dtype=np.intp),
        topo_label=_readonly(label),
        max_path_length=int(longest[sink]),
        in_edges=tuple(_readonly(x, dtype=np.intp) for x in ins),
        out_edges=tuple(_readonly(x, dtype=np.intp) for x in outs),
    )


@dataclass(frozen=True)
class FlowTable:
    """Log aggregate path weights from the source and to the sink, per vertex."""

    log_from_source: np.ndarray
    log_to_sink: np.ndarray
    log_total: np.ndarray | float


def _as_log_weights(dag: Dag, log_weights) -> np.ndarray:
    lw = np.asarray(log_weights, dtype=float)
    if lw.shape[-1:] != (dag.edge_count,):
        raise ValueError(f"expected {dag.edge_count} log-weights, got shape {lw.shape}")
    if np.isnan(lw).any() or np.isposinf(lw).any():
        raise ValueError("log-weights must be finite or MASKED")
    return lw


def weight_push(dag: Dag, log_weights) -> FlowTable:
    """Compute log H(s, u) and log H(u, d) for every vertex.

    ``log_weights`` may carry leading batch axes; each batch row is pushed
    independently.
    """
    lw = _as_log_weights(dag, log_weights)
    lw_ext = np.concatenate([lw, np.full(lw.shape[:-1] + (1,), MASKED)], axis=-1)
    shape = lw.shape[:-1] + (dag.vertex_count,)
    fwd = np.full(shape, MASKED)
    fwd[..., dag.source] = 0.0
    bwd = np.full(shape, MASKED)
    bwd[..., dag.sink] = 0.0
    with np.errstate(divide="ignore"):
        for verts, eidx, ends in dag._forward_plan:
            fwd[..., verts] = _lse(fwd[..., ends] + lw_ext[..., eidx])
        for verts, eidx, ends in dag._backward_plan:
            bwd[..., verts] = _lse(bwd[..., ends] + lw_ext[..., eidx])
    total = bwd[..., dag.source]
    return FlowTable(fwd, bwd, total)


def sample_path(dag: Dag, flow: FlowTable, log_weights, rng: np.random.Generator) -> Path:
    """Draw a path with probability proportional to the product of its edge weights.

    Walks from the source, choosing the out-edge e=(u, v) with probability
    w(e) H(v, d) / H(u, d).  Consumes exactly one uniform per step.
    """
    lw = np.asarray(log_weights, dtype=float)
    bwd = flow.log_to_sink
    u = dag.source
    edges = []
    while u != dag.sink:
        outs = dag.out_edges[u]
        logits = lw[outs] + bwd[dag.heads[outs]]
        top = logits.max()
        if not np.isfinite(top):
            raise NumericalDegeneracy(f"all successor weights at vertex {u} are zero")
        cdf = np.cumsum(np.exp(logits - top))
        i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        e = int(outs[min(i, len(outs) - 1)])
        edges.append(e)
        u = int(dag.heads[e])
    return Path(tuple(edges))


def path_probability(dag: Dag, flow: FlowTable, log_weights, path: Path | Sequence[int]) -> float:
    lw = np.asarray(log_weights, dtype=float)
    idx = list(path)
    return float(np.exp(lw[idx].sum() - flow.log_total))


def edge_marginals(dag: Dag, flow: FlowTable, log_weights) -> np.ndarray:
    """Probability that the sampled path contains each edge."""
    lw = np.asarray(log_weights, dtype=float)
    log_r = (
        flow.log_from_source[..., dag.tails]
        + lw
        + flow.log_to_sink[..., dag.heads]
        - np.asarray(flow.log_total)[..., None]
    )
    return np.exp(log_r)


def edge_marginal(dag: Dag, flow: FlowTable, log_weights, edge: int) -> float:
    lw = np.asarray(log_weights, dtype=float)
    return float(
        np.exp(
            flow.log_from_source[dag.tails[edge]]
            + lw[edge]
            + flow.log_to_sink[dag.heads[edge]]
            - flow.log_total
        )
    )


def best_fixed_path(dag: Dag, totals, rel_tol: float = 1e-12) -> tuple[Path, float]:
    """Min-sum s->d path for per-edge totals.

    Among paths tied within ``rel_tol``, the lexicographically smallest edge-id
    sequence wins.
    """
    totals = np.asarray(totals, dtype=float)
    cost = np.full(dag.vertex_count, np.inf)
    cost[dag.sink] = 0.0
    choice = np.full(dag.vertex_count, -1, dtype=np.intp)
    for u, outs, heads in dag._min_plan:
        c = totals[outs] + cost[heads]
        best = c.min()
        if not np.isfinite(best):
            continue
        tied = c <= best + rel_tol * max(1.0, abs(best))
        # out-edge ids are stored in increasing order
        choice[u] = outs[np.flatnonzero(tied)[0]]
        cost[u] = c[np.flatnonzero(tied)[0]]
    edges = []
    u = dag.source
    while u != dag.sink:
        e = int(choice[u])
        edges.append(e)
        u = int(dag.heads[e])
    path = Path(tuple(edges))
    return path, float(totals[list(edges)].sum())


def best_path_totals(dag: Dag, totals) -> np.ndarray:
    """Minimum path total for each row of a batch of per-edge totals."""
    totals = np.asarray(totals, dtype=float)
    cost = np.full(totals.shape[:-1] + (dag.vertex_count,), np.inf)
    cost[..., dag.sink] = 0.0
    for u, outs, heads in dag._min_plan:
        cost[..., u] = (totals[..., outs] + cost[..., heads]).min(axis=-1)
    return cost[..., dag.source]


def count_paths(dag: Dag) -> int:
    """Exact number of s->d paths (Python integers, no overflow)."""
    count = [0] * dag.vertex_count
    count[dag.source] = 1
    for u in dag.order.tolist():
        if count[u]:
            for v in dag.heads[dag.out_edges[u]].tolist():
                count[v] += count[u]
    return count[dag.sink]


def log_path_count(dag: Dag) -> float:
    return math.log(count_paths(dag))


def enumerate_paths(dag: Dag, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """All s->d paths in lexicographic order of their edge-id sequences."""
    total = count_paths(dag)
    if total > cap:
        raise TooManyPaths(f"{total} paths exceed the cap of {cap}")
    paths = []
    stack = [(dag.source, ())]
    while stack:
        u, prefix = stack.pop()
        if u == dag.sink:
            paths.append(Path(prefix))
            continue
        for e in reversed(dag.out_edges[u].tolist()):
            stack.append((int(dag.heads[e]), prefix + (e,)))
    return paths
