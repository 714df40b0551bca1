"""Observation graphs over the edges of a DAG and the reveal probabilities they induce."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .dag import MASKED, Dag, Path, edge_marginals, enumerate_paths, logsumexp, weight_push

DEFAULT_MIS_CAP = 64


class ObservationGraph:
    """Directed reveal relation on edge-vertices; ``adjacency[a, b]`` means a reveals b.

    Self-loops are always present.
    """

    def __init__(self, adjacency):
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        np.fill_diagonal(adj, True)
        adj.flags.writeable = False
        self.adjacency = adj
        self._q_plans = {}

    @classmethod
    def from_revealers(cls, edge_count: int, revealers: Sequence[Iterable[int]]):
        """Build from in-neighbour lists: ``revealers[e]`` are the edges revealing e."""
        if len(revealers) != edge_count:
            raise ValueError("need one revealer list per edge")
        adj = np.zeros((edge_count, edge_count), dtype=bool)
        for e, rs in enumerate(revealers):
            adj[list(rs), e] = True
        return cls(adj)

    @classmethod
    def from_arcs(cls, edge_count: int, arcs: Iterable[tuple[int, int]]):
        adj = np.zeros((edge_count, edge_count), dtype=bool)
        for a, b in arcs:
            adj[a, b] = True
        return cls(adj)

    @classmethod
    def self_loops(cls, edge_count: int):
        return cls(np.eye(edge_count, dtype=bool))

    @classmethod
    def complete(cls, edge_count: int):
        return cls(np.ones((edge_count, edge_count), dtype=bool))

    @property
    def edge_count(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def _revealers(self):
        return tuple(np.flatnonzero(col) for col in self.adjacency.T)

    @cached_property
    def _revealed_by(self):
        return tuple(np.flatnonzero(row) for row in self.adjacency)

    def revealers(self, edge: int) -> np.ndarray:
        """Edges e' with e' -> edge, sorted (always includes ``edge``)."""
        return self._revealers[edge]

    def revealed_by(self, edge: int) -> np.ndarray:
        return self._revealed_by[edge]

    def __eq__(self, other):
        return isinstance(other, ObservationGraph) and np.array_equal(self.adjacency, other.adjacency)

    __hash__ = None

    def __repr__(self):
        arcs = int(self.adjacency.sum()) - self.edge_count
        return f"ObservationGraph(E={self.edge_count}, extra_arcs={arcs})"


def revealed_set(obs: ObservationGraph, path: Path | Sequence[int]) -> frozenset[int]:
    """Edges whose loss is observed when ``path`` is played."""
    return frozenset(np.flatnonzero(obs.adjacency[list(path)].any(axis=0)).tolist())


def _q_plan(obs: ObservationGraph, edges: tuple[int, ...]):
    """Index arrays for the batched q computation, cached per graph and edge tuple."""
    plan = obs._q_plans.get(edges)
    if plan is None:
        rows, cols, revs, owners = [], [], [], []
        offset = 0
        for i, e in enumerate(edges):
            rs = obs.revealers(e)
            m = len(rs)
            # row offset + j zeroes the revealers before the j-th one
            r, c = np.nonzero(np.tril(np.ones((m, m), dtype=bool), -1))
            rows.append(r + offset)
            cols.append(rs[c])
            revs.append(rs)
            owners.append(np.full(m, i))
            offset += m
        plan = (np.concatenate(rows), np.concatenate(cols), np.concatenate(revs), np.concatenate(owners), offset)
        if len(obs._q_plans) < 4096:
            obs._q_plans[edges] = plan
    return plan


def compute_q_many(dag: Dag, log_weights, obs: ObservationGraph, edges=None, log_total=None) -> np.ndarray:
    """Reveal probability q(e) for each edge in ``edges`` (default: all edges).

    For a target e with revealers e'_1..e'_m, the j-th term is the mass of
    paths through e'_j once e'_1..e'_{j-1} have been zeroed, divided by the
    unmodified total; the zeroing stops a path holding several revealers from
    being counted twice.  All (target, j) weight vectors are pushed as one batch.
    ``log_total`` may be passed when log H(s, d) is already known.
    """
    lw = np.asarray(log_weights, dtype=float)
    edges = tuple(range(dag.edge_count)) if edges is None else tuple(int(e) for e in edges)
    if not edges:
        return np.zeros(0)
    if log_total is None:
        log_total = weight_push(dag, lw).log_total
    rows, cols, revs, owners, count = _q_plan(obs, edges)
    batch = np.tile(lw, (count, 1))
    batch[rows, cols] = MASKED
    flow = weight_push(dag, batch)
    idx = np.arange(count)
    log_k = flow.log_from_source[idx, dag.tails[revs]] + lw[revs] + flow.log_to_sink[idx, dag.heads[revs]]
    return np.bincount(owners, weights=np.exp(log_k - log_total), minlength=len(edges))


def compute_q(dag: Dag, log_weights, obs: ObservationGraph, edge: int) -> float:
    return float(compute_q_many(dag, log_weights, obs, [edge])[0])


def path_distribution_bruteforce(dag: Dag, log_weights, cap: int | None = None):
    """(paths, probabilities) by explicit enumeration and normalization."""
    lw = np.asarray(log_weights, dtype=float)
    paths = enumerate_paths(dag) if cap is None else enumerate_paths(dag, cap)
    log_wp = np.array([lw[list(p)].sum() for p in paths])
    return paths, np.exp(log_wp - logsumexp(log_wp))


def compute_q_bruteforce(dag: Dag, log_weights, obs: ObservationGraph, edge: int, cap: int | None = None) -> float:
    """Sum of path probabilities over the paths that reveal ``edge``."""
    paths, probs = path_distribution_bruteforce(dag, log_weights, cap)
    reveals = obs.adjacency[:, edge]
    return float(sum(x for p, x in zip(paths, probs) if reveals[list(p)].any()))


def is_symmetric(obs: ObservationGraph) -> bool:
    return bool(np.array_equal(obs.adjacency, obs.adjacency.T))


def satisfies_a0(dag: Dag, obs: ObservationGraph) -> bool:
    """True iff no edge has two distinct revealers lying on a common s->d path."""
    a = obs.adjacency.astype(np.int64)
    c = dag.cooccur.astype(np.int64)
    # entry [e, e] counts ordered co-path revealer pairs of e
    return not np.einsum("ae,ab,be->e", a, c, a).any()


def satisfies_a0_bruteforce(dag: Dag, obs: ObservationGraph) -> bool:
    for p in enumerate_paths(dag):
        if (obs.adjacency[list(p)].sum(axis=0) >= 2).any():
            return False
    return True


def _skeleton_masks(obs: ObservationGraph) -> list[int]:
    und = obs.adjacency | obs.adjacency.T
    np.fill_diagonal(und, False)
    return [sum(1 << int(j) for j in np.flatnonzero(row)) for row in und]


def _clique_cover_size(cand: int, nbrs: list[int]) -> int:
    """Greedy partition of ``cand`` into cliques; its size bounds the MIS from above."""
    count = 0
    while cand:
        v = (cand & -cand).bit_length() - 1
        clique = 1 << v
        pool = cand & nbrs[v]
        while pool:
            u = (pool & -pool).bit_length() - 1
            clique |= 1 << u
            pool &= nbrs[u]
        cand &= ~clique
        count += 1
    return count


def _mis_size(nbrs: list[int], n: int) -> int:
    best = 0

    def search(cand: int, size: int):
        nonlocal best
        if not cand:
            best = max(best, size)
            return
        if size + _clique_cover_size(cand, nbrs) <= best:
            return
        # some maximum independent set contains v or one of its neighbours
        v = min(_iter_bits(cand), key=lambda x: (nbrs[x] & cand).bit_count())
        closed = (nbrs[v] & cand) | (1 << v)
        for u in _iter_bits(closed):
            search(cand & ~((nbrs[u] & cand) | (1 << u)), size + 1)

    search((1 << n) - 1, 0)
    return best


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def independence_number(obs: ObservationGraph, cap: int = DEFAULT_MIS_CAP) -> tuple[int, bool]:
    """Independence number of the undirected skeleton, as ``(value, exact)``.

    Exact branch-and-bound up to ``cap`` vertices; above it, a greedy
    clique-cover upper bound with ``exact=False``.
    """
    nbrs = _skeleton_masks(obs)
    n = obs.edge_count
    if n <= cap:
        return _mis_size(nbrs, n), True
    return _clique_cover_size((1 << n) - 1, nbrs), False


@dataclass(frozen=True)
class ObsDiagnostics:
    symmetric: bool
    satisfies_a0: bool
    independence_number: int
    exact: bool


def diagnose(dag: Dag, obs: ObservationGraph, cap: int = DEFAULT_MIS_CAP) -> ObsDiagnostics:
    alpha, exact = independence_number(obs, cap)
    return ObsDiagnostics(is_symmetric(obs), satisfies_a0(dag, obs), alpha, exact)


def q_sum(dag: Dag, log_weights, obs: ObservationGraph, beta: float) -> float:
    """Sum over edges of r(e) / (q(e) + beta)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    lw = np.asarray(log_weights, dtype=float)
    r = edge_marginals(dag, weight_push(dag, lw), lw)
    q = compute_q_many(dag, lw, obs)
    return float((r / (q + beta)).sum())


def qt_bound(alpha: float, n: int, E: int, beta: float, symmetric: bool, a0: bool) -> float:
    """Upper bound on Q_t for the given structure class of the observation graph."""
    if alpha < 1 or beta <= 0:
        raise ValueError("need alpha >= 1 and beta > 0")
    if symmetric:
        return float(alpha if a0 else n * alpha)
    M = math.ceil(2 * E**2 / beta)
    if a0:
        return 1 + 2 * alpha * math.log(1 + (M + E) / alpha)
    return 2 * n * (1 + alpha * math.log(1 + (n * M + E) / alpha))
