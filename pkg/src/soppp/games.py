"""Colonel Blotto and Hide-and-Seek as path planning on layered DAGs.

Edge ids follow the layer-by-layer order used in the original figures, so
edge ``i`` here is edge ``i + 1`` there.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dag import Dag, Path, build_dag
from .errors import BadAllocation, IncoherentSearch
from .observation import ObservationGraph

# ----------------------------------------------------------------------------
# Colonel Blotto


@dataclass(frozen=True)
class CbEdgeSemantics:
    """Per edge: the battlefield it allocates to (0-based) and how many troops."""

    k: int
    n: int
    battlefield: np.ndarray
    allocation: np.ndarray


def build_cb_graph(k: int, n: int) -> tuple[Dag, CbEdgeSemantics]:
    """Graph whose s->d paths are the allocations of k troops to n battlefields.

    Vertex (i, j) of layer i means j troops have been placed on the first i
    battlefields.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    N = 2 + (k + 1) * (n - 1)
    s, d = 0, N - 1

    def vid(i, j):
        return 1 + (i - 1) * (k + 1) + j

    edges, field, alloc = [], [], []
    if n == 1:
        edges.append((s, d))
        field.append(0)
        alloc.append(k)
    else:
        for j in range(k + 1):
            edges.append((s, vid(1, j)))
            field.append(0)
            alloc.append(j)
        for i in range(1, n - 1):
            for j1 in range(k + 1):
                for j2 in range(j1, k + 1):
                    edges.append((vid(i, j1), vid(i + 1, j2)))
                    field.append(i)
                    alloc.append(j2 - j1)
        for j in range(k + 1):
            edges.append((vid(n - 1, j), d))
            field.append(n - 1)
            alloc.append(k - j)
    dag = build_dag(N, edges, s, d)
    sem = CbEdgeSemantics(k, n, np.array(field), np.array(alloc))
    return dag, sem


def cb_allocations(k: int, n: int) -> list[tuple[int, ...]]:
    """All of S_{k,n} in lexicographic order."""
    if n == 1:
        return [(k,)]
    return [(a,) + rest for a in range(k + 1) for rest in cb_allocations(k - a, n - 1)]


def _check_allocation(k: int, n: int, allocation) -> np.ndarray:
    a = np.asarray(allocation)
    if a.shape != (n,) or not np.issubdtype(a.dtype, np.integer) or (a < 0).any() or a.sum() != k:
        raise BadAllocation(f"{allocation!r} is not a split of {k} troops over {n} battlefields")
    return a.astype(np.int64)


def cb_round(sem: CbEdgeSemantics, learner_allocation, adversary_allocation, values):
    """Loss vector over edges and the observation graph of one Blotto round.

    An edge allocating a troops to battlefield i loses b(i) if a < a'(i),
    b(i)/2 on a tie and nothing if a > a'(i).  Playing it reveals, on the same
    battlefield only: every allocation >= a after a win, every allocation after
    a tie, every allocation <= a after a loss.
    """
    _check_allocation(sem.k, sem.n, learner_allocation)
    adv = _check_allocation(sem.k, sem.n, adversary_allocation)
    return cb_loss_vector(sem, adv, values), cb_observation_graph(sem, adv)


def cb_loss_vector(sem: CbEdgeSemantics, adversary_allocation, values) -> np.ndarray:
    b = np.asarray(values, dtype=float)
    if b.shape != (sem.n,) or (b <= 0).any() or not np.isclose(b.sum(), 1.0):
        raise ValueError("battlefield values must be positive and sum to 1")
    opp = np.asarray(adversary_allocation)[sem.battlefield]
    a = sem.allocation
    outcome = np.where(a < opp, 1.0, np.where(a == opp, 0.5, 0.0))
    return b[sem.battlefield] * outcome


def cb_observation_graph(sem: CbEdgeSemantics, adversary_allocation) -> ObservationGraph:
    opp = np.asarray(adversary_allocation)[sem.battlefield][:, None]
    a = sem.allocation[:, None]
    c = sem.allocation[None, :]
    same = sem.battlefield[:, None] == sem.battlefield[None, :]
    reveals = np.where(a > opp, c >= a, np.where(a == opp, True, c <= a))
    return ObservationGraph(same & reveals)


class ColonelBlotto:
    """Blotto environment for a learner with k troops over n battlefields.

    ``values_mode`` is ``"uniform"`` (1/n each round), ``"random"`` (fresh
    positive values renormalized each round) or ``"fixed"`` with explicit
    ``values``.
    """

    name = "cb"

    def __init__(self, k: int, n: int, values_mode: str = "uniform", values=None):
        self.k, self.n = k, n
        self.dag, self.semantics = build_cb_graph(k, n)
        if values is not None:
            values_mode = "fixed"
            values = np.asarray(values, dtype=float)
            if values.shape != (n,) or (values <= 0).any():
                raise ValueError("fixed values must be n positive numbers")
            values = values / values.sum()
        elif values_mode == "fixed":
            raise ValueError("values_mode=fixed needs explicit values")
        if values_mode not in ("uniform", "random", "fixed"):
            raise ValueError(f"unknown values_mode {values_mode!r}")
        self.values_mode = values_mode
        self.fixed_values = values
        self._edge_of = {(int(t), int(h)): e for e, (t, h) in enumerate(self.dag.edges)}
        self._obs_cache: dict[tuple[int, ...], ObservationGraph] = {}

    @property
    def alpha(self) -> int:
        return alpha_bound("cb", self.k, self.n)

    def battlefield_values(self, rng: np.random.Generator) -> np.ndarray:
        if self.values_mode == "uniform":
            return np.full(self.n, 1.0 / self.n)
        if self.values_mode == "fixed":
            return self.fixed_values.copy()
        v = rng.uniform(0.0, 1.0, self.n) + 1e-3
        return v / v.sum()

    def allocation_of(self, path: Path) -> tuple[int, ...]:
        z = np.zeros(self.n, dtype=np.int64)
        for e in path:
            z[self.semantics.battlefield[e]] += self.semantics.allocation[e]
        return tuple(z.tolist())

    def path_of(self, allocation) -> Path:
        a = _check_allocation(self.k, self.n, allocation)
        if self.n == 1:
            return Path((0,))
        cum = np.cumsum(a)[:-1]
        verts = [self.dag.source] + [1 + i * (self.k + 1) + int(c) for i, c in enumerate(cum)] + [self.dag.sink]
        return Path(tuple(self._edge_of[(u, v)] for u, v in zip(verts, verts[1:])))

    def observation_graph(self, adversary_allocation) -> ObservationGraph:
        key = tuple(int(x) for x in adversary_allocation)
        obs = self._obs_cache.get(key)
        if obs is None:
            obs = self._obs_cache[key] = cb_observation_graph(self.semantics, key)
        return obs

    def round(self, adversary_allocation, values) -> tuple[np.ndarray, ObservationGraph]:
        adv = _check_allocation(self.k, self.n, adversary_allocation)
        return cb_loss_vector(self.semantics, adv, values), self.observation_graph(adv)

    def allocation_loss(self, allocation, adversary_allocation, values) -> float:
        """Game-rule loss of one allocation, independent of the graph encoding."""
        total = 0.0
        for a, o, b in zip(allocation, adversary_allocation, values):
            total += b if a < o else b / 2 if a == o else 0.0
        return total


# ----------------------------------------------------------------------------
# Hide-and-Seek


@dataclass(frozen=True)
class HsEdgeSemantics:
    """Per edge: move index (0-based; ``n`` for auxiliary edges) and location (0-based).

    Auxiliary edges enter d and keep the location of their tail vertex.
    """

    k: int
    n: int
    kappa: int
    move: np.ndarray
    location: np.ndarray
    auxiliary: np.ndarray


def build_hs_graph(k: int, n: int, kappa: int) -> tuple[Dag, HsEdgeSemantics]:
    """Graph whose s->d paths are the kappa-coherent n-searches over k locations."""
    if not 1 <= n <= k:
        raise ValueError("need 1 <= n <= k")
    if not 0 <= kappa <= k - 1:
        raise ValueError("need 0 <= kappa <= k - 1")
    N = 2 + k * n
    s, d = 0, N - 1

    def vid(i, j):
        return 1 + (i - 1) * k + j

    edges, move, loc = [], [], []
    for j in range(k):
        edges.append((s, vid(1, j)))
        move.append(0)
        loc.append(j)
    for i in range(1, n):
        for j1 in range(k):
            for j2 in range(max(0, j1 - kappa), min(k, j1 + kappa + 1)):
                edges.append((vid(i, j1), vid(i + 1, j2)))
                move.append(i)
                loc.append(j2)
    for j in range(k):
        edges.append((vid(n, j), d))
        move.append(n)
        loc.append(j)
    dag = build_dag(N, edges, s, d)
    move = np.array(move)
    sem = HsEdgeSemantics(k, n, kappa, move, np.array(loc), move == n)
    return dag, sem


def _check_search(sem: HsEdgeSemantics, search) -> np.ndarray:
    z = np.asarray(search)
    if z.shape != (sem.n,) or not np.issubdtype(z.dtype, np.integer) or (z < 0).any() or (z >= sem.k).any():
        raise IncoherentSearch(f"{search!r} is not a sequence of {sem.n} locations in 0..{sem.k - 1}")
    if (np.abs(np.diff(z)) > sem.kappa).any():
        raise IncoherentSearch(f"{search!r} jumps further than kappa={sem.kappa}")
    return z.astype(np.int64)


Reviser = Callable[[int, tuple, np.ndarray], np.ndarray]


def hs_location_losses(sem: HsEdgeSemantics, condition: str, search, hider_losses, reviser: Reviser | None = None):
    """Per-location losses after the round is played out.

    Under c2 the ``reviser`` is called after every move with
    ``(move_index, searched_so_far, current_losses)`` and may rewrite the
    losses of locations not yet searched.  A location's loss is frozen the
    first time it is searched; unsearched locations keep the final value.
    """
    z = _check_search(sem, search)
    b = np.array(hider_losses, dtype=float)
    if b.shape != (sem.k,) or (b < 0).any() or (b > 1).any():
        raise ValueError("hider losses must be k values in [0, 1]")
    if condition == "c1":
        if reviser is not None:
            raise ValueError("losses cannot be revised under condition c1")
        return b
    if condition != "c2":
        raise ValueError(f"unknown condition {condition!r}")
    searched = np.zeros(sem.k, dtype=bool)
    frozen = np.zeros(sem.k)
    for i, j in enumerate(z.tolist()):
        if not searched[j]:
            searched[j] = True
            frozen[j] = b[j]
        if reviser is not None:
            nb = np.asarray(reviser(i, tuple(z[: i + 1].tolist()), b.copy()), dtype=float)
            if nb.shape != (sem.k,) or (nb < 0).any() or (nb > 1).any():
                raise ValueError("revised losses must be k values in [0, 1]")
            b = np.where(searched, b, nb)
    return np.where(searched, frozen, b)


def hs_loss_vector(sem: HsEdgeSemantics, location_losses) -> np.ndarray:
    v = np.asarray(location_losses, dtype=float)
    return np.where(sem.auxiliary, 0.0, v[sem.location])


def hs_observation_graph(sem: HsEdgeSemantics, condition: str) -> ObservationGraph:
    """c1: all edges of one location reveal each other.  c2: only later moves are revealed.

    The auxiliary edge after location j counts as move n of location j.
    """
    same = sem.location[:, None] == sem.location[None, :]
    if condition == "c1":
        return ObservationGraph(same)
    if condition == "c2":
        return ObservationGraph(same & (sem.move[:, None] <= sem.move[None, :]))
    raise ValueError(f"unknown condition {condition!r}")


def hs_round(sem: HsEdgeSemantics, condition: str, search, hider_losses, reviser: Reviser | None = None):
    v = hs_location_losses(sem, condition, search, hider_losses, reviser)
    return hs_loss_vector(sem, v), hs_observation_graph(sem, condition)


class HideAndSeek:
    """Seeker-side environment: k locations, n moves, coherence radius kappa."""

    name = "hs"

    def __init__(self, k: int, n: int, kappa: int, condition: str = "c1"):
        if condition not in ("c1", "c2"):
            raise ValueError(f"unknown condition {condition!r}")
        self.k, self.n, self.kappa, self.condition = k, n, kappa, condition
        self.dag, self.semantics = build_hs_graph(k, n, kappa)
        self._edge_of = {(int(t), int(h)): e for e, (t, h) in enumerate(self.dag.edges)}
        self.obs = hs_observation_graph(self.semantics, condition)

    @property
    def alpha(self) -> int:
        return alpha_bound("hs", self.k, self.n)

    def search_of(self, path: Path) -> tuple[int, ...]:
        sem = self.semantics
        return tuple(int(sem.location[e]) for e in path if not sem.auxiliary[e])

    def path_of(self, search) -> Path:
        z = _check_search(self.semantics, search)
        verts = [self.dag.source] + [1 + i * self.k + int(j) for i, j in enumerate(z)] + [self.dag.sink]
        return Path(tuple(self._edge_of[(u, v)] for u, v in zip(verts, verts[1:])))

    def searches(self) -> list[tuple[int, ...]]:
        return [
            z
            for z in itertools.product(range(self.k), repeat=self.n)
            if all(abs(a - b) <= self.kappa for a, b in zip(z, z[1:]))
        ]

    def round(self, search, hider_losses, reviser: Reviser | None = None):
        v = hs_location_losses(self.semantics, self.condition, search, hider_losses, reviser)
        return hs_loss_vector(self.semantics, v), self.obs

    def search_loss(self, search, location_losses) -> float:
        return float(sum(location_losses[j] for j in search))


def alpha_bound(game: str, k: int, n: int) -> int:
    """Closed-form bound on the independence number of every round's observation graph."""
    if game == "cb":
        return n * (k + 1)
    if game == "hs":
        return k
    raise ValueError(f"unknown game {game!r}")


# ----------------------------------------------------------------------------
# Adversaries.  ``history`` holds the learner's past plays, never the current one.


class UniformAllocation:
    def __init__(self, k: int, n: int):
        self.k, self.n = k, n

    def act(self, history, stage, rng, values=None):
        return uniform_allocation(self.k, self.n, rng)


def uniform_allocation(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from S_{k,n} (stars and bars)."""
    bars = np.sort(rng.choice(k + n - 1, size=n - 1, replace=False))
    edges = np.concatenate(([-1], bars, [k + n - 1]))
    return np.diff(edges) - 1


class FixedAllocation:
    def __init__(self, k: int, n: int, allocation):
        self.allocation = _check_allocation(k, n, allocation)

    def act(self, history, stage, rng, values=None):
        return self.allocation.copy()


class CyclicAllocation:
    """Cycles through a list of allocations (default: all of S_{k,n})."""

    def __init__(self, k: int, n: int, allocations: Sequence | None = None):
        allocs = cb_allocations(k, n) if allocations is None else allocations
        self.allocations = [_check_allocation(k, n, a) for a in allocs]

    def act(self, history, stage, rng, values=None):
        return self.allocations[(stage - 1) % len(self.allocations)].copy()


class BestResponseAllocation:
    """Maximizes the learner's expected loss against her empirical allocation frequencies."""

    def __init__(self, k: int, n: int):
        self.k, self.n = k, n

    def act(self, history, stage, rng, values=None):
        k, n = self.k, self.n
        if not history:
            return uniform_allocation(k, n, rng)
        b = np.full(n, 1.0 / n) if values is None else np.asarray(values, dtype=float)
        plays = np.asarray(history)
        counts = np.stack([np.bincount(plays[:, i], minlength=k + 1) for i in range(n)]) / len(plays)
        below = np.cumsum(counts, axis=1) - counts
        gain = b[:, None] * (below + 0.5 * counts)  # gain[i, y]: learner's loss on i if we put y
        # knapsack over battlefields: best[i][r] = max gain using battlefields i.. with r troops
        best = np.full((n + 1, k + 1), -np.inf)
        best[n, 0] = 0.0
        pick = np.zeros((n, k + 1), dtype=np.int64)
        for i in range(n - 1, -1, -1):
            for r in range(k + 1):
                opts = gain[i, : r + 1] + best[i + 1, r - np.arange(r + 1)]
                pick[i, r] = int(np.argmax(opts))
                best[i, r] = opts[pick[i, r]]
        out, r = [], k
        for i in range(n):
            out.append(pick[i, r])
            r -= pick[i, r]
        return np.array(out)


class FixedLosses:
    def __init__(self, losses):
        self.losses = np.asarray(losses, dtype=float)

    def act(self, history, stage, rng):
        return self.losses.copy()

    def reviser(self, history):
        return None


class RandomLosses:
    """Fresh uniform losses each round, renormalized to sum to one."""

    def __init__(self, k: int):
        self.k = k

    def act(self, history, stage, rng):
        v = rng.uniform(0.0, 1.0, self.k) + 1e-3
        return v / v.sum()

    def reviser(self, history):
        return None


class AdaptiveHider:
    """For condition c2: raises losses on unsearched locations the seeker has favoured.

    After each move, every unsearched location j gets ``boost * popularity(j)``
    added (capped at 1), where popularity is the seeker's historical share of
    visits to j.
    """

    def __init__(self, k: int, base=None, boost: float = 0.5):
        self.k = k
        self.base = np.full(k, 0.5) if base is None else np.asarray(base, dtype=float)
        self.boost = boost

    def act(self, history, stage, rng):
        return self.base.copy()

    def reviser(self, history):
        if not history:
            return None
        counts = np.bincount(np.asarray(history).ravel(), minlength=self.k)
        pop = counts / counts.sum()

        def revise(move, searched, losses):
            return np.minimum(1.0, losses + self.boost * pop)

        return revise


CB_ADVERSARIES = ("uniform", "fixed", "cyclic", "best_response")
HS_ADVERSARIES = ("fixed", "random", "adaptive")


def make_adversary(game, name: str, allocation=None, losses=None):
    """Strategy by name for a ColonelBlotto or HideAndSeek environment."""
    if game.name == "cb":
        if name == "uniform":
            return UniformAllocation(game.k, game.n)
        if name == "fixed":
            if allocation is None:
                raise ValueError("fixed CB adversary needs an allocation")
            return FixedAllocation(game.k, game.n, allocation)
        if name == "cyclic":
            return CyclicAllocation(game.k, game.n)
        if name == "best_response":
            return BestResponseAllocation(game.k, game.n)
        raise ValueError(f"unknown CB adversary {name!r}; choose from {CB_ADVERSARIES}")
    if name == "fixed":
        if losses is None:
            raise ValueError("fixed HS adversary needs losses")
        if len(losses) != game.k:
            raise ValueError("need one loss per location")
        return FixedLosses(losses)
    if name == "random":
        return RandomLosses(game.k)
    if name == "adaptive":
        return AdaptiveHider(game.k, losses)
    raise ValueError(f"unknown HS adversary {name!r}; choose from {HS_ADVERSARIES}")
