"""The Exp3-OE learner: exponential weights over paths with side-observation estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dag import Dag, FlowTable, Path, edge_marginals, log_path_count, sample_path, weight_push
from .errors import HorizonExceeded, InconsistentFeedback, LossOutOfRange
from .observation import ObservationGraph, compute_q_many, revealed_set


@dataclass(frozen=True)
class LearnerParams:
    eta: float
    beta: float
    horizon: int

    def __post_init__(self):
        if not self.eta > 0 or not self.beta > 0:
            raise ValueError(f"eta and beta must be positive, got {self.eta}, {self.beta}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")


@dataclass(frozen=True)
class Feedback:
    """What the learner sees after playing: the revealed edges and their losses."""

    revealed: frozenset[int]
    losses: Mapping[int, float]
    obs_graph: ObservationGraph

    @classmethod
    def from_loss_vector(cls, obs: ObservationGraph, path: Path, loss_vector) -> "Feedback":
        revealed = revealed_set(obs, path)
        lv = np.asarray(loss_vector, dtype=float)
        return cls(revealed, {e: float(lv[e]) for e in sorted(revealed)}, obs)


@dataclass
class RoundRecord:
    stage: int
    path: Path
    loss: float
    revealed: frozenset[int]
    q: dict[int, float]
    estimates: dict[int, float]
    q_all: np.ndarray | None = field(default=None, repr=False)
    r_all: np.ndarray | None = field(default=None, repr=False)
    Q: float | None = None


class Learner:
    """Exp3-OE state: the cumulative estimated loss S(e) of every edge.

    The log-weight of edge e is ``-eta * S(e)``, so all weights start at 1.
    """

    def __init__(self, dag: Dag, params: LearnerParams):
        self.dag = dag
        self.params = params
        self.cum_est_loss = np.zeros(dag.edge_count)
        self.stage = 1
        self._flow = None  # weight pushing of the current weights, reused by update

    @property
    def log_weights(self) -> np.ndarray:
        return -self.params.eta * self.cum_est_loss

    def draw(self, rng: np.random.Generator) -> tuple[Path, FlowTable]:
        if self.stage > self.params.horizon:
            raise HorizonExceeded(f"stage {self.stage} is past the horizon {self.params.horizon}")
        lw = self.log_weights
        flow = self._flow = weight_push(self.dag, lw)
        return sample_path(self.dag, flow, lw, rng), flow

    def update(self, path: Path, feedback: Feedback, diagnostics: bool = False) -> RoundRecord:
        """Fold one round of feedback into the cumulative estimates.

        Each revealed edge gains loss / (q + beta), with q computed under the
        weights the path was drawn from.  With ``diagnostics`` the record also
        carries q and r for every edge and the resulting Q_t.
        """
        path = self.dag.check_path(path)
        expected = revealed_set(feedback.obs_graph, path)
        if frozenset(feedback.revealed) != expected:
            raise InconsistentFeedback("revealed set does not match the observation graph")
        if set(feedback.losses) != expected:
            raise InconsistentFeedback("losses must be given for exactly the revealed edges")
        for e, loss in feedback.losses.items():
            if not 0.0 <= loss <= 1.0:
                raise LossOutOfRange(f"loss {loss} on edge {e} is outside [0, 1]")

        lw = self.log_weights
        flow = self._flow if self._flow is not None else weight_push(self.dag, lw)
        beta = self.params.beta
        revealed = sorted(expected)
        q_all = r_all = Q = None
        if diagnostics:
            q_all = compute_q_many(self.dag, lw, feedback.obs_graph, log_total=flow.log_total)
            r_all = edge_marginals(self.dag, flow, lw)
            Q = float((r_all / (q_all + beta)).sum())
            q_rev = q_all[revealed]
        else:
            q_rev = compute_q_many(self.dag, lw, feedback.obs_graph, revealed, flow.log_total)

        estimates = {}
        for e, q in zip(revealed, q_rev):
            est = feedback.losses[e] / (q + beta)
            self.cum_est_loss[e] += est
            estimates[e] = est
        record = RoundRecord(
            stage=self.stage,
            path=path,
            loss=float(sum(feedback.losses[e] for e in path)),
            revealed=expected,
            q=dict(zip(revealed, q_rev.tolist())),
            estimates=estimates,
            q_all=q_all,
            r_all=r_all,
            Q=Q,
        )
        self.stage += 1
        self._flow = None
        return record


def init_learner(dag: Dag, params: LearnerParams) -> Learner:
    return Learner(dag, params)


@dataclass(frozen=True)
class TuningCase:
    symmetric: bool
    a0: bool
    alpha: int
    n: int
    E: int
    log_p: float

    def __post_init__(self):
        if self.alpha < 1 or self.n < 1 or self.E < 1 or self.log_p < 0:
            raise ValueError("graph statistics must be positive")

    @classmethod
    def for_dag(cls, dag: Dag, symmetric: bool, a0: bool, alpha: int) -> "TuningCase":
        return cls(symmetric, a0, alpha, dag.max_path_length, dag.edge_count, log_path_count(dag))


def tune_parameters(case: TuningCase, T: int) -> LearnerParams:
    """Pick (eta, beta) for horizon T according to the observation structure class.

    Non-symmetric cases take beta as the positive root of the quadratic that
    makes the beta constraint hold; symmetric cases use closed forms.
    """
    a, n, E = case.alpha, case.n, case.E
    # ln P = 0 for a single path would give eta = 0; any eta is optimal there.
    log_p = max(case.log_p, 1e-12)
    if case.symmetric and case.a0:
        beta = 1 / math.sqrt(a * T)
        eta = 2 * math.sqrt(log_p) / math.sqrt(n * a * T)
    elif case.symmetric:
        beta = 1 / math.sqrt(n * a * T)
        eta = 2 * math.sqrt(log_p) / math.sqrt(n**2 * a * T)
    elif case.a0:
        b = T * a * E**2
        c = T * a * (3 + 2 * E)
        # (-b + sqrt(b^2 + c)) / c, rationalized to avoid cancellation
        beta = 1 / (b + math.sqrt(b**2 + c))
        M = math.ceil(2 * E**2 / beta)
        eta = 2 * math.sqrt(log_p) / math.sqrt(T * n * a * (1 + 2 * math.log(a + M + E)))
    else:
        s = 1 + a * math.log(a) + E + n
        b = T * n**2 * E**2
        # (-b + sqrt(b^2 + 4Tns)) / (2Tns), rationalized
        beta = 2 / (b + math.sqrt(b**2 + 4 * T * n * s))
        inner = a + n * math.ceil(E**2 / beta) + E
        eta = math.sqrt(log_p) / math.sqrt(n**2 * T * (1 + a * math.log(inner)))
    return LearnerParams(eta=eta, beta=beta, horizon=T)


def theorem1_rhs(params: LearnerParams, n: int, log_p: float, q_sums: Sequence[float] | float) -> float:
    """Expected-regret bound ln(P)/eta + (beta + n*eta/2) * sum_t Q_t."""
    total = float(np.sum(q_sums))
    return log_p / params.eta + (params.beta + n * params.eta / 2) * total


class DoublingLearner:
    """Runs Exp3-OE without a known horizon by restarting on epochs of length 2**m."""

    def __init__(self, dag: Dag, case: TuningCase):
        self.dag = dag
        self.case = case
        self.epoch = 0
        self.stage = 1
        self._start_epoch()

    def _start_epoch(self):
        self.learner = Learner(self.dag, tune_parameters(self.case, 2**self.epoch))

    def draw(self, rng):
        if self.learner.stage > self.learner.params.horizon:
            self.epoch += 1
            self._start_epoch()
        return self.learner.draw(rng)

    def update(self, path, feedback, diagnostics=False):
        record = self.learner.update(path, feedback, diagnostics)
        record.stage = self.stage
        self.stage += 1
        return record
