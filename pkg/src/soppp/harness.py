"""Experiment configuration, orchestration and regret accounting."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dag import best_path_totals, count_paths, log_path_count
from .errors import MissingKey, ParseError
from .exp3oe import Feedback, Learner, LearnerParams, TuningCase, theorem1_rhs, tune_parameters
from .games import ColonelBlotto, HideAndSeek, alpha_bound, make_adversary, uniform_allocation
from .observation import ObservationGraph, diagnose


@dataclass(frozen=True)
class ExperimentConfig:
    game: str
    k: int
    n: int
    T: int
    seed: int
    kappa: int | None = None
    condition: str = "c1"
    reps: int = 20
    tuning: str = "auto"
    eta: float | None = None
    beta: float | None = None
    adversary: str | None = None  # default: uniform for cb, random for hs
    allocation: tuple[int, ...] | None = None
    losses: tuple[float, ...] | None = None
    values_mode: str = "uniform"
    values: tuple[float, ...] | None = None
    observation: str = "game"  # game | semi_bandit | full
    diagnostics: bool = False
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.game not in ("cb", "hs"):
            raise ValueError(f"game must be cb or hs, got {self.game!r}")
        if self.T < 1 or self.reps < 1 or self.workers < 1:
            raise ValueError("T, reps and workers must be at least 1")
        if self.game == "hs" and self.kappa is None:
            raise MissingKey("hs needs kappa")
        if self.condition not in ("c1", "c2"):
            raise ValueError(f"condition must be c1 or c2, got {self.condition!r}")
        if self.tuning not in ("auto", "explicit"):
            raise ValueError(f"tuning must be auto or explicit, got {self.tuning!r}")
        if self.tuning == "explicit":
            if self.eta is None or self.beta is None:
                raise MissingKey("explicit tuning needs both eta and beta")
            if not (self.eta > 0 and self.beta > 0):
                raise ValueError("eta and beta must be positive")
        if self.observation not in ("game", "semi_bandit", "full"):
            raise ValueError(f"observation must be game, semi_bandit or full, got {self.observation!r}")

    @property
    def adversary_name(self) -> str:
        if self.adversary is not None:
            return self.adversary
        return "uniform" if self.game == "cb" else "random"


def _ints(s):
    return tuple(int(x) for x in s.split(","))


def _floats(s):
    return tuple(float(x) for x in s.split(","))


def _flag(s):
    v = s.lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got {s!r}")


_CONVERTERS = {
    "game": str, "k": int, "n": int, "T": int, "seed": int, "kappa": int,
    "condition": str, "reps": int, "tuning": str, "eta": float, "beta": float,
    "adversary": str, "allocation": _ints, "losses": _floats, "values_mode": str,
    "values": _floats, "observation": str, "diagnostics": _flag, "out": str, "workers": int,
}
_REQUIRED = ("game", "k", "n", "T", "seed")


def parse_config(text: str) -> ExperimentConfig:
    """Parse whitespace-separated ``key=value`` tokens; ``#`` starts a comment.

    Giving ``eta`` or ``beta`` switches tuning to explicit unless ``tuning``
    is set.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        for token in line.split("#", 1)[0].split():
            key, sep, value = token.partition("=")
            if not sep or not value:
                raise ParseError(f"expected key=value, got {token!r}", lineno)
            if key not in _CONVERTERS:
                raise ParseError(f"unknown key {key!r}", lineno)
            if key in raw:
                raise ParseError(f"duplicate key {key!r}", lineno)
            try:
                raw[key] = _CONVERTERS[key](value)
            except ValueError:
                raise ParseError(f"bad value for {key}: {value!r}", lineno) from None
    for key in _REQUIRED:
        if key not in raw:
            raise MissingKey(f"missing required key {key!r}")
    if "tuning" not in raw and ("eta" in raw or "beta" in raw):
        raw["tuning"] = "explicit"
    try:
        return ExperimentConfig(**raw)
    except MissingKey:
        raise
    except (TypeError, ValueError) as err:
        raise ParseError(str(err)) from None


# ----------------------------------------------------------------------------


def make_game(cfg: ExperimentConfig):
    if cfg.game == "cb":
        return ColonelBlotto(cfg.k, cfg.n, cfg.values_mode, cfg.values)
    return HideAndSeek(cfg.k, cfg.n, cfg.kappa, cfg.condition)


def native_case(game) -> TuningCase:
    """Tuning case from the game's own observation structure.

    Blotto graphs are non-symmetric and satisfy (A0); Hide-and-Seek graphs are
    symmetric under c1, non-symmetric under c2, and neither satisfies (A0).
    """
    if game.name == "cb":
        sym, a0 = False, True
    else:
        sym, a0 = game.condition == "c1", False
    return TuningCase.for_dag(game.dag, sym, a0, alpha_bound(game.name, game.k, game.n))


def learner_params(cfg: ExperimentConfig, game=None) -> LearnerParams:
    if cfg.tuning == "explicit":
        return LearnerParams(cfg.eta, cfg.beta, cfg.T)
    return tune_parameters(native_case(game or make_game(cfg)), cfg.T)


@dataclass
class RepetitionResult:
    realized: np.ndarray  # per-stage realized loss
    best_cum: np.ndarray  # per-stage best fixed path cumulative loss
    q_trace: np.ndarray | None
    losses: np.ndarray = field(repr=False)  # (T, E) true loss vectors


@dataclass
class RegretSeries:
    t: np.ndarray
    mean_cum_loss: np.ndarray
    best_cum_loss: np.ndarray
    regret: np.ndarray
    mean_Qt: np.ndarray | None
    terminal_regrets: np.ndarray
    q_traces: np.ndarray | None = field(default=None, repr=False)
    params: LearnerParams | None = None

    @property
    def mean_regret(self) -> float:
        return float(self.terminal_regrets.mean())

    @property
    def regret_se(self) -> float:
        r = self.terminal_regrets
        return float(r.std(ddof=1) / math.sqrt(len(r))) if len(r) > 1 else 0.0


def run_repetition(cfg: ExperimentConfig, params: LearnerParams, seed_seq: np.random.SeedSequence) -> RepetitionResult:
    """One independent run of T stages: draw, play the round, update."""
    game = make_game(cfg)
    dag = game.dag
    E = dag.edge_count
    learner_ss, env_ss = seed_seq.spawn(2)
    rng_l, rng_e = np.random.default_rng(learner_ss), np.random.default_rng(env_ss)
    learner = Learner(dag, params)
    adversary = make_adversary(game, cfg.adversary_name, cfg.allocation, cfg.losses)
    override = None
    if cfg.observation == "semi_bandit":
        override = ObservationGraph.self_loops(E)
    elif cfg.observation == "full":
        override = ObservationGraph.complete(E)

    T = cfg.T
    losses = np.empty((T, E))
    realized = np.empty(T)
    q_trace = np.empty(T) if cfg.diagnostics else None
    history = []
    for t in range(T):
        path, _ = learner.draw(rng_l)
        if game.name == "cb":
            values = game.battlefield_values(rng_e)
            adv = adversary.act(history, t + 1, rng_e, values)
            lv, obs = game.round(adv, values)
            play = game.allocation_of(path)
        else:
            b = adversary.act(history, t + 1, rng_e)
            reviser = adversary.reviser(history) if game.condition == "c2" else None
            play = game.search_of(path)
            lv, obs = game.round(play, b, reviser)
        if override is not None:
            obs = override
        record = learner.update(path, Feedback.from_loss_vector(obs, path, lv), cfg.diagnostics)
        losses[t] = lv
        realized[t] = record.loss
        if q_trace is not None:
            q_trace[t] = record.Q
        history.append(play)
    best_cum = best_path_totals(dag, np.cumsum(losses, axis=0))
    return RepetitionResult(realized, best_cum, q_trace, losses)


def _run_one(args):
    return run_repetition(*args)


def run_experiment(cfg: ExperimentConfig) -> RegretSeries:
    """Run every repetition and average.  Deterministic given ``cfg.seed``.

    Repetition r draws from the r-th child of the master seed, so results do
    not depend on ``workers``.
    """
    params = learner_params(cfg)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.reps)
    jobs = [(cfg, params, ss) for ss in children]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    cum = np.stack([np.cumsum(r.realized) for r in results])
    best = np.stack([r.best_cum for r in results])
    regrets = cum - best
    q_traces = np.stack([r.q_trace for r in results]) if cfg.diagnostics else None
    return RegretSeries(
        t=np.arange(1, cfg.T + 1),
        mean_cum_loss=cum.mean(axis=0),
        best_cum_loss=best.mean(axis=0),
        regret=regrets.mean(axis=0),
        mean_Qt=None if q_traces is None else q_traces.mean(axis=0),
        terminal_regrets=regrets[:, -1],
        q_traces=q_traces,
        params=params,
    )


@dataclass(frozen=True)
class BoundReport:
    mean_regret: float
    regret_se: float
    rhs: float
    eta: float
    beta: float
    passed: bool

    def lines(self) -> list[str]:
        verdict = "PASS" if self.passed else "FAIL"
        return [
            f"eta: {self.eta:.6g}",
            f"beta: {self.beta:.6g}",
            f"mean_regret: {self.mean_regret:.6g}",
            f"regret_se: {self.regret_se:.6g}",
            f"bound_rhs: {self.rhs:.6g}",
            f"check: {verdict} (mean_regret <= bound_rhs + 3 se)",
        ]


def verify_bound(cfg: ExperimentConfig, series: RegretSeries | None = None) -> BoundReport:
    """Compare the mean terminal regret with the regret bound on the realized Q_t traces.

    Diagnostics are switched on if the config leaves them off, since the
    bound needs Q_t at every stage.
    """
    if not cfg.diagnostics:
        cfg = replace(cfg, diagnostics=True)
    if series is None:
        series = run_experiment(cfg)
    game = make_game(cfg)
    log_p = log_path_count(game.dag)
    n = game.dag.max_path_length
    rhs = float(np.mean([theorem1_rhs(series.params, n, log_p, q) for q in series.q_traces]))
    mean, se = series.mean_regret, series.regret_se
    return BoundReport(mean, se, rhs, series.params.eta, series.params.beta, mean <= rhs + 3 * se)


def graph_info(game: str, k: int, n: int, kappa: int | None = None, condition: str = "c1", seed: int = 0) -> dict:
    """Structural summary of a game graph plus diagnostics of one sampled round."""
    if game == "cb":
        env = ColonelBlotto(k, n)
        adv = uniform_allocation(k, n, np.random.default_rng(seed))
        obs = env.observation_graph(adv)
    elif game == "hs":
        if kappa is None:
            raise MissingKey("hs needs kappa")
        env = HideAndSeek(k, n, kappa, condition)
        obs = env.obs
    else:
        raise ValueError(f"game must be cb or hs, got {game!r}")
    dag = env.dag
    diag = diagnose(dag, obs)
    return {
        "N": dag.vertex_count,
        "E": dag.edge_count,
        "P": count_paths(dag),
        "log_P": log_path_count(dag),
        "path_length": dag.max_path_length,
        "alpha_bound": alpha_bound(game, k, n),
        "symmetric": diag.symmetric,
        "a0": diag.satisfies_a0,
        "alpha": diag.independence_number,
        "alpha_exact": diag.exact,
    }


CSV_HEADER = "t,mean_cum_loss,best_cum_loss,regret,mean_Qt"


def write_csv(series: RegretSeries, path) -> None:
    rows = [CSV_HEADER]
    q = series.mean_Qt
    for i, t in enumerate(series.t.tolist()):
        qs = "" if q is None else repr(float(q[i]))
        rows.append(
            f"{t},{float(series.mean_cum_loss[i])!r},{float(series.best_cum_loss[i])!r},"
            f"{float(series.regret[i])!r},{qs}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(rows) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of a file written by ``write_csv``; ``mean_Qt`` is None when empty."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a regret series file")
    cols = list(zip(*(ln.split(",") for ln in lines[1:])))
    names = CSV_HEADER.split(",")
    out = {"t": np.array(cols[0], dtype=int)}
    for name, col in zip(names[1:4], cols[1:4]):
        out[name] = np.array(col, dtype=float)
    out["mean_Qt"] = None if any(c == "" for c in cols[4]) else np.array(cols[4], dtype=float)
    return out
