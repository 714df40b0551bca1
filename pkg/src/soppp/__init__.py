"""Online path planning with semi-bandit feedback and side-observations (Exp3-OE)."""
from .dag import (
    Dag,
    FlowTable,
    Path,
    best_fixed_path,
    build_dag,
    count_paths,
    edge_marginal,
    edge_marginals,
    enumerate_paths,
    log_path_count,
    path_probability,
    sample_path,
    weight_push,
)
from .errors import *  # noqa: F401,F403
from .exp3oe import (
    DoublingLearner,
    Feedback,
    Learner,
    LearnerParams,
    TuningCase,
    init_learner,
    theorem1_rhs,
    tune_parameters,
)
from .games import (
    ColonelBlotto,
    HideAndSeek,
    alpha_bound,
    build_cb_graph,
    build_hs_graph,
    cb_round,
    hs_round,
    make_adversary,
)
from .harness import (
    ExperimentConfig,
    RegretSeries,
    graph_info,
    parse_config,
    read_csv,
    run_experiment,
    verify_bound,
    write_csv,
)
from .observation import (
    ObservationGraph,
    compute_q,
    compute_q_bruteforce,
    compute_q_many,
    diagnose,
    independence_number,
    is_symmetric,
    q_sum,
    qt_bound,
    satisfies_a0,
)

__version__ = "0.1.0"
