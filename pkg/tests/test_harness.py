import numpy as np
import pytest

from soppp.dag import enumerate_paths
from soppp.errors import MissingKey, ParseError
from soppp.harness import (
    CSV_HEADER,
    ExperimentConfig,
    graph_info,
    learner_params,
    make_game,
    native_case,
    parse_config,
    read_csv,
    run_experiment,
    run_repetition,
    verify_bound,
    write_csv,
)

CB_FIXED = "game=cb k=3 n=3 adversary=fixed allocation=3,0,0"
HS_FIXED = "game=hs k=3 n=3 kappa=1 adversary=fixed losses=0.2,0.7,0.1"


# --- config -----------------------------------------------------------------


def test_minimal_config_defaults():
    cfg = parse_config("game=cb k=3 n=3 T=1000 seed=7")
    assert (cfg.game, cfg.k, cfg.n, cfg.T, cfg.seed) == ("cb", 3, 3, 1000, 7)
    assert cfg.reps == 20 and cfg.tuning == "auto" and cfg.diagnostics is False
    assert cfg.adversary_name == "uniform" and cfg.observation == "game"


def test_config_lines_and_comments():
    text = """
    # a Hide-and-Seek run
    game=hs k=4 n=3     # locations and moves
    kappa=1 condition=c2
    T=50 seed=1 reps=3 diagnostics=on
    adversary=adaptive losses=0.1,0.2,0.3,0.4
    """
    cfg = parse_config(text)
    assert cfg.kappa == 1 and cfg.condition == "c2" and cfg.diagnostics
    assert cfg.losses == (0.1, 0.2, 0.3, 0.4)


def test_eta_without_beta():
    with pytest.raises(MissingKey):
        parse_config("game=cb k=3 n=3 T=10 seed=1 eta=0.1")
    with pytest.raises(MissingKey):
        parse_config("game=cb k=3 n=3 T=10 seed=1 tuning=explicit")
    cfg = parse_config("game=cb k=3 n=3 T=10 seed=1 eta=0.1 beta=0.2")
    assert cfg.tuning == "explicit"


def test_malformed_value_names_line():
    with pytest.raises(ParseError) as err:
        parse_config("game=cb k=3 n=3\nT=abc seed=1")
    assert err.value.line == 2 and "line 2" in str(err.value)


def test_rejections():
    with pytest.raises(ParseError):
        parse_config("game=cb k=3 n=3 T=10 seed=1 colour=red")
    with pytest.raises(ParseError):
        parse_config("game=cb k=3 n=3 T=10 seed=1 seed=2")
    with pytest.raises(ParseError):
        parse_config("game=cb k=3 n=3 T=10 seed")
    with pytest.raises(ParseError):
        parse_config("game=cb k=3 n=3 T=0 seed=1")
    with pytest.raises(ParseError):
        parse_config("game=go k=3 n=3 T=10 seed=1")
    with pytest.raises(MissingKey):
        parse_config("game=cb k=3 n=3 T=10")
    with pytest.raises(MissingKey):
        parse_config("game=hs k=3 n=3 T=10 seed=1")


def test_native_tuning_classes():
    cb = native_case(make_game(parse_config("game=cb k=3 n=3 T=10 seed=1")))
    assert (cb.symmetric, cb.a0, cb.alpha, cb.n, cb.E) == (False, True, 12, 3, 18)
    c1 = native_case(make_game(parse_config("game=hs k=3 n=3 kappa=1 T=10 seed=1")))
    assert (c1.symmetric, c1.a0, c1.alpha, c1.n) == (True, False, 3, 4)
    c2 = native_case(make_game(parse_config("game=hs k=3 n=3 kappa=1 condition=c2 T=10 seed=1")))
    assert (c2.symmetric, c2.a0) == (False, False)


# --- runs -------------------------------------------------------------------


def test_t1_regret_is_first_loss_minus_best():
    cfg = parse_config(f"{CB_FIXED} T=1 seed=3 reps=4")
    series = run_experiment(cfg)
    # fixed (3,0,0) with uniform values: best path loses 1/3
    np.testing.assert_allclose(series.best_cum_loss, [1 / 3])
    assert series.regret[0] == pytest.approx(series.mean_cum_loss[0] - 1 / 3)


def test_comparator_is_exhaustive_minimum():
    cfg = parse_config("game=cb k=3 n=3 T=40 seed=5 adversary=uniform values_mode=random")
    params = learner_params(cfg)
    res = run_repetition(cfg, params, np.random.SeedSequence(1))
    dag = make_game(cfg).dag
    cum = res.losses.cumsum(axis=0)
    for t in (0, 9, 39):
        assert res.best_cum[t] == pytest.approx(min(cum[t, list(p)].sum() for p in enumerate_paths(dag)))


def test_comparator_below_oblivious_losses():
    series = run_experiment(parse_config(f"{HS_FIXED} T=200 seed=2 reps=5"))
    assert (series.terminal_regrets >= -1e-9).all()


def test_reproducible_and_worker_independent(tmp_path):
    text = "game=hs k=3 n=3 kappa=1 condition=c2 adversary=adaptive T=60 seed=9 reps=3 diagnostics=on"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_experiment(parse_config(text)), a)
    write_csv(run_experiment(parse_config(text + " workers=2")), b)
    assert a.read_bytes() == b.read_bytes()


def test_different_seeds_differ():
    a = run_experiment(parse_config(f"{CB_FIXED} T=50 seed=1 reps=2"))
    b = run_experiment(parse_config(f"{CB_FIXED} T=50 seed=2 reps=2"))
    assert not np.array_equal(a.mean_cum_loss, b.mean_cum_loss)


@pytest.mark.parametrize("adversary", ["uniform", "cyclic", "best_response"])
def test_cb_adversaries_run(adversary):
    series = run_experiment(parse_config(f"game=cb k=2 n=3 T=30 seed=1 reps=2 adversary={adversary}"))
    assert series.regret.shape == (30,)


def test_full_information_beats_semi_bandit():
    base = f"{CB_FIXED} T=400 seed=4 reps=10 eta=0.05 beta=0.01"
    full = run_experiment(parse_config(base + " observation=full"))
    bandit = run_experiment(parse_config(base + " observation=semi_bandit"))
    assert full.mean_regret < bandit.mean_regret


# --- CSV --------------------------------------------------------------------


def test_csv_shape_and_round_trip(tmp_path):
    path = tmp_path / "s.csv"
    series = run_experiment(parse_config(f"{CB_FIXED} T=2 seed=1 reps=2"))
    write_csv(series, path)
    text = path.read_text()
    lines = text.split("\n")
    assert text.endswith("\n") and len(text.splitlines()) == 3
    assert lines[0] == CSV_HEADER
    assert all(ln.count(",") == 4 and ln.endswith(",") for ln in lines[1:3])
    back = read_csv(path)
    assert back["mean_Qt"] is None
    np.testing.assert_allclose(back["regret"], series.regret, atol=1e-12, rtol=0)


def test_csv_round_trip_with_diagnostics(tmp_path):
    path = tmp_path / "s.csv"
    series = run_experiment(parse_config(f"{HS_FIXED} T=20 seed=1 reps=2 diagnostics=on"))
    write_csv(series, path)
    back = read_csv(path)
    for name in ("mean_cum_loss", "best_cum_loss", "regret", "mean_Qt"):
        np.testing.assert_allclose(back[name], getattr(series, name), atol=1e-12, rtol=0)
    assert back["t"].tolist() == list(range(1, 21))


# --- bound check ------------------------------------------------------------


def test_verify_bound_auto_tuned_passes():
    report = verify_bound(parse_config(f"{HS_FIXED} T=300 seed=1 reps=6"))
    assert report.passed and report.rhs > report.mean_regret


def test_verify_bound_bad_eta_still_evaluates():
    report = verify_bound(parse_config(f"{CB_FIXED} T=50 seed=1 reps=3 eta=1000 beta=0.01"))
    assert np.isfinite(report.rhs) and report.rhs > 0
    assert len(report.lines()) == 6


def test_verify_bound_semi_bandit_passes():
    report = verify_bound(parse_config(f"{CB_FIXED} T=300 seed=2 reps=6 observation=semi_bandit"))
    assert report.passed


# --- graph info -------------------------------------------------------------


def test_graph_info_examples():
    cb = graph_info("cb", 3, 3)
    assert (cb["N"], cb["E"], cb["P"], cb["path_length"], cb["alpha_bound"]) == (10, 18, 10, 3, 12)
    assert cb["a0"] and not cb["symmetric"]
    hs = graph_info("hs", 3, 3, 1, "c1")
    assert (hs["N"], hs["E"], hs["P"], hs["path_length"], hs["alpha_bound"]) == (11, 20, 17, 4, 3)
    assert hs["symmetric"] and not hs["a0"] and hs["alpha"] == 3
    assert graph_info("hs", 5, 3, 0)["P"] == 5
    with pytest.raises(MissingKey):
        graph_info("hs", 3, 3)


def test_explicit_config_object():
    cfg = ExperimentConfig(game="cb", k=2, n=2, T=5, seed=0, reps=1)
    assert run_experiment(cfg).t.tolist() == [1, 2, 3, 4, 5]
