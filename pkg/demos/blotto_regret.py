"""Exp3-OE against three Blotto opponents; prints regret/T as T grows."""
from soppp.harness import parse_config, run_experiment

for adversary in ("uniform", "cyclic", "fixed allocation=3,0,0"):
    print(f"adversary={adversary}")
    for T in (250, 1000, 4000):
        cfg = parse_config(f"game=cb k=3 n=3 T={T} reps=5 seed=1 adversary={adversary}")
        s = run_experiment(cfg)
        print(f"  T={T:5d}  regret {s.mean_regret:8.2f}  regret/T {s.mean_regret / T:.4f}  eta={s.params.eta:.3g}")
