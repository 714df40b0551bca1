"""Hide-and-Seek under both feedback conditions, with a semi-bandit ablation.

Under c1 the seeker sees every location's loss; under c2 only what it
searched, with the hider free to revise unsearched locations.  Regret is
scored against the best fixed search on the realized losses, so it can go
negative when an adaptive hider reacts to the seeker's own history.
"""
from soppp.harness import graph_info, parse_config, run_experiment

for condition in ("c1", "c2"):
    info = graph_info("hs", 3, 3, 1, condition)
    print(f"{condition}: E={info['E']} P={info['P']} symmetric={info['symmetric']} alpha={info['alpha']}")

base = "game=hs k=3 n=3 kappa=1 T=1500 reps=10 seed=3"
for condition, adversary in (("c1", "fixed losses=0.2,0.7,0.1"), ("c2", "adaptive")):
    for observation in ("game", "semi_bandit"):
        cfg = parse_config(f"{base} condition={condition} adversary={adversary} observation={observation}")
        s = run_experiment(cfg)
        print(f"{condition} {adversary.split()[0]:8s} {observation:11s} regret {s.mean_regret:7.2f} (se {s.regret_se:.2f})")
