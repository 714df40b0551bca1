"""Walk through weight pushing and the q computation on a small Blotto graph.

Samples paths from the exponential-weights distribution without listing the
paths, then checks the sampled frequencies and q against brute force.
"""
import numpy as np

from soppp.dag import enumerate_paths, path_probability, sample_path, weight_push
from soppp.games import ColonelBlotto
from soppp.observation import compute_q_bruteforce, compute_q_many, diagnose

rng = np.random.default_rng(0)
game = ColonelBlotto(3, 3)
dag = game.dag
print(f"G(3,3): {dag.vertex_count} vertices, {dag.edge_count} edges")

# random log-weights, as a learner would hold after some stages
lw = rng.normal(0.0, 1.0, dag.edge_count)
flow = weight_push(dag, lw)
print(f"log H(s,d) = {flow.log_total:.4f}")

paths = enumerate_paths(dag)
probs = np.array([path_probability(dag, flow, lw, p) for p in paths])
counts = np.zeros(len(paths))
index = {p: i for i, p in enumerate(paths)}
for _ in range(20000):
    counts[index[sample_path(dag, flow, lw, rng)]] += 1
print("allocation   exact    sampled")
for p, pr, c in zip(paths, probs, counts / counts.sum()):
    print(f"{str(game.allocation_of(p)):10s} {pr:7.4f}  {c:7.4f}")

# observation graph when the opponent plays (1,1,1)
_, obs = game.round((1, 1, 1), np.full(3, 1 / 3))
q = compute_q_many(dag, lw, obs)
brute = np.array([compute_q_bruteforce(dag, lw, obs, e) for e in range(dag.edge_count)])
print(f"max |q - brute force| = {np.abs(q - brute).max():.2e}")
d = diagnose(dag, obs)
print(f"symmetric={d.symmetric} a0={d.satisfies_a0} alpha={d.independence_number} (bound {game.alpha})")
