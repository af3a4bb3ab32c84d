"""A full attack on an analytic toy model, iteration by iteration.

The threshold oracle makes every probe outcome explainable by hand: the mean
of the clamped image either crosses the threshold or it does not.
"""

import numpy as np

from adba import AttackConfig, ToyLinearOracle, ToyMeanThresholdOracle, attack, true_boundary

print("=== mean-threshold toy, N=4 ===")
oracle = ToyMeanThresholdOracle(n=4, threshold=0.5, budget=10 ** 4)
x = np.full(4, 0.45)
print(f"anchor mean {x.mean():.2f}, threshold 0.5, so label 0; flipping the mean")
print(f"above 0.5 needs strength {true_boundary(oracle, x, 0, np.ones(4, dtype=np.int8)):.4f} "
      f"along the all-plus direction")

report = attack(oracle, x, 0, AttackConfig(epsilon=0.2, budget=10 ** 4))
print(f"status {report.status} after {report.queries} queries, "
      f"certified strength {report.r_final:.6f}")
for iteration, s, k, r_best, cum in report.trace:
    print(f"  iter {iteration}: depth {s} blocks {k},{k + 1} -> r_best {r_best:.6f} "
          f"(cumulative queries {cum})")
print()

print("=== random linear toy, N=32 ===")
rng = np.random.default_rng(12)
n = 32
w = rng.normal(0.0, 1.0, n)
xl = rng.uniform(0.2, 0.8, n)
margin = 0.04 * np.abs(w).sum()
oracle = ToyLinearOracle(weights=np.vstack([np.zeros(n), w]),
                         bias=np.array([0.0, -(w @ xl) - margin]), budget=10 ** 4)
report = attack(oracle, xl, 0, AttackConfig(epsilon=0.05, budget=10 ** 4))
print(f"status {report.status}: {report.queries} queries, {report.iterations} iterations, "
      f"final strength {report.r_final:.4f}")
print("r_best by iteration:",
      " ".join(f"{entry[3]:.3f}" for entry in report.trace[:12]),
      "..." if len(report.trace) > 12 else "")
aligned = int(np.sum(np.sign(w) == report.final_direction))
print(f"final direction agrees with the weight signs on {aligned}/{n} entries")
print("(the best possible direction matches every weight sign; the search")
print(" stops as soon as the certified strength clears epsilon)")
