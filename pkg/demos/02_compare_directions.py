"""How two directions are told apart without locating either boundary.

Uses a two-pixel oracle with prescribed boundaries so every probe outcome is
predictable, then measures the average bill of the midpoint and median rules
over boundary pairs drawn from the fitted density.
"""

import numpy as np

from adba import AttackConfig, DEFAULT_RHO, Oracle, compare_directions, sample_boundary

D1 = np.array([1, -1], dtype=np.int8)
D2 = np.array([-1, 1], dtype=np.int8)
DBEST = np.array([1, 1], dtype=np.int8)
X = np.zeros(2)


class PairOracle(Oracle):
    """Adversarial along D1/D2 exactly when the strength reaches g1/g2."""

    def __init__(self, g1, g2):
        super().__init__(n=2, class_count=2, budget=10 ** 9)
        self.g = {(True, False): g1, (False, True): g2, (True, True): 0.0}
        self.log = []

    def _predict(self, image):
        r = float(image.max())
        if r <= 0:
            return 0
        pattern = (image[0] > 0, image[1] > 0)
        self.log.append((pattern, r))
        return 1 if r >= self.g[pattern] else 0


print("single comparison, boundaries g1=0.30 g2=0.20, midpoint rule:")
oracle = PairOracle(0.30, 0.20)
out = compare_directions(oracle, X, 0, DBEST, 1.0, D1, D2,
                         AttackConfig(epsilon=0.05, budget=100, tau=0.002))
for pattern, r in oracle.log:
    who = "d1" if pattern == (True, False) else "d2"
    print(f"  probe {who} at r={r:<8.4g} -> {'adversarial' if r >= (0.30 if who == 'd1' else 0.20) else 'clean'}")
print(f"  outcome: {out.status}, certified strength {out.adb}, {out.queries_used} queries")
print()

print("average bill over 2000 sampled boundary pairs:")
rng = np.random.default_rng(1)
for rule, rho in (("midpoint", None), ("median", DEFAULT_RHO)):
    config = AttackConfig(epsilon=0.05, budget=10 ** 6, tau=0.002,
                          probe_rule="median" if rho else "midpoint", rho=rho)
    bills = []
    state = np.random.default_rng(1)
    for _ in range(2000):
        g1 = sample_boundary(DEFAULT_RHO, state.uniform(1e-9, 1 - 1e-9))
        g2 = sample_boundary(DEFAULT_RHO, state.uniform(1e-9, 1 - 1e-9))
        out = compare_directions(PairOracle(g1, g2), X, 0, DBEST, 1.0, D1, D2, config)
        if out.status in ("winner-d1", "winner-d2"):
            bills.append(out.queries_used - 2)  # drop the shared upper-bound check
    print(f"  {rule:>8}: {np.mean(bills):.3f} differentiation queries "
          f"over {len(bills)} resolved pairs")
print()
print("the median rule needs about four queries to split a pair; the midpoint")
print("rule wastes probes in the thin lower tail of the boundary density.")
