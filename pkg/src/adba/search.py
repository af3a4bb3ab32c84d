"""Block-partitioned sign-flip search for a low-boundary perturbation direction.

The search variable is a sign vector d in {-1, +1}^N. Each iteration flips two
adjacent blocks of the incumbent direction to form two candidates, lets the
comparison routine pick a winner, and tracks the incumbent (d_best, r_best)
until r_best drops to the strength threshold or the query budget runs out.
Block granularity doubles once every block at the current depth has been
tried; at single-element granularity the sweep repeats in the same order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import compare as cmp
from .distribution import RhoParams
from .exceptions import BudgetExhaustedError, InitFailedError
from .oracle import query_perturbed

STATUS_SUCCESS = "success"
STATUS_BUDGET = "budget-exhausted"
STATUS_MISCLASSIFIED = "already-misclassified"
STATUS_INIT_FAILED = "init-failed"

INIT_RANDOM_TRIES = 16


@dataclass
class AttackConfig:
    """Search thresholds and probe-rule selection."""

    epsilon: float = 0.05
    budget: int = 10000
    tau: float = 0.002
    probe_rule: str = "midpoint"
    rho: RhoParams | None = None
    ccm: bool = False
    max_probe_loops: int = 64

    def __post_init__(self):
        if not 0.0 < self.tau < self.epsilon < 1.0:
            raise ValueError("need 0 < tau < epsilon < 1")
        if self.budget < 1 or self.max_probe_loops < 1:
            raise ValueError("budget and max_probe_loops must be positive")
        if self.probe_rule not in ("midpoint", "median"):
            raise ValueError(f"unknown probe rule {self.probe_rule!r}")


@dataclass
class AttackReport:
    success: bool
    final_direction: np.ndarray | None
    r_final: float
    queries: int
    iterations: int
    trace: list = field(default_factory=list)
    status: str = STATUS_BUDGET


@dataclass
class BlockSchedule:
    """Depth s and even block cursor k, with depth capped at s_max."""

    n: int
    s: int = 0
    k: int = 0

    def __post_init__(self):
        self.s_max = max(math.ceil(math.log2(self.n)) - 1, 0) if self.n > 1 else 0

    def advance(self, block_count):
        """Move to the next block pair, deepening after a full sweep."""
        self.k += 2
        if self.k >= block_count:
            self.k = 0
            self.s = min(self.s + 1, self.s_max)


def partition_blocks(n, s):
    """Split [0, n) into min(2^(s+1), n) contiguous near-equal ranges."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if 2 ** (s + 1) > 2 * n:
        raise ValueError("block depth too deep for this dimension")
    count = min(2 ** (s + 1), n)
    bounds = [(j * n) // count for j in range(count + 1)]
    return [(bounds[j], bounds[j + 1]) for j in range(count)]


def flip_block(d, block):
    """Copy of d with signs negated on the half-open index range."""
    start, stop = block
    if not 0 <= start <= stop <= d.size:
        raise IndexError(f"block {block} out of range for length {d.size}")
    out = d.copy()
    out[start:stop] *= -1
    return out


def all_ones_direction(n):
    return np.ones(n, dtype=np.int8)


def init_direction(oracle, x, y, seed=0):
    """First adversarial direction at full strength, with (d, r_best=1).

    Tries all ones, then all minus ones, then a fixed ladder of seeded random
    sign vectors. Every probe is a counted query. Raises InitFailedError when
    no candidate fools the model at r = 1.
    """
    n = x.size
    candidates = [all_ones_direction(n), -all_ones_direction(n)]
    rng = np.random.default_rng(seed)
    for _ in range(INIT_RANDOM_TRIES):
        candidates.append((rng.integers(0, 2, size=n) * 2 - 1).astype(np.int8))
    for d in candidates:
        if query_perturbed(oracle, x, y, d, 1.0):
            return d, 1.0
    raise InitFailedError("no adversarial starting direction at full strength")


def attack(oracle, x, y, config, seed=0, count_verification_query=False):
    """Run the full direction search against one image.

    The image must be correctly classified; this is verified with one query
    that is uncounted unless count_verification_query is set. Success means a
    certified adversarial example exists at strength r_final <= epsilon.
    """
    used0 = oracle.ledger.used

    def report(status, d=None, r=math.inf, iterations=0, trace=None):
        return AttackReport(
            success=status == STATUS_SUCCESS,
            final_direction=d,
            r_final=r,
            queries=oracle.ledger.used - used0,
            iterations=iterations,
            trace=trace or [],
            status=status,
        )

    if oracle.label(x, charge=count_verification_query) != y:
        return report(STATUS_MISCLASSIFIED)

    try:
        d_best, r_best = init_direction(oracle, x, y, seed=seed)
    except BudgetExhaustedError:
        return report(STATUS_BUDGET)
    except InitFailedError:
        return report(STATUS_INIT_FAILED)

    compare_fn = cmp.ccm_compare if config.ccm else cmp.compare_directions
    schedule = BlockSchedule(n=x.size)
    trace = []
    iterations = 0

    while oracle.ledger.remaining > 0 and r_best > config.epsilon:
        blocks = partition_blocks(x.size, schedule.s)
        d1 = flip_block(d_best, blocks[schedule.k])
        if schedule.k + 1 < len(blocks):
            d2 = flip_block(d_best, blocks[schedule.k + 1])
        else:
            # Odd block count at the deepest level: duel the lone flip
            # against an unflipped copy of the incumbent.
            d2 = d_best.copy()
        out = compare_fn(oracle, x, y, d_best, r_best, d1, d2, config)
        d_best, r_best = out.winner, out.adb
        iterations += 1
        trace.append((iterations, schedule.s, schedule.k, r_best, oracle.ledger.used - used0))
        if out.status == cmp.BUDGET_EXHAUSTED:
            break
        schedule.advance(len(blocks))

    # Every adopted (d_best, r_best) was observed adversarial when adopted
    # (by init or inside the comparison), so the success re-check is a memo
    # hit and costs no query.
    if r_best <= config.epsilon:
        return report(STATUS_SUCCESS, d_best, r_best, iterations, trace)
    return report(STATUS_BUDGET, d_best, r_best, iterations, trace)
