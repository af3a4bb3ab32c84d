"""Differentiating two candidate directions with a shrinking strength bracket.

Instead of locating either decision boundary exactly, both candidates are
probed at a shared strength (the approximate decision boundary). A split
outcome, one candidate fooling the model while the other does not, orders the
two boundaries immediately; non-split outcomes shrink the bracket and the
probe is re-chosen inside it, either at the midpoint or at the mass median of
the boundary density. Probes at a repeated strength are memoized per call, so
counted queries equal distinct model evaluations.
"""

from dataclasses import dataclass

import numpy as np

from .distribution import conditional_median
from .exceptions import BudgetExhaustedError
from .oracle import query_perturbed

KEPT_BEST = "kept-best"
WINNER_D1 = "winner-d1"
WINNER_D2 = "winner-d2"
TOLERANCE_EXIT = "tolerance-exit"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass
class ComparisonOutcome:
    """Winner direction, its certified strength, and the query bill."""

    winner: np.ndarray
    adb: float
    queries_used: int
    status: str


def next_probe(start, end, r_ref, config):
    """Probe strength strictly inside (start, end) under the configured rule."""
    if config.probe_rule == "median" and config.rho is not None:
        m = conditional_median(config.rho.at_scale(r_ref), start, end)
    else:
        m = 0.5 * (start + end)
    return min(max(m, np.nextafter(start, end)), np.nextafter(end, start))


def compare_directions(oracle, x, y, d_best, r_best, d1, d2, config):
    """Pick the better of d1, d2 relative to the incumbent (d_best, r_best).

    Both candidates are probed at r_best first: if neither fools the model the
    incumbent stands; a split there decides outright. Otherwise bisect the
    bracket [0, r_best], moving an endpoint to the current probe on every
    non-split outcome. On tolerance or loop-cap exit, d1 is returned at the
    smallest strength where both candidates were seen adversarial, so the
    result is always a certified adversarial pair. Budget exhaustion returns
    the best state that is still certified.
    """
    if not 0.0 < r_best <= 1.0:
        raise ValueError("r_best must lie in (0, 1]")
    if np.array_equal(d1, d2):
        raise ValueError("candidate directions must differ")

    used0 = oracle.ledger.used
    memo = {}

    def probe(slot, d, r):
        key = (slot, r)
        if key not in memo:
            memo[key] = query_perturbed(oracle, x, y, d, r)
        return memo[key]

    def outcome(winner, adb, status):
        return ComparisonOutcome(winner, adb, oracle.ledger.used - used0, status)

    try:
        adv1 = probe(1, d1, r_best)
        adv2 = probe(2, d2, r_best)
    except BudgetExhaustedError:
        return outcome(d_best, r_best, BUDGET_EXHAUSTED)
    if not adv1 and not adv2:
        return outcome(d_best, r_best, KEPT_BEST)
    if adv1 and not adv2:
        return outcome(d1, r_best, WINNER_D1)
    if adv2 and not adv1:
        return outcome(d2, r_best, WINNER_D2)

    # Both adversarial at r_best: their boundaries sit inside (0, r_best].
    start, end = 0.0, r_best
    loops = 0
    try:
        while end - start > config.tau and loops < config.max_probe_loops:
            loops += 1
            r = next_probe(start, end, r_best, config)
            adv1 = probe(1, d1, r)
            adv2 = probe(2, d2, r)
            if adv1 and adv2:
                end = r
            elif not adv1 and not adv2:
                start = r
            elif adv1:
                return outcome(d1, r, WINNER_D1)
            else:
                return outcome(d2, r, WINNER_D2)
    except BudgetExhaustedError:
        # end is the smallest strength at which both candidates were seen
        # adversarial, so (d1, end) is still a certified fallback.
        return outcome(d1, end, BUDGET_EXHAUSTED)
    return outcome(d1, end, TOLERANCE_EXIT)


def ccm_compare(oracle, x, y, d_best, r_best, d1, d2, config):
    """Pairwise comparison plus an extra duel of the winner against d_best.

    When the pairwise step produced a new direction at strength adb, keep
    bisecting [0, adb], probing the winner and the incumbent together, to
    find out which of the two has the smaller boundary. Costs extra queries
    for, at best, a tighter strength; kept for ablation runs.
    """
    used0 = oracle.ledger.used
    first = compare_directions(oracle, x, y, d_best, r_best, d1, d2, config)
    if first.status in (KEPT_BEST, BUDGET_EXHAUSTED):
        return first

    challenger = first.winner
    start, end = 0.0, first.adb
    memo = {}

    def probe(slot, d, r):
        key = (slot, r)
        if key not in memo:
            memo[key] = query_perturbed(oracle, x, y, d, r)
        return memo[key]

    def outcome(winner, adb, status):
        return ComparisonOutcome(winner, adb, oracle.ledger.used - used0, status)

    loops = 0
    try:
        while end - start > config.tau and loops < config.max_probe_loops:
            loops += 1
            r = next_probe(start, end, r_best, config)
            adv_c = probe(1, challenger, r)
            adv_b = probe(2, d_best, r)
            if adv_c and adv_b:
                end = r
            elif not adv_c and not adv_b:
                start = r
            elif adv_c:
                return outcome(challenger, r, first.status)
            else:
                # The incumbent beat the challenger at a certified strength.
                return outcome(d_best, r, KEPT_BEST)
    except BudgetExhaustedError:
        return outcome(challenger, end, BUDGET_EXHAUSTED)
    return outcome(challenger, end, first.status)
