"""Exact-boundary baseline: per-direction binary search to fixed precision.

This is the query-hungry strategy the approximate comparison replaces. It is
kept behind the same attack skeleton so query costs can be compared method
against method on identical schedules.
"""

import math

from . import search
from .exceptions import BudgetExhaustedError, InitFailedError
from .oracle import query_perturbed

DEFAULT_PRECISION = 1e-3


def exact_boundary(oracle, x, y, d, r_hi, precision):
    """Boundary along d located to within `precision` by plain bisection.

    Caller must already know d is adversarial at r_hi; the returned upper
    bracket end is then certified adversarial. Costs exactly
    ceil(log2(r_hi / precision)) queries.
    """
    if precision <= 0.0:
        raise ValueError("precision must be positive")
    lo, hi = 0.0, r_hi
    while hi - lo > precision:
        mid = 0.5 * (lo + hi)
        if query_perturbed(oracle, x, y, d, mid):
            hi = mid
        else:
            lo = mid
    return hi


def expected_boundary_queries(r_hi, precision):
    """Deterministic query bill of exact_boundary."""
    return max(math.ceil(math.log2(r_hi / precision)), 0)


def attack_exact(oracle, x, y, config, seed=0, precision=DEFAULT_PRECISION,
                 count_verification_query=False):
    """Direction search resolving every candidate pair by exact bisection.

    Same schedule as :func:`adba.search.attack`; each candidate gets one probe
    at the incumbent strength (early skip when it fails there) and a full
    boundary search when it does not. The cheaper of the two boundaries wins.
    """
    used0 = oracle.ledger.used

    def report(status, d=None, r=math.inf, iterations=0, trace=None):
        return search.AttackReport(
            success=status == search.STATUS_SUCCESS,
            final_direction=d,
            r_final=r,
            queries=oracle.ledger.used - used0,
            iterations=iterations,
            trace=trace or [],
            status=status,
        )

    if oracle.label(x, charge=count_verification_query) != y:
        return report(search.STATUS_MISCLASSIFIED)

    try:
        d_best, r_best = search.init_direction(oracle, x, y, seed=seed)
    except BudgetExhaustedError:
        return report(search.STATUS_BUDGET)
    except InitFailedError:
        return report(search.STATUS_INIT_FAILED)

    schedule = search.BlockSchedule(n=x.size)
    trace = []
    iterations = 0

    while oracle.ledger.remaining > 0 and r_best > config.epsilon:
        blocks = search.partition_blocks(x.size, schedule.s)
        candidates = [search.flip_block(d_best, blocks[schedule.k])]
        if schedule.k + 1 < len(blocks):
            candidates.append(search.flip_block(d_best, blocks[schedule.k + 1]))
        try:
            for d in candidates:
                if not query_perturbed(oracle, x, y, d, r_best):
                    continue
                b = exact_boundary(oracle, x, y, d, r_best, precision)
                if b < r_best:
                    d_best, r_best = d, b
        except BudgetExhaustedError:
            iterations += 1
            trace.append((iterations, schedule.s, schedule.k, r_best,
                          oracle.ledger.used - used0))
            break
        iterations += 1
        trace.append((iterations, schedule.s, schedule.k, r_best, oracle.ledger.used - used0))
        schedule.advance(len(blocks))

    if r_best <= config.epsilon:
        return report(search.STATUS_SUCCESS, d_best, r_best, iterations, trace)
    return report(search.STATUS_BUDGET, d_best, r_best, iterations, trace)
