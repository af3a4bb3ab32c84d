"""Parametric model of where decision boundaries fall inside a strength bracket.

The density has the inverse-proportional form

    rho(r) = a / (|d - r/r_ref|^b + c),   r in [0, r_ref],

where ``r_ref`` is the current best strength and (a, b, c, d) are shape
parameters. Probe selection for the median search rule reduces to splitting
the mass of this density in half on the current bracket; nothing here ever
queries a model.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

# Simpson rule on a fixed uniform grid; the density is smooth and bounded on
# its whole domain (min |d - u| = d - 1 > 0 for the default parameters), so a
# fixed grid is enough for ~1e-12 relative accuracy.
_SIMPSON_POINTS = 1025

_PARAM_FLOOR = 1e-6

# Relative half-mass tolerance used by the solvers. The public contract is
# 1e-6 of the bracket mass; solving to 2e-7 leaves margin for the additivity
# error of evaluating the two half-brackets on separate grids.
_MASS_TOL = 2e-7


@dataclass(frozen=True)
class RhoParams:
    """Shape parameters of the boundary density plus its reference scale."""

    a: float
    b: float
    c: float
    d: float
    r_ref: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "r_ref"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"RhoParams.{name} must be positive")

    def at_scale(self, r_ref):
        """Same shape restricted to [0, r_ref]."""
        return replace(self, r_ref=float(r_ref))


#: Default shape parameters, fitted against boundary statistics of deep image
#: classifiers. The median rule is insensitive to their exact values, so they
#: are reused across oracles unless refitted.
DEFAULT_RHO = RhoParams(a=0.0313, b=3.066, c=0.168, d=1.134)


@dataclass(frozen=True)
class FitResult:
    """Outcome of fitting RhoParams to empirical boundary samples."""

    params: RhoParams
    residual: float
    low_quality: bool


def _density_unit(a, b, c, d, u):
    return a / (np.abs(d - u) ** b + c)


def rho_density(p: RhoParams, r):
    """Density value at strength r (scalar or array), unnormalized."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r > p.r_ref):
        raise ValueError("rho_density evaluated outside [0, r_ref]")
    out = _density_unit(p.a, p.b, p.c, p.d, r / p.r_ref)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4096)
def _mass_unit(a, b, c, d, lo, hi):
    """Composite Simpson integral of the unit-scale density over [lo, hi]."""
    if hi == lo:
        return 0.0
    u = np.linspace(lo, hi, _SIMPSON_POINTS)
    f = _density_unit(a, b, c, d, u)
    h = (hi - lo) / (_SIMPSON_POINTS - 1)
    return float((h / 3.0) * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum()))


def rho_mass(p: RhoParams, lo, hi):
    """Integral of the density over [lo, hi], 0 <= lo <= hi <= r_ref."""
    lo, hi = float(lo), float(hi)
    if not 0.0 <= lo <= hi <= p.r_ref:
        raise ValueError("rho_mass bounds must satisfy 0 <= lo <= hi <= r_ref")
    return p.r_ref * _mass_unit(p.a, p.b, p.c, p.d, lo / p.r_ref, hi / p.r_ref)


@lru_cache(maxsize=16)
def _cdf_table(a, b, c, d):
    """Prefix CDF of the unit-scale density on a dense grid (warm starts only).

    Accuracy of the table is ~1e-12; solvers still terminate on the real
    Simpson mass criterion, the table just shrinks the starting bracket.
    """
    n = 2 ** 18 + 1
    u = np.linspace(0.0, 1.0, n)
    f = _density_unit(a, b, c, d, u)
    h = 1.0 / (n - 1)
    seg = (h / 3.0) * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    phi = np.concatenate(([0.0], np.cumsum(seg)))
    return u[::2], phi


def _warm_bracket(a, b, c, d, lo, hi, target_from_zero):
    """Bracket in [lo, hi] whose CDF straddles target_from_zero (unit scale)."""
    nodes, phi = _cdf_table(a, b, c, d)
    j = int(np.searchsorted(phi, target_from_zero))
    wl = nodes[max(j - 1, 0)]
    wh = nodes[min(j, len(nodes) - 1)]
    return max(lo, wl), min(hi, wh)


def _invert_mass_unit(a, b, c, d, lo, hi, frac):
    """Point m in (lo, hi) with mass(lo, m) = frac * mass(lo, hi), unit scale.

    Bisection on the CDF, warm-started from the cached table, terminating on
    the Simpson mass criterion (relative tolerance _MASS_TOL).
    """
    total = _mass_unit(a, b, c, d, lo, hi)
    target = frac * total
    blo, bhi = _warm_bracket(a, b, c, d, lo, hi, _mass_unit(a, b, c, d, 0.0, lo) + target)
    if not (lo <= blo < bhi <= hi):
        blo, bhi = lo, hi
    # Warm bracket comes from an approximate table; verify it, else widen.
    if _mass_unit(a, b, c, d, lo, blo) > target or _mass_unit(a, b, c, d, lo, bhi) < target:
        blo, bhi = lo, hi
    for _ in range(200):
        mid = 0.5 * (blo + bhi)
        got = _mass_unit(a, b, c, d, lo, mid)
        if abs(got - target) <= _MASS_TOL * total:
            return mid
        if got < target:
            blo = mid
        else:
            bhi = mid
    return 0.5 * (blo + bhi)


@lru_cache(maxsize=65536)
def _median_unit(a, b, c, d, lo, hi):
    return _invert_mass_unit(a, b, c, d, lo, hi, 0.5)


def conditional_median(p: RhoParams, start, end):
    """Strength m in (start, end) splitting the bracket mass in half.

    Satisfies |mass(start, m) - mass(m, end)| <= 1e-6 * mass(start, end).
    """
    start, end = float(start), float(end)
    if not 0.0 <= start < end <= p.r_ref:
        raise ValueError("conditional_median needs 0 <= start < end <= r_ref")
    m = p.r_ref * _median_unit(p.a, p.b, p.c, p.d, start / p.r_ref, end / p.r_ref)
    return min(max(m, np.nextafter(start, end)), np.nextafter(end, start))


def sample_boundary(p: RhoParams, u):
    """Inverse-CDF draw: strength r with mass(0, r)/mass(0, r_ref) = u +- 1e-6."""
    u = float(u)
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie strictly inside (0, 1)")
    r = p.r_ref * _invert_mass_unit(p.a, p.b, p.c, p.d, 0.0, 1.0, u)
    return min(max(r, np.nextafter(0.0, 1.0)), np.nextafter(p.r_ref, 0.0))


def fit_rho(samples, bins=50):
    """Least-squares fit of the density shape to boundary samples in [0, 1].

    Builds a histogram density and minimizes the squared residual against the
    parametric form with a derivative-free simplex search started from the
    default parameters. Positivity is enforced by clamping. Needs at least
    200 samples; a near-degenerate histogram is flagged low_quality.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 200:
        raise ValueError("fit_rho needs at least 200 samples")
    if np.any(samples < 0.0) or np.any(samples > 1.0):
        raise ValueError("fit_rho samples must lie in [0, 1]")

    heights, edges = np.histogram(samples, bins=bins, range=(0.0, 1.0), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    occupied = int(np.count_nonzero(heights))

    def objective(theta):
        a, b, c, d = np.maximum(theta, _PARAM_FLOOR)
        pred = _density_unit(a, b, c, d, centers)
        return float(np.sum((pred - heights) ** 2))

    x0 = np.array([DEFAULT_RHO.a, DEFAULT_RHO.b, DEFAULT_RHO.c, DEFAULT_RHO.d])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxiter": 4000, "xatol": 1e-9, "fatol": 1e-12})
    a, b, c, d = np.maximum(res.x, _PARAM_FLOOR)
    params = RhoParams(a=float(a), b=float(b), c=float(c), d=float(d), r_ref=1.0)
    low_quality = occupied < 3 or not np.isfinite(res.fun)
    return FitResult(params=params, residual=float(res.fun), low_quality=low_quality)
