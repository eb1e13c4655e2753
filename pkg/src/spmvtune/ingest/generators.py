"""
Synthetic Matrix Generators
Deterministic CRS matrices that sweep the D_mat axis

Random streams come from numpy's PCG64 bit generator seeded with the
caller's integer seed, so (parameters, seed) fixes every bit of the output.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import GeneratorError
from ..formats import CrsMatrix

logger = logging.getLogger(__name__)

CV_TOLERANCE = 0.05
MEAN_TOLERANCE = 0.05
_DENSE_ROW_FRACTION = 4


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _crs_from_keys(n, keys, values):
    """keys = row * n + col, sorted and unique"""
    rows = keys // n
    cols = keys % n
    counts = np.bincount(rows, minlength=n) if len(keys) else np.zeros(n, dtype=np.int64)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return CrsMatrix(n, values, cols, row_ptr)


def _random_pattern(rng, n, degrees):
    """
    Sorted unique keys with degrees[i] distinct random columns in row i

    Light rows draw columns with replacement and redraw until every row has
    its count; rows denser than n/4 sample without replacement directly.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    dense = degrees * _DENSE_ROW_FRACTION > n
    light = np.where(dense, 0, degrees)

    keys = np.empty(0, dtype=np.int64)
    deficit = light
    while deficit.sum() > 0:
        rows = np.repeat(np.arange(n, dtype=np.int64), deficit)
        draws = rows * n + rng.integers(0, n, size=len(rows), dtype=np.int64)
        keys = np.unique(np.concatenate((keys, draws)))
        deficit = light - np.bincount(keys // n, minlength=n)

    dense_keys = [row * n + rng.choice(n, size=int(degrees[row]), replace=False)
                  for row in np.flatnonzero(dense)]
    if dense_keys:
        keys = np.sort(np.concatenate([keys] + dense_keys))
    return keys


def gen_banded(n, half_width, wrap=False):
    """
    Band matrix: entry (i, j) iff |i - j| <= half_width, value 1 / (1 + |i - j|)

    With wrap=True the band wraps around the matrix edges so every row has
    2 * half_width + 1 entries.
    """
    if n < 1 or not 0 <= half_width < n:
        raise GeneratorError(f"gen_banded needs 0 <= half_width < n, got n={n}, half_width={half_width}")
    width = 2 * half_width + 1
    if wrap and width > n:
        raise GeneratorError(f"wrapped band of width {width} does not fit n={n}")

    offsets = np.arange(-half_width, half_width + 1, dtype=np.int64)
    rows = np.arange(n, dtype=np.int64).reshape(-1, 1)
    cols = rows + offsets.reshape(1, -1)
    weights = np.broadcast_to(1.0 / (1.0 + np.abs(offsets)), cols.shape)
    if wrap:
        cols = cols % n
        order = np.argsort(cols, axis=1)
        cols = np.take_along_axis(cols, order, axis=1)
        weights = np.take_along_axis(weights, order, axis=1)
        mask = np.ones(cols.shape, dtype=bool)
    else:
        mask = (cols >= 0) & (cols < n)

    counts = mask.sum(axis=1)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return CrsMatrix(n, weights[mask], cols[mask], row_ptr)


def gen_skewed(n, base_deg, heavy_rows, heavy_deg, seed=0):
    """
    Light baseline rows plus a few very heavy rows

    heavy_rows randomly chosen rows get heavy_deg distinct columns, the rest
    base_deg; values are uniform in [-1, 1].
    """
    if n < 1 or not 0 <= heavy_rows <= n:
        raise GeneratorError(f"gen_skewed needs 0 <= heavy_rows <= n, got n={n}, heavy_rows={heavy_rows}")
    for name, degree in (("base_deg", base_deg), ("heavy_deg", heavy_deg)):
        if not 0 <= degree < n:
            raise GeneratorError(f"{name} = {degree} must lie in [0, n) for n={n}")

    rng = _rng(seed)
    degrees = np.full(n, base_deg, dtype=np.int64)
    degrees[rng.choice(n, size=heavy_rows, replace=False)] = heavy_deg
    keys = _random_pattern(rng, n, degrees)
    return _crs_from_keys(n, keys, rng.uniform(-1.0, 1.0, size=len(keys)))


@dataclass(frozen=True)
class TwoPointPlan:
    """Row degrees: heavy_count rows at high, the rest at low"""

    low: int
    high: int
    heavy_count: int
    mean: float
    cv: float


def _plan(n, low, high, heavy_count):
    p = heavy_count / n
    mean = low + p * (high - low)
    cv = math.sqrt(p * (1.0 - p)) * (high - low) / mean if mean > 0 else math.inf
    return TwoPointPlan(low, high, heavy_count, mean, cv)


def _mixing_fractions(low, gap, mean_deg, target):
    """
    Fractions p giving the target CV for levels (low, low + gap)

    Solves p (1 - p) gap^2 = target^2 (low + p gap)^2, plus the fraction that
    keeps the mean exact.
    """
    fractions = []
    delta = mean_deg - low
    if delta > 0:
        fractions.append(delta / gap)
    t2 = target * target
    a = gap * gap * (1.0 + t2)
    b = -gap * (gap - 2.0 * t2 * low)
    c = t2 * low * low
    disc = b * b - 4.0 * a * c
    if disc >= 0:
        root = math.sqrt(disc)
        fractions.extend(((-b - root) / (2.0 * a), (-b + root) / (2.0 * a)))
    return [p for p in fractions if 0.0 < p < 1.0]


def max_feasible_cv(n, mean_deg):
    """Largest CV reachable with levels 0 and n - 1 at the given mean"""
    p = mean_deg / (n - 1)
    return math.sqrt((1.0 - p) / p) if 0 < p < 1 else 0.0


def solve_two_point(n, mean_deg, target_dmat):
    """
    Two degree levels and a heavy-row count whose CV hits target_dmat

    For every low level a in [0, ceil(mean)] the gap to the high level is
    (t^2 m^2 + d^2) / d with d = m - a (the gap that keeps mean m and CV t),
    rounded both ways; the mixing fraction is then re-solved for those
    integer levels and turned into a row count. Plans must land within 5% of
    both the target CV and mean_deg; among those the one with the mean closest
    to mean_deg wins.

    Raises:
        GeneratorError: no plan within tolerance; the message names the feasible range
    """
    if n < 2 or not 0 < mean_deg <= n - 1:
        raise GeneratorError(f"mean_deg must lie in (0, n - 1], got {mean_deg} for n={n}")
    if not (math.isfinite(target_dmat) and target_dmat >= 0):
        raise GeneratorError(f"target_dmat must be finite and >= 0, got {target_dmat}")
    if target_dmat == 0:
        degree = int(round(mean_deg))
        return TwoPointPlan(degree, degree, 0, float(degree), 0.0)

    t, m = target_dmat, mean_deg
    if t > max_feasible_cv(n, m) * (1.0 + CV_TOLERANCE):
        raise _infeasible(n, m, t)
    best = None
    for low in range(0, math.ceil(m) + 1):
        delta = m - low
        gaps = {1, 2}
        if delta > 0:
            gap = (t * t * m * m + delta * delta) / delta
            gaps.update((math.floor(gap), math.ceil(gap)))
        for gap in sorted(g for g in gaps if 1 <= g <= n - 1 - low):
            for p in _mixing_fractions(low, gap, m, t):
                heavy = min(max(int(round(p * n)), 1), n - 1)
                plan = _plan(n, low, low + gap, heavy)
                if abs(plan.cv - t) > CV_TOLERANCE * t or abs(plan.mean - m) > MEAN_TOLERANCE * m:
                    continue
                score = (abs(plan.mean - m), abs(plan.cv - t))
                if best is None or score < best[0]:
                    best = (score, plan)
    if best is None:
        raise _infeasible(n, m, t)
    return best[1]


def _infeasible(n, mean_deg, target_dmat):
    return GeneratorError(
        f"target D_mat {target_dmat} is infeasible for n={n}, mean_deg={mean_deg}; "
        f"feasible range is about [0, {max_feasible_cv(n, mean_deg):.4g}]"
    )


def gen_cv_target(n, mean_deg, target_dmat, seed=0):
    """
    Random matrix whose row-count CV (D_mat) is within 5% of target_dmat

    Degrees follow the two-point plan of solve_two_point; the heavy rows are
    a random subset, columns are distinct and random, values uniform in [-1, 1].
    """
    plan = solve_two_point(n, mean_deg, target_dmat)
    rng = _rng(seed)
    degrees = np.full(n, plan.low, dtype=np.int64)
    degrees[rng.permutation(n)[:plan.heavy_count]] = plan.high
    keys = _random_pattern(rng, n, degrees)
    logger.debug(f"gen_cv_target: levels {plan.low}/{plan.high}, heavy rows {plan.heavy_count}, cv {plan.cv:.4f}")
    return _crs_from_keys(n, keys, rng.uniform(-1.0, 1.0, size=len(keys)))
