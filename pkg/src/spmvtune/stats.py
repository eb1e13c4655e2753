"""
Row Distribution Statistics
Mean, population standard deviation and D_mat = sigma / mu of entries per row
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import StatsError
from .formats import RowHistogram, row_histogram

logger = logging.getLogger(__name__)

_BLOCK = 1 << 16


@dataclass(frozen=True)
class RowStats:
    """Row statistics of one matrix"""

    mu: float
    sigma: float
    d_mat: float


def _moments(counts):
    """
    Single pass over the histogram in blocks

    Counts are integers, so the running sum and sum of squares are kept as
    exact Python integers; no cancellation can occur when the variance is
    formed from them.
    """
    total = 0
    total_sq = 0
    for start in range(0, len(counts), _BLOCK):
        block = np.asarray(counts[start:start + _BLOCK], dtype=np.int64)
        total += int(block.sum())
        total_sq += int(np.dot(block, block))
    return total, total_sq


def row_stats_from_histogram(histogram):
    """
    RowStats of a row histogram

    Raises:
        StatsError: no stored entries, so mu = 0 and D_mat is undefined
    """
    counts = histogram.counts if isinstance(histogram, RowHistogram) else np.asarray(histogram)
    n = len(counts)
    total, total_sq = _moments(counts)
    if n == 0 or total == 0:
        raise StatsError("D_mat is undefined for a matrix without stored entries (mu = 0)")
    if (counts < 0).any():
        raise StatsError("Row histogram has negative counts")

    # n^2 * variance, exact
    scaled_var = n * total_sq - total * total
    mu = total / n
    sigma = math.sqrt(scaled_var) / n
    d_mat = sigma / mu
    return RowStats(mu=mu, sigma=sigma, d_mat=d_mat)


def row_stats(m):
    """RowStats of a CRS matrix; explicitly stored zeros count as entries"""
    return row_stats_from_histogram(row_histogram(m))
