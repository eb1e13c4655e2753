"""
Matrix ingestion: Matrix Market files, synthetic generators, benchmark sets
"""

from .benchmark_set import generate, load_benchmark_set, load_reference_matrices, reference_row
from .generators import gen_banded, gen_cv_target, gen_skewed, solve_two_point
from .matrix_market import read_matrix_market, write_coordinate, write_matrix_market

__all__ = [
    "gen_banded",
    "generate",
    "gen_cv_target",
    "gen_skewed",
    "load_benchmark_set",
    "load_reference_matrices",
    "read_matrix_market",
    "reference_row",
    "solve_two_point",
    "write_coordinate",
    "write_matrix_market",
]
