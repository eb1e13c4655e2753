"""
spmvtune - run-time sparse format transformation and auto-tuning for SpMV
"""

__version__ = "1.0.0"
