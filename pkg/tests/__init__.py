"""
Test suites for spmvtune
"""
