"""
Report generators
"""
