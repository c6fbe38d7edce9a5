"""
Convergence studies, consistency checks and report serialization.
"""
