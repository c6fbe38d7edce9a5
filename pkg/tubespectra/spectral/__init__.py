"""
Numerical library: eigensolver kernels, tube geometry, cross-section modes,
the effective one-dimensional operator and the straightened forms on the
reference cylinder.
"""
