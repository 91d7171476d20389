"""Shared numerical tolerances.

Two tiers: ASSERT_TOL guards logical claims (orthogonality, Gram equality,
verdicts), RESIDUAL_TOL guards linear-algebra residuals (eigendecomposition
reconstruction, trace preservation). Every public operation that compares
against a tolerance takes it as a keyword argument defaulting to one of
these, so callers can tighten or relax per call.
"""

ASSERT_TOL = 1e-10
RESIDUAL_TOL = 1e-12

# Cyclic Jacobi sweep controls for the Hermitian eigensolver.
JACOBI_OFFDIAG_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 100
