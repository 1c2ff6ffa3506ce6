"""Numerical kernels: spectral calculus, solvers, moments, identities and renderings."""
