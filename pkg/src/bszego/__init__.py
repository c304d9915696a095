"""Bernstein-Szegő measures: moments, orthogonal polynomials, reconstruction."""
