"""Exact homotopy transfer, secondary Massey products and the induced Poisson bracket
for factorization algebras on R and R^2, computed over the rationals."""

__version__ = "0.1.0"
