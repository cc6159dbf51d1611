"""Certified computations around the first sign change of theta(x) - x."""
