"""Exact tools for even lattices with odd square-free discriminant, their
local forms and theta characters, and q-expansion censuses of Jacobi forms."""

__version__ = "0.1.0"
