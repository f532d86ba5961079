"""Numerical verification suite for weighted kernel-sequence norms and the
Wick-ordered composition of bosonic interaction kernels."""

__version__ = "0.1.0"
