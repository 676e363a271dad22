"""
GermCalc
Exact-arithmetic calculus engine for germs of singular holomorphic foliations.
Built on truncated power series over Gaussian and cyclotomic rationals.
"""

__version__ = "0.1.0"
