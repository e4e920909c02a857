"""Numerical laboratory for diagonal s-sum inequalities of m-linear forms on l_p^n."""

__version__ = "1.0.0"
