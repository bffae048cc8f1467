"""Exact toric piecewise-affine maps to Bruhat-Tits buildings."""
