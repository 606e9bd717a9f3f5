"""Exact-arithmetic library: rationals, Beta values, Airy and multiplier
series, the VIM step and its bounds."""
