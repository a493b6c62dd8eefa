"""Convolution of persistence modules: oracles, resolutions, derived functors."""
