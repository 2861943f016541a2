"""Geometry, special functions, kernels, transforms and the radial solver."""
