"""hyperfrac: fractional Laplacian on hyperbolic space."""
