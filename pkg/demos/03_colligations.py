"""Unitary colligations: realize, multiply, factor and simulate.

Run with ``python3 demos/03_colligations.py``.
"""
import numpy as np

from schurlab.colligation import (
    char_function,
    embed_contraction,
    factor_colligation,
    jordan_block,
    product,
    simulate,
    taylor_coeffs,
)

# A scalar contraction a is realized by the Blaschke factor with zero at a.
a = 0.5
d = embed_contraction(np.array([[a]]))
print("Blaschke coefficients:", np.round(taylor_coeffs(d, 4).coeffs.ravel(), 6))

# The nilpotent Jordan block of size 3 gives z^3.
print("Jordan-3 coefficients:", np.round(taylor_coeffs(embed_contraction(jordan_block(3)), 5).coeffs.ravel().real, 12))

# Products multiply characteristic functions.
d2 = embed_contraction(np.array([[-0.3j]]))
z = 0.2 + 0.7j
print("product check:", abs(char_function(product(d, d2), z) - char_function(d, z) @ char_function(d2, z))[0, 0])

# Factoring along the invariant subspace span{e_2} of the Jordan block.
dj = embed_contraction(jordan_block(2))
d1, dd2 = factor_colligation(dj, np.array([[0.0], [1.0]]))
print("round trip error:", np.max(np.abs(taylor_coeffs(product(d1, dd2), 4).coeffs - taylor_coeffs(dj, 4).coeffs)))

# The open system conserves energy at every step.
trace = simulate(dj, np.array([1.0, -1j]), np.ones(6))
print("outputs:", np.round(trace.outputs.ravel(), 6))
print("largest energy residual:", trace.energy_residuals.max())
