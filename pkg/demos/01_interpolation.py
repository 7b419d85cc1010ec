"""Truncated Schur problem for a 2x2 sequence: classify, parametrize, solve.

Run with ``python3 demos/01_interpolation.py``.
"""
import numpy as np

from schurlab.resolvent import lft_apply, lft_series, resolvent_Btilde
from schurlab.schur import SchurSequence, classify, schur_parameters, taylor_from_parameters
from schurlab.weyl import membership, weyl_ball

rng = np.random.default_rng(7)

# Build data from contractive parameters, so it is nondegenerate by construction.
params = [0.6 * np.array([[0.5, 0.2j], [0.1, -0.4]]), np.array([[0.3, 0], [0.2, 0.1]]), np.diag([0.2, -0.5j])]
seq = taylor_from_parameters(params)
print("data c_0..c_2:")
print(np.round(seq.coeffs, 4))
print("classification:", classify(seq))

back = schur_parameters(seq).params
print("parameters recovered to", max(np.linalg.norm(a - b, 2) for a, b in zip(back, params)))

# Every contractive constant parameter gives a solution through the LFT.
rt = resolvent_Btilde(seq)
z = 0.4 + 0.3j
ball = weyl_ball(seq, z)
print(f"\nWeyl ball at z = {z}: |center| = {np.linalg.norm(ball.center, 2):.4f}, "
      f"||rho_r|| = {np.linalg.norm(ball.rho_right, 2):.4f}, ||rho_l|| = {np.linalg.norm(ball.rho_left, 2):.2e}")
for k in range(5):
    w = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    w *= rng.uniform(0, 1) / np.linalg.norm(w, 2)
    coeff_err = np.max(np.abs(lft_series(rt, w, seq.n).coeffs - seq.coeffs))
    inside = membership(ball, lft_apply(rt, w, z))
    print(f"parameter {k}: reproduces data to {coeff_err:.1e}, value in ball: {inside}")
