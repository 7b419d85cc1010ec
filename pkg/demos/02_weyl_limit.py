"""Limit Weyl ball of theta(z) = z/2 and its link to the defect function.

The right semi-radius at z = 0 stays at 3/4 for every truncation level, and
in the limit it equals |phi(z)|^2 where phi is the outer factor of
1 - |theta|^2 on the circle. Run with ``python3 demos/02_weyl_limit.py``.
"""
import numpy as np

from schurlab.boundary import defect_function, sample
from schurlab.schur import SchurSequence, TruncatedSeries
from schurlab.weyl import weyl_ball, weyl_limit

seq = SchurSequence.scalar([0, 0.5] + [0] * 40)
print("rho_r(0) at levels 1, 5, 20, 40:",
      [round(float(weyl_ball(seq, 0, n=n).rho_right[0, 0].real), 12) for n in (1, 5, 20, 40)])

phi = defect_function(sample(TruncatedSeries(np.array([0, 0.5]).reshape(-1, 1, 1))), "right")
print("outer factor coefficients:", np.round(phi.coeffs.coeffs.ravel(), 10))
for z in (0.3, 0.6j, -0.5 + 0.5j):
    lim = weyl_limit(seq, z)
    print(f"z = {z}: rho_r,inf = {lim.rho_right[0, 0].real:.10f}, |phi(z)|^2 = {abs(phi.evaluate(z)[0, 0]) ** 2:.10f}, "
          f"levels = {lim.n_reached}, defect ranks = ({lim.defect_rank_right}, {lim.defect_rank_left})")
