"""Lossless (Darlington) extensions of small scalar Schur functions.

For theta = 1/2 the extension is a constant unitary 2x2 matrix. For z/2 one
delay is needed before the internal-scattering block becomes analytic.
Run with ``python3 demos/04_darlington.py``.
"""
import numpy as np

from schurlab.boundary import sample
from schurlab.darlington import darlington_feasibility, internal_scattering, loss_metric
from schurlab.schur import TruncatedSeries


def poly(*c):
    return TruncatedSeries(np.array(c, dtype=complex).reshape(-1, 1, 1))


for name, theta in (("1/2", poly(0.5)), ("z/2", poly(0, 0.5)), ("(1+z)/2", poly(0.5, 0.5)), ("z", poly(0, 1))):
    samples = sample(theta)
    rep = darlington_feasibility(samples)
    print(f"theta = {name}: verdict {rep.verdict}, delays {rep.delays}, loss metric {np.round(loss_metric(samples), 6)}")
    if rep.extension is not None:
        coeffs = rep.extension.series("xi").coeffs
        print(f"  Xi has {coeffs.shape[0]} Taylor coefficients, inner residual {rep.inner_residual:.1e}")
        print("  Xi_0 =", np.round(coeffs[0], 6).tolist())
    print(f"  ||Xi0|| = {internal_scattering(samples).xi0_norm:.12f}")
