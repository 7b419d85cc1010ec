"""Internal scattering, regular extensions and Darlington synthesis on the grid.

For a contractive ``theta`` (``p x q``) with right defect function ``phi``
(``r x q``) and left one ``psi`` (``p x s``), the internal scattering block

    chi = -omega0 theta^* upsilon0,
    omega0^* = Pi^+ phi^*,   upsilon0 = Sigma^+ psi,

is the unique ``r x s`` function making ``[[chi, phi], [psi, theta]]``
contractive with the right defect structure. A lossless (two-sided inner)
extension with lower-right block ``theta`` is obtained from any *-inner
``omega`` and inner ``upsilon`` for which ``omega chi upsilon`` is analytic:

    Xi = [[omega chi upsilon, omega phi], [psi upsilon, theta]].

Only scalar-identity delays ``omega = z^a I``, ``upsilon = z^b I`` are
searched by :func:`darlington_feasibility`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import (
    BoundaryGrid,
    BoundarySamples,
    OuterFactor,
    _batched_adjoint,
    _poly_samples,
    analyticity_report,
    defect_function,
    defect_pointwise,
    inner_check,
    sample,
)
from .colligation import UnitaryColligation
from .errors import (
    AnalyticityViolated,
    DenominatorVanishes,
    DeterminantVanishesIdentically,
    NotContractiveOnCircle,
    NotInner,
    RangeInclusionViolated,
    ShapeMismatch,
)
from .linalg import DEFAULT_TOL
from .schur import SchurSequence, TruncatedSeries

__all__ = [
    "InternalScattering",
    "ExtensionBlocks",
    "FeasibilityReport",
    "ScalarMultiple",
    "PseudocontinuationReport",
    "internal_scattering",
    "regular_extension",
    "darlington_feasibility",
    "loss_metric",
    "scalar_multiple",
    "pseudocontinuation_check",
    "series_from_samples",
]


def series_from_samples(values, M, tol=1e-13):
    """Taylor coefficients (degrees ``0 .. M/2 - 1``) from grid values,
    with trailing coefficients below ``tol * max`` dropped."""
    values = np.asarray(values, dtype=complex)
    coef = (np.fft.fft(values, axis=0) / M)[: M // 2]
    if coef.size == 0:
        return TruncatedSeries(coef[:1])
    norms = np.linalg.norm(coef.reshape(coef.shape[0], -1), axis=1)
    top = norms.max()
    keep = np.nonzero(norms > tol * max(top, 1e-300))[0]
    last = int(keep[-1]) if keep.size else 0
    return TruncatedSeries(coef[: last + 1])


def _sup(values):
    if values.size == 0 or values.shape[0] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(values, ord=2, axis=(1, 2))))


def _pinv_sqrt_and_ranks(nsq, tol):
    """Pointwise pseudo-inverse of ``nsq^{1/2}`` and pointwise ranks.

    Ranks are read off ``nsq`` itself (not its square root, which would
    lift rounding noise to ``sqrt(eps)``) against the absolute cutoff
    ``rank_tol``; defect symbols of contractions have norm at most one.
    """
    a = 0.5 * (nsq + _batched_adjoint(nsq))
    w, v = np.linalg.eigh(a)
    keep = w > tol.rank_tol
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    return (v * inv[:, None, :]) @ _batched_adjoint(v), keep.sum(axis=1)


def _fill_excluded(values, excluded, M):
    """Replace values at ``excluded`` grid indices by the least-squares choice
    that minimizes the energy in the harmonics ``|k| >= M/4``."""
    excluded = np.asarray(sorted(excluded), dtype=int)
    if excluded.size == 0 or values.size == 0:
        return values
    out = values.copy()
    out[excluded] = 0.0
    ks = np.arange(M)
    signed = np.where(ks < M // 2, ks, ks - M)
    band = ks[np.abs(signed) >= M // 4]
    known = (np.fft.fft(out, axis=0) / M)[band]
    A = np.exp(-2j * np.pi * np.outer(band, excluded) / M) / M
    flat = known.reshape(band.size, -1)
    x, *_ = np.linalg.lstsq(A, -flat, rcond=None)
    out[excluded] = x.reshape((excluded.size,) + values.shape[1:])
    return out


def _rank_mode(ranks):
    return int(np.bincount(ranks).argmax()) if ranks.size else 0


@dataclass(frozen=True, eq=False)
class InternalScattering:
    """Internal scattering block and its ingredients on the grid.

    ``chi`` has shape ``rank(phi) x rank(psi)``. ``excluded`` lists grid
    points where ``Pi`` or ``Sigma`` drops rank; ``chi`` is filled there by a
    band-limited least-squares interpolation.
    """

    chi: BoundarySamples
    omega0: BoundarySamples
    upsilon0: BoundarySamples
    xi0: BoundarySamples
    phi: OuterFactor
    psi: OuterFactor
    excluded: tuple
    range_residual: float

    @property
    def xi0_norm(self):
        return self.xi0.sup_norm()

    @property
    def trivial(self):
        return self.phi.rank == 0 and self.psi.rank == 0


def internal_scattering(theta, phi=None, psi=None, tol=DEFAULT_TOL):
    """Internal scattering block ``chi = -omega0 theta^* upsilon0``.

    Parameters
    ----------
    theta : BoundarySamples
        Contractive ``p x q`` samples.
    phi, psi : OuterFactor, optional
        Right and left defect functions; computed when omitted.

    Raises
    ------
    RangeInclusionViolated
        If ``range phi^*`` is not inside ``range Pi`` (or ``range psi``
        inside ``range Sigma``) at a grid point of full a.e. rank. The
        check uses ``sqrt(residual_tol)``, the accuracy to which a kernel
        vector of ``Pi`` is controlled by a factorization residual.
    """
    grid = theta.grid
    M, p, q = grid.M, theta.p, theta.q
    if theta.sup_norm() > 1 + tol.psd_tol:
        raise NotContractiveOnCircle(f"sup norm {theta.sup_norm():.6g} exceeds 1")
    phi = phi if phi is not None else defect_function(theta, "right", tol)
    psi = psi if psi is not None else defect_function(theta, "left", tol)
    if phi.samples.q != q or psi.samples.p != p:
        raise ShapeMismatch("defect functions do not match the shape of theta")
    v = theta.values
    vh = _batched_adjoint(v)
    pi_pinv, pi_ranks = _pinv_sqrt_and_ranks(np.eye(q) - vh @ v, tol)
    sg_pinv, sg_ranks = _pinv_sqrt_and_ranks(np.eye(p) - v @ vh, tol)
    ph = phi.samples.values
    ps = psi.samples.values
    omega0 = _batched_adjoint(pi_pinv @ _batched_adjoint(ph))
    upsilon0 = sg_pinv @ ps

    bad = (pi_ranks != _rank_mode(pi_ranks)) | (sg_ranks != _rank_mode(sg_ranks))
    excluded = tuple(int(i) for i in np.nonzero(bad)[0])
    good = ~bad

    # range inclusions: phi^* = Pi Pi^+ phi^*, psi = Sigma Sigma^+ psi
    pi, sigma = defect_pointwise(theta, tol)
    r1 = pi.values @ _batched_adjoint(omega0) - _batched_adjoint(ph)
    r2 = sigma.values @ upsilon0 - ps
    resid = max(_sup(r1[good]), _sup(r2[good]))
    if resid > np.sqrt(tol.residual_tol):
        raise RangeInclusionViolated(f"range inclusion residual {resid:.3e}")

    chi = -(omega0 @ vh @ upsilon0)
    chi = _fill_excluded(chi, excluded, M)
    xi0 = np.concatenate([
        np.concatenate([chi, ph], axis=2),
        np.concatenate([ps, v], axis=2),
    ], axis=1)
    return InternalScattering(
        chi=BoundarySamples(chi, grid),
        omega0=BoundarySamples(omega0, grid),
        upsilon0=BoundarySamples(upsilon0, grid),
        xi0=BoundarySamples(xi0, grid),
        phi=phi,
        psi=psi,
        excluded=excluded,
        range_residual=resid,
    )


@dataclass(frozen=True, eq=False)
class ExtensionBlocks:
    """Blocks of ``Xi = [[theta11, theta12], [theta21, theta]]``."""

    theta11: BoundarySamples
    theta12: BoundarySamples
    theta21: BoundarySamples
    theta22: BoundarySamples
    xi: BoundarySamples
    tail: float
    scattering: InternalScattering

    def series(self, block="xi"):
        """Taylor coefficients of a block, from the grid transform."""
        return series_from_samples(getattr(self, block).values, self.xi.M)

    def to_sequence(self):
        return SchurSequence(self.series("xi").coeffs)

    def inner_residual(self, tol=DEFAULT_TOL):
        return inner_check(self.xi, "two_sided", tol)


def _delay_samples(obj, size, grid):
    """Samples of ``z^a I`` for an integer ``a``, or of a series."""
    if isinstance(obj, (int, np.integer)):
        t = grid.points ** int(obj)
        return t[:, None, None] * np.eye(size)[None]
    if isinstance(obj, TruncatedSeries):
        return _poly_samples(obj.coeffs, grid)
    if isinstance(obj, BoundarySamples):
        return obj.values
    raise TypeError(f"cannot use {type(obj).__name__} as an inner factor")


def regular_extension(theta, omega=0, upsilon=0, tol=DEFAULT_TOL, scattering=None):
    """Extension ``Xi`` built from a *-inner ``omega`` and an inner ``upsilon``.

    ``omega`` and ``upsilon`` may be series, samples, or integers ``a`` meaning
    ``z^a I``.

    Raises
    ------
    NotInner
        ``omega`` is not *-inner or ``upsilon`` is not inner on the grid.
    AnalyticityViolated
        ``omega chi upsilon`` has a negative-frequency tail of size at least
        ``residual_tol``, so ``Xi`` would not be a Schur function.
    """
    grid = theta.grid
    sc = scattering if scattering is not None else internal_scattering(theta, tol=tol)
    r, s = sc.chi.p, sc.chi.q
    om = _delay_samples(omega, r, grid)
    up = _delay_samples(upsilon, s, grid)
    if om.shape[2] != r or up.shape[1] != s:
        raise ShapeMismatch(f"inner factors must have {r} columns (omega) and {s} rows (upsilon)")
    if om.shape[1] and inner_check(BoundarySamples(om, grid), "star_inner", tol) > tol.residual_tol:
        raise NotInner("omega is not *-inner on the grid")
    if up.shape[2] and inner_check(BoundarySamples(up, grid), "inner", tol) > tol.residual_tol:
        raise NotInner("upsilon is not inner on the grid")
    t11 = om @ sc.chi.values @ up
    tail, _ = analyticity_report(BoundarySamples(t11, grid))
    if tail >= tol.residual_tol:
        raise AnalyticityViolated(f"omega chi upsilon has negative tail {tail:.3e}")
    t12 = om @ sc.phi.samples.values
    t21 = sc.psi.samples.values @ up
    xi = np.concatenate([
        np.concatenate([t11, t12], axis=2),
        np.concatenate([t21, theta.values], axis=2),
    ], axis=1)
    return ExtensionBlocks(
        theta11=BoundarySamples(t11, grid),
        theta12=BoundarySamples(t12, grid),
        theta21=BoundarySamples(t21, grid),
        theta22=theta,
        xi=BoundarySamples(xi, grid),
        tail=tail,
        scattering=sc,
    )


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    residual_right: float
    residual_left: float
    delays: tuple | None
    verdict: str
    inner_residual: float | None
    tail: float | None
    extension: ExtensionBlocks | None = None

    def to_json(self):
        return {
            "residual_right": self.residual_right,
            "residual_left": self.residual_left,
            "delays": list(self.delays) if self.delays is not None else None,
            "verdict": self.verdict,
            "inner_residual": self.inner_residual,
        }


def _factor_residual(factor, nsq, left):
    vals = factor.samples.values
    prod = vals @ _batched_adjoint(vals) if left else _batched_adjoint(vals) @ vals
    diff = prod - nsq
    keep = np.ones(diff.shape[0], dtype=bool)
    keep[list(factor.excluded)] = False
    return _sup(diff[keep])


def darlington_feasibility(theta, delay_bound=4, tol=DEFAULT_TOL):
    """Search for a lossless extension of ``theta`` with monomial delays.

    Both factorizations ``phi^* phi = I - theta^* theta`` and
    ``psi psi^* = I - theta theta^*`` must hold to ``residual_tol``
    (otherwise ``infeasible_factorization``). Then total delays
    ``a + b = 0, 1, ..., delay_bound`` are tried. Scalar delays commute, so
    only the total matters; the pair is reported as ``(a + b, 0)``. A pair
    is accepted when ``z^(a+b) chi`` is analytic and the assembled ``Xi`` is
    two-sided inner, both within ``residual_tol``. Running out of delays
    gives ``no_inner_pair_found``, which is not a proof of infeasibility.
    """
    v = theta.values
    vh = _batched_adjoint(v)
    phi = defect_function(theta, "right", tol)
    psi = defect_function(theta, "left", tol)
    res_r = _factor_residual(phi, np.eye(theta.q) - vh @ v, left=False)
    res_l = _factor_residual(psi, np.eye(theta.p) - v @ vh, left=True)
    if not phi.log_integrable:
        res_r = max(res_r, _sup(np.eye(theta.q) - vh @ v))
    if not psi.log_integrable:
        res_l = max(res_l, _sup(np.eye(theta.p) - v @ vh))
    if res_r >= tol.residual_tol or res_l >= tol.residual_tol:
        return FeasibilityReport(res_r, res_l, None, "infeasible_factorization", None, None)
    sc = internal_scattering(theta, phi, psi, tol)
    best_tail = None
    for total in range(delay_bound + 1):
        try:
            ext = regular_extension(theta, total, 0, tol, scattering=sc)
        except AnalyticityViolated:
            shifted = _delay_samples(total, sc.chi.p, theta.grid) @ sc.chi.values
            tail, _ = analyticity_report(BoundarySamples(shifted, theta.grid))
            best_tail = tail if best_tail is None else min(best_tail, tail)
            continue
        inner = ext.inner_residual(tol)
        if inner < tol.residual_tol:
            return FeasibilityReport(res_r, res_l, (total, 0), "feasible", inner, ext.tail, ext)
        best_tail = ext.tail if best_tail is None else min(best_tail, ext.tail)
    return FeasibilityReport(res_r, res_l, None, "no_inner_pair_found", None, best_tail)


def loss_metric(theta, tol=DEFAULT_TOL):
    """Grid suprema ``(||Pi||, ||Sigma||, max of the two)``."""
    pi, sigma = defect_pointwise(theta, tol)
    a, b = pi.sup_norm(), sigma.sup_norm()
    return a, b, max(a, b)


@dataclass(frozen=True, eq=False)
class ScalarMultiple:
    """``delta = det theta`` and ``nu = delta theta^{-1}`` with checks.

    Iterating yields ``(delta, nu)``.
    """

    delta: TruncatedSeries
    nu: TruncatedSeries
    degree: int
    residual: float
    nu_inner_residual: float
    delta_samples: BoundarySamples
    nu_samples: BoundarySamples

    def __iter__(self):
        yield self.delta
        yield self.nu


def scalar_multiple(source, grid=None, tol=DEFAULT_TOL):
    """Scalar inner multiple of a square inner function.

    ``source`` is a :class:`UnitaryColligation` with ``p = q`` or square
    inner samples. ``delta`` comes from the grid transform of ``det theta``;
    ``nu = delta theta^*`` on the circle (equal to ``delta theta^{-1}`` for
    inner ``theta``). ``degree`` is the winding number of ``det theta``,
    i.e. the number of zeros of ``delta`` in the disk.
    """
    if isinstance(source, UnitaryColligation):
        theta = sample(source, grid or BoundaryGrid())
    else:
        theta = source
    if theta.p != theta.q:
        raise ShapeMismatch(f"theta must be square, got {theta.p}x{theta.q}")
    grid, M, m = theta.grid, theta.M, theta.p
    v = theta.values
    det = np.linalg.det(v) if m else np.ones(M, dtype=complex)
    if np.max(np.abs(det)) < tol.rank_tol:
        raise DeterminantVanishesIdentically("det theta vanishes on the grid")
    nu = det[:, None, None] * _batched_adjoint(v)
    steps = np.angle(np.roll(det, -1) / det)
    degree = int(round(float(np.sum(steps)) / (2 * np.pi)))
    ident = np.eye(m)[None]
    resid = max(_sup(v @ nu - det[:, None, None] * ident), _sup(nu @ v - det[:, None, None] * ident))
    nu_s = BoundarySamples(nu, grid)
    return ScalarMultiple(
        delta=series_from_samples(det.reshape(M, 1, 1), M),
        nu=series_from_samples(nu, M),
        degree=degree,
        residual=resid,
        nu_inner_residual=inner_check(nu_s, "two_sided", tol),
        delta_samples=BoundarySamples(det.reshape(M, 1, 1), grid),
        nu_samples=nu_s,
    )


@dataclass(frozen=True, eq=False)
class PseudocontinuationReport:
    residual: float
    verdict: str
    inner_limit: np.ndarray
    outer_limit: np.ndarray


def _radial_limit(f, t, side, h0=1e-2, levels=4):
    """Richardson-extrapolated limit of ``f(r t)`` as ``r -> 1`` from one side."""
    sign = -1.0 if side == "inner" else 1.0
    hs = [h0 / 2 ** k for k in range(levels)]
    table = [f((1 + sign * h) * t) for h in hs]
    for order in range(1, levels):
        table = [(2 ** order * table[i + 1] - table[i]) / (2 ** order - 1) for i in range(len(table) - 1)]
    return table[0]


def pseudocontinuation_check(num, den=None, inner=None, grid=None, tol=DEFAULT_TOL):
    """Compare the two radial limits of a rational expression on the circle.

    Parameters
    ----------
    num : TruncatedSeries
        Matrix polynomial numerator.
    den : array_like, optional
        Scalar denominator coefficients in ascending powers (default ``1``).
    inner : BoundarySamples, optional
        Boundary values of the function being matched from inside the disk.
        When given they replace the inner radial limit of ``num / den``, so
        the check asks whether ``num / den`` continues that function across
        the circle.

    Returns
    -------
    PseudocontinuationReport
        ``verdict`` is ``"rational witness"`` when the residual is below
        ``residual_tol`` and ``"no rational witness"`` otherwise.
    """
    grid = grid or (inner.grid if inner is not None else BoundaryGrid())
    den = np.atleast_1d(np.asarray([1.0] if den is None else den, dtype=complex))
    nz = np.nonzero(np.abs(den) > 0)[0]
    if nz.size == 0:
        raise DenominatorVanishes("denominator is identically zero")
    den = den[: nz[-1] + 1]
    if den.size > 1:
        roots = np.roots(den[::-1])
        # the radial limits sample 1 +- h for h <= 1e-2
        if np.any(np.abs(roots) <= 1.02):
            raise DenominatorVanishes("denominator has a zero in the closed disk or next to the circle")
    c = num.coeffs

    def f(z):
        zp = z[:, None, None]
        acc = np.zeros((z.size,) + c.shape[1:], dtype=complex)
        for ck in c[::-1]:
            acc = acc * zp + ck
        d = np.polyval(den[::-1], z)
        return acc / d[:, None, None]

    t = grid.points
    outer = _radial_limit(f, t, "outer")
    inside = inner.values if inner is not None else _radial_limit(f, t, "inner")
    resid = _sup(outer - inside)
    verdict = "rational witness" if resid < tol.residual_tol else "no rational witness"
    return PseudocontinuationReport(resid, verdict, inside, outer)
